//! C ABI for the primegrid engine.
//!
//! Every fallible function returns a [`PgStatus`]; on failure the message is
//! kept per thread and can be copied out with [`pg_last_error`]. Handles are
//! opaque and must be released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use primegrid::analytic;
use primegrid::seqgen::{Generator, GeneratorConfig, InputDistribution, Model, ALPHABET};
use primegrid::shiftmodel::{self, Example};
use primegrid::signature;
use primegrid::trail::{self, TrailRun};
use primegrid::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvariantViolation = 3,
    Numeric = 4,
    Resource = 5,
    Generation = 6,
    Format = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&Error> for PgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => PgStatus::Domain,
            Error::InvariantViolation(_) => PgStatus::InvariantViolation,
            Error::Numeric(_) => PgStatus::Numeric,
            Error::Resource(_) => PgStatus::Resource,
            Error::Generation(_) => PgStatus::Generation,
            Error::Format(_) | Error::Json(_) => PgStatus::Format,
            Error::Io(_) => PgStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PgStatus, msg: impl Into<String>) -> PgStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), PgStatus>) -> PgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PgStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(PgStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: primegrid::Result<T>) -> Result<T, PgStatus> {
    r.map_err(|e| fail(PgStatus::from(&e), e.to_string()))
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), PgStatus> {
    if p.is_null() {
        Err(fail(PgStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL,
/// or 0 when there is no error.
#[no_mangle]
pub unsafe extern "C" fn pg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `‖n‖∞`, the largest exponent in the factorization of `n ≥ 1`.
#[no_mangle]
pub unsafe extern "C" fn pg_norm_inf(n: u64, out: *mut u32) -> PgStatus {
    guard(|| {
        nonnull(out, "out")?;
        let s = lib(signature::factor_signature(n))?;
        *out = s.norm_inf();
        Ok(())
    })
}

/// Closed-form constants.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PgConstants {
    pub c: f64,
    pub bound_bunched: f64,
    pub bound_spread: f64,
    pub iid_expected_hop: f64,
}

#[no_mangle]
pub unsafe extern "C" fn pg_constants(out: *mut PgConstants) -> PgStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = PgConstants {
            c: analytic::constant_c(),
            bound_bunched: analytic::bound_bunched(),
            bound_spread: analytic::bound_spread(),
            iid_expected_hop: analytic::iid_expected_hop(),
        };
        Ok(())
    })
}

/// `q_k = 1/ζ(k+1) − 1/ζ(k)` for `k ≥ 1`.
#[no_mangle]
pub unsafe extern "C" fn pg_letter_density(k: u32, out: *mut f64) -> PgStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = lib(analytic::q(k))?;
        Ok(())
    })
}

/// Trail over `[2, to]` held in memory.
pub struct PgTrail(TrailRun);

/// Computes the trail up to `to` inclusive.
#[no_mangle]
pub unsafe extern "C" fn pg_trail_compute(
    to: u64,
    segment_size: u64,
    out: *mut *mut PgTrail,
) -> PgStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = ptr::null_mut();
        if segment_size == 0 {
            return Err(fail(PgStatus::Domain, "segment size must be positive"));
        }
        let run = lib(trail::compute_trail(to, segment_size))?;
        *out = Box::into_raw(Box::new(PgTrail(run)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pg_trail_free(t: *mut PgTrail) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of primes covered, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pg_trail_prime_count(t: *const PgTrail) -> u64 {
    t.as_ref().map_or(0, |t| t.0.checkpoint.prime_count)
}

/// `L∞(to)`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pg_trail_length(t: *const PgTrail) -> u64 {
    t.as_ref().map_or(0, |t| t.0.checkpoint.cumsum_linf)
}

unsafe fn copy_out(src: &[u64], buf: *mut u64, len: usize, written: *mut usize) -> Result<(), PgStatus> {
    nonnull(written, "written")?;
    *written = src.len();
    if len < src.len() {
        return Err(fail(
            PgStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        ));
    }
    if !src.is_empty() {
        nonnull(buf, "buf")?;
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Copies `L∞(p_1), L∞(p_2), …` into `buf`. `*written` receives the number
/// of values, also when the buffer is too small.
#[no_mangle]
pub unsafe extern "C" fn pg_trail_stops(
    t: *const PgTrail,
    buf: *mut u64,
    len: usize,
    written: *mut usize,
) -> PgStatus {
    guard(|| {
        nonnull(t, "trail")?;
        copy_out((*t).0.stops.values(), buf, len, written)
    })
}

/// Copies the primes `p_1, p_2, …` into `buf`.
#[no_mangle]
pub unsafe extern "C" fn pg_trail_primes(
    t: *const PgTrail,
    buf: *mut u64,
    len: usize,
    written: *mut usize,
) -> PgStatus {
    guard(|| {
        nonnull(t, "trail")?;
        copy_out(&(*t).0.primes, buf, len, written)
    })
}

/// Calibrated worked example.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PgMarkovExample {
    pub p1: f64,
    pub p2: f64,
    pub p_star: f64,
    pub expected_hop: f64,
}

/// `which`: 0 = nothing eliminated, 1 = `{1111}`, 2 = `{1111, 11121112}`.
#[no_mangle]
pub unsafe extern "C" fn pg_markov_example(which: u32, out: *mut PgMarkovExample) -> PgStatus {
    guard(|| {
        nonnull(out, "out")?;
        let which = match which {
            0 => Example::Empty,
            1 => Example::Single,
            2 => Example::Double,
            _ => return Err(fail(PgStatus::Domain, format!("no example {which}"))),
        };
        let cal = lib(shiftmodel::calibrate_example(which))?;
        *out = PgMarkovExample {
            p1: cal.p1,
            p2: cal.p2,
            p_star: cal.p_star,
            expected_hop: cal.shift.expected_hop(),
        };
        Ok(())
    })
}

/// Forbidden-word-free sequence generator.
pub struct PgGenerator(Generator);

/// `model` is 1 or 2; `p` points at 26 probabilities (letters 1…25, then ★).
#[no_mangle]
pub unsafe extern "C" fn pg_generator_new(
    model: u32,
    p: *const f64,
    seed: u64,
    out: *mut *mut PgGenerator,
) -> PgStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = ptr::null_mut();
        nonnull(p, "p")?;
        let model = match model {
            1 => Model::One,
            2 => Model::Two,
            _ => return Err(fail(PgStatus::Domain, format!("model must be 1 or 2, got {model}"))),
        };
        let mut arr = [0.0; ALPHABET];
        arr.copy_from_slice(std::slice::from_raw_parts(p, ALPHABET));
        let dist = lib(InputDistribution::new(arr))?;
        let g = lib(Generator::new(GeneratorConfig::standard(model), &dist, seed))?;
        *out = Box::into_raw(Box::new(PgGenerator(g)));
        Ok(())
    })
}

/// Fills `buf` with the next `len` letters (1…25, 26 for ★).
#[no_mangle]
pub unsafe extern "C" fn pg_generator_next(g: *mut PgGenerator, buf: *mut u8, len: usize) -> PgStatus {
    guard(|| {
        nonnull(g, "generator")?;
        if len == 0 {
            return Ok(());
        }
        nonnull(buf, "buf")?;
        let out = std::slice::from_raw_parts_mut(buf, len);
        let g = &mut (*g).0;
        for slot in out {
            *slot = lib(g.next_letter())?;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pg_generator_free(g: *mut PgGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}
