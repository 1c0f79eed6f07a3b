//! Streaming accumulation of the trail length `L∞(N)` with its value at
//! every prime, plus resumable on-disk runs.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signature::{NormSegment, NormSieve, DEFAULT_SEGMENT_SIZE};
use crate::FORMAT_VERSION;

/// State after processing every integer below `next_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailCheckpoint {
    pub next_n: u64,
    /// `‖next_n − 1‖∞`.
    pub last_norm: u8,
    /// `L∞(next_n − 1)`.
    pub cumsum_linf: u64,
    /// `π(next_n − 1)`.
    pub prime_count: u64,
}

impl TrailCheckpoint {
    /// The trail before its first step, sitting at 1.
    pub fn initial() -> Self {
        TrailCheckpoint {
            next_n: 2,
            last_norm: 0,
            cumsum_linf: 0,
            prime_count: 0,
        }
    }
}

impl Default for TrailCheckpoint {
    fn default() -> Self {
        Self::initial()
    }
}

/// `L∞(p_k)` for k = 1, 2, …
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrimeStops {
    values: Vec<u64>,
}

impl PrimeStops {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vec(values: Vec<u64>) -> Result<Self> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::format("prime stops must be strictly increasing"));
        }
        Ok(PrimeStops { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `L∞(p_k)`, 1-based.
    pub fn get(&self, k: usize) -> Option<u64> {
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    fn push(&mut self, v: u64) {
        debug_assert!(self.values.last().map_or(true, |&l| l < v));
        self.values.push(v);
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.values
    }
}

/// Length of one step of the trail under the Chebyshev metric.
#[inline]
pub fn hop(norm_k: u8, norm_k_plus_1: u8) -> u8 {
    norm_k.max(norm_k_plus_1)
}

fn check_alignment(segment: &NormSegment, cp: &TrailCheckpoint) -> Result<()> {
    if segment.lo() != cp.next_n {
        return Err(Error::domain(format!(
            "segment starts at {} but checkpoint expects {}",
            segment.lo(),
            cp.next_n
        )));
    }
    Ok(())
}

/// Advances the checkpoint across `segment`, appending one stop per prime.
pub fn stream_trail(
    segment: &NormSegment,
    checkpoint: &TrailCheckpoint,
    stops: &mut PrimeStops,
) -> Result<TrailCheckpoint> {
    stream(segment, checkpoint, stops, None)
}

/// As [`stream_trail`], also recording the primes themselves.
pub fn stream_trail_with_primes(
    segment: &NormSegment,
    checkpoint: &TrailCheckpoint,
    stops: &mut PrimeStops,
    primes: &mut Vec<u64>,
) -> Result<TrailCheckpoint> {
    stream(segment, checkpoint, stops, Some(primes))
}

fn stream(
    segment: &NormSegment,
    cp: &TrailCheckpoint,
    stops: &mut PrimeStops,
    mut primes: Option<&mut Vec<u64>>,
) -> Result<TrailCheckpoint> {
    check_alignment(segment, cp)?;
    let flags = segment.prime_flags();
    let mut last = cp.last_norm;
    let mut sum = cp.cumsum_linf;
    let mut count = cp.prime_count;
    for (i, &norm) in segment.norms().iter().enumerate() {
        sum += hop(last, norm) as u64;
        last = norm;
        if flags.get(i) {
            stops.push(sum);
            count += 1;
            if let Some(p) = primes.as_deref_mut() {
                p.push(segment.lo() + i as u64);
            }
        }
    }
    Ok(TrailCheckpoint {
        next_n: segment.hi(),
        last_norm: last,
        cumsum_linf: sum,
        prime_count: count,
    })
}

/// Everything a segment contributes to the trail that does not depend on
/// the state before it. Summaries of disjoint segments can be built in
/// parallel and applied in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentSummary {
    lo: u64,
    hi: u64,
    first_norm: u8,
    last_norm: u8,
    /// Sum of the hops strictly inside the segment.
    interior: u64,
    primes: Vec<u64>,
    /// Interior hop sum up to each prime.
    offsets: Vec<u64>,
}

impl SegmentSummary {
    pub fn of(segment: &NormSegment) -> Self {
        let norms = segment.norms();
        let flags = segment.prime_flags();
        let mut primes = Vec::new();
        let mut offsets = Vec::new();
        let mut interior = 0u64;
        for (i, &norm) in norms.iter().enumerate() {
            if i > 0 {
                interior += hop(norms[i - 1], norm) as u64;
            }
            if flags.get(i) {
                primes.push(segment.lo() + i as u64);
                offsets.push(interior);
            }
        }
        SegmentSummary {
            lo: segment.lo(),
            hi: segment.hi(),
            first_norm: norms[0],
            last_norm: *norms.last().expect("segments are non-empty"),
            interior,
            primes,
            offsets,
        }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Stops of this segment given the preceding state, and the new state.
    pub fn apply(
        &self,
        cp: &TrailCheckpoint,
        stops: &mut PrimeStops,
        primes: Option<&mut Vec<u64>>,
    ) -> Result<TrailCheckpoint> {
        if self.lo != cp.next_n {
            return Err(Error::domain(format!(
                "segment starts at {} but checkpoint expects {}",
                self.lo, cp.next_n
            )));
        }
        let base = cp.cumsum_linf + hop(cp.last_norm, self.first_norm) as u64;
        for &off in &self.offsets {
            stops.push(base + off);
        }
        if let Some(p) = primes {
            p.extend_from_slice(&self.primes);
        }
        Ok(TrailCheckpoint {
            next_n: self.hi,
            last_norm: self.last_norm,
            cumsum_linf: base + self.interior,
            prime_count: cp.prime_count + self.primes.len() as u64,
        })
    }
}

/// Splits `[lo, hi)` into consecutive segments of at most `size` integers.
pub fn segment_bounds(lo: u64, hi: u64, size: u64) -> Vec<(u64, u64)> {
    let size = size.max(1);
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = hi.min(a.saturating_add(size));
        out.push((a, b));
        a = b;
    }
    out
}

/// Trail state, stops and primes over an in-memory run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrailRun {
    pub checkpoint: TrailCheckpoint,
    pub stops: PrimeStops,
    pub primes: Vec<u64>,
}

/// Computes the trail over `[2, to]` in memory, sieving segments in parallel.
pub fn compute_trail(to: u64, segment_size: u64) -> Result<TrailRun> {
    if to < 2 {
        return Err(Error::domain("trail end must be at least 2"));
    }
    compute_trail_segments(&segment_bounds(2, to + 1, segment_size))
}

/// Computes the trail over an explicit, contiguous list of segments starting
/// at 2.
pub fn compute_trail_segments(bounds: &[(u64, u64)]) -> Result<TrailRun> {
    let hi = bounds.last().map(|b| b.1).ok_or_else(|| Error::domain("no segments"))?;
    let sieve = NormSieve::new(hi)?;
    let summaries = bounds
        .par_iter()
        .map(|&(a, b)| sieve.segment(a, b).map(|s| SegmentSummary::of(&s)))
        .collect::<Result<Vec<_>>>()?;
    let mut cp = TrailCheckpoint::initial();
    let mut stops = PrimeStops::new();
    let mut primes = Vec::new();
    for s in &summaries {
        cp = s.apply(&cp, &mut stops, Some(&mut primes))?;
    }
    Ok(TrailRun {
        checkpoint: cp,
        stops,
        primes,
    })
}

/// `L₁(N) = Σ_{K=1}^{N−1} (‖K+1‖₁ + ‖K‖₁)` by direct summation.
pub fn l1_trail(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("L1 is defined for N >= 1"));
    }
    if n == 1 {
        return Ok(0);
    }
    let sieve = NormSieve::new(n + 1)?;
    let mut total = 0u64;
    let mut last = 0u64;
    for (a, b) in segment_bounds(1, n + 1, DEFAULT_SEGMENT_SIZE) {
        let omega = sieve.norm_one_segment(a, b)?;
        for &w in &omega {
            total += w as u64;
            last = w as u64;
        }
    }
    // every K < N is counted twice, N once, and ‖1‖₁ = 0
    Ok(2 * total - last)
}

/// `(k, L∞(p_k)/p_k)` at `k = stride, 2·stride, …`.
pub fn ratio_series(stops: &PrimeStops, primes: &[u64], stride: usize) -> Result<Vec<(u64, f64)>> {
    if stride == 0 {
        return Err(Error::domain("stride must be at least 1"));
    }
    if primes.len() < stops.len() {
        return Err(Error::domain("prime list shorter than the stops"));
    }
    Ok((stride..=stops.len())
        .step_by(stride)
        .map(|k| (k as u64, stops.values()[k - 1] as f64 / primes[k - 1] as f64))
        .collect())
}

/// Writes raw little-endian u64 values.
pub fn write_u64_file(path: &Path, values: &[u64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads raw little-endian u64 values.
pub fn read_u64_file(path: &Path) -> Result<Vec<u64>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::format(format!(
            "{}: length {} is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const STOPS_FILE: &str = "stops.bin";
pub const PRIMES_FILE: &str = "primes.bin";

/// On-disk checkpoint of a resumable run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub next_n: u64,
    pub last_norm: u8,
    pub cumsum_linf: u64,
    pub prime_count: u64,
    pub stops_file: String,
    pub primes_file: String,
    pub format_version: u32,
    /// Inclusive end of the requested range.
    pub to: u64,
    pub segment_size: u64,
}

impl CheckpointManifest {
    pub fn checkpoint(&self) -> TrailCheckpoint {
        TrailCheckpoint {
            next_n: self.next_n,
            last_norm: self.last_norm,
            cumsum_linf: self.cumsum_linf,
            prime_count: self.prime_count,
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let m: CheckpointManifest = serde_json::from_str(&text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "checkpoint format {} is not supported (expected {FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    fn store(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        {
            let mut f = File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }
}

/// Options for a checkpointed run.
#[derive(Clone, Debug)]
pub struct TrailJob {
    pub dir: PathBuf,
    /// Inclusive end.
    pub to: u64,
    pub segment_size: u64,
    /// Segments sieved concurrently before their results are persisted.
    pub batch: usize,
    /// Stop after persisting this many segments, leaving a resumable state.
    pub max_segments: Option<usize>,
}

/// Outcome of [`run_checkpointed`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobStatus {
    pub manifest: CheckpointManifest,
    pub segments_done: usize,
    pub complete: bool,
}

/// Starts a fresh run in `job.dir`, which must not already hold a manifest.
pub fn start_checkpointed(job: &TrailJob) -> Result<JobStatus> {
    if job.to < 2 {
        return Err(Error::domain("trail end must be at least 2"));
    }
    if job.segment_size == 0 {
        return Err(Error::domain("segment size must be positive"));
    }
    fs::create_dir_all(&job.dir)?;
    if job.dir.join(MANIFEST_FILE).exists() {
        return Err(Error::domain(format!(
            "{} already holds a checkpoint; resume it instead",
            job.dir.display()
        )));
    }
    File::create(job.dir.join(STOPS_FILE))?;
    File::create(job.dir.join(PRIMES_FILE))?;
    let cp = TrailCheckpoint::initial();
    let manifest = CheckpointManifest {
        next_n: cp.next_n,
        last_norm: cp.last_norm,
        cumsum_linf: cp.cumsum_linf,
        prime_count: cp.prime_count,
        stops_file: STOPS_FILE.into(),
        primes_file: PRIMES_FILE.into(),
        format_version: FORMAT_VERSION,
        to: job.to,
        segment_size: job.segment_size,
    };
    manifest.store(&job.dir)?;
    advance(&job.dir, manifest, job.batch, job.max_segments)
}

/// Continues the run in `dir`. A new `to` may extend the range.
pub fn resume_checkpointed(
    dir: &Path,
    to: Option<u64>,
    batch: usize,
    max_segments: Option<usize>,
) -> Result<JobStatus> {
    let mut manifest = CheckpointManifest::load(dir)?;
    if let Some(to) = to {
        if to + 1 < manifest.next_n {
            return Err(Error::domain(format!(
                "checkpoint already covers up to {}",
                manifest.next_n - 1
            )));
        }
        manifest.to = to;
    }
    // bytes appended after the last manifest write belong to a lost segment
    let len = manifest.prime_count * 8;
    for name in [&manifest.stops_file, &manifest.primes_file] {
        let f = OpenOptions::new().write(true).open(dir.join(name))?;
        if f.metadata()?.len() < len {
            return Err(Error::format(format!("{name} is shorter than the checkpoint")));
        }
        f.set_len(len)?;
    }
    advance(dir, manifest, batch, max_segments)
}

fn advance(
    dir: &Path,
    mut manifest: CheckpointManifest,
    batch: usize,
    max_segments: Option<usize>,
) -> Result<JobStatus> {
    let end = manifest.to + 1;
    let bounds = segment_bounds(manifest.next_n, end, manifest.segment_size);
    let limit = max_segments.unwrap_or(usize::MAX).min(bounds.len());
    let sieve = NormSieve::new(end)?;
    let mut stops_out = OpenOptions::new().append(true).open(dir.join(&manifest.stops_file))?;
    let mut primes_out = OpenOptions::new().append(true).open(dir.join(&manifest.primes_file))?;
    let mut cp = manifest.checkpoint();
    let mut done = 0;
    for chunk in bounds[..limit].chunks(batch.max(1)) {
        let summaries = chunk
            .par_iter()
            .map(|&(a, b)| sieve.segment(a, b).map(|s| SegmentSummary::of(&s)))
            .collect::<Result<Vec<_>>>()?;
        for s in summaries {
            let mut stops = PrimeStops::new();
            cp = s.apply(&cp, &mut stops, None)?;
            append_u64(&mut stops_out, stops.values())?;
            append_u64(&mut primes_out, s.primes())?;
            manifest.next_n = cp.next_n;
            manifest.last_norm = cp.last_norm;
            manifest.cumsum_linf = cp.cumsum_linf;
            manifest.prime_count = cp.prime_count;
            manifest.store(dir)?;
            done += 1;
        }
    }
    Ok(JobStatus {
        complete: manifest.next_n == end,
        manifest,
        segments_done: done,
    })
}

fn append_u64(f: &mut File, values: &[u64]) -> Result<()> {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    f.write_all(&bytes)?;
    f.sync_data()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::sieve_norms;

    #[test]
    fn hops() {
        assert_eq!(hop(0, 1), 1);
        assert_eq!(hop(3, 2), 3);
        assert_eq!(hop(2, 1), 2);
    }

    #[test]
    fn first_ten_stops() {
        let seg = sieve_norms(2, 31).unwrap();
        let mut stops = PrimeStops::new();
        let cp = stream_trail(&seg, &TrailCheckpoint::initial(), &mut stops).unwrap();
        assert_eq!(stops.values(), &[1, 2, 6, 8, 17, 21, 31, 35, 41, 57]);
        assert_eq!(cp.next_n, 31);
        assert_eq!(cp.prime_count, 10);
    }

    #[test]
    fn misaligned_segment_is_rejected() {
        let seg = sieve_norms(3, 10).unwrap();
        let mut stops = PrimeStops::new();
        assert!(matches!(
            stream_trail(&seg, &TrailCheckpoint::initial(), &mut stops),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn summary_matches_sequential_fold() {
        let whole = compute_trail(5000, 5000).unwrap();
        let split = compute_trail(5000, 37).unwrap();
        assert_eq!(whole, split);
        let mut stops = PrimeStops::new();
        let mut primes = Vec::new();
        let mut cp = TrailCheckpoint::initial();
        for (a, b) in segment_bounds(2, 5001, 101) {
            let seg = sieve_norms(a, b).unwrap();
            cp = stream_trail_with_primes(&seg, &cp, &mut stops, &mut primes).unwrap();
        }
        assert_eq!(cp, whole.checkpoint);
        assert_eq!(stops, whole.stops);
        assert_eq!(primes, whole.primes);
    }

    #[test]
    fn l1_small() {
        assert_eq!(l1_trail(1).unwrap(), 0);
        // Ω(1..10) = 0,1,1,2,1,2,1,3,2,2
        let omega = [0u64, 1, 1, 2, 1, 2, 1, 3, 2, 2];
        let direct: u64 = omega.windows(2).map(|w| w[0] + w[1]).sum();
        assert_eq!(l1_trail(10).unwrap(), direct);
    }

    #[test]
    fn ratio_at_first_prime() {
        let run = compute_trail(100, 1000).unwrap();
        let r = ratio_series(&run.stops, &run.primes, 1).unwrap();
        assert_eq!(r[0], (1, 0.5));
        assert!(ratio_series(&run.stops, &run.primes, 0).is_err());
    }
}
