//! Gap series between consecutive primes, classical and along the trail,
//! their histograms and the trail analogue of the prime-counting function.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::trail::PrimeStops;

/// Which series a [`GapSeries`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GapKind {
    /// `p_{k+1} − p_k`
    D1,
    D2,
    /// `L∞(p_{k+1}) − L∞(p_k)`
    TrailD1,
    TrailD2,
}

impl GapKind {
    pub fn order(self) -> u8 {
        match self {
            GapKind::D1 | GapKind::TrailD1 => 1,
            GapKind::D2 | GapKind::TrailD2 => 2,
        }
    }

    pub fn is_trail(self) -> bool {
        matches!(self, GapKind::TrailD1 | GapKind::TrailD2)
    }

    pub fn new(trail: bool, order: u8) -> Result<Self> {
        match (trail, order) {
            (false, 1) => Ok(GapKind::D1),
            (false, 2) => Ok(GapKind::D2),
            (true, 1) => Ok(GapKind::TrailD1),
            (true, 2) => Ok(GapKind::TrailD2),
            _ => Err(Error::domain(format!("gap order must be 1 or 2, got {order}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GapKind::D1 => "D1",
            GapKind::D2 => "D2",
            GapKind::TrailD1 => "TrailD1",
            GapKind::TrailD2 => "TrailD2",
        }
    }
}

impl FromStr for GapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D1" => Ok(GapKind::D1),
            "D2" => Ok(GapKind::D2),
            "TrailD1" => Ok(GapKind::TrailD1),
            "TrailD2" => Ok(GapKind::TrailD2),
            _ => Err(Error::domain(format!("unknown gap kind {s:?}"))),
        }
    }
}

/// Differences of a prime or stops sequence, in 16 bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapSeries {
    pub kind: GapKind,
    pub values: Vec<i16>,
}

impl GapSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// First (`order = 1`) or second (`order = 2`) differences of a strictly
/// increasing sequence of primes (`trail = false`) or prime stops.
pub fn gap_series(input: &[u64], trail: bool, order: u8) -> Result<GapSeries> {
    let kind = GapKind::new(trail, order)?;
    if input.len() < order as usize + 1 {
        return Err(Error::domain(format!(
            "need at least {} values for order {order}, got {}",
            order + 1,
            input.len()
        )));
    }
    let mut first = Vec::with_capacity(input.len() - 1);
    for w in input.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::domain("input must be strictly increasing"));
        }
        first.push(to_i16(w[1] - w[0])?);
    }
    let values = if order == 1 {
        first
    } else {
        first
            .windows(2)
            .map(|w| to_i16(w[1] as i64 - w[0] as i64))
            .collect::<Result<_>>()?
    };
    Ok(GapSeries { kind, values })
}

fn to_i16<T: TryInto<i16> + Copy + std::fmt::Display>(v: T) -> Result<i16> {
    v.try_into()
        .map_err(|_| Error::InvariantViolation(format!("gap {v} does not fit in 16 bits")))
}

/// Integer-binned counts, trimmed to the first and last non-empty bins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    pub bin_lo: i64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: impl IntoIterator<Item = i64>) -> Self {
        let mut map: BTreeMap<i64, u64> = BTreeMap::new();
        for v in values {
            *map.entry(v).or_default() += 1;
        }
        Self::from_map(&map)
    }

    fn from_map(map: &BTreeMap<i64, u64>) -> Self {
        let (Some((&lo, _)), Some((&hi, _))) = (map.first_key_value(), map.last_key_value())
        else {
            return Histogram {
                bin_lo: 0,
                counts: Vec::new(),
            };
        };
        let mut counts = vec![0; (hi - lo + 1) as usize];
        for (&v, &c) in map {
            counts[(v - lo) as usize] = c;
        }
        Histogram { bin_lo: lo, counts }
    }

    pub fn count(&self, value: i64) -> u64 {
        value
            .checked_sub(self.bin_lo)
            .and_then(|i| usize::try_from(i).ok())
            .and_then(|i| self.counts.get(i).copied())
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(value, count)` for every bin, including empty inner bins.
    pub fn bins(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.bin_lo + i as i64, c))
    }

    /// Keeps only values in `[lo, hi]`, trimming again.
    pub fn clipped(&self, lo: i64, hi: i64) -> Self {
        let map: BTreeMap<i64, u64> = self
            .bins()
            .filter(|&(v, c)| c > 0 && (lo..=hi).contains(&v))
            .collect();
        Self::from_map(&map)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for (v, c) in self.bins() {
            writeln!(out, "{v},{c}").expect("writing to a string");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("value,count") {
            return Err(Error::format("histogram CSV must start with 'value,count'"));
        }
        let mut map = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let (v, c) = line
                .split_once(',')
                .ok_or_else(|| Error::format(format!("line {}: expected two fields", i + 2)))?;
            let v: i64 = v
                .parse()
                .map_err(|e| Error::format(format!("line {}: {e}", i + 2)))?;
            let c: u64 = c
                .parse()
                .map_err(|e| Error::format(format!("line {}: {e}", i + 2)))?;
            if map.insert(v, c).is_some() {
                return Err(Error::format(format!("line {}: duplicate value {v}", i + 2)));
            }
        }
        let mut h = Self::from_map(&map);
        // keep empty inner rows as written; only the edges must be non-empty
        if h.counts.first() == Some(&0) || h.counts.last() == Some(&0) {
            h = h.clipped(i64::MIN, i64::MAX);
        }
        Ok(h)
    }
}

pub fn histogram(series: &GapSeries) -> Result<Histogram> {
    if series.is_empty() {
        return Err(Error::domain("histogram of an empty series"));
    }
    Ok(Histogram::from_values(series.values.iter().map(|&v| v as i64)))
}

/// JSON form of a histogram with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramDoc {
    #[serde(rename = "N_max")]
    pub n_max: u64,
    pub kind: GapKind,
    pub generated_at: String,
    pub bins: Vec<(i64, u64)>,
}

impl HistogramDoc {
    pub fn new(hist: &Histogram, n_max: u64, kind: GapKind) -> Self {
        HistogramDoc {
            n_max,
            kind,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            bins: hist.bins().collect(),
        }
    }

    pub fn histogram(&self) -> Histogram {
        Histogram::from_map(&self.bins.iter().copied().filter(|b| b.1 > 0).collect())
    }
}

/// Values 1 to 6 seen in a trail first-difference series, with the index of
/// their first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExcludedReport {
    pub first_occurrence: Vec<(i16, usize)>,
}

impl ExcludedReport {
    pub fn first_index(&self, value: i16) -> Option<usize> {
        self.first_occurrence
            .iter()
            .find(|&&(v, _)| v == value)
            .map(|&(_, i)| i)
    }
}

/// Checks that neither 3 nor 5 occurs in a trail gap series.
pub fn excluded_values_check(series: &GapSeries) -> Result<ExcludedReport> {
    if series.kind != GapKind::TrailD1 {
        return Err(Error::domain("excluded-value check needs a TrailD1 series"));
    }
    let mut first: [Option<usize>; 7] = [None; 7];
    for (i, &v) in series.values.iter().enumerate() {
        if (1..=6).contains(&v) && first[v as usize].is_none() {
            first[v as usize] = Some(i);
        }
    }
    for bad in [3usize, 5] {
        if let Some(i) = first[bad] {
            return Err(Error::InvariantViolation(format!(
                "trail gap {bad} at index {i}"
            )));
        }
    }
    Ok(ExcludedReport {
        first_occurrence: (1..=6)
            .filter_map(|v| first[v].map(|i| (v as i16, i)))
            .collect(),
    })
}

/// The most frequent values, all of them when tied.
pub fn jumping_champions(hist: &Histogram) -> Vec<i64> {
    let Some(&max) = hist.counts.iter().max() else {
        return Vec::new();
    };
    hist.bins()
        .filter(|&(_, c)| c == max && c > 0)
        .map(|(v, _)| v)
        .collect()
}

/// `π∞(N) = max{k : L∞(p_k) ≤ N}`.
pub fn pi_infty(n: u64, stops: &PrimeStops) -> u64 {
    stops.values().partition_point(|&s| s <= n) as u64
}

/// `(π∞(N) ln N / N, π∞(N) / Li(N))` at `N = L∞(p_k)`.
pub fn pnt_ratios(k: usize, stops: &PrimeStops) -> Result<(f64, f64)> {
    let n = stops
        .get(k)
        .ok_or_else(|| Error::domain(format!("stops cover only {} primes, need {k}", stops.len())))?;
    let pi = pi_infty(n, stops) as f64;
    let nf = n as f64;
    if nf < 2.0 {
        return Err(Error::domain("Li(N) needs N >= 2"));
    }
    Ok((pi * nf.ln() / nf, pi / analytic::li(nf)?))
}

/// Number of primes `≤ n_max` in an ascending prime list.
pub fn primes_up_to(primes: &[u64], n_max: u64) -> usize {
    primes.partition_point(|&p| p <= n_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STOPS: [u64; 11] = [1, 2, 6, 8, 17, 21, 31, 35, 41, 57, 59];

    #[test]
    fn first_rows_of_stops_and_gaps() {
        let d1 = gap_series(&STOPS[..10], true, 1).unwrap();
        assert_eq!(d1.values, vec![1, 4, 2, 9, 4, 10, 4, 6, 16]);
        let d2 = gap_series(&STOPS, true, 2).unwrap();
        assert_eq!(d2.values, vec![3, -2, 7, -5, 6, -6, 2, 10, -14]);
        assert_eq!(gap_series(&[2, 3, 5, 7], false, 1).unwrap().values, vec![1, 2, 2]);
        assert_eq!(gap_series(&[2, 3, 5, 7], false, 2).unwrap().kind, GapKind::D2);
    }

    #[test]
    fn short_or_unsorted_input() {
        assert!(matches!(gap_series(&[2, 3], false, 2), Err(Error::Domain(_))));
        assert!(gap_series(&[2], false, 1).is_err());
        assert!(gap_series(&[3, 2, 5], false, 1).is_err());
        assert!(gap_series(&[2, 3, 5], false, 3).is_err());
    }

    #[test]
    fn gaps_that_overflow_are_invariant_violations() {
        assert!(matches!(
            gap_series(&[1, 40_000], true, 1),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn histogram_is_trimmed_and_round_trips() {
        let s = GapSeries {
            kind: GapKind::TrailD2,
            values: vec![-3, 4, 4, 0, -3, 4],
        };
        let h = histogram(&s).unwrap();
        assert_eq!(h.bin_lo, -3);
        assert_eq!(h.counts.len(), 8);
        assert_eq!(h.total(), 6);
        assert_eq!(h.count(4), 3);
        assert_eq!(h.count(100), 0);
        let csv = h.to_csv();
        assert_eq!(Histogram::from_csv(&csv).unwrap().to_csv(), csv);
        assert_eq!(jumping_champions(&h), vec![4]);
        assert_eq!(h.clipped(-1, 1).bins().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn champion_ties() {
        let h = Histogram::from_values([2, 4, 2, 4, 6]);
        assert_eq!(jumping_champions(&h), vec![2, 4]);
    }

    #[test]
    fn excluded_values() {
        let d1 = gap_series(&STOPS, true, 1).unwrap();
        let r = excluded_values_check(&d1).unwrap();
        assert_eq!(r.first_index(1), Some(0));
        assert_eq!(r.first_index(3), None);
        let bad = GapSeries {
            kind: GapKind::TrailD1,
            values: vec![1, 3],
        };
        assert!(matches!(excluded_values_check(&bad), Err(Error::InvariantViolation(_))));
        let wrong = GapSeries {
            kind: GapKind::D1,
            values: vec![1],
        };
        assert!(excluded_values_check(&wrong).is_err());
    }

    #[test]
    fn pi_infty_small() {
        let stops = PrimeStops::from_vec(STOPS.to_vec()).unwrap();
        assert_eq!(pi_infty(0, &stops), 0);
        assert_eq!(pi_infty(6, &stops), 3);
        for k in 1..=STOPS.len() {
            assert_eq!(pi_infty(stops.get(k).unwrap(), &stops), k as u64);
        }
    }
}
