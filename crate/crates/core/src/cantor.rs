//! Histograms of cycle-point clouds and of random points of the middle-thirds Cantor set.
//!
//! First-type samples are `sum_{j<=N} alpha_j 2/3^j` with fair bits `alpha_j`. The bits come
//! from ChaCha8 seeded with `seed_from_u64(seed)`: each point consumes `ceil(N/64)` consecutive
//! `u64` words and `alpha_j` is bit `(j-1) mod 64` of word `(j-1) / 64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{divisors, subcycle_stable, RegimeOffset};
use crate::error::{Result, TentError};
use crate::finder::{grid_search, GridOptions, NumericCycle};
use crate::hpreal::HpReal;
use crate::map::{MapParams, Regime};
use crate::oracle::{enumerate_cycles, MAX_ORACLE_PERIOD};

pub const DEFAULT_BINS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Counts,
    /// Count divided by `M / B`.
    Density,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HistogramSpec {
    pub bins: usize,
    pub normalization: Normalization,
}

impl HistogramSpec {
    pub fn new(bins: usize, normalization: Normalization) -> Result<Self> {
        if bins == 0 {
            return Err(TentError::InvalidArgument("bins must be at least 1".into()));
        }
        Ok(HistogramSpec { bins, normalization })
    }
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec { bins: DEFAULT_BINS, normalization: Normalization::Density }
    }
}

/// A value that can be assigned to one of `B` equal bins of `[0, 1]`.
pub trait BinValue {
    /// `floor(x B)`, with `x = 1` in the last bin; `None` outside `[0, 1]`.
    fn bin_index(&self, bins: usize) -> Option<usize>;
    fn describe(&self) -> String;
}

impl BinValue for BigRational {
    fn bin_index(&self, bins: usize) -> Option<usize> {
        if *self < BigRational::zero() || *self > BigRational::one() {
            return None;
        }
        let scaled = (self * BigRational::from_integer(BigInt::from(bins))).floor();
        Some(scaled.to_integer().to_usize()?.min(bins - 1))
    }

    fn describe(&self) -> String {
        crate::rational::format_rational(self)
    }
}

impl BinValue for HpReal {
    fn bin_index(&self, bins: usize) -> Option<usize> {
        self.to_rational().bin_index(bins)
    }

    fn describe(&self) -> String {
        self.to_sig_string()
    }
}

impl BinValue for f64 {
    fn bin_index(&self, bins: usize) -> Option<usize> {
        if !(0.0..=1.0).contains(self) {
            return None;
        }
        Some(((self * bins as f64).floor() as usize).min(bins - 1))
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub spec: HistogramSpec,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn density(&self) -> Vec<f64> {
        let scale = self.spec.bins as f64 / self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }

    /// Bin values under the spec's normalization.
    pub fn values(&self) -> Vec<f64> {
        match self.spec.normalization {
            Normalization::Counts => self.counts.iter().map(|&c| c as f64).collect(),
            Normalization::Density => self.density(),
        }
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let b = self.spec.bins as f64;
        (i as f64 / b, (i + 1) as f64 / b)
    }

    /// `bin_left,bin_right,count,density`, one row per bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count,density\n");
        for (i, (c, d)) in self.counts.iter().zip(self.density()).enumerate() {
            let (l, r) = self.bin_edges(i);
            out.push_str(&format!("{l},{r},{c},{d}\n"));
        }
        out
    }

    /// Population standard deviation over mean, across nonempty bins.
    pub fn coefficient_of_variation(&self) -> f64 {
        let nonempty: Vec<f64> = self.counts.iter().filter(|&&c| c > 0).map(|&c| c as f64).collect();
        if nonempty.is_empty() {
            return 0.0;
        }
        let n = nonempty.len() as f64;
        let mean = nonempty.iter().sum::<f64>() / n;
        let var = nonempty.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
        var.sqrt() / mean
    }
}

pub fn histogram<T: BinValue>(points: &[T], spec: HistogramSpec) -> Result<Histogram> {
    let mut counts = vec![0u64; spec.bins];
    for (index, p) in points.iter().enumerate() {
        let bin = p
            .bin_index(spec.bins)
            .ok_or_else(|| TentError::PointOutOfRange { index, value: p.describe() })?;
        counts[bin] += 1;
    }
    Ok(Histogram { spec, counts, total: points.len() as u64 })
}

/// Whether bin `index` of `3^k` bins lies inside a removed middle-third interval.
pub fn is_gap_bin(mut index: usize, k: u32) -> bool {
    for _ in 0..k {
        if index % 3 == 1 {
            return true;
        }
        index /= 3;
    }
    false
}

/// Total counts in `[0, 1/2)` and `(1/2, 1]`; an exact `1/2` falls in neither.
pub fn half_masses(points: &[BigRational]) -> (u64, u64) {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let lower = points.iter().filter(|p| **p < half).count() as u64;
    let upper = points.iter().filter(|p| **p > half).count() as u64;
    (lower, upper)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstTypeSample {
    pub depth: u32,
    pub seed: u64,
    pub points: Vec<BigRational>,
}

/// `sum alpha_j 2/3^j` for the given digits, `alphas[0]` being `alpha_1`.
pub fn first_type_point(alphas: &[bool]) -> BigRational {
    let n = alphas.len() as u32;
    let three = BigInt::from(3);
    let mut num = BigInt::zero();
    for &a in alphas {
        num *= &three;
        if a {
            num += 2;
        }
    }
    BigRational::new(num, three.pow(n))
}

pub fn sample_first_type(depth: u32, count: usize, seed: u64) -> Result<FirstTypeSample> {
    if depth == 0 || count == 0 {
        return Err(TentError::InvalidArgument("depth and count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = depth.div_ceil(64) as usize;
    let mut alphas = vec![false; depth as usize];
    let points = (0..count)
        .map(|_| {
            for w in 0..words {
                let bits = rng.next_u64();
                for b in 0..64 {
                    let j = w * 64 + b;
                    if j < alphas.len() {
                        alphas[j] = bits >> b & 1 == 1;
                    }
                }
            }
            first_type_point(&alphas)
        })
        .collect();
    Ok(FirstTypeSample { depth, seed, points })
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum CloudSource {
    Oracle,
    Finder(GridOptions),
}

#[derive(Clone, Debug)]
pub struct PointCloud {
    pub points: Vec<BigRational>,
    /// Distinct cycles contributing points.
    pub cycles: usize,
    /// Proper period of each contributing cycle.
    pub periods: Vec<u32>,
}

/// Cycle points at `(H, T)`.
///
/// With no regimes and the oracle source, every proper `T`-cycle contributes. With regimes, the
/// oracle source keeps the cycles of every `tau | T` that the subcycle table marks stable
/// under some requested regime, and the finder source keeps whatever the grid search reaches.
pub fn cycle_point_cloud(
    params: &MapParams,
    period: u32,
    regimes: &[(Regime, RegimeOffset)],
    source: &CloudSource,
) -> Result<PointCloud> {
    let mut cycles: Vec<(u32, Vec<BigRational>)> = Vec::new();
    match source {
        CloudSource::Oracle => {
            if period > MAX_ORACLE_PERIOD {
                return Err(TentError::PeriodOutOfRange { period, min: 1, max: MAX_ORACLE_PERIOD });
            }
            if regimes.is_empty() {
                for c in enumerate_cycles(params, period)? {
                    cycles.push((c.period, c.points));
                }
            } else {
                for tau in divisors(period) {
                    for c in enumerate_cycles(params, tau)? {
                        let mut keep = false;
                        for (regime, _) in regimes {
                            keep |= subcycle_stable(period, tau, *regime, c.multiplier_sign)?;
                        }
                        if keep {
                            cycles.push((tau, c.points));
                        }
                    }
                }
            }
        }
        CloudSource::Finder(opts) => {
            if regimes.is_empty() {
                return Err(TentError::InvalidArgument("finder source needs at least one regime".into()));
            }
            let mut found: Vec<NumericCycle> = Vec::new();
            for (regime, offset) in regimes {
                let g = grid_search(params, period, *regime, offset, opts)?;
                let tol = &HpReal::from_i64(10, g.precision) * &g.threshold;
                for f in g.cycles {
                    let dup = found.iter().any(|other| {
                        other.proper_period == f.cycle.proper_period
                            && other.distance(&f.cycle).is_some_and(|d| d <= tol)
                    });
                    if !dup {
                        found.push(f.cycle);
                    }
                }
            }
            for c in found {
                cycles.push((c.proper_period, c.points.iter().map(HpReal::to_rational).collect()));
            }
        }
    }
    let periods = cycles.iter().map(|(t, _)| *t).collect();
    let count = cycles.len();
    let points = cycles.into_iter().flat_map(|(_, p)| p).collect();
    Ok(PointCloud { points, cycles: count, periods })
}
