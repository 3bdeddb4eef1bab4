//! Numerical search for cycles by iterating the controlled map.
//!
//! Two checkpoints decide convergence at step `n`: the residual
//! `U_n = |F(x_n) - f(x_n)|` and the periodicity residual `Uhat_n = |x_{n+T} - x_n|`.
//! Both must stay below the threshold for `window` consecutive steps.
//! Steps are numbered from 1, the seed being `x_1`.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{divisors, theta_from_offset, RegimeOffset};
use crate::error::{Result, TentError};
use crate::hpreal::HpReal;
use crate::map::{ControlConfig, ControlledMap, MapParams, Regime};
use crate::oracle::ExactCycle;
use crate::rational::{format_rational, int};

pub const DEFAULT_MAX_ITERS: usize = 2000;
/// Digits between the working precision and the default threshold exponent.
pub const GUARD_DIGITS: u32 = 5;

/// `ceil(1.05 T log10 H) + 10` significant digits.
pub fn default_precision(params: &MapParams, period: u32) -> u32 {
    let log_h = crate::rational::to_f64(params.slope()).log10();
    (1.05 * period as f64 * log_h - 1e-9).ceil().max(0.0) as u32 + 10
}

/// `10^-(P - 5)`.
pub fn default_threshold(precision: u32) -> HpReal {
    HpReal::power_of_ten(-(precision.saturating_sub(GUARD_DIGITS).max(1) as i64), precision)
}

/// Order of magnitude `p` of `|1 - theta| ~ 10^-p`.
fn theta_gap_order(theta: &BigRational) -> i64 {
    let gap = (BigRational::one() - theta).abs();
    if gap.is_zero() {
        return i64::MAX;
    }
    let (n, d) = (gap.numer(), gap.denom());
    let lg = |v: &num_bigint::BigInt| {
        let bits = v.bits() as i64;
        let shift = (bits - 60).max(0);
        ((v >> shift as usize).to_f64().unwrap_or(1.0)).log10() + shift as f64 * std::f64::consts::LOG10_2
    };
    (lg(d) - lg(n)).round() as i64
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub cfg: ControlConfig,
    pub x0: HpReal,
    pub max_iters: usize,
    pub threshold: HpReal,
    pub divergence_bound: HpReal,
    pub precision: u32,
    /// Consecutive in-threshold steps required before declaring convergence.
    pub window: usize,
}

impl SearchConfig {
    /// Defaults: precision from the `1.05 T log10 H + 10` rule, threshold `10^-(P-5)`,
    /// divergence bound `10 H^2`, window `T + 5`.
    pub fn new(cfg: ControlConfig, x0: &BigRational) -> Self {
        let precision = default_precision(&cfg.params, cfg.period);
        SearchConfig::with_precision(cfg, x0, precision)
    }

    pub fn with_precision(cfg: ControlConfig, x0: &BigRational, precision: u32) -> Self {
        let h = cfg.params.slope();
        let bound = int(10) * h * h;
        SearchConfig {
            x0: HpReal::from_rational(x0, precision),
            max_iters: DEFAULT_MAX_ITERS,
            threshold: default_threshold(precision),
            divergence_bound: HpReal::from_rational(&bound, precision),
            precision,
            window: cfg.period as usize + 5,
            cfg,
        }
    }

    /// Checks the precision rule and that the threshold sits at least two orders below `|1 - theta|`.
    pub fn validate(&self) -> Result<()> {
        let needed = default_precision(&self.cfg.params, self.cfg.period);
        if self.precision < needed {
            return Err(TentError::InvalidArgument(format!(
                "precision {} below the required {needed} digits",
                self.precision
            )));
        }
        let p = theta_gap_order(&self.cfg.theta);
        if p != i64::MAX {
            let limit = BigRational::new(1.into(), 10.into());
            let limit = crate::rational::pow(&limit, (p + 2).max(0) as u32);
            if self.threshold.to_rational() > limit {
                return Err(TentError::InvalidArgument(format!(
                    "threshold {} must not exceed 1e-{}",
                    self.threshold.to_scientific(3),
                    p + 2
                )));
            }
        }
        if self.window == 0 || self.max_iters == 0 {
            return Err(TentError::InvalidArgument("window and max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Both checkpoints hold from step `n1` on.
    ConvergedToCycle(usize),
    /// `|x_n|` exceeded the divergence bound at step `n`.
    Diverged(usize),
    MaxItersExhausted,
}

#[derive(Clone, Debug)]
pub struct OrbitTrace {
    /// `states[i]` is `x_{i+1}`.
    pub states: Vec<HpReal>,
    pub residuals_u: Vec<HpReal>,
    pub residuals_uhat: Vec<HpReal>,
    pub verdict: Verdict,
    pub cfg: ControlConfig,
    pub precision: u32,
}

impl OrbitTrace {
    pub fn converged_at(&self) -> Option<usize> {
        match self.verdict {
            Verdict::ConvergedToCycle(n) => Some(n),
            _ => None,
        }
    }

    /// Rows `(n, x_n, U_n, Uhat_n)` for every step with both residuals recorded.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x_n,U_n,Uhat_n\n");
        for (i, (u, uh)) in self.residuals_u.iter().zip(&self.residuals_uhat).enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                self.states[i].to_sig_string(),
                u.to_scientific(6),
                uh.to_scientific(6)
            ));
        }
        out
    }
}

pub fn iterate_controlled(search: &SearchConfig) -> OrbitTrace {
    let prec = search.precision;
    let map = search.cfg.at_precision(prec);
    let period = search.cfg.period as usize;
    let thr = &search.threshold;
    let mut states = vec![search.x0.with_precision(prec)];
    let mut residuals_u = Vec::new();
    let mut residuals_uhat = Vec::new();
    let mut run = 0usize;
    let mut verdict = Verdict::MaxItersExhausted;

    if search.x0.abs() > search.divergence_bound {
        verdict = Verdict::Diverged(1);
    } else {
        for _ in 0..search.max_iters {
            let x = states.last().expect("non-empty");
            let (next, fx) = step(&map, x);
            residuals_u.push((&next - &fx).abs());
            let escaped = next.abs() > search.divergence_bound;
            states.push(next);
            if escaped {
                verdict = Verdict::Diverged(states.len());
                break;
            }
            if states.len() > period {
                let m = states.len() - 1 - period;
                let uhat = (&states[m + period] - &states[m]).abs();
                let ok = residuals_u[m] < *thr && uhat < *thr;
                residuals_uhat.push(uhat);
                run = if ok { run + 1 } else { 0 };
                if run == search.window {
                    verdict = Verdict::ConvergedToCycle(m + 2 - search.window);
                    residuals_u.truncate(residuals_uhat.len());
                    break;
                }
            }
        }
    }

    OrbitTrace {
        states,
        residuals_u,
        residuals_uhat,
        verdict,
        cfg: search.cfg.clone(),
        precision: prec,
    }
}

/// `(F(x), f(x))`.
fn step(map: &ControlledMap, x: &HpReal) -> (HpReal, HpReal) {
    (map.eval(x), map.tent().eval(x))
}

#[derive(Clone, Debug)]
pub struct NumericCycle {
    /// Rotation starting at the smallest point.
    pub points: Vec<HpReal>,
    pub proper_period: u32,
    pub target_period: u32,
    /// Largest `|F(points[i]) - points[i+1]|` over the cycle.
    pub max_residual: HpReal,
}

impl NumericCycle {
    /// `(-1)^(number of points above 1/2)`.
    pub fn multiplier_sign(&self) -> i8 {
        let half = HpReal::parse("0.5", 1).expect("literal");
        if self.points.iter().filter(|p| **p > half).count() % 2 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn is_subcycle(&self) -> bool {
        self.proper_period < self.target_period
    }

    /// Largest pointwise distance to another cycle of the same length, both canonically rotated.
    pub fn distance(&self, other: &NumericCycle) -> Option<HpReal> {
        if self.points.len() != other.points.len() {
            return None;
        }
        self.points.iter().zip(&other.points).map(|(a, b)| (a - b).abs()).max()
    }
}

/// Smallest divisor `tau` of `T` for which the converged tail is `tau`-periodic.
pub fn extract_cycle(trace: &OrbitTrace, threshold: &HpReal) -> Option<NumericCycle> {
    let n1 = trace.converged_at()?;
    let period = trace.cfg.period;
    let tail = &trace.states[n1 - 1..];
    let tau = divisors(period).into_iter().find(|&d| {
        let d = d as usize;
        d < tail.len() && (0..tail.len() - d).all(|i| (&tail[i + d] - &tail[i]).abs() < *threshold)
    })?;
    let tau_us = tau as usize;
    let mut points: Vec<HpReal> = trace.states[trace.states.len() - tau_us..].to_vec();
    let start = (0..tau_us).min_by(|&i, &j| points[i].cmp(&points[j]))?;
    points.rotate_left(start);

    let map = trace.cfg.at_precision(trace.precision);
    let max_residual = (0..tau_us)
        .map(|i| (&map.eval(&points[i]) - &points[(i + 1) % tau_us]).abs())
        .max()
        .unwrap_or_else(|| HpReal::zero(trace.precision));
    Some(NumericCycle { points, proper_period: tau, target_period: period, max_residual })
}

#[derive(Clone, Debug)]
pub struct GridOptions {
    pub grid: usize,
    pub precision: Option<u32>,
    pub threshold: Option<HpReal>,
    pub max_iters: usize,
    pub window: Option<usize>,
    pub divergence_bound: Option<HpReal>,
    /// Seeds are `lo + (hi - lo) k / (G + 1)`, `k = 1..=G`.
    pub seed_range: (BigRational, BigRational),
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            grid: 200,
            precision: None,
            threshold: None,
            max_iters: DEFAULT_MAX_ITERS,
            window: None,
            divergence_bound: None,
            seed_range: (BigRational::zero(), BigRational::one()),
        }
    }
}

impl GridOptions {
    pub fn seeds(&self) -> Vec<BigRational> {
        let (lo, hi) = &self.seed_range;
        let g = self.grid as i64;
        (1..=g).map(|k| lo + (hi - lo) * BigRational::new(k.into(), (g + 1).into())).collect()
    }

    pub fn search_config(&self, cfg: &ControlConfig, x0: &BigRational) -> SearchConfig {
        let precision = self.precision.unwrap_or_else(|| default_precision(&cfg.params, cfg.period));
        let mut s = SearchConfig::with_precision(cfg.clone(), x0, precision);
        s.max_iters = self.max_iters;
        if let Some(t) = &self.threshold {
            s.threshold = t.with_precision(precision);
        }
        if let Some(w) = self.window {
            s.window = w;
        }
        if let Some(b) = &self.divergence_bound {
            s.divergence_bound = b.with_precision(precision);
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct FoundCycle {
    pub cycle: NumericCycle,
    /// First seed (in grid order) that reached this cycle.
    pub seed: BigRational,
    pub hits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeedOutcome {
    /// Index into [`GridSearch::cycles`].
    Converged(usize),
    Diverged,
    Exhausted,
    /// Converged by the checkpoints but no divisor of `T` is periodic under the threshold.
    FalseConvergence,
}

#[derive(Clone, Debug)]
pub struct GridSearch {
    pub cfg: ControlConfig,
    pub threshold: HpReal,
    pub precision: u32,
    pub seeds: Vec<BigRational>,
    pub outcomes: Vec<SeedOutcome>,
    /// Distinct cycles, sorted by smallest point.
    pub cycles: Vec<FoundCycle>,
}

impl GridSearch {
    pub fn converged_fraction(&self, cycle: usize) -> f64 {
        let hits = self.outcomes.iter().filter(|o| **o == SeedOutcome::Converged(cycle)).count();
        hits as f64 / self.outcomes.len().max(1) as f64
    }
}

fn seed_outcome(search: &SearchConfig) -> std::result::Result<NumericCycle, SeedOutcome> {
    let trace = iterate_controlled(search);
    match trace.verdict {
        Verdict::ConvergedToCycle(_) => {
            extract_cycle(&trace, &search.threshold).ok_or(SeedOutcome::FalseConvergence)
        }
        Verdict::Diverged(_) => Err(SeedOutcome::Diverged),
        Verdict::MaxItersExhausted => Err(SeedOutcome::Exhausted),
    }
}

/// Runs the controlled iteration from every grid seed with `theta` given by `offset`.
pub fn grid_search(
    params: &MapParams,
    period: u32,
    regime: Regime,
    offset: &RegimeOffset,
    opts: &GridOptions,
) -> Result<GridSearch> {
    let theta = theta_from_offset(params, period, regime, offset)?;
    grid_search_theta(&ControlConfig::new(params.clone(), period, regime, theta)?, opts)
}

/// [`grid_search`] for an explicit control parameter.
pub fn grid_search_theta(cfg: &ControlConfig, opts: &GridOptions) -> Result<GridSearch> {
    if opts.grid < 2 {
        return Err(TentError::InvalidArgument(format!("grid size {} < 2", opts.grid)));
    }
    search_seeds(cfg, opts.seeds(), opts)
}

/// Runs every seed independently and merges the converged cycles in seed order.
pub fn search_seeds(cfg: &ControlConfig, seeds: Vec<BigRational>, opts: &GridOptions) -> Result<GridSearch> {
    if seeds.is_empty() {
        return Err(TentError::InvalidArgument("no seeds".into()));
    }
    let configs: Vec<SearchConfig> = seeds.iter().map(|x0| opts.search_config(cfg, x0)).collect();
    let template = &configs[0];
    let threshold = template.threshold.clone();
    let precision = template.precision;
    let dedup_tol = &HpReal::from_i64(10, precision) * &threshold;

    let results: Vec<_> = configs.par_iter().map(seed_outcome).collect();

    // Sequential merge in seed order keeps the output independent of scheduling.
    let mut distinct: Vec<FoundCycle> = Vec::new();
    let mut raw_outcomes = Vec::with_capacity(results.len());
    for (seed, result) in seeds.iter().zip(results) {
        match result {
            Ok(cycle) => {
                let existing = distinct.iter().position(|f| {
                    f.cycle.proper_period == cycle.proper_period
                        && f.cycle.distance(&cycle).is_some_and(|d| d <= dedup_tol)
                });
                let idx = match existing {
                    Some(i) => {
                        distinct[i].hits += 1;
                        i
                    }
                    None => {
                        distinct.push(FoundCycle { cycle, seed: seed.clone(), hits: 1 });
                        distinct.len() - 1
                    }
                };
                raw_outcomes.push(SeedOutcome::Converged(idx));
            }
            Err(o) => raw_outcomes.push(o),
        }
    }
    let mut order: Vec<usize> = (0..distinct.len()).collect();
    order.sort_by(|&a, &b| distinct[a].cycle.points[0].cmp(&distinct[b].cycle.points[0]));
    let mut rank = vec![0; distinct.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let outcomes = raw_outcomes
        .into_iter()
        .map(|o| match o {
            SeedOutcome::Converged(i) => SeedOutcome::Converged(rank[i]),
            other => other,
        })
        .collect();
    let mut slots: Vec<Option<FoundCycle>> = distinct.into_iter().map(Some).collect();
    let cycles = order.iter().map(|&i| slots[i].take().expect("each index once")).collect();

    Ok(GridSearch { cfg: cfg.clone(), threshold, precision, seeds, outcomes, cycles })
}

#[derive(Clone, Debug)]
pub struct CycleMatch {
    pub found: usize,
    pub exact: usize,
    pub deviation: HpReal,
    pub subcycle: bool,
}

#[derive(Clone, Debug, Default)]
pub struct MatchReport {
    pub matches: Vec<CycleMatch>,
    /// Exact cycles no numeric cycle matched.
    pub missing: Vec<usize>,
    /// Numeric cycles with no exact cycle within tolerance, or losing an ambiguous match.
    pub unmatched: Vec<usize>,
    /// Exact cycles within tolerance of more than one numeric cycle.
    pub ambiguous: Vec<usize>,
}

impl MatchReport {
    pub fn max_deviation(&self) -> Option<&HpReal> {
        self.matches.iter().map(|m| &m.deviation).max()
    }

    pub fn is_clean(&self) -> bool {
        self.unmatched.is_empty() && self.ambiguous.is_empty()
    }
}

/// Largest pointwise distance between a numeric cycle and an exact one of the same length.
pub fn deviation(found: &NumericCycle, exact: &ExactCycle) -> Option<HpReal> {
    if found.points.len() != exact.points.len() {
        return None;
    }
    let prec = found.points.first().map_or(1, |p| p.precision());
    found
        .points
        .iter()
        .zip(&exact.points)
        .map(|(p, q)| HpReal::from_rational(&(p.to_rational() - q).abs(), prec))
        .max()
}

/// Greedy nearest matching of numeric cycles against exact ones.
pub fn verify_against_oracle(found: &[NumericCycle], exact: &[ExactCycle], tol: &HpReal) -> MatchReport {
    let mut pairs: Vec<(HpReal, usize, usize)> = Vec::new();
    for (i, f) in found.iter().enumerate() {
        for (j, e) in exact.iter().enumerate() {
            if let Some(d) = deviation(f, e) {
                if d <= *tol {
                    pairs.push((d, i, j));
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut found_taken = vec![false; found.len()];
    let mut exact_taken = vec![false; exact.len()];
    let mut ambiguous = Vec::new();
    let mut report = MatchReport::default();
    for (d, i, j) in pairs {
        if found_taken[i] {
            continue;
        }
        if exact_taken[j] {
            if !ambiguous.contains(&j) {
                ambiguous.push(j);
            }
            continue;
        }
        found_taken[i] = true;
        exact_taken[j] = true;
        report.matches.push(CycleMatch { found: i, exact: j, deviation: d, subcycle: found[i].is_subcycle() });
    }
    report.matches.sort_by_key(|m| m.found);
    ambiguous.sort_unstable();
    report.ambiguous = ambiguous;
    report.missing = (0..exact.len()).filter(|&j| !exact_taken[j]).collect();
    report.unmatched = (0..found.len()).filter(|&i| !found_taken[i]).collect();
    report
}

/// One JSON line of `find` output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericCycleRecord {
    #[serde(rename = "T")]
    pub period: u32,
    pub tau: u32,
    pub theta: String,
    pub regime: Regime,
    pub points: Vec<String>,
    pub max_residual: String,
    pub seed: String,
}

impl NumericCycleRecord {
    pub fn new(found: &FoundCycle, cfg: &ControlConfig) -> Self {
        NumericCycleRecord {
            period: cfg.period,
            tau: found.cycle.proper_period,
            theta: format_rational(&cfg.theta),
            regime: cfg.regime,
            points: found.cycle.points.iter().map(HpReal::to_sig_string).collect(),
            max_residual: found.cycle.max_residual.to_scientific(3),
            seed: HpReal::from_rational(&found.seed, found.cycle.points[0].precision()).to_sig_string(),
        }
    }

    /// The record as one line of JSON, without a trailing newline.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn to_cycle(&self) -> Result<NumericCycle> {
        let prec = self
            .points
            .iter()
            .map(|p| p.bytes().filter(u8::is_ascii_digit).count() as u32)
            .max()
            .unwrap_or(1)
            .max(1);
        let points = self.points.iter().map(|p| HpReal::parse(p, prec)).collect::<Result<Vec<_>>>()?;
        Ok(NumericCycle {
            points,
            proper_period: self.tau,
            target_period: self.period,
            max_residual: HpReal::parse(&self.max_residual, prec)?,
        })
    }
}
