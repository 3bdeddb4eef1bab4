//! Global-behaviour checks of the controlled map shared by the property tests and the
//! acceptance suite. Each check returns `Err` with a description of the first violation.

#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

use tent_core::control::{theta_from_offset, RegimeOffset};
use tent_core::finder::{default_precision, iterate_controlled, SearchConfig, Verdict};
use tent_core::map::tent_iterate_exact;
use tent_core::rational::{format_rational, int, pow, ratio};
use tent_core::{ControlConfig, HpReal, MapParams, Regime};

pub const SUITE_SEED: u64 = 0x7e47_2024;

pub fn fixed_config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(SUITE_SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Runs `check` over `cases` instances drawn from `strategy` with the fixed suite seed.
pub fn run_suite<S, F>(cases: u32, strategy: S, check: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), String>,
{
    let mut runner = TestRunner::new(fixed_config(cases));
    runner
        .run(&strategy, |v| check(v).map_err(TestCaseError::fail))
        .map_err(|e| e.to_string())
}

fn config(h: i64, t: u32, regime: Regime, c: &BigRational) -> ControlConfig {
    let params = MapParams::from_integer(h).unwrap();
    let theta = theta_from_offset(&params, t, regime, &RegimeOffset::new(c.clone()).unwrap()).unwrap();
    ControlConfig::new(params, t, regime, theta).unwrap()
}

/// `k / 1000` for `k` in the given range.
fn thousandths(range: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = BigRational> {
    range.prop_map(|k| ratio(k, 1000))
}

pub type Instance = (i64, u32, BigRational, BigRational);

/// Slope, period, offset inside the open regime interval, seed in `[-10, 10]`.
pub fn boundedness_instances() -> impl Strategy<Value = Instance> {
    (prop_oneof![Just(3i64), Just(4)], 1u32..=3, thousandths(-999..=999), thousandths(-10_000..=10_000))
}

/// Positive regime: the orbit enters `[-H^2 + H/2, H/2]` and never leaves.
pub fn boundedness_case((h, t, c, x0): Instance) -> Result<(), String> {
    let cfg = config(h, t, Regime::PositiveMultiplier, &c);
    let prec = default_precision(&cfg.params, t);
    let map = cfg.at_precision(prec);
    let slack = HpReal::power_of_ten(-(prec as i64 - 5), prec);
    let hh = HpReal::from_i64(h, prec);
    let half_h = &hh / &HpReal::from_i64(2, prec);
    let lo = &(&half_h - &(&hh * &hh)) - &slack;
    let hi = &half_h + &slack;
    let steps = 1500;
    let mut x = HpReal::from_rational(&x0, prec);
    let mut entered: Option<usize> = None;
    for k in 0..=steps {
        let inside = x >= lo && x <= hi;
        match (entered, inside) {
            (None, true) => entered = Some(k),
            (Some(_), false) => {
                return Err(format!("H={h} T={t} c={} x0={}: left the interval at step {k} (x = {x})", format_rational(&c), format_rational(&x0)))
            }
            _ => {}
        }
        x = map.eval(&x);
    }
    match entered {
        Some(k) if k <= steps - 100 => Ok(()),
        _ => Err(format!("H={h} T={t} c={} x0={}: never settled in the interval", format_rational(&c), format_rational(&x0))),
    }
}

/// Negative regime with `theta <= H^T/(H^T + 1)`, seed in `[0, H/2]`.
pub fn invariance_instances() -> impl Strategy<Value = Instance> {
    (prop_oneof![Just(2i64), Just(3), Just(4)], 1u32..=4, thousandths(-999..=0), 0i64..=1000)
        .prop_map(|(h, t, c, k)| (h, t, c, ratio(k * h, 2000)))
}

/// One exact step and one working-precision step of `F` stay in `[0, H/2]`.
pub fn invariance_case((h, t, c, x0): Instance) -> Result<(), String> {
    let cfg = config(h, t, Regime::NegativeMultiplier, &c);
    let hr = int(h);
    let half_h = &hr / int(2);
    let ft = tent_iterate_exact(&x0, &hr, t);
    let zeta = &cfg.theta * &x0 + (BigRational::one() - &cfg.theta) * ft;
    let fx = tent_iterate_exact(&zeta, &hr, 1);
    if fx < BigRational::zero() || fx > half_h {
        return Err(format!("H={h} T={t} c={} x0={}: F(x0) = {} (exact)", format_rational(&c), format_rational(&x0), format_rational(&fx)));
    }
    let prec = default_precision(&cfg.params, t);
    let slack = HpReal::power_of_ten(-(prec as i64 - 5), prec);
    let y = cfg.at_precision(prec).eval(&HpReal::from_rational(&x0, prec));
    if y < -&slack || y > &HpReal::from_rational(&half_h, prec) + &slack {
        return Err(format!("H={h} T={t} c={} x0={}: F(x0) = {y} at {prec} digits", format_rational(&c), format_rational(&x0)));
    }
    Ok(())
}

/// Lower half of the positive interval, negative seed.
pub fn decay_instances() -> impl Strategy<Value = Instance> {
    (prop_oneof![Just(3i64), Just(4)], 1u32..=3, thousandths(-990..=-10), thousandths(-10_000..=-1))
}

pub const DECAY_PRECISION: u32 = 30;
pub const DECAY_STEPS: u32 = 25;

/// `|F^k(x0)| = alpha^k |x0|` with `alpha = H (H^T - theta (H^T - 1))`, to relative `1e-10` and `10^(5-P)`.
pub fn decay_case((h, t, c, x0): Instance) -> Result<(), String> {
    let cfg = config(h, t, Regime::PositiveMultiplier, &c);
    let hr = int(h);
    let ht = pow(&hr, t);
    let alpha = &hr * (&ht - &cfg.theta * (&ht - BigRational::one()));
    if alpha <= BigRational::zero() || alpha >= BigRational::one() {
        return Err(format!("alpha = {} outside (0, 1)", format_rational(&alpha)));
    }
    let prec = DECAY_PRECISION;
    let map = cfg.at_precision(prec);
    let tol = BigRational::new(1.into(), 10u64.pow(10).into()).min(pow(&ratio(1, 10), prec - 5));
    let mut x = HpReal::from_rational(&x0, prec);
    let mut expected = x0.abs();
    for k in 1..=DECAY_STEPS {
        x = map.eval(&x);
        expected = &expected * &alpha;
        let got = x.to_rational().abs();
        let rel = (&got - &expected).abs() / &expected;
        if rel > tol {
            return Err(format!("H={h} T={t} c={} x0={}: step {k} relative error {}", format_rational(&c), format_rational(&x0), tent_core::rational::to_f64(&rel)));
        }
    }
    Ok(())
}

/// Negative regime anywhere in its interval, negative seed.
pub fn divergence_instances() -> impl Strategy<Value = Instance> {
    (prop_oneof![Just(3i64), Just(4)], 1u32..=3, thousandths(-999..=999), thousandths(-10_000..=-1))
}

/// The trace decreases strictly, stays below `H x_n`, and is declared divergent.
pub fn divergence_case((h, t, c, x0): Instance) -> Result<(), String> {
    let cfg = config(h, t, Regime::NegativeMultiplier, &c);
    let search = SearchConfig::new(cfg, &x0);
    let prec = search.precision;
    let hh = HpReal::from_i64(h, prec);
    let trace = iterate_controlled(&search);
    if !matches!(trace.verdict, Verdict::Diverged(_)) {
        return Err(format!("H={h} T={t} c={} x0={}: verdict {:?}", format_rational(&c), format_rational(&x0), trace.verdict));
    }
    for w in trace.states.windows(2) {
        if !(w[1] < w[0] && w[1] < &hh * &w[0]) {
            return Err(format!("H={h} T={t} c={} x0={}: step {} -> {}", format_rational(&c), format_rational(&x0), w[0], w[1]));
        }
    }
    if trace.states.last().unwrap().abs() <= search.divergence_bound {
        return Err("final state inside the divergence bound".into());
    }
    Ok(())
}
