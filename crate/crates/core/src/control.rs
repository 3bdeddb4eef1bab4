//! Admissible control parameters, controlled-cycle multipliers and cycle counts.

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Result, TentError};
use crate::map::{MapParams, Regime};
use crate::rational::{format_rational, int, pow};

/// Largest period accepted by [`count_cycles`].
pub const MAX_COUNT_PERIOD: u32 = 64;

/// Range of the control parameter stabilizing cycles of one multiplier sign.
///
/// `positive`: `((H^T - 1/H)/(H^T - 1), (H^T + 1/H)/(H^T - 1)]`,
/// `negative`: `((H^T - 1/H)/(H^T + 1), (H^T + 1/H)/(H^T + 1)]`.
/// The lower endpoint is always open. The upper endpoint is closed for the
/// boundedness statements and open for local stability, see [`ThetaInterval::stabilizes`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub hi_closed: bool,
    pub regime: Regime,
    /// `H^T/(H^T + 1)` in the negative regime. Up to this value `[0, H/2]` is invariant.
    invariance_bound: Option<BigRational>,
    /// `H^T/(H^T - 1)` resp. `H^T/(H^T + 1)`: the multiplier vanishes here.
    midpoint: BigRational,
}

impl ThetaInterval {
    pub fn contains(&self, theta: &BigRational) -> bool {
        *theta > self.lo && (*theta < self.hi || (self.hi_closed && *theta == self.hi))
    }

    /// Strict interior, where the matching cycles are locally asymptotically stable.
    pub fn stabilizes(&self, theta: &BigRational) -> bool {
        *theta > self.lo && *theta < self.hi
    }

    pub fn midpoint(&self) -> &BigRational {
        &self.midpoint
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Whether `[0, H/2]` is guaranteed to be invariant under the controlled map.
    pub fn invariance_guaranteed(&self, theta: &BigRational) -> bool {
        match &self.invariance_bound {
            Some(bound) => *theta > self.lo && theta <= bound,
            None => false,
        }
    }
}

fn check_h_t(params: &MapParams, period: u32) -> Result<()> {
    if period < 1 {
        return Err(TentError::PeriodOutOfRange { period, min: 1, max: u32::MAX });
    }
    if *params.slope() < int(2) {
        return Err(TentError::InvalidSlope(format_rational(params.slope())));
    }
    Ok(())
}

pub fn theta_interval(params: &MapParams, period: u32, regime: Regime) -> Result<ThetaInterval> {
    check_h_t(params, period)?;
    let ht = params.slope_pow(period);
    let inv_h = params.slope().recip();
    let den = match regime {
        Regime::PositiveMultiplier => &ht - BigRational::one(),
        Regime::NegativeMultiplier => &ht + BigRational::one(),
    };
    let midpoint = &ht / &den;
    Ok(ThetaInterval {
        lo: (&ht - &inv_h) / &den,
        hi: (&ht + &inv_h) / &den,
        hi_closed: true,
        regime,
        invariance_bound: (regime == Regime::NegativeMultiplier).then(|| midpoint.clone()),
        midpoint,
    })
}

/// Offset `c` with `|c| < 1` placing theta at `(H^T + c/H)/(H^T -+ 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegimeOffset(BigRational);

impl RegimeOffset {
    pub fn new(c: BigRational) -> Result<Self> {
        if c.abs() >= BigRational::one() {
            return Err(TentError::InvalidOffset(format_rational(&c)));
        }
        Ok(RegimeOffset(c))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

pub fn theta_from_offset(
    params: &MapParams,
    period: u32,
    regime: Regime,
    offset: &RegimeOffset,
) -> Result<BigRational> {
    check_h_t(params, period)?;
    let ht = params.slope_pow(period);
    let num = &ht + offset.value() / params.slope();
    let den = match regime {
        Regime::PositiveMultiplier => &ht - BigRational::one(),
        Regime::NegativeMultiplier => &ht + BigRational::one(),
    };
    Ok(num / den)
}

/// `lambda = mu (theta + (1 - theta) mu)^T`, exactly.
pub fn controlled_multiplier(mu: &BigRational, theta: &BigRational, period: u32) -> BigRational {
    let inner = theta + (BigRational::one() - theta) * mu;
    mu * pow(&inner, period)
}

pub fn is_locally_stable(mu: &BigRational, theta: &BigRational, period: u32) -> bool {
    controlled_multiplier(mu, theta, period).abs() < BigRational::one()
}

/// Whether a `tau`-cycle with multiplier sign `mu_tau_sign` is stable when the
/// control targets period `period` in `regime` (`p = period / tau`):
/// positive regime: `mu_tau > 0`, or `mu_tau < 0` with `p` even;
/// negative regime: `mu_tau < 0` with `p` odd.
pub fn subcycle_stable(period: u32, tau: u32, regime: Regime, mu_tau_sign: i8) -> Result<bool> {
    if tau == 0 || !period.is_multiple_of(tau) {
        return Err(TentError::NotADivisor { tau, period });
    }
    let p = period / tau;
    let positive = mu_tau_sign > 0;
    Ok(match regime {
        Regime::PositiveMultiplier => positive || p.is_multiple_of(2),
        Regime::NegativeMultiplier => !positive && p % 2 == 1,
    })
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn mobius(n: u64) -> i8 {
    let mut m = n;
    let mut sign = 1i8;
    for p in prime_factors(n) {
        m /= p;
        if m.is_multiple_of(p) {
            return 0;
        }
        sign = -sign;
    }
    sign
}

pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Number of distinct proper `period`-cycles of the tent map for `H > 2`:
/// `(1/T) sum_{d | T} mobius(d) 2^(T/d)`, which is 2 for `T = 1`.
pub fn count_cycles(period: u32) -> Result<u64> {
    if !(1..=MAX_COUNT_PERIOD).contains(&period) {
        return Err(TentError::PeriodOutOfRange { period, min: 1, max: MAX_COUNT_PERIOD });
    }
    let total: i128 = divisors(period)
        .into_iter()
        .map(|d| mobius(d as u64) as i128 * (1i128 << (period / d)))
        .sum();
    Ok((total / period as i128) as u64)
}
