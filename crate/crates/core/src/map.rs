//! The generalized tent map `f(x) = H x` for `x <= 1/2`, `H (1 - x)` otherwise,
//! and the predictive-control map `F(x) = f(theta x + (1 - theta) f^T(x))`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TentError};
use crate::hpreal::HpReal;
use crate::rational::{format_rational, int, parse_rational};

/// Slope of the tent map, an exact rational with `H >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapParams {
    h: BigRational,
}

impl MapParams {
    pub fn new(h: BigRational) -> Result<Self> {
        if h < int(2) {
            return Err(TentError::InvalidSlope(format_rational(&h)));
        }
        Ok(MapParams { h })
    }

    pub fn from_integer(h: i64) -> Result<Self> {
        MapParams::new(int(h))
    }

    pub fn slope(&self) -> &BigRational {
        &self.h
    }

    /// `H^T`.
    pub fn slope_pow(&self, t: u32) -> BigRational {
        crate::rational::pow(&self.h, t)
    }

    /// Evaluator with every constant rounded once to `prec` digits.
    pub fn at_precision(&self, prec: u32) -> TentMap {
        TentMap {
            h: HpReal::from_rational(&self.h, prec),
            half: HpReal::parse("0.5", prec).expect("literal"),
            one: HpReal::from_i64(1, prec),
        }
    }
}

impl FromStr for MapParams {
    type Err = TentError;
    fn from_str(s: &str) -> Result<Self> {
        MapParams::new(parse_rational(s)?)
    }
}

impl fmt::Display for MapParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.h))
    }
}

/// Which multiplier sign a control parameter range stabilizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "pos")]
    PositiveMultiplier,
    #[serde(rename = "neg")]
    NegativeMultiplier,
}

impl Regime {
    pub fn sign(self) -> i8 {
        match self {
            Regime::PositiveMultiplier => 1,
            Regime::NegativeMultiplier => -1,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Regime::PositiveMultiplier => "pos",
            Regime::NegativeMultiplier => "neg",
        }
    }
}

impl FromStr for Regime {
    type Err = TentError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" | "positive" | "+" => Ok(Regime::PositiveMultiplier),
            "neg" | "negative" | "-" => Ok(Regime::NegativeMultiplier),
            other => Err(TentError::InvalidArgument(format!("unknown regime `{other}`"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// One controlled system: slope, target period, regime and control parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlConfig {
    pub params: MapParams,
    pub period: u32,
    pub regime: Regime,
    pub theta: BigRational,
}

impl ControlConfig {
    pub fn new(params: MapParams, period: u32, regime: Regime, theta: BigRational) -> Result<Self> {
        if period < 1 {
            return Err(TentError::PeriodOutOfRange { period, min: 1, max: u32::MAX });
        }
        Ok(ControlConfig { params, period, regime, theta })
    }

    pub fn at_precision(&self, prec: u32) -> ControlledMap {
        let one_minus = BigRational::one() - &self.theta;
        ControlledMap {
            tent: self.params.at_precision(prec),
            period: self.period,
            one_minus_theta: HpReal::from_rational(&one_minus, prec),
        }
    }
}

/// Tent map with its constants rounded to a fixed working precision.
#[derive(Clone, Debug)]
pub struct TentMap {
    h: HpReal,
    half: HpReal,
    one: HpReal,
}

impl TentMap {
    pub fn eval(&self, x: &HpReal) -> HpReal {
        if *x <= self.half {
            &self.h * x
        } else {
            &self.h * &(&self.one - x)
        }
    }

    pub fn iterate(&self, x: &HpReal, k: u32) -> HpReal {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.eval(&y);
        }
        y
    }

    pub fn slope(&self) -> &HpReal {
        &self.h
    }
}

#[derive(Clone, Debug)]
pub struct ControlledMap {
    tent: TentMap,
    period: u32,
    one_minus_theta: HpReal,
}

impl ControlledMap {
    pub fn tent(&self) -> &TentMap {
        &self.tent
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    /// `zeta(x) = theta x + (1 - theta) f^T(x)`, evaluated as `x + (1 - theta)(f^T(x) - x)`
    /// so that a point with `f^T(x) = x` maps to itself without rounding.
    pub fn zeta(&self, x: &HpReal) -> HpReal {
        let ft = self.tent.iterate(x, self.period);
        x + &(&self.one_minus_theta * &(&ft - x))
    }

    pub fn eval(&self, x: &HpReal) -> HpReal {
        self.tent.eval(&self.zeta(x))
    }
}

pub fn tent_eval(x: &HpReal, params: &MapParams) -> HpReal {
    params.at_precision(x.precision()).eval(x)
}

pub fn tent_iterate(x: &HpReal, params: &MapParams, k: u32) -> HpReal {
    params.at_precision(x.precision()).iterate(x, k)
}

pub fn zeta_eval(x: &HpReal, cfg: &ControlConfig) -> HpReal {
    cfg.at_precision(x.precision()).zeta(x)
}

pub fn control_eval(x: &HpReal, cfg: &ControlConfig) -> HpReal {
    cfg.at_precision(x.precision()).eval(x)
}

/// Exact rational tent map; used by the oracle and by tests.
pub fn tent_exact(x: &BigRational, h: &BigRational) -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    if *x <= half {
        h * x
    } else {
        h * (BigRational::one() - x)
    }
}

pub fn tent_iterate_exact(x: &BigRational, h: &BigRational, k: u32) -> BigRational {
    (0..k).fold(x.clone(), |y, _| tent_exact(&y, h))
}
