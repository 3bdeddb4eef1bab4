//! Exact enumeration of all proper T-cycles through symbolic dynamics.
//!
//! Every cycle of the tent map is coded by the branch it takes at each point,
//! a word over `{L, R}`. Composing the affine branch maps `x -> Hx` and
//! `x -> H - Hx` along a word gives `a x + b`; its fixed point `b / (1 - a)`
//! is a cycle point whenever each iterate lies on the branch the word claims.
//! Walking canonical primitive necklaces (Lyndon words) visits every cycle once.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TentError};
use crate::map::MapParams;
use crate::rational::{format_rational, parse_rational};

pub const MAX_ORACLE_PERIOD: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// `x <= 1/2`
    L,
    /// `x > 1/2`
    R,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolSequence(Vec<Symbol>);

impl SymbolSequence {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        SymbolSequence(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_r(&self) -> usize {
        self.0.iter().filter(|&&s| s == Symbol::R).count()
    }

    pub fn rotated(&self, k: usize) -> SymbolSequence {
        let mut v = self.0.clone();
        let n = v.len();
        if n > 0 {
            v.rotate_left(k % n);
        }
        SymbolSequence(v)
    }

    /// No proper rotation equals the word itself.
    pub fn is_primitive(&self) -> bool {
        let n = self.len();
        n > 0 && (1..n).all(|k| !n.is_multiple_of(k) || self.rotated(k) != *self)
    }

    /// Lexicographically smallest among its rotations (`L < R`).
    pub fn is_canonical(&self) -> bool {
        (1..self.len()).all(|k| *self <= self.rotated(k))
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Symbol::L => "L",
                Symbol::R => "R",
            })?;
        }
        Ok(())
    }
}

impl FromStr for SymbolSequence {
    type Err = TentError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'L' => Ok(Symbol::L),
                'R' => Ok(Symbol::R),
                _ => Err(TentError::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(SymbolSequence)
    }
}

fn check_period(period: u32) -> Result<()> {
    if !(1..=MAX_ORACLE_PERIOD).contains(&period) {
        return Err(TentError::PeriodOutOfRange { period, min: 1, max: MAX_ORACLE_PERIOD });
    }
    Ok(())
}

/// All canonical primitive binary necklaces of length `period`, in lexicographic order.
pub fn primitive_necklaces(period: u32) -> Result<Vec<SymbolSequence>> {
    check_period(period)?;
    let n = period as usize;
    let mut out = Vec::new();
    // Duval's generation of Lyndon words of length <= n; keep those of length n.
    let mut w: Vec<i8> = vec![-1];
    while let Some(last) = w.last_mut() {
        *last += 1;
        let m = w.len();
        if m == n {
            out.push(SymbolSequence(
                w.iter().map(|&b| if b == 0 { Symbol::L } else { Symbol::R }).collect(),
            ));
        }
        while w.len() < n {
            let c = w[w.len() - m];
            w.push(c);
        }
        while w.last() == Some(&1) {
            w.pop();
        }
    }
    Ok(out)
}

/// `x -> a x + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub a: BigRational,
    pub b: BigRational,
}

/// Composition `f_{s_T} o ... o f_{s_1}` of the branch maps along `seq`.
pub fn affine_compose(seq: &SymbolSequence, params: &MapParams) -> AffineForm {
    let h = params.slope();
    seq.symbols().iter().fold(
        AffineForm { a: BigRational::one(), b: BigRational::zero() },
        |acc, s| match s {
            Symbol::L => AffineForm { a: h * &acc.a, b: h * &acc.b },
            Symbol::R => AffineForm { a: -(h * &acc.a), b: h - h * &acc.b },
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCycle {
    /// Rotation starting at the smallest point.
    pub points: Vec<BigRational>,
    /// Branch of each point, aligned with `points`.
    pub symbols: SymbolSequence,
    /// Canonical necklace the cycle was solved from.
    pub necklace: SymbolSequence,
    pub multiplier_sign: i8,
    pub period: u32,
}

impl ExactCycle {
    pub fn to_record(&self) -> ExactCycleRecord {
        ExactCycleRecord {
            period: self.period,
            symbols: self.symbols.to_string(),
            sign: self.multiplier_sign,
            points: self.points.iter().map(format_rational).collect(),
        }
    }

    /// `mu = sign * H^T`.
    pub fn multiplier(&self, params: &MapParams) -> BigRational {
        let m = params.slope_pow(self.period);
        if self.multiplier_sign < 0 {
            -m
        } else {
            m
        }
    }
}

/// One JSON line of `enumerate` output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCycleRecord {
    #[serde(rename = "T")]
    pub period: u32,
    pub symbols: String,
    pub sign: i8,
    pub points: Vec<String>,
}

impl ExactCycleRecord {
    pub fn to_cycle(&self) -> Result<ExactCycle> {
        let points = self.points.iter().map(|p| parse_rational(p)).collect::<Result<Vec<_>>>()?;
        let symbols: SymbolSequence = self.symbols.parse()?;
        let necklace = (0..symbols.len())
            .map(|k| symbols.rotated(k))
            .min()
            .unwrap_or_else(|| symbols.clone());
        Ok(ExactCycle { points, symbols, necklace, multiplier_sign: self.sign, period: self.period })
    }
}

/// The cycle coded by `seq`, or `None` if some iterate violates its branch.
pub fn solve_cycle(seq: &SymbolSequence, params: &MapParams) -> Option<ExactCycle> {
    if seq.is_empty() {
        return None;
    }
    let h = params.slope();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let AffineForm { a, b } = affine_compose(seq, params);
    let mut x = b / (BigRational::one() - a);
    let mut points = Vec::with_capacity(seq.len());
    for s in seq.symbols() {
        let on_branch = match s {
            Symbol::L => x <= half,
            Symbol::R => x > half,
        };
        if !on_branch {
            return None;
        }
        let next = match s {
            Symbol::L => h * &x,
            Symbol::R => h * (BigRational::one() - &x),
        };
        points.push(std::mem::replace(&mut x, next));
    }
    if points.iter().any(|p| *p < BigRational::zero() || *p > BigRational::one()) {
        return None;
    }
    let start = (0..points.len()).min_by(|&i, &j| points[i].cmp(&points[j]))?;
    points.rotate_left(start);
    let mut sorted = points.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != points.len() {
        return None;
    }
    Some(ExactCycle {
        period: seq.len() as u32,
        multiplier_sign: if seq.count_r() % 2 == 1 { -1 } else { 1 },
        symbols: seq.rotated(start),
        necklace: seq.clone(),
        points,
    })
}

/// All proper `period`-cycles, sorted by smallest point.
///
/// For `H > 2` every primitive necklace is realized and the length equals
/// `count_cycles(period)`. At `H = 2` orbits through `1/2` are rejected.
pub fn enumerate_cycles(params: &MapParams, period: u32) -> Result<Vec<ExactCycle>> {
    let necklaces = primitive_necklaces(period)?;
    let mut cycles: Vec<ExactCycle> =
        necklaces.par_iter().filter_map(|seq| solve_cycle(seq, params)).collect();
    cycles.sort_by(|a, b| a.points[0].cmp(&b.points[0]));
    Ok(cycles)
}

/// Cycles of every period dividing `period`, shortest periods first.
pub fn enumerate_divisor_cycles(params: &MapParams, period: u32) -> Result<Vec<ExactCycle>> {
    check_period(period)?;
    let mut out = Vec::new();
    for d in crate::control::divisors(period) {
        out.extend(enumerate_cycles(params, d)?);
    }
    Ok(out)
}
