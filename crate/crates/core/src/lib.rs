//! Stabilizing, finding, verifying and counting periodic orbits of the
//! generalized tent map with predictive control.

pub mod cantor;
pub mod cli;
pub mod control;
pub mod error;
pub mod finder;
pub mod hpreal;
pub mod map;
pub mod oracle;
pub mod rational;

pub use error::{Result, TentError};
pub use hpreal::HpReal;
pub use map::{ControlConfig, MapParams, Regime};
