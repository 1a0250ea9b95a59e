//! Rectangular free convolution of symmetric laws.
//!
//! The crate is organised bottom-up:
//!
//! * [`measures`] -- symmetric probability measures, finite Levy measures and
//!   laws on the half line, stored as atoms plus a piecewise-linear density.
//! * [`nc`] -- exact enumeration of noncrossing partitions and pairings and the
//!   moment/cumulant conversions built on them.
//! * [`transforms`] -- Cauchy transform, the `H` transform, its inverse, the
//!   rectangular R-transform and recovery of a law from its R-transform.
//! * [`convolution`] -- the rectangular free convolution `⊞_λ` and its powers.
//! * [`infdiv`] -- Levy-Khinchine machinery, the rectangular Bercovici-Pata
//!   bijection and the closed-form named laws.
//! * [`randmat`] -- seeded Monte Carlo with rectangular random matrices.

pub mod convolution;
pub mod error;
pub mod infdiv;
pub mod measures;
pub mod nc;
pub mod randmat;
pub mod transforms;

pub use error::{Error, Result};
pub use measures::{LevyMeasure, NonnegativeMeasure, SymmetricMeasure};
pub use num_complex::Complex64;
pub use transforms::ContourConfig;
