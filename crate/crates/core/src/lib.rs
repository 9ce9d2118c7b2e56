//! Localized Fourier extension.
//!
//! A non-periodic function on `[a, b]` is split over a partition of `K`
//! subintervals. Each piece is mapped onto `Λ = [0, 2π/T]` and approximated
//! there by a Fourier series that is periodic on `[0, 2π]`, with coefficients
//! from a truncated-SVD solve. All pieces use the same equispaced node layout,
//! so a single factorized collocation matrix serves every subinterval and the
//! total cost after factorization is linear in the number of nodes.
//!
//! ```
//! use locfex::{fit, ExtensionParams, FunctionSource, Interval, Partition};
//!
//! let p = Partition::uniform(Interval::new(-1.0, 1.0).unwrap(), 12).unwrap();
//! let runge = FunctionSource::real(|x| 1.0 / (1.0 + 25.0 * x * x));
//! let apx = fit(&runge, &p, &ExtensionParams::defaults()).unwrap();
//! let y = apx.evaluate(0.3).unwrap();
//! assert!((y.re - 1.0 / (1.0 + 25.0 * 0.09)).abs() < 1e-10);
//! ```

pub mod approximant;
pub mod error;
pub mod experiments;
pub mod frame;
pub mod geometry;
pub mod io;
pub mod singularity;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
pub(crate) mod testing;

pub use approximant::{fit, fit_with_cache, ErrorReport, FunctionSource, LocalApproximant};
pub use error::{Error, Result};
pub use frame::{ExtensionParams, FrameCache};
pub use geometry::{Interval, Partition, ScaleMap};
