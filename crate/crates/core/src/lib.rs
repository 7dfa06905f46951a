//! Essential-spectrum edges of self-adjoint band operators.
//!
//! For a self-adjoint band operator `H` on a uniformly discrete space, the
//! bottom of the essential spectrum is the supremum, over complements `M` of
//! finite sets, of `inf sp(H` compressed to `M)`; the top is the matching
//! infimum. This crate evaluates both sides on finite windows:
//!
//! - [`kernel`] and [`space`]: band kernels over validated metric windows,
//!   with restrictions, defects and the Schur/Hahn norm bounds;
//! - [`subshift`]: Hamiltonians over orbits of bi-sided subshifts and their
//!   compressions to Fell shells around the limit set;
//! - [`eigen`]: enclosures of extreme eigenvalues of finite truncations;
//! - [`driver`]: the compression ladder over radii and windows, with
//!   monotonicity audits and independent oracle edges.
//!
//! Kernels are generic over [`Scalar`]; algebraic identities can be checked
//! exactly with [`IntKernel`] or [`ExactKernel`].

pub mod driver;
pub mod eigen;
pub mod error;
pub mod kernel;
pub mod scalar;
pub mod space;
pub mod subshift;

use num_complex::Complex64;
use num_rational::Ratio;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Complex Hermitian kernels.
pub type Kernel = kernel::BandKernel<Complex64>;
pub type RealKernel = kernel::BandKernel<f64>;
pub type IntKernel = kernel::BandKernel<i64>;
pub type ExactKernel = kernel::BandKernel<Ratio<i64>>;

pub type Symbol = subshift::HoppingSymbol<Complex64>;
pub type RealSymbol = subshift::HoppingSymbol<f64>;
