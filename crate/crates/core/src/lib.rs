//! Spectral theory of the poloidal component of the toroidal dipole operator
//!
//! ```text
//! T3 = -i C0 [ C1(theta, a) d/dtheta + C2(theta, a) ]
//! ```
//!
//! on a thin toroidal film with aspect ratio `a = R / r > 1`.
//!
//! The crate provides the operator coefficients and singular angles
//! ([`model`]), closed-form primitives, quantized eigenvalues and singular
//! eigenfunction kernels ([`eigen`]), the monotone change of variables used
//! for projections ([`branch`]), projections of periodic wavefunctions onto
//! the eigendistributions ([`spectral`]) and independent numerical oracles
//! ([`oracles`]) that check every closed form.

pub mod branch;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod model;
pub mod oracles;
pub mod quadrature;
pub mod roots;
pub mod spectral;
pub mod tables;
pub mod verify;
pub mod wavefunction;

pub use branch::{BranchDomain, BranchId, BranchMap};
pub use eigen::{Eigenvalue, Kernel, KernelSample, Primitives};
pub use error::{Error, Result};
pub use geometry::{AspectRatio, PhysicalScale, QuadratureConfig, TorusGeometry, Units};
pub use model::{coeff_c1, coeff_c2, Pole, SingularAngles, ThetaOperator, ThetaPoint};
pub use spectral::{SpectralCoefficients, SpectralContext};
pub use wavefunction::{FiniteDifference, FourierSeries, SampledGrid, ThetaFunction, Wavefunction};
