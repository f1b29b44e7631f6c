//! Transient heat conduction in a half-space whose surface is held at a
//! prescribed temperature on one half (`y > 0`) and a prescribed flux on the
//! other (`y < 0`).
//!
//! The temperature is written as β-integrals of a contour kernel against
//! inverse-Laplace time kernels, plus a closed-form term. A finite-difference
//! solver of the same problem is included as an independent check.

pub mod error;
pub mod fd;
pub mod field;
pub mod kernel;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod time_kernels;

pub use error::{Error, Result};
pub use field::{temperature, temperature_at, EvalConfig, FieldResult};
pub use kernel::{identity_integral, kernel_g, IdentityResult};
pub use model::{Angle, MaterialScales, PolarPoint, ProblemConfig, ProblemSpec};
pub use quadrature::QuadratureConfig;
pub use time_kernels::{ForcingProfile, KernelWeight, TimeKernelValue};
