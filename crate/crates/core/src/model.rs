//! Problem definition, unit scaling and coordinates.
//!
//! Everything downstream of this module works in scaled variables, where the
//! governing equation is `∇²T = ∂T/∂t` on `x >= 0` with
//!
//! * `T(0, y, t) = T0 f0(t)` for `y > 0`,
//! * `∂T/∂x(0, y, t) = T0' g0(t)` for `y < 0`,
//! * `T(x, y, 0) = 0`.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::time_kernels::ForcingProfile;

/// Physical constants and the derived nondimensionalisation scales.
///
/// The length scale `x*` is fixed at 1 m; `y* = 1/sqrt(ell)` m absorbs the
/// conductivity anisotropy and `t* = x*^2 / kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialScales {
    /// Thermal conductivity along x (W m^-1 K^-1).
    pub k: f64,
    /// Anisotropy ratio: conductivity along y is `k * ell`.
    pub ell: f64,
    /// Mass density (kg m^-3).
    pub rho: f64,
    /// Specific heat (J kg^-1 K^-1).
    pub c_v: f64,
    /// Reference temperature (K).
    #[serde(rename = "T_star")]
    pub t_star_kelvin: f64,
}

/// Scaled spacetime point with its temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub temperature: f64,
}

/// A point in physical units (m, m, s, K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub temperature: f64,
}

impl MaterialScales {
    pub const X_STAR: f64 = 1.0;

    pub fn new(k: f64, ell: f64, rho: f64, c_v: f64, t_star_kelvin: f64) -> Result<Self> {
        let scales = Self {
            k,
            ell,
            rho,
            c_v,
            t_star_kelvin,
        };
        scales.validate()?;
        Ok(scales)
    }

    /// Unit material: every scale is the identity.
    pub fn unit() -> Self {
        Self {
            k: 1.0,
            ell: 1.0,
            rho: 1.0,
            c_v: 1.0,
            t_star_kelvin: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k", self.k),
            ("ell", self.ell),
            ("rho", self.rho),
            ("c_v", self.c_v),
            ("T_star", self.t_star_kelvin),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "material parameter {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Thermal diffusivity `k / (rho c_v)`.
    pub fn kappa(&self) -> f64 {
        self.k / (self.rho * self.c_v)
    }

    pub fn x_star(&self) -> f64 {
        Self::X_STAR
    }

    pub fn y_star(&self) -> f64 {
        Self::X_STAR / self.ell.sqrt()
    }

    pub fn t_star(&self) -> f64 {
        Self::X_STAR * Self::X_STAR / self.kappa()
    }

    pub fn nondimensionalize(&self, p: PhysicalPoint) -> Result<ScaledPoint> {
        for (name, v) in [("x", p.x), ("y", p.y), ("t", p.t), ("temperature", p.temperature)] {
            ensure_finite(name, v)?;
        }
        Ok(ScaledPoint {
            x: p.x / self.x_star(),
            y: p.y / self.y_star(),
            t: p.t / self.t_star(),
            temperature: (p.temperature - self.t_star_kelvin) / self.t_star_kelvin,
        })
    }

    pub fn redimensionalize(&self, p: ScaledPoint) -> Result<PhysicalPoint> {
        for (name, v) in [("x", p.x), ("y", p.y), ("t", p.t), ("temperature", p.temperature)] {
            ensure_finite(name, v)?;
        }
        Ok(PhysicalPoint {
            x: p.x * self.x_star(),
            y: p.y * self.y_star(),
            t: p.t * self.t_star(),
            temperature: self.t_star_kelvin * (1.0 + p.temperature),
        })
    }
}

impl Default for MaterialScales {
    fn default() -> Self {
        Self::unit()
    }
}

/// Boundary amplitudes and temporal forcing on the two halves of the surface.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    /// Dirichlet amplitude on `y > 0`.
    pub t0: f64,
    /// Neumann amplitude on `y < 0`.
    pub t0_prime: f64,
    pub f0: ForcingProfile,
    pub g0: ForcingProfile,
}

impl ProblemSpec {
    pub fn new(t0: f64, t0_prime: f64, f0: ForcingProfile, g0: ForcingProfile) -> Result<Self> {
        ensure_finite("T0", t0)?;
        ensure_finite("T0_prime", t0_prime)?;
        Ok(Self { t0, t0_prime, f0, g0 })
    }

    /// Step temperature on `y > 0`, step flux on `y < 0`.
    pub fn step(t0: f64, t0_prime: f64) -> Self {
        Self {
            t0,
            t0_prime,
            f0: ForcingProfile::UnitStep,
            g0: ForcingProfile::UnitStep,
        }
    }

    /// Step temperature with a perfect insulator on `y < 0`.
    pub fn step_insulator(t0: f64) -> Self {
        Self::step(t0, 0.0)
    }
}

/// An angle in `[-π/2, π/2]` with its sine and cosine, plus `1 + sin θ`
/// computed without cancellation near `θ = -π/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub theta: f64,
    pub cos: f64,
    pub sin: f64,
    pub one_plus_sin: f64,
}

impl Angle {
    pub fn new(theta: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        if theta.abs() > FRAC_PI_2 {
            return Err(Error::InvalidInput(format!(
                "theta must lie in [-pi/2, pi/2], got {theta}"
            )));
        }
        // The surface itself must be representable exactly.
        let (sin, cos) = if theta == FRAC_PI_2 {
            (1.0, 0.0)
        } else if theta == -FRAC_PI_2 {
            (-1.0, 0.0)
        } else {
            theta.sin_cos()
        };
        Ok(Self::from_parts(theta, cos, sin))
    }

    fn from_parts(theta: f64, cos: f64, sin: f64) -> Self {
        let one_plus_sin = if sin >= 0.0 { 1.0 + sin } else { cos * cos / (1.0 - sin) };
        Self {
            theta,
            cos,
            sin,
            one_plus_sin,
        }
    }

    /// Heaviside step of the angle, with `H(0) = 1/2`.
    pub fn heaviside(&self) -> f64 {
        if self.theta > 0.0 {
            1.0
        } else if self.theta < 0.0 {
            0.0
        } else {
            0.5
        }
    }
}

/// A point of the closed half-space in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub angle: Angle,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        ensure_finite("r", r)?;
        if r < 0.0 {
            return Err(Error::InvalidInput(format!("r must be >= 0, got {r}")));
        }
        Ok(Self {
            r,
            angle: Angle::new(theta)?,
        })
    }

    /// Build from Cartesian coordinates; sine and cosine come straight from
    /// `y/r` and `x/r`, so `x = 0` gives an exact zero cosine.
    pub fn from_cartesian(x: f64, y: f64) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("y", y)?;
        if x < 0.0 {
            return Err(Error::OutsideHalfSpace { x, y });
        }
        let r = x.hypot(y);
        if r == 0.0 {
            return Ok(Self {
                r,
                angle: Angle::from_parts(0.0, 1.0, 0.0),
            });
        }
        let theta = y.atan2(x);
        let cos = x / r;
        let sin = y / r;
        let one_plus_sin = if y >= 0.0 { 1.0 + sin } else { x * x / (r * (r - y)) };
        Ok(Self {
            r,
            angle: Angle {
                theta,
                cos,
                sin,
                one_plus_sin,
            },
        })
    }

    pub fn theta(&self) -> f64 {
        self.angle.theta
    }

    pub fn x(&self) -> f64 {
        self.r * self.angle.cos
    }

    pub fn y(&self) -> f64 {
        self.r * self.angle.sin
    }
}

/// `(x, y) -> (r, θ)` with `θ = atan2(y, x) ∈ [-π/2, π/2]`.
pub fn to_polar(x: f64, y: f64) -> Result<(f64, f64)> {
    let p = PolarPoint::from_cartesian(x, y)?;
    Ok((p.r, p.theta()))
}

pub fn to_cartesian(r: f64, theta: f64) -> Result<(f64, f64)> {
    let p = PolarPoint::new(r, theta)?;
    Ok((p.x(), p.y()))
}

/// A spacetime evaluation point with its computed temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub r: f64,
    pub theta: f64,
    pub t: f64,
    pub value: f64,
}

impl FieldSample {
    pub fn x(&self) -> f64 {
        self.r * self.theta.cos()
    }

    pub fn y(&self) -> f64 {
        self.r * self.theta.sin()
    }
}

/// Temporal profile as it appears in the JSON configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileConfig {
    Step,
    Ramp { a: f64, b: f64 },
}

impl ProfileConfig {
    pub fn to_profile(self) -> Result<ForcingProfile> {
        match self {
            ProfileConfig::Step => Ok(ForcingProfile::UnitStep),
            ProfileConfig::Ramp { a, b } => ForcingProfile::ramp(a, b),
        }
    }
}

/// The JSON problem configuration.
///
/// ```json
/// { "T0": 1, "T0_prime": 0, "f0": {"type": "step"}, "g0": {"type": "step"},
///   "material": {"k": 1, "ell": 1, "rho": 1, "c_v": 1, "T_star": 1} }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "T0_prime")]
    pub t0_prime: f64,
    pub f0: ProfileConfig,
    pub g0: ProfileConfig,
    #[serde(default)]
    pub material: MaterialScales,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                Error::Config(e.into_inner().to_string())
            } else {
                Error::Config(format!("key `{path}`: {}", e.into_inner()))
            }
        })?;
        cfg.problem()?;
        cfg.material.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.t0, self.t0_prime, self.f0.to_profile()?, self.g0.to_profile()?)
    }
}
