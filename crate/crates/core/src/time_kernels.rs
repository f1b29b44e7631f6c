//! Inverse-Laplace time kernels.
//!
//! For a forcing profile with transform `f̃(s)` the solution needs
//!
//! ```text
//! T1(r, β, t) = L⁻¹[ f̃(s) e^{-βr√s} ](t)
//! T2(r, β, t) = L⁻¹[ f̃(s) s^{-1/2} e^{-βr√s} ](t)
//! ```
//!
//! The built-in profiles are sums of delayed powers `c e^{-ds} / s^m`, whose
//! kernels are all of the form `(4τ)^{n/2} i^n erfc(βr / (2√τ))` with
//! `τ = t - d`. Anything else is inverted numerically with a fixed-Talbot
//! rule, which is also the independent check on the closed forms.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::special::ierfc;

/// Which of the two kernels: plain (`T1`, temperature data) or with the
/// extra `s^{-1/2}` factor (`T2`, flux data).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelWeight {
    Temperature,
    Flux,
}

impl KernelWeight {
    fn half_powers(self) -> u32 {
        match self {
            KernelWeight::Temperature => 0,
            KernelWeight::Flux => 1,
        }
    }

    fn apply(self, s: Complex64) -> Complex64 {
        match self {
            KernelWeight::Temperature => Complex64::new(1.0, 0.0),
            KernelWeight::Flux => 1.0 / s.sqrt(),
        }
    }
}

/// `c e^{-delay s} / s^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedPower {
    pub delay: f64,
    pub coef: f64,
    pub power: u32,
}

/// Step with a ramp up and back down superposed:
/// `f(t) = H(t) + (t-a)H(t-a) + 2(b-t)H(t-b) + (t-(2b-a))H(t-(2b-a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    a: f64,
    b: f64,
}

impl Ramp {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_finite("a", a)?;
        ensure_finite("b", b)?;
        if !(0.0 < a && a < b) {
            return Err(Error::InvalidInput(format!(
                "ramp breakpoints need 0 < a < b, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Time at which the ramp is back at the step level.
    pub fn end(&self) -> f64 {
        2.0 * self.b - self.a
    }

    fn pieces(&self) -> [DelayedPower; 4] {
        [
            DelayedPower {
                delay: 0.0,
                coef: 1.0,
                power: 1,
            },
            DelayedPower {
                delay: self.a,
                coef: 1.0,
                power: 2,
            },
            DelayedPower {
                delay: self.b,
                coef: -2.0,
                power: 2,
            },
            DelayedPower {
                delay: self.end(),
                coef: 1.0,
                power: 2,
            },
        ]
    }
}

type TransformFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;
type TimeFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A profile known only through its Laplace transform (analytic for
/// `Re s > 0`), optionally with its time-domain values for the
/// finite-difference oracle.
#[derive(Clone)]
pub struct CustomProfile {
    name: String,
    transform: Arc<TransformFn>,
    time_domain: Option<Arc<TimeFn>>,
}

impl CustomProfile {
    pub fn new(name: impl Into<String>, transform: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            transform: Arc::new(transform),
            time_domain: None,
        }
    }

    pub fn with_time_domain(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.time_domain = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile")
            .field("name", &self.name)
            .field("time_domain", &self.time_domain.is_some())
            .finish()
    }
}

/// Temporal forcing of one half of the boundary. Zero for `t < 0`.
#[derive(Debug, Clone)]
pub enum ForcingProfile {
    /// `H(t)`, transform `1/s`.
    UnitStep,
    Ramp(Ramp),
    Custom(CustomProfile),
}

/// `T1` and `T2` at one `(r, β, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeKernelValue {
    pub t1: f64,
    pub t2: f64,
}

impl ForcingProfile {
    pub fn ramp(a: f64, b: f64) -> Result<Self> {
        Ok(ForcingProfile::Ramp(Ramp::new(a, b)?))
    }

    /// Decomposition into delayed powers of `1/s`, if the profile has one.
    pub fn pieces(&self) -> Option<Vec<DelayedPower>> {
        match self {
            ForcingProfile::UnitStep => Some(vec![DelayedPower {
                delay: 0.0,
                coef: 1.0,
                power: 1,
            }]),
            ForcingProfile::Ramp(r) => Some(r.pieces().to_vec()),
            ForcingProfile::Custom(_) => None,
        }
    }

    /// Time-domain value, where known.
    pub fn value(&self, t: f64) -> Option<f64> {
        if let ForcingProfile::Custom(c) = self {
            return c.time_domain.as_ref().map(|f| if t > 0.0 { f(t) } else { 0.0 });
        }
        let pieces = self.pieces()?;
        Some(
            pieces
                .iter()
                .map(|p| {
                    let tau = t - p.delay;
                    if tau <= 0.0 || (p.delay == 0.0 && t <= 0.0) {
                        0.0
                    } else {
                        p.coef * tau.powi(p.power as i32 - 1)
                    }
                })
                .sum(),
        )
    }

    /// Laplace transform `f̃(s)`.
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        match self {
            ForcingProfile::Custom(c) => (c.transform)(s),
            _ => self
                .pieces()
                .unwrap_or_default()
                .iter()
                .map(|p| p.coef * (-p.delay * s).exp() / s.powu(p.power))
                .sum(),
        }
    }

    /// `T1` or `T2` for this profile: closed form where available, Talbot
    /// inversion otherwise.
    pub fn kernel(&self, weight: KernelWeight, r: f64, beta: f64, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        match self.pieces() {
            Some(pieces) => Ok(pieces
                .iter()
                .map(|p| p.coef * delayed_power_kernel(p, weight, r * beta, t))
                .sum()),
            None => self.kernel_via_talbot(weight, r, beta, t, &TalbotConfig::default()),
        }
    }

    pub fn t1(&self, r: f64, beta: f64, t: f64) -> Result<f64> {
        self.kernel(KernelWeight::Temperature, r, beta, t)
    }

    pub fn t2(&self, r: f64, beta: f64, t: f64) -> Result<f64> {
        self.kernel(KernelWeight::Flux, r, beta, t)
    }

    pub fn evaluate(&self, r: f64, beta: f64, t: f64) -> Result<TimeKernelValue> {
        Ok(TimeKernelValue {
            t1: self.t1(r, beta, t)?,
            t2: self.t2(r, beta, t)?,
        })
    }

    /// Numerical inversion of the same kernel. Delayed pieces are inverted
    /// one at a time through the shift theorem: an `e^{-ds}` factor grows
    /// along the left-running arms of the contour and ruins the rule when
    /// `d` is comparable to `t`.
    pub fn kernel_via_talbot(
        &self,
        weight: KernelWeight,
        r: f64,
        beta: f64,
        t: f64,
        cfg: &TalbotConfig,
    ) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        match self {
            ForcingProfile::Custom(c) => talbot_inverse_with(&*c.transform, r, beta, t, weight, cfg),
            _ => {
                let mut total = 0.0;
                for p in self.pieces().unwrap_or_default() {
                    let tau = t - p.delay;
                    if tau > 0.0 {
                        let power = p.power as i32;
                        total +=
                            p.coef * talbot_inverse_with(|s: Complex64| s.powi(-power), r, beta, tau, weight, cfg)?;
                    }
                }
                Ok(total)
            }
        }
    }
}

fn delayed_power_kernel(p: &DelayedPower, weight: KernelWeight, k: f64, t: f64) -> f64 {
    let order = 2 * p.power + weight.half_powers() - 2;
    power_kernel(order, k, t - p.delay)
}

/// `L⁻¹[ e^{-k√s} / s^{1 + n/2} ](τ) = (4τ)^{n/2} i^n erfc(k / (2√τ))`, zero
/// for `τ <= 0`.
pub fn power_kernel(n: u32, k: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let z = k / (2.0 * tau.sqrt());
    let scale = match n {
        0 => 1.0,
        1 => 2.0 * tau.sqrt(),
        2 => 4.0 * tau,
        _ => (4.0 * tau).powf(0.5 * n as f64),
    };
    scale * ierfc(n, z)
}

/// Step-temperature kernel `Erfc(rβ / (2√t))`.
pub fn t1_step(r: f64, beta: f64, t: f64) -> f64 {
    power_kernel(0, r * beta, t)
}

/// Step-flux kernel `2√(t/π) e^{-β²r²/(4t)} - rβ Erfc(rβ / (2√t))`.
pub fn t2_step(r: f64, beta: f64, t: f64) -> f64 {
    power_kernel(1, r * beta, t)
}

/// Temperature kernel of the ramp profile.
pub fn t1_ramp(r: f64, beta: f64, t: f64, a: f64, b: f64) -> Result<f64> {
    ForcingProfile::ramp(a, b)?.t1(r, beta, t)
}

/// Flux kernel of the ramp profile.
pub fn t2_ramp(r: f64, beta: f64, t: f64, a: f64, b: f64) -> Result<f64> {
    ForcingProfile::ramp(a, b)?.t2(r, beta, t)
}

/// Below this the result is treated as zero: relative agreement is not
/// meaningful among subnormal numbers.
const UNDERFLOW: f64 = 1e-290;

/// Settings for [`talbot_inverse_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotConfig {
    /// Relative agreement required between successive node doublings.
    pub tol: f64,
    /// Node count of the first pass; also fixes the contour scale.
    pub initial_nodes: usize,
    pub max_nodes: usize,
}

impl Default for TalbotConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            initial_nodes: 32,
            max_nodes: 1 << 14,
        }
    }
}

/// Inverse Laplace transform of `weight(s) · laplace_fn(s) · e^{-βr√s}` at
/// time `t`, by the fixed-Talbot rule.
pub fn talbot_inverse<F>(laplace_fn: F, r: f64, beta: f64, t: f64, weight: KernelWeight) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    talbot_inverse_with(laplace_fn, r, beta, t, weight, &TalbotConfig::default())
}

/// As [`talbot_inverse`] with explicit settings.
///
/// The contour is `s(φ) = λ φ (cot φ + i)`, `φ ∈ (-π, π)`. Its scale is
/// `λ = max(2N₀/(5t), (βr)²/(4t²))`: the usual fixed-Talbot choice, or,
/// when the `e^{-βr√s}` factor dominates, the saddle point of
/// `e^{st - βr√s}`, so the contour crosses the real axis along the steepest
/// descent direction and no cancellation occurs for tiny kernel values.
/// The contour is then held fixed and the trapezoid rule refined by
/// doubling the node count until two passes agree.
pub fn talbot_inverse_with<F>(
    laplace_fn: F,
    r: f64,
    beta: f64,
    t: f64,
    weight: KernelWeight,
    cfg: &TalbotConfig,
) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    for (name, v) in [("r", r), ("beta", beta), ("t", t)] {
        ensure_finite(name, v)?;
    }
    if t <= 0.0 {
        return Err(Error::InvalidInput(format!("Talbot inversion needs t > 0, got {t}")));
    }
    if r < 0.0 || beta < 0.0 {
        return Err(Error::InvalidInput("r and beta must be non-negative".into()));
    }
    let k = r * beta;
    let n0 = cfg.initial_nodes.max(4);
    let lambda = (2.0 * n0 as f64 / (5.0 * t)).max(k * k / (4.0 * t * t));

    // Integrand of (λ/π) ∫_0^π Re[...] dφ, and its modulus for the
    // round-off floor.
    let term = |phi: f64| -> (f64, f64) {
        let (s, ds_factor) = if phi == 0.0 {
            (Complex64::new(lambda, 0.0), Complex64::new(1.0, 0.0))
        } else {
            let cot = phi.cos() / phi.sin();
            let s = lambda * phi * Complex64::new(cot, 1.0);
            let sigma = phi + (phi * cot - 1.0) * cot;
            (s, Complex64::new(1.0, sigma))
        };
        let value = (t * s - k * s.sqrt()).exp() * weight.apply(s) * laplace_fn(s) * ds_factor;
        (value.re, value.norm())
    };

    let (c0, m0) = term(0.0);
    let mut sum = 0.5 * c0;
    let mut magnitude = 0.5 * m0;
    let mut nodes = n0;
    for j in 1..nodes {
        let (c, m) = term(j as f64 * std::f64::consts::PI / nodes as f64);
        sum += c;
        magnitude += m;
    }
    let mut estimate = lambda / nodes as f64 * sum;

    loop {
        let refined = 2 * nodes;
        for j in (1..refined).step_by(2) {
            let (c, m) = term(j as f64 * std::f64::consts::PI / refined as f64);
            sum += c;
            magnitude += m;
        }
        nodes = refined;
        let next = lambda / nodes as f64 * sum;
        let floor = 64.0 * f64::EPSILON * lambda / nodes as f64 * magnitude;
        if !next.is_finite() {
            return Err(Error::TalbotNonConvergence {
                t,
                tolerance: cfg.tol,
                previous: estimate,
                current: next,
            });
        }
        if (next - estimate).abs() <= cfg.tol * next.abs() + floor || next.abs().max(estimate.abs()) < UNDERFLOW {
            return Ok(next);
        }
        if nodes >= cfg.max_nodes {
            return Err(Error::TalbotNonConvergence {
                t,
                tolerance: cfg.tol,
                previous: estimate,
                current: next,
            });
        }
        estimate = next;
    }
}
