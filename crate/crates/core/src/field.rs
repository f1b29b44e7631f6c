//! Assembly of the temperature field from the kernel and the time kernels.
//!
//! The default assembly is
//!
//! ```text
//! T = T0/(π√2) ∫ G {T1(β) - T1(cos θ)} dβ
//!   + T0'/(π√2) ∫ G {T2(β) - T2(cos θ)} dβ
//!   + T0 T1(r, cos θ, t)
//! ```
//!
//! in which every term is continuous across `θ = 0`. The form with the
//! Heaviside jumps written out is kept for cross-checking.

use std::cell::RefCell;
use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::kernel::{breakpoints, compactify, weighted_kernel};
use crate::model::{Angle, PolarPoint, ProblemSpec};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::time_kernels::{ForcingProfile, KernelWeight, TalbotConfig};

const PREFACTOR: f64 = 1.0 / (PI * SQRT_2);

/// Numerical settings for one field evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalConfig {
    pub quadrature: QuadratureConfig,
    pub talbot: TalbotConfig,
}

impl EvalConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.quadrature.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()
    }
}

/// The three pieces of the assembled field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FieldTerms {
    /// Integral carrying the temperature data, including its prefactor.
    pub dirichlet_integral: f64,
    /// Integral carrying the flux data, including its prefactor.
    pub neumann_integral: f64,
    /// Terms evaluated without quadrature.
    pub closed_form: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldResult {
    pub value: f64,
    pub error_estimate: f64,
    pub terms: FieldTerms,
}

impl FieldResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            error_estimate: 0.0,
            terms: FieldTerms::default(),
        }
    }

    fn from_terms(terms: FieldTerms, error_estimate: f64) -> Self {
        Self {
            value: terms.dirichlet_integral + terms.neumann_integral + terms.closed_form,
            error_estimate,
            terms,
        }
    }
}

fn kernel(profile: &ForcingProfile, weight: KernelWeight, r: f64, beta: f64, t: f64, cfg: &EvalConfig) -> Result<f64> {
    match profile {
        ForcingProfile::Custom(_) => profile.kernel_via_talbot(weight, r, beta, t, &cfg.talbot),
        _ => profile.kernel(weight, r, beta, t),
    }
}

/// `u` values where the time kernel `K(r, 1 + u², t)` turns over: the
/// diffusion length `βr ~ 2√t` and a few multiples of it.
fn decay_scales(r: f64, t: f64) -> Vec<f64> {
    let beta0 = 2.0 * t.sqrt() / r;
    [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|m| m * beta0 - 1.0)
        .filter(|b| *b > 0.0)
        .map(f64::sqrt)
        .collect()
}

/// `(1/(π√2)) ∫_1^∞ G(β, θ) {K(β) - K(shift)} dβ` in the compactified
/// variable. `shift = None` drops the subtracted term.
#[allow(clippy::too_many_arguments)]
fn beta_integral(
    profile: &ForcingProfile,
    weight: KernelWeight,
    r: f64,
    angle: &Angle,
    t: f64,
    shift: Option<f64>,
    cfg: &EvalConfig,
    term: &str,
) -> Result<(f64, f64)> {
    let failure = RefCell::new(None);
    let integrand = |v: f64| -> f64 {
        if v >= 1.0 {
            return 0.0;
        }
        let (u, jac) = compactify(v);
        let beta = 1.0 + u * u;
        match kernel(profile, weight, r, beta, t, cfg) {
            Ok(k) => weighted_kernel(u, angle) * (k - shift.unwrap_or(0.0)) * jac,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let points = breakpoints(angle, &decay_scales(r, t));
    let result = integrate(integrand, &points, &cfg.quadrature, term);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let integral = result?;
    Ok((PREFACTOR * integral.value, PREFACTOR * integral.error))
}

fn check_args(r: f64, theta: f64, t: f64) -> Result<PolarPoint> {
    ensure_finite("t", t)?;
    PolarPoint::new(r, theta)
}

/// Temperature at `(r, θ, t)`, continuous assembly.
pub fn temperature(r: f64, theta: f64, t: f64, spec: &ProblemSpec, cfg: &EvalConfig) -> Result<FieldResult> {
    let point = check_args(r, theta, t)?;
    temperature_polar(&point, t, spec, cfg)
}

/// Temperature at Cartesian `(x, y, t)`.
pub fn temperature_at(x: f64, y: f64, t: f64, spec: &ProblemSpec, cfg: &EvalConfig) -> Result<FieldResult> {
    ensure_finite("t", t)?;
    let point = PolarPoint::from_cartesian(x, y)?;
    temperature_polar(&point, t, spec, cfg)
}

/// Continuous assembly at an already-built polar point.
pub fn temperature_polar(point: &PolarPoint, t: f64, spec: &ProblemSpec, cfg: &EvalConfig) -> Result<FieldResult> {
    cfg.validate()?;
    if t <= 0.0 {
        return Ok(FieldResult::zero());
    }
    let (r, angle) = (point.r, &point.angle);
    let c = angle.cos;
    let mut terms = FieldTerms::default();
    let mut error = 0.0;

    let t1_shift = kernel(&spec.f0, KernelWeight::Temperature, r, c, t, cfg)?;
    terms.closed_form = spec.t0 * t1_shift;
    // At r = 0 the time kernels no longer depend on β and both braces vanish.
    if r == 0.0 {
        return Ok(FieldResult::from_terms(terms, 0.0));
    }
    if spec.t0 != 0.0 {
        let (v, e) = beta_integral(
            &spec.f0,
            KernelWeight::Temperature,
            r,
            angle,
            t,
            Some(t1_shift),
            cfg,
            "temperature-data integral",
        )?;
        terms.dirichlet_integral = spec.t0 * v;
        error += (spec.t0 * e).abs();
    }
    if spec.t0_prime != 0.0 {
        let t2_shift = kernel(&spec.g0, KernelWeight::Flux, r, c, t, cfg)?;
        let (v, e) = beta_integral(
            &spec.g0,
            KernelWeight::Flux,
            r,
            angle,
            t,
            Some(t2_shift),
            cfg,
            "flux-data integral",
        )?;
        terms.neumann_integral = spec.t0_prime * v;
        error += (spec.t0_prime * e).abs();
    }
    Ok(FieldResult::from_terms(terms, error))
}

/// Assembly with the Heaviside terms written out:
///
/// ```text
/// T = T0/(π√2) ∫ G T1 dβ + T0'/(π√2) ∫ G T2 dβ
///   + H(θ) T0 T1(r, cos θ, t) - (1 - H(θ)) T0' T2(r, cos θ, t)
/// ```
///
/// Undefined on `θ = 0`.
pub fn temperature_discontinuous_form(
    r: f64,
    theta: f64,
    t: f64,
    spec: &ProblemSpec,
    cfg: &EvalConfig,
) -> Result<FieldResult> {
    let point = check_args(r, theta, t)?;
    if theta == 0.0 {
        return Err(Error::InvalidInput(
            "the discontinuous form is undefined at theta = 0".into(),
        ));
    }
    cfg.validate()?;
    if t <= 0.0 {
        return Ok(FieldResult::zero());
    }
    let angle = &point.angle;
    let c = angle.cos;
    let h = angle.heaviside();
    let mut terms = FieldTerms::default();
    let mut error = 0.0;
    if spec.t0 != 0.0 {
        let (v, e) = beta_integral(
            &spec.f0,
            KernelWeight::Temperature,
            r,
            angle,
            t,
            None,
            cfg,
            "temperature-data integral",
        )?;
        terms.dirichlet_integral = spec.t0 * v;
        terms.closed_form += h * spec.t0 * kernel(&spec.f0, KernelWeight::Temperature, r, c, t, cfg)?;
        error += (spec.t0 * e).abs();
    }
    if spec.t0_prime != 0.0 {
        let (v, e) = beta_integral(
            &spec.g0,
            KernelWeight::Flux,
            r,
            angle,
            t,
            None,
            cfg,
            "flux-data integral",
        )?;
        terms.neumann_integral = spec.t0_prime * v;
        terms.closed_form -= (1.0 - h) * spec.t0_prime * kernel(&spec.g0, KernelWeight::Flux, r, c, t, cfg)?;
        error += (spec.t0_prime * e).abs();
    }
    Ok(FieldResult::from_terms(terms, error))
}

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    end
                } else {
                    start + (end - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Field on a rectangular grid, stored row-major with rows along `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldGrid {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `values[j * x.len() + i]` is the temperature at `(x[i], y[j])`; NaN
    /// for flagged cells.
    pub values: Vec<f64>,
    pub error_estimates: Vec<f64>,
    /// Cells whose evaluation failed: `(flat index, message)`.
    pub flagged: Vec<(usize, String)>,
}

impl FieldGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.x.len() + i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.x.len())
    }
}

/// Evaluate on an `nx × ny` grid. Failures are flagged per cell rather than
/// aborting; the result does not depend on the number of worker threads.
pub fn evaluate_grid(
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
    t: f64,
    spec: &ProblemSpec,
    cfg: &EvalConfig,
) -> Result<FieldGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 2 x 2 points, got {nx} x {ny}"
        )));
    }
    for v in [x_range.0, x_range.1, y_range.0, y_range.1, t] {
        ensure_finite("grid bound", v)?;
    }
    if x_range.0 < 0.0 || x_range.1 < 0.0 {
        return Err(Error::InvalidInput("x range must lie in x >= 0".into()));
    }
    cfg.validate()?;
    let xs = linspace(x_range.0, x_range.1, nx);
    let ys = linspace(y_range.0, y_range.1, ny);
    let results: Vec<Result<FieldResult>> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| temperature_at(xs[idx % nx], ys[idx / nx], t, spec, cfg))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut error_estimates = Vec::with_capacity(results.len());
    let mut flagged = Vec::new();
    for (idx, res) in results.into_iter().enumerate() {
        match res {
            Ok(f) => {
                values.push(f.value);
                error_estimates.push(f.error_estimate);
            }
            Err(e) => {
                values.push(f64::NAN);
                error_estimates.push(f64::NAN);
                flagged.push((idx, e.to_string()));
            }
        }
    }
    Ok(FieldGrid {
        t,
        x: xs,
        y: ys,
        values,
        error_estimates,
        flagged,
    })
}

/// Temperatures along the line `x = x_fixed`.
pub fn evaluate_slice(
    x_fixed: f64,
    y_points: &[f64],
    t: f64,
    spec: &ProblemSpec,
    cfg: &EvalConfig,
) -> Vec<Result<FieldResult>> {
    y_points
        .par_iter()
        .map(|&y| temperature_at(x_fixed, y, t, spec, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time_kernels::t1_step;
    use std::f64::consts::FRAC_PI_2;

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    #[test]
    fn dirichlet_surface_is_exact() {
        let spec = ProblemSpec::step(1.3, 0.7);
        for (r, t) in [(0.05, 0.02), (0.5, 1e-3), (2.0, 3.0)] {
            let f = temperature(r, FRAC_PI_2, t, &spec, &cfg()).unwrap();
            assert_eq!(f.value, 1.3);
        }
    }

    #[test]
    fn zero_before_start() {
        let spec = ProblemSpec::step(1.0, 1.0);
        assert_eq!(temperature(0.1, 0.2, 0.0, &spec, &cfg()).unwrap().value, 0.0);
        assert_eq!(temperature(0.1, 0.2, -1.0, &spec, &cfg()).unwrap().value, 0.0);
        assert!(temperature(0.1, -0.2, 1e-12, &spec, &cfg()).unwrap().value.abs() < 1e-9);
    }

    #[test]
    fn junction_value_is_the_boundary_level() {
        let spec = ProblemSpec::step_insulator(2.0);
        assert_eq!(temperature_at(0.0, 0.0, 0.1, &spec, &cfg()).unwrap().value, 2.0);
    }

    #[test]
    fn neumann_surface_insulated_reduces_to_one_integral() {
        let spec = ProblemSpec::step_insulator(1.0);
        let (r, t) = (0.05, 0.02);
        let full = temperature_discontinuous_form(r, -FRAC_PI_2, t, &spec, &cfg()).unwrap();
        let direct = integrate(
            |v| {
                let (u, jac) = compactify(v);
                let beta = 1.0 + u * u;
                // 2u G with G = √2 / (β √(β-1))
                2.0 * SQRT_2 / beta * t1_step(r, beta, t) * jac
            },
            &[0.0, 0.5, 0.9, 1.0],
            &QuadratureConfig::default().with_abs_tol(1e-13),
            "direct",
        )
        .unwrap();
        assert!((full.value - PREFACTOR * direct.value).abs() < 1e-9);
    }

    #[test]
    fn forms_agree_off_axis() {
        let spec = ProblemSpec::step_insulator(1.0);
        for th in [-0.3, 0.3] {
            let a = temperature(0.05, th, 0.02, &spec, &cfg()).unwrap().value;
            let b = temperature_discontinuous_form(0.05, th, 0.02, &spec, &cfg())
                .unwrap()
                .value;
            assert!((a - b).abs() < 1e-7, "{th}: {a} vs {b}");
        }
        assert!(temperature_discontinuous_form(0.05, 0.0, 0.02, &spec, &cfg()).is_err());
    }

    #[test]
    fn continuity_across_the_axis() {
        let spec = ProblemSpec::step(1.0, 1.0);
        let up = temperature(0.1, 1e-6, 0.02, &spec, &cfg()).unwrap().value;
        let down = temperature(0.1, -1e-6, 0.02, &spec, &cfg()).unwrap().value;
        assert!((up - down).abs() < 1e-6);
    }

    #[test]
    fn grid_is_deterministic_and_flags_nothing() {
        let spec = ProblemSpec::step_insulator(1.0);
        let g1 = evaluate_grid((0.0, 0.2), (-0.2, 0.2), 3, 4, 0.02, &spec, &cfg()).unwrap();
        let g2 = evaluate_grid((0.0, 0.2), (-0.2, 0.2), 3, 4, 0.02, &spec, &cfg()).unwrap();
        assert_eq!(g1, g2);
        assert!(g1.flagged.is_empty());
        assert_eq!(g1.rows().count(), 4);
        assert!(evaluate_grid((0.0, 0.2), (-0.2, 0.2), 1, 4, 0.02, &spec, &cfg()).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0, 1.0, 41);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[40], 1.0);
        assert!((v[20]).abs() < 1e-15);
    }
}
