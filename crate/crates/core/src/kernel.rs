//! The Cagniard–de Hoop kernel.
//!
//! With `β r = (α² + 1)^{1/2} x + i α y`, the Fourier inversion contour is
//! deformed onto the two paths
//!
//! ```text
//! α±(β, θ) = -i β sin θ ± sqrt(β² - 1) cos θ,      β ∈ [1, ∞)
//! ```
//!
//! and the temperature becomes a single β-integral weighted by the real
//! kernel `G(β, θ)`. `G` is evaluated here in closed form; the complex
//! function `F(β, θ)` it was reduced from is kept as an independent
//! evaluation path, related by `G = (i c / √2) F` with `c = e^{-iπ/4}`.
//!
//! `G` has an integrable `(β - 1)^{-1/2}` singularity at the start of the
//! path and decays like `β^{-3/2}`. All integrals therefore use
//! `β = 1 + u²` (which cancels the singularity) followed by the
//! compactification `u = v / (1 - v)`, which maps the infinite tail onto a
//! bounded, smooth integrand on `v ∈ [0, 1]`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Angle;
use crate::quadrature::{integrate, Integral, QuadratureConfig};

/// Smallest `|θ|` at which the contour identity is evaluated; the identity
/// jumps from 1 to 0 across `θ = 0`.
pub const IDENTITY_THETA_MIN: f64 = 1e-3;

/// `β - 1` below which pointwise evaluation of `G` is refused.
const BRANCH_POINT_GUARD: f64 = 1e-300;

/// A point on the deformed contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    pub beta: f64,
    pub theta: f64,
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    /// `|α± - i| = |β + sin θ|`.
    pub modulus: f64,
    /// Principal argument of `α+ - i`, in `[-π/2, π/2]`. The matching angle
    /// for the other path is `ψ- = -π - ψ+`.
    pub psi_plus: f64,
}

/// Which part of `G` dominates at a given point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    /// The `β (cos + sin)(ψ+/2)` part dominates; far along the path this is
    /// the `O(β^{-3/2})` tail.
    Regular,
    /// The `(β² - 1)^{-1/2}` part dominates: close to the branch point.
    IntegrableSingular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub g: f64,
    pub decay_class: DecayClass,
}

fn check_theta(theta: f64) -> Result<Angle> {
    Angle::new(theta)
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 1.0 {
        return Err(Error::InvalidInput(format!(
            "beta must be a finite value >= 1, got {beta}"
        )));
    }
    Ok(())
}

/// The two contour paths `α±(β, θ)`.
pub fn alpha_paths(beta: f64, theta: f64) -> Result<(Complex64, Complex64)> {
    check_beta(beta)?;
    let angle = check_theta(theta)?;
    let im = -beta * angle.sin;
    let re = sqrt_beta2_minus_1(beta) * angle.cos;
    Ok((Complex64::new(re, im), Complex64::new(-re, im)))
}

/// `sqrt(β² - 1)` via `u = sqrt(β - 1)`, exact near the branch point.
fn sqrt_beta2_minus_1(beta: f64) -> f64 {
    let u2 = beta - 1.0;
    (u2 * (2.0 + u2)).sqrt()
}

/// Principal argument of `α+ - i = sqrt(β² - 1) cos θ - i (β sin θ + 1)`.
pub fn psi_plus(beta: f64, theta: f64) -> Result<f64> {
    check_beta(beta)?;
    let angle = check_theta(theta)?;
    let u2 = beta - 1.0;
    let im = -(angle.one_plus_sin + u2 * angle.sin);
    Ok(im.atan2(sqrt_beta2_minus_1(beta) * angle.cos))
}

pub fn contour_point(beta: f64, theta: f64) -> Result<ContourPoint> {
    let (alpha_plus, alpha_minus) = alpha_paths(beta, theta)?;
    let angle = Angle::new(theta)?;
    Ok(ContourPoint {
        beta,
        theta,
        alpha_plus,
        alpha_minus,
        modulus: (beta - 1.0) + angle.one_plus_sin,
        psi_plus: psi_plus(beta, theta)?,
    })
}

/// Pieces of `G` evaluated at `β = 1 + u²`:
/// `G = (β p - cos θ sin θ q / sqrt(β²-1)) / ((β² - cos²θ) sqrt(R))`,
/// with `p = cos(ψ+/2) + sin(ψ+/2)`, `q = cos(ψ+/2) - sin(ψ+/2)`.
///
/// `p² = 1 + sin ψ+` and `q² = 1 - sin ψ+`, so both follow from
/// `α+ - i = X + iY` without any trigonometry; whichever of `R ± Y` would
/// cancel is rewritten as `X² / (R ∓ Y)`.
struct KernelParts {
    beta: f64,
    /// `sqrt(β² - 1) / u = sqrt(2 + u²)`.
    s_over_u: f64,
    p: f64,
    q: f64,
    /// `(β² - cos²θ) sqrt(R)`.
    denom: f64,
}

#[inline]
fn kernel_parts(u: f64, angle: &Angle) -> KernelParts {
    let u2 = u * u;
    let beta = 1.0 + u2;
    let s_over_u = (2.0 + u2).sqrt();
    let s = u * s_over_u;
    let x = s * angle.cos;
    let y = -(angle.one_plus_sin + u2 * angle.sin);
    let r = u2 + angle.one_plus_sin;
    let (p, q) = if y >= 0.0 {
        ((r + y) / r, x * x / (r * (r + y)))
    } else {
        (x * x / (r * (r - y)), (r - y) / r)
    };
    KernelParts {
        beta,
        s_over_u,
        p: p.sqrt(),
        q: q.sqrt(),
        denom: (s * s + angle.sin * angle.sin) * r.sqrt(),
    }
}

/// `2u G(1 + u², θ)`: the kernel with the Jacobian of `β = 1 + u²` folded
/// in. Finite for every `u >= 0` except `u = 0, θ → 0`.
#[inline]
pub fn weighted_kernel(u: f64, angle: &Angle) -> f64 {
    if u == 0.0 {
        return weighted_kernel_at_branch_point(angle);
    }
    let k = kernel_parts(u, angle);
    let num = 2.0 * u * k.beta * k.p - 2.0 * angle.cos * angle.sin * k.q / k.s_over_u;
    num / k.denom
}

fn weighted_kernel_at_branch_point(angle: &Angle) -> f64 {
    if angle.sin == 0.0 {
        1.0
    } else if angle.one_plus_sin == 0.0 {
        2.0 * SQRT_2
    } else {
        -2.0 * angle.cos / (angle.sin * angle.one_plus_sin.sqrt())
    }
}

/// The real kernel `G(β, θ)`, for `β > 1`.
pub fn kernel_g(beta: f64, theta: f64) -> Result<f64> {
    Ok(kernel_value(beta, theta)?.g)
}

pub fn kernel_value(beta: f64, theta: f64) -> Result<KernelValue> {
    check_beta(beta)?;
    if beta - 1.0 < BRANCH_POINT_GUARD {
        return Err(Error::NearBranchPoint { beta });
    }
    let angle = check_theta(theta)?;
    let u = (beta - 1.0).sqrt();
    let k = kernel_parts(u, &angle);
    let regular = k.beta * k.p;
    let singular = angle.cos * angle.sin * k.q / (u * k.s_over_u);
    let decay_class = if singular.abs() > regular.abs() {
        DecayClass::IntegrableSingular
    } else {
        DecayClass::Regular
    };
    Ok(KernelValue {
        g: (regular - singular) / k.denom,
        decay_class,
    })
}

/// `F(β, θ)` straight from its definition in terms of `α±`, using the
/// branch `(α - i)^{1/2} = sqrt(R) e^{iψ/2}` with `ψ- = -π - ψ+`.
///
/// This is deliberately naive complex arithmetic: it is the independent
/// check on [`kernel_g`].
pub fn kernel_f_oracle(beta: f64, theta: f64) -> Result<Complex64> {
    check_beta(beta)?;
    if beta - 1.0 < BRANCH_POINT_GUARD {
        return Err(Error::NearBranchPoint { beta });
    }
    let (ap, am) = alpha_paths(beta, theta)?;
    let i = Complex64::i();
    let zp = ap - i;
    let zm = am - i;
    let psi_p = zp.im.atan2(zp.re);
    let psi_m = -PI - psi_p;
    let sqrt_p = Complex64::from_polar(zp.norm().sqrt(), psi_p / 2.0);
    let sqrt_m = Complex64::from_polar(zm.norm().sqrt(), psi_m / 2.0);
    let a = 1.0 / (ap * sqrt_p);
    let b = 1.0 / (am * sqrt_m);
    let (sin, cos) = theta.sin_cos();
    let slope = beta / (beta * beta - 1.0).sqrt();
    Ok(-i * sin * (a - b) + slope * cos * (a + b))
}

/// `i c / √2` with `c = e^{-iπ/4}`: maps `F` onto the real kernel `G`.
pub fn f_to_g_factor() -> Complex64 {
    Complex64::i() * Complex64::from_polar(1.0, -PI / 4.0) / SQRT_2
}

/// Map `v ∈ [0, 1)` to `u = v / (1 - v)`, returning `(u, du/dv)`.
#[inline]
pub(crate) fn compactify(v: f64) -> (f64, f64) {
    let w = 1.0 - v;
    (v / w, 1.0 / (w * w))
}

/// Initial panel boundaries in `v` for a β-integral at angle `angle`.
/// `extra_u` lists additional scales (in `u`) where the integrand changes
/// character, e.g. where a time kernel starts to decay.
pub(crate) fn breakpoints(angle: &Angle, extra_u: &[f64]) -> Vec<f64> {
    let mut us = vec![1.0, angle.one_plus_sin.sqrt()];
    let s = angle.sin.abs();
    us.extend([0.25 * s, s, 4.0 * s]);
    us.extend_from_slice(extra_u);
    let mut vs: Vec<f64> = us
        .into_iter()
        .filter(|u| u.is_finite() && *u > 1e-12 && *u < 1e12)
        .map(|u| u / (1.0 + u))
        .collect();
    vs.push(0.0);
    vs.push(1.0);
    vs.sort_by(f64::total_cmp);
    vs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    vs
}

/// Outcome of the contour identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResult {
    pub theta: f64,
    /// `(1/(π√2)) ∫_1^∞ G(β, θ) dβ`.
    pub value: f64,
    /// `1 - H(θ)`.
    pub expected: f64,
    pub error_estimate: f64,
}

impl IdentityResult {
    pub fn residual(&self) -> f64 {
        (self.value - self.expected).abs()
    }
}

/// Evaluate `(1/(π√2)) ∫_1^∞ G(β, θ) dβ`, which must equal `1 - H(θ)`.
pub fn identity_integral(theta: f64, cfg: &QuadratureConfig) -> Result<IdentityResult> {
    let angle = check_theta(theta)?;
    if theta.abs() < IDENTITY_THETA_MIN {
        return Err(Error::InvalidInput(format!(
            "identity is only evaluated for |theta| >= {IDENTITY_THETA_MIN}, got {theta}"
        )));
    }
    cfg.validate()?;
    let Integral { value, error, .. } = integrate(
        |v| {
            let (u, jac) = compactify(v);
            weighted_kernel(u, &angle) * jac
        },
        &breakpoints(&angle, &[]),
        cfg,
        &format!("contour identity at theta = {theta}"),
    )?;
    let scale = 1.0 / (PI * SQRT_2);
    Ok(IdentityResult {
        theta,
        value: value * scale,
        expected: 1.0 - angle.heaviside(),
        error_estimate: error * scale,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn paths_start_at_minus_i_sin_theta() {
        for th in [-1.2, -0.3, 0.0, 0.4, 1.5] {
            let (p, m) = alpha_paths(1.0, th).unwrap();
            let start = Complex64::new(0.0, -th.sin());
            assert!(close(p, start, 1e-15) && close(m, start, 1e-15));
        }
    }

    #[test]
    fn path_examples() {
        let (p, m) = alpha_paths(2.0, 0.0).unwrap();
        assert!(close(p, Complex64::new(3f64.sqrt(), 0.0), 1e-15));
        assert!(close(m, Complex64::new(-(3f64.sqrt()), 0.0), 1e-15));
        let (p, m) = alpha_paths(2.0, -FRAC_PI_2).unwrap();
        assert_eq!(p, Complex64::new(0.0, 2.0));
        assert_eq!(m, Complex64::new(0.0, 2.0));
        assert!(alpha_paths(0.5, 0.0).is_err());
    }

    #[test]
    fn paths_satisfy_the_defining_relation() {
        for (beta, th) in [(1.5, -0.7), (3.0, 0.2), (10.0, 1.1)] {
            let (p, _) = alpha_paths(beta, th).unwrap();
            let back = (p * p + 1.0).sqrt() * th.cos() + Complex64::i() * p * th.sin();
            assert!(close(back, Complex64::new(beta, 0.0), 1e-12), "{back}");
        }
    }

    #[test]
    fn psi_plus_examples() {
        assert!((psi_plus(1.0 + 1e-14, 0.0).unwrap() + FRAC_PI_2).abs() < 1e-6);
        assert_eq!(psi_plus(2.0, -FRAC_PI_2).unwrap(), FRAC_PI_2);
        assert_eq!(psi_plus(2.0, FRAC_PI_2).unwrap(), -FRAC_PI_2);
        let cp = contour_point(3.0, -0.4).unwrap();
        assert!(((cp.alpha_plus - Complex64::i()).norm() - cp.modulus).abs() < 1e-13);
        assert!((cp.alpha_plus - Complex64::i()).arg() - cp.psi_plus < 1e-15);
    }

    #[test]
    fn kernel_vanishes_on_the_dirichlet_surface() {
        for beta in [1.001, 2.0, 50.0] {
            assert_eq!(kernel_g(beta, FRAC_PI_2).unwrap(), 0.0);
        }
    }

    #[test]
    fn kernel_closed_form_on_the_neumann_surface() {
        for beta in [1.01, 1.5, 2.0, 7.0, 1e4] {
            let g = kernel_g(beta, -FRAC_PI_2).unwrap();
            let want = SQRT_2 / (beta * (beta - 1.0).sqrt());
            assert!((g - want).abs() <= 1e-14 * want, "{beta}: {g} vs {want}");
            let via_f = (f_to_g_factor() * kernel_f_oracle(beta, -FRAC_PI_2).unwrap()).re;
            assert!((via_f - want).abs() <= 1e-13 * want);
        }
    }

    // mpmath evaluation of (i c/√2) F at 30 digits.
    #[test]
    fn kernel_matches_high_precision_values() {
        let cases = [
            (2.0, -std::f64::consts::FRAC_PI_4, 0.637_269_284_967_903_795_42),
            (3.0, 0.7, 0.067_953_553_905_639_212_329),
            (2.0, 0.0, 1.0 / 3.0),
            (1.5, -1.2, 1.328_645_133_470_250_405_3),
            (10.0, 0.3, 0.024_577_499_807_491_098_38),
        ];
        for (beta, th, want) in cases {
            let g = kernel_g(beta, th).unwrap();
            assert!(
                (g - want).abs() <= 1e-14 * want.abs(),
                "G({beta},{th}) = {g}, want {want}"
            );
        }
    }

    #[test]
    fn kernel_refuses_the_branch_point() {
        assert!(matches!(kernel_g(1.0, 0.3), Err(Error::NearBranchPoint { .. })));
        assert!(kernel_g(0.9, 0.3).is_err());
    }

    #[test]
    fn weighted_kernel_is_continuous_at_the_branch_point() {
        for th in [-FRAC_PI_2, -1.0, -0.2, 0.0, 0.3, 1.4] {
            let angle = Angle::new(th).unwrap();
            let at0 = weighted_kernel(0.0, &angle);
            let near = weighted_kernel(1e-9, &angle);
            assert!((at0 - near).abs() <= 1e-6 * at0.abs().max(1.0), "{th}: {at0} vs {near}");
        }
    }

    #[test]
    fn decay_classification() {
        assert_eq!(kernel_value(100.0, 0.5).unwrap().decay_class, DecayClass::Regular);
        assert_eq!(
            kernel_value(1.0 + 1e-8, 0.5).unwrap().decay_class,
            DecayClass::IntegrableSingular
        );
    }

    #[test]
    fn identity_on_the_surfaces() {
        let cfg = QuadratureConfig::default().with_abs_tol(1e-12).with_rel_tol(1e-12);
        let down = identity_integral(-FRAC_PI_2, &cfg).unwrap();
        assert!(down.residual() < 1e-10, "{down:?}");
        let up = identity_integral(FRAC_PI_2, &cfg).unwrap();
        assert_eq!(up.value, 0.0);
        assert!(identity_integral(1e-4, &cfg).is_err());
    }
}
