//! Error-function family used by the diffusion kernels.
//!
//! `erfc` itself is the FreeBSD/musl implementation (via `libm`), which is
//! accurate to about one ulp over the normal range. The repeated integrals
//! `i^n erfc` are built on top of it: forward recurrence where it is stable
//! enough, and a backward (minimal-solution) continued fraction elsewhere.

use std::f64::consts::PI;

/// Switch point between forward recurrence and the continued fraction.
const RECURRENCE_SWITCH: f64 = 2.0;

/// Complementary error function. Underflows to zero above x ~ 27.3.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Repeated integral of the complementary error function,
///
/// `i^n erfc(z) = ∫_z^∞ i^{n-1} erfc(s) ds`, with `i^0 erfc = erfc`.
///
/// These are the building blocks of every closed-form time kernel: the
/// inverse Laplace transform of `exp(-k sqrt(s)) / s^(1 + n/2)` is
/// `(4t)^(n/2) i^n erfc(k / (2 sqrt(t)))`.
pub fn ierfc(n: u32, z: f64) -> f64 {
    if n == 0 {
        return erfc(z);
    }
    if z.is_nan() {
        return f64::NAN;
    }
    if z < RECURRENCE_SWITCH {
        forward_recurrence(n, z)
    } else {
        backward_ratios(n, z)
    }
}

/// `i^n erfc(z) = (i^{n-2} erfc(z) - 2 z i^{n-1} erfc(z)) / (2n)`, seeded with
/// `i^{-1} erfc(z) = 2 exp(-z^2) / sqrt(pi)`.
fn forward_recurrence(n: u32, z: f64) -> f64 {
    let mut prev = 2.0 / PI.sqrt() * (-z * z).exp();
    let mut cur = erfc(z);
    for k in 1..=n {
        let next = (prev - 2.0 * z * cur) / (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    cur
}

/// Ratios `rho_k = i^k erfc / i^{k-1} erfc` satisfy
/// `rho_k = 1 / (2z + 2(k+1) rho_{k+1})`; the deepest one is obtained from
/// its continued fraction by modified Lentz, the rest by stable backward
/// substitution.
fn backward_ratios(n: u32, z: f64) -> f64 {
    let base = erfc(z);
    if base == 0.0 {
        return 0.0;
    }
    let mut rho = ratio_continued_fraction(n, z);
    let mut product = rho;
    for k in (1..n).rev() {
        rho = 1.0 / (2.0 * z + 2.0 * (k + 1) as f64 * rho);
        product *= rho;
    }
    base * product
}

fn ratio_continued_fraction(n: u32, z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let b = 2.0 * z;
    // rho_n = 1 / (b + a_2 / (b + a_3 / (b + ...))), a_j = 2(n + j - 1)
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..=500u32 {
        let a = if j == 1 { 1.0 } else { 2.0 * (n + j - 1) as f64 };
        d = b + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}
