//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature on a finite interval.
//!
//! The solver integrates over a compactified variable, so every integral it
//! needs is proper and finite; no extrapolation tricks are required, only
//! robust bisection of the panel with the worst error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances and work limits for the β-integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-2).contains(&self.rel_tol) {
            return Err(Error::InvalidInput(format!(
                "rel_tol must lie in [1e-14, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_panels == 0 {
            return Err(Error::InvalidInput("max_panels must be positive".into()));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value and error estimate of a finished integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the subdivision order
    // never depends on anything but the integrand.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// QUADPACK-style error rescaling: trusts the Kronrod–Gauss difference less
/// when it is large relative to the integrand's variation.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// One G10/K21 panel. Returns `(kronrod, error)` or the abscissa at which the
/// integrand stopped being finite.
fn gk21<F>(f: &mut F, a: f64, b: f64) -> std::result::Result<(f64, f64), f64>
where
    F: FnMut(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let fc = f(center);
    if !fc.is_finite() {
        return Err(center);
    }
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        if !f1.is_finite() {
            return Err(center - x);
        }
        if !f2.is_finite() {
            return Err(center + x);
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_k - res_g) * half;
    let abs_half = half.abs();
    Ok((res_k * half, rescale_error(err, res_abs * abs_half, res_asc * abs_half)))
}

/// Integrate `f` over `[points[0], points[last]]`, with the interior points
/// used as initial panel boundaries.
///
/// `term` names the integral in error messages.
pub fn integrate<F>(mut f: F, points: &[f64], cfg: &QuadratureConfig, term: &str) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    if points.len() < 2 {
        return Err(Error::InvalidInput("integration needs at least two points".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let eval_panel = |f: &mut F, a: f64, b: f64, evaluations: &mut usize| -> Result<Panel> {
        *evaluations += 21;
        match gk21(f, a, b) {
            Ok((value, error)) => Ok(Panel { a, b, value, error }),
            Err(at) => Err(Error::NonFiniteIntegrand {
                term: term.to_string(),
                at,
            }),
        }
    };

    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(eval_panel(&mut f, w[0], w[1], &mut evaluations)?);
        }
    }

    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let tolerance = cfg.target(value);
        if error <= tolerance {
            return Ok(Integral {
                value,
                error,
                panels: heap.len(),
                evaluations,
            });
        }
        if heap.len() >= cfg.max_panels {
            return Err(Error::QuadratureNonConvergence {
                term: term.to_string(),
                estimate: error,
                tolerance,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split any further in floating point.
            return Err(Error::QuadratureNonConvergence {
                term: term.to_string(),
                estimate: error,
                tolerance,
                panels: heap.len() + 1,
            });
        }
        heap.push(eval_panel(&mut f, worst.a, mid, &mut evaluations)?);
        heap.push(eval_panel(&mut f, mid, worst.b, &mut evaluations)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_panel_is_exact_for_polynomials_up_to_degree_31() {
        for k in 0..=31 {
            let mut f = |x: f64| x.powi(k);
            let (value, _) = gk21(&mut f, 0.0, 1.0).unwrap();
            let want = 1.0 / (k as f64 + 1.0);
            assert!((value - want).abs() < 1e-15, "x^{k}: {value} vs {want}");
        }
    }

    #[test]
    fn embedded_gauss_rule_is_exact_to_degree_19() {
        // Error estimate vanishes when both rules are exact.
        let mut f = |x: f64| x.powi(19) - 3.0 * x.powi(7);
        let (value, err) = gk21(&mut f, -1.0, 2.0).unwrap();
        assert!(err < 1e-13 * value.abs(), "{err}");
    }

    #[test]
    fn adaptive_handles_sharp_peak() {
        let eps: f64 = 1e-4;
        let f = |x: f64| eps / (x * x + eps * eps);
        let got = integrate(f, &[0.0, 1.0], &QuadratureConfig::default().with_abs_tol(1e-12), "peak").unwrap();
        let want = (1.0 / eps).atan();
        assert!((got.value - want).abs() < 1e-9, "{} vs {want}", got.value);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(
            |x| if x > 0.5 { f64::NAN } else { x },
            &[0.0, 1.0],
            &QuadratureConfig::default(),
            "nan",
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = QuadratureConfig {
            max_panels: 3,
            ..QuadratureConfig::default().with_abs_tol(1e-14).with_rel_tol(1e-14)
        };
        let err = integrate(|x: f64| (1.0 / (x + 1e-9)).sin(), &[0.0, 1.0], &cfg, "osc").unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        assert!(QuadratureConfig::default().with_rel_tol(1e-15).validate().is_err());
        assert!(QuadratureConfig::default().with_rel_tol(0.1).validate().is_err());
        assert!(QuadratureConfig::default().with_abs_tol(0.0).validate().is_err());
    }
}
