//! Globally adaptive 21-point Gauss-Kronrod quadrature for complex-valued
//! integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_762_507_761_900,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_subdivisions: usize) -> Self {
        Self {
            abs,
            rel,
            max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
    /// Part of `error` that is only the roundoff floor.
    floor: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel with the embedded 10-point Gauss estimate.
///
/// The error estimate follows the QUADPACK rescaling of `|K21 - G10|`,
/// floored at a multiple of the roundoff level.
fn gk21<F>(f: &F, lo: f64, hi: f64) -> Segment
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = fc.norm() * WGK[10];
    let mut values = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).norm() * WGK[10];
    for j in 0..10 {
        let (f1, f2) = values[j];
        asc += ((f1 - mean).norm() + (f2 - mean).norm()) * WGK[j];
    }

    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let mut floor = 0.0;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor = 50.0 * f64::EPSILON * res_abs;
        error = error.max(floor);
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        error = f64::INFINITY;
    }
    Segment {
        lo,
        hi,
        value,
        error,
        floor,
    }
}

/// Integrates `f` over `[lo, hi]`, bisecting the panel with the largest error
/// estimate until the total error drops below `max(abs, rel * |I|)`. The
/// roundoff floor of each panel does not count against the tolerance but is
/// included in the reported error.
///
/// Returns [`Error::Accuracy`] if the subdivision budget runs out first.
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    if lo == hi {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }
    let first = gk21(&f, lo, hi);
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_error = first.error;
    let mut total_floor = first.floor;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let requested = tol.abs.max(tol.rel * total.norm());
        if total_error - total_floor <= requested {
            break;
        }
        if heap.len() >= tol.max_subdivisions {
            return Err(Error::Accuracy {
                achieved: total_error,
                requested,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo.min(worst.hi) || mid >= worst.lo.max(worst.hi) {
            // Panel no longer representable; nothing more to gain.
            return Err(Error::Accuracy {
                achieved: total_error,
                requested,
            });
        }
        let left = gk21(&f, worst.lo, mid);
        let right = gk21(&f, mid, worst.hi);
        evaluations += 42;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        total_floor += left.floor + right.floor - worst.floor;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running updates.
    let intervals = heap.len();
    let (value, error) = heap
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Integral {
        value,
        error,
        evaluations,
        intervals,
    })
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate(|x| Complex64::new(f(x), 0.0), lo, hi, tol)?;
    Ok((r.value.re, r.error))
}

/// Composite trapezoidal rule on a uniform periodic grid of `n` points over
/// `[0, 2 pi)`. Spectrally accurate for smooth periodic integrands.
pub fn periodic_trapezoid<F>(f: F, n: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<Complex64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerance {
        Tolerance::new(1e-14, 1e-13, 500)
    }

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| Complex64::new(x.powi(7) - 3.0 * x * x, x), -1.0, 2.0, tol()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((r.value.re - exact).abs() < 1e-13);
        assert!((r.value.im - 1.5).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_and_reversed() {
        let r = integrate(|x| Complex64::new(0.0, 40.0 * x).exp(), 0.0, 3.0, tol()).unwrap();
        let exact = (Complex64::new(0.0, 120.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((r.value - exact).norm() < 1e-13);
        let back = integrate(|x| Complex64::new(x.cos(), 0.0), PI, 0.0, tol()).unwrap();
        assert!(back.value.norm() < 1e-14);
        let back = integrate(|x| Complex64::new(x.sin(), 0.0), PI, 0.0, tol()).unwrap();
        assert!((back.value.re + 2.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_inverse_sqrt_resolved_by_bisection() {
        let (v, _) = integrate_real(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-10, 1e-10, 2000)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_an_accuracy_error() {
        let err = integrate(|x| Complex64::new((1.0 / x).sin() / x, 0.0), 1e-6, 1.0, Tolerance::new(1e-15, 1e-15, 4))
            .unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }

    #[test]
    fn trapezoid_is_spectral_for_periodic() {
        let v = periodic_trapezoid(|t| Complex64::new(1.0 / (2.0 + t.cos()), 0.0), 64);
        assert!((v.re - 2.0 * PI / 3f64.sqrt()).abs() < 1e-14);
    }
}
