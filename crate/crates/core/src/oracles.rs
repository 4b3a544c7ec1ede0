//! Independent numerical ground truth.
//!
//! Nothing here calls the closed forms of [`crate::eigen`]: the oracles see
//! only `coeff_c1`, `coeff_c2` and generic quadrature, root finding and ODE
//! integration.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::QuadratureConfig;
use crate::model::{coeff_c1, coeff_c2};
use crate::quadrature::{integrate, integrate_real, periodic_trapezoid, Tolerance};
use crate::roots::bisect;

/// Outcome of comparing a computed quantity with its oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub grid: String,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl OracleReport {
    /// Pass iff `max_rel_err < tolerance`.
    pub fn relative(
        name: impl Into<String>,
        max_abs_err: f64,
        max_rel_err: f64,
        tolerance: f64,
        grid: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            max_abs_err,
            max_rel_err,
            grid: grid.into(),
            tolerance,
            passed: max_rel_err < tolerance,
            detail: String::new(),
        }
    }

    /// A report whose verdict is decided by the caller.
    pub fn verdict(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            max_abs_err: f64::NAN,
            max_rel_err: f64::NAN,
            grid: String::new(),
            tolerance: f64::NAN,
            passed,
            detail: detail.into(),
        }
    }

    pub fn failure(name: impl Into<String>, error: &Error) -> Self {
        Self::verdict(name, false, format!("error: {error}"))
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.passed { "PASS" } else { "FAIL" }, self.name)?;
        if !self.max_rel_err.is_nan() {
            write!(
                f,
                " max_abs={:.3e} max_rel={:.3e} tol={:.1e}",
                self.max_abs_err, self.max_rel_err, self.tolerance
            )?;
        }
        if !self.grid.is_empty() {
            write!(f, " grid=[{}]", self.grid)?;
        }
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

/// Accumulates absolute and relative errors.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorStats {
    pub max_abs: f64,
    pub max_rel: f64,
    pub count: usize,
}

impl ErrorStats {
    pub fn push(&mut self, got: f64, want: f64, floor: f64) {
        let abs = (got - want).abs();
        self.push_abs(abs, want.abs().max(floor));
    }

    pub fn push_complex(&mut self, got: Complex64, want: Complex64, floor: f64) {
        self.push_abs((got - want).norm(), want.norm().max(floor));
    }

    pub fn push_abs(&mut self, abs: f64, scale: f64) {
        let rel = abs / scale;
        self.max_abs = if abs.is_nan() { f64::NAN } else { self.max_abs.max(abs) };
        self.max_rel = if rel.is_nan() { f64::NAN } else { self.max_rel.max(rel) };
        self.count += 1;
    }

    pub fn report(&self, name: &str, tolerance: f64, grid: impl Into<String>) -> OracleReport {
        let rel = if self.max_rel.is_nan() { f64::INFINITY } else { self.max_rel };
        OracleReport::relative(name, self.max_abs, rel, tolerance, grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    /// `integral 1 / (C0 C1)`.
    I,
    /// `integral -C2 / C1`.
    R,
}

fn tolerance(quad: &QuadratureConfig) -> Tolerance {
    Tolerance::new(quad.abs_tol, quad.rel_tol, quad.max_subdivisions)
}

/// `theta0^(1)` by bisection of `C1` on `(pi/2, pi)`.
pub fn singular_angle_by_bisection(a: f64) -> Result<f64> {
    bisect(|t| coeff_c1(t, a), PI / 2.0, PI, 200)
}

fn check_path(a: f64, from: f64, to: f64) -> Result<()> {
    let t0 = singular_angle_by_bisection(a)?;
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    for pole in [t0, TAU - t0] {
        if lo <= pole && pole <= hi {
            return Err(Error::PathCrossesPole { from, to, pole });
        }
    }
    Ok(())
}

/// Quadrature of the separated eigen-ODE integrand from `from` to `to`.
pub fn numeric_primitive_between(
    from: f64,
    to: f64,
    a: f64,
    c0: f64,
    kind: PrimitiveKind,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_path(a, from, to)?;
    let f = |t: f64| match kind {
        PrimitiveKind::I => 1.0 / (c0 * coeff_c1(t, a)),
        PrimitiveKind::R => -coeff_c2(t, a) / coeff_c1(t, a),
    };
    Ok(integrate_real(f, from, to, tolerance(quad))?.0)
}

/// Quadrature from `0` to `theta`.
pub fn numeric_primitive(theta: f64, a: f64, c0: f64, kind: PrimitiveKind, quad: &QuadratureConfig) -> Result<f64> {
    numeric_primitive_between(0.0, theta, a, c0, kind, quad)
}

/// Principal value of `integral 1 / (C0 C1)` over `[lo, hi]`, which contains
/// the simple zero `pole` of `C1`. The window `|theta - pole| < h` is folded
/// onto `u = |theta - pole|`.
fn principal_value(a: f64, c0: f64, lo: f64, hi: f64, pole: f64, tol: Tolerance) -> Result<f64> {
    let f = |t: f64| 1.0 / (c0 * coeff_c1(t, a));
    let h = 0.5 * (pole - lo).min(hi - pole);
    let folded = integrate_real(|u| f(pole + u) + f(pole - u), 0.0, h, tol)?.0;
    let left = integrate_real(f, lo, pole - h, tol)?.0;
    let right = integrate_real(f, pole + h, hi, tol)?.0;
    Ok(left + folded + right)
}

/// Result of the extrapolated jump limit.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEstimate {
    pub value: f64,
    /// `I(pi - eps) - I(pi + eps)` for each `eps`.
    pub samples: Vec<(f64, f64)>,
    /// Difference between the last two extrapolation levels.
    pub extrapolation_error: f64,
}

/// `I(pi - eps) - I(pi + eps)` with `I` taken as principal-value integrals
/// from `0` (below `pi`) and back from `2 pi` (above `pi`).
pub fn jump_at(a: f64, c0: f64, eps: f64, quad: &QuadratureConfig) -> Result<f64> {
    let t0 = singular_angle_by_bisection(a)?;
    let tol = tolerance(quad);
    let below = principal_value(a, c0, 0.0, PI - eps, t0, tol)?;
    let above = principal_value(a, c0, PI + eps, TAU, TAU - t0, tol)?;
    Ok(below + above)
}

/// Richardson-extrapolated `lim_{eps -> 0} [I(pi - eps) - I(pi + eps)]` over
/// `eps in {1e-2, 1e-3, 1e-4}`. The defect is odd in `eps`, so the two
/// levels remove the `eps` and `eps^3` terms.
pub fn numeric_jump(a: f64, c0: f64, quad: &QuadratureConfig) -> Result<JumpEstimate> {
    let eps = [1e-2, 1e-3, 1e-4];
    let d: Vec<f64> = eps.iter().map(|&e| jump_at(a, c0, e, quad)).collect::<Result<_>>()?;
    let r1 = [(10.0 * d[1] - d[0]) / 9.0, (10.0 * d[2] - d[1]) / 9.0];
    let r2 = (1000.0 * r1[1] - r1[0]) / 999.0;
    let extrapolation_error = (r2 - r1[1]).abs();
    if !r2.is_finite() || extrapolation_error > 1e-6 * r2.abs() {
        return Err(Error::Accuracy {
            achieved: extrapolation_error,
            requested: 1e-6 * r2.abs(),
        });
    }
    Ok(JumpEstimate {
        value: r2,
        samples: eps.iter().copied().zip(d).collect(),
        extrapolation_error,
    })
}

/// Classical fourth-order Runge-Kutta for `phi' = [(i t3 / C0 - C2) / C1] phi`
/// on `[from, to]` with `steps` equal steps. Returns every node.
pub fn ode_integrate_kernel(
    t3: f64,
    a: f64,
    c0: f64,
    from: f64,
    to: f64,
    init: Complex64,
    steps: usize,
) -> Result<Vec<(f64, Complex64)>> {
    if steps == 0 {
        return Err(Error::Argument("ODE integration needs at least one step".into()));
    }
    check_path(a, from, to)?;
    let rhs = |t: f64, phi: Complex64| -> Complex64 {
        (Complex64::new(-coeff_c2(t, a), t3 / c0) / coeff_c1(t, a)) * phi
    };
    let h = (to - from) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut phi = init;
    out.push((from, phi));
    for k in 0..steps {
        let t = from + k as f64 * h;
        let k1 = rhs(t, phi);
        let k2 = rhs(t + 0.5 * h, phi + k1 * (0.5 * h));
        let k3 = rhs(t + 0.5 * h, phi + k2 * (0.5 * h));
        let k4 = rhs(t + h, phi + k3 * h);
        phi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t_next = if k + 1 == steps { to } else { from + (k + 1) as f64 * h };
        out.push((t_next, phi));
    }
    Ok(out)
}

/// Basis function `e_m = e^(i m theta) / sqrt(2 pi w)` and `T3 e_m` with
/// `w = a + cos theta`, `r = 1`.
fn basis_and_image(m: i64, theta: f64, a: f64, c0: f64) -> (Complex64, Complex64) {
    let (s, c) = theta.sin_cos();
    let w = a + c;
    let wave = Complex64::from_polar(1.0, m as f64 * theta) / (TAU * w).sqrt();
    // d/dtheta [e^(i m theta) w^(-1/2)] = e^(i m theta) w^(-1/2) [i m + sin / (2 w)]
    let deriv = wave * Complex64::new(s / (2.0 * w), m as f64);
    let image = Complex64::new(0.0, -c0) * (deriv * coeff_c1(theta, a) + wave * coeff_c2(theta, a));
    (wave, image)
}

/// `<e_m, T3 e_m'>_w` for `|m|, |m'| <= m_max` in the weight-orthonormal
/// periodic Fourier basis, by the periodic trapezoid rule on `points` nodes.
pub fn fourier_matrix(a: f64, c0: f64, m_max: usize, points: usize) -> Result<DMatrix<Complex64>> {
    if m_max == 0 {
        return Err(Error::Argument("basis size M must be >= 1".into()));
    }
    let dim = 2 * m_max + 1;
    let ms: Vec<i64> = (0..dim).map(|k| k as i64 - m_max as i64).collect();
    let entries: Vec<Complex64> = (0..dim * dim)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / dim, idx % dim);
            periodic_trapezoid(
                |t| {
                    let (ei, _) = basis_and_image(ms[i], t, a, c0);
                    let (_, tj) = basis_and_image(ms[j], t, a, c0);
                    ei.conj() * tj * (a + t.cos())
                },
                points,
            )
        })
        .collect();
    Ok(DMatrix::from_row_slice(dim, dim, &entries))
}

/// Same matrix with every entry from adaptive Gauss-Kronrod quadrature.
pub fn fourier_matrix_adaptive(a: f64, c0: f64, m_max: usize, quad: &QuadratureConfig) -> Result<DMatrix<Complex64>> {
    let dim = 2 * m_max + 1;
    let ms: Vec<i64> = (0..dim).map(|k| k as i64 - m_max as i64).collect();
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = integrate(
                |t| {
                    let (ei, _) = basis_and_image(ms[i], t, a, c0);
                    let (_, tj) = basis_and_image(ms[j], t, a, c0);
                    ei.conj() * tj * (a + t.cos())
                },
                0.0,
                TAU,
                tolerance(quad),
            )?
            .value;
        }
    }
    Ok(out)
}

/// `max |A - A^H|`.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues from the complex Schur form, without assuming hermiticity.
pub fn general_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::RootFinding("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// `<psi, T3 phi>_w - <T3 psi, phi>_w` for Fourier modes by the periodic
/// trapezoid rule.
pub fn symmetry_defect(a: f64, m: i64, m_prime: i64, points: usize) -> Complex64 {
    let mode = |k: i64, t: f64| Complex64::from_polar(1.0, k as f64 * t);
    let apply = |k: i64, t: f64| {
        let v = mode(k, t);
        Complex64::new(0.0, -1.0) * (Complex64::new(0.0, k as f64) * v * coeff_c1(t, a) + v * coeff_c2(t, a))
    };
    periodic_trapezoid(
        |t| (mode(m, t).conj() * apply(m_prime, t) - apply(m, t).conj() * mode(m_prime, t)) * (a + t.cos()),
        points,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_oracle_zero_and_path_errors() {
        let q = QuadratureConfig::default();
        assert_eq!(numeric_primitive(0.0, 2.0, 1.0, PrimitiveKind::I, &q).unwrap(), 0.0);
        assert_eq!(numeric_primitive(0.0, 2.0, 1.0, PrimitiveKind::R, &q).unwrap(), 0.0);
        assert!(matches!(
            numeric_primitive(2.5, 2.0, 1.0, PrimitiveKind::I, &q),
            Err(Error::PathCrossesPole { .. })
        ));
    }

    #[test]
    fn jump_samples_converge() {
        let est = numeric_jump(2.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!(est.extrapolation_error < 1e-10);
        assert!((est.samples[2].1 - est.value).abs() < 1e-3);
    }

    #[test]
    fn zero_t3_ode_is_pure_amplitude() {
        let sol = ode_integrate_kernel(0.0, 2.0, 1.0, 0.1, 1.5, Complex64::new(1.0, 0.0), 400).unwrap();
        for (t, v) in sol {
            assert!(v.im.abs() < 1e-14);
            let amp = ((0.1f64.cos() + 2.0) * coeff_c1(0.1, 2.0).abs() / ((t.cos() + 2.0) * coeff_c1(t, 2.0).abs())).sqrt();
            assert!((v.re / amp - 1.0).abs() < 1e-9, "theta {t}");
        }
    }

    #[test]
    fn ode_rejects_paths_through_poles() {
        assert!(ode_integrate_kernel(1.0, 2.0, 1.0, 0.1, 2.0, Complex64::new(1.0, 0.0), 10).is_err());
    }

    #[test]
    fn report_formatting() {
        let r = OracleReport::relative("x", 1e-12, 2e-10, 1e-8, "a=2");
        assert!(r.passed);
        assert!(r.to_string().starts_with("PASS x max_abs="));
        let f = OracleReport::verdict("y", false, "bad");
        assert_eq!(f.to_string(), "FAIL y bad");
    }
}
