//! The acceptance suite as library functions, shared by the `verify`
//! command and the test targets.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::branch::{BranchId, BranchMap};
use crate::eigen::{Eigenvalue, Kernel, Primitives};
use crate::error::Result;
use crate::geometry::{AspectRatio, PhysicalScale, QuadratureConfig, TorusGeometry};
use crate::model::{coeff_c1, coeff_c2, Pole};
use crate::oracles::{
    fourier_matrix, general_eigenvalues, hermiticity_defect, numeric_jump, ErrorStats, OracleReport,
};
use crate::spectral::{SpectralContext, RELATIVE_FLOOR};
use crate::tables::{eigenvalue_sweep, i_scale, primitive_rows};
use crate::wavefunction::{FiniteDifference, FourierSeries, ThetaFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

/// Runs the criteria. `jump_factor != 1` corrupts the stored jump of every
/// primitive set, which the suite must detect.
#[derive(Debug, Clone, Copy)]
pub struct Verifier {
    pub level: Level,
    pub jump_factor: f64,
    pub quad: QuadratureConfig,
}

fn aspect(a: f64) -> AspectRatio {
    AspectRatio::new(a).expect("suite aspect ratios exceed 1")
}

fn timed(name: &str, f: impl FnOnce() -> Result<OracleReport>) -> OracleReport {
    let start = Instant::now();
    let report = f().unwrap_or_else(|e| OracleReport::failure(name, &e));
    let secs = start.elapsed().as_secs_f64();
    let detail = if report.detail.is_empty() {
        format!("time={secs:.2}s")
    } else {
        format!("{} time={secs:.2}s", report.detail)
    };
    report.with_detail(detail)
}

/// Eighth-order central difference of a real function.
fn central_difference(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut acc = 0.0;
    for (k, w) in W.iter().enumerate() {
        let dx = (k + 1) as f64 * h;
        acc += w * (f(x + dx)? - f(x - dx)?);
    }
    Ok(acc / h)
}

impl Verifier {
    pub fn new(level: Level) -> Self {
        Self {
            level,
            jump_factor: 1.0,
            quad: QuadratureConfig::default(),
        }
    }

    pub fn with_jump_factor(mut self, factor: f64) -> Self {
        self.jump_factor = factor;
        self
    }

    fn primitives(&self, a: f64) -> Primitives {
        if self.jump_factor == 1.0 {
            Primitives::new(aspect(a))
        } else {
            Primitives::with_perturbed_jump(aspect(a), self.jump_factor)
        }
    }

    fn context(&self, a: f64) -> Result<SpectralContext> {
        SpectralContext::with_primitives(
            self.primitives(a),
            TorusGeometry::dimensionless(aspect(a)),
            PhysicalScale::dimensionless(),
            self.quad,
        )
    }

    /// Closed-form `t3^(0)` and the stored jump against the extrapolated
    /// numeric jump.
    pub fn quantization(&self) -> OracleReport {
        let name = "1 quantization consistency";
        timed(name, || {
            let mut stats = ErrorStats::default();
            for a in [1.5, 2.0, 3.0, 5.0, 10.0] {
                let p = self.primitives(a);
                let jump = numeric_jump(a, 1.0, &self.quad)?.value;
                stats.push(p.t3_0(), TAU / jump, 0.0);
                stats.push(p.jump(), jump, 0.0);
                stats.push(Eigenvalue::new(1, &p).t3, TAU / jump, 0.0);
            }
            Ok(stats.report(name, 1e-8, "a in {1.5,2,3,5,10}"))
        })
    }

    /// Admissible sample angles: away from the poles, from `pi` (where `I`
    /// jumps) and from the ends of `[0, 2 pi]`.
    fn identity_angles(p: &Primitives, count: usize) -> Vec<f64> {
        let op = p.operator();
        let pool: Vec<f64> = (0..400)
            .map(|k| 0.01 + (TAU - 0.02) * k as f64 / 399.0)
            .filter(|&t| op.distance_to_singularity(t) > 0.1 && (t - PI).abs() > 0.01)
            .collect();
        (0..count).map(|k| pool[k * pool.len() / count]).collect()
    }

    pub fn primitive_identities(&self) -> OracleReport {
        let name = "2 primitive derivative identities";
        timed(name, || {
            let mut stats = ErrorStats::default();
            let h = 1e-3;
            for a in [1.5, 2.0, 5.0] {
                let p = self.primitives(a);
                for t in Self::identity_angles(&p, 50) {
                    let di = central_difference(|x| p.i(x), t, h)?;
                    stats.push(di, 1.0 / coeff_c1(t, a), 0.0);
                    let dr = central_difference(|x| p.r(x), t, h)?;
                    stats.push(dr, -coeff_c2(t, a) / coeff_c1(t, a), 1e-3);
                }
            }
            Ok(stats.report(name, 1e-8, "50 angles x a in {1.5,2,5}"))
        })
    }

    pub fn eigen_residual(&self) -> OracleReport {
        let name = "3 eigen-ODE residual";
        timed(name, || {
            let a = 2.0;
            let p = self.primitives(a);
            let op = *p.operator();
            let mut stats = ErrorStats::default();
            for n in [1, 3] {
                let ev = Eigenvalue::new(n, &p);
                let k = Kernel::new(&p, &ev);
                let f = FiniteDifference::new(|t: f64| k.value(t).unwrap_or(Complex64::new(f64::NAN, 0.0)), 1e-3);
                for j in 0..400 {
                    let t = 0.01 + (TAU - 0.02) * j as f64 / 399.0;
                    if op.distance_to_singularity(t) < 0.1 {
                        continue;
                    }
                    let v = f.value(t);
                    let applied = op.apply(&f, t)?;
                    stats.push_abs((applied - v * ev.t3).norm(), ev.t3.abs() * v.norm());
                }
            }
            Ok(stats.report(name, 1e-6, "a=2, n in {1,3}, 400-point grid"))
        })
    }

    pub fn periodicity(&self) -> OracleReport {
        let name = "4 periodicity iff quantization";
        timed(name, || {
            let p = self.primitives(2.0);
            let mut worst = 0.0f64;
            for n in -3..=3 {
                let k = Kernel::new(&p, &Eigenvalue::new(n, &p));
                worst = worst.max((k.value(TAU)? - k.value(0.0)?).norm());
            }
            let t3 = 1.5 * Eigenvalue::new(1, &p).t3;
            let k = Kernel::with_t3(&p, t3);
            let measured = (k.value(TAU)? - k.value(0.0)?).norm() / k.value(0.0)?.norm();
            let expected = (Complex64::from_polar(1.0, t3 * p.jump()) - 1.0).norm();
            let defect_err = (measured - expected).abs();
            let passed = worst < 1e-10 && defect_err < 1e-10;
            Ok(OracleReport::verdict(
                name,
                passed,
                format!("max|K(2pi)-K(0)|={worst:.3e} phase_defect_err={defect_err:.3e}"),
            ))
        })
    }

    pub fn dual_projection(&self) -> OracleReport {
        let name = "5 dual-method projection";
        timed(name, || {
            let (aspects, m_max, ns): (&[f64], i64, &[i64]) = match self.level {
                Level::Full => (&[1.5, 2.0, 5.0], 4, &[0, 1, -1, 2, -2, 5]),
                Level::Fast => (&[2.0], 2, &[0, 1, -1, 2]),
            };
            let mut cases = Vec::new();
            for &a in aspects {
                for m in -m_max..=m_max {
                    for &n in ns {
                        cases.push((a, m, n));
                    }
                }
            }
            let devs = cases
                .par_iter()
                .map(|&(a, m, n)| {
                    let ctx = self.context(a)?;
                    let phi = FourierSeries::mode(m);
                    let f = |t: f64| phi.value(t);
                    let ev = ctx.eigenvalue(n);
                    let x = ctx.project_theta(&f, &ev)?;
                    let y = ctx.project_y(&f, &ev)?;
                    Ok(((x - y).norm(), x.norm().max(y.norm()).max(RELATIVE_FLOOR)))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut stats = ErrorStats::default();
            let mut outside = Vec::new();
            for (&(a, m, n), (d, s)) in cases.iter().zip(devs) {
                stats.push_abs(d, s);
                if !(d / s <= 1e-6) {
                    outside.push(format!("(a={a},m={m},n={n},|b|={s:.1e},rel={:.1e})", d / s));
                }
            }
            let report = stats.report(name, 1e-6, format!("{} cases", cases.len()));
            Ok(match outside.is_empty() {
                true => report,
                false => report.with_detail(format!("outside tolerance: {}", outside.join(" "))),
            })
        })
    }

    pub fn windowed_orthonormality(&self) -> OracleReport {
        let name = "6 windowed orthonormality";
        timed(name, || {
            let ctx = self.context(2.0)?;
            let mut diag_err = 0.0f64;
            for n in -3..=3 {
                let ev = ctx.eigenvalue(n);
                for y in [1e2, 1e3, 1e4] {
                    diag_err = diag_err.max((ctx.windowed_bracket(&ev, &ev, y)? - 1.0).norm());
                }
            }
            let mut ok = diag_err <= 4.0 * f64::EPSILON;
            let mut worst_1e4 = 0.0f64;
            let mut min_decay = f64::INFINITY;
            for (n, m) in [(1, 2), (1, 3), (-1, 2), (0, 4), (2, -2)] {
                let (e, f) = (ctx.eigenvalue(n), ctx.eigenvalue(m));
                let ys = [1e2, 1e3, 1e4];
                let mut env = Vec::new();
                for &y in &ys {
                    let b = ctx.windowed_bracket(&e, &f, y)?.norm();
                    let bound = ctx.windowed_envelope(&e, &f, y);
                    ok &= b <= bound * (1.0 + 1e-12);
                    env.push(bound);
                }
                worst_1e4 = worst_1e4.max(ctx.windowed_bracket(&e, &f, 1e4)?.norm());
                min_decay = min_decay.min(env[0] / env[1]).min(env[1] / env[2]);
            }
            ok &= worst_1e4 < 1e-2 && min_decay >= 10.0 * (1.0 - 1e-12);
            Ok(OracleReport::verdict(
                name,
                ok,
                format!("diag_err={diag_err:.1e} offdiag(1e4)={worst_1e4:.3e} envelope_decay_per_decade={min_decay:.3}"),
            ))
        })
    }

    pub fn branch_inversion(&self) -> OracleReport {
        let name = "7 branch inversion";
        timed(name, || {
            let map = BranchMap::from_primitives(self.primitives(2.0))?;
            let mut round_trip = 0.0f64;
            for id in [BranchId::D1, BranchId::D2, BranchId::D3] {
                let d = map.domain(id);
                for k in 0..200 {
                    let t = d.theta_lo + (d.theta_hi - d.theta_lo) * (k as f64 + 0.5) / 200.0;
                    let y = map.forward(t)? - d.shift;
                    round_trip = round_trip.max((map.inverse(y, id)? - t).abs());
                }
            }
            let mut asym = 0.0f64;
            for k in 0..=40 {
                let y = -10.0 - 20.0 * k as f64 / 40.0;
                for id in [BranchId::D1, BranchId::D2] {
                    let exact = map.inverse_point(y, id)?.offset.abs();
                    let approx = map.asymptotic_offset(y + map.domain(id).shift, Pole::First);
                    asym = asym.max((approx / exact - 1.0).abs());
                }
            }
            let passed = round_trip < 1e-10 && asym < 0.01;
            Ok(OracleReport::verdict(
                name,
                passed,
                format!(
                    "round_trip={round_trip:.3e} asymptotic_rel={asym:.3e} threshold_y={:.3}",
                    map.asymptotic_threshold()
                ),
            ))
        })
    }

    pub fn hermiticity(&self) -> OracleReport {
        let name = "8 hermiticity witness";
        timed(name, || {
            let m = fourier_matrix(2.0, 1.0, 16, 1024)?;
            let defect = hermiticity_defect(&m);
            let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let eig = general_eigenvalues(&m)?;
            let max_im = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            Ok(OracleReport::relative(name, defect, defect, 1e-8, "M=16, a=2, 1024 nodes")
                .with_detail(format!("scale={scale:.3e} max|Im eig|={max_im:.3e}")))
        })
    }

    pub fn figures(&self) -> OracleReport {
        let name = "9 figure data";
        timed(name, || {
            let a = 2.0;
            let p = self.primitives(a);
            let rows = primitive_rows(&p, 400)?;
            let ang = p.operator().singular_angles();
            let mut diverges = true;
            for pole in [ang.first, ang.second] {
                for side in [-1.0, 1.0] {
                    let mut seq: Vec<(f64, f64)> = rows
                        .iter()
                        .filter(|r| (r.theta - pole) * side > 0.0 && (r.theta - pole).abs() <= 0.1 + 1e-12)
                        .map(|r| ((r.theta - pole).abs(), r.r))
                        .collect();
                    seq.sort_by(|x, y| y.0.total_cmp(&x.0));
                    diverges &= seq.len() >= 12 && seq.windows(2).all(|w| w[1].1 > w[0].1);
                    diverges &= seq.last().map(|l| l.1 - seq[0].1 > 10.0).unwrap_or(false);
                }
            }
            let at = rows.iter().position(|r| r.theta == PI).expect("pi row present");
            let data_jump = rows[at].i_scaled - rows[at + 1].i_scaled;
            let expected = i_scale(a) * numeric_jump(a, 1.0, &self.quad)?.value;
            let jump_err = (data_jump - expected).abs() / expected;
            let end_err = rows.last().map(|r| r.i_scaled.abs()).unwrap_or(f64::INFINITY);

            let sweep = eigenvalue_sweep(1.1, 10.0, 100)?;
            let positive = sweep.iter().all(|&(_, t)| t > 0.0);
            let monotone = sweep.windows(2).all(|w| w[1].1 > w[0].1);
            let slope_change = |rows: &[(f64, f64)]| {
                rows.windows(3)
                    .map(|w| {
                        let (d0, d1) = (w[1].1 - w[0].1, w[2].1 - w[1].1);
                        (d1 - d0).abs() / (d0.abs() + d1.abs())
                    })
                    .fold(0.0, f64::max)
            };
            let coarse = slope_change(&sweep);
            let fine = slope_change(&eigenvalue_sweep(1.1, 10.0, 991)?);
            let smooth = coarse < 0.25 && fine < coarse / 5.0;
            let near_one = self.primitives(1.001).t3_0() / (2.0 * 2f64.sqrt() * 0.001) - 1.0;
            let cubic = self.primitives(40.0).t3_0() / (4.0 / 3.0 * 40f64.powi(3)) - 1.0;
            let passed = diverges
                && jump_err < 1e-8
                && end_err < 1e-10
                && positive
                && monotone
                && smooth
                && near_one.abs() < 0.01
                && cubic.abs() < 0.05;
            Ok(OracleReport::verdict(
                name,
                passed,
                format!(
                    "R_diverges={diverges} I_jump_rel={jump_err:.3e} I(2pi)={end_err:.1e} \
                     sweep_positive={positive} monotone={monotone} slope_change={coarse:.3e}->{fine:.3e} \
                     small_a_slope_rel={near_one:.2e} cubic_rel(a=40)={cubic:.2e}"
                ),
            ))
        })
    }

    pub fn run(&self) -> Vec<OracleReport> {
        vec![
            self.quantization(),
            self.primitive_identities(),
            self.eigen_residual(),
            self.periodicity(),
            self.dual_projection(),
            self.windowed_orthonormality(),
            self.branch_inversion(),
            self.hermiticity(),
            self.figures(),
        ]
    }
}
