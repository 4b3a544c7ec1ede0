//! Projections onto the eigendistributions and the `T3` representation.
//!
//! The bracket of a periodic `phi` with the kernel of eigenvalue `t3` is
//!
//! ```text
//! <t3|phi> = integral_0^(2 pi) dtheta w(theta) conj(K(theta)) phi(theta),   w = r (a + cos theta).
//! ```
//!
//! [`SpectralContext::project_theta`] evaluates it directly in `theta`;
//! [`SpectralContext::project_y`] changes variables to `y` on each branch and
//! folds D3 onto D1 and the right half of D2 onto its left half.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::branch::{BranchId, BranchMap};
use crate::eigen::{normalization_squared, Eigenvalue, Kernel, Primitives};
use crate::error::{Error, Result};
use crate::geometry::{AspectRatio, PhysicalScale, QuadratureConfig, TorusGeometry, Units};
use crate::model::{Pole, ThetaPoint};
use crate::quadrature::{integrate, Tolerance};

/// Floor for relative comparisons between brackets.
pub const RELATIVE_FLOOR: f64 = 1e-14;

/// Everything needed to project wavefunctions for one torus.
#[derive(Debug, Clone, Copy)]
pub struct SpectralContext {
    primitives: Primitives,
    map: BranchMap,
    units: Units,
    quad: QuadratureConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEntry {
    pub n: i64,
    /// Eigenvalue in output units.
    pub t3: f64,
    pub bracket: Complex64,
}

/// Brackets `<t3(n)|phi>` for `|n| <= n_max`, in output units.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub a: f64,
    pub n_max: i64,
    pub entries: Vec<SpectralEntry>,
}

impl SpectralCoefficients {
    pub fn get(&self, n: i64) -> Option<&SpectralEntry> {
        if n.abs() > self.n_max {
            return None;
        }
        self.entries.get((n + self.n_max) as usize)
    }

    /// Keeps the entries with `|n| <= n_max`.
    pub fn truncate(&self, n_max: i64) -> Self {
        let n_max = n_max.min(self.n_max);
        Self {
            a: self.a,
            n_max,
            entries: self.entries.iter().filter(|e| e.n.abs() <= n_max).copied().collect(),
        }
    }
}

/// `n -> t3(n) c_n`.
pub fn apply_operator_spectral(coeffs: &SpectralCoefficients) -> SpectralCoefficients {
    SpectralCoefficients {
        a: coeffs.a,
        n_max: coeffs.n_max,
        entries: coeffs
            .entries
            .iter()
            .map(|e| SpectralEntry {
                bracket: e.bracket * e.t3,
                ..*e
            })
            .collect(),
    }
}

/// Synthesized samples and their weighted relative L2 distance to the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub thetas: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SpectralContext {
    pub fn new(geometry: TorusGeometry, scale: PhysicalScale, quad: QuadratureConfig) -> Result<Self> {
        Self::with_primitives(Primitives::new(geometry.aspect_ratio()), geometry, scale, quad)
    }

    pub fn dimensionless(a: AspectRatio) -> Result<Self> {
        Self::new(
            TorusGeometry::dimensionless(a),
            PhysicalScale::dimensionless(),
            QuadratureConfig::default(),
        )
    }

    pub fn with_primitives(
        primitives: Primitives,
        geometry: TorusGeometry,
        scale: PhysicalScale,
        quad: QuadratureConfig,
    ) -> Result<Self> {
        quad.validate()?;
        if (primitives.a() - geometry.aspect_ratio().get()).abs() > 1e-14 * primitives.a() {
            return Err(Error::Argument("primitives and geometry disagree on the aspect ratio".into()));
        }
        Ok(Self {
            primitives,
            map: BranchMap::from_primitives(primitives)?,
            units: Units::new(&geometry, &scale),
            quad,
        })
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        self.quad = quad;
        Ok(self)
    }

    pub fn primitives(&self) -> &Primitives {
        &self.primitives
    }

    pub fn branch_map(&self) -> &BranchMap {
        &self.map
    }

    pub fn units(&self) -> &Units {
        &self.units
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn eigenvalue(&self, n: i64) -> Eigenvalue {
        Eigenvalue::new(n, &self.primitives)
    }

    pub fn kernel(&self, ev: &Eigenvalue) -> Kernel {
        Kernel::new(&self.primitives, ev)
    }

    fn piece_tolerance(&self) -> Tolerance {
        Tolerance::new(self.quad.abs_tol / 16.0, self.quad.rel_tol, self.quad.max_subdivisions)
    }

    /// Dimensionless bracket by quadrature in `theta`.
    fn project_theta_raw<F>(&self, phi: &F, ev: &Eigenvalue) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let op = *self.primitives.operator();
        let kernel = self.kernel(ev);
        let a = op.a();
        let ang = op.singular_angles();
        let beta = self.quad.singularity_buffer;
        let tol = self.piece_tolerance();

        let plain = |theta: f64| -> Complex64 {
            let p = op.locate(theta);
            match kernel.value_at(p) {
                Ok(k) => k.conj() * phi(theta) * (a + theta.cos()),
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        };
        // Seams are rounded once; the buffer widths are then exact differences.
        let seams = [
            ang.first - beta,
            ang.first + beta,
            ang.second - beta,
            ang.second + beta,
        ];
        let mut total = Complex64::new(0.0, 0.0);
        for (lo, hi) in [
            (0.0, seams[0]),
            (seams[1], std::f64::consts::PI),
            (std::f64::consts::PI, seams[2]),
            (seams[3], std::f64::consts::TAU),
        ] {
            total += integrate(plain, lo, hi, tol)?.value;
        }
        for (k, &seam) in seams.iter().enumerate() {
            let (pole, center) = if k < 2 {
                (Pole::First, ang.first)
            } else {
                (Pole::Second, ang.second)
            };
            let side = if k % 2 == 0 { -1.0 } else { 1.0 };
            total += self.buffer_integral(phi, &kernel, pole, side, (seam - center).abs())?;
        }
        Ok(total)
    }

    /// Integral over `theta = theta0 + side u^2`, `0 < u <= sqrt(width)`, on
    /// dyadic pieces in `u` until the remainder is below tolerance.
    fn buffer_integral<F>(&self, phi: &F, kernel: &Kernel, pole: Pole, side: f64, width: f64) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let op = *self.primitives.operator();
        let a = op.a();
        let tol = self.piece_tolerance();
        let g = |u: f64| -> Complex64 {
            let p = ThetaPoint {
                pole,
                offset: side * u * u,
            };
            let theta = op.theta(p);
            match kernel.value_at(p) {
                Ok(k) => k.conj() * phi(theta) * ((a + theta.cos()) * 2.0 * u),
                Err(_) => Complex64::new(0.0, 0.0),
            }
        };
        let mut hi = width.sqrt();
        let mut total = Complex64::new(0.0, 0.0);
        for _ in 0..1100 {
            let lo = 0.5 * hi;
            total += integrate(g, lo, hi, tol)?.value;
            let bound = lo * 2.0 * g(lo).norm().max(g(0.5 * lo).norm());
            if bound < tol.abs {
                return Ok(total);
            }
            hi = lo;
        }
        Err(Error::Accuracy {
            achieved: hi,
            requested: tol.abs,
        })
    }

    /// Bracket `<t3|phi>` by adaptive quadrature in `theta`, with the
    /// `|theta - theta0|^(-1/2)` singularities removed by `u^2` substitution
    /// inside the buffer.
    pub fn project_theta<F>(&self, phi: &F, ev: &Eigenvalue) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        Ok(self.project_theta_raw(phi, ev)? * self.units.bracket(1.0))
    }

    /// Integrand of the folded `y` integrals at `y <= 0`. Returns the D1 and
    /// D2 contributions and a bound on their size.
    fn y_integrand<F>(&self, phi: &F, t3: f64, y: f64) -> Result<(Complex64, Complex64, f64)>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let op = *self.primitives.operator();
        let rot = Complex64::from_polar(1.0, -t3 * y);
        let mirror_phase = Complex64::from_polar(1.0, -t3 * self.full_jump());

        let p1 = self.map.inverse_point(y, BranchId::D1)?;
        let m1 = ThetaPoint {
            pole: Pole::Second,
            offset: -p1.offset,
        };
        let h1 = op.amplitude_measure(p1).sqrt();
        let (f1, g1) = (phi(op.theta(p1)), phi(op.theta(m1)));
        let d1 = (f1 * rot + mirror_phase * g1 * rot.conj()) * h1;

        let p2 = self.map.inverse_point(y, BranchId::D2)?;
        let m2 = ThetaPoint {
            pole: Pole::Second,
            offset: -p2.offset,
        };
        let h2 = op.amplitude_measure(p2).sqrt();
        let (f2, g2) = (phi(op.theta(p2)), phi(op.theta(m2)));
        let d2 = (f2 * rot + g2 * rot.conj()) * h2;

        let bound = h1 * (f1.norm() + g1.norm()) + h2 * (f2.norm() + g2.norm());
        Ok((d1, d2, bound))
    }

    fn full_jump(&self) -> f64 {
        self.map.domain(BranchId::D3).shift
    }

    fn fold(&self, t3: f64, d1: Complex64, d2: Complex64) -> Complex64 {
        d1 + Complex64::from_polar(1.0, -0.5 * t3 * self.full_jump()) * d2
    }

    /// Dimensionless `y`-route bracket truncated to `y' in [-y_cut, 0]`, or
    /// run to tolerance when `y_cut` is `None`.
    fn project_y_raw<F>(&self, phi: &F, ev: &Eigenvalue, y_cut: Option<f64>) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let t3 = ev.t3;
        let tol = self.piece_tolerance();
        let kernel = self.kernel(ev);
        let piece = 2.0 / self.map.rate();
        let f = |y: f64| -> Complex64 {
            match self.y_integrand(phi, t3, y) {
                Ok((d1, d2, _)) => self.fold(t3, d1, d2),
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        };
        let mut total = Complex64::new(0.0, 0.0);
        let mut hi = 0.0;
        for _ in 0..10_000 {
            let mut lo = hi - piece;
            if let Some(cut) = y_cut {
                lo = lo.max(-cut);
            }
            total += integrate(f, lo, hi, tol)?.value;
            if let Some(cut) = y_cut {
                if lo <= -cut {
                    return Ok(total * kernel.prefactor());
                }
            } else {
                let (_, _, bound) = self.y_integrand(phi, t3, lo)?;
                if 2.0 * bound * piece < tol.abs {
                    return Ok(total * kernel.prefactor());
                }
            }
            hi = lo;
        }
        Err(Error::Accuracy {
            achieved: f64::INFINITY,
            requested: tol.abs,
        })
    }

    /// Bracket `<t3|phi>` through the change of variables to `y`.
    pub fn project_y<F>(&self, phi: &F, ev: &Eigenvalue) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        Ok(self.project_y_raw(phi, ev, None)? * self.units.bracket(1.0))
    }

    /// The `y` route with every branch integral cut at `|y'| <= y_cut`.
    pub fn project_y_truncated<F>(&self, phi: &F, ev: &Eigenvalue, y_cut: f64) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        if !(y_cut > 0.0) {
            return Err(Error::Argument(format!("y cutoff must be positive, got {y_cut}")));
        }
        Ok(self.project_y_raw(phi, ev, Some(y_cut))? * self.units.bracket(1.0))
    }

    /// Prefactor `r C0 |N|^2 4 (a-1)^2 (a+1)^4 sqrt(a^4 - a^2 + 1)` of the
    /// windowed kernel-kernel bracket; equal to `1/2`.
    pub fn windowed_prefactor(&self) -> f64 {
        let a = self.primitives.a();
        let s = self.primitives.operator().s();
        normalization_squared(self.primitives.operator().aspect_ratio())
            * 4.0
            * (a - 1.0).powi(2)
            * (a + 1.0).powi(4)
            * s
    }

    /// Window average `pref [1 + e^(i (t3' - t3) dI / 2)] sin(D Y) / (D Y)`
    /// with `D = t3' - t3` and `Y = y_max`.
    pub fn windowed_bracket(&self, ev: &Eigenvalue, ev_prime: &Eigenvalue, y_max: f64) -> Result<Complex64> {
        if !(y_max > 0.0 && y_max.is_finite()) {
            return Err(Error::Argument(format!("window half-width must be positive, got {y_max}")));
        }
        let phase = if (ev_prime.n - ev.n) % 2 == 0 { 2.0 } else { 0.0 };
        let d = ev_prime.t3 - ev.t3;
        let avg = if ev.n == ev_prime.n {
            1.0
        } else {
            let x = d * y_max;
            x.sin() / x
        };
        Ok(Complex64::new(self.windowed_prefactor() * phase * avg, 0.0))
    }

    /// Upper bound `2 pref / (|t3' - t3| y_max)` on the off-diagonal bracket.
    pub fn windowed_envelope(&self, ev: &Eigenvalue, ev_prime: &Eigenvalue, y_max: f64) -> f64 {
        2.0 * self.windowed_prefactor() / ((ev_prime.t3 - ev.t3).abs() * y_max)
    }

    /// Brackets for `|n| <= n_max`, computed in parallel over `n`.
    pub fn to_spectrum<F>(&self, phi: &F, n_max: i64) -> Result<SpectralCoefficients>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        if n_max < 0 {
            return Err(Error::Argument(format!("n_max must be >= 0, got {n_max}")));
        }
        let entries = (-n_max..=n_max)
            .into_par_iter()
            .map(|n| {
                let ev = self.eigenvalue(n);
                Ok(SpectralEntry {
                    n,
                    t3: self.units.eigenvalue(ev.t3),
                    bracket: self.project_theta(phi, &ev)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralCoefficients {
            a: self.primitives.a(),
            n_max,
            entries,
        })
    }

    /// Largest relative deviation of the `y` route from `coeffs` at `ns`.
    pub fn spot_check<F>(&self, phi: &F, coeffs: &SpectralCoefficients, ns: &[i64]) -> Result<f64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let devs = ns
            .par_iter()
            .filter_map(|&n| coeffs.get(n).map(|e| (n, e.bracket)))
            .map(|(n, b)| {
                let y = self.project_y(phi, &self.eigenvalue(n))?;
                Ok((y - b).norm() / b.norm().max(y.norm()).max(RELATIVE_FLOOR))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(devs.into_iter().fold(0.0, f64::max))
    }

    /// `sum_n K_n(theta) <t3(n)|phi>` on `thetas`, which must stay outside
    /// the singularity buffer.
    pub fn synthesize(&self, coeffs: &SpectralCoefficients, thetas: &[f64]) -> Result<Synthesis> {
        let op = self.primitives.operator();
        let beta = self.quad.singularity_buffer;
        let to_dimensionless = 1.0 / self.units.bracket(1.0);
        let kernels: Vec<(Kernel, Complex64)> = coeffs
            .entries
            .iter()
            .map(|e| (self.kernel(&self.eigenvalue(e.n)), e.bracket * to_dimensionless))
            .collect();
        let values = thetas
            .par_iter()
            .map(|&t| {
                if op.distance_to_singularity(t) < beta {
                    return Err(Error::Argument(format!(
                        "synthesis angle {t} lies inside the singularity buffer"
                    )));
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, c) in &kernels {
                    acc += k.value(t)? * c;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Synthesis {
            thetas: thetas.to_vec(),
            values,
        })
    }

    /// Weighted relative L2 distance `|S - phi|_w / |phi|_w` over the samples.
    pub fn weighted_residual<F>(&self, synthesis: &Synthesis, phi: &F) -> f64
    where
        F: Fn(f64) -> Complex64,
    {
        let a = self.primitives.a();
        let (mut num, mut den) = (0.0, 0.0);
        for (&t, v) in synthesis.thetas.iter().zip(&synthesis.values) {
            let w = a + t.cos();
            let target = phi(t);
            num += w * (v - target).norm_sqr();
            den += w * target.norm_sqr();
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    /// Uniform grid on `[0, 2 pi]` with the buffers around both poles removed.
    pub fn synthesis_grid(&self, points: usize) -> Vec<f64> {
        let op = self.primitives.operator();
        let beta = self.quad.singularity_buffer;
        (0..=points)
            .map(|k| std::f64::consts::TAU * k as f64 / points as f64)
            .filter(|&t| op.distance_to_singularity(t) >= beta)
            .collect()
    }
}
