//! Closed-form primitives, quantized eigenvalues and the singular kernels.
//!
//! Separating `T3 phi = t3 phi` gives `d ln phi = [i t3 / C0 - C2] / C1`.
//! With `dI/dtheta = 1 / C1` and `dR/dtheta = -C2 / C1` the solution is
//! `phi = exp(R + i t3 I)`. The primitive `I` is evaluated through the
//! continuous phase variable
//!
//! ```text
//! y(theta) = P L(theta) + Q Psi(theta),
//! L   = ln|sin((theta - theta0) / 2)| - ln|sin((theta + theta0) / 2)|,
//! Psi = atan2(k sin(theta / 2), cos(theta / 2))    in [0, pi],
//! ```
//!
//! which has no branch cut on `[0, 2 pi]`; `I = y - H(theta - pi) dI`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{AspectRatio, Units};
use crate::model::{Pole, ThetaOperator, ThetaPoint};

/// Precomputed constants of the closed-form primitives for one `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitives {
    op: ThetaOperator,
    /// Coefficient `P` of the logarithmic part of `y`; also `1 / kappa`.
    log_coef: f64,
    /// Coefficient `Q` of the angular part of `y`.
    atan_coef: f64,
    /// `k = (a - 1) / sqrt(S + a)`.
    k: f64,
    jump: f64,
    t3_0: f64,
}

impl Primitives {
    pub fn new(a: AspectRatio) -> Self {
        let op = ThetaOperator::new(a);
        let a = op.a();
        let s = op.s();
        let sp = (s + a).sqrt();
        // S - a^2 + 3a - 1 > 0 for all a > 1; the forms below avoid the
        // cancellation in a^2 - 3a + 1 + S and S - a near a = 1.
        let d = s - a * a + 3.0 * a - 1.0;
        let log_coef = 3.0 * a * sp / (2.0 * d * (a + 1.0) * s);
        let atan_coef = d / (2.0 * (a - 1.0) * s * sp);
        let t3_0 = 4.0 * (a - 1.0) * s * sp / d;
        Self {
            op,
            log_coef,
            atan_coef,
            k: (a - 1.0) / sp,
            jump: PI * atan_coef,
            t3_0,
        }
    }

    /// Same primitives with the stored jump multiplied by `factor`.
    /// Only used to check that verification detects a corrupted constant.
    #[doc(hidden)]
    pub fn with_perturbed_jump(a: AspectRatio, factor: f64) -> Self {
        let mut p = Self::new(a);
        p.jump *= factor;
        p
    }

    pub fn operator(&self) -> &ThetaOperator {
        &self.op
    }

    pub fn a(&self) -> f64 {
        self.op.a()
    }

    /// Jump `dI = I(pi - 0) - I(pi + 0) > 0` of the primitive at `pi`.
    pub fn jump(&self) -> f64 {
        self.jump
    }

    /// Normalized eigenvalue `t3^(0)(a) = 2 pi / dI`, from its own closed form.
    pub fn t3_0(&self) -> f64 {
        self.t3_0
    }

    /// Decay rate `kappa` of `|theta - theta0|` in `y` near the poles.
    pub fn rate(&self) -> f64 {
        1.0 / self.log_coef
    }

    pub fn log_coef(&self) -> f64 {
        self.log_coef
    }

    pub fn atan_coef(&self) -> f64 {
        self.atan_coef
    }

    fn psi(&self, theta: f64) -> f64 {
        let (s, c) = (0.5 * theta).sin_cos();
        (self.k * s).atan2(c)
    }

    fn log_part(&self, p: ThetaPoint) -> f64 {
        let t0 = self.op.singular_angles().first;
        let h = 0.5 * p.offset;
        match p.pole {
            Pole::First => h.sin().abs().ln() - (t0 + h).sin().abs().ln(),
            Pole::Second => (t0 - h).sin().abs().ln() - h.sin().abs().ln(),
        }
    }

    fn check_point(&self, p: ThetaPoint) -> Result<f64> {
        let theta = self.op.theta(p);
        if !(0.0..=TAU).contains(&theta) {
            return Err(Error::AngleOutOfRange { theta });
        }
        if p.offset == 0.0 {
            return Err(Error::Pole { theta });
        }
        Ok(theta)
    }

    fn check_theta(&self, theta: f64) -> Result<ThetaPoint> {
        if !(0.0..=TAU).contains(&theta) {
            return Err(Error::AngleOutOfRange { theta });
        }
        let p = self.op.locate(theta);
        if p.offset == 0.0 {
            return Err(Error::Pole { theta });
        }
        Ok(p)
    }

    /// Continuous phase variable `y = I(theta) - I(0) + H(theta - pi) dI`.
    pub fn y_at(&self, p: ThetaPoint) -> Result<f64> {
        let theta = self.check_point(p)?;
        Ok(self.log_coef * self.log_part(p) + self.atan_coef * self.psi(theta))
    }

    pub fn y(&self, theta: f64) -> Result<f64> {
        self.y_at(self.check_theta(theta)?)
    }

    /// The primitive `I` with `I(0) = I(2 pi) = 0` and a downward jump of
    /// `dI` just after `pi`.
    pub fn i(&self, theta: f64) -> Result<f64> {
        let y = self.y(theta)?;
        Ok(if theta > PI { y - self.jump } else { y })
    }

    /// `R = -ln[(cos theta + a) |C1|] / 2`.
    pub fn r_at(&self, p: ThetaPoint) -> Result<f64> {
        self.check_point(p)?;
        Ok(-0.5 * self.op.amplitude_measure(p).ln())
    }

    pub fn r(&self, theta: f64) -> Result<f64> {
        self.r_at(self.check_theta(theta)?)
    }

    /// Constant `Y0` in `y ~ sign P ln|delta| + Y0` as `delta -> 0` at `pole`,
    /// with `sign = +1` at the first pole and `-1` at the second.
    pub fn pole_intercept(&self, pole: Pole) -> f64 {
        let t0 = self.op.singular_angles().first;
        let base = -self.log_coef * (2.0 * t0.sin()).ln();
        match pole {
            Pole::First => base + self.atan_coef * self.psi(t0),
            Pole::Second => -base + self.atan_coef * self.psi(TAU - t0),
        }
    }
}

/// Eigenvalue `t3 = 2 pi n / dI = n t3^(0)` (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub n: i64,
    pub t3_0: f64,
    pub t3: f64,
}

impl Eigenvalue {
    pub fn new(n: i64, primitives: &Primitives) -> Self {
        Self {
            n,
            t3_0: primitives.t3_0(),
            t3: TAU * n as f64 / primitives.jump(),
        }
    }

    pub fn physical(&self, units: &Units) -> f64 {
        units.eigenvalue(self.t3)
    }
}

pub fn eigenvalue(n: i64, a: AspectRatio) -> Eigenvalue {
    Eigenvalue::new(n, &Primitives::new(a))
}

/// `(a, t3^(0)(a))` rows.
pub fn normalized_eigenvalue_curve(a_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    a_values
        .iter()
        .map(|&a| Ok((a, Primitives::new(AspectRatio::new(a)?).t3_0())))
        .collect()
}

/// `|N(a)|^2 = 1 / [8 (a-1)^2 (a+1)^4 sqrt(a^4 - a^2 + 1)]` for `r = C0 = 1`.
pub fn normalization_squared(a: AspectRatio) -> f64 {
    let a = a.get();
    let s = (a.powi(4) - a * a + 1.0).sqrt();
    1.0 / (8.0 * (a - 1.0).powi(2) * (a + 1.0).powi(4) * s)
}

/// Real, positive `N(a)`.
pub fn normalization(a: AspectRatio) -> f64 {
    normalization_squared(a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub theta: f64,
    pub value: Complex64,
    pub distance_to_singularity: f64,
}

/// `K(theta) = N sqrt(2) (1+a)^(3/2) / sqrt((cos theta + a)|C1|) exp(i t3 y(theta))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    primitives: Primitives,
    t3: f64,
    /// `N sqrt(2) (1 + a)^(3/2)`.
    prefactor: f64,
}

impl Kernel {
    pub fn new(primitives: &Primitives, ev: &Eigenvalue) -> Self {
        Self::with_t3(primitives, ev.t3)
    }

    /// Kernel for an arbitrary real `t3`, quantized or not.
    pub fn with_t3(primitives: &Primitives, t3: f64) -> Self {
        let a = primitives.a();
        let n = normalization(primitives.operator().aspect_ratio());
        Self {
            primitives: *primitives,
            t3,
            prefactor: n * 2f64.sqrt() * (1.0 + a).powf(1.5),
        }
    }

    pub fn t3(&self) -> f64 {
        self.t3
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn primitives(&self) -> &Primitives {
        &self.primitives
    }

    pub fn amplitude_at(&self, p: ThetaPoint) -> f64 {
        self.prefactor / self.primitives.operator().amplitude_measure(p).sqrt()
    }

    pub fn value_at(&self, p: ThetaPoint) -> Result<Complex64> {
        let y = self.primitives.y_at(p)?;
        Ok(Complex64::from_polar(self.amplitude_at(p), self.t3 * y))
    }

    pub fn value(&self, theta: f64) -> Result<Complex64> {
        let p = self.primitives.check_theta(theta)?;
        self.value_at(p)
    }

    pub fn sample(&self, theta: f64) -> Result<KernelSample> {
        Ok(KernelSample {
            theta,
            value: self.value(theta)?,
            distance_to_singularity: self.primitives.operator().distance_to_singularity(theta),
        })
    }
}
