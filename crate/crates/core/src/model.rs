//! Operator coefficients, singular angles and direct application of the
//! poloidal operator `T3 = -i C0 [C1 d/dtheta + C2]`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{AspectRatio, PhysicalScale, TorusGeometry};
use crate::wavefunction::ThetaFunction;

/// `C1(theta, a) = -[(3 cos^2 theta + 1) a + 2 cos theta (a^2 + 1)]`.
#[inline]
pub fn coeff_c1(theta: f64, a: f64) -> f64 {
    let c = theta.cos();
    -((3.0 * c * c + 1.0) * a + 2.0 * c * (a * a + 1.0))
}

/// `C2(theta, a) = (9 a cos^2 + 10 a^2 cos + 2 a^3 + 4 cos + 3 a) sin / (2 (cos + a))`.
#[inline]
pub fn coeff_c2(theta: f64, a: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (9.0 * a * c * c + 10.0 * a * a * c + 2.0 * a * a * a + 4.0 * c + 3.0 * a) * s / (2.0 * (c + a))
}

/// Inner-product weight `R + r cos(theta)`.
#[inline]
pub fn weight(theta: f64, geometry: &TorusGeometry) -> f64 {
    geometry.weight(theta)
}

/// The two zeros of `C1` in `[0, 2 pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularAngles {
    /// `theta0^(1)` in `(pi/2, pi)`.
    pub first: f64,
    /// `theta0^(2) = 2 pi - theta0^(1)`.
    pub second: f64,
    /// `cos theta0`, negative.
    pub cos: f64,
}

pub fn singular_angles(a: AspectRatio) -> SingularAngles {
    ThetaOperator::new(a).singular_angles()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pole {
    First,
    Second,
}

/// An angle written as `theta0^(i) + offset`. Keeps full relative precision
/// in the offset, which matters for everything that diverges at the poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPoint {
    pub pole: Pole,
    pub offset: f64,
}

/// The poloidal operator for one aspect ratio, dimensionless (`C0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaOperator {
    a: f64,
    s: f64,
    cos0: f64,
    /// The second root of the quadratic in `cos theta`, below `-1`.
    cos0_far: f64,
    angles: SingularAngles,
}

impl ThetaOperator {
    pub fn new(a: AspectRatio) -> Self {
        let a = a.get();
        let s = (a.powi(4) - a * a + 1.0).sqrt();
        let cos0 = -a / (s + a * a + 1.0);
        let cos0_far = -(s + a * a + 1.0) / (3.0 * a);
        let first = cos0.acos();
        Self {
            a,
            s,
            cos0,
            cos0_far,
            angles: SingularAngles {
                first,
                second: TAU - first,
                cos: cos0,
            },
        }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn aspect_ratio(&self) -> AspectRatio {
        AspectRatio::new(self.a).expect("validated at construction")
    }

    /// `sqrt(a^4 - a^2 + 1)`.
    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn singular_angles(&self) -> SingularAngles {
        self.angles
    }

    #[inline]
    pub fn pole_angle(&self, pole: Pole) -> f64 {
        match pole {
            Pole::First => self.angles.first,
            Pole::Second => self.angles.second,
        }
    }

    /// Writes `theta` relative to the nearer singular angle (the first one
    /// for `theta <= pi`).
    pub fn locate(&self, theta: f64) -> ThetaPoint {
        if theta <= PI {
            ThetaPoint {
                pole: Pole::First,
                offset: theta - self.angles.first,
            }
        } else {
            ThetaPoint {
                pole: Pole::Second,
                offset: theta - self.angles.second,
            }
        }
    }

    #[inline]
    pub fn theta(&self, p: ThetaPoint) -> f64 {
        self.pole_angle(p.pole) + p.offset
    }

    pub fn distance_to_singularity(&self, theta: f64) -> f64 {
        (theta - self.angles.first).abs().min((theta - self.angles.second).abs())
    }

    pub fn c1(&self, theta: f64) -> f64 {
        coeff_c1(theta, self.a)
    }

    pub fn c2(&self, theta: f64) -> f64 {
        coeff_c2(theta, self.a)
    }

    /// `C1 = -3a (cos - cos0)(cos - cos0')` with the first factor formed as a
    /// product of sines, so that it is exact to rounding near the pole.
    pub fn c1_at(&self, p: ThetaPoint) -> f64 {
        let tp = self.pole_angle(p.pole);
        let half = 0.5 * p.offset;
        let near = -2.0 * (tp + half).sin() * half.sin();
        let c = (tp + p.offset).cos();
        -3.0 * self.a * near * (c - self.cos0_far)
    }

    /// `dC1/dtheta` at a singular angle: `+2 S sin theta0` at the first,
    /// its negative at the second.
    pub fn c1_slope(&self, pole: Pole) -> f64 {
        let v = 2.0 * self.s * self.angles.first.sin();
        match pole {
            Pole::First => v,
            Pole::Second => -v,
        }
    }

    /// `(cos theta + a) |C1(theta)|`, the square of the inverse kernel
    /// amplitude up to constants.
    pub fn amplitude_measure(&self, p: ThetaPoint) -> f64 {
        ((self.theta(p)).cos() + self.a) * self.c1_at(p).abs()
    }

    /// `(T3 phi)(theta)` for `C0 = 1`.
    pub fn apply<F: ThetaFunction + ?Sized>(&self, phi: &F, theta: f64) -> Result<Complex64> {
        let d = phi.derivative(theta)?;
        let v = phi.value(theta);
        Ok(Complex64::new(0.0, -1.0) * (d * self.c1(theta) + v * self.c2(theta)))
    }
}

/// `-i C0 [C1 phi' + C2 phi]` sampled on `grid`.
pub fn apply_t3_theta<F: ThetaFunction + ?Sized>(
    phi: &F,
    scale: &PhysicalScale,
    a: AspectRatio,
    grid: &[f64],
) -> Result<Vec<Complex64>> {
    let op = ThetaOperator::new(a);
    grid.iter()
        .map(|&t| {
            if !(0.0..=TAU).contains(&t) {
                return Err(Error::AngleOutOfRange { theta: t });
            }
            Ok(op.apply(phi, t)? * scale.c0())
        })
        .collect()
}
