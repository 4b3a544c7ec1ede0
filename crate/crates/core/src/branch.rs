//! The change of variables `y = f_a(theta)` and its three monotone branches.
//!
//! Shifted variables `y' = y - shift` per branch:
//!
//! | branch | theta                       | shift   | range of `y'` | `C1` |
//! |--------|-----------------------------|---------|---------------|------|
//! | D1     | `[0, theta0^(1))`           | 0       | `(-inf, 0]`   | < 0  |
//! | D2     | `(theta0^(1), theta0^(2))`  | `dI/2`  | `(-inf, inf)` | > 0  |
//! | D3     | `(theta0^(2), 2 pi]`        | `dI`    | `[0, inf)`    | < 0  |
//!
//! Inversion works in `s = ln|theta - theta0|` so that points exponentially
//! close to a pole keep full relative precision.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::eigen::Primitives;
use crate::error::{Error, Result};
use crate::geometry::AspectRatio;
use crate::model::{Pole, ThetaPoint};
use crate::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchId {
    D1,
    D2,
    D3,
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchId::D1 => "D1",
            BranchId::D2 => "D2",
            BranchId::D3 => "D3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDomain {
    pub id: BranchId,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Range of the shifted variable `y'`.
    pub y_lo: f64,
    pub y_hi: f64,
    pub shift: f64,
    pub c1_sign: f64,
}

impl BranchDomain {
    pub fn contains_y(&self, y_prime: f64) -> bool {
        y_prime >= self.y_lo && y_prime <= self.y_hi
    }
}

/// Forward and inverse maps for one aspect ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchMap {
    primitives: Primitives,
    /// Largest `y` (most negative excursion from zero is not needed) below
    /// which the asymptotic form agrees with inversion to `CALIBRATION_TOL`.
    threshold: f64,
}

/// Largest usable `|s|`; beyond this `e^s` underflows.
const S_FLOOR: f64 = -700.0;

impl BranchMap {
    pub const CALIBRATION_TOL: f64 = 1e-3;

    pub fn new(a: AspectRatio) -> Result<Self> {
        Self::from_primitives(Primitives::new(a))
    }

    pub fn from_primitives(primitives: Primitives) -> Result<Self> {
        let mut map = Self {
            primitives,
            threshold: f64::NEG_INFINITY,
        };
        map.threshold = map.calibrate()?;
        Ok(map)
    }

    pub fn primitives(&self) -> &Primitives {
        &self.primitives
    }

    /// Exponential rate `kappa` of the tails.
    pub fn rate(&self) -> f64 {
        self.primitives.rate()
    }

    /// `y` on D1 below which the asymptotic form is within
    /// [`Self::CALIBRATION_TOL`] of the inversion.
    pub fn asymptotic_threshold(&self) -> f64 {
        self.threshold
    }

    /// Branch shift uses the closed-form jump `pi Q`, not the stored one,
    /// so that the map stays a bijection regardless of how `t3` is derived.
    fn half_jump(&self) -> f64 {
        0.5 * PI * self.primitives.atan_coef()
    }

    pub fn domain(&self, id: BranchId) -> BranchDomain {
        let ang = self.primitives.operator().singular_angles();
        let h = self.half_jump();
        match id {
            BranchId::D1 => BranchDomain {
                id,
                theta_lo: 0.0,
                theta_hi: ang.first,
                y_lo: f64::NEG_INFINITY,
                y_hi: 0.0,
                shift: 0.0,
                c1_sign: -1.0,
            },
            BranchId::D2 => BranchDomain {
                id,
                theta_lo: ang.first,
                theta_hi: ang.second,
                y_lo: f64::NEG_INFINITY,
                y_hi: f64::INFINITY,
                shift: h,
                c1_sign: 1.0,
            },
            BranchId::D3 => BranchDomain {
                id,
                theta_lo: ang.second,
                theta_hi: TAU,
                y_lo: 0.0,
                y_hi: f64::INFINITY,
                shift: 2.0 * h,
                c1_sign: -1.0,
            },
        }
    }

    pub fn forward(&self, theta: f64) -> Result<f64> {
        self.primitives.y(theta)
    }

    pub fn forward_at(&self, p: ThetaPoint) -> Result<f64> {
        self.primitives.y_at(p)
    }

    pub fn classify(&self, theta: f64) -> Result<BranchDomain> {
        if !(0.0..=TAU).contains(&theta) {
            return Err(Error::AngleOutOfRange { theta });
        }
        let ang = self.primitives.operator().singular_angles();
        if theta == ang.first || theta == ang.second {
            return Err(Error::Pole { theta });
        }
        let id = if theta < ang.first {
            BranchId::D1
        } else if theta < ang.second {
            BranchId::D2
        } else {
            BranchId::D3
        };
        Ok(self.domain(id))
    }

    /// Solves `y(pole + side e^s) = target` for `s` on `(S_FLOOR, s_max]`.
    fn solve(&self, pole: Pole, side: f64, s_max: f64, target: f64) -> Result<ThetaPoint> {
        let sign = match pole {
            Pole::First => 1.0,
            Pole::Second => -1.0,
        };
        let point = |s: f64| ThetaPoint {
            pole,
            offset: side * s.exp(),
        };
        let g = |s: f64| self.primitives.y_at(point(s)).map(|y| sign * (y - target)).unwrap_or(f64::NAN);
        // y ~ sign P s + Y0 near the pole.
        let guess = (sign * target - sign * self.primitives.pole_intercept(pole)) * self.primitives.rate();
        let mut lo = (guess - 4.0).min(s_max - 1.0).max(S_FLOOR);
        while g(lo) > 0.0 {
            if lo <= S_FLOOR {
                return Err(Error::RootFinding(format!("y = {target} is beyond the representable tail")));
            }
            lo = (lo - 16.0).max(S_FLOOR);
        }
        let hi = s_max;
        if g(hi) < 0.0 {
            // Rounding at the branch end; the end point is the answer.
            return Ok(point(hi));
        }
        let s = brent(g, lo, hi, 1e-15, 200)?;
        Ok(point(s))
    }

    /// `theta` on `branch` with `y(theta) - shift = y_prime`, as an offset from
    /// the adjacent pole.
    pub fn inverse_point(&self, y_prime: f64, branch: BranchId) -> Result<ThetaPoint> {
        let dom = self.domain(branch);
        if !dom.contains_y(y_prime) || !y_prime.is_finite() {
            return Err(Error::OutOfRange {
                branch,
                value: y_prime,
            });
        }
        let ang = self.primitives.operator().singular_angles();
        let y = y_prime + dom.shift;
        match branch {
            BranchId::D1 => self.solve(Pole::First, -1.0, ang.first.ln(), y),
            BranchId::D2 if y_prime <= 0.0 => self.solve(Pole::First, 1.0, (PI - ang.first).ln(), y),
            BranchId::D2 => self.solve(Pole::Second, -1.0, (ang.second - PI).ln(), y),
            BranchId::D3 => self.solve(Pole::Second, 1.0, (TAU - ang.second).ln(), y),
        }
    }

    pub fn inverse(&self, y_prime: f64, branch: BranchId) -> Result<f64> {
        let p = self.inverse_point(y_prime, branch)?;
        Ok(self.primitives.operator().theta(p))
    }

    /// Leading-order distance `|theta - theta0|` at unshifted `y` near `pole`:
    /// `2 sin(theta0) exp(-Q Psi(theta0) / P) e^(kappa y)` at the first pole
    /// and the mirrored form at the second.
    pub fn asymptotic_offset(&self, y: f64, pole: Pole) -> f64 {
        self.asymptotic_log_offset(y, pole).exp()
    }

    pub fn asymptotic_log_offset(&self, y: f64, pole: Pole) -> f64 {
        let k = self.rate();
        let y0 = self.primitives.pole_intercept(pole);
        match pole {
            Pole::First => k * (y - y0),
            Pole::Second => -k * (y - y0),
        }
    }

    /// Asymptotic `theta` for shifted `y'` deep in a tail of `branch`.
    pub fn asymptotic_theta(&self, y_prime: f64, branch: BranchId) -> Result<f64> {
        let dom = self.domain(branch);
        if !dom.contains_y(y_prime) {
            return Err(Error::OutOfRange {
                branch,
                value: y_prime,
            });
        }
        let ang = self.primitives.operator().singular_angles();
        let y = y_prime + dom.shift;
        Ok(match branch {
            BranchId::D1 => ang.first - self.asymptotic_offset(y, Pole::First),
            BranchId::D2 if y_prime <= 0.0 => ang.first + self.asymptotic_offset(y, Pole::First),
            BranchId::D2 => ang.second - self.asymptotic_offset(y, Pole::Second),
            BranchId::D3 => ang.second + self.asymptotic_offset(y, Pole::Second),
        })
    }

    /// Relative error of the asymptotic distance against inversion on D1.
    pub fn asymptotic_error(&self, y: f64) -> Result<f64> {
        let p = self.inverse_point(y, BranchId::D1)?;
        let exact = p.offset.abs().ln();
        let approx = self.asymptotic_log_offset(y, Pole::First);
        Ok((approx - exact).exp_m1().abs())
    }

    /// Walks down from `y = 0` in steps of `1 / (4 kappa)` until the asymptotic
    /// form holds to the calibration tolerance.
    fn calibrate(&self) -> Result<f64> {
        let step = 0.25 / self.rate();
        let mut y = 0.0;
        for _ in 0..4000 {
            y -= step;
            if self.asymptotic_error(y)? < Self::CALIBRATION_TOL {
                return Ok(y);
            }
        }
        Err(Error::RootFinding("asymptotic form never reached the calibration tolerance".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(a: f64) -> BranchMap {
        BranchMap::new(AspectRatio::new(a).unwrap()).unwrap()
    }

    #[test]
    fn classify_examples() {
        let m = map(2.0);
        assert_eq!(m.classify(0.0).unwrap().id, BranchId::D1);
        assert_eq!(m.classify(PI).unwrap().id, BranchId::D2);
        assert_eq!(m.classify(TAU).unwrap().id, BranchId::D3);
        let t0 = m.primitives().operator().singular_angles().first;
        assert!(matches!(m.classify(t0), Err(Error::Pole { .. })));
        assert!(m.classify(7.0).is_err());
    }

    #[test]
    fn forward_values() {
        let m = map(2.0);
        assert_eq!(m.forward(0.0).unwrap(), 0.0);
        assert!((m.forward(TAU).unwrap() - m.primitives().jump()).abs() < 1e-15);
        let left = m.forward(PI - 1e-12).unwrap();
        let right = m.forward(PI + 1e-12).unwrap();
        assert!((left - right).abs() < 1e-11);
    }

    #[test]
    fn inverse_endpoints() {
        let m = map(2.0);
        assert_eq!(m.inverse(0.0, BranchId::D1).unwrap(), 0.0);
        assert!((m.inverse(0.0, BranchId::D2).unwrap() - PI).abs() < 1e-14);
        assert!((m.inverse(0.0, BranchId::D3).unwrap() - TAU).abs() < 1e-14);
        assert!(matches!(m.inverse(0.5, BranchId::D1), Err(Error::OutOfRange { .. })));
        assert!(matches!(m.inverse(-0.5, BranchId::D3), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn orientation_follows_c1_sign() {
        let m = map(2.0);
        for id in [BranchId::D1, BranchId::D2, BranchId::D3] {
            let d = m.domain(id);
            let n = 400;
            let mut prev: Option<f64> = None;
            for k in 1..n {
                let t = d.theta_lo + (d.theta_hi - d.theta_lo) * k as f64 / n as f64;
                let y = m.forward(t).unwrap();
                if let Some(p) = prev {
                    assert!((y - p) * d.c1_sign > 0.0, "{id} at {t}");
                }
                prev = Some(y);
            }
        }
    }

    #[test]
    fn threshold_is_calibrated() {
        let m = map(2.0);
        let y = m.asymptotic_threshold();
        assert!(y < 0.0);
        assert!(m.asymptotic_error(y).unwrap() < BranchMap::CALIBRATION_TOL);
        assert!(m.asymptotic_error(y + 0.25 / m.rate()).unwrap() >= BranchMap::CALIBRATION_TOL);
    }

    proptest! {
        #[test]
        fn round_trip(theta in 0.0..TAU, a in 1.05f64..20.0) {
            let m = map(a);
            prop_assume!(m.primitives().operator().distance_to_singularity(theta) > 1e-9);
            let d = m.classify(theta).unwrap();
            let y = m.forward(theta).unwrap() - d.shift;
            let back = m.inverse(y, d.id).unwrap();
            prop_assert!((back - theta).abs() < 1e-10, "{} -> {} -> {}", theta, y, back);
        }

        #[test]
        fn inverse_hits_target(y in -40.0f64..0.0) {
            let m = map(2.0);
            for id in [BranchId::D1, BranchId::D2] {
                let p = m.inverse_point(y, id).unwrap();
                let back = m.forward_at(p).unwrap() - m.domain(id).shift;
                prop_assert!((back - y).abs() < 1e-12 * (1.0 + y.abs()));
            }
        }
    }
}
