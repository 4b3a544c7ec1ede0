//! Torus geometry, physical scales and numerical configuration.
//!
//! All spectral computations in this crate run in dimensionless units with
//! minor radius `r = 1` and `C0 = 1`. [`Units`] converts results to
//! physical units at the output boundary.

use crate::error::{Error, Result};

/// Ratio `a = R / r` of the major to the minor torus radius. Always `> 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AspectRatio(f64);

impl AspectRatio {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 1.0 {
            Ok(Self(a))
        } else {
            Err(Error::AspectRatio(a))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AspectRatio {
    type Error = Error;

    fn try_from(a: f64) -> Result<Self> {
        Self::new(a)
    }
}

/// A thin film bent into a torus: inner surface with radii `R`, `r`, outer
/// surface with minor radius `r + q_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGeometry {
    major_radius: f64,
    minor_radius: f64,
    film_thickness: f64,
}

impl TorusGeometry {
    /// Largest admissible film thickness as a fraction of the minor radius.
    pub const MAX_THICKNESS_RATIO: f64 = 0.1;

    pub fn new(major_radius: f64, minor_radius: f64, film_thickness: f64) -> Result<Self> {
        let (big_r, r, q) = (major_radius, minor_radius, film_thickness);
        if !(big_r.is_finite() && r.is_finite() && q.is_finite()) {
            return Err(Error::Geometry("radii and thickness must be finite".into()));
        }
        if r <= 0.0 {
            return Err(Error::Geometry(format!("minor radius must be positive, got {r}")));
        }
        if big_r <= r {
            return Err(Error::Geometry(format!(
                "major radius {big_r} must exceed minor radius {r}"
            )));
        }
        if q < 0.0 {
            return Err(Error::Geometry(format!("film thickness must be >= 0, got {q}")));
        }
        if q > Self::MAX_THICKNESS_RATIO * r {
            return Err(Error::Geometry(format!(
                "film thickness {q} exceeds r/10 = {}",
                Self::MAX_THICKNESS_RATIO * r
            )));
        }
        if r + q >= big_r {
            return Err(Error::Geometry(format!(
                "outer minor radius r + q_max = {} must stay below R = {big_r}",
                r + q
            )));
        }
        Ok(Self {
            major_radius: big_r,
            minor_radius: r,
            film_thickness: q,
        })
    }

    /// Unit minor radius, zero-thickness film.
    pub fn dimensionless(a: AspectRatio) -> Self {
        Self {
            major_radius: a.get(),
            minor_radius: 1.0,
            film_thickness: 0.0,
        }
    }

    pub fn major_radius(&self) -> f64 {
        self.major_radius
    }

    pub fn minor_radius(&self) -> f64 {
        self.minor_radius
    }

    pub fn film_thickness(&self) -> f64 {
        self.film_thickness
    }

    pub fn aspect_ratio(&self) -> AspectRatio {
        AspectRatio(self.major_radius / self.minor_radius)
    }

    /// Surface measure `R + r cos(theta)` of the inner torus.
    #[inline]
    pub fn weight(&self, theta: f64) -> f64 {
        self.major_radius + self.minor_radius * theta.cos()
    }
}

/// Overall scale `C0 = hbar r / (10 m_p)` of the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScale {
    c0: f64,
}

impl PhysicalScale {
    pub fn dimensionless() -> Self {
        Self { c0: 1.0 }
    }

    pub fn from_constants(hbar: f64, particle_mass: f64, minor_radius: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", particle_mass), ("minor radius", minor_radius)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Scale(format!("{name} must be positive, got {v}")));
            }
        }
        Self::from_c0(hbar * minor_radius / (10.0 * particle_mass))
    }

    pub fn from_c0(c0: f64) -> Result<Self> {
        if c0.is_finite() && c0 > 0.0 {
            Ok(Self { c0 })
        } else {
            Err(Error::Scale(format!("C0 must be positive, got {c0}")))
        }
    }

    #[inline]
    pub fn c0(&self) -> f64 {
        self.c0
    }
}

impl Default for PhysicalScale {
    fn default() -> Self {
        Self::dimensionless()
    }
}

/// Conversion from the dimensionless working units (`r = 1`, `C0 = 1`) to
/// physical ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub minor_radius: f64,
    pub c0: f64,
}

impl Units {
    pub const DIMENSIONLESS: Units = Units {
        minor_radius: 1.0,
        c0: 1.0,
    };

    pub fn new(geometry: &TorusGeometry, scale: &PhysicalScale) -> Self {
        Self {
            minor_radius: geometry.minor_radius(),
            c0: scale.c0(),
        }
    }

    /// Eigenvalues and operator outputs carry one power of `C0`.
    pub fn eigenvalue(&self, t3: f64) -> f64 {
        self.c0 * t3
    }

    /// The primitive `I`, the jump and the variable `y` scale as `1 / C0`.
    pub fn primitive(&self, value: f64) -> f64 {
        value / self.c0
    }

    pub fn normalization_squared(&self, n2: f64) -> f64 {
        n2 / (self.minor_radius * self.c0)
    }

    pub fn kernel(&self, value: f64) -> f64 {
        value / (self.minor_radius * self.c0).sqrt()
    }

    /// Brackets pick up the weight factor `r` and the kernel factor
    /// `1 / sqrt(r C0)`.
    pub fn bracket(&self, value: f64) -> f64 {
        value * (self.minor_radius / self.c0).sqrt()
    }
}

/// Tolerances for the adaptive quadratures behind the projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Distance to a singular angle inside which the projection switches to
    /// the `u^2 = |theta - theta0|` substitution.
    pub singularity_buffer: f64,
}

impl QuadratureConfig {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        singularity_buffer: f64,
    ) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            singularity_buffer,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::QuadratureConfig(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::QuadratureConfig(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::QuadratureConfig("max_subdivisions must be >= 1".into()));
        }
        if !(self.singularity_buffer > 0.0 && self.singularity_buffer < 0.5) {
            return Err(Error::QuadratureConfig(format!(
                "singularity_buffer must lie in (0, 0.5), got {}",
                self.singularity_buffer
            )));
        }
        Ok(())
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
            singularity_buffer: 0.05,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aspect_ratio_rejects_a_le_one() {
        assert!(AspectRatio::new(1.0).is_err());
        assert!(AspectRatio::new(0.9).is_err());
        assert!(AspectRatio::new(f64::NAN).is_err());
        assert_eq!(AspectRatio::new(2.0).unwrap().get(), 2.0);
    }

    #[test]
    fn geometry_invariants() {
        assert!(TorusGeometry::new(3.0, 1.0, 0.1).is_ok());
        assert!(TorusGeometry::new(1.0, 1.0, 0.0).is_err());
        assert!(TorusGeometry::new(3.0, 1.0, 0.2).is_err());
        // r + q_max < R
        assert!(TorusGeometry::new(1.05, 1.0, 0.06).is_err());
        assert!(TorusGeometry::new(3.0, -1.0, 0.0).is_err());
        let g = TorusGeometry::new(4.0, 2.0, 0.1).unwrap();
        assert_eq!(g.aspect_ratio().get(), 2.0);
    }

    #[test]
    fn weight_values() {
        let g = TorusGeometry::dimensionless(AspectRatio::new(2.0).unwrap());
        assert_eq!(g.weight(0.0), 3.0);
        assert!((g.weight(std::f64::consts::PI) - 1.0).abs() < 1e-15);
        assert!((g.weight(std::f64::consts::FRAC_PI_2) - 2.0).abs() < 1e-15);
        let g = TorusGeometry::new(5.0, 2.0, 0.0).unwrap();
        assert_eq!(g.weight(0.0), 7.0);
        assert!((g.weight(std::f64::consts::PI) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn scale_from_constants() {
        let s = PhysicalScale::from_constants(2.0, 0.5, 3.0).unwrap();
        assert!((s.c0() - 1.2).abs() < 1e-15);
        assert!(PhysicalScale::from_c0(0.0).is_err());
        assert_eq!(PhysicalScale::default().c0(), 1.0);
    }

    #[test]
    fn quadrature_config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        assert!(QuadratureConfig::new(0.0, 1e-8, 10, 0.1).is_err());
        assert!(QuadratureConfig::new(1e-8, -1.0, 10, 0.1).is_err());
        assert!(QuadratureConfig::new(1e-8, 1e-8, 10, 0.5).is_err());
        assert!(QuadratureConfig::new(1e-8, 1e-8, 0, 0.1).is_err());
    }
}
