//! Periodic wavefunctions on `[0, 2 pi]`: finite Fourier series or uniformly
//! sampled grids with trigonometric interpolation.

use std::f64::consts::TAU;
use std::io::BufRead;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// A complex function of the poloidal angle with a derivative.
pub trait ThetaFunction: Sync {
    fn value(&self, theta: f64) -> Complex64;
    fn derivative(&self, theta: f64) -> Result<Complex64>;
}

impl<T: ThetaFunction + ?Sized> ThetaFunction for &T {
    fn value(&self, theta: f64) -> Complex64 {
        (**self).value(theta)
    }

    fn derivative(&self, theta: f64) -> Result<Complex64> {
        (**self).derivative(theta)
    }
}

/// `sum_m c_m exp(i m theta)` over a finite set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    modes: Vec<(i64, Complex64)>,
}

impl FourierSeries {
    /// Duplicate modes are summed; zero coefficients are kept.
    pub fn new(modes: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut modes: Vec<(i64, Complex64)> = modes.into_iter().collect();
        modes.sort_by_key(|&(m, _)| m);
        let mut merged: Vec<(i64, Complex64)> = Vec::with_capacity(modes.len());
        for (m, c) in modes {
            match merged.last_mut() {
                Some((last, acc)) if *last == m => *acc += c,
                _ => merged.push((m, c)),
            }
        }
        Self { modes: merged }
    }

    pub fn mode(m: i64) -> Self {
        Self::new([(m, Complex64::new(1.0, 0.0))])
    }

    pub fn zero() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn modes(&self) -> &[(i64, Complex64)] {
        &self.modes
    }

    pub fn max_mode(&self) -> i64 {
        self.modes.iter().map(|&(m, _)| m.abs()).max().unwrap_or(0)
    }

    /// `sum (1 + m^2) |c_m|^2`, proportional to the squared H^1 norm.
    pub fn h1_norm_squared(&self) -> f64 {
        self.modes
            .iter()
            .map(|&(m, c)| (1.0 + (m * m) as f64) * c.norm_sqr())
            .sum()
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|&(m, c)| c * Complex64::from_polar(1.0, m as f64 * theta))
            .sum()
    }

    pub fn eval_derivative(&self, theta: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|&(m, c)| c * Complex64::new(0.0, m as f64) * Complex64::from_polar(1.0, m as f64 * theta))
            .sum()
    }
}

/// Samples on the uniform grid `theta_k = 2 pi k / N`, `k = 0..=N`, with
/// equal values at both ends. Evaluated through the trigonometric
/// interpolant, so differentiation is spectral.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    thetas: Vec<f64>,
    values: Vec<Complex64>,
    interpolant: FourierSeries,
    /// Relative weight of `|m c_m|` in the upper third of the spectrum.
    derivative_tail: f64,
}

impl SampledGrid {
    pub const SPACING_TOL: f64 = 1e-9;
    pub const DERIVATIVE_TOL: f64 = 1e-8;

    pub fn new(thetas: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if thetas.len() != values.len() {
            return Err(Error::Wavefunction("theta and value columns differ in length".into()));
        }
        if thetas.len() < 4 {
            return Err(Error::Wavefunction("a grid needs at least 4 rows".into()));
        }
        let n = thetas.len() - 1;
        if thetas[0].abs() > Self::SPACING_TOL {
            return Err(Error::Wavefunction(format!("first theta must be 0, got {}", thetas[0])));
        }
        if (thetas[n] - TAU).abs() > Self::SPACING_TOL {
            return Err(Error::Wavefunction(format!("last theta must be 2pi, got {}", thetas[n])));
        }
        let h = TAU / n as f64;
        for (k, w) in thetas.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::Wavefunction(format!(
                    "theta must be strictly increasing (rows {} and {})",
                    k + 1,
                    k + 2
                )));
            }
        }
        for (k, &t) in thetas.iter().enumerate() {
            if (t - k as f64 * h).abs() > Self::SPACING_TOL {
                return Err(Error::Wavefunction(format!(
                    "grid is not uniform: theta[{k}] = {t}, expected {}",
                    k as f64 * h
                )));
            }
        }
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if (values[0] - values[n]).norm() > 1e-12 * scale.max(1.0) {
            return Err(Error::Wavefunction(format!(
                "grid is not periodic: value at 0 is {} but at 2pi is {}",
                values[0], values[n]
            )));
        }

        let mut buf: Vec<Complex64> = values[..n].to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let inv_n = 1.0 / n as f64;
        let mut modes = Vec::with_capacity(n + 1);
        for (k, c) in buf.iter().enumerate() {
            let c = c * inv_n;
            let k = k as i64;
            let n = n as i64;
            if 2 * k < n {
                modes.push((k, c));
            } else if 2 * k > n {
                modes.push((k - n, c));
            } else {
                // Split the Nyquist mode symmetrically.
                modes.push((k, c * 0.5));
                modes.push((-k, c * 0.5));
            }
        }
        let interpolant = FourierSeries::new(modes);

        let weighted: Vec<(i64, f64)> = interpolant
            .modes()
            .iter()
            .map(|&(m, c)| (m, m.abs() as f64 * c.norm()))
            .collect();
        let peak = weighted.iter().map(|&(_, w)| w).fold(0.0, f64::max);
        let cutoff = n as i64 / 3;
        let tail = weighted
            .iter()
            .filter(|&&(m, _)| m.abs() >= cutoff.max(1))
            .map(|&(_, w)| w)
            .fold(0.0, f64::max);
        let derivative_tail = if peak > 0.0 { tail / peak } else { 0.0 };

        Ok(Self {
            thetas,
            values,
            interpolant,
            derivative_tail,
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn interpolant(&self) -> &FourierSeries {
        &self.interpolant
    }

    pub fn derivative_tail(&self) -> f64 {
        self.derivative_tail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Wavefunction {
    Fourier(FourierSeries),
    Grid(SampledGrid),
}

impl Wavefunction {
    pub fn mode(m: i64) -> Self {
        Self::Fourier(FourierSeries::mode(m))
    }

    pub fn zero() -> Self {
        Self::Fourier(FourierSeries::zero())
    }

    /// Samples `f` on a uniform grid of `n` intervals.
    pub fn sample<F: Fn(f64) -> Complex64>(f: F, n: usize) -> Result<Self> {
        let thetas: Vec<f64> = (0..=n).map(|k| TAU * k as f64 / n as f64).collect();
        let mut values: Vec<Complex64> = thetas.iter().map(|&t| f(t)).collect();
        values[n] = values[0];
        Ok(Self::Grid(SampledGrid::new(thetas, values)?))
    }

    /// Reads the CSV wavefunction format: a header line `fourier` followed by
    /// `m,re,im` rows, or `grid` followed by `theta,re,im` rows.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        enum Kind {
            Fourier,
            Grid,
        }
        let mut kind = None;
        let mut fourier = Vec::new();
        let (mut thetas, mut values) = (Vec::new(), Vec::new());
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(k) = &kind else {
                kind = Some(match line.to_ascii_lowercase().as_str() {
                    "fourier" => Kind::Fourier,
                    "grid" => Kind::Grid,
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("expected header `fourier` or `grid`, found `{other}`"),
                        })
                    }
                });
                continue;
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 comma-separated fields, found {}", fields.len()),
                });
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("invalid {what} `{s}`"),
                    })
            };
            let value = Complex64::new(num(fields[1], "real part")?, num(fields[2], "imaginary part")?);
            match k {
                Kind::Fourier => {
                    let m = fields[0].parse::<i64>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid mode index `{}`", fields[0]),
                    })?;
                    fourier.push((m, value));
                }
                Kind::Grid => {
                    thetas.push(num(fields[0], "theta")?);
                    values.push(value);
                }
            }
        }
        match kind {
            None => Err(Error::Parse {
                line: 0,
                message: "empty wavefunction file".into(),
            }),
            Some(Kind::Fourier) => Ok(Self::Fourier(FourierSeries::new(fourier))),
            Some(Kind::Grid) => Ok(Self::Grid(SampledGrid::new(thetas, values)?)),
        }
    }
}

impl ThetaFunction for FourierSeries {
    fn value(&self, theta: f64) -> Complex64 {
        self.eval(theta)
    }

    fn derivative(&self, theta: f64) -> Result<Complex64> {
        Ok(self.eval_derivative(theta))
    }
}

impl ThetaFunction for Wavefunction {
    fn value(&self, theta: f64) -> Complex64 {
        match self {
            Self::Fourier(f) => f.eval(theta),
            Self::Grid(g) => g.interpolant.eval(theta),
        }
    }

    fn derivative(&self, theta: f64) -> Result<Complex64> {
        match self {
            Self::Fourier(f) => Ok(f.eval_derivative(theta)),
            Self::Grid(g) => {
                if g.derivative_tail > SampledGrid::DERIVATIVE_TOL {
                    return Err(Error::Accuracy {
                        achieved: g.derivative_tail,
                        requested: SampledGrid::DERIVATIVE_TOL,
                    });
                }
                Ok(g.interpolant.eval_derivative(theta))
            }
        }
    }
}

/// Any closure of `theta`, differentiated with an eighth-order central
/// difference of step `step`.
pub struct FiniteDifference<F> {
    f: F,
    step: f64,
}

impl<F: Fn(f64) -> Complex64 + Sync> FiniteDifference<F> {
    pub fn new(f: F, step: f64) -> Self {
        Self { f, step }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> ThetaFunction for FiniteDifference<F> {
    fn value(&self, theta: f64) -> Complex64 {
        (self.f)(theta)
    }

    fn derivative(&self, theta: f64) -> Result<Complex64> {
        const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let h = self.step;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, w) in W.iter().enumerate() {
            let dx = (k + 1) as f64 * h;
            acc += (((self.f)(theta + dx)) - ((self.f)(theta - dx))) * *w;
        }
        Ok(acc / h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn fourier_eval_and_derivative() {
        let f = FourierSeries::new([(1, Complex64::new(1.0, 0.0)), (-2, Complex64::new(0.0, 2.0))]);
        let t = 0.7;
        let expect = Complex64::from_polar(1.0, t) + Complex64::new(0.0, 2.0) * Complex64::from_polar(1.0, -2.0 * t);
        assert!((f.eval(t) - expect).norm() < 1e-15);
        let d = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, t)
            + Complex64::new(0.0, 2.0) * Complex64::new(0.0, -2.0) * Complex64::from_polar(1.0, -2.0 * t);
        assert!((f.eval_derivative(t) - d).norm() < 1e-14);
        assert_eq!(f.max_mode(), 2);
    }

    #[test]
    fn duplicate_modes_merge() {
        let f = FourierSeries::new([(3, Complex64::new(1.0, 0.0)), (3, Complex64::new(2.0, 0.0))]);
        assert_eq!(f.modes(), &[(3, Complex64::new(3.0, 0.0))]);
    }

    #[test]
    fn grid_reproduces_band_limited_function() {
        let f = |t: f64| Complex64::new((3.0 * t).cos(), (2.0 * t).sin()) + 0.5;
        let w = Wavefunction::sample(f, 32).unwrap();
        for &t in &[0.1, 1.3, 4.0, 6.1] {
            assert!((w.value(t) - f(t)).norm() < 1e-13);
            let d = Complex64::new(-3.0 * (3.0 * t).sin(), 2.0 * (2.0 * t).cos());
            assert!((w.derivative(t).unwrap() - d).norm() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_derivative_is_an_accuracy_failure() {
        let f = |t: f64| Complex64::new((1.0 / (1.1 + t.cos())).exp(), 0.0);
        let w = Wavefunction::sample(f, 16).unwrap();
        assert!(matches!(w.derivative(0.3), Err(Error::Accuracy { .. })));
        let fine = Wavefunction::sample(f, 1024).unwrap();
        assert!(fine.derivative(0.3).is_ok());
    }

    #[test]
    fn grid_validation() {
        let thetas: Vec<f64> = (0..=8).map(|k| TAU * k as f64 / 8.0).collect();
        let mut values = vec![Complex64::new(1.0, 0.0); 9];
        values[8] = Complex64::new(2.0, 0.0);
        assert!(SampledGrid::new(thetas.clone(), values).is_err());
        let mut bad = thetas.clone();
        bad[3] += 0.01;
        assert!(SampledGrid::new(bad, vec![Complex64::new(1.0, 0.0); 9]).is_err());
        assert!(SampledGrid::new(thetas[..8].to_vec(), vec![Complex64::new(1.0, 0.0); 8]).is_err());
    }

    #[test]
    fn csv_fourier_and_grid() {
        let w = Wavefunction::from_csv(Cursor::new("fourier\n0,1,0\n# comment\n2, 0.5, -1\n")).unwrap();
        match &w {
            Wavefunction::Fourier(f) => assert_eq!(f.modes().len(), 2),
            _ => panic!("expected fourier"),
        }
        let mut text = String::from("grid\n");
        for k in 0..=8 {
            let t = TAU * k as f64 / 8.0;
            text.push_str(&format!("{t},{},0\n", t.cos()));
        }
        let g = Wavefunction::from_csv(Cursor::new(text)).unwrap();
        assert!((g.value(0.4) - Complex64::new(0.4f64.cos(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = Wavefunction::from_csv(Cursor::new("fourier\n0,1,0\n1,abc,0\n")).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                message: "invalid real part `abc`".into()
            }
        );
        let err = Wavefunction::from_csv(Cursor::new("spline\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Wavefunction::from_csv(Cursor::new("grid\n0,1\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn finite_difference_is_high_order() {
        let fd = FiniteDifference::new(|t: f64| Complex64::new(t.sin(), t.exp()), 1e-2);
        let d = fd.derivative(0.5).unwrap();
        assert!((d - Complex64::new(0.5f64.cos(), 0.5f64.exp())).norm() < 1e-13);
    }
}
