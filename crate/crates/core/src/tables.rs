//! Plot-ready tables and their CSV serialization.
//!
//! Floats are written with 17 significant digits; every table has a header.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use crate::eigen::{Kernel, Primitives};
use crate::error::Result;
use crate::geometry::{AspectRatio, Units};
use crate::model::coeff_c1;
use crate::spectral::SpectralCoefficients;

#[inline]
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<W: Write>(out: &mut W, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// `n,t3`.
pub fn write_eigenvalues<W: Write>(out: &mut W, rows: &[(i64, f64)]) -> io::Result<()> {
    write_rows(out, "n,t3", rows.iter().map(|&(n, t)| vec![n.to_string(), fmt_f64(t)]))
}

/// `a,t3_0`.
pub fn write_curve<W: Write>(out: &mut W, rows: &[(f64, f64)]) -> io::Result<()> {
    write_rows(out, "a,t3_0", rows.iter().map(|&(a, t)| vec![fmt_f64(a), fmt_f64(t)]))
}

/// `n,t3,re,im,abs`.
pub fn write_spectrum<W: Write>(out: &mut W, coeffs: &SpectralCoefficients) -> io::Result<()> {
    write_rows(
        out,
        "n,t3,re,im,abs",
        coeffs.entries.iter().map(|e| {
            vec![
                e.n.to_string(),
                fmt_f64(e.t3),
                fmt_f64(e.bracket.re),
                fmt_f64(e.bracket.im),
                fmt_f64(e.bracket.norm()),
            ]
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRow {
    pub theta: f64,
    pub re: f64,
    pub im: f64,
    /// `|K|^2 (cos theta + a) |C1|`, constant across rows.
    pub amplitude_law: f64,
    pub distance_to_singularity: f64,
}

/// Kernel on `theta_k = 2 pi k / samples`, `k = 0..=samples`, skipping
/// angles closer than `buffer` to a singular angle.
pub fn kernel_rows(kernel: &Kernel, samples: usize, buffer: f64, units: &Units) -> Result<Vec<KernelRow>> {
    let op = kernel.primitives().operator();
    let a = op.a();
    let mut rows = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let theta = TAU * k as f64 / samples as f64;
        let dist = op.distance_to_singularity(theta);
        if dist < buffer {
            continue;
        }
        let v = kernel.value(theta)?;
        let v = v * units.kernel(1.0);
        rows.push(KernelRow {
            theta,
            re: v.re,
            im: v.im,
            amplitude_law: v.norm_sqr() * (theta.cos() + a) * coeff_c1(theta, a).abs(),
            distance_to_singularity: dist,
        });
    }
    Ok(rows)
}

/// `theta,re,im,abs,amplitude_law,distance_to_singularity`.
pub fn write_kernel<W: Write>(out: &mut W, rows: &[KernelRow]) -> io::Result<()> {
    write_rows(
        out,
        "theta,re,im,abs,amplitude_law,distance_to_singularity",
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.theta),
                fmt_f64(r.re),
                fmt_f64(r.im),
                fmt_f64(r.re.hypot(r.im)),
                fmt_f64(r.amplitude_law),
                fmt_f64(r.distance_to_singularity),
            ]
        }),
    )
}

/// One sample of the real and imaginary primitives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveRow {
    pub theta: f64,
    pub r: f64,
    /// `2 C0 (a - 1)(a^2 - 1) I`.
    pub i_scaled: f64,
}

/// Scale factor `2 (a - 1)(a^2 - 1)` of the plotted imaginary primitive.
pub fn i_scale(a: f64) -> f64 {
    2.0 * (a - 1.0) * (a * a - 1.0)
}

/// Primitives on a uniform grid of `samples` intervals, refined geometrically
/// towards both singular angles (`theta0 +- 10^-k`, `k = 1..=12`) and with
/// rows at `pi` and the next float above it so that the jump is resolved.
pub fn primitive_rows(primitives: &Primitives, samples: usize) -> Result<Vec<PrimitiveRow>> {
    let op = primitives.operator();
    let ang = op.singular_angles();
    let mut thetas: Vec<f64> = (0..=samples).map(|k| TAU * k as f64 / samples as f64).collect();
    for pole in [ang.first, ang.second] {
        for k in 1..=12 {
            let d = 10f64.powi(-k);
            thetas.push(pole - d);
            thetas.push(pole + d);
        }
    }
    thetas.push(PI);
    thetas.push(PI.next_up());
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let scale = i_scale(primitives.a());
    thetas
        .into_iter()
        .filter(|&t| t != ang.first && t != ang.second)
        .map(|theta| {
            Ok(PrimitiveRow {
                theta,
                r: primitives.r(theta)?,
                i_scaled: scale * primitives.i(theta)?,
            })
        })
        .collect()
}

/// `theta,R`.
pub fn write_figure_real<W: Write>(out: &mut W, rows: &[PrimitiveRow]) -> io::Result<()> {
    write_rows(out, "theta,R", rows.iter().map(|r| vec![fmt_f64(r.theta), fmt_f64(r.r)]))
}

/// `theta,I_scaled`.
pub fn write_figure_imaginary<W: Write>(out: &mut W, rows: &[PrimitiveRow]) -> io::Result<()> {
    write_rows(out, "theta,I_scaled", rows.iter().map(|r| vec![fmt_f64(r.theta), fmt_f64(r.i_scaled)]))
}

/// `steps` aspect ratios evenly spaced on `[lo, hi]` with their `t3^(0)`.
pub fn eigenvalue_sweep(lo: f64, hi: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    let a_values: Vec<f64> = match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect(),
    };
    for &a in &a_values {
        AspectRatio::new(a)?;
    }
    crate::eigen::normalized_eigenvalue_curve(&a_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::Eigenvalue;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn kernel_table_header_and_first_row() {
        let p = Primitives::new(AspectRatio::new(2.0).unwrap());
        let k = Kernel::new(&p, &Eigenvalue::new(1, &p));
        let rows = kernel_rows(&k, 64, 0.05, &Units::DIMENSIONLESS).unwrap();
        assert_eq!(rows[0].theta, 0.0);
        assert_eq!(rows[0].im, 0.0);
        assert!(rows[0].re > 0.0);
        let mut buf = Vec::new();
        write_kernel(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,re,im,abs,amplitude_law,distance_to_singularity\n"));
        assert_eq!(text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn primitive_rows_resolve_jump() {
        let p = Primitives::new(AspectRatio::new(2.0).unwrap());
        let rows = primitive_rows(&p, 100).unwrap();
        let at = rows.iter().position(|r| r.theta == PI).unwrap();
        let jump = rows[at].i_scaled - rows[at + 1].i_scaled;
        assert!((jump - i_scale(2.0) * p.jump()).abs() < 1e-12);
        assert!(rows.windows(2).all(|w| w[0].theta < w[1].theta));
    }

    #[test]
    fn sweep_endpoints() {
        let rows = eigenvalue_sweep(1.1, 10.0, 100).unwrap();
        assert_eq!(rows.len(), 100);
        assert_eq!(rows[0].0, 1.1);
        assert_eq!(rows[99].0, 10.0);
        assert!(eigenvalue_sweep(0.5, 2.0, 4).is_err());
    }
}
