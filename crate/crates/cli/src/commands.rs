use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use num_complex::Complex64;
use toroidal::spectral::{SpectralCoefficients, SpectralEntry, RELATIVE_FLOOR};
use toroidal::tables::{self, eigenvalue_sweep, kernel_rows, primitive_rows};
use toroidal::verify::{Level, Verifier};
use toroidal::{Eigenvalue, Primitives, ThetaFunction, Wavefunction};

use crate::config::{GlobalArgs, RunConfig};
use crate::UsageError;

/// Largest route disagreement accepted by `project --check`.
const CHECK_TOL: f64 = 1e-6;

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_sweep(spec: &str) -> Result<(f64, f64, usize), UsageError> {
    let bad = || UsageError(format!("--a-sweep expects lo:hi:steps, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    let steps: usize = steps.parse().map_err(|_| bad())?;
    if lo <= 1.0 || hi <= 1.0 {
        return Err(UsageError(format!("aspect ratio must satisfy a > 1, sweep bounds are {lo} and {hi}")));
    }
    if !(hi >= lo) || steps == 0 {
        return Err(bad());
    }
    Ok((lo, hi, steps))
}

#[derive(Debug, Args)]
pub struct EigenvaluesArgs {
    #[arg(long = "n-min", default_value_t = -5, allow_negative_numbers = true)]
    pub n_min: i64,
    #[arg(long = "n-max", default_value_t = 5, allow_negative_numbers = true)]
    pub n_max: i64,
    /// Tabulate the normalized eigenvalue over `lo:hi:steps` aspect ratios instead.
    #[arg(long = "a-sweep", value_name = "LO:HI:STEPS")]
    pub a_sweep: Option<String>,
}

pub fn eigenvalues(global: &GlobalArgs, args: &EigenvaluesArgs) -> Result<ExitCode> {
    if let Some(spec) = &args.a_sweep {
        let (lo, hi, steps) = parse_sweep(spec)?;
        let rows = eigenvalue_sweep(lo, hi, steps)?;
        let mut out = open_output(global.out.as_deref())?;
        tables::write_curve(&mut out, &rows)?;
        out.flush()?;
        return Ok(ExitCode::SUCCESS);
    }
    if args.n_min > args.n_max {
        return Err(UsageError(format!("--n-min {} exceeds --n-max {}", args.n_min, args.n_max)).into());
    }
    let cfg = RunConfig::resolve(global)?;
    let prims = Primitives::new(cfg.aspect_ratio());
    let units = cfg.units();
    let rows: Vec<(i64, f64)> = (args.n_min..=args.n_max)
        .map(|n| (n, Eigenvalue::new(n, &prims).physical(&units)))
        .collect();
    let mut out = open_output(global.out.as_deref())?;
    tables::write_eigenvalues(&mut out, &rows)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    /// Number of uniform intervals on [0, 2pi] (at least 16).
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Rows closer than this to a singular angle are omitted.
    #[arg(long, default_value_t = 0.05)]
    pub buffer: f64,
}

pub fn kernel(global: &GlobalArgs, args: &KernelArgs) -> Result<ExitCode> {
    if args.samples < 16 {
        return Err(UsageError(format!("--samples must be at least 16, got {}", args.samples)).into());
    }
    if !(args.buffer >= 0.0 && args.buffer < 0.5) {
        return Err(UsageError(format!("--buffer must lie in [0, 0.5), got {}", args.buffer)).into());
    }
    let cfg = RunConfig::resolve(global)?;
    let ctx = cfg.context()?;
    let k = ctx.kernel(&ctx.eigenvalue(args.n));
    let rows = kernel_rows(&k, args.samples, args.buffer.max(f64::MIN_POSITIVE), &cfg.units())?;
    let mut out = open_output(global.out.as_deref())?;
    tables::write_kernel(&mut out, &rows)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Single quantum number.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "n_max", required_unless_present = "n_max")]
    pub n: Option<i64>,
    /// All quantum numbers with |n| <= n_max.
    #[arg(long = "n-max")]
    pub n_max: Option<i64>,
    /// Wavefunction file (CSV) or `preset:m` for the Fourier mode exp(i m theta).
    #[arg(long)]
    pub phi: String,
    /// Recompute every bracket through the phase-variable route and report the
    /// largest relative deviation.
    #[arg(long)]
    pub check: bool,
}

fn load_phi(spec: &str) -> Result<Wavefunction> {
    if let Some(m) = spec.strip_prefix("preset:") {
        let m: i64 = m
            .parse()
            .map_err(|_| UsageError(format!("preset expects an integer mode, got `{m}`")))?;
        return Ok(Wavefunction::mode(m));
    }
    let file = File::open(spec).map_err(|e| UsageError(format!("cannot open wavefunction {spec}: {e}")))?;
    Wavefunction::from_csv(BufReader::new(file)).map_err(|e| UsageError(format!("{spec}: {e}")).into())
}

pub fn project(global: &GlobalArgs, args: &ProjectArgs) -> Result<ExitCode> {
    let cfg = RunConfig::resolve(global)?;
    let ctx = cfg.context()?;
    let phi = load_phi(&args.phi)?;
    let f = |t: f64| phi.value(t);
    let coeffs = match (args.n, args.n_max) {
        (Some(n), _) => {
            let ev = ctx.eigenvalue(n);
            SpectralCoefficients {
                a: cfg.aspect_ratio().get(),
                n_max: n.abs(),
                entries: vec![SpectralEntry {
                    n,
                    t3: ev.physical(&cfg.units()),
                    bracket: ctx.project_theta(&f, &ev)?,
                }],
            }
        }
        (None, Some(n_max)) if n_max >= 0 => ctx.to_spectrum(&f, n_max)?,
        (None, Some(n_max)) => return Err(UsageError(format!("--n-max must be >= 0, got {n_max}")).into()),
        (None, None) => unreachable!("clap requires one of --n, --n-max"),
    };
    let mut out = open_output(global.out.as_deref())?;
    tables::write_spectrum(&mut out, &coeffs)?;
    out.flush()?;
    if !args.check {
        return Ok(ExitCode::SUCCESS);
    }
    let mut worst = 0.0f64;
    for e in &coeffs.entries {
        let y: Complex64 = ctx.project_y(&f, &ctx.eigenvalue(e.n))?;
        let scale = e.bracket.norm().max(y.norm()).max(RELATIVE_FLOOR);
        worst = worst.max((y - e.bracket).norm() / scale);
    }
    let verdict = if worst < CHECK_TOL { "PASS" } else { "FAIL" };
    eprintln!(
        "{verdict} check max_rel_deviation={worst:.3e} tol={CHECK_TOL:.1e} brackets={}",
        coeffs.entries.len()
    );
    Ok(if worst < CHECK_TOL { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Real primitive R against theta.
    #[value(name = "2a")]
    RealPrimitive,
    /// Scaled imaginary primitive 2(a-1)(a^2-1) I against theta.
    #[value(name = "2b")]
    ImaginaryPrimitive,
    /// Normalized eigenvalue against the aspect ratio.
    #[value(name = "3")]
    EigenvalueCurve,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(long, value_enum)]
    pub which: Figure,
    /// Uniform theta intervals for the primitive figures.
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    /// Aspect-ratio range of the eigenvalue curve.
    #[arg(long = "a-sweep", default_value = "1.1:10:100", value_name = "LO:HI:STEPS")]
    pub a_sweep: String,
}

pub fn figures(global: &GlobalArgs, args: &FiguresArgs) -> Result<ExitCode> {
    let mut out = open_output(global.out.as_deref())?;
    match args.which {
        Figure::EigenvalueCurve => {
            let (lo, hi, steps) = parse_sweep(&args.a_sweep)?;
            tables::write_curve(&mut out, &eigenvalue_sweep(lo, hi, steps)?)?;
        }
        which => {
            if args.samples < 16 {
                return Err(UsageError(format!("--samples must be at least 16, got {}", args.samples)).into());
            }
            let cfg = RunConfig::resolve(global)?;
            let rows = primitive_rows(&Primitives::new(cfg.aspect_ratio()), args.samples)?;
            if which == Figure::RealPrimitive {
                tables::write_figure_real(&mut out, &rows)?;
            } else {
                tables::write_figure_imaginary(&mut out, &rows)?;
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "fast")]
    pub level: LevelArg,
    /// Multiply the stored jump by this factor before verifying.
    #[arg(long = "perturb-jump", hide = true)]
    pub perturb_jump: Option<f64>,
}

pub fn verify(global: &GlobalArgs, args: &VerifyArgs) -> Result<ExitCode> {
    let level = match args.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let mut verifier = Verifier::new(level);
    if let Some(f) = args.perturb_jump {
        if !(f.is_finite() && f > 0.0) {
            return Err(UsageError(format!("--perturb-jump must be positive, got {f}")).into());
        }
        verifier = verifier.with_jump_factor(f);
    }
    let reports = verifier.run();
    let mut out = open_output(global.out.as_deref())?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} of {} criteria passed", reports.len() - failed, reports.len())?;
    out.flush()?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
