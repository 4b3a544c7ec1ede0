//! Run configuration: flags merged over an optional `key=value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use toroidal::{AspectRatio, PhysicalScale, QuadratureConfig, SpectralContext, TorusGeometry, Units};

use crate::UsageError;

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Line-oriented `key=value` file; flags take precedence over its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Aspect ratio R/r (must satisfy a > 1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,

    /// Reduced Planck constant (physical mode).
    #[arg(long, global = true)]
    pub hbar: Option<f64>,

    /// Particle mass m_p (physical mode).
    #[arg(long, global = true)]
    pub mass: Option<f64>,

    /// Minor radius r (physical mode).
    #[arg(long = "minor-radius", global = true)]
    pub minor_radius: Option<f64>,

    /// Major radius R (physical mode).
    #[arg(long = "major-radius", global = true)]
    pub major_radius: Option<f64>,

    #[arg(long = "abs-tol", global = true)]
    pub abs_tol: Option<f64>,

    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<f64>,

    #[arg(long = "max-subdivisions", global = true)]
    pub max_subdivisions: Option<usize>,

    /// Distance to a singular angle inside which projections change variables.
    #[arg(long = "singularity-buffer", global = true)]
    pub singularity_buffer: Option<f64>,

    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

const KEYS: [&str; 10] = [
    "a",
    "hbar",
    "mass",
    "minor-radius",
    "major-radius",
    "abs-tol",
    "rel-tol",
    "max-subdivisions",
    "singularity-buffer",
    "out",
];

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(UsageError(format!("{}:{}: expected key=value", path.display(), idx + 1)));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(UsageError(format!("{}:{}: unknown key `{key}`", path.display(), idx + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn fill<T: std::str::FromStr>(slot: &mut Option<T>, map: &BTreeMap<String, String>, key: &str) -> Result<(), UsageError> {
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(v.parse().map_err(|_| UsageError(format!("config key `{key}`: invalid value `{v}`")))?);
        }
    }
    Ok(())
}

impl GlobalArgs {
    /// Fills every unset flag from the config file, if one was given.
    pub fn merged(mut self) -> Result<Self, UsageError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let map = read_config(&path)?;
        fill(&mut self.a, &map, "a")?;
        fill(&mut self.hbar, &map, "hbar")?;
        fill(&mut self.mass, &map, "mass")?;
        fill(&mut self.minor_radius, &map, "minor-radius")?;
        fill(&mut self.major_radius, &map, "major-radius")?;
        fill(&mut self.abs_tol, &map, "abs-tol")?;
        fill(&mut self.rel_tol, &map, "rel-tol")?;
        fill(&mut self.max_subdivisions, &map, "max-subdivisions")?;
        fill(&mut self.singularity_buffer, &map, "singularity-buffer")?;
        fill(&mut self.out, &map, "out")?;
        Ok(self)
    }
}

/// Validated settings shared by the subcommands.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub geometry: TorusGeometry,
    pub scale: PhysicalScale,
    pub quad: QuadratureConfig,
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, UsageError> {
        let physical = [args.hbar, args.mass, args.minor_radius, args.major_radius];
        let given = physical.iter().filter(|v| v.is_some()).count();
        let (geometry, scale) = match given {
            0 => {
                let a = args.a.ok_or_else(|| UsageError("--a is required (aspect ratio, a > 1)".into()))?;
                let a = AspectRatio::new(a).map_err(UsageError::from)?;
                (TorusGeometry::dimensionless(a), PhysicalScale::dimensionless())
            }
            4 => {
                let [hbar, mass, r, big_r] = physical.map(Option::unwrap);
                AspectRatio::new(big_r / r).map_err(UsageError::from)?;
                let geometry = TorusGeometry::new(big_r, r, 0.0).map_err(UsageError::from)?;
                if let Some(a) = args.a {
                    let derived = geometry.aspect_ratio().get();
                    if (a - derived).abs() > 1e-12 * derived {
                        return Err(UsageError(format!(
                            "--a {a} conflicts with R/r = {derived} from the physical parameters"
                        )));
                    }
                }
                let scale = PhysicalScale::from_constants(hbar, mass, r).map_err(UsageError::from)?;
                (geometry, scale)
            }
            _ => {
                return Err(UsageError(
                    "physical mode needs all of --hbar, --mass, --minor-radius, --major-radius".into(),
                ))
            }
        };
        let defaults = QuadratureConfig::default();
        let quad = QuadratureConfig::new(
            args.abs_tol.unwrap_or(defaults.abs_tol),
            args.rel_tol.unwrap_or(defaults.rel_tol),
            args.max_subdivisions.unwrap_or(defaults.max_subdivisions),
            args.singularity_buffer.unwrap_or(defaults.singularity_buffer),
        )
        .map_err(UsageError::from)?;
        Ok(Self {
            geometry,
            scale,
            quad,
        })
    }

    pub fn aspect_ratio(&self) -> AspectRatio {
        self.geometry.aspect_ratio()
    }

    pub fn units(&self) -> Units {
        Units::new(&self.geometry, &self.scale)
    }

    pub fn context(&self) -> Result<SpectralContext, UsageError> {
        SpectralContext::new(self.geometry, self.scale, self.quad).map_err(UsageError::from)
    }
}
