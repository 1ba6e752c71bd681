//! Run configuration: defaults, config file, environment and flags.
//!
//! Precedence, highest first: command-line flags, `--config` file values,
//! the `EQUIPART_SEED` environment variable (seed only), built-in defaults.

use anyhow::{bail, Context, Result};
use equipart::equipartition::LawConfig;
use equipart::microcanonical::McConfig;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

pub const ENV_SEED: &str = "EQUIPART_SEED";

/// Config-file schema: the same knobs as the flags, all optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub params: Option<BTreeMap<String, f64>>,
    pub fields: Option<Vec<String>>,
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub points: Option<usize>,
    pub e_list: Option<Vec<f64>>,
    pub samples: Option<u64>,
    pub fd_step: Option<f64>,
    pub shell: Option<f64>,
    pub h_divisor: Option<f64>,
    pub periods: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub e: Option<f64>,
    pub delta_e: Option<f64>,
    pub component: Option<String>,
    pub t_end: Option<f64>,
    pub h: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))
    }
}

/// Parse repeated `name=value` parameter overrides.
pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let Some((key, value)) = pair.split_once('=') else {
            bail!("malformed --param `{pair}`; expected name=value");
        };
        let value: f64 = value
            .parse()
            .with_context(|| format!("malformed --param value in `{pair}`"))?;
        out.insert(key.trim().to_string(), value);
    }
    Ok(out)
}

/// Seed resolution: flag, then config file, then environment, then 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(ENV_SEED) {
        Ok(text) => text
            .parse::<u64>()
            .with_context(|| format!("{ENV_SEED} must be an unsigned integer, got `{text}`")),
        Err(_) => Ok(0),
    }
}

/// Common numeric knobs after resolution.
#[derive(Debug, Clone)]
pub struct McKnobs {
    pub samples: u64,
    pub seed: u64,
    pub fd_step: f64,
    pub shell: Option<f64>,
    pub h_divisor: f64,
    pub periods: f64,
}

impl McKnobs {
    pub fn mc_config(&self) -> McConfig {
        McConfig {
            n_samples: self.samples,
            seed: self.seed,
            fd_step: self.fd_step,
            shell_thickness: self.shell,
        }
    }

    pub fn law_config(&self) -> LawConfig {
        LawConfig {
            mc: self.mc_config(),
            periods: self.periods,
            step_divisor: self.h_divisor,
        }
    }
}

/// Build a uniform grid, or adopt the explicit list when given.
pub fn energy_grid(
    e_list: &[f64],
    e_min: Option<f64>,
    e_max: Option<f64>,
    points: Option<usize>,
) -> Result<Vec<f64>> {
    if !e_list.is_empty() {
        return Ok(e_list.to_vec());
    }
    let (Some(lo), Some(hi)) = (e_min, e_max) else {
        bail!("either --e-list or both --e-min and --e-max are required");
    };
    let points = points.unwrap_or(1);
    if points == 0 {
        bail!("--points must be at least 1");
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    if hi < lo {
        bail!("--e-max must not be below --e-min");
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}
