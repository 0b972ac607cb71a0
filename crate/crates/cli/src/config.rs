//! JSON run configuration.
//!
//! ```json
//! {"d": 3, "coeffs": {"a2": 1, "a4": -2.5, "a6": 1}, "N": 500, "count": 500}
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use freudlab::bands::Thresholds;
use freudlab::{Grid, Potential};
use serde::Deserialize;
use thiserror::Error;

/// Configuration problems; all map to exit code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("d = {0} is invalid; d must be at least 1")]
    Degree(usize),
    #[error("coefficient key {0:?} is not one of a2, a4, ..., a{1}")]
    Key(String, usize),
    #[error("leading coefficient a{0} is missing")]
    MissingLeading(usize),
    #[error("leading coefficient a{0} = {1} must be positive")]
    NonPositiveLeading(usize, f64),
    #[error("N = {0} must be at least 1")]
    BadN(i64),
    #[error("invalid option: {0}")]
    Option(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    d: usize,
    coeffs: BTreeMap<String, f64>,
    #[serde(rename = "N")]
    n: i64,
    count: Option<usize>,
    grid: Option<String>,
    modulus: Option<usize>,
    window: Option<usize>,
    orders: Option<Vec<usize>>,
    out_dir: Option<PathBuf>,
    precision_bits: Option<u32>,
    a4_values: Option<Vec<f64>>,
    thresholds: Option<RawThresholds>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    one_band: f64,
    two_band: f64,
}

/// A validated configuration. Command-line flags override the optional fields.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: Potential,
    pub count: Option<usize>,
    pub grid: Option<Grid>,
    pub modulus: Option<usize>,
    pub window: Option<usize>,
    pub orders: Option<Vec<usize>>,
    pub out_dir: Option<PathBuf>,
    pub precision_bits: Option<u32>,
    pub a4_values: Option<Vec<f64>>,
    pub thresholds: Thresholds,
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let d = raw.d;
    if d == 0 {
        return Err(ConfigError::Degree(d));
    }
    let mut coeffs = vec![0.0; d];
    for (key, &value) in &raw.coeffs {
        let order = key
            .strip_prefix('a')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|o| *o >= 2 && o % 2 == 0 && *o <= 2 * d && key == &format!("a{o}"))
            .ok_or_else(|| ConfigError::Key(key.clone(), 2 * d))?;
        if !value.is_finite() {
            return Err(ConfigError::Parse(format!("{key} is not finite")));
        }
        coeffs[order / 2 - 1] = value;
    }
    let lead = format!("a{}", 2 * d);
    match raw.coeffs.get(&lead) {
        None => return Err(ConfigError::MissingLeading(2 * d)),
        Some(&v) if v <= 0.0 => return Err(ConfigError::NonPositiveLeading(2 * d, v)),
        _ => {}
    }
    if raw.n < 1 {
        return Err(ConfigError::BadN(raw.n));
    }
    let n = u32::try_from(raw.n)
        .map_err(|_| ConfigError::Option(format!("N = {} is too large", raw.n)))?;
    let potential = Potential::new(coeffs, n).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let grid = raw
        .grid
        .as_deref()
        .map(str::parse::<Grid>)
        .transpose()
        .map_err(|e| ConfigError::Option(e.to_string()))?;
    if raw.modulus == Some(0) {
        return Err(ConfigError::Option("modulus must be at least 1".into()));
    }
    if let Some(orders) = &raw.orders {
        if let Some(o) = orders.iter().find(|&&o| o % 2 == 1) {
            return Err(ConfigError::Option(format!("moment order {o} is odd")));
        }
    }
    let thresholds = match raw.thresholds {
        Some(t) if t.one_band > 0.0 && t.two_band > 0.0 => Thresholds {
            one_band: t.one_band,
            two_band: t.two_band,
        },
        Some(_) => return Err(ConfigError::Option("thresholds must be positive".into())),
        None => Thresholds::default(),
    };
    Ok(RunConfig {
        potential,
        count: raw.count,
        grid,
        modulus: raw.modulus,
        window: raw.window,
        orders: raw.orders,
        out_dir: raw.out_dir,
        precision_bits: raw.precision_bits,
        a4_values: raw.a4_values,
        thresholds,
    })
}
