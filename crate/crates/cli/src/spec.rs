use std::path::{Path, PathBuf};
use std::str::FromStr;

use cohtx::link::{TxScheme, DEFAULT_LINK_SYMBOLS};
use cohtx::metrics::DEFAULT_PAPR_WINDOW;
use cohtx::params::validate;
use cohtx::SystemConfig;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{CliError, Result};

/// Samples per CCDF curve at desk scale.
pub const DEFAULT_CCDF_SAMPLES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Equivalence,
    Ccdf,
    CrSweep,
    OsnrSweep,
    Complexity,
    SingleRun,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Equivalence => "equivalence",
            Experiment::Ccdf => "ccdf",
            Experiment::CrSweep => "cr_sweep",
            Experiment::OsnrSweep => "osnr_sweep",
            Experiment::Complexity => "complexity",
            Experiment::SingleRun => "single_run",
        }
    }

    /// Sweep axes the experiment understands.
    fn axes(self) -> &'static [&'static str] {
        match self {
            Experiment::Equivalence => &["block_symbols", "rolloff", "fiber_length"],
            Experiment::Ccdf => &["cr_db"],
            // cr_db plus one system parameter
            Experiment::CrSweep => &["cr_db", "*"],
            Experiment::OsnrSweep => &["osnr_db"],
            Experiment::Complexity => &["block_symbols", "rolloff"],
            Experiment::SingleRun => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A parameter name and the values it takes. Parsed from `name=v1,v2,...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| CliError::spec("sweep", format!("expected name=v1,v2,... got `{s}`")))?;
        let parameter = name.trim().to_string();
        let values = list
            .split(',')
            .map(|v| {
                let v = v.trim();
                v.parse::<f64>()
                    .map_err(|_| CliError::spec(&parameter, format!("`{v}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parameter, values })
    }
}

/// Integer-valued fields of [`SystemConfig`].
const INTEGER_FIELDS: &[&str] = &["sps", "block_symbols", "overlap_symbols", "seed"];

/// `config` with the JSON field `name` set to `value`, validated.
pub fn with_param(config: &SystemConfig, name: &str, value: f64) -> Result<SystemConfig> {
    let mut doc = serde_json::to_value(config).map_err(|e| CliError::spec("config", e.to_string()))?;
    let obj = doc.as_object_mut().expect("config serializes to an object");
    if !obj.contains_key(name) && name != "overlap_symbols" {
        return Err(CliError::spec(name, "not a sweepable parameter"));
    }
    let number = if INTEGER_FIELDS.contains(&name) {
        if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
            return Err(CliError::spec(name, format!("must be a non-negative integer, got {value}")));
        }
        json!(value as u64)
    } else {
        if !value.is_finite() {
            return Err(CliError::spec(name, format!("must be finite, got {value}")));
        }
        json!(value)
    };
    obj.insert(name.to_string(), number);
    let out: SystemConfig = serde_json::from_value(doc).map_err(|e| CliError::spec(name, e.to_string()))?;
    validate(&out).map_err(|e| CliError::spec(name, format!("value {value}: {e}")))?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: Experiment,
    pub config: SystemConfig,
    pub sweep: Vec<SweepAxis>,
    pub output_path: PathBuf,
    pub format: Format,
    /// Symbols per polarization for link experiments and the equivalence
    /// record.
    pub n_symbols: usize,
    /// Samples per CCDF curve.
    pub ccdf_samples: usize,
    pub papr_window: usize,
    /// Transmitter for `single_run`.
    pub scheme: TxScheme,
    /// Clipping for `single_run` and `osnr_sweep`.
    pub clip_cr_db: Option<f64>,
}

impl ExperimentSpec {
    pub fn new(name: Experiment, config: SystemConfig, output_path: impl Into<PathBuf>) -> Self {
        Self {
            name,
            config,
            sweep: Vec::new(),
            output_path: output_path.into(),
            format: Format::Csv,
            n_symbols: DEFAULT_LINK_SYMBOLS,
            ccdf_samples: DEFAULT_CCDF_SAMPLES,
            papr_window: DEFAULT_PAPR_WINDOW,
            scheme: TxScheme::JfsCd,
            clip_cr_db: None,
        }
    }

    pub fn axis(&self, parameter: &str) -> Option<&[f64]> {
        self.sweep
            .iter()
            .find(|a| a.parameter == parameter)
            .map(|a| a.values.as_slice())
    }

    /// Checks the config, the sweep axes against the experiment, and that
    /// every sweep value lies in its parameter's domain.
    pub fn validate(&self) -> Result<()> {
        validate(&self.config)?;
        let allowed = self.name.axes();
        let base = match self.name {
            Experiment::Equivalence => crate::experiments::equivalence_base(&self.config),
            _ => self.config.clone(),
        };
        let mut seen: Vec<&str> = Vec::new();
        for axis in &self.sweep {
            let p = axis.parameter.as_str();
            if seen.contains(&p) {
                return Err(CliError::spec(p, "swept twice"));
            }
            seen.push(p);
            if axis.values.is_empty() {
                return Err(CliError::spec(p, "empty value list"));
            }
            if p == "cr_db" {
                if !allowed.contains(&"cr_db") {
                    return Err(CliError::spec(p, format!("not swept by {}", self.name.as_str())));
                }
                // +inf means unclipped
                if let Some(v) = axis.values.iter().find(|v| v.is_nan() || **v == f64::NEG_INFINITY) {
                    return Err(CliError::spec(p, format!("invalid clipping ratio {v}")));
                }
                continue;
            }
            if !allowed.contains(&p) && !allowed.contains(&"*") {
                return Err(CliError::spec(p, format!("not swept by {}", self.name.as_str())));
            }
            for &v in &axis.values {
                with_param(&base, p, v)?;
            }
        }
        if self.name == Experiment::CrSweep && self.sweep.iter().filter(|a| a.parameter != "cr_db").count() > 1 {
            return Err(CliError::spec("sweep", "cr_sweep takes at most one axis besides cr_db"));
        }
        if let Some(cr) = self.clip_cr_db {
            if cr.is_nan() {
                return Err(CliError::spec("cr_db", "NaN"));
            }
        }
        if self.n_symbols == 0 || self.ccdf_samples == 0 || self.papr_window == 0 {
            return Err(CliError::spec("size", "symbol, sample and window counts must be positive"));
        }
        Ok(())
    }

    pub(crate) fn header(&self) -> Result<Header> {
        let config = serde_json::to_value(self.config.resolved()?).map_err(|e| CliError::spec("config", e.to_string()))?;
        let scheme = serde_json::to_value(self.scheme).unwrap_or(Value::Null);
        let options = json!({
            "n_symbols": self.n_symbols,
            "ccdf_samples": self.ccdf_samples,
            "papr_window": self.papr_window,
            "scheme": scheme,
            "clip_cr_db": self.clip_cr_db.map(crate::table::json_number),
            "sweep": self.sweep.iter().map(|a| json!({
                "parameter": a.parameter,
                "values": a.values.iter().map(|&v| crate::table::json_number(v)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
        Ok(Header {
            experiment: self.name.as_str(),
            seed: self.config.seed,
            config,
            options,
        })
    }
}

/// Provenance written at the top of every result file.
pub(crate) struct Header {
    pub experiment: &'static str,
    pub seed: u64,
    pub config: Value,
    pub options: Value,
}

/// Reads a JSON system config.
pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(SystemConfig::from_json(&text)?)
}
