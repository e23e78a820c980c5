//! Fully resolved run configurations. Each output file starts with its
//! configuration as `#`-prefixed TOML, which `confreg replay` reads back.

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Threshold(ThresholdConfig),
    Simulate(SimulateConfig),
    Fwer(FwerConfig),
    Constants(ConstantsConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub input: String,
    pub methods: Vec<String>,
    pub scheme: String,
    pub phi: String,
    pub alpha: f64,
    pub delta: f64,
    pub alphas: Vec<f64>,
    /// 0 selects exact enumeration.
    pub draws: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub lower: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_det: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_null: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub profile: String,
    pub m: usize,
    pub n: usize,
    pub b_grid: Vec<f64>,
    pub reps: usize,
    pub draws: usize,
    pub alpha: f64,
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub methods: Vec<String>,
    pub oracle_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FwerConfig {
    pub m: usize,
    pub n: usize,
    pub b: f64,
    pub trials: usize,
    pub draws: usize,
    pub alpha: f64,
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub methods: Vec<String>,
    pub oracle_samples: usize,
    pub sided: String,
    pub mu: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub schemes: Vec<String>,
    pub n: usize,
    /// 0 keeps closed forms and enclosures only.
    pub mc_draws: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn header(&self) -> Result<String, CliError> {
        let body = toml::to_string(self).map_err(|e| CliError::usage(format!("cannot encode config: {e}")))?;
        Ok(body
            .lines()
            .map(|l| if l.is_empty() { "#\n".to_string() } else { format!("# {l}\n") })
            .collect())
    }

    /// Parses the leading `#` block of an output file.
    pub fn from_header(text: &str) -> Result<Self, CliError> {
        let body: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| {
                let l = &l[1..];
                format!("{}\n", l.strip_prefix(' ').unwrap_or(l))
            })
            .collect();
        if body.trim().is_empty() {
            return Err(CliError::usage("no `#` config header found"));
        }
        toml::from_str(&body).map_err(|e| CliError::usage(format!("invalid config header: {e}")))
    }
}
