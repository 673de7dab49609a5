use std::fmt;
use std::path::{Path, PathBuf};

use kinkprobe::{ModelParams, ObservableSpec};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Ring,
    LongRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ObsChoice {
    Magnetization,
    Kinks,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

/// `X = a + b Σ_terms Π σ`, zero-based sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomObs {
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub model: ModelChoice,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    pub beta: f64,
    pub obs: ObsChoice,
    pub custom: Option<CustomObs>,
    pub eps: f64,
    /// `None` reads exact expectations.
    pub shots: Option<u64>,
    pub eta: f64,
    pub correct_eta: bool,
    pub seed: u64,
    pub grid: Option<usize>,
    pub out: PathBuf,
    pub format: Vec<Format>,
    pub oracle: bool,
    /// Worst allowed validation defect; the default depends on the shot count.
    pub tolerance: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: "probe".into(),
            model: ModelChoice::Ring,
            n: 50,
            j: 1.0,
            h: 0.0,
            beta: 1.0,
            obs: ObsChoice::Magnetization,
            custom: None,
            eps: 0.01,
            shots: None,
            eta: 0.0,
            correct_eta: false,
            seed: 0,
            grid: None,
            out: PathBuf::from("kinkprobe-out"),
            format: vec![Format::Csv, Format::Json],
            oracle: false,
            tolerance: None,
        }
    }
}

/// Values given on the command line; each one overrides the config file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON file with any subset of the run settings
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
    #[arg(long, value_enum)]
    pub obs: Option<ObsChoice>,
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    #[arg(long = "J", value_name = "J", allow_negative_numbers = true)]
    pub j: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Probe coupling ε
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Shots per basis and time point; omit for exact expectations
    #[arg(long)]
    pub shots: Option<u64>,
    /// Relative over-rotation of every controlled gate
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Pre-warp the time grid by the known η and invert with the corrected kernel
    #[arg(long)]
    pub correct_eta: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of phase points (at least the support width)
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    /// Compare with exhaustive enumeration (N ≤ 12)
    #[arg(long)]
    pub oracle: bool,
    /// Custom observable offset a
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Custom observable scale b
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Custom observable terms, e.g. "0,1;1,2"
    #[arg(long)]
    pub terms: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

fn parse_terms(text: &str) -> Result<Vec<Vec<usize>>, Failure> {
    text.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|term| {
            term.split(',')
                .map(|i| {
                    i.trim()
                        .parse::<usize>()
                        .map_err(|_| Failure::Input(format!("bad site index `{}` in --terms", i.trim())))
                })
                .collect()
        })
        .collect()
}

pub fn load_file(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("bad config {}: {e}", path.display())))
}

impl Overrides {
    /// defaults < config file < flags
    pub fn resolve(&self, base: RunConfig) -> Result<RunConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => load_file(path)?,
            None => base,
        };
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$field = v; })*
            };
        }
        take!(model, obs, n, j, h, beta, eps, eta, seed, out, format);
        if self.shots.is_some() {
            c.shots = self.shots;
        }
        if self.grid.is_some() {
            c.grid = self.grid;
        }
        if self.tolerance.is_some() {
            c.tolerance = self.tolerance;
        }
        c.correct_eta |= self.correct_eta;
        c.oracle |= self.oracle;
        if self.a.is_some() || self.b.is_some() || self.terms.is_some() {
            let mut custom = c.custom.take().unwrap_or(CustomObs {
                a: 0.0,
                b: 1.0,
                terms: Vec::new(),
            });
            if let Some(a) = self.a {
                custom.a = a;
            }
            if let Some(b) = self.b {
                custom.b = b;
            }
            if let Some(t) = &self.terms {
                custom.terms = parse_terms(t)?;
            }
            c.custom = Some(custom);
        }
        c.format.sort();
        c.format.dedup();
        Ok(c)
    }
}

impl RunConfig {
    pub fn model_params(&self) -> ModelParams {
        match self.model {
            ModelChoice::Ring => ModelParams::ring(self.n, self.j, self.h, self.beta),
            ModelChoice::LongRange => ModelParams::long_range(self.n, self.j, self.h, self.beta),
        }
    }

    pub fn observable(&self) -> Result<ObservableSpec, Failure> {
        Ok(match self.obs {
            ObsChoice::Magnetization => ObservableSpec::magnetization(self.n),
            ObsChoice::Kinks => ObservableSpec::kink_number(self.n),
            ObsChoice::Custom => {
                let c = self
                    .custom
                    .as_ref()
                    .ok_or_else(|| Failure::Input("--obs custom needs --terms (or `custom` in the config)".into()))?;
                ObservableSpec::custom(c.a, c.b, c.terms.clone())
            }
        })
    }

    /// Every check that can fail before computation starts.
    pub fn validate(&self) -> Result<(), Failure> {
        let model = self.model_params();
        model.validate(false)?;
        let obs = self.observable()?;
        obs.validate_for(self.n)?;
        let width = obs.support(self.n)?.width();
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Failure::Input(format!("--eps must be positive, got {}", self.eps)));
        }
        kinkprobe::GateErrorModel::new(self.eta)?;
        if self.shots == Some(0) {
            return Err(Failure::Input("--shots must be at least 1".into()));
        }
        if let Some(g) = self.grid {
            if g < width {
                return Err(Failure::Input(format!("--grid {g} is below the support width {width}")));
            }
        }
        if self.format.is_empty() {
            return Err(Failure::Input("--format must name at least one of csv, json, svg".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0) {
                return Err(Failure::Input("--tolerance must be non-negative".into()));
            }
        }
        Ok(())
    }
}
