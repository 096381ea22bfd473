//! Run configuration: defaults, overridden by a TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pvarma::evaluation::{PersistenceMode, DEFAULT_PERSISTENCE_WINDOW};
use pvarma::scenario::{DEFAULT_PROBS, DEFAULT_SCENARIOS};
use pvarma::selector::{OrderGrid, SelectOptions, DEFAULT_LJUNG_BOX_LAGS};

use crate::error::CliError;

/// Held-out fraction of days, or the first test date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Fraction(f64),
    Date(NaiveDate),
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return Ok(Split::Date(d));
        }
        match s.parse::<f64>() {
            Ok(f) if f > 0.0 && f < 1.0 => Ok(Split::Fraction(f)),
            Ok(f) => Err(format!("held-out fraction {f} is outside (0, 1)")),
            Err(_) => Err(format!("`{s}` is neither a fraction nor a YYYY-MM-DD date")),
        }
    }
}

/// Where scenario sampling starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// End of the training window.
    #[default]
    Training,
    /// End of the held-out window; the models are not refit.
    Test,
}

/// Everything a run depends on, after merging.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub out: PathBuf,
    pub split: Split,
    pub grid_min: usize,
    pub grid_max: usize,
    pub lags: Vec<usize>,
    pub scenarios: usize,
    pub quantiles: Vec<f64>,
    pub seed: u64,
    pub night_threshold: f64,
    pub conditioning: Conditioning,
    pub persistence_window: usize,
    pub persistence_mode: PersistenceMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            models: None,
            out: PathBuf::from("out"),
            split: Split::Fraction(0.2),
            grid_min: 1,
            grid_max: 4,
            lags: DEFAULT_LJUNG_BOX_LAGS.to_vec(),
            scenarios: DEFAULT_SCENARIOS,
            quantiles: DEFAULT_PROBS.to_vec(),
            seed: 0,
            night_threshold: 0.0,
            conditioning: Conditioning::Training,
            persistence_window: DEFAULT_PERSISTENCE_WINDOW,
            persistence_mode: PersistenceMode::ClockHours,
        }
    }
}

/// Every setting optional; used for both the file and the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub split: Option<SplitValue>,
    pub grid_min: Option<usize>,
    pub grid_max: Option<usize>,
    pub lags: Option<Vec<usize>>,
    pub scenarios: Option<usize>,
    pub quantiles: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub night_threshold: Option<f64>,
    pub conditioning: Option<Conditioning>,
    pub persistence_window: Option<usize>,
    pub persistence_mode: Option<PersistenceMode>,
}

/// In TOML a split may be written as a number or a string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SplitValue {
    Number(f64),
    Text(String),
}

impl SplitValue {
    fn resolve(&self) -> Result<Split, String> {
        match self {
            SplitValue::Number(f) => f.to_string().parse(),
            SplitValue::Text(s) => s.parse(),
        }
    }
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    fn apply(self, cfg: &mut RunConfig) -> Result<(), CliError> {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        if let Some(s) = &self.split {
            cfg.split = s.resolve().map_err(CliError::input)?;
        }
        if let Some(d) = self.data {
            cfg.data = Some(d);
        }
        if let Some(m) = self.models {
            cfg.models = Some(m);
        }
        take!(
            out,
            grid_min,
            grid_max,
            lags,
            scenarios,
            quantiles,
            seed,
            night_threshold,
            conditioning,
            persistence_window,
            persistence_mode
        );
        Ok(())
    }
}

impl RunConfig {
    /// Defaults, then `file`, then `flags`; validated before returning.
    pub fn resolve(file: Option<Overrides>, flags: Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            f.apply(&mut cfg)?;
        }
        flags.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::input(m));
        if self.grid_min > self.grid_max {
            return bad(format!("grid_min {} exceeds grid_max {}", self.grid_min, self.grid_max));
        }
        if self.lags.is_empty() || self.lags.contains(&0) {
            return bad("Ljung-Box lags must be a non-empty list of positive integers".into());
        }
        if self.scenarios == 0 {
            return bad("scenario count must be at least 1".into());
        }
        if self.quantiles.is_empty() || self.quantiles.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return bad("quantile probabilities must lie in (0, 1)".into());
        }
        if !self.night_threshold.is_finite() {
            return bad("night threshold must be finite".into());
        }
        if self.persistence_window == 0 {
            return bad("persistence window must be at least 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> OrderGrid {
        OrderGrid::new(self.grid_min..=self.grid_max, self.grid_min..=self.grid_max)
            .expect("validated grid bounds")
    }

    pub fn select_options(&self) -> SelectOptions {
        SelectOptions {
            ljung_box_lags: self.lags.clone(),
            seed: self.seed,
            ..SelectOptions::with_grid(self.grid())
        }
    }

    pub fn data_path(&self) -> Result<&Path, CliError> {
        self.data
            .as_deref()
            .ok_or_else(|| CliError::input("no data file given (use --data or `data` in the config)"))
    }

    pub fn models_path(&self) -> PathBuf {
        self.models.clone().unwrap_or_else(|| self.out.join("models.json"))
    }

    /// SHA-256 of the resolved configuration as JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_parsing() {
        assert_eq!("0.25".parse::<Split>().unwrap(), Split::Fraction(0.25));
        assert_eq!(
            "2016-10-01".parse::<Split>().unwrap(),
            Split::Date(NaiveDate::from_ymd_opt(2016, 10, 1).unwrap())
        );
        assert!("1.5".parse::<Split>().is_err());
        assert!("soon".parse::<Split>().is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: Overrides = toml::from_str("seed = 5\nscenarios = 10\nsplit = 0.3").unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(file), flags).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.scenarios, 10);
        assert_eq!(cfg.split, Split::Fraction(0.3));
        assert_eq!(cfg.grid_max, 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Overrides>("sed = 5").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let flags = Overrides {
            grid_min: Some(3),
            grid_max: Some(2),
            ..Default::default()
        };
        assert!(RunConfig::resolve(None, flags).is_err());
        let flags = Overrides {
            lags: Some(vec![]),
            ..Default::default()
        };
        assert!(RunConfig::resolve(None, flags).is_err());
    }

    #[test]
    fn hash_tracks_settings() {
        let a = RunConfig::default();
        let b = RunConfig {
            seed: 1,
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), RunConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
