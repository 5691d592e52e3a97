//! Experiment configuration shared by the config file and the CLI flags.
//!
//! Keys in the TOML config file are the long CLI flag names, e.g.
//! `n-per-axis = 3` or `seed-search = 7`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use phasetour_core::search::{random_starts, Starts, DEFAULT_TIE_TOL};
use phasetour_core::{AccelBound, CostKind, Grid, Regime};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::error::{Error, Result};

pub const DEFAULT_AMAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    Rect,
    Rand,
}

/// Which starting points repeated nearest-neighbor runs use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StartSpec {
    All,
    /// `k` distinct starts drawn from the search seed.
    Random(usize),
    List(Vec<usize>),
}

impl StartSpec {
    pub fn resolve(&self, n: usize, seed: u64) -> Result<Starts> {
        Ok(match self {
            StartSpec::All => Starts::All,
            StartSpec::Random(k) => Starts::Indices(random_starts(n, *k, seed)?),
            StartSpec::List(v) => Starts::Indices(v.clone()),
        })
    }
}

impl FromStr for StartSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Usage(format!(
                "starts must be `all`, `random:<k>` or a comma list of indices, got `{s}`"
            ))
        };
        let s = s.trim();
        if s == "all" {
            return Ok(StartSpec::All);
        }
        if let Some(k) = s.strip_prefix("random:") {
            return k.parse().map(StartSpec::Random).map_err(|_| bad());
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(StartSpec::List)
            .map_err(|_| bad())
    }
}

impl fmt::Display for StartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartSpec::All => f.write_str("all"),
            StartSpec::Random(k) => write!(f, "random:{k}"),
            StartSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(usize::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub grid: GridChoice,
    pub n_per_axis: Option<usize>,
    pub count: Option<usize>,
    pub seed_grid: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub cost: CostKind,
    pub amax: f64,
    pub accel_tol: f64,
    #[serde_as(as = "DisplayFromStr")]
    pub regime: Regime,
    pub tie_tol: f64,
    /// Nearest-neighbor runs per starting point.
    pub runs: u32,
    #[serde_as(as = "DisplayFromStr")]
    pub starts: StartSpec,
    pub samples: usize,
    pub seed_search: u64,
    pub bins: usize,
    pub allow_large: bool,
    /// Output directory; not part of the recorded experiment.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 2,
            grid: GridChoice::Rect,
            n_per_axis: Some(3),
            count: None,
            seed_grid: 0,
            cost: CostKind::Time,
            amax: DEFAULT_AMAX,
            accel_tol: AccelBound::DEFAULT_TOL,
            regime: Regime::NearestNeighbor,
            tie_tol: DEFAULT_TIE_TOL,
            runs: 4,
            starts: StartSpec::All,
            samples: 10_000,
            seed_search: 0,
            bins: 50,
            allow_large: false,
            out: None,
        }
    }
}

/// Partial config as read from a TOML file; missing keys keep their defaults.
#[serde_as]
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigPatch {
    pub m: Option<usize>,
    pub grid: Option<GridChoice>,
    pub n_per_axis: Option<usize>,
    pub count: Option<usize>,
    pub seed_grid: Option<u64>,
    #[serde_as(as = "Option<DisplayFromStr>")]
    #[serde(default)]
    pub cost: Option<CostKind>,
    pub amax: Option<f64>,
    pub accel_tol: Option<f64>,
    #[serde_as(as = "Option<DisplayFromStr>")]
    #[serde(default)]
    pub regime: Option<Regime>,
    pub tie_tol: Option<f64>,
    pub runs: Option<u32>,
    #[serde_as(as = "Option<DisplayFromStr>")]
    #[serde(default)]
    pub starts: Option<StartSpec>,
    pub samples: Option<usize>,
    pub seed_search: Option<u64>,
    pub bins: Option<usize>,
    pub allow_large: Option<bool>,
    pub out: Option<PathBuf>,
}

impl ConfigPatch {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Usage(format!("config file: {e}")))
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigPatch) -> ConfigPatch {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigPatch { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            m,
            grid,
            n_per_axis,
            count,
            seed_grid,
            cost,
            amax,
            accel_tol,
            regime,
            tie_tol,
            runs,
            starts,
            samples,
            seed_search,
            bins,
            allow_large,
            out
        )
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let grid = self.grid.unwrap_or(d.grid);
        let (n_per_axis, count) = match grid {
            GridChoice::Rect => (self.n_per_axis.or(d.n_per_axis), None),
            GridChoice::Rand => (None, self.count),
        };
        let config = ExperimentConfig {
            m: self.m.unwrap_or(d.m),
            grid,
            n_per_axis,
            count,
            seed_grid: self.seed_grid.unwrap_or(d.seed_grid),
            cost: self.cost.unwrap_or(d.cost),
            amax: self.amax.unwrap_or(d.amax),
            accel_tol: self.accel_tol.unwrap_or(d.accel_tol),
            regime: self.regime.unwrap_or(d.regime),
            tie_tol: self.tie_tol.unwrap_or(d.tie_tol),
            runs: self.runs.unwrap_or(d.runs),
            starts: self.starts.unwrap_or(d.starts),
            samples: self.samples.unwrap_or(d.samples),
            seed_search: self.seed_search.unwrap_or(d.seed_search),
            bins: self.bins.unwrap_or(d.bins),
            allow_large: self.allow_large.unwrap_or(d.allow_large),
            out: self.out,
        };
        config.validate()?;
        Ok(config)
    }
}

fn usage(e: phasetour_core::Error) -> Error {
    Error::Usage(e.to_string())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || !self.m.is_multiple_of(2) {
            return Err(Error::Usage(format!(
                "m must be even and at least 2, got {}",
                self.m
            )));
        }
        match self.grid {
            GridChoice::Rect if self.n_per_axis.is_none_or(|n| n < 2) => {
                return Err(Error::Usage("a rect grid needs n-per-axis >= 2".into()));
            }
            GridChoice::Rand if self.count.is_none_or(|c| c < 2) => {
                return Err(Error::Usage("a rand grid needs count >= 2".into()));
            }
            _ => {}
        }
        self.bound()?;
        if !(0.0..1.0).contains(&self.tie_tol) {
            return Err(Error::Usage("tie-tol must lie in [0, 1)".into()));
        }
        if self.runs == 0 || self.samples == 0 || self.bins == 0 {
            return Err(Error::Usage(
                "runs, samples and bins must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn bound(&self) -> Result<AccelBound> {
        AccelBound::new(self.amax, self.accel_tol).map_err(usage)
    }

    pub fn make_grid(&self) -> Result<Grid> {
        let grid = match self.grid {
            GridChoice::Rect => {
                let n = self.n_per_axis.unwrap_or_default();
                let total = u32::try_from(self.m).ok().and_then(|m| n.checked_pow(m));
                if total.is_none_or(|t| t > phasetour_core::costspace::MAX_MATRIX_POINTS)
                    && !self.allow_large
                {
                    return Err(Error::TooLarge {
                        what: format!("a rect grid with {n}^{} points", self.m),
                        detail: format!(
                            "cost matrices are limited to {} points",
                            phasetour_core::costspace::MAX_MATRIX_POINTS
                        ),
                    });
                }
                phasetour_core::grid::make_rect_grid(self.m, n)
            }
            GridChoice::Rand => phasetour_core::grid::make_random_grid(
                self.m,
                self.count.unwrap_or_default(),
                self.seed_grid,
            ),
        };
        grid.map_err(usage)
    }

    /// Canonical TOML form, used as the replay source in result manifests.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ConfigPatch::default().resolve().unwrap();
        assert_eq!(c.amax, 2.0);
        assert_eq!(c.accel_tol, 0.02);
        assert_eq!(c.tie_tol, 0.02);
        assert_eq!(c.m, 2);
        assert_eq!(c.n_per_axis, Some(3));
    }

    #[test]
    fn toml_uses_flag_names() {
        let text = r#"
            m = 6
            grid = "rect"
            n-per-axis = 3
            cost = "energy"
            regime = "sample"
            samples = 100
            seed-search = 9
            starts = "random:3"
            tie-tol = 0.05
        "#;
        let c = ConfigPatch::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(c.m, 6);
        assert_eq!(c.cost, CostKind::Energy);
        assert_eq!(c.regime, Regime::Sample);
        assert_eq!(c.starts, StartSpec::Random(3));
        assert_eq!(c.seed_search, 9);
        assert!(ConfigPatch::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn later_patch_wins() {
        let file = ConfigPatch::from_toml("m = 6\nsamples = 5").unwrap();
        let flags = ConfigPatch {
            samples: Some(7),
            ..Default::default()
        };
        let c = file.merge(flags).resolve().unwrap();
        assert_eq!((c.m, c.samples), (6, 7));
    }

    #[test]
    fn toml_round_trip_drops_out_dir() {
        let mut c = ExperimentConfig {
            out: Some("somewhere".into()),
            ..Default::default()
        };
        c.starts = StartSpec::List(vec![0, 4, 8]);
        let text = c.to_toml();
        assert!(!text.contains("somewhere"));
        let back = ConfigPatch::from_toml(&text).unwrap().resolve().unwrap();
        c.out = None;
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for text in [
            "m = 3",
            "amax = -1.0",
            "tie-tol = 1.5",
            "grid = \"rand\"",
            "n-per-axis = 1",
            "runs = 0",
        ] {
            let err = ConfigPatch::from_toml(text).unwrap().resolve().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn start_spec_parsing() {
        assert_eq!("all".parse::<StartSpec>().unwrap(), StartSpec::All);
        assert_eq!(
            "random:9".parse::<StartSpec>().unwrap(),
            StartSpec::Random(9)
        );
        assert_eq!(
            "0, 4,8".parse::<StartSpec>().unwrap(),
            StartSpec::List(vec![0, 4, 8])
        );
        assert!("random:x".parse::<StartSpec>().is_err());
        assert_eq!(StartSpec::List(vec![1, 2]).to_string(), "1,2");
    }

    #[test]
    fn oversized_rect_grid_is_refused() {
        let c = ConfigPatch {
            m: Some(6),
            n_per_axis: Some(5),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(c.make_grid().unwrap_err().exit_code(), 3);
    }
}
