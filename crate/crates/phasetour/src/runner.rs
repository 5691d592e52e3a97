//! Experiment orchestration: grid, matrix, search, data files, manifest.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use phasetour_core::search::{
    exhaustive_search, nn_run, path_count, random_sample, Starts, DEFAULT_EXHAUSTIVE_CAP,
};
use phasetour_core::{rng, AccelBound, CostKind, CostMatrix, Regime, SearchResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::artifact::{content_hash, id_from_file_name, read_verified, ArtifactId};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::gridfile::{load_grid, StoredGrid};
use crate::matrixfile::{load_matrix, load_or_build, StoredMatrix};
use crate::report::{costs_csv, read_costs, stats_bundle, ties_csv, StatsRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFiles {
    pub costs: String,
    pub ties: Option<String>,
    pub stats: String,
    pub histogram: String,
    pub qq: Option<String>,
}

impl ResultFiles {
    pub fn names(&self) -> Vec<&str> {
        let mut v = vec![
            self.costs.as_str(),
            self.stats.as_str(),
            self.histogram.as_str(),
        ];
        v.extend(self.ties.as_deref());
        v.extend(self.qq.as_deref());
        v
    }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    /// Empty while the manifest is hashed.
    pub result_id: String,
    pub config: ExperimentConfig,
    pub grid_id: ArtifactId,
    pub grid_file: String,
    pub matrix_id: ArtifactId,
    pub matrix_file: String,
    #[serde_as(as = "DisplayFromStr")]
    pub regime: Regime,
    pub seed: Option<u64>,
    /// Resolved starting points of nearest-neighbor runs.
    pub starts: Option<Vec<usize>>,
    pub n_runs: u64,
    pub best_order: Vec<usize>,
    pub best_cost: f64,
    pub max_tie: Option<u32>,
    /// Wall time of the search itself; zeroed while hashing.
    pub elapsed_sec: f64,
    pub files: ResultFiles,
}

impl ResultManifest {
    fn canonical_id(&self) -> Result<ArtifactId> {
        let mut blank = self.clone();
        blank.result_id.clear();
        blank.elapsed_sec = 0.0;
        Ok(content_hash(crate::to_json(&blank)?.as_bytes()))
    }

    pub fn file_name(&self) -> String {
        format!("result-{}.json", self.result_id)
    }
}

pub fn read_manifest(path: &Path) -> Result<ResultManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: ResultManifest =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    let id = manifest.canonical_id()?;
    if id.as_str() != manifest.result_id {
        return Err(Error::Provenance {
            path: path.to_path_buf(),
            expected: manifest.result_id,
            actual: id.to_string(),
        });
    }
    if id_from_file_name(path).is_some_and(|named| named != id) {
        return Err(Error::Mismatch(format!(
            "{} is named for a different result id",
            path.display()
        )));
    }
    Ok(manifest)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: ResultManifest,
    pub manifest_path: PathBuf,
    pub result: SearchResult,
    pub grid: StoredGrid,
    pub matrix: StoredMatrix,
    pub stats: StatsRecord,
}

/// Runs `per_start` NN searches from every start on the rayon pool. Output is
/// identical to the sequential `multi_nn`.
pub fn multi_nn_par(
    matrix: &CostMatrix,
    starts: &Starts,
    per_start: u32,
    tie_tol: f64,
    seed: u64,
) -> Result<(SearchResult, Vec<(usize, u32)>)> {
    if per_start == 0 {
        return Err(Error::Usage("runs per start must be at least 1".into()));
    }
    let keys: Vec<(usize, u32)> = starts
        .resolve(matrix.len())?
        .into_iter()
        .flat_map(|s| (0..per_start).map(move |rep| (s, rep)))
        .collect();
    let runs = keys
        .par_iter()
        .map(|&(s, rep)| nn_run(matrix, s, rep, tie_tol, seed))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((SearchResult::from_nn_runs(runs, seed)?, keys))
}

/// Measured enumeration speed in paths per second.
pub fn exhaustive_rate() -> f64 {
    let n = 8;
    let entries = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                0.0
            } else {
                1.0 + (k % 7) as f64
            }
        })
        .collect();
    let bound = AccelBound::with_default_tol(1.0).expect("valid bound");
    let m = CostMatrix::from_entries(CostKind::Time, bound, n, entries).expect("valid matrix");
    let start = Instant::now();
    let r = exhaustive_search(&m, n).expect("8 points are within the cap");
    r.evaluated() as f64 / start.elapsed().as_secs_f64().max(1e-9)
}

pub fn human_duration(secs: f64) -> String {
    const YEAR: f64 = 365.25 * 86_400.0;
    match secs {
        s if s >= YEAR => format!("{:.3e} years", s / YEAR),
        s if s >= 86_400.0 => format!("{:.1} days", s / 86_400.0),
        s if s >= 3_600.0 => format!("{:.1} hours", s / 3_600.0),
        s => format!("{s:.1} seconds"),
    }
}

fn exhaustive_refusal(n: usize) -> Error {
    let estimate = path_count(n) / exhaustive_rate();
    Error::TooLarge {
        what: format!("exhaustive search over {n} points"),
        detail: format!(
            "{:.4e} paths, estimated runtime {} (cap is {DEFAULT_EXHAUSTIVE_CAP} points; pass --allow-large to override)",
            path_count(n),
            human_duration(estimate)
        ),
    }
}

/// `(start, rep)` of each nearest-neighbor run, in result order.
type RunKeys = Vec<(usize, u32)>;

fn run_search(
    config: &ExperimentConfig,
    matrix: &CostMatrix,
) -> Result<(SearchResult, Option<RunKeys>)> {
    let n = matrix.len();
    Ok(match config.regime {
        Regime::Exhaustive => {
            if n > DEFAULT_EXHAUSTIVE_CAP && !config.allow_large {
                return Err(exhaustive_refusal(n));
            }
            (
                exhaustive_search(matrix, n.max(DEFAULT_EXHAUSTIVE_CAP))?,
                None,
            )
        }
        Regime::NearestNeighbor => {
            let starts = config.starts.resolve(n, config.seed_search)?;
            let (r, keys) = multi_nn_par(
                matrix,
                &starts,
                config.runs,
                config.tie_tol,
                config.seed_search,
            )?;
            (r, Some(keys))
        }
        Regime::Sample => {
            let mut rng = rng::seeded(config.seed_search);
            (random_sample(matrix, config.samples, &mut rng)?, None)
        }
    })
}

/// Builds or loads the grid and matrix in `out`, runs the configured search
/// and writes every data file plus the result manifest.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    config.validate()?;
    crate::ensure_dir(out)?;
    let grid = StoredGrid::new(config.make_grid()?);
    let grid_path = grid.save(out)?;
    let (matrix, matrix_path) = load_or_build(out, &grid, config.cost, config.bound()?)?;

    let clock = Instant::now();
    let (result, keys) = run_search(config, &matrix.matrix)?;
    let elapsed = clock.elapsed();

    let costs = costs_csv(&result.all_costs);
    let ties = keys.as_ref().map(|k| ties_csv(&result.tie_logs, k));
    let bundle = stats_bundle(&result.all_costs, &costs.id, config.bins)?;
    for a in [
        Some(&costs),
        ties.as_ref(),
        Some(&bundle.stats),
        Some(&bundle.histogram),
        bundle.qq.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        a.write(out)?;
    }

    let mut manifest = ResultManifest {
        result_id: String::new(),
        config: ExperimentConfig {
            out: None,
            ..config.clone()
        },
        grid_id: grid.id.clone(),
        grid_file: file_name(&grid_path),
        matrix_id: matrix.id.clone(),
        matrix_file: file_name(&matrix_path),
        regime: result.regime,
        seed: result.seed,
        starts: keys.as_ref().map(|k| {
            let mut s: Vec<usize> = k.iter().map(|&(s, _)| s).collect();
            s.dedup();
            s
        }),
        n_runs: result.evaluated() as u64,
        best_order: result.best.order.clone(),
        best_cost: result.best.total_cost,
        max_tie: (!result.tie_logs.is_empty())
            .then(|| result.tie_logs.iter().map(|l| l.max()).max().unwrap_or(0)),
        elapsed_sec: 0.0,
        files: ResultFiles {
            costs: costs.name.clone(),
            ties: ties.as_ref().map(|t| t.name.clone()),
            stats: bundle.stats.name.clone(),
            histogram: bundle.histogram.name.clone(),
            qq: bundle.qq.as_ref().map(|q| q.name.clone()),
        },
    };
    manifest.result_id = manifest.canonical_id()?.to_string();
    manifest.elapsed_sec = secs(elapsed);
    let manifest_path = out.join(manifest.file_name());
    crate::write_file(&manifest_path, crate::to_json(&manifest)?.as_bytes())?;

    Ok(RunOutcome {
        manifest,
        manifest_path,
        result,
        grid,
        matrix,
        stats: bundle.record,
    })
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_owned()
}

/// Everything a verified manifest points to.
#[derive(Debug)]
pub struct VerifiedResult {
    pub manifest: ResultManifest,
    pub grid: StoredGrid,
    pub matrix: StoredMatrix,
    pub costs: Vec<f64>,
}

/// Re-hashes the manifest and every file it references.
pub fn verify_result(manifest_path: &Path) -> Result<VerifiedResult> {
    let manifest = read_manifest(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let grid = load_grid(&dir.join(&manifest.grid_file))?;
    if grid.id != manifest.grid_id {
        return Err(Error::Mismatch(format!(
            "grid file {} does not carry id {}",
            manifest.grid_file, manifest.grid_id
        )));
    }
    let matrix = load_matrix(&dir.join(&manifest.matrix_file), Some(&grid))?;
    if matrix.id != manifest.matrix_id {
        return Err(Error::Mismatch(format!(
            "matrix file {} does not carry id {}",
            manifest.matrix_file, manifest.matrix_id
        )));
    }
    for name in manifest.files.names() {
        read_verified(&dir.join(name))?;
    }
    let costs = read_costs(&dir.join(&manifest.files.costs))?;
    let stats_path = dir.join(&manifest.files.stats);
    let stats: StatsRecord = serde_json::from_slice(&read_verified(&stats_path)?)
        .map_err(|e| Error::format(&stats_path, e.to_string()))?;
    if id_from_file_name(Path::new(&manifest.files.costs)).as_ref() != Some(&stats.costs_id) {
        return Err(Error::Mismatch(format!(
            "{} summarizes a different costs file",
            manifest.files.stats
        )));
    }
    if costs.len() as u64 != manifest.n_runs {
        return Err(Error::Mismatch(format!(
            "{} holds {} costs, manifest says {}",
            manifest.files.costs,
            costs.len(),
            manifest.n_runs
        )));
    }
    Ok(VerifiedResult {
        manifest,
        grid,
        matrix,
        costs,
    })
}

/// Re-runs the experiment recorded in `manifest_path` into `out` and checks
/// that every data file comes out with the same id.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<RunOutcome> {
    let original = read_manifest(manifest_path)?;
    let outcome = run_experiment(&original.config, out)?;
    let fresh = &outcome.manifest;
    let pairs = [
        (original.grid_file.as_str(), fresh.grid_file.as_str()),
        (original.matrix_file.as_str(), fresh.matrix_file.as_str()),
    ];
    let old_names = original.files.names();
    let new_names = fresh.files.names();
    if old_names.len() != new_names.len() {
        return Err(Error::Mismatch(
            "replay produced a different set of files".into(),
        ));
    }
    for (a, b) in pairs
        .into_iter()
        .chain(old_names.into_iter().zip(new_names))
    {
        if a != b {
            return Err(Error::Mismatch(format!(
                "replay produced {b}, original has {a}"
            )));
        }
    }
    if fresh.result_id != original.result_id {
        return Err(Error::Mismatch(format!(
            "replay result id {} differs from {}",
            fresh.result_id, original.result_id
        )));
    }
    Ok(outcome)
}
