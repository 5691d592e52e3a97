//! Plot-ready data files: path costs, tie logs, summaries, histograms, Q-Q
//! series and NN-versus-sample comparisons.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phasetour_core::costspace::MetricDiagnostics;
use phasetour_core::stats::{self, Histogram, Moments, QQSeries, ZReport};
use phasetour_core::TieLog;
use serde::{Deserialize, Serialize};

use crate::artifact::{content_hash, read_verified, ArtifactId};
use crate::error::{Error, Result};
use crate::gridfile::format_f64;

/// A file's content and its id-bearing name, ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub id: ArtifactId,
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(prefix: &str, ext: &str, bytes: Vec<u8>) -> Self {
        let id = content_hash(&bytes);
        Self {
            name: format!("{prefix}-{id}.{ext}"),
            id,
            bytes,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(&self.name);
        crate::write_file(&path, &self.bytes)?;
        Ok(path)
    }
}

pub fn costs_csv(costs: &[f64]) -> Artifact {
    let mut out = String::with_capacity(costs.len() * 32 + 16);
    out.push_str("index,cost\n");
    for (i, &c) in costs.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", format_f64(c));
    }
    Artifact::new("costs", "csv", out.into_bytes())
}

/// Reads a costs CSV, verifying its id.
pub fn read_costs(path: &Path) -> Result<Vec<f64>> {
    let bytes = read_verified(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::format(path, "not UTF-8"))?;
    text.lines()
        .skip(1)
        .enumerate()
        .map(|(k, line)| {
            line.split_once(',')
                .and_then(|(_, c)| c.parse().ok())
                .ok_or_else(|| Error::format(path, format!("bad row {}", k + 1)))
        })
        .collect()
}

/// One row per NN step; `runs` pairs each log with its `(start, rep)`.
pub fn ties_csv(logs: &[TieLog], runs: &[(usize, u32)]) -> Artifact {
    let mut out = String::from("run,start,rep,step,multiplicity\n");
    for (run, (log, (start, rep))) in logs.iter().zip(runs).enumerate() {
        for (step, m) in log.multiplicities.iter().enumerate() {
            let _ = writeln!(out, "{run},{start},{rep},{step},{m}");
        }
    }
    Artifact::new("ties", "csv", out.into_bytes())
}

/// Reads a ties CSV back into per-run logs.
pub fn read_ties(path: &Path) -> Result<Vec<TieLog>> {
    let bytes = read_verified(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::format(path, "not UTF-8"))?;
    let mut logs: Vec<TieLog> = Vec::new();
    for (k, line) in text.lines().skip(1).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = (fields.len() == 5)
            .then(|| {
                Some((
                    fields[0].parse::<usize>().ok()?,
                    fields[4].parse::<u32>().ok()?,
                ))
            })
            .flatten();
        let (run, m) = parsed.ok_or_else(|| Error::format(path, format!("bad row {}", k + 1)))?;
        if run == logs.len() {
            logs.push(TieLog::default());
        }
        if run + 1 != logs.len() {
            return Err(Error::format(path, "runs out of order"));
        }
        logs[run].multiplicities.push(m);
    }
    Ok(logs)
}

/// `multiplicity,count` over all steps of all runs.
pub fn tie_distribution(logs: &[TieLog]) -> Vec<(u32, u64)> {
    let mut counts = std::collections::BTreeMap::new();
    for m in logs.iter().flat_map(|l| l.multiplicities.iter()) {
        *counts.entry(*m).or_insert(0u64) += 1;
    }
    counts.into_iter().collect()
}

pub fn tie_distribution_csv(logs: &[TieLog]) -> Artifact {
    let mut out = String::from("multiplicity,count\n");
    for (m, c) in tie_distribution(logs) {
        let _ = writeln!(out, "{m},{c}");
    }
    Artifact::new("tiedist", "csv", out.into_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentsRecord {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl From<Moments> for MomentsRecord {
    fn from(m: Moments) -> Self {
        Self {
            n: m.n,
            mean: m.mean,
            std: m.std,
            min: m.min,
            max: m.max,
        }
    }
}

impl From<MomentsRecord> for Moments {
    fn from(m: MomentsRecord) -> Self {
        Moments {
            n: m.n,
            mean: m.mean,
            std: m.std,
            min: m.min,
            max: m.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub costs_id: ArtifactId,
    pub moments: MomentsRecord,
    /// Absent when the population is too small or constant.
    pub qq_correlation: Option<f64>,
    pub bins: usize,
}

pub fn histogram_csv(h: &Histogram) -> Artifact {
    let mut out = String::from("lower,upper,count\n");
    for (k, count) in h.counts.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{count}",
            format_f64(h.edges[k]),
            format_f64(h.edges[k + 1])
        );
    }
    Artifact::new("hist", "csv", out.into_bytes())
}

pub fn qq_csv(qq: &QQSeries) -> Artifact {
    let mut out = String::with_capacity(qq.points.len() * 48 + 24);
    out.push_str("theoretical,sample\n");
    for &(t, s) in &qq.points {
        let _ = writeln!(out, "{},{}", format_f64(t), format_f64(s));
    }
    Artifact::new("qq", "csv", out.into_bytes())
}

/// Summary, histogram and (when defined) Q-Q files for one cost population.
pub struct StatsBundle {
    pub stats: Artifact,
    pub histogram: Artifact,
    pub qq: Option<Artifact>,
    pub record: StatsRecord,
}

pub fn stats_bundle(costs: &[f64], costs_id: &ArtifactId, bins: usize) -> Result<StatsBundle> {
    let moments = stats::summarize(costs)?;
    let histogram = histogram_csv(&stats::histogram(costs, bins)?);
    let qq = if costs.len() >= 3 && moments.std > 0.0 {
        Some(stats::qq_data(costs)?)
    } else {
        None
    };
    let record = StatsRecord {
        costs_id: costs_id.clone(),
        moments: moments.into(),
        qq_correlation: qq.as_ref().map(|q| q.correlation),
        bins,
    };
    let stats = Artifact::new("stats", "json", crate::to_json(&record)?.into_bytes());
    Ok(StatsBundle {
        stats,
        histogram,
        qq: qq.as_ref().map(qq_csv),
        record,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRecord {
    pub nn_result: ArtifactId,
    pub sample_result: ArtifactId,
    pub nn: MomentsRecord,
    pub sample: MomentsRecord,
    /// Number of random draws `n` in `p_ln`.
    pub draws: u64,
    pub z: f64,
    pub z_prime: f64,
    pub z_double_prime: f64,
    pub p_c: f64,
    /// `1 - Phi(z)`, reported next to the lower-tail `p_c`.
    pub p_c_upper: f64,
    pub p_ln: f64,
    pub p_c_prime: f64,
    pub p_ln_prime: f64,
    pub p_c_double_prime: f64,
    pub p_ln_double_prime: f64,
}

impl CompareRecord {
    pub fn new(
        nn_result: ArtifactId,
        sample_result: ArtifactId,
        nn: Moments,
        sample: Moments,
        draws: u64,
    ) -> Result<Self> {
        let r = ZReport::new(&nn, &sample, draws)?;
        Ok(Self {
            nn_result,
            sample_result,
            nn: nn.into(),
            sample: sample.into(),
            draws,
            z: r.scores.z,
            z_prime: r.scores.z_prime,
            z_double_prime: r.scores.z_double_prime,
            p_c: r.p_c,
            p_c_upper: r.p_c_upper,
            p_ln: r.p_ln,
            p_c_prime: r.p_c_prime,
            p_ln_prime: r.p_ln_prime,
            p_c_double_prime: r.p_c_double_prime,
            p_ln_double_prime: r.p_ln_double_prime,
        })
    }

    pub fn artifact(&self) -> Result<Artifact> {
        Ok(Artifact::new(
            "compare",
            "json",
            crate::to_json(self)?.into_bytes(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseRecord {
    pub matrix_id: ArtifactId,
    pub rel_tol: f64,
    pub pairs_checked: usize,
    pub asymmetric_pairs: usize,
    pub max_relative_gap: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// Absent when the triangle scan was skipped.
    pub triangle: Option<TriangleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleRecord {
    pub triplets_checked: u64,
    pub violations: u64,
    pub worst_violation: f64,
    pub worst_triplet: Option<(usize, usize, usize)>,
}

impl DiagnoseRecord {
    pub fn new(matrix_id: ArtifactId, rel_tol: f64, d: &MetricDiagnostics) -> Self {
        Self {
            matrix_id,
            rel_tol,
            pairs_checked: d.asymmetry.pairs_checked,
            asymmetric_pairs: d.asymmetry.asymmetric_pairs,
            max_relative_gap: d.asymmetry.max_relative_gap,
            worst_pair: d.asymmetry.worst_pair,
            triangle: d.triangle.as_ref().map(|t| TriangleRecord {
                triplets_checked: t.triplets_checked,
                violations: t.violations,
                worst_violation: t.worst_violation,
                worst_triplet: t.worst_triplet,
            }),
        }
    }

    pub fn artifact(&self) -> Result<Artifact> {
        Ok(Artifact::new(
            "diagnose",
            "json",
            crate::to_json(self)?.into_bytes(),
        ))
    }
}
