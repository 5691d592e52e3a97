//! Command line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use phasetour_core::costspace::{
    asymmetry_report, triangle_report, MetricDiagnostics, DEFAULT_TRIANGLE_CAP,
};
use phasetour_core::{AccelBound, CostKind, PhasePoint, Regime};

use crate::config::{ConfigPatch, ExperimentConfig, GridChoice, StartSpec};
use crate::error::{Error, Result};
use crate::gridfile::{load_grid, StoredGrid};
use crate::matrixfile::{load_matrix, load_or_build, read_sidecar, StoredMatrix};
use crate::plot::{emit_path_plot_data, emit_trajectory_csv};
use crate::report::{
    stats_bundle, tie_distribution, tie_distribution_csv, Artifact, CompareRecord, DiagnoseRecord,
};
use crate::runner::{replay, run_experiment, verify_result};

#[derive(Debug, Parser)]
#[command(
    name = "phasetour",
    version,
    about = "Minimum-cost visiting orders over phase-space grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a grid file.
    GenGrid(ExperimentArgs),
    /// Build (or load from cache) the cost matrix of a grid.
    BuildMatrix {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Use this grid file instead of generating one.
        #[arg(long)]
        grid_file: Option<PathBuf>,
    },
    /// Run an experiment: grid, matrix, search, data files and manifest.
    Search(ExperimentArgs),
    /// Summary, histogram and Q-Q files for a result.
    Stats {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Z-statistics of a nearest-neighbor result against a sample result.
    Compare {
        #[arg(long)]
        nn: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        /// Number of random draws for p_ln; defaults to the sample size.
        #[arg(long)]
        draws: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Asymmetry and triangle-inequality report for a cost matrix.
    Diagnose {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Use this matrix sidecar instead of building one.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        rel_tol: f64,
        #[arg(long, default_value_t = DEFAULT_TRIANGLE_CAP)]
        triangle_cap: usize,
        /// Skip the O(n^3) triangle scan.
        #[arg(long)]
        no_triangle: bool,
    },
    /// Distribution of nearest-neighbor tie multiplicities.
    Ties {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trajectory samples between two points, or along a result's best path.
    TrajPlot {
        /// Comma-separated coordinates, positions then velocities.
        #[arg(
            long,
            requires = "to",
            conflicts_with = "result",
            allow_hyphen_values = true
        )]
        from: Option<String>,
        #[arg(long, requires = "from", allow_hyphen_values = true)]
        to: Option<String>,
        #[arg(long, conflicts_with = "from")]
        result: Option<PathBuf>,
        #[arg(long, default_value_t = crate::config::DEFAULT_AMAX)]
        amax: f64,
        #[arg(long, default_value_t = AccelBound::DEFAULT_TOL)]
        accel_tol: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Output file for a point-to-point trajectory, output directory
        /// for path data. Point-to-point data goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the experiment recorded in a manifest and compare every file.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-hash a manifest and every file it references.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// Experiment flags; each one overrides the same key of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// TOML file whose keys are these flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_parser = parse_grid_choice)]
    pub grid: Option<GridChoice>,
    #[arg(long)]
    pub n_per_axis: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed_grid: Option<u64>,
    #[arg(long)]
    pub cost: Option<CostKind>,
    #[arg(long)]
    pub amax: Option<f64>,
    #[arg(long)]
    pub accel_tol: Option<f64>,
    #[arg(long)]
    pub regime: Option<Regime>,
    #[arg(long)]
    pub tie_tol: Option<f64>,
    /// Nearest-neighbor runs per starting point.
    #[arg(long)]
    pub runs: Option<u32>,
    /// `all`, `random:<k>` or a comma list of indices.
    #[arg(long)]
    pub starts: Option<StartSpec>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed_search: Option<u64>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Lift the exhaustive and grid size caps.
    #[arg(long)]
    pub allow_large: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_grid_choice(s: &str) -> std::result::Result<GridChoice, String> {
    match s {
        "rect" => Ok(GridChoice::Rect),
        "rand" => Ok(GridChoice::Rand),
        _ => Err("expected `rect` or `rand`".into()),
    }
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                ConfigPatch::from_toml(&text)?
            }
            None => ConfigPatch::default(),
        };
        let flags = ConfigPatch {
            m: self.m,
            grid: self.grid,
            n_per_axis: self.n_per_axis,
            count: self.count,
            seed_grid: self.seed_grid,
            cost: self.cost,
            amax: self.amax,
            accel_tol: self.accel_tol,
            regime: self.regime,
            tie_tol: self.tie_tol,
            runs: self.runs,
            starts: self.starts.clone(),
            samples: self.samples,
            seed_search: self.seed_search,
            bins: self.bins,
            allow_large: self.allow_large.then_some(true),
            out: self.out.clone(),
        };
        file.merge(flags).resolve()
    }
}

const DEFAULT_OUT: &str = "out";

fn out_dir(out: Option<&Path>) -> Result<PathBuf> {
    let dir = out.map_or_else(|| PathBuf::from(DEFAULT_OUT), Path::to_path_buf);
    crate::ensure_dir(&dir)?;
    Ok(dir)
}

fn config_out(config: &ExperimentConfig) -> Result<PathBuf> {
    out_dir(config.out.as_deref())
}

fn parse_point(s: &str) -> Result<PhasePoint> {
    let coords = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Usage(format!("`{s}` is not a comma-separated list of numbers")))?;
    PhasePoint::new(coords).map_err(|e| Error::Usage(e.to_string()))
}

fn write_artifact(a: &Artifact, dir: &Path) -> Result<PathBuf> {
    let path = a.write(dir)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn matrix_for(exp: &ExperimentArgs) -> Result<(StoredMatrix, PathBuf)> {
    let config = exp.resolve()?;
    let dir = config_out(&config)?;
    let grid = StoredGrid::new(config.make_grid()?);
    grid.save(&dir)?;
    load_or_build(&dir, &grid, config.cost, config.bound()?)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGrid(exp) => {
            let config = exp.resolve()?;
            let dir = config_out(&config)?;
            let grid = StoredGrid::new(config.make_grid()?);
            let path = grid.save(&dir)?;
            println!(
                "grid {} ({} points, m={})",
                grid.id,
                grid.grid.len(),
                grid.grid.dim()
            );
            println!("wrote {}", path.display());
        }
        Command::BuildMatrix { exp, grid_file } => {
            let config = exp.resolve()?;
            let dir = config_out(&config)?;
            let grid = match grid_file {
                Some(p) => load_grid(&p)?,
                None => StoredGrid::new(config.make_grid()?),
            };
            grid.save(&dir)?;
            let (m, path) = load_or_build(&dir, &grid, config.cost, config.bound()?)?;
            println!(
                "matrix {} ({} x {}, {}, grid {})",
                m.id,
                m.matrix.len(),
                m.matrix.len(),
                config.cost,
                grid.id
            );
            println!("wrote {}", path.display());
        }
        Command::Search(exp) => {
            let config = exp.resolve()?;
            let dir = config_out(&config)?;
            let outcome = run_experiment(&config, &dir)?;
            let m = &outcome.manifest;
            println!(
                "result {} ({} paths, regime {})",
                m.result_id, m.n_runs, m.regime
            );
            println!("best cost {:.6} via {:?}", m.best_cost, m.best_order);
            let s = outcome.stats.moments;
            println!(
                "mean {:.6} std {:.6} min {:.6} max {:.6}",
                s.mean, s.std, s.min, s.max
            );
            if let Some(t) = m.max_tie {
                println!("max tie multiplicity {t}");
            }
            println!("elapsed {:.3} s", m.elapsed_sec);
            println!("wrote {}", outcome.manifest_path.display());
        }
        Command::Stats { result, bins, out } => {
            let v = verify_result(&result)?;
            let dir = out_dir(out.as_deref().or(result.parent()))?;
            let costs_id = crate::artifact::id_from_file_name(Path::new(&v.manifest.files.costs))
                .expect("verified name");
            let b = stats_bundle(&v.costs, &costs_id, bins.unwrap_or(v.manifest.config.bins))?;
            let s = b.record.moments;
            println!(
                "n {} mean {:.6} std {:.6} min {:.6} max {:.6}",
                s.n, s.mean, s.std, s.min, s.max
            );
            if let Some(r) = b.record.qq_correlation {
                println!("qq correlation {r:.6}");
            }
            for a in [Some(&b.stats), Some(&b.histogram), b.qq.as_ref()]
                .into_iter()
                .flatten()
            {
                write_artifact(a, &dir)?;
            }
        }
        Command::Compare {
            nn,
            sample,
            draws,
            out,
        } => {
            let a = verify_result(&nn)?;
            let b = verify_result(&sample)?;
            if a.manifest.regime != Regime::NearestNeighbor {
                return Err(Error::Usage(format!(
                    "{} is not a nearest-neighbor result",
                    nn.display()
                )));
            }
            if a.manifest.matrix_id != b.manifest.matrix_id {
                eprintln!("warning: results come from different matrices");
            }
            let nn_m = phasetour_core::stats::summarize(&a.costs)?;
            let sample_m = phasetour_core::stats::summarize(&b.costs)?;
            let draws = draws.unwrap_or(b.costs.len() as u64);
            let rec = CompareRecord::new(
                a.manifest.result_id.parse()?,
                b.manifest.result_id.parse()?,
                nn_m,
                sample_m,
                draws,
            )?;
            println!(
                "Z {:.4}  Z' {:.4}  Z'' {:.4}",
                rec.z, rec.z_prime, rec.z_double_prime
            );
            println!(
                "P_c {:.6e}  P_ln(n={}) {:.6e}",
                rec.p_c, rec.draws, rec.p_ln
            );
            let dir = out_dir(out.as_deref().or(nn.parent()))?;
            write_artifact(&rec.artifact()?, &dir)?;
        }
        Command::Diagnose {
            exp,
            matrix,
            rel_tol,
            triangle_cap,
            no_triangle,
        } => {
            let (m, dir) = match matrix {
                Some(p) => {
                    let side = read_sidecar(&p)?;
                    let dir = p
                        .parent()
                        .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
                    let grid = load_grid(&dir.join(format!("grid-{}.csv", side.grid_id))).ok();
                    (load_matrix(&p, grid.as_ref())?, dir)
                }
                None => {
                    let (m, p) = matrix_for(&exp)?;
                    (
                        m,
                        p.parent()
                            .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
                    )
                }
            };
            let asym = asymmetry_report(&m.matrix, rel_tol);
            let triangle = if no_triangle {
                None
            } else {
                Some(triangle_report(&m.matrix, triangle_cap)?)
            };
            println!(
                "asymmetric pairs {} of {} (max relative gap {:.4})",
                asym.asymmetric_pairs, asym.pairs_checked, asym.max_relative_gap
            );
            if let Some(t) = &triangle {
                println!(
                    "triangle violations {} of {} triplets (worst excess {:.6})",
                    t.violations, t.triplets_checked, t.worst_violation
                );
            }
            let rec = DiagnoseRecord::new(
                m.id.clone(),
                rel_tol,
                &MetricDiagnostics {
                    asymmetry: asym,
                    triangle,
                },
            );
            write_artifact(&rec.artifact()?, &dir)?;
        }
        Command::Ties { result, out } => {
            let v = verify_result(&result)?;
            let name = v.manifest.files.ties.as_ref().ok_or_else(|| {
                Error::Usage(format!(
                    "{} has no tie log (not a nearest-neighbor run)",
                    result.display()
                ))
            })?;
            let dir = result.parent().unwrap_or(Path::new("."));
            let logs = crate::report::read_ties(&dir.join(name))?;
            let max = logs.iter().map(|l| l.max()).max().unwrap_or(0);
            println!("{} runs, max tie multiplicity {max}", logs.len());
            for (m, c) in tie_distribution(&logs) {
                println!("{m:>6} {c}");
            }
            write_artifact(
                &tie_distribution_csv(&logs),
                &out_dir(out.as_deref().or(Some(dir)))?,
            )?;
        }
        Command::TrajPlot {
            from,
            to,
            result,
            amax,
            accel_tol,
            samples,
            out,
        } => {
            let bound =
                AccelBound::new(amax, accel_tol).map_err(|e| Error::Usage(e.to_string()))?;
            match (from, to, result) {
                (Some(f), Some(t), None) => {
                    let csv =
                        emit_trajectory_csv(&parse_point(&f)?, &parse_point(&t)?, bound, samples)?;
                    match out {
                        Some(p) => {
                            crate::write_file(&p, csv.as_bytes())?;
                            println!("wrote {}", p.display());
                        }
                        None => print!("{csv}"),
                    }
                }
                (None, None, Some(r)) => {
                    let v = verify_result(&r)?;
                    let bound = v.matrix.matrix.bound();
                    let plot =
                        emit_path_plot_data(&v.grid.grid, &v.manifest.best_order, bound, samples)?;
                    let dir = out_dir(out.as_deref().or(r.parent()))?;
                    write_artifact(
                        &Artifact::new("segments", "csv", plot.segments.into_bytes()),
                        &dir,
                    )?;
                    write_artifact(
                        &Artifact::new("sequence", "csv", plot.sequence.into_bytes()),
                        &dir,
                    )?;
                }
                _ => {
                    return Err(Error::Usage(
                        "give either --from and --to, or --result".into(),
                    ))
                }
            }
        }
        Command::Replay { manifest, out } => {
            let outcome = replay(&manifest, &out)?;
            println!(
                "replayed result {}: all data files identical",
                outcome.manifest.result_id
            );
            println!("wrote {}", outcome.manifest_path.display());
        }
        Command::Verify { manifest } => {
            let v = verify_result(&manifest)?;
            println!(
                "result {} verified (grid {}, matrix {}, {} files)",
                v.manifest.result_id,
                v.grid.id,
                v.matrix.id,
                v.manifest.files.names().len()
            );
        }
    }
    Ok(())
}
