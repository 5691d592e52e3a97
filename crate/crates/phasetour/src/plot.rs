//! Trajectory samples for external plotting.

use std::fmt::Write as _;

use phasetour_core::search::validate_permutation;
use phasetour_core::trajectory::scale_duration;
use phasetour_core::{AccelBound, CubicTraj, Grid, PhasePoint};

use crate::error::{Error, Result};
use crate::gridfile::format_f64;

fn axis_columns(axes: usize) -> String {
    (0..axes).map(|k| format!(",x_{k},v_{k},a_{k}")).collect()
}

/// `samples` evenly spaced times on `[0, dt]`, the last one exactly `dt`.
fn sample_times(dt: f64, samples: usize) -> impl Iterator<Item = f64> {
    let last = samples - 1;
    (0..samples).map(move |i| {
        if i == last {
            dt
        } else {
            dt * i as f64 / last as f64
        }
    })
}

fn push_rows(
    out: &mut String,
    prefix: &str,
    traj: &CubicTraj,
    samples: usize,
    t0: f64,
) -> Result<()> {
    for t in sample_times(traj.dt(), samples) {
        let k = traj.eval(t)?;
        out.push_str(prefix);
        out.push_str(&format_f64(t));
        if t0.is_finite() {
            let _ = write!(out, ",{}", format_f64(t0 + t));
        }
        for axis in 0..k.positions.len() {
            let _ = write!(
                out,
                ",{},{},{}",
                format_f64(k.positions[axis]),
                format_f64(k.velocities[axis]),
                format_f64(k.accelerations[axis])
            );
        }
        out.push('\n');
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::Usage(
            "at least 2 samples per trajectory are required".into(),
        ));
    }
    Ok(())
}

/// CSV with columns `t, x_k, v_k, a_k` for the bounded trajectory `from -> to`.
pub fn emit_trajectory_csv(
    from: &PhasePoint,
    to: &PhasePoint,
    bound: AccelBound,
    samples: usize,
) -> Result<String> {
    check_samples(samples)?;
    let traj = scale_duration(from, to, bound)?;
    let mut out = format!("t{}\n", axis_columns(traj.axes().len()));
    push_rows(&mut out, "", &traj, samples, f64::NAN)?;
    Ok(out)
}

/// Plot data for a path over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPlot {
    /// Samples of every segment: `segment, from, to, t, t_path, x_k, v_k, a_k`.
    pub segments: String,
    /// Visiting order: `step, index, c_0 .. c_{m-1}`.
    pub sequence: String,
}

pub fn emit_path_plot_data(
    grid: &Grid,
    order: &[usize],
    bound: AccelBound,
    samples: usize,
) -> Result<PathPlot> {
    check_samples(samples)?;
    validate_permutation(order, grid.len())?;
    let axes = grid.dim() / 2;
    let mut segments = format!("segment,from,to,t,t_path{}\n", axis_columns(axes));
    let mut elapsed = 0.0;
    for (seg, pair) in order.windows(2).enumerate() {
        let traj = scale_duration(&grid[pair[0]], &grid[pair[1]], bound)?;
        push_rows(
            &mut segments,
            &format!("{seg},{},{},", pair[0], pair[1]),
            &traj,
            samples,
            elapsed,
        )?;
        elapsed += traj.dt();
    }
    let coord_cols: String = (0..grid.dim()).map(|k| format!(",c_{k}")).collect();
    let mut sequence = format!("step,index{coord_cols}\n");
    for (step, &idx) in order.iter().enumerate() {
        let coords: String = grid[idx]
            .coords()
            .iter()
            .map(|&c| format!(",{}", format_f64(c)))
            .collect();
        let _ = writeln!(sequence, "{step},{idx}{coords}");
    }
    Ok(PathPlot { segments, sequence })
}
