//! Cubic point-to-point trajectories under a peak-acceleration bound.
//!
//! Each position axis follows `x(t) = a0 + a1 t + a2 t^2 + a3 t^3`, matching
//! position and velocity at both ends. All axes share one duration `dt`, and
//! since acceleration is affine in `t` its peak over `[0, dt]` is attained at
//! one of the two ends.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::PhasePoint;

/// Duration at which the upward bracket scan starts.
const DT_SCAN_START: f64 = 1e-3;
const DT_SCAN_GROWTH: f64 = 1.5;
/// Below this the downward scan gives up: the endpoints are (numerically)
/// indistinguishable and no motion can reach the bound.
const DT_FLOOR: f64 = 1e-12;
const DT_CEILING: f64 = 1e12;
const MAX_BISECTIONS: usize = 200;

/// Peak-acceleration bound with the relative tolerance within which the
/// bound must be met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelBound {
    a_max: f64,
    tol: f64,
}

impl AccelBound {
    pub const DEFAULT_TOL: f64 = 0.02;

    pub fn new(a_max: f64, tol: f64) -> Result<Self> {
        if !(a_max > 0.0 && a_max.is_finite()) {
            return Err(invalid("a_max must be positive and finite"));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid("acceleration tolerance must be in (0, 1)"));
        }
        Ok(Self { a_max, tol })
    }

    pub fn with_default_tol(a_max: f64) -> Result<Self> {
        Self::new(a_max, Self::DEFAULT_TOL)
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn accepts(&self, peak: f64) -> bool {
        (peak - self.a_max).abs() <= self.tol * self.a_max
    }
}

/// Coefficients of one axis, `x(t) = a0 + a1 t + a2 t^2 + a3 t^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl AxisCoeffs {
    fn solve(x0: f64, v0: f64, x1: f64, v1: f64, dt: f64) -> Self {
        let dx = x1 - x0;
        let dv = v1 - v0;
        let (t1, t2, t3) = (dt, dt * dt, dt * dt * dt);
        let (d1, d2) = (2.0 * dt, 3.0 * dt * dt);
        let a3 = (t2 * dv - d1 * (dx - v0 * t1)) / (t2 * d2 - t3 * d1);
        let a2 = (dx - v0 * t1 - a3 * t3) / t2;
        Self {
            a0: x0,
            a1: v0,
            a2,
            a3,
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        self.a0 + t * (self.a1 + t * (self.a2 + t * self.a3))
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.a1 + t * (2.0 * self.a2 + 3.0 * self.a3 * t)
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        2.0 * self.a2 + 6.0 * self.a3 * t
    }

    /// `max |a(t)|` over `[0, dt]`.
    pub fn peak_acceleration(&self, dt: f64) -> f64 {
        libm::fmax(
            libm::fabs(self.acceleration(0.0)),
            libm::fabs(self.acceleration(dt)),
        )
    }

    /// `∫_0^dt a(t)^2 dt` in closed form.
    pub fn energy(&self, dt: f64) -> f64 {
        let (a2, a3) = (self.a2, self.a3);
        4.0 * a2 * a2 * dt + 12.0 * a2 * a3 * dt * dt + 12.0 * a3 * a3 * dt * dt * dt
    }
}

/// A cubic motion between two phase points over a shared duration.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicTraj {
    axes: Vec<AxisCoeffs>,
    dt: f64,
    from: PhasePoint,
    to: PhasePoint,
}

/// Positions, velocities and accelerations of every axis at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub accelerations: Vec<f64>,
}

impl CubicTraj {
    pub fn axes(&self) -> &[AxisCoeffs] {
        &self.axes
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn from_point(&self) -> &PhasePoint {
        &self.from
    }

    pub fn to_point(&self) -> &PhasePoint {
        &self.to
    }

    pub fn peak_acceleration(&self) -> f64 {
        self.axes
            .iter()
            .map(|c| c.peak_acceleration(self.dt))
            .fold(0.0, libm::fmax)
    }

    pub fn eval(&self, t: f64) -> Result<Kinematics> {
        if !(0.0..=self.dt).contains(&t) {
            return Err(Error::TimeOutOfRange { t, dt: self.dt });
        }
        Ok(Kinematics {
            positions: self.axes.iter().map(|c| c.position(t)).collect(),
            velocities: self.axes.iter().map(|c| c.velocity(t)).collect(),
            accelerations: self.axes.iter().map(|c| c.acceleration(t)).collect(),
        })
    }

    pub fn time_cost(&self) -> f64 {
        self.dt
    }

    /// Sum over axes of `∫ a(t)^2 dt`, evaluated in closed form.
    pub fn energy_cost(&self) -> f64 {
        if self.dt == 0.0 {
            return 0.0;
        }
        self.axes.iter().map(|c| c.energy(self.dt)).sum()
    }
}

fn check_pair(from: &PhasePoint, to: &PhasePoint) -> Result<()> {
    if from.dim() != to.dim() {
        return Err(Error::DimensionMismatch {
            left: from.dim(),
            right: to.dim(),
        });
    }
    Ok(())
}

fn coeffs<'a>(
    from: &'a PhasePoint,
    to: &'a PhasePoint,
    dt: f64,
) -> impl Iterator<Item = AxisCoeffs> + 'a {
    let (x0, v0) = (from.positions(), from.velocities());
    let (x1, v1) = (to.positions(), to.velocities());
    (0..from.axes()).map(move |k| AxisCoeffs::solve(x0[k], v0[k], x1[k], v1[k], dt))
}

fn peak_at(from: &PhasePoint, to: &PhasePoint, dt: f64) -> f64 {
    coeffs(from, to, dt)
        .map(|c| c.peak_acceleration(dt))
        .fold(0.0, libm::fmax)
}

/// Cubic through both endpoints (position and velocity) over duration `dt`.
pub fn solve_coeffs(from: &PhasePoint, to: &PhasePoint, dt: f64) -> Result<CubicTraj> {
    check_pair(from, to)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("trajectory duration must be positive and finite"));
    }
    Ok(CubicTraj {
        axes: coeffs(from, to, dt).collect(),
        dt,
        from: from.clone(),
        to: to.clone(),
    })
}

fn stationary(p: &PhasePoint) -> CubicTraj {
    CubicTraj {
        axes: p
            .positions()
            .iter()
            .map(|&x| AxisCoeffs {
                a0: x,
                a1: 0.0,
                a2: 0.0,
                a3: 0.0,
            })
            .collect(),
        dt: 0.0,
        from: p.clone(),
        to: p.clone(),
    }
}

/// Fastest trajectory whose peak acceleration meets the bound.
///
/// The duration is scanned upward geometrically from 1 ms until the peak first
/// drops to `a_max`, then the bracketing interval is bisected until the peak
/// lies within `tol` of `a_max`. Identical endpoints give the zero-duration
/// trajectory.
pub fn scale_duration(from: &PhasePoint, to: &PhasePoint, bound: AccelBound) -> Result<CubicTraj> {
    check_pair(from, to)?;
    if from == to {
        return Ok(stationary(from));
    }
    let dt = find_duration(|dt| peak_at(from, to, dt), bound)?;
    solve_coeffs(from, to, dt)
}

fn find_duration(peak: impl Fn(f64) -> f64, bound: AccelBound) -> Result<f64> {
    let a_max = bound.a_max();
    let unattainable = Error::Unattainable { a_max };

    let (mut lo, mut hi);
    let p = peak(DT_SCAN_START);
    if p > a_max {
        lo = DT_SCAN_START;
        hi = DT_SCAN_START * DT_SCAN_GROWTH;
        while peak(hi) > a_max {
            lo = hi;
            hi *= DT_SCAN_GROWTH;
            if hi > DT_CEILING {
                return Err(unattainable);
            }
        }
    } else {
        // Nearly coincident endpoints: the crossing sits below the scan start.
        hi = DT_SCAN_START;
        lo = hi / DT_SCAN_GROWTH;
        while peak(lo) <= a_max {
            hi = lo;
            lo /= DT_SCAN_GROWTH;
            if lo < DT_FLOOR {
                return Err(unattainable);
            }
        }
    }
    // Invariant: peak(lo) > a_max >= peak(hi).
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let p = peak(mid);
        if bound.accepts(p) {
            return Ok(mid);
        }
        if p > a_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The peak jumps across the whole band, which only happens on
    // pathological input; fall back to the feasible side.
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pt(c: &[f64]) -> PhasePoint {
        PhasePoint::new(c.to_vec()).unwrap()
    }

    fn amax2() -> AccelBound {
        AccelBound::with_default_tol(2.0).unwrap()
    }

    /// Independent check: acceleration of the Hermite cubic through the
    /// endpoints, obtained by Gaussian elimination of the 4x4 boundary system.
    #[allow(clippy::needless_range_loop)]
    fn oracle_accels(x0: f64, v0: f64, x1: f64, v1: f64, dt: f64) -> (f64, f64) {
        let mut m = [
            [1.0, 0.0, 0.0, 0.0, x0],
            [0.0, 1.0, 0.0, 0.0, v0],
            [1.0, dt, dt * dt, dt * dt * dt, x1],
            [0.0, 1.0, 2.0 * dt, 3.0 * dt * dt, v1],
        ];
        for c in 0..4 {
            let piv = (c..4)
                .max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap())
                .unwrap();
            m.swap(c, piv);
            for r in 0..4 {
                if r != c {
                    let f = m[r][c] / m[c][c];
                    for k in c..5 {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
        let a: [f64; 4] = core::array::from_fn(|i| m[i][4] / m[i][i]);
        (2.0 * a[2], 2.0 * a[2] + 6.0 * a[3] * dt)
    }

    /// Brute-force sweep of dt over [0.01, 20] for the duration whose peak
    /// acceleration is closest to `a_max`, scanning from the short end so the
    /// first (fastest) crossing wins.
    fn sweep_oracle(x0: f64, v0: f64, x1: f64, v1: f64, a_max: f64) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut dt = 0.01;
        while dt <= 20.0 {
            let (s, e) = oracle_accels(x0, v0, x1, v1, dt);
            let gap = (s.abs().max(e.abs()) - a_max).abs();
            if gap < best.0 - 1e-12 {
                best = (gap, dt);
            }
            dt += 1e-4;
        }
        best.1
    }

    #[test]
    fn sweep_oracle_values() {
        // Frozen from the sweep; closed forms sqrt(3), 1, (sqrt(21)-3)/2.
        assert!((sweep_oracle(0.0, 0.0, 1.0, 0.0, 2.0) - 3f64.sqrt()).abs() < 2e-4);
        assert!((sweep_oracle(0.0, 1.0, 0.0, -1.0, 2.0) - 1.0).abs() < 2e-4);
        let fast = (21f64.sqrt() - 3.0) / 2.0;
        assert!((sweep_oracle(0.0, 1.0, 1.0, 1.0, 2.0) - fast).abs() < 2e-4);
        let slow = (21f64.sqrt() + 3.0) / 2.0;
        assert!((sweep_oracle(1.0, 1.0, 0.0, 1.0, 2.0) - slow).abs() < 2e-4);
    }

    #[test]
    fn solve_rest_to_rest() {
        let t = solve_coeffs(&pt(&[0.0, 0.0]), &pt(&[1.0, 0.0]), 1.0).unwrap();
        let c = t.axes()[0];
        assert_eq!((c.a0, c.a1), (0.0, 0.0));
        assert!((c.a2 - 3.0).abs() < 1e-12);
        assert!((c.a3 + 2.0).abs() < 1e-12);
    }

    #[test]
    fn solve_stationary() {
        let p = pt(&[0.5, 0.0]);
        for dt in [0.1, 1.0, 7.0] {
            let c = solve_coeffs(&p, &p, dt).unwrap().axes()[0];
            assert_eq!(
                c,
                AxisCoeffs {
                    a0: 0.5,
                    a1: 0.0,
                    a2: 0.0,
                    a3: 0.0
                }
            );
        }
    }

    #[test]
    fn solve_matches_boundary_conditions_outside_workspace() {
        let from = pt(&[-2.0, -1.0]);
        let to = pt(&[1.5, 1.5]);
        for dt in [0.3, 1.0, 2.5, 9.0] {
            let t = solve_coeffs(&from, &to, dt).unwrap();
            let s = t.eval(0.0).unwrap();
            let e = t.eval(dt).unwrap();
            assert!((s.positions[0] + 2.0).abs() < 1e-9);
            assert!((s.velocities[0] + 1.0).abs() < 1e-9);
            assert!((e.positions[0] - 1.5).abs() < 1e-9);
            assert!((e.velocities[0] - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_rejects_bad_input() {
        let a = pt(&[0.0, 0.0]);
        assert!(matches!(
            solve_coeffs(&a, &a, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            solve_coeffs(&a, &a, -1.0),
            Err(Error::InvalidArgument(_))
        ));
        let b = pt(&[0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            solve_coeffs(&a, &b, 1.0),
            Err(Error::DimensionMismatch { left: 2, right: 4 })
        ));
    }

    #[test]
    fn scale_known_durations() {
        let cases = [
            ([0.0, 0.0], [1.0, 0.0], 3f64.sqrt()),
            ([0.0, 1.0], [0.0, -1.0], 1.0),
            ([0.0, 1.0], [1.0, 1.0], (21f64.sqrt() - 3.0) / 2.0),
            ([1.0, 1.0], [0.0, 1.0], (21f64.sqrt() + 3.0) / 2.0),
        ];
        for (a, b, want) in cases {
            let t = scale_duration(&pt(&a), &pt(&b), amax2()).unwrap();
            assert!(
                (t.dt() / want - 1.0).abs() <= 0.02,
                "{a:?}->{b:?}: {} vs {want}",
                t.dt()
            );
            let oracle = sweep_oracle(a[0], a[1], b[0], b[1], 2.0);
            assert!((t.dt() / oracle - 1.0).abs() <= 0.02);
            let peak = t.peak_acceleration();
            assert!((1.96..=2.04).contains(&peak));
        }
    }

    #[test]
    fn scale_identical_endpoints_is_degenerate() {
        let p = pt(&[0.3, -0.4]);
        let t = scale_duration(&p, &p, amax2()).unwrap();
        assert_eq!(t.dt(), 0.0);
        assert_eq!(t.time_cost(), 0.0);
        assert_eq!(t.energy_cost(), 0.0);
        assert_eq!(t.eval(0.0).unwrap().positions, vec![0.3]);
    }

    #[test]
    fn scale_tiny_separation_scans_downward() {
        let t = scale_duration(&pt(&[0.0, 0.0]), &pt(&[1e-9, 0.0]), amax2()).unwrap();
        assert!(t.dt() < DT_SCAN_START);
        assert!((1.96..=2.04).contains(&t.peak_acceleration()));
    }

    #[test]
    fn constant_deceleration_trajectory() {
        let t = scale_duration(&pt(&[0.0, 1.0]), &pt(&[0.0, -1.0]), amax2()).unwrap();
        let dt = t.dt();
        let mid = t.eval(dt / 2.0).unwrap();
        // x(t) = t - t^2/dt, so at dt/2: x = dt/4, v = 0, a = -2/dt.
        assert!((mid.positions[0] - dt / 4.0).abs() < 1e-12);
        assert!(mid.velocities[0].abs() < 1e-12);
        assert!((mid.accelerations[0] + 2.0 / dt).abs() < 1e-12);
        let exact = solve_coeffs(&pt(&[0.0, 1.0]), &pt(&[0.0, -1.0]), 1.0).unwrap();
        let k = exact.eval(0.5).unwrap();
        assert!((k.positions[0] - 0.25).abs() < 1e-12);
        assert!(k.velocities[0].abs() < 1e-12);
        assert!((k.accelerations[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn eval_ends_and_range() {
        let t = solve_coeffs(&pt(&[0.2, -0.5]), &pt(&[-0.7, 0.9]), 1.3).unwrap();
        let c = t.axes()[0];
        let s = t.eval(0.0).unwrap();
        assert_eq!(s.accelerations[0], 2.0 * c.a2);
        let e = t.eval(1.3).unwrap();
        assert_eq!(e.accelerations[0], 2.0 * c.a2 + 6.0 * c.a3 * 1.3);
        assert!(matches!(t.eval(1.31), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(t.eval(-0.01), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn closed_form_energies() {
        let t = scale_duration(&pt(&[0.0, 1.0]), &pt(&[0.0, -1.0]), amax2()).unwrap();
        // |a| = 2/dt over dt: energy 4/dt.
        assert!((t.energy_cost() - 4.0 / t.dt()).abs() < 1e-9);
        assert!((t.energy_cost() - 4.0).abs() <= 0.08);
        let exact = solve_coeffs(&pt(&[0.0, 0.0]), &pt(&[1.0, 0.0]), 3f64.sqrt()).unwrap();
        assert!((exact.energy_cost() - 4.0 / 3.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bound_validation() {
        assert!(AccelBound::new(0.0, 0.02).is_err());
        assert!(AccelBound::new(2.0, 0.0).is_err());
        assert!(AccelBound::new(2.0, 1.0).is_err());
        assert!(AccelBound::new(f64::INFINITY, 0.02).is_err());
        assert_eq!(AccelBound::with_default_tol(2.0).unwrap().tol(), 0.02);
    }
}
