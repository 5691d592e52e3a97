//! Dense ordered-pair cost tables and their metric diagnostics.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, PhasePoint};
use crate::trajectory::{scale_duration, AccelBound};

/// Largest grid for which a dense matrix is built (6D with 4 points per axis).
pub const MAX_MATRIX_POINTS: usize = 4096;
/// Default cap for the `O(n^3)` triangle scan.
pub const DEFAULT_TRIANGLE_CAP: usize = 1024;
/// Absolute slack below which a triangle excess is treated as rounding noise.
pub const TRIANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostKind {
    Time,
    Energy,
}

impl CostKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CostKind::Time => "time",
            CostKind::Energy => "energy",
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(CostKind::Time),
            "energy" => Ok(CostKind::Energy),
            _ => Err(invalid("cost kind must be `time` or `energy`")),
        }
    }
}

/// Cost of the acceleration-bounded trajectory from `from` to `to`.
pub fn branch_cost(
    from: &PhasePoint,
    to: &PhasePoint,
    kind: CostKind,
    bound: AccelBound,
) -> Result<f64> {
    let traj = scale_duration(from, to, bound)?;
    Ok(match kind {
        CostKind::Time => traj.time_cost(),
        CostKind::Energy => traj.energy_cost(),
    })
}

/// Fills `out` with the costs from point `row` to every grid point.
pub fn cost_row(
    grid: &Grid,
    row: usize,
    kind: CostKind,
    bound: AccelBound,
    out: &mut [f64],
) -> Result<()> {
    let from = grid.point(row)?;
    if out.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            left: grid.len(),
            right: out.len(),
        });
    }
    for (col, slot) in out.iter_mut().enumerate() {
        *slot = if col == row {
            0.0
        } else {
            branch_cost(from, &grid[col], kind, bound)?
        };
    }
    Ok(())
}

/// Row-major `n x n` table; entry `(i, j)` is the cost of travelling i -> j.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    kind: CostKind,
    bound: AccelBound,
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Wraps precomputed entries, checking the zero diagonal and that every
    /// off-diagonal entry is positive and finite.
    pub fn from_entries(
        kind: CostKind,
        bound: AccelBound,
        n: usize,
        entries: Vec<f64>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(invalid("a cost matrix needs at least 2 points"));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: entries.len(),
            });
        }
        for (k, &c) in entries.iter().enumerate() {
            let ok = if k / n == k % n {
                c == 0.0
            } else {
                c > 0.0 && c.is_finite()
            };
            if !ok {
                return Err(invalid(
                    "cost matrix needs a zero diagonal and positive finite entries",
                ));
            }
        }
        Ok(Self {
            kind,
            bound,
            n,
            entries,
        })
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn bound(&self) -> AccelBound {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.n + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.entries[from * self.n..(from + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

pub fn check_matrix_size(n: usize) -> Result<()> {
    if n > MAX_MATRIX_POINTS {
        return Err(Error::SizeLimit {
            what: "dense cost matrix",
            n,
            cap: MAX_MATRIX_POINTS,
        });
    }
    Ok(())
}

/// Builds the full matrix row by row on the calling thread.
pub fn build_cost_matrix(grid: &Grid, kind: CostKind, bound: AccelBound) -> Result<CostMatrix> {
    let n = grid.len();
    check_matrix_size(n)?;
    let mut entries = vec![0.0; n * n];
    for (row, out) in entries.chunks_mut(n).enumerate() {
        cost_row(grid, row, kind, bound, out)?;
    }
    CostMatrix::from_entries(kind, bound, n, entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AsymmetryReport {
    pub pairs_checked: usize,
    pub asymmetric_pairs: usize,
    /// Largest `|c(i,j) - c(j,i)| / min(c(i,j), c(j,i))` over all pairs.
    pub max_relative_gap: f64,
    pub worst_pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriangleReport {
    pub triplets_checked: u64,
    pub violations: u64,
    /// Largest `c(i,j) - (c(i,k) + c(k,j))` among violations.
    pub worst_violation: f64,
    /// `(i, k, j)` of the worst violation.
    pub worst_triplet: Option<(usize, usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricDiagnostics {
    pub asymmetry: AsymmetryReport,
    pub triangle: Option<TriangleReport>,
}

/// Counts unordered pairs whose two directions differ by more than `rel_tol`
/// relative to the cheaper direction.
pub fn asymmetry_report(matrix: &CostMatrix, rel_tol: f64) -> AsymmetryReport {
    let n = matrix.len();
    let mut report = AsymmetryReport::default();
    for i in 0..n {
        for j in i + 1..n {
            let (fwd, back) = (matrix.get(i, j), matrix.get(j, i));
            let gap = (fwd - back).abs() / fwd.min(back);
            report.pairs_checked += 1;
            if gap > rel_tol {
                report.asymmetric_pairs += 1;
            }
            if gap > report.max_relative_gap {
                report.max_relative_gap = gap;
                report.worst_pair = Some((i, j));
            }
        }
    }
    report
}

/// Exhaustive scan of ordered triplets `(i, k, j)` of distinct points for
/// `c(i,j) > c(i,k) + c(k,j)`.
pub fn triangle_report(matrix: &CostMatrix, cap: usize) -> Result<TriangleReport> {
    let n = matrix.len();
    if n > cap {
        return Err(Error::SizeLimit {
            what: "triangle inequality scan",
            n,
            cap,
        });
    }
    let mut report = TriangleReport::default();
    for i in 0..n {
        let from_i = matrix.row(i);
        for k in 0..n {
            if k == i {
                continue;
            }
            let via = from_i[k];
            let from_k = matrix.row(k);
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                report.triplets_checked += 1;
                let excess = from_i[j] - (via + from_k[j]);
                if excess > TRIANGLE_EPS {
                    report.violations += 1;
                    if excess > report.worst_violation {
                        report.worst_violation = excess;
                        report.worst_triplet = Some((i, k, j));
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_rect_grid, Grid, GridKind};

    fn bound() -> AccelBound {
        AccelBound::with_default_tol(2.0).unwrap()
    }

    fn two_point(a: [f64; 2], b: [f64; 2]) -> Grid {
        let pts = vec![
            PhasePoint::new(a.to_vec()).unwrap(),
            PhasePoint::new(b.to_vec()).unwrap(),
        ];
        Grid::from_points(2, GridKind::Random { seed: 0 }, pts).unwrap()
    }

    fn raw(kind: CostKind, n: usize, entries: Vec<f64>) -> CostMatrix {
        CostMatrix::from_entries(kind, bound(), n, entries).unwrap()
    }

    #[test]
    fn symmetric_pair() {
        let m = build_cost_matrix(&two_point([0.0, 1.0], [0.0, -1.0]), CostKind::Time, bound())
            .unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert!((m.get(0, 1) - 1.0).abs() <= 0.02);
        assert!((m.get(1, 0) - 1.0).abs() <= 0.02);
        let r = asymmetry_report(&m, 0.05);
        assert_eq!(r.asymmetric_pairs, 0);
    }

    #[test]
    fn asymmetric_pair() {
        let m =
            build_cost_matrix(&two_point([0.0, 1.0], [1.0, 1.0]), CostKind::Time, bound()).unwrap();
        let fast = (21f64.sqrt() - 3.0) / 2.0;
        let slow = (21f64.sqrt() + 3.0) / 2.0;
        assert!((m.get(0, 1) / fast - 1.0).abs() <= 0.02);
        assert!((m.get(1, 0) / slow - 1.0).abs() <= 0.02);
        let r = asymmetry_report(&m, 0.05);
        assert_eq!(r.pairs_checked, 1);
        assert_eq!(r.asymmetric_pairs, 1);
        assert!((r.max_relative_gap - (slow - fast) / fast).abs() < 0.1);
        assert_eq!(r.worst_pair, Some((0, 1)));
    }

    #[test]
    fn diagonal_zero_on_rect_grid() {
        let g = make_rect_grid(2, 3).unwrap();
        for kind in [CostKind::Time, CostKind::Energy] {
            let m = build_cost_matrix(&g, kind, bound()).unwrap();
            for i in 0..g.len() {
                assert_eq!(m.get(i, i), 0.0);
            }
            assert!(asymmetry_report(&m, 0.05).asymmetric_pairs >= 1);
        }
    }

    #[test]
    fn entries_match_recomputation() {
        let g = make_rect_grid(2, 3).unwrap();
        let m = build_cost_matrix(&g, CostKind::Energy, bound()).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i != j {
                    let c = branch_cost(&g[i], &g[j], CostKind::Energy, bound()).unwrap();
                    assert_eq!(c.to_bits(), m.get(i, j).to_bits());
                }
            }
        }
    }

    #[test]
    fn negation_symmetry() {
        let g = make_rect_grid(2, 4).unwrap();
        let m = build_cost_matrix(&g, CostKind::Time, bound()).unwrap();
        // Negation maps row-major index k to n-1-k on a symmetric linspace.
        let n = g.len();
        for i in 0..n {
            assert_eq!(g[n - 1 - i], g[i].negated());
            for j in 0..n {
                assert_eq!(m.get(i, j).to_bits(), m.get(n - 1 - i, n - 1 - j).to_bits());
            }
        }
    }

    #[test]
    fn triangle_hand_example() {
        let m = raw(
            CostKind::Time,
            3,
            vec![0.0, 1.0, 10.0, 10.0, 0.0, 1.0, 10.0, 10.0, 0.0],
        );
        let r = triangle_report(&m, DEFAULT_TRIANGLE_CAP).unwrap();
        assert_eq!(r.triplets_checked, 6);
        assert_eq!(r.violations, 1);
        assert_eq!(r.worst_triplet, Some((0, 1, 2)));
        assert!((r.worst_violation - 8.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_uniform_matrix() {
        let n = 5;
        let e = (0..n * n)
            .map(|k| if k / n == k % n { 0.0 } else { 3.0 })
            .collect();
        let r = triangle_report(&raw(CostKind::Time, n, e), DEFAULT_TRIANGLE_CAP).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.triplets_checked, 60);
    }

    #[test]
    fn triangle_cap() {
        let n = 4;
        let e = (0..n * n)
            .map(|k| if k / n == k % n { 0.0 } else { 1.0 })
            .collect();
        assert!(matches!(
            triangle_report(&raw(CostKind::Time, n, e), 3),
            Err(Error::SizeLimit { n: 4, cap: 3, .. })
        ));
    }

    #[test]
    fn energy_violates_triangle_on_small_grid() {
        let g = make_rect_grid(2, 3).unwrap();
        let m = build_cost_matrix(&g, CostKind::Energy, bound()).unwrap();
        assert!(
            triangle_report(&m, DEFAULT_TRIANGLE_CAP)
                .unwrap()
                .violations
                >= 1
        );
    }

    #[test]
    fn from_entries_validates() {
        assert!(CostMatrix::from_entries(CostKind::Time, bound(), 2, vec![0.0, 1.0, 1.0]).is_err());
        assert!(
            CostMatrix::from_entries(CostKind::Time, bound(), 2, vec![1.0, 1.0, 1.0, 0.0]).is_err()
        );
        assert!(
            CostMatrix::from_entries(CostKind::Time, bound(), 2, vec![0.0, 0.0, 1.0, 0.0]).is_err()
        );
        assert!(CostMatrix::from_entries(
            CostKind::Time,
            bound(),
            2,
            vec![0.0, f64::NAN, 1.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn size_cap() {
        assert!(check_matrix_size(4096).is_ok());
        assert!(matches!(
            check_matrix_size(4097),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("time".parse::<CostKind>().unwrap(), CostKind::Time);
        assert_eq!("energy".parse::<CostKind>().unwrap(), CostKind::Energy);
        assert!("distance".parse::<CostKind>().is_err());
    }
}
