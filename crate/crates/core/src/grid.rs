//! Phase-space points and the grids that hold them.

use alloc::vec::Vec;
use core::ops::Index;

use rand::distributions::{Distribution, Uniform};

use crate::error::{invalid, Error, Result};
use crate::rng;

/// A point in `m`-dimensional phase space: `m/2` positions followed by the
/// `m/2` matching velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    coords: Vec<f64>,
}

impl PhasePoint {
    /// Wraps `coords`, which must have even length of at least two and be
    /// finite. Grids additionally keep every coordinate inside `[-1, 1]`;
    /// single points may lie outside so trajectories can be studied on any
    /// boundary data.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 || !coords.len().is_multiple_of(2) {
            return Err(invalid("phase point dimension must be even and at least 2"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("phase point coordinates must be finite"));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of position axes, `m/2`.
    pub fn axes(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn positions(&self) -> &[f64] {
        &self.coords[..self.axes()]
    }

    pub fn velocities(&self) -> &[f64] {
        &self.coords[self.axes()..]
    }

    pub fn is_within_bounds(&self) -> bool {
        self.coords.iter().all(|c| (-1.0..=1.0).contains(c))
    }

    /// The point with every position and velocity negated.
    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Rectangular { per_axis: usize },
    Random { seed: u64 },
}

/// An immutable, deterministically ordered set of phase points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    kind: GridKind,
    points: Vec<PhasePoint>,
}

impl Grid {
    /// Reassembles a grid from stored points, re-checking its invariants.
    pub fn from_points(dim: usize, kind: GridKind, points: Vec<PhasePoint>) -> Result<Self> {
        check_dim(dim)?;
        if points.len() < 2 {
            return Err(invalid("a grid needs at least 2 points"));
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
            if !p.is_within_bounds() {
                return Err(invalid("grid coordinates must lie in [-1, 1]"));
            }
        }
        if let GridKind::Rectangular { per_axis } = kind {
            if Some(points.len()) != rect_len(dim, per_axis) {
                return Err(invalid("rectangular grid must hold N^m points"));
            }
        }
        Ok(Self { dim, kind, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn point(&self, idx: usize) -> Result<&PhasePoint> {
        self.points.get(idx).ok_or(Error::IndexOutOfRange {
            index: idx,
            len: self.points.len(),
        })
    }
}

impl Index<usize> for Grid {
    type Output = PhasePoint;

    fn index(&self, idx: usize) -> &PhasePoint {
        &self.points[idx]
    }
}

fn check_dim(m: usize) -> Result<()> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(invalid(
            "phase-space dimension m must be even and at least 2",
        ));
    }
    Ok(())
}

fn rect_len(m: usize, per_axis: usize) -> Option<usize> {
    let exp = u32::try_from(m).ok()?;
    per_axis.checked_pow(exp)
}

/// `n` evenly spaced values from -1 to +1 inclusive, exactly antisymmetric
/// about zero.
pub fn linspace(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|k| (2.0 * k as f64 - last) / last).collect()
}

/// Cartesian grid with `per_axis` values on each of the `m` axes, row-major
/// with the last axis varying fastest.
pub fn make_rect_grid(m: usize, per_axis: usize) -> Result<Grid> {
    check_dim(m)?;
    if per_axis < 2 {
        return Err(invalid("points per axis must be at least 2"));
    }
    let total = rect_len(m, per_axis).ok_or_else(|| invalid("grid size overflows"))?;
    let values = linspace(per_axis);
    let mut digits = alloc::vec![0usize; m];
    let mut points = Vec::with_capacity(total);
    for _ in 0..total {
        points.push(PhasePoint {
            coords: digits.iter().map(|&d| values[d]).collect(),
        });
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < per_axis {
                break;
            }
            *d = 0;
        }
    }
    Ok(Grid {
        dim: m,
        kind: GridKind::Rectangular { per_axis },
        points,
    })
}

/// `count` points with independent uniform coordinates in `[-1, 1]`, drawn
/// in generation order from the ChaCha8 stream keyed by `seed`.
pub fn make_random_grid(m: usize, count: usize, seed: u64) -> Result<Grid> {
    check_dim(m)?;
    if count < 2 {
        return Err(invalid("random grid needs at least 2 points"));
    }
    let mut rng = rng::seeded(seed);
    let unit = Uniform::new_inclusive(-1.0f64, 1.0);
    let points = (0..count)
        .map(|_| PhasePoint {
            coords: (0..m).map(|_| unit.sample(&mut rng)).collect(),
        })
        .collect();
    Ok(Grid {
        dim: m,
        kind: GridKind::Random { seed },
        points,
    })
}
