//! Cost matrix persistence and parallel construction.
//!
//! A matrix is stored as `matrix-<id>.bin`, the row-major entries as
//! little-endian `f64`, next to a `matrix-<id>.json` sidecar. The id hashes the
//! binary file. An output directory acts as a cache keyed by the grid id, the
//! cost kind and the acceleration bound.

use std::path::{Path, PathBuf};

use phasetour_core::costspace::{check_matrix_size, cost_row};
use phasetour_core::{AccelBound, CostKind, CostMatrix, Grid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::artifact::{content_hash, read_verified, ArtifactId};
use crate::error::{Error, Result};
use crate::gridfile::StoredGrid;

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub grid_id: ArtifactId,
    #[serde_as(as = "DisplayFromStr")]
    pub kind: CostKind,
    pub a_max: f64,
    pub tol: f64,
    pub n: usize,
    pub matrix_id: ArtifactId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredMatrix {
    pub id: ArtifactId,
    pub grid_id: ArtifactId,
    pub matrix: CostMatrix,
}

/// Row-parallel version of `build_cost_matrix`; produces identical entries.
pub fn build_cost_matrix_par(grid: &Grid, kind: CostKind, bound: AccelBound) -> Result<CostMatrix> {
    let n = grid.len();
    check_matrix_size(n)?;
    let mut entries = vec![0.0; n * n];
    entries
        .par_chunks_mut(n)
        .enumerate()
        .try_for_each(|(row, out)| cost_row(grid, row, kind, bound, out))?;
    Ok(CostMatrix::from_entries(kind, bound, n, entries)?)
}

fn to_bytes(matrix: &CostMatrix) -> Vec<u8> {
    matrix
        .entries()
        .iter()
        .flat_map(|x| x.to_le_bytes())
        .collect()
}

impl StoredMatrix {
    pub fn new(grid: &StoredGrid, matrix: CostMatrix) -> Self {
        Self {
            id: content_hash(&to_bytes(&matrix)),
            grid_id: grid.id.clone(),
            matrix,
        }
    }

    pub fn sidecar(&self) -> MatrixSidecar {
        let bound = self.matrix.bound();
        MatrixSidecar {
            grid_id: self.grid_id.clone(),
            kind: self.matrix.kind(),
            a_max: bound.a_max(),
            tol: bound.tol(),
            n: self.matrix.len(),
            matrix_id: self.id.clone(),
        }
    }

    pub fn bin_name(&self) -> String {
        format!("matrix-{}.bin", self.id)
    }

    pub fn sidecar_name(&self) -> String {
        format!("matrix-{}.json", self.id)
    }

    /// Writes both files into `dir`, returning the sidecar path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let bin = dir.join(self.bin_name());
        if !bin.exists() {
            crate::write_file(&bin, &to_bytes(&self.matrix))?;
        }
        let side = dir.join(self.sidecar_name());
        crate::write_file(&side, crate::to_json(&self.sidecar())?.as_bytes())?;
        Ok(side)
    }
}

pub fn read_sidecar(path: &Path) -> Result<MatrixSidecar> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

/// Loads a matrix from its sidecar, checking the binary against the matrix
/// id and, when given, the sidecar against the grid the caller holds.
pub fn load_matrix(sidecar_path: &Path, grid: Option<&StoredGrid>) -> Result<StoredMatrix> {
    let side = read_sidecar(sidecar_path)?;
    if let Some(g) = grid {
        if g.id != side.grid_id {
            return Err(Error::Mismatch(format!(
                "{} was built from grid {} but grid {} was supplied",
                sidecar_path.display(),
                side.grid_id,
                g.id
            )));
        }
        if g.grid.len() != side.n {
            return Err(Error::Mismatch(format!(
                "{} has {} points but grid {} has {}",
                sidecar_path.display(),
                side.n,
                g.id,
                g.grid.len()
            )));
        }
    }
    let dir = sidecar_path.parent().unwrap_or(Path::new("."));
    let bin_path = dir.join(format!("matrix-{}.bin", side.matrix_id));
    let bytes = read_verified(&bin_path)?;
    if bytes.len() != side.n * side.n * 8 {
        return Err(Error::format(
            &bin_path,
            "size does not match n*n f64 entries",
        ));
    }
    let entries = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let bound = AccelBound::new(side.a_max, side.tol)?;
    let matrix = CostMatrix::from_entries(side.kind, bound, side.n, entries)?;
    Ok(StoredMatrix {
        id: side.matrix_id,
        grid_id: side.grid_id,
        matrix,
    })
}

/// Finds a cached matrix for `(grid, kind, bound)` in `dir`.
pub fn find_cached(
    dir: &Path,
    grid: &StoredGrid,
    kind: CostKind,
    bound: AccelBound,
) -> Result<Option<StoredMatrix>> {
    let Ok(read) = std::fs::read_dir(dir) else {
        return Ok(None);
    };
    let mut candidates: Vec<PathBuf> = read
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("matrix-") && name.ends_with(".json")
        })
        .collect();
    candidates.sort();
    for path in candidates {
        let Ok(side) = read_sidecar(&path) else {
            continue;
        };
        if side.grid_id == grid.id
            && side.kind == kind
            && side.a_max == bound.a_max()
            && side.tol == bound.tol()
        {
            return load_matrix(&path, Some(grid)).map(Some);
        }
    }
    Ok(None)
}

/// Loads the cached matrix or builds and stores a new one.
pub fn load_or_build(
    dir: &Path,
    grid: &StoredGrid,
    kind: CostKind,
    bound: AccelBound,
) -> Result<(StoredMatrix, PathBuf)> {
    if let Some(found) = find_cached(dir, grid, kind, bound)? {
        let path = dir.join(found.sidecar_name());
        return Ok((found, path));
    }
    let matrix = build_cost_matrix_par(&grid.grid, kind, bound)?;
    let stored = StoredMatrix::new(grid, matrix);
    let path = stored.save(dir)?;
    Ok((stored, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use phasetour_core::costspace::build_cost_matrix;
    use phasetour_core::grid::{make_random_grid, make_rect_grid};

    fn bound() -> AccelBound {
        AccelBound::with_default_tol(2.0).unwrap()
    }

    #[test]
    fn parallel_matches_sequential() {
        let g = make_random_grid(4, 40, 5).unwrap();
        for kind in [CostKind::Time, CostKind::Energy] {
            let seq = build_cost_matrix(&g, kind, bound()).unwrap();
            let par = build_cost_matrix_par(&g, kind, bound()).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn save_load_and_cache() {
        let dir = tempfile::tempdir().unwrap();
        let g = StoredGrid::new(make_rect_grid(2, 3).unwrap());
        let (built, path) = load_or_build(dir.path(), &g, CostKind::Time, bound()).unwrap();
        let loaded = load_matrix(&path, Some(&g)).unwrap();
        assert_eq!(built, loaded);
        let (again, _) = load_or_build(dir.path(), &g, CostKind::Time, bound()).unwrap();
        assert_eq!(again.id, built.id);
        let (energy, _) = load_or_build(dir.path(), &g, CostKind::Energy, bound()).unwrap();
        assert_ne!(energy.id, built.id);
        let side = read_sidecar(&path).unwrap();
        assert_eq!(side.kind, CostKind::Time);
        assert_eq!(side.n, 9);
    }

    #[test]
    fn wrong_grid_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = StoredGrid::new(make_rect_grid(2, 3).unwrap());
        let other = StoredGrid::new(make_random_grid(2, 9, 1).unwrap());
        let (_, path) = load_or_build(dir.path(), &g, CostKind::Time, bound()).unwrap();
        assert_eq!(load_matrix(&path, Some(&other)).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn corrupted_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = StoredGrid::new(make_rect_grid(2, 3).unwrap());
        let (m, path) = load_or_build(dir.path(), &g, CostKind::Time, bound()).unwrap();
        let bin = dir.path().join(m.bin_name());
        let mut bytes = std::fs::read(&bin).unwrap();
        bytes[9] ^= 1;
        std::fs::write(&bin, bytes).unwrap();
        assert_eq!(load_matrix(&path, Some(&g)).unwrap_err().exit_code(), 4);
    }
}
