//! Grid CSV files.
//!
//! ```text
//! # phase-grid m=2 kind=rect N=3 seed=- id=1a2b3c4d
//! -1.0000000000000000e0,-1.0000000000000000e0
//! ...
//! ```
//!
//! The id hashes the file text with the trailing ` id=<8hex>` removed from the
//! header, so it covers the grid parameters and every coordinate.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phasetour_core::{Grid, GridKind, PhasePoint};

use crate::artifact::{content_hash, ArtifactId};
use crate::error::{Error, Result};

const MAGIC: &str = "# phase-grid";

/// A grid together with the id of its canonical file.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredGrid {
    pub id: ArtifactId,
    pub grid: Grid,
}

impl StoredGrid {
    pub fn new(grid: Grid) -> Self {
        let id = content_hash(unsigned_text(&grid).as_bytes());
        Self { id, grid }
    }

    pub fn file_name(&self) -> String {
        format!("grid-{}.csv", self.id)
    }

    pub fn to_text(&self) -> String {
        let body = unsigned_text(&self.grid);
        let (header, rows) = body.split_once('\n').unwrap_or((&body, ""));
        format!("{header} id={}\n{rows}", self.id)
    }

    /// Writes the grid into `dir` unless an identical file is already there.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        if !path.exists() {
            crate::write_file(&path, self.to_text().as_bytes())?;
        } else {
            load_grid(&path)?;
        }
        Ok(path)
    }
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn unsigned_text(grid: &Grid) -> String {
    let (kind, n, seed) = match grid.kind() {
        GridKind::Rectangular { per_axis } => ("rect", per_axis.to_string(), "-".to_owned()),
        GridKind::Random { seed } => ("rand", "-".to_owned(), seed.to_string()),
    };
    let mut out = format!("{MAGIC} m={} kind={kind} N={n} seed={seed}\n", grid.dim());
    for p in grid.points() {
        let row: Vec<String> = p.coords().iter().map(|&c| format_f64(c)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn header_field<'a>(fields: &'a [(&'a str, &'a str)], key: &str, path: &Path) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::format(path, format!("header lacks `{key}=`")))
}

/// Parses grid text, verifying the header id against the content.
pub fn parse_grid(text: &str, path: &Path) -> Result<StoredGrid> {
    let (header, rows) = text
        .split_once('\n')
        .ok_or_else(|| Error::format(path, "missing header line"))?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::format(path, "header must start with `# phase-grid`"))?;
    let fields: Vec<(&str, &str)> = rest
        .split_whitespace()
        .filter_map(|f| f.split_once('='))
        .collect();
    let bad = |what: &str| Error::format(path, format!("bad header value for `{what}`"));

    let m: usize = header_field(&fields, "m", path)?
        .parse()
        .map_err(|_| bad("m"))?;
    let kind = match header_field(&fields, "kind", path)? {
        "rect" => GridKind::Rectangular {
            per_axis: header_field(&fields, "N", path)?
                .parse()
                .map_err(|_| bad("N"))?,
        },
        "rand" => GridKind::Random {
            seed: header_field(&fields, "seed", path)?
                .parse()
                .map_err(|_| bad("seed"))?,
        },
        _ => return Err(bad("kind")),
    };
    let id: ArtifactId = header_field(&fields, "id", path)?.parse()?;

    let mut points = Vec::new();
    for (line_no, line) in rows.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let coords = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| {
                Error::format(
                    path,
                    format!("row {} is not a list of numbers", line_no + 1),
                )
            })?;
        points.push(PhasePoint::new(coords)?);
    }
    let grid = Grid::from_points(m, kind, points)?;

    let suffix = format!(" id={id}");
    let unsigned_header = header
        .strip_suffix(&suffix)
        .ok_or_else(|| Error::format(path, "`id=` must be the last header field"))?;
    id.verify(path, format!("{unsigned_header}\n{rows}").as_bytes())?;
    Ok(StoredGrid { id, grid })
}

pub fn load_grid(path: &Path) -> Result<StoredGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stored = parse_grid(&text, path)?;
    if let Some(named) = crate::artifact::id_from_file_name(path) {
        if named != stored.id {
            return Err(Error::Mismatch(format!(
                "{} is named for id {named} but its header says {}",
                path.display(),
                stored.id
            )));
        }
    }
    Ok(stored)
}
