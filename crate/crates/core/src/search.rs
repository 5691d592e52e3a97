//! Search regimes over a [`CostMatrix`]: exhaustive enumeration, the
//! nearest-neighbor heuristic with randomized tie breaking, and uniform
//! random path sampling.
//!
//! Paths are open: every point is visited exactly once, any point may start,
//! and there is no closing edge back to the start.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::costspace::CostMatrix;
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Default largest `n` for which all `n!` orders are enumerated.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 10;
/// Branches within this relative margin of the cheapest one count as tied.
pub const DEFAULT_TIE_TOL: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub order: Vec<usize>,
    pub total_cost: f64,
}

/// Size of the tie set at each nearest-neighbor step (`n - 1` entries).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TieLog {
    pub multiplicities: Vec<u32>,
}

impl TieLog {
    pub fn max(&self) -> u32 {
        self.multiplicities.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Exhaustive,
    NearestNeighbor,
    Sample,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Exhaustive => "exhaustive",
            Regime::NearestNeighbor => "nn",
            Regime::Sample => "sample",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Regime::Exhaustive),
            "nn" => Ok(Regime::NearestNeighbor),
            "sample" => Ok(Regime::Sample),
            _ => Err(invalid("regime must be `exhaustive`, `nn` or `sample`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub regime: Regime,
    /// Cheapest path; the first one found on exact ties.
    pub best: Path,
    /// Cost of every evaluated path, in evaluation order.
    pub all_costs: Vec<f64>,
    /// One log per nearest-neighbor run, empty for the other regimes.
    pub tie_logs: Vec<TieLog>,
    pub seed: Option<u64>,
}

impl SearchResult {
    /// Aggregates nearest-neighbor runs in the order given.
    pub fn from_nn_runs(runs: Vec<(Path, TieLog)>, seed: u64) -> Result<Self> {
        let mut best: Option<Path> = None;
        let mut all_costs = Vec::with_capacity(runs.len());
        let mut tie_logs = Vec::with_capacity(runs.len());
        for (path, ties) in runs {
            all_costs.push(path.total_cost);
            tie_logs.push(ties);
            if best.as_ref().is_none_or(|b| path.total_cost < b.total_cost) {
                best = Some(path);
            }
        }
        Ok(Self {
            regime: Regime::NearestNeighbor,
            best: best.ok_or_else(|| invalid("no nearest-neighbor runs"))?,
            all_costs,
            tie_logs,
            seed: Some(seed),
        })
    }

    pub fn evaluated(&self) -> usize {
        self.all_costs.len()
    }
}

pub fn validate_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "expected {n} indices, got {}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n {
            return Err(Error::InvalidPermutation(format!("index {i} out of range")));
        }
        if core::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPermutation(format!("index {i} repeated")));
        }
    }
    Ok(())
}

fn sum_branches(matrix: &CostMatrix, order: &[usize]) -> f64 {
    order.windows(2).map(|w| matrix.get(w[0], w[1])).sum()
}

/// Sum of the `n - 1` consecutive branch costs along `order`.
pub fn path_cost(matrix: &CostMatrix, order: &[usize]) -> Result<f64> {
    validate_permutation(order, matrix.len())?;
    Ok(sum_branches(matrix, order))
}

/// `n!`, as a float so large `n` can still be reported.
pub fn path_count(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Visits all `n!` orders in lexicographic order.
pub fn exhaustive_search(matrix: &CostMatrix, cap: usize) -> Result<SearchResult> {
    let n = matrix.len();
    if n > cap {
        return Err(Error::SizeLimit {
            what: "exhaustive enumeration",
            n,
            cap,
        });
    }
    let mut walk = Enumeration {
        matrix,
        order: Vec::with_capacity(n),
        used: vec![false; n],
        costs: Vec::with_capacity(path_count(n) as usize),
        best_cost: f64::INFINITY,
        best_order: Vec::new(),
    };
    walk.extend(0.0);
    let best = Path {
        order: walk.best_order,
        total_cost: walk.best_cost,
    };
    Ok(SearchResult {
        regime: Regime::Exhaustive,
        best,
        all_costs: walk.costs,
        tie_logs: Vec::new(),
        seed: None,
    })
}

struct Enumeration<'a> {
    matrix: &'a CostMatrix,
    order: Vec<usize>,
    used: Vec<bool>,
    costs: Vec<f64>,
    best_cost: f64,
    best_order: Vec<usize>,
}

impl Enumeration<'_> {
    fn extend(&mut self, prefix: f64) {
        let n = self.used.len();
        if self.order.len() == n {
            // Accumulated left to right, so it equals `path_cost` bit for bit.
            let total = prefix;
            self.costs.push(total);
            if total < self.best_cost {
                self.best_cost = total;
                self.best_order.clone_from(&self.order);
            }
            return;
        }
        for next in 0..n {
            if self.used[next] {
                continue;
            }
            let step = self
                .order
                .last()
                .map_or(0.0, |&last| self.matrix.get(last, next));
            self.used[next] = true;
            self.order.push(next);
            self.extend(prefix + step);
            self.order.pop();
            self.used[next] = false;
        }
    }
}

/// Greedy path from `start`. At each step the tie set is every unvisited
/// point whose branch cost is at most `(1 + tie_tol)` times the cheapest
/// one; the next point is drawn uniformly from it.
pub fn nn_search<R: Rng + ?Sized>(
    matrix: &CostMatrix,
    start: usize,
    tie_tol: f64,
    rng: &mut R,
) -> Result<(Path, TieLog)> {
    let n = matrix.len();
    if start >= n {
        return Err(Error::IndexOutOfRange {
            index: start,
            len: n,
        });
    }
    if !(0.0..1.0).contains(&tie_tol) {
        return Err(invalid("tie tolerance must be in [0, 1)"));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut multiplicities = Vec::with_capacity(n - 1);
    let mut ties = Vec::with_capacity(n);
    let mut total = 0.0;
    let mut current = start;
    visited[start] = true;
    order.push(start);
    for _ in 1..n {
        let row = matrix.row(current);
        let cheapest = row
            .iter()
            .zip(&visited)
            .filter(|(_, &v)| !v)
            .map(|(&c, _)| c)
            .fold(f64::INFINITY, f64::min);
        let limit = cheapest * (1.0 + tie_tol);
        ties.clear();
        ties.extend((0..n).filter(|&j| !visited[j] && row[j] <= limit));
        let next = ties[rng.gen_range(0..ties.len())];
        multiplicities.push(ties.len() as u32);
        total += row[next];
        visited[next] = true;
        order.push(next);
        current = next;
    }
    Ok((
        Path {
            order,
            total_cost: total,
        },
        TieLog { multiplicities },
    ))
}

/// Starting points for repeated nearest-neighbor runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Starts {
    All,
    Indices(Vec<usize>),
}

impl Starts {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Starts::All => Ok((0..n).collect()),
            Starts::Indices(v) => {
                if v.is_empty() {
                    return Err(invalid("at least one starting point is required"));
                }
                if let Some(&bad) = v.iter().find(|&&i| i >= n) {
                    return Err(Error::IndexOutOfRange { index: bad, len: n });
                }
                Ok(v.clone())
            }
        }
    }
}

/// `count` distinct starting points drawn uniformly from `0..n`.
pub fn random_starts(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count == 0 || count > n {
        return Err(invalid("random start count must be in 1..=n"));
    }
    let mut rng = rng::substream(seed, u32::MAX, 0);
    let mut all: Vec<usize> = (0..n).collect();
    let (picked, _) = all.partial_shuffle(&mut rng, count);
    Ok(picked.to_vec())
}

/// One nearest-neighbor run on the stream derived from `(seed, start, rep)`.
pub fn nn_run(
    matrix: &CostMatrix,
    start: usize,
    rep: u32,
    tie_tol: f64,
    seed: u64,
) -> Result<(Path, TieLog)> {
    let lane = u32::try_from(start).map_err(|_| invalid("start index too large"))?;
    let mut rng = rng::substream(seed, lane, rep);
    nn_search(matrix, start, tie_tol, &mut rng)
}

/// `per_start` runs from each start, aggregated in `(start, repetition)`
/// order.
pub fn multi_nn(
    matrix: &CostMatrix,
    starts: &Starts,
    per_start: u32,
    tie_tol: f64,
    seed: u64,
) -> Result<SearchResult> {
    if per_start == 0 {
        return Err(invalid("per-start run count must be at least 1"));
    }
    let starts = starts.resolve(matrix.len())?;
    let mut runs = Vec::with_capacity(starts.len() * per_start as usize);
    for &s in &starts {
        for rep in 0..per_start {
            runs.push(nn_run(matrix, s, rep, tie_tol, seed)?);
        }
    }
    SearchResult::from_nn_runs(runs, seed)
}

/// `count` independent uniform permutations (Fisher-Yates) and their costs.
pub fn random_sample<R: Rng + ?Sized>(
    matrix: &CostMatrix,
    count: usize,
    rng: &mut R,
) -> Result<SearchResult> {
    if count == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let n = matrix.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut all_costs = Vec::with_capacity(count);
    let mut best = Path {
        order: Vec::new(),
        total_cost: f64::INFINITY,
    };
    for _ in 0..count {
        order.shuffle(rng);
        let c = sum_branches(matrix, &order);
        all_costs.push(c);
        if c < best.total_cost {
            best.total_cost = c;
            best.order.clone_from(&order);
        }
    }
    Ok(SearchResult {
        regime: Regime::Sample,
        best,
        all_costs,
        tie_logs: Vec::new(),
        seed: None,
    })
}
