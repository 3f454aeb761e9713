//! Weighted directed graphs, Laplacians, delta-thresholding, and spanning-tree
//! detection.
//!
//! Conventions: for a weight matrix `A = [a_ij]`, `a_ij` is the weight of the
//! edge `(v_j, v_i)` — information flows from column index to row index.
//! Diagonal entries carry no edge. The Laplacian has zero row sums,
//! nonpositive off-diagonal entries, and nonnegative diagonal; an all-zero row
//! marks a leader that receives no input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMat;

/// Absolute tolerance for Laplacian row-sum validation. All constructions in
/// this crate are exact sums of machine numbers, so this is float-noise only.
pub const LAPLACIAN_ROW_SUM_TOL: f64 = 1e-12;

/// Nonnegative coupling-weight matrix of a weighted digraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SquareMat", into = "SquareMat")]
pub struct WeightMatrix(SquareMat);

impl WeightMatrix {
    pub fn new(m: SquareMat) -> Result<Self> {
        if let Some((row, col, value)) = m.has_negative_entry() {
            return Err(Error::NegativeEntry { row, col, value });
        }
        Ok(WeightMatrix(m))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(SquareMat::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn as_mat(&self) -> &SquareMat {
        &self.0
    }
}

impl TryFrom<SquareMat> for WeightMatrix {
    type Error = Error;
    fn try_from(m: SquareMat) -> Result<Self> {
        WeightMatrix::new(m)
    }
}

impl From<WeightMatrix> for SquareMat {
    fn from(w: WeightMatrix) -> SquareMat {
        w.0
    }
}

/// Graph Laplacian: zero row sums, `l_ij <= 0` off-diagonal, `l_ii >= 0`.
///
/// `l_ii = 0` rows are admitted so leader agents (no incoming edges) can be
/// represented directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SquareMat", into = "SquareMat")]
pub struct Laplacian(SquareMat);

impl Laplacian {
    /// Validate an arbitrary matrix as a Laplacian.
    pub fn new(m: SquareMat) -> Result<Self> {
        let n = m.n();
        for i in 0..n {
            for j in 0..n {
                let v = m.get(i, j);
                if i == j && v < 0.0 {
                    return Err(Error::invalid(
                        "laplacian",
                        format!("diagonal entry ({i}, {i}) = {v} is negative"),
                    ));
                }
                if i != j && v > 0.0 {
                    return Err(Error::invalid(
                        "laplacian",
                        format!("off-diagonal entry ({i}, {j}) = {v} is positive"),
                    ));
                }
            }
            let sum = m.row_sum(i);
            if sum.abs() > LAPLACIAN_ROW_SUM_TOL {
                return Err(Error::RowSum {
                    row: i,
                    sum,
                    expected: 0.0,
                    tol: LAPLACIAN_ROW_SUM_TOL,
                });
            }
        }
        Ok(Laplacian(m))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(SquareMat::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn as_mat(&self) -> &SquareMat {
        &self.0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    /// `l_ii` for agent `i`.
    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        self.0.get(i, i)
    }

    /// `l_max = max_i l_ii`.
    pub fn diag_max(&self) -> f64 {
        (0..self.n()).map(|i| self.diag(i)).fold(0.0, f64::max)
    }

    /// Nonnegative linear combination of Laplacians, itself a Laplacian.
    pub fn linear_combination(terms: &[(f64, &Laplacian)]) -> Result<Laplacian> {
        let n = terms
            .first()
            .ok_or_else(|| Error::invalid("terms", "empty combination"))?
            .1
            .n();
        let mut acc = SquareMat::zeros(n);
        for &(c, l) in terms {
            if c < 0.0 {
                return Err(Error::invalid(
                    "terms",
                    format!("negative combination coefficient {c}"),
                ));
            }
            if l.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: l.n(),
                });
            }
            acc.add_scaled(c, l.as_mat());
        }
        Laplacian::new(acc)
    }

    /// Off-diagonal magnitudes `-l_ij` as a weight matrix (zero diagonal).
    pub fn weight_magnitudes(&self) -> SquareMat {
        let n = self.n();
        let mut w = SquareMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w.set(i, j, -self.0.get(i, j));
                }
            }
        }
        w
    }
}

impl TryFrom<SquareMat> for Laplacian {
    type Error = Error;
    fn try_from(m: SquareMat) -> Result<Self> {
        Laplacian::new(m)
    }
}

impl From<Laplacian> for SquareMat {
    fn from(l: Laplacian) -> SquareMat {
        l.0
    }
}

/// Laplacian of the graph with weight matrix `w`:
/// `l_ij = -a_ij` for `i != j`, `l_ii = sum_{k != i} a_ik`.
pub fn laplacian_from_weights(w: &WeightMatrix) -> Laplacian {
    let n = w.n();
    let a = w.as_mat();
    let mut l = SquareMat::zeros(n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let weight = a.get(i, j);
                diag += weight;
                l.set(i, j, -weight);
            }
        }
        l.set(i, i, diag);
    }
    // Row sums are exact: the diagonal is the same left-to-right sum that the
    // validation subtracts entry by entry. Validation still runs to catch
    // future regressions.
    Laplacian::new(l).expect("construction satisfies Laplacian invariants")
}

/// Entrywise threshold: keep `a_ij` where `a_ij >= delta`, zero elsewhere.
pub fn delta_matrix(a: &SquareMat, delta: f64) -> Result<SquareMat> {
    if delta < 0.0 {
        return Err(Error::invalid("delta", format!("{delta} < 0")));
    }
    let n = a.n();
    let mut out = SquareMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            if v >= delta {
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Successor lists of the delta-graph: edge `j -> i` exists iff
/// `a[i][j] >= delta` and `i != j`.
fn delta_graph_successors(a: &SquareMat, delta: f64) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut succ = vec![Vec::new(); n];
    for (j, successors) in succ.iter_mut().enumerate() {
        for i in 0..n {
            if i != j && a.get(i, j) >= delta {
                successors.push(i);
            }
        }
    }
    succ
}

fn reaches_all(succ: &[Vec<usize>], root: usize) -> bool {
    let n = succ.len();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[root] = true;
    queue.push_back(root);
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Root of a spanning tree of the delta-graph of `a`, if one exists.
///
/// Tries every candidate root with a breadth-first reachability sweep; returns
/// the smallest-index root. Quadratic in n, which is fine at desk scale.
pub fn delta_spanning_tree_root(a: &SquareMat, delta: f64) -> Option<usize> {
    let n = a.n();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(0);
    }
    let succ = delta_graph_successors(a, delta);
    (0..n).find(|&root| reaches_all(&succ, root))
}

/// Whether the delta-graph of `a` has a spanning tree, plus one witnessing root.
pub fn has_delta_spanning_tree(a: &SquareMat, delta: f64) -> (bool, Option<usize>) {
    match delta_spanning_tree_root(a, delta) {
        Some(root) => (true, Some(root)),
        None => (false, None),
    }
}

/// Root of a spanning tree of the delta-graph whose root also carries a
/// self-loop (`a[r][r] >= delta`), if any. Used by the SIA sufficient check.
pub fn delta_spanning_tree_root_with_self_loop(a: &SquareMat, delta: f64) -> Option<usize> {
    let n = a.n();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return (a.get(0, 0) >= delta).then_some(0);
    }
    let succ = delta_graph_successors(a, delta);
    (0..n).find(|&root| a.get(root, root) >= delta && reaches_all(&succ, root))
}
