//! Stochastic-matrix analysis: row-spread and contraction coefficients,
//! scrambling and SIA classification, left products, and the block-augmented
//! matrices that lift a delayed recursion to an undelayed one.
//!
//! Classification ships two procedures on purpose. The structural check
//! (spanning tree whose root has a self-loop in the delta-graph) is fast and
//! sound but incomplete; the power-iteration oracle is complete up to its
//! power cap. Callers that report verdicts state which procedure fired.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::delta_spanning_tree_root_with_self_loop;
use crate::matrix::SquareMat;

/// Row-sum tolerance for stochastic matrices. Looser than the Laplacian
/// tolerance because products accumulate rounding.
pub const STOCHASTIC_ROW_SUM_TOL: f64 = 1e-9;

/// Positivity threshold standing in for "strictly positive" when a
/// classification is requested at delta = 0.
pub const POSITIVITY_EPS: f64 = 1e-15;

/// Nonnegative square matrix with unit row sums (within tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SquareMat", into = "SquareMat")]
pub struct StochasticMatrix(SquareMat);

impl StochasticMatrix {
    pub fn new(m: SquareMat) -> Result<Self> {
        if let Some((row, col, value)) = m.has_negative_entry() {
            return Err(Error::NegativeEntry { row, col, value });
        }
        for i in 0..m.n() {
            let sum = m.row_sum(i);
            if (sum - 1.0).abs() > STOCHASTIC_ROW_SUM_TOL {
                return Err(Error::RowSum {
                    row: i,
                    sum,
                    expected: 1.0,
                    tol: STOCHASTIC_ROW_SUM_TOL,
                });
            }
        }
        Ok(StochasticMatrix(m))
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

impl TryFrom<SquareMat> for StochasticMatrix {
    type Error = Error;
    fn try_from(m: SquareMat) -> Result<Self> {
        StochasticMatrix::new(m)
    }
}

impl From<StochasticMatrix> for SquareMat {
    fn from(s: StochasticMatrix) -> SquareMat {
        s.0
    }
}

/// Row-spread coefficient: max over columns of the largest gap between any
/// two rows. Zero iff all rows are identical.
pub fn delta_coefficient(a: &StochasticMatrix) -> f64 {
    let m = a.as_mat();
    let n = m.n();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let v = m.get(i, j);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        worst = worst.max(hi - lo);
    }
    worst
}

/// Contraction coefficient: one minus the smallest shared row mass over all
/// row pairs. Strictly below one iff the matrix is scrambling.
pub fn lambda_coefficient(a: &StochasticMatrix) -> f64 {
    let m = a.as_mat();
    let n = m.n();
    let mut min_shared = f64::INFINITY;
    for i1 in 0..n {
        for i2 in (i1 + 1)..n {
            let shared: f64 = (0..n)
                .map(|j| m.get(i1, j).min(m.get(i2, j)))
                .sum();
            min_shared = min_shared.min(shared);
        }
    }
    if min_shared.is_infinite() {
        // Single row: trivially scrambling.
        min_shared = 1.0;
    }
    1.0 - min_shared
}

/// Whether every row pair shares a column with both entries at least
/// `max(delta, positivity threshold)`. `delta = 0` therefore asks for plain
/// scrambling with "positive" read as `>= 1e-15`.
pub fn is_scrambling(a: &StochasticMatrix, delta: f64) -> bool {
    let threshold = if delta > 0.0 { delta } else { POSITIVITY_EPS };
    let m = a.as_mat();
    let n = m.n();
    for i1 in 0..n {
        for i2 in (i1 + 1)..n {
            let shares = (0..n).any(|j| m.get(i1, j) >= threshold && m.get(i2, j) >= threshold);
            if !shares {
                return false;
            }
        }
    }
    true
}

/// Sound-but-incomplete SIA check: true when the delta-graph of `a`
/// (self-loops included) contains a spanning tree whose root has a self-loop.
/// A true return guarantees SIA; a false return is inconclusive.
pub fn is_sia_sufficient(a: &StochasticMatrix, delta: f64) -> bool {
    delta_spanning_tree_root_with_self_loop(a.as_mat(), delta).is_some()
}

/// Power-iteration SIA oracle: computes successive powers and reports whether
/// the row spread drops below `tol` within `max_power` steps. A false return
/// only means the cap was reached, not that the matrix is certainly not SIA.
pub fn is_sia_power_oracle(a: &StochasticMatrix, max_power: usize, tol: f64) -> bool {
    let mut power = a.clone();
    for _ in 0..max_power {
        if delta_coefficient(&power) < tol {
            return true;
        }
        let next = power.as_mat().mul(a.as_mat()).expect("same dimension");
        match StochasticMatrix::new(next) {
            Ok(p) => power = p,
            // Accumulated drift past the row-sum tolerance: stop early.
            Err(_) => return false,
        }
    }
    delta_coefficient(&power) < tol
}

/// Left product `A_k * A_{k-1} * ... * A_1` of a nonempty sequence.
pub fn left_product(seq: &[StochasticMatrix]) -> Result<StochasticMatrix> {
    let first = seq
        .first()
        .ok_or_else(|| Error::invalid("seq", "empty matrix sequence"))?;
    let mut acc = first.as_mat().clone();
    for a in &seq[1..] {
        if a.n() != acc.n() {
            return Err(Error::DimensionMismatch {
                left: acc.n(),
                right: a.n(),
            });
        }
        acc = a.as_mat().mul(&acc)?;
    }
    StochasticMatrix::new(acc)
}

/// Result of checking the product-contraction inequality
/// `Delta(prod A_i) <= prod lambda(A_i)` on a concrete chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WolfowitzCheck {
    /// Row spread of the left product.
    pub delta_of_product: f64,
    /// Product of the per-factor contraction coefficients.
    pub lambda_product_bound: f64,
    /// Whether the spread is below the bound (1e-12 slack for float noise).
    pub holds: bool,
}

/// Evaluate the contraction inequality on a chain of stochastic matrices.
pub fn wolfowitz_bound_check(seq: &[StochasticMatrix]) -> Result<WolfowitzCheck> {
    let product = left_product(seq)?;
    let delta_of_product = delta_coefficient(&product);
    let lambda_product_bound = seq.iter().map(lambda_coefficient).product();
    Ok(WolfowitzCheck {
        delta_of_product,
        lambda_product_bound,
        holds: delta_of_product <= lambda_product_bound + 1e-12,
    })
}

/// Assemble the lifted transition matrix of a delayed recursion: first block
/// row `A^0 ... A^tau`, identity blocks on the subdiagonal, zeros elsewhere.
/// Requires the concatenated row sums over all blocks to equal one.
pub fn build_augmented(coeffs: &[SquareMat]) -> Result<StochasticMatrix> {
    let blocks = coeffs.len();
    if blocks == 0 {
        return Err(Error::invalid("coeffs", "empty coefficient list"));
    }
    let n = coeffs[0].n();
    for c in coeffs {
        if c.n() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: c.n(),
            });
        }
    }
    let dim = blocks * n;
    let mut out = SquareMat::zeros(dim);
    for i in 0..n {
        for (l, block) in coeffs.iter().enumerate() {
            for j in 0..n {
                out.set(i, l * n + j, block.get(i, j));
            }
        }
    }
    for b in 1..blocks {
        for i in 0..n {
            out.set(b * n + i, (b - 1) * n + i, 1.0);
        }
    }
    StochasticMatrix::new(out)
}

/// The block pair from the augmented spanning-tree construction: the fixed
/// shift pattern `M0` and a matrix `D` whose only nonzero blocks sit in the
/// first block row.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedBlocks {
    n: usize,
    m: usize,
    m0: SquareMat,
    d: SquareMat,
}

impl AugmentedBlocks {
    /// Build from the first-block-row matrices `A_1 ... A_m` (all n-by-n,
    /// nonnegative).
    pub fn new(blocks: &[SquareMat]) -> Result<Self> {
        let m = blocks.len();
        if m == 0 {
            return Err(Error::invalid("blocks", "empty block list"));
        }
        let n = blocks[0].n();
        let dim = m * n;
        let mut d = SquareMat::zeros(dim);
        for (l, block) in blocks.iter().enumerate() {
            if block.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: block.n(),
                });
            }
            if let Some((row, col, value)) = block.has_negative_entry() {
                return Err(Error::NegativeEntry { row, col, value });
            }
            for i in 0..n {
                for j in 0..n {
                    d.set(i, l * n + j, block.get(i, j));
                }
            }
        }
        // Identity blocks at (0, 0) and on the block subdiagonal.
        let mut m0 = SquareMat::zeros(dim);
        for i in 0..n {
            m0.set(i, i, 1.0);
        }
        for b in 1..m {
            for i in 0..n {
                m0.set(b * n + i, (b - 1) * n + i, 1.0);
            }
        }
        Ok(AugmentedBlocks { n, m, m0, d })
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.m
    }

    pub fn shift(&self) -> &SquareMat {
        &self.m0
    }

    pub fn first_row_blocks(&self) -> &SquareMat {
        &self.d
    }

    /// `M_k = D + M0^k`.
    pub fn lifted(&self, k: usize) -> SquareMat {
        let mut power = SquareMat::identity(self.m * self.n);
        for _ in 0..k {
            power = power.mul(&self.m0).expect("same dimension");
        }
        let mut out = self.d.clone();
        out.add_scaled(1.0, &power);
        out
    }

    /// Entrywise sum of the first-block-row matrices.
    pub fn block_sum(&self) -> SquareMat {
        let mut sum = SquareMat::zeros(self.n);
        for l in 0..self.m {
            for i in 0..self.n {
                for j in 0..self.n {
                    let v = sum.get(i, j) + self.d.get(i, l * self.n + j);
                    sum.set(i, j, v);
                }
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::has_delta_spanning_tree;

    fn stoch(rows: Vec<Vec<f64>>) -> StochasticMatrix {
        StochasticMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn validation_rejects_bad_row_sums() {
        let err = StochasticMatrix::from_rows(vec![vec![0.6, 0.6], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::RowSum { row: 0, .. }));
    }

    #[test]
    fn delta_coefficient_examples() {
        assert_eq!(
            delta_coefficient(&stoch(vec![vec![0.5, 0.5], vec![0.5, 0.5]])),
            0.0
        );
        assert_eq!(
            delta_coefficient(&stoch(vec![vec![1.0, 0.0], vec![0.0, 1.0]])),
            1.0
        );
        let a = stoch(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        assert!((delta_coefficient(&a) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn lambda_coefficient_examples() {
        assert_eq!(
            lambda_coefficient(&stoch(vec![vec![0.5, 0.5], vec![0.5, 0.5]])),
            0.0
        );
        assert_eq!(
            lambda_coefficient(&stoch(vec![vec![1.0, 0.0], vec![0.0, 1.0]])),
            1.0
        );
        let a = stoch(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        // Shared mass: min(0.7, 0.4) + min(0.3, 0.6) = 0.7.
        assert!((lambda_coefficient(&a) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn scrambling_examples() {
        assert!(is_scrambling(
            &stoch(vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
            0.4
        ));
        assert!(!is_scrambling(
            &stoch(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            0.0
        ));
        assert!(is_scrambling(
            &stoch(vec![vec![1.0, 0.0], vec![0.5, 0.5]]),
            0.0
        ));
    }

    #[test]
    fn sia_sufficient_examples() {
        assert!(is_sia_sufficient(
            &stoch(vec![vec![1.0, 0.0], vec![0.5, 0.5]]),
            0.4
        ));
        assert!(!is_sia_sufficient(
            &stoch(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            0.5
        ));
        assert!(is_sia_sufficient(
            &stoch(vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
            0.4
        ));
    }

    #[test]
    fn sia_oracle_examples() {
        assert!(is_sia_power_oracle(
            &stoch(vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
            1,
            1e-9
        ));
        assert!(!is_sia_power_oracle(
            &stoch(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            100,
            1e-9
        ));
        // Powers of [[1,0],[0.5,0.5]] converge to identical rows [1, 0].
        assert!(is_sia_power_oracle(
            &stoch(vec![vec![1.0, 0.0], vec![0.5, 0.5]]),
            200,
            1e-9
        ));
    }

    #[test]
    fn left_product_order_and_identity() {
        let i2 = stoch(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(
            left_product(&[i2.clone(), i2.clone(), i2.clone()])
                .unwrap()
                .as_mat(),
            &SquareMat::identity(2)
        );

        let a1 = stoch(vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        assert_eq!(left_product(&[a1.clone()]).unwrap(), a1);

        let a2 = stoch(vec![vec![0.5, 0.5], vec![0.0, 1.0]]);
        let prod = left_product(&[a1, a2]).unwrap();
        assert_eq!(
            prod.as_mat().to_rows(),
            vec![vec![0.75, 0.25], vec![0.5, 0.5]]
        );
    }

    #[test]
    fn augmented_with_no_delay_is_the_matrix_itself() {
        let a = stoch(vec![vec![0.5, 0.5], vec![0.2, 0.8]]);
        let c = build_augmented(std::slice::from_ref(a.as_mat())).unwrap();
        assert_eq!(c.as_mat(), a.as_mat());
    }

    #[test]
    fn augmented_scalar_delay_example() {
        let a0 = SquareMat::from_rows(vec![vec![0.6]]).unwrap();
        let a1 = SquareMat::from_rows(vec![vec![0.4]]).unwrap();
        let c = build_augmented(&[a0, a1]).unwrap();
        assert_eq!(
            c.as_mat().to_rows(),
            vec![vec![0.6, 0.4], vec![1.0, 0.0]]
        );
    }

    #[test]
    fn augmented_pure_shift() {
        let a0 = SquareMat::identity(2);
        let a1 = SquareMat::zeros(2);
        let c = build_augmented(&[a0, a1]).unwrap();
        assert_eq!(
            c.as_mat().to_rows(),
            vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
            ]
        );
    }

    #[test]
    fn augmented_rejects_row_sum_violations() {
        let a0 = SquareMat::identity(2);
        let a1 = SquareMat::identity(2);
        assert!(build_augmented(&[a0, a1]).is_err());
    }

    #[test]
    fn wolfowitz_examples() {
        let flat = stoch(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let check = wolfowitz_bound_check(std::slice::from_ref(&flat)).unwrap();
        assert_eq!(check.delta_of_product, 0.0);
        assert_eq!(check.lambda_product_bound, 0.0);
        assert!(check.holds);

        let i2 = stoch(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let check = wolfowitz_bound_check(&[i2.clone(), i2]).unwrap();
        assert_eq!(check.delta_of_product, 1.0);
        assert_eq!(check.lambda_product_bound, 1.0);
        assert!(check.holds);
    }

    #[test]
    fn augmented_blocks_shift_pattern() {
        let blocks = vec![SquareMat::identity(2), SquareMat::zeros(2)];
        let aug = AugmentedBlocks::new(&blocks).unwrap();
        let m0 = aug.shift();
        // Identity at block (0,0) and block (1,0); zeros elsewhere.
        assert_eq!(
            m0.to_rows(),
            vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
            ]
        );
    }

    // Empirical check of the lifted spanning-tree construction: whenever the
    // block sum has a spanning tree, every M_k = D + M0^k has a spanning tree
    // whose root carries a self-loop.
    #[test]
    fn lifted_blocks_preserve_spanning_tree_with_self_loop() {
        let a1 = SquareMat::from_rows(vec![vec![0.0, 0.7], vec![0.0, 0.0]]).unwrap();
        let a2 = SquareMat::from_rows(vec![vec![0.0, 0.0], vec![0.6, 0.0]]).unwrap();
        let sum = {
            let mut s = a1.clone();
            s.add_scaled(1.0, &a2);
            s
        };
        assert!(has_delta_spanning_tree(&sum, 0.5).0);
        let aug = AugmentedBlocks::new(&[a1, a2]).unwrap();
        for k in 1..6 {
            let lifted = aug.lifted(k);
            assert!(
                delta_spanning_tree_root_with_self_loop(&lifted, 0.5).is_some(),
                "no self-looped root at k = {k}"
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        pub(super) fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> StochasticMatrix {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let mut row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0f64)).collect();
                    let sum: f64 = row.iter().sum();
                    if sum == 0.0 {
                        row[0] = 1.0;
                    } else {
                        for v in &mut row {
                            *v /= sum;
                        }
                    }
                    row
                })
                .collect();
            StochasticMatrix::from_rows(rows).unwrap()
        }

        #[test]
        fn delta_zero_iff_rows_identical() {
            let same = stoch(vec![vec![0.3, 0.7], vec![0.3, 0.7]]);
            assert_eq!(delta_coefficient(&same), 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..50 {
                let a = random_stochastic(&mut rng, 4);
                let rows = a.as_mat().to_rows();
                let identical = rows.windows(2).all(|w| w[0] == w[1]);
                assert_eq!(delta_coefficient(&a) == 0.0, identical);
            }
        }

        #[test]
        fn delta_scrambling_bounds_lambda() {
            // Force a shared column of mass at least delta in every row.
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            for _ in 0..200 {
                let n = rng.gen_range(2..6);
                let delta = rng.gen_range(0.05..0.4);
                let mut rows = Vec::new();
                for _ in 0..n {
                    let mut row: Vec<f64> =
                        (0..n).map(|_| rng.gen_range(0.0..1.0f64)).collect();
                    let sum: f64 = row.iter().sum();
                    for v in &mut row {
                        *v = *v / sum * (1.0 - delta);
                    }
                    // Column 0 gets the reserved shared mass.
                    row[0] += delta;
                    rows.push(row);
                }
                let a = StochasticMatrix::from_rows(rows).unwrap();
                assert!(is_scrambling(&a, delta));
                assert!(lambda_coefficient(&a) <= 1.0 - delta + 1e-12);
            }
        }

        #[test]
        fn left_product_preserves_stochasticity() {
            let mut rng = ChaCha8Rng::seed_from_u64(37);
            for _ in 0..100 {
                let n = rng.gen_range(1..7);
                let len = rng.gen_range(1..6);
                let seq: Vec<_> = (0..len).map(|_| random_stochastic(&mut rng, n)).collect();
                // `left_product` revalidates row sums at the 1e-9 tolerance.
                left_product(&seq).unwrap();
            }
        }

        #[test]
        fn sia_sufficient_implies_oracle_on_2x2_patterns() {
            // All 16 zero patterns; patterns with an all-zero row cannot be
            // realized as stochastic matrices.
            let mut realized = 0;
            for pattern in 0..16u8 {
                let bits = [pattern & 1, pattern >> 1 & 1, pattern >> 2 & 1, pattern >> 3 & 1];
                let rows = [[bits[0], bits[1]], [bits[2], bits[3]]];
                if rows.iter().any(|r| r == &[0, 0]) {
                    continue;
                }
                realized += 1;
                let realize = |r: &[u8; 2]| -> Vec<f64> {
                    match r {
                        [1, 1] => vec![0.5, 0.5],
                        [1, 0] => vec![1.0, 0.0],
                        [0, 1] => vec![0.0, 1.0],
                        _ => unreachable!(),
                    }
                };
                let a = StochasticMatrix::from_rows(vec![realize(&rows[0]), realize(&rows[1])])
                    .unwrap();
                let min_positive = a
                    .as_mat()
                    .to_rows()
                    .iter()
                    .flatten()
                    .copied()
                    .filter(|&v| v > 0.0)
                    .fold(f64::INFINITY, f64::min);
                if is_sia_sufficient(&a, min_positive) {
                    assert!(is_sia_power_oracle(&a, 10_000, 1e-9), "pattern {pattern:04b}");
                }
            }
            assert_eq!(realized, 9);
        }

        #[test]
        fn sia_sufficient_implies_oracle_on_random_4x4() {
            let mut rng = ChaCha8Rng::seed_from_u64(41);
            for _ in 0..200 {
                let a = random_sparse_stochastic(&mut rng, 4);
                let delta = min_positive_entry(&a) * 0.999;
                if is_sia_sufficient(&a, delta) {
                    assert!(is_sia_power_oracle(&a, 10_000, 1e-9));
                }
            }
        }

        pub(super) fn random_sparse_stochastic(rng: &mut ChaCha8Rng, n: usize) -> StochasticMatrix {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let mut row: Vec<f64> = (0..n)
                        .map(|_| {
                            if rng.gen_bool(0.4) {
                                0.0
                            } else {
                                rng.gen_range(0.1..1.0)
                            }
                        })
                        .collect();
                    let sum: f64 = row.iter().sum();
                    if sum == 0.0 {
                        let j = rng.gen_range(0..n);
                        row[j] = 1.0;
                    } else {
                        for v in &mut row {
                            *v /= sum;
                        }
                    }
                    row
                })
                .collect();
            StochasticMatrix::from_rows(rows).unwrap()
        }

        pub(super) fn min_positive_entry(a: &StochasticMatrix) -> f64 {
            a.as_mat()
                .to_rows()
                .iter()
                .flatten()
                .copied()
                .filter(|&v| v > 0.0)
                .fold(f64::INFINITY, f64::min)
        }

        // Products of matrices from a product-closed SIA family turn
        // scrambling once the chain outlives the zero-pattern count: for 2x2
        // lower-triangular stochastic matrices with structural entries at
        // least 0.1, chains of 17 = 2^4 + 1 are 0.1^17-scrambling.
        #[test]
        fn long_products_of_closed_sia_family_are_scrambling() {
            let mut rng = ChaCha8Rng::seed_from_u64(53);
            let threshold = 0.1f64.powi(17);
            for _ in 0..100 {
                let chain: Vec<StochasticMatrix> = (0..17)
                    .map(|_| {
                        let a21 = rng.gen_range(0.1..0.9);
                        StochasticMatrix::from_rows(vec![vec![1.0, 0.0], vec![a21, 1.0 - a21]])
                            .unwrap()
                    })
                    .collect();
                let prod = left_product(&chain).unwrap();
                assert!(is_scrambling(&prod, threshold));
            }
        }

        proptest! {
            // Product contraction on random chains.
            #[test]
            fn wolfowitz_holds_on_random_chains(seed in 0u64..10_000) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = rng.gen_range(2..6);
                let len = rng.gen_range(1..5);
                let seq: Vec<_> = (0..len).map(|_| random_stochastic(&mut rng, n)).collect();
                let check = wolfowitz_bound_check(&seq).unwrap();
                prop_assert!(check.holds,
                    "delta {} > bound {}", check.delta_of_product, check.lambda_product_bound);
            }

            // Block assembly keeps exact unit row sums when inputs carry them
            // exactly (dyadic entries).
            #[test]
            fn augmented_rows_sum_to_exactly_one(seed in 0u64..1000) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = rng.gen_range(1..4);
                let blocks = rng.gen_range(1..4);
                // Distribute 8 eighths across all (block, column) cells per row.
                let mut mats = vec![SquareMat::zeros(n); blocks];
                for i in 0..n {
                    let mut remaining = 8u32;
                    while remaining > 0 {
                        let l = rng.gen_range(0..blocks);
                        let j = rng.gen_range(0..n);
                        let take = rng.gen_range(1..=remaining);
                        let v = mats[l].get(i, j) + f64::from(take) / 8.0;
                        mats[l].set(i, j, v);
                        remaining -= take;
                    }
                }
                let c = build_augmented(&mats).unwrap();
                for i in 0..c.n() {
                    prop_assert_eq!(c.as_mat().row_sum(i), 1.0);
                }
            }
        }
    }
}
