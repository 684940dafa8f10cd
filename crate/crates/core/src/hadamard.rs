//! Hadamard matrices supplying the balancing signs for BRR.
//!
//! Supported constructions:
//!
//! - orders 1 and 2 directly,
//! - Sylvester doubling `[[A, A], [A, -A]]` of any supported order,
//! - Paley I, order `q + 1` for a prime `q ≡ 3 (mod 4)`,
//! - Paley II, order `2(q + 1)` for a prime `q ≡ 1 (mod 4)`.
//!
//! Matrices are returned normalized (first row and first column all `+1`),
//! so every column except the first sums to zero. Entries are `i8` and all
//! orthogonality checks run in exact integer arithmetic.

use ndarray::{s, Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HadamardMatrix {
    entries: Array2<i8>,
}

impl HadamardMatrix {
    /// Wraps a square `±1` matrix without checking orthogonality; call
    /// [`verify`] for that.
    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidSignMatrix("empty matrix".into()));
        }
        let mut entries = Array2::zeros((n, n));
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSignMatrix(format!(
                    "row {} has {} entries, expected {n}",
                    r + 1,
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 1 && v != -1 {
                    return Err(Error::InvalidSignMatrix(format!(
                        "entry ({}, {}) is {v}",
                        r + 1,
                        c + 1
                    )));
                }
                entries[[r, c]] = v;
            }
        }
        Ok(Self { entries })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> ArrayView2<'_, i8> {
        self.entries.view()
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[[row, col]]
    }

    pub fn column_sum(&self, col: usize) -> i64 {
        self.entries.column(col).iter().map(|&v| v as i64).sum()
    }

    /// Flips row and column signs so the first row and column are all `+1`.
    /// Sign flips preserve `H'H = RI`.
    fn normalized(mut self) -> Self {
        let n = self.order();
        for r in 0..n {
            if self.entries[[r, 0]] < 0 {
                self.entries.row_mut(r).mapv_inplace(|v| -v);
            }
        }
        for c in 0..n {
            if self.entries[[0, c]] < 0 {
                self.entries.column_mut(c).mapv_inplace(|v| -v);
            }
        }
        self
    }
}

fn dot(a: ArrayView1<'_, i8>, b: ArrayView1<'_, i8>) -> i64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| x as i64 * y as i64)
        .sum()
}

/// True iff `H'H = R I` exactly.
pub fn verify(m: &HadamardMatrix) -> bool {
    let n = m.order();
    for i in 0..n {
        for j in i..n {
            let g = dot(m.entries.column(i), m.entries.column(j));
            let want = if i == j { n as i64 } else { 0 };
            if g != want {
                return false;
            }
        }
    }
    true
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Legendre symbol of `a` modulo the odd prime `q`, as -1, 0 or 1.
fn quadratic_character(a: usize, q: usize) -> i8 {
    let a = a % q;
    if a == 0 {
        return 0;
    }
    // Euler's criterion: a^((q-1)/2) mod q.
    let (mut base, mut exp, mut acc) = (a as u64, ((q - 1) / 2) as u64, 1u64);
    let q = q as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// Jacobsthal matrix `Q[i][j] = chi(j - i)`.
fn jacobsthal(q: usize) -> Array2<i8> {
    Array2::from_shape_fn((q, q), |(i, j)| quadratic_character(j + q - i, q))
}

/// Bordered core `[[0, 1'], [s*1, Q]]` of size `q + 1`.
fn bordered(q: usize, lower: i8) -> Array2<i8> {
    let mut c = Array2::zeros((q + 1, q + 1));
    c.slice_mut(s![0, 1..]).fill(1);
    c.slice_mut(s![1.., 0]).fill(lower);
    c.slice_mut(s![1.., 1..]).assign(&jacobsthal(q));
    c
}

fn paley_one(q: usize) -> Array2<i8> {
    let mut h = bordered(q, -1);
    for i in 0..=q {
        h[[i, i]] += 1;
    }
    h
}

fn paley_two(q: usize) -> Array2<i8> {
    let c = bordered(q, 1);
    let n = q + 1;
    let mut h = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let block = match c[[i, j]] {
                0 => [[1, -1], [-1, -1]],
                v => [[v, v], [v, -v]],
            };
            for (a, row) in block.iter().enumerate() {
                for (b, &v) in row.iter().enumerate() {
                    h[[2 * i + a, 2 * j + b]] = v;
                }
            }
        }
    }
    h
}

fn sylvester_double(m: &Array2<i8>) -> Array2<i8> {
    let n = m.nrows();
    let mut h = Array2::zeros((2 * n, 2 * n));
    h.slice_mut(s![..n, ..n]).assign(m);
    h.slice_mut(s![..n, n..]).assign(m);
    h.slice_mut(s![n.., ..n]).assign(m);
    h.slice_mut(s![n.., n..]).assign(&m.mapv(|v| -v));
    h
}

fn build(order: usize) -> Option<Array2<i8>> {
    match order {
        0 => None,
        1 => Some(Array2::ones((1, 1))),
        2 => Some(ndarray::arr2(&[[1, 1], [1, -1]])),
        n if n % 4 != 0 => None,
        n if n.is_power_of_two() => build(n / 2).map(|m| sylvester_double(&m)),
        n => {
            let q = n - 1;
            if is_prime(q) && q % 4 == 3 {
                return Some(paley_one(q));
            }
            if n % 8 == 4 {
                let q = n / 2 - 1;
                if is_prime(q) && q % 4 == 1 {
                    return Some(paley_two(q));
                }
            }
            build(n / 2).map(|m| sylvester_double(&m))
        }
    }
}

pub fn is_constructible(order: usize) -> bool {
    build(order).is_some()
}

/// A verified, normalized Hadamard matrix of exactly `order`.
pub fn construct(order: usize) -> Result<HadamardMatrix> {
    let entries = build(order).ok_or(Error::UnconstructibleOrder(order))?;
    let m = HadamardMatrix { entries }.normalized();
    assert!(verify(&m), "construction of order {order} is not Hadamard");
    Ok(m)
}

/// Smallest constructible order `R >= strata`.
pub fn smallest_valid_order(strata: usize) -> Result<usize> {
    let start = strata.max(1);
    let bound = 2 * start + 4;
    (start..=bound)
        .find(|&r| is_constructible(r))
        .ok_or(Error::UnconstructibleOrder(start))
}

/// Order used for BRR with `strata` strata. The all-ones column of a
/// normalized matrix is unusable, so `R - 1 >= H` zero-sum columns are
/// needed and the search starts at `H + 1`.
pub fn brr_order(strata: usize) -> Result<usize> {
    smallest_valid_order(strata + 1)
}

/// The `R x H` balancing signs `alpha_rh` chosen for a BRR design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalancingSigns {
    signs: Array2<i8>,
    columns: Vec<usize>,
}

impl BalancingSigns {
    /// `R x H` array; row `r` gives the signs of replicate `r`.
    pub fn signs(&self) -> ArrayView2<'_, i8> {
        self.signs.view()
    }

    /// Zero-based column indices of the source matrix.
    pub fn source_columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn n_replicates(&self) -> usize {
        self.signs.nrows()
    }

    pub fn n_strata(&self) -> usize {
        self.signs.ncols()
    }

    pub fn sign(&self, replicate: usize, stratum: usize) -> i8 {
        self.signs[[replicate, stratum]]
    }
}

/// Picks the first `strata` columns of `m` whose entries sum to zero.
pub fn balanced_columns(m: &HadamardMatrix, strata: usize) -> Result<BalancingSigns> {
    let zero_sum: Vec<usize> = (0..m.order()).filter(|&c| m.column_sum(c) == 0).collect();
    if zero_sum.len() < strata {
        return Err(Error::InsufficientBalancedColumns {
            order: m.order(),
            needed: strata,
            available: zero_sum.len(),
        });
    }
    let columns = zero_sum[..strata].to_vec();
    let signs = m.entries.select(ndarray::Axis(1), &columns);
    Ok(BalancingSigns { signs, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &HadamardMatrix) -> Vec<Vec<i8>> {
        m.entries().outer_iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn base_cases() {
        assert_eq!(rows(&construct(1).unwrap()), vec![vec![1]]);
        assert_eq!(rows(&construct(2).unwrap()), vec![vec![1, 1], vec![1, -1]]);
    }

    #[test]
    fn sylvester_order_four_by_hand() {
        assert_eq!(
            rows(&construct(4).unwrap()),
            vec![
                vec![1, 1, 1, 1],
                vec![1, -1, 1, -1],
                vec![1, 1, -1, -1],
                vec![1, -1, -1, 1],
            ]
        );
    }

    #[test]
    fn paley_orders_verify() {
        // 12 = 11 + 1 (Paley I), 28 = 2 * (13 + 1) (Paley II).
        for n in [12, 20, 28, 36, 44, 60, 68] {
            let m = construct(n).unwrap();
            assert_eq!(m.order(), n);
            assert!(verify(&m), "order {n}");
        }
    }

    #[test]
    fn unconstructible_orders() {
        for n in [0, 3, 6, 10, 92] {
            assert!(
                matches!(construct(n), Err(Error::UnconstructibleOrder(k)) if k == n),
                "order {n}"
            );
        }
    }

    #[test]
    fn flipped_entry_fails_verification() {
        let mut r = rows(&construct(4).unwrap());
        r[2][1] = -r[2][1];
        let m = HadamardMatrix::from_rows(&r).unwrap();
        assert!(!verify(&m));
    }

    #[test]
    fn from_rows_rejects_non_signs() {
        assert!(HadamardMatrix::from_rows(&[vec![1, 0], vec![1, -1]]).is_err());
        assert!(HadamardMatrix::from_rows(&[vec![1, 1]]).is_err());
        assert!(HadamardMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn smallest_orders() {
        assert_eq!(smallest_valid_order(1).unwrap(), 1);
        assert_eq!(smallest_valid_order(2).unwrap(), 2);
        assert_eq!(smallest_valid_order(3).unwrap(), 4);
        assert_eq!(smallest_valid_order(4).unwrap(), 4);
        assert_eq!(smallest_valid_order(9).unwrap(), 12);
        assert_eq!(smallest_valid_order(89).unwrap(), 96);
        assert_eq!(brr_order(1).unwrap(), 2);
        assert_eq!(brr_order(3).unwrap(), 4);
        assert_eq!(brr_order(4).unwrap(), 8);
        assert_eq!(brr_order(64).unwrap(), 68);
    }

    #[test]
    fn balanced_columns_skip_all_ones() {
        let b = balanced_columns(&construct(4).unwrap(), 3).unwrap();
        assert_eq!(b.source_columns(), &[1, 2, 3]);
        let b = balanced_columns(&construct(8).unwrap(), 7).unwrap();
        assert_eq!(b.source_columns(), &[1, 2, 3, 4, 5, 6, 7]);
        for h in 0..7 {
            assert_eq!(
                b.signs().column(h).iter().map(|&v| v as i64).sum::<i64>(),
                0
            );
        }
    }

    #[test]
    fn order_one_has_no_balanced_column() {
        assert!(matches!(
            balanced_columns(&construct(1).unwrap(), 1),
            Err(Error::InsufficientBalancedColumns { available: 0, .. })
        ));
        assert!(balanced_columns(&construct(4).unwrap(), 4).is_err());
    }

    #[test]
    fn quadratic_character_mod_seven() {
        // Squares mod 7: 1, 2, 4.
        let chi: Vec<i8> = (0..7).map(|a| quadratic_character(a, 7)).collect();
        assert_eq!(chi, vec![0, 1, 1, -1, 1, -1, -1]);
    }
}
