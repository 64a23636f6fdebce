//! Integer and rational invariants of sparse matrices.
//!
//! Unit pivots are eliminated sparsely first: every column is reduced against
//! the pivots found so far (in pivot order, so the pivot columns stay
//! triangular), and a column that ends up with a `±1` at a fresh row becomes a
//! new pivot. The remaining columns vanish on all pivot rows, so the matrix is
//! equivalent to `I ⊕ R` and only the small remainder `R` is diagonalized
//! densely.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed};

use super::snf::{rational_rank_dense, smith_normal_form_dense};
use super::sparse::{Column, SparseMatrix};
use crate::error::{Error, Result};

/// Entries allowed in the densified remainder.
const DENSE_LIMIT: usize = 1 << 26;

/// Rank and nonunit invariant factors of an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerInvariants {
    pub rank: usize,
    pub torsion: Vec<BigUint>,
}

const NO_PIVOT: u32 = u32::MAX;

struct Eliminator {
    pivot_of_row: Vec<u32>,
    pivots: Vec<(u32, Column)>,
    val: Vec<i64>,
    touched: Vec<u32>,
}

impl Eliminator {
    fn new(rows: usize) -> Self {
        Eliminator {
            pivot_of_row: vec![NO_PIVOT; rows],
            pivots: Vec::new(),
            val: vec![0; rows],
            touched: Vec::new(),
        }
    }

    /// Reduces `col` against all pivots; `None` on overflow.
    fn reduce(&mut self, col: &Column) -> Option<Column> {
        let mut heap = BinaryHeap::new();
        for &(r, v) in col {
            self.val[r as usize] = v;
            self.touched.push(r);
            let p = self.pivot_of_row[r as usize];
            if p != NO_PIVOT {
                heap.push(Reverse(p));
            }
        }
        let mut ok = true;
        while let Some(Reverse(k)) = heap.pop() {
            let (row, ref b) = self.pivots[k as usize];
            let c = self.val[row as usize];
            if c == 0 {
                continue;
            }
            // pivot entries are ±1, so c·unit cancels the row exactly
            let unit = b.iter().find(|e| e.0 == row).map_or(1, |e| e.1);
            let factor = c * unit;
            for &(r, x) in b {
                let slot = &mut self.val[r as usize];
                let was_zero = *slot == 0;
                match x.checked_mul(factor).and_then(|y| slot.checked_sub(y)) {
                    Some(v) => *slot = v,
                    None => {
                        ok = false;
                        break;
                    }
                }
                if was_zero && *slot != 0 {
                    self.touched.push(r);
                    let p = self.pivot_of_row[r as usize];
                    if p != NO_PIVOT {
                        heap.push(Reverse(p));
                    }
                }
            }
            if !ok {
                break;
            }
        }
        self.touched.sort_unstable();
        self.touched.dedup();
        let mut out = Vec::new();
        for &r in &self.touched {
            let v = std::mem::take(&mut self.val[r as usize]);
            if v != 0 {
                out.push((r, v));
            }
        }
        self.touched.clear();
        ok.then_some(out)
    }

    /// Installs `col` as a pivot if it has a unit entry on a fresh row.
    fn try_pivot(&mut self, col: Column) -> Option<Column> {
        let unit = col
            .iter()
            .find(|&&(r, v)| v.abs() == 1 && self.pivot_of_row[r as usize] == NO_PIVOT)
            .map(|e| e.0);
        match unit {
            Some(r) => {
                self.pivot_of_row[r as usize] = self.pivots.len() as u32;
                self.pivots.push((r, col));
                None
            }
            None => Some(col),
        }
    }
}

/// Splits `m` into a count of unit pivots and a dense remainder, or `None`
/// if an entry overflowed.
fn split_units(m: &SparseMatrix) -> Option<(usize, Vec<Vec<i64>>, usize, usize)> {
    let mut e = Eliminator::new(m.rows());
    let mut rest = Vec::new();
    for col in m.columns() {
        let reduced = e.reduce(col)?;
        if reduced.is_empty() {
            continue;
        }
        if let Some(r) = e.try_pivot(reduced) {
            rest.push(r);
        }
    }
    // catch up with pivots found after each remainder column
    let mut final_rest = Vec::new();
    for col in rest {
        let reduced = e.reduce(&col)?;
        if !reduced.is_empty() {
            final_rest.push(reduced);
        }
    }
    let mut rows: Vec<u32> = final_rest.iter().flat_map(|c| c.iter().map(|e| e.0)).collect();
    rows.sort_unstable();
    rows.dedup();
    let (nr, nc) = (rows.len(), final_rest.len());
    let mut dense = vec![vec![0i64; nc]; nr];
    for (j, col) in final_rest.iter().enumerate() {
        for &(r, v) in col {
            let i = rows.binary_search(&r).expect("row collected above");
            dense[i][j] = v;
        }
    }
    Some((e.pivots.len(), dense, nr, nc))
}

fn check_dense(rows: usize, cols: usize) -> Result<()> {
    if rows.saturating_mul(cols) > DENSE_LIMIT {
        return Err(Error::Validation(format!(
            "dense integer remainder of {rows}x{cols} is too large"
        )));
    }
    Ok(())
}

/// Rank and torsion of an integer matrix.
pub fn integer_invariants(m: &SparseMatrix) -> Result<IntegerInvariants> {
    let (units, dense, nr, nc) = match split_units(m) {
        Some(s) => s,
        None => {
            log::debug!("overflow during sparse elimination, falling back to dense");
            check_dense(m.rows(), m.cols())?;
            (0, m.to_dense(), m.rows(), m.cols())
        }
    };
    check_dense(nr, nc)?;
    let s = smith_normal_form_dense(&dense, nr, nc, false);
    let torsion = s
        .diagonal
        .iter()
        .filter(|d| !d.is_one())
        .map(big_to_biguint)
        .collect();
    Ok(IntegerInvariants {
        rank: units + s.rank(),
        torsion,
    })
}

/// Rank over ℚ.
pub fn rational_rank(m: &SparseMatrix) -> Result<usize> {
    let (units, dense, nr, nc) = match split_units(m) {
        Some(s) => s,
        None => {
            check_dense(m.rows(), m.cols())?;
            (0, m.to_dense(), m.rows(), m.cols())
        }
    };
    check_dense(nr, nc)?;
    Ok(units + rational_rank_dense(&dense, nr, nc))
}

pub(crate) fn big_to_biguint(b: &BigInt) -> BigUint {
    b.abs().to_biguint().expect("absolute value")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::snf::smith_normal_form;
    use proptest::prelude::*;

    #[test]
    fn multiplication_by_two() {
        let m = SparseMatrix::from_dense(1, 1, &[vec![2]]);
        let inv = integer_invariants(&m).unwrap();
        assert_eq!(inv.rank, 1);
        assert_eq!(inv.torsion, vec![BigUint::from(2u32)]);
        assert_eq!(rational_rank(&m).unwrap(), 1);
    }

    #[test]
    fn units_then_torsion() {
        let m = SparseMatrix::from_dense(
            3,
            4,
            &[vec![1, 1, 0, 2], vec![0, 1, 2, 0], vec![0, 0, 0, 4]],
        );
        let inv = integer_invariants(&m).unwrap();
        let s = smith_normal_form(&m, false);
        assert_eq!(inv.rank, s.rank());
        let expected: Vec<BigUint> = s.torsion().iter().map(big_to_biguint).collect();
        assert_eq!(inv.torsion, expected);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn agrees_with_dense_smith(rows in 1usize..9, cols in 1usize..9, seed in proptest::collection::vec(-3i64..=3, 64)) {
            let data: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| {
                let v = seed[(i * 8 + j) % 64];
                // sparsify
                if (i + 2 * j) % 3 == 0 { 0 } else { v }
            }).collect()).collect();
            let m = SparseMatrix::from_dense(rows, cols, &data);
            let inv = integer_invariants(&m).unwrap();
            let s = smith_normal_form(&m, false);
            prop_assert_eq!(inv.rank, s.rank());
            let expected: Vec<BigUint> = s.torsion().iter().map(big_to_biguint).collect();
            prop_assert_eq!(inv.torsion, expected);
            prop_assert_eq!(rational_rank(&m).unwrap(), s.rank());
        }
    }
}
