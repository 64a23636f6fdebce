//! Dense Smith normal form and fraction-free rank.
//!
//! Both routines run on `i64` with checked arithmetic first and rerun on
//! `BigInt` if any intermediate overflows, so they never fail.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};

use super::sparse::SparseMatrix;

/// Integer types the dense routines run over. Checked operations return
/// `None` on overflow.
pub trait SnfNum: Clone + Integer + Signed + CheckedAdd + CheckedSub + CheckedMul {
    fn to_big(&self) -> BigInt;
}

impl SnfNum for i64 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl SnfNum for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

type Dense<T> = Vec<Vec<T>>;

/// `U·M·V = D`: nonzero diagonal entries are positive and each divides the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub rows: usize,
    pub cols: usize,
    pub diagonal: Vec<BigInt>,
    pub u: Option<Dense<BigInt>>,
    pub v: Option<Dense<BigInt>>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// Diagonal entries greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    /// The full `rows × cols` diagonal matrix.
    pub fn d_matrix(&self) -> Dense<BigInt> {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (i, x) in self.diagonal.iter().enumerate() {
            d[i][i] = x.clone();
        }
        d
    }
}

fn identity<T: SnfNum>(n: usize) -> Dense<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

struct Work<T> {
    a: Dense<T>,
    u: Option<Dense<T>>,
    v: Option<Dense<T>>,
}

impl<T: SnfNum> Work<T> {
    /// row_i += c · row_j
    fn row_axpy(&mut self, i: usize, j: usize, c: &T) -> Option<()> {
        fn go<T: SnfNum>(m: &mut Dense<T>, i: usize, j: usize, c: &T) -> Option<()> {
            let (src, dst) = if i < j {
                let (lo, hi) = m.split_at_mut(j);
                (&hi[0], &mut lo[i])
            } else {
                let (lo, hi) = m.split_at_mut(i);
                (&lo[j], &mut hi[0])
            };
            for (d, s) in dst.iter_mut().zip(src) {
                if !s.is_zero() {
                    *d = d.checked_add(&s.checked_mul(c)?)?;
                }
            }
            Some(())
        }
        go(&mut self.a, i, j, c)?;
        if let Some(u) = self.u.as_mut() {
            go(u, i, j, c)?;
        }
        Some(())
    }

    /// col_i += c · col_j
    fn col_axpy(&mut self, i: usize, j: usize, c: &T) -> Option<()> {
        fn go<T: SnfNum>(m: &mut Dense<T>, i: usize, j: usize, c: &T) -> Option<()> {
            for row in m.iter_mut() {
                if !row[j].is_zero() {
                    row[i] = row[i].checked_add(&row[j].checked_mul(c)?)?;
                }
            }
            Some(())
        }
        go(&mut self.a, i, j, c)?;
        if let Some(v) = self.v.as_mut() {
            go(v, i, j, c)?;
        }
        Some(())
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(u) = self.u.as_mut() {
            u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        if let Some(v) = self.v.as_mut() {
            for row in v.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -x.clone();
        }
        if let Some(u) = self.u.as_mut() {
            for x in u[i].iter_mut() {
                *x = -x.clone();
            }
        }
    }
}

fn snf_generic<T: SnfNum>(a: Dense<T>, rows: usize, cols: usize, transforms: bool) -> Option<SmithForm> {
    let mut w = Work {
        a,
        u: transforms.then(|| identity(rows)),
        v: transforms.then(|| identity(cols)),
    };
    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = &w.a[i][j];
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < w.a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        w.swap_rows(t, bi);
        w.swap_cols(t, bj);
        'outer: loop {
            for i in t + 1..rows {
                while !w.a[i][t].is_zero() {
                    let q = w.a[i][t].div_floor(&w.a[t][t]);
                    w.row_axpy(i, t, &(-q))?;
                    if !w.a[i][t].is_zero() {
                        w.swap_rows(i, t);
                    }
                }
            }
            for j in t + 1..cols {
                while !w.a[t][j].is_zero() {
                    let q = w.a[t][j].div_floor(&w.a[t][t]);
                    w.col_axpy(j, t, &(-q))?;
                    if !w.a[t][j].is_zero() {
                        w.swap_cols(j, t);
                    }
                }
            }
            if (t + 1..rows).any(|i| !w.a[i][t].is_zero()) {
                continue;
            }
            let p = w.a[t][t].clone();
            for i in t + 1..rows {
                if w.a[i][t + 1..].iter().any(|x| !x.is_multiple_of(&p)) {
                    w.row_axpy(t, i, &T::one())?;
                    continue 'outer;
                }
            }
            break;
        }
        if w.a[t][t].is_negative() {
            w.negate_row(t);
        }
        diagonal.push(w.a[t][t].to_big());
    }
    let conv = |m: Option<Dense<T>>| m.map(|m| m.iter().map(|r| r.iter().map(T::to_big).collect()).collect());
    Some(SmithForm {
        rows,
        cols,
        diagonal,
        u: conv(w.u),
        v: conv(w.v),
    })
}

/// Smith normal form of a dense integer matrix.
pub fn smith_normal_form_dense(m: &[Vec<i64>], rows: usize, cols: usize, transforms: bool) -> SmithForm {
    if let Some(s) = snf_generic::<i64>(m.to_vec(), rows, cols, transforms) {
        return s;
    }
    log::debug!("i64 overflow in {rows}x{cols} Smith form, retrying with big integers");
    let big = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    snf_generic::<BigInt>(big, rows, cols, transforms).expect("big integers do not overflow")
}

/// Smith normal form of a sparse integer matrix (densified).
pub fn smith_normal_form(m: &SparseMatrix, transforms: bool) -> SmithForm {
    smith_normal_form_dense(&m.to_dense(), m.rows(), m.cols(), transforms)
}

fn bareiss<T: SnfNum>(mut a: Dense<T>, rows: usize, cols: usize) -> Option<usize> {
    let mut rank = 0;
    let mut prev = T::one();
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let piv = pivot_row[c].clone();
        for row in rest.iter_mut() {
            let lead = row[c].clone();
            for j in c + 1..cols {
                let num = piv.checked_mul(&row[j])?.checked_sub(&lead.checked_mul(&pivot_row[j])?)?;
                row[j] = num.div_floor(&prev);
            }
            row[c] = T::zero();
        }
        prev = piv;
        rank += 1;
    }
    Some(rank)
}

/// Rank over ℚ of a dense integer matrix by fraction-free elimination.
pub fn rational_rank_dense(m: &[Vec<i64>], rows: usize, cols: usize) -> usize {
    if let Some(r) = bareiss::<i64>(m.to_vec(), rows, cols) {
        return r;
    }
    let big = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    bareiss::<BigInt>(big, rows, cols).expect("big integers do not overflow")
}

/// Product of dense big-integer matrices.
pub fn big_matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Dense<BigInt> {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .filter(|(x, _)| !x.is_zero())
                        .map(|(x, brow)| x * &brow[j])
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Determinant of a square big-integer matrix (fraction-free).
pub fn big_determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &a[n - 1][n - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(m: &[Vec<i64>]) -> Dense<BigInt> {
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn check_certificate(m: &[Vec<i64>], rows: usize, cols: usize) -> SmithForm {
        let s = smith_normal_form_dense(m, rows, cols, true);
        let u = s.u.clone().unwrap();
        let v = s.v.clone().unwrap();
        let umv = big_matmul(&big_matmul(&u, &big(m)), &v);
        assert_eq!(umv, s.d_matrix());
        assert!(big_determinant(&u).abs().is_one());
        assert!(big_determinant(&v).abs().is_one());
        for w in s.diagonal.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        assert!(s.diagonal.iter().all(|d| d.is_positive()));
        s
    }

    #[test]
    fn diag_two_three() {
        let s = check_certificate(&[vec![2, 0], vec![0, 3]], 2, 2);
        assert_eq!(s.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn zero_matrix() {
        let s = check_certificate(&[vec![0, 0, 0], vec![0, 0, 0]], 2, 3);
        assert!(s.diagonal.is_empty());
    }

    #[test]
    fn empty_shapes() {
        let s = smith_normal_form_dense(&[], 0, 3, true);
        assert_eq!(s.rank(), 0);
        let s = smith_normal_form_dense(&[vec![], vec![]], 2, 0, false);
        assert_eq!(s.rank(), 0);
    }

    #[test]
    fn overflow_escalates() {
        let x = i64::MAX / 3;
        let m = vec![vec![x, x - 1], vec![x - 7, x + 5]];
        let s = check_certificate(&m, 2, 2);
        let det = BigInt::from(x) * BigInt::from(x + 5) - BigInt::from(x - 1) * BigInt::from(x - 7);
        assert_eq!(s.diagonal.iter().product::<BigInt>(), det.abs());
    }

    #[test]
    fn bareiss_matches_known_ranks() {
        assert_eq!(rational_rank_dense(&[vec![1, 2], vec![2, 4]], 2, 2), 1);
        assert_eq!(rational_rank_dense(&[vec![0, 2, 1], vec![1, 0, 3], vec![1, 2, 4]], 3, 3), 2);
        assert_eq!(rational_rank_dense(&[vec![0, 0], vec![0, 5]], 2, 2), 1);
    }

    fn matrix(max: usize, entries: i64) -> impl Strategy<Value = (usize, usize, Vec<Vec<i64>>)> {
        (1..=max, 1..=max).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-entries..=entries, c), r)
                .prop_map(move |m| (r, c, m))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn random_certificates((r, c, m) in matrix(10, 9)) {
            let s = check_certificate(&m, r, c);
            prop_assert_eq!(s.rank(), rational_rank_dense(&m, r, c));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn eight_by_eight((_, _, m) in (Just(8usize), Just(8usize), proptest::collection::vec(proptest::collection::vec(-4i64..=4, 8), 8)).prop_map(|(a, b, m)| (a, b, m))) {
            check_certificate(&m, 8, 8);
        }
    }
}
