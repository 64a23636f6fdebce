//! Ranks over prime fields.
//!
//! [`FieldRank`] consumes columns in batches and keeps a fully reduced echelon
//! basis: every basis vector is `1` on its own pivot row and `0` on all other
//! pivot rows. Reducing a column then costs one vector subtraction per pivot
//! row in its support, with no fill-in cascade. Batches are reduced in
//! parallel against the frozen basis, and the few survivors are inserted
//! sequentially, so the result does not depend on scheduling.
//!
//! Dense storage is bit-packed for `p = 2`. When the basis would not fit the
//! memory cap, a sparse left-looking elimination is used instead.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::sparse::{Column, SparseMatrix};

/// Memory cap for a dense basis, in bytes.
const DENSE_BYTES: usize = 1 << 30;

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut r, mut base, mut e) = (1u64, a as u64 % p as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    r as u32
}

#[inline]
fn reduce_entry(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

const NONE: u32 = u32::MAX;

/// Bit-packed fully reduced basis over F₂.
///
/// Vectors are stored only over a set `free` of rows that contains every
/// non-pivot row. A row outside `free` is a pivot row, and the only vector
/// that is nonzero there is its own, so dropping those coordinates loses
/// nothing. `free` is shrunk once most of it has become pivots, which keeps
/// reductions cheap as the rank approaches the row count.
struct BitBasis {
    free: Vec<u32>,
    coord_of_row: Vec<u32>,
    words: usize,
    pivot_of_row: Vec<u32>,
    /// Pivot coordinates inside `free`.
    mask: Vec<u64>,
    pivots_in_free: usize,
    vectors: Vec<Vec<u64>>,
}

impl BitBasis {
    fn new(rows: usize) -> Self {
        BitBasis {
            free: (0..rows as u32).collect(),
            coord_of_row: (0..rows as u32).collect(),
            words: rows.div_ceil(64),
            pivot_of_row: vec![NONE; rows],
            mask: vec![0; rows.div_ceil(64)],
            pivots_in_free: 0,
            vectors: Vec::new(),
        }
    }

    /// Reduces `col` into `v` and reports whether anything is left.
    fn reduce_into(&self, col: &Column, v: &mut Vec<u64>) -> bool {
        v.clear();
        v.resize(self.words, 0);
        let mut any = false;
        for &(r, x) in col {
            if x & 1 == 0 {
                continue;
            }
            any = true;
            let c = self.coord_of_row[r as usize];
            if c != NONE {
                v[c as usize / 64] ^= 1 << (c % 64);
            } else {
                for (a, b) in v.iter_mut().zip(&self.vectors[self.pivot_of_row[r as usize] as usize]) {
                    *a ^= *b;
                }
            }
        }
        if !any {
            return false;
        }
        self.reduce_dense(v);
        v.iter().any(|&w| w != 0)
    }

    /// Clears all pivot rows of `v`. Subtracting a basis vector only changes
    /// its own pivot bit among pivot rows, so one pass suffices.
    fn reduce_dense(&self, v: &mut [u64]) {
        for w in 0..self.words {
            let mut hits = v[w] & self.mask[w];
            while hits != 0 {
                let bit = hits.trailing_zeros() as usize;
                hits &= hits - 1;
                let b = &self.vectors[self.pivot_of_row[self.free[w * 64 + bit] as usize] as usize];
                for (x, y) in v.iter_mut().zip(b) {
                    *x ^= *y;
                }
            }
        }
    }

    fn insert(&mut self, mut v: Vec<u64>) -> bool {
        self.reduce_dense(&mut v);
        let Some(w) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let bit = v[w].trailing_zeros() as usize;
        let row = self.free[w * 64 + bit] as usize;
        let id = self.vectors.len() as u32;
        for b in self.vectors.iter_mut() {
            if b[w] >> bit & 1 == 1 {
                for (x, y) in b.iter_mut().zip(&v) {
                    *x ^= *y;
                }
            }
        }
        self.pivot_of_row[row] = id;
        self.mask[w] |= 1 << bit;
        self.pivots_in_free += 1;
        self.vectors.push(v);
        true
    }

    /// Drops pivot rows from `free` once they make up most of it. Reduced
    /// vectors taken before this call are no longer valid.
    fn maybe_compact(&mut self) {
        if self.free.len() < 256 || self.pivots_in_free * 2 < self.free.len() {
            return;
        }
        let kept: Vec<u32> = self.free.iter().copied().filter(|&r| self.pivot_of_row[r as usize] == NONE).collect();
        let words = kept.len().div_ceil(64);
        for v in self.vectors.iter_mut() {
            let mut out = vec![0u64; words];
            for (j, &r) in kept.iter().enumerate() {
                let c = self.coord_of_row[r as usize] as usize;
                if v[c / 64] >> (c % 64) & 1 == 1 {
                    out[j / 64] |= 1 << (j % 64);
                }
            }
            *v = out;
        }
        for &r in &self.free {
            self.coord_of_row[r as usize] = NONE;
        }
        for (j, &r) in kept.iter().enumerate() {
            self.coord_of_row[r as usize] = j as u32;
        }
        self.free = kept;
        self.words = words;
        self.mask = vec![0; words];
        self.pivots_in_free = 0;
    }
}

/// Dense fully reduced basis over F_p, `p` odd.
struct DenseBasis {
    p: u32,
    rows: usize,
    pivot_of_row: Vec<u32>,
    pivot_rows: Vec<u32>,
    vectors: Vec<Vec<u32>>,
}

impl DenseBasis {
    fn new(rows: usize, p: u32) -> Self {
        DenseBasis {
            p,
            rows,
            pivot_of_row: vec![NONE; rows],
            pivot_rows: Vec::new(),
            vectors: Vec::new(),
        }
    }

    fn axpy(&self, v: &mut [u32], c: u32, b: &[u32]) {
        let p = self.p as u64;
        let neg = (p - c as u64) % p;
        for (x, &y) in v.iter_mut().zip(b) {
            if y != 0 {
                *x = ((*x as u64 + neg * y as u64) % p) as u32;
            }
        }
    }

    fn reduce(&self, col: &Column) -> Option<Vec<u32>> {
        let mut v = vec![0u32; self.rows];
        let mut any = false;
        for &(r, x) in col {
            let x = reduce_entry(x, self.p);
            if x != 0 {
                v[r as usize] = x;
                any = true;
            }
        }
        if !any {
            return None;
        }
        let hits: Vec<(u32, u32)> = col
            .iter()
            .filter(|&&(r, _)| self.pivot_of_row[r as usize] != NONE)
            .map(|&(r, _)| (r, v[r as usize]))
            .filter(|&(_, c)| c != 0)
            .collect();
        for (r, c) in hits {
            self.axpy(&mut v, c, &self.vectors[self.pivot_of_row[r as usize] as usize]);
        }
        v.iter().any(|&x| x != 0).then_some(v)
    }

    fn insert(&mut self, mut v: Vec<u32>) -> bool {
        // clear pivots added since `v` was reduced
        for k in 0..self.pivot_rows.len() {
            let r = self.pivot_rows[k] as usize;
            let c = v[r];
            if c != 0 {
                let b = std::mem::take(&mut self.vectors[k]);
                self.axpy(&mut v, c, &b);
                self.vectors[k] = b;
            }
        }
        let Some(row) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(v[row], self.p) as u64;
        for x in v.iter_mut() {
            *x = (*x as u64 * inv % self.p as u64) as u32;
        }
        for k in 0..self.vectors.len() {
            let c = self.vectors[k][row];
            if c != 0 {
                let mut b = std::mem::take(&mut self.vectors[k]);
                self.axpy(&mut b, c, &v);
                self.vectors[k] = b;
            }
        }
        self.pivot_of_row[row] = self.vectors.len() as u32;
        self.pivot_rows.push(row as u32);
        self.vectors.push(v);
        true
    }
}

/// Sparse left-looking elimination: pivot columns stay triangular and are
/// applied in pivot order.
struct SparseBasis {
    p: u32,
    pivot_of_row: Vec<u32>,
    pivots: Vec<(u32, Vec<(u32, u32)>)>,
    val: Vec<u32>,
    touched: Vec<u32>,
}

impl SparseBasis {
    fn new(rows: usize, p: u32) -> Self {
        SparseBasis {
            p,
            pivot_of_row: vec![NONE; rows],
            pivots: Vec::new(),
            val: vec![0; rows],
            touched: Vec::new(),
        }
    }

    fn insert(&mut self, col: &Column) -> bool {
        let p = self.p as u64;
        let mut heap = BinaryHeap::new();
        for &(r, x) in col {
            let x = reduce_entry(x, self.p);
            if x == 0 {
                continue;
            }
            self.val[r as usize] = x;
            self.touched.push(r);
            let k = self.pivot_of_row[r as usize];
            if k != NONE {
                heap.push(Reverse(k));
            }
        }
        while let Some(Reverse(k)) = heap.pop() {
            let (row, ref b) = self.pivots[k as usize];
            let c = self.val[row as usize];
            if c == 0 {
                continue;
            }
            // pivot columns are normalized to 1 on their pivot row
            let neg = (p - c as u64) % p;
            for &(r, y) in b {
                let slot = &mut self.val[r as usize];
                let was_zero = *slot == 0;
                *slot = ((*slot as u64 + neg * y as u64) % p) as u32;
                if was_zero && *slot != 0 {
                    self.touched.push(r);
                    let k2 = self.pivot_of_row[r as usize];
                    if k2 != NONE {
                        heap.push(Reverse(k2));
                    }
                }
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
        if out.is_empty() {
            return false;
        }
        let (row, lead) = *out.last().expect("nonempty");
        let inv = inv_mod(lead, self.p) as u64;
        for e in out.iter_mut() {
            e.1 = (e.1 as u64 * inv % p) as u32;
        }
        self.pivot_of_row[row as usize] = self.pivots.len() as u32;
        self.pivots.push((row, out));
        true
    }
}

enum Backend {
    Bits(BitBasis),
    Dense(DenseBasis),
    Sparse(SparseBasis),
}

/// Streaming rank of a matrix over F_p.
pub struct FieldRank {
    backend: Backend,
    rank: usize,
    max_rank: usize,
    /// Input columns that raised the rank, when requested.
    witnesses: Option<Vec<Column>>,
}

impl FieldRank {
    /// An accumulator for columns with `rows` rows. Consumption stops once the
    /// rank reaches `max_rank`, which must be a valid upper bound.
    pub fn new(p: u32, rows: usize, max_rank: usize) -> Self {
        let max_rank = max_rank.min(rows);
        let bytes = if p == 2 {
            rows.div_ceil(64) * 8
        } else {
            rows * 4
        }
        .saturating_mul(max_rank);
        let backend = if bytes > DENSE_BYTES {
            Backend::Sparse(SparseBasis::new(rows, p))
        } else if p == 2 {
            Backend::Bits(BitBasis::new(rows))
        } else {
            Backend::Dense(DenseBasis::new(rows, p))
        };
        FieldRank {
            backend,
            rank: 0,
            max_rank,
            witnesses: None,
        }
    }

    /// Keeps the columns that raised the rank; they span the column space.
    pub fn with_witnesses(mut self) -> Self {
        self.witnesses = Some(vec![]);
        self
    }

    pub fn witnesses(&self) -> Option<&[Column]> {
        self.witnesses.as_deref()
    }

    pub fn into_witnesses(self) -> Option<Vec<Column>> {
        self.witnesses
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full(&self) -> bool {
        self.rank >= self.max_rank
    }

    fn raised(&mut self, col: &Column) -> bool {
        self.rank += 1;
        if let Some(w) = &mut self.witnesses {
            w.push(col.clone());
        }
        self.rank >= self.max_rank
    }

    pub fn push_columns(&mut self, cols: &[Column]) {
        if self.is_full() {
            return;
        }
        let mut start = 0;
        while start < cols.len() && !self.is_full() {
            let chunk = &cols[start..(start + 4096).min(cols.len())];
            start += chunk.len();
            // survivors of the frozen basis, inserted in input order
            let survivors: Vec<(usize, Survivor)> = match &self.backend {
                Backend::Bits(b) => chunk
                    .par_iter()
                    .enumerate()
                    .map_init(
                        || vec![0u64; b.words],
                        |buf, (i, c)| b.reduce_into(c, buf).then(|| (i, Survivor::Bits(buf.clone()))),
                    )
                    .flatten()
                    .collect(),
                Backend::Dense(b) => chunk
                    .par_iter()
                    .enumerate()
                    .filter_map(|(i, c)| b.reduce(c).map(|v| (i, Survivor::Dense(v))))
                    .collect(),
                Backend::Sparse(_) => (0..chunk.len()).map(|i| (i, Survivor::Raw)).collect(),
            };
            let mut grown = false;
            for (i, v) in survivors {
                let grew = match (&mut self.backend, v) {
                    (Backend::Bits(b), Survivor::Bits(v)) => b.insert(v),
                    (Backend::Dense(b), Survivor::Dense(v)) => b.insert(v),
                    (Backend::Sparse(b), Survivor::Raw) => b.insert(&chunk[i]),
                    _ => unreachable!("survivor matches its backend"),
                };
                grown |= grew;
                if grew && self.raised(&chunk[i]) {
                    return;
                }
            }
            if let (Backend::Bits(b), true) = (&mut self.backend, grown) {
                b.maybe_compact();
            }
        }
    }
}

enum Survivor {
    Bits(Vec<u64>),
    Dense(Vec<u32>),
    Raw,
}

/// Rank of `m` over F_p.
pub fn rank_mod_p(m: &SparseMatrix, p: u32) -> usize {
    let mut acc = FieldRank::new(p, m.rows(), m.cols().min(m.rows()));
    // sparsest columns first
    let mut order: Vec<usize> = (0..m.cols()).collect();
    order.sort_by_key(|&c| m.column(c).len());
    let cols: Vec<Column> = order.iter().map(|&c| m.column(c).clone()).collect();
    acc.push_columns(&cols);
    acc.rank()
}

/// Rank over F_p with a forced sparse backend, for cross-checks.
pub fn rank_mod_p_sparse(m: &SparseMatrix, p: u32) -> usize {
    let mut b = SparseBasis::new(m.rows(), p);
    m.columns().iter().filter(|c| b.insert(c)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::snf::smith_normal_form;
    use num_integer::Integer;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rank_via_smith(m: &SparseMatrix, p: u32) -> usize {
        let s = smith_normal_form(m, false);
        s.diagonal.iter().filter(|d| !d.is_multiple_of(&BigInt::from(p))).count()
    }

    #[test]
    fn inverses() {
        for p in [3u32, 5, 7, 101] {
            for a in 1..p {
                assert_eq!(a as u64 * inv_mod(a, p) as u64 % p as u64, 1);
            }
        }
    }

    #[test]
    fn early_stop() {
        let m = SparseMatrix::from_dense(2, 3, &[vec![1, 0, 1], vec![0, 1, 1]]);
        let mut acc = FieldRank::new(2, 2, 2);
        acc.push_columns(&m.columns()[..2]);
        assert!(acc.is_full());
        assert_eq!(acc.rank(), 2);
    }

    #[test]
    fn compaction_keeps_ranks() {
        // tall and wide sparse matrices with a planted dependency, large
        // enough that pivot rows are dropped from the stored coordinates
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = |m: u64| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % m
        };
        for (rows, cols) in [(700usize, 400usize), (400, 1500), (1000, 1000)] {
            let mut columns: Vec<Column> = (0..cols)
                .map(|_| {
                    let mut c: Column = (0..4).map(|_| (next(rows as u64) as u32, 1)).collect();
                    c.sort();
                    c.dedup_by_key(|e| e.0);
                    c
                })
                .collect();
            // the last column repeats the sum of the first two
            let mut sum = columns[0].clone();
            sum.extend(columns[1].iter().copied());
            *columns.last_mut().unwrap() = sum;
            let m = SparseMatrix::from_columns(rows, columns).unwrap();
            assert_eq!(rank_mod_p(&m, 2), rank_mod_p_sparse(&m, 2), "{rows}x{cols}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn ranks_agree(rows in 1usize..12, cols in 1usize..12, p in prop::sample::select(vec![2u32, 3, 5, 7]), seed in proptest::collection::vec(-4i64..=4, 144)) {
            let data: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 12 + j]).collect()).collect();
            let m = SparseMatrix::from_dense(rows, cols, &data);
            let expected = rank_via_smith(&m, p);
            prop_assert_eq!(rank_mod_p(&m, p), expected);
            prop_assert_eq!(rank_mod_p_sparse(&m, p), expected);
            let mut acc = FieldRank::new(p, rows, cols).with_witnesses();
            acc.push_columns(m.columns());
            let w = acc.into_witnesses().unwrap();
            prop_assert_eq!(w.len(), expected);
            prop_assert_eq!(rank_mod_p(&SparseMatrix::from_columns(rows, w).unwrap(), p), expected);
        }
    }
}
