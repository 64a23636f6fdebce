//! Normalized chains of multisimplicial sets.
//!
//! The basis at a multi-index is its set of nondegenerate non-basepoint cells,
//! found by striking out every image of a degeneracy from the levels below.
//! Degree-`d` bases concatenate levels of total degree `d` in lexicographic
//! order. Boundary columns are generated in chunks, in parallel, and handed
//! out in basis order, so large top degrees can be streamed into a rank
//! accumulator without ever being stored.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use rayon::prelude::*;

use super::maps::{check_map_bounded, MSMap};
use super::{count_u32, MultiIndex, SharedSS, SimplicialOp};
use crate::chains::{normalize_column, ChainComplex, ChainMap, Column, Ring, SparseMatrix};
use crate::error::{Error, Result};

/// Cells handed to a structure map per call.
const CHUNK: usize = 1 << 13;
/// Chunks generated in parallel before being handed out.
const BATCH_CHUNKS: usize = 64;

/// All multi-indices with `k` entries summing to `d`, in lexicographic order.
pub fn multi_indices(k: usize, d: usize) -> Vec<MultiIndex> {
    fn go(k: usize, d: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if k == 1 {
            prefix.push(d);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=d {
            prefix.push(first);
            go(k - 1, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = vec![];
    if k == 0 {
        if d == 0 {
            out.push(MultiIndex(vec![]));
        }
        return out;
    }
    go(k, d, &mut vec![], &mut out);
    out
}

/// Nondegenerate cells at one multi-index, as a bitmap with rank support.
pub struct LevelBasis {
    pub index: MultiIndex,
    /// Non-basepoint cells at this level, degenerate or not.
    pub count: u32,
    bits: Vec<u64>,
    prefix: Vec<u32>,
    rank: usize,
}

impl LevelBasis {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Position of `cell` in the basis, if it is nondegenerate.
    #[inline]
    pub fn position(&self, cell: u32) -> Option<u32> {
        let (w, b) = (cell as usize / 64, cell % 64);
        let word = self.bits[w];
        if word >> b & 1 == 0 {
            return None;
        }
        Some(self.prefix[w] + (word & ((1u64 << b) - 1)).count_ones())
    }

    pub fn is_nondegenerate(&self, cell: u32) -> bool {
        self.position(cell).is_some()
    }

    /// Nondegenerate cells in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(w as u32 * 64 + b)
            })
        })
    }

    /// Nondegenerate cells split into runs of at most `CHUNK`.
    fn chunks(&self) -> Vec<Vec<u32>> {
        let mut out = vec![];
        let mut cur = Vec::with_capacity(CHUNK.min(self.rank));
        for c in self.cells() {
            cur.push(c);
            if cur.len() == CHUNK {
                out.push(std::mem::replace(&mut cur, Vec::with_capacity(CHUNK)));
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }
}

/// The basis of the total complex in one degree.
pub struct DegreeBasis {
    pub degree: usize,
    pub blocks: Vec<Arc<LevelBasis>>,
    pub offsets: Vec<usize>,
    pub dim: usize,
    by_index: HashMap<MultiIndex, usize>,
}

impl DegreeBasis {
    pub fn block_of(&self, q: &MultiIndex) -> Option<usize> {
        self.by_index.get(q).copied()
    }

    /// Global position of `cell` at level `q`.
    pub fn locate(&self, q: &MultiIndex, cell: u32) -> Option<usize> {
        let b = self.block_of(q)?;
        self.blocks[b].position(cell).map(|p| self.offsets[b] + p as usize)
    }
}

/// Builds bases and boundary matrices of normalized chains, with a per-level
/// cell budget.
pub struct ChainBuilder {
    x: SharedSS,
    budget: u64,
    levels: Mutex<HashMap<MultiIndex, Arc<LevelBasis>>>,
}

struct FaceOp {
    op: SimplicialOp,
    sign: i64,
    target: MultiIndex,
}

fn faces_of(q: &MultiIndex) -> Vec<FaceOp> {
    let mut out = vec![];
    let mut before = 0usize;
    for (j, &level) in q.0.iter().enumerate() {
        if level >= 1 {
            let mut target = q.clone();
            target.0[j] -= 1;
            for i in 0..=level {
                let sign = if (i + before).is_multiple_of(2) { 1 } else { -1 };
                out.push(FaceOp {
                    op: SimplicialOp::face(j, i),
                    sign,
                    target: target.clone(),
                });
            }
        }
        before += level;
    }
    out
}

impl ChainBuilder {
    pub fn new(x: SharedSS, budget: u64) -> Self {
        ChainBuilder {
            x,
            budget,
            levels: Mutex::new(HashMap::new()),
        }
    }

    pub fn object(&self) -> &SharedSS {
        &self.x
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// The nondegenerate cells at `q`.
    pub fn level_basis(&self, q: &MultiIndex) -> Result<Arc<LevelBasis>> {
        if let Some(b) = self.levels.lock().get(q) {
            return Ok(b.clone());
        }
        let b = Arc::new(self.compute_level(q)?);
        self.levels.lock().insert(q.clone(), b.clone());
        Ok(b)
    }

    fn compute_level(&self, q: &MultiIndex) -> Result<LevelBasis> {
        let x = &*self.x;
        let count = count_u32(x, q.levels(), self.budget)?;
        let words = (count as usize + 1).div_ceil(64);
        let bits: Vec<AtomicU64> = (0..words).map(|_| AtomicU64::new(!0)).collect();
        // basepoint and padding are never basis elements
        bits[0].fetch_and(!1, Ordering::Relaxed);
        let tail = (count as usize + 1) % 64;
        if tail != 0 {
            bits[words - 1].fetch_and((1u64 << tail) - 1, Ordering::Relaxed);
        }
        for j in 0..q.directions() {
            if q.0[j] == 0 {
                continue;
            }
            let mut lower = q.clone();
            lower.0[j] -= 1;
            let n_lower = count_u32(x, lower.levels(), self.budget)?;
            if n_lower == 0 {
                continue;
            }
            for i in 0..q.0[j] {
                let op = SimplicialOp::degeneracy(j, i);
                let starts: Vec<u32> = (1..=n_lower).step_by(CHUNK).collect();
                starts.par_iter().try_for_each(|&s| -> Result<()> {
                    let e = (s as u64 + CHUNK as u64 - 1).min(n_lower as u64) as u32;
                    let mut cells: Vec<u32> = (s..=e).collect();
                    x.apply(lower.levels(), op, &mut cells)?;
                    for c in cells {
                        if c != 0 {
                            bits[c as usize / 64].fetch_and(!(1u64 << (c % 64)), Ordering::Relaxed);
                        }
                    }
                    Ok(())
                })?;
            }
        }
        let bits: Vec<u64> = bits.into_iter().map(AtomicU64::into_inner).collect();
        let mut prefix = Vec::with_capacity(words);
        let mut acc = 0u32;
        for w in &bits {
            prefix.push(acc);
            acc += w.count_ones();
        }
        Ok(LevelBasis {
            index: q.clone(),
            count,
            bits,
            prefix,
            rank: acc as usize,
        })
    }

    pub fn degree_basis(&self, d: usize) -> Result<DegreeBasis> {
        let indices = multi_indices(self.x.directions(), d);
        let blocks: Vec<Arc<LevelBasis>> = indices
            .iter()
            .map(|q| self.level_basis(q))
            .collect::<Result<_>>()?;
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        let mut by_index = HashMap::new();
        for (i, b) in blocks.iter().enumerate() {
            offsets.push(dim);
            by_index.insert(b.index.clone(), i);
            dim += b.rank();
        }
        Ok(DegreeBasis {
            degree: d,
            blocks,
            offsets,
            dim,
            by_index,
        })
    }

    /// Boundary columns for `cells` at level `block.index`.
    fn columns_for(&self, block: &LevelBasis, cells: &[u32], rows: &DegreeBasis) -> Result<Vec<Column>> {
        let mut cols: Vec<Column> = vec![Vec::with_capacity(8); cells.len()];
        let mut buf = vec![0u32; cells.len()];
        for face in faces_of(&block.index) {
            let Some(b) = rows.block_of(&face.target) else {
                continue;
            };
            let target = &rows.blocks[b];
            if target.rank() == 0 {
                continue;
            }
            buf.copy_from_slice(cells);
            self.x.apply(block.index.levels(), face.op, &mut buf)?;
            let off = rows.offsets[b] as u32;
            for (col, &t) in cols.iter_mut().zip(&buf) {
                if t == 0 {
                    continue;
                }
                if let Some(p) = target.position(t) {
                    col.push((off + p, face.sign));
                }
            }
        }
        for col in cols.iter_mut() {
            normalize_column(col);
        }
        Ok(cols)
    }

    /// Streams the columns of `∂_d` in basis order. `sink` returns `false` to stop early.
    pub fn stream_boundary(
        &self,
        cols: &DegreeBasis,
        rows: &DegreeBasis,
        mut sink: impl FnMut(&[Column]) -> Result<bool>,
    ) -> Result<()> {
        let mut work: Vec<(usize, Vec<u32>)> = vec![];
        for (b, block) in cols.blocks.iter().enumerate() {
            for chunk in block.chunks() {
                work.push((b, chunk));
            }
        }
        for batch in work.chunks(BATCH_CHUNKS) {
            let out: Vec<Vec<Column>> = batch
                .par_iter()
                .map(|(b, cells)| self.columns_for(&cols.blocks[*b], cells, rows))
                .collect::<Result<_>>()?;
            for c in out {
                if !sink(&c)? {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// Streams `∂_d` together with the images of the same cells under `f`.
    /// `rows` is `None` in degree 0. An image is the row of a nondegenerate
    /// cell of `image_basis`, or `None` when the cell collapses.
    pub fn stream_with_images(
        &self,
        cols: &DegreeBasis,
        rows: Option<&DegreeBasis>,
        f: &dyn MSMap,
        image_basis: &DegreeBasis,
        mut sink: impl FnMut(&[Column], &[Option<u32>]) -> Result<bool>,
    ) -> Result<()> {
        let mut work: Vec<(usize, Vec<u32>)> = vec![];
        for (b, block) in cols.blocks.iter().enumerate() {
            for chunk in block.chunks() {
                work.push((b, chunk));
            }
        }
        for batch in work.chunks(BATCH_CHUNKS) {
            let out: Vec<(Vec<Column>, Vec<Option<u32>>)> = batch
                .par_iter()
                .map(|(b, cells)| -> Result<_> {
                    let block = &cols.blocks[*b];
                    let boundary = match rows {
                        Some(rows) => self.columns_for(block, cells, rows)?,
                        None => vec![vec![]; cells.len()],
                    };
                    let mut image = cells.clone();
                    f.apply(block.index.levels(), &mut image)?;
                    let tb = image_basis.block_of(&block.index);
                    let rows = image
                        .iter()
                        .map(|&t| match (t, tb) {
                            (0, _) | (_, None) => None,
                            (t, Some(b)) => image_basis.blocks[b]
                                .position(t)
                                .map(|p| image_basis.offsets[b] as u32 + p),
                        })
                        .collect();
                    Ok((boundary, rows))
                })
                .collect::<Result<_>>()?;
            for (c, i) in out {
                if !sink(&c, &i)? {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// `∂_d` as a stored matrix.
    pub fn boundary(&self, cols: &DegreeBasis, rows: &DegreeBasis) -> Result<SparseMatrix> {
        let mut all = Vec::with_capacity(cols.dim);
        self.stream_boundary(cols, rows, |c| {
            all.extend_from_slice(c);
            Ok(true)
        })?;
        SparseMatrix::from_columns(rows.dim, all)
    }

    /// Normalized chains in degrees `0..=top`.
    pub fn complex(&self, ring: Ring, top: usize) -> Result<(ChainComplex, Vec<DegreeBasis>)> {
        let bases: Vec<DegreeBasis> = (0..=top).map(|d| self.degree_basis(d)).collect::<Result<_>>()?;
        let mut boundaries = vec![SparseMatrix::zeros(0, bases[0].dim)];
        for d in 1..=top {
            boundaries.push(self.boundary(&bases[d], &bases[d - 1])?);
        }
        let ranks = bases.iter().map(|b| b.dim).collect();
        Ok((ChainComplex::new(ring, ranks, boundaries)?, bases))
    }
}

/// The matrix of `f` between normalized bases of one degree.
pub fn map_matrix(f: &dyn MSMap, src: &DegreeBasis, tgt: &DegreeBasis) -> Result<SparseMatrix> {
    let mut columns: Vec<Column> = Vec::with_capacity(src.dim);
    for block in &src.blocks {
        let cells: Vec<u32> = block.cells().collect();
        let mut image = cells.clone();
        let tb = tgt.block_of(&block.index);
        let chunks: Vec<Vec<Column>> = image
            .par_chunks_mut(CHUNK)
            .map(|chunk| -> Result<Vec<Column>> {
                f.apply(block.index.levels(), chunk)?;
                Ok(chunk
                    .iter()
                    .map(|&t| {
                        let row = match (t, tb) {
                            (0, _) | (_, None) => None,
                            (t, Some(b)) => tgt.blocks[b].position(t).map(|p| tgt.offsets[b] + p as usize),
                        };
                        row.map(|r| vec![(r as u32, 1)]).unwrap_or_default()
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        columns.extend(chunks.into_iter().flatten());
    }
    SparseMatrix::from_columns(tgt.dim, columns)
}

/// Normalized chains of `x` in degrees `0..=bound + 1`.
pub fn normalized_chains(x: SharedSS, ring: Ring, bound: usize, budget: u64) -> Result<ChainComplex> {
    Ok(ChainBuilder::new(x, budget).complex(ring, bound + 1)?.0)
}

/// The chain map induced by `f` in degrees `0..=bound + 1`, after spot-checking
/// `f` against the structure maps on small levels.
pub fn chains_of_map(f: &dyn MSMap, ring: Ring, bound: usize, budget: u64) -> Result<ChainMap> {
    let (src, tgt) = (f.source(), f.target());
    if src.directions() != tgt.directions() {
        return Err(Error::DirectionMismatch {
            left: src.directions(),
            right: tgt.directions(),
        });
    }
    check_map_bounded(f, (bound + 1).min(3), 1 << 12).map_err(|e| match e {
        Error::Validation(m) | Error::Integrity(m) => Error::Validation(m),
        other => other,
    })?;
    let (c, cb) = ChainBuilder::new(src, budget).complex(ring, bound + 1)?;
    let (d, db) = ChainBuilder::new(tgt, budget).complex(ring, bound + 1)?;
    let matrices = cb
        .iter()
        .zip(&db)
        .map(|(s, t)| map_matrix(f, s, t))
        .collect::<Result<_>>()?;
    ChainMap::new(c, d, matrices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::HomologyGroup;
    use crate::simplicial::{
        MSSet, collapse_map, constant, diagonal, identity_map, point, product_ss, smash_ss, suspension_ss, wedge_ss, Circle,
    };

    fn circle() -> SharedSS {
        Arc::new(Circle)
    }

    #[test]
    fn multi_index_order() {
        let idx: Vec<Vec<usize>> = multi_indices(2, 2).into_iter().map(|m| m.0).collect();
        assert_eq!(idx, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(multi_indices(0, 0).len(), 1);
        assert!(multi_indices(0, 1).is_empty());
        assert_eq!(multi_indices(3, 4).len(), 15);
    }

    #[test]
    fn circle_chains() {
        let c = normalized_chains(circle(), Ring::Integers, 3, 1 << 20).unwrap();
        assert_eq!(c.ranks(), &[0, 1, 0, 0, 0]);
        let h = c.homology(3).unwrap();
        assert_eq!(h.get(1).unwrap(), &HomologyGroup::free(1));
    }

    #[test]
    fn point_chains_vanish() {
        let c = normalized_chains(point(2), Ring::Integers, 3, 1 << 20).unwrap();
        assert!(c.ranks().iter().all(|&r| r == 0));
    }

    /// Counts nondegenerate cells by testing every cell against every
    /// degeneracy image directly.
    fn brute_nondegenerate(x: &dyn MSSet, q: usize) -> usize {
        let n = x.count(&[q]).unwrap() as u32;
        let mut degenerate = std::collections::HashSet::new();
        if q > 0 {
            let m = x.count(&[q - 1]).unwrap() as u32;
            for i in 0..q {
                let mut cells: Vec<u32> = (1..=m).collect();
                x.apply(&[q - 1], SimplicialOp::degeneracy(0, i), &mut cells).unwrap();
                degenerate.extend(cells);
            }
        }
        (1..=n).filter(|c| !degenerate.contains(c)).count()
    }

    #[test]
    fn ranks_match_direct_enumeration() {
        let objects: Vec<SharedSS> = vec![
            circle(),
            smash_ss(circle(), circle()).unwrap(),
            product_ss(circle(), circle()).unwrap(),
            wedge_ss(circle(), smash_ss(circle(), circle()).unwrap()).unwrap(),
        ];
        for x in objects {
            let c = normalized_chains(x.clone(), Ring::Integers, 4, 1 << 20).unwrap();
            for q in 0..=5 {
                assert_eq!(c.rank(q), brute_nondegenerate(&*x, q), "{} at {q}", x.describe());
            }
        }
    }

    #[test]
    fn torus_and_sphere_homology() {
        let t = product_ss(circle(), circle()).unwrap();
        let h = normalized_chains(t, Ring::Integers, 3, 1 << 20).unwrap().homology(3).unwrap();
        // reduced homology of the torus
        let ranks: Vec<usize> = (0..=3).map(|d| h.get(d).unwrap().rank).collect();
        assert_eq!(ranks, vec![0, 2, 1, 0]);
        let s2 = smash_ss(circle(), circle()).unwrap();
        let h = normalized_chains(s2, Ring::Integers, 3, 1 << 20).unwrap().homology(3).unwrap();
        let ranks: Vec<usize> = (0..=3).map(|d| h.get(d).unwrap().rank).collect();
        assert_eq!(ranks, vec![0, 0, 1, 0]);
    }

    #[test]
    fn suspension_shifts_homology() {
        let objects: Vec<SharedSS> = vec![
            constant(0, 1),
            constant(0, 3),
            circle(),
            smash_ss(circle(), circle()).unwrap(),
            product_ss(circle(), circle()).unwrap(),
        ];
        for x in objects {
            let d = 4;
            let hx = normalized_chains(x.clone(), Ring::Integers, d, 1 << 20).unwrap().homology(d).unwrap();
            let hs = normalized_chains(suspension_ss(x), Ring::Integers, d, 1 << 20)
                .unwrap()
                .homology(d)
                .unwrap();
            assert!(hs.get(0).unwrap().is_zero());
            for i in 0..d {
                assert_eq!(hx.get(i), hs.get(i + 1));
            }
        }
    }

    #[test]
    fn eilenberg_zilber_against_diagonal() {
        let objects: Vec<SharedSS> = vec![
            suspension_ss(circle()),
            crate::simplicial::external_smash(circle(), product_ss(circle(), circle()).unwrap()),
            crate::simplicial::external_smash(constant(1, 2), circle()),
        ];
        for x in objects {
            let total: u64 = (0..=3)
                .flat_map(|d| multi_indices(2, d))
                .map(|q| x.count(q.levels()).unwrap())
                .sum();
            assert!(total <= 200, "{total}");
            let h_total = normalized_chains(x.clone(), Ring::Integers, 2, 1 << 20).unwrap().homology(2).unwrap();
            let h_diag = normalized_chains(diagonal(x), Ring::Integers, 2, 1 << 20).unwrap().homology(2).unwrap();
            assert_eq!(h_total, h_diag);
        }
    }

    #[test]
    fn identity_and_collapse_maps() {
        let x = smash_ss(circle(), circle()).unwrap();
        let id = chains_of_map(&*identity_map(x.clone()), Ring::Integers, 3, 1 << 20).unwrap();
        for (d, m) in id.matrices.iter().enumerate() {
            let n = id.source.rank(d);
            let dense = m.to_dense();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(dense[i][j], (i == j) as i64);
                }
            }
        }
        let c = chains_of_map(&*collapse_map(x), Ring::Integers, 3, 1 << 20).unwrap();
        assert!(c.matrices.iter().all(SparseMatrix::is_zero));
    }

    #[test]
    fn budget_error_names_the_level() {
        let x = smash_ss(circle(), circle()).unwrap();
        let err = normalized_chains(x, Ring::Integers, 5, 20).unwrap_err();
        match err {
            Error::Budget { index, cells, budget } => {
                assert_eq!(index, MultiIndex(vec![5]));
                assert_eq!(cells, 25);
                assert_eq!(budget, 20);
            }
            other => panic!("{other}"),
        }
    }
}
