//! Homology of one tower level, with boundary ranks computed on demand.
//!
//! Over F_p the columns of `∂_d` are streamed into a [`FieldRank`] and
//! consumption stops once the rank reaches `dim C_{d−1} − rank ∂_{d−1}`, so the
//! top boundary never has to be stored. Over ℤ and ℚ the boundaries are stored
//! and reduced exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use parking_lot::Mutex;
use serde::Serialize;

use crate::chains::{
    group_from_ranks, integer_invariants, rational_rank, Column, FieldRank, HomologyGroup, Ring, SparseMatrix,
};
use crate::error::Result;
use crate::simplicial::{chains_of_map, ChainBuilder, DegreeBasis, MSMap, SharedSS};

/// Normalized chains of one object, with cached bases and boundary invariants.
pub struct LevelComplex {
    builder: ChainBuilder,
    ring: Ring,
    bases: Mutex<BTreeMap<usize, Arc<DegreeBasis>>>,
    invariants: Mutex<BTreeMap<usize, (usize, Vec<BigUint>)>>,
    /// Over F_p, columns of `∂_d` spanning its image.
    witnesses: Mutex<BTreeMap<usize, Arc<Vec<Column>>>>,
}

impl LevelComplex {
    pub fn new(x: SharedSS, ring: Ring, budget: u64) -> Self {
        LevelComplex {
            builder: ChainBuilder::new(x, budget),
            ring,
            bases: Mutex::new(BTreeMap::new()),
            invariants: Mutex::new(BTreeMap::new()),
            witnesses: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn object(&self) -> &SharedSS {
        self.builder.object()
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn basis(&self, d: usize) -> Result<Arc<DegreeBasis>> {
        if let Some(b) = self.bases.lock().get(&d) {
            return Ok(b.clone());
        }
        let b = Arc::new(self.builder.degree_basis(d)?);
        self.bases.lock().insert(d, b.clone());
        Ok(b)
    }

    pub fn dim(&self, d: usize) -> Result<usize> {
        Ok(self.basis(d)?.dim)
    }

    /// `∂_d` as a stored matrix.
    pub fn boundary(&self, d: usize) -> Result<SparseMatrix> {
        let cols = self.basis(d)?;
        if d == 0 {
            return Ok(SparseMatrix::zeros(0, cols.dim));
        }
        self.builder.boundary(&cols, &*self.basis(d - 1)?)
    }

    /// Streams the columns of `∂_d`; `sink` returns `false` to stop.
    pub fn stream_boundary(&self, d: usize, sink: impl FnMut(&[Column]) -> Result<bool>) -> Result<()> {
        if d == 0 {
            return Ok(());
        }
        let (cols, rows) = (self.basis(d)?, self.basis(d - 1)?);
        self.builder.stream_boundary(&cols, &rows, sink)
    }

    /// Rank of `∂_d` and, over ℤ, its nonunit invariant factors.
    pub fn boundary_invariants(&self, d: usize) -> Result<(usize, Vec<BigUint>)> {
        if let Some(v) = self.invariants.lock().get(&d) {
            return Ok(v.clone());
        }
        let v = self.compute_invariants(d)?;
        self.invariants.lock().insert(d, v.clone());
        Ok(v)
    }

    pub fn boundary_rank(&self, d: usize) -> Result<usize> {
        Ok(self.boundary_invariants(d)?.0)
    }

    /// Columns of `∂_d` spanning its image over F_p, kept from the rank
    /// computation so the image never has to be streamed twice.
    pub fn boundary_witnesses(&self, d: usize) -> Result<Arc<Vec<Column>>> {
        self.boundary_invariants(d)?;
        Ok(self.witnesses.lock().get(&d).cloned().unwrap_or_default())
    }

    fn compute_invariants(&self, d: usize) -> Result<(usize, Vec<BigUint>)> {
        if d == 0 {
            return Ok((0, vec![]));
        }
        let (cols, rows) = (self.basis(d)?, self.basis(d - 1)?);
        if cols.dim == 0 || rows.dim == 0 {
            return Ok((0, vec![]));
        }
        match self.ring {
            Ring::PrimeField(p) => {
                // rank ∂_d ≤ dim C_{d−1} − rank ∂_{d−1}
                let bound = rows.dim - self.boundary_rank(d - 1)?;
                let mut acc = FieldRank::new(p, rows.dim, bound.min(cols.dim)).with_witnesses();
                if !acc.is_full() {
                    self.builder.stream_boundary(&cols, &rows, |batch| {
                        acc.push_columns(batch);
                        Ok(!acc.is_full())
                    })?;
                }
                let rank = acc.rank();
                let witnesses = acc.into_witnesses().unwrap_or_default();
                self.witnesses.lock().insert(d, Arc::new(witnesses));
                Ok((rank, vec![]))
            }
            Ring::Integers => {
                let inv = integer_invariants(&self.boundary(d)?)?;
                Ok((inv.rank, inv.torsion))
            }
            Ring::Rationals => Ok((rational_rank(&self.boundary(d)?)?, vec![])),
        }
    }

    /// `H_d`, reduced because the basepoint is not a cell.
    pub fn homology(&self, d: usize) -> Result<HomologyGroup> {
        let dim = self.dim(d)?;
        let out = self.boundary_rank(d)?;
        let (rank_in, torsion) = self.boundary_invariants(d + 1)?;
        Ok(group_from_ranks(dim, out, rank_in, torsion))
    }

    /// `H_d` for `d ∈ lo..=hi`, stopping at the first error.
    pub fn homology_range(&self, lo: usize, hi: usize) -> (Vec<HomologyGroup>, Option<crate::Error>) {
        let mut out = vec![];
        for d in lo..=hi {
            match self.homology(d) {
                Ok(g) => out.push(g),
                Err(e) => return (out, Some(e)),
            }
        }
        (out, None)
    }
}

/// Whether `f_*` is an isomorphism on `H_d`, with the groups compared.
#[derive(Clone, Debug, Serialize)]
pub struct IsoCheck {
    pub degree: usize,
    pub source: String,
    pub target: String,
    /// Rank of `f_*` on `H_d` over a field.
    pub map_rank: Option<usize>,
    pub iso: bool,
}

/// Checks whether `f : C → D` induces an isomorphism on `H_d`. `src` and `tgt`
/// must hold the chains of `f.source()` and `f.target()`.
///
/// Over F_p the rank of `f_*` is read off the mapping cone:
/// `rank ∂^cone_{d+1} = rank f_* + rank ∂^C_d + rank ∂^D_{d+1}`. Over ℤ and ℚ
/// the cone is stored; `H_d(cone) = 0` makes `f_*` onto, and equal finitely
/// generated groups then force an isomorphism.
pub fn induced_iso(f: &dyn MSMap, src: &LevelComplex, tgt: &LevelComplex, d: usize, budget: u64) -> Result<IsoCheck> {
    let ring = src.ring();
    let (hc, hd) = (src.homology(d)?, tgt.homology(d)?);
    let render = |g: &HomologyGroup| g.render(ring);
    let Ring::PrimeField(p) = ring else {
        let map = chains_of_map(f, ring, d, budget)?;
        let iso = map.induces_iso(d)?[d];
        return Ok(IsoCheck {
            degree: d,
            source: render(&hc),
            target: render(&hd),
            map_rank: None,
            iso: iso && hc == hd,
        });
    };
    let c_rank = src.boundary_rank(d)?;
    let d_rank = tgt.boundary_rank(d + 1)?;
    let lower = if d == 0 { 0 } else { src.dim(d - 1)? };
    let image_basis = tgt.basis(d)?;
    let rows = lower + image_basis.dim;
    let bound = c_rank + d_rank + hc.rank.min(hd.rank);
    let mut acc = FieldRank::new(p, rows, bound);
    // columns (0, ∂e) for e ∈ D_{d+1}, through a spanning set of the image
    let shift = |c: &Column| -> Column { c.iter().map(|&(r, v)| (r + lower as u32, v)).collect() };
    let spanning: Vec<Column> = tgt.boundary_witnesses(d + 1)?.iter().map(shift).collect();
    acc.push_columns(&spanning);
    // columns (−∂c, f c) for c ∈ C_d
    if !acc.is_full() {
        let rows_basis = if d == 0 { None } else { Some(src.basis(d - 1)?) };
        src.builder.stream_with_images(
            &*src.basis(d)?,
            rows_basis.as_deref(),
            f,
            &image_basis,
            |boundary, images| {
                let cols: Vec<Column> = boundary
                    .iter()
                    .zip(images)
                    .map(|(dc, fc)| {
                        let mut col: Column = dc.iter().map(|&(r, v)| (r, -v)).collect();
                        col.extend(fc.map(|r| (r + lower as u32, 1)));
                        col
                    })
                    .collect();
                acc.push_columns(&cols);
                Ok(!acc.is_full())
            },
        )?;
    }
    let map_rank = acc.rank() - c_rank - d_rank;
    Ok(IsoCheck {
        degree: d,
        source: render(&hc),
        target: render(&hd),
        map_rank: Some(map_rank),
        iso: hc == hd && map_rank == hd.rank,
    })
}

/// Largest `c ≤ bound` with `H̃_i(Y; ℤ) = 0` for all `i ≤ c`, or `−1` when
/// `H̃_0 ≠ 0`. Homological connectivity stands in for topological connectivity.
pub fn connectivity(y: SharedSS, bound: usize, budget: u64) -> Result<i64> {
    let level = LevelComplex::new(y, Ring::Integers, budget);
    for i in 0..=bound {
        if !level.homology(i)?.is_zero() {
            return Ok(i as i64 - 1);
        }
    }
    Ok(bound as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segal::{discrete_abelian, spectrum_level};
    use crate::simplicial::{identity_map, smash_ss, suspension_ss, Circle};

    const BUDGET: u64 = 1 << 22;

    fn circle() -> SharedSS {
        Arc::new(Circle)
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(connectivity(circle(), 3, BUDGET).unwrap(), 0);
        assert_eq!(connectivity(suspension_ss(circle()), 3, BUDGET).unwrap(), 1);
        let nerve = spectrum_level(&discrete_abelian(&[2]).unwrap(), 1).object;
        assert_eq!(connectivity(nerve, 3, BUDGET).unwrap(), 0);
        let s0 = crate::simplicial::constant(0, 1);
        assert_eq!(connectivity(s0, 3, BUDGET).unwrap(), -1);
    }

    #[test]
    fn streamed_ranks_match_stored_ranks() {
        let x = spectrum_level(&discrete_abelian(&[2]).unwrap(), 2).object;
        let f2 = LevelComplex::new(x.clone(), Ring::PrimeField(2), BUDGET);
        let z = LevelComplex::new(x, Ring::Integers, BUDGET);
        for d in 0..=5 {
            let stored = crate::chains::rank_mod_p(&f2.boundary(d).unwrap(), 2);
            assert_eq!(f2.boundary_rank(d).unwrap(), stored, "degree {d}");
        }
        // K(ℤ/2, 2): H̃_2 = ℤ/2, H̃_3 = 0, H̃_4 = ℤ/4
        let groups: Vec<String> = (0..=4).map(|d| z.homology(d).unwrap().render(Ring::Integers)).collect();
        assert_eq!(groups, ["0", "0", "Z/2", "0", "Z/4"]);
        let dims: Vec<usize> = (0..=4).map(|d| f2.homology(d).unwrap().rank).collect();
        assert_eq!(dims, [0, 0, 1, 1, 1]);
    }

    #[test]
    fn identity_is_an_isomorphism() {
        let s2 = smash_ss(circle(), circle()).unwrap();
        for ring in [Ring::PrimeField(2), Ring::Integers, Ring::Rationals] {
            let a = LevelComplex::new(s2.clone(), ring, BUDGET);
            let b = LevelComplex::new(s2.clone(), ring, BUDGET);
            let id = identity_map(s2.clone());
            for d in 0..=3 {
                let c = induced_iso(&*id, &a, &b, d, BUDGET).unwrap();
                assert!(c.iso, "{ring:?} degree {d}");
            }
        }
    }

    #[test]
    fn collapse_is_not_an_isomorphism() {
        let s = circle();
        let p = crate::simplicial::point(1);
        let f = crate::simplicial::collapse_map(s.clone());
        let a = LevelComplex::new(s, Ring::PrimeField(3), BUDGET);
        let b = LevelComplex::new(p, Ring::PrimeField(3), BUDGET);
        let c = induced_iso(&*f, &a, &b, 1, BUDGET).unwrap();
        assert!(!c.iso);
        assert_eq!(c.map_rank, Some(0));
        assert!(induced_iso(&*f, &a, &b, 2, BUDGET).unwrap().iso);
    }
}
