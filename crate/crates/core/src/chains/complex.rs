//! Chain complexes, chain maps and multicomplexes.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::homology::{boundary_invariants, group_from_ranks, HomologyGroup, HomologyTable};
use super::ring::Ring;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::simplicial::{multi_indices, MultiIndex};

pub const SCHEMA_VERSION: u32 = 1;

/// A bounded complex `C_0 ← C_1 ← … ← C_top` of free modules.
///
/// `boundaries[d]` maps degree `d` to degree `d − 1`; `boundaries[0]` has no rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    ring: Ring,
    ranks: Vec<usize>,
    boundaries: Vec<SparseMatrix>,
}

fn modulus(ring: Ring) -> Option<i64> {
    match ring {
        Ring::PrimeField(p) => Some(p as i64),
        _ => None,
    }
}

impl ChainComplex {
    /// Validates shapes and `∂∂ = 0`.
    pub fn new(ring: Ring, ranks: Vec<usize>, boundaries: Vec<SparseMatrix>) -> Result<Self> {
        if ranks.len() != boundaries.len() {
            return Err(Error::Validation(format!(
                "{} ranks but {} boundary matrices",
                ranks.len(),
                boundaries.len()
            )));
        }
        for (d, b) in boundaries.iter().enumerate() {
            let rows = if d == 0 { 0 } else { ranks[d - 1] };
            if b.cols() != ranks[d] || b.rows() != rows {
                return Err(Error::Validation(format!(
                    "boundary in degree {d} is {}x{}, expected {rows}x{}",
                    b.rows(),
                    b.cols(),
                    ranks[d]
                )));
            }
        }
        let c = ChainComplex {
            ring,
            ranks,
            boundaries,
        };
        c.check_d_squared()?;
        Ok(c)
    }

    pub fn zero(ring: Ring) -> Self {
        ChainComplex {
            ring,
            ranks: vec![0],
            boundaries: vec![SparseMatrix::zeros(0, 0)],
        }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// The same integer matrices read over another ring.
    pub fn with_ring(&self, ring: Ring) -> Result<Self> {
        ChainComplex::new(ring, self.ranks.clone(), self.boundaries.clone())
    }

    pub fn top_degree(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self, d: usize) -> usize {
        self.ranks.get(d).copied().unwrap_or(0)
    }

    pub fn boundary(&self, d: usize) -> Option<&SparseMatrix> {
        self.boundaries.get(d)
    }

    /// Checks `∂_{d−1} ∘ ∂_d = 0` in every degree (modulo `p` over F_p).
    pub fn check_d_squared(&self) -> Result<()> {
        for d in 2..self.boundaries.len() {
            let sq = self.boundaries[d - 1].mul(&self.boundaries[d], modulus(self.ring))?;
            if !sq.is_zero() {
                return Err(Error::Integrity(format!("d∘d ≠ 0 in degree {d}")));
            }
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.ranks
            .iter()
            .enumerate()
            .map(|(d, &r)| if d % 2 == 0 { r as i64 } else { -(r as i64) })
            .sum()
    }

    /// Homology in degrees `0..=min(bound, top)`, with `∂_{top+1} = 0`.
    pub fn homology(&self, bound: usize) -> Result<HomologyTable> {
        let top = bound.min(self.top_degree());
        let mut inv: Vec<(usize, Vec<BigUint>)> = Vec::with_capacity(top + 2);
        for d in 0..=top + 1 {
            inv.push(match self.boundaries.get(d) {
                Some(b) => boundary_invariants(b, self.ring)?,
                None => (0, vec![]),
            });
        }
        let groups = (0..=top)
            .map(|d| group_from_ranks(self.ranks[d], inv[d].0, inv[d + 1].0, inv[d + 1].1.clone()))
            .collect();
        Ok(HomologyTable::from_groups(self.ring, groups))
    }

    /// Reorders every basis: `perms[d][i]` is the new position of basis element `i`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> ChainComplex {
        let boundaries = self
            .boundaries
            .iter()
            .enumerate()
            .map(|(d, b)| {
                let rows: Vec<usize> = if d == 0 { vec![] } else { perms[d - 1].clone() };
                b.permute(&rows, &perms[d])
            })
            .collect();
        ChainComplex {
            ring: self.ring,
            ranks: self.ranks.clone(),
            boundaries,
        }
    }

    /// Drops degrees above `top`.
    pub fn truncate(&self, top: usize) -> ChainComplex {
        let n = (top + 1).min(self.ranks.len());
        ChainComplex {
            ring: self.ring,
            ranks: self.ranks[..n].to_vec(),
            boundaries: self.boundaries[..n].to_vec(),
        }
    }

    pub fn to_json(&self) -> ChainComplexJson {
        ChainComplexJson {
            schema_version: SCHEMA_VERSION,
            kind: "chain_complex".into(),
            ring: self.ring,
            ranks: self.ranks.clone(),
            boundaries: self
                .boundaries
                .iter()
                .enumerate()
                .map(|(d, b)| BoundaryJson {
                    degree: d,
                    matrix: b.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: ChainComplexJson) -> Result<Self> {
        if j.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema_version {}",
                j.schema_version
            )));
        }
        let mut boundaries: Vec<Option<SparseMatrix>> = vec![None; j.ranks.len()];
        for b in j.boundaries {
            let slot = boundaries
                .get_mut(b.degree)
                .ok_or_else(|| Error::Validation(format!("boundary degree {} out of range", b.degree)))?;
            *slot = Some(b.matrix);
        }
        let boundaries = boundaries
            .into_iter()
            .enumerate()
            .map(|(d, b)| {
                b.unwrap_or_else(|| SparseMatrix::zeros(if d == 0 { 0 } else { j.ranks[d - 1] }, j.ranks[d]))
            })
            .collect();
        ChainComplex::new(j.ring, j.ranks, boundaries)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BoundaryJson {
    pub degree: usize,
    pub matrix: SparseMatrix,
}

/// JSON form of a complex.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ChainComplexJson {
    pub schema_version: u32,
    pub kind: String,
    pub ring: Ring,
    pub ranks: Vec<usize>,
    pub boundaries: Vec<BoundaryJson>,
}

/// A degree-preserving map of complexes, `matrices[d]: C_d → D_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    pub matrices: Vec<SparseMatrix>,
}

impl ChainMap {
    /// Validates shapes and `∂f = f∂` in every degree present in both complexes.
    pub fn new(source: ChainComplex, target: ChainComplex, matrices: Vec<SparseMatrix>) -> Result<Self> {
        let top = source.top_degree().min(target.top_degree());
        if matrices.len() != top + 1 {
            return Err(Error::Validation("chain map degree count mismatch".into()));
        }
        for (d, f) in matrices.iter().enumerate() {
            if f.cols() != source.rank(d) || f.rows() != target.rank(d) {
                return Err(Error::Validation(format!("chain map shape wrong in degree {d}")));
            }
        }
        let m = ChainMap {
            source,
            target,
            matrices,
        };
        m.check_commutes()?;
        Ok(m)
    }

    pub fn check_commutes(&self) -> Result<()> {
        let md = modulus(self.source.ring());
        for d in 1..self.matrices.len() {
            let left = self.target.boundaries[d].mul(&self.matrices[d], md)?;
            let right = self.matrices[d - 1].mul(&self.source.boundaries[d], md)?;
            if left != right {
                return Err(Error::Integrity(format!("chain map does not commute with d in degree {d}")));
            }
        }
        Ok(())
    }

    /// The mapping cone: `Cone_d = C_{d−1} ⊕ D_d`, `∂(c, x) = (−∂c, f c + ∂x)`.
    pub fn cone(&self) -> Result<ChainComplex> {
        let top = self.matrices.len() - 1;
        let (c, dd) = (&self.source, &self.target);
        let mut ranks = vec![];
        let mut boundaries = vec![];
        for d in 0..=top {
            let c_prev = if d == 0 { 0 } else { c.rank(d - 1) };
            ranks.push(c_prev + dd.rank(d));
            if d == 0 {
                boundaries.push(SparseMatrix::zeros(0, dd.rank(0)));
                continue;
            }
            let c_prev2 = if d == 1 { 0 } else { c.rank(d - 2) };
            let neg = if d == 1 {
                SparseMatrix::zeros(0, c_prev)
            } else {
                c.boundaries[d - 1].negate()
            };
            let z_top = SparseMatrix::zeros(c_prev2, dd.rank(d));
            let f = &self.matrices[d - 1];
            let b = SparseMatrix::block(&[vec![&neg, &z_top], vec![f, &dd.boundaries[d]]])?;
            boundaries.push(b);
        }
        ChainComplex::new(c.ring(), ranks, boundaries)
    }

    /// Whether the induced map on `H_d` is an isomorphism for all `d ≤ bound`
    /// (requires both complexes to reach `bound + 1`).
    pub fn induces_iso(&self, bound: usize) -> Result<Vec<bool>> {
        let hs = self.source.homology(bound)?;
        let ht = self.target.homology(bound)?;
        let cone = self.cone()?;
        let hc = cone.homology(bound + 1)?;
        Ok((0..=bound)
            .map(|d| {
                let equal = hs.get(d) == ht.get(d);
                // H_d(cone) = 0 makes f_* onto in degree d; equal finitely
                // generated groups then force injectivity.
                let onto = hc.get(d).is_some_and(HomologyGroup::is_zero);
                equal && onto
            })
            .collect())
    }
}

/// Directional differentials of a `k`-fold multicomplex.
///
/// Each `∂^{(j)}` maps the term at `q` to the term at `q − e_j`. Directional
/// differentials must square to zero and commute; signs are added on
/// totalization.
#[derive(Clone, Debug, Default)]
pub struct Multicomplex {
    pub directions: usize,
    pub ranks: BTreeMap<MultiIndex, usize>,
    pub differentials: BTreeMap<(MultiIndex, usize), SparseMatrix>,
}

impl Multicomplex {
    pub fn new(directions: usize) -> Self {
        Multicomplex {
            directions,
            ..Default::default()
        }
    }

    pub fn rank(&self, q: &MultiIndex) -> usize {
        self.ranks.get(q).copied().unwrap_or(0)
    }
}

/// The total complex in degrees `0..=bound`: bases are concatenated over
/// multi-indices in lexicographic order, and direction `j` carries the sign
/// `(−1)^{q_1+⋯+q_{j−1}}`.
pub fn total_complex(m: &Multicomplex, ring: Ring, bound: usize) -> Result<ChainComplex> {
    let k = m.directions;
    let mut offsets: Vec<BTreeMap<MultiIndex, usize>> = vec![];
    let mut ranks = vec![];
    for d in 0..=bound {
        let mut off = BTreeMap::new();
        let mut total = 0;
        for q in multi_indices(k, d) {
            off.insert(q.clone(), total);
            total += m.rank(&q);
        }
        offsets.push(off);
        ranks.push(total);
    }
    let mut boundaries = vec![SparseMatrix::zeros(0, ranks[0])];
    for d in 1..=bound {
        let mut entries = vec![];
        for q in multi_indices(k, d) {
            let col_off = offsets[d][&q];
            let mut sign_exp = 0;
            for j in 0..k {
                if q.0[j] > 0 {
                    let mut t = q.clone();
                    t.0[j] -= 1;
                    let row_off = offsets[d - 1][&t];
                    let sign = if sign_exp % 2 == 0 { 1 } else { -1 };
                    if let Some(mat) = m.differentials.get(&(q.clone(), j)) {
                        if mat.cols() != m.rank(&q) || mat.rows() != m.rank(&t) {
                            return Err(Error::Validation(format!("differential at {q} direction {j} has wrong shape")));
                        }
                        for (r, c, v) in mat.triplets() {
                            entries.push((row_off + r, col_off + c, sign * v));
                        }
                    }
                }
                sign_exp += q.0[j];
            }
        }
        boundaries.push(SparseMatrix::from_triplets(ranks[d - 1], ranks[d], &entries)?);
    }
    ChainComplex::new(ring, ranks, boundaries)
        .map_err(|e| match e {
            Error::Integrity(msg) => Error::Integrity(format!("multicomplex signs inconsistent: {msg}")),
            other => other,
        })
}
