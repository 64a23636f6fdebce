//! Multisimplicial pointed sets.
//!
//! An [`MSSet`] has `k` independent simplicial directions. At every
//! [`MultiIndex`] it holds a finite pointed set `[n]₊`, and every face or
//! degeneracy in every direction acts by a pointed map. Objects are lazy:
//! cells are plain `u32` labels and structure maps are applied to slices of
//! labels, so levels with millions of cells never need a full table.

mod maps;
mod normalize;
mod objects;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use maps::{
    check_map, collapse_map, compose_maps, identity_map, product_to_smash, wedge_to_product,
    ComposedMap, MSMap, SharedMap,
};
pub(crate) use maps::check_map_bounded;
pub use normalize::{
    chains_of_map, map_matrix, multi_indices, normalized_chains, ChainBuilder, DegreeBasis, LevelBasis,
};
pub use objects::{
    constant, diagonal, external_smash, point, product_ss, smash_ss, suspension_ss, wedge_ss,
    Circle, Constant, Diagonal, ExternalSmash, Memoized, ProductSS, SmashSS, WedgeSS,
};

use crate::error::{Error, Result};
use crate::gamma::{DeltaOp, PointedMap};

/// Levels `(q_1, …, q_k)` in the `k` simplicial directions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(levels: Vec<usize>) -> Self {
        MultiIndex(levels)
    }

    pub fn directions(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    /// The index reached by applying `op` in direction `dir`.
    pub fn step(&self, dir: usize, op: DeltaOp) -> Option<MultiIndex> {
        let mut next = self.0.clone();
        next[dir] = op.target_level(self.0[dir])?;
        Some(MultiIndex(next))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

/// A face or degeneracy acting in one direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplicialOp {
    pub direction: usize,
    pub op: DeltaOp,
}

impl SimplicialOp {
    pub fn face(direction: usize, i: usize) -> Self {
        SimplicialOp {
            direction,
            op: DeltaOp::Face(i),
        }
    }

    pub fn degeneracy(direction: usize, i: usize) -> Self {
        SimplicialOp {
            direction,
            op: DeltaOp::Degeneracy(i),
        }
    }
}

/// A multisimplicial pointed set.
///
/// Implementations must be pure: `count` and `apply` depend only on their
/// arguments. Cell `0` is the basepoint at every level and every structure
/// map fixes it.
pub trait MSSet: Send + Sync {
    fn directions(&self) -> usize;

    /// Number of non-basepoint cells at `q`.
    fn count(&self, q: &[usize]) -> Result<u64>;

    /// Applies `op` to cells at level `q`, in place.
    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()>;

    fn describe(&self) -> String;
}

pub type SharedSS = Arc<dyn MSSet>;

/// Checks that `op` is defined at `q` for `x` and returns the target index.
pub fn op_target(x: &dyn MSSet, q: &[usize], op: SimplicialOp) -> Result<MultiIndex> {
    if q.len() != x.directions() || op.direction >= q.len() {
        return Err(Error::Validation(format!(
            "operator in direction {} at {} for a {}-direction object",
            op.direction,
            MultiIndex(q.to_vec()),
            x.directions()
        )));
    }
    MultiIndex(q.to_vec())
        .step(op.direction, op.op)
        .ok_or_else(|| Error::Validation(format!("{:?} undefined at {}", op.op, MultiIndex(q.to_vec()))))
}

/// Cell count at `q` as a `u32` label range, or a budget error.
pub fn count_u32(x: &dyn MSSet, q: &[usize], budget: u64) -> Result<u32> {
    let n = x.count(q)?;
    if n > budget || n >= u32::MAX as u64 {
        return Err(Error::Budget {
            index: MultiIndex(q.to_vec()),
            cells: n as u128,
            budget,
        });
    }
    Ok(n as u32)
}

/// The structure map `op` at `q` as a full table.
pub fn structure_map(x: &dyn MSSet, q: &[usize], op: SimplicialOp) -> Result<PointedMap> {
    let target = op_target(x, q, op)?;
    let n = count_u32(x, q, u32::MAX as u64 - 1)?;
    let m = count_u32(x, target.levels(), u32::MAX as u64 - 1)?;
    let mut table: Vec<u32> = (0..=n).collect();
    x.apply(q, op, &mut table)?;
    PointedMap::new(n, m, table)
}

/// Every face and degeneracy operator defined at `q`.
pub fn operators_at(q: &[usize]) -> Vec<SimplicialOp> {
    let mut ops = vec![];
    for (dir, &level) in q.iter().enumerate() {
        if level >= 1 {
            ops.extend((0..=level).map(|i| SimplicialOp::face(dir, i)));
        }
        ops.extend((0..=level).map(|i| SimplicialOp::degeneracy(dir, i)));
    }
    ops
}

/// Verifies the simplicial identities in every direction, and that operators
/// in distinct directions commute, at all indices of total degree ≤ `max_degree`.
pub fn check_simplicial_identities(x: &dyn MSSet, max_degree: usize) -> Result<()> {
    let k = x.directions();
    for d in 0..=max_degree {
        for q in multi_indices(k, d) {
            let n = count_u32(x, q.levels(), u32::MAX as u64 - 1)?;
            let cells: Vec<u32> = (0..=n).collect();
            let ops = operators_at(q.levels());
            for &a in &ops {
                let qa = op_target(x, q.levels(), a)?;
                let mut after_a = cells.clone();
                x.apply(q.levels(), a, &mut after_a)?;
                if after_a[0] != 0 {
                    return Err(Error::Integrity(format!("{a:?} moves the basepoint at {q}")));
                }
                for b in operators_at(qa.levels()) {
                    let qab = op_target(x, qa.levels(), b)?;
                    let mut ab = after_a.clone();
                    x.apply(qa.levels(), b, &mut ab)?;
                    // Find the rewritten pair (b', a') with b ∘ a = a' ∘ b'.
                    let Some((b2, a2)) = rewrite(a, b, q.levels()) else {
                        continue;
                    };
                    let mut other = cells.clone();
                    match b2 {
                        None => {}
                        Some(b2) => x.apply(q.levels(), b2, &mut other)?,
                    }
                    let mid = match b2 {
                        None => q.clone(),
                        Some(b2) => op_target(x, q.levels(), b2)?,
                    };
                    let end = match a2 {
                        None => mid.clone(),
                        Some(a2) => {
                            x.apply(mid.levels(), a2, &mut other)?;
                            op_target(x, mid.levels(), a2)?
                        }
                    };
                    if end != qab || other != ab {
                        return Err(Error::Integrity(format!(
                            "identity fails for {a:?} then {b:?} at {q}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// For `a` applied first and `b` second, returns an alternative order
/// `(first, second)` prescribed by the simplicial identities (with `None`
/// meaning the identity), or `None` when no identity applies.
fn rewrite(
    a: SimplicialOp,
    b: SimplicialOp,
    _q: &[usize],
) -> Option<(Option<SimplicialOp>, Option<SimplicialOp>)> {
    use DeltaOp::*;
    if a.direction != b.direction {
        return Some((Some(b), Some(a)));
    }
    let dir = a.direction;
    let mk = |op| Some(SimplicialOp { direction: dir, op });
    match (a.op, b.op) {
        // b∘a = d_i d_j with i < j  ==  d_{j-1} d_i
        (Face(j), Face(i)) if i < j => Some((mk(Face(i)), mk(Face(j - 1)))),
        // s_i s_j (i <= j): apply s_j then s_i == apply s_i then s_{j+1}
        (Degeneracy(j), Degeneracy(i)) if i <= j => Some((mk(Degeneracy(i)), mk(Degeneracy(j + 1)))),
        (Degeneracy(j), Face(i)) => {
            if i < j {
                Some((mk(Face(i)), mk(Degeneracy(j - 1))))
            } else if i == j || i == j + 1 {
                Some((None, None))
            } else {
                Some((mk(Face(i - 1)), mk(Degeneracy(j))))
            }
        }
        _ => None,
    }
}
