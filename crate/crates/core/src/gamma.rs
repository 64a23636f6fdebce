//! The category Γ₊ of finite pointed sets.
//!
//! The object `[n]₊` has elements `0..=n`, with `0` the basepoint. Morphisms
//! are basepoint-preserving maps stored as lookup tables. Finite unpointed
//! sets (used by the partial-map presentation Γ'₊) have elements `1..=n`, so
//! the equivalence γ: Γ'₊ → Γ₊ is "add the basepoint 0".
//!
//! Smash products use the pairing `(i, j) ↦ (i − 1)·m + j` for `i, j ≥ 1`,
//! which is strictly associative; wedges put the first summand first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The pointed set `[n]₊ = {0, 1, …, n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinPointedSet(u32);

impl FinPointedSet {
    pub const POINT: FinPointedSet = FinPointedSet(0);

    pub fn new(n: u32) -> Self {
        FinPointedSet(n)
    }

    /// Number of non-basepoint elements.
    pub fn size(self) -> u32 {
        self.0
    }

    pub fn elements(self) -> impl Iterator<Item = u32> {
        0..=self.0
    }

    pub fn smash(self, other: FinPointedSet) -> Result<FinPointedSet> {
        self.0
            .checked_mul(other.0)
            .map(FinPointedSet)
            .ok_or_else(|| Error::Validation(format!("[{}]+ ^ [{}]+ overflows", self.0, other.0)))
    }

    pub fn wedge(self, other: FinPointedSet) -> Result<FinPointedSet> {
        self.0
            .checked_add(other.0)
            .map(FinPointedSet)
            .ok_or_else(|| Error::Validation(format!("[{}]+ v [{}]+ overflows", self.0, other.0)))
    }
}

impl std::fmt::Display for FinPointedSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}]+", self.0)
    }
}

/// Position of the pair `(i, j)` in `[n]₊ ∧ [m]₊ ≅ [nm]₊`.
#[inline]
pub fn smash_index(i: u32, j: u32, m: u32) -> u32 {
    if i == 0 || j == 0 {
        0
    } else {
        (i - 1) * m + j
    }
}

/// Inverse of [`smash_index`] for a non-basepoint element.
#[inline]
pub fn smash_split(x: u32, m: u32) -> (u32, u32) {
    debug_assert!(x > 0 && m > 0);
    ((x - 1) / m + 1, (x - 1) % m + 1)
}

/// A morphism of Γ₊.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointedMap {
    source: u32,
    target: u32,
    table: Vec<u32>,
}

impl PointedMap {
    /// Builds a map from its table, where `table[x]` is the image of `x`.
    pub fn new(source: u32, target: u32, table: Vec<u32>) -> Result<Self> {
        if table.len() != source as usize + 1 {
            return Err(Error::Validation(format!(
                "table of length {} for source [{}]+",
                table.len(),
                source
            )));
        }
        if table[0] != 0 {
            return Err(Error::Validation("basepoint not preserved".into()));
        }
        if let Some(bad) = table.iter().find(|&&y| y > target) {
            return Err(Error::Validation(format!("image {bad} outside [{target}]+")));
        }
        Ok(PointedMap {
            source,
            target,
            table,
        })
    }

    pub(crate) fn from_table_unchecked(source: u32, target: u32, table: Vec<u32>) -> Self {
        debug_assert_eq!(table.len(), source as usize + 1);
        debug_assert_eq!(table[0], 0);
        PointedMap {
            source,
            target,
            table,
        }
    }

    pub fn from_fn(source: u32, target: u32, f: impl Fn(u32) -> u32) -> Result<Self> {
        let mut table = Vec::with_capacity(source as usize + 1);
        table.push(0);
        table.extend((1..=source).map(f));
        PointedMap::new(source, target, table)
    }

    pub fn identity(n: u32) -> Self {
        PointedMap {
            source: n,
            target: n,
            table: (0..=n).collect(),
        }
    }

    /// The map sending everything to the basepoint.
    pub fn collapse(source: u32, target: u32) -> Self {
        PointedMap {
            source,
            target,
            table: vec![0; source as usize + 1],
        }
    }

    pub fn source(&self) -> FinPointedSet {
        FinPointedSet(self.source)
    }

    pub fn target(&self) -> FinPointedSet {
        FinPointedSet(self.target)
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.table[x as usize]
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &PointedMap) -> Result<PointedMap> {
        compose(self, g)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.table.iter().enumerate().all(|(i, &y)| i as u32 == y)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target as usize + 1];
        for &y in &self.table[1..] {
            if y == 0 || seen[y as usize] {
                return false;
            }
            seen[y as usize] = true;
        }
        true
    }

    pub fn is_bijective(&self) -> bool {
        self.source == self.target && self.is_injective()
    }

    /// Elements of the source mapping to `y`, basepoint included when `y = 0`.
    pub fn fiber(&self, y: u32) -> impl Iterator<Item = u32> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(move |(_, &v)| v == y)
            .map(|(i, _)| i as u32)
    }
}

/// `g ∘ f`; requires `f.target = g.source`.
pub fn compose(f: &PointedMap, g: &PointedMap) -> Result<PointedMap> {
    if f.target != g.source {
        return Err(Error::Composition(format!(
            "target [{}]+ does not match source [{}]+",
            f.target, g.source
        )));
    }
    let table = f.table.iter().map(|&x| g.table[x as usize]).collect();
    Ok(PointedMap {
        source: f.source,
        target: g.target,
        table,
    })
}

/// `f ∧ g : [a]₊ ∧ [b]₊ → [a']₊ ∧ [b']₊`.
pub fn smash(f: &PointedMap, g: &PointedMap) -> Result<PointedMap> {
    let source = f.source().smash(g.source())?.size();
    let target = f.target().smash(g.target())?.size();
    let mut table = Vec::with_capacity(source as usize + 1);
    table.push(0);
    for i in 1..=f.source {
        let fi = f.apply(i);
        for j in 1..=g.source {
            table.push(smash_index(fi, g.apply(j), g.target));
        }
    }
    Ok(PointedMap {
        source,
        target,
        table,
    })
}

/// `f ∨ g : [a]₊ ∨ [b]₊ → [a']₊ ∨ [b']₊`.
pub fn wedge(f: &PointedMap, g: &PointedMap) -> Result<PointedMap> {
    let source = f.source().wedge(g.source())?.size();
    let target = f.target().wedge(g.target())?.size();
    let mut table = f.table.clone();
    table.extend(g.table[1..].iter().map(|&y| if y == 0 { 0 } else { y + f.target }));
    Ok(PointedMap {
        source,
        target,
        table,
    })
}

/// The canonical inclusions `[n]₊ → [n + m]₊ ← [m]₊` of the two wedge summands.
pub fn wedge_inclusions(n: u32, m: u32) -> (PointedMap, PointedMap) {
    let first = PointedMap::from_table_unchecked(n, n + m, (0..=n).collect());
    let mut second: Vec<u32> = (n..=n + m).collect();
    second[0] = 0;
    (first, PointedMap::from_table_unchecked(m, n + m, second))
}

/// `μₙ(f) = id_{[n]₊} ∧ f`.
pub fn mu(n: u32, f: &PointedMap) -> Result<PointedMap> {
    smash(&PointedMap::identity(n), f)
}

/// `i_s : [1]₊ → [n]₊`, the embedding onto `{s, o}`.
pub fn standard_inclusion(s: u32, n: u32) -> Result<PointedMap> {
    if s == 0 || s > n {
        return Err(Error::Validation(format!("i_{s} undefined for [{n}]+")));
    }
    Ok(PointedMap::from_table_unchecked(1, n, vec![0, s]))
}

/// The collapse `[n]₊ → [1]₊` keeping only `s`.
pub fn projection(s: u32, n: u32) -> Result<PointedMap> {
    if s == 0 || s > n {
        return Err(Error::Validation(format!("projection onto {s} undefined for [{n}]+")));
    }
    PointedMap::from_fn(n, 1, |x| u32::from(x == s))
}

/// A partially defined map `S₁ ← S → S₂` between unpointed sets
/// `{1..=source}` and `{1..=target}`: `domain[k] ↦ action[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialMap {
    source: u32,
    target: u32,
    domain: Vec<u32>,
    action: Vec<u32>,
}

impl PartialMap {
    pub fn new(source: u32, target: u32, domain: Vec<u32>, action: Vec<u32>) -> Result<Self> {
        if domain.len() != action.len() {
            return Err(Error::Validation("domain and action lengths differ".into()));
        }
        let mut seen = vec![false; source as usize + 1];
        for &d in &domain {
            if d == 0 || d > source {
                return Err(Error::Validation(format!("domain element {d} outside 1..={source}")));
            }
            if std::mem::replace(&mut seen[d as usize], true) {
                return Err(Error::Validation(format!("domain element {d} repeated")));
            }
        }
        if let Some(a) = action.iter().find(|&&a| a == 0 || a > target) {
            return Err(Error::Validation(format!("action value {a} outside 1..={target}")));
        }
        Ok(PartialMap {
            source,
            target,
            domain,
            action,
        })
    }

    pub fn source(&self) -> u32 {
        self.source
    }

    pub fn target(&self) -> u32 {
        self.target
    }

    pub fn get(&self, x: u32) -> Option<u32> {
        self.domain.iter().position(|&d| d == x).map(|k| self.action[k])
    }

    /// `q ∘ self`, defined where `self` is defined and lands in the domain of `q`.
    pub fn then(&self, q: &PartialMap) -> Result<PartialMap> {
        if self.target != q.source {
            return Err(Error::Composition(format!(
                "partial map into {} composed with one from {}",
                self.target, q.source
            )));
        }
        let (domain, action) = self
            .domain
            .iter()
            .zip(&self.action)
            .filter_map(|(&x, &y)| q.get(y).map(|z| (x, z)))
            .unzip();
        PartialMap::new(self.source, q.target, domain, action)
    }
}

/// The equivalence γ: Γ'₊ → Γ₊. Elements outside the domain go to the basepoint.
pub fn gamma_from_partial(p: &PartialMap) -> PointedMap {
    let mut table = vec![0; p.source as usize + 1];
    for (&x, &y) in p.domain.iter().zip(&p.action) {
        table[x as usize] = y;
    }
    PointedMap::from_table_unchecked(p.source, p.target, table)
}

/// An injection `{1..=source} ↪ {1..=target}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    source: u32,
    target: u32,
    map: Vec<u32>,
}

impl Injection {
    /// `map[k]` is the image of `k + 1`.
    pub fn new(target: u32, map: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; target as usize + 1];
        for &y in &map {
            if y == 0 || y > target {
                return Err(Error::Validation(format!("image {y} outside 1..={target}")));
            }
            if std::mem::replace(&mut seen[y as usize], true) {
                return Err(Error::Validation(format!("not injective: {y} hit twice")));
            }
        }
        Ok(Injection {
            source: map.len() as u32,
            target,
            map,
        })
    }

    /// The block inclusion of `{1..=len}` starting after `offset`.
    pub fn block(offset: u32, len: u32, target: u32) -> Result<Self> {
        Injection::new(target, (offset + 1..=offset + len).collect())
    }

    pub fn source(&self) -> u32 {
        self.source
    }

    pub fn target(&self) -> u32 {
        self.target
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Injection) -> Result<Injection> {
        if self.target != other.source {
            return Err(Error::Composition("injections not composable".into()));
        }
        Injection::new(
            other.target,
            self.map.iter().map(|&y| other.map[y as usize - 1]).collect(),
        )
    }

    /// `ι^#`: the partial map `S₂ ← S₁ = S₁` going back along the injection.
    pub fn reverse(&self) -> PartialMap {
        PartialMap {
            source: self.target,
            target: self.source,
            domain: self.map.clone(),
            action: (1..=self.source).collect(),
        }
    }
}

/// `γ(ι^#)`: points in the image go back along `ι`; all others to the basepoint.
pub fn sharp(iota: &Injection) -> PointedMap {
    gamma_from_partial(&iota.reverse())
}

/// A face or degeneracy operator of Δ^op, indexed by its position `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeltaOp {
    Face(usize),
    Degeneracy(usize),
}

impl DeltaOp {
    pub fn index(self) -> usize {
        match self {
            DeltaOp::Face(i) | DeltaOp::Degeneracy(i) => i,
        }
    }

    /// Level reached from level `q`, or `None` if the operator is not defined there.
    pub fn target_level(self, q: usize) -> Option<usize> {
        match self {
            DeltaOp::Face(i) if q >= 1 && i <= q => Some(q - 1),
            DeltaOp::Degeneracy(i) if i <= q => Some(q + 1),
            _ => None,
        }
    }
}

/// σ(op) for the simplicial circle `S = Δ[1]/∂Δ[1]`.
///
/// `S([q])` is the set of monotone maps `[q] → [1]`; element `k ∈ 1..=q` is the
/// map that is `1` exactly on `j ≥ k`, and the two constant maps are the basepoint.
/// Operators act by precomposition with cofaces/codegeneracies.
pub fn circle_structure(q: usize, op: DeltaOp) -> Result<PointedMap> {
    let target = op
        .target_level(q)
        .ok_or_else(|| Error::Validation(format!("{op:?} undefined at level {q}")))?;
    let (q32, t32) = (q as u32, target as u32);
    let i = op.index() as u32;
    let table = (0..=q32)
        .map(|k| {
            if k == 0 {
                return 0;
            }
            match op {
                DeltaOp::Face(_) => {
                    let k2 = if k <= i { k } else { k - 1 };
                    if k2 == 0 || k2 > t32 {
                        0
                    } else {
                        k2
                    }
                }
                DeltaOp::Degeneracy(_) => {
                    if k <= i {
                        k
                    } else {
                        k + 1
                    }
                }
            }
        })
        .collect();
    Ok(PointedMap::from_table_unchecked(q32, t32, table))
}
