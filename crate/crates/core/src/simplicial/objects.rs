//! Concrete multisimplicial objects and levelwise constructions.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;

use super::{op_target, MSSet, SharedSS, SimplicialOp};
use crate::error::{Error, Result};
use crate::gamma::{circle_structure, smash_index, smash_split};

fn to_u32(n: u64, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Validation(format!("{what}: {n} cells do not fit a u32 label")))
}

/// The constant object with `n` non-basepoint cells at every level.
pub struct Constant {
    directions: usize,
    cells: u32,
}

impl Constant {
    pub fn new(directions: usize, cells: u32) -> Self {
        Constant { directions, cells }
    }
}

impl MSSet for Constant {
    fn directions(&self) -> usize {
        self.directions
    }

    fn count(&self, _q: &[usize]) -> Result<u64> {
        Ok(self.cells as u64)
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, _cells: &mut [u32]) -> Result<()> {
        op_target(self, q, op).map(|_| ())
    }

    fn describe(&self) -> String {
        match (self.directions, self.cells) {
            (_, 0) => "pt".into(),
            (0, 1) => "S0".into(),
            (k, n) => format!("const({k};{n})"),
        }
    }
}

pub fn point(directions: usize) -> SharedSS {
    Arc::new(Constant::new(directions, 0))
}

pub fn constant(directions: usize, cells: u32) -> SharedSS {
    Arc::new(Constant::new(directions, cells))
}

/// The simplicial circle: `S([q]) ≅ [q]₊`.
pub struct Circle;

impl MSSet for Circle {
    fn directions(&self) -> usize {
        1
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        Ok(q[0] as u64)
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        op_target(self, q, op)?;
        let map = circle_structure(q[0], op.op)?;
        for c in cells.iter_mut() {
            *c = map.apply(*c);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        "S".into()
    }
}

fn same_directions(x: &dyn MSSet, y: &dyn MSSet) -> Result<usize> {
    if x.directions() != y.directions() {
        return Err(Error::DirectionMismatch {
            left: x.directions(),
            right: y.directions(),
        });
    }
    Ok(x.directions())
}

/// Levelwise smash product.
pub struct SmashSS {
    x: SharedSS,
    y: SharedSS,
}

impl MSSet for SmashSS {
    fn directions(&self) -> usize {
        self.x.directions()
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        let (a, b) = (self.x.count(q)?, self.y.count(q)?);
        a.checked_mul(b)
            .ok_or_else(|| Error::Validation("smash cell count overflows".into()))
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let t = op_target(self, q, op)?;
        let m = to_u32(self.y.count(q)?, "smash")?;
        let m_t = to_u32(self.y.count(t.levels())?, "smash")?;
        let (mut a, mut b): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| if c == 0 { (0, 0) } else { smash_split(c, m) }).unzip();
        self.x.apply(q, op, &mut a)?;
        self.y.apply(q, op, &mut b)?;
        for (c, (i, j)) in cells.iter_mut().zip(a.into_iter().zip(b)) {
            *c = smash_index(i, j, m_t);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("({} ^ {})", self.x.describe(), self.y.describe())
    }
}

pub fn smash_ss(x: SharedSS, y: SharedSS) -> Result<SharedSS> {
    same_directions(&*x, &*y)?;
    Ok(Arc::new(SmashSS { x, y }))
}

/// Levelwise wedge: the cells of `x` followed by those of `y`.
pub struct WedgeSS {
    x: SharedSS,
    y: SharedSS,
}

impl MSSet for WedgeSS {
    fn directions(&self) -> usize {
        self.x.directions()
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        Ok(self.x.count(q)? + self.y.count(q)?)
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let t = op_target(self, q, op)?;
        let n = to_u32(self.x.count(q)?, "wedge")?;
        let n_t = to_u32(self.x.count(t.levels())?, "wedge")?;
        let (left, right): (Vec<usize>, Vec<usize>) =
            (0..cells.len()).partition(|&k| cells[k] <= n);
        let mut a: Vec<u32> = left.iter().map(|&k| cells[k]).collect();
        let mut b: Vec<u32> = right.iter().map(|&k| cells[k] - n).collect();
        self.x.apply(q, op, &mut a)?;
        self.y.apply(q, op, &mut b)?;
        for (&k, v) in left.iter().zip(a) {
            cells[k] = v;
        }
        for (&k, v) in right.iter().zip(b) {
            cells[k] = if v == 0 { 0 } else { v + n_t };
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("({} v {})", self.x.describe(), self.y.describe())
    }
}

pub fn wedge_ss(x: SharedSS, y: SharedSS) -> Result<SharedSS> {
    same_directions(&*x, &*y)?;
    Ok(Arc::new(WedgeSS { x, y }))
}

/// Levelwise product. The pair `(i, j)` is labelled `i·(|y| + 1) + j`, so the
/// basepoint `(0, 0)` is `0`.
pub struct ProductSS {
    x: SharedSS,
    y: SharedSS,
}

impl ProductSS {
    pub fn label(i: u32, j: u32, y_count: u32) -> u32 {
        i * (y_count + 1) + j
    }
}

impl MSSet for ProductSS {
    fn directions(&self) -> usize {
        self.x.directions()
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        let (a, b) = (self.x.count(q)?, self.y.count(q)?);
        (a + 1)
            .checked_mul(b + 1)
            .map(|n| n - 1)
            .ok_or_else(|| Error::Validation("product cell count overflows".into()))
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let t = op_target(self, q, op)?;
        let m = to_u32(self.y.count(q)?, "product")?;
        let m_t = to_u32(self.y.count(t.levels())?, "product")?;
        let (mut a, mut b): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| (c / (m + 1), c % (m + 1))).unzip();
        self.x.apply(q, op, &mut a)?;
        self.y.apply(q, op, &mut b)?;
        for (c, (i, j)) in cells.iter_mut().zip(a.into_iter().zip(b)) {
            *c = ProductSS::label(i, j, m_t);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("({} x {})", self.x.describe(), self.y.describe())
    }
}

pub fn product_ss(x: SharedSS, y: SharedSS) -> Result<SharedSS> {
    same_directions(&*x, &*y)?;
    Ok(Arc::new(ProductSS { x, y }))
}

/// The external smash `x ⊠ y`: the directions of `x` followed by those of `y`.
pub struct ExternalSmash {
    x: SharedSS,
    y: SharedSS,
}

impl MSSet for ExternalSmash {
    fn directions(&self) -> usize {
        self.x.directions() + self.y.directions()
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        let k = self.x.directions();
        let (a, b) = (self.x.count(&q[..k])?, self.y.count(&q[k..])?);
        a.checked_mul(b)
            .ok_or_else(|| Error::Validation("external smash cell count overflows".into()))
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let t = op_target(self, q, op)?;
        let k = self.x.directions();
        let m = to_u32(self.y.count(&q[k..])?, "external smash")?;
        let m_t = to_u32(self.y.count(&t.levels()[k..])?, "external smash")?;
        let (mut a, mut b): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| if c == 0 { (0, 0) } else { smash_split(c, m) }).unzip();
        if op.direction < k {
            self.x.apply(&q[..k], op, &mut a)?;
        } else {
            let shifted = SimplicialOp {
                direction: op.direction - k,
                op: op.op,
            };
            self.y.apply(&q[k..], shifted, &mut b)?;
        }
        for (c, (i, j)) in cells.iter_mut().zip(a.into_iter().zip(b)) {
            *c = smash_index(i, j, m_t);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("({} [x] {})", self.x.describe(), self.y.describe())
    }
}

pub fn external_smash(x: SharedSS, y: SharedSS) -> SharedSS {
    Arc::new(ExternalSmash { x, y })
}

/// `S ⊠ x`: a new leading direction carrying the circle.
pub fn suspension_ss(x: SharedSS) -> SharedSS {
    external_smash(Arc::new(Circle), x)
}

/// Restriction along the diagonal `Δ → Δᵏ`.
pub struct Diagonal {
    x: SharedSS,
}

impl MSSet for Diagonal {
    fn directions(&self) -> usize {
        1
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        self.x.count(&vec![q[0]; self.x.directions()])
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        op_target(self, q, op)?;
        let k = self.x.directions();
        let mut level = vec![q[0]; k];
        for dir in 0..k {
            let inner = SimplicialOp {
                direction: dir,
                op: op.op,
            };
            self.x.apply(&level, inner, cells)?;
            level = op_target(&*self.x, &level, inner)?.0;
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("diag{}", self.x.describe())
    }
}

pub fn diagonal(x: SharedSS) -> SharedSS {
    Arc::new(Diagonal { x })
}

/// Caches cell counts and, for small levels, full structure tables.
pub struct Memoized {
    inner: SharedSS,
    table_limit: u64,
    counts: RwLock<HashMap<Vec<usize>, u64>>,
    tables: RwLock<HashMap<(Vec<usize>, SimplicialOp), Arc<Vec<u32>>>>,
}

impl Memoized {
    pub fn new(inner: SharedSS, table_limit: u64) -> Self {
        Memoized {
            inner,
            table_limit,
            counts: RwLock::new(HashMap::new()),
            tables: RwLock::new(HashMap::new()),
        }
    }

    pub fn shared(inner: SharedSS) -> SharedSS {
        Arc::new(Memoized::new(inner, 1 << 16))
    }
}

impl MSSet for Memoized {
    fn directions(&self) -> usize {
        self.inner.directions()
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        if let Some(&n) = self.counts.read().get(q) {
            return Ok(n);
        }
        let n = self.inner.count(q)?;
        self.counts.write().insert(q.to_vec(), n);
        Ok(n)
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let n = self.count(q)?;
        if n > self.table_limit {
            return self.inner.apply(q, op, cells);
        }
        let key = (q.to_vec(), op);
        let cached = self.tables.read().get(&key).cloned();
        let table = match cached {
            Some(t) => t,
            None => {
                let mut t: Vec<u32> = (0..=n as u32).collect();
                self.inner.apply(q, op, &mut t)?;
                let t = Arc::new(t);
                self.tables.write().insert(key, t.clone());
                t
            }
        };
        for c in cells.iter_mut() {
            *c = table[*c as usize];
        }
        Ok(())
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}
