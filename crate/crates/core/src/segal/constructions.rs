//! Closure of Γ-spaces under `B`, `Σ`, `μₖ*`, `∨` and `∧`.
//!
//! `B` and `Σ` add a leading simplicial direction `q₀`. For `B(X)` the cells
//! at `(q₀, rest)` over `[m]₊` are those of `X([q₀]₊ ∧ [m]₊)` at `rest`, and
//! an operator in the leading direction acts through `X(σ(op) ∧ id)`. For
//! `Σ(X)` they are `S([q₀]) ∧ X([m]₊)(rest)`.

use std::sync::Arc;

use super::{check_level, Gamma, GammaSpace};
use crate::error::{Error, Result};
use crate::gamma::{circle_structure, mu, smash, smash_index, smash_split, PointedMap};
use crate::simplicial::{MultiIndex, SimplicialOp};

fn shifted(op: SimplicialOp) -> SimplicialOp {
    SimplicialOp {
        direction: op.direction - 1,
        op: op.op,
    }
}

fn times(a: usize, n: u32, q: &[usize]) -> Result<u32> {
    u32::try_from(a as u64 * n as u64)
        .ok()
        .filter(|&v| v < u32::MAX)
        .ok_or_else(|| Error::Budget {
            index: MultiIndex(q.to_vec()),
            cells: a as u128 * n as u128,
            budget: u32::MAX as u64,
        })
}

fn check_op(x: &dyn GammaSpace, q: &[usize], op: SimplicialOp) -> Result<MultiIndex> {
    check_level(x, q)?;
    MultiIndex(q.to_vec())
        .step(op.direction, op.op)
        .filter(|_| op.direction < q.len())
        .ok_or_else(|| Error::Validation(format!("{op:?} undefined at {}", MultiIndex(q.to_vec()))))
}

/// The classifying-space functor.
pub struct Bar {
    x: Gamma,
}

impl GammaSpace for Bar {
    fn directions(&self) -> usize {
        self.x.directions() + 1
    }

    fn count(&self, n: u32, q: &[usize]) -> Result<u64> {
        check_level(self, q)?;
        self.x.count(times(q[0], n, q)?, &q[1..])
    }

    fn structure(&self, n: u32, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        check_op(self, q, op)?;
        let big = times(q[0], n, q)?;
        if op.direction == 0 {
            let f = smash(&circle_structure(q[0], op.op)?, &PointedMap::identity(n))?;
            self.x.act(&f, &q[1..], cells)
        } else {
            self.x.structure(big, &q[1..], shifted(op), cells)
        }
    }

    fn act(&self, f: &PointedMap, q: &[usize], cells: &mut [u32]) -> Result<()> {
        check_level(self, q)?;
        let g = mu(q[0] as u32, f)?;
        self.x.act(&g, &q[1..], cells)
    }

    fn describe(&self) -> String {
        format!("B({})", self.x.describe())
    }
}

pub fn bar(x: Gamma) -> Gamma {
    Arc::new(Bar { x })
}

/// `Σ(X)`: the circle smashed on in a new leading direction.
pub struct Sigma {
    x: Gamma,
}

impl Sigma {
    fn inner(&self, n: u32, rest: &[usize]) -> Result<u32> {
        let c = self.x.count(n, rest)?;
        u32::try_from(c).map_err(|_| Error::Budget {
            index: MultiIndex(rest.to_vec()),
            cells: c as u128,
            budget: u32::MAX as u64,
        })
    }
}

impl GammaSpace for Sigma {
    fn directions(&self) -> usize {
        self.x.directions() + 1
    }

    fn count(&self, n: u32, q: &[usize]) -> Result<u64> {
        check_level(self, q)?;
        self.x
            .count(n, &q[1..])?
            .checked_mul(q[0] as u64)
            .ok_or_else(|| Error::Validation("cell count overflows".into()))
    }

    fn structure(&self, n: u32, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let t = check_op(self, q, op)?;
        let m = self.inner(n, &q[1..])?;
        if m == 0 {
            return Ok(());
        }
        let m_t = self.inner(n, &t.levels()[1..])?;
        let (mut s, mut x): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| if c == 0 { (0, 0) } else { smash_split(c, m) }).unzip();
        if op.direction == 0 {
            let sigma = circle_structure(q[0], op.op)?;
            s.iter_mut().for_each(|v| *v = sigma.apply(*v));
        } else {
            self.x.structure(n, &q[1..], shifted(op), &mut x)?;
        }
        for (c, (a, b)) in cells.iter_mut().zip(s.into_iter().zip(x)) {
            *c = smash_index(a, b, m_t);
        }
        Ok(())
    }

    fn act(&self, f: &PointedMap, q: &[usize], cells: &mut [u32]) -> Result<()> {
        check_level(self, q)?;
        let m = self.inner(f.source().size(), &q[1..])?;
        if m == 0 {
            cells.iter_mut().for_each(|c| *c = 0);
            return Ok(());
        }
        let m_t = self.inner(f.target().size(), &q[1..])?;
        let (s, mut x): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| if c == 0 { (0, 0) } else { smash_split(c, m) }).unzip();
        self.x.act(f, &q[1..], &mut x)?;
        for (c, (a, b)) in cells.iter_mut().zip(s.into_iter().zip(x)) {
            *c = smash_index(a, b, m_t);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("sigma({})", self.x.describe())
    }
}

pub fn sigma(x: Gamma) -> Gamma {
    Arc::new(Sigma { x })
}

/// `μₖ*X : [n]₊ ↦ X([k]₊ ∧ [n]₊)`.
pub struct Mu {
    k: u32,
    x: Gamma,
}

impl GammaSpace for Mu {
    fn directions(&self) -> usize {
        self.x.directions()
    }

    fn count(&self, n: u32, q: &[usize]) -> Result<u64> {
        self.x.count(times(self.k as usize, n, q)?, q)
    }

    fn structure(&self, n: u32, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        self.x.structure(times(self.k as usize, n, q)?, q, op, cells)
    }

    fn act(&self, f: &PointedMap, q: &[usize], cells: &mut [u32]) -> Result<()> {
        self.x.act(&mu(self.k, f)?, q, cells)
    }

    fn describe(&self) -> String {
        format!("mu({})*{}", self.k, self.x.describe())
    }

    fn is_discrete(&self) -> bool {
        self.x.is_discrete()
    }
}

pub fn mu_pullback(k: u32, x: Gamma) -> Gamma {
    Arc::new(Mu { k, x })
}

fn same_directions(x: &Gamma, y: &Gamma) -> Result<()> {
    if x.directions() != y.directions() {
        return Err(Error::DirectionMismatch {
            left: x.directions(),
            right: y.directions(),
        });
    }
    Ok(())
}

fn small(c: u64, q: &[usize]) -> Result<u32> {
    u32::try_from(c).map_err(|_| Error::Budget {
        index: MultiIndex(q.to_vec()),
        cells: c as u128,
        budget: u32::MAX as u64,
    })
}

/// Levelwise wedge: cells of `X` first, then those of `Y`.
pub struct WedgeGamma {
    x: Gamma,
    y: Gamma,
}

impl WedgeGamma {
    /// Splits labels into the two summands, applies `fx`/`fy`, and relabels
    /// with `n_t` cells of `X` at the target.
    fn split_apply(
        cells: &mut [u32],
        n: u32,
        n_t: u32,
        fx: impl FnOnce(&mut [u32]) -> Result<()>,
        fy: impl FnOnce(&mut [u32]) -> Result<()>,
    ) -> Result<()> {
        let (left, right): (Vec<usize>, Vec<usize>) = (0..cells.len()).partition(|&k| cells[k] <= n);
        let mut a: Vec<u32> = left.iter().map(|&k| cells[k]).collect();
        let mut b: Vec<u32> = right.iter().map(|&k| cells[k] - n).collect();
        fx(&mut a)?;
        fy(&mut b)?;
        for (&k, v) in left.iter().zip(a) {
            cells[k] = v;
        }
        for (&k, v) in right.iter().zip(b) {
            cells[k] = if v == 0 { 0 } else { v + n_t };
        }
        Ok(())
    }
}

impl GammaSpace for WedgeGamma {
    fn directions(&self) -> usize {
        self.x.directions()
    }

    fn count(&self, n: u32, q: &[usize]) -> Result<u64> {
        Ok(self.x.count(n, q)? + self.y.count(n, q)?)
    }

    fn structure(&self, n: u32, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let t = check_op(self, q, op)?;
        let a = small(self.x.count(n, q)?, q)?;
        let a_t = small(self.x.count(n, t.levels())?, q)?;
        Self::split_apply(
            cells,
            a,
            a_t,
            |c| self.x.structure(n, q, op, c),
            |c| self.y.structure(n, q, op, c),
        )
    }

    fn act(&self, f: &PointedMap, q: &[usize], cells: &mut [u32]) -> Result<()> {
        let a = small(self.x.count(f.source().size(), q)?, q)?;
        let a_t = small(self.x.count(f.target().size(), q)?, q)?;
        Self::split_apply(cells, a, a_t, |c| self.x.act(f, q, c), |c| self.y.act(f, q, c))
    }

    fn describe(&self) -> String {
        format!("wedge({},{})", self.x.describe(), self.y.describe())
    }

    fn is_discrete(&self) -> bool {
        self.x.is_discrete() && self.y.is_discrete()
    }
}

pub fn wedge_gamma(x: Gamma, y: Gamma) -> Result<Gamma> {
    same_directions(&x, &y)?;
    Ok(Arc::new(WedgeGamma { x, y }))
}

/// Levelwise smash: `(x, y)` is labelled `smash_index(x, y, |Y|)`.
pub struct SmashGamma {
    x: Gamma,
    y: Gamma,
}

impl SmashGamma {
    fn pairwise(
        cells: &mut [u32],
        m: u32,
        m_t: u32,
        fx: impl FnOnce(&mut [u32]) -> Result<()>,
        fy: impl FnOnce(&mut [u32]) -> Result<()>,
    ) -> Result<()> {
        if m == 0 {
            cells.iter_mut().for_each(|c| *c = 0);
            return Ok(());
        }
        let (mut a, mut b): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| if c == 0 { (0, 0) } else { smash_split(c, m) }).unzip();
        fx(&mut a)?;
        fy(&mut b)?;
        for (c, (i, j)) in cells.iter_mut().zip(a.into_iter().zip(b)) {
            *c = smash_index(i, j, m_t);
        }
        Ok(())
    }
}

impl GammaSpace for SmashGamma {
    fn directions(&self) -> usize {
        self.x.directions()
    }

    fn count(&self, n: u32, q: &[usize]) -> Result<u64> {
        self.x
            .count(n, q)?
            .checked_mul(self.y.count(n, q)?)
            .ok_or_else(|| Error::Validation("cell count overflows".into()))
    }

    fn structure(&self, n: u32, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        let t = check_op(self, q, op)?;
        let m = small(self.y.count(n, q)?, q)?;
        let m_t = small(self.y.count(n, t.levels())?, q)?;
        Self::pairwise(
            cells,
            m,
            m_t,
            |c| self.x.structure(n, q, op, c),
            |c| self.y.structure(n, q, op, c),
        )
    }

    fn act(&self, f: &PointedMap, q: &[usize], cells: &mut [u32]) -> Result<()> {
        let m = small(self.y.count(f.source().size(), q)?, q)?;
        let m_t = small(self.y.count(f.target().size(), q)?, q)?;
        Self::pairwise(cells, m, m_t, |c| self.x.act(f, q, c), |c| self.y.act(f, q, c))
    }

    fn describe(&self) -> String {
        format!("smash({},{})", self.x.describe(), self.y.describe())
    }

    fn is_discrete(&self) -> bool {
        self.x.is_discrete() && self.y.is_discrete()
    }
}

pub fn smash_gamma(x: Gamma, y: Gamma) -> Result<Gamma> {
    same_directions(&x, &y)?;
    Ok(Arc::new(SmashGamma { x, y }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segal::builtin::same_object;
    use crate::segal::{check_functoriality, discrete_abelian, eval, point_gamma, sphere, t_of, underlying};
    use crate::simplicial::{check_simplicial_identities, suspension_ss, Circle, SharedSS};

    fn spaces() -> Vec<Gamma> {
        let a = discrete_abelian(&[2]).unwrap();
        let s = sphere();
        vec![
            a.clone(),
            s.clone(),
            discrete_abelian(&[3]).unwrap(),
            t_of(Arc::new(Circle), "t:circle"),
            point_gamma(0),
            bar(a.clone()),
            sigma(a.clone()),
            mu_pullback(2, a.clone()),
            wedge_gamma(a.clone(), s.clone()).unwrap(),
            smash_gamma(a.clone(), s.clone()).unwrap(),
            bar(sigma(s.clone())),
            sigma(bar(a)),
        ]
    }

    #[test]
    fn every_construction_is_normalized_and_lawful() {
        for x in spaces() {
            let k = x.directions();
            for d in 0..=3 {
                for q in crate::simplicial::multi_indices(k, d) {
                    assert_eq!(x.count(0, q.levels()).unwrap(), 0, "{} at [0]+", x.describe());
                }
            }
            for n in 0..=3 {
                check_simplicial_identities(&*eval(&x, n), 3).unwrap();
            }
            check_functoriality(&x, 3, 2).unwrap();
        }
    }

    #[test]
    fn suspension_commutes_with_evaluation() {
        for x in spaces() {
            let lhs = underlying(&sigma(x.clone()));
            let rhs = suspension_ss(underlying(&x));
            assert!(same_object(&*lhs, &*rhs, 4), "{}", x.describe());
        }
    }

    #[test]
    fn sigma_of_t_is_suspension() {
        let y: SharedSS = Arc::new(Circle);
        let lhs = underlying(&sigma(t_of(y.clone(), "t:circle")));
        assert!(same_object(&*lhs, &*suspension_ss(y), 4));
        let p = sigma(point_gamma(0));
        assert_eq!(p.count(1, &[3]).unwrap(), 0);
    }

    #[test]
    fn bar_of_point_is_point() {
        let b = bar(point_gamma(0));
        for q in 0..4 {
            assert_eq!(b.count(2, &[q]).unwrap(), 0);
        }
    }

    #[test]
    fn bar_of_group_is_the_nerve() {
        let a = discrete_abelian(&[2, 4]).unwrap();
        let b = bar(a);
        for q in 0..4usize {
            assert_eq!(b.count(1, &[q]).unwrap() + 1, 8u64.pow(q as u32));
            assert_eq!(b.count(0, &[q]).unwrap(), 0);
        }
    }

    #[test]
    fn mu_zero_is_the_point() {
        let m = mu_pullback(0, discrete_abelian(&[2]).unwrap());
        for n in 0..4 {
            assert_eq!(m.count(n, &[]).unwrap(), 0);
        }
    }

    #[test]
    fn mismatched_directions_are_rejected() {
        let a = discrete_abelian(&[2]).unwrap();
        assert!(matches!(
            wedge_gamma(a.clone(), bar(a.clone())),
            Err(Error::DirectionMismatch { left: 0, right: 1 })
        ));
        assert!(smash_gamma(sigma(a.clone()), a).is_err());
    }
}
