//! Γ-spaces valued in multisimplicial pointed sets, and the Segal machine.
//!
//! A [`GammaSpace`] assigns to `[n]₊` a multisimplicial pointed set with a
//! fixed number of directions and to every pointed map `f` a map of those
//! objects. Everything is lazy: cells are labels, and structure maps and
//! `X(f)` act on slices of labels.

mod builtin;
mod constructions;
mod parse;
mod special;
mod transforms;

use std::sync::Arc;

pub use builtin::{circle_gamma, discrete_abelian, point_gamma, sphere, t_of, DiscreteAbelian, PointGamma, TOf};
pub use constructions::{bar, mu_pullback, sigma, smash_gamma, wedge_gamma, Bar, Mu, Sigma, SmashGamma, WedgeGamma};
pub use parse::parse_space;
pub use special::{check_functoriality, is_special, SpecialMode, SpecialVerdict};
pub use transforms::{
    bar_map, check_naturality, compose_gamma_maps, identify, identity_gamma_map, map_at, mu_map, rho, sigma_map,
    tau, tu_map, wedge_inclusion, GammaMap, SharedGammaMap,
};

use crate::error::{Error, Result};
use crate::gamma::PointedMap;
use crate::simplicial::{op_target, MSMap, MSSet, Memoized, MultiIndex, SharedMap, SharedSS, SimplicialOp};

/// A normalized functor from Γ₊ to `k`-direction multisimplicial pointed sets.
///
/// Implementations must be pure, send `[0]₊` to the point, and be functorial.
pub trait GammaSpace: Send + Sync {
    fn directions(&self) -> usize;

    /// Non-basepoint cells of `X([n]₊)` at `q`.
    fn count(&self, n: u32, q: &[usize]) -> Result<u64>;

    /// A structure map of `X([n]₊)`, applied in place.
    fn structure(&self, n: u32, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()>;

    /// `X(f)` at level `q`, applied in place.
    fn act(&self, f: &PointedMap, q: &[usize], cells: &mut [u32]) -> Result<()>;

    /// Canonical spec string.
    fn describe(&self) -> String;

    /// Whether every value is a constant (discrete) object.
    fn is_discrete(&self) -> bool {
        false
    }
}

pub type Gamma = Arc<dyn GammaSpace>;

pub(crate) fn check_level(x: &dyn GammaSpace, q: &[usize]) -> Result<()> {
    if q.len() != x.directions() {
        return Err(Error::Validation(format!(
            "{} has {} directions, got level {}",
            x.describe(),
            x.directions(),
            MultiIndex(q.to_vec())
        )));
    }
    Ok(())
}

/// `X([n]₊)` as a multisimplicial set.
pub struct Eval {
    x: Gamma,
    n: u32,
}

impl MSSet for Eval {
    fn directions(&self) -> usize {
        self.x.directions()
    }

    fn count(&self, q: &[usize]) -> Result<u64> {
        self.x.count(self.n, q)
    }

    fn apply(&self, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        op_target(self, q, op)?;
        self.x.structure(self.n, q, op, cells)
    }

    fn describe(&self) -> String {
        format!("{}([{}]+)", self.x.describe(), self.n)
    }
}

/// `X([n]₊)`, with small structure tables cached.
pub fn eval(x: &Gamma, n: u32) -> SharedSS {
    Memoized::shared(Arc::new(Eval { x: x.clone(), n }))
}

/// `U(X) = X([1]₊)`.
pub fn underlying(x: &Gamma) -> SharedSS {
    eval(x, 1)
}

/// `X(f)` as a map of multisimplicial sets.
pub struct ActMap {
    x: Gamma,
    f: PointedMap,
    source: SharedSS,
    target: SharedSS,
}

impl MSMap for ActMap {
    fn source(&self) -> SharedSS {
        self.source.clone()
    }

    fn target(&self) -> SharedSS {
        self.target.clone()
    }

    fn apply(&self, q: &[usize], cells: &mut [u32]) -> Result<()> {
        self.x.act(&self.f, q, cells)
    }

    fn describe(&self) -> String {
        format!("{}({:?})", self.x.describe(), self.f.table())
    }
}

pub fn act_map(x: &Gamma, f: &PointedMap) -> SharedMap {
    Arc::new(ActMap {
        x: x.clone(),
        f: f.clone(),
        source: eval(x, f.source().size()),
        target: eval(x, f.target().size()),
    })
}

/// `Bⁿ(X)`, built once and reused across levels of the tower.
pub struct Tower {
    levels: parking_lot::Mutex<Vec<Gamma>>,
}

impl Tower {
    pub fn new(x: Gamma) -> Self {
        Tower {
            levels: parking_lot::Mutex::new(vec![x]),
        }
    }

    pub fn input(&self) -> Gamma {
        self.levels.lock()[0].clone()
    }

    /// `Bⁿ(X)`.
    pub fn iterate(&self, n: usize) -> Gamma {
        let mut levels = self.levels.lock();
        while levels.len() <= n {
            let next = bar(levels.last().expect("nonempty").clone());
            levels.push(next);
        }
        levels[n].clone()
    }

    /// `U(Bⁿ(X))`, an object with `n + k` directions.
    pub fn level(&self, n: usize) -> SpectrumLevel {
        SpectrumLevel {
            n,
            object: underlying(&self.iterate(n)),
            source: self.input().describe(),
        }
    }
}

/// One level `U(Bⁿ X)` of the tower.
#[derive(Clone)]
pub struct SpectrumLevel {
    pub n: usize,
    pub object: SharedSS,
    /// Spec string of the input `X`.
    pub source: String,
}

/// `U(Bⁿ X)`.
pub fn spectrum_level(x: &Gamma, n: usize) -> SpectrumLevel {
    Tower::new(x.clone()).level(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::{check_simplicial_identities, structure_map};

    #[test]
    fn nerve_levels() {
        let a = discrete_abelian(&[2]).unwrap();
        let l1 = spectrum_level(&a, 1);
        assert_eq!(l1.object.directions(), 1);
        for q in 0..5usize {
            assert_eq!(l1.object.count(&[q]).unwrap() + 1, 1 << q);
        }
        check_simplicial_identities(&*l1.object, 4).unwrap();
        let l2 = spectrum_level(&a, 2);
        for (q1, q2) in [(1usize, 1usize), (2, 1), (2, 2), (3, 1)] {
            assert_eq!(l2.object.count(&[q1, q2]).unwrap() + 1, 1 << (q1 * q2));
        }
        check_simplicial_identities(&*l2.object, 4).unwrap();
        let l0 = spectrum_level(&a, 0);
        assert_eq!(l0.object.directions(), 0);
        assert_eq!(l0.object.count(&[]).unwrap(), 1);
    }

    #[test]
    fn nerve_faces_are_bar_faces() {
        // (a, b) at level 2 of the nerve of ℤ/3: d0 drops a, d1 adds, d2 drops b
        let a = discrete_abelian(&[3]).unwrap();
        let nerve = spectrum_level(&a, 1).object;
        let enc = |x: u32, y: u32| x + 3 * y;
        for x in 0..3u32 {
            for y in 0..3u32 {
                let c = enc(x, y);
                let face = |i| structure_map(&*nerve, &[2], SimplicialOp::face(0, i)).unwrap().apply(c);
                assert_eq!(face(0), y);
                assert_eq!(face(1), (x + y) % 3);
                assert_eq!(face(2), x);
            }
        }
        // degeneracies insert the identity element
        let s0 = structure_map(&*nerve, &[1], SimplicialOp::degeneracy(0, 0)).unwrap();
        assert_eq!(s0.apply(2), enc(0, 2));
        let s1 = structure_map(&*nerve, &[1], SimplicialOp::degeneracy(0, 1)).unwrap();
        assert_eq!(s1.apply(2), enc(2, 0));
    }
}
