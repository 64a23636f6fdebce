//! Functoriality spot checks and the specialness test.

use serde::Serialize;

use super::transforms::{all_maps, small_levels};
use super::{act_map, eval, Gamma};
use crate::chains::Ring;
use crate::error::{Error, Result};
use crate::gamma::{compose, sharp, Injection, PointedMap};
use crate::simplicial::{chains_of_map, check_map, count_u32, product_ss, MSMap, MultiIndex, ProductSS, SharedSS};

const CHECK_CELLS: u64 = 1 << 12;

/// Checks `X(g ∘ f) = X(g) ∘ X(f)` and `X(id) = id` on all objects `[n]₊`
/// with `n ≤ max_n`, and that every `X(f)` commutes with the structure maps.
pub fn check_functoriality(x: &Gamma, max_n: u32, max_degree: usize) -> Result<()> {
    let fail = |what: String| Error::Integrity(format!("{} is not functorial: {what}", x.describe()));
    for a in 0..=max_n {
        let levels = small_levels(&**x, a, max_degree, CHECK_CELLS)?;
        for q in &levels {
            let q = q.levels();
            let cells: Vec<u32> = (0..=x.count(a, q)? as u32).collect();
            let mut id = cells.clone();
            x.act(&PointedMap::identity(a), q, &mut id)?;
            if id != cells {
                return Err(fail(format!("identity of [{a}]+ at {}", MultiIndex(q.to_vec()))));
            }
        }
        for b in 0..=max_n {
            let fs = all_maps(a, b);
            for f in &fs {
                if max_degree > 0 {
                    check_map(&*act_map(x, f), max_degree.min(2))
                        .map_err(|e| fail(format!("X({:?}): {e}", f.table())))?;
                }
            }
            for q in &levels {
                let q = q.levels();
                let cells: Vec<u32> = (0..=x.count(a, q)? as u32).collect();
                let images: Vec<Vec<u32>> = fs
                    .iter()
                    .map(|f| {
                        let mut v = cells.clone();
                        x.act(f, q, &mut v)?;
                        Ok(v)
                    })
                    .collect::<Result<_>>()?;
                for c in 0..=max_n {
                    for g in all_maps(b, c) {
                        for (f, fx) in fs.iter().zip(&images) {
                            let mut lhs = fx.clone();
                            x.act(&g, q, &mut lhs)?;
                            let mut rhs = cells.clone();
                            x.act(&compose(f, &g)?, q, &mut rhs)?;
                            if lhs != rhs {
                                return Err(fail(format!(
                                    "{:?} then {:?} at {}",
                                    f.table(),
                                    g.table(),
                                    MultiIndex(q.to_vec())
                                )));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// How specialness is certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpecialMode {
    /// Levelwise bijection at every level of total degree `≤ depth`.
    Bijection { depth: usize },
    /// Homology isomorphism over `ring` in degrees `≤ depth`.
    Homology { depth: usize, ring: Ring },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialVerdict {
    pub special: bool,
    #[serde(flatten)]
    pub mode: SpecialMode,
    /// Pairs `(n, n′)` with `n + n′ ≤ bound` were checked.
    pub bound: u32,
    /// The first failing pair, if any.
    pub failure: Option<String>,
}

/// `X([n + n′]₊) → X([n]₊) × X([n′]₊)`, from the two block restrictions.
struct SegalMap {
    x: Gamma,
    left: PointedMap,
    right: PointedMap,
    source: SharedSS,
    target: SharedSS,
    second: SharedSS,
}

impl MSMap for SegalMap {
    fn source(&self) -> SharedSS {
        self.source.clone()
    }

    fn target(&self) -> SharedSS {
        self.target.clone()
    }

    fn apply(&self, q: &[usize], cells: &mut [u32]) -> Result<()> {
        let m = count_u32(&*self.second, q, u32::MAX as u64 - 1)?;
        let mut a = cells.to_vec();
        self.x.act(&self.left, q, &mut a)?;
        self.x.act(&self.right, q, cells)?;
        for (c, i) in cells.iter_mut().zip(a) {
            *c = ProductSS::label(i, *c, m);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("segal[{}]", self.x.describe())
    }
}

fn segal_map(x: &Gamma, n: u32, n2: u32) -> Result<SegalMap> {
    let left = sharp(&Injection::block(0, n, n + n2)?);
    let right = sharp(&Injection::block(n, n2, n + n2)?);
    let (a, b) = (eval(x, n), eval(x, n2));
    Ok(SegalMap {
        x: x.clone(),
        left,
        right,
        source: eval(x, n + n2),
        target: product_ss(a, b.clone())?,
        second: b,
    })
}

fn bijective_at(f: &SegalMap, q: &[usize], budget: u64) -> Result<bool> {
    let n = count_u32(&*f.source, q, budget)?;
    let m = count_u32(&*f.target, q, budget)?;
    if n != m {
        return Ok(false);
    }
    let mut cells: Vec<u32> = (0..=n).collect();
    f.apply(q, &mut cells)?;
    let mut seen = vec![false; m as usize + 1];
    Ok(cells.into_iter().all(|c| !std::mem::replace(&mut seen[c as usize], true)))
}

/// Tests the Segal condition for all `n, n′ ≥ 1` with `n + n′ ≤ bound`.
pub fn is_special(x: &Gamma, mode: SpecialMode, bound: u32, budget: u64) -> Result<SpecialVerdict> {
    let mut failure = None;
    'pairs: for total in 2..=bound {
        for n in 1..total {
            let f = segal_map(x, n, total - n)?;
            let ok = match mode {
                SpecialMode::Bijection { depth } => {
                    let mut ok = true;
                    for d in 0..=depth {
                        for q in crate::simplicial::multi_indices(x.directions(), d) {
                            if !bijective_at(&f, q.levels(), budget)? {
                                ok = false;
                            }
                        }
                    }
                    ok
                }
                SpecialMode::Homology { depth, ring } => {
                    let map = chains_of_map(&f, ring, depth, budget)?;
                    map.induces_iso(depth)?.into_iter().all(|b| b)
                }
            };
            if !ok {
                failure = Some(format!("X([{total}]+) -> X([{n}]+) x X([{}]+)", total - n));
                break 'pairs;
            }
        }
    }
    Ok(SpecialVerdict {
        special: failure.is_none(),
        mode,
        bound,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segal::{bar, discrete_abelian, point_gamma, sigma, sphere};

    const BIG: u64 = 1 << 24;

    #[test]
    fn groups_are_special() {
        for factors in [&[2u32][..], &[3], &[2, 4]] {
            let a = discrete_abelian(factors).unwrap();
            let v = is_special(&a, SpecialMode::Bijection { depth: 0 }, 4, BIG).unwrap();
            assert!(v.special, "{factors:?}");
            assert_eq!(v.bound, 4);
        }
    }

    #[test]
    fn sphere_is_not_special() {
        let s = sphere();
        let v = is_special(&s, SpecialMode::Bijection { depth: 0 }, 3, BIG).unwrap();
        assert!(!v.special);
        assert_eq!(v.failure.as_deref(), Some("X([2]+) -> X([1]+) x X([1]+)"));
        let h = is_special(&s, SpecialMode::Homology { depth: 1, ring: Ring::Integers }, 2, BIG).unwrap();
        assert!(!h.special);
    }

    #[test]
    fn point_is_special() {
        let v = is_special(&point_gamma(0), SpecialMode::Bijection { depth: 0 }, 4, BIG).unwrap();
        assert!(v.special);
    }

    #[test]
    fn bar_of_special_is_special_in_homology() {
        let b = bar(discrete_abelian(&[2]).unwrap());
        let mode = SpecialMode::Homology {
            depth: 2,
            ring: Ring::PrimeField(2),
        };
        assert!(is_special(&b, mode, 3, BIG).unwrap().special);
        let z = SpecialMode::Homology {
            depth: 2,
            ring: Ring::Integers,
        };
        assert!(is_special(&b, z, 2, BIG).unwrap().special);
    }

    #[test]
    fn sigma_of_special_is_not_levelwise_special() {
        // Σ(A)([2]) = S ∧ A² has 7 cells at level 2, while (S ∧ A)² has 9
        let s = sigma(discrete_abelian(&[2]).unwrap());
        let v = is_special(&s, SpecialMode::Bijection { depth: 2 }, 2, BIG).unwrap();
        assert!(!v.special);
    }

    #[test]
    fn functoriality_of_builtins() {
        check_functoriality(&discrete_abelian(&[3]).unwrap(), 3, 0).unwrap();
        check_functoriality(&sphere(), 3, 0).unwrap();
    }
}
