use std::sync::Arc;

use super::objects::ProductSS;
use super::{
    count_u32, multi_indices, op_target, operators_at, point, product_ss, smash_ss, wedge_ss,
    SharedSS,
};
use crate::error::{Error, Result};
use crate::gamma::smash_index;

/// A map of multisimplicial pointed sets, applied levelwise to cell labels.
pub trait MSMap: Send + Sync {
    fn source(&self) -> SharedSS;
    fn target(&self) -> SharedSS;
    fn apply(&self, q: &[usize], cells: &mut [u32]) -> Result<()>;

    fn describe(&self) -> String {
        format!("{} -> {}", self.source().describe(), self.target().describe())
    }
}

pub type SharedMap = Arc<dyn MSMap>;

struct FnMap<F> {
    source: SharedSS,
    target: SharedSS,
    f: F,
    name: String,
}

impl<F> MSMap for FnMap<F>
where
    F: Fn(&[usize], &mut [u32]) -> Result<()> + Send + Sync,
{
    fn source(&self) -> SharedSS {
        self.source.clone()
    }

    fn target(&self) -> SharedSS {
        self.target.clone()
    }

    fn apply(&self, q: &[usize], cells: &mut [u32]) -> Result<()> {
        (self.f)(q, cells)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

pub fn identity_map(x: SharedSS) -> SharedMap {
    Arc::new(FnMap {
        source: x.clone(),
        target: x,
        f: |_: &[usize], _: &mut [u32]| Ok(()),
        name: "id".into(),
    })
}

/// The map to the point.
pub fn collapse_map(x: SharedSS) -> SharedMap {
    let k = x.directions();
    Arc::new(FnMap {
        source: x,
        target: point(k),
        f: |_: &[usize], cells: &mut [u32]| {
            cells.fill(0);
            Ok(())
        },
        name: "collapse".into(),
    })
}

/// The canonical inclusion `x ∨ y → x × y`.
pub fn wedge_to_product(x: SharedSS, y: SharedSS) -> Result<SharedMap> {
    let source = wedge_ss(x.clone(), y.clone())?;
    let target = product_ss(x.clone(), y.clone())?;
    Ok(Arc::new(FnMap {
        source,
        target,
        f: move |q: &[usize], cells: &mut [u32]| {
            let n = count_u32(&*x, q, u32::MAX as u64)?;
            let m = count_u32(&*y, q, u32::MAX as u64)?;
            for c in cells.iter_mut() {
                *c = if *c <= n {
                    ProductSS::label(*c, 0, m)
                } else {
                    ProductSS::label(0, *c - n, m)
                };
            }
            Ok(())
        },
        name: "wedge->product".into(),
    }))
}

/// The canonical quotient `x × y → x ∧ y`.
pub fn product_to_smash(x: SharedSS, y: SharedSS) -> Result<SharedMap> {
    let source = product_ss(x.clone(), y.clone())?;
    let target = smash_ss(x, y.clone())?;
    Ok(Arc::new(FnMap {
        source,
        target,
        f: move |q: &[usize], cells: &mut [u32]| {
            let m = count_u32(&*y, q, u32::MAX as u64)?;
            for c in cells.iter_mut() {
                *c = smash_index(*c / (m + 1), *c % (m + 1), m);
            }
            Ok(())
        },
        name: "product->smash".into(),
    }))
}

/// `g ∘ f`.
pub struct ComposedMap {
    f: SharedMap,
    g: SharedMap,
}

impl MSMap for ComposedMap {
    fn source(&self) -> SharedSS {
        self.f.source()
    }

    fn target(&self) -> SharedSS {
        self.g.target()
    }

    fn apply(&self, q: &[usize], cells: &mut [u32]) -> Result<()> {
        self.f.apply(q, cells)?;
        self.g.apply(q, cells)
    }

    fn describe(&self) -> String {
        format!("({}) . ({})", self.g.describe(), self.f.describe())
    }
}

pub fn compose_maps(f: SharedMap, g: SharedMap) -> Result<SharedMap> {
    if f.target().directions() != g.source().directions() {
        return Err(Error::DirectionMismatch {
            left: f.target().directions(),
            right: g.source().directions(),
        });
    }
    Ok(Arc::new(ComposedMap { f, g }))
}

/// Spot-checks that `f` preserves basepoints, lands in range, and commutes
/// with every structure map at total degree ≤ `max_degree`.
pub fn check_map(f: &dyn MSMap, max_degree: usize) -> Result<()> {
    check_map_bounded(f, max_degree, u32::MAX as u64 - 1)
}

/// As [`check_map`], skipping levels with more than `max_cells` cells.
pub(crate) fn check_map_bounded(f: &dyn MSMap, max_degree: usize, max_cells: u64) -> Result<()> {
    let (src, tgt) = (f.source(), f.target());
    if src.directions() != tgt.directions() {
        return Err(Error::DirectionMismatch {
            left: src.directions(),
            right: tgt.directions(),
        });
    }
    for d in 0..=max_degree {
        for q in multi_indices(src.directions(), d) {
            let q = q.levels();
            if src.count(q)? > max_cells {
                continue;
            }
            let n = count_u32(&*src, q, u32::MAX as u64 - 1)?;
            let m = count_u32(&*tgt, q, u32::MAX as u64 - 1)?;
            let mut image: Vec<u32> = (0..=n).collect();
            f.apply(q, &mut image)?;
            if image[0] != 0 || image.iter().any(|&c| c > m) {
                return Err(Error::Validation(format!("map out of range at {q:?}")));
            }
            for op in operators_at(q) {
                let t = op_target(&*src, q, op)?;
                // f then op
                let mut a = image.clone();
                tgt.apply(q, op, &mut a)?;
                // op then f
                let mut b: Vec<u32> = (0..=n).collect();
                src.apply(q, op, &mut b)?;
                f.apply(t.levels(), &mut b)?;
                if a != b {
                    return Err(Error::Validation(format!(
                        "map does not commute with {op:?} at {q:?}"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::Circle;

    #[test]
    fn canonical_maps_commute() {
        let s: SharedSS = Arc::new(Circle);
        let w = wedge_to_product(s.clone(), s.clone()).unwrap();
        check_map(&*w, 4).unwrap();
        let p = product_to_smash(s.clone(), s.clone()).unwrap();
        check_map(&*p, 4).unwrap();
        let both = compose_maps(w, p).unwrap();
        check_map(&*both, 4).unwrap();
        // the wedge collapses to the basepoint of the smash
        let mut cells: Vec<u32> = (0..=4).collect();
        both.apply(&[2], &mut cells).unwrap();
        assert!(cells.iter().all(|&c| c == 0));
    }

    #[test]
    fn bad_map_is_detected() {
        let s: SharedSS = Arc::new(Circle);
        let bad = FnMap {
            source: s.clone(),
            target: s,
            f: |q: &[usize], cells: &mut [u32]| {
                if q[0] == 2 {
                    for c in cells.iter_mut() {
                        *c = if *c == 0 { 0 } else { 3 - *c };
                    }
                }
                Ok(())
            },
            name: "bad".into(),
        };
        assert!(check_map(&bad, 3).is_err());
    }
}
