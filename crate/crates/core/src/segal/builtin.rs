//! Built-in Γ-space families.

use std::sync::Arc;

use super::{check_level, Gamma, GammaSpace};
use crate::error::{Error, Result};
use crate::gamma::{smash_index, smash_split, PointedMap};
use crate::simplicial::{constant, Circle, MultiIndex, SharedSS, SimplicialOp};

/// `[n]₊ ↦ Aⁿ` for a finite abelian group `A = ℤ/a₁ × ⋯ × ℤ/a_r`, as a
/// discrete object. A tuple `(g_1, …, g_n)` is the base-`|A|` number whose
/// digit `i − 1` is `g_i`; the zero tuple is the basepoint.
pub struct DiscreteAbelian {
    factors: Vec<u32>,
    order: u64,
    /// Set when `A` is elementary abelian of exponent 2: addition is XOR on
    /// `bits`-wide digits.
    bits: Option<u32>,
}

impl DiscreteAbelian {
    pub fn new(factors: &[u32]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Validation("an abelian group needs at least one factor".into()));
        }
        if let Some(bad) = factors.iter().find(|&&a| a < 2) {
            return Err(Error::Validation(format!("invariant factor {bad} must be at least 2")));
        }
        let order = factors
            .iter()
            .try_fold(1u64, |acc, &a| acc.checked_mul(a as u64))
            .filter(|&o| o <= u32::MAX as u64)
            .ok_or_else(|| Error::Validation("group order too large".into()))?;
        let bits = factors.iter().all(|&a| a == 2).then_some(factors.len() as u32);
        Ok(DiscreteAbelian {
            factors: factors.to_vec(),
            order,
            bits,
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    fn add(&self, mut g: u64, mut h: u64) -> u64 {
        let mut out = 0;
        let mut scale = 1;
        for &a in &self.factors {
            let a = a as u64;
            out += ((g % a + h % a) % a) * scale;
            g /= a;
            h /= a;
            scale *= a;
        }
        out
    }
}

/// Below this many cells the per-digit loop beats building byte tables.
const LUT_MIN_CELLS: usize = 256;

/// The XOR path of [`DiscreteAbelian::act`] for long runs of cells. The map on
/// labels is F₂-linear, so it is tabulated once per input byte.
fn xor_act_by_bytes(table: &[u32], b: u32, n: u32, cells: &mut [u32]) {
    let width = (b * n) as usize;
    let image = |bit: usize| -> u64 {
        let t = table[bit / b as usize + 1];
        if t == 0 {
            0
        } else {
            1u64 << (b as usize * (t as usize - 1) + bit % b as usize)
        }
    };
    let luts: Vec<[u32; 256]> = (0..width.div_ceil(8))
        .map(|byte| {
            let mut lut = [0u32; 256];
            for v in 1..256usize {
                let low = v.trailing_zeros() as usize;
                let bit = byte * 8 + low;
                let single = if bit < width { image(bit) as u32 } else { 0 };
                lut[v] = lut[v & (v - 1)] ^ single;
            }
            lut
        })
        .collect();
    for c in cells.iter_mut() {
        let mut x = *c;
        let mut out = 0u32;
        for lut in &luts {
            out ^= lut[(x & 0xff) as usize];
            x >>= 8;
        }
        *c = out;
    }
}

impl GammaSpace for DiscreteAbelian {
    fn directions(&self) -> usize {
        0
    }

    fn count(&self, n: u32, _q: &[usize]) -> Result<u64> {
        self.order
            .checked_pow(n)
            .map(|c| c - 1)
            .ok_or_else(|| Error::Budget {
                index: MultiIndex(vec![]),
                cells: (self.order as u128).saturating_pow(n),
                budget: u64::MAX,
            })
    }

    fn structure(&self, _n: u32, q: &[usize], op: SimplicialOp, _cells: &mut [u32]) -> Result<()> {
        check_level(self, q)?;
        Err(Error::Validation(format!("{op:?} on a 0-direction object")))
    }

    fn act(&self, f: &PointedMap, _q: &[usize], cells: &mut [u32]) -> Result<()> {
        let n = f.source().size();
        let table = f.table();
        if let Some(b) = self.bits {
            if cells.len() >= LUT_MIN_CELLS {
                xor_act_by_bytes(table, b, n, cells);
                return Ok(());
            }
            let mask = (1u64 << b) - 1;
            for c in cells.iter_mut() {
                let mut x = *c as u64;
                let mut out = 0u64;
                let mut i = 1usize;
                while x != 0 {
                    let g = x & mask;
                    let t = table[i];
                    if g != 0 && t != 0 {
                        out ^= g << (b * (t - 1));
                    }
                    x >>= b;
                    i += 1;
                }
                *c = out as u32;
            }
            return Ok(());
        }
        let order = self.order;
        let m = f.target().size();
        let mut out = vec![0u64; m as usize + 1];
        for c in cells.iter_mut() {
            out.iter_mut().for_each(|v| *v = 0);
            let mut x = *c as u64;
            for i in 1..=n as usize {
                let g = x % order;
                x /= order;
                let t = table[i] as usize;
                if g != 0 && t != 0 {
                    out[t] = self.add(out[t], g);
                }
            }
            let mut label = 0u64;
            for j in (1..=m as usize).rev() {
                label = label * order + out[j];
            }
            *c = label as u32;
        }
        Ok(())
    }

    fn describe(&self) -> String {
        let f: Vec<String> = self.factors.iter().map(|a| a.to_string()).collect();
        format!("ab:{}", f.join(","))
    }

    fn is_discrete(&self) -> bool {
        true
    }
}

pub fn discrete_abelian(factors: &[u32]) -> Result<Gamma> {
    Ok(Arc::new(DiscreteAbelian::new(factors)?))
}

/// `T(Y) : [n]₊ ↦ Y ∧ [n]₊`. The pair `(y, s)` is labelled `smash_index(y, s, n)`.
pub struct TOf {
    y: SharedSS,
    name: String,
}

impl GammaSpace for TOf {
    fn directions(&self) -> usize {
        self.y.directions()
    }

    fn count(&self, n: u32, q: &[usize]) -> Result<u64> {
        check_level(self, q)?;
        Ok(self.y.count(q)? * n as u64)
    }

    fn structure(&self, n: u32, q: &[usize], op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let (mut ys, ss): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| if c == 0 { (0, 0) } else { smash_split(c, n) }).unzip();
        self.y.apply(q, op, &mut ys)?;
        for (c, (y, s)) in cells.iter_mut().zip(ys.into_iter().zip(ss)) {
            *c = smash_index(y, s, n);
        }
        Ok(())
    }

    fn act(&self, f: &PointedMap, _q: &[usize], cells: &mut [u32]) -> Result<()> {
        let (n, m) = (f.source().size(), f.target().size());
        for c in cells.iter_mut() {
            if *c != 0 {
                let (y, s) = smash_split(*c, n);
                *c = smash_index(y, f.apply(s), m);
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        self.name.clone()
    }

    fn is_discrete(&self) -> bool {
        self.y.directions() == 0
    }
}

/// `T(Y)`, described by `name`.
pub fn t_of(y: SharedSS, name: &str) -> Gamma {
    Arc::new(TOf {
        y,
        name: name.to_string(),
    })
}

/// The sphere Γ-space `T(S⁰)`.
pub fn sphere() -> Gamma {
    t_of(constant(0, 1), "sphere")
}

/// `T(S)` for the simplicial circle.
pub fn circle_gamma() -> Gamma {
    t_of(Arc::new(Circle), "t:circle")
}

/// The constant Γ-space at the point.
pub struct PointGamma {
    directions: usize,
}

impl GammaSpace for PointGamma {
    fn directions(&self) -> usize {
        self.directions
    }

    fn count(&self, _n: u32, _q: &[usize]) -> Result<u64> {
        Ok(0)
    }

    fn structure(&self, _n: u32, _q: &[usize], _op: SimplicialOp, cells: &mut [u32]) -> Result<()> {
        cells.iter_mut().for_each(|c| *c = 0);
        Ok(())
    }

    fn act(&self, _f: &PointedMap, _q: &[usize], cells: &mut [u32]) -> Result<()> {
        cells.iter_mut().for_each(|c| *c = 0);
        Ok(())
    }

    fn describe(&self) -> String {
        if self.directions == 0 {
            "point".into()
        } else {
            format!("point{}", self.directions)
        }
    }

    fn is_discrete(&self) -> bool {
        self.directions == 0
    }
}

pub fn point_gamma(directions: usize) -> Gamma {
    Arc::new(PointGamma { directions })
}

/// Cell-by-cell equality of counts and structure maps up to `max_degree`.
#[cfg(test)]
pub(crate) fn same_object(a: &dyn crate::simplicial::MSSet
    , b: &dyn crate::simplicial::MSSet, max_degree: usize) -> bool {
    use crate::simplicial::{multi_indices, operators_at};
    if a.directions() != b.directions() {
        return false;
    }
    for d in 0..=max_degree {
        for q in multi_indices(a.directions(), d) {
            let (na, nb) = (a.count(q.levels()).unwrap(), b.count(q.levels()).unwrap());
            if na != nb {
                return false;
            }
            let cells: Vec<u32> = (0..=na as u32).collect();
            for op in operators_at(q.levels()) {
                let (mut x, mut y) = (cells.clone(), cells.clone());
                a.apply(q.levels(), op, &mut x).unwrap();
                b.apply(q.levels(), op, &mut y).unwrap();
                if x != y {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segal::{eval, underlying};

    fn act_all(x: &Gamma, f: &PointedMap) -> Vec<u32> {
        let n = x.count(f.source().size(), &vec![0; x.directions()]).unwrap() as u32;
        let mut cells: Vec<u32> = (0..=n).collect();
        x.act(f, &vec![0; x.directions()], &mut cells).unwrap();
        cells
    }

    #[test]
    fn sphere_is_the_identity_functor() {
        let s = sphere();
        for n in 0..5 {
            assert_eq!(s.count(n, &[]).unwrap(), n as u64);
        }
        let f = PointedMap::new(3, 2, vec![0, 2, 0, 1]).unwrap();
        assert_eq!(act_all(&s, &f), vec![0, 2, 0, 1]);
    }

    #[test]
    fn elementary_group_counts() {
        let a = discrete_abelian(&[2]).unwrap();
        assert_eq!(a.count(3, &[]).unwrap() + 1, 8);
        assert_eq!(a.count(0, &[]).unwrap(), 0);
        let b = discrete_abelian(&[2, 4]).unwrap();
        assert_eq!(b.count(2, &[]).unwrap() + 1, 64);
        assert!(discrete_abelian(&[1]).is_err());
        assert!(discrete_abelian(&[]).is_err());
    }

    #[test]
    fn fold_map_adds() {
        let fold = PointedMap::new(2, 1, vec![0, 1, 1]).unwrap();
        // (a, b) = a + 2b over ℤ/2
        let a = discrete_abelian(&[2]).unwrap();
        assert_eq!(act_all(&a, &fold), vec![0, 1, 1, 0]);
        // ℤ/3: (a, b) = a + 3b ↦ a + b mod 3
        let z3 = discrete_abelian(&[3]).unwrap();
        let sums: Vec<u32> = (0..9).map(|c| (c % 3 + c / 3) % 3).collect();
        assert_eq!(act_all(&z3, &fold), sums);
    }

    #[test]
    fn byte_tables_match_digit_loop() {
        let mut slow = DiscreteAbelian::new(&[2, 2]).unwrap();
        slow.bits = None;
        // 10 source digits of width 2 straddle byte boundaries
        let f = PointedMap::new(10, 4, vec![0, 1, 4, 0, 2, 2, 3, 1, 0, 4, 3]).unwrap();
        let n = slow.count(10, &[]).unwrap() as u32;
        let mut a: Vec<u32> = (0..=n).collect();
        let mut b = a.clone();
        xor_act_by_bytes(f.table(), 2, 10, &mut a);
        slow.act(&f, &[], &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fast_and_general_paths_agree() {
        // ℤ/2 × ℤ/2 uses XOR; the same group through the general path must match
        let fast = DiscreteAbelian::new(&[2, 2]).unwrap();
        let mut slow = DiscreteAbelian::new(&[2, 2]).unwrap();
        slow.bits = None;
        let maps = [
            PointedMap::new(3, 2, vec![0, 1, 2, 1]).unwrap(),
            PointedMap::new(3, 3, vec![0, 3, 0, 1]).unwrap(),
            PointedMap::new(2, 3, vec![0, 2, 2]).unwrap(),
        ];
        for f in &maps {
            let n = fast.count(f.source().size(), &[]).unwrap() as u32;
            let mut a: Vec<u32> = (0..=n).collect();
            let mut b = a.clone();
            fast.act(f, &[], &mut a).unwrap();
            slow.act(f, &[], &mut b).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mixed_factors_add_componentwise() {
        let g = DiscreteAbelian::new(&[2, 4]).unwrap();
        // element index = x + 2y for x ∈ ℤ/2, y ∈ ℤ/4
        assert_eq!(g.add(1 + 2 * 3, 1 + 2 * 2), 2);
        assert_eq!(g.add(2 * 3, 0), 6);
    }

    #[test]
    fn underlying_objects() {
        let y: SharedSS = Arc::new(Circle);
        let t = t_of(y.clone(), "t:circle");
        assert!(same_object(&*underlying(&t), &*y, 4));
        let a = discrete_abelian(&[2, 4]).unwrap();
        assert_eq!(underlying(&a).count(&[]).unwrap(), 7);
        assert_eq!(underlying(&point_gamma(0)).count(&[]).unwrap(), 0);
        assert_eq!(eval(&t, 0).count(&[3]).unwrap(), 0);
    }
}
