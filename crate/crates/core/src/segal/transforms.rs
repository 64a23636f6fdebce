//! Natural transformations between Γ-spaces: `τ`, `ρ`, and their images
//! under `B`, `Σ`, `T∘U` and `μₖ*`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{bar, eval, mu_pullback, sigma, t_of, underlying, wedge_gamma, Gamma, GammaSpace};
use crate::error::{Error, Result};
use crate::gamma::{smash, smash_index, smash_split, standard_inclusion, wedge_inclusions, PointedMap};
use crate::simplicial::{multi_indices, MSMap, MultiIndex, SharedMap, SharedSS};

/// A natural transformation `η : X → Y`, applied componentwise to labels.
pub trait GammaMap: Send + Sync {
    fn source(&self) -> Gamma;
    fn target(&self) -> Gamma;

    /// `η` at `[n]₊`, level `q`, in place.
    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()>;

    fn describe(&self) -> String;
}

pub type SharedGammaMap = Arc<dyn GammaMap>;

fn small(c: u64, q: &[usize]) -> Result<u32> {
    u32::try_from(c).map_err(|_| Error::Budget {
        index: MultiIndex(q.to_vec()),
        cells: c as u128,
        budget: u32::MAX as u64,
    })
}

/// Splits nonzero labels into `(key, value)`, applies `f(key)` to all values
/// sharing a key, and writes back `join(key, value)`.
fn grouped(
    cells: &mut [u32],
    split: impl Fn(u32) -> (u32, u32),
    mut f: impl FnMut(u32, &mut [u32]) -> Result<()>,
    join: impl Fn(u32, u32) -> u32,
) -> Result<()> {
    let mut groups: BTreeMap<u32, (Vec<usize>, Vec<u32>)> = BTreeMap::new();
    for (k, &c) in cells.iter().enumerate() {
        if c != 0 {
            let (key, v) = split(c);
            let e = groups.entry(key).or_default();
            e.0.push(k);
            e.1.push(v);
        }
    }
    for (key, (pos, mut vs)) in groups {
        f(key, &mut vs)?;
        for (k, v) in pos.into_iter().zip(vs) {
            cells[k] = join(key, v);
        }
    }
    Ok(())
}

/// `τ_X : T(U(X)) → X`, the wedge over `s` of `X(i_s)`.
struct Tau {
    x: Gamma,
    source: Gamma,
}

impl GammaMap for Tau {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.x.clone()
    }

    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        if n == 0 {
            cells.fill(0);
            return Ok(());
        }
        grouped(
            cells,
            |c| {
                let (y, s) = smash_split(c, n);
                (s, y)
            },
            |s, ys| self.x.act(&standard_inclusion(s, n)?, q, ys),
            |_, v| v,
        )
    }

    fn describe(&self) -> String {
        format!("tau[{}]", self.x.describe())
    }
}

/// `T(U(X))` with its canonical description.
fn tu(x: &Gamma) -> Gamma {
    t_of(underlying(x), &format!("T(U({}))", x.describe()))
}

pub fn tau(x: Gamma) -> SharedGammaMap {
    Arc::new(Tau { source: tu(&x), x })
}

/// `ρ_X : Σ(X) → B(X)`: `(s, x) ↦ X(i_s ∧ id)(x)` at leading level `q₀`.
struct Rho {
    x: Gamma,
    source: Gamma,
    target: Gamma,
}

impl GammaMap for Rho {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.target.clone()
    }

    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        let m = small(self.x.count(n, &q[1..])?, q)?;
        if m == 0 {
            cells.fill(0);
            return Ok(());
        }
        let q0 = q[0] as u32;
        let id = PointedMap::identity(n);
        grouped(
            cells,
            |c| smash_split(c, m),
            |s, xs| self.x.act(&smash(&standard_inclusion(s, q0)?, &id)?, &q[1..], xs),
            |_, v| v,
        )
    }

    fn describe(&self) -> String {
        format!("rho[{}]", self.x.describe())
    }
}

pub fn rho(x: Gamma) -> SharedGammaMap {
    Arc::new(Rho {
        source: sigma(x.clone()),
        target: bar(x.clone()),
        x,
    })
}

/// `B(η)`: `η` at `[q₀]₊ ∧ [n]₊`.
struct BarMap {
    eta: SharedGammaMap,
    source: Gamma,
    target: Gamma,
}

impl GammaMap for BarMap {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.target.clone()
    }

    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        let big = small(q[0] as u64 * n as u64, q)?;
        self.eta.apply(big, &q[1..], cells)
    }

    fn describe(&self) -> String {
        format!("B({})", self.eta.describe())
    }
}

pub fn bar_map(eta: SharedGammaMap) -> SharedGammaMap {
    Arc::new(BarMap {
        source: bar(eta.source()),
        target: bar(eta.target()),
        eta,
    })
}

/// `Σ(η) = id_S ∧ η`.
struct SigmaMap {
    eta: SharedGammaMap,
    source: Gamma,
    target: Gamma,
}

impl GammaMap for SigmaMap {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.target.clone()
    }

    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        let rest = &q[1..];
        let m = small(self.eta.source().count(n, rest)?, q)?;
        let m_t = small(self.eta.target().count(n, rest)?, q)?;
        if m == 0 {
            cells.fill(0);
            return Ok(());
        }
        grouped(
            cells,
            |c| smash_split(c, m),
            |_, xs| self.eta.apply(n, rest, xs),
            |s, x| smash_index(s, x, m_t),
        )
    }

    fn describe(&self) -> String {
        format!("sigma({})", self.eta.describe())
    }
}

pub fn sigma_map(eta: SharedGammaMap) -> SharedGammaMap {
    Arc::new(SigmaMap {
        source: sigma(eta.source()),
        target: sigma(eta.target()),
        eta,
    })
}

/// `T(U(η))`: `η` at `[1]₊` on the first factor of `(y, s)`.
struct TUMap {
    eta: SharedGammaMap,
    source: Gamma,
    target: Gamma,
}

impl GammaMap for TUMap {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.target.clone()
    }

    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        if n == 0 {
            cells.fill(0);
            return Ok(());
        }
        let (mut ys, ss): (Vec<u32>, Vec<u32>) =
            cells.iter().map(|&c| if c == 0 { (0, 0) } else { smash_split(c, n) }).unzip();
        self.eta.apply(1, q, &mut ys)?;
        for (c, (y, s)) in cells.iter_mut().zip(ys.into_iter().zip(ss)) {
            *c = smash_index(y, s, n);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("T(U({}))", self.eta.describe())
    }
}

pub fn tu_map(eta: SharedGammaMap) -> SharedGammaMap {
    Arc::new(TUMap {
        source: tu(&eta.source()),
        target: tu(&eta.target()),
        eta,
    })
}

/// `μₖ*(η)`: `η` at `[k]₊ ∧ [n]₊`.
struct MuMap {
    k: u32,
    eta: SharedGammaMap,
    source: Gamma,
    target: Gamma,
}

impl GammaMap for MuMap {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.target.clone()
    }

    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        self.eta.apply(small(self.k as u64 * n as u64, q)?, q, cells)
    }

    fn describe(&self) -> String {
        format!("mu({})*{}", self.k, self.eta.describe())
    }
}

pub fn mu_map(k: u32, eta: SharedGammaMap) -> SharedGammaMap {
    Arc::new(MuMap {
        k,
        source: mu_pullback(k, eta.source()),
        target: mu_pullback(k, eta.target()),
        eta,
    })
}

/// `ι ∨ ι′ : μₙ*X ∨ μₙ′*X → μₙ₊ₙ′*X`.
struct WedgeInclusion {
    x: Gamma,
    n1: u32,
    n2: u32,
    source: Gamma,
    target: Gamma,
}

impl GammaMap for WedgeInclusion {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.target.clone()
    }

    fn apply(&self, m: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        let a = small(self.x.count(small(self.n1 as u64 * m as u64, q)?, q)?, q)?;
        let (i1, i2) = wedge_inclusions(self.n1, self.n2);
        let id = PointedMap::identity(m);
        let (left, right): (Vec<usize>, Vec<usize>) = (0..cells.len()).partition(|&k| cells[k] <= a);
        let mut xs: Vec<u32> = left.iter().map(|&k| cells[k]).collect();
        let mut ys: Vec<u32> = right.iter().map(|&k| cells[k] - a).collect();
        self.x.act(&smash(&i1, &id)?, q, &mut xs)?;
        self.x.act(&smash(&i2, &id)?, q, &mut ys)?;
        for (&k, v) in left.iter().zip(xs).chain(right.iter().zip(ys)) {
            cells[k] = v;
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("wedge-inclusion[{},{}]({})", self.n1, self.n2, self.x.describe())
    }
}

pub fn wedge_inclusion(x: Gamma, n1: u32, n2: u32) -> Result<SharedGammaMap> {
    let source = wedge_gamma(mu_pullback(n1, x.clone()), mu_pullback(n2, x.clone()))?;
    Ok(Arc::new(WedgeInclusion {
        target: mu_pullback(n1 + n2, x.clone()),
        source,
        x,
        n1,
        n2,
    }))
}

/// The identification `Σ(T(U(X))) = T(U(Σ(X)))`. Both sides label the
/// triple `(s, y, t)` by `((s − 1)|Y| + y − 1)·n + t`, so the map is the
/// identity on labels.
struct Identify {
    source: Gamma,
    target: Gamma,
}

impl GammaMap for Identify {
    fn source(&self) -> Gamma {
        self.source.clone()
    }

    fn target(&self) -> Gamma {
        self.target.clone()
    }

    fn apply(&self, _n: u32, _q: &[usize], _cells: &mut [u32]) -> Result<()> {
        Ok(())
    }

    fn describe(&self) -> String {
        "identify".into()
    }
}

pub fn identify(x: Gamma) -> SharedGammaMap {
    Arc::new(Identify {
        source: sigma(tu(&x)),
        target: tu(&sigma(x)),
    })
}

struct Identity {
    x: Gamma,
}

impl GammaMap for Identity {
    fn source(&self) -> Gamma {
        self.x.clone()
    }

    fn target(&self) -> Gamma {
        self.x.clone()
    }

    fn apply(&self, _n: u32, _q: &[usize], _cells: &mut [u32]) -> Result<()> {
        Ok(())
    }

    fn describe(&self) -> String {
        "id".into()
    }
}

pub fn identity_gamma_map(x: Gamma) -> SharedGammaMap {
    Arc::new(Identity { x })
}

/// `g ∘ f`.
struct Composed {
    f: SharedGammaMap,
    g: SharedGammaMap,
}

impl GammaMap for Composed {
    fn source(&self) -> Gamma {
        self.f.source()
    }

    fn target(&self) -> Gamma {
        self.g.target()
    }

    fn apply(&self, n: u32, q: &[usize], cells: &mut [u32]) -> Result<()> {
        self.f.apply(n, q, cells)?;
        self.g.apply(n, q, cells)
    }

    fn describe(&self) -> String {
        format!("({}) . ({})", self.g.describe(), self.f.describe())
    }
}

/// `g ∘ f`; the target of `f` and the source of `g` must have the same description.
pub fn compose_gamma_maps(f: SharedGammaMap, g: SharedGammaMap) -> Result<SharedGammaMap> {
    let (a, b) = (f.target().describe(), g.source().describe());
    if a != b {
        return Err(Error::Composition(format!("{a} does not match {b}")));
    }
    Ok(Arc::new(Composed { f, g }))
}

/// `η` at `[n]₊` as a map of multisimplicial sets.
struct MapAt {
    eta: SharedGammaMap,
    n: u32,
    source: SharedSS,
    target: SharedSS,
}

impl MSMap for MapAt {
    fn source(&self) -> SharedSS {
        self.source.clone()
    }

    fn target(&self) -> SharedSS {
        self.target.clone()
    }

    fn apply(&self, q: &[usize], cells: &mut [u32]) -> Result<()> {
        self.eta.apply(self.n, q, cells)
    }

    fn describe(&self) -> String {
        format!("{}@[{}]+", self.eta.describe(), self.n)
    }
}

pub fn map_at(eta: &SharedGammaMap, n: u32) -> SharedMap {
    Arc::new(MapAt {
        eta: eta.clone(),
        n,
        source: eval(&eta.source(), n),
        target: eval(&eta.target(), n),
    })
}

/// Every pointed map `[a]₊ → [b]₊`.
pub(crate) fn all_maps(a: u32, b: u32) -> Vec<PointedMap> {
    let total = (b as usize + 1).pow(a);
    (0..total)
        .map(|mut code| {
            let mut table = vec![0u32];
            for _ in 0..a {
                table.push((code % (b as usize + 1)) as u32);
                code /= b as usize + 1;
            }
            PointedMap::new(a, b, table).expect("valid table")
        })
        .collect()
}

/// Levels of total degree `≤ max_degree` with at most `limit` cells.
pub(crate) fn small_levels(x: &dyn GammaSpace, n: u32, max_degree: usize, limit: u64) -> Result<Vec<MultiIndex>> {
    let mut out = vec![];
    for d in 0..=max_degree {
        for q in multi_indices(x.directions(), d) {
            if x.count(n, q.levels())? <= limit {
                out.push(q);
            }
        }
    }
    Ok(out)
}

const CHECK_CELLS: u64 = 1 << 12;

/// Checks `Y(f) ∘ η_a = η_b ∘ X(f)` for every `f : [a]₊ → [b]₊` with
/// `a, b ≤ max_n`, and that each component commutes with the structure maps.
pub fn check_naturality(eta: &SharedGammaMap, max_n: u32, max_degree: usize) -> Result<()> {
    let (x, y) = (eta.source(), eta.target());
    if x.directions() != y.directions() {
        return Err(Error::DirectionMismatch {
            left: x.directions(),
            right: y.directions(),
        });
    }
    for n in 0..=max_n {
        crate::simplicial::check_map_bounded(&*map_at(eta, n), max_degree, CHECK_CELLS)
            .map_err(|e| Error::Integrity(format!("{} at [{n}]+: {e}", eta.describe())))?;
    }
    for a in 0..=max_n {
        for q in small_levels(&*x, a, max_degree, CHECK_CELLS)? {
            let q = q.levels();
            let count = x.count(a, q)? as u32;
            let cells: Vec<u32> = (0..=count).collect();
            let mut at_a = cells.clone();
            eta.apply(a, q, &mut at_a)?;
            for b in 0..=max_n {
                for f in all_maps(a, b) {
                    let mut lhs = at_a.clone();
                    y.act(&f, q, &mut lhs)?;
                    let mut rhs = cells.clone();
                    x.act(&f, q, &mut rhs)?;
                    eta.apply(b, q, &mut rhs)?;
                    if lhs != rhs {
                        return Err(Error::Integrity(format!(
                            "{} is not natural for {:?} at {}",
                            eta.describe(),
                            f.table(),
                            MultiIndex(q.to_vec())
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segal::{discrete_abelian, point_gamma, sphere};
    use crate::simplicial::{Circle, SharedSS};

    fn spaces() -> Vec<Gamma> {
        let a = discrete_abelian(&[2]).unwrap();
        vec![
            a.clone(),
            sphere(),
            point_gamma(0),
            t_of(Arc::new(Circle) as SharedSS, "t:circle"),
            bar(a.clone()),
            mu_pullback(2, a),
        ]
    }

    #[test]
    fn tau_and_rho_are_natural() {
        for x in spaces() {
            check_naturality(&tau(x.clone()), 3, 2).unwrap();
            check_naturality(&rho(x.clone()), 3, 2).unwrap();
            check_naturality(&bar_map(tau(x.clone())), 2, 2).unwrap();
            check_naturality(&sigma_map(tau(x.clone())), 2, 2).unwrap();
            check_naturality(&tu_map(rho(x.clone())), 2, 2).unwrap();
            check_naturality(&mu_map(2, tau(x.clone())), 2, 2).unwrap();
        }
    }

    #[test]
    fn tau_low_objects() {
        let a = discrete_abelian(&[2]).unwrap();
        let t = tau(a.clone());
        // at [1]+: the identity
        let mut cells = vec![0, 1];
        t.apply(1, &[], &mut cells).unwrap();
        assert_eq!(cells, vec![0, 1]);
        // at [2]+: summand s lands on the s-th axis of A² (labels 1 and 2)
        let mut cells = vec![0, 1, 2];
        t.apply(2, &[], &mut cells).unwrap();
        assert_eq!(cells, vec![0, 1, 2]);
        let mut cells = vec![0];
        t.apply(0, &[], &mut cells).unwrap();
        assert_eq!(cells, vec![0]);
    }

    #[test]
    fn rho_at_level_one_is_the_identity() {
        let a = discrete_abelian(&[2]).unwrap();
        let r = rho(a);
        let mut cells = vec![0, 1];
        r.apply(1, &[1], &mut cells).unwrap();
        assert_eq!(cells, vec![0, 1]);
    }

    #[test]
    fn rho_of_t_is_a_levelwise_bijection() {
        let y: SharedSS = Arc::new(Circle);
        let r = rho(t_of(y, "t:circle"));
        for n in 1..=3u32 {
            for q0 in 1..=3usize {
                for q1 in 0..=2usize {
                    let c = r.source().count(n, &[q0, q1]).unwrap();
                    assert_eq!(c, r.target().count(n, &[q0, q1]).unwrap());
                    let mut cells: Vec<u32> = (0..=c as u32).collect();
                    r.apply(n, &[q0, q1], &mut cells).unwrap();
                    let mut sorted = cells.clone();
                    sorted.sort_unstable();
                    assert_eq!(sorted, (0..=c as u32).collect::<Vec<_>>());
                }
            }
        }
    }

    #[test]
    fn identify_is_literal() {
        for x in spaces() {
            let id = identify(x.clone());
            let (s, t) = (id.source(), id.target());
            for n in 0..=3 {
                assert!(crate::segal::builtin::same_object(&*eval(&s, n), &*eval(&t, n), 3));
            }
        }
    }

    #[test]
    fn composition_checks_endpoints() {
        let a = discrete_abelian(&[2]).unwrap();
        assert!(compose_gamma_maps(tau(a.clone()), rho(a.clone())).is_err());
        let ok = compose_gamma_maps(sigma_map(tau(a.clone())), rho(a.clone())).unwrap();
        assert_eq!(ok.source().describe(), "sigma(T(U(ab:2)))");
        assert_eq!(ok.target().describe(), "B(ab:2)");
    }

    #[test]
    fn wedge_inclusion_is_natural() {
        let a = discrete_abelian(&[2]).unwrap();
        for (n1, n2) in [(1, 1), (1, 2), (2, 0)] {
            let w = wedge_inclusion(a.clone(), n1, n2).unwrap();
            check_naturality(&w, 2, 0).unwrap();
        }
    }
}
