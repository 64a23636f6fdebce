//! Spectrum homology by stabilization along the tower `U(BⁿX)`.
//!
//! Degree `i` of the answer is `H̃_{i+n}(U(BⁿX))` once two consecutive levels
//! agree with `n > i`. For special inputs `i < n` is also the range where the
//! level is known to be stable; for other inputs the tower is only a
//! pre-spectrum and the agreement is recorded as evidence, not a claim.

mod checks;
mod level;

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::chains::{HomologyGroup, HomologyTable, Ring, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::segal::{bar_map, is_special, map_at, underlying, Gamma, SharedGammaMap, SpecialMode, SpecialVerdict, Tower};
use crate::simplicial::SharedMap;

pub use checks::{
    check_rho_iso, check_smash_vanishing, check_special, check_square, check_stable_range, check_wedge_iso, Assertion,
    CheckReport, Status,
};
pub use level::{connectivity, induced_iso, IsoCheck, LevelComplex};

/// Knobs shared by every computation in a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableConfig {
    pub ring: Ring,
    pub max_degree: usize,
    /// Highest tower level `n` that may be built.
    pub max_iterations: usize,
    /// Cells allowed at any single multi-index.
    pub cell_budget: u64,
}

impl Default for StableConfig {
    fn default() -> Self {
        StableConfig {
            ring: Ring::Integers,
            max_degree: 3,
            max_iterations: 6,
            cell_budget: 1 << 26,
        }
    }
}

/// Which entry point produced a result. The two share one pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultKind {
    Spectrum,
    Gamma,
}

/// The value of one degree at one tower level.
#[derive(Clone, Debug, Serialize)]
pub struct LevelValue {
    pub n: usize,
    pub value: String,
    #[serde(skip)]
    pub group: HomologyGroup,
}

/// How a degree of the table was obtained.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeEvidence {
    pub degree: usize,
    pub settled: bool,
    /// Level at which the value was accepted.
    pub n: Option<usize>,
    /// The value at level `n − 1`, when the tower was used.
    pub previous: Option<String>,
    pub value: Option<String>,
    /// The range statement that covers this degree.
    pub bound: Option<String>,
    /// Set when no theorem covers the value and only agreement was observed.
    pub empirical_only: bool,
    /// Every value computed for this degree, by level.
    pub history: Vec<LevelValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableResult {
    pub schema_version: u32,
    pub space: String,
    pub ring: Ring,
    pub kind: ResultKind,
    pub table: HomologyTable,
    pub evidence: Vec<DegreeEvidence>,
    pub special: SpecialVerdict,
    /// Set when specialness could not be certified, so the tower is only a pre-spectrum.
    pub prespectrum: bool,
    /// Homological connectivity of `U(X)` over ℤ, used as a proxy.
    pub connectivity: Option<i64>,
    pub max_iterations: usize,
    pub cell_budget: u64,
    /// Highest level actually built.
    pub levels_computed: Option<usize>,
    /// Degrees above this one are unsettled; `None` when all are settled.
    pub unstable_above: Option<i64>,
    pub budget_exceeded: Option<String>,
    /// Settled values that a later level contradicted.
    pub monotonicity_violations: Vec<String>,
}

impl StableResult {
    pub fn is_complete(&self) -> bool {
        self.unstable_above.is_none()
    }

    /// The settled value in degree `d`.
    pub fn group(&self, d: usize) -> Option<&HomologyGroup> {
        self.table.get(d)
    }

    /// Level at which degree `d` was settled.
    pub fn settled_at(&self, d: usize) -> Option<usize> {
        self.evidence.get(d).filter(|e| e.settled).and_then(|e| e.n)
    }

    /// The value of degree `d` at level `n`, if it was computed.
    pub fn value_at(&self, d: usize, n: usize) -> Option<&HomologyGroup> {
        self.evidence.get(d)?.history.iter().find(|v| v.n == n).map(|v| &v.group)
    }
}

/// Shared caches for one configuration: towers, level complexes and results.
pub struct Session {
    config: StableConfig,
    towers: Mutex<HashMap<String, Arc<Tower>>>,
    levels: Mutex<HashMap<(String, usize), Arc<LevelComplex>>>,
    results: Mutex<HashMap<(String, usize), StableResult>>,
}

impl Session {
    pub fn new(config: StableConfig) -> Self {
        Session {
            config,
            towers: Mutex::new(HashMap::new()),
            levels: Mutex::new(HashMap::new()),
            results: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &StableConfig {
        &self.config
    }

    pub fn ring(&self) -> Ring {
        self.config.ring
    }

    pub fn tower(&self, x: &Gamma) -> Arc<Tower> {
        self.towers
            .lock()
            .entry(x.describe())
            .or_insert_with(|| Arc::new(Tower::new(x.clone())))
            .clone()
    }

    /// Chains of `U(BⁿX)` over the session ring.
    pub fn level(&self, x: &Gamma, n: usize) -> Arc<LevelComplex> {
        let key = (x.describe(), n);
        if let Some(l) = self.levels.lock().get(&key) {
            return l.clone();
        }
        let object = self.tower(x).level(n).object;
        let l = Arc::new(LevelComplex::new(object, self.config.ring, self.config.cell_budget));
        self.levels.lock().entry(key).or_insert(l).clone()
    }

    /// `Bⁿ(η)` at `[1]₊`, mapping `U(BⁿX) → U(BⁿY)`.
    pub fn level_map(&self, eta: &SharedGammaMap, n: usize) -> SharedMap {
        let mut m = eta.clone();
        for _ in 0..n {
            m = bar_map(m);
        }
        map_at(&m, 1)
    }

    /// Specialness, tried levelwise first and then on homology.
    pub fn certify(&self, x: &Gamma) -> SpecialVerdict {
        let budget = self.config.cell_budget;
        let bij = SpecialMode::Bijection { depth: 2 };
        let hom = SpecialMode::Homology {
            depth: 2,
            ring: self.config.ring,
        };
        let uncertified = |mode, bound, e: Error| SpecialVerdict {
            special: false,
            mode,
            bound,
            failure: Some(format!("not certified: {e}")),
        };
        let first = match is_special(x, bij, 3, budget) {
            Ok(v) if v.special => return v,
            Ok(v) => v,
            Err(e) => uncertified(bij, 3, e),
        };
        match is_special(x, hom, 2, budget) {
            Ok(v) if v.special => v,
            Ok(_) | Err(_) => first,
        }
    }

    pub fn spectrum_homology(&self, x: &Gamma) -> Result<StableResult> {
        self.run(x, ResultKind::Spectrum, 0)
    }

    pub fn gamma_homology(&self, x: &Gamma) -> Result<StableResult> {
        self.run(x, ResultKind::Gamma, 0)
    }

    /// Runs the tower until every degree has settled and at least level
    /// `through` is built, so agreement can be observed beyond the first pair.
    pub fn run(&self, x: &Gamma, kind: ResultKind, through: usize) -> Result<StableResult> {
        let key = (x.describe(), through);
        if let Some(r) = self.results.lock().get(&key) {
            let mut r = r.clone();
            r.kind = kind;
            return Ok(r);
        }
        let r = self.compute(x, kind, through)?;
        self.results.lock().insert(key, r.clone());
        Ok(r)
    }

    fn compute(&self, x: &Gamma, kind: ResultKind, through: usize) -> Result<StableResult> {
        let cfg = &self.config;
        let top = cfg.max_degree;
        let special = self.certify(x);
        let prespectrum = !special.special;
        let mut evidence: Vec<DegreeEvidence> = (0..=top)
            .map(|degree| DegreeEvidence {
                degree,
                settled: false,
                n: None,
                previous: None,
                value: None,
                bound: None,
                empirical_only: prespectrum,
                history: vec![],
            })
            .collect();
        let mut settled: Vec<Option<HomologyGroup>> = vec![None; top + 1];
        let mut budget_exceeded = None;
        let mut violations = vec![];
        let mut levels_computed = None;

        // below twice the connectivity of U(X), H̃(U X) already is the answer
        let conn = match connectivity(underlying(x), top, cfg.cell_budget) {
            Ok(c) => Some(c),
            Err(e) if e.is_budget() => None,
            Err(e) => return Err(e),
        };
        if let (true, Some(c)) = (special.special, conn) {
            if c >= 1 {
                let l0 = self.level(x, 0);
                for i in 0..(2 * c as usize).min(top + 1) {
                    let g = match l0.homology(i) {
                        Ok(g) => g,
                        Err(e) if e.is_budget() => break,
                        Err(e) => return Err(e),
                    };
                    let ev = &mut evidence[i];
                    let value = g.render(cfg.ring);
                    ev.history.push(LevelValue {
                        n: 0,
                        value: value.clone(),
                        group: g.clone(),
                    });
                    ev.settled = true;
                    ev.n = Some(0);
                    ev.value = Some(value);
                    ev.bound = Some(format!("i < 2c with c = {c}"));
                    settled[i] = Some(g);
                }
            }
        }

        'levels: for n in 0..=cfg.max_iterations {
            if (n > through || through == 0) && settled.iter().all(Option::is_some) {
                break;
            }
            let level = self.level(x, n);
            levels_computed = Some(n);
            for i in 0..=top.min(n) {
                let g = match level.homology(i + n) {
                    Ok(g) => g,
                    Err(e) if e.is_budget() => {
                        if settled[i..].iter().any(Option::is_none) {
                            budget_exceeded = Some(format!("level {n}, degree {}: {e}", i + n));
                            break 'levels;
                        }
                        // only rechecks remain at this level
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let ev = &mut evidence[i];
                let value = g.render(cfg.ring);
                if let Some(s) = &settled[i] {
                    if *s != g && ev.n.is_some_and(|m| m < n) {
                        violations.push(format!(
                            "degree {i}: settled as {} at n = {}, but level {n} gives {value}",
                            s.render(cfg.ring),
                            ev.n.unwrap_or(0)
                        ));
                    }
                } else if n > i {
                    if let Some(prev) = ev.history.iter().find(|v| v.n + 1 == n) {
                        if prev.group == g {
                            ev.settled = true;
                            ev.n = Some(n);
                            ev.previous = Some(prev.value.clone());
                            ev.value = Some(value.clone());
                            ev.bound = Some(if prespectrum {
                                "agreement of levels n - 1 and n with i < n".into()
                            } else {
                                "i < n".into()
                            });
                            settled[i] = Some(g.clone());
                        }
                    }
                }
                ev.history.push(LevelValue { n, value, group: g });
            }
        }

        let mut table = HomologyTable::new(cfg.ring);
        for s in &settled {
            table.push(s.clone());
        }
        let unstable_above = settled.iter().position(Option::is_none).map(|d| d as i64 - 1);
        Ok(StableResult {
            schema_version: SCHEMA_VERSION,
            space: x.describe(),
            ring: cfg.ring,
            kind,
            table,
            evidence,
            special,
            prespectrum,
            connectivity: conn,
            max_iterations: cfg.max_iterations,
            cell_budget: cfg.cell_budget,
            levels_computed,
            unstable_above,
            budget_exceeded,
            monotonicity_violations: violations,
        })
    }
}

/// Spectrum homology of `X` in degrees `0..=config.max_degree`.
pub fn spectrum_homology(x: &Gamma, config: &StableConfig) -> Result<StableResult> {
    Session::new(config.clone()).spectrum_homology(x)
}

/// Γ-homology of `X`, computed by the same tower as [`spectrum_homology`].
pub fn gamma_homology(x: &Gamma, config: &StableConfig) -> Result<StableResult> {
    Session::new(config.clone()).gamma_homology(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segal::{discrete_abelian, parse_space, point_gamma, sphere};

    fn config(ring: Ring, max_degree: usize) -> StableConfig {
        StableConfig {
            ring,
            max_degree,
            ..StableConfig::default()
        }
    }

    fn rendered(r: &StableResult) -> Vec<String> {
        (0..r.table.entries.len()).map(|d| r.table.render_entry(d)).collect()
    }

    #[test]
    fn sphere_spectrum() {
        let r = spectrum_homology(&sphere(), &config(Ring::Integers, 3)).unwrap();
        assert_eq!(rendered(&r), ["Z", "0", "0", "0"]);
        assert!(r.prespectrum);
        assert!(r.evidence.iter().all(|e| e.empirical_only && e.n.unwrap() <= 4));
        assert!(r.monotonicity_violations.is_empty());
    }

    #[test]
    fn t_of_circle() {
        let x = parse_space("t:circle").unwrap();
        let r = gamma_homology(&x, &config(Ring::Integers, 2)).unwrap();
        assert_eq!(rendered(&r), ["0", "Z", "0"]);
    }

    #[test]
    fn point_is_acyclic() {
        let r = gamma_homology(&point_gamma(0), &config(Ring::Integers, 3)).unwrap();
        assert_eq!(rendered(&r), ["0", "0", "0", "0"]);
        assert!(r.special.special);
    }

    #[test]
    fn eilenberg_maclane_integral() {
        let r = gamma_homology(&discrete_abelian(&[2]).unwrap(), &config(Ring::Integers, 1)).unwrap();
        assert_eq!(rendered(&r), ["Z/2", "0"]);
        assert!(!r.prespectrum);
        assert_eq!(r.evidence[0].bound.as_deref(), Some("i < n"));
    }

    #[test]
    fn eilenberg_maclane_mod_two_low_degrees() {
        let r = spectrum_homology(&discrete_abelian(&[2]).unwrap(), &config(Ring::PrimeField(2), 2)).unwrap();
        assert_eq!(r.table.ranks(), [Some(1), Some(1), Some(1)]);
        for e in &r.evidence {
            assert!(e.n.unwrap() > e.degree);
        }
    }

    #[test]
    fn both_entry_points_agree() {
        let x = discrete_abelian(&[3]).unwrap();
        let s = Session::new(config(Ring::PrimeField(3), 1));
        let a = s.spectrum_homology(&x).unwrap();
        let b = s.gamma_homology(&x).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(b.kind, ResultKind::Gamma);
    }

    #[test]
    fn budget_exhaustion_is_partial() {
        let cfg = StableConfig {
            ring: Ring::PrimeField(2),
            max_degree: 3,
            max_iterations: 6,
            cell_budget: 1 << 8,
        };
        let r = spectrum_homology(&discrete_abelian(&[2]).unwrap(), &cfg).unwrap();
        assert!(r.budget_exceeded.is_some());
        let d = r.unstable_above.unwrap();
        assert!(d < 3);
        assert_eq!(r.table.render_entry(3), "?");
    }

    #[test]
    fn connectivity_accelerator() {
        // B(B(ab:2)) is special with U = K(Z/2, 2), which is 1-connected
        let x = parse_space("B(B(ab:2))").unwrap();
        let r = gamma_homology(&x, &config(Ring::PrimeField(2), 1)).unwrap();
        assert_eq!(r.connectivity, Some(1));
        assert!(r.special.special);
        assert_eq!(r.evidence[0].bound.as_deref(), Some("i < 2c with c = 1"));
        assert_eq!(r.table.ranks(), [Some(0), Some(0)]);
    }
}
