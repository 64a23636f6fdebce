//! Property suites over stabilized homology, reported assertion by assertion.

use serde::Serialize;

use super::level::{connectivity, induced_iso, IsoCheck};
use super::{ResultKind, Session, StableResult};
use crate::chains::{Ring, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::segal::{
    bar, compose_gamma_maps, identify, is_special, map_at, mu_pullback, rho, sigma, sigma_map, smash_gamma, tau, tu_map,
    wedge_inclusion, Gamma, SharedGammaMap, SpecialMode, SpecialVerdict,
};
use crate::simplicial::{count_u32, map_matrix, multi_indices, ChainBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Not decided because a cell budget or the iteration cap ran out.
    Budget,
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub degree: Option<usize>,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub check: String,
    pub space: String,
    pub ring: Ring,
    pub max_degree: usize,
    pub max_iterations: usize,
    pub cell_budget: u64,
    pub passed: bool,
    pub budget_exceeded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub special: Option<SpecialVerdict>,
    pub assertions: Vec<Assertion>,
    pub results: Vec<StableResult>,
}

impl CheckReport {
    pub fn new(check: &str, space: &str, session: &Session) -> Self {
        let c = session.config();
        CheckReport {
            schema_version: SCHEMA_VERSION,
            check: check.into(),
            space: space.into(),
            ring: c.ring,
            max_degree: c.max_degree,
            max_iterations: c.max_iterations,
            cell_budget: c.cell_budget,
            passed: true,
            budget_exceeded: false,
            special: None,
            assertions: vec![],
            results: vec![],
        }
    }

    pub fn push(&mut self, name: impl Into<String>, degree: Option<usize>, status: Status, detail: impl Into<String>) {
        self.passed &= status == Status::Pass;
        self.budget_exceeded |= status == Status::Budget;
        self.assertions.push(Assertion {
            name: name.into(),
            degree,
            status,
            detail: detail.into(),
        });
    }

    /// Whether some assertion failed outright, as opposed to running out of budget.
    pub fn has_failure(&self) -> bool {
        self.assertions.iter().any(|a| a.status == Status::Fail)
    }

    /// Folds several reports into one suite report.
    pub fn merge(check: &str, space: &str, session: &Session, parts: Vec<CheckReport>) -> Self {
        let mut out = CheckReport::new(check, space, session);
        for p in parts {
            for a in p.assertions {
                out.push(format!("{}: {}", p.check, a.name), a.degree, a.status, a.detail);
            }
            out.special = out.special.or(p.special);
            for r in p.results {
                if !out.results.iter().any(|s| s.space == r.space) {
                    out.results.push(r);
                }
            }
        }
        out
    }

    fn budget(&mut self, name: &str, degree: Option<usize>, e: Error) -> Result<()> {
        if e.is_budget() {
            self.push(name, degree, Status::Budget, e.to_string());
            Ok(())
        } else {
            Err(e)
        }
    }
}

fn unsettled(r: &StableResult, d: usize) -> (Status, String) {
    match &r.budget_exceeded {
        Some(b) => (Status::Budget, format!("degree {d} of {} unsettled: {b}", r.space)),
        None => (
            Status::Fail,
            format!("degree {d} of {} unsettled within {} iterations", r.space, r.max_iterations),
        ),
    }
}

/// Checks that `η` induces an isomorphism on stabilized homology in every
/// degree, at the first level where both towers have settled.
fn stable_map_iso(
    s: &Session,
    report: &mut CheckReport,
    name: &str,
    eta: &SharedGammaMap,
    src: &StableResult,
    tgt: &StableResult,
) -> Result<()> {
    for i in 0..=s.config().max_degree {
        let (Some(a), Some(b)) = (src.settled_at(i), tgt.settled_at(i)) else {
            let r = if src.settled_at(i).is_none() { src } else { tgt };
            let (status, detail) = unsettled(r, i);
            report.push(name, Some(i), status, detail);
            continue;
        };
        let n = a.max(b);
        let f = s.level_map(eta, n);
        let check = induced_iso(
            &*f,
            &s.level(&eta.source(), n),
            &s.level(&eta.target(), n),
            i + n,
            s.config().cell_budget,
        );
        match check {
            Ok(c) => {
                let (want_s, want_t) = (src.table.render_entry(i), tgt.table.render_entry(i));
                let ok = c.iso && c.source == want_s && c.target == want_t;
                report.push(name, Some(i), status(ok), iso_detail(&c, n));
            }
            Err(e) => report.budget(name, Some(i), e)?,
        }
    }
    Ok(())
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn iso_detail(c: &IsoCheck, n: usize) -> String {
    let rank = c.map_rank.map(|r| format!(", induced rank {r}")).unwrap_or_default();
    format!(
        "level n = {n}, H_{}: {} -> {}{rank}{}",
        c.degree,
        c.source,
        c.target,
        if c.iso { "" } else { ", not an isomorphism" }
    )
}

/// `ρ_X : Σ(X) → B(X)` induces an isomorphism on Γ-homology.
pub fn check_rho_iso(s: &Session, x: &Gamma) -> Result<CheckReport> {
    let mut report = CheckReport::new("rho", &x.describe(), s);
    let eta = rho(x.clone());
    let (src, tgt) = rayon::join(|| s.gamma_homology(&sigma(x.clone())), || s.gamma_homology(&bar(x.clone())));
    let (src, tgt) = (src?, tgt?);
    stable_map_iso(s, &mut report, "rho induces an isomorphism", &eta, &src, &tgt)?;
    report.results = vec![src, tgt];
    Ok(report)
}

/// `ι ∨ ι′ : μ_n*X ∨ μ_n′*X → μ_{n+n′}*X` induces an isomorphism on Γ-homology.
pub fn check_wedge_iso(s: &Session, x: &Gamma, n1: u32, n2: u32) -> Result<CheckReport> {
    let mut report = CheckReport::new(&format!("wedge({n1},{n2})"), &x.describe(), s);
    let verdict = s.certify(x);
    report.push(
        "X is special",
        None,
        status(verdict.special),
        verdict.failure.clone().unwrap_or_else(|| "certified".into()),
    );
    report.special = Some(verdict);
    let eta = wedge_inclusion(x.clone(), n1, n2)?;
    let (src, tgt) = rayon::join(|| s.gamma_homology(&eta.source()), || s.gamma_homology(&eta.target()));
    let (src, tgt) = (src?, tgt?);
    stable_map_iso(s, &mut report, "wedge inclusion induces an isomorphism", &eta, &src, &tgt)?;
    report.results = vec![src, tgt];
    Ok(report)
}

/// `μ_n*X ∧ μ_n′*X` has vanishing Γ-homology.
pub fn check_smash_vanishing(s: &Session, x: &Gamma, n1: u32, n2: u32) -> Result<CheckReport> {
    let mut report = CheckReport::new(&format!("smash({n1},{n2})"), &x.describe(), s);
    let y = smash_gamma(mu_pullback(n1, x.clone()), mu_pullback(n2, x.clone()))?;
    let r = s.gamma_homology(&y)?;
    for i in 0..=s.config().max_degree {
        match (r.group(i), r.settled_at(i)) {
            (Some(g), Some(n)) => report.push(
                "homology vanishes",
                Some(i),
                status(g.is_zero()),
                format!("{} at level n = {n}", g.render(r.ring)),
            ),
            _ => {
                let (st, detail) = unsettled(&r, i);
                report.push("homology vanishes", Some(i), st, detail);
            }
        }
    }
    report.results = vec![r];
    Ok(report)
}

/// Tower values in degree `i` agree at all computed levels `n > i`, and the
/// comparison `τ` is an isomorphism below twice the connectivity on the first
/// level that is at least 1-connected.
pub fn check_stable_range(s: &Session, x: &Gamma) -> Result<CheckReport> {
    let mut report = CheckReport::new("stable", &x.describe(), s);
    let r = s.run(x, ResultKind::Gamma, s.config().max_degree + 2)?;
    for ev in &r.evidence {
        let i = ev.degree;
        let above: Vec<_> = ev.history.iter().filter(|v| v.n > i).collect();
        if above.len() < 2 {
            let (st, detail) = unsettled(&r, i);
            let detail = format!("{detail}; fewer than two levels above the degree");
            report.push("agreement for n > i", Some(i), st, detail);
            continue;
        }
        let ok = above.windows(2).all(|w| w[0].group == w[1].group);
        let values: Vec<String> = above.iter().map(|v| format!("n={}: {}", v.n, v.value)).collect();
        report.push("agreement for n > i", Some(i), status(ok), values.join(", "));
        let recorded = ev.settled && ev.n.is_some() && ev.bound.is_some();
        report.push("evidence recorded", Some(i), status(recorded), ev.bound.clone().unwrap_or_default());
    }
    for v in &r.monotonicity_violations {
        report.push("monotonicity", None, Status::Fail, v.clone());
    }
    if let Some(b) = &r.budget_exceeded {
        report.push("tower", None, Status::Budget, b.clone());
    }

    if !r.special.special {
        report.push("tau comparison", None, Status::Pass, "vacuous: X is not certified special");
    } else {
        tau_comparison(s, &mut report, x, &r)?;
    }
    report.special = Some(r.special.clone());
    report.results = vec![r];
    Ok(report)
}

/// For `Y = BⁿX` with `c = conn U(Y) ≥ 1`, `τ_Y : T(U(Y)) → Y` is an
/// isomorphism on Γ-homology in degrees `j < 2c`, checked at tower level
/// `m = j + 1` where both sides are stable.
fn tau_comparison(s: &Session, report: &mut CheckReport, x: &Gamma, r: &StableResult) -> Result<()> {
    let cfg = s.config();
    let name = "tau comparison";
    let top = r.levels_computed.unwrap_or(0);
    let tower = s.tower(x);
    for n in 1..=top {
        let y = tower.iterate(n);
        let object = s.level(x, n).object().clone();
        let c = match connectivity(object, n + cfg.max_degree, cfg.cell_budget) {
            Ok(c) => c,
            Err(e) => return report.budget(name, None, e),
        };
        if c < 1 {
            continue;
        }
        let eta = tau(y);
        let hi = (2 * c as usize).min(n + cfg.max_degree + 1);
        for j in 0..hi {
            let m = j + 1;
            if n + m > cfg.max_iterations {
                report.push(name, Some(j), Status::Budget, format!("needs level {}", n + m));
                continue;
            }
            let check = induced_iso(
                &*s.level_map(&eta, m),
                &s.level(&eta.source(), m),
                &s.level(x, n + m),
                j + m,
                cfg.cell_budget,
            );
            match check {
                Ok(ck) => {
                    // H^Γ_j(BⁿX) is H^Γ_{j−n}(X), zero in negative degrees
                    let expected = if j < n {
                        Some("0".to_string())
                    } else {
                        r.group(j - n).map(|g| g.render(r.ring))
                    };
                    let ok = ck.iso && expected.as_ref().is_none_or(|e| *e == ck.target);
                    let detail = format!("U(B^{n} X) is {c}-connected; {}", iso_detail(&ck, m));
                    report.push(name, Some(j), status(ok), detail);
                }
                Err(e) => report.budget(name, Some(j), e)?,
            }
        }
        return Ok(());
    }
    report.push(name, None, Status::Pass, "vacuous: no computed level is 1-connected");
    Ok(())
}

/// The two composites `Σ(T U X) → B(X)` agree: `ρ_X ∘ Σ(τ_X)` and
/// `τ_{BX} ∘ T U(ρ_X) ∘ identify`, cell by cell and as chain maps, at
/// `[m]₊` for `m ≤ 2` and total degree `≤ 3`.
pub fn check_square(s: &Session, x: &Gamma) -> Result<CheckReport> {
    const TOP: usize = 3;
    let mut report = CheckReport::new("square", &x.describe(), s);
    let budget = s.config().cell_budget;
    let a = compose_gamma_maps(sigma_map(tau(x.clone())), rho(x.clone()))?;
    let b = compose_gamma_maps(
        identify(x.clone()),
        compose_gamma_maps(tu_map(rho(x.clone())), tau(bar(x.clone())))?,
    )?;
    for m in 0..=2u32 {
        let (fa, fb) = (map_at(&a, m), map_at(&b, m));
        let src = fa.source();
        let name = format!("square commutes at [{m}]+");
        let mut mismatch = None;
        let mut cells_checked = 0u64;
        'deg: for d in 0..=TOP {
            for q in multi_indices(src.directions(), d) {
                let count = match count_u32(&*src, q.levels(), budget) {
                    Ok(c) => c,
                    Err(e) => {
                        report.budget(&name, Some(d), e)?;
                        continue;
                    }
                };
                let cells: Vec<u32> = (0..=count).collect();
                let (mut ca, mut cb) = (cells.clone(), cells);
                fa.apply(q.levels(), &mut ca)?;
                fb.apply(q.levels(), &mut cb)?;
                cells_checked += count as u64;
                if ca != cb {
                    mismatch = Some(format!("cells differ at {q}"));
                    break 'deg;
                }
            }
        }
        let src_chains = ChainBuilder::new(src.clone(), budget);
        let tgt_chains = ChainBuilder::new(fa.target(), budget);
        let mut matrices = 0;
        if mismatch.is_none() {
            for d in 0..=TOP {
                let bases = src_chains.degree_basis(d).and_then(|sb| Ok((sb, tgt_chains.degree_basis(d)?)));
                let (sb, tb) = match bases {
                    Ok(v) => v,
                    Err(e) => {
                        report.budget(&name, Some(d), e)?;
                        continue;
                    }
                };
                let (ma, mb) = (map_matrix(&*fa, &sb, &tb)?, map_matrix(&*fb, &sb, &tb)?);
                if ma != mb {
                    mismatch = Some(format!("chain matrices differ in degree {d}"));
                    break;
                }
                matrices += 1;
            }
        }
        let detail = mismatch
            .clone()
            .unwrap_or_else(|| format!("{cells_checked} cells and {matrices} chain matrices agree"));
        report.push(name, None, status(mismatch.is_none()), detail);
    }
    Ok(report)
}

/// Specialness of `X`, plus the closure statement: a levelwise special `X`
/// has `B(X)` special on homology.
pub fn check_special(s: &Session, x: &Gamma) -> Result<CheckReport> {
    let mut report = CheckReport::new("special", &x.describe(), s);
    let verdict = s.certify(x);
    let bijective = verdict.special && matches!(verdict.mode, SpecialMode::Bijection { .. });
    if bijective {
        let mode = SpecialMode::Homology {
            depth: 2,
            ring: s.ring(),
        };
        match is_special(&bar(x.clone()), mode, 2, s.config().cell_budget) {
            Ok(v) => report.push(
                "B(X) special in homology",
                None,
                status(v.special),
                v.failure.unwrap_or_else(|| format!("certified to depth 2, bound {}", v.bound)),
            ),
            Err(e) => report.budget("B(X) special in homology", None, e)?,
        }
    } else {
        report.push(
            "B(X) special in homology",
            None,
            Status::Pass,
            "vacuous: X is not special in bijection mode",
        );
    }
    report.special = Some(verdict);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segal::{discrete_abelian, parse_space, point_gamma, sphere};
    use crate::stable::StableConfig;

    fn session(ring: Ring, max_degree: usize) -> Session {
        Session::new(StableConfig {
            ring,
            max_degree,
            ..StableConfig::default()
        })
    }

    fn assert_passed(r: &CheckReport) {
        assert!(r.passed, "{}", serde_json::to_string_pretty(&r.assertions).unwrap());
    }

    #[test]
    fn rho_for_point_and_sphere() {
        let s = session(Ring::PrimeField(2), 2);
        assert_passed(&check_rho_iso(&s, &point_gamma(0)).unwrap());
        assert_passed(&check_rho_iso(&s, &sphere()).unwrap());
    }

    #[test]
    fn rho_for_z2_low_degree() {
        let s = session(Ring::PrimeField(2), 1);
        assert_passed(&check_rho_iso(&s, &discrete_abelian(&[2]).unwrap()).unwrap());
    }

    #[test]
    fn wedge_and_smash_low_degree() {
        let s = session(Ring::PrimeField(2), 1);
        let a = discrete_abelian(&[2]).unwrap();
        assert_passed(&check_wedge_iso(&s, &a, 1, 1).unwrap());
        assert_passed(&check_wedge_iso(&s, &a, 1, 0).unwrap());
        assert_passed(&check_smash_vanishing(&s, &a, 1, 1).unwrap());
    }

    #[test]
    fn smash_of_sphere_vanishes() {
        let s = session(Ring::Integers, 2);
        assert_passed(&check_smash_vanishing(&s, &sphere(), 1, 1).unwrap());
        assert_passed(&check_smash_vanishing(&s, &point_gamma(0), 1, 1).unwrap());
    }

    #[test]
    fn stable_range_examples() {
        let s = session(Ring::PrimeField(2), 1);
        assert_passed(&check_stable_range(&s, &discrete_abelian(&[2]).unwrap()).unwrap());
        let z = session(Ring::Integers, 1);
        let r = check_stable_range(&z, &sphere()).unwrap();
        assert_passed(&r);
        assert_eq!(r.results[0].value_at(0, 1).unwrap().rank, 1);
        assert_passed(&check_stable_range(&z, &point_gamma(0)).unwrap());
    }

    #[test]
    fn square_commutes() {
        let s = session(Ring::Integers, 2);
        for spec in ["ab:2", "t:s0", "point", "B(ab:2)"] {
            assert_passed(&check_square(&s, &parse_space(spec).unwrap()).unwrap());
        }
    }

    #[test]
    fn special_reports() {
        let s = session(Ring::PrimeField(2), 2);
        let r = check_special(&s, &sphere()).unwrap();
        assert!(r.passed);
        assert!(!r.special.unwrap().special);
        let r = check_special(&s, &discrete_abelian(&[2]).unwrap()).unwrap();
        assert_passed(&r);
        assert!(r.special.unwrap().special);
    }
}
