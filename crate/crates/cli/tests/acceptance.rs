//! Acceptance criteria, run one after another so that wall-clock limits are
//! measured without competing jobs. Prints one `PASS`/`FAIL` line per
//! criterion and exits nonzero if any fails.
//!
//! The degree-4 stretch goal of criterion 2 runs only with
//! `GAMMAHOM_STRETCH=1`.

use std::process::Command;
use std::time::{Duration, Instant};

use gamma_homology::chains::{big_determinant, big_matmul, smith_normal_form_dense, ChainComplex, Ring};
use gamma_homology::segal::{parse_space, spectrum_level};
use gamma_homology::simplicial::normalized_chains;
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

struct Run {
    code: i32,
    json: Value,
    elapsed: Duration,
}

fn gammahom(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_gammahom"))
        .args(args)
        .args(["--format", "json"])
        .output()
        .expect("gammahom runs");
    let elapsed = start.elapsed();
    let json = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "gammahom {args:?} printed no JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    });
    Run {
        code: out.status.code().unwrap_or(-1),
        json,
        elapsed,
    }
}

fn groups(r: &Run) -> Vec<String> {
    r.json["table"]["degrees"]
        .as_array()
        .map(|ds| ds.iter().map(|d| d["group"].as_str().unwrap_or("?").to_string()).collect())
        .unwrap_or_default()
}

fn settled_levels(r: &Run) -> Vec<Option<u64>> {
    r.json["evidence"]
        .as_array()
        .map(|es| es.iter().map(|e| e["n"].as_u64()).collect())
        .unwrap_or_default()
}

/// Every assertion of a check report passed; returns a short failure note otherwise.
fn report_passed(r: &Run) -> Result<usize, String> {
    let asserts = r.json["assertions"].as_array().cloned().unwrap_or_default();
    if r.code != 0 || r.json["passed"] != Value::Bool(true) {
        let bad: Vec<String> = asserts
            .iter()
            .filter(|a| a["status"] != "pass")
            .map(|a| format!("{} [{}]: {}", a["name"], a["degree"], a["detail"]))
            .collect();
        return Err(format!("exit {}, {}", r.code, bad.join("; ")));
    }
    Ok(asserts.len())
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    if elapsed > Duration::from_secs(limit_secs) {
        return Err(format!("took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64()));
    }
    Ok(())
}

type Outcome = Result<String, String>;

fn criterion_1() -> Outcome {
    let r = gammahom(&["compute", "--space", "sphere", "--ring", "z", "--max-degree", "3"]);
    let g = groups(&r);
    if r.code != 0 || g != ["Z", "0", "0", "0"] {
        return Err(format!("exit {}, groups {g:?}", r.code));
    }
    let levels = settled_levels(&r);
    if levels.iter().any(|n| !matches!(n, Some(n) if *n <= 4)) {
        return Err(format!("stabilization levels {levels:?}"));
    }
    within(r.elapsed, 60)?;
    Ok(format!("{g:?} settled at {levels:?} in {:.1}s", r.elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let r = gammahom(&["compute", "--space", "ab:2", "--ring", "f2", "--max-degree", "3"]);
    let dims: Vec<u64> = r.json["table"]["degrees"]
        .as_array()
        .map(|ds| ds.iter().filter_map(|d| d["rank"].as_u64()).collect())
        .unwrap_or_default();
    let levels = settled_levels(&r);
    if r.code != 0 || dims != [1, 1, 1, 2] || levels.iter().any(|n| !matches!(n, Some(n) if *n <= 4)) {
        return Err(format!("exit {}, dims {dims:?}, levels {levels:?}", r.code));
    }
    within(r.elapsed, 300)?;
    Ok(format!("dims {dims:?} settled at {levels:?} in {:.1}s", r.elapsed.as_secs_f64()))
}

fn criterion_2_stretch() -> Outcome {
    let r = gammahom(&["compute", "--space", "ab:2", "--ring", "f2", "--max-degree", "4"]);
    let entry = &r.json["table"]["degrees"][4];
    let n = r.json["evidence"][4]["n"].as_u64();
    if r.code != 0 || entry["rank"].as_u64() != Some(2) || n != Some(5) {
        return Err(format!(
            "exit {}, degree 4 = {}, settled at {n:?}, budget: {}",
            r.code, entry["group"], r.json["budget_exceeded"]
        ));
    }
    within(r.elapsed, 1800)?;
    Ok(format!("degree 4 = F2^2 at n = 5 in {:.1}s", r.elapsed.as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let r = gammahom(&["compute", "--space", "ab:2", "--ring", "z", "--max-degree", "1"]);
    let g = groups(&r);
    if r.code != 0 || g.first().map(String::as_str) != Some("Z/2") {
        return Err(format!("exit {}, groups {g:?}", r.code));
    }
    Ok(format!("H_0 = {}", g[0]))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut notes = vec![];
    for (space, k) in [("t:s0", 0), ("t:s1", 1), ("t:s2", 2)] {
        let r = gammahom(&["compute", "--space", space, "--ring", "z", "--max-degree", "3"]);
        let want: Vec<&str> = (0..=3).map(|i| if i == k { "Z" } else { "0" }).collect();
        let g = groups(&r);
        if r.code != 0 || g != want {
            return Err(format!("{space}: exit {}, groups {g:?}", r.code));
        }
        notes.push(format!("{space}: Z in degree {k}"));
    }
    within(start.elapsed(), 60)?;
    Ok(format!("{} in {:.1}s", notes.join(", "), start.elapsed().as_secs_f64()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for space in ["ab:2", "t:s0", "point"] {
        let r = gammahom(&["check", "--suite", "rho", "--space", space, "--ring", "f2", "--max-degree", "2"]);
        count += report_passed(&r).map_err(|e| format!("{space}: {e}"))?;
    }
    within(start.elapsed(), 600)?;
    Ok(format!("{count} assertions in {:.1}s", start.elapsed().as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for suite in ["wedge", "smash"] {
        let r = gammahom(&["check", "--suite", suite, "--space", "ab:2", "--ring", "f2", "--max-degree", "2"]);
        count += report_passed(&r).map_err(|e| format!("{suite}: {e}"))?;
    }
    within(start.elapsed(), 900)?;
    Ok(format!(
        "wedge (1,1), (1,2) and smash (1,1): {count} assertions in {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_7() -> Outcome {
    let r = gammahom(&["check", "--suite", "square", "--space", "ab:2", "--ring", "f2", "--max-degree", "3"]);
    let count = report_passed(&r)?;
    Ok(format!("{count} matrix equalities"))
}

fn criterion_8() -> Outcome {
    let r = gammahom(&["check", "--suite", "stable", "--space", "ab:2", "--ring", "f2", "--max-degree", "3"]);
    let count = report_passed(&r)?;
    let asserts = r.json["assertions"].as_array().cloned().unwrap_or_default();
    let agreements = asserts.iter().filter(|a| a["name"] == "agreement for n > i").count();
    let recorded = asserts.iter().filter(|a| a["name"] == "evidence recorded").count();
    if agreements < 4 || recorded < 4 {
        return Err(format!("{agreements} agreement and {recorded} evidence assertions for 4 degrees"));
    }
    Ok(format!("{count} assertions, evidence recorded for degrees 0..=3"))
}

fn snf_cases() -> Result<(), String> {
    let strategy = (1usize..=10, 1usize..=10).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-9i64..=9, c), r).prop_map(move |m| (r, c, m))
    });
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |(r, c, m)| {
            let s = smith_normal_form_dense(&m, r, c, true);
            let big: Vec<Vec<BigInt>> = m.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let (u, v) = (s.u.clone().unwrap(), s.v.clone().unwrap());
            prop_assert_eq!(big_matmul(&big_matmul(&u, &big), &v), s.d_matrix());
            let unit = |d: BigInt| d == BigInt::from(1) || d == BigInt::from(-1);
            prop_assert!(unit(big_determinant(&u)) && unit(big_determinant(&v)));
            prop_assert!(s.diagonal.iter().all(|d| *d > BigInt::from(0)));
            prop_assert!(s.diagonal.windows(2).all(|w| &w[1] % &w[0] == BigInt::from(0)));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn acceptance_complexes() -> Vec<(String, ChainComplex)> {
    let mut out = vec![];
    for (spec, levels, top) in [("sphere", 1..=3, 4usize), ("ab:2", 0..=3, 4), ("t:s2", 0..=0, 4)] {
        let x = parse_space(spec).unwrap();
        for n in levels {
            let c = normalized_chains(spectrum_level(&x, n).object, Ring::Integers, top, 1 << 22).unwrap();
            out.push((format!("{spec} level {n}"), c.truncate(top)));
        }
    }
    out
}

fn criterion_9() -> Outcome {
    snf_cases()?;
    let complexes = acceptance_complexes();
    for (name, c) in &complexes {
        let top = c.top_degree();
        c.check_d_squared().map_err(|e| format!("{name}: {e}"))?;
        let hz = c.homology(top).map_err(|e| e.to_string())?;
        for p in [2u32, 3] {
            let hp = c.with_ring(Ring::PrimeField(p)).and_then(|c| c.homology(top)).map_err(|e| e.to_string())?;
            let mut chi = 0i64;
            for d in 0..=top {
                let dim = hp.get(d).unwrap().rank;
                chi += if d % 2 == 0 { dim as i64 } else { -(dim as i64) };
                let tor = if d == 0 { 0 } else { hz.get(d - 1).unwrap().tor_dim(p) };
                if dim != hz.get(d).unwrap().tensor_dim(p) + tor {
                    return Err(format!("{name}: universal coefficients fail in degree {d} mod {p}"));
                }
            }
            if chi != c.euler_characteristic() {
                return Err(format!("{name}: Euler characteristic {chi} vs {}", c.euler_characteristic()));
            }
        }
    }
    Ok(format!(
        "500 Smith forms certified; d^2 = 0, Euler characteristic and universal coefficients on {} complexes",
        complexes.len()
    ))
}

fn main() {
    let mut criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 sphere tower over Z", criterion_1),
        ("2 ab:2 over F2 to degree 3", criterion_2),
        ("3 ab:2 over Z, H_0", criterion_3),
        ("4 T_of spheres", criterion_4),
        ("5 rho iso", criterion_5),
        ("6 wedge iso and smash vanishing", criterion_6),
        ("7 commuting square", criterion_7),
        ("8 stable range", criterion_8),
        ("9 Smith forms and chain invariants", criterion_9),
    ];
    if std::env::var("GAMMAHOM_STRETCH").as_deref() == Ok("1") {
        criteria.insert(2, ("2 stretch: ab:2 over F2, degree 4 at n = 5", criterion_2_stretch));
    }
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
