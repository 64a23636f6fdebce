//! Chain-level invariants on the complexes the acceptance runs are built from.

use gamma_homology::chains::{ChainComplex, ChainComplexJson, Ring};
use gamma_homology::segal::{parse_space, spectrum_level};
use gamma_homology::simplicial::normalized_chains;
use proptest::prelude::*;

const BUDGET: u64 = 1 << 22;

/// `(space, level, top degree)` for the levels the acceptance suite touches,
/// cut off where integral elimination is still quick.
const LEVELS: &[(&str, usize, usize)] = &[
    ("sphere", 1, 4),
    ("sphere", 2, 4),
    ("t:s1", 1, 4),
    ("t:s2", 0, 4),
    ("ab:2", 0, 0),
    ("ab:2", 1, 4),
    ("ab:2", 2, 4),
    ("ab:2", 3, 4),
    ("ab:2,4", 1, 3),
    ("mu(2)*ab:2", 2, 4),
    ("wedge(ab:2,mu(2)*ab:2)", 2, 4),
    ("smash(ab:2,ab:2)", 2, 4),
    ("sigma(ab:2)", 1, 4),
    ("B(sigma(ab:2))", 1, 4),
];

fn level(spec: &str, n: usize, top: usize) -> ChainComplex {
    let x = parse_space(spec).unwrap();
    let obj = spectrum_level(&x, n).object;
    // built one degree past `top`, then cut so that the top boundary is zero
    normalized_chains(obj, Ring::Integers, top, BUDGET).unwrap().truncate(top)
}

#[test]
fn boundaries_square_to_zero() {
    for &(spec, n, top) in LEVELS {
        let c = level(spec, n, top);
        c.check_d_squared().unwrap_or_else(|e| panic!("{spec} level {n}: {e}"));
        for p in [2, 3] {
            c.with_ring(Ring::PrimeField(p)).unwrap().check_d_squared().unwrap();
        }
    }
}

#[test]
fn euler_characteristic_matches_homology() {
    for &(spec, n, top) in LEVELS {
        let c = level(spec, n, top);
        for ring in [Ring::Rationals, Ring::PrimeField(2), Ring::PrimeField(3)] {
            let h = c.with_ring(ring).unwrap().homology(top).unwrap();
            let chi: i64 = (0..=top)
                .map(|d| {
                    let r = h.get(d).unwrap().rank as i64;
                    if d % 2 == 0 {
                        r
                    } else {
                        -r
                    }
                })
                .sum();
            assert_eq!(chi, c.euler_characteristic(), "{spec} level {n} over {ring}");
        }
    }
}

#[test]
fn universal_coefficients() {
    // dim H_d(C; F_p) = dim H_d(C) ⊗ F_p + dim Tor(H_{d−1}(C), F_p)
    for &(spec, n, top) in LEVELS {
        let c = level(spec, n, top);
        let hz = c.homology(top).unwrap();
        let hq = c.with_ring(Ring::Rationals).unwrap().homology(top).unwrap();
        for p in [2u32, 3] {
            let hp = c.with_ring(Ring::PrimeField(p)).unwrap().homology(top).unwrap();
            for d in 0..=top {
                let z = hz.get(d).unwrap();
                let tor = if d == 0 { 0 } else { hz.get(d - 1).unwrap().tor_dim(p) };
                assert_eq!(hp.get(d).unwrap().rank, z.tensor_dim(p) + tor, "{spec} level {n} H_{d} mod {p}");
                assert_eq!(hq.get(d).unwrap().rank, z.rank, "{spec} level {n} H_{d} over Q");
            }
        }
    }
}

#[test]
fn json_round_trip() {
    for &(spec, n, top) in LEVELS.iter().take(6) {
        let c = level(spec, n, top);
        let text = serde_json::to_string(&c.to_json()).unwrap();
        let back: ChainComplexJson = serde_json::from_str(&text).unwrap();
        let d = ChainComplex::from_json(back).unwrap();
        assert_eq!(d.to_json(), c.to_json());
        assert_eq!(d.homology(top).unwrap(), c.homology(top).unwrap());
    }
}

#[test]
fn json_rejects_other_schema_versions() {
    let mut j = level("t:s1", 1, 2).to_json();
    j.schema_version += 1;
    assert!(ChainComplex::from_json(j).is_err());
}

fn shuffle(n: usize, seed: &[u64]) -> Vec<usize> {
    // Fisher–Yates driven by the proptest seed
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (seed[i % seed.len()] as usize).wrapping_mul(i + 7) % (i + 1);
        p.swap(i, j);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn homology_ignores_basis_order(which in 0usize..LEVELS.len(), seed in proptest::collection::vec(any::<u64>(), 1..16)) {
        let (spec, n, top) = LEVELS[which];
        let c = level(spec, n, top);
        let perms: Vec<Vec<usize>> = c.ranks().iter().map(|&r| shuffle(r, &seed)).collect();
        let shuffled = c.permuted(&perms);
        shuffled.check_d_squared().unwrap();
        prop_assert_eq!(shuffled.homology(top).unwrap(), c.homology(top).unwrap());
        let f2 = Ring::PrimeField(2);
        prop_assert_eq!(
            shuffled.with_ring(f2).unwrap().homology(top).unwrap(),
            c.with_ring(f2).unwrap().homology(top).unwrap()
        );
    }
}
