//! Homology groups and tables.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::field::rank_mod_p;
use super::integer::{integer_invariants, rational_rank};
use super::ring::Ring;
use super::sparse::SparseMatrix;
use crate::error::Result;

/// A finitely generated module over the coefficient ring: `R^rank` plus
/// cyclic torsion summands (ℤ only).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct HomologyGroup {
    pub rank: usize,
    /// Invariant factors `d_1 | d_2 | …`, each greater than one.
    pub torsion: Vec<BigUint>,
}

impl HomologyGroup {
    pub fn free(rank: usize) -> Self {
        HomologyGroup {
            rank,
            torsion: vec![],
        }
    }

    pub fn zero() -> Self {
        HomologyGroup::default()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn render(&self, ring: Ring) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let sym = ring.symbol();
        let mut parts = vec![];
        match self.rank {
            0 => {}
            1 => parts.push(sym),
            r => parts.push(format!("{sym}^{r}")),
        }
        // group equal factors for readability
        let mut i = 0;
        while i < self.torsion.len() {
            let d = &self.torsion[i];
            let run = self.torsion[i..].iter().take_while(|x| *x == d).count();
            if run == 1 {
                parts.push(format!("Z/{d}"));
            } else {
                parts.push(format!("(Z/{d})^{run}"));
            }
            i += run;
        }
        parts.join(" + ")
    }

    /// Dimension over F_p of `H ⊗ F_p`.
    pub fn tensor_dim(&self, p: u32) -> usize {
        let p = BigUint::from(p);
        self.rank + self.torsion.iter().filter(|d| d.is_multiple_of(&p)).count()
    }

    /// Dimension of `Tor(H, F_p)`.
    pub fn tor_dim(&self, p: u32) -> usize {
        let p = BigUint::from(p);
        self.torsion.iter().filter(|d| d.is_multiple_of(&p)).count()
    }
}

/// One degree of a table; `None` marks a value that could not be computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyEntry {
    pub degree: usize,
    pub group: Option<HomologyGroup>,
}

/// Homology by degree, starting at degree 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyTable {
    pub ring: Ring,
    pub entries: Vec<HomologyEntry>,
}

impl HomologyTable {
    pub fn new(ring: Ring) -> Self {
        HomologyTable {
            ring,
            entries: vec![],
        }
    }

    pub fn from_groups(ring: Ring, groups: Vec<HomologyGroup>) -> Self {
        HomologyTable {
            ring,
            entries: groups
                .into_iter()
                .enumerate()
                .map(|(degree, g)| HomologyEntry {
                    degree,
                    group: Some(g),
                })
                .collect(),
        }
    }

    pub fn push(&mut self, group: Option<HomologyGroup>) {
        let degree = self.entries.len();
        self.entries.push(HomologyEntry { degree, group });
    }

    pub fn get(&self, d: usize) -> Option<&HomologyGroup> {
        self.entries.get(d).and_then(|e| e.group.as_ref())
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(|e| e.group.is_some())
    }

    /// Ranks per degree (Betti numbers over a field).
    pub fn ranks(&self) -> Vec<Option<usize>> {
        self.entries.iter().map(|e| e.group.as_ref().map(|g| g.rank)).collect()
    }

    pub fn render_entry(&self, d: usize) -> String {
        match self.entries.get(d).and_then(|e| e.group.as_ref()) {
            Some(g) => g.render(self.ring),
            None => "?".into(),
        }
    }

    /// Aligned two-column text table.
    pub fn to_text(&self) -> String {
        let cells: Vec<String> = (0..self.entries.len()).map(|d| self.render_entry(d)).collect();
        let width = cells.iter().map(|c| c.len()).max().unwrap_or(1).max(5);
        let mut out = format!("{:>6}  {:<width$}\n", "degree", format!("H({})", self.ring.symbol()));
        for (d, c) in cells.iter().enumerate() {
            out.push_str(&format!("{d:>6}  {c:<width$}\n"));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,rank,torsion,group\n");
        for e in &self.entries {
            match &e.group {
                Some(g) => {
                    let t: Vec<String> = g.torsion.iter().map(|d| d.to_string()).collect();
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        e.degree,
                        g.rank,
                        t.join(" "),
                        g.render(self.ring)
                    ));
                }
                None => out.push_str(&format!("{},?,?,?\n", e.degree)),
            }
        }
        out
    }
}

impl fmt::Display for HomologyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Torsion coefficients print as JSON numbers when they fit a `u64`, and as
/// decimal strings otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FactorJson {
    Small(u64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    degree: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    torsion: Option<Vec<FactorJson>>,
    group: String,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    ring: Ring,
    degrees: Vec<EntryJson>,
}

impl Serialize for HomologyTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let degrees = self
            .entries
            .iter()
            .map(|e| EntryJson {
                degree: e.degree,
                rank: e.group.as_ref().map(|g| g.rank),
                torsion: e.group.as_ref().map(|g| {
                    g.torsion
                        .iter()
                        .map(|d| match u64::try_from(d) {
                            Ok(x) => FactorJson::Small(x),
                            Err(_) => FactorJson::Big(d.to_string()),
                        })
                        .collect()
                }),
                group: self.render_entry(e.degree),
            })
            .collect();
        TableJson {
            ring: self.ring,
            degrees,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomologyTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = TableJson::deserialize(d)?;
        let mut entries = vec![];
        for e in t.degrees {
            let group = match e.rank {
                None => None,
                Some(rank) => {
                    let mut torsion = vec![];
                    for f in e.torsion.unwrap_or_default() {
                        torsion.push(match f {
                            FactorJson::Small(x) => BigUint::from(x),
                            FactorJson::Big(s) => s.parse().map_err(serde::de::Error::custom)?,
                        });
                    }
                    Some(HomologyGroup { rank, torsion })
                }
            };
            entries.push(HomologyEntry {
                degree: e.degree,
                group,
            });
        }
        Ok(HomologyTable {
            ring: t.ring,
            entries,
        })
    }
}

/// Rank of a boundary matrix over the given ring, plus its nonunit invariant
/// factors over ℤ.
pub fn boundary_invariants(m: &SparseMatrix, ring: Ring) -> Result<(usize, Vec<BigUint>)> {
    match ring {
        Ring::Integers => {
            let inv = integer_invariants(m)?;
            Ok((inv.rank, inv.torsion))
        }
        Ring::Rationals => Ok((rational_rank(m)?, vec![])),
        Ring::PrimeField(p) => Ok((rank_mod_p(m, p), vec![])),
    }
}

/// Assembles `H_d` from `dim C_d`, `rank ∂_d`, and the invariants of `∂_{d+1}`.
pub fn group_from_ranks(dim: usize, rank_out: usize, rank_in: usize, torsion_in: Vec<BigUint>) -> HomologyGroup {
    debug_assert!(torsion_in.iter().all(|d| !d.is_one()));
    HomologyGroup {
        rank: dim - rank_out - rank_in,
        torsion: torsion_in,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering() {
        let g = HomologyGroup {
            rank: 2,
            torsion: vec![BigUint::from(2u32), BigUint::from(2u32), BigUint::from(4u32)],
        };
        assert_eq!(g.render(Ring::Integers), "Z^2 + (Z/2)^2 + Z/4");
        assert_eq!(HomologyGroup::free(1).render(Ring::PrimeField(2)), "F2");
        assert_eq!(HomologyGroup::zero().render(Ring::Rationals), "0");
        assert_eq!(g.tensor_dim(2), 5);
        assert_eq!(g.tor_dim(2), 3);
        assert_eq!(g.tensor_dim(3), 2);
    }

    #[test]
    fn json_round_trip_with_unknown_and_big_factors() {
        let huge: BigUint = "123456789012345678901234567890".parse().unwrap();
        let mut t = HomologyTable::new(Ring::Integers);
        t.push(Some(HomologyGroup {
            rank: 0,
            torsion: vec![BigUint::from(2u32), huge],
        }));
        t.push(None);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains(r#""torsion":[2,"123456789012345678901234567890"]"#));
        assert!(s.contains(r#""group":"?""#));
        let back: HomologyTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(!t.is_complete());
        assert!(t.to_csv().contains("1,?,?,?"));
    }
}
