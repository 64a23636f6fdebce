use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coefficient ring for chains and homology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Integers,
    Rationals,
    PrimeField(u32),
}

impl Ring {
    pub fn prime_field(p: u32) -> Result<Ring> {
        if is_prime(p) {
            Ok(Ring::PrimeField(p))
        } else {
            Err(Error::Validation(format!("{p} is not prime")))
        }
    }

    pub fn is_field(self) -> bool {
        !matches!(self, Ring::Integers)
    }

    /// Characteristic; `0` for ℤ and ℚ.
    pub fn characteristic(self) -> u32 {
        match self {
            Ring::PrimeField(p) => p,
            _ => 0,
        }
    }

    /// Short tag as accepted on the command line.
    pub fn tag(self) -> String {
        match self {
            Ring::Integers => "z".into(),
            Ring::Rationals => "q".into(),
            Ring::PrimeField(p) => format!("f{p}"),
        }
    }

    /// Symbol used when printing groups: `Z`, `Q`, `F2`, …
    pub fn symbol(self) -> String {
        match self {
            Ring::Integers => "Z".into(),
            Ring::Rationals => "Q".into(),
            Ring::PrimeField(p) => format!("F{p}"),
        }
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FromStr for Ring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ring> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "z" | "zz" | "int" | "integers" => Ok(Ring::Integers),
            "q" | "qq" | "rationals" => Ok(Ring::Rationals),
            _ => {
                let digits = t
                    .strip_prefix('f')
                    .ok_or_else(|| Error::Parse(format!("unknown ring '{s}'")))?;
                let p: u32 = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("unknown ring '{s}'")))?;
                Ring::prime_field(p)
            }
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol())
    }
}

impl Serialize for Ring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> Deserialize<'de> for Ring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Ring, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
