//! The Γ-space spec language.
//!
//! ```text
//! expr  := "B(" expr ")" | "sigma(" expr ")" | "mu(" int ")*" expr
//!        | "wedge(" expr "," expr ")" | "smash(" expr "," expr ")" | atom
//! atom  := "t:s0" | "t:circle" | "t:s1" | "t:s2" | "ab:" int ("," int)*
//!        | "sphere" | "point"
//! ```
//!
//! The comma in `ab:2,4` clashes with the argument separator of `wedge` and
//! `smash`. The parser backtracks and prefers the longest factor list that
//! still lets the whole string parse, so `wedge(ab:2,4,sphere)` reads as
//! `ab:2,4` and `sphere`, while `wedge(ab:2,ab:3)` splits at `ab`.

use std::sync::Arc;

use super::{bar, discrete_abelian, mu_pullback, point_gamma, sigma, smash_gamma, sphere, t_of, wedge_gamma, Gamma};
use crate::error::{Error, Result};
use crate::simplicial::{constant, smash_ss, Circle, SharedSS};

type Partial = (Gamma, usize);

struct Parser<'a> {
    s: &'a [u8],
}

impl Parser<'_> {
    fn eat(&self, pos: usize, lit: &str) -> Option<usize> {
        self.s[pos..].starts_with(lit.as_bytes()).then_some(pos + lit.len())
    }

    fn int(&self, pos: usize) -> Option<(u32, usize)> {
        let end = pos + self.s[pos..].iter().take_while(|c| c.is_ascii_digit()).count();
        let text = std::str::from_utf8(&self.s[pos..end]).ok()?;
        text.parse().ok().map(|v| (v, end))
    }

    /// All parses of an expression starting at `pos`, longest first.
    fn expr(&self, pos: usize) -> Result<Vec<Partial>> {
        let mut out = vec![];
        for (kw, f) in [("B(", bar as fn(Gamma) -> Gamma), ("b(", bar), ("sigma(", sigma)] {
            if let Some(p) = self.eat(pos, kw) {
                for (x, p) in self.expr(p)? {
                    if let Some(p) = self.eat(p, ")") {
                        out.push((f(x), p));
                    }
                }
                return Ok(out);
            }
        }
        if let Some(p) = self.eat(pos, "mu(") {
            let (k, p) = self.int(p).ok_or_else(|| self.error(p, "expected an integer"))?;
            let p = self.eat(p, ")*").ok_or_else(|| self.error(p, "expected ')*'"))?;
            for (x, p) in self.expr(p)? {
                out.push((mu_pullback(k, x), p));
            }
            return Ok(out);
        }
        for (kw, wedge) in [("wedge(", true), ("smash(", false)] {
            if let Some(p) = self.eat(pos, kw) {
                for (x, p) in self.expr(p)? {
                    let Some(p) = self.eat(p, ",") else { continue };
                    // a failed second argument only rules out this split
                    for (y, p) in self.expr(p).unwrap_or_default() {
                        let Some(p) = self.eat(p, ")") else { continue };
                        let g = if wedge {
                            wedge_gamma(x.clone(), y)?
                        } else {
                            smash_gamma(x.clone(), y)?
                        };
                        out.push((g, p));
                    }
                }
                return Ok(out);
            }
        }
        if let Some(mut p) = self.eat(pos, "ab:") {
            let mut factors = vec![];
            let mut ends = vec![];
            loop {
                let (a, q) = self.int(p).ok_or_else(|| self.error(p, "expected an invariant factor"))?;
                factors.push(a);
                ends.push((factors.clone(), q));
                match self.eat(q, ",") {
                    Some(r) if self.int(r).is_some() => p = r,
                    _ => break,
                }
            }
            for (f, q) in ends.into_iter().rev() {
                out.push((discrete_abelian(&f)?, q));
            }
            return Ok(out);
        }
        let atoms: [(&str, fn() -> Gamma); 6] = [
            ("t:s0", || t_of(constant(0, 1), "t:s0")),
            ("t:circle", || t_of(Arc::new(Circle), "t:circle")),
            ("t:s1", || t_of(Arc::new(Circle), "t:circle")),
            ("t:s2", || {
                let s: SharedSS = Arc::new(Circle);
                t_of(smash_ss(s.clone(), s).expect("same directions"), "t:s2")
            }),
            ("sphere", sphere),
            ("point", || point_gamma(0)),
        ];
        for (kw, f) in atoms {
            if let Some(p) = self.eat(pos, kw) {
                return Ok(vec![(f(), p)]);
            }
        }
        Err(self.error(pos, "unknown space"))
    }

    fn error(&self, pos: usize, what: &str) -> Error {
        Error::Parse(format!(
            "{what} at position {pos} in '{}'",
            String::from_utf8_lossy(self.s)
        ))
    }
}

/// Parses a spec string such as `B(mu(2)*ab:2,4)`. Whitespace is ignored.
pub fn parse_space(spec: &str) -> Result<Gamma> {
    let compact: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty space spec".into()));
    }
    let p = Parser { s: compact.as_bytes() };
    let parses = p.expr(0)?;
    parses
        .into_iter()
        .find(|(_, end)| *end == compact.len())
        .map(|(g, _)| g)
        .ok_or_else(|| Error::Parse(format!("trailing or unbalanced input in '{compact}'")))
}
