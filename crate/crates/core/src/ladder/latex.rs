//! Reader for hand-written LaTeX ladder polynomials.
//!
//! Accepts sums and products of `R_{\mu+j}` with positive integer
//! coefficients, powers, nested `()`/`[]` groups (with or without
//! `\left`/`\right`) and index sums `\sum_{i=\mu+a}^{\mu+b}R_i`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::Terms;
use crate::error::{FreudError, Result};

pub fn parse_latex(text: &str) -> Result<Terms> {
    let cleaned = clean(text);
    let mut p = Parser {
        s: cleaned.as_bytes(),
        pos: 0,
    };
    let out = p.sum()?;
    if p.pos != p.s.len() {
        return Err(p.error("trailing input"));
    }
    Ok(out)
}

fn clean(text: &str) -> String {
    let mut s: String = text.split_whitespace().collect();
    for noise in [r"\left", r"\right", r"\,", r"\;", r"\!", r"\cdot"] {
        s = s.replace(noise, "");
    }
    s
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> FreudError {
        let rest = String::from_utf8_lossy(&self.s[self.pos.min(self.s.len())..]);
        FreudError::Parse(format!("{what} at {:?}", truncate(&rest, 24)))
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {lit:?}")))
        }
    }

    fn sum(&mut self) -> Result<Terms> {
        let mut acc = self.product()?;
        while self.eat("+") {
            add_into(&mut acc, self.product()?);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Terms> {
        let mut acc = Terms::from([(Vec::new(), BigUint::one())]);
        let mut seen = false;
        if let Some(c) = self.integer()? {
            acc = scale(acc, &c);
            seen = true;
        }
        while let Some(f) = self.factor()? {
            acc = multiply(&acc, &f);
            seen = true;
        }
        if !seen {
            return Err(self.error("expected a term"));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Option<Terms>> {
        let base = if self.eat("R_{") {
            let o = self.index()?;
            self.expect("}")?;
            single(o)
        } else if self.eat("(") {
            let inner = self.sum()?;
            self.expect(")")?;
            inner
        } else if self.eat("[") {
            let inner = self.sum()?;
            self.expect("]")?;
            inner
        } else if self.eat(r"\sum_{i=") {
            let lo = self.index()?;
            self.expect("}^{")?;
            let hi = self.index()?;
            self.expect("}")?;
            if !(self.eat("R_{i}") || self.eat("R_i")) {
                return Err(self.error("expected R_i after index sum"));
            }
            if hi < lo {
                return Err(self.error("empty index sum"));
            }
            let mut t = Terms::new();
            for o in lo..=hi {
                add_into(&mut t, single(o));
            }
            t
        } else {
            return Ok(None);
        };
        let power = if self.eat("^{") {
            let p = self
                .integer()?
                .ok_or_else(|| self.error("expected exponent"))?;
            self.expect("}")?;
            p
        } else if self.eat("^") {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    self.pos += 1;
                    BigUint::from(c - b'0')
                }
                _ => return Err(self.error("expected exponent digit")),
            }
        } else {
            BigUint::one()
        };
        let power: u32 = power
            .try_into()
            .map_err(|_| self.error("exponent too large"))?;
        let mut out = Terms::from([(Vec::new(), BigUint::one())]);
        for _ in 0..power {
            out = multiply(&out, &base);
        }
        Ok(Some(out))
    }

    /// `\mu`, `\mu+3`, `\mu-1`.
    fn index(&mut self) -> Result<i32> {
        self.expect(r"\mu")?;
        let sign = if self.eat("+") {
            1
        } else if self.eat("-") {
            -1
        } else {
            return Ok(0);
        };
        let v = self
            .integer()?
            .ok_or_else(|| self.error("expected offset"))?;
        let v: i32 = v.try_into().map_err(|_| self.error("offset too large"))?;
        Ok(sign * v)
    }

    fn integer(&mut self) -> Result<Option<BigUint>> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        digits
            .parse()
            .map(Some)
            .map_err(|_| self.error("bad integer"))
    }
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}

fn single(offset: i32) -> Terms {
    Terms::from([(vec![offset], BigUint::one())])
}

fn add_into(acc: &mut Terms, other: Terms) {
    for (k, v) in other {
        *acc.entry(k).or_insert_with(BigUint::zero) += v;
    }
}

fn scale(t: Terms, c: &BigUint) -> Terms {
    t.into_iter().map(|(k, v)| (k, v * c)).collect()
}

fn multiply(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let mut k = ka.clone();
            k.extend_from_slice(kb);
            k.sort_unstable();
            *out.entry(k).or_insert_with(BigUint::zero) += va * vb;
        }
    }
    out
}
