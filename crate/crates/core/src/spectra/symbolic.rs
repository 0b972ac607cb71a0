//! Exact polynomials in named symbols, used to expand the resolvent
//! expression for `(pi rho / N)^2`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Sorted `(symbol, exponent)` pairs; negative exponents allowed.
pub type Monomial = Vec<(String, i32)>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Poly::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(name: &str) -> Self {
        Poly::power(name, 1)
    }

    pub fn power(name: &str, exp: i32) -> Self {
        if exp == 0 {
            return Poly::int(1);
        }
        let mut p = Poly::zero();
        p.terms
            .insert(vec![(name.to_string(), exp)], BigRational::one());
        p
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Poly::int(1), |acc, _| &acc * self)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Replaces every power of `name` by the matching power of `value`.
    pub fn substitute(&self, name: &str, value: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (mono, c) in &self.terms {
            let mut rest = Vec::new();
            let mut factor = Poly::int(1);
            for (s, e) in mono {
                if s == name {
                    factor = if *e >= 0 {
                        value.pow(*e as u32)
                    } else {
                        // only single-symbol values can be inverted
                        match value.terms.iter().next() {
                            Some((m, k)) if value.len() == 1 && k.is_one() => {
                                let inv: Monomial =
                                    m.iter().map(|(s, p)| (s.clone(), p * e)).collect();
                                let mut q = Poly::zero();
                                q.add_term(inv, BigRational::one());
                                q
                            }
                            _ => panic!("cannot invert {value} in substitution"),
                        }
                    };
                } else {
                    rest.push((s.clone(), *e));
                }
            }
            let mut base = Poly::zero();
            base.add_term(rest, c.clone());
            out = out + &base * &factor;
        }
        out
    }

    /// Numeric value with `value(symbol)` supplying each symbol.
    pub fn eval(&self, mut value: impl FnMut(&str) -> f64) -> f64 {
        let mut acc = 0.0;
        for (mono, c) in &self.terms {
            let mut t = ratio_to_f64(c);
            for (s, e) in mono {
                t *= value(s).powi(*e);
            }
            acc += t;
        }
        acc
    }

    fn add_term(&mut self, mono: Monomial, c: BigRational) {
        let mono = normalize(mono);
        let entry = self
            .terms
            .entry(mono.clone())
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }
}

fn ratio_to_f64(c: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
}

fn normalize(mono: Monomial) -> Monomial {
    let mut merged: BTreeMap<String, i32> = BTreeMap::new();
    for (s, e) in mono {
        *merged.entry(s).or_insert(0) += e;
    }
    merged.into_iter().filter(|(_, e)| *e != 0).collect()
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut m = ma.clone();
                m.extend(mb.iter().cloned());
                out.add_term(m, ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

/// Terms in canonical order, e.g. `-1/4 a2^2 x^2 + a2 + N^-1 a4 M2`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (mono, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || mono.is_empty() {
                parts.push(mag.to_string());
            }
            for (s, e) in mono {
                parts.push(if *e == 1 {
                    s.clone()
                } else {
                    format!("{s}^{e}")
                });
            }
            write!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_display() {
        let x = Poly::var("x");
        let a = Poly::var("a2");
        let p = (x.clone() + a.clone()).pow(2) - &x * &x;
        assert_eq!(p.to_string(), "2 a2 x + a2^2");
        let q = Poly::ratio(1, 4) * p.clone() - Poly::ratio(1, 4) * p;
        assert!(q.is_empty());
        assert_eq!(q.to_string(), "0");
        let n = Poly::power("N", -1) * Poly::var("N");
        assert_eq!(n, Poly::int(1));
    }

    #[test]
    fn substitution() {
        let p = Poly::var("M0") * Poly::power("N", -1) + Poly::var("M2");
        let s = p.substitute("M0", &Poly::var("N"));
        assert_eq!(s.to_string(), "1 + M2");
        let inv = Poly::power("y", -2).substitute("y", &Poly::var("z"));
        assert_eq!(inv, Poly::power("z", -2));
        assert_eq!(s.eval(|_| 3.0), 4.0);
    }
}
