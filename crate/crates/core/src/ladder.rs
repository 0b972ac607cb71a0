//! Weighted up/down paths on the Jacobi ladder.
//!
//! Applying `x P_j = P_{j+1} + R_j P_{j-1}` repeatedly to `P_{mu+from}` and
//! reading off the coefficient of `P_{mu+to}` gives a polynomial in the
//! `R_{mu+j}`: every up step contributes 1, every down step taken from level
//! `mu+j` contributes `R_{mu+j}`. These sums carry both the generalized Freud
//! equations and the moment formulas.
//!
//! Monomials are generated without a lower boundary. Evaluation sets
//! `R_j = 0` for `j <= 0`, which removes exactly the paths that would step
//! below level 0.

mod latex;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FreudError, Result};
use crate::scalar::Real;

pub use latex::parse_latex;

/// Product `coeff * prod_j R_{mu + offsets[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathMonomial {
    pub coeff: BigUint,
    /// Sorted ascending; repeated entries are powers.
    pub offsets: Vec<i32>,
}

impl PathMonomial {
    pub fn degree(&self) -> usize {
        self.offsets.len()
    }

    /// `(offset, power)` pairs in ascending offset order.
    pub fn powers(&self) -> Vec<(i32, u32)> {
        let mut out: Vec<(i32, u32)> = Vec::new();
        for &o in &self.offsets {
            match out.last_mut() {
                Some((last, p)) if *last == o => *p += 1,
                _ => out.push((o, 1)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SumKind {
    /// Level `mu + 1` to level `mu`.
    #[serde(rename = "offdiag")]
    OffDiagonal,
    /// Level `mu` back to level `mu`.
    #[serde(rename = "diag")]
    Diagonal,
}

/// Canonical polynomial form: offsets multiset to multiplicity.
pub type Terms = BTreeMap<Vec<i32>, BigUint>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderSum {
    pub kind: SumKind,
    /// Number of ladder steps.
    pub length: usize,
    pub monomials: Vec<PathMonomial>,
}

impl LadderSum {
    pub fn from_terms(kind: SumKind, length: usize, terms: Terms) -> Self {
        let monomials = terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(offsets, coeff)| PathMonomial { coeff, offsets })
            .collect();
        LadderSum {
            kind,
            length,
            monomials,
        }
    }

    pub fn empty(kind: SumKind, length: usize) -> Self {
        LadderSum {
            kind,
            length,
            monomials: Vec::new(),
        }
    }

    /// Number of distinct monomials.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Total multiplicity, i.e. the number of paths.
    pub fn path_count(&self) -> BigUint {
        self.monomials.iter().map(|m| &m.coeff).sum()
    }

    pub fn terms(&self) -> Terms {
        let mut terms = Terms::new();
        for m in &self.monomials {
            let mut offs = m.offsets.clone();
            offs.sort_unstable();
            *terms.entry(offs).or_insert_with(BigUint::zero) += &m.coeff;
        }
        terms
    }

    pub fn is_canonical(&self) -> bool {
        self.monomials
            .windows(2)
            .all(|w| w[0].offsets < w[1].offsets)
            && self
                .monomials
                .iter()
                .all(|m| !m.coeff.is_zero() && m.offsets.windows(2).all(|w| w[0] <= w[1]))
    }

    /// Evaluates the sum with `value(j)` supplying `R_{mu+j}`.
    pub fn eval<T, F>(&self, zero: &T, mut value: F) -> Result<T>
    where
        T: Real,
        F: FnMut(i32) -> Result<T>,
    {
        let mut acc = zero.lift(0.0);
        for m in &self.monomials {
            let mut term = zero.lift_biguint(&m.coeff);
            for &o in &m.offsets {
                let r = value(o)?;
                if r.is_zero() {
                    term = zero.lift(0.0);
                    break;
                }
                term *= r;
            }
            acc += term;
        }
        Ok(acc)
    }
}

/// Sum over all up/down sequences of `length` steps from level `mu+from` to
/// level `mu+to`. Unreachable targets and parity mismatches give an empty sum.
pub fn transfer_weights(length: usize, from_offset: i32, to_offset: i32) -> LadderSum {
    let kind = if from_offset == to_offset {
        SumKind::Diagonal
    } else {
        SumKind::OffDiagonal
    };
    let gap = (from_offset - to_offset).unsigned_abs() as usize;
    if length == 0 || gap > length || !(length - gap).is_multiple_of(2) {
        return LadderSum::empty(kind, length);
    }

    // level -> partial polynomial of the paths that currently end there
    let mut frontier: BTreeMap<i32, Terms> = BTreeMap::new();
    frontier.insert(from_offset, Terms::from([(Vec::new(), BigUint::one())]));
    for step in 0..length {
        let remaining = (length - step - 1) as i64;
        let mut next: BTreeMap<i32, Terms> = BTreeMap::new();
        for (level, terms) in frontier {
            for (target, down) in [(level + 1, false), (level - 1, true)] {
                if (target as i64 - to_offset as i64).abs() > remaining {
                    continue;
                }
                let slot = next.entry(target).or_default();
                for (offs, c) in &terms {
                    let key = if down {
                        let mut k = offs.clone();
                        let pos = k.partition_point(|&o| o <= level);
                        k.insert(pos, level);
                        k
                    } else {
                        offs.clone()
                    };
                    *slot.entry(key).or_insert_with(BigUint::zero) += c;
                }
            }
        }
        frontier = next;
    }
    let terms = frontier.remove(&to_offset).unwrap_or_default();
    LadderSum::from_terms(kind, length, terms)
}

/// Generalized Freud equation of half-degree `d`:
/// `mu + 1 = N sum_k a_{2k} eval(sum_k)` with `sum_k = transfer_weights(2k-1, +1, 0)`.
pub fn freud_equation(d: usize) -> Vec<(u32, LadderSum)> {
    (1..=d)
        .map(|k| (2 * k as u32, transfer_weights(2 * k - 1, 1, 0)))
        .collect()
}

/// Summand `C_mu` of the global moment `M_k = sum_{mu=0}^{N-1} C_mu`.
pub fn moment_summand(k: usize) -> Result<LadderSum> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(FreudError::Input(format!(
            "moment order {k} must be even and >= 2 (odd moments vanish)"
        )));
    }
    Ok(transfer_weights(k, 0, 0))
}

pub fn canonicalize(s: &LadderSum) -> LadderSum {
    LadderSum::from_terms(s.kind, s.length, s.terms())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Latex,
    Json,
}

impl std::str::FromStr for Format {
    type Err = FreudError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(FreudError::Input(format!("unknown format {other:?}"))),
        }
    }
}

pub fn render(s: &LadderSum, format: Format) -> String {
    match format {
        Format::Latex => render_latex(s),
        Format::Json => serde_json::to_string(&JsonSum::from(s)).expect("serializable"),
    }
}

/// `R_{\mu}`, `R_{\mu+2}`, `R_{\mu-1}`.
pub fn latex_symbol(offset: i32) -> String {
    match offset {
        0 => r"R_{\mu}".to_string(),
        o if o > 0 => format!(r"R_{{\mu+{o}}}"),
        o => format!(r"R_{{\mu-{}}}", -o),
    }
}

fn render_latex(s: &LadderSum) -> String {
    if s.monomials.is_empty() {
        return "0".into();
    }
    let canon = if s.is_canonical() {
        s.clone()
    } else {
        canonicalize(s)
    };
    let mut out = String::new();
    for (i, m) in canon.monomials.iter().enumerate() {
        if i > 0 {
            out.push('+');
        }
        if !m.coeff.is_one() || m.offsets.is_empty() {
            write!(out, "{}", m.coeff).unwrap();
        }
        for (o, p) in m.powers() {
            out.push_str(&latex_symbol(o));
            match p {
                1 => {}
                2..=9 => write!(out, "^{p}").unwrap(),
                _ => write!(out, "^{{{p}}}").unwrap(),
            }
        }
    }
    out
}

/// LaTeX of the full Freud equation of half-degree `d`.
pub fn render_freud_equation(d: usize) -> String {
    render_equation_terms(&freud_equation(d))
}

/// `\mu+1=N\left[a_{2}\left(...\right)+a_{4}\left(...\right)+...\right]`.
pub fn render_equation_terms(terms: &[(u32, LadderSum)]) -> String {
    let body: Vec<String> = terms
        .iter()
        .map(|(order, s)| format!(r"a_{{{order}}}\left({}\right)", render_latex(s)))
        .collect();
    format!(r"\mu+1=N\left[{}\right]", body.join("+"))
}

/// JSON form of the Freud equation: `[{"order": 2k, "sum": {...}}, ...]`.
pub fn freud_equation_json(d: usize) -> String {
    let items: Vec<serde_json::Value> = freud_equation(d)
        .iter()
        .map(|(order, s)| {
            serde_json::json!({
                "order": order,
                "sum": serde_json::to_value(JsonSum::from(s)).expect("serializable"),
            })
        })
        .collect();
    serde_json::to_string(&items).expect("serializable")
}

/// Parses the JSON rendering back into a canonical sum.
pub fn from_json(text: &str) -> Result<LadderSum> {
    let raw: JsonSum = serde_json::from_str(text).map_err(|e| FreudError::Parse(e.to_string()))?;
    let mut terms = Terms::new();
    for t in raw.terms {
        let coeff: BigUint = t
            .coeff
            .to_string()
            .parse()
            .map_err(|_| FreudError::Parse(format!("bad coefficient {}", t.coeff)))?;
        if coeff.is_zero() {
            return Err(FreudError::Parse("zero coefficient".into()));
        }
        let mut offs = t.offsets;
        offs.sort_unstable();
        *terms.entry(offs).or_insert_with(BigUint::zero) += coeff;
    }
    Ok(LadderSum::from_terms(raw.kind, raw.length, terms))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonSum {
    kind: SumKind,
    length: usize,
    terms: Vec<JsonTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonTerm {
    coeff: serde_json::Number,
    offsets: Vec<i32>,
}

impl From<&LadderSum> for JsonSum {
    fn from(s: &LadderSum) -> Self {
        let canon = canonicalize(s);
        JsonSum {
            kind: canon.kind,
            length: canon.length,
            terms: canon
                .monomials
                .into_iter()
                .map(|m| JsonTerm {
                    coeff: m.coeff.to_string().parse().expect("integer literal"),
                    offsets: m.offsets,
                })
                .collect(),
        }
    }
}
