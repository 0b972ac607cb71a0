//! Global moments, finite-N level density and the large-N resolvent density.

mod symbolic;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FreudError, Result};
use crate::ladder::moment_summand;
use crate::potential::Potential;
use crate::recurrence::RecurrenceTable;
use crate::scalar::Real;

pub use symbolic::{Monomial, Poly};

/// Relative band threshold for [`support_bands`].
pub const BAND_THRESHOLD: f64 = 1e-6;

/// Even moments `M_k` of the level density, with `M_0 = N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub n: u32,
    pub values: BTreeMap<usize, f64>,
}

impl MomentSet {
    pub fn new(n: u32) -> Self {
        MomentSet {
            n,
            values: BTreeMap::from([(0, n as f64)]),
        }
    }

    pub fn with(mut self, k: usize, value: f64) -> Self {
        self.values.insert(k, value);
        self
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(&k).copied()
    }

    /// `{"N": n, "M": {"2": ..., "4": ...}}` (without `M_0`).
    pub fn to_json(&self) -> String {
        let m: BTreeMap<String, f64> = self
            .values
            .iter()
            .filter(|(k, _)| **k > 0)
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        // numeric key order rather than string order
        let mut keys: Vec<(usize, String)> =
            m.keys().map(|k| (k.parse().unwrap(), k.clone())).collect();
        keys.sort();
        let mut body = String::new();
        for (i, (_, k)) in keys.iter().enumerate() {
            if i > 0 {
                body.push(',');
            }
            write!(body, "\"{k}\":{}", serde_json::Value::from(m[k])).unwrap();
        }
        format!("{{\"N\":{},\"M\":{{{body}}}}}", self.n)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            #[serde(rename = "N")]
            n: u32,
            #[serde(rename = "M")]
            m: BTreeMap<String, f64>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| FreudError::Parse(e.to_string()))?;
        let mut out = MomentSet::new(raw.n);
        for (k, v) in raw.m {
            let k: usize = k
                .parse()
                .map_err(|_| FreudError::Parse(format!("moment key {k:?} is not an integer")))?;
            out.values.insert(k, v);
        }
        Ok(out)
    }
}

/// `M_k = sum_{mu=0}^{N-1} C_mu` with `C_mu` the ladder summand of order `k`.
pub fn global_moment<T: Real>(t: &RecurrenceTable<T>, k: usize, n: u32) -> Result<T> {
    let summand = moment_summand(k)?;
    let need = n as usize - 1 + k / 2;
    if t.max_index() < need {
        return Err(FreudError::Range {
            index: need as i64,
            max: t.max_index(),
        });
    }
    let proto = &t.r[0];
    let mut acc = proto.lift(0.0);
    for mu in 0..n as i64 {
        acc += summand.eval(proto, |o| t.get(mu + o as i64))?;
    }
    Ok(acc)
}

/// Moments of the given even orders as f64.
pub fn moment_set<T: Real>(t: &RecurrenceTable<T>, orders: &[usize], n: u32) -> Result<MomentSet> {
    let mut out = MomentSet::new(n);
    for &k in orders {
        if k == 0 {
            continue;
        }
        out.values.insert(k, global_moment(t, k, n)?.to_f64());
    }
    Ok(out)
}

/// Table length needed for moments up to `max_order` at size `n`.
pub fn required_table_index(max_order: usize, n: u32) -> usize {
    n as usize - 1 + max_order / 2
}

/// Finite-N density `sum_{mu<N} q_mu(x)^2` evaluated through the weighted
/// orthonormal recursion, carried with a running log scale.
pub struct FiniteDensity {
    potential: Potential,
    sqrt_r: Vec<f64>,
    log_h0: f64,
}

impl FiniteDensity {
    pub fn new<T: Real>(t: &RecurrenceTable<T>, p: &Potential) -> Result<Self> {
        let n = p.n() as usize;
        if t.max_index() + 1 < n {
            return Err(FreudError::Range {
                index: n as i64 - 1,
                max: t.max_index(),
            });
        }
        Ok(FiniteDensity {
            potential: p.clone(),
            sqrt_r: t.r[..n].iter().map(|v| v.to_f64().sqrt()).collect(),
            log_h0: t.log_h[0].to_f64(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        const BIG: f64 = 1e150;
        let n = self.potential.n() as usize;
        let mut log_scale =
            -0.5 * (self.potential.n() as f64 * self.potential.eval(x) + self.log_h0);
        let (mut prev, mut cur) = (0.0f64, 1.0f64);
        let mut sum = 1.0f64;
        for mu in 0..n - 1 {
            let next = (x * cur - self.sqrt_r[mu] * prev) / self.sqrt_r[mu + 1];
            prev = cur;
            cur = next;
            if cur.abs() > BIG {
                prev /= BIG;
                cur /= BIG;
                sum /= BIG * BIG;
                log_scale += BIG.ln();
            }
            sum += cur * cur;
        }
        let v = sum * (2.0 * log_scale).exp();
        if v.is_finite() {
            v
        } else {
            (sum.ln() + 2.0 * log_scale).exp()
        }
    }
}

pub fn finite_density<T: Real>(t: &RecurrenceTable<T>, p: &Potential, x: f64) -> Result<f64> {
    Ok(FiniteDensity::new(t, p)?.eval(x))
}

/// `S(x) = (1/N) sum_k a_{2k} sum_{i even < 2k} x^{2k-2-i} M_i - V'(x)^2 / 4`,
/// so that `(pi rho / N)^2 = S` on the support.
pub fn resolvent_s(p: &Potential, m: &MomentSet, x: f64) -> Result<f64> {
    let n = p.n() as f64;
    let moments = required_moments(p, m)?;
    let mut acc = 0.0;
    for k in 1..=p.d() {
        let a = p.a(2 * k as u32);
        if a == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for i in (0..2 * k - 1).step_by(2) {
            inner += x.powi((2 * k - 2 - i) as i32) * moments[i / 2];
        }
        acc += a * inner;
    }
    let dv = p.derivative(x);
    Ok(acc / n - dv * dv / 4.0)
}

fn required_moments(p: &Potential, m: &MomentSet) -> Result<Vec<f64>> {
    (0..p.d())
        .map(|i| {
            if i == 0 {
                return Ok(p.n() as f64);
            }
            m.get(2 * i).ok_or_else(|| {
                FreudError::Input(format!(
                    "asymptotic density at d = {} needs M_{}",
                    p.d(),
                    2 * i
                ))
            })
        })
        .collect()
}

/// `rho(x) = (N / pi) sqrt(max(S(x), 0))`.
pub fn asymptotic_density(p: &Potential, m: &MomentSet, x: f64) -> Result<f64> {
    let s = resolvent_s(p, m, x)?;
    Ok(p.n() as f64 / std::f64::consts::PI * s.max(0.0).sqrt())
}

/// Symbolic `S(x)` for half-degree `d` in the symbols `x`, `a2..a{2d}`,
/// `M2..M{2d-2}` and `N` (with `M_0 = N` substituted).
pub fn resolvent_expansion(d: usize) -> Poly {
    let x = Poly::var("x");
    let inv_n = Poly::power("N", -1);
    let mut s = Poly::zero();
    let mut dv = Poly::zero();
    for k in 1..=d {
        let a = Poly::var(&format!("a{}", 2 * k));
        let mut inner = Poly::zero();
        for i in (0..2 * k - 1).step_by(2) {
            let moment = if i == 0 {
                Poly::var("N")
            } else {
                Poly::var(&format!("M{i}"))
            };
            inner = inner + x.pow((2 * k - 2 - i) as u32) * moment;
        }
        s = s + &(&a * &inner) * &inv_n;
        dv = dv + a * x.pow(2 * k as u32 - 1);
    }
    s - Poly::ratio(1, 4) * dv.pow(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Finite,
    Asymptotic,
}

impl DensityKind {
    pub fn label(self) -> &'static str {
        match self {
            DensityKind::Finite => "finite",
            DensityKind::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub kind: DensityKind,
    pub n: u32,
    pub samples: Vec<(f64, f64)>,
}

impl DensityCurve {
    pub fn finite<T: Real>(t: &RecurrenceTable<T>, p: &Potential, grid: &Grid) -> Result<Self> {
        let eval = FiniteDensity::new(t, p)?;
        Ok(DensityCurve {
            kind: DensityKind::Finite,
            n: p.n(),
            samples: grid.xs().map(|x| (x, eval.eval(x))).collect(),
        })
    }

    pub fn asymptotic(p: &Potential, m: &MomentSet, grid: &Grid) -> Result<Self> {
        let samples = grid
            .xs()
            .map(|x| asymptotic_density(p, m, x).map(|r| (x, r)))
            .collect::<Result<_>>()?;
        Ok(DensityCurve {
            kind: DensityKind::Asymptotic,
            n: p.n(),
            samples,
        })
    }

    /// CSV with header `x,rho,kind,N`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,rho,kind,N\n");
        self.append_csv_rows(&mut out);
        out
    }

    pub fn append_csv_rows(&self, out: &mut String) {
        for (x, r) in &self.samples {
            writeln!(out, "{x},{r},{},{}", self.kind.label(), self.n).unwrap();
        }
    }
}

/// Uniform grid `lo:hi:points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo || points < 2 {
            return Err(FreudError::Input(format!(
                "grid {lo}:{hi}:{points} needs lo < hi and at least 2 points"
            )));
        }
        Ok(Grid { lo, hi, points })
    }

    /// 1201 points over `[-X*, X*]` with `X*` the quadrature cutoff.
    pub fn default_for(p: &Potential) -> Self {
        let x = p.cutoff(53, 0);
        Grid {
            lo: -x,
            hi: x,
            points: 1201,
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        // symmetric grids stay exactly symmetric
        (0..self.points).map(move |i| {
            let j = self.points - 1 - i;
            if i == j {
                0.5 * (self.lo + self.hi)
            } else if i < j {
                self.lo + i as f64 * h
            } else {
                self.hi - j as f64 * h
            }
        })
    }
}

impl FromStr for Grid {
    type Err = FreudError;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || FreudError::Parse(format!("grid {s:?} is not lo:hi:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Grid::new(lo, hi, points)
    }
}

/// Maximal sample intervals where `rho > BAND_THRESHOLD * max(rho)`.
pub fn support_bands(curve: &DensityCurve) -> Vec<(f64, f64)> {
    let max = curve.samples.iter().map(|s| s.1).fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let cut = BAND_THRESHOLD * max;
    let mut bands = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for &(x, r) in &curve.samples {
        if r > cut {
            open = Some(match open {
                Some((a, _)) => (a, x),
                None => (x, x),
            });
        } else if let Some(b) = open.take() {
            bands.push(b);
        }
    }
    bands.extend(open);
    bands
}

/// Composite Simpson integral of uniformly spaced samples; an odd interval
/// count closes with the 3/8 rule.
pub fn simpson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(FreudError::Input(format!(
            "Simpson integration needs at least 3 samples, got {}",
            xs.len().min(ys.len())
        )));
    }
    let n = xs.len() - 1;
    let h = (xs[n] - xs[0]) / n as f64;
    let uniform = xs
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    if !uniform {
        return Err(FreudError::Input(
            "Simpson integration needs a uniform grid".into(),
        ));
    }
    let even_end = if n.is_multiple_of(2) { n } else { n - 3 };
    let mut acc = 0.0;
    let mut i = 0;
    while i < even_end {
        acc += h / 3.0 * (ys[i] + 4.0 * ys[i + 1] + ys[i + 2]);
        i += 2;
    }
    if even_end < n {
        let j = even_end;
        acc += 3.0 * h / 8.0 * (ys[j] + 3.0 * ys[j + 1] + 3.0 * ys[j + 2] + ys[j + 3]);
    }
    Ok(acc)
}

/// `int rho dx` over the sampled range.
pub fn density_norm(curve: &DensityCurve) -> Result<f64> {
    density_moment(curve, 0)
}

/// `int x^k rho dx` over the sampled range.
pub fn density_moment(curve: &DensityCurve, k: u32) -> Result<f64> {
    let xs: Vec<f64> = curve.samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = curve
        .samples
        .iter()
        .map(|s| s.1 * s.0.powi(k as i32))
        .collect();
    simpson(&xs, &ys)
}

/// `int |rho_a - rho_b| dx` for two curves on the same grid.
pub fn l1_distance(a: &DensityCurve, b: &DensityCurve) -> Result<f64> {
    if a.samples.len() != b.samples.len()
        || a.samples.iter().zip(&b.samples).any(|(p, q)| p.0 != q.0)
    {
        return Err(FreudError::Input(
            "curves are sampled on different grids".into(),
        ));
    }
    let xs: Vec<f64> = a.samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| (p.1 - q.1).abs())
        .collect();
    simpson(&xs, &ys)
}
