//! Even polynomial potentials `V(x) = sum_k a_{2k} x^{2k} / (2k)` and the
//! closed-form results that follow directly from their coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FreudError, Result};
use crate::scalar::Real;

/// Even polynomial potential of half-degree `d` together with the weight
/// scale `N` of `exp(-N V(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    /// `coeffs[k - 1]` holds `a_{2k}`.
    coeffs: Vec<f64>,
    n: u32,
}

impl Potential {
    /// Builds a potential from `[a_2, a_4, ..., a_{2d}]`.
    pub fn new(coeffs: Vec<f64>, n: u32) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(FreudError::InvalidPotential("d must be at least 1".into()));
        }
        if let Some(k) = coeffs.iter().position(|a| !a.is_finite()) {
            return Err(FreudError::InvalidPotential(format!(
                "coefficient a{} is not finite",
                2 * (k + 1)
            )));
        }
        let top = *coeffs.last().unwrap();
        if top <= 0.0 {
            return Err(FreudError::InvalidPotential(format!(
                "leading coefficient a{} = {top} must be positive",
                2 * coeffs.len()
            )));
        }
        if n < 1 {
            return Err(FreudError::InvalidPotential("N must be at least 1".into()));
        }
        Ok(Self { coeffs, n })
    }

    /// Builds a potential of half-degree `d` from `(order, a_order)` pairs.
    /// Orders that are not given are zero-filled.
    pub fn from_orders<I>(d: usize, orders: I, n: u32) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, f64)>,
    {
        if d == 0 {
            return Err(FreudError::InvalidPotential("d must be at least 1".into()));
        }
        let mut coeffs = vec![0.0; d];
        for (order, value) in orders {
            if order == 0 || order % 2 != 0 || order as usize > 2 * d {
                return Err(FreudError::InvalidPotential(format!(
                    "order {order} is not an even order in 2..={}",
                    2 * d
                )));
            }
            coeffs[order as usize / 2 - 1] = value;
        }
        Self::new(coeffs, n)
    }

    /// Half-degree `d`.
    pub fn d(&self) -> usize {
        self.coeffs.len()
    }

    /// Weight scale and ensemble dimension `N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `[a_2, a_4, ..., a_{2d}]`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient `a_order`; zero for orders beyond `2d`.
    pub fn a(&self, order: u32) -> f64 {
        if order == 0 || !order.is_multiple_of(2) {
            return 0.0;
        }
        self.coeffs
            .get(order as usize / 2 - 1)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(self.coeffs.clone(), n)
    }

    /// Copy with `a_order` replaced.
    pub fn with_coeff(&self, order: u32, value: f64) -> Result<Self> {
        let orders = (1..=self.d() as u32)
            .map(|k| (2 * k, if 2 * k == order { value } else { self.a(2 * k) }));
        if order == 0 || !order.is_multiple_of(2) || order as usize > 2 * self.d() {
            return Err(FreudError::InvalidPotential(format!(
                "order {order} out of range"
            )));
        }
        Self::from_orders(self.d(), orders, self.n)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = x * x;
        let mut pow = y;
        let mut acc = 0.0;
        for (k, a) in self.coeffs.iter().enumerate() {
            acc += a * pow / (2 * (k + 1)) as f64;
            pow *= y;
        }
        acc
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let y = x * x;
        let mut pow = x;
        let mut acc = 0.0;
        for a in &self.coeffs {
            acc += a * pow;
            pow *= y;
        }
        acc
    }

    /// `V(x)` in the arithmetic of `T`, at the precision of `x`.
    pub fn eval_real<T: Real>(&self, x: &T) -> T {
        let y = x.clone() * x.clone();
        // Horner in y: V = y * sum_k (a_{2k}/2k) y^{k-1}
        let mut acc = x.lift(0.0);
        for (k, a) in self.coeffs.iter().enumerate().rev() {
            acc = acc * y.clone() + x.lift(*a) / x.lift_int(2 * (k as i64 + 1));
        }
        acc * y
    }

    /// Nonnegative stationary points of `V`, ascending, always starting at 0.
    pub fn stationary_points(&self) -> Vec<f64> {
        // V'(x) = x Q(x^2) with Q(y) = sum_k a_{2k} y^{k-1}
        let q: Vec<f64> = self.coeffs.clone();
        let mut pts = vec![0.0];
        pts.extend(positive_roots(&q).into_iter().map(f64::sqrt));
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }

    /// Global minimum of `V` on the real line as `(x >= 0, V(x))`.
    pub fn minimum(&self) -> (f64, f64) {
        self.stationary_points()
            .into_iter()
            .map(|x| (x, self.eval(x)))
            .fold(
                (0.0, 0.0),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            )
    }

    /// Integration cutoff `X*`: the smallest point beyond every stationary
    /// point with `N (V(X*) - V_min) >= ln2 (bits + max_order log2 X* + 64)`.
    pub fn cutoff(&self, bits: u32, max_order: u32) -> f64 {
        let (_, vmin) = self.minimum();
        let n = self.n as f64;
        let need = |x: f64| {
            std::f64::consts::LN_2 * (bits as f64 + max_order as f64 * x.log2().max(0.0) + 64.0)
        };
        let ok = |x: f64| n * (self.eval(x) - vmin) >= need(x);
        let start = self
            .stationary_points()
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(1e-3);
        let mut hi = start * 1.0625 + 1e-3;
        while !ok(hi) {
            hi *= 1.25;
        }
        let mut lo = start;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} N={}", self.d(), self.n)?;
        for (k, a) in self.coeffs.iter().enumerate() {
            write!(f, " a{}={}", 2 * (k + 1), a)?;
        }
        Ok(())
    }
}

/// Positive real roots of `sum_i q[i] y^i`, ascending.
fn positive_roots(q: &[f64]) -> Vec<f64> {
    let deg = q.iter().rposition(|c| *c != 0.0).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let lead = q[deg];
    let bound = 1.0
        + q[..deg]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let eval = |y: f64| q[..=deg].iter().rev().fold(0.0, |acc, c| acc * y + c);
    let deriv = |y: f64| {
        q[1..=deg]
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, c)| acc * y + (i + 1) as f64 * c)
    };
    let samples = 20_000;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_y = 0.0;
    let mut prev_v = eval(0.0);
    let mut prev_d = deriv(0.0);
    for i in 1..=samples {
        let y = bound * i as f64 / samples as f64;
        let v = eval(y);
        let dv = deriv(y);
        if v == 0.0 {
            roots.push(y);
        } else if prev_v != 0.0 && (prev_v < 0.0) != (v < 0.0) {
            roots.push(bisect(&eval, prev_y, y));
        } else if (prev_d < 0.0) != (dv < 0.0) && prev_d != 0.0 {
            // touching root: the derivative changes sign where |Q| is tiny
            let ym = bisect(&deriv, prev_y, y);
            if eval(ym).abs() <= 1e-12 * (1.0 + q.iter().map(|c| c.abs()).sum::<f64>()) {
                roots.push(ym);
            }
        }
        prev_y = y;
        prev_v = v;
        prev_d = dv;
    }
    roots.retain(|r| *r > 0.0);
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn eval_potential(p: &Potential, x: f64) -> f64 {
    p.eval(x)
}

pub fn eval_potential_derivative(p: &Potential, x: f64) -> f64 {
    p.derivative(x)
}

/// Critical quartic coefficient of the sextic potential, where the outer
/// wells and the central well have equal depth.
pub fn critical_a4(a2: f64, a6: f64) -> Result<f64> {
    let product = a2 * a6;
    if !(product > 0.0) {
        return Err(FreudError::Domain(format!(
            "critical a4 needs a2*a6 > 0, got {product}"
        )));
    }
    Ok(-((48.0 / 9.0) * product).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `a4 < a4c`: two bands, then a transient, then a single band.
    TwoBandTransient,
    /// `a4 > a4c`: one band, then a transient, then a single band.
    OneBandTransient,
    /// `a4 = a4c` up to the classification tolerance.
    Critical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub a4c: f64,
    pub classification: Regime,
    pub detail: String,
}

/// Relative tolerance for `a4 == a4c`.
pub const CLASSIFICATION_TOLERANCE: f64 = 1e-9;

pub fn classify_regime(p: &Potential) -> Result<RegimeReport> {
    require_sextic(p)?;
    let a4 = p.a(4);
    let a4c = critical_a4(p.a(2), p.a(6))?;
    let tau = CLASSIFICATION_TOLERANCE * a4c.abs().max(1.0);
    let (classification, detail) = if a4 < a4c - tau {
        (
            Regime::TwoBandTransient,
            format!("a4 = {a4} < a4c = {a4c:.9}: outer wells deeper, two bands first"),
        )
    } else if a4 > a4c + tau {
        (
            Regime::OneBandTransient,
            format!("a4 = {a4} > a4c = {a4c:.9}: central well deeper, one band first"),
        )
    } else {
        (
            Regime::Critical,
            format!("a4 = {a4} at a4c = {a4c:.9}: all three wells level"),
        )
    };
    Ok(RegimeReport {
        a4c,
        classification,
        detail,
    })
}

/// Single-band value `r` at `lambda = mu/N`: the nonnegative real root of
/// `10 a6 r^3 + 3 a4 r^2 + a2 r - lambda = 0`, obtained by setting every
/// `R` of the sextic Freud equation equal to `r`.
///
/// When the cubic has several nonnegative roots the choice is ambiguous and
/// all of them are returned in the error.
pub fn single_band_value(p: &Potential, lambda: f64) -> Result<f64> {
    require_sextic(p)?;
    if !(lambda >= 0.0) {
        return Err(FreudError::Domain(format!(
            "lambda = {lambda} must be >= 0"
        )));
    }
    let c3 = 10.0 * p.a(6);
    let c2 = 3.0 * p.a(4);
    let c1 = p.a(2);
    let admissible: Vec<f64> = if lambda == 0.0 {
        // r = 0 is exact here; bisection would only land near it
        let disc = c2 * c2 - 4.0 * c3 * c1;
        let mut rs = vec![0.0];
        if disc >= 0.0 {
            let s = disc.sqrt();
            rs.extend(
                [(-c2 - s) / (2.0 * c3), (-c2 + s) / (2.0 * c3)]
                    .into_iter()
                    .filter(|r| *r > 0.0),
            );
            rs.dedup();
        }
        rs
    } else {
        cubic_real_roots(c3, c2, c1, -lambda)
            .into_iter()
            .filter(|r| *r >= 0.0)
            .collect()
    };
    match admissible.as_slice() {
        [r] => Ok(*r),
        [] => Err(FreudError::Domain(format!(
            "no nonnegative single-band root at lambda = {lambda}"
        ))),
        _ => Err(FreudError::Ambiguous { roots: admissible }),
    }
}

/// Real roots of `c3 r^3 + c2 r^2 + c1 r + c0` with `c3 > 0`, ascending.
/// Each monotone piece between the critical points is bracketed and bisected.
fn cubic_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let f = |r: f64| ((c3 * r + c2) * r + c1) * r + c0;
    let scale = 1.0
        + [c2, c1, c0]
            .iter()
            .map(|c| (c / c3).abs())
            .fold(0.0, f64::max);
    // critical points: 3 c3 r^2 + 2 c2 r + c1 = 0
    let disc = c2 * c2 - 3.0 * c3 * c1;
    let mut knots = vec![-scale];
    if disc > 0.0 {
        let s = disc.sqrt();
        let (r1, r2) = ((-c2 - s) / (3.0 * c3), (-c2 + s) / (3.0 * c3));
        knots.push(r1.min(r2));
        knots.push(r1.max(r2));
    }
    knots.push(scale);
    let tol = 1e-13 * scale;
    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
        }
        if fhi == 0.0 {
            roots.push(hi);
        } else if flo != 0.0 && (flo < 0.0) != (fhi < 0.0) {
            roots.push(bisect(&f, lo, hi));
        } else if fhi.abs() < tol * tol {
            roots.push(hi);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    roots
}

/// `A0 + A1` of the two-band regime of the sextic potential: the larger root
/// of `a6 s^2 + a4 s + a2 = 0`.
pub fn two_band_sum(p: &Potential) -> Result<f64> {
    require_sextic(p)?;
    let (a2, a4, a6) = (p.a(2), p.a(4), p.a(6));
    let disc = a4 * a4 - 4.0 * a2 * a6;
    if disc < 0.0 {
        return Err(FreudError::Domain(format!(
            "a4^2 - 4 a2 a6 = {disc} < 0: no two-band solution"
        )));
    }
    Ok((-a4 + disc.sqrt()) / (2.0 * a6))
}

fn require_sextic(p: &Potential) -> Result<()> {
    if p.d() != 3 {
        return Err(FreudError::UnsupportedDegree {
            expected: 3,
            got: p.d(),
        });
    }
    Ok(())
}
