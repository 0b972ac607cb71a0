//! Recurrence coefficients `R_mu = h_mu / h_{mu-1}` of the monic orthogonal
//! polynomials for `exp(-N V(x))`.
//!
//! The reference route is quadrature moments followed by the Chebyshev
//! algorithm, certified by repeating the map at half the working precision.
//! The Freud equations are then used as checks ([`freud_residual`]) and as a
//! forward recursion whose instability is measured against the reference
//! ([`freud_forward`]).

mod moments;
mod quadrature;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{FreudError, Result};
use crate::ladder::{freud_equation, LadderSum};
use crate::potential::Potential;
use crate::scalar::{rel_diff, Real};

pub use moments::{chebyshev, extend_moments, quadrature_moments, weight_moments, WeightMoments};
pub use quadrature::TanhSinh;

/// Relative agreement required between the full- and half-precision runs.
pub const CERTIFY_TOL: f64 = 1e-10;

/// Relative gap at which a forward Freud iterate counts as diverged.
pub const DIVERGENCE_TOL: f64 = 1e-6;

/// Environment variable that pins the working precision.
pub const PRECISION_ENV: &str = "FREUDLAB_PRECISION_BITS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    MomentOracle,
    FreudForward,
}

/// `R_0..R_M` and `ln h_0..ln h_M` with `R_0 = 0`.
#[derive(Debug, Clone)]
pub struct RecurrenceTable<T> {
    pub potential: Potential,
    pub r: Vec<T>,
    pub log_h: Vec<T>,
    pub precision_bits: u32,
    pub method: Method,
}

impl<T: Real> RecurrenceTable<T> {
    /// Largest index `M`.
    pub fn max_index(&self) -> usize {
        self.r.len() - 1
    }

    /// `R_j`, with `R_j = 0` for `j <= 0`.
    pub fn get(&self, j: i64) -> Result<T> {
        if j <= 0 {
            return Ok(self.r[0].lift(0.0));
        }
        self.r.get(j as usize).cloned().ok_or(FreudError::Range {
            index: j,
            max: self.max_index(),
        })
    }

    pub fn r_f64(&self) -> Vec<f64> {
        self.r.iter().map(Real::to_f64).collect()
    }

    /// Double-precision copy, e.g. for fast density sampling.
    pub fn to_f64(&self) -> RecurrenceTable<f64> {
        RecurrenceTable {
            potential: self.potential.clone(),
            r: self.r_f64(),
            log_h: self.log_h.iter().map(Real::to_f64).collect(),
            precision_bits: 53.min(self.precision_bits),
            method: self.method,
        }
    }

    /// Copy with every entry rounded to `bits`.
    pub fn round_to(&self, bits: u32) -> Self {
        RecurrenceTable {
            potential: self.potential.clone(),
            r: self.r.iter().map(|v| v.round_to(bits)).collect(),
            log_h: self.log_h.iter().map(|v| v.round_to(bits)).collect(),
            precision_bits: bits.min(self.precision_bits),
            method: self.method,
        }
    }

    /// Copy restricted to indices `0..=max_index`.
    pub fn truncated(&self, max_index: usize) -> Self {
        let end = (max_index + 1).min(self.r.len());
        RecurrenceTable {
            potential: self.potential.clone(),
            r: self.r[..end].to_vec(),
            log_h: self.log_h[..end].to_vec(),
            precision_bits: self.precision_bits,
            method: self.method,
        }
    }

    /// Copy with `R_index` replaced; `log_h` is rebuilt from the new ratios.
    pub fn with_value(&self, index: usize, value: T) -> Result<Self> {
        if index == 0 || index > self.max_index() {
            return Err(FreudError::Range {
                index: index as i64,
                max: self.max_index(),
            });
        }
        let mut out = self.clone();
        out.r[index] = value;
        for mu in index..out.r.len() {
            out.log_h[mu] = out.log_h[mu - 1].clone() + out.r[mu].ln();
        }
        Ok(out)
    }

    /// CSV with header `mu,R,log_h`, 20 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,R,log_h\n");
        for (mu, (r, lh)) in self.r.iter().zip(&self.log_h).enumerate() {
            writeln!(out, "{mu},{},{}", r.to_sci(20), lh.to_sci(20)).unwrap();
        }
        out
    }
}

/// Maps moments to `R_1..R_count`, certifying every entry by rerunning the
/// map from moments rounded to half the working precision.
pub fn moments_to_recurrence<T: Real>(
    m: &WeightMoments<T>,
    count: usize,
) -> Result<RecurrenceTable<T>> {
    if m.values.len() < count + 1 {
        return Err(FreudError::Input(format!(
            "moments reach order {}, the map to R_{count} needs order {}",
            m.max_order(),
            2 * count
        )));
    }
    let bits = m.values[0].precision();
    let moments = &m.values[..=count];
    let (r, log_h) = chebyshev(moments, count).map_err(|e| with_suggestion(e, bits))?;

    let coarse = m.at_precision(bits / 2);
    let (checked, reason) = match chebyshev(&coarse.values[..=count], count) {
        Ok((r_half, _)) => (r_half, None),
        Err(FreudError::Precision {
            certified_up_to, ..
        }) => {
            let upto = certified_up_to.unwrap_or(0);
            let (r_half, _) = chebyshev(&coarse.values[..=upto], upto)?;
            (
                r_half,
                Some(format!(
                    "half-precision run lost positivity at h_{}",
                    upto + 1
                )),
            )
        }
        Err(e) => return Err(e),
    };
    for mu in 1..=count {
        let ok = checked
            .get(mu)
            .map(|c| rel_diff(&r[mu], c) <= CERTIFY_TOL)
            .unwrap_or(false);
        if !ok {
            let reason = reason.unwrap_or_else(|| {
                format!(
                    "R_{mu} moves by {:.1e} between {} and {} bits",
                    rel_diff(&r[mu], &checked[mu]),
                    bits / 2,
                    bits
                )
            });
            return Err(FreudError::Precision {
                reason,
                suggested_bits: bits.saturating_mul(2),
                certified_up_to: Some(mu - 1),
            });
        }
    }
    Ok(RecurrenceTable {
        potential: m.potential().clone(),
        r,
        log_h,
        precision_bits: bits,
        method: Method::MomentOracle,
    })
}

fn with_suggestion(e: FreudError, bits: u32) -> FreudError {
    match e {
        FreudError::Precision {
            reason,
            certified_up_to,
            ..
        } => FreudError::Precision {
            reason,
            suggested_bits: bits.saturating_mul(2),
            certified_up_to,
        },
        other => other,
    }
}

/// Working precision attempts: `start`, doubled up to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionSchedule {
    pub start: u32,
    pub max: u32,
}

impl PrecisionSchedule {
    /// `max(256, 8 count)` bits, with up to two doublings.
    pub fn for_count(count: usize) -> Self {
        let start = (8 * count).max(256) as u32;
        PrecisionSchedule {
            start,
            max: start.saturating_mul(4),
        }
    }

    pub fn fixed(bits: u32) -> Self {
        PrecisionSchedule {
            start: bits,
            max: bits,
        }
    }

    /// Fixed precision from [`PRECISION_ENV`] when set, else [`Self::for_count`].
    pub fn from_env(count: usize) -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(v) => v.trim().parse::<u32>().map(Self::fixed).map_err(|_| {
                FreudError::Input(format!("{PRECISION_ENV}={v:?} is not a bit count"))
            }),
            Err(_) => Ok(Self::for_count(count)),
        }
    }
}

/// Reference table `R_0..R_count` for `p`.
pub fn oracle_table<T: Real>(
    p: &Potential,
    count: usize,
    schedule: PrecisionSchedule,
) -> Result<RecurrenceTable<T>> {
    let mut bits = schedule.start;
    loop {
        let attempt =
            weight_moments::<T>(p, 2 * count, bits).and_then(|m| moments_to_recurrence(&m, count));
        match attempt {
            Err(FreudError::Precision { .. }) if bits < schedule.max => {
                bits = bits.saturating_mul(2).min(schedule.max);
            }
            other => return other,
        }
    }
}

/// The generalized Freud equation of a potential, prepared for evaluation.
pub struct FreudSystem {
    terms: Vec<(f64, LadderSum)>,
    n: f64,
    d: usize,
}

impl FreudSystem {
    pub fn new(p: &Potential) -> Self {
        let terms = freud_equation(p.d())
            .into_iter()
            .map(|(order, s)| (p.a(order), s))
            .collect();
        FreudSystem {
            terms,
            n: p.n() as f64,
            d: p.d(),
        }
    }

    /// `(mu+1) - N sum_k a_{2k} eval(sum_k)` with `value(j)` giving `R_{mu+j}`.
    pub fn residual<T, F>(&self, proto: &T, mu: usize, mut value: F) -> Result<T>
    where
        T: Real,
        F: FnMut(i32) -> Result<T>,
    {
        let mut acc = proto.lift(0.0);
        for (a, s) in &self.terms {
            if *a == 0.0 {
                continue;
            }
            acc += proto.lift(*a) * s.eval(proto, &mut value)?;
        }
        Ok(proto.lift_int(mu as i64 + 1) - proto.lift(self.n) * acc)
    }
}

/// Residual of the Freud equation at `mu`.
pub fn freud_residual<T: Real>(t: &RecurrenceTable<T>, mu: usize) -> Result<T> {
    FreudSystem::new(&t.potential).residual(&t.r[0], mu, |o| t.get(mu as i64 + o as i64))
}

/// Residuals at every `mu` whose equation fits inside the table.
pub fn freud_residuals<T: Real>(t: &RecurrenceTable<T>) -> Vec<T> {
    let sys = FreudSystem::new(&t.potential);
    let last = t.max_index().saturating_sub(sys.d);
    (0..=last)
        .map(|mu| {
            sys.residual(&t.r[0], mu, |o| t.get(mu as i64 + o as i64))
                .expect("index inside table")
        })
        .collect()
}

/// Extends `seeds` to `R_count` by solving each Freud equation for its top
/// index. Returns the forward table and the first index whose value departs
/// from `seeds` by more than [`DIVERGENCE_TOL`] (or where the iteration
/// breaks down); `count` when neither happens.
pub fn freud_forward<T: Real>(
    p: &Potential,
    seeds: &RecurrenceTable<T>,
    count: usize,
) -> Result<(RecurrenceTable<T>, usize)> {
    let d = p.d();
    let n_seed = 2 * d - 2;
    if seeds.max_index() < n_seed {
        return Err(FreudError::Input(format!(
            "forward iteration needs seeds R_1..R_{n_seed}, table ends at R_{}",
            seeds.max_index()
        )));
    }
    let proto = seeds.r[0].lift(0.0);
    let zero = proto.clone();
    for (j, v) in seeds.r.iter().enumerate().take(n_seed + 1).skip(1) {
        if !(*v > zero) {
            return Err(FreudError::SingularStep { mu: j });
        }
    }
    let sys = FreudSystem::new(p);
    let top = proto.lift(p.n() as f64) * proto.lift(p.a(2 * d as u32));
    let mut r: Vec<T> = seeds.r[..=n_seed].to_vec();
    let mut divergence: Option<usize> = None;
    let mut mu = d - 1;
    while r.len() <= count {
        let target = mu + d;
        debug_assert_eq!(target, r.len());
        let rest = sys.residual(&proto, mu, |o| {
            let j = mu as i64 + o as i64;
            if j <= 0 || j as usize == target {
                Ok(zero.clone())
            } else {
                Ok(r[j as usize].clone())
            }
        })?;
        let mut coeff = top.clone();
        for j in 1..d {
            coeff *= r[mu + j].clone();
        }
        if coeff.is_zero() {
            return Err(FreudError::SingularStep { mu });
        }
        let next = rest / coeff;
        if !(next > zero) || !next.is_finite() {
            divergence.get_or_insert(target);
            break;
        }
        if divergence.is_none()
            && target <= seeds.max_index()
            && rel_diff(&next, &seeds.r[target]) > DIVERGENCE_TOL
        {
            divergence = Some(target);
        }
        r.push(next);
        mu += 1;
    }
    let mut log_h = vec![seeds.log_h[0].clone()];
    for j in 1..r.len() {
        let prev = log_h[j - 1].clone();
        log_h.push(prev + r[j].ln());
    }
    let table = RecurrenceTable {
        potential: p.clone(),
        r,
        log_h,
        precision_bits: proto.precision(),
        method: Method::FreudForward,
    };
    Ok((table, divergence.unwrap_or(count)))
}
