//! Tanh-sinh quadrature on finite panels, generic over the scalar type.
//!
//! Nodes are stored as distances from the nearer endpoint so that the
//! abscissae crowding the ends keep full relative precision.

use crate::error::{FreudError, Result};
use crate::scalar::Real;

const MAX_LEVEL: usize = 14;
const MIN_LEVEL: usize = 3;

/// One half of a symmetric node set: `(delta, weight)` for `t > 0` at odd
/// multiples of the level step (all multiples at level 0).
struct Level<T> {
    nodes: Vec<(T, T)>,
}

pub struct TanhSinh<T> {
    bits: u32,
    proto: T,
    t_max: f64,
    centre_weight: T,
    levels: Vec<Level<T>>,
}

impl<T: Real> TanhSinh<T> {
    pub fn new(bits: u32) -> Self {
        let proto = T::from_f64_prec(0.0, bits);
        let working = proto.precision();
        // weights below this cannot move the sum
        let floor = -((working as f64) + 40.0) * std::f64::consts::LN_2;
        let mut t_max = 1.0;
        while log_weight(t_max) > floor {
            t_max += 1.0;
        }
        let half = proto.lift(0.5);
        let c = proto.lift(std::f64::consts::FRAC_PI_2);
        TanhSinh {
            bits,
            t_max,
            centre_weight: c * half,
            proto,
            levels: Vec::new(),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    fn ensure_level(&mut self, l: usize) {
        while self.levels.len() <= l {
            let built = self.build(self.levels.len());
            self.levels.push(built);
        }
    }

    fn build(&self, l: usize) -> Level<T> {
        let p = &self.proto;
        let c = p.lift(std::f64::consts::FRAC_PI_2);
        let one = p.lift(1.0);
        let two = p.lift(2.0);
        let h = p.lift(0.5f64.powi(l as i32));
        let (start, stride) = if l == 0 { (1usize, 1usize) } else { (1, 2) };
        let limit = (self.t_max * f64::from(1u32 << l)) as usize;
        let mut nodes = Vec::new();
        let mut k = start;
        while k <= limit {
            let t = h.clone() * p.lift_int(k as i64);
            let et = t.exp();
            let inv = one.clone() / et.clone();
            let sinh = (et.clone() - inv.clone()) / two.clone();
            let cosh = (et + inv) / two.clone();
            let s = c.clone() * sinh;
            let u = (two.clone() * s).exp();
            let delta = one.clone() / (one.clone() + u);
            let w = two.clone() * c.clone() * cosh * delta.clone() * (one.clone() - delta.clone());
            nodes.push((delta, w));
            k += stride;
        }
        Level { nodes }
    }

    /// Integrates the vector-valued `f` over `[a, b]`, refining until every
    /// component has converged to the working precision.
    pub fn integrate<F>(&mut self, a: &T, b: &T, dim: usize, mut f: F) -> Result<Vec<T>>
    where
        F: FnMut(&T) -> Vec<T>,
    {
        let width = b.clone() - a.clone();
        let zero = self.proto.lift(0.0);
        let tol = 0.5f64.powi((self.proto.precision() / 2 + 8) as i32);

        // level 0: centre plus integer nodes
        let mid = (a.clone() + b.clone()) / self.proto.lift(2.0);
        let mut raw: Vec<T> = f(&mid)
            .into_iter()
            .map(|v| v * self.centre_weight.clone())
            .collect();
        debug_assert_eq!(raw.len(), dim);
        let mut prev: Option<Vec<T>> = None;
        let mut h = 1.0f64;
        for l in 0..=MAX_LEVEL {
            let level_sum = {
                self.ensure_level(l);
                let mut acc = vec![zero.clone(); dim];
                for (delta, w) in &self.levels[l].nodes {
                    let off = width.clone() * delta.clone();
                    let left = f(&(a.clone() + off.clone()));
                    let right = f(&(b.clone() - off));
                    for (i, (lv, rv)) in left.into_iter().zip(right).enumerate() {
                        acc[i] += (lv + rv) * w.clone();
                    }
                }
                acc
            };
            for (r, s) in raw.iter_mut().zip(level_sum) {
                *r += s;
            }
            if l > 0 {
                h *= 0.5;
            }
            let hv = self.proto.lift(h);
            let current: Vec<T> = raw
                .iter()
                .map(|r| r.clone() * hv.clone() * width.clone())
                .collect();
            if let Some(prev) = &prev {
                let converged = l >= MIN_LEVEL
                    && current.iter().zip(prev).all(|(c, p)| {
                        let diff = (c.clone() - p.clone()).abs();
                        let scale = c.abs();
                        scale.is_zero() && diff.is_zero() || (diff / scale).to_f64() <= tol
                    });
                if converged {
                    return Ok(current);
                }
            }
            prev = Some(current);
        }
        Err(FreudError::Precision {
            reason: format!(
                "tanh-sinh quadrature did not converge after {MAX_LEVEL} levels at {} bits",
                self.bits
            ),
            suggested_bits: self.bits.saturating_mul(2),
            certified_up_to: None,
        })
    }
}

/// `ln w(t)` in f64 for the truncation search.
fn log_weight(t: f64) -> f64 {
    let c = std::f64::consts::FRAC_PI_2;
    let s = c * t.sinh();
    // w = 2c cosh(t) u/(1+u)^2 ~ 2c cosh(t) e^{-2s}
    (2.0 * c * t.cosh()).ln() - 2.0 * s
}
