//! Power moments of `exp(-N V(x))` and the moment-to-recurrence map.

use crate::error::{FreudError, Result};
use crate::potential::Potential;
use crate::recurrence::quadrature::TanhSinh;
use crate::scalar::Real;

/// Even power moments `m_0, m_2, ..., m_{2K}` (odd moments vanish).
///
/// Only `m_0 .. m_{2d-2}` come from quadrature; the rest follow exactly from
/// integrating `(x^{j+1} e^{-NV})'` by parts:
/// `(j+1) m_j = N sum_k a_{2k} m_{j+2k}`.
#[derive(Debug, Clone)]
pub struct WeightMoments<T> {
    /// `values[i]` is `m_{2i}`.
    pub values: Vec<T>,
    pub precision_bits: u32,
    potential: Potential,
    base: Vec<T>,
}

impl<T: Real> WeightMoments<T> {
    /// `m_order`; zero for odd orders.
    pub fn get(&self, order: usize) -> Option<T> {
        if order % 2 == 1 {
            return self.values.get(order / 2).map(|v| v.lift(0.0));
        }
        self.values.get(order / 2).cloned()
    }

    pub fn max_order(&self) -> usize {
        2 * (self.values.len() - 1)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Same moments rebuilt from the quadrature values rounded to `bits`.
    pub fn at_precision(&self, bits: u32) -> WeightMoments<T> {
        let base: Vec<T> = self.base.iter().map(|v| v.round_to(bits)).collect();
        let values = extend_moments(&self.potential, &base, self.max_order());
        WeightMoments {
            values,
            precision_bits: bits,
            potential: self.potential.clone(),
            base,
        }
    }
}

/// `m_j = int x^j exp(-N V(x)) dx` for even `j <= max_order`.
pub fn weight_moments<T: Real>(
    p: &Potential,
    max_order: usize,
    precision_bits: u32,
) -> Result<WeightMoments<T>> {
    let d = p.d();
    let base_orders: Vec<usize> = (0..d).map(|i| 2 * i).collect();
    let base = quadrature_moments::<T>(p, &base_orders, precision_bits)?;
    let values = extend_moments(p, &base, max_order);
    Ok(WeightMoments {
        values,
        precision_bits,
        potential: p.clone(),
        base,
    })
}

/// Direct quadrature of the listed (even, ascending) moments, integrating over
/// `[0, X*]` split at the stationary points of `V` and doubling.
pub fn quadrature_moments<T: Real>(
    p: &Potential,
    orders: &[usize],
    precision_bits: u32,
) -> Result<Vec<T>> {
    if let Some(&odd) = orders.iter().find(|&&o| o % 2 == 1) {
        return Err(FreudError::Input(format!(
            "odd moment order {odd} requested; odd moments vanish"
        )));
    }
    if orders.windows(2).any(|w| w[0] > w[1]) {
        return Err(FreudError::Input("moment orders must be ascending".into()));
    }
    let proto = T::from_f64_prec(0.0, precision_bits);
    let bits = proto.precision();
    if bits < 53 {
        return Err(FreudError::Precision {
            reason: format!("{bits} bits cannot resolve the weight"),
            suggested_bits: 53,
            certified_up_to: None,
        });
    }
    let n = p.n() as f64;
    let (_, vmin) = p.minimum();
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let x_star = p.cutoff(bits, max_order as u32);
    // peak value exp(-N V_min) and largest moment must fit the exponent range
    let log2_scale = -n * vmin / std::f64::consts::LN_2;
    let log2_moment = log2_scale + max_order as f64 * x_star.log2().max(0.0) + x_star.log2();
    let emax = T::max_exponent2() as f64;
    if log2_scale.abs() > emax || log2_moment > emax {
        return Err(FreudError::Precision {
            reason: format!(
                "dynamic range 2^{:.0} of the weight exceeds the scalar exponent range 2^{emax:.0}",
                log2_scale.abs().max(log2_moment)
            ),
            suggested_bits: bits,
            certified_up_to: None,
        });
    }

    let mut cuts = p.stationary_points();
    cuts.push(x_star);
    let nv = proto.lift(n);
    let vmin_t = proto.lift(vmin);
    let integrand = |x: &T| -> Vec<T> {
        let w = (-(nv.clone() * (p.eval_real(x) - vmin_t.clone()))).exp();
        let x2 = x.clone() * x.clone();
        let mut out = Vec::with_capacity(orders.len());
        let mut pow = proto.lift(1.0);
        let mut at = 0;
        for &o in orders {
            while at < o {
                pow *= x2.clone();
                at += 2;
            }
            out.push(w.clone() * pow.clone());
        }
        out
    };

    let mut rule = TanhSinh::<T>::new(bits);
    let mut total = vec![proto.lift(0.0); orders.len()];
    for pair in cuts.windows(2) {
        let (a, b) = (proto.lift(pair[0]), proto.lift(pair[1]));
        let part = rule.integrate(&a, &b, orders.len(), &integrand)?;
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    let scale = (nv * proto.lift(-vmin)).exp() * proto.lift(2.0);
    Ok(total.into_iter().map(|v| v * scale.clone()).collect())
}

/// Extends `m_0 .. m_{2d-2}` to all even orders up to `max_order`.
pub fn extend_moments<T: Real>(p: &Potential, base: &[T], max_order: usize) -> Vec<T> {
    let d = p.d();
    let proto = base[0].clone();
    let count = max_order / 2 + 1;
    let mut m: Vec<T> = base.iter().take(count).cloned().collect();
    let n = proto.lift(p.n() as f64);
    let a: Vec<T> = p.coeffs().iter().map(|&c| proto.lift(c)).collect();
    let top = n.clone() * a[d - 1].clone();
    while m.len() < count {
        // m_{j+2d} from j = 2(len - d)
        let i = m.len() - d;
        let j = 2 * i;
        let mut acc = proto.lift_int(j as i64 + 1) * m[i].clone();
        for k in 1..d {
            acc -= n.clone() * a[k - 1].clone() * m[i + k].clone();
        }
        m.push(acc / top.clone());
    }
    m
}

/// Chebyshev algorithm for a symmetric weight: returns `R_1..R_count`
/// (with `R_0 = 0` prepended) and `ln h_0..ln h_count`.
pub fn chebyshev<T: Real>(moments: &[T], count: usize) -> Result<(Vec<T>, Vec<T>)> {
    if moments.len() < count + 1 {
        return Err(FreudError::Input(format!(
            "{} moments cover order {}, need order {}",
            moments.len(),
            2 * (moments.len().max(1) - 1),
            2 * count
        )));
    }
    let proto = moments[0].clone();
    let zero = proto.lift(0.0);
    let width = 2 * count + 1;
    // sigma_{k,l} = int P_k x^l w, nonzero only for k + l even
    let mut prev2 = vec![zero.clone(); width];
    let mut prev: Vec<T> = (0..width)
        .map(|l| {
            if l % 2 == 0 {
                moments[l / 2].clone()
            } else {
                zero.clone()
            }
        })
        .collect();
    if !(prev[0] > zero) {
        return Err(not_positive(0));
    }
    let mut r = vec![zero.clone()];
    let mut log_h = vec![prev[0].ln()];
    for k in 1..=count {
        let mut cur = vec![zero.clone(); width];
        let r_prev = r[k - 1].clone();
        let mut l = k;
        while l + k < width {
            let mut v = prev[l + 1].clone();
            if k >= 2 {
                v -= r_prev.clone() * prev2[l].clone();
            }
            cur[l] = v;
            l += 2;
        }
        let hk = cur[k].clone();
        if !(hk > zero) || !hk.is_finite() {
            return Err(not_positive(k));
        }
        r.push(hk.clone() / prev[k - 1].clone());
        log_h.push(hk.ln());
        prev2 = prev;
        prev = cur;
    }
    Ok((r, log_h))
}

fn not_positive(k: usize) -> FreudError {
    FreudError::Precision {
        reason: format!("norm h_{k} lost positivity in the moment map"),
        suggested_bits: 0,
        certified_up_to: k.checked_sub(1),
    }
}
