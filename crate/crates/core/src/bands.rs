//! Pattern analysis of `R_mu` sequences: residue bands, regime segments,
//! two-band fits and the transient-sum bound.

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{FreudError, Result};
use crate::potential::{two_band_sum, Potential};
use crate::recurrence::{oracle_table, PrecisionSchedule, RecurrenceTable};
use crate::scalar::{Mp, Real};

/// `bands[r]` holds `(mu, R_mu)` for `mu = r (mod modulus)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueBands {
    pub modulus: usize,
    pub bands: Vec<Vec<(usize, f64)>>,
}

impl ResidueBands {
    /// Reassembles the original sequence.
    pub fn interleave(&self) -> Vec<f64> {
        let total: usize = self.bands.iter().map(Vec::len).sum();
        let mut out = vec![f64::NAN; total];
        for band in &self.bands {
            for &(mu, v) in band {
                out[mu] = v;
            }
        }
        out
    }

    /// CSV `mu,residue,R` in increasing `mu`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,residue,R\n");
        for (mu, v) in self.interleave().into_iter().enumerate() {
            writeln!(out, "{mu},{},{v}", mu % self.modulus).unwrap();
        }
        out
    }
}

pub fn residue_split<T: Real>(t: &RecurrenceTable<T>, m: usize) -> Result<ResidueBands> {
    split_values(&t.r_f64(), m)
}

pub fn split_values(r: &[f64], m: usize) -> Result<ResidueBands> {
    if m == 0 {
        return Err(FreudError::Input("modulus must be at least 1".into()));
    }
    let mut bands = vec![Vec::new(); m];
    for (mu, &v) in r.iter().enumerate() {
        bands[mu % m].push((mu, v));
    }
    Ok(ResidueBands { modulus: m, bands })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    OneBand,
    TwoBand,
    Transient,
    Converged,
}

/// Inclusive index range `start..=end` sharing one label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub label: Label,
}

/// Relative thresholds of [`detect_structure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Largest residue-band deviation, relative to the window mean, that
    /// still counts as a single band.
    pub one_band: f64,
    /// Required ratio of parity-cluster separation to within-cluster spread.
    pub two_band: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            one_band: 0.01,
            two_band: 10.0,
        }
    }
}

pub fn detect_structure<T: Real>(
    t: &RecurrenceTable<T>,
    m: usize,
    window: usize,
) -> Result<Vec<Segment>> {
    detect_structure_with(&t.r_f64(), m, window, Thresholds::default())
}

/// Labels consecutive windows of `R_1, R_2, ...` and merges equal neighbours.
/// A single-band window after any other pattern is labelled `Converged`.
pub fn detect_structure_with(
    r: &[f64],
    m: usize,
    window: usize,
    th: Thresholds,
) -> Result<Vec<Segment>> {
    if m == 0 || window < 2 * m {
        return Err(FreudError::Input(format!(
            "window {window} must be at least twice the modulus {m}"
        )));
    }
    let values = r.get(1..).unwrap_or(&[]);
    if values.len() < window {
        return Err(FreudError::Input(format!(
            "table holds {} coefficients, shorter than the window {window}",
            values.len()
        )));
    }
    let mut segments: Vec<Segment> = Vec::new();
    let mut seen_other = false;
    let mut start = 1;
    while start + window <= r.len() {
        let mut end = start + window;
        if r.len() - end < window {
            end = r.len();
        }
        let label = match classify_window(&r[start..end], start, m, th) {
            Label::OneBand if seen_other => Label::Converged,
            Label::OneBand => Label::OneBand,
            other => {
                seen_other = true;
                other
            }
        };
        match segments.last_mut() {
            Some(s) if s.label == label => s.end = end - 1,
            _ => segments.push(Segment {
                start,
                end: end - 1,
                label,
            }),
        }
        start = end;
    }
    Ok(segments)
}

fn classify_window(w: &[f64], first_mu: usize, m: usize, th: Thresholds) -> Label {
    let mus: Vec<f64> = (0..w.len()).map(|i| (first_mu + i) as f64).collect();
    let grand = mean(w);
    if grand.abs() > 0.0 {
        // residue-band means after removing the window's linear trend
        let resid = detrend(&mus, w);
        let worst = (0..m)
            .map(|r| {
                let band: Vec<f64> = resid
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (first_mu + i) % m == r)
                    .map(|(_, v)| *v)
                    .collect();
                mean(&band).abs()
            })
            .fold(0.0, f64::max);
        if worst < th.one_band * grand.abs() {
            return Label::OneBand;
        }
    }
    if parity_separated(w, first_mu, th.two_band) {
        return Label::TwoBand;
    }
    Label::Transient
}

/// Parity clusters whose gap exceeds `ratio` times their internal spread.
fn parity_separated(w: &[f64], first_mu: usize, ratio: f64) -> bool {
    let (even, odd) = parity_split(w, first_mu);
    if even.1.len() < 2 || odd.1.len() < 2 {
        return false;
    }
    let gap = (mean(&even.1) - mean(&odd.1)).abs();
    let spread = cluster_spread(&even).max(cluster_spread(&odd));
    gap > ratio * spread
}

type Cluster = (Vec<f64>, Vec<f64>);

fn parity_split(w: &[f64], first_mu: usize) -> (Cluster, Cluster) {
    let mut even = (Vec::new(), Vec::new());
    let mut odd = (Vec::new(), Vec::new());
    for (i, &v) in w.iter().enumerate() {
        let mu = first_mu + i;
        let slot = if mu.is_multiple_of(2) {
            &mut even
        } else {
            &mut odd
        };
        slot.0.push(mu as f64);
        slot.1.push(v);
    }
    (even, odd)
}

/// Largest deviation from the cluster's own linear trend.
fn cluster_spread(c: &Cluster) -> f64 {
    detrend(&c.0, &c.1)
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Least-squares line `(intercept, slope)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

fn detrend(x: &[f64], y: &[f64]) -> Vec<f64> {
    let (c, s) = linear_fit(x, y);
    x.iter().zip(y).map(|(a, b)| b - (c + s * a)).collect()
}

/// Mean upper and lower parity values `(A0, A1)` over `range`, skipping the
/// first `2d` indices.
pub fn two_band_fit<T: Real>(t: &RecurrenceTable<T>, range: Range<usize>) -> Result<(f64, f64)> {
    let skip = 2 * t.potential.d();
    let start = range.start.max(skip);
    let end = range.end.min(t.max_index() + 1);
    if end < start + 4 {
        return Err(FreudError::Fit(format!(
            "range {start}..{end} holds fewer than 4 usable coefficients"
        )));
    }
    let r = t.r_f64();
    let w = &r[start..end];
    let (even, odd) = parity_split(w, start);
    let (me, mo) = (mean(&even.1), mean(&odd.1));
    let spread = |c: &Cluster| {
        let mu = mean(&c.1);
        c.1.iter().map(|v| (v - mu).abs()).fold(0.0, f64::max)
    };
    let within = spread(&even).max(spread(&odd));
    let gap = (me - mo).abs();
    if !(gap > Thresholds::default().two_band * within) {
        return Err(FreudError::Fit(format!(
            "no two-band pattern on {start}..{end}: gap {gap:.3e}, within-band spread {within:.3e}"
        )));
    }
    Ok((me.max(mo), me.min(mo)))
}

/// Index range used by the `A_1` scaling probes.
pub const A1_FIT_RANGE: Range<usize> = 6..14;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub exponent_n: f64,
    pub exponent_a4: f64,
    /// `(N, A0, A1)` for each size.
    pub by_n: Vec<(u32, f64, f64)>,
    /// `(a4, A0, A1)` for each coupling.
    pub by_a4: Vec<(f64, f64, f64)>,
}

/// Log-log slopes of the fitted lower band `A_1` against `N` and `|a_4|`.
pub fn scaling_probe_a1(
    p_base: &Potential,
    n_list: &[u32],
    a4_list: &[f64],
) -> Result<ScalingReport> {
    if n_list.len() < 2 || a4_list.len() < 2 {
        return Err(FreudError::Input(
            "scaling regression needs at least two sizes and two couplings".into(),
        ));
    }
    let count = A1_FIT_RANGE.end + 2;
    let fit = |p: &Potential| -> Result<(f64, f64)> {
        let t = oracle_table::<Mp>(p, count, PrecisionSchedule::for_count(count))?;
        two_band_fit(&t, A1_FIT_RANGE)
    };
    let mut by_n = Vec::new();
    for &n in n_list {
        let (a0, a1) = fit(&p_base.with_n(n)?)?;
        by_n.push((n, a0, a1));
    }
    let mut by_a4 = Vec::new();
    for &a4 in a4_list {
        let (a0, a1) = fit(&p_base.with_coeff(4, a4)?)?;
        by_a4.push((a4, a0, a1));
    }
    let slope = |pts: Vec<(f64, f64)>| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().map(|(a, b)| (a.ln(), b.ln())).unzip();
        linear_fit(&x, &y).1
    };
    Ok(ScalingReport {
        exponent_n: slope(by_n.iter().map(|&(n, _, a1)| (n as f64, a1)).collect()),
        exponent_a4: slope(by_a4.iter().map(|&(a, _, a1)| (a.abs(), a1)).collect()),
        by_n,
        by_a4,
    })
}

/// Window and modulus used for sextic structure scans.
pub const SEXTIC_MODULUS: usize = 3;
pub const SEXTIC_WINDOW: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct TransientReport {
    /// `(mu, R_mu + R_{mu+1} + R_{mu+2})` over the transient windows.
    pub series: Vec<(usize, f64)>,
    pub bound: f64,
    pub epsilon: f64,
    /// Share of the series at or above `bound - epsilon`; `None` when empty.
    pub fraction_above: Option<f64>,
    pub note: Option<String>,
}

impl TransientReport {
    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

/// Sums over consecutive residue triplets inside the transient stretch,
/// compared against the two-band sum of the potential.
pub fn transient_sum_check<T: Real>(
    t: &RecurrenceTable<T>,
    p: &Potential,
) -> Result<TransientReport> {
    if p.d() != 3 {
        return Err(FreudError::UnsupportedDegree {
            expected: 3,
            got: p.d(),
        });
    }
    let r = t.r_f64();
    let bound = two_band_sum(p).unwrap_or(f64::NAN);
    let epsilon = 0.02 * bound;
    let segments = detect_structure_with(&r, SEXTIC_MODULUS, SEXTIC_WINDOW, Thresholds::default())?;
    let mut series = Vec::new();
    let mut windows = 0usize;
    let mut pseudo = 0usize;
    for s in segments.iter().filter(|s| s.label == Label::Transient) {
        for mu in s.start..=s.end {
            if mu + 2 < r.len() {
                series.push((mu, r[mu] + r[mu + 1] + r[mu + 2]));
            }
        }
        let mut w = s.start;
        while w + 2 * SEXTIC_WINDOW <= s.end + 1 {
            windows += 1;
            if coincident_pair(&r[w..w + 2 * SEXTIC_WINDOW], w) {
                pseudo += 1;
            }
            w += 2 * SEXTIC_WINDOW;
        }
    }
    let fraction_above = if series.is_empty() || !bound.is_finite() {
        None
    } else {
        let above = series.iter().filter(|(_, s)| *s >= bound - epsilon).count();
        Some(above as f64 / series.len() as f64)
    };
    let note = (windows > 0 && 2 * pseudo >= windows).then(|| {
        format!(
            "pseudo two-band pattern: two of the three residue bands coincide in {pseudo} of {windows} transient windows"
        )
    });
    Ok(TransientReport {
        series,
        bound,
        epsilon,
        fraction_above,
        note,
    })
}

/// Two residue-3 means within 2% of each other, the third well apart.
fn coincident_pair(w: &[f64], first_mu: usize) -> bool {
    let mut means: Vec<f64> = (0..3)
        .map(|res| {
            let band: Vec<f64> = w
                .iter()
                .enumerate()
                .filter(|(i, _)| (first_mu + i) % 3 == res)
                .map(|(_, v)| *v)
                .collect();
            mean(&band)
        })
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    let pairs = [
        (means[0], means[1], means[2]),
        (means[1], means[2], means[0]),
    ];
    pairs.iter().any(|&(a, b, other)| {
        let gap = (a - b).abs();
        let centre = 0.5 * (a + b);
        gap < 0.02 * centre && (centre - other).abs() > 10.0 * gap.max(1e-12)
    })
}

/// `[{"start": .., "end": .., "label": ..}, ...]`.
pub fn segments_json(segments: &[Segment]) -> String {
    serde_json::to_string(segments).expect("serializable")
}
