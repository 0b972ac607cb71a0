//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns the lines to print on stdout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use freudlab::bands::{
    detect_structure_with, segments_json, split_values, transient_sum_check, Label,
};
use freudlab::ladder::{self, Format};
use freudlab::potential::{classify_regime, critical_a4};
use freudlab::recurrence::{freud_forward, freud_residuals, oracle_table, PRECISION_ENV};
use freudlab::spectra::{moment_set, required_table_index};
use freudlab::{DensityCurve, Grid, Mp, Potential, PrecisionSchedule, Real, Table};
use serde_json::json;

use crate::config::{ConfigError, RunConfig};
use crate::svg::{Figure, Panel, Series, Style, PALETTE};

/// Precision resolution: command-line flag, then the environment, then the
/// configuration file, then the default schedule for `count`.
pub fn schedule(cfg: &RunConfig, flag: Option<u32>, count: usize) -> Result<PrecisionSchedule> {
    if let Some(bits) = flag {
        return Ok(PrecisionSchedule::fixed(bits));
    }
    if std::env::var_os(PRECISION_ENV).is_some() {
        return Ok(PrecisionSchedule::from_env(count)?);
    }
    Ok(match cfg.precision_bits {
        Some(bits) => PrecisionSchedule::fixed(bits),
        None => PrecisionSchedule::for_count(count),
    })
}

fn table(p: &Potential, count: usize, sched: PrecisionSchedule) -> Result<Table> {
    oracle_table::<Mp>(p, count, sched)
        .with_context(|| format!("recurrence table R_0..R_{count} for {}", describe(p)))
}

pub fn describe(p: &Potential) -> String {
    let mut s = format!("d={}", p.d());
    for (k, a) in p.coeffs().iter().enumerate() {
        write!(s, ", a{}={a}", 2 * (k + 1)).unwrap();
    }
    write!(s, ", N={}", p.n()).unwrap();
    s
}

fn out_dir(cfg: &RunConfig, flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn band_series(r: &[f64], m: usize) -> Result<Vec<Series>> {
    let bands = split_values(r, m)?;
    Ok(bands
        .bands
        .iter()
        .enumerate()
        .map(|(res, band)| Series {
            label: format!("b{res}"),
            color: PALETTE[res % PALETTE.len()],
            style: Style::Dots,
            // R_0 = 0 is not part of any plotted band
            points: band
                .iter()
                .filter(|(mu, _)| *mu > 0)
                .map(|&(mu, v)| (mu as f64, v))
                .collect(),
        })
        .collect())
}

pub struct RmuArgs {
    pub count: Option<usize>,
    pub modulus: Option<usize>,
    pub window: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub precision_bits: Option<u32>,
}

/// `rmu.csv`, `bands.csv`, `segments.json`, `rmu.svg`.
pub fn rmu(cfg: &RunConfig, args: RmuArgs) -> Result<Vec<String>> {
    let p = &cfg.potential;
    let count = args.count.or(cfg.count).unwrap_or(p.n() as usize);
    let m = args.modulus.or(cfg.modulus).unwrap_or(p.d());
    if m == 0 {
        return Err(ConfigError::Option("modulus must be at least 1".into()).into());
    }
    let window = args.window.or(cfg.window).unwrap_or(2 * m);
    let dir = out_dir(cfg, args.out_dir)?;
    let t = table(p, count, schedule(cfg, args.precision_bits, count)?)?;
    let r = t.r_f64();
    let segments = detect_structure_with(&r, m, window, cfg.thresholds)?;

    let mut log = Vec::new();
    write(&dir, "rmu.csv", &t.to_csv())?;
    write(&dir, "bands.csv", &split_values(&r, m)?.to_csv())?;
    write(&dir, "segments.json", &(segments_json(&segments) + "\n"))?;
    let fig = Figure {
        caption: format!("R_mu modulo {m} for {}", describe(p)),
        panels: vec![Panel {
            title: format!("R_mu, mu = 1..{count}"),
            x_label: "mu".into(),
            y_label: "R_mu".into(),
            series: band_series(&r, m)?,
        }],
    };
    write(&dir, "rmu.svg", &fig.render())?;
    log.push(format!("precision {} bits", t.precision_bits));
    for s in &segments {
        log.push(format!("{:?} {}..={}", s.label, s.start, s.end));
    }
    Ok(log)
}

pub struct DensityArgs {
    pub grid: Option<Grid>,
    pub out_dir: Option<PathBuf>,
    pub precision_bits: Option<u32>,
}

fn default_orders(p: &Potential) -> Vec<usize> {
    (1..p.d().max(2)).map(|k| 2 * k).collect()
}

/// `density.csv` (finite then asymptotic rows), `moments.json`, `density.svg`.
pub fn density(cfg: &RunConfig, args: DensityArgs) -> Result<Vec<String>> {
    let p = &cfg.potential;
    let grid = args
        .grid
        .or(cfg.grid)
        .unwrap_or_else(|| Grid::default_for(p));
    let orders = default_orders(p);
    let count = required_table_index(*orders.last().unwrap(), p.n()).max(p.n() as usize);
    let dir = out_dir(cfg, args.out_dir)?;
    let t = table(p, count, schedule(cfg, args.precision_bits, count)?)?;
    let moments = moment_set(&t, &orders, p.n())?;
    let finite = DensityCurve::finite(&t, p, &grid)?;
    let asym = DensityCurve::asymptotic(p, &moments, &grid)?;

    let mut log = Vec::new();
    let mut csv = finite.to_csv();
    asym.append_csv_rows(&mut csv);
    write(&dir, "density.csv", &csv)?;
    write(&dir, "moments.json", &(moments.to_json() + "\n"))?;
    let mlist: Vec<String> = orders
        .iter()
        .map(|&k| format!("M{k}={:.3}", moments.get(k).unwrap_or(f64::NAN)))
        .collect();
    let fig = Figure {
        caption: format!("Level density for {}; {}", describe(p), mlist.join(", ")),
        panels: vec![Panel {
            title: "finite-N and asymptotic level density".into(),
            x_label: "x".into(),
            y_label: "rho(x)".into(),
            series: vec![
                Series {
                    label: "finite N".into(),
                    color: PALETTE[0],
                    style: Style::Line,
                    points: finite.samples.clone(),
                },
                Series {
                    label: "asymptotic".into(),
                    color: PALETTE[1],
                    style: Style::Line,
                    points: asym.samples.clone(),
                },
            ],
        }],
    };
    write(&dir, "density.svg", &fig.render())?;
    log.push(mlist.join(" "));
    Ok(log)
}

pub struct MomentsArgs {
    pub orders: Option<Vec<usize>>,
    pub out_dir: Option<PathBuf>,
    pub precision_bits: Option<u32>,
}

/// Prints the moment JSON and writes it to `moments.json`.
pub fn moments(cfg: &RunConfig, args: MomentsArgs) -> Result<Vec<String>> {
    let p = &cfg.potential;
    let orders = args
        .orders
        .or_else(|| cfg.orders.clone())
        .unwrap_or_else(|| default_orders(p));
    if orders.is_empty() {
        return Err(ConfigError::Option("no moment orders requested".into()).into());
    }
    let max = *orders.iter().max().unwrap();
    let count = required_table_index(max, p.n());
    let dir = out_dir(cfg, args.out_dir)?;
    let t = table(p, count, schedule(cfg, args.precision_bits, count)?)?;
    let json = moment_set(&t, &orders, p.n())?.to_json();
    let log = vec![json.clone()];
    write(&dir, "moments.json", &(json + "\n"))?;
    Ok(log)
}

pub struct CheckArgs {
    pub count: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub precision_bits: Option<u32>,
}

/// Freud residuals of the reference table, plus the index where forward
/// iteration from double-precision seeds departs from it.
pub fn freud_check(cfg: &RunConfig, args: CheckArgs) -> Result<Vec<String>> {
    let p = &cfg.potential;
    let count = args.count.or(cfg.count).unwrap_or(p.n() as usize);
    let dir = out_dir(cfg, args.out_dir)?;
    let t = table(p, count, schedule(cfg, args.precision_bits, count)?)?;
    let res = freud_residuals(&t);
    let mut csv = String::from("mu,residual,scaled\n");
    let (mut max_abs, mut max_scaled) = (0.0f64, 0.0f64);
    for (mu, v) in res.iter().enumerate() {
        let a = v.to_f64().abs();
        let s = a / (mu + 1) as f64;
        max_abs = max_abs.max(a);
        max_scaled = max_scaled.max(s);
        writeln!(csv, "{mu},{},{s:e}", v.to_sci(6)).unwrap();
    }
    let seeds = t.round_to(53);
    let divergence = freud_forward(p, &seeds, count).map(|(_, i)| i).ok();
    let summary = json!({
        "potential": describe(p),
        "count": count,
        "precision_bits": t.precision_bits,
        "checked": res.len(),
        "max_abs_residual": max_abs,
        "max_scaled_residual": max_scaled,
        "forward_divergence_from_f64_seeds": divergence,
    });
    let log = vec![summary.to_string()];
    write(&dir, "freud_check.csv", &csv)?;
    Ok(log)
}

/// The Freud equation of degree `d`, or the `k`th moment summand.
pub fn equation(d: usize, moment: Option<usize>, format: Format) -> Result<Vec<String>> {
    if let Some(k) = moment {
        let s = ladder::moment_summand(k)?;
        return Ok(vec![ladder::render(&s, format)]);
    }
    if d == 0 {
        return Err(ConfigError::Degree(d).into());
    }
    Ok(vec![match format {
        Format::Latex => ladder::render_freud_equation(d),
        Format::Json => ladder::freud_equation_json(d),
    }])
}

pub struct ScanArgs {
    pub a4_values: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub precision_bits: Option<u32>,
}

/// Parses `-2.25,-2.3,c,-2.35`; `c` stands for the critical value.
pub fn parse_a4_list(text: &str, a4c: f64) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(|s| match s.trim() {
            "c" | "crit" | "critical" => Ok(a4c),
            v => v
                .parse::<f64>()
                .map_err(|_| ConfigError::Option(format!("a4 value {v:?} is not a number"))),
        })
        .collect()
}

/// Sextic sweep over `a4`: `scan_a4.csv`, `scan_a4.json`, `scan_a4.svg`.
pub fn scan_a4(cfg: &RunConfig, args: ScanArgs) -> Result<Vec<String>> {
    let base = &cfg.potential;
    if base.d() != 3 {
        return Err(freudlab::FreudError::UnsupportedDegree {
            expected: 3,
            got: base.d(),
        }
        .into());
    }
    let a4c = critical_a4(base.a(2), base.a(6))?;
    let values = args
        .a4_values
        .or_else(|| cfg.a4_values.clone())
        .unwrap_or_else(|| vec![-2.25, -2.30, a4c, -2.35]);
    let count = args.count.or(cfg.count).unwrap_or(base.n() as usize);
    let m = cfg.modulus.unwrap_or(3);
    let window = cfg.window.unwrap_or(2 * m);
    let dir = out_dir(cfg, args.out_dir)?;

    let mut csv = String::from("a4,mu,residue,R\n");
    let mut report = Vec::new();
    let mut panels = Vec::new();
    let mut log = Vec::new();
    for &a4 in &values {
        let p = base.with_coeff(4, a4)?;
        let t = table(&p, count, schedule(cfg, args.precision_bits, count)?)?;
        let r = t.r_f64();
        for (mu, v) in r.iter().enumerate() {
            writeln!(csv, "{a4},{mu},{},{v}", mu % m).unwrap();
        }
        let segments = detect_structure_with(&r, m, window, cfg.thresholds)?;
        let regime = classify_regime(&p)?;
        let transient = transient_sum_check(&t, &p)?;
        let initial = segments.first().map(|s| s.label);
        log.push(format!(
            "a4={a4}: {:?}, initial {:?}{}",
            regime.classification,
            initial,
            transient
                .note
                .as_ref()
                .map(|n| format!("; {n}"))
                .unwrap_or_default()
        ));
        report.push(json!({
            "a4": a4,
            "regime": regime.classification,
            "detail": regime.detail,
            "precision_bits": t.precision_bits,
            "segments": segments,
            "initial": initial,
            "transient_fraction_above": transient.fraction_above,
            "note": transient.note,
        }));
        let converged = segments.iter().any(|s| s.label == Label::Converged);
        panels.push(Panel {
            title: format!(
                "a4 = {a4:.6}{}",
                if converged {
                    ""
                } else {
                    " (no convergence in range)"
                }
            ),
            x_label: "mu".into(),
            y_label: "R_mu".into(),
            series: band_series(&r, m)?,
        });
    }
    let json = serde_json::to_string_pretty(&json!({ "a4c": a4c, "scans": report }))?;
    write(&dir, "scan_a4.csv", &csv)?;
    write(&dir, "scan_a4.json", &(json + "\n"))?;
    let fig = Figure {
        caption: format!(
            "R_mu modulo {m} as a4 approaches a4c = {a4c:.6}; {}",
            describe(base)
        ),
        panels,
    };
    write(&dir, "scan_a4.svg", &fig.render())?;
    Ok(log)
}
