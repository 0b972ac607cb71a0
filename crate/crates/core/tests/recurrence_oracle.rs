use freudlab::recurrence::{freud_forward, freud_residual, freud_residuals, oracle_table};
use freudlab::spectra::finite_density;
use freudlab::{FreudError, Mp, Potential, PrecisionSchedule, Real, Table, Table64};

fn table(p: &Potential, count: usize) -> Table {
    oracle_table::<Mp>(p, count, PrecisionSchedule::for_count(count)).unwrap()
}

/// Discretized Stieltjes procedure on a fine trapezoid grid. The weight is
/// analytic and decays like a Gaussian or faster, so the trapezoid sum is
/// spectrally accurate; plain `f64` is enough for a few dozen coefficients.
fn stieltjes(p: &Potential, count: usize) -> Vec<f64> {
    let n = p.n() as f64;
    let (lo, hi, points) = (-4.0, 4.0, 16001);
    let h = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| lo + i as f64 * h).collect();
    let vmin = xs.iter().map(|&x| p.eval(x)).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = xs
        .iter()
        .map(|&x| h * (-n * (p.eval(x) - vmin)).exp())
        .collect();
    let dot = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .zip(&w)
            .map(|((x, y), w)| x * y * w)
            .sum::<f64>()
    };
    // orthonormal vectors q_k with x q_k = b_{k+1} q_{k+1} + b_k q_{k-1}; R_k = b_k^2
    let norm0 = dot(&vec![1.0; points], &vec![1.0; points]).sqrt();
    let mut prev = vec![0.0; points];
    let mut cur = vec![1.0 / norm0; points];
    let mut b_prev = 0.0;
    let mut r = vec![0.0];
    for _ in 0..count {
        let mut next: Vec<f64> = xs
            .iter()
            .zip(&cur)
            .zip(&prev)
            .map(|((x, c), p)| x * c - b_prev * p)
            .collect();
        let b = dot(&next, &next).sqrt();
        next.iter_mut().for_each(|v| *v /= b);
        r.push(b * b);
        prev = cur;
        cur = next;
        b_prev = b;
    }
    r
}

#[test]
fn oracle_agrees_with_discretized_stieltjes() {
    let cases = [
        (vec![1.0, -3.0, 1.0], 30u32, 31usize),
        (vec![-1.0, 6.0, -5.0, 1.0], 20, 22),
        (vec![4.8, -20.0, 21.0, -8.0, 1.0], 20, 23),
        (vec![-1.0, 1.0], 40, 40),
        (vec![2.0], 7, 30),
    ];
    for (coeffs, n, count) in cases {
        let p = Potential::new(coeffs.clone(), n).unwrap();
        let t = table(&p, count);
        let s = stieltjes(&p, count);
        for mu in 1..=count {
            let a = t.r[mu].to_f64();
            let e = (a - s[mu]).abs() / a;
            assert!(e < 1e-9, "{coeffs:?} N={n} mu={mu}: {a} vs {}", s[mu]);
        }
    }
}

#[test]
fn log_norms_telescope() {
    let p = Potential::new(vec![1.0, -2.5, 1.0], 60).unwrap();
    let t = table(&p, 60);
    for mu in 1..=60 {
        let step = t.log_h[mu].clone() - t.log_h[mu - 1].clone() - t.r[mu].ln();
        assert!(step.abs().to_f64() < 1e-60);
    }
    assert_eq!(t.method, freudlab::Method::MomentOracle);
}

#[test]
fn precision_exhaustion_reports_certified_prefix() {
    let p = Potential::new(vec![1.0, -2.5, 1.0], 500).unwrap();
    let err = oracle_table::<Mp>(&p, 300, PrecisionSchedule::fixed(256)).unwrap_err();
    match err {
        FreudError::Precision {
            certified_up_to,
            suggested_bits,
            ..
        } => {
            let k = certified_up_to.expect("some prefix certified");
            assert!(k < 300);
            assert!(suggested_bits > 256);
        }
        other => panic!("expected precision error, got {other:?}"),
    }
}

#[test]
fn double_precision_oracle() {
    // a Gaussian has a single base moment, so rounding it rescales every
    // moment and leaves the ratios exact
    let g = Potential::new(vec![1.0], 10).unwrap();
    let t = oracle_table::<f64>(&g, 10, PrecisionSchedule::for_count(10)).unwrap();
    for (mu, r) in t.r.iter().enumerate() {
        assert!((r * 10.0 - mu as f64).abs() < 1e-10);
    }
    // the moment map of a sextic weight is far too ill-conditioned for f64
    let p = Potential::new(vec![1.0, -3.0, 1.0], 30).unwrap();
    let err = oracle_table::<f64>(&p, 31, PrecisionSchedule::for_count(31)).unwrap_err();
    assert!(matches!(err, FreudError::Precision { .. }), "{err:?}");
}

#[test]
fn f64_copy_drives_the_generic_density() {
    let p = Potential::new(vec![1.0, -3.0, 1.0], 30).unwrap();
    let t = table(&p, 30);
    let t64: Table64 = t.to_f64();
    for x in [-2.0, -0.3, 0.0, 1.1, 2.4] {
        let a = finite_density(&t, &p, x).unwrap();
        let b = finite_density(&t64, &p, x).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "x = {x}");
    }
}

#[test]
fn perturbing_one_coefficient_shows_in_nearby_residuals_only() {
    let p = Potential::new(vec![1.0, -3.0, 1.0], 30).unwrap();
    let t = table(&p, 31);
    let bumped = t
        .with_value(5, t.r[5].clone() * Mp::new(1.0 + 1e-6, 320))
        .unwrap();
    let d = p.d() as i64;
    for mu in 0..=(t.max_index() - p.d()) {
        let res = freud_residual(&bumped, mu).unwrap().abs().to_f64();
        // equation mu involves R_{mu-d+2} .. R_{mu+d}
        let touches = (mu as i64 - d + 2..=mu as i64 + d).contains(&5);
        if touches {
            assert!(res > 1e-9, "mu {mu}: {res}");
        } else {
            assert!(res < 1e-40, "mu {mu}: {res}");
        }
    }
    assert!(bumped.with_value(0, Mp::new(1.0, 64)).is_err());
    assert!(matches!(
        bumped.get(40),
        Err(FreudError::Range { index: 40, .. })
    ));
    assert!(bumped.get(-3).unwrap().is_zero());
}

#[test]
fn forward_iteration_diverges_earlier_from_coarser_seeds() {
    let p = Potential::new(vec![-1.0, 6.0, -5.0, 1.0], 200).unwrap();
    let t = table(&p, 200);
    let (_, from53) = freud_forward(&p, &t.round_to(53), 200).unwrap();
    let (_, from256) = freud_forward(&p, &t.round_to(256), 200).unwrap();
    let (fwd, exact) = freud_forward(&p, &t, 200).unwrap();
    assert!(from53 < from256, "{from53} vs {from256}");
    assert!(from256 <= exact);
    assert_eq!(fwd.method, freudlab::Method::FreudForward);
    // where forward values are still trusted they satisfy the equation
    let res = freud_residuals(&fwd.truncated(from256.min(fwd.max_index())));
    assert!(res.iter().all(|v| v.abs().to_f64() < 1e-20));
}

#[test]
fn scaling_the_potential_leaves_the_weight_unchanged() {
    // exp(-N V) depends on N a_{2k} only
    let a = Potential::new(vec![1.0, -3.0, 1.0], 30).unwrap();
    let b = Potential::new(vec![2.0, -6.0, 2.0], 15).unwrap();
    let (ta, tb) = (table(&a, 20), table(&b, 20));
    for mu in 1..=20 {
        assert!(freudlab::scalar::rel_diff(&ta.r[mu], &tb.r[mu]) < 1e-40);
    }
}
