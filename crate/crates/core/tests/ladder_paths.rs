use std::collections::BTreeMap;

use freudlab::ladder::{
    self, canonicalize, freud_equation, from_json, moment_summand, parse_latex, transfer_weights,
    Format, LadderSum, PathMonomial, Terms,
};
use freudlab::FreudError;
use num_bigint::BigUint;
use proptest::prelude::*;

/// Every up/down sequence of `length` steps, walked one by one.
fn brute_force(length: usize, from: i32, to: i32) -> Terms {
    let mut terms = Terms::new();
    for mask in 0u32..(1 << length) {
        let mut level = from;
        let mut downs = Vec::new();
        for step in 0..length {
            if mask >> step & 1 == 1 {
                downs.push(level);
                level -= 1;
            } else {
                level += 1;
            }
        }
        if level == to {
            downs.sort_unstable();
            *terms.entry(downs).or_insert_with(|| BigUint::from(0u32)) += 1u32;
        }
    }
    terms
}

/// `(A^k)[to][from]` for the operator `x P_j = P_{j+1} + R_j P_{j-1}` on
/// levels `0..size`, with `R_0 = 0`.
fn matrix_element(r: &[f64], k: usize, from: usize, to: usize) -> f64 {
    let size = r.len();
    let mut v = vec![0.0; size];
    v[from] = 1.0;
    for _ in 0..k {
        let mut w = vec![0.0; size];
        for (j, &c) in v.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            assert!(j + 1 < size, "operator left the truncated basis");
            w[j + 1] += c;
            if j >= 1 {
                w[j - 1] += r[j] * c;
            }
        }
        v = w;
    }
    v[to]
}

fn eval_at(s: &LadderSum, r: &[f64], mu: usize) -> f64 {
    s.eval(&0.0f64, |o| {
        let j = mu as i64 + o as i64;
        Ok(if j <= 0 { 0.0 } else { r[j as usize] })
    })
    .unwrap()
}

#[test]
fn transfer_weights_match_exhaustive_enumeration() {
    for length in 0..=11 {
        for from in -3..=3 {
            for to in -3..=3 {
                let fast = transfer_weights(length, from, to);
                let slow = if length == 0 {
                    Terms::new()
                } else {
                    brute_force(length, from, to)
                };
                assert_eq!(fast.terms(), slow, "length {length}, {from} -> {to}");
                assert!(fast.is_canonical());
            }
        }
    }
}

#[test]
fn distinct_monomials_of_the_top_freud_term() {
    let distinct: Vec<usize> = (1..=5)
        .map(|d| freud_equation(d).last().unwrap().1.len())
        .collect();
    let paths: Vec<String> = (1..=5)
        .map(|d| freud_equation(d).last().unwrap().1.path_count().to_string())
        .collect();
    assert_eq!(distinct, [1, 3, 8, 20, 48]);
    assert_eq!(paths, ["1", "3", "10", "35", "126"]);
}

#[test]
fn moment_summand_rejects_odd_and_small_orders() {
    for k in [0, 1, 3, 7] {
        assert!(matches!(moment_summand(k), Err(FreudError::Input(_))));
    }
}

#[test]
fn latex_round_trip_of_every_generated_sum() {
    for d in 1..=4 {
        for (order, s) in freud_equation(d) {
            let text = ladder::render(&s, Format::Latex);
            let back = parse_latex(&text).unwrap();
            assert_eq!(back, s.terms(), "d={d} a{order}");
        }
    }
    for k in [2, 4, 6, 8] {
        let s = moment_summand(k).unwrap();
        assert_eq!(
            parse_latex(&ladder::render(&s, Format::Latex)).unwrap(),
            s.terms()
        );
        assert_eq!(from_json(&ladder::render(&s, Format::Json)).unwrap(), s);
    }
}

#[test]
fn index_sum_notation_expands() {
    // a8 part of the octic equation written with index sums
    let text = r"R_{\mu+1}(R_{\mu+2}R_{\mu+3}\sum_{i=\mu}^{\mu+4}R_i + R_{\mu+2}^2\sum_{i=\mu}^{\mu+3}R_i+R_{\mu+2}R_{\mu+1}\sum_{i=\mu}^{\mu+2}R_i+ R_{\mu+2}R_{\mu}\sum_{i=\mu-1}^{\mu+1}R_i +R_{\mu+1}R_{\mu+2}\sum_{i=\mu}^{\mu+3}R_i+R_{\mu+1}^2\sum_{i=\mu}^{\mu+2}R_i +R_{\mu}R_{\mu+1}\sum_{i=\mu-1}^{\mu+1}R_i+R_{\mu}R_{\mu+1}\sum_{i=\mu}^{\mu+2}R_i+R_{\mu}R_{\mu-1}\sum_{i=\mu-2}^{\mu+1}R_i +R_{\mu}^2\sum_{i=\mu-1}^{\mu+1}R_i)";
    let printed = parse_latex(text).unwrap();
    assert_eq!(printed, freud_equation(4)[3].1.terms());
}

#[test]
fn json_rejects_unknown_fields_and_zero_coefficients() {
    assert!(from_json(r#"{"kind":"diag","length":2,"terms":[],"extra":1}"#).is_err());
    assert!(
        from_json(r#"{"kind":"diag","length":2,"terms":[{"coeff":0,"offsets":[0]}]}"#).is_err()
    );
    let big = r#"{"kind":"diag","length":2,"terms":[{"coeff":123456789012345678901234567890,"offsets":[0]}]}"#;
    let s = from_json(big).unwrap();
    assert_eq!(
        s.monomials[0].coeff.to_string(),
        "123456789012345678901234567890"
    );
}

proptest! {
    #[test]
    fn ladder_sums_equal_operator_powers(
        r in prop::collection::vec(1u32..6, 24),
        mu in 0usize..5,
        length in 1usize..8,
        from in -2i32..3,
        to in -2i32..3,
    ) {
        let mut r: Vec<f64> = r.into_iter().map(f64::from).collect();
        r[0] = 0.0;
        let (f, t) = (mu as i32 + from, mu as i32 + to);
        prop_assume!(f >= 0 && t >= 0);
        let expect = matrix_element(&r, length, f as usize, t as usize);
        let got = eval_at(&transfer_weights(length, from, to), &r, mu);
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn canonicalize_is_idempotent_and_order_free(
        raw in prop::collection::vec((prop::collection::vec(-3i32..4, 0..4), 1u32..5), 0..8),
        seed in any::<u64>(),
    ) {
        let mut monomials: Vec<PathMonomial> = raw
            .iter()
            .map(|(o, c)| PathMonomial { coeff: BigUint::from(*c), offsets: o.clone() })
            .collect();
        let s = LadderSum { kind: ladder::SumKind::Diagonal, length: 4, monomials: monomials.clone() };
        let once = canonicalize(&s);
        prop_assert!(once.is_canonical());
        prop_assert_eq!(canonicalize(&once), once.clone());
        // any permutation of the monomials and of each offset list
        let n = monomials.len().max(1);
        monomials.rotate_left(seed as usize % n);
        for m in &mut monomials {
            m.offsets.reverse();
        }
        let shuffled = LadderSum { monomials, ..s };
        prop_assert_eq!(canonicalize(&shuffled), once.clone());
        let total: BigUint = raw.iter().map(|(_, c)| BigUint::from(*c)).sum();
        prop_assert_eq!(once.path_count(), total);
    }

    #[test]
    fn path_counts_are_binomial(length in 1usize..14, gap in -4i32..5) {
        let s = transfer_weights(length, gap, 0);
        let g = gap.unsigned_abs() as usize;
        let expect = if g > length || (length - g) % 2 == 1 {
            BigUint::from(0u32)
        } else {
            binomial(length, (length + g) / 2)
        };
        prop_assert_eq!(s.path_count(), expect);
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

#[test]
fn operator_oracle_catches_boundary_terms() {
    // near mu = 0 the zero R_0 removes paths that would dip below level 0
    let r: Vec<f64> = (0..16)
        .map(|j| if j == 0 { 0.0 } else { j as f64 + 0.5 })
        .collect();
    let mut by_mu = BTreeMap::new();
    for mu in 0..4 {
        let s = moment_summand(4).unwrap();
        by_mu.insert(mu, (eval_at(&s, &r, mu), matrix_element(&r, 4, mu, mu)));
    }
    for (mu, (a, b)) in by_mu {
        assert_eq!(a, b, "mu {mu}");
    }
}
