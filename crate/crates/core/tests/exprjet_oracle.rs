mod common;

use common::{random_expression, random_point, richardson, rng, step_for_order};
use lightcone_core::Expression;
use proptest::prelude::*;
use rand::RngExt;

fn max_rel_error(text: &str, p: &[f64]) -> f64 {
    let m = p.len();
    let e = Expression::parse(text, m).unwrap();
    let jet = e.eval_jet3(p).unwrap();
    let f = |x: &[f64]| e.eval(x).unwrap();
    let mut worst: f64 = 0.0;
    let mut indices: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        indices.push(vec![i]);
        for j in i..m {
            indices.push(vec![i, j]);
            for k in j..m {
                indices.push(vec![i, j, k]);
            }
        }
    }
    for idx in indices {
        let exact = match idx.len() {
            1 => jet.d1(idx[0]),
            2 => jet.d2(idx[0], idx[1]),
            _ => jet.d3(idx[0], idx[1], idx[2]),
        };
        let fd = richardson(&f, p, &idx, step_for_order(idx.len()));
        worst = worst.max((exact - fd).abs() / fd.abs().max(1.0));
    }
    worst
}

#[test]
fn tanh_product_matches_differences() {
    assert!(max_rel_error("x1*tanh(x2)", &[1.0, 0.0]) < 1e-5);
}

#[test]
fn random_expressions_match_differences() {
    let mut r = rng(7);
    for _ in 0..100 {
        let arity = r.random_range(1..=3);
        let text = random_expression(&mut r, arity, 3);
        let p = random_point(&mut r, arity, 1.0);
        let err = max_rel_error(&text, &p);
        assert!(err < 1e-5, "{text} at {p:?}: {err:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_are_symmetric_bitwise(seed in 0u64..10_000, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let mut r = rng(seed);
        let text = random_expression(&mut r, 3, 3);
        let jet = Expression::parse(&text, 3).unwrap().eval_jet3(&[x, y, z]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(jet.d2(i, j).to_bits(), jet.d2(j, i).to_bits());
                for k in 0..3 {
                    let t = jet.d3(i, j, k).to_bits();
                    for (a, b, c) in [(i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                        prop_assert_eq!(t, jet.d3(a, b, c).to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn sum_is_componentwise(seed in 0u64..10_000, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let mut r = rng(seed);
        let a = random_expression(&mut r, 2, 2);
        let b = random_expression(&mut r, 2, 2);
        let p = [x, y];
        let ja = Expression::parse(&a, 2).unwrap().eval_jet3(&p).unwrap();
        let jb = Expression::parse(&b, 2).unwrap().eval_jet3(&p).unwrap();
        let js = Expression::parse(&format!("({a}) + ({b})"), 2).unwrap().eval_jet3(&p).unwrap();
        prop_assert!((js.value() - ja.value() - jb.value()).abs() <= 1e-14 * (1.0 + js.value().abs()));
        for i in 0..2 {
            prop_assert!((js.d1(i) - ja.d1(i) - jb.d1(i)).abs() <= 1e-14 * (1.0 + js.d1(i).abs()));
            for j in 0..2 {
                prop_assert!((js.d2(i, j) - ja.d2(i, j) - jb.d2(i, j)).abs() <= 1e-14 * (1.0 + js.d2(i, j).abs()));
                for k in 0..2 {
                    prop_assert!((js.d3(i, j, k) - ja.d3(i, j, k) - jb.d3(i, j, k)).abs() <= 1e-14 * (1.0 + js.d3(i, j, k).abs()));
                }
            }
        }
    }
}
