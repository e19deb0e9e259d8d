//! Test-only oracles that never call into the jet machinery.
#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tensor-product central difference of order `idx.len()` (1..=3) with step `h`.
pub fn central(f: &dyn Fn(&[f64]) -> f64, x: &[f64], idx: &[usize], h: f64) -> f64 {
    let k = idx.len();
    let mut acc = 0.0;
    for mask in 0..(1usize << k) {
        let mut p = x.to_vec();
        let mut sign = 1.0;
        for (bit, &i) in idx.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                p[i] += h;
            } else {
                p[i] -= h;
                sign = -sign;
            }
        }
        acc += sign * f(&p);
    }
    acc / (2.0 * h).powi(k as i32)
}

/// Richardson-extrapolated central difference: `(4 D(h/2) - D(h)) / 3`.
pub fn richardson(f: &dyn Fn(&[f64]) -> f64, x: &[f64], idx: &[usize], h: f64) -> f64 {
    (4.0 * central(f, x, idx, 0.5 * h) - central(f, x, idx, h)) / 3.0
}

/// Step per derivative order used by the derivative oracle.
pub fn step_for_order(order: usize) -> f64 {
    if order >= 3 {
        1e-2
    } else {
        1e-3
    }
}

fn leaf(rng: &mut ChaCha8Rng, arity: usize) -> String {
    if rng.random_range(0..3) == 0 {
        format!("{:.3}", rng.random_range(-2.0..2.0))
    } else {
        format!("x{}", rng.random_range(1..=arity))
    }
}

/// Random expression over `x1..x{arity}` that is smooth and defined everywhere.
pub fn random_expression(rng: &mut ChaCha8Rng, arity: usize, depth: usize) -> String {
    if depth == 0 {
        return leaf(rng, arity);
    }
    let a = random_expression(rng, arity, depth - 1);
    let b = random_expression(rng, arity, depth - 1);
    match rng.random_range(0..11) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 | 3 => format!("({a} * {b})"),
        4 => format!("({a} / (2 + cos({b})))"),
        5 => format!("({a})^{}", rng.random_range(2..4)),
        6 => format!("exp(0.5*tanh({a}))"),
        7 => format!("log(1 + ({a})^2)"),
        8 => format!("sqrt(1.5 + sin({a}))"),
        9 => format!("sin({a})"),
        _ => format!("-tanh({a})"),
    }
}

/// Random polynomial of total degree <= `degree` over `x1..x{arity}` with small coefficients.
pub fn random_polynomial(
    rng: &mut ChaCha8Rng,
    arity: usize,
    degree: usize,
    terms: usize,
    scale: f64,
) -> String {
    let mut out = Vec::new();
    for _ in 0..terms {
        let coeff = rng.random_range(-scale..scale);
        let mut mono = vec![format!("{coeff:.4}")];
        let deg = rng.random_range(1..=degree);
        for _ in 0..deg {
            mono.push(format!("x{}", rng.random_range(1..=arity)));
        }
        out.push(mono.join("*"));
    }
    out.join(" + ")
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-radius..radius))
        .collect()
}
