//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use finsler_gap::norms::NormSpec;

/// `sup { ξ(v) : F(v) <= 1 }` by brute force over directions.
pub fn dual_sup(norm: &NormSpec, xi: &[f64]) -> f64 {
    let ratio = |v: &[f64]| {
        let f = norm.norm_eval(v).unwrap();
        xi.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / f
    };
    match xi.len() {
        1 => ratio(&[1.0]).max(ratio(&[-1.0])),
        2 => {
            let at = |th: f64| ratio(&[th.cos(), th.sin()]);
            let n = 3600;
            let step = 2.0 * PI / n as f64;
            let best = (0..n)
                .map(|i| i as f64 * step)
                .max_by(|a, b| at(*a).total_cmp(&at(*b)))
                .unwrap();
            golden_max(at, best - step, best + step)
        }
        _ => panic!("dual_sup supports dimensions 1 and 2"),
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    f(0.5 * (a + b))
}

/// Density of the measure that makes `v'' - T v'` symmetric, written out per
/// chart from `exp(-∫T)`.
#[derive(Clone, Copy, Debug)]
pub enum Density {
    Cos { c: f64, p: f64 },
    Cosh { c: f64, p: f64 },
    Sinh { c: f64, p: f64 },
    Power { p: f64 },
    Flat,
    Gauss { k: f64 },
    Exp { c: f64 },
}

impl Density {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Density::Cos { c, p } => (c * t).cos().max(0.0).powf(p),
            Density::Cosh { c, p } => (c * t).cosh().powf(p),
            Density::Sinh { c, p } => (c * t).sinh().abs().powf(p),
            Density::Power { p } => t.abs().powf(p),
            Density::Flat => 1.0,
            Density::Gauss { k } => (-0.5 * k * t * t).exp(),
            Density::Exp { c } => (-c * t).exp(),
        }
    }
}

const GAUSS_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Second smallest eigenvalue of `-(ρ v')' = λ ρ v` on `(a, b)` with zero
/// flux at both ends: cell-centred finite volumes, symmetric tridiagonal
/// form, Sturm-sequence bisection.
pub fn sturm_liouville_lambda1(rho: Density, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let mass: Vec<f64> = (0..cells)
        .map(|i| {
            let lo = a + i as f64 * h;
            GAUSS_X
                .iter()
                .zip(GAUSS_W)
                .map(|(x, w)| 0.5 * h * w * rho.eval(lo + 0.5 * h * (1.0 + x)))
                .sum()
        })
        .collect();
    let cond: Vec<f64> = (1..cells).map(|i| rho.eval(a + i as f64 * h) / h).collect();
    // symmetric form M^{-1/2} S M^{-1/2}
    let diag: Vec<f64> = (0..cells)
        .map(|i| {
            let left = if i > 0 { cond[i - 1] } else { 0.0 };
            let right = if i + 1 < cells { cond[i] } else { 0.0 };
            (left + right) / mass[i]
        })
        .collect();
    let off: Vec<f64> = (0..cells - 1)
        .map(|i| -cond[i] / (mass[i] * mass[i + 1]).sqrt())
        .collect();
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..cells {
            let e2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = diag[i] - x - if i > 0 { e2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut hi = diag
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d + if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < cells { off[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    while count_below(hi) < 2 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
