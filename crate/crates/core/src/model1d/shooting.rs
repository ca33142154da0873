use std::f64::consts::PI;

use serde::Serialize;

use super::ode::{self, integrate, Control, State, Tolerances};
use super::{Chart, Dimension, ModelProblem, Sample};
use crate::error::{Error, Result};

/// Relative offset of the integration start from a singular endpoint.
const SINGULAR_OFFSET: f64 = 1e-6;
/// Bisection on λ stops at this relative bracket width.
const LAMBDA_REL_TOL: f64 = 1e-10;

/// Trajectory of the initial value problem `v(a) = -1, v'(a) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub lambda: f64,
    pub interval: (f64, f64),
    pub samples: Vec<Sample>,
    /// State at the last integrated point (`b`, or `b - ε` at a singular end).
    pub terminal: Sample,
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) enum Mode {
    ToEnd,
    /// Stop as soon as an accepted step ends with `v' <= 0`.
    SlopeSign,
    /// Stop at the first zero of `v'`, located to round-off.
    FirstCritical,
}

pub(crate) struct Run {
    pub samples: Vec<Sample>,
    pub t: f64,
    pub y: State,
    pub stopped: bool,
}

fn series_order_n(problem: &ModelProblem) -> f64 {
    // Singular charts (tan, coth, power) all have finite N.
    problem.n().finite().unwrap_or(f64::INFINITY)
}

pub(crate) fn offset(problem: &ModelProblem, a: f64, b: f64) -> f64 {
    SINGULAR_OFFSET * problem.scale().unwrap_or(b - a)
}

fn sample(problem: &ModelProblem, lambda: f64, t: f64, y: &State) -> Sample {
    Sample {
        t,
        v: y[0],
        dv: y[1],
        d2v: problem.drift(t) * y[1] - lambda * y[0],
    }
}

/// Integrates `v'' = T v' - λ v` from `a` (with `v(a) = -1`, `v'(a) = 0`)
/// towards `end`.
///
/// A singular start uses the series `v ≈ -1 + λ/(2N) τ²`, which follows from
/// `v''(a) = λ/N` at a regular singular point.
pub(crate) fn run(
    problem: &ModelProblem,
    lambda: f64,
    a: f64,
    end: f64,
    mode: Mode,
    h_max: f64,
    record: bool,
) -> Result<Run> {
    let eps = offset(problem, a, end);
    let mut samples = Vec::new();
    let (t0, y0) = if problem.is_singular(a) {
        let n = series_order_n(problem);
        if record {
            samples.push(Sample {
                t: a,
                v: -1.0,
                dv: 0.0,
                d2v: lambda / n,
            });
        }
        (
            a + eps,
            [-1.0 + lambda * eps * eps / (2.0 * n), lambda * eps / n],
        )
    } else {
        (a, [-1.0, 0.0])
    };
    let t_end = if problem.is_singular(end) {
        end - eps
    } else {
        end
    };
    if record {
        samples.push(sample(problem, lambda, t0, &y0));
    }
    let rhs = |t: f64, y: &State| [y[1], problem.drift(t) * y[1] - lambda * y[0]];
    let mut root: Option<(f64, State)> = None;
    let out = integrate(
        &rhs,
        t0,
        y0,
        t_end,
        h_max,
        Tolerances::default(),
        |tp, yp, t, y| {
            if mode != Mode::ToEnd && y[1] <= 0.0 {
                if mode == Mode::FirstCritical {
                    root = Some(polish_root(&rhs, tp, yp, t - tp));
                } else if record {
                    samples.push(sample(problem, lambda, t, y));
                }
                return Control::Stop;
            }
            if record {
                samples.push(sample(problem, lambda, t, y));
            }
            Control::Continue
        },
    )?;
    if let Some((t, y)) = root {
        samples.push(Sample {
            t,
            v: y[0],
            dv: 0.0,
            d2v: -lambda * y[0],
        });
        return Ok(Run {
            samples,
            t,
            y: [y[0], 0.0],
            stopped: true,
        });
    }
    Ok(Run {
        samples,
        t: out.t,
        y: out.y,
        stopped: out.stopped,
    })
}

/// Locates the zero of `v'` inside one step by bisection on the step length.
fn polish_root<F>(f: &F, t0: f64, y0: &State, h: f64) -> (f64, State)
where
    F: Fn(f64, &State) -> State,
{
    let (mut lo, mut hi) = (0.0, h);
    let mut y_hi = ode::dp5_step(f, t0, y0, h).0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y = ode::dp5_step(f, t0, y0, mid).0;
        if y[1] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            y_hi = y;
        }
    }
    (t0 + hi, y_hi)
}

/// Integrates the model ODE on `[a, b]` from `v(a) = -1, v'(a) = 0`.
pub fn shoot(problem: &ModelProblem, lambda: f64, a: f64, b: f64) -> Result<Trajectory> {
    problem.check_interval(a, b)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidModel(format!("λ must be positive, got {lambda}")));
    }
    let r = run(problem, lambda, a, b, Mode::ToEnd, (b - a) / 100.0, true)?;
    let terminal = *r.samples.last().expect("trajectory has samples");
    Ok(Trajectory {
        lambda,
        interval: (a, b),
        samples: r.samples,
        terminal,
    })
}

/// Whether `v'` reaches zero on `(a, b]` for this `λ`, i.e. `λ >= λ₁(a, b)`.
fn slope_vanishes(problem: &ModelProblem, lambda: f64, a: f64, b: f64) -> Result<bool> {
    let r = run(problem, lambda, a, b, Mode::SlopeSign, (b - a) / 16.0, false)?;
    if r.stopped {
        return Ok(true);
    }
    if problem.is_singular(b) {
        // Regular solutions satisfy v'(b - ε) ≈ (λ/N) v ε near a singular end.
        let eps = offset(problem, a, b);
        let n = series_order_n(problem);
        Ok(r.y[1] - lambda / n * r.y[0] * eps <= 0.0)
    } else {
        Ok(r.y[1] <= 0.0)
    }
}

/// First Neumann eigenvalue of `L_{K,N}` on `(a, b)` in the given chart.
pub fn lambda1_interval(problem: &ModelProblem, a: f64, b: f64) -> Result<f64> {
    problem.check_interval(a, b)?;
    let len = b - a;
    let mut lo = 1e-6;
    let mut tries = 0;
    while slope_vanishes(problem, lo, a, b)? {
        lo *= 0.01;
        tries += 1;
        if tries > 10 {
            return Err(Error::Solver(format!(
                "no eigenvalue bracket on ({a}, {b}): v' vanishes for tiny λ"
            )));
        }
    }
    let mut hi = (4.0 * PI * PI / (len * len)).max(2.0 * lo);
    let mut grown = 0;
    while !slope_vanishes(problem, hi, a, b)? {
        lo = hi;
        hi *= 2.0;
        grown += 1;
        if grown > 200 {
            return Err(Error::Solver(format!("no eigenvalue bracket on ({a}, {b})")));
        }
    }
    while hi - lo > LAMBDA_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if slope_vanishes(problem, mid, a, b)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest admissible diameter `π sqrt((N-1)/K)` for `K > 0`, finite `N`.
pub(crate) fn myers_diameter(k: f64, n: Dimension) -> Option<f64> {
    match n {
        Dimension::Finite(n) if k > 0.0 => Some(PI * ((n - 1.0) / k).sqrt()),
        _ => None,
    }
}

/// The sharp bound `λ₁(K,N,d)`: first Neumann eigenvalue of the centered
/// model on `(-d/2, d/2)`.
pub fn lambda1_model(k: f64, n: Dimension, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "d",
            value: d,
            domain: "(0, inf)".into(),
        });
    }
    let problem = ModelProblem::centered(k, n)?;
    if let Some(d_max) = myers_diameter(k, n) {
        if d > d_max * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain {
                what: "d",
                value: d,
                domain: format!("(0, {d_max}]"),
            });
        }
        if d >= d_max * (1.0 - 1e-12) {
            return Ok(n.lichnerowicz(k));
        }
    }
    debug_assert!(matches!(
        problem.chart(),
        Chart::Tan | Chart::Tanh | Chart::Flat | Chart::Linear | Chart::Constant(_)
    ));
    lambda1_interval(&problem, -0.5 * d, 0.5 * d)
}
