//! Model solutions with prescribed extremes.

use std::f64::consts::PI;

use super::ode::State;
use super::shooting::{run, Mode};
use super::{Chart, Dimension, ModelProblem, ModelSolution, Sample};
use crate::error::{Error, Result};

/// Fits further than this from the target are rejected.
const FIT_ACCEPT: f64 = 1e-8;
const FIT_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 64;

fn check_lambda(k: f64, n: Dimension, lambda: f64) -> Result<()> {
    // The Lichnerowicz value itself is admitted for K > 0: the model solution
    // then runs to the far chart endpoint.
    let threshold = n.lichnerowicz(k).max(0.0);
    let admissible = if threshold > 0.0 {
        lambda >= threshold
    } else {
        lambda > 0.0
    };
    if !(admissible && lambda.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "lambda",
            value: lambda,
            domain: format!("({threshold}, inf)"),
        });
    }
    Ok(())
}

fn step_cap(lambda: f64) -> f64 {
    PI / (lambda.sqrt() * 100.0)
}

/// Shoots from `a` until the first zero of `v'`.
fn critical_solution(problem: ModelProblem, lambda: f64, a: f64) -> Result<ModelSolution> {
    let limit = match problem.chart() {
        Chart::Tan => PI / (2.0 * (problem.k() / (problem.n().finite().unwrap() - 1.0)).sqrt()),
        _ => a + 50.0 * PI / lambda.sqrt() + 50.0 * problem.scale().unwrap_or(0.0),
    };
    if !(limit > a) {
        return Err(Error::Solver(format!("start {a} is at the chart boundary")));
    }
    let mut r = run(&problem, lambda, a, limit, Mode::FirstCritical, step_cap(lambda), true)?;
    if !r.stopped && problem.chart() == Chart::Tan && r.y[1] >= 0.0 {
        // Regular at the singular end: b is the chart endpoint itself.
        let v = r.y[0];
        r.samples.push(Sample {
            t: limit,
            v,
            dv: 0.0,
            d2v: -lambda * v / problem.n().finite().unwrap_or(1.0),
        });
        r.t = limit;
        r.stopped = true;
    }
    if !r.stopped {
        return Err(Error::Solver(format!(
            "v' has no zero after a = {a} before the chart limit {limit}"
        )));
    }
    let max_value = r.y[0];
    Ok(ModelSolution {
        problem,
        interval: (a, r.t),
        lambda,
        samples: r.samples,
        max_value,
    })
}

/// `v_{K,N}`: the solution started at the chart's distinguished endpoint
/// (`-π/(2 sqrt(K/(N-1)))` for `K > 0`, `0` otherwise) and stopped at the first
/// critical point `b`. Its maximum is `m_{K,N}`.
pub fn model_solution(k: f64, n: f64, lambda: f64) -> Result<ModelSolution> {
    let dim = Dimension::Finite(n);
    let (chart, a) = if k > 0.0 {
        (Chart::Tan, -PI / (2.0 * (k / (n - 1.0)).sqrt()))
    } else if k == 0.0 {
        (Chart::Power, 0.0)
    } else {
        (Chart::Coth, 0.0)
    };
    let problem = ModelProblem::new(k, dim, chart)?;
    check_lambda(k, dim, lambda)?;
    critical_solution(problem, lambda, a)
}

/// Odd eigenfunction of a centered chart, scaled to `min = -1`, `max = 1`.
fn symmetric_solution(k: f64, n: Dimension, lambda: f64) -> Result<ModelSolution> {
    let problem = ModelProblem::centered(k, n)?;
    let limit = match problem.chart() {
        Chart::Tan => PI / (2.0 * (k / (n.finite().unwrap() - 1.0)).sqrt()) * (1.0 - 1e-9),
        _ => 50.0 * PI / lambda.sqrt(),
    };
    let rhs = |t: f64, y: &State| [y[1], problem.drift(t) * y[1] - lambda * y[0]];
    let mut half: Vec<Sample> = vec![Sample {
        t: 0.0,
        v: 0.0,
        dv: 1.0,
        d2v: problem.drift(0.0),
    }];
    let mut end: Option<(f64, State)> = None;
    let h_max = step_cap(lambda);
    super::ode::integrate(
        &rhs,
        0.0,
        [0.0, 1.0],
        limit,
        h_max,
        Default::default(),
        |tp, yp, t, y| {
            if y[1] <= 0.0 {
                let (mut lo, mut hi) = (0.0, t - tp);
                let mut y_hi = *y;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let ym = super::ode::dp5_step(&rhs, tp, yp, mid).0;
                    if ym[1] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                        y_hi = ym;
                    }
                }
                end = Some((tp + hi, y_hi));
                return super::ode::Control::Stop;
            }
            half.push(Sample {
                t,
                v: y[0],
                dv: y[1],
                d2v: problem.drift(t) * y[1] - lambda * y[0],
            });
            super::ode::Control::Continue
        },
    )?;
    let (b, yb) = end.ok_or_else(|| {
        Error::Solver("centered solution has no critical point inside the chart".into())
    })?;
    half.push(Sample {
        t: b,
        v: yb[0],
        dv: 0.0,
        d2v: -lambda * yb[0],
    });
    let scale = 1.0 / yb[0];
    let mut samples: Vec<Sample> = half
        .iter()
        .rev()
        .map(|s| Sample {
            t: -s.t,
            v: -s.v * scale,
            dv: s.dv * scale,
            d2v: -s.d2v * scale,
        })
        .collect();
    samples.pop();
    samples.extend(half.iter().map(|s| Sample {
        t: s.t,
        v: s.v * scale,
        dv: s.dv * scale,
        d2v: s.d2v * scale,
    }));
    Ok(ModelSolution {
        problem,
        interval: (-b, b),
        lambda,
        samples,
        max_value: 1.0,
    })
}

/// Scans a one-parameter family of solutions for the requested maximum and
/// refines the bracket by bisection.
///
/// A failed build (no critical point before the chart limit) is the limit of
/// solutions whose maximum grows without bound, so it counts as "above the
/// target" when bracketing.
fn fit_in_family<B>(params: &[f64], build: B, target: f64) -> Option<ModelSolution>
where
    B: Fn(f64) -> Result<ModelSolution>,
{
    let excess = |s: &Option<ModelSolution>| s.as_ref().map_or(f64::INFINITY, |s| s.max_value - target);
    let evals: Vec<Option<ModelSolution>> = params.iter().map(|&p| build(p).ok()).collect();
    for (i, pair) in evals.windows(2).enumerate() {
        if pair[0].is_none() && pair[1].is_none() {
            continue;
        }
        for s in pair.iter().flatten() {
            if (s.max_value - target).abs() <= FIT_TOL {
                return Some(s.clone());
            }
        }
        let (f0, f1) = (excess(&pair[0]), excess(&pair[1]));
        if f0.signum() == f1.signum() {
            continue;
        }
        let (mut lo, mut hi) = (params[i], params[i + 1]);
        let lo_sign = f0.signum();
        let mut best: Option<ModelSolution> = pair
            .iter()
            .flatten()
            .min_by(|a, b| (a.max_value - target).abs().total_cmp(&(b.max_value - target).abs()))
            .cloned();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let s = build(mid).ok();
            let f = excess(&s);
            if let Some(sol) = s {
                if best
                    .as_ref()
                    .map_or(true, |b| f.abs() < (b.max_value - target).abs())
                {
                    best = Some(sol);
                }
            }
            if f.abs() <= FIT_TOL {
                break;
            }
            if f.signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if let Some(b) = best {
            if (b.max_value - target).abs() <= FIT_ACCEPT {
                return Some(b);
            }
        }
    }
    None
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn lin_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// An interval of the `(K, N)` model family whose first Neumann eigenvalue is
/// `λ`, with eigenfunction normalized to `min v = -1`, `max v = target`.
///
/// Admissible targets are `[m_{K,N}, 1/m_{K,N}]` for finite `N` and `(0, ∞)`
/// for `N = ∞`.
pub fn fit_model_solution(k: f64, n: Dimension, lambda: f64, target: f64) -> Result<ModelSolution> {
    check_lambda(k, n, lambda)?;
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "k",
            value: target,
            domain: "(0, inf)".into(),
        });
    }
    if target > 1.0 + 1e-12 {
        return Ok(fit_model_solution(k, n, lambda, 1.0 / target)?.reflected());
    }
    if (target - 1.0).abs() <= 1e-12 {
        return symmetric_solution(k, n, lambda);
    }
    let s = 1.0 / lambda.sqrt();
    let found = match n {
        Dimension::Finite(nv) => {
            let m_sol = model_solution(k, nv, lambda)?;
            let m = m_sol.max_value;
            if target < m - 1e-12 {
                return Err(Error::OutOfDomain {
                    what: "k",
                    value: target,
                    domain: format!("[{m}, {}]", 1.0 / m),
                });
            }
            if (target - m).abs() <= 1e-12 {
                return Ok(m_sol);
            }
            if k > 0.0 {
                let p = ModelProblem::new(k, n, Chart::Tan)?;
                let half = PI / (2.0 * (k / (nv - 1.0)).sqrt());
                let grid = lin_grid(-half, 0.0, SCAN_POINTS);
                let mut grid = grid;
                grid[0] = m_sol.interval.0;
                fit_in_family(&grid, |a| critical_solution(p, lambda, a), target)
            } else if k == 0.0 {
                let p = ModelProblem::new(k, n, Chart::Power)?;
                let mut grid = vec![0.0];
                grid.extend(log_grid(1e-6 * s, 1e9 * s, SCAN_POINTS));
                fit_in_family(&grid, |a| critical_solution(p, lambda, a), target)
            } else {
                let coth = ModelProblem::new(k, n, Chart::Coth)?;
                let tanh = ModelProblem::new(k, n, Chart::Tanh)?;
                let scale = coth.scale().unwrap();
                let mut grid = vec![0.0];
                grid.extend(log_grid(1e-6 * scale.min(s), 1e3 * scale.max(s), SCAN_POINTS));
                fit_in_family(&grid, |a| critical_solution(coth, lambda, a), target).or_else(|| {
                    let span = 20.0 * scale + 20.0 * PI * s;
                    let grid = lin_grid(span, -span, 2 * SCAN_POINTS);
                    fit_in_family(&grid, |a| critical_solution(tanh, lambda, a), target)
                })
            }
        }
        Dimension::Infinite if k != 0.0 => {
            let p = ModelProblem::new(k, n, Chart::Linear)?;
            let span = 10.0 / k.abs().sqrt() + 10.0 * PI * s;
            let grid = lin_grid(-span, span, 2 * SCAN_POINTS);
            fit_in_family(&grid, |a| critical_solution(p, lambda, a), target)
        }
        Dimension::Infinite => {
            let c_max = 20.0 * lambda.sqrt();
            let grid = lin_grid(-c_max, c_max, 2 * SCAN_POINTS + 1);
            let build = |c: f64| {
                let p = ModelProblem::new(0.0, n, Chart::Constant(c))?;
                critical_solution(p, lambda, 0.0)
            };
            fit_in_family(&grid, build, target)
        }
    };
    match found {
        Some(sol) => Ok(sol),
        None if 1.0 - target <= 1e-8 => symmetric_solution(k, n, lambda),
        None => Err(Error::OutOfDomain {
            what: "k",
            value: target,
            domain: "achievable maxima of the model family".into(),
        }),
    }
}
