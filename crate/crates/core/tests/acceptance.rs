//! Acceptance run: one pass/fail line per criterion.

mod common;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dual_sup, rel, sturm_liouville_lambda1, Density};
use finsler_gap::config::{CaseConfig, SuiteConfig};
use finsler_gap::domain::{
    asymmetric_distance, build_domain, forward_distances, DomainSpec, Shape, Weight,
};
use finsler_gap::eigensolver::{dense_oracle, minimize_rayleigh};
use finsler_gap::harness::{
    gradient_comparison_on, run_case, run_suite, CheckStatus, Verdict,
};
use finsler_gap::model1d::{lambda1_interval, lambda1_model, Chart, Dimension, ModelProblem};
use finsler_gap::norms::{Covector, NormSpec};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/golden.toml")
}

fn fin(n: f64) -> Dimension {
    Dimension::Finite(n)
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for n in [fin(2.0), fin(3.0), fin(10.0), Dimension::Infinite] {
        for d in [0.5, 1.0, 2.0] {
            let l = lambda1_model(0.0, n, d).map_err(|e| e.to_string())?;
            let r = rel(l, PI * PI / (d * d));
            worst = worst.max(r);
            ensure(r <= 1e-8, || format!("N={n} d={d}: {l} vs {}", PI * PI / (d * d)))?;
        }
    }
    Ok(format!("12 values, worst relative error {worst:.1e}"))
}

fn criterion_2() -> Outcome {
    let l = lambda1_model(1.0, fin(2.0), PI).map_err(|e| e.to_string())?;
    ensure((l - 2.0).abs() <= 1e-6, || format!("λ₁(1,2,π) = {l}"))?;
    let mut tightest = f64::INFINITY;
    for k in [0.25f64, 0.5, 1.0, 2.0, 4.0] {
        for n in [2.0f64, 2.5, 3.0, 5.0, 10.0] {
            let d_max = PI * ((n - 1.0) / k).sqrt();
            for frac in [0.1, 0.3, 0.5, 0.8, 0.99] {
                let d = frac * d_max;
                let l = lambda1_model(k, fin(n), d).map_err(|e| e.to_string())?;
                let floor = n * k / (n - 1.0);
                tightest = tightest.min(l - floor);
                ensure(l >= floor - 1e-8, || format!("K={k} N={n} d={d}: {l} < {floor}"))?;
            }
        }
    }
    Ok(format!("λ₁(1,2,π) = {l:.10}; 125 grid points, min excess {tightest:.2e}"))
}

struct ChartCase {
    k: f64,
    n: Dimension,
    chart: Chart,
    rho: Density,
    a: f64,
    b: f64,
}

fn oracle_cases() -> Vec<ChartCase> {
    let c = |k: f64, n: f64| (k.abs() / (n - 1.0)).sqrt();
    let half = |k: f64, n: f64| PI / (2.0 * c(k, n));
    let tan = |k: f64, n: f64, a: f64, b: f64| ChartCase {
        k,
        n: fin(n),
        chart: Chart::Tan,
        rho: Density::Cos { c: c(k, n), p: n - 1.0 },
        a,
        b,
    };
    let tanh = |k: f64, n: f64, a: f64, b: f64| ChartCase {
        k,
        n: fin(n),
        chart: Chart::Tanh,
        rho: Density::Cosh { c: c(k, n), p: n - 1.0 },
        a,
        b,
    };
    let coth = |k: f64, n: f64, a: f64, b: f64| ChartCase {
        k,
        n: fin(n),
        chart: Chart::Coth,
        rho: Density::Sinh { c: c(k, n), p: n - 1.0 },
        a,
        b,
    };
    let power = |n: f64, a: f64, b: f64| ChartCase {
        k: 0.0,
        n: fin(n),
        chart: Chart::Power,
        rho: Density::Power { p: n - 1.0 },
        a,
        b,
    };
    let flat = |n: f64, a: f64, b: f64| ChartCase {
        k: 0.0,
        n: fin(n),
        chart: Chart::Flat,
        rho: Density::Flat,
        a,
        b,
    };
    let linear = |k: f64, a: f64, b: f64| ChartCase {
        k,
        n: Dimension::Infinite,
        chart: Chart::Linear,
        rho: Density::Gauss { k },
        a,
        b,
    };
    vec![
        tan(1.0, 2.0, -1.0, 1.0),
        tan(1.0, 3.0, -half(1.0, 3.0), 0.5),
        tan(2.0, 4.0, -0.3, half(2.0, 4.0)),
        tan(1.0, 3.0, -half(1.0, 3.0), half(1.0, 3.0)),
        tanh(-1.0, 3.0, -1.0, 1.0),
        tanh(-1.0, 3.0, -0.5, 1.5),
        tanh(-2.0, 5.0, -2.0, 0.5),
        coth(-1.0, 3.0, 0.0, 2.0),
        coth(-1.0, 3.0, 0.3, 1.5),
        coth(-0.5, 2.0, 0.0, 1.0),
        power(3.0, 0.0, 1.0),
        power(2.0, 0.0, 1.0),
        power(2.5, 0.5, 2.0),
        power(4.0, 1.0, 1.5),
        flat(3.0, -0.5, 0.5),
        flat(2.0, 0.0, 2.0),
        linear(1.0, -2.0, 2.0),
        linear(1.0, -1.0, 3.0),
        linear(-1.0, -1.0, 1.0),
        linear(0.5, 0.0, 2.5),
    ]
}

fn criterion_3() -> Outcome {
    let cases = oracle_cases();
    let mut worst = 0.0f64;
    for c in &cases {
        let p = ModelProblem::new(c.k, c.n, c.chart).map_err(|e| e.to_string())?;
        let shot = lambda1_interval(&p, c.a, c.b).map_err(|e| e.to_string())?;
        let oracle = sturm_liouville_lambda1(c.rho, c.a, c.b, 4000);
        let r = rel(shot, oracle);
        worst = worst.max(r);
        ensure(r <= 1e-6, || {
            format!("{:?} K={} on ({}, {}): shooting {shot} vs oracle {oracle}", c.chart, c.k, c.a, c.b)
        })?;
    }
    Ok(format!("{} cases, worst relative gap {worst:.1e}", cases.len()))
}

fn criterion_4() -> Outcome {
    for (k, n) in [(1.0, fin(3.0)), (0.0, fin(2.0)), (-1.0, fin(4.0)), (1.0, Dimension::Infinite), (-1.0, Dimension::Infinite)] {
        let d_max = match n {
            Dimension::Finite(nv) if k > 0.0 => PI * ((nv - 1.0) / k).sqrt(),
            _ => 6.0,
        };
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let d = d_max * i as f64 / 21.0;
            let l = lambda1_model(k, n, d).map_err(|e| e.to_string())?;
            ensure(l < prev, || format!("K={k} N={n}: not decreasing at d={d}"))?;
            prev = l;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    let families: Vec<(f64, Dimension, Chart)> = vec![
        (1.0, fin(3.0), Chart::Tan),
        (-1.0, fin(3.0), Chart::Tanh),
        (-1.0, fin(3.0), Chart::Coth),
        (0.0, fin(3.0), Chart::Power),
        (0.0, fin(3.0), Chart::Flat),
        (1.0, Dimension::Infinite, Chart::Linear),
    ];
    for (k, n, chart) in families {
        let p = ModelProblem::new(k, n, chart).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let (a, b) = match chart {
                Chart::Tan => {
                    let half = PI / (2.0 * (k / 2.0f64).sqrt());
                    let a = rng.gen_range(-half..half - 0.5);
                    (a, rng.gen_range(a + 0.5..=half))
                }
                Chart::Coth | Chart::Power => {
                    let a = rng.gen_range(0.0..2.0);
                    (a, a + rng.gen_range(0.5..2.5))
                }
                _ => {
                    let a = rng.gen_range(-3.0..2.0);
                    (a, a + rng.gen_range(0.5..2.5))
                }
            };
            let off = lambda1_interval(&p, a, b).map_err(|e| e.to_string())?;
            let model = lambda1_model(k, n, b - a).map_err(|e| e.to_string())?;
            tightest = tightest.min(off - model);
            ensure(off >= model - 1e-8, || {
                format!("{chart:?} ({a}, {b}): {off} < model {model}")
            })?;
            checked += 1;
        }
    }
    // monotonicity in K is reported, not required
    let mut rising = 0;
    let ks = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
    for pair in ks.windows(2) {
        let lo = lambda1_model(pair[0], fin(3.0), 1.0).map_err(|e| e.to_string())?;
        let hi = lambda1_model(pair[1], fin(3.0), 1.0).map_err(|e| e.to_string())?;
        rising += usize::from(hi > lo);
    }
    Ok(format!(
        "monotone in d on 5 families; {checked} off-center intervals, min excess {tightest:.1e}; \
         increasing in K on {rising}/{} steps (N=3, d=1)",
        ks.len() - 1
    ))
}

fn box_spec(norm: NormSpec, res: f64) -> DomainSpec {
    DomainSpec::new(Shape::Box { lengths: vec![1.0, 1.0] }, norm, Weight::Lebesgue, res)
}

fn criterion_5() -> Outcome {
    let interval = DomainSpec::new(
        Shape::Interval { length: 1.0 },
        NormSpec::euclidean(1).unwrap(),
        Weight::Lebesgue,
        200.0,
    );
    let cases = [
        (interval, PI * PI),
        (box_spec(NormSpec::euclidean(2).unwrap(), 60.0), PI * PI),
        (
            box_spec(NormSpec::quadratic(2, vec![1.0, 0.0, 0.0, 4.0]).unwrap(), 60.0),
            PI * PI / 4.0,
        ),
    ];
    let mut lines = Vec::new();
    for (spec, exact) in cases {
        let domain = build_domain(&spec).map_err(|e| e.to_string())?;
        let res = minimize_rayleigh(&domain, &spec.norm, 0).map_err(|e| e.to_string())?;
        let ev = dense_oracle(&domain, &spec.norm).map_err(|e| e.to_string())?;
        let r_oracle = rel(res.lambda, ev[1]);
        let r_exact = rel(res.lambda, exact);
        ensure(r_oracle <= 1e-6, || format!("descent {} vs dense {}", res.lambda, ev[1]))?;
        ensure(r_exact <= 1e-2, || format!("descent {} vs analytic {exact}", res.lambda))?;
        lines.push(format!("{:.2e}/{:.2e}", r_oracle, r_exact));
    }
    Ok(format!("oracle/analytic gaps {}", lines.join(", ")))
}

fn criterion_6() -> Outcome {
    let spec = DomainSpec::new(
        Shape::Interval { length: 4.0 },
        NormSpec::euclidean(1).unwrap(),
        Weight::Gaussian { kappa: 1.0 },
        50.0,
    );
    let domain = build_domain(&spec).map_err(|e| e.to_string())?;
    let num = minimize_rayleigh(&domain, &spec.norm, 0).map_err(|e| e.to_string())?.lambda;
    let p = ModelProblem::new(1.0, Dimension::Infinite, Chart::Linear).map_err(|e| e.to_string())?;
    let model = lambda1_interval(&p, -2.0, 2.0).map_err(|e| e.to_string())?;
    let r = rel(num, model);
    ensure(r <= 1e-2, || format!("lattice {num} vs model {model}"))?;
    Ok(format!("lattice {num:.6} vs shooting {model:.6} (gap {r:.1e})"))
}

fn criterion_7_to_9() -> (Outcome, Outcome, Outcome) {
    let cfg = match SuiteConfig::load(&golden_path()) {
        Ok(c) => c,
        Err(e) => {
            let msg = Err(e.to_string());
            return (msg.clone(), msg.clone(), msg);
        }
    };
    let out = tempfile::tempdir().expect("temp dir");
    let report = match run_suite(&cfg, out.path(), 1) {
        Ok(r) => r,
        Err(e) => {
            let msg = Err(e.to_string());
            return (msg.clone(), msg.clone(), msg);
        }
    };

    let c7 = (|| -> Outcome {
        ensure(report.cases.len() == 8, || format!("{} golden cases", report.cases.len()))?;
        for case in &report.cases {
            let b = case
                .bound
                .as_ref()
                .ok_or_else(|| format!("{}: {}", case.id, case.error.clone().unwrap_or_default()))?;
            ensure(b.verdict != Verdict::Violated, || {
                format!("{}: margin {} below -{}", case.id, b.margin, b.discretization_tolerance)
            })?;
        }
        let sharp = report.cases.iter().find(|c| c.id == "1d-two-slope").and_then(|c| c.bound.clone());
        let sharp = sharp.ok_or("missing 1-D sharp case")?;
        ensure(sharp.margin.abs() <= 2.0 * sharp.discretization_tolerance, || {
            format!("1-D margin {} vs tolerance {}", sharp.margin, sharp.discretization_tolerance)
        })?;
        // non-reversible sharp case: F(v) = 2v forward, |v|/2 backward
        let extra = CaseConfig {
            id: "1d-two-slope-asym".into(),
            resolutions: vec![100.0, 200.0],
            seed: 0,
            domain: Shape::Interval { length: 1.0 },
            norm: NormSpec::two_slope(2.0, 0.5).unwrap(),
            weight: Weight::Lebesgue,
            certificate: None,
        };
        let run = run_case(&extra).map_err(|e| e.to_string())?;
        let b = &run.report;
        ensure(b.verdict != Verdict::Violated && b.margin.abs() <= 2.0 * b.discretization_tolerance, || {
            format!("asymmetric 1-D margin {} vs tolerance {}", b.margin, b.discretization_tolerance)
        })?;
        Ok(format!(
            "8 cases hold; sharp margins {:.1e} (tol {:.1e}) and {:.1e} (tol {:.1e})",
            sharp.margin, sharp.discretization_tolerance, b.margin, b.discretization_tolerance
        ))
    })();

    let c8 = (|| -> Outcome {
        let mut worst = 1.0f64;
        for case in &report.cases {
            let g = case.gradient_comparison.as_ref().ok_or_else(|| format!("{}: no report", case.id))?;
            ensure(g.status == CheckStatus::Checked, || {
                format!("{}: inconclusive ({})", case.id, g.note.clone().unwrap_or_default())
            })?;
            ensure(g.fraction >= 0.99, || format!("{}: fraction {}", case.id, g.fraction))?;
            worst = worst.min(g.fraction);
        }
        // equality cases: the gap between both sides shrinks like h²
        let mut ratios = Vec::new();
        for id in ["1d-two-slope", "box-euclidean"] {
            let case = cfg.cases.iter().find(|c| c.id == id).ok_or("missing case")?;
            let mut gaps = Vec::new();
            for &r in &case.resolutions {
                let mut single = case.clone();
                single.resolutions = vec![r];
                let run = run_case(&single).map_err(|e| e.to_string())?;
                let g = gradient_comparison_on(&single, &run.domain, &run.eigen).map_err(|e| e.to_string())?;
                gaps.push(g.equality_gap.unwrap_or(f64::INFINITY));
            }
            let ratio = gaps[0] / gaps[1];
            ensure(ratio >= 3.0, || format!("{id}: equality gap {gaps:?} not O(h²)"))?;
            ratios.push(format!("{id} {:.1e}->{:.1e}", gaps[0], gaps[1]));
        }
        Ok(format!("min fraction {worst:.3}; equality gaps {}", ratios.join(", ")))
    })();

    let c9 = (|| -> Outcome {
        let mut checked = 0;
        for case in &report.cases {
            let m = case.maxima.as_ref().ok_or_else(|| format!("{}: no report", case.id))?;
            if m.status == CheckStatus::Inconclusive {
                continue;
            }
            let (u, v) = (m.max_u.unwrap_or(f64::NAN), m.model_max.unwrap_or(f64::NAN));
            ensure(u >= v - 1e-3, || format!("{}: max u {u} < m {v}", case.id))?;
            checked += 1;
        }
        ensure(checked >= 5, || format!("only {checked} cases met the hypothesis"))?;
        Ok(format!("{checked} cases checked, the rest have N = ∞"))
    })();
    (c7, c8, c9)
}

fn criterion_10() -> Outcome {
    let mut runner = TestRunner::new(PropConfig {
        cases: 200,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let norm_strategy = (0.5f64..3.0, -0.8f64..0.8, 0.5f64..3.0, -0.7f64..0.7, -0.7f64..0.7).prop_filter_map(
        "valid Randers data",
        |(a11, a12, a22, b1, b2)| {
            let a = vec![a11, a12 * (a11 * a22).sqrt(), a12 * (a11 * a22).sqrt(), a22];
            NormSpec::randers(2, a, vec![b1, b2]).ok()
        },
    );
    let vec2 = (-2.0f64..2.0, -2.0f64..2.0).prop_filter("nonzero", |(x, y)| x.abs() + y.abs() > 1e-2);
    runner
        .run(&(norm_strategy, vec2.clone(), vec2, 0.01f64..20.0), |(norm, (x, y), (p, q), t)| {
            let v = [x, y];
            let f = norm.norm_eval(&v).unwrap();
            let ft = norm.norm_eval(&[t * x, t * y]).unwrap();
            prop_assert!((ft - t * f).abs() <= 1e-12 * (1.0 + ft));
            let xi = Covector(vec![p, q]);
            let dual = norm.dual_norm_eval(&xi).unwrap();
            prop_assert!(p * x + q * y <= f * dual * (1.0 + 1e-12) + 1e-14);
            let back = norm.legendre_inverse(&norm.legendre(&v).unwrap()).unwrap();
            prop_assert!((back[0] - x).abs() + (back[1] - y).abs() <= 1e-9 * (1.0 + f));
            let oracle = dual_sup(&norm, &xi.0);
            prop_assert!((dual - oracle).abs() <= 1e-7 * dual, "{} vs {}", dual, oracle);
            Ok(())
        })
        .map_err(|e| format!("norm properties: {e}"))?;

    let norm = NormSpec::randers(2, vec![1.5, 0.2, 0.2, 1.0], vec![0.4, -0.3]).unwrap();
    let domain = build_domain(&DomainSpec::new(Shape::Ball { radius: 1.0 }, norm.clone(), Weight::Lebesgue, 6.0))
        .map_err(|e| e.to_string())?;
    let n = domain.len();
    let mut runner = TestRunner::new(PropConfig {
        cases: 100,
        failure_persistence: None,
        ..PropConfig::default()
    });
    runner
        .run(&(0..n, 0..n, 0..n), |(x, y, z)| {
            let dxy = asymmetric_distance(&domain, &norm, x, y).unwrap();
            let dyz = asymmetric_distance(&domain, &norm, y, z).unwrap();
            let dxz = forward_distances(&domain, &norm, x).unwrap()[z];
            prop_assert!(dxz <= dxy + dyz + 1e-12);
            Ok(())
        })
        .map_err(|e| format!("directed triangle inequality: {e}"))?;

    // total measure converges to ∫ e^{-κ|x|²/2} over the box and to the ball area
    let erf_mass = |kappa: f64, half: f64| {
        // 1-D integral of e^{-κx²/2} over [-half, half] by composite Simpson
        let m = 20_000;
        let h = 2.0 * half / m as f64;
        let f = |x: f64| (-0.5 * kappa * x * x).exp();
        let mut s = f(-half) + f(half);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(-half + i as f64 * h);
        }
        s * h / 3.0
    };
    let exact = erf_mass(1.0, 3.0).powi(2);
    let mut errors = Vec::new();
    for res in [4.0, 8.0, 16.0] {
        let d = build_domain(&DomainSpec::new(
            Shape::Box { lengths: vec![6.0, 6.0] },
            NormSpec::euclidean(2).unwrap(),
            Weight::Gaussian { kappa: 1.0 },
            res,
        ))
        .map_err(|e| e.to_string())?;
        errors.push((d.total_measure() - exact).abs());
    }
    ensure(errors[0] > errors[1] && errors[1] > errors[2] && errors[2] < 1e-2 * exact, || {
        format!("gaussian measure errors {errors:?}")
    })?;
    let mut ball_err = Vec::new();
    for res in [10.0, 20.0, 40.0] {
        let d = build_domain(&DomainSpec::new(Shape::Ball { radius: 1.0 }, NormSpec::euclidean(2).unwrap(), Weight::Lebesgue, res))
            .map_err(|e| e.to_string())?;
        ball_err.push((d.total_measure() - PI).abs());
    }
    ensure(ball_err[2] < ball_err[0] && ball_err[2] < 0.02, || format!("ball measure errors {ball_err:?}"))?;
    Ok(format!(
        "200 norm samples, 100 triangles; measure errors {:.1e} -> {:.1e} (gaussian), {:.1e} -> {:.1e} (ball)",
        errors[0], errors[2], ball_err[0], ball_err[2]
    ))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: usize, title: &str, limit: Duration, start: Instant, outcome: Outcome| {
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {title} [{elapsed:.2?}]: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {n:>2} FAIL  {title} [{elapsed:.2?}]: {detail}");
            }
        }
    };
    let t = Instant::now();
    report(1, "sharp 1-D values", Duration::from_secs(1), t, criterion_1());
    let t = Instant::now();
    report(2, "Lichnerowicz endpoint", Duration::from_secs(10), t, criterion_2());
    let t = Instant::now();
    report(3, "model oracle equivalence", Duration::from_secs(30), t, criterion_3());
    let t = Instant::now();
    report(4, "monotonicity and off-center intervals", Duration::from_secs(60), t, criterion_4());
    let t = Instant::now();
    report(5, "eigensolver oracle", Duration::from_secs(120), t, criterion_5());
    let t = Instant::now();
    report(6, "weighted cross-validation", Duration::from_secs(30), t, criterion_6());
    let t = Instant::now();
    let (c7, c8, c9) = criterion_7_to_9();
    report(7, "main theorem suite", Duration::from_secs(600), t, c7);
    let t = Instant::now();
    report(8, "gradient comparison", Duration::from_secs(600), t, c8);
    let t = Instant::now();
    report(9, "maxima comparison", Duration::from_secs(600), t, c9);
    let t = Instant::now();
    report(10, "norm and domain properties", Duration::from_secs(60), t, criterion_10());
    if failures == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
