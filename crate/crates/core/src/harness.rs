//! End-to-end checks of the spectral-gap bound and the comparison theorems on
//! configured cases, plus report emission.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CaseConfig, SuiteConfig};
use crate::domain::{
    analytic_diameter, build_domain, curvature_certificate, diameter, CurvatureCertificate,
    DiscreteDomain,
};
use crate::eigensolver::{discrete_gradient, minimize_rayleigh, EigenResult};
use crate::error::{Error, Result};
use crate::model1d::{fit_model_solution, lambda1_model, model_solution};
use crate::norms::{sphere_maximize, NormSpec};

/// Floor of the discretization tolerance.
pub const MIN_TOLERANCE: f64 = 1e-8;
/// `u` is multiplied by `1 - SHRINK` before model fitting so its range sits
/// strictly inside the range of the model solution.
pub const SHRINK: f64 = 1e-6;
/// Safety factor on the affine-fit slope error.
pub const TOLERANCE_FACTOR: f64 = 10.0;
pub const MAXIMA_TOLERANCE: f64 = 1e-3;
pub const LICHNEROWICZ_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithinTol,
    Violated,
}

impl Verdict {
    pub fn from_margin(margin: f64, tolerance: f64) -> Self {
        if margin >= 0.0 {
            Verdict::Holds
        } else if margin >= -tolerance {
            Verdict::HoldsWithinTol
        } else {
            Verdict::Violated
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterSource {
    Analytic,
    Graph,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolutionResult {
    pub resolution: f64,
    pub h: f64,
    pub nodes: usize,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub case_id: String,
    pub lambda_numeric: f64,
    pub diameter_used: f64,
    pub diameter_source: DiameterSource,
    pub graph_diameter: f64,
    pub certificate: CurvatureCertificate,
    pub bound: f64,
    pub margin: f64,
    /// Spectral error bar from mesh halving.
    pub discretization_tolerance: f64,
    /// Stencil error bar: gap between graph and analytic diameters.
    pub geometric_tolerance: f64,
    pub verdict: Verdict,
    pub resolutions: Vec<ResolutionResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Checked,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub status: CheckStatus,
    /// Fraction of tested nodes satisfying the inequality within tolerance.
    pub fraction: f64,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub nodes_checked: usize,
    /// Largest `|lhs - rhs|` over nodes with a full stencil.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ComparisonReport {
    fn inconclusive(note: String) -> Self {
        Self {
            status: CheckStatus::Inconclusive,
            fraction: 0.0,
            worst_violation: 0.0,
            tolerance: 0.0,
            nodes_checked: 0,
            equality_gap: None,
            max_u: None,
            model_max: None,
            note: Some(note),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LichnerowiczReport {
    pub applicable: bool,
    pub threshold: f64,
    pub lambda_numeric: f64,
    pub holds: bool,
    /// `λ₁(K,N,d) >= NK/(N-1)` for the case diameter.
    pub model_above_threshold: bool,
}

/// Eigenfunction rescaled so that `min = -(1 - SHRINK)` and
/// `max = k (1 - SHRINK)` with `k <= 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Normalization {
    /// `ũ = scale · u`; negative when the sign was flipped.
    pub scale: f64,
    pub k: f64,
    pub flipped: bool,
    pub shrink: f64,
}

impl Normalization {
    /// Scaling only: an additive offset would break the eigen-equation.
    pub fn of(u: &[f64]) -> Result<Self> {
        let (lo, hi) = u
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::ConstantFunction);
        }
        let flipped = -lo < hi;
        let (scale, k) = if flipped {
            (-1.0 / hi, -lo / hi)
        } else {
            (-1.0 / lo, hi / -lo)
        };
        Ok(Self {
            scale: scale * (1.0 - SHRINK),
            k,
            flipped,
            shrink: SHRINK,
        })
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|x| self.scale * x).collect()
    }
}

/// Everything produced while verifying one case.
#[derive(Debug, Clone)]
pub struct CaseRun {
    pub config: CaseConfig,
    pub report: BoundReport,
    pub domain: DiscreteDomain,
    pub eigen: EigenResult,
}

/// Diameter used in the bound: analytic for the built-in shapes.
pub fn case_diameter(case: &CaseConfig) -> Result<(f64, DiameterSource)> {
    let spec = case.finest()?;
    match analytic_diameter(&spec) {
        Ok(d) => Ok((d, DiameterSource::Analytic)),
        Err(_) => {
            let domain = build_domain(&spec)?;
            Ok((diameter(&domain, &spec.norm)?, DiameterSource::Graph))
        }
    }
}

/// Solves every resolution of a case and compares the finest eigenvalue with
/// the sharp bound `λ₁(K,N,d)`.
pub fn run_case(case: &CaseConfig) -> Result<CaseRun> {
    let wrap = |e: Error| Error::Case {
        id: case.id.clone(),
        source: Box::new(e),
    };
    run_case_inner(case).map_err(wrap)
}

fn run_case_inner(case: &CaseConfig) -> Result<CaseRun> {
    let mut resolutions = case.resolutions.clone();
    if resolutions.is_empty() {
        return Err(Error::Config("no resolutions".into()));
    }
    resolutions.sort_by(f64::total_cmp);
    let finest = case.spec(*resolutions.last().unwrap());
    let certificate = curvature_certificate(&finest)?;

    let mut results = Vec::new();
    let mut last = None;
    for &res in &resolutions {
        let domain = build_domain(&case.spec(res))?;
        let eigen = minimize_rayleigh(&domain, &case.norm, case.seed)?;
        results.push(ResolutionResult {
            resolution: res,
            h: domain.h(),
            nodes: domain.len(),
            lambda: eigen.lambda,
            iterations: eigen.iterations,
            converged: eigen.converged,
            residual: eigen.residual,
        });
        last = Some((domain, eigen));
    }
    let (domain, eigen) = last.unwrap();
    let lambda_numeric = eigen.lambda;
    let discretization_tolerance = match results.as_slice() {
        [.., a, b] => (2.0 * (a.lambda - b.lambda).abs()).max(MIN_TOLERANCE),
        _ => MIN_TOLERANCE,
    };
    let graph_diameter = diameter(&domain, &case.norm)?;
    let (diameter_used, diameter_source) = match analytic_diameter(&finest) {
        Ok(d) => (d, DiameterSource::Analytic),
        Err(_) => (graph_diameter, DiameterSource::Graph),
    };
    let bound = lambda1_model(certificate.k, certificate.n, diameter_used)?;
    let margin = lambda_numeric - bound;
    let report = BoundReport {
        case_id: case.id.clone(),
        lambda_numeric,
        diameter_used,
        diameter_source,
        graph_diameter,
        certificate,
        bound,
        margin,
        discretization_tolerance,
        geometric_tolerance: (graph_diameter - diameter_used).abs(),
        verdict: Verdict::from_margin(margin, discretization_tolerance),
        resolutions: results,
    };
    Ok(CaseRun {
        config: case.clone(),
        report,
        domain,
        eigen,
    })
}

pub fn verify_bound(case: &CaseConfig) -> Result<BoundReport> {
    Ok(run_case(case)?.report)
}

/// `max_{|ξ|=1} F*(ξ)`, converting Euclidean covector errors to dual-norm errors.
fn dual_scale(norm: &NormSpec) -> f64 {
    let n = norm.dim();
    if n == 1 {
        return norm.dual_unchecked(&[1.0]).max(norm.dual_unchecked(&[-1.0]));
    }
    sphere_maximize(n, |xi| norm.dual_unchecked(xi))
}

/// Largest slope error of the affine least-squares fit over a stencil; of
/// order `|D²u| h`.
fn affine_fit_error(domain: &DiscreteDomain, u: &[f64], i: usize, xi: &[f64]) -> f64 {
    domain.stencil[i]
        .iter()
        .map(|nb| {
            let pred: f64 = xi.iter().zip(&nb.displacement).map(|(a, b)| a * b).sum();
            let len = nb.displacement.iter().map(|x| x * x).sum::<f64>().sqrt();
            (u[nb.index] - u[i] - pred).abs() / len
        })
        .fold(0.0, f64::max)
}

/// Pointwise gradient comparison `F(∇u) <= v'(v⁻¹(u))` at interior nodes.
///
/// When the sign of `u` is flipped, `-u` is an eigenfunction for the reversed
/// norm `F(-·)`, whose dual at `D(-u)` equals `F*(Du)`; the certificate is
/// unchanged by reversal.
pub fn check_gradient_comparison(case: &CaseConfig, eigen: &EigenResult) -> Result<ComparisonReport> {
    let domain = build_domain(&case.finest()?)?;
    gradient_comparison_on(case, &domain, eigen)
}

pub fn gradient_comparison_on(
    case: &CaseConfig,
    domain: &DiscreteDomain,
    eigen: &EigenResult,
) -> Result<ComparisonReport> {
    let spec = case.finest()?;
    let cert = curvature_certificate(&spec)?;
    let norm = &case.norm;
    let normal = Normalization::of(&eigen.u)?;
    let u = normal.apply(&eigen.u);
    let model = match fit_model_solution(cert.k, cert.n, eigen.lambda, normal.k) {
        Ok(v) => v,
        Err(e) => {
            return Ok(ComparisonReport::inconclusive(format!("model fit failed: {e}")));
        }
    };
    let full_stencil = domain.stencil.iter().map(|s| s.len()).max().unwrap_or(0);
    let sign = if normal.flipped { -1.0 } else { 1.0 };
    let mut rows = Vec::new();
    let mut fit_error = 0.0f64;
    for i in 0..domain.len() {
        if domain.boundary[i] {
            continue;
        }
        let xi = discrete_gradient(domain, &u, i)?;
        fit_error = fit_error.max(affine_fit_error(domain, &u, i, &xi.0));
        let oriented: Vec<f64> = xi.0.iter().map(|x| sign * x).collect();
        let lhs = norm.dual_unchecked(&oriented);
        let rhs = model.slope_at_level(u[i]);
        rows.push((lhs, rhs, domain.stencil[i].len() == full_stencil));
    }
    if rows.is_empty() {
        return Ok(ComparisonReport::inconclusive("no interior nodes".into()));
    }
    let tolerance = TOLERANCE_FACTOR * fit_error * dual_scale(norm);
    let ok = rows.iter().filter(|(l, r, _)| *l <= r + tolerance).count();
    let worst = rows.iter().map(|(l, r, _)| (l - r).max(0.0)).fold(0.0, f64::max);
    let gap = rows
        .iter()
        .filter(|row| row.2)
        .map(|(l, r, _)| (l - r).abs())
        .fold(0.0, f64::max);
    Ok(ComparisonReport {
        status: CheckStatus::Checked,
        fraction: ok as f64 / rows.len() as f64,
        worst_violation: worst,
        tolerance,
        nodes_checked: rows.len(),
        equality_gap: Some(gap),
        max_u: Some(normal.k),
        model_max: Some(model.max_value),
        note: normal.flipped.then(|| "sign flipped; reversed norm".to_string()),
    })
}

/// `max u >= m_{K,N}` for `u` normalized to `min u = -1`.
pub fn check_maxima(case: &CaseConfig, eigen: &EigenResult) -> Result<ComparisonReport> {
    let cert = curvature_certificate(&case.finest()?)?;
    let Some(n) = cert.n.finite() else {
        return Ok(ComparisonReport::inconclusive("requires finite N".into()));
    };
    let threshold = cert.n.lichnerowicz(cert.k).max(0.0);
    if !(eigen.lambda > threshold) {
        return Ok(ComparisonReport::inconclusive(format!(
            "λ = {} does not exceed {threshold}",
            eigen.lambda
        )));
    }
    let normal = Normalization::of(&eigen.u)?;
    let m = match model_solution(cert.k, n, eigen.lambda) {
        Ok(v) => v.max_value,
        Err(e) => return Ok(ComparisonReport::inconclusive(format!("model solution failed: {e}"))),
    };
    let holds = normal.k >= m - MAXIMA_TOLERANCE;
    Ok(ComparisonReport {
        status: CheckStatus::Checked,
        fraction: if holds { 1.0 } else { 0.0 },
        worst_violation: (m - normal.k).max(0.0),
        tolerance: MAXIMA_TOLERANCE,
        nodes_checked: 1,
        equality_gap: None,
        max_u: Some(normal.k),
        model_max: Some(m),
        note: None,
    })
}

/// `λ >= NK/(N-1)` for `K > 0`, and the same for the model bound at `d`.
pub fn lichnerowicz_check(cert: &CurvatureCertificate, lambda_numeric: f64, d: Option<f64>) -> LichnerowiczReport {
    let threshold = cert.n.lichnerowicz(cert.k);
    if cert.k <= 0.0 {
        return LichnerowiczReport {
            applicable: false,
            threshold,
            lambda_numeric,
            holds: true,
            model_above_threshold: true,
        };
    }
    let model_above_threshold = match d.map(|d| lambda1_model(cert.k, cert.n, d)) {
        Some(Ok(l)) => l >= threshold - LICHNEROWICZ_TOLERANCE,
        Some(Err(_)) | None => true,
    };
    LichnerowiczReport {
        applicable: true,
        threshold,
        lambda_numeric,
        holds: lambda_numeric >= threshold - LICHNEROWICZ_TOLERANCE,
        model_above_threshold,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_comparison: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maxima: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lichnerowicz: Option<LichnerowiczReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

impl CaseReport {
    pub fn violated(&self) -> bool {
        self.bound.as_ref().is_some_and(|b| b.verdict == Verdict::Violated)
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct SuiteReport {
    pub cases: Vec<CaseReport>,
}

impl SuiteReport {
    pub fn any_violated(&self) -> bool {
        self.cases.iter().any(CaseReport::violated)
    }
}

fn full_case(case: &CaseConfig) -> (CaseReport, Option<CaseRun>) {
    let run = match run_case(case) {
        Ok(r) => r,
        Err(e) => {
            return (
                CaseReport {
                    id: case.id.clone(),
                    error: Some(e.to_string()),
                    bound: None,
                    gradient_comparison: None,
                    maxima: None,
                    lichnerowicz: None,
                    normalization: None,
                },
                None,
            )
        }
    };
    let as_report = |r: Result<ComparisonReport>| {
        r.unwrap_or_else(|e| ComparisonReport::inconclusive(e.to_string()))
    };
    let gradient = as_report(gradient_comparison_on(case, &run.domain, &run.eigen));
    let maxima = as_report(check_maxima(case, &run.eigen));
    let lich = lichnerowicz_check(
        &run.report.certificate,
        run.report.lambda_numeric,
        Some(run.report.diameter_used),
    );
    let report = CaseReport {
        id: case.id.clone(),
        error: None,
        bound: Some(run.report.clone()),
        gradient_comparison: Some(gradient),
        maxima: Some(maxima),
        lichnerowicz: Some(lich),
        normalization: Normalization::of(&run.eigen.u).ok(),
    };
    (report, Some(run))
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `x1..xn,u` rows for every node.
pub fn write_eigenfunction_csv(path: &Path, domain: &DiscreteDomain, u: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header: Vec<String> = (1..=domain.dim).map(|k| format!("x{k}")).collect();
    header.push("u".into());
    w.write_record(&header).map_err(csv_error)?;
    for (i, value) in u.iter().enumerate() {
        let mut row: Vec<String> = domain.node(i).iter().map(|x| x.to_string()).collect();
        row.push(value.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn write_bounds_csv(path: &Path, report: &BoundReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record([
        "resolution", "h", "nodes", "lambda", "iterations", "converged", "residual", "diameter",
        "bound", "margin",
    ])
    .map_err(csv_error)?;
    for r in &report.resolutions {
        w.write_record([
            r.resolution.to_string(),
            r.h.to_string(),
            r.nodes.to_string(),
            r.lambda.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.residual.to_string(),
            report.diameter_used.to_string(),
            report.bound.to_string(),
            (r.lambda - report.bound).to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs cases on `jobs` threads and writes `summary.json` plus per-case CSV
/// files into `out`. Case failures are recorded, not propagated.
pub fn run_suite(config: &SuiteConfig, out: &Path, jobs: usize) -> Result<SuiteReport> {
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Solver(e.to_string()))?;
    let mut results: Vec<(CaseReport, Option<CaseRun>)> =
        pool.install(|| config.cases.par_iter().map(full_case).collect());
    results.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    for (_, run) in &results {
        if let Some(run) = run {
            let stem = file_stem(&run.report.case_id);
            write_eigenfunction_csv(&out.join(format!("case-{stem}.csv")), &run.domain, &run.eigen.u)?;
            write_bounds_csv(&out.join(format!("case-{stem}-bounds.csv")), &run.report)?;
        }
    }
    let report = SuiteReport {
        cases: results.into_iter().map(|(r, _)| r).collect(),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(out.join("summary.json"), json)?;
    Ok(report)
}

/// Single-case variant of [`run_suite`].
pub fn verify_case(case: &CaseConfig, out: &Path) -> Result<CaseReport> {
    let cfg = SuiteConfig {
        cases: vec![case.clone()],
    };
    Ok(run_suite(&cfg, out, 1)?.cases.remove(0))
}
