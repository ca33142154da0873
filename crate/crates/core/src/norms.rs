//! Minkowski norms on Rⁿ.
//!
//! A [`NormSpec`] is a positively 1-homogeneous, strongly convex norm that is
//! allowed to be non-reversible (`F(-v) != F(v)`). Every family carries a
//! closed-form dual norm `F*(ξ) = sup { ξ(v) : F(v) <= 1 }`, Legendre transform
//! `l(v) = g_v(v, ·)` and its inverse `l⁻¹ = ∇(½F*²)`.
//!
//! The Randers dual is itself a Randers norm on covectors: with `w = A⁻¹b` and
//! `β² = bᵀA⁻¹b < 1`,
//!
//! ```text
//! F*(ξ) = (sqrt((1 - β²) ξᵀA⁻¹ξ + (ξ·w)²) - ξ·w) / (1 - β²)
//! ```
//!
//! which is stored as `sqrt(ξᵀBξ) + c·ξ`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of the dual space (a linear form on Rⁿ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covector(pub Vec<f64>);

impl Covector {
    pub fn zeros(dim: usize) -> Self {
        Covector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Pairing ξ(v).
    pub fn apply(&self, v: &[f64]) -> f64 {
        dot(&self.0, v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Covector {
    fn from(v: Vec<f64>) -> Self {
        Covector(v)
    }
}

/// Parametric norm family.
#[derive(Debug, Clone, PartialEq)]
pub enum NormFamily {
    Euclidean,
    /// `F(v) = sqrt(vᵀAv)`, `A` symmetric positive definite (row-major).
    Quadratic { a: Vec<f64> },
    /// `F(v) = sqrt(vᵀAv) + b·v` with `|b|_{A⁻¹} < 1`.
    Randers { a: Vec<f64>, b: Vec<f64> },
    /// One-dimensional norm `F(v) = plus·v` for `v >= 0`, `minus·(-v)` for `v < 0`.
    TwoSlope { plus: f64, minus: f64 },
}

// Precomputed data for the hot paths.
#[derive(Debug, Clone, PartialEq)]
enum Cache {
    None,
    Quadratic {
        a_inv: Vec<f64>,
    },
    Randers {
        dual_b: Vec<f64>,
        dual_c: Vec<f64>,
    },
}

/// A Minkowski norm together with its dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormRecord", into = "NormRecord")]
pub struct NormSpec {
    family: NormFamily,
    dim: usize,
    cache: Cache,
}

impl NormSpec {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidNorm("dimension must be positive".into()));
        }
        Ok(Self {
            family: NormFamily::Euclidean,
            dim,
            cache: Cache::None,
        })
    }

    /// Quadratic norm from a row-major SPD matrix.
    pub fn quadratic(dim: usize, a: Vec<f64>) -> Result<Self> {
        let a_inv = spd_inverse(dim, &a)?;
        Ok(Self {
            family: NormFamily::Quadratic { a },
            dim,
            cache: Cache::Quadratic { a_inv },
        })
    }

    pub fn randers(dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if b.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: b.len(),
            });
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidNorm("drift covector must be finite".into()));
        }
        let a_inv = spd_inverse(dim, &a)?;
        let w = mat_vec(dim, &a_inv, &b);
        let beta2 = dot(&b, &w);
        if beta2 >= 1.0 {
            return Err(Error::InvalidNorm(format!(
                "Randers drift must satisfy |b|_(A^-1) < 1, got {}",
                beta2.sqrt()
            )));
        }
        let s = 1.0 - beta2;
        let mut dual_b = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                dual_b[i * dim + j] = (s * a_inv[i * dim + j] + w[i] * w[j]) / (s * s);
            }
        }
        let dual_c = w.iter().map(|x| -x / s).collect();
        Ok(Self {
            family: NormFamily::Randers { a, b },
            dim,
            cache: Cache::Randers {
                dual_b,
                dual_c,
            },
        })
    }

    pub fn two_slope(plus: f64, minus: f64) -> Result<Self> {
        if !(plus > 0.0 && minus > 0.0 && plus.is_finite() && minus.is_finite()) {
            return Err(Error::InvalidNorm(format!(
                "two-slope norm needs positive finite slopes, got ({plus}, {minus})"
            )));
        }
        Ok(Self {
            family: NormFamily::TwoSlope { plus, minus },
            dim: 1,
            cache: Cache::None,
        })
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether `F*²` is a quadratic form, i.e. the Finsler-Laplacian is linear.
    pub fn is_quadratic(&self) -> bool {
        matches!(
            self.family,
            NormFamily::Euclidean | NormFamily::Quadratic { .. }
        )
    }

    /// Matrix of the dual quadratic form `F*²(ξ) = ξᵀ S ξ`, for quadratic families.
    pub fn dual_quadratic_form(&self) -> Option<Vec<f64>> {
        match (&self.family, &self.cache) {
            (NormFamily::Euclidean, _) => Some(identity(self.dim)),
            (NormFamily::Quadratic { .. }, Cache::Quadratic { a_inv }) => Some(a_inv.clone()),
            _ => None,
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// `F(v)`.
    pub fn norm_eval(&self, v: &[f64]) -> Result<f64> {
        self.check(v.len())?;
        Ok(self.norm_unchecked(v))
    }

    pub(crate) fn norm_unchecked(&self, v: &[f64]) -> f64 {
        match &self.family {
            NormFamily::Euclidean => dot(v, v).sqrt(),
            NormFamily::Quadratic { a } => quad_form(self.dim, a, v).max(0.0).sqrt(),
            NormFamily::Randers { a, b } => {
                quad_form(self.dim, a, v).max(0.0).sqrt() + dot(b, v)
            }
            NormFamily::TwoSlope { plus, minus } => {
                if v[0] >= 0.0 {
                    plus * v[0]
                } else {
                    -minus * v[0]
                }
            }
        }
    }

    /// `F*(ξ)`.
    pub fn dual_norm_eval(&self, xi: &Covector) -> Result<f64> {
        self.check(xi.dim())?;
        Ok(self.dual_unchecked(xi.as_slice()))
    }

    pub(crate) fn dual_unchecked(&self, xi: &[f64]) -> f64 {
        match (&self.family, &self.cache) {
            (NormFamily::Euclidean, _) => dot(xi, xi).sqrt(),
            (NormFamily::Quadratic { .. }, Cache::Quadratic { a_inv }) => {
                quad_form(self.dim, a_inv, xi).max(0.0).sqrt()
            }
            (
                NormFamily::Randers { .. },
                Cache::Randers { dual_b, dual_c },
            ) => quad_form(self.dim, dual_b, xi).max(0.0).sqrt() + dot(dual_c, xi),
            (NormFamily::TwoSlope { plus, minus }, _) => {
                if xi[0] >= 0.0 {
                    xi[0] / plus
                } else {
                    -xi[0] / minus
                }
            }
            _ => unreachable!("norm cache out of sync with family"),
        }
    }

    /// Writes `l⁻¹(ξ) = ∇(½F*²)(ξ)` into `out` and returns `F*²(ξ)`.
    ///
    /// Allocation-free; this is the inner kernel of the energy assembly.
    pub(crate) fn dual_sq_and_gradient(&self, xi: &[f64], out: &mut [f64]) -> f64 {
        let n = self.dim;
        match (&self.family, &self.cache) {
            (NormFamily::Euclidean, _) => {
                out.copy_from_slice(xi);
                dot(xi, xi)
            }
            (NormFamily::Quadratic { .. }, Cache::Quadratic { a_inv }) => {
                mat_vec_into(n, a_inv, xi, out);
                dot(xi, out)
            }
            (
                NormFamily::Randers { .. },
                Cache::Randers { dual_b, dual_c },
            ) => {
                mat_vec_into(n, dual_b, xi, out);
                let alpha = dot(xi, out).max(0.0).sqrt();
                if alpha == 0.0 {
                    out.iter_mut().for_each(|x| *x = 0.0);
                    return 0.0;
                }
                let f = alpha + dot(dual_c, xi);
                for i in 0..n {
                    out[i] = f * (out[i] / alpha + dual_c[i]);
                }
                f * f
            }
            (NormFamily::TwoSlope { plus, minus }, _) => {
                let s = if xi[0] >= 0.0 { *plus } else { *minus };
                out[0] = xi[0] / (s * s);
                let f = xi[0] / s;
                f * f
            }
            _ => unreachable!("norm cache out of sync with family"),
        }
    }

    /// Legendre transform `l(v) = g_v(v, ·)`, with `l(0) = 0`.
    pub fn legendre(&self, v: &[f64]) -> Result<Covector> {
        self.check(v.len())?;
        let n = self.dim;
        let out = match &self.family {
            NormFamily::Euclidean => v.to_vec(),
            NormFamily::Quadratic { a } => mat_vec(n, a, v),
            NormFamily::Randers { a, b } => {
                let av = mat_vec(n, a, v);
                let alpha = dot(v, &av).max(0.0).sqrt();
                if alpha == 0.0 {
                    vec![0.0; n]
                } else {
                    let f = alpha + dot(b, v);
                    (0..n).map(|i| f * (av[i] / alpha + b[i])).collect()
                }
            }
            NormFamily::TwoSlope { plus, minus } => {
                let s = if v[0] >= 0.0 { *plus } else { *minus };
                vec![s * s * v[0]]
            }
        };
        Ok(Covector(out))
    }

    /// Inverse Legendre transform, the gradient of `½F*²` at `ξ`.
    pub fn legendre_inverse(&self, xi: &Covector) -> Result<Vec<f64>> {
        self.check(xi.dim())?;
        let mut out = vec![0.0; self.dim];
        self.dual_sq_and_gradient(xi.as_slice(), &mut out);
        Ok(out)
    }

    /// Fundamental tensor `g_ij(v) = ∂²(½F²)/∂v_i∂v_j`, row-major.
    pub fn metric_tensor(&self, v: &[f64]) -> Result<DMatrix<f64>> {
        self.check(v.len())?;
        if v.iter().all(|x| *x == 0.0) {
            return Err(Error::ZeroVector);
        }
        let n = self.dim;
        let g = match &self.family {
            NormFamily::Euclidean => DMatrix::identity(n, n),
            NormFamily::Quadratic { a } => DMatrix::from_row_slice(n, n, a),
            NormFamily::Randers { a, b } => {
                let am = DMatrix::from_row_slice(n, n, a);
                let av = &am * DVector::from_column_slice(v);
                let alpha = v.iter().zip(av.iter()).map(|(x, y)| x * y).sum::<f64>().sqrt();
                let f = alpha + dot(b, v);
                let ell = &av / alpha;
                let bv = DVector::from_column_slice(b);
                let lb = &ell + &bv;
                (am - &ell * ell.transpose()) * (f / alpha) + &lb * lb.transpose()
            }
            NormFamily::TwoSlope { plus, minus } => {
                let s = if v[0] >= 0.0 { *plus } else { *minus };
                DMatrix::from_element(1, 1, s * s)
            }
        };
        Ok(g)
    }

    /// `max { F(w) : |w| = 1 }` over Euclidean unit vectors.
    ///
    /// Closed form for reversible quadratic families; sampled with local
    /// refinement otherwise.
    pub fn max_over_unit_sphere(&self) -> f64 {
        match &self.family {
            NormFamily::Euclidean => 1.0,
            NormFamily::Quadratic { a } => {
                let m = DMatrix::from_row_slice(self.dim, self.dim, a);
                m.symmetric_eigenvalues().max().sqrt()
            }
            NormFamily::TwoSlope { plus, minus } => plus.max(*minus),
            NormFamily::Randers { .. } => sphere_maximize(self.dim, |w| self.norm_unchecked(w)),
        }
    }

    /// Sampled check of the norm axioms and the Fenchel inequality.
    pub fn validate_norm(&self, seed: u64) -> ValidationReport {
        const SAMPLES: usize = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim;
        let mut report = ValidationReport::default();
        let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        for _ in 0..SAMPLES {
            let v = sample(&mut rng);
            if v.iter().all(|x| *x == 0.0) {
                continue;
            }
            let t: f64 = rng.gen_range(0.0..10.0);
            let tv: Vec<f64> = v.iter().map(|x| t * x).collect();
            let f = self.norm_unchecked(&v);
            let ftv = self.norm_unchecked(&tv);
            report.record("homogeneity", (ftv - t * f).abs() / (1.0 + ftv));
            report.record("positivity", if f > 0.0 { 0.0 } else { 1.0 - f });

            if let Ok(g) = self.metric_tensor(&v) {
                let min_eig = g.symmetric_eigenvalues().min();
                report.record(
                    "positive_definite",
                    if min_eig > 0.0 { 0.0 } else { -min_eig + f64::EPSILON },
                );
            }

            let xi = sample(&mut rng);
            let pairing = dot(&xi, &v);
            let bound = f * self.dual_unchecked(&xi);
            let excess = pairing - bound * (1.0 + 1e-10);
            report.record("fenchel", excess.max(0.0));
        }
        report
    }
}

/// Outcome of [`NormSpec::validate_norm`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub worst_violation: f64,
    pub worst_check: Option<String>,
    pub samples: usize,
}

impl ValidationReport {
    const TOLERANCE: f64 = 1e-12;

    fn record(&mut self, check: &str, violation: f64) {
        if self.samples == 0 {
            self.passed = true;
        }
        self.samples += 1;
        if violation > self.worst_violation {
            self.worst_violation = violation;
            self.worst_check = Some(check.to_string());
        }
        self.passed = self.worst_violation <= Self::TOLERANCE;
    }
}

// ---------------------------------------------------------------------------
// Config record

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NormParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<f64>,
}

/// Serialized form `{family, dim, params}`; matrices are row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormRecord {
    pub family: String,
    pub dim: usize,
    #[serde(default)]
    pub params: NormParams,
}

impl TryFrom<NormRecord> for NormSpec {
    type Error = Error;

    fn try_from(r: NormRecord) -> Result<Self> {
        let need = |name: &str, x: Option<Vec<f64>>| {
            x.ok_or_else(|| Error::InvalidNorm(format!("{} norm needs params.{name}", r.family)))
        };
        match r.family.as_str() {
            "euclidean" => NormSpec::euclidean(r.dim),
            "quadratic" => NormSpec::quadratic(r.dim, need("a", r.params.a.clone())?),
            "randers" => NormSpec::randers(
                r.dim,
                need("a", r.params.a.clone())?,
                need("b", r.params.b.clone())?,
            ),
            "two_slope_1d" | "two_slope" => {
                if r.dim != 1 {
                    return Err(Error::InvalidNorm("two-slope norm is one-dimensional".into()));
                }
                let plus = r.params.plus.ok_or_else(|| Error::InvalidNorm("missing params.plus".into()))?;
                let minus = r.params.minus.ok_or_else(|| Error::InvalidNorm("missing params.minus".into()))?;
                NormSpec::two_slope(plus, minus)
            }
            other => Err(Error::InvalidNorm(format!("unknown norm family '{other}'"))),
        }
    }
}

impl From<NormSpec> for NormRecord {
    fn from(n: NormSpec) -> Self {
        let (family, params) = match n.family {
            NormFamily::Euclidean => ("euclidean", NormParams::default()),
            NormFamily::Quadratic { a } => (
                "quadratic",
                NormParams {
                    a: Some(a),
                    ..Default::default()
                },
            ),
            NormFamily::Randers { a, b } => (
                "randers",
                NormParams {
                    a: Some(a),
                    b: Some(b),
                    ..Default::default()
                },
            ),
            NormFamily::TwoSlope { plus, minus } => (
                "two_slope_1d",
                NormParams {
                    plus: Some(plus),
                    minus: Some(minus),
                    ..Default::default()
                },
            ),
        };
        NormRecord {
            family: family.to_string(),
            dim: n.dim,
            params,
        }
    }
}

// ---------------------------------------------------------------------------
// small dense helpers

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn quad_form(n: usize, m: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[i * n + j] * v[j];
        }
        s += v[i] * row;
    }
    s
}

fn mat_vec(n: usize, m: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    mat_vec_into(n, m, v, &mut out);
    out
}

fn mat_vec_into(n: usize, m: &[f64], v: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i] = (0..n).map(|j| m[i * n + j] * v[j]).sum();
    }
}

fn spd_inverse(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidNorm("dimension must be positive".into()));
    }
    if a.len() != n * n {
        return Err(Error::InvalidNorm(format!(
            "matrix needs {} entries, got {}",
            n * n,
            a.len()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidNorm("matrix entries must be finite".into()));
    }
    let m = DMatrix::from_row_slice(n, n, a);
    let asym = (&m - m.transpose()).abs().max();
    if asym > 1e-12 * m.abs().max().max(1.0) {
        return Err(Error::InvalidNorm("matrix is not symmetric".into()));
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::InvalidNorm("matrix is not positive definite".into()))?;
    let inv = chol.inverse();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            // symmetrize to kill round-off asymmetry
            out[i * n + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Ok(out)
}

/// Maximizes a continuous function over the Euclidean unit sphere by dense
/// sampling followed by shrinking-step hill climbing.
pub(crate) fn sphere_maximize(dim: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    if dim == 1 {
        return f(&[1.0]).max(f(&[-1.0]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let samples = 256 * dim;
    let mut best = vec![0.0; dim];
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..samples {
        let w: Vec<f64> = if dim == 2 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            vec![th.cos(), th.sin()]
        } else {
            normalized((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        };
        let val = f(&w);
        if val > best_val {
            best_val = val;
            best = w;
        }
    }
    let mut step = 0.1;
    while step > 1e-14 {
        let mut improved = false;
        for axis in 0..dim {
            for sign in [-1.0, 1.0] {
                let mut w = best.clone();
                w[axis] += sign * step;
                let w = normalized(w);
                let val = f(&w);
                if val > best_val {
                    best_val = val;
                    best = w;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best_val
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let n = dot(&w, &w).sqrt();
    w.iter_mut().for_each(|x| *x /= n);
    w
}
