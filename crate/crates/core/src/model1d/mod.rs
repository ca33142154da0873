//! One-dimensional model operators `L_{K,N} v = v'' - T(t) v'`.
//!
//! The first Neumann eigenvalue of `L_{K,N}` on a centered interval of length
//! `d` is the sharp lower bound `λ₁(K,N,d)`. Eigenvalues are computed by
//! shooting from the left endpoint with `v(a) = -1, v'(a) = 0` and bisecting on
//! `λ` until `v'` first vanishes exactly at the right endpoint.

mod fit;
mod ode;
mod shooting;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fit::{fit_model_solution, model_solution};
pub use shooting::{lambda1_interval, lambda1_model, shoot, Trajectory};

/// Dimension parameter `N ∈ (1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DimensionRepr", into = "DimensionRepr")]
pub enum Dimension {
    Finite(f64),
    Infinite,
}

impl Dimension {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Dimension::Finite(n) => Some(*n),
            Dimension::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Dimension::Infinite)
    }

    /// `NK/(N-1)`, the Lichnerowicz threshold (`K` itself when `N = ∞`).
    pub fn lichnerowicz(&self, k: f64) -> f64 {
        match self {
            Dimension::Finite(n) => n * k / (n - 1.0),
            Dimension::Infinite => k,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(n) => write!(f, "{n}"),
            Dimension::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Dimension::Infinite),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse dimension '{s}'")))
                .and_then(|n| {
                    if n.is_infinite() && n > 0.0 {
                        Ok(Dimension::Infinite)
                    } else {
                        Ok(Dimension::Finite(n))
                    }
                }),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DimensionRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<DimensionRepr> for Dimension {
    type Error = Error;

    fn try_from(r: DimensionRepr) -> Result<Self> {
        match r {
            DimensionRepr::Number(n) => Dimension::from_str(&n.to_string()),
            DimensionRepr::Text(s) => Dimension::from_str(&s),
        }
    }
}

impl From<Dimension> for DimensionRepr {
    fn from(d: Dimension) -> Self {
        match d {
            Dimension::Finite(n) => DimensionRepr::Number(n),
            Dimension::Infinite => DimensionRepr::Text("inf".into()),
        }
    }
}

/// Coordinate chart of the model operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// `T = sqrt(K(N-1)) tan(sqrt(K/(N-1)) t)`, `K > 0`.
    Tan,
    /// `T = -sqrt(-K(N-1)) tanh(sqrt(-K/(N-1)) t)`, `K < 0`, centered.
    Tanh,
    /// `T = -sqrt(-K(N-1)) coth(sqrt(-K/(N-1)) t)`, `K < 0`, off-center.
    Coth,
    /// `T = -(N-1)/t`, `K = 0`, off-center.
    Power,
    /// `T = 0`, `K = 0`, centered.
    Flat,
    /// `T = K t`, `N = ∞`.
    Linear,
    /// `T = c`, `K = 0`, `N = ∞`.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ChartDomain {
    Line,
    /// Open interval `(-half, half)`.
    Bounded { half: f64 },
    /// `t != 0`.
    Punctured,
}

/// `(K, N, chart)` defining `L_{K,N}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelProblem {
    k: f64,
    n: Dimension,
    chart: Chart,
}

impl ModelProblem {
    pub fn new(k: f64, n: Dimension, chart: Chart) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidModel(format!("K must be finite, got {k}")));
        }
        if let Dimension::Finite(nv) = n {
            if !(nv > 1.0 && nv.is_finite()) {
                return Err(Error::InvalidModel(format!("N must lie in (1, ∞], got {nv}")));
            }
        }
        let ok = match chart {
            Chart::Tan => k > 0.0 && !n.is_infinite(),
            Chart::Tanh | Chart::Coth => k < 0.0 && !n.is_infinite(),
            Chart::Power | Chart::Flat => k == 0.0 && !n.is_infinite(),
            Chart::Linear => k != 0.0 && n.is_infinite(),
            Chart::Constant(c) => k == 0.0 && n.is_infinite() && c.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidModel(format!(
                "chart {chart:?} is incompatible with K = {k}, N = {n}"
            )));
        }
        Ok(Self { k, n, chart })
    }

    /// The centered chart whose symmetric intervals define `λ₁(K,N,d)`.
    pub fn centered(k: f64, n: Dimension) -> Result<Self> {
        let chart = match n {
            Dimension::Infinite if k == 0.0 => Chart::Constant(0.0),
            Dimension::Infinite => Chart::Linear,
            Dimension::Finite(_) if k > 0.0 => Chart::Tan,
            Dimension::Finite(_) if k < 0.0 => Chart::Tanh,
            Dimension::Finite(_) => Chart::Flat,
        };
        Self::new(k, n, chart)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    fn n_minus_1(&self) -> f64 {
        self.n.finite().map(|n| n - 1.0).unwrap_or(f64::INFINITY)
    }

    /// Frequency `sqrt(|K|/(N-1))` of the trigonometric/hyperbolic charts.
    fn freq(&self) -> f64 {
        (self.k.abs() / self.n_minus_1()).sqrt()
    }

    /// Amplitude `sqrt(|K|(N-1))`.
    fn amp(&self) -> f64 {
        (self.k.abs() * self.n_minus_1()).sqrt()
    }

    fn domain(&self) -> ChartDomain {
        match self.chart {
            Chart::Tan => ChartDomain::Bounded {
                half: PI / (2.0 * self.freq()),
            },
            Chart::Coth | Chart::Power => ChartDomain::Punctured,
            _ => ChartDomain::Line,
        }
    }

    /// Length scale used for singular-endpoint offsets.
    pub(crate) fn scale(&self) -> Option<f64> {
        match self.chart {
            Chart::Tan | Chart::Coth => Some(1.0 / self.freq()),
            _ => None,
        }
    }

    fn domain_string(&self) -> String {
        match self.domain() {
            ChartDomain::Line => "(-inf, inf)".into(),
            ChartDomain::Bounded { half } => format!("(-{half}, {half})"),
            ChartDomain::Punctured => "(-inf, 0) U (0, inf)".into(),
        }
    }

    fn in_open_domain(&self, t: f64) -> bool {
        t.is_finite()
            && match self.domain() {
                ChartDomain::Line => true,
                ChartDomain::Bounded { half } => t.abs() < half,
                ChartDomain::Punctured => t != 0.0,
            }
    }

    fn in_closed_domain(&self, t: f64) -> bool {
        t.is_finite()
            && match self.domain() {
                ChartDomain::Bounded { half } => t.abs() <= half * (1.0 + 1e-14),
                _ => true,
            }
    }

    /// Whether `t` is a singular endpoint of the chart (where `T` blows up).
    pub(crate) fn is_singular(&self, t: f64) -> bool {
        match self.domain() {
            ChartDomain::Line => false,
            ChartDomain::Bounded { half } => (t.abs() - half).abs() <= 1e-14 * half,
            ChartDomain::Punctured => t == 0.0,
        }
    }

    /// Validates that `[a, b]` lies in the closure of one component of the
    /// chart domain.
    pub(crate) fn check_interval(&self, a: f64, b: f64) -> Result<()> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidModel(format!("need a < b, got ({a}, {b})")));
        }
        let ok = match self.domain() {
            ChartDomain::Line => true,
            ChartDomain::Bounded { .. } => self.in_closed_domain(a) && self.in_closed_domain(b),
            ChartDomain::Punctured => a >= 0.0 || b <= 0.0,
        };
        if !ok {
            return Err(Error::OutOfDomain {
                what: "interval endpoint",
                value: if self.in_closed_domain(a) { b } else { a },
                domain: self.domain_string(),
            });
        }
        Ok(())
    }

    /// Drift coefficient `T(t)`.
    pub fn coeff_t(&self, t: f64) -> Result<f64> {
        if !self.in_open_domain(t) {
            return Err(Error::OutOfDomain {
                what: "t",
                value: t,
                domain: self.domain_string(),
            });
        }
        Ok(self.drift(t))
    }

    pub(crate) fn drift(&self, t: f64) -> f64 {
        match self.chart {
            Chart::Tan => self.amp() * (self.freq() * t).tan(),
            Chart::Tanh => -self.amp() * (self.freq() * t).tanh(),
            Chart::Coth => -self.amp() / (self.freq() * t).tanh(),
            Chart::Power => -self.n_minus_1() / t,
            Chart::Flat => 0.0,
            Chart::Linear => self.k * t,
            Chart::Constant(c) => c,
        }
    }

    /// Density of the invariant measure `μ_{K,N}`, `exp(-∫T)` up to a constant.
    pub fn invariant_density(&self, t: f64) -> Result<f64> {
        if !self.in_closed_domain(t) {
            return Err(Error::OutOfDomain {
                what: "t",
                value: t,
                domain: self.domain_string(),
            });
        }
        let e = self.n_minus_1();
        Ok(match self.chart {
            Chart::Tan => (self.freq() * t).cos().max(0.0).powf(e),
            Chart::Tanh => (self.freq() * t).cosh().powf(e),
            Chart::Coth => (self.freq() * t).sinh().abs().powf(e),
            Chart::Power => t.abs().powf(e),
            Chart::Flat => 1.0,
            Chart::Linear => (-0.5 * self.k * t * t).exp(),
            Chart::Constant(c) => (-c * t).exp(),
        })
    }

    /// The chart seen through `t ↦ -t`: `T_reflected(t) = -T(-t)`.
    pub(crate) fn reflected(&self) -> Self {
        let chart = match self.chart {
            Chart::Constant(c) => Chart::Constant(-c),
            other => other,
        };
        Self { chart, ..*self }
    }
}

/// One point of a model solution: `(t, v, v', v'')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

/// Monotone Neumann eigenfunction `v` on `(a, b)` with `v(a) = -1`,
/// `v'(a) = v'(b) = 0` and `v' > 0` inside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSolution {
    pub problem: ModelProblem,
    pub interval: (f64, f64),
    pub lambda: f64,
    pub samples: Vec<Sample>,
    pub max_value: f64,
}

impl ModelSolution {
    pub fn min_value(&self) -> f64 {
        self.samples[0].v
    }

    fn segment(&self, t: f64) -> usize {
        let idx = self.samples.partition_point(|s| s.t <= t);
        idx.clamp(1, self.samples.len() - 1) - 1
    }

    /// `v(t)` by cubic Hermite interpolation of the dense table.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (s0, s1) = (self.samples[i], self.samples[i + 1]);
        hermite(s0.t, s1.t, s0.v, s1.v, s0.dv, s1.dv, t)
    }

    /// `v'(t)`.
    pub fn slope_at(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (s0, s1) = (self.samples[i], self.samples[i + 1]);
        hermite(s0.t, s1.t, s0.dv, s1.dv, s0.d2v, s1.d2v, t)
    }

    /// `v⁻¹(y)`; `y` is clamped to `[min v, max v]`.
    pub fn inverse(&self, y: f64) -> f64 {
        let first = self.samples[0];
        let last = *self.samples.last().unwrap();
        if y <= first.v {
            return first.t;
        }
        if y >= last.v {
            return last.t;
        }
        let idx = self.samples.partition_point(|s| s.v <= y);
        let i = idx.clamp(1, self.samples.len() - 1) - 1;
        let (s0, s1) = (self.samples[i], self.samples[i + 1]);
        let (mut lo, mut hi) = (s0.t, s1.t);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hermite(s0.t, s1.t, s0.v, s1.v, s0.dv, s1.dv, mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `v'(v⁻¹(y))`, the right-hand side of the gradient comparison.
    pub fn slope_at_level(&self, y: f64) -> f64 {
        self.slope_at(self.inverse(y)).max(0.0)
    }

    /// Mirror image `w(t) = -k v(-t)` where `k = 1/max v`, so that `w` again
    /// has minimum `-1` and maximum `1/max v`.
    pub(crate) fn reflected(&self) -> Self {
        let k = 1.0 / self.max_value;
        let samples: Vec<Sample> = self
            .samples
            .iter()
            .rev()
            .map(|s| Sample {
                t: -s.t,
                v: -k * s.v,
                dv: k * s.dv,
                d2v: -k * s.d2v,
            })
            .collect();
        let (a, b) = self.interval;
        Self {
            problem: self.problem.reflected(),
            interval: (-b, -a),
            lambda: self.lambda,
            max_value: samples.last().unwrap().v,
            samples,
        }
    }
}

fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    if h <= 0.0 {
        return y0;
    }
    let s = ((t - t0) / h).clamp(0.0, 1.0);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}
