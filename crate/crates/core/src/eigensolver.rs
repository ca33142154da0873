//! First nonzero Neumann eigenvalue of the discrete Finsler-Laplacian.
//!
//! The Dirichlet energy is assembled per lattice cell from corner gradients:
//! at every corner of a cell the gradient is read off the cell edges meeting
//! there, and the corner carries the weight `vol/2^n e^{-Ψ(corner)}`. Summed
//! over cells these weights reproduce the node measure, so the quotient
//! `Σ w F*²(ξ) / Σ m u²` is consistent with the mass. In one dimension this is
//! the P1 energy; for the Euclidean norm in two dimensions it is the five-point
//! Laplacian. Unlike a node-centred gradient, the corner gradient sees every
//! lattice edge, so no oscillating mode has zero energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::norms::{Covector, NormSpec};

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when `R` decreased by less than this (relative) over `window` steps.
    pub rel_decrease: f64,
    pub window: usize,
    pub armijo: f64,
    pub noise: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            rel_decrease: 1e-12,
            window: 10,
            armijo: 1e-4,
            noise: 1e-3,
        }
    }
}

/// Least-squares linear form `ξ` with `ξ(disp(i→j)) ≈ u(j) - u(i)` over the
/// stencil of node `i`.
pub fn discrete_gradient(domain: &DiscreteDomain, u: &[f64], i: usize) -> Result<Covector> {
    check_len(domain, u)?;
    if i >= domain.len() {
        return Err(Error::InvalidDomain(format!("node {i} out of range")));
    }
    let n = domain.dim;
    let mut gram = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    for nb in &domain.stencil[i] {
        let du = u[nb.index] - u[i];
        for a in 0..n {
            rhs[a] += nb.displacement[a] * du;
            for b in 0..n {
                gram[(a, b)] += nb.displacement[a] * nb.displacement[b];
            }
        }
    }
    let chol = gram.cholesky().ok_or(Error::RankDeficient(i))?;
    Ok(Covector(chol.solve(&rhs).iter().copied().collect()))
}

/// Corner-gradient form of the Dirichlet energy on a lattice domain.
#[derive(Debug, Clone)]
pub struct Energy {
    dim: usize,
    n_nodes: usize,
    weights: Vec<f64>,
    /// For term `t`, axis `k`: edge `(lo, hi)` at index `t * dim + k`.
    lo: Vec<usize>,
    hi: Vec<usize>,
    inv_h: Vec<f64>,
    mass: Vec<f64>,
}

impl Energy {
    pub fn new(domain: &DiscreteDomain) -> Self {
        let dim = domain.dim;
        let corners = 1usize << dim;
        let mut weights = Vec::with_capacity(domain.cells.len() * corners);
        let mut lo = Vec::with_capacity(weights.capacity() * dim);
        let mut hi = Vec::with_capacity(weights.capacity() * dim);
        for cell in &domain.cells {
            for mask in 0..corners {
                let node = cell.corners[mask];
                let psi = domain.weight.psi(domain.node(node));
                weights.push(cell.volume / corners as f64 * (-psi).exp());
                for k in 0..dim {
                    let bit = 1 << k;
                    lo.push(cell.corners[mask & !bit]);
                    hi.push(cell.corners[mask | bit]);
                }
            }
        }
        Self {
            dim,
            n_nodes: domain.len(),
            weights,
            lo,
            hi,
            inv_h: domain.spacing.iter().map(|h| 1.0 / h).collect(),
            mass: domain.node_measure.clone(),
        }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    fn term_gradient(&self, u: &[f64], t: usize, xi: &mut [f64]) {
        for k in 0..self.dim {
            let e = t * self.dim + k;
            xi[k] = (u[self.hi[e]] - u[self.lo[e]]) * self.inv_h[k];
        }
    }

    /// `Σ w F*²(ξ)` over all corner terms.
    pub fn value(&self, norm: &NormSpec, u: &[f64]) -> f64 {
        let mut xi = vec![0.0; self.dim];
        let mut sum = 0.0;
        for (t, w) in self.weights.iter().enumerate() {
            self.term_gradient(u, t, &mut xi);
            sum += w * norm.dual_unchecked(&xi).powi(2);
        }
        sum
    }

    /// Energy and its gradient with respect to the node values.
    pub fn value_and_gradient(&self, norm: &NormSpec, u: &[f64], grad: &mut [f64]) -> f64 {
        let dim = self.dim;
        // l^{-1}(ξ) per term, computed in parallel, scattered in a fixed order.
        let mut flux = vec![0.0; self.weights.len() * dim];
        let values: Vec<f64> = flux
            .par_chunks_mut(dim)
            .enumerate()
            .map_init(
                || vec![0.0; dim],
                |xi, (t, out)| {
                    self.term_gradient(u, t, xi);
                    self.weights[t] * norm.dual_sq_and_gradient(xi, out)
                },
            )
            .collect();
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (t, w) in self.weights.iter().enumerate() {
            for k in 0..dim {
                let e = t * dim + k;
                let c = 2.0 * w * flux[e] * self.inv_h[k];
                grad[self.hi[e]] += c;
                grad[self.lo[e]] -= c;
            }
        }
        values.iter().sum()
    }

    /// Dense stiffness matrix for a quadratic dual form `F*²(ξ) = ξᵀ B ξ`.
    fn stiffness(&self, b: &[f64]) -> faer::Mat<f64> {
        let dim = self.dim;
        let mut s = faer::Mat::<f64>::zeros(self.n_nodes, self.n_nodes);
        for (t, w) in self.weights.iter().enumerate() {
            for k in 0..dim {
                let ek = t * dim + k;
                for l in 0..dim {
                    let el = t * dim + l;
                    let c = w * b[k * dim + l] * self.inv_h[k] * self.inv_h[l];
                    if c == 0.0 {
                        continue;
                    }
                    for (p, sp) in [(self.hi[ek], 1.0), (self.lo[ek], -1.0)] {
                        for (q, sq) in [(self.hi[el], 1.0), (self.lo[el], -1.0)] {
                            s[(p, q)] += c * sp * sq;
                        }
                    }
                }
            }
        }
        s
    }
}

fn check_len(domain: &DiscreteDomain, u: &[f64]) -> Result<()> {
    if u.len() != domain.len() {
        return Err(Error::DimensionMismatch {
            expected: domain.len(),
            got: u.len(),
        });
    }
    Ok(())
}

fn check_norm(domain: &DiscreteDomain, norm: &NormSpec) -> Result<()> {
    if norm.dim() != domain.dim {
        return Err(Error::DimensionMismatch {
            expected: domain.dim,
            got: norm.dim(),
        });
    }
    Ok(())
}

fn weighted_mean(mass: &[f64], u: &[f64]) -> f64 {
    let total: f64 = mass.iter().sum();
    mass.iter().zip(u).map(|(m, x)| m * x).sum::<f64>() / total
}

fn m_dot(mass: &[f64], a: &[f64], b: &[f64]) -> f64 {
    mass.iter().zip(a).zip(b).map(|((m, x), y)| m * x * y).sum()
}

/// `R(u) = Σ w F*²(ξ) / Σ m (u - ū)²`.
pub fn rayleigh_quotient(domain: &DiscreteDomain, norm: &NormSpec, u: &[f64]) -> Result<f64> {
    check_len(domain, u)?;
    check_norm(domain, norm)?;
    rayleigh_with(&Energy::new(domain), norm, u)
}

pub(crate) fn rayleigh_with(energy: &Energy, norm: &NormSpec, u: &[f64]) -> Result<f64> {
    let mass = energy.mass();
    let mean = weighted_mean(mass, u);
    let centered: Vec<f64> = u.iter().map(|x| x - mean).collect();
    let denom = m_dot(mass, &centered, &centered);
    let scale = mass.iter().zip(u).map(|(m, x)| m * x * x).sum::<f64>();
    if !(denom > 1e-28 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::ConstantFunction);
    }
    Ok(energy.value(norm, &centered) / denom)
}

/// Max over nodes of the weak-form defect `|<Dφ_i, l⁻¹(Du)>_m - λ <u, φ_i>_m|`,
/// divided by `λ m_i max|u|`-scale so that it reads as a relative error.
pub fn weak_residual(domain: &DiscreteDomain, norm: &NormSpec, u: &[f64], lambda: f64) -> Result<f64> {
    check_len(domain, u)?;
    check_norm(domain, norm)?;
    Ok(residual_with(&Energy::new(domain), norm, u, lambda))
}

fn residual_with(energy: &Energy, norm: &NormSpec, u: &[f64], lambda: f64) -> f64 {
    let mut grad = vec![0.0; u.len()];
    energy.value_and_gradient(norm, u, &mut grad);
    let mass = energy.mass();
    let umax = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut worst = 0.0f64;
    for i in 0..u.len() {
        let defect = 0.5 * grad[i] - lambda * mass[i] * u[i];
        worst = worst.max((defect / mass[i]).abs());
    }
    worst / (lambda * umax).max(f64::MIN_POSITIVE)
}

/// Removes the weighted mean and scales to unit `L²(m)` norm.
fn normalize(mass: &[f64], u: &mut [f64]) {
    let mean = weighted_mean(mass, u);
    u.iter_mut().for_each(|x| *x -= mean);
    let n = m_dot(mass, u, u).sqrt();
    u.iter_mut().for_each(|x| *x /= n);
}

fn initial_guess(domain: &DiscreteDomain, seed: u64, noise: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = domain
        .spacing
        .first()
        .map(|_| {
            let xs = (0..domain.len()).map(|i| domain.node(i)[0]);
            let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            hi - lo
        })
        .unwrap_or(1.0);
    (0..domain.len())
        .map(|i| domain.node(i)[0] + noise * span * rng.gen_range(-1.0..1.0))
        .collect()
}

/// Minimizes the Rayleigh quotient over mean-zero functions.
pub fn minimize_rayleigh(domain: &DiscreteDomain, norm: &NormSpec, seed: u64) -> Result<EigenResult> {
    minimize_rayleigh_with(domain, norm, seed, &SolverOptions::default())
}

/// Riemannian nonlinear conjugate gradients (Polak-Ribière+) on the unit
/// `L²(m)` sphere of mean-zero functions, with Armijo backtracking.
pub fn minimize_rayleigh_with(
    domain: &DiscreteDomain,
    norm: &NormSpec,
    seed: u64,
    opts: &SolverOptions,
) -> Result<EigenResult> {
    check_norm(domain, norm)?;
    if domain.len() < 3 {
        return Err(Error::InvalidDomain("need at least 3 nodes".into()));
    }
    let energy = Energy::new(domain);
    let mass = energy.mass().to_vec();
    let n = mass.len();
    let project = |v: &mut [f64], u: &[f64]| {
        let mean = weighted_mean(&mass, v);
        v.iter_mut().for_each(|x| *x -= mean);
        let c = m_dot(&mass, v, u);
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
    };

    let mut u = initial_guess(domain, seed, opts.noise);
    normalize(&mass, &mut u);
    let mut grad = vec![0.0; n];
    let mut r_val = energy.value_and_gradient(norm, &u, &mut grad);
    // Euclidean gradient of R at a unit vector: ∇E - 2R M u; Riemannian: M⁻¹ of it.
    let riemannian = |grad: &[f64], u: &[f64], r: f64| -> (Vec<f64>, Vec<f64>) {
        let g: Vec<f64> = (0..n).map(|i| grad[i] - 2.0 * r * mass[i] * u[i]).collect();
        let rg: Vec<f64> = (0..n).map(|i| g[i] / mass[i]).collect();
        (g, rg)
    };
    let (mut g, mut rg) = riemannian(&grad, &u, r_val);
    project(&mut rg, &u);
    let mut d: Vec<f64> = rg.iter().map(|x| -x).collect();
    let mut history = vec![r_val];
    let mut step = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; n];

    let quotient = |v: &[f64]| energy.value(norm, v) / m_dot(&mass, v, v);

    while iterations < opts.max_iterations {
        iterations += 1;
        let mut slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            d = rg.iter().map(|x| -x).collect();
            slope = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if slope >= 0.0 {
                converged = true;
                break;
            }
        }
        let d_norm = m_dot(&mass, &d, &d).sqrt();
        let t0 = if step > 0.0 { step } else { 1e-2 / d_norm };
        for i in 0..n {
            trial[i] = u[i] + t0 * d[i];
        }
        let phi0 = quotient(&trial);
        // Parabola through φ(0), φ'(0), φ(t0).
        let curv = phi0 - r_val - slope * t0;
        let mut t = if curv > 0.0 {
            (-slope * t0 * t0 / (2.0 * curv)).min(4.0 * t0)
        } else {
            2.0 * t0
        };
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = u[i] + t * d[i];
            }
            let phi = quotient(&trial);
            if phi <= r_val + opts.armijo * t * slope {
                accepted = Some(t);
                break;
            }
            t *= 0.5;
        }
        let Some(t) = accepted else {
            // No descent is representable at this precision.
            converged = true;
            break;
        };
        step = t;
        u.copy_from_slice(&trial);
        normalize(&mass, &mut u);
        r_val = energy.value_and_gradient(norm, &u, &mut grad);
        let (g_new, mut rg_new) = riemannian(&grad, &u, r_val);
        project(&mut rg_new, &u);
        let denom: f64 = g.iter().zip(&rg).map(|(a, b)| a * b).sum();
        let num: f64 = g_new
            .iter()
            .zip(rg_new.iter().zip(&rg))
            .map(|(a, (b, c))| a * (b - c))
            .sum();
        let beta = if denom > 0.0 { (num / denom).max(0.0) } else { 0.0 };
        project(&mut d, &u);
        for i in 0..n {
            d[i] = -rg_new[i] + beta * d[i];
        }
        g = g_new;
        rg = rg_new;
        history.push(r_val);
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            if old - r_val < opts.rel_decrease * r_val {
                converged = true;
                break;
            }
        }
    }
    let lambda = r_val;
    let residual = residual_with(&energy, norm, &u, lambda);
    Ok(EigenResult {
        lambda,
        u,
        residual,
        iterations,
        converged,
        seed,
    })
}

/// Smallest Neumann eigenvalues (up to five, ascending) of the linear
/// operator obtained for a quadratic norm, by dense symmetric eigensolve.
pub fn dense_oracle(domain: &DiscreteDomain, norm: &NormSpec) -> Result<Vec<f64>> {
    const MAX_NODES: usize = 5000;
    check_norm(domain, norm)?;
    let b = norm.dual_quadratic_form().ok_or_else(|| {
        Error::InvalidNorm("dense oracle needs a euclidean or quadratic norm".into())
    })?;
    if domain.len() > MAX_NODES {
        return Err(Error::Solver(format!(
            "dense oracle limited to {MAX_NODES} nodes, got {}",
            domain.len()
        )));
    }
    let energy = Energy::new(domain);
    let s = energy.stiffness(&b);
    let inv_sqrt: Vec<f64> = energy.mass().iter().map(|m| 1.0 / m.sqrt()).collect();
    let n = domain.len();
    let h = faer::Mat::<f64>::from_fn(n, n, |i, j| s[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let mut ev = h
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Solver(format!("dense eigensolve failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    ev.truncate(5);
    Ok(ev)
}
