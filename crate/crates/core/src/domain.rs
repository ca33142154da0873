//! Discrete Finsler measure spaces over convex flat domains.
//!
//! A domain is a union of lattice cells. Nodes are cell corners; each node
//! carries the measure of its share of the incident cells weighted by
//! `e^{-Ψ}`. Distances use a radius-2 lattice stencil with directed edge
//! weights `F(displacement)`, so non-reversible norms give non-symmetric
//! distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model1d::Dimension;
use crate::norms::NormSpec;

/// Stencil radius in lattice steps (max-norm).
pub const STENCIL_RADIUS: i64 = 2;
pub const MIN_RESOLUTION: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `[-L/2, L/2]`.
    Interval { length: f64 },
    /// Centered box with the given side lengths.
    Box { lengths: Vec<f64> },
    /// Centered Euclidean ball; dimension taken from the norm.
    Ball { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    #[default]
    Lebesgue,
    /// `Ψ(x) = κ|x|²/2`, measure `e^{-Ψ} dx`.
    Gaussian { kappa: f64 },
}

impl Weight {
    pub fn psi(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Lebesgue => 0.0,
            Weight::Gaussian { kappa } => 0.5 * kappa * x.iter().map(|v| v * v).sum::<f64>(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    MinkowskiLebesgue,
    GaussianWeight,
    #[default]
    User,
}

/// Lower bound `Ric_N >= K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureCertificate {
    pub k: f64,
    pub n: Dimension,
    #[serde(default)]
    pub provenance: Provenance,
}

impl CurvatureCertificate {
    pub fn new(k: f64, n: Dimension, provenance: Provenance, dim: usize) -> Result<Self> {
        if let Dimension::Finite(nv) = n {
            if provenance != Provenance::User && nv < dim as f64 {
                return Err(Error::UnsupportedCertificate(format!(
                    "N = {nv} is below the dimension {dim}"
                )));
            }
            if nv <= 1.0 {
                return Err(Error::UnsupportedCertificate(format!("N = {nv} must exceed 1")));
            }
        }
        Ok(Self { k, n, provenance })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: Shape,
    pub norm: NormSpec,
    #[serde(default)]
    pub weight: Weight,
    /// Cells per unit length.
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CurvatureCertificate>,
}

impl DomainSpec {
    pub fn new(shape: Shape, norm: NormSpec, weight: Weight, resolution: f64) -> Self {
        Self {
            shape,
            norm,
            weight,
            resolution,
            certificate: None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Interval { .. } => 1,
            Shape::Box { lengths } => lengths.len(),
            Shape::Ball { .. } => self.norm.dim(),
        }
    }

    pub fn with_resolution(&self, resolution: f64) -> Self {
        Self {
            resolution,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::InvalidDomain("zero-dimensional domain".into()));
        }
        if self.norm.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.norm.dim(),
            });
        }
        if !(self.resolution >= MIN_RESOLUTION && self.resolution.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        let sizes: Vec<f64> = match &self.shape {
            Shape::Interval { length } => vec![*length],
            Shape::Box { lengths } => lengths.clone(),
            Shape::Ball { radius } => vec![*radius],
        };
        if sizes.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidDomain("shape sizes must be positive".into()));
        }
        if let Weight::Gaussian { kappa } = self.weight {
            if !kappa.is_finite() {
                return Err(Error::InvalidDomain("kappa must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub index: usize,
    pub displacement: Vec<f64>,
}

/// Lattice cell; `corners[mask]` is the corner offset by `+h_k` along every
/// axis `k` whose bit is set in `mask`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub corners: Vec<usize>,
    pub volume: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteDomain {
    pub dim: usize,
    pub spacing: Vec<f64>,
    /// Node coordinates, `dim` entries per node.
    pub coords: Vec<f64>,
    pub node_measure: Vec<f64>,
    pub stencil: Vec<Vec<Neighbor>>,
    pub boundary: Vec<bool>,
    pub cells: Vec<Cell>,
    pub weight: Weight,
}

impl DiscreteDomain {
    pub fn len(&self) -> usize {
        self.node_measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_measure.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_measure(&self) -> f64 {
        self.node_measure.iter().sum()
    }

    /// Largest lattice step.
    pub fn h(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Node closest to `x` in the Euclidean sense.
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        (0..self.len())
            .min_by(|&i, &j| {
                let di: f64 = self.node(i).iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
                let dj: f64 = self.node(j).iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
                di.total_cmp(&dj)
            })
            .unwrap_or(0)
    }
}

struct Lattice {
    dim: usize,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    cells_per_axis: Vec<usize>,
}

impl Lattice {
    fn nodes_per_axis(&self) -> Vec<usize> {
        self.cells_per_axis.iter().map(|c| c + 1).collect()
    }

    fn point(&self, idx: &[usize], shift: f64) -> Vec<f64> {
        (0..self.dim)
            .map(|k| self.origin[k] + (idx[k] as f64 + shift) * self.spacing[k])
            .collect()
    }
}

fn multi_indices(extent: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = extent.iter().product();
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; extent.len()];
        for k in (0..extent.len()).rev() {
            idx[k] = flat % extent[k];
            flat /= extent[k];
        }
        idx
    })
}

fn flat_index(idx: &[usize], extent: &[usize]) -> usize {
    idx.iter().zip(extent).fold(0, |acc, (i, e)| acc * e + i)
}

/// Builds the lattice discretization of a domain spec.
pub fn build_domain(spec: &DomainSpec) -> Result<DiscreteDomain> {
    spec.validate()?;
    let dim = spec.dim();
    let res = spec.resolution;
    let cells_for = |len: f64| ((len * res).round() as usize).max(1);
    let lattice = match &spec.shape {
        Shape::Interval { length } => Lattice {
            dim,
            origin: vec![-0.5 * length],
            spacing: vec![length / cells_for(*length) as f64],
            cells_per_axis: vec![cells_for(*length)],
        },
        Shape::Box { lengths } => Lattice {
            dim,
            origin: lengths.iter().map(|l| -0.5 * l).collect(),
            spacing: lengths.iter().map(|l| l / cells_for(*l) as f64).collect(),
            cells_per_axis: lengths.iter().map(|l| cells_for(*l)).collect(),
        },
        Shape::Ball { radius } => {
            let n = cells_for(2.0 * radius);
            Lattice {
                dim,
                origin: vec![-radius; dim],
                spacing: vec![2.0 * radius / n as f64; dim],
                cells_per_axis: vec![n; dim],
            }
        }
    };

    let node_extent = lattice.nodes_per_axis();
    let total_nodes: usize = node_extent.iter().product();
    let corner_count = 1usize << dim;
    let cell_volume: f64 = lattice.spacing.iter().product();

    // cells, addressed by lattice node index until nodes are numbered
    let mut raw_cells: Vec<Vec<usize>> = Vec::new();
    for idx in multi_indices(&lattice.cells_per_axis) {
        let inside = match &spec.shape {
            Shape::Ball { radius } => {
                let c = lattice.point(&idx, 0.5);
                c.iter().map(|x| x * x).sum::<f64>() <= radius * radius
            }
            _ => true,
        };
        if !inside {
            continue;
        }
        let corners = (0..corner_count)
            .map(|mask| {
                let mut cidx = idx.clone();
                for (k, c) in cidx.iter_mut().enumerate() {
                    if mask & (1 << k) != 0 {
                        *c += 1;
                    }
                }
                flat_index(&cidx, &node_extent)
            })
            .collect();
        raw_cells.push(corners);
    }
    if raw_cells.is_empty() {
        return Err(Error::InvalidDomain(
            "no lattice cell lies inside the shape at this resolution".into(),
        ));
    }

    let mut incident = vec![0usize; total_nodes];
    for c in &raw_cells {
        for &n in c {
            incident[n] += 1;
        }
    }
    let mut number = vec![usize::MAX; total_nodes];
    let mut lattice_of = Vec::new();
    for (flat, count) in incident.iter().enumerate() {
        if *count > 0 {
            number[flat] = lattice_of.len();
            lattice_of.push(flat);
        }
    }
    let n_nodes = lattice_of.len();
    let unflatten = |mut flat: usize| {
        let mut idx = vec![0usize; dim];
        for k in (0..dim).rev() {
            idx[k] = flat % node_extent[k];
            flat /= node_extent[k];
        }
        idx
    };

    let mut coords = Vec::with_capacity(n_nodes * dim);
    let mut node_measure = Vec::with_capacity(n_nodes);
    let mut boundary = Vec::with_capacity(n_nodes);
    for &flat in &lattice_of {
        let x = lattice.point(&unflatten(flat), 0.0);
        let share = incident[flat] as f64 * cell_volume / corner_count as f64;
        node_measure.push(share * (-spec.weight.psi(&x)).exp());
        boundary.push(incident[flat] < corner_count);
        coords.extend(x);
    }

    let offsets: Vec<Vec<i64>> = multi_indices(&vec![(2 * STENCIL_RADIUS + 1) as usize; dim])
        .map(|o| o.iter().map(|v| *v as i64 - STENCIL_RADIUS).collect::<Vec<i64>>())
        .filter(|o| o.iter().any(|v| *v != 0))
        .collect();
    let stencil = lattice_of
        .iter()
        .map(|&flat| {
            let idx = unflatten(flat);
            offsets
                .iter()
                .filter_map(|o| {
                    let mut j = Vec::with_capacity(dim);
                    for k in 0..dim {
                        let v = idx[k] as i64 + o[k];
                        if v < 0 || v >= node_extent[k] as i64 {
                            return None;
                        }
                        j.push(v as usize);
                    }
                    let target = number[flat_index(&j, &node_extent)];
                    (target != usize::MAX).then(|| Neighbor {
                        index: target,
                        displacement: (0..dim).map(|k| o[k] as f64 * lattice.spacing[k]).collect(),
                    })
                })
                .collect()
        })
        .collect();

    let cells = raw_cells
        .into_iter()
        .map(|c| Cell {
            corners: c.into_iter().map(|n| number[n]).collect(),
            volume: cell_volume,
        })
        .collect();

    Ok(DiscreteDomain {
        dim,
        spacing: lattice.spacing,
        coords,
        node_measure,
        stencil,
        boundary,
        cells,
        weight: spec.weight,
    })
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(domain: &DiscreteDomain, norm: &NormSpec, source: usize, backward: bool) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; domain.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    let mut neg = vec![0.0; domain.dim];
    while let Some(HeapItem(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        for nb in &domain.stencil[i] {
            let w = if backward {
                for (n, x) in neg.iter_mut().zip(&nb.displacement) {
                    *n = -x;
                }
                norm.norm_unchecked(&neg)
            } else {
                norm.norm_unchecked(&nb.displacement)
            };
            let cand = d + w;
            if cand < dist[nb.index] {
                dist[nb.index] = cand;
                heap.push(HeapItem(cand, nb.index));
            }
        }
    }
    dist
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

/// `d(x, ·)` from node `x` to every node.
pub fn forward_distances(domain: &DiscreteDomain, norm: &NormSpec, x: usize) -> Result<Vec<f64>> {
    check_norm(domain, norm)?;
    Ok(dijkstra(domain, norm, x, false))
}

/// `d(·, x)` from every node to node `x`.
pub fn backward_distances(domain: &DiscreteDomain, norm: &NormSpec, x: usize) -> Result<Vec<f64>> {
    check_norm(domain, norm)?;
    Ok(dijkstra(domain, norm, x, true))
}

/// Directed graph distance `d(x, y)`.
pub fn asymmetric_distance(
    domain: &DiscreteDomain,
    norm: &NormSpec,
    x: usize,
    y: usize,
) -> Result<f64> {
    if x >= domain.len() || y >= domain.len() {
        return Err(Error::InvalidDomain(format!(
            "node index out of range ({x}, {y}) for {} nodes",
            domain.len()
        )));
    }
    let d = forward_distances(domain, norm, x)?[y];
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Disconnected { from: x, to: y })
    }
}

/// Graph diameter: largest distance over ordered node pairs.
pub fn diameter(domain: &DiscreteDomain, norm: &NormSpec) -> Result<f64> {
    check_norm(domain, norm)?;
    let per_source: Vec<f64> = (0..domain.len())
        .into_par_iter()
        .map(|s| dijkstra(domain, norm, s, false).into_iter().fold(0.0, f64::max))
        .collect();
    let d = per_source.into_iter().fold(0.0, f64::max);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Disconnected { from: 0, to: 0 })
    }
}

/// Diameter of the continuum shape under its Minkowski norm.
///
/// Straight segments are geodesics, so for a box the supremum of the convex
/// function `F(y - x)` is attained at a pair of vertices; for a ball of radius
/// `R` it equals `2R max_{|w|=1} F(w)`.
pub fn analytic_diameter(spec: &DomainSpec) -> Result<f64> {
    spec.validate()?;
    let norm = &spec.norm;
    match &spec.shape {
        Shape::Interval { length } => Ok(length * norm.norm_unchecked(&[1.0]).max(norm.norm_unchecked(&[-1.0]))),
        Shape::Box { lengths } => {
            let dim = lengths.len();
            let vertices: Vec<Vec<f64>> = (0..1usize << dim)
                .map(|mask| {
                    (0..dim)
                        .map(|k| if mask & (1 << k) != 0 { 0.5 } else { -0.5 } * lengths[k])
                        .collect()
                })
                .collect();
            let mut best = 0.0f64;
            let mut diff = vec![0.0; dim];
            for x in &vertices {
                for y in &vertices {
                    for k in 0..dim {
                        diff[k] = y[k] - x[k];
                    }
                    best = best.max(norm.norm_unchecked(&diff));
                }
            }
            Ok(best)
        }
        Shape::Ball { radius } => Ok(2.0 * radius * norm.max_over_unit_sphere()),
    }
}

/// Curvature-dimension pair `(K, N)` for the supported (norm, weight)
/// families.
///
/// Minkowski space with Lebesgue measure has `Ric_N >= 0` with `N = n`. For
/// the Euclidean norm with Gaussian weight `Ψ = κ|x|²/2`, `(Ψ∘η)'' = κ` along
/// unit-speed lines, so `Ric_∞ >= κ`.
pub fn curvature_certificate(spec: &DomainSpec) -> Result<CurvatureCertificate> {
    let dim = spec.dim();
    if let Some(user) = spec.certificate {
        return CurvatureCertificate::new(user.k, user.n, Provenance::User, dim);
    }
    match spec.weight {
        Weight::Lebesgue => {
            // N must exceed 1; in one dimension any N works and K = 0 makes the
            // bound independent of N.
            let n = if dim >= 2 {
                Dimension::Finite(dim as f64)
            } else {
                Dimension::Infinite
            };
            CurvatureCertificate::new(0.0, n, Provenance::MinkowskiLebesgue, dim)
        }
        Weight::Gaussian { kappa } => {
            if matches!(spec.norm.family(), crate::norms::NormFamily::Euclidean) {
                CurvatureCertificate::new(kappa, Dimension::Infinite, Provenance::GaussianWeight, dim)
            } else {
                Err(Error::UnsupportedCertificate(
                    "Gaussian weights are certified only for the Euclidean norm; \
                     supply a user certificate"
                        .into(),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(len: f64, norm: NormSpec, res: f64) -> DiscreteDomain {
        build_domain(&DomainSpec::new(Shape::Interval { length: len }, norm, Weight::Lebesgue, res))
            .unwrap()
    }

    #[test]
    fn interval_lattice() {
        let d = interval(1.0, NormSpec::euclidean(1).unwrap(), 10.0);
        assert_eq!(d.len(), 11);
        assert!((d.node_measure[0] - 0.05).abs() < 1e-15);
        assert!((d.node_measure[5] - 0.1).abs() < 1e-15);
        assert!((d.total_measure() - 1.0).abs() < 1e-14);
        assert!(d.boundary[0] && d.boundary[10] && !d.boundary[3]);
        assert_eq!(d.stencil[5].len(), 4);
        assert_eq!(d.stencil[0].len(), 2);
    }

    #[test]
    fn box_lattice() {
        let spec = DomainSpec::new(
            Shape::Box { lengths: vec![1.0, 1.0] },
            NormSpec::euclidean(2).unwrap(),
            Weight::Lebesgue,
            10.0,
        );
        let d = build_domain(&spec).unwrap();
        assert_eq!(d.len(), 121);
        assert_eq!(d.cells.len(), 100);
        assert!((d.total_measure() - 1.0).abs() < 1e-13);
        let center = d.nearest_node(&[0.0, 0.0]);
        assert_eq!(d.stencil[center].len(), 24);
    }

    #[test]
    fn stencil_is_symmetric() {
        let spec = DomainSpec::new(
            Shape::Ball { radius: 1.0 },
            NormSpec::euclidean(2).unwrap(),
            Weight::Lebesgue,
            5.0,
        );
        let d = build_domain(&spec).unwrap();
        for (i, nbs) in d.stencil.iter().enumerate() {
            for nb in nbs {
                let back = d.stencil[nb.index].iter().find(|m| m.index == i).unwrap();
                for (a, b) in back.displacement.iter().zip(&nb.displacement) {
                    assert_eq!(*a, -*b);
                }
            }
        }
    }

    #[test]
    fn gaussian_measure_profile() {
        let spec = DomainSpec::new(
            Shape::Interval { length: 2.0 },
            NormSpec::euclidean(1).unwrap(),
            Weight::Gaussian { kappa: 1.0 },
            10.0,
        );
        let d = build_domain(&spec).unwrap();
        for i in 1..d.len() - 1 {
            let x = d.node(i)[0];
            assert!((d.node_measure[i] - 0.1 * (-0.5 * x * x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn two_slope_distances() {
        let d = interval(1.0, NormSpec::euclidean(1).unwrap(), 10.0);
        let f = NormSpec::two_slope(2.0, 0.5).unwrap();
        let last = d.len() - 1;
        assert!((asymmetric_distance(&d, &f, 0, last).unwrap() - 2.0).abs() < 1e-12);
        assert!((asymmetric_distance(&d, &f, last, 0).unwrap() - 0.5).abs() < 1e-12);
        assert!((diameter(&d, &f).unwrap() - 2.0).abs() < 1e-12);
        let back = backward_distances(&d, &f, last).unwrap();
        assert!((back[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn randers_box_distances() {
        let norm = NormSpec::randers(2, vec![1.0, 0.0, 0.0, 1.0], vec![0.5, 0.0]).unwrap();
        let spec = DomainSpec::new(
            Shape::Box { lengths: vec![1.0, 1.0] },
            norm.clone(),
            Weight::Lebesgue,
            8.0,
        );
        let d = build_domain(&spec).unwrap();
        let a = d.nearest_node(&[-0.5, -0.5]);
        let b = d.nearest_node(&[0.5, -0.5]);
        assert!((asymmetric_distance(&d, &norm, a, b).unwrap() - 1.5).abs() < 1e-12);
        assert!((asymmetric_distance(&d, &norm, b, a).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn euclidean_box_diameter() {
        let spec = DomainSpec::new(
            Shape::Box { lengths: vec![1.0, 1.0] },
            NormSpec::euclidean(2).unwrap(),
            Weight::Lebesgue,
            8.0,
        );
        let d = build_domain(&spec).unwrap();
        let g = diameter(&d, &spec.norm).unwrap();
        assert!((g / 2f64.sqrt() - 1.0).abs() < 0.03, "{g}");
        assert!((analytic_diameter(&spec).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let one = interval(1.0, NormSpec::euclidean(1).unwrap(), 10.0);
        assert!((diameter(&one, &NormSpec::euclidean(1).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn certificates() {
        let mut spec = DomainSpec::new(
            Shape::Box { lengths: vec![1.0, 1.0] },
            NormSpec::quadratic(2, vec![1.0, 0.0, 0.0, 4.0]).unwrap(),
            Weight::Lebesgue,
            8.0,
        );
        let c = curvature_certificate(&spec).unwrap();
        assert_eq!((c.k, c.n), (0.0, Dimension::Finite(2.0)));
        spec.weight = Weight::Gaussian { kappa: 1.0 };
        assert!(matches!(
            curvature_certificate(&spec),
            Err(Error::UnsupportedCertificate(_))
        ));
        spec.norm = NormSpec::euclidean(2).unwrap();
        let c = curvature_certificate(&spec).unwrap();
        assert_eq!((c.k, c.n), (1.0, Dimension::Infinite));
        spec.certificate = Some(CurvatureCertificate {
            k: -1.0,
            n: Dimension::Finite(4.0),
            provenance: Provenance::User,
        });
        let c = curvature_certificate(&spec).unwrap();
        assert_eq!((c.k, c.n, c.provenance), (-1.0, Dimension::Finite(4.0), Provenance::User));
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = DomainSpec::new(
            Shape::Box { lengths: vec![1.0, 1.0] },
            NormSpec::euclidean(2).unwrap(),
            Weight::Lebesgue,
            2.0,
        );
        assert!(matches!(build_domain(&spec), Err(Error::InvalidDomain(_))));
        let spec = DomainSpec::new(
            Shape::Interval { length: 1.0 },
            NormSpec::euclidean(2).unwrap(),
            Weight::Lebesgue,
            8.0,
        );
        assert!(matches!(build_domain(&spec), Err(Error::DimensionMismatch { .. })));
    }
}
