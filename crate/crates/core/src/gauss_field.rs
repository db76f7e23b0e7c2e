//! Squared-exponential Gaussian random field on the mesh, discretized by a
//! truncated Karhunen–Loève expansion `Ŷ = Uθ`.
//!
//! The covariance operator is discretized by Nyström collocation on the mesh
//! nodes with trapezoid quadrature weights, i.e. the symmetric eigenproblem
//! is solved for `B = W^{1/2} R W^{1/2}` and the basis columns are
//! `U_j = √λ_j · W^{-1/2} ψ_j`. At full rank this reproduces `U Uᵀ = R`
//! exactly, and the eigenvalues approximate the continuum spectrum, so the
//! captured-variance fraction is grid-insensitive.
//!
//! The leading eigenpair of this kernel on the unit square is simple but the
//! second and third eigenvalues coincide; within such degenerate groups the
//! eigenvectors are rotated onto fixed probe functionals so that the basis is
//! reproducible across eigensolver implementations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Parameters of the squared-exponential covariance
/// `R(x, y) = σ₁²σ₂² exp(−(x₁−y₁)²/l₁ − (x₂−y₂)²/l₂)`;
/// `len_sq_*` are the squared correlation lengths as they appear in the
/// denominator.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceSpec {
    pub sigma1: f64,
    pub sigma2: f64,
    pub len_sq1: f64,
    pub len_sq2: f64,
}

impl Default for CovarianceSpec {
    fn default() -> Self {
        CovarianceSpec {
            sigma1: 1.0,
            sigma2: 1.0,
            len_sq1: 1.0,
            len_sq2: 1.0,
        }
    }
}

impl CovarianceSpec {
    fn validate(&self) -> Result<()> {
        if [self.sigma1, self.sigma2, self.len_sq1, self.len_sq2]
            .iter()
            .all(|&v| v > 0.0 && v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::Config("covariance parameters must be positive".into()))
        }
    }
}

/// Evaluates the covariance kernel at a pair of points.
pub fn covariance(spec: &CovarianceSpec, x: (f64, f64), y: (f64, f64)) -> f64 {
    let s = spec.sigma1 * spec.sigma1 * spec.sigma2 * spec.sigma2;
    s * (-(x.0 - y.0).powi(2) / spec.len_sq1 - (x.1 - y.1).powi(2) / spec.len_sq2).exp()
}

/// Grid-sampled KL basis: `field = U θ` with `U_j = √λ_j · W^{-1/2} ψ_j`.
#[derive(Debug, Clone)]
pub struct KlBasis {
    node_count: usize,
    eigenvalues: Vec<f64>,
    /// column j, length `node_count`
    columns: Vec<Vec<f64>>,
    node_weights: Vec<f64>,
    captured_fraction: f64,
}

/// Decomposes the covariance over all mesh nodes and keeps the top `m` pairs.
pub fn kl_decompose(spec: &CovarianceSpec, mesh: &Mesh, m: usize) -> Result<KlBasis> {
    spec.validate()?;
    let n = mesh.num_nodes();
    if m == 0 || m > n {
        return Err(Error::Config(format!(
            "KL truncation m = {m} must lie in 1..={n}"
        )));
    }

    let weights = trapezoid_weights(mesh);
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();

    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let xi = mesh.node_coords(i);
        for j in i..n {
            let v = covariance(spec, xi, mesh.node_coords(j)) * sqrt_w[i] * sqrt_w[j];
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }

    let eigen = b
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::Eigensolve("covariance matrix"))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));

    let total_positive: f64 = eigen.eigenvalues.iter().filter(|&&v| v > 0.0).sum();
    let eigenvalues: Vec<f64> = order[..m].iter().map(|&k| eigen.eigenvalues[k]).collect();
    if eigenvalues[m - 1] <= 0.0 {
        return Err(Error::Config(format!(
            "KL truncation m = {m} exceeds the numerical rank"
        )));
    }
    let captured_fraction = eigenvalues.iter().sum::<f64>() / total_positive;

    let mut psi: Vec<Vec<f64>> = order[..m]
        .iter()
        .map(|&k| eigen.eigenvectors.column(k).iter().copied().collect())
        .collect();
    canonicalize_degenerate_groups(&eigenvalues, &mut psi, mesh);

    let columns: Vec<Vec<f64>> = psi
        .iter()
        .zip(&eigenvalues)
        .map(|(col, &lambda)| {
            let scale = lambda.sqrt();
            col.iter()
                .zip(&sqrt_w)
                .map(|(&v, &sw)| scale * v / sw)
                .collect()
        })
        .collect();

    Ok(KlBasis {
        node_count: n,
        eigenvalues,
        columns,
        node_weights: weights,
        captured_fraction,
    })
}

/// Trapezoid quadrature weights on the uniform node grid (product of 1-D
/// weights h·{½,1,…,1,½}).
fn trapezoid_weights(mesh: &Mesh) -> Vec<f64> {
    let n = mesh.cells_per_side();
    let h = mesh.spacing();
    let w1 = |k: usize| if k == 0 || k == n { 0.5 * h } else { h };
    (0..mesh.num_nodes())
        .map(|id| {
            let (a, b) = mesh.node_grid(id);
            w1(a) * w1(b)
        })
        .collect()
}

/// Rotates eigenvectors within groups of (numerically) equal eigenvalues onto
/// projections of fixed probe nodes, then fixes every column's sign so its
/// largest-magnitude entry is positive (first index wins ties).
fn canonicalize_degenerate_groups(eigenvalues: &[f64], psi: &mut [Vec<f64>], mesh: &Mesh) {
    let n = mesh.cells_per_side();
    let probes = [
        mesh.node_id(3 * n / 4, n / 2),
        mesh.node_id(n / 2, 3 * n / 4),
        mesh.node_id(3 * n / 4, 3 * n / 4),
        mesh.node_id(n / 4, n / 2),
        mesh.node_id(n / 2, n / 4),
    ];
    let tol = 1e-9 * eigenvalues.first().copied().unwrap_or(1.0).abs().max(1e-300);

    let m = eigenvalues.len();
    let mut start = 0;
    while start < m {
        let mut end = start;
        while end + 1 < m && (eigenvalues[end + 1] - eigenvalues[start]).abs() <= tol {
            end += 1;
        }
        let size = end - start + 1;
        if size > 1 {
            let group: Vec<Vec<f64>> = psi[start..=end].to_vec();
            let mut replacement: Vec<Vec<f64>> = Vec::with_capacity(size);
            for &probe in &probes {
                // project e_probe onto the eigenspace
                let mut cand = vec![0.0; group[0].len()];
                for col in &group {
                    let c = col[probe];
                    for (t, &v) in cand.iter_mut().zip(col) {
                        *t += c * v;
                    }
                }
                for done in &replacement {
                    let dot: f64 = done.iter().zip(&cand).map(|(a, b)| a * b).sum();
                    for (t, &v) in cand.iter_mut().zip(done) {
                        *t -= dot * v;
                    }
                }
                let norm: f64 = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    cand.iter_mut().for_each(|v| *v /= norm);
                    replacement.push(cand);
                }
                if replacement.len() == size {
                    break;
                }
            }
            // fall back to the eigensolver's basis if the probes were blind
            if replacement.len() == size {
                for (slot, col) in psi[start..=end].iter_mut().zip(replacement) {
                    *slot = col;
                }
            }
        }
        start = end + 1;
    }

    for col in psi.iter_mut() {
        let mut peak = 0usize;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[peak].abs() {
                peak = i;
            }
        }
        if col[peak] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

impl KlBasis {
    pub fn modes(&self) -> usize {
        self.columns.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Retained eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Fraction of total variance captured by the retained modes.
    pub fn captured_fraction(&self) -> f64 {
        self.captured_fraction
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Quadrature weights of the discrete inner product used by the
    /// eigensolve; columns satisfy `U_iᵀ W U_j = λ_j δ_ij`.
    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Maps parameters to the nodal log-permeability field, `Y = U θ`.
    pub fn field_from_params(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                got: theta.len(),
            });
        }
        let mut field = vec![0.0; self.node_count];
        for (col, &t) in self.columns.iter().zip(theta) {
            for (f, &u) in field.iter_mut().zip(col) {
                *f += t * u;
            }
        }
        Ok(field)
    }
}
