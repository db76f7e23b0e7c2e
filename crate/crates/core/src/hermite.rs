//! Normalized probabilists' Hermite polynomials, multivariate tensor basis,
//! multi-index enumeration, and Gauss–Hermite quadrature for the standard
//! Gaussian weight.
//!
//! The family `{H_k}` used throughout is orthonormal in `L²(ℝ, N(0,1))`:
//! `E[H_j(X) H_k(X)] = δ_jk` for `X ~ N(0,1)`, with `H_0 = 1`, `H_1(x) = x`,
//! `H_2(x) = (x² − 1)/√2`. Quadrature weights therefore sum to one and rules
//! integrate directly against the Gaussian measure.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Hard cap on enumerated basis sizes and tensor-grid node counts.
pub const SIZE_BUDGET: usize = 10_000_000;

/// An m-tuple of nonnegative integers indexing one multivariate Hermite
/// basis function `Φ_i(θ) = H_{i₁}(θ₁)⋯H_{i_m}(θ_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|i| = i₁ + ⋯ + i_m`.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }
}

/// Evaluates the normalized probabilists' Hermite polynomial `H_k(x)`.
///
/// Uses the stable three-term recurrence for the normalized family,
/// `H_{k+1}(x) = (x H_k(x) − √k H_{k−1}(x)) / √(k+1)`.
pub fn hermite_eval(order: u32, x: f64) -> f64 {
    hermite_eval_all(order, x)[order as usize]
}

/// Evaluates `H_0(x), …, H_k(x)` in one recurrence pass.
pub fn hermite_eval_all(max_order: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_order as usize + 1);
    out.push(1.0);
    if max_order >= 1 {
        out.push(x);
    }
    for k in 1..max_order as usize {
        let next = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
        out.push(next);
    }
    out
}

/// Enumerates all multi-indices with `|i| ≤ order` in graded lexicographic
/// order (total degree first, then lexicographic), starting with the zero
/// index. The count is `binomial(order + dim, dim)`.
pub fn multi_indices(dim: usize, order: u32) -> Result<Vec<MultiIndex>> {
    if dim == 0 {
        return Err(Error::Config("multi-index dimension must be ≥ 1".into()));
    }
    let count = basis_size(dim, order)?;
    let mut out = Vec::with_capacity(count);
    let mut scratch = vec![0u32; dim];
    for degree in 0..=order {
        compositions(degree, 0, &mut scratch, &mut out);
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

/// `binomial(order + dim, dim)` with overflow checking against [`SIZE_BUDGET`].
pub fn basis_size(dim: usize, order: u32) -> Result<usize> {
    let mut count: u64 = 1;
    for j in 1..=dim as u64 {
        count = count
            .checked_mul(order as u64 + j)
            .ok_or_else(|| Error::BudgetExceeded("multi-index count overflows u64".into()))?
            / j;
        if count > SIZE_BUDGET as u64 {
            return Err(Error::BudgetExceeded(format!(
                "basis of {count} indices exceeds the budget of {SIZE_BUDGET}"
            )));
        }
    }
    Ok(count as usize)
}

fn compositions(remaining: u32, pos: usize, scratch: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for v in 0..=remaining {
        scratch[pos] = v;
        compositions(remaining - v, pos + 1, scratch, out);
    }
}

/// Evaluates the tensor basis function `Φ_i(θ)`.
pub fn phi_eval(index: &MultiIndex, theta: &[f64]) -> Result<f64> {
    if index.dim() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: index.dim(),
            got: theta.len(),
        });
    }
    Ok(index
        .entries()
        .iter()
        .zip(theta)
        .map(|(&k, &t)| hermite_eval(k, t))
        .product())
}

/// A one-dimensional quadrature rule for the standard Gaussian weight.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f dN(0,1)` approximated by the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Builds the `q`-node Gauss–Hermite rule for the standard Gaussian weight.
///
/// Nodes are the roots of `H_q`, obtained as eigenvalues of the symmetric
/// tridiagonal recurrence (Jacobi) matrix with off-diagonal `√k`; the weight
/// at node `i` is the squared first component of the corresponding normalized
/// eigenvector. The rule is exact for polynomials of degree `≤ 2q − 1` and
/// its weights sum to one.
pub fn gauss_hermite_rule(q: usize) -> Result<QuadratureRule> {
    if q == 0 {
        return Err(Error::Config("quadrature rule needs at least one node".into()));
    }
    if q == 1 {
        // mean of the Gaussian
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![1.0],
        });
    }
    let mut jacobi = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eigen = jacobi
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::Eigensolve("Jacobi matrix of the Hermite recurrence"))?;

    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &node)| {
            let first = eigen.eigenvectors[(0, i)];
            (node, first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // the exact rule is symmetric about zero; enforcing that keeps odd
    // Gaussian moments at the cancellation level instead of eigensolve noise
    for i in 0..q / 2 {
        let j = q - 1 - i;
        let magnitude = 0.5 * (pairs[j].0 - pairs[i].0);
        pairs[i].0 = -magnitude;
        pairs[j].0 = magnitude;
        let weight = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i].1 = weight;
        pairs[j].1 = weight;
    }
    if q % 2 == 1 {
        pairs[q / 2].0 = 0.0;
    }

    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let nodes = pairs.iter().map(|p| p.0).collect();
    let weights = pairs.iter().map(|p| p.1 / total).collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Tensor product of a one-dimensional rule over `ℝ^m`.
///
/// Nodes are enumerated in odometer order with the last dimension fastest:
/// node `k` has per-dimension digits `d_j = (k / q^{m−1−j}) mod q`.
#[derive(Debug, Clone)]
pub struct TensorRule {
    dim: usize,
    base: QuadratureRule,
}

/// Builds the `m`-fold tensor rule with `q` Gauss–Hermite nodes per dimension.
pub fn tensor_rule(dim: usize, q: usize) -> Result<TensorRule> {
    if dim == 0 {
        return Err(Error::Config("tensor rule dimension must be ≥ 1".into()));
    }
    let mut total: u64 = 1;
    for _ in 0..dim {
        total = total
            .checked_mul(q as u64)
            .ok_or_else(|| Error::BudgetExceeded("tensor node count overflows u64".into()))?;
        if total > SIZE_BUDGET as u64 {
            return Err(Error::BudgetExceeded(format!(
                "tensor grid of {q}^{dim} nodes exceeds the budget of {SIZE_BUDGET}"
            )));
        }
    }
    Ok(TensorRule {
        dim,
        base: gauss_hermite_rule(q)?,
    })
}

impl TensorRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes_per_dim(&self) -> usize {
        self.base.len()
    }

    /// Total number of tensor nodes, `q^m`.
    pub fn len(&self) -> usize {
        self.base.len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k`-th node (odometer order) and its product weight.
    pub fn node(&self, k: usize) -> (Vec<f64>, f64) {
        let q = self.base.len();
        let mut point = vec![0.0; self.dim];
        let mut weight = 1.0;
        let mut rest = k;
        for j in (0..self.dim).rev() {
            let digit = rest % q;
            rest /= q;
            point[j] = self.base.nodes()[digit];
            weight *= self.base.weights()[digit];
        }
        (point, weight)
    }

    /// `∫ f dN(0, I_m)` approximated by the tensor rule.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        (0..self.len())
            .map(|k| {
                let (point, weight) = self.node(k);
                weight * f(&point)
            })
            .sum()
    }
}
