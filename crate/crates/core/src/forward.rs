//! Forward-model abstraction shared by the collocation builder, the
//! posteriors and the samplers.

use crate::error::{Error, Result};
use crate::fem::{assemble, solve, SolverSettings};
use crate::gauss_field::KlBasis;
use crate::mesh::{Mesh, ObservationOperator};

/// A deterministic map `θ ↦ prediction vector`.
///
/// Implementations must be safe to evaluate from multiple threads; forward
/// solves at distinct parameter values carry no shared mutable state beyond
/// atomic cost counters.
pub trait ForwardModel: Send + Sync {
    fn parameter_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>>;

    fn check_dim(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_dim(),
                got: theta.len(),
            });
        }
        Ok(())
    }
}

/// The elliptic forward map `θ ↦ û(θ)`: KL field, assembly, PCG solve.
/// Every evaluation costs exactly one PDE solve on the settings' counter.
pub struct FemForward<'a> {
    mesh: &'a Mesh,
    basis: &'a KlBasis,
    settings: SolverSettings,
}

impl<'a> FemForward<'a> {
    pub fn new(mesh: &'a Mesh, basis: &'a KlBasis, settings: SolverSettings) -> Self {
        FemForward {
            mesh,
            basis,
            settings,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn basis(&self) -> &KlBasis {
        self.basis
    }
}

impl ForwardModel for FemForward<'_> {
    fn parameter_dim(&self) -> usize {
        self.basis.modes()
    }

    fn output_dim(&self) -> usize {
        self.mesh.num_interior()
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(theta)?;
        let field = self.basis.field_from_params(theta)?;
        let problem = assemble(self.mesh, &field, &self.settings)?;
        Ok(solve(&problem)?.interior)
    }
}

/// Composition `G ∘ h`: restricts a full-field forward model to the observed
/// nodes.
pub struct ObservedForward<'a> {
    inner: &'a dyn ForwardModel,
    operator: &'a ObservationOperator,
}

impl<'a> ObservedForward<'a> {
    pub fn new(inner: &'a dyn ForwardModel, operator: &'a ObservationOperator) -> Self {
        ObservedForward { inner, operator }
    }
}

impl ForwardModel for ObservedForward<'_> {
    fn parameter_dim(&self) -> usize {
        self.inner.parameter_dim()
    }

    fn output_dim(&self) -> usize {
        self.operator.len()
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.operator.apply(&self.inner.evaluate(theta)?))
    }
}

/// Wraps a closure as a forward model; used for analytic toys and test stubs.
pub struct FnForward<F> {
    parameter_dim: usize,
    output_dim: usize,
    f: F,
}

impl<F> FnForward<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(parameter_dim: usize, output_dim: usize, f: F) -> Self {
        FnForward {
            parameter_dim,
            output_dim,
            f,
        }
    }
}

impl<F> ForwardModel for FnForward<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn parameter_dim(&self) -> usize {
        self.parameter_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(theta)?;
        Ok((self.f)(theta))
    }
}
