//! Construction (by tensor stochastic collocation) and evaluation of the
//! truncated polynomial-chaos expansion of a vector-valued forward map, plus
//! pointwise error diagnostics against the exact model.
//!
//! Coefficients are projections `a_i = E[h(θ)Φ_i(θ)]`, computed with `N + 2`
//! Gauss–Hermite nodes per parameter so that products `h·Φ_i` of total degree
//! up to `2N` are integrated exactly when `h` is a polynomial of degree `≤ N`.
//! Forward solves at distinct tensor nodes run in parallel; the reduction
//! into coefficients is a fixed-order sum over nodes, so coefficient tables
//! are bit-reproducible.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::exec;
use crate::forward::ForwardModel;
use crate::hermite::{self, MultiIndex, TensorRule};
use crate::mesh::{eval_at_point, Mesh};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PceProvenance {
    pub quadrature_points_per_dim: usize,
    pub forward_solves: u64,
}

/// Truncated-PCE coefficient table: one output-dimension vector per
/// multi-index, in `multi_indices` order.
#[derive(Debug, Clone)]
pub struct PceModel {
    parameter_dim: usize,
    order: u32,
    indices: Vec<MultiIndex>,
    /// row i = coefficient vector a_i, length `output_dim`
    coefficients: Vec<Vec<f64>>,
    output_dim: usize,
    provenance: PceProvenance,
}

/// Builds the order-`N` PCE of `forward` by tensor collocation with
/// `q = N + 2` nodes per dimension; performs exactly `q^m` forward solves.
pub fn build_pce(forward: &dyn ForwardModel, order: u32) -> Result<PceModel> {
    if order % 2 != 0 {
        return Err(Error::Config(format!(
            "PCE order must be even, got {order}"
        )));
    }
    let m = forward.parameter_dim();
    let q = order as usize + 2;
    let rule = hermite::tensor_rule(m, q)?;
    let indices = hermite::multi_indices(m, order)?;
    let output_dim = forward.output_dim();
    let node_count = rule.len();

    // all forward solves are independent; results come back in node order
    let results = exec::map_indexed(node_count, |k| {
        let (theta, _) = rule.node(k);
        forward.evaluate(&theta)
    });
    let mut solutions = Vec::with_capacity(node_count);
    for (k, res) in results.into_iter().enumerate() {
        match res {
            Ok(v) => solutions.push(v),
            Err(e) => {
                return Err(Error::ForwardAtNode {
                    node: k,
                    source: Box::new(e),
                })
            }
        }
    }

    let coefficients = project_onto_basis(&rule, &indices, &solutions, output_dim, order);

    Ok(PceModel {
        parameter_dim: m,
        order,
        indices,
        coefficients,
        output_dim,
        provenance: PceProvenance {
            quadrature_points_per_dim: q,
            forward_solves: node_count as u64,
        },
    })
}

/// Fixed-order reduction of solved nodes into coefficient rows.
fn project_onto_basis(
    rule: &TensorRule,
    indices: &[MultiIndex],
    solutions: &[Vec<f64>],
    output_dim: usize,
    order: u32,
) -> Vec<Vec<f64>> {
    let m = rule.dim();
    let mut coefficients = vec![vec![0.0; output_dim]; indices.len()];
    let mut basis_1d: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (k, solution) in solutions.iter().enumerate() {
        let (theta, weight) = rule.node(k);
        basis_1d.clear();
        basis_1d.extend(theta.iter().map(|&t| hermite::hermite_eval_all(order, t)));
        for (row, index) in coefficients.iter_mut().zip(indices) {
            let phi: f64 = index
                .entries()
                .iter()
                .enumerate()
                .map(|(d, &deg)| basis_1d[d][deg as usize])
                .product();
            let scale = weight * phi;
            for (acc, &s) in row.iter_mut().zip(solution) {
                *acc += scale * s;
            }
        }
    }
    coefficients
}

impl PceModel {
    pub fn parameter_dim(&self) -> usize {
        self.parameter_dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn coefficient(&self, i: usize) -> &[f64] {
        &self.coefficients[i]
    }

    pub fn provenance(&self) -> &PceProvenance {
        &self.provenance
    }

    /// Evaluates `h_N(θ) = Σ a_i Φ_i(θ)`. Pure polynomial arithmetic; never
    /// touches the PDE-solve counter.
    pub fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.parameter_dim {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_dim,
                got: theta.len(),
            });
        }
        let basis_1d: Vec<Vec<f64>> = theta
            .iter()
            .map(|&t| hermite::hermite_eval_all(self.order, t))
            .collect();
        let mut out = vec![0.0; self.output_dim];
        for (row, index) in self.coefficients.iter().zip(&self.indices) {
            let phi: f64 = index
                .entries()
                .iter()
                .enumerate()
                .map(|(d, &deg)| basis_1d[d][deg as usize])
                .product();
            for (acc, &c) in out.iter_mut().zip(row) {
                *acc += phi * c;
            }
        }
        Ok(out)
    }

    /// Largest coefficient magnitude within each total degree, `k = 0..=N`.
    pub fn coefficient_decay(&self) -> Vec<f64> {
        let mut decay = vec![0.0f64; self.order as usize + 1];
        for (row, index) in self.coefficients.iter().zip(&self.indices) {
            let deg = index.total_degree() as usize;
            let mag = row.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            decay[deg] = decay[deg].max(mag);
        }
        decay
    }

    /// Writes the coefficient table as CSV: multi-index columns, then the
    /// coefficient vector, one row per index. A provenance comment precedes
    /// the header.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "# provenance m={} order={} quadrature_points_per_dim={} forward_solves={}",
            self.parameter_dim,
            self.order,
            self.provenance.quadrature_points_per_dim,
            self.provenance.forward_solves
        )?;
        let idx_cols: Vec<String> = (1..=self.parameter_dim).map(|j| format!("i{j}")).collect();
        let val_cols: Vec<String> = (0..self.output_dim).map(|j| format!("c{j}")).collect();
        writeln!(out, "{},{}", idx_cols.join(","), val_cols.join(","))?;
        for (row, index) in self.coefficients.iter().zip(&self.indices) {
            let idx: Vec<String> = index.entries().iter().map(|v| v.to_string()).collect();
            let vals: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{},{}", idx.join(","), vals.join(","))?;
        }
        Ok(())
    }

    /// Reads a model previously written by [`PceModel::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<PceModel> {
        let reader = BufReader::new(input);
        let mut lines = reader.lines();

        let bad = |msg: &str| Error::Config(format!("PCE table: {msg}"));
        let prov_line = lines.next().ok_or_else(|| bad("missing provenance"))??;
        let mut m = 0usize;
        let mut order = 0u32;
        let mut q = 0usize;
        let mut solves = 0u64;
        for token in prov_line.trim_start_matches('#').split_whitespace() {
            if let Some((key, value)) = token.split_once('=') {
                match key {
                    "m" => m = value.parse().map_err(|_| bad("bad m"))?,
                    "order" => order = value.parse().map_err(|_| bad("bad order"))?,
                    "quadrature_points_per_dim" => {
                        q = value.parse().map_err(|_| bad("bad quadrature"))?
                    }
                    "forward_solves" => solves = value.parse().map_err(|_| bad("bad solves"))?,
                    _ => {}
                }
            }
        }
        if m == 0 {
            return Err(bad("provenance lacks dimension"));
        }
        let _header = lines.next().ok_or_else(|| bad("missing header"))??;

        let expected = hermite::multi_indices(m, order)?;
        let mut indices = Vec::new();
        let mut coefficients = Vec::new();
        let mut output_dim = None;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() <= m {
                return Err(bad("row too short"));
            }
            let entries: Vec<u32> = fields[..m]
                .iter()
                .map(|f| f.parse().map_err(|_| bad("bad index entry")))
                .collect::<Result<_>>()?;
            let values: Vec<f64> = fields[m..]
                .iter()
                .map(|f| f.parse().map_err(|_| bad("bad coefficient")))
                .collect::<Result<_>>()?;
            match output_dim {
                None => output_dim = Some(values.len()),
                Some(d) if d == values.len() => {}
                Some(_) => return Err(bad("ragged coefficient rows")),
            }
            indices.push(MultiIndex::new(entries));
            coefficients.push(values);
        }
        if indices != expected {
            return Err(bad("index set does not match the declared order"));
        }
        Ok(PceModel {
            parameter_dim: m,
            order,
            indices,
            coefficients,
            output_dim: output_dim.ok_or_else(|| bad("empty table"))?,
            provenance: PceProvenance {
                quadrature_points_per_dim: q,
                forward_solves: solves,
            },
        })
    }
}

impl ForwardModel for PceModel {
    fn parameter_dim(&self) -> usize {
        self.parameter_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        PceModel::evaluate(self, theta)
    }
}

/// Pointwise surrogate-vs-model comparison at a spatial point.
#[derive(Debug, Clone, Copy)]
pub struct PointComparison {
    pub fem_value: f64,
    pub pce_value: f64,
    /// `100·|u − u_N| / |u|`
    pub relative_error_pct: f64,
}

/// Compares the surrogate against one fresh evaluation of the exact forward
/// model at mesh point `point` (both outputs interpreted as interior-node
/// fields of `mesh`).
pub fn pointwise_comparison(
    model: &PceModel,
    exact: &dyn ForwardModel,
    mesh: &Mesh,
    theta: &[f64],
    point: (f64, f64),
) -> Result<PointComparison> {
    let u_fem = exact.evaluate(theta)?;
    let u_pce = model.evaluate(theta)?;
    let fem_value = eval_at_point(mesh, &u_fem, point)?;
    let pce_value = eval_at_point(mesh, &u_pce, point)?;
    if fem_value.abs() < 1e-14 {
        return Err(Error::ReferenceTooSmall(fem_value.abs()));
    }
    Ok(PointComparison {
        fem_value,
        pce_value,
        relative_error_pct: 100.0 * (fem_value - pce_value).abs() / fem_value.abs(),
    })
}

/// Relative error (percent) of the surrogate at one mesh point; performs
/// exactly one fresh solve of the exact model.
pub fn relative_error_at(
    model: &PceModel,
    exact: &dyn ForwardModel,
    mesh: &Mesh,
    theta: &[f64],
    point: (f64, f64),
) -> Result<f64> {
    Ok(pointwise_comparison(model, exact, mesh, theta, point)?.relative_error_pct)
}
