//! Finite-element forward model for the random elliptic equation
//! `−∇·(e^Y ∇u) = f` on the unit square with homogeneous Dirichlet
//! conditions, `f(x) = π² sin(πx₁) sin(πx₂)`.
//!
//! Piecewise-linear elements on the triangulated mesh; element integrals use
//! the 3-point mid-edge rule (exact for quadratics), with the coefficient
//! `e^Y` obtained by interpolating nodal `Y` linearly and exponentiating at
//! the quadrature points. The assembled interior operator is solved by
//! conjugate gradients with a Jacobi preconditioner.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Shared forward-solve counter. Every [`solve`] call adds exactly one,
/// whichever thread performs it; clones observe the same count.
#[derive(Debug, Clone, Default)]
pub struct SolveCounter(Arc<AtomicU64>);

impl SolveCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// CG stops when ‖r‖ ≤ rel_tol · ‖b‖.
    pub rel_tol: f64,
    pub max_iterations: usize,
    pub counter: SolveCounter,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            rel_tol: 1e-10,
            max_iterations: 2000,
            counter: SolveCounter::new(),
        }
    }
}

/// Compressed sparse row matrix, symmetric by construction here.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    fn from_triplets(n: usize, entries: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _) in entries.keys() {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        for (&(_, c), &v) in entries.iter() {
            cols.push(c);
            vals.push(v);
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            if self.cols[k] == c {
                return self.vals[k];
            }
        }
        0.0
    }
}

/// Assembled interior-node system for one nodal log-permeability field.
#[derive(Debug, Clone)]
pub struct FemProblem {
    pub operator: CsrMatrix,
    pub load: Vec<f64>,
    pub nodal_log_perm: Vec<f64>,
    pub settings: SolverSettings,
}

fn load_fn(x: f64, y: f64) -> f64 {
    PI * PI * (PI * x).sin() * (PI * y).sin()
}

/// Assembles stiffness and load over the interior nodes for nodal field `y`.
pub fn assemble(mesh: &Mesh, y: &[f64], settings: &SolverSettings) -> Result<FemProblem> {
    if y.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_nodes(),
            got: y.len(),
        });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("nodal log-permeability"));
    }

    let ni = mesh.num_interior();
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut load = vec![0.0; ni];

    for tri in mesh.triangles() {
        let p: Vec<(f64, f64)> = tri.iter().map(|&id| mesh.node_coords(id)).collect();
        let det = (p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1);
        let area = det.abs() / 2.0;
        // constant P1 gradients
        let gb = [p[1].1 - p[2].1, p[2].1 - p[0].1, p[0].1 - p[1].1];
        let gc = [p[2].0 - p[1].0, p[0].0 - p[2].0, p[1].0 - p[0].0];
        let grad = |r: usize| (gb[r] / (2.0 * area), gc[r] / (2.0 * area));

        // mid-edge quadrature: e^Y at an edge midpoint uses the mean of the
        // endpoint nodal values (P1 interpolation)
        const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];
        let mut coef = 0.0;
        for &(e0, e1) in &EDGES {
            let val = (area / 3.0) * (0.5 * (y[tri[e0]] + y[tri[e1]])).exp();
            if !val.is_finite() {
                return Err(Error::NonFinite("element coefficient e^Y"));
            }
            coef += val;
        }

        for r in 0..3 {
            let Some(ir) = mesh.interior_index(tri[r]) else {
                continue;
            };
            let (grx, gry) = grad(r);
            for s in 0..3 {
                if let Some(is) = mesh.interior_index(tri[s]) {
                    let (gsx, gsy) = grad(s);
                    *entries.entry((ir, is)).or_insert(0.0) += coef * (grx * gsx + gry * gsy);
                }
            }
            // load with the same rule; φ_r is ½ at the midpoints of its two edges
            let mut lv = 0.0;
            for &(e0, e1) in &EDGES {
                if r == e0 || r == e1 {
                    let mx = 0.5 * (p[e0].0 + p[e1].0);
                    let my = 0.5 * (p[e0].1 + p[e1].1);
                    lv += (area / 3.0) * load_fn(mx, my) * 0.5;
                }
            }
            load[ir] += lv;
        }
    }

    Ok(FemProblem {
        operator: CsrMatrix::from_triplets(ni, &entries),
        load,
        nodal_log_perm: y.to_vec(),
        settings: settings.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct FemSolution {
    /// Solution values on interior nodes (y-fastest interior numbering).
    pub interior: Vec<f64>,
    pub cg_iterations: usize,
}

/// Solves the assembled system by Jacobi-preconditioned conjugate gradients.
/// Increments the settings' solve counter by exactly one per call.
pub fn solve(problem: &FemProblem) -> Result<FemSolution> {
    problem.settings.counter.increment();

    let a = &problem.operator;
    let b = &problem.load;
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| {
            if d > 0.0 && d.is_finite() {
                Ok(1.0 / d)
            } else {
                Err(Error::NonFinite("operator diagonal"))
            }
        })
        .collect::<Result<_>>()?;

    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok(FemSolution {
            interior: x,
            cg_iterations: 0,
        });
    }

    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];

    for it in 0..problem.settings.max_iterations {
        let res = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res <= problem.settings.rel_tol * norm_b {
            return Ok(FemSolution {
                interior: x,
                cg_iterations: it,
            });
        }
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::NonFinite("CG curvature pᵀAp"));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    let res = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(Error::CgStalled {
        iterations: problem.settings.max_iterations,
        residual: res / norm_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, eval_at_point};
    use approx::assert_abs_diff_eq;

    fn analytic(x: f64, y: f64) -> f64 {
        0.5 * (PI * x).sin() * (PI * y).sin()
    }

    fn rel_l2_error(mesh: &Mesh, interior: &[f64]) -> f64 {
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for id in 0..mesh.num_nodes() {
            if let Some(ii) = mesh.interior_index(id) {
                let (x, y) = mesh.node_coords(id);
                let exact = analytic(x, y);
                err2 += (interior[ii] - exact).powi(2);
                ref2 += exact * exact;
            }
        }
        (err2 / ref2).sqrt()
    }

    #[test]
    fn laplacian_stencil_rows_sum_to_zero() {
        // Y ≡ 0 reduces to the standard stiffness; constant fields are in the
        // kernel away from the boundary.
        let mesh = build_mesh(16).unwrap();
        let y = vec![0.0; mesh.num_nodes()];
        let problem = assemble(&mesh, &y, &SolverSettings::default()).unwrap();
        let ones = vec![1.0; mesh.num_interior()];
        let mut out = vec![0.0; mesh.num_interior()];
        problem.operator.matvec(&ones, &mut out);
        // rows for nodes with all-interior neighbours
        for a in 2..15 {
            for b in 2..15 {
                let ii = mesh.interior_index(mesh.node_id(a, b)).unwrap();
                assert_abs_diff_eq!(out[ii], 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn operator_is_symmetric() {
        let mesh = build_mesh(8).unwrap();
        let y: Vec<f64> = (0..mesh.num_nodes())
            .map(|id| {
                let (x, yy) = mesh.node_coords(id);
                (x - 0.3) * (yy + 0.2)
            })
            .collect();
        let problem = assemble(&mesh, &y, &SolverSettings::default()).unwrap();
        let ni = mesh.num_interior();
        for r in 0..ni {
            for c in 0..ni {
                let d = (problem.operator.entry(r, c) - problem.operator.entry(c, r)).abs();
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn constant_field_scales_the_operator() {
        let mesh = build_mesh(8).unwrap();
        let zero = vec![0.0; mesh.num_nodes()];
        let c = 0.73;
        let constant = vec![c; mesh.num_nodes()];
        let base = assemble(&mesh, &zero, &SolverSettings::default()).unwrap();
        let scaled = assemble(&mesh, &constant, &SolverSettings::default()).unwrap();
        let ni = mesh.num_interior();
        for r in 0..ni {
            for cidx in 0..ni {
                let b = base.operator.entry(r, cidx);
                let s = scaled.operator.entry(r, cidx);
                if b != 0.0 {
                    assert_abs_diff_eq!(s / b, c.exp(), epsilon = 1e-12 * c.exp());
                }
            }
        }
    }

    #[test]
    fn rejects_non_finite_fields() {
        let mesh = build_mesh(4).unwrap();
        let mut y = vec![0.0; mesh.num_nodes()];
        y[3] = f64::NAN;
        assert!(assemble(&mesh, &y, &SolverSettings::default()).is_err());
        // e^Y overflow is caught during assembly
        let y = vec![1.0e4; mesh.num_nodes()];
        assert!(assemble(&mesh, &y, &SolverSettings::default()).is_err());
    }

    #[test]
    fn zero_field_matches_analytic_solution() {
        let mesh = build_mesh(16).unwrap();
        let y = vec![0.0; mesh.num_nodes()];
        let problem = assemble(&mesh, &y, &SolverSettings::default()).unwrap();
        let sol = solve(&problem).unwrap();
        let center = eval_at_point(&mesh, &sol.interior, (0.5, 0.5)).unwrap();
        assert_abs_diff_eq!(center, 0.5, epsilon = 5e-3);
        assert!(rel_l2_error(&mesh, &sol.interior) <= 0.01);
    }

    #[test]
    fn second_order_convergence() {
        let mut errs = Vec::new();
        for n in [8usize, 16] {
            let mesh = build_mesh(n).unwrap();
            let y = vec![0.0; mesh.num_nodes()];
            let problem = assemble(&mesh, &y, &SolverSettings::default()).unwrap();
            let sol = solve(&problem).unwrap();
            errs.push(rel_l2_error(&mesh, &sol.interior));
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (ratio - 4.0).abs() <= 0.5,
            "error ratio {ratio} not within 4 ± 0.5"
        );
    }

    #[test]
    fn constant_field_scales_the_solution() {
        let mesh = build_mesh(8).unwrap();
        let settings = SolverSettings {
            rel_tol: 1e-13,
            ..SolverSettings::default()
        };
        let zero = vec![0.0; mesh.num_nodes()];
        let c = 1.4;
        let constant = vec![c; mesh.num_nodes()];
        let u0 = solve(&assemble(&mesh, &zero, &settings).unwrap()).unwrap();
        let uc = solve(&assemble(&mesh, &constant, &settings).unwrap()).unwrap();
        for (a, b) in u0.interior.iter().zip(&uc.interior) {
            assert_abs_diff_eq!(b * c.exp(), *a, epsilon = 1e-9 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn operator_is_positive_definite_for_random_fields() {
        use rand::Rng;
        use rand::SeedableRng;
        let mesh = build_mesh(8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..mesh.num_nodes())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let problem = assemble(&mesh, &y, &SolverSettings::default()).unwrap();
        let ni = mesh.num_interior();
        let mut out = vec![0.0; ni];
        for _ in 0..100 {
            let x: Vec<f64> = (0..ni).map(|_| rng.random_range(-1.0..1.0)).collect();
            problem.operator.matvec(&x, &mut out);
            let quad: f64 = x.iter().zip(&out).map(|(a, b)| a * b).sum();
            assert!(quad > 0.0);
        }
    }

    #[test]
    fn solve_counter_increments_once_per_solve() {
        let mesh = build_mesh(4).unwrap();
        let settings = SolverSettings::default();
        let y = vec![0.0; mesh.num_nodes()];
        let problem = assemble(&mesh, &y, &settings).unwrap();
        assert_eq!(settings.counter.count(), 0);
        let _ = solve(&problem).unwrap();
        let _ = solve(&problem).unwrap();
        assert_eq!(settings.counter.count(), 2);
    }

    #[test]
    fn solutions_are_bit_identical_across_runs() {
        let mesh = build_mesh(8).unwrap();
        let y: Vec<f64> = (0..mesh.num_nodes()).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = solve(&assemble(&mesh, &y, &SolverSettings::default()).unwrap()).unwrap();
        let b = solve(&assemble(&mesh, &y, &SolverSettings::default()).unwrap()).unwrap();
        assert_eq!(a.interior, b.interior);
        assert_eq!(a.cg_iterations, b.cg_iterations);
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let mesh = build_mesh(16).unwrap();
        let y = vec![0.0; mesh.num_nodes()];
        let settings = SolverSettings {
            max_iterations: 2,
            ..SolverSettings::default()
        };
        let problem = assemble(&mesh, &y, &settings).unwrap();
        assert!(matches!(solve(&problem), Err(Error::CgStalled { .. })));
    }
}
