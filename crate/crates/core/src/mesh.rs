//! Uniform triangulated mesh of the unit square and the pointwise
//! observation operator.
//!
//! Grid nodes are numbered with the y-index fastest: node `(a, b)` sits at
//! `(a·h, b·h)` with `h = 1/cells_per_side` and has id `a·(n+1) + b`. Every
//! square cell is split by the diagonal from its lower-left to its
//! upper-right corner.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Mesh {
    cells_per_side: usize,
    coords: Vec<(f64, f64)>,
    triangles: Vec<[usize; 3]>,
}

/// Builds the uniform mesh with `cells_per_side` cells in each direction.
pub fn build_mesh(cells_per_side: usize) -> Result<Mesh> {
    if cells_per_side < 2 {
        return Err(Error::Config("mesh needs at least 2 cells per side".into()));
    }
    let n = cells_per_side;
    let h = 1.0 / n as f64;
    let mut coords = Vec::with_capacity((n + 1) * (n + 1));
    for a in 0..=n {
        for b in 0..=n {
            coords.push((a as f64 * h, b as f64 * h));
        }
    }
    // two triangles per cell, diagonal lower-left to upper-right
    let node = |a: usize, b: usize| a * (n + 1) + b;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for a in 0..n {
        for b in 0..n {
            triangles.push([node(a, b), node(a + 1, b), node(a + 1, b + 1)]);
            triangles.push([node(a, b), node(a + 1, b + 1), node(a, b + 1)]);
        }
    }
    Ok(Mesh {
        cells_per_side,
        coords,
        triangles,
    })
}

impl Mesh {
    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    /// Uniform spacing `h = 1/cells_per_side`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.cells_per_side as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    /// Number of interior nodes, `(cells_per_side − 1)²`.
    pub fn num_interior(&self) -> usize {
        (self.cells_per_side - 1) * (self.cells_per_side - 1)
    }

    pub fn node_id(&self, a: usize, b: usize) -> usize {
        a * (self.cells_per_side + 1) + b
    }

    pub fn node_grid(&self, id: usize) -> (usize, usize) {
        (id / (self.cells_per_side + 1), id % (self.cells_per_side + 1))
    }

    pub fn node_coords(&self, id: usize) -> (f64, f64) {
        self.coords[id]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_interior(&self, id: usize) -> bool {
        let (a, b) = self.node_grid(id);
        a >= 1 && a < self.cells_per_side && b >= 1 && b < self.cells_per_side
    }

    /// Index of a node within the interior-only numbering (y fastest), or
    /// `None` for boundary nodes.
    pub fn interior_index(&self, id: usize) -> Option<usize> {
        let (a, b) = self.node_grid(id);
        let n = self.cells_per_side;
        if a >= 1 && a < n && b >= 1 && b < n {
            Some((a - 1) * (n - 1) + (b - 1))
        } else {
            None
        }
    }

    /// Expands an interior-node vector to the full grid, zero on the boundary.
    pub fn expand_interior(&self, interior: &[f64]) -> Result<Vec<f64>> {
        if interior.len() != self.num_interior() {
            return Err(Error::DimensionMismatch {
                expected: self.num_interior(),
                got: interior.len(),
            });
        }
        let mut full = vec![0.0; self.num_nodes()];
        for id in 0..self.num_nodes() {
            if let Some(ii) = self.interior_index(id) {
                full[id] = interior[ii];
            }
        }
        Ok(full)
    }
}

/// Projection from the interior-node solution vector onto the observed nodes.
#[derive(Debug, Clone)]
pub struct ObservationOperator {
    node_ids: Vec<usize>,
    interior_ids: Vec<usize>,
}

/// The 4×4 observation sub-grid at grid indices {5,7,9,11} × {5,7,9,11},
/// row-major: sixteen interior nodes in the center of the domain, two grid
/// steps apart and five steps from the bottom/left boundary.
pub fn default_observation(mesh: &Mesh) -> Result<ObservationOperator> {
    if mesh.cells_per_side() < 13 {
        return Err(Error::MeshTooCoarse(
            "observation layout {5,7,9,11}² needs at least 13 cells per side",
        ));
    }
    let mut node_ids = Vec::with_capacity(16);
    let mut interior_ids = Vec::with_capacity(16);
    for a in [5usize, 7, 9, 11] {
        for b in [5usize, 7, 9, 11] {
            let id = mesh.node_id(a, b);
            node_ids.push(id);
            interior_ids.push(
                mesh.interior_index(id)
                    .expect("observation nodes are interior by construction"),
            );
        }
    }
    Ok(ObservationOperator {
        node_ids,
        interior_ids,
    })
}

impl ObservationOperator {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    /// Applies the projection `G` to an interior-node vector.
    pub fn apply(&self, interior: &[f64]) -> Vec<f64> {
        self.interior_ids.iter().map(|&i| interior[i]).collect()
    }

    pub fn observed_coords(&self, mesh: &Mesh) -> Vec<(f64, f64)> {
        self.node_ids.iter().map(|&id| mesh.node_coords(id)).collect()
    }
}

/// Evaluates an interior-node solution at an arbitrary point of the unit
/// square by piecewise-linear interpolation (exact at nodes, zero on the
/// boundary).
pub fn eval_at_point(mesh: &Mesh, interior: &[f64], point: (f64, f64)) -> Result<f64> {
    let (x, y) = point;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::OutOfDomain(x, y));
    }
    if interior.len() != mesh.num_interior() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_interior(),
            got: interior.len(),
        });
    }
    let n = mesh.cells_per_side();
    let h = mesh.spacing();
    let a = ((x / h).floor() as usize).min(n - 1);
    let b = ((y / h).floor() as usize).min(n - 1);
    let s = x / h - a as f64;
    let t = y / h - b as f64;

    let value = |da: usize, db: usize| -> f64 {
        mesh.interior_index(mesh.node_id(a + da, b + db))
            .map_or(0.0, |ii| interior[ii])
    };
    let u00 = value(0, 0);
    let u11 = value(1, 1);
    // diagonal runs from (0,0) to (1,1) in cell-local coordinates
    if t <= s {
        let u10 = value(1, 0);
        Ok(u00 * (1.0 - s) + u10 * (s - t) + u11 * t)
    } else {
        let u01 = value(0, 1);
        Ok(u00 * (1.0 - t) + u01 * (t - s) + u11 * s)
    }
}
