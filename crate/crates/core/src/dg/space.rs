//! Piecewise-linear discontinuous velocity and piecewise-constant pressure.
//!
//! Velocity coefficients of cell `c` occupy `6c..6c+6`, ordered as
//! `3 * component + vertex`: nodal values of each Cartesian component at the
//! three (counter-clockwise) vertices.

use crate::geometry::{Point, TriMesh};
use crate::{Error, Result};

pub const VELOCITY_DOFS_PER_CELL: usize = 6;

#[inline]
pub fn velocity_dof(cell: usize, component: usize, vertex: usize) -> usize {
    VELOCITY_DOFS_PER_CELL * cell + 3 * component + vertex
}

/// Affine geometry of one triangle and its barycentric basis.
#[derive(Debug, Clone, Copy)]
pub struct P1Cell {
    pub points: [Point; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates (constant per cell).
    pub grads: [[f64; 2]; 3],
    centroid: Point,
}

impl P1Cell {
    pub fn new(mesh: &TriMesh, c: usize) -> Self {
        Self::from_points(mesh.cell_points(c))
    }

    pub fn from_points(points: [Point; 3]) -> Self {
        let [p0, p1, p2] = points;
        let area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grads = [
            [(p1[1] - p2[1]) / area2, (p2[0] - p1[0]) / area2],
            [(p2[1] - p0[1]) / area2, (p0[0] - p2[0]) / area2],
            [(p0[1] - p1[1]) / area2, (p1[0] - p0[0]) / area2],
        ];
        let centroid = [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0];
        P1Cell { points, area: 0.5 * area2, grads, centroid }
    }

    pub fn bary(&self, p: Point) -> [f64; 3] {
        let d = [p[0] - self.centroid[0], p[1] - self.centroid[1]];
        self.grads.map(|g| 1.0 / 3.0 + g[0] * d[0] + g[1] * d[1])
    }

    pub fn point(&self, bary: [f64; 3]) -> Point {
        let mut p = [0.0; 2];
        for k in 0..3 {
            p[0] += bary[k] * self.points[k][0];
            p[1] += bary[k] * self.points[k][1];
        }
        p
    }
}

/// Discrete velocity/pressure pair on a set of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DgState {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl DgState {
    pub fn zeros(n_cells: usize) -> Self {
        DgState { velocity: vec![0.0; VELOCITY_DOFS_PER_CELL * n_cells], pressure: vec![0.0; n_cells] }
    }

    pub fn new(velocity: Vec<f64>, pressure: Vec<f64>) -> Result<Self> {
        if velocity.len() != VELOCITY_DOFS_PER_CELL * pressure.len() {
            return Err(Error::DimensionMismatch {
                what: "velocity coefficients",
                expected: VELOCITY_DOFS_PER_CELL * pressure.len(),
                found: velocity.len(),
            });
        }
        let s = DgState { velocity, pressure };
        s.check_finite()?;
        Ok(s)
    }

    /// Interpolates a smooth field at the vertices of every cell.
    pub fn interpolate(mesh: &TriMesh, u: impl Fn(Point) -> [f64; 2], p: impl Fn(Point) -> f64) -> Self {
        let mut s = DgState::zeros(mesh.n_cells());
        for c in 0..mesh.n_cells() {
            for (k, &x) in mesh.cell_points(c).iter().enumerate() {
                let v = u(x);
                s.velocity[velocity_dof(c, 0, k)] = v[0];
                s.velocity[velocity_dof(c, 1, k)] = v[1];
            }
            s.pressure[c] = p(mesh.centroid(c));
        }
        s
    }

    pub fn n_cells(&self) -> usize {
        self.pressure.len()
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.velocity.iter().chain(&self.pressure).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("state"))
        }
    }
}

/// Nodal values `[component][vertex]` of a velocity vector on cell `c`.
#[inline]
pub fn cell_coefficients(velocity: &[f64], c: usize) -> [[f64; 3]; 2] {
    let b = VELOCITY_DOFS_PER_CELL * c;
    [[velocity[b], velocity[b + 1], velocity[b + 2]], [velocity[b + 3], velocity[b + 4], velocity[b + 5]]]
}

#[inline]
pub fn eval_velocity(coef: &[[f64; 3]; 2], bary: [f64; 3]) -> [f64; 2] {
    coef.map(|c| c[0] * bary[0] + c[1] * bary[1] + c[2] * bary[2])
}

/// Velocity gradient `g[i][j] = d u_i / d x_j` on one cell.
#[inline]
pub fn velocity_gradient(coef: &[[f64; 3]; 2], geom: &P1Cell) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..3 {
            g[i][0] += coef[i][k] * geom.grads[k][0];
            g[i][1] += coef[i][k] * geom.grads[k][1];
        }
    }
    g
}
