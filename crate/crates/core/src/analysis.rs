//! Relative error metrics, degree-of-freedom accounting and region statistics.

use crate::dg::quadrature::triangle_degree4;
use crate::dg::{cell_coefficients, eval_velocity, velocity_gradient, DgState, P1Cell};
use crate::geometry::{CoarseGrid, Region, TriMesh};
use crate::{Error, Result};

/// `(DOF_h, DOF_H)` for `n_cells` fine triangles and `n_coarse` coarse cells
/// with `m` velocity basis functions each.
pub fn dof_counts(n_cells: usize, n_coarse: usize, m: usize) -> (usize, usize) {
    (3 * 2 * n_cells + n_cells, m * n_coarse + n_coarse)
}

/// Errors of one multiscale solution against a reference, as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub e_u: f64,
    pub e_s: f64,
    pub e_p: f64,
    pub dof_fine: usize,
    pub dof_coarse: usize,
}

fn check_layout(mesh: &TriMesh, what: &'static str, velocity: &[f64]) -> Result<()> {
    if velocity.len() != 6 * mesh.n_cells() {
        return Err(Error::DimensionMismatch { what, expected: 6 * mesh.n_cells(), found: velocity.len() });
    }
    Ok(())
}

/// `∫ |a − b|²` and `∫ |a|²` over the mesh.
fn l2_pair(mesh: &TriMesh, a: &[f64], b: &[f64]) -> (f64, f64) {
    let rule = triangle_degree4();
    let mut num = 0.0;
    let mut den = 0.0;
    for c in 0..mesh.n_cells() {
        let area = mesh.area(c);
        let (ca, cb) = (cell_coefficients(a, c), cell_coefficients(b, c));
        for q in &rule {
            let va = eval_velocity(&ca, q.bary);
            let vb = eval_velocity(&cb, q.bary);
            let w = q.weight * area;
            num += w * ((va[0] - vb[0]).powi(2) + (va[1] - vb[1]).powi(2));
            den += w * (va[0] * va[0] + va[1] * va[1]);
        }
    }
    (num, den)
}

fn strain_sq(g: [[f64; 2]; 2]) -> f64 {
    let off = 0.5 * (g[0][1] + g[1][0]);
    g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * off * off
}

/// Relative L2 velocity error `‖u_ref − u_ms‖ / ‖u_ref‖`.
pub fn error_velocity(mesh: &TriMesh, u_ref: &[f64], u_ms: &[f64]) -> Result<f64> {
    check_layout(mesh, "reference velocity", u_ref)?;
    check_layout(mesh, "multiscale velocity", u_ms)?;
    let (num, den) = l2_pair(mesh, u_ref, u_ms);
    if den == 0.0 {
        return Err(Error::ZeroReference("velocity L2 norm"));
    }
    Ok((num / den).sqrt())
}

/// Relative broken strain seminorm error `‖ε(u_ref − u_ms)‖ / ‖ε(u_ref)‖`.
pub fn error_stress(mesh: &TriMesh, u_ref: &[f64], u_ms: &[f64]) -> Result<f64> {
    check_layout(mesh, "reference velocity", u_ref)?;
    check_layout(mesh, "multiscale velocity", u_ms)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for c in 0..mesh.n_cells() {
        let g = P1Cell::new(mesh, c);
        let gr = velocity_gradient(&cell_coefficients(u_ref, c), &g);
        let gm = velocity_gradient(&cell_coefficients(u_ms, c), &g);
        let diff = [[gr[0][0] - gm[0][0], gr[0][1] - gm[0][1]], [gr[1][0] - gm[1][0], gr[1][1] - gm[1][1]]];
        num += g.area * strain_sq(diff);
        den += g.area * strain_sq(gr);
    }
    let scale = u_ref.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if den <= 1e-28 * scale * scale * mesh.bbox().area() {
        return Err(Error::ZeroReference("strain seminorm (rigid-body reference)"));
    }
    Ok((num / den).sqrt())
}

/// Area-weighted coarse-cell averages of a fine piecewise-constant field.
pub fn coarse_average(mesh: &TriMesh, coarse: &CoarseGrid, fine: &[f64]) -> Result<Vec<f64>> {
    if fine.len() != mesh.n_cells() {
        return Err(Error::DimensionMismatch { what: "fine pressure", expected: mesh.n_cells(), found: fine.len() });
    }
    Ok(coarse
        .cells()
        .iter()
        .map(|k| {
            let (s, a) = k.fine_cells.iter().fold((0.0, 0.0), |(s, a), &c| {
                let w = mesh.area(c);
                (s + w * fine[c], a + w)
            });
            s / a
        })
        .collect())
}

/// Relative coarse-grid L2 error of `p_ms` against the coarse averages of
/// the fine reference pressure.
pub fn error_pressure(mesh: &TriMesh, coarse: &CoarseGrid, p_ref: &[f64], p_ms: &[f64]) -> Result<f64> {
    if p_ms.len() != coarse.len() {
        return Err(Error::DimensionMismatch { what: "coarse pressure", expected: coarse.len(), found: p_ms.len() });
    }
    let avg = coarse_average(mesh, coarse, p_ref)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, cell) in coarse.cells().iter().enumerate() {
        let a = cell.area();
        num += a * (avg[k] - p_ms[k]).powi(2);
        den += a * avg[k] * avg[k];
    }
    if den == 0.0 {
        return Err(Error::ZeroReference("coarse pressure norm"));
    }
    Ok((num / den).sqrt())
}

/// Area-weighted statistics of `|u|` and `p` over one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub area: f64,
    pub mean_speed: f64,
    pub max_speed: f64,
    pub mean_pressure: f64,
    pub min_pressure: f64,
    pub max_pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStatistics {
    pub fluid: Option<RegionStats>,
    pub porous: Option<RegionStats>,
}

/// Per-region statistics; `None` for a region with no cells. Speeds are
/// evaluated at the volume quadrature points and the vertices.
pub fn field_statistics(mesh: &TriMesh, state: &DgState) -> Result<FieldStatistics> {
    check_layout(mesh, "velocity", &state.velocity)?;
    let rule = triangle_degree4();
    let mut acc: [Option<RegionStats>; 2] = [None, None];
    for (c, cell) in mesh.cells().iter().enumerate() {
        let area = mesh.area(c);
        let coef = cell_coefficients(&state.velocity, c);
        let speed = |b: [f64; 3]| {
            let v = eval_velocity(&coef, b);
            v[0].hypot(v[1])
        };
        let mean: f64 = rule.iter().map(|q| q.weight * speed(q.bary)).sum();
        let peak = rule
            .iter()
            .map(|q| speed(q.bary))
            .chain([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].map(speed))
            .fold(0.0f64, f64::max);
        let p = state.pressure[c];
        let slot = &mut acc[(cell.region == Region::Porous) as usize];
        let s = slot.get_or_insert(RegionStats {
            area: 0.0,
            mean_speed: 0.0,
            max_speed: 0.0,
            mean_pressure: 0.0,
            min_pressure: f64::INFINITY,
            max_pressure: f64::NEG_INFINITY,
        });
        s.area += area;
        s.mean_speed += area * mean;
        s.mean_pressure += area * p;
        s.max_speed = s.max_speed.max(peak);
        s.min_pressure = s.min_pressure.min(p);
        s.max_pressure = s.max_pressure.max(p);
    }
    let finish = |s: Option<RegionStats>| {
        s.map(|mut s| {
            s.mean_speed /= s.area;
            s.mean_pressure /= s.area;
            s
        })
    };
    let [fluid, porous] = acc;
    Ok(FieldStatistics { fluid: finish(fluid), porous: finish(porous) })
}
