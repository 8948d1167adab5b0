//! Independent quadrature and P1 evaluation used by the oracle tests.
#![allow(dead_code)]

use msflow::dg::ModelParameters;
use msflow::geometry::{Adjacency, BoundaryKind, Cell, Point, Region, Side, TriMesh};

/// Five-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre_01() -> [(f64, f64); 5] {
    let x = [0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    let w = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];
    let raw = [(-x[2], w[2]), (-x[1], w[1]), (x[0], w[0]), (x[1], w[1]), (x[2], w[2])];
    raw.map(|(t, w)| (0.5 * (t + 1.0), 0.5 * w))
}

/// Collapsed (Duffy) tensor rule on a triangle; exact well beyond degree 4.
pub fn triangle_points(p: [Point; 3]) -> Vec<(Point, f64)> {
    let jac = ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
    let gl = gauss_legendre_01();
    let mut out = Vec::with_capacity(25);
    for &(s, ws) in &gl {
        for &(t, wt) in &gl {
            let (l1, l2) = (s, t * (1.0 - s));
            let x = [
                p[0][0] + l1 * (p[1][0] - p[0][0]) + l2 * (p[2][0] - p[0][0]),
                p[0][1] + l1 * (p[1][1] - p[0][1]) + l2 * (p[2][1] - p[0][1]),
            ];
            out.push((x, ws * wt * (1.0 - s) * jac));
        }
    }
    out
}

pub fn segment_points(a: Point, b: Point) -> Vec<(Point, f64)> {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    gauss_legendre_01()
        .iter()
        .map(|&(t, w)| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len))
        .collect()
}

/// Nodal P1 basis of a triangle from the inverse Vandermonde matrix; row
/// `k` holds `(c0, c1, c2)` with `phi_k = c0 + c1 x + c2 y`.
pub fn nodal_basis(p: [Point; 3]) -> [[f64; 3]; 3] {
    let m = [[1.0, p[0][0], p[0][1]], [1.0, p[1][0], p[1][1]], [1.0, p[2][0], p[2][1]]];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let cof = |r: usize, c: usize| {
        let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
        let v = m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]];
        if (r + c) % 2 == 0 { v } else { -v }
    };
    // inverse of m: inv[i][k] = cof(k, i) / det; column k gives phi_k
    let mut out = [[0.0; 3]; 3];
    for (k, row) in out.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = cof(k, i) / det;
        }
    }
    out
}

/// A P1 field evaluated cell by cell from the global coefficient vector.
pub struct Field<'a> {
    pub mesh: &'a TriMesh,
    pub coef: &'a [f64],
}

impl Field<'_> {
    pub fn value(&self, c: usize, x: Point) -> [f64; 2] {
        let b = nodal_basis(self.mesh.cell_points(c));
        let mut v = [0.0; 2];
        for comp in 0..2 {
            for k in 0..3 {
                v[comp] += self.coef[6 * c + 3 * comp + k] * (b[k][0] + b[k][1] * x[0] + b[k][2] * x[1]);
            }
        }
        v
    }

    /// `g[i][j] = d u_i / d x_j`
    pub fn gradient(&self, c: usize) -> [[f64; 2]; 2] {
        let b = nodal_basis(self.mesh.cell_points(c));
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for k in 0..3 {
                g[i][0] += self.coef[6 * c + 3 * i + k] * b[k][1];
                g[i][1] += self.coef[6 * c + 3 * i + k] * b[k][2];
            }
        }
        g
    }
}

pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn matvec(g: [[f64; 2]; 2], n: [f64; 2]) -> [f64; 2] {
    [dot(g[0], n), dot(g[1], n)]
}

pub fn xi(region: Region, porosity: f64) -> f64 {
    if region == Region::Porous { porosity } else { 1.0 }
}

/// Two triangles on a quadrilateral with corners perturbed by `jitter`
/// (each in `[-0.2, 0.2]^2`), split along the `0-2` diagonal.
pub fn two_cell_mesh(jitter: [[f64; 2]; 4], regions: [Region; 2]) -> TriMesh {
    let base = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let v: Vec<Point> = base.iter().zip(&jitter).map(|(b, j)| [b[0] + j[0], b[1] + j[1]]).collect();
    let cells = vec![
        Cell { vertices: [0, 1, 2], region: regions[0], coarse: 0 },
        Cell { vertices: [0, 2, 3], region: regions[1], coarse: 0 },
    ];
    let sides = [([0, 1], Side::Bottom), ([1, 2], Side::Right), ([2, 3], Side::Top), ([3, 0], Side::Left)];
    TriMesh::new(v, cells, None, &sides).expect("valid quadrilateral")
}

pub fn k_of(mesh: &TriMesh, params: &ModelParameters, c: usize) -> f64 {
    1.0 / (xi(mesh.cells()[c].region, params.porosity) * params.reynolds)
}

/// `a_DG(trial, test)` including volume convection by `lin`.
pub fn a_dg(m: &TriMesh, p: &ModelParameters, trial: &[f64], test: &[f64], lin: Option<&[f64]>) -> (f64, f64) {
    let (u, v) = (Field { mesh: m, coef: trial }, Field { mesh: m, coef: test });
    let mut total = 0.0;
    let mut scale = 0.0;
    for c in 0..m.n_cells() {
        let x = xi(m.cells()[c].region, p.porosity);
        let (gu, gv) = (u.gradient(c), v.gradient(c));
        for (pt, wt) in triangle_points(m.cell_points(c)) {
            let mut val = k_of(m, p, c) * (dot(gu[0], gv[0]) + dot(gu[1], gv[1]));
            if let Some(l) = lin {
                let wl = Field { mesh: m, coef: l }.value(c, pt);
                let adv = matvec(gu, wl);
                val += dot(adv, v.value(c, pt)) / (x * x);
            }
            total += wt * val;
            scale += (wt * val).abs();
        }
    }
    for e in m.edges() {
        let [a, b] = e.vertices.map(|i| m.vertices()[i]);
        let n = e.normal;
        match e.adjacency {
            Adjacency::Interior { plus, minus } => {
                let xs = [plus, minus].map(|c| xi(m.cells()[c].region, p.porosity));
                let sigma = p.penalty / (0.5 * (xs[0] * p.reynolds * e.length + xs[1] * p.reynolds * e.length));
                for (pt, wt) in segment_points(a, b) {
                    let ju = sub(u.value(plus, pt), u.value(minus, pt));
                    let jv = sub(v.value(plus, pt), v.value(minus, pt));
                    let avg = |f: &Field, s: usize| {
                        let g = matvec(f.gradient(s), n);
                        [g[0] * k_of(m, p, s), g[1] * k_of(m, p, s)]
                    };
                    let du = mid(avg(&u, plus), avg(&u, minus));
                    let dv = mid(avg(&v, plus), avg(&v, minus));
                    let val = -dot(du, jv) - dot(dv, ju) + sigma * dot(ju, jv);
                    total += wt * val;
                    scale += (wt * val).abs();
                }
            }
            Adjacency::Boundary { cell, side } => {
                if m.boundary_kind(side) != BoundaryKind::Velocity {
                    continue;
                }
                let k = k_of(m, p, cell);
                let beta = 2.0 * p.penalty / e.length;
                for (pt, wt) in segment_points(a, b) {
                    let (uu, vv) = (u.value(cell, pt), v.value(cell, pt));
                    let val = -k
                        * (dot(matvec(u.gradient(cell), n), vv) + dot(matvec(v.gradient(cell), n), uu) - beta * dot(uu, vv));
                    total += wt * val;
                    scale += (wt * val).abs();
                }
            }
        }
    }
    (total, scale)
}

pub fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn mid(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// `b(q, v) = -sum ∫ q div v + sum_int ∫ {q} [v]·n + sum_Γu ∫ q v·n`
pub fn b_form(m: &TriMesh, q: &[f64], trial: &[f64]) -> (f64, f64) {
    let v = Field { mesh: m, coef: trial };
    let mut total = 0.0;
    let mut scale = 0.0;
    for c in 0..m.n_cells() {
        let g = v.gradient(c);
        let val = -q[c] * (g[0][0] + g[1][1]) * m.area(c);
        total += val;
        scale += val.abs();
    }
    for e in m.edges() {
        let [a, b] = e.vertices.map(|i| m.vertices()[i]);
        for (pt, wt) in segment_points(a, b) {
            let val = match e.adjacency {
                Adjacency::Interior { plus, minus } => {
                    0.5 * (q[plus] + q[minus]) * dot(sub(v.value(plus, pt), v.value(minus, pt)), e.normal)
                }
                Adjacency::Boundary { cell, side } if m.boundary_kind(side) == BoundaryKind::Velocity => {
                    q[cell] * dot(v.value(cell, pt), e.normal)
                }
                Adjacency::Boundary { .. } => 0.0,
            };
            total += wt * val;
            scale += (wt * val).abs();
        }
    }
    (total, scale)
}

/// `m(trial, test)` oracle.
pub fn mass_form(m: &TriMesh, p: &ModelParameters, trial: &[f64], test: &[f64]) -> f64 {
    let (u, v) = (Field { mesh: m, coef: trial }, Field { mesh: m, coef: test });
    let mut total = 0.0;
    for c in 0..m.n_cells() {
        let x = xi(m.cells()[c].region, p.porosity);
        for (pt, wt) in triangle_points(m.cell_points(c)) {
            total += wt * dot(u.value(c, pt), v.value(c, pt)) / (x * p.time_step);
        }
    }
    total
}

/// Darcy part of `d(trial, test)` (no Forchheimer weight).
pub fn darcy_form(m: &TriMesh, p: &ModelParameters, trial: &[f64], test: &[f64]) -> f64 {
    let (u, v) = (Field { mesh: m, coef: trial }, Field { mesh: m, coef: test });
    let mut total = 0.0;
    for c in 0..m.n_cells() {
        if m.cells()[c].region != Region::Porous {
            continue;
        }
        for (pt, wt) in triangle_points(m.cell_points(c)) {
            total += wt * dot(u.value(c, pt), v.value(c, pt)) / (p.reynolds * p.darcy);
        }
    }
    total
}

/// `(f(test), scale, l(q))` for affine data `g_i = a_i0 + a_i1 x + a_i2 y`
/// with its exact gradient.
pub fn load_forms(m: &TriMesh, p: &ModelParameters, g: [[f64; 3]; 2], test: &[f64], q: &[f64]) -> (f64, f64, f64) {
    let v = Field { mesh: m, coef: test };
    let gfun = |x: Point| [g[0][0] + g[0][1] * x[0] + g[0][2] * x[1], g[1][0] + g[1][1] * x[0] + g[1][2] * x[1]];
    let grad_g = [[g[0][1], g[0][2]], [g[1][1], g[1][2]]];
    let (mut fu, mut scale, mut lq) = (0.0, 0.0, 0.0);
    for e in m.edges() {
        let Adjacency::Boundary { cell, side } = e.adjacency else { continue };
        if m.boundary_kind(side) != BoundaryKind::Velocity {
            continue;
        }
        let [a, b] = e.vertices.map(|i| m.vertices()[i]);
        let k = k_of(m, p, cell);
        let beta = 2.0 * p.penalty / e.length;
        for (pt, wt) in segment_points(a, b) {
            let (gv, vv) = (gfun(pt), v.value(cell, pt));
            let val = -k * (dot(matvec(grad_g, e.normal), vv) + dot(matvec(v.gradient(cell), e.normal), gv) - beta * dot(gv, vv));
            fu += wt * val;
            scale += (wt * val).abs();
            lq += wt * q[cell] * dot(gv, e.normal);
        }
    }
    (fu, scale, lq)
}

/// Dense solve of `[[K, Bᵀ, 0], [B, 0, w], [0, wᵀ, 0]]`; returns `(u, p)`.
pub fn dense_bordered_solve(k: &[Vec<f64>], b: &[Vec<f64>], w: &[f64], fu: &[f64], fp: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (nu, np) = (k.len(), b.len());
    let n = nu + np + 1;
    let mut big = nalgebra::DMatrix::zeros(n, n);
    for i in 0..nu {
        for j in 0..nu {
            big[(i, j)] = k[i][j];
        }
    }
    for i in 0..np {
        for j in 0..nu {
            big[(nu + i, j)] = b[i][j];
            big[(j, nu + i)] = b[i][j];
        }
        big[(nu + i, n - 1)] = w[i];
        big[(n - 1, nu + i)] = w[i];
    }
    let rhs = nalgebra::DVector::from_iterator(n, fu.iter().chain(fp).copied().chain([0.0]));
    let x = big.lu().solve(&rhs).expect("non-singular bordered system");
    (x.as_slice()[..nu].to_vec(), x.as_slice()[nu..nu + np].to_vec())
}
