//! Sparse assembly of the interior-penalty forms over a [`CellSet`].
//!
//! Matrices are stored test-row / trial-column: `(A u)_i = a(u, psi_i)`.
//! Local contributions are computed per cell and per facet (optionally in
//! parallel) and merged in a fixed order, so the result is bitwise
//! independent of the execution policy.

use super::cellset::{BoundaryFacet, CellSet, InteriorFacet};
use super::params::{BoundaryData, ModelParameters};
use super::quadrature::{edge_gauss3, triangle_degree4};
use super::space::{cell_coefficients, eval_velocity, P1Cell};
use crate::geometry::{BoundaryKind, Point, TriMesh};
use crate::parallel::Execution;
use crate::sparse::{CsrMatrix, Triplet};
use crate::{Error, Result};

/// Which parts of the convection-diffusion form to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IpdgTerms {
    pub diffusion: bool,
    pub convection: bool,
    pub interior: bool,
    pub boundary: bool,
}

impl IpdgTerms {
    pub const ALL: IpdgTerms = IpdgTerms { diffusion: true, convection: true, interior: true, boundary: true };
    /// Everything except convection: the part independent of the linearisation.
    pub const LINEAR: IpdgTerms = IpdgTerms { diffusion: true, convection: false, interior: true, boundary: true };
    /// Diffusion plus interior-facet terms, used by the spectral problem.
    pub const SPECTRAL: IpdgTerms = IpdgTerms { diffusion: true, convection: false, interior: true, boundary: false };
    pub const CONVECTION: IpdgTerms = IpdgTerms { diffusion: false, convection: true, interior: false, boundary: false };
}

/// Facets integrated by the edge mass form of the spectral problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMass {
    /// Facets on the boundary of the cell set.
    #[default]
    Boundary,
    /// Interior facets of the cell set, with the two one-sided traces
    /// averaged: `(u+ . v+ + u- . v-) / 2`.
    Interior,
}

pub struct Assembler<'a> {
    mesh: &'a TriMesh,
    set: &'a CellSet,
    exec: Execution,
}

struct EdgeQuad {
    points: [Point; 3],
    weights: [f64; 3],
}

fn edge_quad(mesh: &TriMesh, e: usize) -> EdgeQuad {
    let [a, b] = mesh.edge_points(e);
    let h = mesh.edges()[e].length;
    let rule = edge_gauss3();
    EdgeQuad {
        points: rule.map(|(t, _)| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]),
        weights: rule.map(|(_, w)| w * h),
    }
}

#[inline]
fn vdof(local_cell: usize, comp: usize, vertex: usize) -> usize {
    6 * local_cell + 3 * comp + vertex
}

impl<'a> Assembler<'a> {
    pub fn new(mesh: &'a TriMesh, set: &'a CellSet) -> Self {
        Assembler { mesh, set, exec: Execution::default() }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn cell_set(&self) -> &CellSet {
        self.set
    }

    fn n_vel(&self) -> usize {
        self.set.n_velocity_dofs()
    }

    fn xi(&self, local_cell: usize, params: &ModelParameters) -> f64 {
        self.mesh.cells()[self.set.cells()[local_cell]].region.xi(params.porosity)
    }

    fn chi(&self, local_cell: usize) -> f64 {
        self.mesh.cells()[self.set.cells()[local_cell]].region.chi()
    }

    fn geom(&self, local_cell: usize) -> P1Cell {
        P1Cell::new(self.mesh, self.set.cells()[local_cell])
    }

    fn check_field(&self, u: &[f64]) -> Result<()> {
        let expected = 6 * self.mesh.n_cells();
        if u.len() != expected {
            return Err(Error::DimensionMismatch { what: "linearisation velocity", expected, found: u.len() });
        }
        Ok(())
    }

    fn square(&self, parts: Vec<Vec<Triplet>>) -> CsrMatrix {
        let n = self.n_vel();
        CsrMatrix::from_triplets(n, n, parts.into_iter().flatten().collect())
    }

    fn per_cell<F>(&self, f: F) -> Vec<Vec<Triplet>>
    where
        F: Fn(usize) -> Vec<Triplet> + Sync + Send,
    {
        self.exec.map(self.set.len(), f)
    }

    /// Volume block with weight `w(l, x, bary)` multiplying `lambda_a lambda_b`
    /// on both components.
    fn weighted_mass<F>(&self, weight: F) -> CsrMatrix
    where
        F: Fn(usize, &P1Cell, [f64; 3]) -> f64 + Sync + Send,
    {
        let rule = triangle_degree4();
        self.square(self.per_cell(|l| {
            let g = self.geom(l);
            let mut m = [[0.0; 3]; 3];
            for q in &rule {
                let w = q.weight * g.area * weight(l, &g, q.bary);
                if w == 0.0 {
                    continue;
                }
                for a in 0..3 {
                    for b in 0..3 {
                        m[a][b] += w * q.bary[a] * q.bary[b];
                    }
                }
            }
            let mut t = Vec::with_capacity(18);
            if m.iter().flatten().all(|&v| v == 0.0) {
                return t;
            }
            for c in 0..2 {
                for a in 0..3 {
                    for b in 0..3 {
                        t.push((vdof(l, c, a), vdof(l, c, b), m[a][b]));
                    }
                }
            }
            t
        }))
    }

    /// `m(u, v) = (1/tau) sum_K int_K (1/xi) u . v`
    pub fn mass(&self, params: &ModelParameters) -> CsrMatrix {
        let s = 1.0 / params.time_step;
        self.weighted_mass(|l, _, _| s / self.xi(l, params))
    }

    /// Full convection-diffusion form: volume diffusion and convection by
    /// `u_lin` (omitted when `None`), interior-facet consistency, symmetry and
    /// penalty terms, and the prescribed-velocity boundary terms.
    pub fn convection_diffusion(&self, params: &ModelParameters, u_lin: Option<&[f64]>) -> Result<CsrMatrix> {
        self.ipdg(params, IpdgTerms::ALL, u_lin)
    }

    pub fn ipdg(&self, params: &ModelParameters, terms: IpdgTerms, u_lin: Option<&[f64]>) -> Result<CsrMatrix> {
        if let Some(u) = u_lin {
            self.check_field(u)?;
        }
        let mut parts: Vec<Vec<Triplet>> = Vec::new();
        if terms.diffusion || (terms.convection && u_lin.is_some()) {
            let conv = if terms.convection { u_lin } else { None };
            parts.extend(self.per_cell(|l| self.volume_ipdg(l, params, terms.diffusion, conv)));
        }
        if terms.interior {
            let facets = self.set.interior_facets();
            parts.extend(self.exec.map(facets.len(), |k| self.interior_ipdg(&facets[k], params)));
        }
        if terms.boundary {
            let facets = self.set.boundary_facets();
            parts.extend(self.exec.map(facets.len(), |k| self.boundary_ipdg(&facets[k], params)));
        }
        Ok(self.square(parts))
    }

    fn volume_ipdg(&self, l: usize, params: &ModelParameters, diffusion: bool, conv: Option<&[f64]>) -> Vec<Triplet> {
        let g = self.geom(l);
        let xi = self.xi(l, params);
        let mut m = [[0.0; 3]; 3];
        if diffusion {
            let k = g.area / (xi * params.reynolds);
            for a in 0..3 {
                for b in 0..3 {
                    m[a][b] += k * (g.grads[a][0] * g.grads[b][0] + g.grads[a][1] * g.grads[b][1]);
                }
            }
        }
        if let Some(u) = conv {
            let coef = cell_coefficients(u, self.set.cells()[l]);
            let s = 1.0 / (xi * xi);
            for q in &triangle_degree4() {
                let w = eval_velocity(&coef, q.bary);
                let wq = q.weight * g.area * s;
                for b in 0..3 {
                    let adv = w[0] * g.grads[b][0] + w[1] * g.grads[b][1];
                    for a in 0..3 {
                        m[a][b] += wq * adv * q.bary[a];
                    }
                }
            }
        }
        let mut t = Vec::with_capacity(18);
        for c in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    t.push((vdof(l, c, a), vdof(l, c, b), m[a][b]));
                }
            }
        }
        t
    }

    fn interior_ipdg(&self, f: &InteriorFacet, params: &ModelParameters) -> Vec<Triplet> {
        let edge = &self.mesh.edges()[f.edge];
        let n = edge.normal;
        let q = edge_quad(self.mesh, f.edge);
        let sides = [f.plus, f.minus];
        let sign = [1.0, -1.0];
        let geoms = sides.map(|l| self.geom(l));
        let xis = sides.map(|l| self.xi(l, params));
        let k = xis.map(|x| 1.0 / (x * params.reynolds));
        let sigma = params.penalty / (params.reynolds * edge.length * 0.5 * (xis[0] + xis[1]));
        let dn = geoms.map(|g| g.grads.map(|gr| gr[0] * n[0] + gr[1] * n[1]));
        let lam: [[[f64; 3]; 3]; 2] = [0, 1].map(|s| q.points.map(|p| geoms[s].bary(p)));
        // block[si][sj][a][b]
        let mut block = [[[[0.0; 3]; 3]; 2]; 2];
        for si in 0..2 {
            for sj in 0..2 {
                for a in 0..3 {
                    for b in 0..3 {
                        let mut v = 0.0;
                        for iq in 0..3 {
                            let w = q.weights[iq];
                            let (la, lb) = (lam[si][iq][a], lam[sj][iq][b]);
                            v -= w * 0.5 * k[sj] * dn[sj][b] * sign[si] * la;
                            v -= w * 0.5 * k[si] * dn[si][a] * sign[sj] * lb;
                            v += w * sigma * sign[si] * sign[sj] * la * lb;
                        }
                        block[si][sj][a][b] = v;
                    }
                }
            }
        }
        let mut t = Vec::with_capacity(72);
        for si in 0..2 {
            for sj in 0..2 {
                for c in 0..2 {
                    for a in 0..3 {
                        for b in 0..3 {
                            t.push((vdof(sides[si], c, a), vdof(sides[sj], c, b), block[si][sj][a][b]));
                        }
                    }
                }
            }
        }
        t
    }

    fn boundary_ipdg(&self, f: &BoundaryFacet, params: &ModelParameters) -> Vec<Triplet> {
        if f.kind != BoundaryKind::Velocity {
            return Vec::new();
        }
        let edge = &self.mesh.edges()[f.edge];
        let n = f.normal;
        let q = edge_quad(self.mesh, f.edge);
        let g = self.geom(f.cell);
        let k = 1.0 / (self.xi(f.cell, params) * params.reynolds);
        let beta = 2.0 * params.penalty / edge.length;
        let dn = g.grads.map(|gr| gr[0] * n[0] + gr[1] * n[1]);
        let lam = q.points.map(|p| g.bary(p));
        let mut m = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for iq in 0..3 {
                    let (la, lb) = (lam[iq][a], lam[iq][b]);
                    m[a][b] -= q.weights[iq] * k * (dn[b] * la + dn[a] * lb - beta * la * lb);
                }
            }
        }
        let mut t = Vec::with_capacity(18);
        for c in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    t.push((vdof(f.cell, c, a), vdof(f.cell, c, b), m[a][b]));
                }
            }
        }
        t
    }

    /// Volume convection `(1/xi^2) (u_lin . grad u) . v` only.
    pub fn convection(&self, params: &ModelParameters, u_lin: &[f64]) -> Result<CsrMatrix> {
        self.ipdg(params, IpdgTerms::CONVECTION, Some(u_lin))
    }

    /// `chi int (1/(Re Da) + (C / sqrt(Da)) |u_lin|) u . v`; the Forchheimer
    /// part is dropped when `u_lin` is `None`.
    pub fn darcy_forchheimer(&self, params: &ModelParameters, u_lin: Option<&[f64]>) -> Result<CsrMatrix> {
        if !(params.darcy > 0.0) {
            return Err(Error::param("darcy", format!("must be positive, got {}", params.darcy)));
        }
        if let Some(u) = u_lin {
            self.check_field(u)?;
        }
        let darcy = 1.0 / (params.reynolds * params.darcy);
        let forch = params.forchheimer / params.darcy.sqrt();
        Ok(self.weighted_mass(|l, _, bary| {
            let chi = self.chi(l);
            if chi == 0.0 {
                return 0.0;
            }
            let mut w = darcy;
            if let Some(u) = u_lin {
                let v = eval_velocity(&cell_coefficients(u, self.set.cells()[l]), bary);
                w += forch * v[0].hypot(v[1]);
            }
            chi * w
        }))
    }

    /// Forchheimer part alone: `chi (C / sqrt(Da)) int |u_lin| u . v`.
    pub fn forchheimer(&self, params: &ModelParameters, u_lin: &[f64]) -> Result<CsrMatrix> {
        self.check_field(u_lin)?;
        let forch = params.forchheimer / params.darcy.sqrt();
        Ok(self.weighted_mass(|l, _, bary| {
            let chi = self.chi(l);
            if chi == 0.0 || forch == 0.0 {
                return 0.0;
            }
            let v = eval_velocity(&cell_coefficients(u_lin, self.set.cells()[l]), bary);
            chi * forch * v[0].hypot(v[1])
        }))
    }

    /// Divergence block `b(v, q)`: pressure rows, velocity columns.
    pub fn divergence(&self) -> CsrMatrix {
        let mut parts: Vec<Vec<Triplet>> = self.per_cell(|l| {
            let g = self.geom(l);
            let mut t = Vec::with_capacity(6);
            for c in 0..2 {
                for b in 0..3 {
                    t.push((l, vdof(l, c, b), -g.area * g.grads[b][c]));
                }
            }
            t
        });
        let interior = self.set.interior_facets();
        parts.extend(self.exec.map(interior.len(), |k| {
            let f = &interior[k];
            let n = self.mesh.edges()[f.edge].normal;
            let q = edge_quad(self.mesh, f.edge);
            let mut t = Vec::with_capacity(24);
            for (s, sign) in [(f.plus, 1.0), (f.minus, -1.0)] {
                let g = self.geom(s);
                let lam = q.points.map(|p| g.bary(p));
                for b in 0..3 {
                    let integral: f64 = (0..3).map(|iq| q.weights[iq] * lam[iq][b]).sum();
                    for c in 0..2 {
                        let v = 0.5 * sign * n[c] * integral;
                        t.push((f.plus, vdof(s, c, b), v));
                        t.push((f.minus, vdof(s, c, b), v));
                    }
                }
            }
            t
        }));
        let boundary = self.set.boundary_facets();
        parts.extend(self.exec.map(boundary.len(), |k| {
            let f = &boundary[k];
            if f.kind != BoundaryKind::Velocity {
                return Vec::new();
            }
            let q = edge_quad(self.mesh, f.edge);
            let g = self.geom(f.cell);
            let lam = q.points.map(|p| g.bary(p));
            let mut t = Vec::with_capacity(6);
            for b in 0..3 {
                let integral: f64 = (0..3).map(|iq| q.weights[iq] * lam[iq][b]).sum();
                for c in 0..2 {
                    t.push((f.cell, vdof(f.cell, c, b), f.normal[c] * integral));
                }
            }
            t
        }));
        CsrMatrix::from_triplets(self.set.len(), self.n_vel(), parts.into_iter().flatten().collect())
    }

    /// Boundary load vectors `(F_u, F_p)` for velocity data `bc` on every
    /// prescribed-velocity facet of the set.
    pub fn rhs(&self, params: &ModelParameters, bc: &BoundaryData) -> (Vec<f64>, Vec<f64>) {
        let mut fu = vec![0.0; self.n_vel()];
        let mut fp = vec![0.0; self.set.len()];
        let facets = self.set.boundary_facets();
        let loads = self.exec.map(facets.len(), |k| {
            let f = &facets[k];
            if f.kind != BoundaryKind::Velocity {
                return None;
            }
            let side = f.side;
            Some(self.facet_terms(f, params, |p| match side {
                Some(s) => bc.value(s, p),
                None => bc.value(crate::geometry::Side::Left, p),
            }, |p| bc.gradient(p)))
        });
        for (f, load) in facets.iter().zip(loads) {
            if let Some((u, p)) = load {
                for (k, v) in u.iter().enumerate() {
                    fu[6 * f.cell + k] += v;
                }
                fp[f.cell] += p;
            }
        }
        (fu, fp)
    }

    /// Load of constant velocity data `g` on the single boundary facet
    /// `facet` (index into [`CellSet::boundary_facets`]); no gradient term.
    pub fn facet_load(&self, params: &ModelParameters, facet: usize, g: [f64; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
        let f = self.set.boundary_facets().get(facet).ok_or(Error::IndexOutOfRange {
            what: "boundary facet",
            index: facet,
            len: self.set.boundary_facets().len(),
        })?;
        let mut fu = vec![0.0; self.n_vel()];
        let mut fp = vec![0.0; self.set.len()];
        let (u, p) = self.facet_terms(f, params, |_| g, |_| None);
        fu[6 * f.cell..6 * f.cell + 6].copy_from_slice(&u);
        fp[f.cell] = p;
        Ok((fu, fp))
    }

    /// Local load of one facet: `-k int ((grad g n) . v + (grad v n) . g - (2 gamma / h) g . v)`
    /// for the velocity and `int g . n` for the pressure.
    fn facet_terms(
        &self,
        f: &BoundaryFacet,
        params: &ModelParameters,
        value: impl Fn(Point) -> [f64; 2],
        gradient: impl Fn(Point) -> Option<[[f64; 2]; 2]>,
    ) -> ([f64; 6], f64) {
        let edge = &self.mesh.edges()[f.edge];
        let n = f.normal;
        let q = edge_quad(self.mesh, f.edge);
        let geo = self.geom(f.cell);
        let k = 1.0 / (self.xi(f.cell, params) * params.reynolds);
        let beta = 2.0 * params.penalty / edge.length;
        let dn = geo.grads.map(|gr| gr[0] * n[0] + gr[1] * n[1]);
        let mut fu = [0.0; 6];
        let mut fp = 0.0;
        for iq in 0..3 {
            let x = q.points[iq];
            let w = q.weights[iq];
            let gv = value(x);
            let lam = geo.bary(x);
            let gn = gradient(x).map(|gr| [gr[0][0] * n[0] + gr[0][1] * n[1], gr[1][0] * n[0] + gr[1][1] * n[1]]);
            for c in 0..2 {
                for a in 0..3 {
                    let mut v = dn[a] * gv[c] - beta * gv[c] * lam[a];
                    if let Some(gn) = gn {
                        v += gn[c] * lam[a];
                    }
                    fu[3 * c + a] -= w * k * v;
                }
            }
            fp += w * (gv[0] * n[0] + gv[1] * n[1]);
        }
        (fu, fp)
    }

    /// Volume load `int f . v`.
    pub fn body_force(&self, f: impl Fn(Point) -> [f64; 2] + Sync + Send) -> Vec<f64> {
        let rule = triangle_degree4();
        let parts = self.exec.map(self.set.len(), |l| {
            let g = self.geom(l);
            let mut out = [0.0; 6];
            for q in &rule {
                let fv = f(g.point(q.bary));
                for c in 0..2 {
                    for a in 0..3 {
                        out[3 * c + a] += q.weight * g.area * fv[c] * q.bary[a];
                    }
                }
            }
            out
        });
        parts.into_iter().flatten().collect()
    }

    /// Edge mass `int u . v ds` over the facets selected by `which`.
    pub fn trace_mass(&self, which: TraceMass) -> CsrMatrix {
        let one_sided = |e: usize, l: usize, scale: f64| -> Vec<Triplet> {
            let q = edge_quad(self.mesh, e);
            let g = self.geom(l);
            let lam = q.points.map(|p| g.bary(p));
            let mut t = Vec::with_capacity(18);
            for c in 0..2 {
                for a in 0..3 {
                    for b in 0..3 {
                        let v: f64 = (0..3).map(|iq| q.weights[iq] * lam[iq][a] * lam[iq][b]).sum();
                        t.push((vdof(l, c, a), vdof(l, c, b), scale * v));
                    }
                }
            }
            t
        };
        let parts = match which {
            TraceMass::Boundary => {
                let f = self.set.boundary_facets();
                self.exec.map(f.len(), |k| one_sided(f[k].edge, f[k].cell, 1.0))
            }
            TraceMass::Interior => {
                let f = self.set.interior_facets();
                self.exec.map(f.len(), |k| {
                    let mut t = one_sided(f[k].edge, f[k].plus, 0.5);
                    t.extend(one_sided(f[k].edge, f[k].minus, 0.5));
                    t
                })
            }
        };
        self.square(parts)
    }
}
