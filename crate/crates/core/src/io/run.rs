use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{MeshSource, Mode, RunSpec};
use super::vtk::{export_vtk, import_vtk};
use super::write_atomic;
use crate::analysis::{
    coarse_average, dof_counts, error_pressure, error_stress, error_velocity, field_statistics, ErrorReport, RegionStats,
};
use crate::dg::{BoundaryData, DgState, ModelParameters};
use crate::fine::{run_fine, Trajectory};
use crate::geometry::mesh_io::{load_mesh, write_mesh, write_mesh_string};
use crate::geometry::{generate_structured_mesh, CoarseGrid, TriMesh};
use crate::gmsfem::{cache, compute_linearization_field_with, BasisOptions, CoarseSolver, MultiscaleSpace};
use crate::fine::Nonlinearity;
use crate::parallel::Execution;
use crate::{Error, Result};

/// Files written and one-line messages for the terminal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    pub messages: Vec<String>,
}

/// Mesh, coarse grid and the canonical text of the mesh (used for hashing).
pub fn prepare_mesh(spec: &RunSpec) -> Result<(TriMesh, CoarseGrid, String)> {
    let (mut mesh, coarse) = match &spec.mesh {
        MeshSource::Generate { coarse, refinement } => generate_structured_mesh(&spec.domain()?, *refinement, *coarse)?,
        MeshSource::File(p) => load_mesh(p)?,
    };
    mesh.set_boundary_layout(spec.layout);
    let text = write_mesh_string(&mesh, &coarse);
    Ok((mesh, coarse, text))
}

pub fn boundary_data(spec: &RunSpec) -> BoundaryData {
    BoundaryData::per_side(spec.boundary_values)
}

/// One row of a sweep table: errors without and with oversampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    pub dof_coarse: usize,
    pub plain: Option<ErrorReport>,
    pub oversampled: Option<ErrorReport>,
}

pub const SWEEP_HEADER: &str = "M,DOF_H,e_u_plain,e_s_plain,e_p_plain,e_u_os,e_s_os,e_p_os";

/// CSV table of relative errors in percent; missing settings leave empty
/// fields. Values above 100 are written as is.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    let cols = |r: Option<ErrorReport>| match r {
        Some(e) => format!("{},{},{}", 100.0 * e.e_u, 100.0 * e.e_s, 100.0 * e.e_p),
        None => ",,".to_string(),
    };
    for r in rows {
        writeln!(s, "{},{},{},{}", r.m, r.dof_coarse, cols(r.plain), cols(r.oversampled)).unwrap();
    }
    s
}

fn da_label(da: f64) -> String {
    format!("{da:e}").replace('+', "")
}

fn stats_text(label: &str, s: Option<RegionStats>) -> String {
    match s {
        None => format!("{label}: no cells\n"),
        Some(s) => format!(
            "{label}: area {} mean|u| {} max|u| {} mean p {} min p {} max p {}\n",
            s.area, s.mean_speed, s.max_speed, s.mean_pressure, s.min_pressure, s.max_pressure
        ),
    }
}

fn reference_run(mesh: &TriMesh, params: &ModelParameters, bc: &BoundaryData) -> Result<Trajectory> {
    let traj = run_fine(mesh, params, bc)?;
    let worst = traj.divergence_residuals.iter().fold(0.0f64, |m, v| m.max(*v));
    log::info!("fine run: {} steps, worst divergence residual {worst:.2e}", params.n_steps);
    Ok(traj)
}

/// Errors of a multiscale state (fine velocity, coarse pressure) against a
/// fine reference.
pub fn error_report(
    mesh: &TriMesh,
    coarse: &CoarseGrid,
    reference: &DgState,
    u_ms: &[f64],
    p_coarse: &[f64],
    m: usize,
) -> Result<ErrorReport> {
    let (dof_fine, dof_coarse) = dof_counts(mesh.n_cells(), coarse.len(), m);
    Ok(ErrorReport {
        e_u: error_velocity(mesh, &reference.velocity, u_ms)?,
        e_s: error_stress(mesh, &reference.velocity, u_ms)?,
        e_p: error_pressure(mesh, coarse, &reference.pressure, p_coarse)?,
        dof_fine,
        dof_coarse,
    })
}

struct Offline<'a> {
    spec: &'a RunSpec,
    mesh: &'a TriMesh,
    coarse: &'a CoarseGrid,
    mesh_text: &'a str,
    exec: Execution,
}

impl Offline<'_> {
    fn space(&self, params: &ModelParameters, u_lin: &[f64], oversampled: bool) -> Result<MultiscaleSpace> {
        let options = BasisOptions { oversampled, trace_mass: self.spec.trace_mass };
        let cached = self.spec.cache_dir.as_ref().map(|dir| {
            let key = cache::cache_key(self.mesh_text, params, options, u_lin);
            (dir.join(format!("basis_{}.bin", &cache::key_hex(&key)[..16])), key)
        });
        if let Some((path, key)) = &cached {
            if let Some(space) = cache::load(path, key)? {
                log::info!("loaded basis cache {}", path.display());
                return Ok(space);
            }
        }
        let space = MultiscaleSpace::build(self.mesh, self.coarse, params, u_lin, options, self.exec)?;
        if let Some((path, key)) = &cached {
            cache::store(path, &space, key)?;
        }
        Ok(space)
    }

    /// Coarse runs for every basis count; results in list order.
    fn solve_all(&self, params: &ModelParameters, bc: &BoundaryData, space: &MultiscaleSpace) -> Result<Vec<(DgState, Vec<f64>, f64)>> {
        let counts = &self.spec.basis_counts;
        let max = space.max_basis();
        if let Some(&m) = counts.iter().find(|&&m| m > max) {
            return Err(Error::param("M", format!("{m} exceeds the smallest snapshot count {max}")));
        }
        self.exec.try_map(counts.len(), |k| {
            let proj = space.projection(self.mesh, self.coarse, counts[k])?;
            let run = CoarseSolver::new(self.mesh, self.coarse, params, bc, &proj, Nonlinearity::FULL, Execution::Sequential)?.run()?;
            let worst = run.divergence_residuals.iter().fold(0.0f64, |m, v| m.max(*v));
            Ok((run.fine, run.coarse_pressure, worst))
        })
    }
}

fn setting(oversampled: bool) -> &'static str {
    if oversampled {
        "os"
    } else {
        "plain"
    }
}

/// Executes a run and writes its artifacts below `spec.output`.
pub fn run(spec: &RunSpec) -> Result<RunSummary> {
    crate::parallel::init_threads_from_env();
    let out = &spec.output;
    std::fs::create_dir_all(out).map_err(|e| Error::file(out, e))?;
    let (mesh, coarse, mesh_text) = prepare_mesh(spec)?;
    let bc = boundary_data(spec);
    let exec = Execution::default();
    let mut summary = RunSummary::default();
    let emit = |summary: &mut RunSummary, path: PathBuf, bytes: &[u8]| -> Result<()> {
        write_atomic(&path, bytes)?;
        summary.artifacts.push(path);
        Ok(())
    };
    let (dof_fine, _) = dof_counts(mesh.n_cells(), coarse.len(), 0);
    summary.messages.push(format!(
        "mesh: {} cells, {} coarse cells ({}x{}), DOF_h = {dof_fine}",
        mesh.n_cells(),
        coarse.len(),
        coarse.nx(),
        coarse.ny()
    ));

    match spec.mode {
        Mode::Mesh => {
            let p = out.join("mesh.msh");
            write_mesh(&p, &mesh, &coarse)?;
            summary.artifacts.push(p);
            let p = out.join("mesh.vtk");
            export_vtk(&mesh, &DgState::zeros(mesh.n_cells()), &p)?;
            summary.artifacts.push(p);
        }
        Mode::Fine => {
            let traj = reference_run(&mesh, &spec.params, &bc)?;
            let fin = traj.final_state();
            let p = out.join("fine.vtk");
            export_vtk(&mesh, fin, &p)?;
            summary.artifacts.push(p);
            let st = field_statistics(&mesh, fin)?;
            let worst = traj.divergence_residuals.iter().fold(0.0f64, |m, v| m.max(*v));
            let text = format!(
                "steps {}\nt_final {}\nmax_divergence_residual {worst:e}\n{}{}",
                spec.params.n_steps,
                spec.params.t_max(),
                stats_text("fluid", st.fluid),
                stats_text("porous", st.porous)
            );
            summary.messages.extend(text.lines().map(String::from));
            emit(&mut summary, out.join("stats.txt"), text.as_bytes())?;
        }
        Mode::Ms => {
            let params = spec.params;
            let reference = match &spec.reference {
                Some(p) => {
                    let data = import_vtk(p)?;
                    if data.state.n_cells() != mesh.n_cells() {
                        return Err(Error::DimensionMismatch {
                            what: "reference cells",
                            expected: mesh.n_cells(),
                            found: data.state.n_cells(),
                        });
                    }
                    data.state
                }
                None => reference_run(&mesh, &params, &bc)?.final_state().clone(),
            };
            let u_lin = compute_linearization_field_with(&mesh, &params, &bc, exec)?;
            let off = Offline { spec, mesh: &mesh, coarse: &coarse, mesh_text: &mesh_text, exec };
            let mut report = String::from("M,oversampled,DOF_h,DOF_H,e_u,e_s,e_p,max_divergence_residual\n");
            for &os in &spec.oversampling {
                let space = off.space(&params, &u_lin, os)?;
                for (&m, (fine, p_h, worst)) in spec.basis_counts.iter().zip(off.solve_all(&params, &bc, &space)?) {
                    let e = error_report(&mesh, &coarse, &reference, &fine.velocity, &p_h, m)?;
                    writeln!(report, "{m},{os},{},{},{},{},{},{worst:e}", e.dof_fine, e.dof_coarse, e.e_u, e.e_s, e.e_p).unwrap();
                    summary.messages.push(format!(
                        "M={m} {}: DOF_H={} e_u={:.4}% e_s={:.4}% e_p={:.4}%",
                        setting(os),
                        e.dof_coarse,
                        100.0 * e.e_u,
                        100.0 * e.e_s,
                        100.0 * e.e_p
                    ));
                    let p = out.join(format!("ms_M{m}_{}.vtk", setting(os)));
                    export_vtk(&mesh, &fine, &p)?;
                    summary.artifacts.push(p);
                }
            }
            emit(&mut summary, out.join("report.csv"), report.as_bytes())?;
        }
        Mode::Sweep => {
            let off = Offline { spec, mesh: &mesh, coarse: &coarse, mesh_text: &mesh_text, exec };
            for &da in &spec.darcy_values {
                let params = spec.params_for(da)?;
                let reference = reference_run(&mesh, &params, &bc)?.final_state().clone();
                let u_lin = compute_linearization_field_with(&mesh, &params, &bc, exec)?;
                let mut rows: Vec<SweepRow> = spec
                    .basis_counts
                    .iter()
                    .map(|&m| SweepRow { m, dof_coarse: dof_counts(mesh.n_cells(), coarse.len(), m).1, plain: None, oversampled: None })
                    .collect();
                for &os in &spec.oversampling {
                    let space = off.space(&params, &u_lin, os)?;
                    for (row, (fine, p_h, _)) in rows.iter_mut().zip(off.solve_all(&params, &bc, &space)?) {
                        let e = error_report(&mesh, &coarse, &reference, &fine.velocity, &p_h, row.m)?;
                        if os {
                            row.oversampled = Some(e);
                        } else {
                            row.plain = Some(e);
                        }
                    }
                }
                let name = format!("sweep_da_{}.csv", da_label(da));
                summary.messages.push(format!("Da = {da:e}: {} rows -> {name}", rows.len()));
                emit(&mut summary, out.join(name), sweep_csv(&rows).as_bytes())?;
            }
        }
        Mode::Compare => {
            let load = |p: &Path| -> Result<DgState> {
                let d = import_vtk(p)?;
                if d.state.n_cells() != mesh.n_cells() {
                    return Err(Error::DimensionMismatch {
                        what: "compared cells",
                        expected: mesh.n_cells(),
                        found: d.state.n_cells(),
                    });
                }
                Ok(d.state)
            };
            let reference = load(spec.reference.as_deref().expect("validated"))?;
            let candidate = load(spec.candidate.as_deref().expect("validated"))?;
            let p_coarse = coarse_average(&mesh, &coarse, &candidate.pressure)?;
            let e = error_report(&mesh, &coarse, &reference, &candidate.velocity, &p_coarse, 0)?;
            let text = format!("e_u {}\ne_s {}\ne_p {}\n", e.e_u, e.e_s, e.e_p);
            summary.messages.extend(text.lines().map(String::from));
            emit(&mut summary, out.join("compare.txt"), text.as_bytes())?;
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::parse_config_str;

    #[test]
    fn csv_layout() {
        let e = ErrorReport { e_u: 0.04633, e_s: 1.5, e_p: 0.0, dof_fine: 0, dof_coarse: 2600 };
        let s = sweep_csv(&[SweepRow { m: 25, dof_coarse: 2600, plain: Some(e), oversampled: None }]);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(SWEEP_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("25,2600,4.633"));
        assert!(row.contains(",150,"));
        assert!(row.ends_with(",,"));
        assert_eq!(da_label(1e-5), "1e-5");
    }

    #[test]
    fn mesh_mode_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = format!(
            "[run]\nmode = mesh\noutput = {}\n[mesh]\ncoarse = 2 2\nrefinement = 2\n[domain]\ninclusion = 0.5 0.5 0.3\n",
            dir.path().display()
        );
        let spec = parse_config_str(&cfg, dir.path()).unwrap();
        let s = run(&spec).unwrap();
        assert_eq!(s.artifacts.len(), 2);
        let (m, c) = load_mesh(&dir.path().join("mesh.msh")).unwrap();
        assert_eq!((m.n_cells(), c.len()), (32, 4));
    }
}
