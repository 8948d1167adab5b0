//! Configuration, run orchestration and file output.

pub mod config;
mod run;
pub mod vtk;

use std::io::Write;
use std::path::Path;

pub use config::{parse_config, parse_config_as, parse_config_str, InclusionSource, MeshSource, Mode, RunSpec};
pub use run::{boundary_data, error_report, prepare_mesh, run, sweep_csv, RunSummary, SweepRow, SWEEP_HEADER};
pub use vtk::{export_vtk, import_vtk, parse_vtk, vtk_string, VtkData};

use crate::{Error, Result};

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::file(path, e));
    }
    Ok(())
}
