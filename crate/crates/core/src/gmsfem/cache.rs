//! Binary cache of per-cell spectral bases.
//!
//! Layout (little endian): the 8-byte magic `MSFBAS02`, the 32-byte key,
//! then `u64` flags (bit 0 oversampled, bit 1 interior trace mass) and the
//! cell count, followed per cell by
//! `coarse_cell, n_cells, n_snapshots, r, J, regularized` as `u64`, the fine
//! cell ids (`u64`), the `J` eigenvalues, then `A^snap`, `S^snap` (`r x r`)
//! and the snapshot eigenvectors (`r x J`), column-major, then the `J` basis
//! functions (`6 n_cells` values each), all `f64`. `r` is the dimension of
//! the compressed snapshot basis.

use std::path::Path;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::{BasisOptions, CellBasis, MultiscaleSpace};
use crate::dg::{ModelParameters, TraceMass};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"MSFBAS02";

/// Cache key from the mesh description, the parameters, the options and
/// the linearisation field.
pub fn cache_key(mesh_text: &str, params: &ModelParameters, options: BasisOptions, u_lin: &[f64]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(mesh_text.as_bytes());
    for v in [params.reynolds, params.darcy, params.forchheimer, params.porosity, params.penalty, params.time_step] {
        h.update(v.to_le_bytes());
    }
    h.update((params.n_steps as u64).to_le_bytes());
    h.update([options.oversampled as u8, (options.trace_mass == TraceMass::Interior) as u8]);
    for v in u_lin {
        h.update(v.to_le_bytes());
    }
    h.finalize().into()
}

pub fn key_hex(key: &[u8; 32]) -> String {
    key.iter().map(|b| format!("{b:02x}")).collect()
}

fn put_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

fn put_f64s<'a>(out: &mut Vec<u8>, vs: impl IntoIterator<Item = &'a f64>) {
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode(space: &MultiscaleSpace, key: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(key);
    let flags = space.options.oversampled as usize | ((space.options.trace_mass == TraceMass::Interior) as usize) << 1;
    put_u64(&mut out, flags);
    put_u64(&mut out, space.bases.len());
    for b in &space.bases {
        put_u64(&mut out, b.coarse_cell);
        put_u64(&mut out, b.cells.len());
        put_u64(&mut out, b.n_snapshots);
        put_u64(&mut out, b.a_snap.nrows());
        put_u64(&mut out, b.len());
        put_u64(&mut out, b.regularized as usize);
        for &c in &b.cells {
            put_u64(&mut out, c);
        }
        put_f64s(&mut out, &b.eigenvalues);
        put_f64s(&mut out, b.a_snap.as_slice());
        put_f64s(&mut out, b.s_snap.as_slice());
        put_f64s(&mut out, b.snap_vectors.as_slice());
        for f in &b.functions {
            put_f64s(&mut out, f);
        }
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or_else(corrupt)?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<usize> {
        let b = self.take(8)?;
        usize::try_from(u64::from_le_bytes(b.try_into().expect("8 bytes"))).map_err(|_| corrupt())
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let b = self.take(n.checked_mul(8).ok_or_else(corrupt)?)?;
        Ok(b.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
}

fn corrupt() -> Error {
    Error::InvalidParameter { name: "basis cache", reason: "truncated or corrupt file".into() }
}

/// Decodes a cache entry; `Ok(None)` when the key does not match.
pub fn decode(data: &[u8], key: &[u8; 32]) -> Result<Option<MultiscaleSpace>> {
    let mut r = Reader { data, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(corrupt());
    }
    if r.take(32)? != key {
        return Ok(None);
    }
    let flags = r.u64()?;
    let options = BasisOptions {
        oversampled: flags & 1 != 0,
        trace_mass: if flags & 2 != 0 { TraceMass::Interior } else { TraceMass::Boundary },
    };
    let n = r.u64()?;
    let mut bases = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let coarse_cell = r.u64()?;
        let nc = r.u64()?;
        let n_snapshots = r.u64()?;
        let rank = r.u64()?;
        let j = r.u64()?;
        let regularized = r.u64()? != 0;
        let cells = (0..nc).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let eigenvalues = r.f64s(j)?;
        let square = rank.checked_mul(rank).ok_or_else(corrupt)?;
        let a_snap = DMatrix::from_vec(rank, rank, r.f64s(square)?);
        let s_snap = DMatrix::from_vec(rank, rank, r.f64s(square)?);
        let snap_vectors = DMatrix::from_vec(rank, j, r.f64s(rank.checked_mul(j).ok_or_else(corrupt)?)?);
        let functions = (0..j).map(|_| r.f64s(6 * nc)).collect::<Result<Vec<_>>>()?;
        bases.push(CellBasis { coarse_cell, cells, eigenvalues, functions, n_snapshots, a_snap, s_snap, snap_vectors, regularized });
    }
    if r.pos != data.len() {
        return Err(corrupt());
    }
    Ok(Some(MultiscaleSpace { options, bases }))
}

pub fn load(path: &Path, key: &[u8; 32]) -> Result<Option<MultiscaleSpace>> {
    match std::fs::read(path) {
        Ok(data) => decode(&data, key),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::file(path, e)),
    }
}

pub fn store(path: &Path, space: &MultiscaleSpace, key: &[u8; 32]) -> Result<()> {
    crate::io::write_atomic(path, &encode(space, key))
}
