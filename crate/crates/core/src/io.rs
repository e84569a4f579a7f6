//! On-disk formats.
//!
//! Matrices are raw little-endian complex128 in row-major order (real part
//! first), with a JSON sidecar at `<path>.json` carrying the lattice and the
//! shape. Spectra are single-column CSV. Decompositions are a directory with a
//! `manifest.json` and one matrix file per term.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Cube, Lattice};
use crate::locality::LocalDecomposition;
use crate::quadratic::MajoranaQuadratic;
use crate::scalar::CMatrix;

pub const MATRIX_FORMAT: &str = "complex128-le-row-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub lattice: Lattice,
    pub rows: usize,
    pub cols: usize,
    pub format: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

pub fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    Ok(serde_json::from_reader(std::io::BufReader::new(fs::File::open(path)?))?)
}

pub fn write_matrix(path: &Path, m: &CMatrix<f64>, lattice: &Lattice) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for z in m.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    let side =
        MatrixSidecar { lattice: lattice.clone(), rows: m.nrows(), cols: m.ncols(), format: MATRIX_FORMAT.into() };
    write_json(&sidecar_path(path), &side)
}

pub fn read_matrix(path: &Path) -> Result<(Lattice, CMatrix<f64>)> {
    let side: MatrixSidecar = read_json(&sidecar_path(path))?;
    if side.format != MATRIX_FORMAT {
        return Err(Error::InvalidArgument(format!("unsupported matrix format {}", side.format)));
    }
    let bytes = fs::read(path)?;
    let expected = side.rows * side.cols * 16;
    if bytes.len() != expected {
        return Err(Error::Shape { expected: format!("{expected} bytes"), actual: format!("{} bytes", bytes.len()) });
    }
    let vals: Vec<Complex<f64>> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex::new(re, im)
        })
        .collect();
    let m = Array2::from_shape_vec((side.rows, side.cols), vals).expect("length checked");
    Ok((side.lattice, m))
}

pub fn write_quadratic(path: &Path, h: &MajoranaQuadratic<f64>) -> Result<()> {
    write_matrix(path, h.matrix(), h.lattice())
}

pub fn read_quadratic(path: &Path) -> Result<MajoranaQuadratic<f64>> {
    let (lat, m) = read_matrix(path)?;
    MajoranaQuadratic::new(lat, m)
}

/// One value per row under the header `eigenvalue`.
pub fn write_spectrum_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["eigenvalue"])?;
    for v in values {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            rec[0].parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad eigenvalue {}: {e}", &rec[0])))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub cube: Cube,
    pub file: String,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionManifest {
    pub lattice: Lattice,
    pub dim: usize,
    pub terms: Vec<ManifestEntry>,
}

/// Writes `manifest.json` and `term_NNNN.bin` files into `dir`.
pub fn write_decomposition(dir: &Path, dec: &LocalDecomposition<f64>, lattice: &Lattice) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut terms = Vec::with_capacity(dec.len());
    for (i, (cube, op)) in dec.terms().enumerate() {
        let file = format!("term_{i:04}.bin");
        write_matrix(&dir.join(&file), op.matrix(), lattice)?;
        terms.push(ManifestEntry { cube: cube.clone(), file, norm: op.norm()? });
    }
    write_json(&dir.join("manifest.json"), &DecompositionManifest { lattice: lattice.clone(), dim: dec.dim(), terms })
}

pub fn read_decomposition(dir: &Path) -> Result<(Lattice, LocalDecomposition<f64>)> {
    let manifest: DecompositionManifest = read_json(&dir.join("manifest.json"))?;
    let mut dec = LocalDecomposition::new(manifest.dim);
    for entry in manifest.terms {
        let (_, m) = read_matrix(&dir.join(&entry.file))?;
        dec.add(entry.cube, crate::fock::FockOperator::from_matrix(m)?)?;
    }
    Ok((manifest.lattice, dec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;
    use crate::models;

    #[test]
    fn matrix_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let h = models::random_local::<f64>(Lattice::chain(3, Boundary::Periodic, 2).unwrap(), 1.0, 0.7, 9).unwrap();
        let p = dir.path().join("a.bin");
        write_quadratic(&p, &h).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 6 * 6 * 16);
        let back = read_quadratic(&p).unwrap();
        assert_eq!(back.lattice(), h.lattice());
        assert_eq!(back.matrix(), h.matrix());
    }

    #[test]
    fn spectrum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let vals = [-1.5, 0.1 + 0.2, 3.0e-17];
        write_spectrum_csv(&p, &vals).unwrap();
        assert_eq!(read_spectrum_csv(&p).unwrap(), vals);
    }

    #[test]
    fn truncated_matrix_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let h = models::kitaev_chain::<f64>(2, 1.0, 1.0, 3.0, Boundary::Open).unwrap();
        let p = dir.path().join("a.bin");
        write_quadratic(&p, &h).unwrap();
        fs::write(&p, [0u8; 17]).unwrap();
        assert!(matches!(read_quadratic(&p), Err(Error::Shape { .. })));
    }
}
