//! Text file formats.
//!
//! Every file is a single JSON object. Complex numbers are `[re, im]` pairs.
//!
//! - matrix: `{"dim": d, "entries": [[re, im], ...]}` with `d*d` entries in
//!   row-major order;
//! - vector: `{"dim": d, "entries": [...]}` with `d` entries;
//! - pure-state map: `{"dim": d, "pairs": [[vector, vector], ...]}`;
//! - symmetry: a matrix file with an optional `"antiunitary": bool`.
//!
//! Numbers are written in shortest round-trip form and parsed exactly, so a
//! write followed by a read reproduces every entry bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::linalg::{ComplexMatrix, ComplexVector, PureState, C64};
use crate::measure::{Decomposition, MeasureResult};
use crate::preserver::{PureStateMap, SymmetryOp};

/// Failure to read or decode a file. Validation of the decoded values
/// (positivity, unit norm, ...) is reported through [`Error`] instead.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {what}: {message}")]
    Parse { what: &'static str, message: String },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Invalid(#[from] Error),
}

pub type Entry = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VectorFile {
    pub dim: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapFile {
    pub dim: usize,
    pub pairs: Vec<[VectorFile; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SymmetryFile {
    pub dim: usize,
    pub entries: Vec<Entry>,
    #[serde(default)]
    pub antiunitary: bool,
}

fn parse_error(what: &'static str, message: impl Into<String>) -> FormatError {
    FormatError::Parse { what, message: message.into() }
}

fn entry(z: &C64) -> Entry {
    [z.re, z.im]
}

fn complex(e: &Entry) -> C64 {
    C64::new(e[0], e[1])
}

fn check_entries(what: &'static str, entries: &[Entry], expected: usize) -> Result<(), FormatError> {
    if entries.len() != expected {
        return Err(parse_error(what, format!("expected {expected} entries, found {}", entries.len())));
    }
    if entries.iter().flatten().any(|x| !x.is_finite()) {
        return Err(parse_error(what, "non-finite entry"));
    }
    Ok(())
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let d = m.nrows();
        let entries = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| entry(&m[(i, j)])).collect();
        MatrixFile { dim: d, entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, FormatError> {
        check_entries("matrix", &self.entries, self.dim * self.dim)?;
        Ok(ComplexMatrix::from_row_iterator(self.dim, self.dim, self.entries.iter().map(complex)))
    }
}

impl VectorFile {
    pub fn from_vector(v: &ComplexVector) -> Self {
        VectorFile { dim: v.len(), entries: v.iter().map(entry).collect() }
    }

    pub fn to_vector(&self) -> Result<ComplexVector, FormatError> {
        check_entries("vector", &self.entries, self.dim)?;
        Ok(ComplexVector::from_iterator(self.dim, self.entries.iter().map(complex)))
    }
}

impl MapFile {
    pub fn from_map(map: &PureStateMap) -> Self {
        let pairs = map
            .pairs()
            .iter()
            .map(|(p, q)| [VectorFile::from_vector(p.vector()), VectorFile::from_vector(q.vector())])
            .collect();
        MapFile { dim: map.dim(), pairs }
    }

    pub fn to_map(&self) -> Result<PureStateMap, LoadError> {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for [input, output] in &self.pairs {
            let p = PureState::new(input.to_vector()?)?;
            let q = PureState::new(output.to_vector()?)?;
            pairs.push((p, q));
        }
        Ok(PureStateMap::new(self.dim, pairs)?)
    }
}

impl SymmetryFile {
    pub fn from_symmetry(s: &SymmetryOp) -> Self {
        let m = MatrixFile::from_matrix(s.unitary());
        SymmetryFile { dim: m.dim, entries: m.entries, antiunitary: s.is_antiunitary() }
    }

    pub fn to_symmetry(&self) -> Result<SymmetryOp, LoadError> {
        let m = MatrixFile { dim: self.dim, entries: self.entries.clone() }.to_matrix()?;
        Ok(SymmetryOp::new(m, self.antiunitary)?)
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(what: &'static str, text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| parse_error(what, e.to_string()))
}

pub fn to_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("file types serialize")
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Read { path: path.to_path_buf(), source })
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, FormatError> {
    parse::<MatrixFile>("matrix", &read_text(path)?)?.to_matrix()
}

pub fn read_vector(path: &Path) -> Result<ComplexVector, FormatError> {
    parse::<VectorFile>("vector", &read_text(path)?)?.to_vector()
}

pub fn read_map(path: &Path) -> Result<PureStateMap, LoadError> {
    parse::<MapFile>("pure-state map", &read_text(path)?)?.to_map()
}

pub fn read_symmetry(path: &Path) -> Result<SymmetryOp, LoadError> {
    parse::<SymmetryFile>("symmetry", &read_text(path)?)?.to_symmetry()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DecompositionReport {
    pub weights: Vec<f64>,
    pub pures: Vec<VectorFile>,
}

impl From<&Decomposition> for DecompositionReport {
    fn from(d: &Decomposition) -> Self {
        DecompositionReport {
            weights: d.weights.clone(),
            pures: d.pures.iter().map(|q| VectorFile::from_vector(q.vector())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MeasureReport {
    pub value: f64,
    pub residual: f64,
    pub restarts_used: usize,
    pub components: usize,
    pub intersection_dim: usize,
    pub decomposition_a: DecompositionReport,
    pub decomposition_b: DecompositionReport,
}

impl From<&MeasureResult> for MeasureReport {
    fn from(r: &MeasureResult) -> Self {
        MeasureReport {
            value: r.value,
            residual: r.residual,
            restarts_used: r.restarts_used,
            components: r.components,
            intersection_dim: r.intersection_dim,
            decomposition_a: (&r.decomposition_a).into(),
            decomposition_b: (&r.decomposition_b).into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_density, random_symmetry};
    use crate::Operator;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let a = random_density(4, 3, 9).unwrap();
        let text = to_text(&MatrixFile::from_matrix(a.matrix()));
        let back = parse::<MatrixFile>("matrix", &text).unwrap().to_matrix().unwrap();
        for (x, y) in a.matrix().iter().zip(back.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn row_major_order() {
        let f: MatrixFile = parse("matrix", r#"{"dim":2,"entries":[[1,0],[2,0],[3,0],[4,0]]}"#).unwrap();
        let m = f.to_matrix().unwrap();
        assert_eq!(m[(0, 1)], C64::new(2.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(3.0, 0.0));
    }

    #[test]
    fn wrong_entry_count() {
        let f: MatrixFile = parse("matrix", r#"{"dim":2,"entries":[[1,0]]}"#).unwrap();
        assert!(f.to_matrix().is_err());
        assert!(parse::<VectorFile>("vector", "{\"dim\": 2").is_err());
    }

    #[test]
    fn symmetry_and_map_round_trip() {
        let s = random_symmetry(3, true, 2);
        let back = parse::<SymmetryFile>("symmetry", &to_text(&SymmetryFile::from_symmetry(&s)))
            .unwrap()
            .to_symmetry()
            .unwrap();
        assert_eq!(back, s);

        let map = PureStateMap::probes_of(&s).unwrap();
        let back = parse::<MapFile>("map", &to_text(&MapFile::from_map(&map))).unwrap().to_map().unwrap();
        assert_eq!(back.len(), map.len());
        for ((p, q), (p2, q2)) in map.pairs().iter().zip(back.pairs()) {
            assert_eq!(p.vector(), p2.vector());
            assert_eq!(q.vector(), q2.vector());
        }
    }

    #[test]
    fn antiunitary_flag_defaults_to_false() {
        let f: SymmetryFile = parse("symmetry", r#"{"dim":2,"entries":[[0,0],[1,0],[1,0],[0,0]]}"#).unwrap();
        assert!(!f.to_symmetry().unwrap().is_antiunitary());
    }

    #[test]
    fn unnormalized_map_vector_is_invalid() {
        let text = r#"{"dim":2,"pairs":[[{"dim":2,"entries":[[2,0],[0,0]]},{"dim":2,"entries":[[1,0],[0,0]]}]]}"#;
        let err = parse::<MapFile>("map", text).unwrap().to_map().unwrap_err();
        assert!(matches!(err, LoadError::Invalid(Error::NotNormalized { .. })));
    }
}
