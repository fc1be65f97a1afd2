//! Named built-ins and JSON files for states, bases, POVMs and setups.
//!
//! States: `plus`, `bell`, `ghz3`, `maximally-mixed[:d]`. Bases:
//! `computational[:d]`, `fourier[:d]`, `pauli-x`, `pauli-y`, `pauli-z`;
//! without `:d` the dimension follows the state. Anything else is a path.

use std::path::Path;

use kd_coherence::json::from_json;
use kd_coherence::linalg::{
    computational_basis, fourier_basis, pauli_x_basis, pauli_y_basis, pauli_z_basis, DensityMatrix,
    OrthonormalBasis, Povm,
};
use kd_coherence::response::ResponseSetup;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CliError;
use crate::manifest::sha256_hex;

pub struct Loaded<T> {
    pub value: T,
    pub digest: String,
}

fn split_dim(arg: &str) -> Result<(&str, Option<usize>), CliError> {
    match arg.split_once(':') {
        Some((name, d)) => {
            let d = d
                .parse()
                .map_err(|_| CliError::Invalid(format!("bad dimension in {arg:?}")))?;
            Ok((name, Some(d)))
        }
        None => Ok((arg, None)),
    }
}

fn cat_state(qubits: u32) -> Result<DensityMatrix, kd_coherence::Error> {
    let n = 1usize << qubits;
    let mut ket = vec![Complex64::new(0.0, 0.0); n];
    ket[0] = Complex64::new(1.0, 0.0);
    ket[n - 1] = Complex64::new(1.0, 0.0);
    DensityMatrix::from_ket(&ket)
}

fn named_state(arg: &str) -> Result<Option<DensityMatrix>, CliError> {
    let (name, d) = split_dim(arg)?;
    let state = match (name, d) {
        ("plus", None) => cat_state(1),
        ("bell", None) => cat_state(2),
        ("ghz3", None) => cat_state(3),
        ("maximally-mixed", d) => DensityMatrix::maximally_mixed(d.unwrap_or(2)),
        _ => return Ok(None),
    };
    state
        .map(Some)
        .map_err(CliError::core(format!("state {arg}")))
}

fn named_basis(arg: &str, dim: usize) -> Result<Option<OrthonormalBasis>, CliError> {
    let (name, d) = split_dim(arg)?;
    let d = d.unwrap_or(dim);
    let basis = match name {
        "computational" => computational_basis(d),
        "fourier" => fourier_basis(d),
        "pauli-x" => Ok(pauli_x_basis()),
        "pauli-y" => Ok(pauli_y_basis()),
        "pauli-z" => Ok(pauli_z_basis()),
        _ => return Ok(None),
    };
    basis
        .map(Some)
        .map_err(CliError::core(format!("basis {arg}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_file<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<Loaded<T>, CliError> {
    let text = read(path)?;
    let value = from_json(&text).map_err(CliError::core(format!("{what} {}", path.display())))?;
    Ok(Loaded {
        value,
        digest: sha256_hex(text.as_bytes()),
    })
}

fn named<T>(value: T, arg: &str) -> Loaded<T> {
    Loaded {
        value,
        digest: sha256_hex(format!("name:{arg}").as_bytes()),
    }
}

pub fn load_state(arg: &str) -> Result<Loaded<DensityMatrix>, CliError> {
    match named_state(arg)? {
        Some(state) => Ok(named(state, arg)),
        None => load_file(Path::new(arg), "state"),
    }
}

pub fn load_basis(arg: &str, dim: usize) -> Result<Loaded<OrthonormalBasis>, CliError> {
    match named_basis(arg, dim)? {
        Some(basis) => Ok(named(basis, arg)),
        None => load_file(Path::new(arg), "basis"),
    }
}

pub fn load_povm(path: &Path) -> Result<Loaded<Povm>, CliError> {
    load_file(path, "POVM")
}

pub fn load_setup(path: &Path) -> Result<Loaded<ResponseSetup>, CliError> {
    load_file(path, "response setup")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_states() {
        let ghz = load_state("ghz3").unwrap().value;
        assert_eq!(ghz.dim(), 8);
        assert!((ghz.matrix()[(0, 7)].re - 0.5).abs() < 1e-15);
        assert_eq!(load_state("maximally-mixed:5").unwrap().value.dim(), 5);
        assert_eq!(load_state("bell").unwrap().digest, sha256_hex(b"name:bell"));
        assert!(matches!(
            load_state("maximally-mixed:x"),
            Err(CliError::Invalid(_))
        ));
        assert!(matches!(
            load_state("/no/such/file.json"),
            Err(CliError::Io { .. })
        ));
    }

    #[test]
    fn basis_dimension_follows_state() {
        assert_eq!(load_basis("fourier", 3).unwrap().value.dim(), 3);
        assert_eq!(load_basis("computational:4", 3).unwrap().value.dim(), 4);
        assert_eq!(load_basis("pauli-y", 2).unwrap().value, pauli_y_basis());
    }
}
