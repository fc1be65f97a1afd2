//! JSON forms of matrices and the types built on them.
//!
//! A matrix is `{"dim": d, "re": [[...]], "im": [[...]]}` with rows listed in
//! order. A basis uses the same form with the kets as columns. A POVM is
//! `{"dim": d, "elements": [matrix, ...]}` and a KD table is
//! `{"dim": d, "basis_a": basis, "basis_b": basis, "re": ..., "im": ...}`.
//! Reading validates through the ordinary constructors.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kd::KdTable;
use crate::linalg::{ComplexMatrix, DensityMatrix, OrthonormalBasis, Povm};

/// Wire form of a square complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Shape-checked matrix; rejects non-finite entries.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        for part in [&self.re, &self.im] {
            if part.len() != d {
                return Err(Error::Parse(format!(
                    "expected {d} rows, found {}",
                    part.len()
                )));
            }
            for row in part {
                if row.len() != d {
                    return Err(Error::Parse(format!(
                        "expected rows of length {d}, found {}",
                        row.len()
                    )));
                }
                if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                    return Err(Error::NonFinite(format!("matrix entry {x}")));
                }
            }
        }
        Ok(ComplexMatrix::from_fn(d, d, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixJson::deserialize(d)?;
        wire.to_matrix()
            .and_then(DensityMatrix::new)
            .map_err(D::Error::custom)
    }
}

impl Serialize for OrthonormalBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrthonormalBasis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixJson::deserialize(d)?;
        wire.to_matrix()
            .and_then(OrthonormalBasis::new)
            .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PovmJson {
    dim: usize,
    elements: Vec<MatrixJson>,
}

impl Serialize for Povm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PovmJson {
            dim: self.dim(),
            elements: self
                .elements()
                .iter()
                .map(MatrixJson::from_matrix)
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = PovmJson::deserialize(d)?;
        let build = || -> Result<Povm> {
            let mut elements = Vec::with_capacity(wire.elements.len());
            for e in &wire.elements {
                if e.dim != wire.dim {
                    return Err(Error::DimensionMismatch {
                        expected: wire.dim,
                        found: e.dim,
                    });
                }
                elements.push(e.to_matrix()?);
            }
            Povm::new(elements)
        };
        build().map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct KdTableJson {
    dim: usize,
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for KdTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = MatrixJson::from_matrix(self.entries());
        KdTableJson {
            dim: self.dim(),
            basis_a: self.basis_a().clone(),
            basis_b: self.basis_b().clone(),
            re: m.re,
            im: m.im,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KdTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = KdTableJson::deserialize(d)?;
        let entries = MatrixJson {
            dim: wire.dim,
            re: wire.re,
            im: wire.im,
        }
        .to_matrix()
        .map_err(D::Error::custom)?;
        KdTable::new(wire.basis_a, wire.basis_b, entries).map_err(D::Error::custom)
    }
}

/// Parses JSON text, mapping failures to [`Error::Parse`].
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty-printed JSON text.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kd::kd_table;
    use crate::linalg::{fourier_basis, pauli_y_basis, random_mixed_state};

    #[test]
    fn state_round_trip_is_exact() {
        let rho = random_mixed_state(3, 4).unwrap();
        let back: DensityMatrix = from_json(&to_json(&rho).unwrap()).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn basis_columns_are_kets() {
        let y = pauli_y_basis();
        let text = to_json(&y).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        // |+i> = (|0> + i|1>)/sqrt2 is column 0: entry (1, 0) is imaginary
        assert!((v["im"][1][0].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let back: OrthonormalBasis = from_json(&text).unwrap();
        assert_eq!(back, y);
    }

    #[test]
    fn table_round_trip() {
        let rho = random_mixed_state(3, 1).unwrap();
        let t = kd_table(
            &rho,
            &fourier_basis(3).unwrap(),
            &crate::linalg::computational_basis(3).unwrap(),
        )
        .unwrap();
        let back: KdTable = from_json(&to_json(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad_shape = r#"{"dim": 2, "re": [[1, 0]], "im": [[0, 0], [0, 0]]}"#;
        assert!(matches!(
            from_json::<DensityMatrix>(bad_shape),
            Err(Error::Parse(_))
        ));
        let not_state = r#"{"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}"#;
        let err = from_json::<DensityMatrix>(not_state).unwrap_err();
        assert!(err.to_string().contains("trace"), "{err}");
        assert!(from_json::<DensityMatrix>(r#"{"dim": 1, "re": [[NaN]], "im": [[0]]}"#).is_err());
        let huge = r#"{"dim": 1, "re": [[1e999]], "im": [[0]]}"#;
        assert!(from_json::<DensityMatrix>(huge).is_err());
    }
}
