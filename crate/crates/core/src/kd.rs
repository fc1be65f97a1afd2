//! Kirkwood-Dirac quasiprobability tables.
//!
//! For a state `rho` and two orthonormal bases `{|a>}`, `{|b>}` the table
//! entry is `Pr(a, b) = <b|Pi_a rho|b> = <b|a><a|rho|b>`. Its marginals are the
//! Born probabilities in either basis, its imaginary part is
//! `<b|[Pi_a, rho]|b> / 2i`, and when every overlap `<b|a>` is nonzero the table
//! determines the state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    check_same_dim, commutator, ComplexMatrix, DensityMatrix, OrthonormalBasis, ONE, ZERO,
};

/// Normalization and marginal tolerance for tables.
pub const TABLE_TOL: f64 = 1e-9;
/// Overlaps at or below this modulus make the inverse map undefined.
pub const SINGULAR_OVERLAP: f64 = 1e-12;

/// `Pr_KD(a, b | rho)` over a fixed basis pair. Row index `a`, column index `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdTable {
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    entries: ComplexMatrix,
}

impl KdTable {
    /// Validates normalization and the reality/positivity of both marginals.
    pub fn new(
        basis_a: OrthonormalBasis,
        basis_b: OrthonormalBasis,
        entries: ComplexMatrix,
    ) -> Result<Self> {
        let d = basis_a.dim();
        check_same_dim(d, basis_b.dim())?;
        check_same_dim(d, entries.nrows())?;
        check_same_dim(d, entries.ncols())?;
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("table entries".into()));
        }
        let table = Self {
            basis_a,
            basis_b,
            entries,
        };
        let total: Complex64 = table.entries.iter().sum();
        if (total - ONE).norm() > TABLE_TOL {
            return Err(Error::TraceNotOne {
                residual: (total - ONE).norm(),
            });
        }
        for p in table
            .marginal_b_complex()
            .iter()
            .chain(table.marginal_a_complex().iter())
        {
            if p.im.abs() > TABLE_TOL || p.re < -TABLE_TOL {
                return Err(Error::Parse(format!(
                    "table marginal {p} is not a probability"
                )));
            }
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn basis_a(&self) -> &OrthonormalBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &OrthonormalBasis {
        &self.basis_b
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.entries[(a, b)]
    }

    /// Terletsky-Margenau-Hill part.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.im)
    }

    fn marginal_a_complex(&self) -> Vec<Complex64> {
        (0..self.dim())
            .map(|a| self.entries.row(a).iter().sum())
            .collect()
    }

    fn marginal_b_complex(&self) -> Vec<Complex64> {
        (0..self.dim())
            .map(|b| self.entries.column(b).iter().sum())
            .collect()
    }

    /// `sum_b Pr(a, b)`, the Born probabilities `<a|rho|a>`.
    pub fn marginal_a(&self) -> Vec<f64> {
        self.marginal_a_complex().iter().map(|z| z.re).collect()
    }

    /// `sum_a Pr(a, b)`, the Born probabilities `<b|rho|b>`.
    pub fn marginal_b(&self) -> Vec<f64> {
        self.marginal_b_complex().iter().map(|z| z.re).collect()
    }
}

/// Table of `<b|Pi_a rho|b>` for every pair `(a, b)`.
pub fn kd_table(
    state: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<KdTable> {
    check_same_dim(state.dim(), basis_a.dim())?;
    check_same_dim(state.dim(), basis_b.dim())?;
    let entries = kd_entries(state.matrix(), basis_a.matrix(), basis_b.matrix());
    Ok(KdTable {
        basis_a: basis_a.clone(),
        basis_b: basis_b.clone(),
        entries,
    })
}

/// Raw entries `conj(<a|b>) <a|rho|b>` from kets stored as matrix columns.
pub(crate) fn kd_entries(
    rho: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> ComplexMatrix {
    let overlaps = a.adjoint() * b;
    let sandwiched = a.adjoint() * rho * b;
    overlaps.zip_map(&sandwiched, |o, s| o.conj() * s)
}

/// `sum_{a,b} |Im Pr(a, b)|`, the quantity maximized by the KD coherence.
pub fn imag_l1(table: &KdTable) -> f64 {
    table.entries.iter().map(|z| z.im.abs()).sum()
}

/// `<b|[Pi_a, rho]|b> / 2i` evaluated through the commutator itself.
pub fn commutator_imag(
    state: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<DMatrix<f64>> {
    let d = state.dim();
    check_same_dim(d, basis_a.dim())?;
    check_same_dim(d, basis_b.dim())?;
    let mut out = DMatrix::zeros(d, d);
    for a in 0..d {
        let c = commutator(&basis_a.projector(a), state.matrix());
        for b in 0..d {
            let ket = basis_b.matrix().column(b);
            let value = (ket.adjoint() * &c * ket)[(0, 0)];
            out[(a, b)] = (value / Complex64::new(0.0, 2.0)).re;
        }
    }
    Ok(out)
}

/// Inverts a table back to the state: `sum_{a,b} Pr(a,b) |a><b| / <b|a>`.
pub fn reconstruct_state(table: &KdTable) -> Result<DensityMatrix> {
    let d = table.dim();
    let a_kets = table.basis_a.matrix();
    let b_kets = table.basis_b.matrix();
    let overlaps = b_kets.adjoint() * a_kets; // (b, a) -> <b|a>
    let mut rho = ComplexMatrix::from_element(d, d, ZERO);
    for a in 0..d {
        for b in 0..d {
            let ov = overlaps[(b, a)];
            if ov.norm() <= SINGULAR_OVERLAP {
                return Err(Error::SingularOverlap {
                    a,
                    b,
                    overlap: ov.norm(),
                });
            }
            let weight = table.entries[(a, b)] / ov;
            rho += (a_kets.column(a) * b_kets.column(b).adjoint()) * weight;
        }
    }
    DensityMatrix::new(rho)
}

/// `sum_{a,b} |Pr(a, b)| - 1`; zero exactly for real nonnegative tables.
pub fn nonclassicality(table: &KdTable) -> f64 {
    table.entries.iter().map(|z| z.norm()).sum::<f64>() - 1.0
}
