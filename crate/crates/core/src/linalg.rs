//! Dense complex linear algebra for finite-dimensional states.
//!
//! Holds the validated domain types ([`DensityMatrix`], [`OrthonormalBasis`],
//! [`Povm`]), the seeded random generators, and the structured unitaries used
//! when checking invariance properties of coherence quantifiers.
//!
//! Matrices are `nalgebra` dense matrices of `Complex64`. A basis stores its
//! kets as the columns of a unitary matrix; projectors are rebuilt from the
//! kets whenever they are needed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, substream};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 64;
/// Hermiticity, unit-trace and orthonormality tolerance.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Slack allowed below zero for the smallest eigenvalue of a PSD operator.
pub const PSD_TOL: f64 = 1e-9;
/// Completeness tolerance for POVMs.
pub const POVM_TOL: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::ZeroDimension)
    } else if d > MAX_DIM {
        Err(Error::DimensionTooLarge {
            dim: d,
            max: MAX_DIM,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn check_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub(crate) fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    check_dim(m.nrows())?;
    Ok(m.nrows())
}

/// Builds a matrix from row-major entries.
pub fn matrix_from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<ComplexMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            rows,
            cols,
            found: entries.len(),
        });
    }
    Ok(ComplexMatrix::from_row_slice(rows, cols, entries))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise deviation of `m` from the identity.
pub fn identity_residual(m: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for ((i, j), z) in m
        .iter()
        .enumerate()
        .map(|(k, z)| ((k % m.nrows(), k / m.nrows()), z))
    {
        let target = if i == j { ONE } else { ZERO };
        worst = worst.max((z - target).norm());
    }
    worst
}

/// max |U†U - I| entrywise.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    identity_residual(&(u.adjoint() * u))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Eigenvector `k` is column `k` of the returned matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors =
        ComplexMatrix::from_fn(m.nrows(), m.nrows(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `exp(i t H)` for Hermitian `H`, through its eigen-decomposition.
pub fn expi_hermitian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, lambda * t);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    scaled * v.adjoint()
}

/// `|v><v|` for a column vector.
pub fn outer(v: &[Complex64]) -> ComplexMatrix {
    let n = v.len();
    ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

/// Validates `m` as a density matrix.
pub fn make_density_matrix(m: ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(m)
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix, "density matrix")?;
        let residual = hermiticity_residual(&matrix);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let tr = trace(&matrix);
        let residual = (tr - ONE).norm();
        if residual > TRACE_TOL {
            return Err(Error::TraceNotOne { residual });
        }
        let min_eigenvalue = min_eigenvalue(&matrix);
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// Pure state `|psi><psi|`; `psi` is normalized first.
    pub fn from_ket(psi: &[Complex64]) -> Result<Self> {
        check_dim(psi.len())?;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite("ket".into()));
        }
        if norm == 0.0 {
            return Err(Error::TraceNotOne { residual: 1.0 });
        }
        let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(outer(&psi))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            matrix: ComplexMatrix::identity(d, d) / Complex64::from(d as f64),
        })
    }

    /// Qubit state `(I + r.sigma)/2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        let m = matrix_from_rows(
            2,
            2,
            &[
                Complex64::new((1.0 + z) / 2.0, 0.0),
                Complex64::new(x / 2.0, -y / 2.0),
                Complex64::new(x / 2.0, y / 2.0),
                Complex64::new((1.0 - z) / 2.0, 0.0),
            ],
        )?;
        Self::new(m)
    }

    /// Convex combination `sum_k p_k rho_k`.
    pub fn mixture(components: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidConfig("empty mixture".into()))?;
        let d = first.1.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, rho) in components {
            check_same_dim(d, rho.dim())?;
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidConfig(format!(
                    "mixing weight {p} outside [0, 1]"
                )));
            }
            acc += rho.matrix() * Complex64::from(*p);
        }
        Self::new(acc)
    }

    /// `U rho U†`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        check_same_dim(self.dim(), u.nrows())?;
        Self::new(u * &self.matrix * u.adjoint())
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.matrix * &self.matrix)).re
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::WrongDimension {
                expected: 2,
                found: self.dim(),
            });
        }
        let m = &self.matrix;
        Ok([
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ])
    }
}

/// An ordered orthonormal basis; column `a` of the stored matrix is `|a>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    kets: ComplexMatrix,
}

impl OrthonormalBasis {
    /// Validates a matrix whose columns are the kets.
    pub fn new(kets: ComplexMatrix) -> Result<Self> {
        check_square(&kets)?;
        check_finite(&kets, "basis")?;
        let residual = unitarity_residual(&kets).max(identity_residual(&(&kets * kets.adjoint())));
        if residual > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self { kets })
    }

    pub fn from_kets(kets: &[Vec<Complex64>]) -> Result<Self> {
        let d = kets.len();
        check_dim(d)?;
        for k in kets {
            check_same_dim(d, k.len())?;
        }
        Self::new(ComplexMatrix::from_fn(d, d, |i, j| kets[j][i]))
    }

    /// Columns of a unitary produced internally; skips validation.
    pub(crate) fn from_unitary_unchecked(kets: ComplexMatrix) -> Self {
        Self { kets }
    }

    pub fn dim(&self) -> usize {
        self.kets.nrows()
    }

    /// The unitary whose columns are the kets.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.kets
    }

    pub fn ket(&self, a: usize) -> Vec<Complex64> {
        self.kets.column(a).iter().copied().collect()
    }

    /// `Pi_a = |a><a|`.
    pub fn projector(&self, a: usize) -> ComplexMatrix {
        let col = self.kets.column(a);
        &col * col.adjoint()
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        (0..self.dim()).map(|a| self.projector(a)).collect()
    }

    /// `<self_i | other_j>` for all pairs.
    pub fn overlaps(&self, other: &OrthonormalBasis) -> ComplexMatrix {
        self.kets.adjoint() * &other.kets
    }

    /// Basis `{U|a>}`.
    pub fn transformed(&self, u: &ComplexMatrix) -> Result<Self> {
        check_same_dim(self.dim(), u.nrows())?;
        Self::new(u * &self.kets)
    }

    /// Product basis `{|a>|b>}` ordered with the second factor fastest.
    pub fn tensor(&self, other: &OrthonormalBasis) -> Result<Self> {
        check_dim(self.dim() * other.dim())?;
        Ok(Self {
            kets: self.kets.kronecker(&other.kets),
        })
    }
}

/// Standard kets `e_0 .. e_{d-1}`.
pub fn computational_basis(d: usize) -> Result<OrthonormalBasis> {
    check_dim(d)?;
    Ok(OrthonormalBasis {
        kets: ComplexMatrix::identity(d, d),
    })
}

/// Basis with `<a|b> = exp(2 pi i a b / d) / sqrt(d)` against the computational basis.
pub fn fourier_basis(d: usize) -> Result<OrthonormalBasis> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    let kets = ComplexMatrix::from_fn(d, d, |a, b| {
        // reduce a*b mod d before scaling to keep the phase exact for large indices
        let k = (a * b) % d;
        Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * k as f64 / d as f64)
    });
    Ok(OrthonormalBasis { kets })
}

/// Eigenbasis of sigma_x: `{|+>, |->}`.
pub fn pauli_x_basis() -> OrthonormalBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    OrthonormalBasis {
        kets: ComplexMatrix::from_row_slice(2, 2, &[s.into(), s.into(), s.into(), (-s).into()]),
    }
}

/// Eigenbasis of sigma_y: `{(|0> + i|1>)/sqrt2, (|0> - i|1>)/sqrt2}`.
pub fn pauli_y_basis() -> OrthonormalBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    OrthonormalBasis {
        kets: ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                s.into(),
                s.into(),
                Complex64::new(0.0, s),
                Complex64::new(0.0, -s),
            ],
        ),
    }
}

pub fn pauli_z_basis() -> OrthonormalBasis {
    OrthonormalBasis {
        kets: ComplexMatrix::identity(2, 2),
    }
}

/// A positive operator-valued measure `{M_x}` with `sum_x M_x = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements.first().ok_or(Error::EmptyPovm)?;
        let d = check_square(first)?;
        let mut sum = ComplexMatrix::zeros(d, d);
        for m in &elements {
            check_same_dim(d, check_square(m)?)?;
            check_finite(m, "POVM element")?;
            let residual = hermiticity_residual(m);
            if residual > HERMITIAN_TOL {
                return Err(Error::NotHermitian { residual });
            }
            let min_eigenvalue = min_eigenvalue(m);
            if min_eigenvalue < -PSD_TOL {
                return Err(Error::NotPsd { min_eigenvalue });
            }
            sum += m;
        }
        let residual = identity_residual(&sum);
        if residual > POVM_TOL {
            return Err(Error::IncompletePovm { residual });
        }
        Ok(Self { elements })
    }

    /// Rank-one projectors of a basis.
    pub fn from_basis(basis: &OrthonormalBasis) -> Self {
        Self {
            elements: basis.projectors(),
        }
    }

    pub(crate) fn from_elements_unchecked(elements: Vec<ComplexMatrix>) -> Self {
        Self { elements }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Bloch-sphere angles of a pure qubit `cos(theta/2)|0> + sin(theta/2) e^{i eta}|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPureParams {
    theta: f64,
    eta: f64,
}

impl QubitPureParams {
    pub fn new(theta: f64, eta: f64) -> Result<Self> {
        use std::f64::consts::PI;
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidConfig(format!(
                "theta {theta} outside [0, pi]"
            )));
        }
        if !(0.0..2.0 * PI).contains(&eta) {
            return Err(Error::InvalidConfig(format!("eta {eta} outside [0, 2pi)")));
        }
        Ok(Self { theta, eta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn ket(&self) -> [Complex64; 2] {
        [
            Complex64::from((self.theta / 2.0).cos()),
            Complex64::from_polar((self.theta / 2.0).sin(), self.eta),
        ]
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(outer(&self.ket()))
    }
}

fn gaussian_vector(d: usize, seed: u64, stream: u64) -> Vec<Complex64> {
    let mut rng = substream(seed, stream);
    (0..d).map(|_| complex_gaussian(&mut rng)).collect()
}

fn gaussian_matrix(d: usize, seed: u64, stream: u64) -> ComplexMatrix {
    let mut rng = substream(seed, stream);
    // row-major fill so the draw order is independent of storage layout
    let entries: Vec<Complex64> = (0..d * d).map(|_| complex_gaussian(&mut rng)).collect();
    ComplexMatrix::from_row_slice(d, d, &entries)
}

/// Haar-random pure state.
pub fn random_pure_state(d: usize, seed: u64) -> Result<DensityMatrix> {
    check_dim(d)?;
    let mut v = gaussian_vector(d, seed, 0);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    let mut m = outer(&v);
    // exact Hermitian symmetry on the stored matrix
    for i in 0..d {
        m[(i, i)].im = 0.0;
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Full-rank random mixed state `G G† / Tr(G G†)` from a complex Ginibre matrix.
pub fn random_mixed_state(d: usize, seed: u64) -> Result<DensityMatrix> {
    check_dim(d)?;
    let g = gaussian_matrix(d, seed, 1);
    let mut m = &g * g.adjoint();
    for i in 0..d {
        m[(i, i)].im = 0.0;
    }
    let tr = trace(&m).re;
    m /= Complex64::from(tr);
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix with
/// the phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary(d: usize, seed: u64) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let g = gaussian_matrix(d, seed, 2);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 {
            rkk / rkk.norm()
        } else {
            ONE
        };
        for z in q.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    Ok(q)
}

/// Haar-random orthonormal basis.
pub fn random_basis(d: usize, seed: u64) -> Result<OrthonormalBasis> {
    Ok(OrthonormalBasis::from_unitary_unchecked(random_unitary(
        d, seed,
    )?))
}

/// `U_A = sum_a e^{i theta_a} |a><a|`, diagonal in `basis`.
pub fn translation_unitary(basis: &OrthonormalBasis, phases: &[f64]) -> Result<ComplexMatrix> {
    check_same_dim(basis.dim(), phases.len())?;
    let v = basis.matrix();
    let mut scaled = v.clone();
    for (k, theta) in phases.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, *theta);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    Ok(scaled * v.adjoint())
}

/// `U_p = sum_a e^{i theta_a} |mu(a)><a|`.
pub fn permutation_unitary(
    basis: &OrthonormalBasis,
    perm: &[usize],
    phases: &[f64],
) -> Result<ComplexMatrix> {
    let d = basis.dim();
    check_same_dim(d, phases.len())?;
    if perm.len() != d {
        return Err(Error::InvalidPermutation(format!(
            "length {} for dimension {d}",
            perm.len()
        )));
    }
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::InvalidPermutation(format!(
                "{perm:?} is not a bijection on 0..{d}"
            )));
        }
        seen[p] = true;
    }
    let v = basis.matrix();
    let mut u = ComplexMatrix::zeros(d, d);
    for a in 0..d {
        let phase = Complex64::from_polar(1.0, phases[a]);
        let target = v.column(perm[a]);
        let source = v.column(a);
        u += (target * source.adjoint()) * phase;
    }
    Ok(u)
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Which factor of a bipartite system to keep in [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Reduced state of one factor of a bipartite state on `C^d1 ⊗ C^d2`.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Keep,
) -> Result<DensityMatrix> {
    let (d1, d2) = dims;
    check_dim(d1)?;
    check_dim(d2)?;
    check_same_dim(rho.dim(), d1 * d2)?;
    let m = rho.matrix();
    let out = match keep {
        Keep::First => ComplexMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()
        }),
        Keep::Second => ComplexMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum()
        }),
    };
    DensityMatrix::new(out)
}
