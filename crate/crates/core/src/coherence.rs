//! Coherence quantifiers relative to an incoherent basis or POVM.
//!
//! The KD coherence is the largest total imaginary weight `sum |Im Pr(a, b)|`
//! of a KD table over all choices of the second basis. It is computed in a
//! canonical frame of the incoherent basis: kets ordered by decreasing
//! population and rephased so that a spanning set of coherences is real and
//! positive. Relabelling or rephasing the incoherent kets, or rotating state
//! and basis together, leaves the frame state unchanged, so the search sees
//! the same problem and returns the same value.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kd::kd_entries;
use crate::linalg::{
    check_same_dim, partial_trace, ComplexMatrix, DensityMatrix, Keep, OrthonormalBasis, Povm, ONE,
    ZERO,
};
use crate::optimizer::{
    maximize_unitary_refined, pair_sweeps, OptimizationReport, OptimizerConfig, QubitBasisParams,
};

/// Threshold above which [`coherence_witness`] reports detection.
pub const WITNESS_THRESHOLD: f64 = 1e-9;

/// Coherences smaller than this are left unphased by the frame.
const PHASE_FLOOR: f64 = 1e-14;

/// Optimized KD coherence with its maximizing second basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceResult {
    pub value: f64,
    pub argmax_basis: OrthonormalBasis,
    pub report: OptimizationReport,
}

/// `sum_{a != a'} |<a|rho|a'>|`.
pub fn l1_coherence(state: &DensityMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    let m = in_basis(state, basis)?;
    let d = m.nrows();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    Ok(total)
}

/// `sum_a sqrt(p_a - p_a^2)` with `p_a = <a|rho|a>`: the summed standard
/// deviations of the basis projectors.
pub fn stddev_bound(state: &DensityMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    let m = in_basis(state, basis)?;
    Ok(m.diagonal()
        .iter()
        .map(|z| (z.re - z.re * z.re).max(0.0).sqrt())
        .sum())
}

/// `sum_a Pi_a rho Pi_a`.
pub fn dephase(state: &DensityMatrix, basis: &OrthonormalBasis) -> Result<DensityMatrix> {
    let m = in_basis(state, basis)?;
    let diag = ComplexMatrix::from_diagonal(&m.diagonal().map(|z| Complex64::from(z.re)));
    let a = basis.matrix();
    Ok(DensityMatrix::from_matrix_unchecked(a * diag * a.adjoint()))
}

/// KD coherence of `state` with respect to `basis`.
pub fn kd_coherence(
    state: &DensityMatrix,
    basis: &OrthonormalBasis,
    cfg: &OptimizerConfig,
) -> Result<CoherenceResult> {
    check_same_dim(state.dim(), basis.dim())?;
    let d = state.dim();
    cfg.validate(d)?;
    let (frame, rho) = canonical_frame(state, basis);
    let objective = |w: &ComplexMatrix| frame_objective(&rho, w);
    let projectors: Vec<ComplexMatrix> = (0..d)
        .map(|a| {
            let mut p = ComplexMatrix::from_element(d, d, ZERO);
            p[(a, a)] = ONE;
            p
        })
        .collect();
    let ks = commutator_parts(&projectors, &rho);
    let refine = |f: &[ComplexMatrix]| vec![pair_sweeps(&ks, &f[0], cfg.ftol)];
    let (report, w) = maximize_unitary_refined(objective, Some(&refine), d, cfg)?;
    Ok(CoherenceResult {
        value: report.best_value,
        argmax_basis: OrthonormalBasis::from_unitary_unchecked(frame * w),
        report,
    })
}

/// Closed-form qubit KD coherence `2|rho_01|` in the frame of `basis`, with
/// the maximizing basis of angles `alpha = pi/2`, `beta = pi/2 - arg rho_01`.
pub fn kd_coherence_qubit_analytic(
    state: &DensityMatrix,
    basis: &OrthonormalBasis,
) -> Result<(f64, OrthonormalBasis)> {
    for d in [state.dim(), basis.dim()] {
        if d != 2 {
            return Err(Error::WrongDimension {
                expected: 2,
                found: d,
            });
        }
    }
    let m = in_basis(state, basis)?;
    let rho01 = m[(0, 1)];
    let phi = if rho01.norm() > 0.0 { rho01.arg() } else { 0.0 };
    let mut beta = (PI / 2.0 - phi).rem_euclid(2.0 * PI);
    if beta >= 2.0 * PI {
        beta = 0.0;
    }
    let local = QubitBasisParams::new(PI / 2.0, beta)?.basis();
    let argmax = OrthonormalBasis::from_unitary_unchecked(basis.matrix() * local.matrix());
    Ok((2.0 * rho01.norm(), argmax))
}

/// KD coherence with respect to a POVM: the maximum over second bases of
/// `sum_{x,b} |Im <b|M_x rho|b>|`.
///
/// With `cfg.factor_dims` set, the second basis ranges over product bases.
pub fn kd_coherence_povm(
    state: &DensityMatrix,
    povm: &Povm,
    cfg: &OptimizerConfig,
) -> Result<CoherenceResult> {
    check_same_dim(state.dim(), povm.dim())?;
    let d = state.dim();
    cfg.validate(d)?;
    let products: Vec<ComplexMatrix> = povm.elements().iter().map(|m| m * state.matrix()).collect();
    let objective = |w: &ComplexMatrix| povm_objective(&products, w);
    let ks = commutator_parts(povm.elements(), state.matrix());
    let refine = |f: &[ComplexMatrix]| vec![pair_sweeps(&ks, &f[0], cfg.ftol)];
    let (report, w) = maximize_unitary_refined(objective, Some(&refine), d, cfg)?;
    Ok(CoherenceResult {
        value: report.best_value,
        argmax_basis: OrthonormalBasis::from_unitary_unchecked(w),
        report,
    })
}

/// `sum_{x,b} |Im <b|M_x rho|b>|` for one second basis.
pub fn povm_imag_l1(state: &DensityMatrix, povm: &Povm, basis_b: &OrthonormalBasis) -> Result<f64> {
    check_same_dim(state.dim(), povm.dim())?;
    check_same_dim(state.dim(), basis_b.dim())?;
    let products: Vec<ComplexMatrix> = povm.elements().iter().map(|m| m * state.matrix()).collect();
    Ok(povm_objective(&products, basis_b.matrix()))
}

/// KD coherence of a bipartite state on `C^d1 ⊗ C^d2` with respect to the
/// local projectors `Pi_a ⊗ I`, maximized over product second bases.
///
/// Any `factor_dims` in `cfg` is replaced by `[d1, d2]`.
pub fn kd_coherence_subsystem(
    state: &DensityMatrix,
    basis1: &OrthonormalBasis,
    d2: usize,
    cfg: &OptimizerConfig,
) -> Result<CoherenceResult> {
    let d1 = basis1.dim();
    if d2 == 0 {
        return Err(Error::ZeroDimension);
    }
    check_same_dim(d1 * d2, state.dim())?;
    let cfg = OptimizerConfig {
        factor_dims: Some(vec![d1, d2]),
        ..cfg.clone()
    };
    cfg.validate(d1 * d2)?;
    let reduced = partial_trace(state, (d1, d2), Keep::First)?;
    let (frame1, _) = canonical_frame(&reduced, basis1);
    let frame = frame1.kronecker(&ComplexMatrix::identity(d2, d2));
    let rho = frame.adjoint() * state.matrix() * &frame;
    let objective = |w: &ComplexMatrix| subsystem_objective(&rho, d1, d2, w);
    let local: Vec<ComplexMatrix> = (0..d1)
        .map(|a| {
            let mut p = ComplexMatrix::from_element(d1, d1, ZERO);
            p[(a, a)] = ONE;
            p.kronecker(&ComplexMatrix::identity(d2, d2))
        })
        .collect();
    let ks = commutator_parts(&local, &rho);
    let refine = |f: &[ComplexMatrix]| {
        let first = pair_sweeps(&restrict_second(&ks, &f[1], d1, d2), &f[0], cfg.ftol);
        let second = pair_sweeps(&restrict_first(&ks, &first, d1, d2), &f[1], cfg.ftol);
        vec![first, second]
    };
    let (report, w) = maximize_unitary_refined(objective, Some(&refine), d1 * d2, &cfg)?;
    Ok(CoherenceResult {
        value: report.best_value,
        argmax_basis: OrthonormalBasis::from_unitary_unchecked(frame * w),
        report,
    })
}

/// Local projectors `{Pi_a ⊗ I_d2}` of `basis1` on a bipartite space.
pub fn local_projectors(basis1: &OrthonormalBasis, d2: usize) -> Result<Povm> {
    if d2 == 0 {
        return Err(Error::ZeroDimension);
    }
    let id = ComplexMatrix::identity(d2, d2);
    Ok(Povm::from_elements_unchecked(
        basis1
            .projectors()
            .iter()
            .map(|p| p.kronecker(&id))
            .collect(),
    ))
}

/// Projective POVM `M_A = sum_{a in A} Pi_a` for each block `A` of `partition`.
pub fn coarse_grain(basis: &OrthonormalBasis, partition: &[Vec<usize>]) -> Result<Povm> {
    let d = basis.dim();
    let mut seen = vec![false; d];
    for block in partition {
        if block.is_empty() {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for &a in block {
            if a >= d {
                return Err(Error::InvalidPartition(format!(
                    "index {a} out of range for dimension {d}"
                )));
            }
            if seen[a] {
                return Err(Error::InvalidPartition(format!("index {a} appears twice")));
            }
            seen[a] = true;
        }
    }
    if let Some(a) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("index {a} not covered")));
    }
    let kets = basis.matrix();
    let elements = partition
        .iter()
        .map(|block| {
            let mut m = ComplexMatrix::zeros(d, d);
            for &a in block {
                m += kets.column(a) * kets.column(a).adjoint();
            }
            m
        })
        .collect();
    Ok(Povm::from_elements_unchecked(elements))
}

/// Single-table coherence test: `sum |Im Pr(a, b)|` for the given pair and
/// whether it exceeds [`WITNESS_THRESHOLD`].
pub fn coherence_witness(
    state: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<(f64, bool)> {
    check_same_dim(state.dim(), basis_a.dim())?;
    check_same_dim(state.dim(), basis_b.dim())?;
    let w: f64 = kd_entries(state.matrix(), basis_a.matrix(), basis_b.matrix())
        .iter()
        .map(|z| z.im.abs())
        .sum();
    Ok((w, w > WITNESS_THRESHOLD))
}

/// `A^dag rho A`.
fn in_basis(state: &DensityMatrix, basis: &OrthonormalBasis) -> Result<ComplexMatrix> {
    check_same_dim(state.dim(), basis.dim())?;
    let a = basis.matrix();
    Ok(a.adjoint() * state.matrix() * a)
}

/// Frame unitary `V = A Q` (`Q` a phased permutation) and `V^dag rho V`.
///
/// Kets are sorted by decreasing population, ties kept in input order. Ket
/// `j > 0` is then rephased so that its largest coherence with an earlier ket
/// is real and positive.
pub(crate) fn canonical_frame(
    state: &DensityMatrix,
    basis: &OrthonormalBasis,
) -> (ComplexMatrix, ComplexMatrix) {
    let a = basis.matrix();
    let m = a.adjoint() * state.matrix() * a;
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let sorted = ComplexMatrix::from_fn(d, d, |i, j| m[(order[i], order[j])]);
    let mut phases = vec![ONE; d];
    for j in 1..d {
        let (mut parent, mut mag) = (0, -1.0);
        for i in 0..j {
            let n = sorted[(i, j)].norm();
            if n > mag {
                parent = i;
                mag = n;
            }
        }
        if mag > PHASE_FLOOR {
            // (D^dag M D)_{ij} = conj(p_i) M_ij p_j, made real positive
            phases[j] = phases[parent] * (sorted[(parent, j)].conj() / mag);
        }
    }
    let mut q = ComplexMatrix::from_element(d, d, ZERO);
    for (col, &row) in order.iter().enumerate() {
        q[(row, col)] = phases[col];
    }
    let frame = a * q;
    let rho = frame.adjoint() * state.matrix() * &frame;
    (frame, rho)
}

/// `sum_{a,b} |Im conj(W_ab) (rho W)_ab|`: the KD objective with the
/// incoherent basis taken as the computational one.
pub(crate) fn frame_objective(rho: &ComplexMatrix, w: &ComplexMatrix) -> f64 {
    let r = rho * w;
    w.iter()
        .zip(r.iter())
        .map(|(x, y)| (x.conj() * y).im.abs())
        .sum()
}

/// `(M rho - rho M) / 2i` for each `M`, so that `<b|K|b> = Im <b|M rho|b>`.
fn commutator_parts(elements: &[ComplexMatrix], rho: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let half_i = Complex64::new(0.0, 0.5);
    elements
        .iter()
        .map(|m| (m * rho - rho * m) * -half_i)
        .collect()
}

/// `(I ⊗ v)^dag K (I ⊗ v)` for every `K` and every column `v` of `w2`.
fn restrict_second(
    ks: &[ComplexMatrix],
    w2: &ComplexMatrix,
    d1: usize,
    d2: usize,
) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(ks.len() * d2);
    for k in ks {
        for v in w2.column_iter() {
            out.push(ComplexMatrix::from_fn(d1, d1, |i, j| {
                let mut s = ZERO;
                for x in 0..d2 {
                    for y in 0..d2 {
                        s += v[x].conj() * k[(i * d2 + x, j * d2 + y)] * v[y];
                    }
                }
                s
            }));
        }
    }
    out
}

/// `(u ⊗ I)^dag K (u ⊗ I)` for every `K` and every column `u` of `w1`.
fn restrict_first(
    ks: &[ComplexMatrix],
    w1: &ComplexMatrix,
    d1: usize,
    d2: usize,
) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(ks.len() * d1);
    for k in ks {
        for u in w1.column_iter() {
            out.push(ComplexMatrix::from_fn(d2, d2, |x, y| {
                let mut s = ZERO;
                for i in 0..d1 {
                    for j in 0..d1 {
                        s += u[i].conj() * k[(i * d2 + x, j * d2 + y)] * u[j];
                    }
                }
                s
            }));
        }
    }
    out
}

fn povm_objective(products: &[ComplexMatrix], w: &ComplexMatrix) -> f64 {
    let d = w.nrows();
    let mut total = 0.0;
    for p in products {
        let r = p * w;
        for b in 0..d {
            let mut s = ZERO;
            for i in 0..d {
                s += w[(i, b)].conj() * r[(i, b)];
            }
            total += s.im.abs();
        }
    }
    total
}

fn subsystem_objective(rho: &ComplexMatrix, d1: usize, d2: usize, w: &ComplexMatrix) -> f64 {
    let r = rho * w;
    let mut total = 0.0;
    for b in 0..d1 * d2 {
        for a in 0..d1 {
            let mut s = 0.0;
            for k in 0..d2 {
                let row = a * d2 + k;
                s += (w[(row, b)].conj() * r[(row, b)]).im;
            }
            total += s.abs();
        }
    }
    total
}
