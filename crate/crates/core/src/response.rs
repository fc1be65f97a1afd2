//! Linear response of an observable to a perturbation, in commutator and KD form.
//!
//! Time evolution is the exact exponential of `H0` through its own spectral
//! decomposition, with hbar = 1 and `O(t) = exp(i H0 t) O exp(-i H0 t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherence::{kd_coherence, CoherenceResult};
use crate::error::{Error, Result};
use crate::kd::{imag_l1, kd_table};
use crate::linalg::{
    check_same_dim, check_square, hermitian_eigen, hermiticity_residual, random_basis, trace,
    ComplexMatrix, DensityMatrix, OrthonormalBasis,
};
use crate::optimizer::OptimizerConfig;

const HERMITIAN_TOL: f64 = 1e-10;

/// Observable given by its eigenbasis and spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableWire")]
pub struct Observable {
    eigenbasis: OrthonormalBasis,
    eigenvalues: Vec<f64>,
}

#[derive(Deserialize)]
struct ObservableWire {
    eigenbasis: OrthonormalBasis,
    eigenvalues: Vec<f64>,
}

impl TryFrom<ObservableWire> for Observable {
    type Error = Error;

    fn try_from(w: ObservableWire) -> Result<Self> {
        Observable::new(w.eigenbasis, w.eigenvalues)
    }
}

impl Observable {
    pub fn new(eigenbasis: OrthonormalBasis, eigenvalues: Vec<f64>) -> Result<Self> {
        check_same_dim(eigenbasis.dim(), eigenvalues.len())?;
        if let Some(x) = eigenvalues.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("eigenvalue {x}")));
        }
        Ok(Self {
            eigenbasis,
            eigenvalues,
        })
    }

    /// Spectral decomposition of a Hermitian matrix.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        check_square(m)?;
        let residual = hermiticity_residual(m);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let (values, vectors) = hermitian_eigen(m);
        Ok(Self {
            eigenbasis: OrthonormalBasis::from_unitary_unchecked(vectors),
            eigenvalues: values,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenbasis(&self) -> &OrthonormalBasis {
        &self.eigenbasis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `sum_k a_k |k><k|`.
    pub fn operator(&self) -> ComplexMatrix {
        spectral_sum(self.eigenbasis.matrix(), |k| {
            Complex64::from(self.eigenvalues[k])
        })
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn spectral_sum(kets: &ComplexMatrix, weight: impl Fn(usize) -> Complex64) -> ComplexMatrix {
    let mut scaled = kets.clone();
    for k in 0..kets.ncols() {
        let w = weight(k);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
    }
    scaled * kets.adjoint()
}

/// Unperturbed Hamiltonian, perturbation, probe, and initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetupWire")]
pub struct ResponseSetup {
    h0: Observable,
    a_obs: Observable,
    b_obs: Observable,
    state0: DensityMatrix,
}

#[derive(Deserialize)]
struct SetupWire {
    h0: Observable,
    a_obs: Observable,
    b_obs: Observable,
    state0: DensityMatrix,
}

impl TryFrom<SetupWire> for ResponseSetup {
    type Error = Error;

    fn try_from(w: SetupWire) -> Result<Self> {
        ResponseSetup::new(w.h0, w.a_obs, w.b_obs, w.state0)
    }
}

impl ResponseSetup {
    pub fn new(
        h0: Observable,
        a_obs: Observable,
        b_obs: Observable,
        state0: DensityMatrix,
    ) -> Result<Self> {
        let d = state0.dim();
        for o in [&h0, &a_obs, &b_obs] {
            check_same_dim(d, o.dim())?;
        }
        Ok(Self {
            h0,
            a_obs,
            b_obs,
            state0,
        })
    }

    pub fn dim(&self) -> usize {
        self.state0.dim()
    }

    pub fn h0(&self) -> &Observable {
        &self.h0
    }

    pub fn a_obs(&self) -> &Observable {
        &self.a_obs
    }

    pub fn b_obs(&self) -> &Observable {
        &self.b_obs
    }

    pub fn state0(&self) -> &DensityMatrix {
        &self.state0
    }

    /// Same setup with perturbation and probe exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a_obs: self.b_obs.clone(),
            b_obs: self.a_obs.clone(),
            ..self.clone()
        }
    }
}

fn evolution(h0: &Observable, t: f64) -> ComplexMatrix {
    spectral_sum(h0.eigenbasis.matrix(), |k| {
        Complex64::from_polar(1.0, h0.eigenvalues[k] * t)
    })
}

/// Kets `exp(i H0 t)|a>` of the Heisenberg-picture observable.
pub fn heisenberg_basis(obs: &Observable, h0: &Observable, t: f64) -> Result<OrthonormalBasis> {
    check_same_dim(obs.dim(), h0.dim())?;
    if t == 0.0 {
        return Ok(obs.eigenbasis.clone());
    }
    Ok(OrthonormalBasis::from_unitary_unchecked(
        evolution(h0, t) * obs.eigenbasis.matrix(),
    ))
}

fn heisenberg_operator(obs: &Observable, h0: &Observable, t: f64) -> Result<ComplexMatrix> {
    let basis = heisenberg_basis(obs, h0, t)?;
    Ok(spectral_sum(basis.matrix(), |k| {
        Complex64::from(obs.eigenvalues[k])
    }))
}

/// `Phi_AB(t', t) = i Tr{[A(t'), B(t)] rho(0)}`.
pub fn response_function(setup: &ResponseSetup, t_prime: f64, t: f64) -> Result<f64> {
    let a = heisenberg_operator(&setup.a_obs, &setup.h0, t_prime)?;
    let b = heisenberg_operator(&setup.b_obs, &setup.h0, t)?;
    let comm = &a * &b - &b * &a;
    Ok((Complex64::i() * trace(&(comm * setup.state0.matrix()))).re)
}

/// `2 sum_{a,b} a b Im Pr(a(t'), b(t))`, the same response read off a KD table.
pub fn response_function_kd(setup: &ResponseSetup, t_prime: f64, t: f64) -> Result<f64> {
    let basis_a = heisenberg_basis(&setup.a_obs, &setup.h0, t_prime)?;
    let basis_b = heisenberg_basis(&setup.b_obs, &setup.h0, t)?;
    let table = kd_table(&setup.state0, &basis_a, &basis_b)?;
    let mut sum = 0.0;
    for (i, a) in setup.a_obs.eigenvalues.iter().enumerate() {
        for (j, b) in setup.b_obs.eigenvalues.iter().enumerate() {
            sum += a * b * table.entry(i, j).im;
        }
    }
    Ok(2.0 * sum)
}

/// Both sides of `|Phi_AB| <= 2 |a|_* |b|_* C_KD[rho(0); {Pi_a(t')}]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseBound {
    pub phi: f64,
    /// `|phi|`.
    pub lhs: f64,
    pub rhs: f64,
    /// KD coherence entering `rhs`.
    pub coherence: CoherenceResult,
}

/// Evaluates the response and its coherence bound.
///
/// The KD coherence is a maximum over bases, so the probe's own evolved
/// eigenbasis is a valid candidate; it is used when it beats the optimizer.
pub fn response_bound(
    setup: &ResponseSetup,
    t_prime: f64,
    t: f64,
    cfg: &OptimizerConfig,
) -> Result<ResponseBound> {
    let phi = response_function(setup, t_prime, t)?;
    let basis_a = heisenberg_basis(&setup.a_obs, &setup.h0, t_prime)?;
    let basis_b = heisenberg_basis(&setup.b_obs, &setup.h0, t)?;
    let mut coherence = kd_coherence(&setup.state0, &basis_a, cfg)?;
    let probe = imag_l1(&kd_table(&setup.state0, &basis_a, &basis_b)?);
    if probe > coherence.value {
        coherence.value = probe;
        coherence.argmax_basis = basis_b;
    }
    let rhs = 2.0 * setup.a_obs.spectral_norm() * setup.b_obs.spectral_norm() * coherence.value;
    Ok(ResponseBound {
        phi,
        lhs: phi.abs(),
        rhs,
        coherence,
    })
}

/// Largest `|Phi|` over `samples` random probes sharing the spectrum of `B`.
pub fn probe_search(
    setup: &ResponseSetup,
    t_prime: f64,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut best = response_function(setup, t_prime, t)?.abs();
    for s in 0..samples as u64 {
        let basis = random_basis(setup.dim(), crate::rng::derive_seed(seed, s))?;
        let probe = Observable::new(basis, setup.b_obs.eigenvalues.clone())?;
        let trial = ResponseSetup {
            b_obs: probe,
            ..setup.clone()
        };
        best = best.max(response_function(&trial, t_prime, t)?.abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        expi_hermitian, pauli_x_basis, pauli_y_basis, pauli_z_basis, random_mixed_state,
    };
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn pauli(basis: OrthonormalBasis) -> Observable {
        Observable::new(basis, vec![1.0, -1.0]).unwrap()
    }

    fn saturating() -> ResponseSetup {
        let up = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        ResponseSetup::new(
            pauli(pauli_z_basis()),
            pauli(pauli_x_basis()),
            pauli(pauli_y_basis()),
            up,
        )
        .unwrap()
    }

    fn random_observable(d: usize, seed: u64) -> Observable {
        let values = (0..d)
            .map(|k| ((seed * 7 + k as u64 * 13) % 11) as f64 / 3.0 - 1.5)
            .collect();
        Observable::new(random_basis(d, seed).unwrap(), values).unwrap()
    }

    fn random_setup(d: usize, seed: u64) -> ResponseSetup {
        ResponseSetup::new(
            random_observable(d, 3 * seed),
            random_observable(d, 3 * seed + 1),
            random_observable(d, 3 * seed + 2),
            random_mixed_state(d, seed).unwrap(),
        )
        .unwrap()
    }

    fn projectors_close(x: &OrthonormalBasis, y: &OrthonormalBasis, tol: f64) -> bool {
        (0..x.dim()).all(|k| {
            (x.projector(k) - y.projector(k))
                .iter()
                .all(|z| z.norm() < tol)
        })
    }

    #[test]
    fn observable_round_trips_its_operator() {
        let o = random_observable(3, 2);
        let back = Observable::from_matrix(&o.operator()).unwrap();
        assert!((back.operator() - o.operator())
            .iter()
            .all(|z| z.norm() < 1e-12));
        assert!(hermiticity_residual(&o.operator()) < 1e-12);
        assert!(Observable::new(pauli_z_basis(), vec![1.0]).is_err());
        let skew = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from(0.0),
                Complex64::from(1.0),
                Complex64::from(-1.0),
                Complex64::from(0.0),
            ],
        );
        assert!(matches!(
            Observable::from_matrix(&skew),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn heisenberg_basis_examples() {
        let (z, x) = (pauli(pauli_z_basis()), pauli(pauli_x_basis()));
        assert_eq!(heisenberg_basis(&x, &z, 0.0).unwrap(), *x.eigenbasis());
        let moved = heisenberg_basis(&z, &z, 0.7).unwrap();
        assert!(projectors_close(&moved, z.eigenbasis(), 1e-10));
        let t = PI / 4.0;
        let evolved = heisenberg_basis(&x, &z, t).unwrap();
        let u = expi_hermitian(&z.operator(), t);
        for k in 0..2 {
            let dense = &u * x.eigenbasis().projector(k) * u.adjoint();
            assert!((evolved.projector(k) - dense)
                .iter()
                .all(|c| c.norm() < 1e-10));
        }
        // exp(i sigma_z pi/4) takes |+> to the -1 eigenket of sigma_y up to phase
        let y = pauli_y_basis();
        assert!((evolved.projector(0) - y.projector(1))
            .iter()
            .all(|c| c.norm() < 1e-10));
        assert!(heisenberg_basis(&x, &random_observable(3, 1), 0.1).is_err());
    }

    #[test]
    fn saturating_instance() {
        let s = saturating();
        assert_abs_diff_eq!(
            response_function(&s, 0.0, 0.0).unwrap(),
            -2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            response_function_kd(&s, 0.0, 0.0).unwrap(),
            -2.0,
            epsilon = 1e-12
        );
        let bound = response_bound(&s, 0.0, 0.0, &OptimizerConfig::default()).unwrap();
        assert_abs_diff_eq!(bound.lhs, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(bound.rhs, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn commuting_setup_has_no_response() {
        let b = random_basis(3, 5).unwrap();
        let obs = |v: [f64; 3]| Observable::new(b.clone(), v.to_vec()).unwrap();
        let s = ResponseSetup::new(
            obs([0.0, 1.0, 2.5]),
            obs([1.0, -1.0, 0.5]),
            obs([2.0, 0.0, -3.0]),
            random_mixed_state(3, 6).unwrap(),
        )
        .unwrap();
        assert!(response_function(&s, 0.3, 1.1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn incoherent_initial_state_bounds_to_zero() {
        let s = random_setup(3, 4);
        let a_basis = heisenberg_basis(s.a_obs(), s.h0(), 0.5).unwrap();
        let mixed = DensityMatrix::mixture(&[
            (0.5, &DensityMatrix::from_ket(&a_basis.ket(0)).unwrap()),
            (0.5, &DensityMatrix::from_ket(&a_basis.ket(2)).unwrap()),
        ])
        .unwrap();
        let s = ResponseSetup::new(s.h0.clone(), s.a_obs.clone(), s.b_obs.clone(), mixed).unwrap();
        let bound =
            response_bound(&s, 0.5, 1.0, &OptimizerConfig::default().with_restarts(4)).unwrap();
        assert!(bound.rhs < 1e-9 && bound.lhs < 1e-9, "{bound:?}");
    }

    #[test]
    fn forms_agree_and_bound_holds() {
        let cfg = OptimizerConfig::default().with_restarts(8);
        for d in 2..5 {
            for seed in 0..4 {
                let s = random_setup(d, seed);
                let (tp, t) = (0.3 * seed as f64, 1.0 - 0.2 * seed as f64);
                let phi = response_function(&s, tp, t).unwrap();
                assert_abs_diff_eq!(
                    phi,
                    response_function_kd(&s, tp, t).unwrap(),
                    epsilon = 1e-10
                );
                assert_abs_diff_eq!(
                    response_function(&s, t, t).unwrap(),
                    -response_function(&s.swapped(), t, t).unwrap(),
                    epsilon = 1e-10
                );
                let bound = response_bound(&s, tp, t, &cfg).unwrap();
                assert!(bound.lhs <= bound.rhs + 1e-6);
                assert!(probe_search(&s, tp, t, 20, seed).unwrap() <= bound.rhs + 1e-6);
            }
        }
    }

    #[test]
    fn setup_json_round_trip() {
        let s = random_setup(2, 9);
        let text = crate::json::to_json(&s).unwrap();
        let back: ResponseSetup = crate::json::from_json(&text).unwrap();
        assert_eq!(back, s);
        let bad = text.replacen("\"eigenvalues\": [", "\"eigenvalues\": [0.0, ", 1);
        assert!(crate::json::from_json::<ResponseSetup>(&bad).is_err());
    }
}
