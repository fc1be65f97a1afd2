//! Simulated measurement schemes for the imaginary part of KD tables.
//!
//! Two reconstructions are modelled, each exactly or with shot noise.
//!
//! - Successive projective measurements: a nonselective measurement of
//!   `{Pi_a, I - Pi_a}` followed by a selectively rotated `Pi_b`.
//! - Weak measurement of `Pi_a` postselected on `|b>`.
//!
//! Sampling is a pure function of the seed and the table entry: entry
//! `(a, b)` draws from substream `a * d + b` and the postselection counts
//! from substream `d * d`. Sums of independent Bernoulli or Gaussian
//! readings are drawn from their exact distributions (binomial, Gaussian
//! with `sigma / sqrt(shots)`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::coherence::{canonical_frame, CoherenceResult};
use crate::error::{Error, Result};
use crate::linalg::{
    check_same_dim, computational_basis, ComplexMatrix, DensityMatrix, OrthonormalBasis,
};
use crate::optimizer::{maximize_unitary, OptimizerConfig};
use crate::rng::{substream, StreamRng};

/// `<b|rho|b>` at or below this leaves the weak value undefined.
pub const POSTSELECTION_FLOOR: f64 = 1e-12;

/// Shot-noise settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotConfig {
    /// Shots per estimated expectation value.
    pub shots: u64,
    pub seed: u64,
    /// Spread of a single weak pointer reading.
    #[serde(default = "default_sigma")]
    pub pointer_noise_sigma: f64,
}

fn default_sigma() -> f64 {
    1.0
}

impl ShotConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            shots,
            seed,
            pointer_noise_sigma: default_sigma(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self.pointer_noise_sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least one".into()));
        }
        if !(self.pointer_noise_sigma.is_finite() && self.pointer_noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pointer noise {} must be finite and nonnegative",
                self.pointer_noise_sigma
            )));
        }
        Ok(())
    }
}

/// Weak value of `Pi_a` postselected on `|b>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueRecord {
    pub a_index: usize,
    pub b_index: usize,
    pub weak_value: Complex64,
    pub postselect_prob: f64,
    /// Set when the weak value leaves the projector's spectrum `[0, 1]`:
    /// nonzero imaginary part or real part outside the interval.
    pub anomalous: bool,
}

/// Which reconstruction feeds the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Johansen,
    Weak,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "johansen" => Ok(Self::Johansen),
            "weak" => Ok(Self::Weak),
            other => Err(Error::Parse(format!(
                "unknown scheme {other:?} (expected johansen or weak)"
            ))),
        }
    }
}

/// State after the nonselective binary measurement `{Pi_a, I - Pi_a}`.
pub fn measured_state(
    state: &DensityMatrix,
    a: usize,
    basis: &OrthonormalBasis,
) -> Result<DensityMatrix> {
    check_same_dim(state.dim(), basis.dim())?;
    check_index(a, basis.dim())?;
    Ok(DensityMatrix::from_matrix_unchecked(dephased_pair(
        state.matrix(),
        &basis.projector(a),
    )))
}

/// `e^{i Pi_a pi/2} Pi_b e^{-i Pi_a pi/2}`, using `e^{i Pi_a pi/2} = I + (i - 1) Pi_a`.
pub fn rotated_projector(
    b: usize,
    a: usize,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<ComplexMatrix> {
    check_same_dim(basis_a.dim(), basis_b.dim())?;
    check_index(a, basis_a.dim())?;
    check_index(b, basis_b.dim())?;
    let u = selective_rotation(&basis_a.projector(a));
    Ok(&u * basis_b.projector(b) * u.adjoint())
}

/// Table of `Im Pr(a, b)` from successive projective measurements:
/// `(Tr{rho R_ba} - Tr{rho_a R_ba}) / 2` with `R_ba` the rotated projector.
///
/// In sampled mode each trace is the frequency of `shots` Bernoulli
/// outcomes.
pub fn johansen_im_kd(
    state: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    exact: bool,
    shots: &ShotConfig,
) -> Result<DMatrix<f64>> {
    check_same_dim(state.dim(), basis_a.dim())?;
    check_same_dim(state.dim(), basis_b.dim())?;
    shots.validate()?;
    Ok(johansen_table(
        state.matrix(),
        basis_a.matrix(),
        basis_b.matrix(),
        (!exact).then_some(shots),
    ))
}

/// Weak value `<b|Pi_a rho|b> / <b|rho|b>` with its postselection probability.
pub fn weak_value(
    state: &DensityMatrix,
    a: usize,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    b: usize,
) -> Result<WeakValueRecord> {
    check_same_dim(state.dim(), basis_a.dim())?;
    check_same_dim(state.dim(), basis_b.dim())?;
    check_index(a, basis_a.dim())?;
    check_index(b, basis_b.dim())?;
    let ket = basis_b.matrix().column(b);
    let rho_b = state.matrix() * ket;
    let prob = ket.dotc(&rho_b).re;
    if prob <= POSTSELECTION_FLOOR {
        return Err(Error::ZeroPostselection { probability: prob });
    }
    let a_ket = basis_a.matrix().column(a);
    let numerator = ket.dotc(&a_ket) * a_ket.dotc(&rho_b);
    let w = numerator / prob;
    let tol = 1e-12;
    let anomalous = w.im.abs() > tol || w.re < -tol || w.re > 1.0 + tol;
    Ok(WeakValueRecord {
        a_index: a,
        b_index: b,
        weak_value: w,
        postselect_prob: prob.clamp(0.0, 1.0),
        anomalous,
    })
}

/// Table of `Im{Pi_a^w(b)} Pr(b)` from weak measurements with postselection.
///
/// Where the weak value is undefined the entry falls back to the direct
/// value `Im <b|Pi_a rho|b>`, which vanishes for a positive `rho`. In
/// sampled mode `Pr(b)` comes from `shots` strong measurements of
/// `basis_b`, and each `Im{Pi_a^w(b)}` is the mean of `shots` pointer
/// readings of spread `pointer_noise_sigma`.
pub fn weak_im_kd(
    state: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    exact: bool,
    shots: &ShotConfig,
) -> Result<DMatrix<f64>> {
    check_same_dim(state.dim(), basis_a.dim())?;
    check_same_dim(state.dim(), basis_b.dim())?;
    shots.validate()?;
    Ok(weak_table(
        state.matrix(),
        basis_a.matrix(),
        basis_b.matrix(),
        (!exact).then_some(shots),
    ))
}

/// Per-entry standard error of the sampled tables at `shots.shots`.
///
/// Successive measurements: `sqrt(p1 q1 + p2 q2) / (2 sqrt(n))` for the two
/// Bernoulli frequencies. Weak: the spread of the product of a pointer
/// mean (variance `s^2 = sigma^2 / n`) and an independent frequency
/// (variance `v = p q / n`), `sqrt(w^2 v + s^2 p^2 + s^2 v)`. Entries on
/// the postselection fallback are exact and carry zero error.
pub fn standard_errors(
    scheme: Scheme,
    state: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    shots: &ShotConfig,
) -> Result<DMatrix<f64>> {
    check_same_dim(state.dim(), basis_a.dim())?;
    check_same_dim(state.dim(), basis_b.dim())?;
    shots.validate()?;
    let d = state.dim();
    let n = shots.shots as f64;
    let rho = state.matrix();
    let bernoulli = |p: f64| {
        let p = p.clamp(0.0, 1.0);
        p * (1.0 - p)
    };
    let mut out = DMatrix::zeros(d, d);
    for ai in 0..d {
        let ak = basis_a.matrix().column(ai);
        let p = &ak * ak.adjoint();
        let u = selective_rotation(&p);
        let turned = u.adjoint() * rho * &u;
        let measured = dephased_pair(rho, &p);
        for bi in 0..d {
            let bk = basis_b.matrix().column(bi);
            out[(ai, bi)] = match scheme {
                Scheme::Johansen => {
                    let before = bk.dotc(&(&turned * bk)).re;
                    let after = bk.dotc(&(&measured * bk)).re;
                    0.5 * ((bernoulli(before) + bernoulli(after)) / n).sqrt()
                }
                Scheme::Weak => {
                    let prob = bk.dotc(&(rho * bk)).re;
                    if prob <= POSTSELECTION_FLOOR {
                        0.0
                    } else {
                        let w = (bk.dotc(&ak) * ak.dotc(&(rho * bk))).im / prob;
                        let v = bernoulli(prob) / n;
                        let s2 = shots.pointer_noise_sigma.powi(2) / n;
                        (w * w * v + s2 * prob * prob + s2 * v).sqrt()
                    }
                }
            };
        }
    }
    Ok(out)
}

/// KD coherence with the objective evaluated through a simulated scheme.
///
/// Every objective evaluation reuses `shots.seed`, so the noisy objective is
/// a fixed function of the basis. Maximizing over noise biases the estimate
/// upward at low shot counts. `report.total_shots` counts every simulated
/// shot; it is `None` in exact mode.
pub fn estimate_kd_coherence(
    state: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    scheme: Scheme,
    exact: bool,
    shots: &ShotConfig,
    opt: &OptimizerConfig,
) -> Result<CoherenceResult> {
    check_same_dim(state.dim(), basis_a.dim())?;
    shots.validate()?;
    let d = state.dim();
    opt.validate(d)?;
    let (frame, rho) = canonical_frame(state, basis_a);
    let a = computational_basis(d)?;
    let noise = (!exact).then_some(shots);
    let objective = |w: &ComplexMatrix| {
        let table = match scheme {
            Scheme::Johansen => johansen_table(&rho, a.matrix(), w, noise),
            Scheme::Weak => weak_table(&rho, a.matrix(), w, noise),
        };
        table.iter().map(|x| x.abs()).sum::<f64>()
    };
    let (mut report, w) = maximize_unitary(objective, d, opt)?;
    if !exact {
        let dd = (d * d) as u64;
        let per_eval = match scheme {
            Scheme::Johansen => 2 * dd * shots.shots,
            Scheme::Weak => (dd + 1) * shots.shots,
        };
        report.total_shots = Some(per_eval.saturating_mul(report.objective_evals as u64));
    }
    Ok(CoherenceResult {
        value: report.best_value,
        argmax_basis: OrthonormalBasis::from_unitary_unchecked(frame * w),
        report,
    })
}

fn check_index(i: usize, d: usize) -> Result<()> {
    if i >= d {
        return Err(Error::InvalidConfig(format!(
            "index {i} out of range for dimension {d}"
        )));
    }
    Ok(())
}

fn selective_rotation(p: &ComplexMatrix) -> ComplexMatrix {
    let d = p.nrows();
    ComplexMatrix::identity(d, d) + p * Complex64::new(-1.0, 1.0)
}

fn dephased_pair(rho: &ComplexMatrix, p: &ComplexMatrix) -> ComplexMatrix {
    let d = p.nrows();
    let q = ComplexMatrix::identity(d, d) - p;
    p * rho * p + &q * rho * &q
}

fn bernoulli_mean(rng: &mut StreamRng, p: f64, shots: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let hits = Binomial::new(shots, p)
        .expect("probability clipped to [0, 1]")
        .sample(rng);
    hits as f64 / shots as f64
}

fn johansen_table(
    rho: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    noise: Option<&ShotConfig>,
) -> DMatrix<f64> {
    let d = rho.nrows();
    let mut out = DMatrix::zeros(d, d);
    for ai in 0..d {
        let ak = a.column(ai);
        let p = &ak * ak.adjoint();
        let u = selective_rotation(&p);
        // Tr{rho U Pi_b U^dag} = <b|U^dag rho U|b>
        let turned = u.adjoint() * rho * &u;
        let measured = dephased_pair(rho, &p);
        for bi in 0..d {
            let bk = b.column(bi);
            let before = bk.dotc(&(&turned * bk)).re;
            let after = bk.dotc(&(&measured * bk)).re;
            out[(ai, bi)] = match noise {
                None => 0.5 * (before - after),
                Some(cfg) => {
                    let mut rng = substream(cfg.seed, (ai * d + bi) as u64);
                    let before = bernoulli_mean(&mut rng, before, cfg.shots);
                    let after = bernoulli_mean(&mut rng, after, cfg.shots);
                    0.5 * (before - after)
                }
            };
        }
    }
    out
}

fn weak_table(
    rho: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    noise: Option<&ShotConfig>,
) -> DMatrix<f64> {
    let d = rho.nrows();
    let overlaps = a.adjoint() * b; // (a, b) -> <a|b>
    let sandwiched = a.adjoint() * rho * b; // (a, b) -> <a|rho|b>
    let probs: Vec<f64> = (0..d)
        .map(|bi| b.column(bi).dotc(&(rho * b.column(bi))).re)
        .collect();
    let estimated = noise.map(|cfg| postselection_counts(&probs, cfg));
    let mut out = DMatrix::zeros(d, d);
    for ai in 0..d {
        for bi in 0..d {
            let direct = overlaps[(ai, bi)].conj() * sandwiched[(ai, bi)];
            let p = probs[bi];
            out[(ai, bi)] = if p <= POSTSELECTION_FLOOR {
                direct.im
            } else {
                let weak_im = direct.im / p;
                match (noise, &estimated) {
                    (Some(cfg), Some(freqs)) => {
                        let mut rng = substream(cfg.seed, (ai * d + bi) as u64);
                        let spread = cfg.pointer_noise_sigma / (cfg.shots as f64).sqrt();
                        let reading = if spread > 0.0 {
                            Normal::new(weak_im, spread)
                                .expect("finite spread")
                                .sample(&mut rng)
                        } else {
                            weak_im
                        };
                        reading * freqs[bi]
                    }
                    _ => weak_im * p,
                }
            };
        }
    }
    out
}

/// Multinomial frequencies of `shots` strong measurements, drawn as a chain
/// of conditional binomials.
fn postselection_counts(probs: &[f64], cfg: &ShotConfig) -> Vec<f64> {
    let d = probs.len();
    let mut rng = substream(cfg.seed, (d * d) as u64);
    let clipped: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let mut mass: f64 = clipped.iter().sum();
    let mut left = cfg.shots;
    let mut out = Vec::with_capacity(d);
    for (i, &p) in clipped.iter().enumerate() {
        let n = if i + 1 == d {
            left
        } else if mass <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q)
                .expect("probability clipped to [0, 1]")
                .sample(&mut rng)
        };
        out.push(n as f64 / cfg.shots as f64);
        left -= n;
        mass -= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::kd_coherence;
    use crate::kd::commutator_imag;
    use crate::linalg::{
        expi_hermitian, hermiticity_residual, pauli_y_basis, pauli_z_basis, random_basis,
        random_mixed_state, trace, QubitPureParams,
    };
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn plus() -> DensityMatrix {
        QubitPureParams::new(PI / 2.0, 0.0).unwrap().density()
    }

    fn max_diff(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        (x - y).iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn exact() -> ShotConfig {
        ShotConfig::new(1, 0).unwrap()
    }

    #[test]
    fn measured_state_examples() {
        let z = pauli_z_basis();
        let diag = DensityMatrix::from_bloch([0.0, 0.0, 0.3]).unwrap();
        assert_eq!(measured_state(&diag, 1, &z).unwrap(), diag);
        let out = measured_state(&plus(), 0, &z).unwrap();
        assert!(
            (out.matrix() - ComplexMatrix::identity(2, 2) * Complex64::from(0.5))
                .iter()
                .all(|x| x.norm() < 1e-15)
        );
        let rho = random_mixed_state(3, 1).unwrap();
        let a = random_basis(3, 2).unwrap();
        let m = measured_state(&rho, 2, &a).unwrap();
        assert_abs_diff_eq!(trace(m.matrix()).re, 1.0, epsilon = 1e-12);
        let p = a.projector(2);
        assert!((&p * m.matrix() - m.matrix() * &p)
            .iter()
            .all(|x| x.norm() < 1e-12));
        assert!(DensityMatrix::new(m.into_matrix()).is_ok());
    }

    #[test]
    fn rotated_projector_examples() {
        let a = random_basis(3, 4).unwrap();
        let same = rotated_projector(1, 0, &a, &a).unwrap();
        assert!((same - a.projector(1)).iter().all(|x| x.norm() < 1e-12));
        let b = random_basis(3, 5).unwrap();
        for ai in 0..3 {
            let dense = expi_hermitian(&a.projector(ai), PI / 2.0);
            let closed = selective_rotation(&a.projector(ai));
            assert!((dense - closed).iter().all(|x| x.norm() < 1e-10));
            for bi in 0..3 {
                let r = rotated_projector(bi, ai, &a, &b).unwrap();
                assert!(hermiticity_residual(&r) < 1e-10);
                assert!((&r * &r - &r).iter().all(|x| x.norm() < 1e-10));
            }
        }
    }

    #[test]
    fn disturbance_form_carries_the_opposite_sign() {
        // (Tr{rho_a R} - Tr{rho R}) / 2 is -Im Pr; the table uses the reverse difference
        let rho = random_mixed_state(3, 6).unwrap();
        let (a, b) = (random_basis(3, 7).unwrap(), random_basis(3, 8).unwrap());
        let im = commutator_imag(&rho, &a, &b).unwrap();
        for ai in 0..3 {
            let after = measured_state(&rho, ai, &a).unwrap();
            for bi in 0..3 {
                let r = rotated_projector(bi, ai, &a, &b).unwrap();
                let literal =
                    0.5 * (trace(&(after.matrix() * &r)) - trace(&(rho.matrix() * &r))).re;
                assert_abs_diff_eq!(literal, -im[(ai, bi)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn exact_modes_match_the_commutator() {
        for d in 2..5 {
            for seed in 0..5 {
                let rho = random_mixed_state(d, seed).unwrap();
                let (a, b) = (
                    random_basis(d, seed + 20).unwrap(),
                    random_basis(d, seed + 40).unwrap(),
                );
                let reference = commutator_imag(&rho, &a, &b).unwrap();
                assert!(
                    max_diff(
                        &johansen_im_kd(&rho, &a, &b, true, &exact()).unwrap(),
                        &reference
                    ) <= 1e-12
                );
                assert!(
                    max_diff(
                        &weak_im_kd(&rho, &a, &b, true, &exact()).unwrap(),
                        &reference
                    ) <= 1e-12
                );
            }
        }
    }

    #[test]
    fn reference_instance_quarter_entries() {
        let t =
            johansen_im_kd(&plus(), &pauli_z_basis(), &pauli_y_basis(), true, &exact()).unwrap();
        assert!(t.iter().all(|x| (x.abs() - 0.25).abs() < 1e-12));
    }

    #[test]
    fn sampled_modes_near_exact() {
        let shots = ShotConfig::new(1_000_000, 3).unwrap();
        let (z, y) = (pauli_z_basis(), pauli_y_basis());
        let j = johansen_im_kd(&plus(), &z, &y, false, &shots).unwrap();
        let w = weak_im_kd(&plus(), &z, &y, false, &shots).unwrap();
        let reference = commutator_imag(&plus(), &z, &y).unwrap();
        assert!(max_diff(&j, &reference) <= 3.0 * 7.1e-4);
        assert!(max_diff(&w, &reference) <= 3e-3);
        assert_eq!(j, johansen_im_kd(&plus(), &z, &y, false, &shots).unwrap());
    }

    #[test]
    fn weak_value_examples() {
        let b = random_basis(3, 9).unwrap();
        let a = random_basis(3, 10).unwrap();
        let pure_b = DensityMatrix::from_ket(&b.ket(1)).unwrap();
        for ai in 0..3 {
            let rec = weak_value(&pure_b, ai, &a, &b, 1).unwrap();
            let expected = b
                .matrix()
                .column(1)
                .dotc(&(a.projector(ai) * b.matrix().column(1)));
            assert!((rec.weak_value - expected).norm() < 1e-12);
            assert!(rec.weak_value.im.abs() < 1e-12 && !rec.anomalous);
        }
        let rec = weak_value(&plus(), 0, &pauli_z_basis(), &pauli_y_basis(), 0).unwrap();
        assert!((rec.weak_value - Complex64::new(0.5, 0.5)).norm() < 1e-12);
        assert_abs_diff_eq!(rec.postselect_prob, 0.5, epsilon = 1e-12);
        assert!(rec.anomalous);
        let kd = crate::kd::kd_table(&plus(), &pauli_z_basis(), &pauli_y_basis()).unwrap();
        assert_abs_diff_eq!(
            rec.weak_value.im * rec.postselect_prob,
            kd.entry(0, 0).im,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_postselection() {
        let up = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let z = pauli_z_basis();
        assert!(matches!(
            weak_value(&up, 0, &z, &z, 1),
            Err(Error::ZeroPostselection { .. })
        ));
        let b = random_basis(3, 11).unwrap();
        let pure_b = DensityMatrix::from_ket(&b.ket(0)).unwrap();
        let a = random_basis(3, 12).unwrap();
        let t = weak_im_kd(&pure_b, &a, &b, true, &exact()).unwrap();
        for ai in 0..3 {
            for bi in 1..3 {
                assert!(t[(ai, bi)].abs() < 1e-15);
            }
        }
        assert!(weak_im_kd(&pure_b, &a, &b, false, &ShotConfig::new(100, 1).unwrap()).is_ok());
    }

    #[test]
    fn estimator_in_exact_mode() {
        let rho = random_mixed_state(3, 13).unwrap();
        let a = random_basis(3, 14).unwrap();
        let opt = OptimizerConfig::default().with_restarts(8);
        let reference = kd_coherence(&rho, &a, &opt).unwrap();
        for scheme in [Scheme::Johansen, Scheme::Weak] {
            let est = estimate_kd_coherence(&rho, &a, scheme, true, &exact(), &opt).unwrap();
            assert_abs_diff_eq!(est.value, reference.value, epsilon = 1e-6);
            assert_eq!(est.report.total_shots, None);
        }
        let table = johansen_im_kd(&rho, &a, &reference.argmax_basis, true, &exact()).unwrap();
        assert_abs_diff_eq!(
            table.iter().map(|x| x.abs()).sum::<f64>(),
            reference.value,
            epsilon = 1e-9
        );
    }

    #[test]
    fn sampled_estimator_on_the_equator() {
        let shots = ShotConfig::new(1_000_000, 5).unwrap();
        let opt = OptimizerConfig::default().with_restarts(4);
        let est =
            estimate_kd_coherence(&plus(), &pauli_z_basis(), Scheme::Weak, false, &shots, &opt)
                .unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 0.02);
        assert_eq!(
            est.report.total_shots,
            Some(5 * 1_000_000 * est.report.objective_evals as u64)
        );
    }

    #[test]
    fn standard_errors_on_the_reference_instance() {
        let shots = ShotConfig::new(1_000_000, 0).unwrap();
        let (z, y) = (pauli_z_basis(), pauli_y_basis());
        let j = standard_errors(Scheme::Johansen, &plus(), &z, &y, &shots).unwrap();
        // p1 in {0, 1}, p2 = 1/2
        assert!(j.iter().all(|x| (x - 2.5e-4).abs() < 1e-15));
        let w = standard_errors(Scheme::Weak, &plus(), &z, &y, &shots).unwrap();
        let expected = (0.25 * 2.5e-7 + 1e-6 * 0.25 + 1e-6 * 2.5e-7f64).sqrt();
        assert!(w.iter().all(|x| (x - expected).abs() < 1e-15));
    }

    #[test]
    fn config_and_scheme_parsing() {
        assert!(ShotConfig::new(0, 1).is_err());
        assert!(ShotConfig::new(1, 1).unwrap().with_sigma(-1.0).is_err());
        assert_eq!("weak".parse::<Scheme>().unwrap(), Scheme::Weak);
        assert!("tomography".parse::<Scheme>().is_err());
    }
}
