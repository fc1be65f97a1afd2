//! Batch verification of the KD coherence properties on seeded random instances.
//!
//! Each instance draws a state and a basis and checks every property
//! against them, reusing the base value `C_KD(rho; A)` wherever a property
//! compares to it. Instances are independent and run on a scoped thread
//! pool; results are sorted by `(dim, index)` so the report does not depend
//! on scheduling.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use kd_coherence::coherence::{
    dephase, kd_coherence, kd_coherence_subsystem, l1_coherence, stddev_bound,
};
use kd_coherence::linalg::{
    commutator, partial_trace, permutation_unitary, random_basis, random_mixed_state,
    random_pure_state, random_unitary, tensor_product, translation_unitary, DensityMatrix, Keep,
    OrthonormalBasis,
};
use kd_coherence::optimizer::OptimizerConfig;
use kd_coherence::rng::{derive_seed, substream};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest `||[Pi_a, rho]||_F` still counted as commuting.
pub const COMMUTING_TOL: f64 = 1e-9;
/// Largest optimized value still counted as zero coherence.
pub const ZERO_TOL: f64 = 1e-6;
pub const INEQUALITY_TOL: f64 = 1e-6;
pub const EQUALITY_TOL: f64 = 2e-6;
pub const DEPHASING_WEIGHTS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
/// Dimension of the traced-out factor in the partial-trace property.
pub const ANCILLA_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Faithfulness,
    Convexity,
    UnitaryCovariance,
    TranslationInvariance,
    PermutationInvariance,
    PartialTrace,
    Decoherence,
    Sandwich,
    QubitEquality,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Self::Faithfulness,
        Self::Convexity,
        Self::UnitaryCovariance,
        Self::TranslationInvariance,
        Self::PermutationInvariance,
        Self::PartialTrace,
        Self::Decoherence,
        Self::Sandwich,
        Self::QubitEquality,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Faithfulness => "(i) faithfulness",
            Self::Convexity => "(ii) convexity",
            Self::UnitaryCovariance => "(iii) unitary covariance",
            Self::TranslationInvariance => "(iv) translation invariance",
            Self::PermutationInvariance => "(v) permutation invariance",
            Self::PartialTrace => "(vi) partial trace",
            Self::Decoherence => "(vii) decoherence",
            Self::Sandwich => "sandwich bounds",
            Self::QubitEquality => "qubit equalities",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Self::Faithfulness => ZERO_TOL,
            Self::Convexity | Self::Sandwich => INEQUALITY_TOL,
            _ => EQUALITY_TOL,
        }
    }
}

/// Deliberate defects for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Dephasing that keeps half of every coherence.
    FaultyDephasing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub threads: usize,
    pub fault: Option<Fault>,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(CliError::Invalid(
                "dims must be a nonempty list of values >= 2".into(),
            ));
        }
        if self.instances == 0 {
            return Err(CliError::Invalid("instances must be at least one".into()));
        }
        if self.threads == 0 {
            return Err(CliError::Invalid("threads must be at least one".into()));
        }
        for &d in &self.dims {
            self.optimizer
                .validate(d)
                .map_err(CliError::core("optimizer config"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub property: Property,
    /// Amount by which the relation is broken; compare with `tolerance`.
    pub violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn bounded(property: Property, violation: f64) -> Self {
        let tolerance = property.tolerance();
        Self {
            property,
            violation,
            tolerance,
            passed: violation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub dim: usize,
    pub index: usize,
    pub seed: u64,
    pub pure: bool,
    pub kd_coherence: f64,
    pub l1_coherence: f64,
    pub stddev_bound: f64,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertySummary {
    pub property: Property,
    pub dim: usize,
    pub instances: usize,
    pub failures: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub summaries: Vec<PropertySummary>,
    pub records: Vec<InstanceRecord>,
}

impl SuiteReport {
    /// Summaries of one property across dimensions.
    pub fn property(&self, p: Property) -> impl Iterator<Item = &PropertySummary> {
        self.summaries.iter().filter(move |s| s.property == p)
    }

    pub fn property_passed(&self, p: Property) -> bool {
        self.property(p).all(|s| s.passed)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28} {:>3} {:>5} {:>5} {:>13} {:>9}  result",
            "property", "d", "n", "fail", "max viol", "tol"
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<28} {:>3} {:>5} {:>5} {:>13.3e} {:>9.1e}  {}",
                s.property.label(),
                s.dim,
                s.instances,
                s.failures,
                s.max_violation,
                s.tolerance,
                if s.passed { "pass" } else { "FAIL" }
            );
        }
        out
    }
}

fn max_commutator_norm(state: &DensityMatrix, basis: &OrthonormalBasis) -> f64 {
    basis
        .projectors()
        .iter()
        .map(|p| commutator(p, state.matrix()).norm())
        .fold(0.0, f64::max)
}

fn faulty_dephase(
    state: &DensityMatrix,
    basis: &OrthonormalBasis,
) -> kd_coherence::Result<DensityMatrix> {
    let full = dephase(state, basis)?;
    DensityMatrix::mixture(&[(0.5, state), (0.5, &full)])
}

struct Instance<'a> {
    cfg: &'a SuiteConfig,
    opt: OptimizerConfig,
    dim: usize,
    seed: u64,
}

impl Instance<'_> {
    fn coherence(
        &self,
        state: &DensityMatrix,
        basis: &OrthonormalBasis,
    ) -> kd_coherence::Result<f64> {
        Ok(kd_coherence(state, basis, &self.opt)?.value)
    }

    fn draw_state(&self, salt: u64, pure: bool) -> kd_coherence::Result<DensityMatrix> {
        let s = derive_seed(self.seed, salt);
        if pure {
            random_pure_state(self.dim, s)
        } else {
            random_mixed_state(self.dim, s)
        }
    }

    fn run(&self, index: usize) -> kd_coherence::Result<InstanceRecord> {
        let d = self.dim;
        let mut rng = substream(self.seed, 0);
        let pure = index % 2 == 0;
        let state = self.draw_state(1, pure)?;
        let basis = random_basis(d, derive_seed(self.seed, 2))?;
        let base = self.coherence(&state, &basis)?;
        let mut checks = Vec::new();

        // (i): an incoherent mixture and the drawn state, each tested both ways
        let weights: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let kets: Vec<DensityMatrix> = (0..d)
            .map(|a| DensityMatrix::from_ket(&basis.ket(a)))
            .collect::<Result<_, _>>()?;
        let parts: Vec<(f64, &DensityMatrix)> =
            weights.iter().map(|w| w / total).zip(&kets).collect();
        let incoherent = DensityMatrix::mixture(&parts)?;
        let c_inc = self.coherence(&incoherent, &basis)?;
        let agrees = |c: f64, s: &DensityMatrix| {
            (c <= ZERO_TOL) == (max_commutator_norm(s, &basis) <= COMMUTING_TOL)
        };
        checks.push(CheckResult {
            property: Property::Faithfulness,
            violation: c_inc,
            tolerance: ZERO_TOL,
            passed: agrees(c_inc, &incoherent) && agrees(base, &state),
        });

        // (ii)
        let m = 2 + index % 3;
        let mut components = vec![state.clone()];
        for k in 1..m {
            components.push(self.draw_state(10 + k as u64, k % 2 == 1)?);
        }
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut rhs = probs[0] * base;
        for (p, c) in probs.iter().zip(&components).skip(1) {
            rhs += p * self.coherence(c, &basis)?;
        }
        let parts: Vec<(f64, &DensityMatrix)> = probs.iter().copied().zip(&components).collect();
        let lhs = self.coherence(&DensityMatrix::mixture(&parts)?, &basis)?;
        checks.push(CheckResult::bounded(Property::Convexity, lhs - rhs));

        // (iii)
        let u = random_unitary(d, derive_seed(self.seed, 3))?;
        let moved = self.coherence(&state.conjugate(&u)?, &basis.transformed(&u)?)?;
        checks.push(CheckResult::bounded(
            Property::UnitaryCovariance,
            (moved - base).abs(),
        ));

        // (iv)
        let phases: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..TAU)).collect();
        let t = translation_unitary(&basis, &phases)?;
        let translated = self.coherence(&state.conjugate(&t)?, &basis)?;
        checks.push(CheckResult::bounded(
            Property::TranslationInvariance,
            (translated - base).abs(),
        ));

        // (v)
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut rng);
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            perm.rotate_left(1);
        }
        let phases: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..TAU)).collect();
        let p = permutation_unitary(&basis, &perm, &phases)?;
        let permuted = self.coherence(&state.conjugate(&p)?, &basis)?;
        checks.push(CheckResult::bounded(
            Property::PermutationInvariance,
            (permuted - base).abs(),
        ));

        // (vi): monotonicity on a correlated composite, equality on a product
        let composite_opt = self.opt.clone();
        let joint = if pure {
            random_pure_state(d * ANCILLA_DIM, derive_seed(self.seed, 4))?
        } else {
            random_mixed_state(d * ANCILLA_DIM, derive_seed(self.seed, 4))?
        };
        let reduced = partial_trace(&joint, (d, ANCILLA_DIM), Keep::First)?;
        let c_joint = kd_coherence_subsystem(&joint, &basis, ANCILLA_DIM, &composite_opt)?.value;
        let c_reduced = self.coherence(&reduced, &basis)?;
        let ancilla = random_mixed_state(ANCILLA_DIM, derive_seed(self.seed, 5))?;
        let product = DensityMatrix::new(tensor_product(state.matrix(), ancilla.matrix()))?;
        let c_product =
            kd_coherence_subsystem(&product, &basis, ANCILLA_DIM, &composite_opt)?.value;
        let violation = (c_reduced - c_joint).max((c_product - base).abs());
        checks.push(CheckResult::bounded(Property::PartialTrace, violation));

        // (vii); p = 1 reproduces the drawn state exactly
        let dephased = match self.cfg.fault {
            Some(Fault::FaultyDephasing) => faulty_dephase(&state, &basis)?,
            None => dephase(&state, &basis)?,
        };
        let mut worst = 0.0f64;
        for &p in &DEPHASING_WEIGHTS {
            let c = if p == 1.0 {
                base
            } else {
                self.coherence(
                    &DensityMatrix::mixture(&[(p, &state), (1.0 - p, &dephased)])?,
                    &basis,
                )?
            };
            worst = worst.max((c - p * base).abs());
        }
        checks.push(CheckResult::bounded(Property::Decoherence, worst));

        let l1 = l1_coherence(&state, &basis)?;
        let sd = stddev_bound(&state, &basis)?;
        checks.push(CheckResult::bounded(
            Property::Sandwich,
            (base - l1).max(base - sd),
        ));
        if d == 2 {
            let mut gap = (base - l1).abs();
            if pure {
                gap = gap.max((base - sd).abs());
            }
            checks.push(CheckResult::bounded(Property::QubitEquality, gap));
        }

        Ok(InstanceRecord {
            dim: d,
            index,
            seed: self.seed,
            pure,
            kd_coherence: base,
            l1_coherence: l1,
            stddev_bound: sd,
            checks,
        })
    }
}

fn instance_seed(seed: u64, dim: usize, index: usize) -> u64 {
    derive_seed(derive_seed(seed, dim as u64), index as u64)
}

/// Runs one instance; exposed so single failures can be replayed.
pub fn run_instance(
    cfg: &SuiteConfig,
    dim: usize,
    index: usize,
) -> Result<InstanceRecord, CliError> {
    let seed = instance_seed(cfg.seed, dim, index);
    let opt = cfg.optimizer.clone().with_seed(seed);
    Instance {
        cfg,
        opt,
        dim,
        seed,
    }
    .run(index)
    .map_err(CliError::core(format!("instance d={dim} #{index}")))
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, CliError> {
    cfg.validate()?;
    // largest dimensions first so the slowest jobs do not trail
    let mut jobs: Vec<(usize, usize)> = cfg
        .dims
        .iter()
        .flat_map(|&d| (0..cfg.instances).map(move |k| (d, k)))
        .collect();
    jobs.sort_by_key(|&(d, k)| (std::cmp::Reverse(d), k));
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..cfg.threads.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(d, k)) = jobs.get(i) else { break };
                let outcome = run_instance(cfg, d, k);
                results.lock().expect("worker panicked").push(outcome);
            });
        }
    });
    let mut records = results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| (r.dim, r.index));

    let mut summaries = Vec::new();
    for &d in &cfg.dims {
        for p in Property::ALL {
            let checks: Vec<&CheckResult> = records
                .iter()
                .filter(|r| r.dim == d)
                .flat_map(|r| &r.checks)
                .filter(|c| c.property == p)
                .collect();
            if checks.is_empty() {
                continue;
            }
            let failures = checks.iter().filter(|c| !c.passed).count();
            summaries.push(PropertySummary {
                property: p,
                dim: d,
                instances: checks.len(),
                failures,
                max_violation: checks
                    .iter()
                    .map(|c| c.violation)
                    .fold(f64::NEG_INFINITY, f64::max),
                tolerance: p.tolerance(),
                passed: failures == 0,
            });
        }
    }
    Ok(SuiteReport {
        passed: summaries.iter().all(|s| s.passed),
        summaries,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(fault: Option<Fault>, threads: usize) -> SuiteConfig {
        SuiteConfig {
            dims: vec![2, 3],
            instances: 3,
            seed: 7,
            optimizer: OptimizerConfig::default().with_restarts(8),
            threads,
            fault,
        }
    }

    #[test]
    fn small_suite_passes_and_ignores_thread_count() {
        let one = run_suite(&small(None, 1)).unwrap();
        assert!(one.passed, "{}", one.table());
        assert!(one.property(Property::QubitEquality).all(|s| s.dim == 2));
        let three = run_suite(&small(None, 3)).unwrap();
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&three).unwrap()
        );
    }

    #[test]
    fn faulty_dephasing_breaks_only_decoherence() {
        let report = run_suite(&small(Some(Fault::FaultyDephasing), 1)).unwrap();
        assert!(!report.passed);
        for p in Property::ALL {
            assert_eq!(
                report.property_passed(p),
                p != Property::Decoherence,
                "{p:?}"
            );
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small(None, 1);
        cfg.dims = vec![1];
        assert!(run_suite(&cfg).is_err());
        cfg.dims = vec![2];
        cfg.instances = 0;
        assert!(run_suite(&cfg).is_err());
    }
}
