//! Multi-start maximization over orthonormal bases.
//!
//! A basis is charted by `d^2` real parameters through `U = exp(iH)`, with `H`
//! the Hermitian matrix holding `d` real diagonal entries followed by the real
//! and imaginary parts of the strict upper triangle (row-major). The kets are
//! the columns of `U`. The chart is surjective onto the unitary group.
//!
//! Restart 0 starts from the computational basis, restart 1 from the Fourier
//! basis and the rest from points drawn uniformly in `[-pi, pi]^n` on a
//! per-restart substream. From its start `W0` a restart climbs with
//! Nelder-Mead over `W0 exp(iK)`, `K` Hermitian with zero diagonal, re-centring
//! on the incumbent and re-seeding a smaller simplex after every converged run
//! that improved. Objectives must depend on the kets only through their
//! projectors: the phase directions dropped from `K` leave them unchanged.
//! Product constraints chart each factor separately.
//!
//! Objectives of the form `sum_{a,b} |<w_b|K_a|w_b>|` with Hermitian `K_a`
//! can also be refined by [`pair_sweeps`], which rotates two kets at a time
//! to the exact optimum within their span.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kd::kd_entries;
use crate::linalg::{
    check_dim, expi_hermitian, fourier_basis, hermitian_eigen, random_basis, ComplexMatrix,
    DensityMatrix, OrthonormalBasis,
};
use crate::rng::substream;

/// Search settings for [`maximize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Simplex iterations per restart.
    pub max_iters: usize,
    pub xtol: f64,
    pub ftol: f64,
    pub seed: u64,
    /// Restrict the search to product bases over these factor dimensions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor_dims: Option<Vec<usize>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            xtol: 1e-10,
            ftol: 1e-12,
            seed: 0,
            factor_dims: None,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_factor_dims(mut self, dims: Vec<usize>) -> Self {
        self.factor_dims = Some(dims);
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if !(self.xtol.is_finite() && self.xtol >= 0.0 && self.ftol.is_finite() && self.ftol >= 0.0)
        {
            return Err(Error::InvalidConfig(
                "tolerances must be finite and nonnegative".into(),
            ));
        }
        if let Some(dims) = &self.factor_dims {
            if dims.is_empty() || dims.contains(&0) {
                return Err(Error::InvalidConfig(format!(
                    "bad factor dimensions {dims:?}"
                )));
            }
            let product: usize = dims.iter().product();
            if product != d {
                return Err(Error::InvalidConfig(format!(
                    "factor dimensions {dims:?} multiply to {product}, problem dimension is {d}"
                )));
            }
        }
        Ok(())
    }
}

/// Angles of the qubit basis `|b+> = cos(a/2)|0> + sin(a/2) e^{ib}|1>`,
/// `|b-> = sin(a/2)|0> - cos(a/2) e^{ib}|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitBasisParams {
    alpha: f64,
    beta: f64,
}

impl QubitBasisParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha {alpha} outside [0, pi]"
            )));
        }
        if !(0.0..2.0 * PI).contains(&beta) {
            return Err(Error::InvalidConfig(format!(
                "beta {beta} outside [0, 2pi)"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn basis(&self) -> OrthonormalBasis {
        let (s, c) = (self.alpha / 2.0).sin_cos();
        let e = Complex64::from_polar(1.0, self.beta);
        let kets = ComplexMatrix::from_row_slice(2, 2, &[c.into(), s.into(), e * s, -e * c]);
        OrthonormalBasis::from_unitary_unchecked(kets)
    }
}

/// Outcome of [`maximize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub restarts_run: usize,
    pub converged_restarts: usize,
    pub objective_evals: usize,
    /// Max minus min over the per-restart optima.
    pub spread: f64,
    /// Index of the restart that produced `best_value`.
    pub best_restart: usize,
    /// Simulated measurement shots consumed by the objective, when it samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_shots: Option<u64>,
}

/// Hermitian generator for a parameter vector of length `d^2`.
pub fn hermitian_from_params(params: &[f64], d: usize) -> Result<ComplexMatrix> {
    if params.len() != d * d {
        return Err(Error::BadParamLength {
            expected: d * d,
            found: params.len(),
        });
    }
    let mut h = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = params[k].into();
    }
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = Complex64::new(params[idx], params[idx + 1]);
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
            idx += 2;
        }
    }
    Ok(h)
}

/// `exp(iH(params))`.
pub fn unitary_from_params(params: &[f64], d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let h = hermitian_from_params(params, d)?;
    Ok(expi_hermitian(&h, 1.0))
}

/// Chart parameters `p` with `unitary_from_params(p) = u`, taking eigenphases
/// in `(-pi, pi]`.
///
/// The eigenvectors of a unitary are found from the Hermitian combination
/// `Re(U) + c Im(U)` (with `Re`/`Im` the Hermitian and anti-Hermitian halves),
/// whose eigenvalues separate distinct eigenphases for generic `c`. The result
/// is verified and rejected if the round trip is off by more than `1e-9`.
pub fn params_from_unitary(u: &ComplexMatrix) -> Result<Vec<f64>> {
    let d = u.nrows();
    check_dim(d)?;
    if u.ncols() != d {
        return Err(Error::NotSquare {
            rows: d,
            cols: u.ncols(),
        });
    }
    let ud = u.adjoint();
    let herm = (u + &ud) * Complex64::from(0.5);
    let anti = (u - &ud) * Complex64::new(0.0, -0.5);
    let mut worst = f64::INFINITY;
    for c in [
        0.381_966_011_250_105_2,
        -1.324_717_957_244_746,
        2.718_281_828_459_045,
    ] {
        let mix = &herm + &anti * Complex64::from(c);
        let (_, v) = hermitian_eigen(&mix);
        let diag = v.adjoint() * u * &v;
        let mut h = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            let phase = diag[(k, k)].arg();
            let col = v.column(k);
            h += (&col * col.adjoint()) * Complex64::from(phase);
        }
        let mut params = vec![0.0; d * d];
        for k in 0..d {
            params[k] = h[(k, k)].re;
        }
        let mut idx = d;
        for j in 0..d {
            for k in (j + 1)..d {
                params[idx] = h[(j, k)].re;
                params[idx + 1] = h[(j, k)].im;
                idx += 2;
            }
        }
        let back = unitary_from_params(&params, d)?;
        let err = (back - u).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err <= 1e-9 {
            return Ok(params);
        }
        worst = worst.min(err);
    }
    Err(Error::InvalidConfig(format!(
        "unitary logarithm failed (residual {worst:e})"
    )))
}

/// Parameter chart over bases, optionally restricted to tensor products.
#[derive(Debug, Clone)]
pub struct BasisChart {
    factor_dims: Vec<usize>,
}

impl BasisChart {
    pub fn new(d: usize, cfg: &OptimizerConfig) -> Result<Self> {
        check_dim(d)?;
        cfg.validate(d)?;
        let factor_dims = cfg.factor_dims.clone().unwrap_or_else(|| vec![d]);
        Ok(Self { factor_dims })
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn n_params(&self) -> usize {
        self.factor_dims.iter().map(|k| k * k).sum()
    }

    /// Per-factor unitaries for a parameter vector.
    pub fn factors(&self, params: &[f64]) -> Result<Vec<ComplexMatrix>> {
        if params.len() != self.n_params() {
            return Err(Error::BadParamLength {
                expected: self.n_params(),
                found: params.len(),
            });
        }
        let mut offset = 0;
        let mut out = Vec::with_capacity(self.factor_dims.len());
        for &k in &self.factor_dims {
            out.push(unitary_from_params(&params[offset..offset + k * k], k)?);
            offset += k * k;
        }
        Ok(out)
    }

    /// Unitary whose columns are the charted kets.
    pub fn unitary(&self, params: &[f64]) -> Result<ComplexMatrix> {
        Ok(kron_all(&self.factors(params)?))
    }

    pub fn basis(&self, params: &[f64]) -> Result<OrthonormalBasis> {
        Ok(OrthonormalBasis::from_unitary_unchecked(
            self.unitary(params)?,
        ))
    }

    /// Parameters of the (product of) Fourier bases.
    pub fn fourier_params(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_params());
        for &k in &self.factor_dims {
            out.extend(params_from_unitary(fourier_basis(k)?.matrix())?);
        }
        Ok(out)
    }
}

/// Deterministic multi-start maximization of `objective` over bases of `C^d`.
///
/// Returns the report and the maximizing basis. Fails with
/// [`Error::OptimizerFailure`] only when no restart converged.
pub fn maximize<F>(
    objective: F,
    d: usize,
    cfg: &OptimizerConfig,
) -> Result<(OptimizationReport, OrthonormalBasis)>
where
    F: Fn(&OrthonormalBasis) -> f64,
{
    let (report, u) = maximize_unitary(
        |u: &ComplexMatrix| {
            let basis = OrthonormalBasis::from_unitary_unchecked(u.clone());
            objective(&basis)
        },
        d,
        cfg,
    )?;
    Ok((report, OrthonormalBasis::from_unitary_unchecked(u)))
}

/// [`maximize`] for objectives that read the ket matrix directly.
pub fn maximize_unitary<F>(
    objective: F,
    d: usize,
    cfg: &OptimizerConfig,
) -> Result<(OptimizationReport, ComplexMatrix)>
where
    F: Fn(&ComplexMatrix) -> f64,
{
    maximize_unitary_refined(objective, None, d, cfg)
}

/// [`maximize_unitary`] with `refine` applied to the factors reached by every
/// restart. A refined point replaces the end point when its value is no lower.
pub fn maximize_unitary_refined<F>(
    objective: F,
    refine: Option<&dyn Fn(&[ComplexMatrix]) -> Vec<ComplexMatrix>>,
    d: usize,
    cfg: &OptimizerConfig,
) -> Result<(OptimizationReport, ComplexMatrix)>
where
    F: Fn(&ComplexMatrix) -> f64,
{
    let chart = BasisChart::new(d, cfg)?;
    let n = chart.n_params();
    let fourier = chart.fourier_params()?;

    let mut optima = Vec::with_capacity(cfg.restarts);
    let mut evals = 0usize;
    let mut converged_restarts = 0usize;
    let mut best: Option<(f64, Vec<ComplexMatrix>, usize)> = None;

    for r in 0..cfg.restarts {
        let start = match r {
            0 => vec![0.0; n],
            1 => fourier.clone(),
            _ => {
                let mut rng = substream(cfg.seed, r as u64);
                (0..n).map(|_| rng.random_range(-PI..PI)).collect()
            }
        };
        let mut run = climb(&objective, &chart, chart.factors(&start)?, cfg);
        if let Some(refine) = refine {
            let refined = refine(&run.factors);
            let value = objective(&kron_all(&refined));
            run.evals += 1;
            if value >= run.value {
                run.value = value;
                run.factors = refined;
            }
        }
        evals += run.evals;
        if run.converged {
            converged_restarts += 1;
        }
        optima.push(run.value);
        if best.as_ref().is_none_or(|(v, _, _)| run.value > *v) {
            best = Some((run.value, run.factors, r));
        }
    }

    if converged_restarts == 0 {
        return Err(Error::OptimizerFailure {
            restarts: cfg.restarts,
        });
    }
    let (best_value, factors, best_restart) = best.expect("restarts >= 1");
    let mut best_params = Vec::with_capacity(n);
    for f in &factors {
        best_params.extend(params_from_unitary(f)?);
    }
    let hi = optima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = optima.iter().copied().fold(f64::INFINITY, f64::min);
    let report = OptimizationReport {
        best_value,
        best_params,
        restarts_run: cfg.restarts,
        converged_restarts,
        objective_evals: evals,
        spread: hi - lo,
        best_restart,
        total_shots: None,
    };
    Ok((report, kron_all(&factors)))
}

fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let mut it = factors.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, f| acc.kronecker(f))
}

/// Hermitian matrix with zero diagonal from `d(d-1)` reals.
fn offdiag_hermitian(y: &[f64], d: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    let mut idx = 0;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = Complex64::new(y[idx], y[idx + 1]);
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
            idx += 2;
        }
    }
    h
}

/// Per-factor unitaries `centre_k exp(iK_k(y_k))`.
fn moved(centres: &[ComplexMatrix], dims: &[usize], y: &[f64]) -> Vec<ComplexMatrix> {
    let mut offset = 0;
    centres
        .iter()
        .zip(dims)
        .map(|(c, &k)| {
            let m = k * (k - 1);
            let slice = &y[offset..offset + m];
            offset += m;
            if m == 0 {
                c.clone()
            } else {
                c * expi_hermitian(&offdiag_hermitian(slice, k), 1.0)
            }
        })
        .collect()
}

struct Climb {
    factors: Vec<ComplexMatrix>,
    value: f64,
    evals: usize,
    converged: bool,
}

/// Initial simplex edge at the start of a restart.
const SIMPLEX_STEP: f64 = 0.5;
/// Smallest re-seeded simplex edge.
const MIN_STEP: f64 = 1e-3;

/// `ftol` scaled to the magnitude of `value`, so that searches of `c f` and
/// `f` for `c > 0` take the same steps. Below this magnitude it is absolute.
const FTOL_SCALE_FLOOR: f64 = 1e-3;

fn scaled_ftol(ftol: f64, value: f64) -> f64 {
    ftol * value.abs().max(FTOL_SCALE_FLOOR)
}

/// One restart.
///
/// Simplex runs around a centre that follows the incumbent. Several factors
/// first climb one at a time with the others fixed. A joint climb follows
/// only if a factor after the first improved.
fn climb<F: Fn(&ComplexMatrix) -> f64>(
    f: &F,
    chart: &BasisChart,
    start: Vec<ComplexMatrix>,
    cfg: &OptimizerConfig,
) -> Climb {
    let dims = &chart.factor_dims;
    let mut state = Climb {
        value: f(&kron_all(&start)),
        factors: start,
        evals: 1,
        converged: true,
    };
    let total: usize = dims.iter().map(|j| j * (j - 1)).sum();
    if total == 0 {
        return state;
    }
    let mut budget = cfg.max_iters;
    let mut coupled = false;
    let mut offset = 0;
    for (k, &d) in dims.iter().enumerate() {
        let m = d * (d - 1);
        if m > 0 && m < total {
            let before = state.value;
            budget -= climb_range(f, dims, offset..offset + m, &mut state, budget, cfg);
            coupled |= k > 0 && state.value > before + scaled_ftol(cfg.ftol, before);
            if !state.converged || budget == 0 {
                return state;
            }
        }
        offset += m;
    }
    if coupled || dims.iter().filter(|&&d| d > 1).count() == 1 {
        climb_range(f, dims, 0..total, &mut state, budget, cfg);
    }
    state
}

/// Simplex runs over the chart parameters in `range`; returns the
/// iterations used.
fn climb_range<F: Fn(&ComplexMatrix) -> f64>(
    f: &F,
    dims: &[usize],
    range: std::ops::Range<usize>,
    state: &mut Climb,
    mut budget: usize,
    cfg: &OptimizerConfig,
) -> usize {
    let total: usize = dims.iter().map(|j| j * (j - 1)).sum();
    let origin = vec![0.0; range.len()];
    let start_budget = budget;
    let mut step = SIMPLEX_STEP;
    let embed = |x: &[f64]| {
        let mut y = vec![0.0; total];
        y[range.clone()].copy_from_slice(x);
        y
    };
    while budget > 0 {
        let centres = state.factors.clone();
        let g = |x: &[f64]| f(&kron_all(&moved(&centres, dims, &embed(x))));
        let run = nelder_mead(&g, &origin, step, budget, cfg.ftol, cfg.xtol);
        state.evals += run.evals;
        budget = budget.saturating_sub(run.iters.max(1));
        let improved = run.value > state.value + scaled_ftol(cfg.ftol, state.value);
        if run.value >= state.value {
            state.value = run.value;
            state.factors = moved(&centres, dims, &embed(&run.x));
        }
        state.converged = run.converged;
        if !run.converged || !improved {
            break;
        }
        step = (step * 0.5).max(MIN_STEP);
    }
    start_budget - budget
}

/// Largest number of nonzero `K_a` for which [`pair_sweeps`] runs.
pub const MAX_PAIR_TERMS: usize = 10;

/// Sweeps of [`pair_sweeps`] before it stops regardless of progress.
const MAX_SWEEPS: usize = 200;

/// `sum_{a,b} |<w_b|K_a|w_b>|` over the columns `w_b` of `w`.
pub fn abs_diagonal_sum(ks: &[ComplexMatrix], w: &ComplexMatrix) -> f64 {
    let mut total = 0.0;
    for k in ks {
        let r = k * w;
        for b in 0..w.ncols() {
            total += w.column(b).dotc(&r.column(b)).re.abs();
        }
    }
    total
}

/// Ascends `sum_{a,b} |<w_b|K_a|w_b>|` by replacing each pair of kets with the
/// best orthonormal pair in their span, sweeping over all pairs until a sweep
/// gains at most `ftol` relative to the value.
///
/// Within a pair the value is `2 sum_a max(|tau_a|, |n . m_a|)` for the Bloch
/// vector `n` of the first ket, where `tau_a` and `m_a` are the trace and
/// Bloch parts of `K_a` restricted to the span. Its maximum over the sphere is
/// found exactly by enumerating which branch each term takes. Returns `w`
/// unchanged when more than [`MAX_PAIR_TERMS`] of the `K_a` are nonzero.
pub fn pair_sweeps(ks: &[ComplexMatrix], w: &ComplexMatrix, ftol: f64) -> ComplexMatrix {
    let ks: Vec<&ComplexMatrix> = ks
        .iter()
        .filter(|k| k.iter().any(|z| z.norm() > 0.0))
        .collect();
    let mut w = w.clone();
    let d = w.ncols();
    if ks.len() > MAX_PAIR_TERMS || d < 2 {
        return w;
    }
    for _ in 0..MAX_SWEEPS {
        let mut gain = 0.0;
        for b in 0..d {
            for c in b + 1..d {
                gain += rotate_pair(&ks, &mut w, b, c);
            }
        }
        let value: f64 = ks
            .iter()
            .map(|k| abs_diagonal_sum(std::slice::from_ref(*k), &w))
            .sum();
        if gain <= scaled_ftol(ftol, value) {
            break;
        }
    }
    w
}

/// Moves kets `b` and `c` to the optimum in their span; returns the gain.
fn rotate_pair(ks: &[&ComplexMatrix], w: &mut ComplexMatrix, b: usize, c: usize) -> f64 {
    let (u, v) = (w.column(b).into_owned(), w.column(c).into_owned());
    let terms: Vec<(f64, [f64; 3])> = ks
        .iter()
        .map(|k| {
            let (ku, kv) = (*k * &u, *k * &v);
            let p = u.dotc(&ku).re;
            let r = v.dotc(&kv).re;
            let q = u.dotc(&kv);
            ((p + r) / 2.0, [q.re, -q.im, (p - r) / 2.0])
        })
        .collect();
    let current: f64 = terms.iter().map(|(t, m)| t.abs().max(m[2].abs())).sum();
    let mut best = (current, None);
    enumerate_branches(&terms, 0, 0.0, [0.0; 3], &mut best);
    let Some(n) = best.1 else { return 0.0 };
    let gain = 2.0 * (best.0 - current);
    if gain <= 0.0 {
        return 0.0;
    }
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phase = Complex64::from_polar(1.0, n[1].atan2(n[0]));
    let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let new_u = &u * Complex64::from(cs) + &v * (phase * sn);
    let new_v = &u * (-phase.conj() * sn) + &v * Complex64::from(cs);
    w.set_column(b, &new_u);
    w.set_column(c, &new_v);
    gain
}

/// Best of `fixed + |vector|` over the branch choices `|tau_a|`, `+m_a`,
/// `-m_a` of the terms from index `i` on.
fn enumerate_branches(
    terms: &[(f64, [f64; 3])],
    i: usize,
    fixed: f64,
    vector: [f64; 3],
    best: &mut (f64, Option<[f64; 3]>),
) {
    if i == terms.len() {
        let norm = (vector[0].powi(2) + vector[1].powi(2) + vector[2].powi(2)).sqrt();
        if norm > 0.0 && fixed + norm > best.0 {
            *best = (fixed + norm, Some(vector.map(|x| x / norm)));
        }
        return;
    }
    let (tau, m) = terms[i];
    enumerate_branches(terms, i + 1, fixed + tau.abs(), vector, best);
    let plus = [vector[0] + m[0], vector[1] + m[1], vector[2] + m[2]];
    enumerate_branches(terms, i + 1, fixed, plus, best);
    if i > 0 {
        let minus = [vector[0] - m[0], vector[1] - m[1], vector[2] - m[2]];
        enumerate_branches(terms, i + 1, fixed, minus, best);
    }
}

struct SimplexRun {
    x: Vec<f64>,
    value: f64,
    iters: usize,
    evals: usize,
    converged: bool,
}

/// Nelder-Mead maximization with reflection 1, expansion 2, contraction 0.5
/// and shrink 0.5. Converged when the objective spread over the simplex is at
/// most `ftol`, or its diameter at most `xtol`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    ftol: f64,
    xtol: f64,
) -> SimplexRun {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = x0.len();
    let mut evals = 0usize;
    let mut call = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        // minimize the negated objective; NaN ranks worst
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };

    if n == 0 {
        let v = call(x0);
        return SimplexRun {
            x: x0.to_vec(),
            value: -v,
            iters: 0,
            evals,
            converged: true,
        };
    }

    // vertex i occupies pts[i*n..(i+1)*n]
    let mut pts = Vec::with_capacity((n + 1) * n);
    pts.extend_from_slice(x0);
    for i in 0..n {
        pts.extend_from_slice(x0);
        pts[(i + 1) * n + i] += step;
    }
    let mut vals: Vec<f64> = (0..=n).map(|i| call(&pts[i * n..(i + 1) * n])).collect();
    let mut order: Vec<usize> = (0..=n).collect();

    let mut iters = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut reflected = vec![0.0; n];
    let mut trial = vec![0.0; n];
    loop {
        // best first, ties by vertex index
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let fspread = vals[worst] - vals[best];
        let b0 = &pts[best * n..(best + 1) * n];
        let mut diameter = 0.0f64;
        for &i in &order[1..] {
            for (a, b) in pts[i * n..(i + 1) * n].iter().zip(b0) {
                diameter = diameter.max((a - b).abs());
            }
        }
        if fspread <= scaled_ftol(ftol, vals[best]) || diameter <= xtol {
            converged = true;
            break;
        }
        if iters >= max_iters {
            break;
        }
        iters += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[i * n..(i + 1) * n]) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);
        let w = worst * n;
        let along = |coef: f64, pts: &[f64], out: &mut [f64]| {
            for k in 0..n {
                out[k] = centroid[k] + coef * (pts[w + k] - centroid[k]);
            }
        };

        along(-REFLECT, &pts, &mut reflected);
        let fr = call(&reflected);
        if fr < vals[best] {
            along(-EXPAND, &pts, &mut trial);
            let fe = call(&trial);
            if fe < fr {
                pts[w..w + n].copy_from_slice(&trial);
                vals[worst] = fe;
            } else {
                pts[w..w + n].copy_from_slice(&reflected);
                vals[worst] = fr;
            }
        } else if fr < vals[second] {
            pts[w..w + n].copy_from_slice(&reflected);
            vals[worst] = fr;
        } else {
            let outside = fr < vals[worst];
            along(if outside { -CONTRACT } else { CONTRACT }, &pts, &mut trial);
            let fc = call(&trial);
            if (outside && fc <= fr) || (!outside && fc < vals[worst]) {
                pts[w..w + n].copy_from_slice(&trial);
                vals[worst] = fc;
            } else {
                let anchor = pts[best * n..(best + 1) * n].to_vec();
                for &i in &order[1..] {
                    for k in 0..n {
                        pts[i * n + k] = anchor[k] + SHRINK * (pts[i * n + k] - anchor[k]);
                    }
                    vals[i] = call(&pts[i * n..(i + 1) * n]);
                }
            }
        }
    }

    let bi = order[0];
    SimplexRun {
        x: pts[bi * n..(bi + 1) * n].to_vec(),
        value: -vals[bi],
        iters,
        evals,
        converged,
    }
}

/// Exhaustive scan of `imag_l1` over the qubit second-basis angles: `alpha`
/// on `resolution` points spanning `[0, pi]`, `beta` on `resolution` points of
/// `[0, 2pi)`.
pub fn grid_oracle_qubit(
    state: &DensityMatrix,
    basis: &OrthonormalBasis,
    resolution: usize,
) -> Result<f64> {
    if state.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: state.dim(),
        });
    }
    if basis.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: basis.dim(),
        });
    }
    if resolution < 8 {
        return Err(Error::InvalidConfig(format!(
            "resolution {resolution} below 8"
        )));
    }
    let mut best = 0.0f64;
    for i in 0..resolution {
        let alpha = PI * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let beta = 2.0 * PI * j as f64 / resolution as f64;
            let b = QubitBasisParams { alpha, beta }.basis();
            best = best.max(imag_l1_raw(state.matrix(), basis.matrix(), b.matrix()));
        }
    }
    Ok(best)
}

/// Best `imag_l1` over `samples` Haar-random second bases.
pub fn grid_oracle_general(
    state: &DensityMatrix,
    basis: &OrthonormalBasis,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    crate::linalg::check_same_dim(state.dim(), basis.dim())?;
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least one".into()));
    }
    let d = state.dim();
    let mut best = f64::NEG_INFINITY;
    for s in 0..samples {
        let b = random_basis(d, crate::rng::derive_seed(seed, s as u64))?;
        best = best.max(imag_l1_raw(state.matrix(), basis.matrix(), b.matrix()));
    }
    Ok(best)
}

pub(crate) fn imag_l1_raw(rho: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    kd_entries(rho, a, b).iter().map(|z| z.im.abs()).sum()
}
