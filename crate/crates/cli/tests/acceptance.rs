//! Acceptance criteria, one status line each on stderr.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::{Duration, Instant};

use kd_cli::properties::{run_suite, Property, SuiteConfig, SuiteReport};
use kd_coherence::coherence::kd_coherence;
use kd_coherence::kd::{commutator_imag, kd_table, nonclassicality, reconstruct_state};
use kd_coherence::linalg::{
    computational_basis, fourier_basis, pauli_x_basis, pauli_y_basis, pauli_z_basis, random_basis,
    random_mixed_state, random_pure_state, DensityMatrix, QubitPureParams,
};
use kd_coherence::measurement::{johansen_im_kd, standard_errors, weak_im_kd, Scheme, ShotConfig};
use kd_coherence::optimizer::{grid_oracle_general, grid_oracle_qubit, OptimizerConfig};
use kd_coherence::response::{
    response_bound, response_function, response_function_kd, Observable, ResponseSetup,
};
use kd_coherence::rng::substream;
use rand::Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn max_abs_diff(x: &nalgebra::DMatrix<f64>, y: &nalgebra::DMatrix<f64>) -> f64 {
    (x - y).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

fn qubit_closed_form(cfg: &OptimizerConfig) -> Verdict {
    let start = Instant::now();
    let z = pauli_z_basis();
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..5 {
            let theta = PI * i as f64 / 9.0;
            let eta = TAU * j as f64 / 5.0;
            let state = QubitPureParams::new(theta, eta).unwrap().density();
            let c = kd_coherence(&state, &z, cfg).unwrap().value;
            worst = worst.max((c - theta.sin().abs()).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-6 && elapsed < Duration::from_secs(30),
        format!(
            "50 grid states, max |C - |sin theta|| = {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn qubit_mixed_formula(cfg: &OptimizerConfig) -> Verdict {
    let mut rng = substream(101, 0);
    let z = pauli_z_basis();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let r = loop {
            let v = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            if v.iter().map(|x: &f64| x * x).sum::<f64>() <= 1.0 {
                break v;
            }
        };
        let c = kd_coherence(&DensityMatrix::from_bloch(r).unwrap(), &z, cfg)
            .unwrap()
            .value;
        worst = worst.max((c - (r[0] * r[0] + r[1] * r[1]).sqrt()).abs());
    }
    verdict(
        worst <= 1e-6,
        format!("100 Bloch vectors, max |C - sqrt(r^2 - r_z^2)| = {worst:.2e}"),
    )
}

fn sandwich(report: &SuiteReport) -> Verdict {
    let mut upper = f64::NEG_INFINITY;
    let mut l1_gap = 0.0f64;
    let mut sd_gap = 0.0f64;
    for r in &report.records {
        upper = upper
            .max(r.kd_coherence - r.l1_coherence)
            .max(r.kd_coherence - r.stddev_bound);
        if r.dim == 2 {
            l1_gap = l1_gap.max((r.kd_coherence - r.l1_coherence).abs());
            if r.pure {
                sd_gap = sd_gap.max((r.kd_coherence - r.stddev_bound).abs());
            }
        }
    }
    verdict(
        upper <= 1e-6 && l1_gap <= 2e-6 && sd_gap <= 2e-6,
        format!(
            "{} states, max C - min(bounds) = {upper:.2e}, d=2 |C - C_l1| = {l1_gap:.2e}, d=2 pure |C - stddev| = {sd_gap:.2e}",
            report.records.len()
        ),
    )
}

fn properties(report: &SuiteReport) -> Verdict {
    let core = [
        Property::Faithfulness,
        Property::Convexity,
        Property::UnitaryCovariance,
        Property::TranslationInvariance,
        Property::PermutationInvariance,
        Property::PartialTrace,
        Property::Decoherence,
    ];
    let mut parts = Vec::new();
    let mut passed = true;
    for p in core {
        let failures: usize = report.property(p).map(|s| s.failures).sum();
        let worst = report
            .property(p)
            .map(|s| s.max_violation)
            .fold(f64::NEG_INFINITY, f64::max);
        passed &= report.property_passed(p);
        parts.push(format!("{} {failures} fail/{worst:.1e}", p.label()));
    }
    verdict(passed, parts.join(", "))
}

fn oracle_agreement(cfg: &OptimizerConfig) -> Verdict {
    let mut qubit_gap = 0.0f64;
    let mut grid_excess = f64::NEG_INFINITY;
    for seed in 0..50 {
        let state = if seed % 2 == 0 {
            random_pure_state(2, seed)
        } else {
            random_mixed_state(2, seed)
        }
        .unwrap();
        let basis = random_basis(2, 1000 + seed).unwrap();
        let c = kd_coherence(&state, &basis, cfg).unwrap().value;
        let grid = grid_oracle_qubit(&state, &basis, 720).unwrap();
        qubit_gap = qubit_gap.max((c - grid).abs());
        grid_excess = grid_excess.max(grid - c);
    }
    let mut qutrit_shortfall = f64::NEG_INFINITY;
    for seed in 0..50 {
        let state = if seed % 2 == 0 {
            random_pure_state(3, seed)
        } else {
            random_mixed_state(3, seed)
        }
        .unwrap();
        let basis = random_basis(3, 2000 + seed).unwrap();
        let c = kd_coherence(&state, &basis, cfg).unwrap().value;
        let oracle = grid_oracle_general(&state, &basis, 10_000, seed).unwrap();
        qutrit_shortfall = qutrit_shortfall.max(oracle - c);
    }
    verdict(
        qubit_gap <= 1e-3 && grid_excess <= 1e-6 && qutrit_shortfall <= 1e-9,
        format!("qubit max |C - grid720| = {qubit_gap:.2e}; d=3 max (sampled oracle - C) = {qutrit_shortfall:.2e}"),
    )
}

fn reconstruction() -> Verdict {
    let mut worst = 0.0f64;
    for d in 2..=8 {
        let (a, b) = (computational_basis(d).unwrap(), fourier_basis(d).unwrap());
        for seed in 0..5 {
            let state = if seed % 2 == 0 {
                random_pure_state(d, seed)
            } else {
                random_mixed_state(d, seed)
            }
            .unwrap();
            let back = reconstruct_state(&kd_table(&state, &a, &b).unwrap()).unwrap();
            worst = worst.max(
                (back.matrix() - state.matrix())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            );
        }
    }
    verdict(
        worst <= 1e-9,
        format!("d = 2..8, max entry error {worst:.2e}"),
    )
}

fn measurement_schemes() -> Verdict {
    let mut exact_gap = 0.0f64;
    for d in 2..=4 {
        for seed in 0..10 {
            let state = random_mixed_state(d, seed).unwrap();
            let (a, b) = (
                random_basis(d, 300 + seed).unwrap(),
                random_basis(d, 400 + seed).unwrap(),
            );
            let reference = commutator_imag(&state, &a, &b).unwrap();
            let shots = ShotConfig::new(1, 0).unwrap();
            exact_gap = exact_gap.max(max_abs_diff(
                &johansen_im_kd(&state, &a, &b, true, &shots).unwrap(),
                &reference,
            ));
            exact_gap = exact_gap.max(max_abs_diff(
                &weak_im_kd(&state, &a, &b, true, &shots).unwrap(),
                &reference,
            ));
        }
    }
    let plus = QubitPureParams::new(PI / 2.0, 0.0).unwrap().density();
    let (z, y) = (pauli_z_basis(), pauli_y_basis());
    let reference = commutator_imag(&plus, &z, &y).unwrap();
    let mut hits = Vec::new();
    for scheme in [Scheme::Johansen, Scheme::Weak] {
        let envelope = standard_errors(
            scheme,
            &plus,
            &z,
            &y,
            &ShotConfig::new(1_000_000, 0).unwrap(),
        )
        .unwrap()
            * 3.0;
        let inside = (0..100)
            .filter(|&seed| {
                let shots = ShotConfig::new(1_000_000, seed).unwrap();
                let t = match scheme {
                    Scheme::Johansen => johansen_im_kd(&plus, &z, &y, false, &shots),
                    Scheme::Weak => weak_im_kd(&plus, &z, &y, false, &shots),
                }
                .unwrap();
                (t - &reference)
                    .iter()
                    .zip(envelope.iter())
                    .all(|(x, e)| x.abs() <= *e)
            })
            .count();
        hits.push(inside);
    }
    verdict(
        exact_gap <= 1e-12 && hits.iter().all(|&h| h >= 95),
        format!(
            "exact max gap {exact_gap:.2e}; 3-sigma hits johansen {}/100, weak {}/100",
            hits[0], hits[1]
        ),
    )
}

fn nonclassicality_link(cfg: &OptimizerConfig) -> Verdict {
    let mut tested = 0;
    let mut smallest = f64::INFINITY;
    let mut seed = 0u64;
    while tested < 200 {
        let d = 2 + (seed % 3) as usize;
        let state = if seed % 2 == 0 {
            random_pure_state(d, seed)
        } else {
            random_mixed_state(d, seed)
        }
        .unwrap();
        let (a, b) = (
            random_basis(d, 5000 + seed).unwrap(),
            random_basis(d, 6000 + seed).unwrap(),
        );
        seed += 1;
        if nonclassicality(&kd_table(&state, &a, &b).unwrap()) <= 1e-3 {
            continue;
        }
        tested += 1;
        for basis in [&a, &b] {
            smallest = smallest.min(kd_coherence(&state, basis, cfg).unwrap().value);
        }
    }
    verdict(
        smallest > 1e-6,
        format!("200 nonclassical instances ({seed} drawn), smallest C_KD {smallest:.3e}"),
    )
}

fn linear_response(cfg: &OptimizerConfig) -> Verdict {
    let mut rng = substream(909, 0);
    let mut form_gap = 0.0f64;
    let mut bound_excess = f64::NEG_INFINITY;
    for k in 0..100u64 {
        let d = 2 + (k % 3) as usize;
        let mut obs = |salt: u64| {
            let values = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            Observable::new(random_basis(d, 7000 + 10 * k + salt).unwrap(), values).unwrap()
        };
        let (h0, a, b) = (obs(0), obs(1), obs(2));
        let state = if k % 2 == 0 {
            random_pure_state(d, k)
        } else {
            random_mixed_state(d, k)
        }
        .unwrap();
        let setup = ResponseSetup::new(h0, a, b, state).unwrap();
        let (tp, t) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let phi = response_function(&setup, tp, t).unwrap();
        form_gap = form_gap.max((phi - response_function_kd(&setup, tp, t).unwrap()).abs());
        let bound = response_bound(&setup, tp, t, &cfg.clone().with_seed(k)).unwrap();
        bound_excess = bound_excess.max(bound.lhs - bound.rhs);
    }
    let pauli = |basis| Observable::new(basis, vec![1.0, -1.0]).unwrap();
    let up = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
    let saturating = ResponseSetup::new(
        pauli(pauli_z_basis()),
        pauli(pauli_x_basis()),
        pauli(pauli_y_basis()),
        up,
    )
    .unwrap();
    let sat = response_bound(&saturating, 0.0, 0.0, cfg).unwrap();
    let sat_gap = (sat.lhs - 2.0).abs().max((sat.rhs - 2.0).abs());
    verdict(
        form_gap <= 1e-10 && bound_excess <= 1e-6 && sat_gap <= 1e-6,
        format!("form gap {form_gap:.2e}, max lhs - rhs {bound_excess:.2e}, saturation |lhs-2|,|rhs-2| <= {sat_gap:.2e}"),
    )
}

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    let suite = SuiteConfig {
        dims: vec![2, 3, 4],
        instances: 100,
        seed: 0,
        optimizer: OptimizerConfig::default().with_max_iters(20_000),
        threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        fault: None,
    };
    let report = run_suite(&suite).expect("property suite runs");

    let results = [
        ("1 qubit closed form", qubit_closed_form(&cfg)),
        ("2 qubit mixed-state formula", qubit_mixed_formula(&cfg)),
        ("3 sandwich inequalities", sandwich(&report)),
        ("4 properties (i)-(vii)", properties(&report)),
        ("5 oracle agreement", oracle_agreement(&cfg)),
        ("6 reconstruction", reconstruction()),
        ("7 measurement schemes", measurement_schemes()),
        ("8 nonclassicality link", nonclassicality_link(&cfg)),
        ("9 linear response", linear_response(&cfg)),
    ];
    let mut err = std::io::stderr().lock();
    for (name, v) in &results {
        let _ = writeln!(
            err,
            "criterion {name}: {} ({})",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    let _ = writeln!(
        err,
        "acceptance total runtime {:.1} s",
        start.elapsed().as_secs_f64()
    );
    if !report.passed {
        let _ = write!(err, "{}", report.table());
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, v)| !v.passed)
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
