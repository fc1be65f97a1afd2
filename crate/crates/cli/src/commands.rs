use std::fmt::Write as _;

use kd_coherence::coherence::{
    kd_coherence, kd_coherence_povm, kd_coherence_qubit_analytic, l1_coherence, stddev_bound,
};
use kd_coherence::kd::{commutator_imag, kd_table, nonclassicality, reconstruct_state};
use kd_coherence::linalg::{computational_basis, random_mixed_state, random_pure_state};
use kd_coherence::measurement::{
    estimate_kd_coherence, johansen_im_kd, standard_errors, weak_im_kd, Scheme, ShotConfig,
};
use kd_coherence::optimizer::OptimizationReport;
use kd_coherence::response::{probe_search, response_bound, response_function_kd};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    CheckArgs, CoherenceArgs, KdTableArgs, RandomStateArgs, ResponseArgs, SimulateArgs,
};
use crate::error::{CliError, EXIT_OK, EXIT_PROPERTY_FAILURE};
use crate::inputs::{load_basis, load_povm, load_setup, load_state, Loaded};
use crate::manifest::{sha256_hex, RunManifest};
use crate::properties::{run_suite, SuiteConfig};

/// Slack allowed on the response bound.
pub const BOUND_TOL: f64 = 1e-6;
/// Exact-mode reconstructions must match the commutator form this closely.
pub const EXACT_TOL: f64 = 1e-12;

/// JSON for stdout, a summary for stderr, and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub json: Value,
    pub table: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(json: Value, table: String) -> Self {
        Self {
            json,
            table,
            exit_code: EXIT_OK,
        }
    }
}

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn report_line(out: &mut String, r: &OptimizationReport) {
    let _ = writeln!(
        out,
        "optimizer: {}/{} restarts converged, {} evaluations, spread {:.3e}, best restart {}",
        r.converged_restarts, r.restarts_run, r.objective_evals, r.spread, r.best_restart
    );
}

pub fn coherence(args: &CoherenceArgs, verbose: bool) -> Result<Outcome, CliError> {
    let state = load_state(&args.state)?;
    let d = state.value.dim();
    let mut manifest = RunManifest::new("coherence", Some(args.opt.seed), echo(args));
    manifest.input("state", &state.digest);
    let cfg = args.opt.config();
    let mut table = String::new();

    if let Some(path) = &args.povm {
        let povm = load_povm(path)?;
        manifest.input("povm", &povm.digest);
        let result = kd_coherence_povm(&state.value, &povm.value, &cfg)
            .map_err(CliError::core("POVM coherence"))?;
        let _ = writeln!(
            table,
            "KD coherence (POVM, {} elements): {:.12}",
            povm.value.len(),
            result.value
        );
        if verbose {
            report_line(&mut table, &result.report);
        }
        let json = json!({
            "manifest": manifest,
            "mode": "povm",
            "value": result.value,
            "argmax_basis": result.argmax_basis,
            "report": result.report,
        });
        return Ok(Outcome::ok(json, table));
    }

    let basis = match &args.basis {
        Some(b) => load_basis(b, d)?,
        None => Loaded {
            value: computational_basis(d).map_err(CliError::core("computational basis"))?,
            digest: sha256_hex(b"name:computational"),
        },
    };
    manifest.input("basis", &basis.digest);
    let l1 = l1_coherence(&state.value, &basis.value).map_err(CliError::core("l1 coherence"))?;
    let sd = stddev_bound(&state.value, &basis.value).map_err(CliError::core("stddev bound"))?;

    let (mode, value, argmax, report) = if args.qubit_analytic {
        let (value, argmax) = kd_coherence_qubit_analytic(&state.value, &basis.value)
            .map_err(CliError::core("qubit closed form"))?;
        ("qubit-analytic", value, argmax, None)
    } else {
        let r = kd_coherence(&state.value, &basis.value, &cfg)
            .map_err(CliError::core("KD coherence"))?;
        ("optimized", r.value, r.argmax_basis, Some(r.report))
    };
    let _ = writeln!(table, "KD coherence:     {value:.12}");
    let _ = writeln!(table, "l1 coherence:     {l1:.12}");
    let _ = writeln!(table, "stddev bound:     {sd:.12}");
    if let (true, Some(r)) = (verbose, &report) {
        report_line(&mut table, r);
    }
    let json = json!({
        "manifest": manifest,
        "mode": mode,
        "value": value,
        "argmax_basis": argmax,
        "l1_coherence": l1,
        "stddev_bound": sd,
        "report": report,
    });
    Ok(Outcome::ok(json, table))
}

pub fn kd_table_cmd(args: &KdTableArgs) -> Result<Outcome, CliError> {
    let state = load_state(&args.state)?;
    let d = state.value.dim();
    let a = load_basis(&args.basis_a, d)?;
    let b = load_basis(&args.basis_b, d)?;
    let mut manifest = RunManifest::new("kd-table", None, echo(args));
    manifest
        .input("state", &state.digest)
        .input("basis_a", &a.digest)
        .input("basis_b", &b.digest);
    let t = kd_table(&state.value, &a.value, &b.value).map_err(CliError::core("KD table"))?;

    let mut table = String::new();
    for i in 0..d {
        let cells: Vec<String> = (0..d)
            .map(|j| format!("{:+.6}{:+.6}i", t.entry(i, j).re, t.entry(i, j).im))
            .collect();
        let _ = writeln!(table, "{}", cells.join("  "));
    }
    let mut json = json!({ "manifest": manifest, "table": t });
    if args.nonclassicality {
        let n = nonclassicality(&t);
        let _ = writeln!(table, "nonclassicality: {n:.12}");
        json["nonclassicality"] = json!(n);
    }
    if args.reconstruct {
        let back = reconstruct_state(&t).map_err(CliError::core("reconstruction"))?;
        let err = (back.matrix() - state.value.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let _ = writeln!(table, "reconstruction max entry error: {err:.3e}");
        json["reconstruction"] = json!({ "max_entry_error": err });
    }
    Ok(Outcome::ok(json, table))
}

pub fn simulate(args: &SimulateArgs, verbose: bool) -> Result<Outcome, CliError> {
    let scheme = Scheme::from(args.scheme);
    let shots = ShotConfig::new(args.shots, args.opt.seed)
        .and_then(|s| s.with_sigma(args.sigma))
        .map_err(CliError::core("shot settings"))?;
    let state = load_state(&args.state)?;
    let d = state.value.dim();
    let a = load_basis(&args.basis_a, d)?;
    let mut manifest = RunManifest::new("simulate", Some(args.opt.seed), echo(args));
    manifest
        .input("state", &state.digest)
        .input("basis_a", &a.digest);
    let mut table = String::new();
    let mut json = json!({
        "scheme": scheme,
        "shots": args.shots,
        "seed": args.opt.seed,
        "sigma": args.sigma,
        "exact": args.exact,
    });

    if let Some(name) = &args.basis_b {
        let b = load_basis(name, d)?;
        manifest.input("basis_b", &b.digest);
        let im = match scheme {
            Scheme::Johansen => {
                johansen_im_kd(&state.value, &a.value, &b.value, args.exact, &shots)
            }
            Scheme::Weak => weak_im_kd(&state.value, &a.value, &b.value, args.exact, &shots),
        }
        .map_err(CliError::core("simulated table"))?;
        let reference = commutator_imag(&state.value, &a.value, &b.value)
            .map_err(CliError::core("exact table"))?;
        let envelope = if args.exact {
            DMatrix::from_element(d, d, EXACT_TOL)
        } else {
            standard_errors(scheme, &state.value, &a.value, &b.value, &shots)
                .map_err(CliError::core("standard errors"))?
                * 3.0
        };
        let deviation = (&im - &reference).abs();
        let within = deviation.iter().zip(envelope.iter()).all(|(x, e)| x <= e);
        for i in 0..d {
            let cells: Vec<String> = (0..d)
                .map(|j| {
                    format!(
                        "{:+.6} (exact {:+.6}, ±{:.1e})",
                        im[(i, j)],
                        reference[(i, j)],
                        envelope[(i, j)]
                    )
                })
                .collect();
            let _ = writeln!(table, "{}", cells.join("  "));
        }
        let _ = writeln!(table, "within envelope: {within}");
        json["table"] = json!({
            "im": rows(&im),
            "exact_im": rows(&reference),
            "envelope": rows(&envelope),
            "envelope_sigmas": if args.exact { 0.0 } else { 3.0 },
            "max_deviation": deviation.max(),
            "within_envelope": within,
        });
    }

    let estimate = estimate_kd_coherence(
        &state.value,
        &a.value,
        scheme,
        args.exact,
        &shots,
        &args.opt.config(),
    )
    .map_err(CliError::core("coherence estimate"))?;
    let _ = writeln!(table, "estimated KD coherence: {:.12}", estimate.value);
    if let Some(total) = estimate.report.total_shots {
        let _ = writeln!(table, "total simulated shots: {total}");
    }
    if verbose {
        report_line(&mut table, &estimate.report);
    }
    json["estimate"] = serde_json::to_value(&estimate).unwrap_or(Value::Null);
    json["manifest"] = serde_json::to_value(&manifest).unwrap_or(Value::Null);
    Ok(Outcome::ok(json, table))
}

pub fn response(args: &ResponseArgs, verbose: bool) -> Result<Outcome, CliError> {
    let setup = load_setup(&args.setup)?;
    let mut manifest = RunManifest::new("response", Some(args.opt.seed), echo(args));
    manifest.input("setup", &setup.digest);
    let bound = response_bound(&setup.value, args.tprime, args.t, &args.opt.config())
        .map_err(CliError::core("response bound"))?;
    let phi_kd = response_function_kd(&setup.value, args.tprime, args.t)
        .map_err(CliError::core("KD response"))?;
    let satisfied = bound.lhs <= bound.rhs + BOUND_TOL;

    let mut table = String::new();
    let _ = writeln!(table, "phi (commutator): {:.12}", bound.phi);
    let _ = writeln!(table, "phi (KD table):   {phi_kd:.12}");
    let _ = writeln!(
        table,
        "|phi| = {:.12} <= {:.12}: {satisfied}",
        bound.lhs, bound.rhs
    );
    if verbose {
        report_line(&mut table, &bound.coherence.report);
    }
    let mut json = json!({
        "manifest": manifest,
        "phi": bound.phi,
        "phi_kd": phi_kd,
        "bound": {
            "lhs": bound.lhs,
            "rhs": bound.rhs,
            "kd_coherence": bound.coherence.value,
            "satisfied": satisfied,
        },
    });
    if args.probe_samples > 0 {
        let best = probe_search(
            &setup.value,
            args.tprime,
            args.t,
            args.probe_samples,
            args.opt.seed,
        )
        .map_err(CliError::core("probe search"))?;
        let _ = writeln!(
            table,
            "largest |phi| over {} random probes: {best:.12}",
            args.probe_samples
        );
        json["probe_max"] = json!(best);
    }
    let exit_code = if satisfied {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILURE
    };
    Ok(Outcome {
        json,
        table,
        exit_code,
    })
}

pub fn check_properties(args: &CheckArgs) -> Result<Outcome, CliError> {
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cfg = SuiteConfig {
        dims: args.dims.clone(),
        instances: args.instances,
        seed: args.seed,
        optimizer: kd_coherence::optimizer::OptimizerConfig::default()
            .with_restarts(args.restarts)
            .with_max_iters(args.max_iters),
        threads,
        fault: args.inject_fault.map(Into::into),
    };
    let report = run_suite(&cfg)?;
    let manifest = RunManifest::new("check-properties", Some(args.seed), echo(args));
    if let Some(path) = &args.report {
        let full = json!({ "manifest": manifest, "report": report });
        let text =
            serde_json::to_string_pretty(&full).map_err(|e| CliError::Invalid(e.to_string()))?;
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    let json =
        json!({ "manifest": manifest, "passed": report.passed, "summaries": report.summaries });
    let exit_code = if report.passed {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILURE
    };
    Ok(Outcome {
        json,
        table: report.table(),
        exit_code,
    })
}

pub fn random_state(args: &RandomStateArgs) -> Result<Outcome, CliError> {
    let state = if args.pure {
        random_pure_state(args.dim, args.seed)
    } else {
        random_mixed_state(args.dim, args.seed)
    }
    .map_err(CliError::core("random state"))?;
    let manifest = RunManifest::new("random-state", Some(args.seed), echo(args));
    let mut json = serde_json::to_value(&state).map_err(|e| CliError::Invalid(e.to_string()))?;
    json["manifest"] = serde_json::to_value(&manifest).unwrap_or(Value::Null);
    let table = format!(
        "random {} state, d = {}, purity {:.6}\n",
        if args.pure { "pure" } else { "mixed" },
        args.dim,
        state.purity()
    );
    Ok(Outcome::ok(json, table))
}
