//! Subcommand bodies. Each returns the paths it wrote.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use xqr::data::{
    generate_linear_synthetic, load_csv, save_results_json, standardize, write_csv, write_table_csv,
    BootstrapPlan, RawTable, ResultsDocument, StandardizedTable, SyntheticSpec,
};
use xqr::encoding::{prepare_exact, Scheme};
use xqr::measurement::{
    exact_expectation, noisy_mean_compact, noisy_mean_one_hot, shadow_x_string_estimate, shot_estimate_compact,
    shot_estimate_one_hot, ShadowConfig,
};
use xqr::regression::{apply_regression_map, regression_pre_projection, PhaseVector};
use xqr::resources::{self, GateModel, ResourceScheme};
use xqr::rng::{derive_seed, Stream};
use xqr::trainer::{
    fit, fit_ensemble, fit_nonlinear_sin_demo, rescale_cosines, CostBackend, EnsembleOptions, RegularizationParams,
    SinDemoConfig, StandardErrorMode, TrainConfig,
};

use crate::args::{
    BackendArg, EnsembleArgs, FitArgs, GateModelArg, GenerateArgs, NoiseSweepArgs, ResourcesArgs, ShadowStudyArgs,
    SinDemoArgs, TableArgs, TrainArgs,
};
use crate::CliError;

pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// Set when an optimizer stopped before meeting its tolerance.
    pub not_converged: Option<String>,
}

impl Outcome {
    fn done(written: Vec<PathBuf>) -> Self {
        Self {
            written,
            not_converged: None,
        }
    }
}

fn echo(command: &str, args: &impl serde::Serialize, extra: Value) -> Result<Value, CliError> {
    Ok(json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": serde_json::to_value(args).map_err(xqr::Error::from)?,
        "resolved": extra,
    }))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| {
        xqr::Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn train_config(args: &TrainArgs) -> TrainConfig {
    let backend = match args.backend {
        BackendArg::Analytic => CostBackend::Analytic,
        BackendArg::OneHot => CostBackend::CircuitExact { scheme: Scheme::OneHot },
        BackendArg::Compact => CostBackend::CircuitExact {
            scheme: Scheme::CompactBinary,
        },
        BackendArg::ShotsOneHot => CostBackend::Shots {
            scheme: Scheme::OneHot,
            shots: args.shots,
            readout_delta: args.readout_delta,
        },
        BackendArg::ShotsCompact => CostBackend::Shots {
            scheme: Scheme::CompactBinary,
            shots: args.shots,
            readout_delta: args.readout_delta,
        },
    };
    TrainConfig {
        backend,
        max_restarts: args.max_restarts,
        nm_tolerance_f: args.tol_f,
        seed: args.seed,
        ..TrainConfig::default()
    }
}

fn regularization(args: &TrainArgs) -> Result<RegularizationParams, CliError> {
    if args.l1 < 0.0 || args.l2 < 0.0 || !args.l1.is_finite() || !args.l2.is_finite() {
        return Err(CliError::Usage("--l1 and --l2 must be finite and non-negative".into()));
    }
    Ok(RegularizationParams {
        alpha_l1: args.l1,
        beta_l2: args.l2,
    })
}

pub fn generate(args: &GenerateArgs, out: &Path) -> Result<Outcome, CliError> {
    if args.weights.len() != args.features {
        return Err(CliError::Usage(format!(
            "--weights has {} values for {} features",
            args.weights.len(),
            args.features
        )));
    }
    let spec = SyntheticSpec {
        rows: args.rows,
        features: args.features,
        true_weights: args.weights.clone(),
        noise_std: args.noise,
        seed: args.seed,
    };
    let table = generate_linear_synthetic(&spec)?;
    let csv_path = out.join(&args.name);
    write_table_csv(&csv_path, &table)?;
    let json_path = csv_path.with_extension("json");
    let doc = ResultsDocument {
        weights: args.weights.clone(),
        standard_errors: None,
        t_stats: None,
        cost: None,
        r_squared: None,
        config_echo: echo("generate", args, json!({ "synthetic": spec }))?,
        details: Some(json!({ "rows": table.rows(), "columns": table.names() })),
    };
    save_results_json(&json_path, &doc)?;
    Ok(Outcome::done(vec![csv_path, json_path]))
}

pub fn fit_table(args: &FitArgs, out: &Path) -> Result<Outcome, CliError> {
    let raw = load_csv(&args.input)?;
    let std = standardize(&raw, !args.train.no_equalize)?;
    let reg = regularization(&args.train)?;
    let config = train_config(&args.train);
    let result = fit(&std, &reg, &config)?;
    let weights = std.to_original_weights(&result.weights);

    let json_path = out.join("fit.json");
    let doc = ResultsDocument {
        weights: weights.clone(),
        standard_errors: None,
        t_stats: None,
        cost: Some(result.cost),
        r_squared: Some(result.r_squared),
        config_echo: echo("fit", args, json!({ "train": config, "regularization": reg }))?,
        details: Some(json!({
            "standardized_weights": result.weights,
            "phases": result.phases.cosines().iter().map(|c| c.acos()).collect::<Vec<_>>(),
            "phase_scale": result.phase_scale,
            "objective": result.objective,
            "restarts_used": result.restarts_used,
            "iterations": result.iterations,
            "converged": result.converged,
            "column_means": std.column_means,
            "column_scales": std.column_scales,
        })),
    };
    save_results_json(&json_path, &doc)?;

    let csv_path = out.join("fit_weights.csv");
    write_csv(
        &csv_path,
        &["feature", "weight", "standardized_weight"],
        weights
            .iter()
            .zip(&result.weights)
            .enumerate()
            .map(|(i, (w, s))| vec![(i + 1) as f64, *w, *s]),
    )?;

    Ok(Outcome {
        written: vec![json_path, csv_path],
        not_converged: (!result.converged)
            .then(|| format!("fit stopped after {} restarts without meeting tolerance", result.restarts_used)),
    })
}

pub fn ensemble(args: &EnsembleArgs, out: &Path) -> Result<Outcome, CliError> {
    let raw = load_csv(&args.input)?;
    let reg = regularization(&args.train)?;
    let config = train_config(&args.train);
    let plan = BootstrapPlan {
        num_batches: args.batches,
        batch_size: args.batch_size,
        seed: args.bootstrap_seed,
    };
    let options = EnsembleOptions {
        equalize_columns: !args.train.no_equalize,
        standard_error: if args.mean_error {
            StandardErrorMode::MeanError
        } else {
            StandardErrorMode::BatchSpread
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", args.jobs)))?;
    let result = pool.install(|| fit_ensemble(&raw, &plan, &reg, &config, &options))?;

    let json_path = out.join("ensemble.json");
    let doc = ResultsDocument {
        weights: result.mean_weights.clone(),
        standard_errors: result
            .std_errors
            .as_ref()
            .map(|se| se.iter().map(|v| Some(*v)).collect()),
        t_stats: result.t_stats.clone(),
        cost: None,
        r_squared: None,
        config_echo: echo(
            "ensemble",
            args,
            json!({ "train": config, "regularization": reg, "bootstrap": plan, "options": options }),
        )?,
        details: Some(json!({
            "batch_size": result.batch_size,
            "num_batches": result.num_batches,
            "failed_batches": result.failed_batches,
        })),
    };
    save_results_json(&json_path, &doc)?;

    let csv_path = out.join("ensemble_batches.csv");
    let mut header = vec!["batch".to_string()];
    header.extend((1..=raw.features()).map(|i| format!("w{i}")));
    write_csv(
        &csv_path,
        &header,
        result.per_batch_weights.iter().enumerate().map(|(b, w)| {
            let mut row = vec![b as f64];
            row.extend_from_slice(w);
            row
        }),
    )?;

    let failed = result.failed_batches.len();
    Ok(Outcome {
        written: vec![json_path, csv_path],
        not_converged: (failed > 0).then(|| format!("{failed} of {} batches failed to fit", result.num_batches)),
    })
}

pub fn sin_demo(args: &SinDemoArgs, out: &Path) -> Result<Outcome, CliError> {
    let config = SinDemoConfig {
        rows: args.rows,
        max_power: args.max_power,
        alpha_l1: args.alpha,
        initial_magnitude: args.initial_magnitude,
        grid_points: args.grid_points,
        seed: args.seed,
        ..SinDemoConfig::default()
    };
    let result = fit_nonlinear_sin_demo(&config)?;

    let json_path = out.join("sin_demo.json");
    let doc = ResultsDocument {
        weights: result.weights.clone(),
        standard_errors: None,
        t_stats: None,
        cost: Some(result.fit.cost),
        r_squared: Some(result.fit.r_squared),
        config_echo: echo("sin-demo", args, json!({ "demo": config }))?,
        details: Some(json!({
            "intercept": result.intercept,
            "standardized_weights": result.fit.weights,
            "max_abs_error": result.max_abs_error,
            "objective": result.fit.objective,
            "restarts_used": result.fit.restarts_used,
            "converged": result.fit.converged,
        })),
    };
    save_results_json(&json_path, &doc)?;

    let csv_path = out.join("sin_demo_curve.csv");
    write_csv(&csv_path, &["x", "prediction", "sin_x"], result.curve.iter().map(|p| p.to_vec()))?;

    Ok(Outcome {
        written: vec![json_path, csv_path],
        not_converged: (!result.fit.converged).then(|| "sin fit did not meet its tolerance".to_string()),
    })
}

/// Standardized table and phases for the circuit studies.
struct StudyInput {
    std: StandardizedTable,
    phases: PhaseVector,
    /// Common factor applied to the cosines to keep them in `[-1, 1]`.
    phase_scale: f64,
}

fn study_input(table: &TableArgs, seed: u64) -> Result<StudyInput, CliError> {
    let raw = match &table.input {
        Some(path) => load_csv(path)?,
        None => {
            if table.rows == 0 || table.features == 0 {
                return Err(CliError::Usage("--rows and --features must be positive".into()));
            }
            let mut rng = Stream::new(seed);
            let values = (0..table.rows * (table.features + 1))
                .map(|_| rng.uniform_in(-1.0, 1.0))
                .collect();
            RawTable::new(table.rows, table.features, values)?
        }
    };
    let std = standardize(&raw, true)?;
    let weights = table.weights.clone().unwrap_or_else(|| vec![0.0; std.features()]);
    if weights.len() != std.features() {
        return Err(CliError::Usage(format!(
            "--weights has {} values for {} features",
            weights.len(),
            std.features()
        )));
    }
    let mut cosines = vec![-1.0];
    cosines.extend(weights);
    let (scaled, phase_scale) = rescale_cosines(&cosines);
    Ok(StudyInput {
        phases: PhaseVector::from_cosines(&scaled)?,
        std,
        phase_scale,
    })
}

pub fn noise_sweep(args: &NoiseSweepArgs, out: &Path) -> Result<Outcome, CliError> {
    if let Some(d) = args.deltas.iter().find(|d| !(0.0..=0.5).contains(*d)) {
        return Err(CliError::Usage(format!("readout error {d} is outside [0, 0.5]")));
    }
    let input = study_input(&args.table, args.seed)?;
    let mut schemes = Vec::new();
    let mut rows: Vec<Vec<f64>> = args.deltas.iter().map(|d| vec![*d]).collect();
    for (index, (name, scheme)) in [("one_hot", Scheme::OneHot), ("compact", Scheme::CompactBinary)]
        .into_iter()
        .enumerate()
    {
        let prep = prepare_exact(&input.std, scheme)?;
        let pre = regression_pre_projection(&prep, &input.phases)?;
        let (psi0, _) = apply_regression_map(&prep, &input.phases)?;
        let ideal = exact_expectation(&psi0, &prep.layout)?;
        let measured = match scheme {
            Scheme::OneHot => prep.layout.data_qubits() + 1,
            _ => prep.layout.n_k() + 1,
        };
        let mut points = Vec::new();
        for (i, delta) in args.deltas.iter().enumerate() {
            let seed = derive_seed(args.seed, (index * args.deltas.len() + i) as u64);
            let (exact, est) = match scheme {
                Scheme::OneHot => (
                    noisy_mean_one_hot(&pre, &prep.layout, *delta)?,
                    shot_estimate_one_hot(&pre, &prep.layout, args.shots, *delta, seed)?,
                ),
                _ => (
                    noisy_mean_compact(&pre, &prep.layout, *delta)?,
                    shot_estimate_compact(&pre, &prep.layout, args.shots, *delta, seed)?,
                ),
            };
            let law = (1.0 - measured as f64 * delta) * ideal;
            rows[i].extend([exact, est.value, est.std_error, law]);
            points.push(json!({
                "delta": delta,
                "noisy_mean": exact,
                "shot_estimate": est.value,
                "std_error": est.std_error,
                "first_order_law": law,
            }));
        }
        schemes.push(json!({
            "scheme": name,
            "measured_qubits": measured,
            "noise_free_cost": ideal,
            "points": points,
        }));
    }

    let json_path = out.join("noise_sweep.json");
    let doc = ResultsDocument {
        weights: Vec::new(),
        standard_errors: None,
        t_stats: None,
        cost: None,
        r_squared: None,
        config_echo: echo(
            "noise-sweep",
            args,
            json!({ "rows": input.std.rows(), "features": input.std.features(), "phase_scale": input.phase_scale }),
        )?,
        details: Some(json!({ "schemes": schemes })),
    };
    save_results_json(&json_path, &doc)?;

    let csv_path = out.join("noise_sweep.csv");
    let mut header = vec!["delta".to_string()];
    for name in ["one_hot", "compact"] {
        for col in ["noisy_mean", "shot_estimate", "std_error", "first_order_law"] {
            header.push(format!("{name}_{col}"));
        }
    }
    write_csv(&csv_path, &header, rows)?;
    Ok(Outcome::done(vec![json_path, csv_path]))
}

pub fn shadow_study(args: &ShadowStudyArgs, out: &Path) -> Result<Outcome, CliError> {
    let positive = |v: f64| v > 0.0;
    if !positive(args.epsilon) || !positive(args.constant) || args.replications == 0 {
        return Err(CliError::Usage(
            "--epsilon and --constant must be positive and --replications non-zero".into(),
        ));
    }
    let input = study_input(&args.table, args.seed)?;
    let prep = prepare_exact(&input.std, Scheme::CompactBinary)?;
    let (psi0, _) = apply_regression_map(&prep, &input.phases)?;
    let state = psi0.normalized()?;
    let exact = exact_expectation(&state, &prep.layout)?;
    let cols: Vec<_> = prep.layout.column_qubits().collect();
    let locality = cols.len();

    let mut runs = Vec::with_capacity(args.replications);
    let mut snapshots = 0;
    for r in 0..args.replications {
        let config = ShadowConfig::for_accuracy(locality, args.epsilon, args.constant, derive_seed(args.seed, r as u64));
        snapshots = config.snapshots;
        let (value, se) = shadow_x_string_estimate(&state, &cols, &config)?;
        runs.push(vec![r as f64, value, se, (value - exact).abs()]);
    }
    let covered = runs.iter().filter(|r| r[3] <= args.epsilon).count();
    let snapshot_variance =
        runs.iter().map(|r| r[2] * r[2] * snapshots as f64).sum::<f64>() / args.replications as f64;

    let json_path = out.join("shadow_study.json");
    let doc = ResultsDocument {
        weights: Vec::new(),
        standard_errors: None,
        t_stats: None,
        cost: Some(exact),
        r_squared: None,
        config_echo: echo(
            "shadow-study",
            args,
            json!({ "locality": locality, "snapshots": snapshots, "phase_scale": input.phase_scale }),
        )?,
        details: Some(json!({
            "normalized_exact_cost": exact,
            "covered": covered,
            "replications": args.replications,
            "coverage": covered as f64 / args.replications as f64,
            "snapshot_variance": snapshot_variance,
            "shadow_norm_bound": 4f64.powi(locality as i32),
        })),
    };
    save_results_json(&json_path, &doc)?;

    let csv_path = out.join("shadow_study.csv");
    write_csv(&csv_path, &["replication", "estimate", "std_error", "abs_error"], runs)?;
    Ok(Outcome::done(vec![json_path, csv_path]))
}

fn gate_models(arg: GateModelArg) -> Vec<GateModel> {
    match arg {
        GateModelArg::Local => vec![GateModel::LocalDigital],
        GateModelArg::Global => vec![GateModel::GlobalAnalog],
        GateModelArg::Compiled => vec![GateModel::CompiledOptimized],
        GateModelArg::All => vec![GateModel::LocalDigital, GateModel::GlobalAnalog, GateModel::CompiledOptimized],
    }
}

pub fn resources(args: &ResourcesArgs, out: &Path) -> Result<Outcome, CliError> {
    let models = gate_models(args.gate_model);
    let schemes = [
        ResourceScheme::OneHot,
        ResourceScheme::CompactWithMemory,
        ResourceScheme::CompactMemoryFree,
    ];
    let mut table = String::from(
        "rows,features,bits,scheme,gate_model,qubits,state_prep_gates,regression_map_gates,total_gates,shot_cost\n",
    );
    let mut estimates = Vec::new();
    let mut ratios = Vec::new();
    for &features in &args.features {
        for &rows in &args.rows {
            for &model in &models {
                for scheme in schemes {
                    let e = resources::estimate(rows, features, args.bits, scheme, model)?;
                    writeln!(
                        table,
                        "{},{},{},{:?},{:?},{},{},{},{},{}",
                        e.rows,
                        e.features,
                        e.bits,
                        e.scheme,
                        e.gate_model,
                        e.qubit_count,
                        e.state_prep_gates,
                        e.regression_map_gates,
                        e.total_gates,
                        e.shot_cost
                    )
                    .expect("writing to a String");
                    estimates.push(e);
                }
                ratios.push((rows, features, model, resources::shot_cost_ratio(rows, features, model)?));
            }
        }
    }

    let mut fits = Vec::new();
    for &features in &args.features {
        for &model in &models {
            let (xs, ys): (Vec<f64>, Vec<f64>) = ratios
                .iter()
                .filter(|r| r.1 == features && r.2 == model)
                .map(|r| ((r.0 * r.1) as f64, r.3))
                .unzip();
            if xs.len() >= 2 {
                if let Ok(f) = resources::fit_log2(&xs, &ys) {
                    fits.push(json!({ "features": features, "gate_model": model, "fit": f }));
                }
            }
        }
    }
    let classical: Vec<Value> = args
        .features
        .iter()
        .flat_map(|&m| args.rows.iter().map(move |&l| (l, m)))
        .map(|(l, m)| Ok(json!({ "rows": l, "features": m, "cost": resources::classical_reference_cost(l, m)? })))
        .collect::<Result<_, xqr::Error>>()?;

    let json_path = out.join("resources.json");
    let doc = ResultsDocument {
        weights: Vec::new(),
        standard_errors: None,
        t_stats: None,
        cost: None,
        r_squared: None,
        config_echo: echo("resources", args, json!({ "gate_models": models }))?,
        details: Some(json!({
            "estimates": estimates,
            "shot_cost_ratio_log_fits": fits,
            "classical_reference": classical,
        })),
    };
    save_results_json(&json_path, &doc)?;

    let csv_path = out.join("resources.csv");
    write_text(&csv_path, &table)?;

    let mut ratio_csv = String::from("rows,features,gate_model,compact_over_one_hot\n");
    for (l, m, model, r) in &ratios {
        writeln!(ratio_csv, "{l},{m},{model:?},{r}").expect("writing to a String");
    }
    let ratio_path = out.join("resources_ratio.csv");
    write_text(&ratio_path, &ratio_csv)?;
    Ok(Outcome::done(vec![json_path, csv_path, ratio_path]))
}
