//! One function per pipeline: load inputs, run, fill a report.

use serde_json::{json, Value};

use blockenc::algorithms::{self, FitProblem, GradientConfig, Hamiltonian, OdeSpec, PowerMethodConfig, SolveConfig, SolvePath};
use blockenc::cost::{self, Params};
use blockenc::encoding::extract_block;
use blockenc::linalg::{self, CMatrix, CVector};
use blockenc::oracles::OracleAccess;
use blockenc::report::{complex_value, matrix_value, vector_value, ExperimentReport, SymbolicCost};
use blockenc::state_prep::{self, ColumnOptions, Dataset, FrobeniusHandling};
use blockenc::{BlockEncoding, Warning};

use crate::config::{load_matrix, load_vector, required, CliError, CliResult, ExperimentConfig, Normalize, Pipeline};

pub struct Run {
    pub report: ExperimentReport,
    /// Replaces the flattened report when CSV is requested.
    pub csv: Option<String>,
}

pub fn dispatch(cfg: &ExperimentConfig) -> CliResult<Run> {
    let mut report = ExperimentReport::new(&cfg.pipeline.to_string(), serde_json::to_value(cfg).expect("configs serialize"));
    let mut oracle = OracleAccess::from_env();
    let mut csv = None;
    match cfg.pipeline {
        Pipeline::PcaPower => pca_power(cfg, &mut report, &mut oracle)?,
        Pipeline::PcaGd => pca_gd(cfg, &mut report, &mut oracle)?,
        Pipeline::Solve => solve(cfg, &mut report, &mut oracle)?,
        Pipeline::SimulateDirect => simulate_direct(cfg, &mut report, &mut oracle)?,
        Pipeline::SimulateOde => simulate_ode(cfg, &mut report, &mut oracle)?,
        Pipeline::GroundState => ground_state(cfg, &mut report, &mut oracle)?,
        Pipeline::Energies => energies(cfg, &mut report, &mut oracle)?,
        Pipeline::Fit => fit(cfg, &mut report, &mut oracle)?,
        Pipeline::Costs => csv = Some(costs(cfg, &mut report)?),
    }
    report.oracle_reads = oracle.into_reads();
    if let Some(v) = report.invariant_violations().first() {
        return Err(CliError::Numeric(blockenc::Error::InvalidParameter(format!("report invariant: {v}"))));
    }
    Ok(Run { report, csv })
}

/// Appends the registry formula under `citation` when every symbol is bound.
fn symbolic(report: &mut ExperimentReport, citation: &str, params: &Params) {
    let Some(f) = cost::registry().remove(citation) else {
        return;
    };
    if let Ok(value) = cost::evaluate(&f, params) {
        report.symbolic.push(SymbolicCost {
            name: f.name.clone(),
            expression: f.expression.to_string(),
            value,
        });
    }
}

fn max_row_nonzeros(a: &CMatrix) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().filter(|z| z.norm() != 0.0).count())
        .max()
        .unwrap_or(0)
        .max(1) as f64
}

fn normalized(a: CMatrix, how: Option<Normalize>, what: &str, warnings: &mut Vec<Warning>) -> CliResult<CMatrix> {
    let scale = match how {
        None => return Ok(a),
        Some(Normalize::Frobenius) => linalg::frobenius(&a),
        Some(Normalize::Operator) => linalg::op_norm(&a),
    };
    if scale == 0.0 {
        return Err(blockenc::Error::ZeroMatrix.into());
    }
    warnings.push(Warning::Rescaled {
        what: what.into(),
        factor: 1.0 / scale,
    });
    Ok(a.unscale(scale))
}

struct PcaInput {
    enc: BlockEncoding,
    /// Multiplies eigenvalues of the encoded operator back to the input's.
    to_input: f64,
    rows: usize,
    normf: f64,
}

fn pca_input(cfg: &ExperimentConfig, eps: f64, warnings: &mut Vec<Warning>) -> CliResult<PcaInput> {
    if let Some(path) = &cfg.dataset {
        let x = normalized(load_matrix(path)?, cfg.normalize()?, "dataset", warnings)?;
        let (ds, factor) = Dataset::new(x).frobenius_normalized()?;
        if (factor - 1.0).abs() > 1e-12 {
            warnings.push(Warning::Rescaled {
                what: "dataset".into(),
                factor,
            });
        }
        let rows = ds.samples.nrows();
        let enc = state_prep::build_covariance(&ds)?;
        return Ok(PcaInput {
            enc,
            to_input: 2.0 / (factor * factor),
            rows,
            normf: 1.0,
        });
    }
    let a = normalized(load_matrix(required(&cfg.matrix, "matrix", cfg.pipeline)?)?, cfg.normalize()?, "matrix", warnings)?;
    let opts = ColumnOptions {
        frobenius: FrobeniusHandling::Remove,
        eps,
        partition_hint: cfg.partition_hint()?,
        ..ColumnOptions::default()
    };
    let enc = state_prep::encode_from_columns(&a, &opts)?;
    Ok(PcaInput {
        rows: a.nrows(),
        normf: enc.frobenius,
        enc: enc.encoding,
        to_input: 1.0,
    })
}

/// Smallest of the first `r` consecutive gaps of the encoded spectrum.
fn measured_gap(enc: &BlockEncoding, r: usize, oracle: &mut OracleAccess) -> CliResult<f64> {
    let op = linalg::hermitize(&extract_block(enc))?;
    let (mut vals, _) = oracle.eig(&op, "spectral gap, treated as known")?;
    vals.reverse();
    let gap = (0..r.min(vals.len()))
        .map(|i| vals[i] - vals.get(i + 1).copied().unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    Ok(gap)
}

fn pca_power(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-3)?;
    let r = cfg.count("r")?.unwrap_or(1);
    let mut warnings = Vec::new();
    let input = pca_input(cfg, eps, &mut warnings)?;
    let n = input.enc.dims().0;
    let delta = match cfg.number("Delta")? {
        Some(d) => d,
        None => measured_gap(&input.enc, r, oracle)?,
    };
    let pc = PowerMethodConfig {
        k_override: cfg.count("k")?,
        ..PowerMethodConfig::new(delta, eps, r, cfg.seed()?)
    };
    let out = algorithms::pca_power_top_r(&input.enc, &pc, oracle)?;
    let levels: Vec<Value> = out
        .levels
        .iter()
        .map(|l| {
            json!({
                "eigenvalue": l.eigenvalue,
                "input_eigenvalue": l.eigenvalue * input.to_input,
                "eigenvector": vector_value(&l.eigenvector),
                "iterations": l.iterations,
                "start_overlap": l.start_overlap,
                "log_success_probability": l.log_success_probability,
                "boost": l.boost,
            })
        })
        .collect();
    report.result = json!({
        "levels": levels,
        "Delta": delta,
        "swap_test_repetitions": out.swap_test_repetitions,
    });
    for (i, l) in out.levels.iter().enumerate() {
        report.delta(&format!("level{}.eigenvalue_error", i + 1), l.eigenvalue_error);
        report.delta(&format!("level{}.overlap", i + 1), l.overlap);
    }
    report.ledger = out.cost;
    let gamma = out.levels.iter().map(|l| l.start_overlap).fold(1.0, f64::min);
    symbolic(
        report,
        "result:pca-power",
        &cost::params(&[
            ("m", input.rows as f64),
            ("n", n as f64),
            ("normF", input.normf),
            ("eps", eps),
            ("Delta", delta),
            ("gamma", gamma),
            ("r", r as f64),
        ]),
    );
    symbolic(report, "lemma:power-iterations", &cost::params(&[("n", n as f64), ("eps", eps), ("Delta", delta)]));
    warnings.extend(out.warnings);
    report.warnings = warnings;
    Ok(())
}

fn pca_gd(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-3)?;
    let mut warnings = Vec::new();
    let input = pca_input(cfg, eps, &mut warnings)?;
    let gc = GradientConfig {
        eta: cfg.number_or("eta", 0.4)?,
        steps: cfg.count("T")?,
        eps,
        seed: cfg.seed()?,
    };
    let out = algorithms::pca_gradient_descent(&input.enc, &gc, oracle)?;
    report.result = json!({
        "eigenvalue": out.eigenvalue,
        "input_eigenvalue": out.eigenvalue * input.to_input,
        "eigenvector": vector_value(&out.eigenvector),
        "steps": out.steps,
        "ratio": out.ratio,
        "residuals": out.residuals,
    });
    report.delta("overlap", out.overlap);
    report.delta("residual", out.residuals.last().copied().unwrap_or(0.0));
    report.ledger = out.cost;
    symbolic(
        report,
        "table:pca-gd/gradient",
        &cost::params(&[("m", input.rows as f64), ("n", input.enc.dims().0 as f64), ("eps", eps)]),
    );
    warnings.extend(out.warnings);
    report.warnings = warnings;
    Ok(())
}

fn solve(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-6)?;
    let mut warnings = Vec::new();
    let a = normalized(load_matrix(required(&cfg.matrix, "matrix", cfg.pipeline)?)?, cfg.normalize()?, "matrix", &mut warnings)?;
    let b = load_vector(required(&cfg.vector, "vector", cfg.pipeline)?)?;
    let path: SolvePath = match cfg.text("path")? {
        None => SolvePath::Auto,
        Some(s) => serde_json::from_value(Value::String(s.clone()))
            .map_err(|_| CliError::Validation(format!("unknown solver path `{s}`")))?,
    };
    let sc = SolveConfig {
        eps,
        path,
        kappa_max: cfg.number_or("kappa", SolveConfig::default().kappa_max)?,
    };
    let out = algorithms::linear_solve(&a, &b, &sc, oracle)?;
    report.result = json!({
        "solution": vector_value(&out.solution),
        "path": out.path,
        "kappa": out.kappa,
        "success_probability": out.success_probability,
        "predicted_success": out.predicted_success,
        "encoding_error_bound": out.encoding_error,
    });
    report.delta("fidelity", out.fidelity);
    report.delta("residual", out.residual);
    report.ledger = out.cost;
    let p = cost::params(&[
        ("normF", linalg::frobenius(&a)),
        ("kappa", out.kappa),
        ("s", max_row_nonzeros(&a)),
        ("n", a.nrows() as f64),
        ("eps", eps),
    ]);
    symbolic(report, "table:solver/ours", &p);
    symbolic(report, "table:solver/harrow2009", &p);
    report.warnings = warnings;
    Ok(())
}

fn simulate_direct(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-6)?;
    let t = cfg.number_or("t", 1.0)?;
    let h = load_matrix(required(&cfg.matrix, "matrix", cfg.pipeline)?)?;
    let out = algorithms::simulate_direct(&h, t, eps, oracle)?;
    report.result = json!({
        "unitary": matrix_value(&extract_block(&out.unitary)),
        "degree": out.degree,
        "sup_error": out.sup_error,
        "rescale": out.rescale,
        "effective_time": out.effective_time,
    });
    report.delta("operator_error", out.oracle_error);
    report.ledger = out.unitary.cost().clone();
    if t > 0.0 {
        symbolic(
            report,
            "result:simulation",
            &cost::params(&[
                ("s", max_row_nonzeros(&h)),
                ("n", h.nrows() as f64),
                ("eps", eps),
                ("t", out.effective_time),
                ("normF", linalg::frobenius(&h) / out.rescale),
            ]),
        );
    }
    report.warnings = out.warnings;
    Ok(())
}

fn simulate_ode(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-2)?;
    let h = load_matrix(required(&cfg.matrix, "matrix", cfg.pipeline)?)?;
    let psi0 = match &cfg.vector {
        Some(p) => load_vector(p)?,
        None => {
            let mut e0 = CVector::zeros(h.nrows());
            if h.nrows() > 0 {
                e0[0] = linalg::c(1.0);
            }
            e0
        }
    };
    let spec = OdeSpec {
        hamiltonian: Hamiltonian::Constant(h),
        psi0,
        t: cfg.number_or("t", 1.0)?,
        order_k: cfg.count("K")?.unwrap_or(1),
        steps: cfg.count("N")?,
    };
    let out = algorithms::simulate_via_linear_solve(&spec, eps, oracle)?;
    let min_fid = out.fidelities.iter().copied().fold(1.0, f64::min);
    report.result = json!({
        "final_state": vector_value(out.states.last().expect("the initial state is always present")),
        "steps": out.steps,
        "dt": out.dt,
        "kappa": out.kappa,
        "success_probability": out.success_probability,
        "step_fidelities": out.fidelities,
    });
    report.delta("min_step_fidelity", min_fid);
    report.delta("final_fidelity", out.fidelities.last().copied().unwrap_or(1.0));
    report.delta("solve_fidelity", out.solve_fidelity);
    report.ledger = out.cost;
    report.warnings = out.warnings;
    Ok(())
}

fn ground_state(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-3)?;
    let mut warnings = Vec::new();
    let h = normalized(load_matrix(required(&cfg.matrix, "matrix", cfg.pipeline)?)?, cfg.normalize()?, "hamiltonian", &mut warnings)?;
    let out = algorithms::ground_state_ite(&h, eps, cfg.seed()?, oracle)?;
    let (energies, _) = oracle.eig(&linalg::hermitize(&h)?, "verification of the ground energy")?;
    report.result = json!({
        "state": vector_value(&out.state),
        "time": out.time,
        "a": out.a,
        "gap": out.gap,
        "ground_energy": out.ground_energy,
        "success_probability": out.success_probability,
        "degree": out.degree,
        "boost": out.boost,
    });
    report.delta("overlap", out.overlap);
    report.delta("tail_sum", out.tail_sum);
    report.delta("ground_energy_error", (out.ground_energy - energies[0]).abs());
    report.ledger = out.cost;
    let gamma = (1.0 / (1.0 + out.a)).sqrt();
    symbolic(
        report,
        "result:ground-state",
        &cost::params(&[
            ("normF", linalg::frobenius(&h)),
            ("gamma", gamma),
            ("n", h.nrows() as f64),
            ("eps", eps),
            ("Delta", out.gap),
        ]),
    );
    report.warnings = warnings;
    Ok(())
}

fn energies(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-3)?;
    let mut warnings = Vec::new();
    let h = normalized(load_matrix(required(&cfg.matrix, "matrix", cfg.pipeline)?)?, cfg.normalize()?, "hamiltonian", &mut warnings)?;
    let out = algorithms::ground_excited_energies(&h, eps, cfg.seed()?, oracle)?;
    report.result = json!({
        "e0": out.e0,
        "e1": out.e1,
        "iterations": out.pca.levels[0].iterations,
        "swap_test_repetitions": out.pca.swap_test_repetitions,
    });
    report.delta("e0_error", (out.e0 - out.oracle_e0).abs());
    report.delta("e1_error", (out.e1 - out.oracle_e1).abs());
    report.ledger = out.pca.cost;
    warnings.extend(out.pca.warnings);
    report.warnings = warnings;
    Ok(())
}

/// Dataset mode reads `x,y` rows and fits `Σ_j λ_j x^j` for `j = 1..=terms`;
/// matrix mode takes the design and the `vector` targets directly.
fn fit(cfg: &ExperimentConfig, report: &mut ExperimentReport, oracle: &mut OracleAccess) -> CliResult<()> {
    let eps = cfg.eps(1e-8)?;
    let (problem, terms) = if let Some(path) = &cfg.dataset {
        let pts = load_matrix(path)?;
        if pts.ncols() != 2 {
            return Err(CliError::Input {
                path: path.clone(),
                msg: format!("expected two columns x,y, got {}", pts.ncols()),
            });
        }
        let xs: Vec<f64> = pts.column(0).iter().map(|z| z.re).collect();
        let ys: Vec<f64> = pts.column(1).iter().map(|z| z.re).collect();
        let terms = cfg.count("terms")?.unwrap_or(3);
        (FitProblem::polynomial(&xs, &ys, terms)?, Some(terms))
    } else {
        let f = load_matrix(required(&cfg.matrix, "matrix", cfg.pipeline)?)?;
        let y = load_vector(required(&cfg.vector, "vector", cfg.pipeline)?)?;
        (FitProblem::new(f, y), None)
    };
    let out = algorithms::data_fit(&problem, eps, oracle)?;
    let mut result = json!({
        "basis": problem.basis,
        "coefficients": vector_value(&out.coefficients),
        "solution_state": vector_value(&out.solution_state),
        "kappa_f": out.kappa_f,
        "success_probability": out.success_probability,
    });
    report.delta("fidelity", out.fidelity);
    if let (Some(x), Some(terms)) = (cfg.number("x-new")?, terms) {
        let feats = FitProblem::monomials(x, terms);
        let pred = algorithms::predict(&out, &feats)?;
        let exact = oracle.least_squares(&problem.design, &problem.targets, "verification of the prediction")?;
        let want: linalg::C64 = feats.iter().zip(exact.iter()).map(|(a, b)| a * b).sum();
        result["prediction"] = json!({ "x": x, "overlap": pred.overlap, "value": complex_value(pred.value) });
        report.delta("prediction_error", (pred.value - want).norm());
    }
    report.result = result;
    report.ledger = out.cost;
    let (m, n) = problem.design.shape();
    symbolic(
        report,
        "result:fit",
        &cost::params(&[("normF", 1.0), ("M", m as f64), ("N", n as f64), ("kappa", out.kappa_f), ("eps", eps)]),
    );
    report.warnings = out.warnings;
    Ok(())
}

const COST_CONTROL_KEYS: &[&str] = &["seed", "table", "crossover", "ours", "other", "limit"];

/// Evaluates the registry rows under the `table` prefix, plus an optional
/// crossover scan along the `crossover` axis between `ours` and `other`.
fn costs(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> CliResult<String> {
    let mut params = Params::new();
    for (k, v) in &cfg.parameters {
        if COST_CONTROL_KEYS.contains(&k.as_str()) {
            continue;
        }
        let x = v
            .as_f64()
            .ok_or_else(|| CliError::Validation(format!("cost parameter `{k}` must be a number, got {v}")))?;
        params.insert(k.clone(), x);
    }
    let prefix = cfg.text("table")?.unwrap_or_else(|| "table:solver/".into());
    let rows = cost::table(&prefix);
    let table = cost::render_table(&rows, &params)?;
    let mut result = json!({ "table": table });
    if let Some(axis) = cfg.text("crossover")? {
        let reg = cost::registry();
        let pick = |key: &str, default: &str| -> CliResult<_> {
            let name = cfg.text(key)?.unwrap_or_else(|| default.to_string());
            reg.get(&name)
                .cloned()
                .ok_or_else(|| CliError::Validation(format!("no registry formula `{name}`")))
        };
        let ours = pick("ours", "table:solver/ours")?;
        let other = pick("other", "table:solver/harrow2009")?;
        let limit = cfg.count("limit")?.unwrap_or(1000) as u64;
        result["crossover"] = serde_json::to_value(cost::crossover(&ours, &other, &params, &axis, limit)?)
            .expect("crossovers serialize");
    }
    report.symbolic = table
        .rows
        .iter()
        .map(|r| SymbolicCost {
            name: r.name.clone(),
            expression: r.expression.clone(),
            value: r.value,
        })
        .collect();
    report.result = result;
    Ok(table.to_csv()?)
}
