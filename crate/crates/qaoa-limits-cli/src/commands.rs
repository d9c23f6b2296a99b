use crate::files::{csv_bytes, emit, parse_distribution, read_angles, read_graph, AngleFile};
use crate::{Cli, Command, EnsembleKind, ExperimentArgs, Format, LandscapeArgs, McArgs, Model, PredictArgs, SimulateArgs, TransferArgs, SCHEMA_VERSION};
use anyhow::{Context, Result};
use qaoa_limits::angle_tools::{minimize, multi_restart, multi_restart_rescaled, standardize, OptimizationResult, TraceEntry, WeightParity};
use qaoa_limits::dspin_p1::{diluted_p1_energy, diluted_p1_energy_per_term, factorial, DSpinConfig};
use qaoa_limits::experiment::{run_guessed_angles, sk_transferred_guess, Ensemble, ExperimentConfig};
use qaoa_limits::infinite_limit::{
    chung_lu_energy_per_vertex, er_energy_per_edge, er_energy_per_vertex, sk_energy_per_vertex, transfer_sk_to_er,
};
use qaoa_limits::instances::sample_sk;
use qaoa_limits::simulator::{cut_statistics, IsingHamiltonian, QaoaSimulator};
use qaoa_limits::sk_montecarlo::{summarize, variance_upper_bound, SkSampler};
use qaoa_limits::{Angles, Error};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

/// Depth limit for the infinite-size formulas, whose cost grows like `16^p`.
const MAX_LIMIT_DEPTH: usize = 6;
/// Depth from which the Monte-Carlo variance bound is astronomically large.
const MC_FORCE_DEPTH: usize = 4;
const MAX_GRID_POINTS: usize = 1_000_000;
/// Restarts and budget used to locate the SK optimum for default guesses.
const GUESS_RESTARTS: usize = 40;
const GUESS_BUDGET: usize = 4000;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Validation(_) => 2,
                Error::Numerical(_) => 3,
                Error::Resource(_) => 4,
            };
        }
    }
    2
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Validation("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Predict(a) => predict(cli, a),
        Command::Transfer(a) => transfer(cli, a),
        Command::Mc(a) => mc(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Experiment(a) => experiment(cli, a),
        Command::Landscape(a) => landscape(cli, a),
    }
}

/// The fully resolved configuration echoed into every JSON report.
#[derive(Serialize)]
struct RunConfig<'a> {
    threads: usize,
    format: Format,
    output: Option<&'a Path>,
    #[serde(flatten)]
    command: &'a Command,
}

fn run_config(cli: &Cli) -> Value {
    serde_json::to_value(RunConfig {
        threads: rayon::current_num_threads(),
        format: cli.format,
        output: cli.output.as_deref(),
        command: &cli.command,
    })
    .expect("configuration serializes")
}

/// `body` with `schema_version` and `config` prepended.
fn report(cli: &Cli, body: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("config".into(), run_config(cli));
    if let Value::Object(fields) = body {
        out.extend(fields);
    }
    Value::Object(out)
}

fn json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn emit_json(cli: &Cli, body: Value) -> Result<()> {
    emit(cli.output.as_deref(), &json_bytes(&report(cli, body))?)
}

fn validation(msg: impl Into<String>) -> anyhow::Error {
    Error::Validation(msg.into()).into()
}

type Energy = Box<dyn Fn(&Angles) -> qaoa_limits::Result<f64> + Sync>;

/// An infinite-size energy functional with the factor by which its optimal
/// `γ` shrinks and the symmetry class used to standardize angles.
struct Functional {
    energy: Energy,
    gamma_scale: f64,
    parity: Option<WeightParity>,
}

fn functional(model: Model, p: usize, d: Option<f64>, dist: Option<&str>, arity: usize) -> Result<Functional> {
    if p == 0 || p > MAX_LIMIT_DEPTH {
        return Err(validation(format!("p must lie in 1..={MAX_LIMIT_DEPTH}, got {p}")));
    }
    let need_d = || d.ok_or_else(|| validation(format!("model {model:?} needs --d")));
    Ok(match model {
        Model::Er => {
            let d = need_d()?;
            if !(d > 0.0 && d.is_finite()) {
                return Err(validation(format!("--d must be positive, got {d}")));
            }
            Functional {
                energy: Box::new(move |a| er_energy_per_vertex(a, d)),
                gamma_scale: d.sqrt(),
                parity: Some(WeightParity::UnweightedMaxCut),
            }
        }
        Model::Sk => Functional {
            energy: Box::new(sk_energy_per_vertex::<f64>),
            gamma_scale: 1.0,
            parity: Some(WeightParity::Weighted),
        },
        Model::ChungLu => {
            let dist = parse_distribution(dist.ok_or_else(|| validation("model chung-lu needs --dist"))?)?;
            Functional {
                gamma_scale: dist.mean_degree().sqrt(),
                energy: Box::new(move |a| chung_lu_energy_per_vertex(a, &dist)),
                parity: Some(WeightParity::UnweightedMaxCut),
            }
        }
        Model::DilutedP1 => {
            if p != 1 {
                return Err(validation(format!("the diluted model is only available at p = 1, got p = {p}")));
            }
            let cfg = DSpinConfig::new(arity, need_d()?)?;
            Functional {
                energy: Box::new(move |a| diluted_p1_energy(a.betas[0], a.gammas[0], &cfg)),
                gamma_scale: (factorial(arity - 1) as f64 * cfg.d).sqrt(),
                // With odd arity the global spin flip is not a symmetry, so β
                // keeps its full period.
                parity: (arity % 2 == 0).then_some(WeightParity::UnweightedMaxCut),
            }
        }
    })
}

fn trace_csv(trace: &[TraceEntry]) -> Result<Vec<u8>> {
    csv_bytes(trace.iter().copied())
}

fn predict(cli: &Cli, a: &PredictArgs) -> Result<()> {
    let f = functional(a.model, a.p, a.d, a.dist.as_deref(), a.arity)?;
    let r = multi_restart_rescaled(&f.energy, a.p, f.gamma_scale, a.restarts, a.seed, a.budget)?;
    let angles = match f.parity {
        Some(parity) => standardize(&r.best_angles, parity).angles,
        None => r.best_angles.clone(),
    };
    let mut body = json!({
        "angles": AngleFile::from_angles(&angles),
        "energy_per_vertex": r.best_value,
        "gamma_scale": f.gamma_scale,
        "rescaled_gammas": angles.gammas.iter().map(|g| g * f.gamma_scale).collect::<Vec<_>>(),
        "restarts": r.trace,
    });
    match a.model {
        Model::Er => body["energy_per_edge"] = json!(er_energy_per_edge(&angles, a.d.expect("checked"))?),
        Model::DilutedP1 => {
            let cfg = DSpinConfig::new(a.arity, a.d.expect("checked"))?;
            body["energy_per_term"] = json!(diluted_p1_energy_per_term(angles.betas[0], angles.gammas[0], &cfg)?);
        }
        _ => {}
    }
    if let Some(path) = &a.angles_out {
        let file = report(cli, json!(AngleFile::from_angles(&angles)));
        emit(Some(path), &json_bytes(&file)?)?;
    }
    match cli.format {
        Format::Json => emit_json(cli, body),
        Format::Csv => emit(cli.output.as_deref(), &trace_csv(&r.trace)?),
    }
}

fn transfer(cli: &Cli, a: &TransferArgs) -> Result<()> {
    if cli.format == Format::Csv {
        return Err(validation("transfer writes angle files, which are JSON"));
    }
    let sk = read_angles(&a.input)?;
    let er = transfer_sk_to_er(&sk, a.d)?;
    emit_json(cli, json!(AngleFile::from_angles(&er)))
}

#[derive(Serialize)]
struct SampleRow {
    sample_index: usize,
    value: f64,
}

fn mc(cli: &Cli, a: &McArgs) -> Result<()> {
    let angles = read_angles(&a.angles)?;
    let p = angles.p();
    if p >= MC_FORCE_DEPTH && !a.force {
        return Err(validation(format!(
            "p = {p}: the variance bound is astronomically large from p = {MC_FORCE_DEPTH}; pass --force to sample anyway"
        )));
    }
    if a.samples < 2 {
        return Err(validation("--samples must be at least 2"));
    }
    let bound = variance_upper_bound(&angles)?;
    if p >= MC_FORCE_DEPTH {
        eprintln!("warning: per-sample standard deviation bound is 10^{:.1}", bound.log10_std_dev());
    }
    let values = SkSampler::new(&angles)?.samples(a.n, a.seed, a.samples)?;
    let mut estimate = summarize(&values)?;
    estimate.variance_bound = bound.variance().is_finite().then(|| bound.variance());
    let rows = || values.iter().enumerate().map(|(sample_index, &value)| SampleRow { sample_index, value });
    if let Some(path) = &a.samples_csv {
        emit(Some(path), &csv_bytes(rows())?)?;
    }
    match cli.format {
        Format::Json => emit_json(
            cli,
            json!({
                "estimate": estimate,
                "bound_log10_std_dev": bound.log10_std_dev(),
                "bound_std_of_mean": finite_or_null(bound.std_of_mean(a.samples)),
                "infinite_size_energy": sk_energy_per_vertex(&angles).ok(),
            }),
        ),
        Format::Csv => emit(cli.output.as_deref(), &csv_bytes(rows())?),
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let (h, graph_edges) = match (&a.graph, a.sk_n) {
        (Some(path), None) => {
            let g = read_graph(path)?;
            (IsingHamiltonian::from_graph(&g)?, Some(g.edges.len()))
        }
        (None, Some(n)) => (IsingHamiltonian::from_sk(&sample_sk(n, a.seed)?)?, None),
        _ => return Err(validation("give exactly one of --graph or --sk-n")),
    };
    let sim = QaoaSimulator::new(&h)?;
    let energy = |x: &Angles| sim.energy(x);
    let given = a.angles.as_deref().map(read_angles).transpose()?;
    let mut optimization: Option<OptimizationResult> = None;
    let angles = if a.restarts > 0 {
        let p = given.as_ref().map_or(1, |g| g.p());
        let mut best = multi_restart(energy, p, a.restarts, a.seed, a.budget)?;
        if let Some(g) = &given {
            let warm = minimize(energy, g, a.budget)?;
            if warm.best_value < best.best_value {
                best.best_value = warm.best_value;
                best.best_angles = warm.best_angles;
            }
        }
        let angles = best.best_angles.clone();
        optimization = Some(best);
        angles
    } else {
        given.ok_or_else(|| validation("--angles is required unless --restarts is positive"))?
    };
    let e = sim.energy(&angles)?;
    let mut body = json!({
        "n": sim.n(),
        "terms": h.terms.len(),
        "angles": AngleFile::from_angles(&angles),
        "energy": e,
        "energy_per_vertex": e / sim.n() as f64,
    });
    if graph_edges.is_some() {
        body["cut"] = serde_json::to_value(cut_statistics(&h, &angles, a.shots, a.seed)?)?;
    }
    if let Some(opt) = &optimization {
        body["restarts"] = json!(opt.trace);
        if let Some(path) = &a.trace_csv {
            emit(Some(path), &trace_csv(&opt.trace)?)?;
        }
    } else if a.trace_csv.is_some() {
        return Err(validation("--trace-csv needs --restarts"));
    }
    match cli.format {
        Format::Json => emit_json(cli, body),
        Format::Csv => match &optimization {
            Some(opt) => emit(cli.output.as_deref(), &trace_csv(&opt.trace)?),
            None => return Err(validation("CSV output of simulate is the restart trace; pass --restarts")),
        },
    }
}

#[derive(Serialize)]
struct InstanceRow {
    instance: usize,
    edges: usize,
    guess_energy: f64,
    warm_energy: f64,
    best_random_energy: f64,
    attempts_to_match: Option<usize>,
    warm_at_least_as_good: bool,
    distance_all: f64,
    distance_betas: f64,
    distance_gammas: f64,
}

fn experiment(cli: &Cli, a: &ExperimentArgs) -> Result<()> {
    let ensemble = match a.ensemble {
        EnsembleKind::Er => Ensemble::Er { d: a.d },
        EnsembleKind::ChungLu => Ensemble::ChungLu {
            distribution: parse_distribution(&a.dist)?,
        },
    };
    let cfg = ExperimentConfig {
        ensemble,
        n: a.n,
        p: a.p,
        instances: a.instances,
        restarts: a.restarts,
        budget: a.budget,
        seed: a.seed,
    };
    cfg.validate()?;
    let guess = match &a.guess {
        Some(path) => read_angles(path)?,
        None => sk_transferred_guess(a.p, cfg.ensemble.mean_degree(), GUESS_RESTARTS, a.seed, GUESS_BUDGET)?,
    };
    let r = run_guessed_angles(&cfg, &guess)?;
    match cli.format {
        Format::Json => emit_json(cli, serde_json::to_value(&r)?),
        Format::Csv => emit(
            cli.output.as_deref(),
            &csv_bytes(r.instances.iter().map(|i| InstanceRow {
                instance: i.index,
                edges: i.edges,
                guess_energy: i.guess_energy,
                warm_energy: i.warm_energy,
                best_random_energy: i.best_random_energy,
                attempts_to_match: i.attempts_to_match,
                warm_at_least_as_good: i.warm_at_least_as_good,
                distance_all: i.distance_all,
                distance_betas: i.distance_betas,
                distance_gammas: i.distance_gammas,
            }))?,
        ),
    }
}

#[derive(Serialize)]
struct GridRow {
    beta: f64,
    gamma: f64,
    energy: f64,
}

fn axis(min: f64, max: f64, steps: usize, name: &str) -> Result<Vec<f64>> {
    if steps == 0 || !min.is_finite() || !max.is_finite() || min > max {
        return Err(validation(format!("invalid {name} range [{min}, {max}] with {steps} steps")));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps).map(|k| min + (max - min) * k as f64 / (steps - 1) as f64).collect())
}

fn landscape(cli: &Cli, a: &LandscapeArgs) -> Result<()> {
    let base = match &a.angles {
        Some(path) => read_angles(path)?,
        None => Angles::new(vec![0.0], vec![0.0])?,
    };
    if a.layer >= base.p() {
        return Err(validation(format!("--layer {} out of range for p = {}", a.layer, base.p())));
    }
    let points = a.beta_steps.checked_mul(a.gamma_steps).unwrap_or(usize::MAX);
    if points > MAX_GRID_POINTS {
        return Err(Error::Resource(format!("grid of {points} points exceeds {MAX_GRID_POINTS}")).into());
    }
    let f = functional(a.model, base.p(), a.d, a.dist.as_deref(), a.arity)?;
    let betas = axis(a.beta_min, a.beta_max, a.beta_steps, "beta")?;
    let gammas = axis(a.gamma_min, a.gamma_max, a.gamma_steps, "gamma")?;
    let rows: Vec<GridRow> = betas
        .par_iter()
        .flat_map_iter(|&beta| {
            let (base, f, layer) = (&base, &f, a.layer);
            gammas.iter().map(move |&gamma| {
                let mut x = base.clone();
                x.betas[layer] = beta;
                x.gammas[layer] = gamma;
                Ok(GridRow {
                    beta,
                    gamma,
                    energy: (f.energy)(&x)?,
                })
            })
        })
        .collect::<qaoa_limits::Result<_>>()?;
    match cli.format {
        Format::Csv => emit(cli.output.as_deref(), &csv_bytes(rows)?),
        Format::Json => {
            let best = rows
                .iter()
                .min_by(|x, y| x.energy.total_cmp(&y.energy))
                .expect("grid is non-empty");
            let energies: Vec<Vec<f64>> = rows.chunks(gammas.len()).map(|c| c.iter().map(|r| r.energy).collect()).collect();
            emit_json(
                cli,
                json!({
                    "betas": betas,
                    "gammas": gammas,
                    "energies": energies,
                    "minimum": {"beta": best.beta, "gamma": best.gamma, "energy": best.energy},
                }),
            )
        }
    }
}
