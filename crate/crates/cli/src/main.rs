//! `lyap`: batch experiment runner for the metric Lyapunov exponent
//! estimators. Parses a JSON experiment config, runs the requested
//! estimation, and emits JSON reports, CSV tables and two-column plot data.
//!
//! Exit codes: 0 success, 1 failed acceptance inside `reproduce`, 2 config
//! error, 3 empty Bowen sample.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use lyapunov_core::adapted::{
    expansivity_time, measure_lipschitz, verify_hyperbolic_inequality, ExpansivityTime,
};
use lyapunov_core::classical::{compare, jacobian_exponents};
use lyapunov_core::point_exp::{point_exponents, EstimatorParams, SeqRow};
use lyapunov_core::set_exp::{classify, set_exponents, BasinParams, InvariantSet, Label};
use lyapunov_core::space::{Dynamics, Point};
use lyapunov_core::systems::{
    IrrationalRotation, MetricKind, NorthSouthCircle, ToralSystem, TorusWithHair,
};
use lyapunov_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "lyap", version, about = "Metric-space Lyapunov exponent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the four pointwise exponents at a configured point.
    PointExponents(RunArgs),
    /// Estimate the exponents of a configured invariant set.
    SetExponents(RunArgs),
    /// Classify a configured invariant set as attractor or repeller.
    Classify(RunArgs),
    /// Verify the hyperbolic inequality of the configured system's metric.
    AdaptedMetricCheck(RunArgs),
    /// Cross-check metric exponents against derivative-based ones.
    CompareClassical(RunArgs),
    /// Run a named preset experiment and check its expected outcome.
    Reproduce {
        /// One of: thm2.5-toral, thm2.7-hair-point, thm3.2-attractor-q,
        /// thm3.2-repeller-torus, ns-fixed-points, rotation-control
        preset: String,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON experiment config (see README for the schema)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-(delta, n) CSV rows here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write two-column plot data, one delta_<value>.dat file per delta
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Sampler seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated strictly decreasing deltas (overrides the config)
    #[arg(long, value_delimiter = ',')]
    delta_list: Option<Vec<f64>>,
    /// Largest |n| in the exponent sequences (overrides the config)
    #[arg(long)]
    n_max: Option<u32>,
    /// Candidate count per point (overrides the config)
    #[arg(long)]
    candidates: Option<usize>,
    /// Torus metric: "ambient" or "adapted" (overrides the config)
    #[arg(long)]
    metric: Option<String>,
}

/// The JSON experiment description. Every field a flag can override is
/// optional here; flags win.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Config {
    system: Option<SystemSpec>,
    metric: Option<String>,
    point: Option<Point>,
    set: Option<SetSpec>,
    delta_list: Option<Vec<f64>>,
    n_max: Option<u32>,
    candidates: Option<usize>,
    seed: Option<u64>,
    margin: Option<f64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    plot_dir: Option<PathBuf>,
}

#[derive(Deserialize, Clone)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SystemSpec {
    Toral {
        matrix: Option<[[i64; 2]; 2]>,
    },
    TorusWithHair {
        matrix: Option<[[i64; 2]; 2]>,
        epsilon: Option<f64>,
    },
    NorthSouth {
        mu: Option<f64>,
    },
    Rotation {
        alpha: Option<f64>,
    },
}

#[derive(Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SetSpec {
    FinitePoints { name: Option<String>, points: Vec<Point> },
    WholeTorus,
}

enum BuiltSystem {
    Toral(ToralSystem),
    Hair(TorusWithHair),
    NorthSouth(NorthSouthCircle),
    Rotation(IrrationalRotation),
}

impl BuiltSystem {
    fn dynamics(&self) -> &dyn Dynamics {
        match self {
            BuiltSystem::Toral(s) => s,
            BuiltSystem::Hair(s) => s,
            BuiltSystem::NorthSouth(s) => s,
            BuiltSystem::Rotation(s) => s,
        }
    }
}

struct ConfigError(String);

impl From<CoreError> for ConfigError {
    fn from(e: CoreError) -> Self {
        ConfigError(e.to_string())
    }
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Everything a subcommand needs after merging the config file and the flags.
struct Experiment {
    system: BuiltSystem,
    point: Option<Point>,
    set: Option<SetSpec>,
    params: EstimatorParams,
    margin: f64,
    tol: f64,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    plot_dir: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
}

fn build_experiment(args: &RunArgs) -> Result<Experiment, ConfigError> {
    let cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    let metric = match args.metric.as_deref().or(cfg.metric.as_deref()) {
        None | Some("adapted") => MetricKind::EigenAdapted,
        Some("ambient") => MetricKind::Ambient,
        Some(other) => return cfg_err(format!("field `metric`: unknown value `{other}`")),
    };
    let Some(spec) = cfg.system else {
        return cfg_err("field `system`: missing (pass --config with a system descriptor)");
    };
    let system = match spec {
        SystemSpec::Toral { matrix } => {
            BuiltSystem::Toral(ToralSystem::new(matrix.unwrap_or([[2, 3], [3, 5]]), metric)?)
        }
        SystemSpec::TorusWithHair { matrix, epsilon } => {
            let eps = epsilon.unwrap_or(0.5);
            if !(0.0 < eps && eps < 1.0) {
                return cfg_err(format!("field `epsilon`: must lie in (0, 1), got {eps}"));
            }
            BuiltSystem::Hair(TorusWithHair::new(matrix.unwrap_or([[2, 3], [3, 5]]), eps)?)
        }
        SystemSpec::NorthSouth { mu } => {
            let mu = mu.unwrap_or(2.0);
            if mu <= 1.0 {
                return cfg_err(format!("field `mu`: must exceed 1, got {mu}"));
            }
            BuiltSystem::NorthSouth(NorthSouthCircle::new(mu))
        }
        SystemSpec::Rotation { alpha } => BuiltSystem::Rotation(match alpha {
            Some(a) => IrrationalRotation::new(a),
            None => IrrationalRotation::golden(),
        }),
    };

    let defaults = EstimatorParams::default();
    let delta_list = args
        .delta_list
        .clone()
        .or(cfg.delta_list)
        .unwrap_or(defaults.delta_list);
    if delta_list.is_empty() || delta_list.iter().any(|&d| d <= 0.0) {
        return cfg_err("field `delta_list`: deltas must be positive");
    }
    if delta_list.windows(2).any(|w| w[0] <= w[1]) {
        return cfg_err("field `delta_list`: deltas must be strictly decreasing");
    }
    let n_max = args.n_max.or(cfg.n_max).unwrap_or(defaults.n_max);
    if n_max < 4 {
        return cfg_err(format!("field `n_max`: must be at least 4, got {n_max}"));
    }
    let candidates = args
        .candidates
        .or(cfg.candidates)
        .unwrap_or(defaults.candidates);
    if candidates < 64 {
        return cfg_err(format!("field `candidates`: must be at least 64, got {candidates}"));
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(defaults.seed);

    Ok(Experiment {
        system,
        point: cfg.point,
        set: cfg.set,
        params: EstimatorParams {
            delta_list,
            n_max,
            candidates,
            seed,
        },
        margin: cfg.margin.unwrap_or(0.1),
        tol: cfg.tol.unwrap_or(0.1),
        out: args.out.clone().or(cfg.out),
        csv: args.csv.clone().or(cfg.csv),
        plot_dir: args.plot_dir.clone().or(cfg.plot_dir),
    })
}

fn build_set(exp: &Experiment) -> Result<InvariantSet, ConfigError> {
    match &exp.set {
        None => cfg_err("field `set`: missing for a set command"),
        Some(SetSpec::FinitePoints { name, points }) => {
            if points.is_empty() {
                return cfg_err("field `set.points`: must be nonempty");
            }
            Ok(InvariantSet::finite(
                name.clone().unwrap_or_else(|| "finite".into()),
                points.clone(),
            ))
        }
        Some(SetSpec::WholeTorus) => match &exp.system {
            BuiltSystem::Hair(h) => Ok(InvariantSet::whole_torus(h)),
            _ => cfg_err("field `set.kind`: whole_torus needs a torus_with_hair system"),
        },
    }
}

fn emit(
    exp: &Experiment,
    report: &serde_json::Value,
    csv: Option<String>,
    plots: Vec<(f64, Vec<SeqRow>)>,
) -> Result<(), ConfigError> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    match &exp.out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    if let (Some(path), Some(rows)) = (&exp.csv, csv) {
        std::fs::write(path, rows)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(dir) = &exp.plot_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| ConfigError(format!("cannot create {}: {e}", dir.display())))?;
        for (delta, rows) in plots {
            let mut text = String::new();
            for row in rows {
                text.push_str(&format!("{} {}\n", row.n, row.log_sup_over_n));
            }
            let path = dir.join(format!("delta_{delta}.dat"));
            std::fs::write(&path, text)
                .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    Ok(())
}

/// Plot rows per delta: backward sequence (ascending n) then forward.
fn plot_rows(per_delta: impl Iterator<Item = (f64, Vec<SeqRow>, Vec<SeqRow>)>) -> Vec<(f64, Vec<SeqRow>)> {
    per_delta
        .map(|(delta, forward, backward)| {
            let mut rows: Vec<SeqRow> = backward.into_iter().rev().collect();
            rows.extend(forward);
            (delta, rows)
        })
        .collect()
}

enum RunError {
    Config(ConfigError),
    Empty(i64),
    Reproduce(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::EmptyBowenSample { n } => RunError::Empty(n),
            other => RunError::Config(ConfigError(other.to_string())),
        }
    }
}

fn need_point(exp: &Experiment) -> Result<Point, ConfigError> {
    match (exp.point, &exp.system) {
        (Some(p), _) => Ok(p),
        // the apex is the natural default point of the hair space
        (None, BuiltSystem::Hair(h)) => Ok(h.q()),
        _ => cfg_err("field `point`: missing for a point command"),
    }
}

fn run_point_exponents(exp: &Experiment) -> Result<(), RunError> {
    let x = need_point(exp)?;
    let rep = point_exponents(exp.system.dynamics(), x, &exp.params)?;
    let plots = plot_rows(
        rep.per_delta
            .iter()
            .map(|r| (r.delta, r.forward.clone(), r.backward.clone())),
    );
    let csv = rep.csv();
    emit(exp, &serde_json::to_value(&rep).unwrap(), Some(csv), plots)?;
    Ok(())
}

fn run_set_exponents(exp: &Experiment) -> Result<(), RunError> {
    let set = build_set(exp)?;
    let rep = set_exponents(exp.system.dynamics(), &set, &exp.params)?;
    let plots = plot_rows(
        rep.per_delta
            .iter()
            .map(|r| (r.delta, r.forward.clone(), r.backward.clone())),
    );
    let csv = rep.csv();
    emit(exp, &serde_json::to_value(&rep).unwrap(), Some(csv), plots)?;
    Ok(())
}

fn run_classify(exp: &Experiment) -> Result<(), RunError> {
    let set = build_set(exp)?;
    let sys = exp.system.dynamics();
    let rep = set_exponents(sys, &set, &exp.params)?;
    let basin = BasinParams::default();
    let cls = classify(sys, &set, &rep, exp.margin, &basin)?;
    let csv = rep.csv();
    let value = json!({
        "classification": cls,
        "report": rep,
    });
    emit(exp, &value, Some(csv), Vec::new())?;
    Ok(())
}

fn run_adapted_metric_check(exp: &Experiment) -> Result<(), RunError> {
    let sys = exp.system.dynamics();
    let (k, eps0) = match sys.adapted_params() {
        Some(pair) => pair,
        None => (measure_lipschitz(sys, 100, exp.params.seed), 0.1),
    };
    let pairs = exp.params.candidates.max(1000);
    let report = verify_hyperbolic_inequality(sys, k, eps0, pairs, exp.params.seed);
    let value = json!({
        "k": k,
        "report": report,
    });
    emit(exp, &value, None, Vec::new())?;
    Ok(())
}

fn run_compare_classical(exp: &Experiment) -> Result<(), RunError> {
    let x = need_point(exp)?;
    let sys = exp.system.dynamics();
    let rep = point_exponents(sys, x, &exp.params)?;
    let classical = jacobian_exponents(sys, x, exp.params.n_max.max(64))?;
    let cmp = compare(rep.sup_plus, rep.inf_plus, &classical, exp.tol);
    let value = json!({
        "metric": rep,
        "classical": classical,
        "comparison": cmp,
    });
    emit(exp, &value, Some(rep.csv()), Vec::new())?;
    Ok(())
}

fn run_reproduce(preset: &str, args: &RunArgs) -> Result<(), RunError> {
    let mut exp = build_preset(preset, args)?;
    // presets fix the experiment; flags still control outputs and seed
    if let Some(seed) = args.seed {
        exp.params.seed = seed;
    }
    match preset {
        "thm2.5-toral" => {
            let x = exp.point.expect("preset point");
            let rep = point_exponents(exp.system.dynamics(), x, &exp.params)?;
            let ok = (1.905..=1.945).contains(&rep.sup_plus)
                && (-1.945..=-1.905).contains(&rep.inf_plus);
            let value = json!({"preset": preset, "pass": ok, "report": rep});
            let plots = plot_rows(
                rep.per_delta
                    .iter()
                    .map(|r| (r.delta, r.forward.clone(), r.backward.clone())),
            );
            emit(&exp, &value, Some(rep.csv()), plots)?;
            if !ok {
                return Err(RunError::Reproduce(format!(
                    "expected exponents near +/- 1.9248, got {} and {}",
                    rep.sup_plus, rep.inf_plus
                )));
            }
        }
        "thm2.7-hair-point" => {
            let x = exp.point.expect("preset point");
            let rep = point_exponents(exp.system.dynamics(), x, &exp.params)?;
            let ok = (-1.945..=-1.905).contains(&rep.sup_plus) && rep.sup_plus < 0.0;
            let value = json!({"preset": preset, "pass": ok, "report": rep});
            let plots = plot_rows(
                rep.per_delta
                    .iter()
                    .map(|r| (r.delta, r.forward.clone(), r.backward.clone())),
            );
            emit(&exp, &value, Some(rep.csv()), plots)?;
            if !ok {
                return Err(RunError::Reproduce(format!(
                    "expected a negative maximal exponent near -1.9248, got {}",
                    rep.sup_plus
                )));
            }
        }
        "thm3.2-attractor-q" | "thm3.2-repeller-torus" => {
            let set = build_set(&exp)?;
            let sys = exp.system.dynamics();
            let rep = set_exponents(sys, &set, &exp.params)?;
            let cls = classify(sys, &set, &rep, exp.margin, &BasinParams::default())?;
            let want = if preset == "thm3.2-attractor-q" {
                Label::Attractor
            } else {
                Label::Repeller
            };
            let ok = cls.label == want && cls.basin_fraction >= 0.99;
            let value = json!({"preset": preset, "pass": ok, "classification": cls, "report": rep});
            emit(&exp, &value, Some(rep.csv()), Vec::new())?;
            if !ok {
                return Err(RunError::Reproduce(format!(
                    "expected {want:?} with basin fraction >= 0.99, got {:?} at {}",
                    cls.label, cls.basin_fraction
                )));
            }
        }
        "ns-fixed-points" => {
            let sys = exp.system.dynamics();
            let log2 = 2f64.ln();
            let sink = InvariantSet::finite("sink", vec![Point::circle(std::f64::consts::PI)]);
            let source = InvariantSet::finite("source", vec![Point::circle(0.0)]);
            let sink_rep = set_exponents(sys, &sink, &exp.params)?;
            let sink_cls = classify(sys, &sink, &sink_rep, exp.margin, &BasinParams::default())?;
            let source_rep = set_exponents(sys, &source, &exp.params)?;
            let source_cls =
                classify(sys, &source, &source_rep, exp.margin, &BasinParams::default())?;
            let ok = sink_cls.label == Label::Attractor
                && (sink_cls.sup_plus + log2).abs() <= 0.02
                && sink_cls.basin_fraction >= 0.99
                && source_cls.label == Label::Repeller
                && (source_cls.sup_minus + log2).abs() <= 0.02
                && source_cls.basin_fraction >= 0.99;
            let value = json!({
                "preset": preset,
                "pass": ok,
                "sink": sink_cls,
                "source": source_cls,
            });
            emit(&exp, &value, Some(sink_rep.csv() + &source_rep.csv()), Vec::new())?;
            if !ok {
                return Err(RunError::Reproduce(
                    "north-south fixed points did not classify as expected".into(),
                ));
            }
        }
        "rotation-control" => {
            let x = exp.point.expect("preset point");
            let sys = exp.system.dynamics();
            let rep = point_exponents(sys, x, &exp.params)?;
            let never_separates = matches!(
                expansivity_time(sys, Point::circle(0.2), Point::circle(0.21), 0.1, 64),
                ExpansivityTime::Infinite
            );
            let ok = [rep.sup_plus, rep.inf_plus, rep.sup_minus, rep.inf_minus]
                .iter()
                .all(|v| v.abs() <= 1e-9)
                && never_separates;
            let value = json!({
                "preset": preset,
                "pass": ok,
                "never_separates": never_separates,
                "report": rep,
            });
            emit(&exp, &value, Some(rep.csv()), Vec::new())?;
            if !ok {
                return Err(RunError::Reproduce(
                    "rotation control must have vanishing exponents and no separation".into(),
                ));
            }
        }
        other => {
            return Err(RunError::Config(ConfigError(format!(
                "unknown preset `{other}`"
            ))))
        }
    }
    Ok(())
}

fn build_preset(preset: &str, args: &RunArgs) -> Result<Experiment, ConfigError> {
    let base = RunArgs {
        out: args.out.clone(),
        csv: args.csv.clone(),
        plot_dir: args.plot_dir.clone(),
        ..RunArgs::default()
    };
    let mut exp = Experiment {
        system: BuiltSystem::Rotation(IrrationalRotation::golden()),
        point: None,
        set: None,
        params: EstimatorParams::default(),
        margin: 0.1,
        tol: 0.1,
        out: base.out,
        csv: base.csv,
        plot_dir: base.plot_dir,
    };
    match preset {
        "thm2.5-toral" => {
            exp.system =
                BuiltSystem::Toral(ToralSystem::new([[2, 3], [3, 5]], MetricKind::EigenAdapted)?);
            exp.point = Some(Point::torus(0.31, 0.47));
        }
        "thm2.7-hair-point" => {
            let h = TorusWithHair::new([[2, 3], [3, 5]], 0.5)?;
            exp.point = Some(h.q());
            exp.system = BuiltSystem::Hair(h);
        }
        "thm3.2-attractor-q" => {
            let h = TorusWithHair::new([[2, 3], [3, 5]], 0.5)?;
            exp.set = Some(SetSpec::FinitePoints {
                name: Some("apex".into()),
                points: vec![h.q()],
            });
            exp.system = BuiltSystem::Hair(h);
        }
        "thm3.2-repeller-torus" => {
            exp.system = BuiltSystem::Hair(TorusWithHair::new([[2, 3], [3, 5]], 0.5)?);
            exp.set = Some(SetSpec::WholeTorus);
        }
        "ns-fixed-points" => {
            exp.system = BuiltSystem::NorthSouth(NorthSouthCircle::new(2.0));
        }
        "rotation-control" => {
            exp.point = Some(Point::circle(0.9));
        }
        other => return cfg_err(format!("unknown preset `{other}`")),
    }
    Ok(exp)
}

/// Parallelism cap from the environment. Every estimator reduction is
/// associative and every sample is seed-indexed, so results do not depend on
/// this value; it only bounds worker counts.
fn thread_cap() -> usize {
    match std::env::var("LYAP_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => {
                eprintln!("warning: ignoring invalid LYAP_THREADS value `{v}`");
                1
            }
        },
        Err(_) => 1,
    }
}

fn main() -> ExitCode {
    let _workers = thread_cap();
    let cli = Cli::parse();
    let result = (|| -> Result<(), RunError> {
        match &cli.command {
            Command::PointExponents(args) => run_point_exponents(&build_experiment(args)?),
            Command::SetExponents(args) => run_set_exponents(&build_experiment(args)?),
            Command::Classify(args) => run_classify(&build_experiment(args)?),
            Command::AdaptedMetricCheck(args) => {
                run_adapted_metric_check(&build_experiment(args)?)
            }
            Command::CompareClassical(args) => run_compare_classical(&build_experiment(args)?),
            Command::Reproduce { preset, args } => run_reproduce(preset, args),
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Reproduce(msg)) => {
            eprintln!("reproduce check failed: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Config(ConfigError(msg))) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Empty(n)) => {
            eprintln!("no candidate survived the Bowen filter at n = {n}");
            ExitCode::from(3)
        }
    }
}
