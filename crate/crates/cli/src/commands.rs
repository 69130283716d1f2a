use std::ffi::OsString;
use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use htsim_core::calibrate::{calibrate_pk_score, CalibrationOptions, TARGET_GOALS_PER_MATCH};
use htsim_core::forecast::{baseline_priors, mean_rps, PriorKind};
use htsim_core::presets::preset_profiles;
use htsim_core::sim::check_pair;
use htsim_core::{
    load_params, run_sweep, simulate, EngineParams, ForecastTriple, Outcome, SweepSpec, TeamProfile, Variant,
};
use htsim_graph::average::model_average;
use htsim_graph::compare::compare_cpdags;
use htsim_graph::datagen::{generate_dataset, BinSpec, SamplerSpec};
use htsim_graph::{
    compare_graphs, dag_to_cpdag, hill_climb, tabu_search, CompareLevel, Cpdag, Dag, DiscreteDataset, GraphJson,
    SearchOptions,
};

use crate::api::{self, ServiceConfig, MAX_TRIALS};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "htsim", version, about = "Hattrick match simulation and structure learning")]
pub struct Cli {
    /// Engine parameter preset.
    #[arg(long, global = true, value_enum, default_value_t = PresetArg::KbProbabilistic)]
    preset: PresetArg,

    /// JSON object of dotted parameter overrides applied on top of the preset.
    #[arg(long, global = true, value_name = "FILE")]
    params: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    KbProbabilistic,
    KbRegression,
}

impl From<PresetArg> for Variant {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::KbProbabilistic => Variant::KbProbabilistic,
            PresetArg::KbRegression => Variant::KbRegression,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algo {
    Hc,
    Tabu,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Cpdag,
    Dag,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one fixture and print the report as JSON.
    Simulate {
        /// Team profile JSON file, or one of NM, CA, LS.
        #[arg(long)]
        home: String,
        #[arg(long)]
        away: String,
        #[arg(long, default_value_t = api::DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the reference team profiles, or one of them by name.
    Profiles {
        /// NM, CA or LS.
        name: Option<String>,
    },
    /// Run a one-factor sweep and write a CSV table.
    Sweep {
        /// Sweep spec JSON file.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the full result as JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Generate a discretised dataset of simulated matches.
    GenData(GenDataArgs),
    /// Learn a network structure from a discrete CSV dataset.
    Learn(LearnArgs),
    /// Compare a learned graph with a reference graph.
    ScoreGraph {
        #[arg(long)]
        learned: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_enum, default_value_t = LevelArg::Cpdag)]
        level: LevelArg,
    },
    /// Majority vote over several learned graphs.
    Average {
        #[arg(long, required = true, num_args = 1..)]
        graphs: Vec<PathBuf>,
        /// Keep edges seen in at least this many graphs; defaults to a strict majority.
        #[arg(long)]
        min_count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean ranked probability score of a forecast file.
    ScoreForecasts {
        /// CSV rows `p_home,p_draw,p_away,observed` with observed one of H, D, A.
        #[arg(long)]
        data: PathBuf,
    },
    /// Fit the penalty conversion rate to a goals-per-match target.
    Calibrate {
        #[arg(long, default_value_t = TARGET_GOALS_PER_MATCH)]
        target: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        iterations: u32,
        /// Write `{"pk_score": x}` here for use with --params.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "0.0.0.0")]
        host: String,
        /// Defaults to $HTSIM_PORT, then 8080.
        #[arg(long)]
        port: Option<u16>,
        /// Per-request simulation budget; defaults to $HTSIM_REQUEST_TIMEOUT_SECS, then 120.
        #[arg(long)]
        timeout_secs: Option<f64>,
        /// Allowed browser origin; defaults to $HTSIM_CORS_ORIGIN, then any.
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long)]
    matches: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Profile sampler JSON.
    #[arg(long)]
    sampler: Option<PathBuf>,
    /// Discretisation JSON.
    #[arg(long)]
    bins: Option<PathBuf>,
    /// Overrides the sampler's HatStats filter.
    #[arg(long)]
    hatstats_min: Option<f64>,
    /// Split rows: `--out` gets this fraction, `--test-out` the rest.
    #[arg(long, requires = "test_out")]
    train_fraction: Option<f64>,
    #[arg(long, requires = "train_fraction")]
    test_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Tabu)]
    algo: Algo,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the equivalence class instead of the DAG.
    #[arg(long)]
    cpdag: bool,
    #[arg(long)]
    max_in_degree: Option<usize>,
    #[arg(long)]
    max_vars: Option<usize>,
    #[arg(long)]
    tabu_length: Option<usize>,
    #[arg(long)]
    max_worsening_steps: Option<usize>,
    #[arg(long)]
    time_budget_secs: Option<f64>,
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::invalid(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn engine_params(cli: &Cli) -> Result<EngineParams, CliError> {
    let overrides = match &cli.params {
        Some(p) => read_json(p)?,
        None => serde_json::Map::new(),
    };
    Ok(load_params(cli.preset.into(), &overrides)?)
}

fn team(arg: &str) -> Result<TeamProfile, CliError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(p) = preset_profiles().get(arg.to_ascii_uppercase().as_str()) {
            return Ok(*p);
        }
    }
    read_json(path)
}

fn check_trials(trials: u64) -> Result<(), CliError> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(CliError::Validation(format!("trials must be in 1..={MAX_TRIALS}, got {trials}")));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let params = engine_params(&cli)?;
    match cli.command {
        Command::Simulate { home, away, trials, seed, out } => {
            check_trials(trials)?;
            let (h, a) = (team(&home)?, team(&away)?);
            check_pair(&h, &a)?;
            let report = simulate(&h, &a, &params, trials, seed)?;
            emit(out.as_deref(), &pretty(&report))
        }
        Command::Profiles { name } => {
            let all = preset_profiles();
            match name {
                None => emit(None, &pretty(&all)),
                Some(n) => {
                    let p = all
                        .get(n.to_ascii_uppercase().as_str())
                        .ok_or_else(|| CliError::Validation(format!("unknown profile `{n}` (expected NM, CA or LS)")))?;
                    emit(None, &pretty(p))
                }
            }
        }
        Command::Sweep { spec, out, json } => {
            let s: SweepSpec = read_json(&spec)?;
            let result = run_sweep(&s, &params)?;
            if json {
                return emit(out.as_deref(), &pretty(&result));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            for p in &result.points {
                w.serialize(p).map_err(|e| CliError::Validation(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?;
            let text = String::from_utf8(bytes).expect("csv output is utf-8");
            emit(out.as_deref(), text.trim_end())
        }
        Command::GenData(args) => gen_data(args, &params),
        Command::Learn(args) => learn(args),
        Command::ScoreGraph { learned, truth, level } => {
            let (l, t) = (read_graph(&learned)?, read_graph(&truth)?);
            let cmp = match level {
                LevelArg::Cpdag => compare_cpdags(&l.cpdag(), &t.cpdag())?,
                LevelArg::Dag => compare_graphs(&l.dag(&learned)?, &t.dag(&truth)?, CompareLevel::Dag)?,
            };
            emit(None, &pretty(&cmp))
        }
        Command::Average { graphs, min_count, out } => {
            let dags = graphs
                .iter()
                .map(|p| read_graph(p)?.dag(p))
                .collect::<Result<Vec<_>, _>>()?;
            let min = min_count.unwrap_or(dags.len() / 2 + 1);
            let avg = model_average(&dags, min)?;
            emit(out.as_deref(), &pretty(&avg.to_json()))
        }
        Command::ScoreForecasts { data } => score_forecasts(&data),
        Command::Calibrate { target, trials, seed, iterations, out } => {
            check_trials(trials)?;
            let opts = CalibrationOptions { target, trials, seed, iterations };
            let result = calibrate_pk_score(&params, &opts)?;
            if let Some(p) = out {
                emit(Some(&p), &pretty(&serde_json::json!({ "pk_score": result.pk_score })))?;
            }
            emit(None, &pretty(&result))
        }
        Command::Serve { host, port, timeout_secs, cors_origin } => {
            let mut cfg = ServiceConfig::from_env();
            if let Some(t) = timeout_secs {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(CliError::Validation(format!("timeout {t} must be a non-negative number")));
                }
                cfg.request_timeout = Duration::from_secs_f64(t);
            }
            if cors_origin.is_some() {
                cfg.cors_origin = cors_origin;
            }
            let port = match port {
                Some(p) => p,
                None => api::port_from_env().map_err(CliError::Validation)?,
            };
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| CliError::Io(e.to_string()))?;
            rt.block_on(api::serve(&host, port, cfg))
                .map_err(|e| CliError::Io(format!("{host}:{port}: {e}")))
        }
    }
}

fn gen_data(args: GenDataArgs, params: &EngineParams) -> Result<(), CliError> {
    let mut sampler: SamplerSpec = match &args.sampler {
        Some(p) => read_json(p)?,
        None => SamplerSpec::default(),
    };
    if args.hatstats_min.is_some() {
        sampler.hatstats_min = args.hatstats_min;
    }
    let bins: BinSpec = match &args.bins {
        Some(p) => read_json(p)?,
        None => BinSpec::default(),
    };
    let data = generate_dataset(args.matches, &sampler, &bins, params, args.seed)?;
    match (args.train_fraction, &args.test_out) {
        (Some(f), Some(test_out)) => {
            let (train, test) = data.split(f, args.seed)?;
            train.to_path(&args.out)?;
            test.to_path(test_out)?;
        }
        _ => data.to_path(&args.out)?,
    }
    Ok(())
}

fn learn(args: LearnArgs) -> Result<(), CliError> {
    let data = DiscreteDataset::from_path(&args.data)?;
    let mut opts = SearchOptions::default();
    if let Some(v) = args.max_in_degree {
        opts.max_in_degree = v;
    }
    if let Some(v) = args.max_vars {
        opts.max_vars = v;
    }
    if let Some(v) = args.tabu_length {
        opts.tabu_length = v;
    }
    if let Some(v) = args.max_worsening_steps {
        opts.max_worsening_steps = v;
    }
    opts.time_budget_secs = args.time_budget_secs;
    let scored = match args.algo {
        Algo::Hc => hill_climb(&data, &opts)?,
        Algo::Tabu => tabu_search(&data, &opts)?,
    };
    let graph = if args.cpdag { dag_to_cpdag(&scored.dag).to_json() } else { scored.dag.to_json() };
    if let Some(p) = &args.out {
        emit(Some(p), &pretty(&graph))?;
    }
    let summary = serde_json::json!({
        "bic": scored.bic,
        "log_likelihood": scored.ll,
        "free_parameters": scored.k,
        "edges": scored.dag.edge_count(),
    });
    emit(None, &pretty(&summary))?;
    if args.out.is_none() {
        emit(None, &pretty(&graph))?;
    }
    Ok(())
}

/// A graph file, directed or partially directed.
enum LoadedGraph {
    Dag(Dag),
    Cpdag(Cpdag),
}

impl LoadedGraph {
    fn cpdag(&self) -> Cpdag {
        match self {
            LoadedGraph::Dag(d) => dag_to_cpdag(d),
            LoadedGraph::Cpdag(c) => c.clone(),
        }
    }

    fn dag(self, path: &Path) -> Result<Dag, CliError> {
        match self {
            LoadedGraph::Dag(d) => Ok(d),
            LoadedGraph::Cpdag(_) => Err(CliError::invalid(path, "graph has undirected edges; a DAG is required")),
        }
    }
}

fn read_graph(path: &Path) -> Result<LoadedGraph, CliError> {
    let j: GraphJson = read_json(path)?;
    let g = if j.undirected.is_empty() {
        Dag::from_json(&j).map(LoadedGraph::Dag)
    } else {
        Cpdag::from_json(&j).map(LoadedGraph::Cpdag)
    };
    g.map_err(|e| CliError::invalid(path, e))
}

fn parse_forecast_row(rec: &csv::StringRecord) -> Result<(ForecastTriple, Outcome), String> {
    if rec.len() != 4 {
        return Err(format!("expected 4 fields, found {}", rec.len()));
    }
    let mut p = [0.0; 3];
    for (i, slot) in p.iter_mut().enumerate() {
        *slot = rec[i].trim().parse().map_err(|_| format!("`{}` is not a probability", &rec[i]))?;
    }
    let t = ForecastTriple::new(p[0], p[1], p[2]).map_err(|e| e.to_string())?;
    let o: Outcome = rec[3].parse()?;
    Ok((t, o))
}

fn score_forecasts(path: &Path) -> Result<(), CliError> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::invalid(path, e))?;
        let header = i == 0 && rec.get(0).is_some_and(|f| f.trim().parse::<f64>().is_err());
        if header {
            continue;
        }
        let row = parse_forecast_row(&rec).map_err(|e| CliError::invalid(path, format!("line {}: {e}", i + 1)))?;
        rows.push(row);
    }
    let mean = mean_rps(&rows).ok_or_else(|| CliError::invalid(path, "no forecast rows"))?;
    let mut counts = [0u64; 3];
    for (_, o) in &rows {
        counts[o.index()] += 1;
    }
    let baseline = |kind| -> Result<f64, CliError> {
        let prior = baseline_priors(kind, Some(counts))?;
        let pairs: Vec<_> = rows.iter().map(|(_, o)| (prior, *o)).collect();
        Ok(mean_rps(&pairs).expect("rows are non-empty"))
    };
    let report = serde_json::json!({
        "rows": rows.len(),
        "mean_rps": mean,
        "baseline_ignorant_rps": baseline(PriorKind::Ignorant)?,
        "baseline_global_rps": baseline(PriorKind::Global)?,
    });
    emit(None, &pretty(&report))
}
