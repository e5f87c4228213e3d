use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use wcs_core::io::{self, MatchReport};
use wcs_core::oracle::brute_force_min;
use wcs_core::synth::{
    self, fit_time_slope, generate_instance, GeneratorParams, Mode, PerturbationCount,
    ScenarioKind, ScenarioSpec, TrialRecord,
};
use wcs_core::{
    match_graphs, match_piw, CostMatrix, DirectionMethod, MatchResult, ProblemInstance,
    RelaxationKind, SolverConfig, WcsError, WeightedGraph,
};

/// Weighted common subgraph matching.
#[derive(Parser)]
#[command(name = "wcs-match", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance (graphs, cost, ground truth, params) to a directory.
    Generate(GenerateArgs),
    /// Match two graphs and print the result as JSON.
    Match(MatchArgs),
    /// Run a scenario sweep and write per-trial CSV plus a JSON summary.
    Bench(BenchArgs),
    /// Compare a solver run against exhaustive enumeration.
    OracleCheck(OracleArgs),
    /// Fit log-log time slopes per method from a bench CSV.
    Slope(SlopeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How the edge perturbation count is applied: each | total.
    #[arg(long, default_value = "each", value_parser = parse_perturbation)]
    perturbation: PerturbationCount,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value = "h1", value_parser = parse_relaxation)]
    relaxation: RelaxationKind,
    #[arg(long, default_value = "exact", value_parser = parse_direction)]
    direction: DirectionMethod,
    #[arg(long, default_value_t = 0.01)]
    dzeta: f64,
    #[arg(long, default_value_t = 100)]
    fw_max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    fw_gap_tol: f64,
    /// Use the gradient without the α factor on the structural term.
    #[arg(long)]
    literal_gradient: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            zeta_step: self.dzeta,
            fw_max_iters: self.fw_max_iters,
            fw_gap_tol: self.fw_gap_tol,
            literal_gradient: self.literal_gradient,
            ..SolverConfig::new(self.relaxation, self.direction)
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    g: PathBuf,
    #[arg(long)]
    h: PathBuf,
    /// Headerless CSV cost matrix; defaults to label distances, or zeros.
    #[arg(long)]
    cost: Option<PathBuf>,
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Ground-truth assignment; adds an accuracy field to the output.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Write the per-ζ trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_scenario)]
    scenario: ScenarioKind,
    #[arg(long, default_value = "wcs", value_parser = parse_mode)]
    mode: Mode,
    /// Trials per sweep point; defaults to the grid's own count.
    #[arg(long)]
    trials: Option<usize>,
    /// Use the full-size grids instead of the desk-scale ones.
    #[arg(long)]
    full_scale: bool,
    /// Comma-separated methods such as h1-exact,h2-fast,piw.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "each", value_parser = parse_perturbation)]
    perturbation: PerturbationCount,
    #[arg(long, default_value_t = 0.01)]
    dzeta: f64,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Instance directory written by `generate`.
    #[arg(long, conflicts_with = "batch")]
    instance: Option<PathBuf>,
    /// Number of random generated instances to check instead.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SlopeArgs {
    /// Per-trial CSV from `bench`.
    #[arg(long)]
    records: PathBuf,
    /// Size column used as the abscissa: m | n.
    #[arg(long, default_value = "m")]
    by: String,
}

fn parse_relaxation(s: &str) -> Result<RelaxationKind, String> {
    s.parse().map_err(|e: WcsError| e.to_string())
}

fn parse_direction(s: &str) -> Result<DirectionMethod, String> {
    s.parse().map_err(|e: WcsError| e.to_string())
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: WcsError| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: WcsError| e.to_string())
}

fn parse_perturbation(s: &str) -> Result<PerturbationCount, String> {
    match s {
        "each" => Ok(PerturbationCount::Each),
        "total" => Ok(PerturbationCount::Total),
        other => Err(format!(
            "unknown perturbation mode '{other}' (each | total)"
        )),
    }
}

type CliResult<T> = Result<T, String>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn build_instance(
    g: WeightedGraph,
    h: WeightedGraph,
    cost: Option<CostMatrix>,
    l: usize,
    alpha: f64,
) -> CliResult<ProblemInstance> {
    let cost = match cost {
        Some(c) => c,
        None if g.labels().is_some() && h.labels().is_some() => {
            CostMatrix::from_labels(&g, &h).map_err(err)?
        }
        None => CostMatrix::zeros(g.size(), h.size()),
    };
    ProblemInstance::new(g, h, cost, l, alpha).map_err(err)
}

fn run_solver(instance: &ProblemInstance, config: &SolverConfig) -> CliResult<MatchResult> {
    let result = if config.relaxation == RelaxationKind::Piw {
        match_piw(instance, config)
    } else {
        match_graphs(instance, config)
    };
    result.map_err(err)
}

fn cmd_generate(args: GenerateArgs) -> CliResult<ExitCode> {
    let params = GeneratorParams {
        m: args.m,
        n: args.n,
        l: args.l,
        sigma: args.sigma,
        density: args.density,
        seed: args.seed,
        perturbation: args.perturbation,
    };
    let inst = generate_instance(&params).map_err(err)?;
    fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    write(
        &args.out.join("graph_g.json"),
        &io::graph_to_json(&inst.graph_g),
    )?;
    write(
        &args.out.join("graph_h.json"),
        &io::graph_to_json(&inst.graph_h),
    )?;
    write(&args.out.join("cost.csv"), &io::cost_to_csv(&inst.cost))?;
    let gt = inst
        .ground_truth
        .as_ref()
        .expect("generated instances carry ground truth");
    write(
        &args.out.join("gt.json"),
        &io::partial_permutation_to_json(gt),
    )?;
    write(&args.out.join("params.json"), &io::params_to_json(&params))?;
    eprintln!("wrote instance to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn exit_for(result: &MatchResult) -> ExitCode {
    if result.discretized_by_fallback {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_match(args: MatchArgs) -> CliResult<ExitCode> {
    let g =
        io::parse_graph_json(&read(&args.g)?).map_err(|e| format!("{}: {e}", args.g.display()))?;
    let h =
        io::parse_graph_json(&read(&args.h)?).map_err(|e| format!("{}: {e}", args.h.display()))?;
    let cost = match &args.cost {
        Some(p) => {
            Some(io::parse_cost_csv(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?)
        }
        None => None,
    };
    let gt = match &args.gt {
        Some(p) => Some(
            io::parse_partial_permutation_json(&read(p)?)
                .map_err(|e| format!("{}: {e}", p.display()))?,
        ),
        None => None,
    };
    let instance = build_instance(g, h, cost, args.l, args.alpha)?;
    let result = run_solver(&instance, &args.solver.config())?;
    let accuracy = match &gt {
        Some(gt) => Some(synth::accuracy(&result.assignment, gt).map_err(err)?),
        None => None,
    };
    if let Some(p) = &args.trace {
        write(p, &io::trace_to_jsonl(&result.trace))?;
    }
    let report = MatchReport::new(&result, accuracy);
    println!("{}", serde_json::to_string_pretty(&report).map_err(err)?);
    Ok(exit_for(&result))
}

fn threads_from_env() -> CliResult<usize> {
    match std::env::var("WCS_MATCH_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("WCS_MATCH_THREADS must be a non-negative integer, got '{v}'")),
        Err(_) => Ok(0),
    }
}

fn cmd_bench(args: BenchArgs) -> CliResult<ExitCode> {
    let mut spec = if args.full_scale {
        ScenarioSpec::full(args.scenario, args.mode)
    } else {
        ScenarioSpec::desk(args.scenario, args.mode)
    };
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(names) = &args.methods {
        spec.methods = names
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_, WcsError>>()
            .map_err(err)?;
    }
    spec.seed = args.seed;
    spec.perturbation = args.perturbation;
    spec.validate().map_err(err)?;
    let config = SolverConfig {
        zeta_step: args.dzeta,
        ..SolverConfig::default()
    };
    config.validate().map_err(err)?;
    let threads = threads_from_env()?;
    fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;

    let progress = |done: usize, total: usize| eprintln!("[{done}/{total}] instances");
    let records =
        synth::run_scenario_with_progress(&spec, &config, threads, &progress).map_err(err)?;

    let stem = format!("{}_{}", args.scenario, args.mode);
    let csv_path = args.out.join(format!("{stem}.csv"));
    let mut w =
        csv::Writer::from_path(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?;
    for r in &records {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(err)?;
    let summary = synth::summarize(&records);
    let json_path = args.out.join(format!("{stem}_summary.json"));
    write(
        &json_path,
        &serde_json::to_string_pretty(&summary).map_err(err)?,
    )?;

    for row in &summary {
        eprintln!(
            "{:>8} {:<9} acc {:.3} ± {:.3}  time {:.3}s{}",
            row.sweep_value,
            row.method,
            row.mean_acc,
            row.std_acc,
            row.mean_time,
            if row.failures > 0 {
                format!("  ({} failed)", row.failures)
            } else {
                String::new()
            }
        );
    }
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    Ok(if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct OracleReport {
    optimum: f64,
    candidates: u128,
    method_objective: f64,
    ratio: f64,
    attained: bool,
    fallback: bool,
}

fn oracle_report(instance: &ProblemInstance, config: &SolverConfig) -> CliResult<OracleReport> {
    let oracle = brute_force_min(instance).map_err(err)?;
    let result = run_solver(instance, config)?;
    let value = result.objective_f;
    let best = oracle.best_value;
    let tol = 1e-9 * (1.0 + best.abs());
    let attained = value <= best + tol;
    let ratio = if attained {
        1.0
    } else if best > 0.0 {
        value / best
    } else {
        f64::INFINITY
    };
    Ok(OracleReport {
        optimum: best,
        candidates: oracle.num_candidates,
        method_objective: value,
        ratio,
        attained,
        fallback: result.discretized_by_fallback,
    })
}

fn load_instance_dir(dir: &Path) -> CliResult<ProblemInstance> {
    let g = io::parse_graph_json(&read(&dir.join("graph_g.json"))?).map_err(err)?;
    let h = io::parse_graph_json(&read(&dir.join("graph_h.json"))?).map_err(err)?;
    let cost_path = dir.join("cost.csv");
    let cost = if cost_path.exists() {
        Some(io::parse_cost_csv(&read(&cost_path)?).map_err(err)?)
    } else {
        None
    };
    let params_path = dir.join("params.json");
    let l = if params_path.exists() {
        io::parse_params_json(&read(&params_path)?).map_err(err)?.l
    } else {
        let gt = io::parse_partial_permutation_json(&read(&dir.join("gt.json"))?).map_err(err)?;
        gt.size()
    };
    build_instance(g, h, cost, l, 1.0)
}

#[derive(Serialize)]
struct BatchReport {
    instances: usize,
    attained: usize,
    attainment_rate: f64,
    median_ratio: f64,
    below_oracle: usize,
    fallbacks: usize,
}

fn cmd_oracle_check(args: OracleArgs) -> CliResult<ExitCode> {
    let config = args.solver.config();
    if let Some(dir) = &args.instance {
        let instance = load_instance_dir(dir)?;
        let report = oracle_report(&instance, &config)?;
        println!("{}", serde_json::to_string_pretty(&report).map_err(err)?);
        return Ok(ExitCode::SUCCESS);
    }
    let count = args.batch.ok_or("give --instance DIR or --batch COUNT")?;
    if count == 0 {
        return Err("--batch must be positive".into());
    }
    let mut ratios = Vec::with_capacity(count);
    let (mut attained, mut below, mut fallbacks) = (0, 0, 0);
    for k in 0..count {
        let params = GeneratorParams {
            m: args.m,
            n: args.n,
            l: args.l,
            sigma: args.sigma,
            density: args.density,
            seed: args.seed.wrapping_add(k as u64),
            perturbation: PerturbationCount::Each,
        };
        let instance = generate_instance(&params).map_err(err)?;
        let r = oracle_report(&instance, &config)?;
        attained += r.attained as usize;
        below += (r.method_objective < r.optimum - 1e-9 * (1.0 + r.optimum.abs())) as usize;
        fallbacks += r.fallback as usize;
        ratios.push(r.ratio);
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let mid = count / 2;
    let median = if count % 2 == 1 {
        ratios[mid]
    } else {
        0.5 * (ratios[mid - 1] + ratios[mid])
    };
    let report = BatchReport {
        instances: count,
        attained,
        attainment_rate: attained as f64 / count as f64,
        median_ratio: median,
        below_oracle: below,
        fallbacks,
    };
    println!("{}", serde_json::to_string_pretty(&report).map_err(err)?);
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SlopeRow {
    method: String,
    slope: f64,
    sizes: usize,
}

fn cmd_slope(args: SlopeArgs) -> CliResult<ExitCode> {
    let mut reader = csv::Reader::from_path(&args.records)
        .map_err(|e| format!("{}: {e}", args.records.display()))?;
    let records: Vec<TrialRecord> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let size_of = |r: &TrialRecord| -> CliResult<f64> {
        match args.by.as_str() {
            "m" => Ok(r.m as f64),
            "n" => Ok(r.n as f64),
            other => Err(format!("--by must be m or n, got '{other}'")),
        }
    };
    let mut methods: Vec<String> = Vec::new();
    for r in &records {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    let mut rows = Vec::new();
    for method in methods {
        let mut samples = Vec::new();
        for r in records
            .iter()
            .filter(|r| r.method == method && r.error.is_none())
        {
            samples.push((size_of(r)?, r.wall_time_secs));
        }
        let mut sizes: Vec<f64> = samples.iter().map(|s| s.0).collect();
        sizes.sort_by(|a, b| a.total_cmp(b));
        sizes.dedup();
        let slope = fit_time_slope(&samples).map_err(|e| format!("{method}: {e}"))?;
        rows.push(SlopeRow {
            method,
            slope,
            sizes: sizes.len(),
        });
    }
    println!("{}", serde_json::to_string_pretty(&rows).map_err(err)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for discretization fallbacks, so usage errors
    // report 1 instead of clap's default.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Match(a) => cmd_match(a),
        Command::Bench(a) => cmd_bench(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::Slope(a) => cmd_slope(a),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
