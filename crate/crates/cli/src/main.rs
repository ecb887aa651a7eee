//! `eacode`: exact evaluation, classical search, Monte Carlo, seesaw and
//! tomography for entanglement-assisted coding over the butterfly channel.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use eacode::channel::{butterfly_channel, identity_channel, FiniteChannel};
use eacode::classical::best_deterministic_code;
use eacode::montecarlo::{estimate_success, run_trial_summary, Backend, RunMetadata, Source};
use eacode::optimizer::{multi_start, SeesawResult};
use eacode::protocol::{chsh_strategy, correlation_omega, exact_success, MeasurementStrategy};
use eacode::rng::SEED_ENV;
use eacode::states::{fidelity, phi_plus, phi_plus_ket, werner, DensityMatrix};
use eacode::tomography::{
    bootstrap_errors, mle_reconstruct_detailed, simulate_counts, BootstrapConfig, MleConfig,
    ReconstructionReport, TomoCounts, TomoSettings, ZeroCounts,
};
use eacode::Exec;

#[derive(Parser)]
#[command(name = "eacode", version, about = "Entanglement-assisted coding over the butterfly channel")]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact success probability of the entanglement-assisted protocol.
    Exact(ExactArgs),
    /// Best deterministic classical code.
    ClassicalOpt(ClassicalArgs),
    /// Monte Carlo run of the protocol.
    Simulate(SimulateArgs),
    /// Exact and simulated success across Werner states.
    Sweep(SweepArgs),
    /// Seesaw search over measurement angles from random starts.
    Seesaw(SeesawArgs),
    /// State tomography.
    #[command(subcommand)]
    Tomo(TomoCommand),
}

#[derive(Args)]
struct Resources {
    /// phi-plus, werner:<p>, maximally-mixed, or a density matrix JSON file.
    #[arg(long, default_value = "phi-plus")]
    state: String,
    /// chsh, or a strategy JSON file.
    #[arg(long, default_value = "chsh")]
    strategy: String,
    /// butterfly, identity:<n>, or a channel JSON file.
    #[arg(long, default_value = "butterfly")]
    channel: String,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    res: Resources,
}

#[derive(Args)]
struct ClassicalArgs {
    /// butterfly, identity:<n>, or a channel JSON file.
    #[arg(long, default_value = "butterfly")]
    channel: String,
    #[arg(long, default_value_t = 2)]
    messages: usize,
}

#[derive(Args)]
struct SeedArg {
    /// Master seed.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    res: Resources,
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value = "physical")]
    backend: Backend,
    /// Write the counts CSV here, with a manifest alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid p0:p1:points, endpoints included.
    #[arg(long)]
    werner: String,
    /// Trials per grid point.
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value = "direct")]
    backend: Backend,
    #[arg(long, default_value = "chsh")]
    strategy: String,
    #[arg(long, default_value = "butterfly")]
    channel: String,
    /// Write the sweep CSV here, with a manifest alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SeesawArgs {
    /// Number of random starts.
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value = "phi-plus")]
    state: String,
    #[arg(long, default_value = "butterfly")]
    channel: String,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write all runs as JSON here, with a manifest alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TomoCommand {
    /// Simulate Poisson coincidence counts for the 36 settings.
    Simulate(TomoSimulateArgs),
    /// Maximum-likelihood reconstruction from a counts CSV.
    Reconstruct(TomoReconstructArgs),
    /// Poisson bootstrap error bars for fidelity and tangle.
    Bootstrap(TomoBootstrapArgs),
}

#[derive(Args)]
struct TomoSimulateArgs {
    #[arg(long, default_value = "phi-plus")]
    state: String,
    /// Expected counts per unit probability.
    #[arg(long, default_value_t = 10_000.0)]
    scale: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// Write the counts CSV here, with a manifest alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MleArgs {
    /// Also report the fidelity to this state (same syntax as --state).
    #[arg(long)]
    reference: Option<String>,
    /// Return I/4 instead of failing when every count is zero.
    #[arg(long)]
    allow_empty: bool,
}

#[derive(Args)]
struct TomoReconstructArgs {
    counts: PathBuf,
    #[command(flatten)]
    mle: MleArgs,
    /// Write the reconstruction report JSON here, with a manifest alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TomoBootstrapArgs {
    counts: PathBuf,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    mle: MleArgs,
    /// Write the reconstruction report JSON here, with a manifest alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Tracks inputs read and outputs written for the run manifest.
struct Run {
    started: Instant,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: Vec<String>,
    version: &'a str,
    master_seed: Option<u64>,
    input_hashes: serde_json::Map<String, Value>,
    wall_clock_seconds: f64,
    outputs: serde_json::Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<Value>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Run {
    fn new() -> Self {
        Self {
            started: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push((path.display().to_string(), sha256_hex(text.as_bytes())));
        Ok(text)
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push((path.display().to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    /// Writes `<out stem>.manifest.json` next to the primary output.
    fn finish(mut self, out: &Path, seed: Option<u64>, details: Option<Value>) -> Result<()> {
        let to_map = |pairs: &[(String, String)]| {
            pairs.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()
        };
        let manifest = Manifest {
            command: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION"),
            master_seed: seed,
            input_hashes: to_map(&self.inputs),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: to_map(&self.outputs),
            details,
        };
        let path = out.with_extension("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        self.write(&path, &text)
    }
}

fn load_state(spec: &str, run: &mut Run) -> Result<DensityMatrix> {
    match spec {
        "phi-plus" => Ok(phi_plus()),
        "maximally-mixed" => Ok(DensityMatrix::maximally_mixed()),
        _ => {
            if let Some(p) = spec.strip_prefix("werner:") {
                let p: f64 = p.parse().with_context(|| format!("bad Werner weight {p:?}"))?;
                return Ok(werner(p)?);
            }
            Ok(DensityMatrix::from_json(&run.read(Path::new(spec))?)?)
        }
    }
}

fn load_strategy(spec: &str, run: &mut Run) -> Result<MeasurementStrategy> {
    match spec {
        "chsh" => Ok(chsh_strategy()),
        _ => Ok(MeasurementStrategy::from_json(&run.read(Path::new(spec))?)?),
    }
}

fn load_channel(spec: &str, run: &mut Run) -> Result<FiniteChannel> {
    if spec == "butterfly" {
        return Ok(butterfly_channel());
    }
    if let Some(n) = spec.strip_prefix("identity:") {
        let n: usize = n.parse().with_context(|| format!("bad identity size {n:?}"))?;
        if n == 0 {
            bail!("identity channel needs at least one symbol");
        }
        return Ok(identity_channel(n));
    }
    Ok(FiniteChannel::from_json(&run.read(Path::new(spec))?)?)
}

fn exec_mode(cli: &Cli) -> Exec {
    if cli.serial {
        Exec::Serial
    } else {
        Exec::default()
    }
}

fn print_json(value: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_exact(cli: &Cli, args: &ExactArgs) -> Result<()> {
    let mut run = Run::new();
    let rho = load_state(&args.res.state, &mut run)?;
    let strat = load_strategy(&args.res.strategy, &mut run)?;
    let ch = load_channel(&args.res.channel, &mut run)?;
    let success = exact_success(&rho, &strat, &ch)?;
    let omega = correlation_omega(&rho, &strat);
    if cli.json {
        print_json(&json!({ "success": success, "omega": omega }))
    } else {
        println!("{success:.6}");
        Ok(())
    }
}

fn cmd_classical(cli: &Cli, args: &ClassicalArgs) -> Result<()> {
    let mut run = Run::new();
    let ch = load_channel(&args.channel, &mut run)?;
    let (code, best) = best_deterministic_code(&ch, args.messages)?;
    if cli.json {
        return print_json(&json!({
            "success": best.value(),
            "exact": best.exact().map(|r| r.to_string()),
            "code": code,
        }));
    }
    println!("success    {:.6}{}", best.value(), best.exact().map(|r| format!(" ({r})")).unwrap_or_default());
    let enc: Vec<&str> = code.encoding.iter().map(|&x| ch.input_labels()[x].as_str()).collect();
    println!("encoding   {}", enc.join(" "));
    let dec: Vec<String> = ch
        .output_labels()
        .iter()
        .zip(&code.decoding)
        .map(|(y, q)| format!("{y}->{q}"))
        .collect();
    println!("decoding   {}", dec.join(" "));
    Ok(())
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let mut run = Run::new();
    let rho = load_state(&args.res.state, &mut run)?;
    let strat = load_strategy(&args.res.strategy, &mut run)?;
    let ch = load_channel(&args.res.channel, &mut run)?;
    let seed = args.seed.seed;
    let summary = run_trial_summary(Source::Quantum(&rho), &strat, &ch, args.n, seed, args.backend, exec_mode(cli))?;
    let (p, sigma) = estimate_success(&summary.counts)?;
    let exact = exact_success(&rho, &strat, &ch)?;
    let meta = RunMetadata {
        seed,
        n: args.n,
        backend: args.backend,
        strategy_hash: sha256_hex(strat.to_json()?.as_bytes()),
    };

    if cli.json {
        print_json(&json!({
            "success": p,
            "sigma": sigma,
            "exact": exact,
            "counts": summary.counts.counts,
            "run": meta,
        }))?;
    } else {
        println!("simulated  {p:.6} ± {sigma:.6}");
        println!("exact      {exact:.6}");
        println!("q  q_hat  count");
        for q in 0..2 {
            for k in 0..2 {
                println!("{q}  {k}      {}", summary.counts.counts[q][k]);
            }
        }
    }
    if let Some(out) = &args.out {
        run.write(out, &summary.counts.to_csv())?;
        run.finish(out, Some(seed), Some(serde_json::to_value(&meta)?))?;
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [p0, p1, steps] = parts.as_slice() else {
        bail!("grid must look like p0:p1:points, got {spec:?}");
    };
    let p0: f64 = p0.parse().with_context(|| format!("bad grid start {p0:?}"))?;
    let p1: f64 = p1.parse().with_context(|| format!("bad grid end {p1:?}"))?;
    let steps: usize = steps.parse().with_context(|| format!("bad point count {steps:?}"))?;
    match steps {
        0 => bail!("grid needs at least one point"),
        1 => Ok(vec![p0]),
        _ => Ok((0..steps)
            .map(|k| p0 + (p1 - p0) * k as f64 / (steps - 1) as f64)
            .collect()),
    }
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let mut run = Run::new();
    let grid = parse_grid(&args.werner)?;
    let strat = load_strategy(&args.strategy, &mut run)?;
    let ch = load_channel(&args.channel, &mut run)?;
    let seed = args.seed.seed;

    let mut rows = Vec::with_capacity(grid.len());
    for (k, &p) in grid.iter().enumerate() {
        let rho = werner(p)?;
        let exact = exact_success(&rho, &strat, &ch)?;
        // Grid point k draws from master seed + k.
        let summary = run_trial_summary(
            Source::Quantum(&rho),
            &strat,
            &ch,
            args.n,
            seed.wrapping_add(k as u64),
            args.backend,
            exec_mode(cli),
        )?;
        let (sim, sigma) = estimate_success(&summary.counts)?;
        rows.push((p, exact, sim, sigma));
    }

    let mut csv = String::from("p,exact,simulated,sigma\n");
    for (p, exact, sim, sigma) in &rows {
        writeln!(csv, "{p:.6},{exact:.6},{sim:.6},{sigma:.6}")?;
    }
    if cli.json {
        let items: Vec<Value> = rows
            .iter()
            .map(|(p, e, s, sg)| json!({ "p": p, "exact": e, "simulated": s, "sigma": sg }))
            .collect();
        print_json(&Value::Array(items))?;
    } else {
        print!("{csv}");
    }
    if let Some(out) = &args.out {
        run.write(out, &csv)?;
        run.finish(out, Some(seed), Some(json!({ "n_per_point": args.n, "backend": args.backend })))?;
    }
    Ok(())
}

fn cmd_seesaw(cli: &Cli, args: &SeesawArgs) -> Result<()> {
    let mut run = Run::new();
    let rho = load_state(&args.state, &mut run)?;
    let ch = load_channel(&args.channel, &mut run)?;
    if args.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let seeds: Vec<u64> = (0..args.seeds).map(|k| args.seed.seed.wrapping_add(k)).collect();
    let results = multi_start(&rho, &ch, &seeds, args.max_iters, args.tol, exec_mode(cli))?;
    let best = results
        .iter()
        .max_by(|a, b| a.final_objective.total_cmp(&b.final_objective))
        .expect("at least one seed");
    let above = results.iter().filter(|r| r.final_objective >= 5.0 / 6.0).count();
    let as_value = |r: &SeesawResult| -> Result<Value> { Ok(serde_json::from_str(&r.to_json())?) };
    let report = json!({
        "best": as_value(best)?,
        "runs": results
            .iter()
            .zip(&seeds)
            .map(|(r, s)| json!({ "seed": s, "final_objective": r.final_objective, "iterations": r.iterations }))
            .collect::<Vec<_>>(),
        "reached_classical_bound": above,
    });

    if cli.json {
        print_json(&report)?;
    } else {
        println!("best       {:.6}", best.final_objective);
        if let (Some(a), Some(b)) = (best.strategy.alice_angles(), best.strategy.bob_angles()) {
            println!("alice      {:.6} {:.6}", a[0], a[1]);
            println!("bob        {:.6} {:.6}", b[0], b[1]);
        }
        println!("runs >= 5/6  {above}/{}", results.len());
    }
    if let Some(out) = &args.out {
        run.write(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        run.finish(out, Some(args.seed.seed), None)?;
    }
    Ok(())
}

fn cmd_tomo_simulate(cli: &Cli, args: &TomoSimulateArgs) -> Result<()> {
    let mut run = Run::new();
    let rho = load_state(&args.state, &mut run)?;
    let settings = TomoSettings::canonical();
    let counts = simulate_counts(&rho, &settings, args.scale, args.seed.seed)?;
    let csv = counts.to_csv(&settings)?;
    if cli.json {
        let rows: Vec<Value> = settings
            .pairs()
            .iter()
            .zip(&counts.counts)
            .map(|((a, b), c)| json!({ "setting_alice": a.to_string(), "setting_bob": b.to_string(), "count": c }))
            .collect();
        print_json(&Value::Array(rows))?;
    } else if args.out.is_none() {
        print!("{csv}");
    } else {
        println!("total counts {}", counts.total());
    }
    if let Some(out) = &args.out {
        run.write(out, &csv)?;
        run.finish(out, Some(args.seed.seed), Some(json!({ "state": args.state, "scale": args.scale })))?;
    }
    Ok(())
}

fn mle_config(args: &MleArgs) -> MleConfig {
    MleConfig {
        zero_counts: if args.allow_empty { ZeroCounts::MaximallyMixed } else { ZeroCounts::Error },
        ..MleConfig::default()
    }
}

fn reconstruct(
    cli: &Cli,
    path: &Path,
    mle: &MleArgs,
    bootstrap: Option<(usize, u64)>,
    out: Option<&PathBuf>,
) -> Result<()> {
    let mut run = Run::new();
    let text = run.read(path)?;
    let (settings, counts): (TomoSettings, TomoCounts) = TomoCounts::from_csv(&text)?;
    let cfg = mle_config(mle);
    let outcome = mle_reconstruct_detailed(&counts, &settings, &cfg)?;
    let errors = match bootstrap {
        Some((runs, seed)) => {
            let mut b = BootstrapConfig::new(runs, seed);
            b.mle = cfg.clone();
            b.exec = exec_mode(cli);
            Some(bootstrap_errors(&counts, &settings, &b)?)
        }
        None => None,
    };
    let report = ReconstructionReport::new(&outcome, &phi_plus_ket(), errors)?;
    let reference = match &mle.reference {
        Some(spec) => Some(fidelity(&outcome.rho, &load_state(spec, &mut run)?)),
        None => None,
    };

    let mut value = serde_json::to_value(&report)?;
    if let Some(f) = reference {
        value["reference_fidelity"] = json!(f);
    }
    if cli.json {
        print_json(&value)?;
    } else {
        let m = &report.metrics;
        match &report.errors {
            Some(e) => {
                println!("fidelity   {:.6} (bootstrap {:.6} ± {:.6})", m.fidelity, e.fidelity.mean, e.fidelity.std);
                println!("tangle     {:.6} (bootstrap {:.6} ± {:.6})", m.tangle, e.tangle.mean, e.tangle.std);
            }
            None => {
                println!("fidelity   {:.6}", m.fidelity);
                println!("tangle     {:.6}", m.tangle);
            }
        }
        println!("purity     {:.6}", m.purity);
        if let Some(f) = reference {
            println!("reference  {f:.6}");
        }
    }
    if let Some(out) = out {
        run.write(out, &(serde_json::to_string_pretty(&value)? + "\n"))?;
        run.finish(out, bootstrap.map(|b| b.1), None)?;
    }
    Ok(())
}

fn run_cli(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Exact(a) => cmd_exact(cli, a),
        Command::ClassicalOpt(a) => cmd_classical(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Seesaw(a) => cmd_seesaw(cli, a),
        Command::Tomo(TomoCommand::Simulate(a)) => cmd_tomo_simulate(cli, a),
        Command::Tomo(TomoCommand::Reconstruct(a)) => reconstruct(cli, &a.counts, &a.mle, None, a.out.as_ref()),
        Command::Tomo(TomoCommand::Bootstrap(a)) => {
            if a.runs < 2 {
                return Err(anyhow!(eacode::Error::Domain("bootstrap needs at least two runs".into())));
            }
            reconstruct(cli, &a.counts, &a.mle, Some((a.runs, a.seed.seed)), a.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cli(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.chain().any(|e| e.is::<eacode::Error>()) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
