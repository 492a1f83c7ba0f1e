use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use zeronoise::constants::{self, ConstantsLedger, Stage2Inputs};
use zeronoise::diagnostics::fbm_test;
use zeronoise::experiment::{
    outcome_row, run_batch, run_sweep, summarize, sweep_row, ExperimentConfig, Manifest, OUTCOMES_HEADER,
    SWEEP_HEADER, VERSION,
};
use zeronoise::Error;

#[derive(Parser)]
#[command(name = "zeronoise", version, about = "Zero-noise selection experiments for fBm-driven ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one batch of paths at the model noise level.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Also write every solution path as a binary file under paths/.
        #[arg(long)]
        save_paths: bool,
    },
    /// Run one batch per configured noise level and tabulate the selection law.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve and verify the proof constants for one parameter tuple.
    Constants(ConstantsArgs),
    /// Statistical self-test of the fBm generator.
    FbmTest {
        #[arg(long)]
        hurst: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config, or a manifest from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Overwrite an existing output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, allow_hyphen_values = true, required_unless_present = "verify")]
    gamma: Option<f64>,
    #[arg(long, required_unless_present = "verify")]
    hurst: Option<f64>,
    #[arg(long, required_unless_present = "verify")]
    alpha: Option<f64>,
    #[arg(long, required_unless_present = "verify")]
    kappa: Option<f64>,
    /// JSON file with c_b, c_g, lambda, k_ell, k_gamma, amplitude and optional vartheta.
    #[arg(long)]
    inputs: Option<PathBuf>,
    /// Write the ledger JSON here instead of after the table on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-check a saved ledger instead of solving.
    #[arg(long, conflicts_with_all = ["gamma", "hurst", "alpha", "kappa", "inputs"])]
    verify: Option<PathBuf>,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter { .. }
            | Error::Config { .. }
            | Error::OffGrid { .. }
            | Error::GridMismatch(..)
            | Error::CapExceeded { .. }
            | Error::Unsupported(_)
            | Error::Refused(_)
            | Error::Format(_) => 2,
            Error::Infeasible(_) => 3,
            Error::Domain(_) | Error::NotPositiveDefinite { .. } | Error::Integration { .. } => 4,
            Error::Io(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: format!("i/o error: {e}") }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { run, save_paths } => with_workers(run.workers, || simulate(&run, save_paths)),
        Command::Sweep { run } => with_workers(run.workers, || sweep(&run)),
        Command::Constants(args) => constants_cmd(&args),
        Command::FbmTest { hurst, n, samples, seed, workers, out } => with_workers(workers, || {
            let report = fbm_test(hurst, n, samples, seed)?;
            emit_json(&serde_json::to_value(&report).expect("report serializes"), out.as_deref())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn with_workers(workers: Option<usize>, job: impl FnOnce() -> Outcome + Send) -> Outcome {
    match workers {
        None => job(),
        Some(0) => Err(config_error("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure { code: 1, message: format!("thread pool: {e}") })?
            .install(job),
    }
}

fn load_run(run: &RunArgs) -> Outcome<(ExperimentConfig, bool)> {
    let text = fs::read_to_string(&run.config)
        .map_err(|e| config_error(format!("cannot read {}: {e}", run.config.display())))?;
    let manifest = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .filter(|v| v.get("config_hash").is_some())
        .map(|_| Manifest::from_json(&text))
        .transpose()?;
    let (mut cfg, saved) = match manifest {
        Some(m) => (m.config, m.save_paths),
        None => (ExperimentConfig::from_json(&text)?, false),
    };
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    Ok((cfg, saved))
}

fn prepare_out(run: &RunArgs) -> Outcome {
    let dir = &run.out;
    if dir.exists() {
        let empty = dir.is_dir() && fs::read_dir(dir)?.next().is_none();
        if !empty && !run.force {
            return Err(config_error(format!(
                "output directory {} already exists; pass --force to overwrite",
                dir.display()
            )));
        }
        if !dir.is_dir() {
            return Err(config_error(format!("{} exists and is not a directory", dir.display())));
        }
        let stale = dir.join("paths");
        if stale.is_dir() {
            fs::remove_dir_all(stale)?;
        }
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_text(path: &FsPath, text: &str) -> Outcome {
    fs::write(path, text)?;
    Ok(())
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn simulate(run: &RunArgs, save_paths: bool) -> Outcome {
    let (cfg, saved) = load_run(run)?;
    let save_paths = save_paths || saved;
    let epsilon = cfg.model.epsilon;
    prepare_out(run)?;
    let batch = run_batch(&cfg, epsilon, 0, save_paths)?;
    let summary = summarize(&batch);

    let mut csv = String::from(OUTCOMES_HEADER);
    csv.push('\n');
    for r in &batch.records {
        csv.push_str(&outcome_row(r));
        csv.push('\n');
    }
    write_text(&run.out.join("outcomes.csv"), &csv)?;

    if let Some(paths) = &batch.paths {
        let dir = run.out.join("paths");
        fs::create_dir_all(&dir)?;
        for (i, p) in paths.iter().enumerate() {
            let mut w = BufWriter::new(fs::File::create(dir.join(format!("path_{i:06}.fsel")))?);
            zeronoise::io::write_binary(p, &mut w)?;
            w.flush()?;
        }
    }

    let doc = json!({
        "version": VERSION,
        "config_hash": cfg.hash(),
        "summary": summary,
    });
    write_text(&run.out.join("summary.json"), &pretty(&doc))?;
    let mut manifest = Manifest::new("simulate", &cfg);
    manifest.save_paths = save_paths;
    write_text(&run.out.join("manifest.json"), &pretty(&manifest))?;

    println!(
        "{} paths at ε = {epsilon}: P(+) = {:.4}, P(−) = {:.4}, undecided = {:.4} -> {}",
        summary.n_paths,
        summary.p_plus,
        summary.p_minus,
        summary.undecided,
        run.out.display()
    );
    Ok(())
}

fn sweep(run: &RunArgs) -> Outcome {
    let (cfg, _) = load_run(run)?;
    cfg.validate()?;
    if cfg.epsilons.len() < 2 {
        return Err(config_error("config error at epsilons: sweep needs at least two noise levels"));
    }
    prepare_out(run)?;
    let summaries = run_sweep(&cfg)?;

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for s in &summaries {
        csv.push_str(&sweep_row(s));
        csv.push('\n');
    }
    write_text(&run.out.join("sweep.csv"), &csv)?;
    let doc = json!({
        "version": VERSION,
        "config_hash": cfg.hash(),
        "levels": summaries,
    });
    write_text(&run.out.join("summary.json"), &pretty(&doc))?;
    write_text(&run.out.join("manifest.json"), &pretty(&Manifest::new("sweep", &cfg)))?;
    print!("{csv}");
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &FsPath) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn constants_cmd(args: &ConstantsArgs) -> Outcome {
    if let Some(path) = &args.verify {
        let ledger: ConstantsLedger = read_json(path)?;
        let report = constants::verify_ledger(&ledger, ledger.gamma, ledger.hurst);
        print!("{}", report.table());
        for note in &report.notes {
            println!("note: {note}");
        }
        if !report.ok {
            let names: Vec<&str> = report.failing().map(|f| f.name.as_str()).collect();
            return Err(Failure { code: 3, message: format!("ledger fails: {}", names.join(", ")) });
        }
        return Ok(());
    }
    let inputs = match &args.inputs {
        Some(p) => read_json::<Stage2Inputs>(p)?,
        None => Stage2Inputs::default(),
    };
    let (gamma, hurst, alpha, kappa) = (
        args.gamma.expect("clap enforces"),
        args.hurst.expect("clap enforces"),
        args.alpha.expect("clap enforces"),
        args.kappa.expect("clap enforces"),
    );
    let ledger = constants::solve(gamma, hurst, alpha, kappa, &inputs)?;
    let report = constants::verify_ledger(&ledger, gamma, hurst);
    print!("{}", report.table());
    for note in &report.notes {
        println!("note: {note}");
    }
    let text = pretty(&ledger);
    match &args.out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(value: &serde_json::Value, out: Option<&FsPath>) -> Outcome {
    let text = pretty(value);
    match out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
