//! `hyperbp` command-line driver.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperbp::ar::{AblationVariant, ArConfig, ArDecoder, Checkpoint, Trainer};
use hyperbp::bp::{BpConfig, CheckRule, DEFAULT_TAYLOR_Q};
use hyperbp::harness::{self, BerConfig, BerReport, DecoderSpec, TrainOptions};
use hyperbp::{catalog, ParityCheckCode};

#[derive(Parser)]
#[command(name = "hyperbp", version, about = "BP and hypernetwork decoders for binary block codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo bit-error rate of a decoder.
    Ber(BerArgs),
    /// Train the hypernetwork decoder.
    Train(TrainArgs),
    /// Train and evaluate several ablation variants from one seed.
    Ablate(AblateArgs),
    /// Closed-form operation counts.
    Cost(CostArgs),
    /// Probe decoder antisymmetry under a global LLR sign flip.
    Symcheck(SymArgs),
    /// BP against the exhaustive MAP decoder on matched frames.
    OracleCompare(OracleArgs),
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Catalog id (BCH_63_51, POLAR_64_32, HAMMING_7_4, SPC_4, ...) or a
    /// parity-check matrix file (alist or dense).
    #[arg(long)]
    code: String,
    /// Generator matrix file to pair with a parity-check file.
    #[arg(long)]
    gen: Option<PathBuf>,
}

impl CodeArgs {
    fn load(&self) -> Result<ParityCheckCode> {
        catalog::load(&self.code, self.gen.as_deref()).with_context(|| format!("loading code '{}'", self.code))
    }
}

#[derive(Args, Clone)]
struct StopArgs {
    /// Stop a point after this many bit errors.
    #[arg(long, default_value_t = 500)]
    min_errors: u64,
    /// ...or after this many frames.
    #[arg(long, default_value_t = 10_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderKind {
    Bp,
    ArHyper,
    MapOracle,
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, value_enum, default_value = "bp")]
    decoder: DecoderKind,
    /// Comma-separated Eb/N0 values in dB.
    #[arg(long, value_delimiter = ',', default_value = "4,5,6")]
    snr: Vec<f64>,
    /// BP iterations (ignored for checkpoints, which carry their own).
    #[arg(long, default_value_t = 5)]
    iters: usize,
    /// Use the truncated Taylor check node in BP.
    #[arg(long)]
    taylor_q: Option<usize>,
    /// Stop BP once the syndrome is zero.
    #[arg(long)]
    early_exit: bool,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    stop: StopArgs,
    /// CSV output; a JSON mirror is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 20_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "full")]
    variant: AblationVariant,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = DEFAULT_TAYLOR_Q)]
    taylor_q: usize,
    /// Checkpoint file (written periodically and at the end).
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 1000)]
    checkpoint_every: u64,
    /// Continue from --checkpoint if it exists.
    #[arg(long)]
    resume: bool,
    /// Loss curve CSV (step,loss).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, value_delimiter = ',', default_value = "full,no-a,no-e,no-z,no-p,zero-codeword")]
    variants: Vec<AblationVariant>,
    #[arg(long, default_value_t = 2000)]
    steps: u64,
    #[arg(long, value_delimiter = ',', default_value = "4,5,6")]
    snr: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = DEFAULT_TAYLOR_Q)]
    taylor_q: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    stop: StopArgs,
    /// Directory for per-variant checkpoints.
    #[arg(long, default_value = "checkpoints")]
    checkpoint: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SymArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, value_enum, default_value = "bp")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    /// Trained decoder; without it a randomly initialised one is probed.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    snr: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Frames per SNR point, identical for both decoders.
    #[arg(long, default_value_t = 20_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_report(report: &BerReport, out: Option<&Path>) -> Result<()> {
    write_or_print(out, &report.to_csv())?;
    if let Some(path) = out {
        let json = path.with_extension("json");
        if json != path {
            fs::write(&json, report.to_json()?)?;
        }
    }
    Ok(())
}

fn load_model(path: &Path, code: &ParityCheckCode) -> Result<ArDecoder> {
    let ck = Checkpoint::load(path).with_context(|| format!("reading checkpoint {}", path.display()))?;
    Ok(ck.into_model(code.clone())?)
}

fn ber_config(snr: Vec<f64>, seed: u64, stop: &StopArgs) -> BerConfig {
    BerConfig {
        snrs_db: snr,
        min_errors: stop.min_errors,
        max_frames: stop.max_frames,
        seed,
        workers: stop.workers,
        ..BerConfig::default()
    }
}

fn ar_config(iters: usize, taylor_q: usize) -> ArConfig {
    ArConfig {
        iterations: iters,
        taylor_q,
        ..ArConfig::default()
    }
}

fn ber(args: BerArgs) -> Result<()> {
    let code = args.code.load()?;
    let decoder = match args.decoder {
        DecoderKind::Bp => DecoderSpec::Bp(BpConfig {
            iterations: args.iters,
            rule: args.taylor_q.map_or(CheckRule::Exact, CheckRule::Taylor),
            early_exit: args.early_exit,
        }),
        DecoderKind::ArHyper => {
            let Some(path) = &args.checkpoint else {
                bail!("--decoder ar-hyper needs --checkpoint");
            };
            DecoderSpec::ArHyper(Box::new(load_model(path, &code)?))
        }
        DecoderKind::MapOracle => DecoderSpec::map_oracle(&code)?,
    };
    let report = harness::run_ber(&decoder, &code, &ber_config(args.snr, args.seed, &args.stop))?;
    emit_report(&report, args.out.as_deref())
}

fn train(args: TrainArgs) -> Result<()> {
    let code = args.code.load()?;
    let opts = TrainOptions {
        steps: args.steps,
        seed: args.seed,
        variant: args.variant,
        config: ar_config(args.iters, args.taylor_q),
        checkpoint: args.checkpoint.clone(),
        checkpoint_every: args.checkpoint_every,
        resume: args.resume,
    };
    let outcome = harness::run_training(&code, &opts)?;
    if let Some(out) = &args.out {
        harness::write_loss_curve(out, &outcome.losses, args.resume)?;
    } else {
        print!("{}", harness::loss_curve_csv(&outcome.losses));
    }
    eprintln!("checkpoint: {}", args.checkpoint.display());
    Ok(())
}

fn ablate(args: AblateArgs) -> Result<()> {
    let code = args.code.load()?;
    let rows = harness::run_ablation(
        &code,
        &args.variants,
        args.steps,
        &ar_config(args.iters, args.taylor_q),
        args.seed,
        &ber_config(args.snr, args.seed, &args.stop),
        &args.checkpoint,
    )?;
    write_or_print(args.out.as_deref(), &harness::ablation_csv(&rows))
}

fn cost(args: CostArgs) -> Result<()> {
    let code = args.code.load()?;
    let c = harness::cost_for_code(&code, args.iters)?;
    let body = format!(
        "code,iters,base_ops,hyper_ops_delta,ar_ops_delta,overhead_ratio\n{},{},{},{},{},{}\n",
        code.name(),
        args.iters,
        c.base_ops,
        c.hyper_ops_delta,
        c.ar_ops_delta,
        c.overhead_ratio
    );
    write_or_print(args.out.as_deref(), &body)
}

fn symcheck(args: SymArgs) -> Result<()> {
    let code = args.code.load()?;
    let decoder = match args.decoder {
        DecoderKind::Bp => DecoderSpec::bp(args.iters),
        DecoderKind::ArHyper => {
            let model = match &args.checkpoint {
                Some(path) => load_model(path, &code)?,
                None => {
                    let config = ar_config(args.iters, DEFAULT_TAYLOR_Q);
                    Trainer::new(code.clone(), config, AblationVariant::Full, args.seed)?.model
                }
            };
            DecoderSpec::ArHyper(Box::new(model))
        }
        DecoderKind::MapOracle => bail!("the MAP oracle exchanges no messages"),
    };
    let r = harness::check_symmetry(&decoder, &code, args.trials, args.seed)?;
    println!(
        "{{\"max_message_asymmetry\":{:e},\"violated\":{}}}",
        r.max_message_asymmetry, r.violated
    );
    Ok(())
}

fn oracle_compare(args: OracleArgs) -> Result<()> {
    let code = args.code.load()?;
    let stop = StopArgs {
        min_errors: u64::MAX,
        max_frames: args.max_frames,
        workers: args.workers,
    };
    let cfg = ber_config(args.snr, args.seed, &stop);
    let bp = harness::run_ber(&DecoderSpec::bp(args.iters), &code, &cfg)?;
    let map = harness::run_ber(&DecoderSpec::map_oracle(&code)?, &code, &cfg)?;
    for (m, b) in map.points.iter().zip(&bp.points) {
        eprintln!(
            "{} dB: map {} bit / {} frame errors, bp {} / {} ({} frames)",
            m.snr_db, m.bit_errors, m.frame_errors, b.bit_errors, b.frame_errors, m.frames_run
        );
    }
    let mut points = bp.points;
    points.extend(map.points);
    emit_report(&BerReport::new(points), args.out.as_deref())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Ber(a) => ber(a),
        Command::Train(a) => train(a),
        Command::Ablate(a) => ablate(a),
        Command::Cost(a) => cost(a),
        Command::Symcheck(a) => symcheck(a),
        Command::OracleCompare(a) => oracle_compare(a),
    }
}
