//! `icmodem`: simulate multiuser scenarios, run the receiver, sweep FER grids.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use icmodem::channel::{GroundTruth, RealizedScenario, Scenario};
use icmodem::codec::CodecConfig;
use icmodem::harness::report::{caf_rows, diag_rows, score_rows, verdict_rows};
use icmodem::harness::{run_grid, score, to_baseband, GridSpec, Score};
use icmodem::ic::{Pipeline, ReceiverConfig};
use icmodem::io::{read_f32_le, read_truth_csv, write_csv, write_f32_le, write_f32_le_to};
use icmodem::rx::detect::{segment_origin, window_stats, PilotBank};
use icmodem::rx::{BasebandSignal, EqMode};
use icmodem::{Execution, ModemParams};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const THREADS_ENV: &str = "ICMODEM_THREADS";

#[derive(Parser)]
#[command(name = "icmodem", version, about = "Underwater acoustic random-access modem simulator and receiver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scenario to a raw float32 LE signal at 192 kHz plus a ground-truth CSV.
    Simulate(SimulateArgs),
    /// Run the receiver on a signal file or directly on a scenario.
    Receive(ReceiveArgs),
    /// FER grid over packet-IC rounds, signal-IC rounds and equalizers.
    Grid(GridArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Output signal path.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth CSV path (default: <out> with extension `truth.csv`).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Overrides the scenario master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Render without the noise and impulse processes.
    #[arg(long)]
    no_noise: bool,
}

#[derive(Args)]
struct ReceiverArgs {
    /// Receiver configuration TOML; command-line options override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated user ids to search for.
    #[arg(long, value_delimiter = ',')]
    users: Option<Vec<u32>>,
    /// Run without data parallelism.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ReceiveArgs {
    /// Raw float32 LE signal, or a scenario TOML (`.toml`) rendered on the fly.
    input: PathBuf,
    /// Packet-IC rounds.
    #[arg(long, default_value_t = 2)]
    i2: usize,
    /// Signal-IC rounds.
    #[arg(long, default_value_t = 2)]
    i3: usize,
    /// Equalizer: rake, linear or ic-rake.
    #[arg(long, default_value = "ic-rake")]
    eq: EqMode,
    /// Scenario seed override (scenario input only).
    #[arg(long)]
    seed: Option<u64>,
    /// Verdict log CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Ground-truth CSV for scoring a signal file (default: sibling `.truth.csv` if present).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Score summary CSV (needs ground truth).
    #[arg(long)]
    score: Option<PathBuf>,
    /// Per-window CAF statistics of the first detection sweep.
    #[arg(long)]
    caf_dump: Option<PathBuf>,
    /// Per-iteration turbo diagnostics CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Directory receiving the baseband segment of every verdict (complex float32 LE).
    #[arg(long)]
    packet_dump: Option<PathBuf>,
    #[command(flatten)]
    receiver: ReceiverArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    #[arg(long, default_value_t = 3)]
    i2_max: usize,
    #[arg(long, default_value_t = 3)]
    i3_max: usize,
    /// Comma-separated equalizers.
    #[arg(long, value_delimiter = ',', default_value = "ic-rake")]
    modes: Vec<EqMode>,
    /// Overrides the scenario master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Long-format CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Aligned text table output (printed to stdout as well).
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    receiver: ReceiverArgs,
}

/// Errors caused by invalid input rather than a processing failure.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<ConfigError>()
            || matches!(
                c.downcast_ref::<icmodem::Error>(),
                Some(icmodem::Error::Config(_) | icmodem::Error::Scenario(_) | icmodem::Error::ScenarioParse { .. })
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|exec| match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Receive(a) => receive(a, exec),
        Command::Grid(a) => grid(a, exec),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

/// Sizes the worker pool from the environment; one thread means sequential.
fn init_threads() -> Result<Execution> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(Execution::Parallel);
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_error(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(if n == 1 { Execution::Sequential } else { Execution::Parallel })
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read scenario {}: {e}", path.display())))?;
    let mut sc = Scenario::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(s) = seed {
        sc.master_seed = s;
    }
    Ok(sc)
}

fn realize(sc: &Scenario) -> Result<RealizedScenario> {
    Ok(sc.realize(&ModemParams::default(), &CodecConfig::default())?)
}

fn receiver_config(args: &ReceiverArgs, exec: Execution) -> Result<ReceiverConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        None => ReceiverConfig::default(),
    };
    if let Some(users) = &args.users {
        cfg.users = users.clone();
    }
    cfg.execution = if args.sequential { Execution::Sequential } else { exec };
    if cfg.users.is_empty() {
        return Err(config_error("no users to search for"));
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn default_truth_path(signal: &Path) -> PathBuf {
    signal.with_extension("truth.csv")
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let sc = load_scenario(&a.scenario, a.seed)?;
    let r = realize(&sc)?;
    let t0 = Instant::now();
    let mut signal = vec![0.0; (sc.duration_s * r.params.sample_rate).round() as usize];
    r.render_into(0, &mut signal, !a.no_noise, None)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_f32_le(&a.out, &signal)?;
    let truth_path = a.truth.unwrap_or_else(|| default_truth_path(&a.out));
    icmodem::io::write_truth_csv(create(&truth_path)?, &r.ground_truth())?;
    eprintln!(
        "{} packets, utilization {:.2}%, {:.1} s of signal -> {} ({:.1} s)",
        r.transmissions.len(),
        100.0 * r.utilization(),
        sc.duration_s,
        a.out.display(),
        t0.elapsed().as_secs_f64()
    );
    Ok(())
}

fn receive(a: ReceiveArgs, exec: Execution) -> Result<()> {
    let mut cfg = receiver_config(&a.receiver, exec)?;
    cfg.turbo.mode = a.eq;
    cfg.ic.packet_rounds = a.i2;
    cfg.ic.signal_rounds = a.i3;
    if a.i2 == 0 || a.i3 == 0 {
        return Err(config_error("--i2 and --i3 must be at least 1"));
    }
    let params = ModemParams::default();
    let t0 = Instant::now();
    let is_scenario = a.input.extension().is_some_and(|e| e == "toml");
    let (mut rb, truth): (BasebandSignal, Option<Vec<GroundTruth>>) = if is_scenario {
        let r = realize(&load_scenario(&a.input, a.seed)?)?;
        (to_baseband(&r, &params, &cfg)?, Some(r.ground_truth()))
    } else {
        let samples = read_f32_le(&a.input).map_err(|e| config_error(format!("{}: {e}", a.input.display())))?;
        let truth_path = a.truth.clone().or_else(|| Some(default_truth_path(&a.input)).filter(|p| p.exists()));
        let truth = match truth_path {
            Some(p) => {
                let f = File::open(&p).map_err(|e| config_error(format!("{}: {e}", p.display())))?;
                Some(read_truth_csv(f, CodecConfig::default().payload_bits)?)
            }
            None => None,
        };
        (to_baseband(&samples[..], &params, &cfg)?, truth)
    };

    if let Some(path) = &a.caf_dump {
        let bank = PilotBank::new(&cfg.users, &params)?;
        let stats = window_stats(&rb, &bank, &cfg.detector, &params, cfg.execution);
        write_csv(create(path)?, &caf_rows(&stats, &cfg.detector, &params))?;
    }
    let original = a.packet_dump.as_ref().map(|_| rb.clone());
    let pipeline = Pipeline::new(&params, &CodecConfig::default(), cfg)?;
    let out = pipeline.run(&mut rb)?;

    if let Some(path) = &a.report {
        write_csv(create(path)?, &verdict_rows(&out.verdicts))?;
    }
    if let Some(path) = &a.diagnostics {
        write_csv(create(path)?, &diag_rows(&out.log))?;
    }
    if let (Some(dir), Some(orig)) = (&a.packet_dump, &original) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for v in &out.verdicts {
            let (seg, _) = orig.extract(segment_origin(v.start, &params), params.segment_len());
            let flat: Vec<f64> = seg.iter().flat_map(|c| [c.re, c.im]).collect();
            let name = format!("u{}_{}_{}.c32", v.user, v.start, if v.crc_ok { "ok" } else { "fail" });
            let mut w = create(&dir.join(name))?;
            write_f32_le_to(&mut w, &flat)?;
            w.flush()?;
        }
    }

    let decoded = out.verdicts.iter().filter(|v| v.crc_ok).count();
    println!(
        "{} verdicts, {} CRC pass, detections per round {:?}",
        out.verdicts.len(),
        decoded,
        out.detections_per_round
    );
    match truth {
        Some(truth) => {
            let s = score(&out.verdicts, &truth, &params);
            print_score(&s);
            if let Some(path) = &a.score {
                write_csv(create(path)?, &score_rows(&s))?;
            }
        }
        None if a.score.is_some() => return Err(config_error("--score needs ground truth (--truth)")),
        None => {}
    }
    eprintln!("runtime {:.1} s", t0.elapsed().as_secs_f64());
    Ok(())
}

fn print_score(s: &Score) {
    println!(
        "FER {:.2}% ({} lost of {}), undetected errors {}, spurious {}",
        100.0 * s.fer(),
        s.lost(),
        s.total,
        s.undetected_errors,
        s.spurious
    );
    for u in &s.per_user {
        println!("  user {}: {}/{} received", u.user, u.received, u.total);
    }
}

fn grid(a: GridArgs, exec: Execution) -> Result<()> {
    if a.i2_max == 0 || a.i3_max == 0 || a.modes.is_empty() {
        return Err(config_error("grid needs i2-max, i3-max >= 1 and at least one mode"));
    }
    let cfg = receiver_config(&a.receiver, exec)?;
    let r = realize(&load_scenario(&a.scenario, a.seed)?)?;
    let t0 = Instant::now();
    let report = run_grid(
        &r,
        &cfg,
        &GridSpec {
            i2_max: a.i2_max,
            i3_max: a.i3_max,
            modes: a.modes.clone(),
        },
    )?;
    let table = report.to_table();
    print!("{table}");
    if let Some(path) = &a.table {
        create(path)?.write_all(table.as_bytes())?;
    }
    if let Some(path) = &a.csv {
        create(path)?.write_all(report.to_csv().as_bytes())?;
    }
    eprintln!("runtime {:.1} s", t0.elapsed().as_secs_f64());
    Ok(())
}
