use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use singlet_core::config::{ResolvedScan, RunConfig};
use singlet_core::curve::ScanCurve;
use singlet_core::experiments::{add_noise, dip_scan_with, duration_scan_with, evolve_scan_with};
use singlet_core::fitting::{fit_curve, FitModel};
use singlet_core::io::{curve_to_string, read_curve, EfficiencyRow, EfficiencyTable, Format, TrajectoryTable};
use singlet_core::rate::{efficiency_curve, TransferSequence};
use singlet_core::sequence::{
    execute_from, ideal_m2s_duration, m2s_params_with, optimal_slic_duration, TauConvention,
};
use singlet_core::spin::DensityState;
use singlet_core::{Error, Result};

#[derive(Parser)]
#[command(name = "singlet", version, about = "Singlet-state preparation by SLIC and M2S: simulation, scans, fits")]
struct Cli {
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pulse sequence and write all observables at the record points.
    Simulate(RunArgs),
    /// Run a dip, duration or evolve scan and write the curve.
    Scan(RunArgs),
    /// Tabulate M2S and SLIC transfer efficiency against T1·Δν.
    Efficiency(EfficiencyArgs),
    /// Fit a curve file and print the result as JSON.
    Fit(FitArgs),
    /// Print M2S counts and spacing for a pair.
    M2sParams(M2sArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
    /// Seed for optional noise; overrides the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output file (default: the config's output path, else stdout).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(clap::Args)]
struct EfficiencyArgs {
    /// Config with an `efficiency` section (default grid if omitted).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(clap::Args)]
struct FitArgs {
    /// Curve file (CSV or JSON).
    #[arg(value_name = "CURVE")]
    curve: PathBuf,
    /// Model; defaults by scan type (dip: lorentzian, duration: sin4, evolve: exponential).
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Also write the result to this file.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct M2sArgs {
    /// J-coupling in Hz.
    #[arg(long = "j", value_name = "HZ", allow_negative_numbers = true)]
    j_hz: f64,
    /// Chemical-shift difference in Hz.
    #[arg(long = "dnu", value_name = "HZ", allow_negative_numbers = true)]
    delta_nu_hz: f64,
    #[arg(long, value_enum, default_value = "effective")]
    tau_convention: TauArg,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lorentzian,
    Sin4,
    Sin4Offset,
    Exponential,
}

#[derive(Clone, Copy, ValueEnum)]
enum TauArg {
    Effective,
    JOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "--threads", reason: "must be at least 1".into() });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Numerical(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Scan(args) => scan(&args),
        Command::Efficiency(args) => efficiency(&args),
        Command::Fit(args) => fit(&args),
        Command::M2sParams(args) => m2s_params(&args),
    }
}

/// Output destination and format: flags, then the config, then the file
/// extension, then CSV on stdout.
fn destination(out: &OutputArgs, config: Option<&RunConfig>) -> (Option<PathBuf>, Format) {
    let spec = config.and_then(|c| c.output.clone()).unwrap_or_default();
    let path = out.output.clone().or(spec.path);
    let format = match out.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => spec.format.or_else(|| path.as_deref().and_then(Format::from_path)).unwrap_or_default(),
    };
    (path, format)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print_stdout(text)?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::{ErrorKind, Write};
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn simulate(args: &RunArgs) -> Result<()> {
    let config = RunConfig::from_path(&args.config)?;
    let system = config.system()?;
    let seq = config.pulse_sequence(&system)?;
    let options = config.execution().options(false)?;
    let rho = DensityState::thermal(system.n_spins(), options.polarization)?;
    let trajectory = execute_from(&seq, &system, config.relaxation.as_ref(), &rho, &options)?;

    let mut metadata = BTreeMap::new();
    metadata.insert("system".to_string(), serde_json::to_value(&system)?);
    metadata.insert("sequence".to_string(), serde_json::to_value(config.sequence.as_ref())?);
    let starts: Vec<Value> = seq
        .elements()
        .iter()
        .zip(seq.start_times())
        .map(|(e, t)| json!({ "start_s": t, "element": e }))
        .collect();
    metadata.insert("elements".to_string(), Value::Array(starts));
    if let Some(p) = config.sequence.as_ref().map(|s| s.m2s_params(&system, options.pair)).transpose()?.flatten() {
        metadata.insert("m2s".to_string(), serde_json::to_value(p)?);
    }
    if let Some(r) = &config.relaxation {
        metadata.insert("relaxation".to_string(), serde_json::to_value(r)?);
    }
    let table = TrajectoryTable::new(&trajectory, metadata);
    let (path, format) = destination(&args.out, Some(&config));
    emit(path.as_deref(), &table.to_string(format)?)
}

fn scan(args: &RunArgs) -> Result<()> {
    let config = RunConfig::from_path(&args.config)?;
    let system = config.system()?;
    let relax = config.relaxation.as_ref();
    let round_trip = config.execution().options(true)?;
    let single_lock = config.execution().options(false)?;
    let mut curve = match config.resolved_scan(&system)? {
        ResolvedScan::Dip { tau_sl, grid } => dip_scan_with(&system, tau_sl, &grid, relax, &single_lock)?,
        ResolvedScan::Duration { nutation_hz, tau_evolve, grid } => {
            duration_scan_with(&system, nutation_hz, &grid, tau_evolve, relax, &round_trip)?
        }
        ResolvedScan::Evolve { nutation_hz, tau_sl, grid } => {
            let relax = relax.expect("validated");
            evolve_scan_with(&system, nutation_hz, tau_sl, &grid, relax, &round_trip)?
        }
    };
    if let Some(noise) = config.noise.filter(|n| n.sigma > 0.0) {
        let seed = args.seed.or(config.seed).unwrap_or(0);
        curve = add_noise(&curve, noise.sigma, seed)?.with_metadata("noise_sigma", noise.sigma);
    }
    let (path, format) = destination(&args.out, Some(&config));
    emit(path.as_deref(), &curve_to_string(&curve, format)?)
}

fn efficiency(args: &EfficiencyArgs) -> Result<()> {
    let config = args.config.as_deref().map(RunConfig::from_path).transpose()?;
    let spec = config.as_ref().map(RunConfig::efficiency_spec).unwrap_or_default();
    spec.validate()?;
    let grid = spec.t1_dnu.values("efficiency.t1_dnu")?;
    let mut rows = Vec::new();
    for &ratio in &spec.ts_over_t1 {
        let m2s = efficiency_curve(TransferSequence::M2s, &grid, ratio, spec.optimize_duration)?;
        let slic = efficiency_curve(TransferSequence::Slic, &grid, ratio, spec.optimize_duration)?;
        rows.extend(grid.iter().zip(m2s.y()).zip(slic.y()).map(|((&x, &m), &s)| EfficiencyRow {
            ts_over_t1: ratio,
            t1_dnu: x,
            eff_m2s: m,
            eff_slic: s,
        }));
    }
    let metadata = BTreeMap::from([("optimize_duration".to_string(), Value::from(spec.optimize_duration))]);
    let table = EfficiencyTable { rows, metadata };
    let (path, format) = destination(&args.out, config.as_ref());
    emit(path.as_deref(), &table.to_string(format)?)
}

fn default_model(curve: &ScanCurve) -> Result<FitModel> {
    use singlet_core::curve::ScanType;
    match curve.scan_type {
        ScanType::Dip => Ok(FitModel::Lorentzian),
        ScanType::Duration => Ok(FitModel::Sin4),
        ScanType::Evolve => Ok(FitModel::Exponential),
        ScanType::Efficiency => Err(Error::InvalidParameter {
            name: "--model",
            reason: "efficiency curves have no default fit model".into(),
        }),
    }
}

fn fit(args: &FitArgs) -> Result<()> {
    let curve = read_curve(&args.curve)?;
    let model = match args.model {
        Some(ModelArg::Lorentzian) => FitModel::Lorentzian,
        Some(ModelArg::Sin4) => FitModel::Sin4,
        Some(ModelArg::Sin4Offset) => FitModel::Sin4Offset,
        Some(ModelArg::Exponential) => FitModel::Exponential,
        None => default_model(&curve)?,
    };
    let text = fit_curve(&curve, model)?.to_json()? + "\n";
    print_stdout(&text)?;
    if let Some(path) = &args.output {
        std::fs::write(path, &text)?;
    }
    Ok(())
}

fn m2s_params(args: &M2sArgs) -> Result<()> {
    let convention = match args.tau_convention {
        TauArg::Effective => TauConvention::Effective,
        TauArg::JOnly => TauConvention::JOnly,
    };
    let p = m2s_params_with(args.j_hz, args.delta_nu_hz, convention)?;
    let t_m2s = ideal_m2s_duration(args.delta_nu_hz)?;
    let t_slic = optimal_slic_duration(args.delta_nu_hz)?;
    let fields = [
        ("j_hz", json!(args.j_hz)),
        ("delta_nu_hz", json!(args.delta_nu_hz)),
        ("n1", json!(p.n1)),
        ("n2", json!(p.n2)),
        ("tau_s", json!(p.tau)),
        ("nu_e_hz", json!(p.nu_e)),
        ("train_duration_s", json!(p.train_duration())),
        ("total_duration_s", json!(p.total_duration())),
        ("ideal_m2s_time_s", json!(t_m2s)),
        ("ideal_slic_time_s", json!(t_slic)),
    ];
    let text = match args.format {
        TextFormat::Json => {
            let map: serde_json::Map<String, Value> = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            serde_json::to_string_pretty(&Value::Object(map))? + "\n"
        }
        TextFormat::Text => fields.iter().map(|(k, v)| format!("{k}: {v}\n")).collect(),
    };
    print_stdout(&text)?;
    Ok(())
}
