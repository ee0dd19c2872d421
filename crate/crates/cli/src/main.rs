//! `spdc` — command-line front end for the waveguide SPDC modeling library.
//!
//! Every subcommand is a thin wrapper over `spdc-core`: identical inputs via
//! the library and the CLI produce identical numbers. Wavelengths are nm and
//! temperatures °C at every flag; outputs are CSV (default) or JSON, written
//! atomically when `--out` is given. Exit codes: 0 success, 1 domain error,
//! 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use spdc_core::coincsim::{
    analyze_histogram, build_histogram, simulate, CoincidenceHistogram, SimConfig, SplitterModel,
};
use spdc_core::dispersion::{Axis, DispersionModel};
use spdc_core::pairstats::{analyze_power_series, CoincidencePoint, LossBudget};
use spdc_core::phasematch::{
    degeneracy_temperature, find_intersection, tuning_curve, GratingSpec, ProcessKind, ProcessSpec,
};
use spdc_core::qpm::{equation_constants, infer_orders, IntersectionObservation};

type AnyError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(
    name = "spdc",
    version,
    about = "Quasi-phase-matched SPDC modeling for periodically poled KTP waveguides",
    arg_required_else_help = true,
    propagate_version = true
)]
struct Cli {
    /// Crystal profile: a builtin name ("ktp-default") or a JSON file path.
    #[arg(long, global = true, default_value = "ktp-default")]
    config: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the result to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for stochastic subcommands.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(axis: AxisArg) -> Axis {
        match axis {
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessArg {
    Type0,
    Type2,
}

impl From<ProcessArg> for ProcessKind {
    fn from(process: ProcessArg) -> ProcessKind {
        match process {
            ProcessArg::Type0 => ProcessKind::Type0,
            ProcessArg::Type2 => ProcessKind::Type2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Refractive index at one wavelength and temperature.
    Index(IndexArgs),
    /// Sweep the phase-matched signal/idler pair over temperature.
    TuningCurve(TuningCurveArgs),
    /// Temperature where a process phase-matches at degeneracy (2 λ_p).
    Degeneracy(DegeneracyArgs),
    /// Temperature where two processes emit the same signal wavelength.
    Intersect(IntersectArgs),
    /// Infer QPM orders and waveguide mismatch from a measured intersection.
    InferQpm(InferQpmArgs),
    /// Analyze a measured coincidence-vs-power series.
    Pairstats(PairstatsArgs),
    /// Monte Carlo simulation of photon-pair detection.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    #[arg(long)]
    lambda_nm: f64,
    /// Temperature, °C.
    #[arg(long, default_value_t = 25.0)]
    t: f64,
}

#[derive(Args)]
struct ProcessFlags {
    #[arg(long, value_enum)]
    process: ProcessArg,
    /// QPM order (odd).
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Waveguide mismatch k_wg, rad/µm.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    kwg: f64,
}

#[derive(Args)]
struct GratingFlags {
    /// Room-temperature poling period, µm.
    #[arg(long, default_value_t = 9.96)]
    period_um: f64,
    #[arg(long, default_value_t = 405.0)]
    pump_nm: f64,
}

#[derive(Args)]
struct TuningCurveArgs {
    #[command(flatten)]
    process: ProcessFlags,
    #[command(flatten)]
    grating: GratingFlags,
    #[arg(long)]
    t_min: f64,
    #[arg(long)]
    t_max: f64,
    /// Temperature step, °C.
    #[arg(long, default_value_t = 0.25)]
    step: f64,
}

#[derive(Args)]
struct DegeneracyArgs {
    #[command(flatten)]
    process: ProcessFlags,
    #[command(flatten)]
    grating: GratingFlags,
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
}

#[derive(Args)]
struct IntersectArgs {
    #[arg(long, value_enum)]
    process_a: ProcessArg,
    #[arg(long, default_value_t = 3)]
    order_a: u32,
    #[arg(long, value_enum)]
    process_b: ProcessArg,
    #[arg(long, default_value_t = 1)]
    order_b: u32,
    /// Shared waveguide mismatch, rad/µm (per-process overrides below).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    kwg: f64,
    #[arg(long, allow_hyphen_values = true)]
    kwg_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kwg_b: Option<f64>,
    #[command(flatten)]
    grating: GratingFlags,
    #[arg(long, default_value_t = 20.0)]
    t_min: f64,
    #[arg(long, default_value_t = 80.0)]
    t_max: f64,
}

#[derive(Args)]
struct InferQpmArgs {
    /// Intersection temperature, °C.
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 405.0)]
    pump_nm: f64,
    #[arg(long)]
    signal_nm: f64,
    #[arg(long)]
    idler_nm: f64,
    #[arg(long, default_value_t = 9.96)]
    period_um: f64,
    #[arg(long, default_value_t = 9)]
    max_order: u32,
    /// Shorthand for --format json.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PairstatsArgs {
    /// CSV with columns power_mw, coincidences_hz, accidentals_hz.
    #[arg(long)]
    points: PathBuf,
    /// Loss budget JSON; defaults to the reference setup
    /// (0.35 pump, 0.30 fiber, 0.65 per arm, two 0.98 filters).
    #[arg(long)]
    budget: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    window_ns: f64,
    /// Shorthand for --format json.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1e6)]
    pair_rate: f64,
    #[arg(long, default_value_t = 0.65)]
    eff_a: f64,
    #[arg(long, default_value_t = 0.65)]
    eff_b: f64,
    /// Dark count rate per arm, Hz.
    #[arg(long, default_value_t = 0.0)]
    dark_a: f64,
    #[arg(long, default_value_t = 0.0)]
    dark_b: f64,
    #[arg(long, default_value_t = 0.0)]
    jitter_ps: f64,
    /// Acquisition time, s.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    #[arg(long, value_enum, default_value_t = SplitterArg::FiftyFifty)]
    splitter: SplitterArg,
    #[arg(long, default_value_t = 100.0)]
    bin_ps: f64,
    #[arg(long, default_value_t = 50.0)]
    span_ns: f64,
    #[arg(long, default_value_t = 2.0)]
    window_ns: f64,
    /// CSV with a pair_rate_hz column: emit a CAR-vs-rate table instead of
    /// a histogram.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitterArg {
    FiftyFifty,
    Deterministic,
}

impl From<SplitterArg> for SplitterModel {
    fn from(splitter: SplitterArg) -> SplitterModel {
        match splitter {
            SplitterArg::FiftyFifty => SplitterModel::FiftyFifty,
            SplitterArg::Deterministic => SplitterModel::Deterministic,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), AnyError> {
    let model = load_model(&cli.config)?;
    let format = match &cli.command {
        Command::InferQpm(args) if args.json => Format::Json,
        Command::Pairstats(args) if args.json => Format::Json,
        _ => cli.format,
    };
    let output = match &cli.command {
        Command::Index(args) => render_index(&model, args, format)?,
        Command::TuningCurve(args) => render_tuning_curve(&model, args, format)?,
        Command::Degeneracy(args) => render_degeneracy(&model, args, format)?,
        Command::Intersect(args) => render_intersect(&model, args, format)?,
        Command::InferQpm(args) => render_infer_qpm(&model, args, format)?,
        Command::Pairstats(args) => render_pairstats(args, format)?,
        Command::Simulate(args) => render_simulate(args, cli.seed, format)?,
    };
    write_output(cli.out.as_deref(), &output)?;
    Ok(())
}

fn load_model(name_or_path: &str) -> Result<DispersionModel, AnyError> {
    if let Some(model) = DispersionModel::builtin(name_or_path) {
        return Ok(model);
    }
    Ok(DispersionModel::from_path(name_or_path)?)
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partial file.
fn write_output(out: Option<&Path>, content: &str) -> Result<(), AnyError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let file_name = path
                .file_name()
                .ok_or("output path has no file name")?
                .to_string_lossy();
            let tmp = path.with_file_name(format!("{file_name}.tmp.{}", std::process::id()));
            std::fs::write(&tmp, content)?;
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, AnyError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_from_records<S: Serialize>(records: &[S]) -> Result<String, AnyError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for record in records {
        writer.serialize(record)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

fn render_index(model: &DispersionModel, args: &IndexArgs, format: Format) -> Result<String, AnyError> {
    let index = model.refractive_index(args.axis.into(), args.lambda_nm * 1e-3, args.t)?;
    match format {
        Format::Csv => Ok(format!("{index}\n")),
        Format::Json => {
            #[derive(Serialize)]
            struct IndexOutput {
                axis: Axis,
                wavelength_nm: f64,
                temperature_c: f64,
                index: f64,
            }
            to_json(&IndexOutput {
                axis: args.axis.into(),
                wavelength_nm: args.lambda_nm,
                temperature_c: args.t,
                index,
            })
        }
    }
}

#[derive(Serialize)]
struct CurveRow {
    temperature_c: f64,
    signal_nm: Option<f64>,
    idler_nm: Option<f64>,
    residual: Option<f64>,
}

fn render_tuning_curve(
    model: &DispersionModel,
    args: &TuningCurveArgs,
    format: Format,
) -> Result<String, AnyError> {
    let grating = GratingSpec::ktp(args.grating.period_um);
    let process = ProcessSpec::new(args.process.process.into(), args.process.order, args.process.kwg)?;
    let curve = tuning_curve(
        model,
        &grating,
        &process,
        args.grating.pump_nm,
        (args.t_min, args.t_max),
        args.step,
    )?;
    let rows: Vec<CurveRow> = curve
        .entries
        .iter()
        .map(|entry| CurveRow {
            temperature_c: entry.temperature_c,
            signal_nm: entry.point.map(|p| p.signal_nm),
            idler_nm: entry.point.map(|p| p.idler_nm),
            residual: entry.point.map(|p| p.residual),
        })
        .collect();
    match format {
        Format::Csv => csv_from_records(&rows),
        Format::Json => to_json(&rows),
    }
}

fn render_degeneracy(
    model: &DispersionModel,
    args: &DegeneracyArgs,
    format: Format,
) -> Result<String, AnyError> {
    let grating = GratingSpec::ktp(args.grating.period_um);
    let process = ProcessSpec::new(args.process.process.into(), args.process.order, args.process.kwg)?;
    let temperature =
        degeneracy_temperature(model, &grating, &process, args.grating.pump_nm, (args.t_min, args.t_max))?;
    if temperature.is_none() {
        eprintln!(
            "no degeneracy in [{}, {}] C; emitting an empty row",
            args.t_min, args.t_max
        );
    }
    let degenerate_nm = 2.0 * args.grating.pump_nm;
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(["temperature_c", "signal_nm", "idler_nm"])?;
            match temperature {
                Some(t) => writer.write_record([
                    t.to_string(),
                    degenerate_nm.to_string(),
                    degenerate_nm.to_string(),
                ])?,
                None => writer.write_record(["", "", ""])?,
            }
            Ok(String::from_utf8(writer.into_inner()?)?)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct DegeneracyOutput {
                temperature_c: Option<f64>,
                signal_nm: Option<f64>,
                idler_nm: Option<f64>,
            }
            to_json(&DegeneracyOutput {
                temperature_c: temperature,
                signal_nm: temperature.map(|_| degenerate_nm),
                idler_nm: temperature.map(|_| degenerate_nm),
            })
        }
    }
}

fn render_intersect(
    model: &DispersionModel,
    args: &IntersectArgs,
    format: Format,
) -> Result<String, AnyError> {
    let grating = GratingSpec::ktp(args.grating.period_um);
    let process_a = ProcessSpec::new(
        args.process_a.into(),
        args.order_a,
        args.kwg_a.unwrap_or(args.kwg),
    )?;
    let process_b = ProcessSpec::new(
        args.process_b.into(),
        args.order_b,
        args.kwg_b.unwrap_or(args.kwg),
    )?;
    let hit = find_intersection(
        model,
        &grating,
        &process_a,
        &process_b,
        args.grating.pump_nm,
        (args.t_min, args.t_max),
    )?;
    if hit.is_none() {
        eprintln!(
            "no intersection in [{}, {}] C; emitting an empty row",
            args.t_min, args.t_max
        );
    }
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(["temperature_c", "signal_nm", "idler_nm", "identical_curves"])?;
            match &hit {
                Some(hit) => writer.write_record([
                    hit.temperature_c.to_string(),
                    hit.point.signal_nm.to_string(),
                    hit.point.idler_nm.to_string(),
                    hit.identical_curves.to_string(),
                ])?,
                None => writer.write_record(["", "", "", ""])?,
            }
            Ok(String::from_utf8(writer.into_inner()?)?)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct IntersectOutput {
                temperature_c: Option<f64>,
                signal_nm: Option<f64>,
                idler_nm: Option<f64>,
                identical_curves: Option<bool>,
            }
            to_json(&IntersectOutput {
                temperature_c: hit.as_ref().map(|h| h.temperature_c),
                signal_nm: hit.as_ref().map(|h| h.point.signal_nm),
                idler_nm: hit.as_ref().map(|h| h.point.idler_nm),
                identical_curves: hit.as_ref().map(|h| h.identical_curves),
            })
        }
    }
}

fn render_infer_qpm(
    model: &DispersionModel,
    args: &InferQpmArgs,
    format: Format,
) -> Result<String, AnyError> {
    let grating = GratingSpec::ktp(args.period_um);
    let observation =
        IntersectionObservation::new(args.t, args.pump_nm, args.signal_nm, args.idler_nm)?;
    let constants = equation_constants(model, &grating, &observation)?;
    let solution = infer_orders(&constants, args.max_order)?;

    #[derive(Serialize)]
    struct InferOutput {
        m_x: u32,
        m_y: u32,
        k_wg: f64,
        residual_split: f64,
        constants: spdc_core::qpm::EquationConstants,
    }
    let output = InferOutput {
        m_x: solution.order_type0,
        m_y: solution.order_type2,
        k_wg: solution.k_wg,
        residual_split: solution.residual_split,
        constants,
    };
    match format {
        Format::Json => to_json(&output),
        Format::Csv => {
            #[derive(Serialize)]
            struct InferRow {
                m_x: u32,
                m_y: u32,
                k_wg: f64,
                residual_split: f64,
            }
            csv_from_records(&[InferRow {
                m_x: output.m_x,
                m_y: output.m_y,
                k_wg: output.k_wg,
                residual_split: output.residual_split,
            }])
        }
    }
}

#[derive(Deserialize)]
struct PointRow {
    power_mw: f64,
    coincidences_hz: f64,
    accidentals_hz: f64,
}

fn render_pairstats(args: &PairstatsArgs, format: Format) -> Result<String, AnyError> {
    let mut reader = csv::Reader::from_path(&args.points)?;
    let window_s = args.window_ns * 1e-9;
    let mut points = Vec::new();
    for row in reader.deserialize() {
        let row: PointRow = row?;
        points.push(CoincidencePoint::new(
            row.power_mw,
            row.coincidences_hz,
            row.accidentals_hz,
            window_s,
        )?);
    }
    let budget = match &args.budget {
        Some(path) => {
            let budget: LossBudget = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            budget.validate()?;
            budget
        }
        None => LossBudget::reference_setup(),
    };
    let analysis = analyze_power_series(&points, &budget)?;

    #[derive(Serialize)]
    struct CarPoint {
        power_mw: f64,
        car: f64,
    }
    #[derive(Serialize)]
    struct PairstatsOutput {
        slope: f64,
        stderr: f64,
        r_squared: f64,
        effective_rate: f64,
        intrinsic_rate: f64,
        car_series: Vec<CarPoint>,
    }
    let output = PairstatsOutput {
        slope: analysis.fit.slope,
        stderr: analysis.fit.slope_stderr,
        r_squared: analysis.fit.r_squared,
        effective_rate: analysis.effective_rate,
        intrinsic_rate: analysis.intrinsic_rate,
        car_series: analysis
            .car_series
            .iter()
            .map(|(power_mw, car)| CarPoint {
                power_mw: *power_mw,
                car: *car,
            })
            .collect(),
    };
    match format {
        Format::Json => to_json(&output),
        Format::Csv => {
            #[derive(Serialize)]
            struct SummaryRow {
                slope: f64,
                stderr: f64,
                r_squared: f64,
                effective_rate: f64,
                intrinsic_rate: f64,
            }
            csv_from_records(&[SummaryRow {
                slope: output.slope,
                stderr: output.stderr,
                r_squared: output.r_squared,
                effective_rate: output.effective_rate,
                intrinsic_rate: output.intrinsic_rate,
            }])
        }
    }
}

fn simulate_histogram(args: &SimulateArgs, pair_rate: f64, seed: u64) -> Result<CoincidenceHistogram, AnyError> {
    let config = SimConfig {
        pair_rate_hz: pair_rate,
        dark_rate_a_hz: args.dark_a,
        dark_rate_b_hz: args.dark_b,
        efficiency_a: args.eff_a,
        efficiency_b: args.eff_b,
        jitter_sigma_s: args.jitter_ps * 1e-12,
        duration_s: args.duration,
        seed,
        splitter: args.splitter.into(),
    };
    let streams = simulate(&config)?;
    Ok(build_histogram(
        &streams.arm_a,
        &streams.arm_b,
        args.bin_ps * 1e-12,
        args.span_ns * 1e-9,
        args.duration,
    )?)
}

fn render_simulate(args: &SimulateArgs, seed: u64, format: Format) -> Result<String, AnyError> {
    match &args.sweep {
        None => {
            let histogram = simulate_histogram(args, args.pair_rate, seed)?;
            match format {
                Format::Csv => {
                    #[derive(Serialize)]
                    struct BinRow {
                        bin_center_ns: f64,
                        counts: u64,
                    }
                    let rows: Vec<BinRow> = histogram
                        .bins
                        .iter()
                        .enumerate()
                        .map(|(index, &counts)| BinRow {
                            bin_center_ns: histogram.bin_center_s(index) * 1e9,
                            counts,
                        })
                        .collect();
                    csv_from_records(&rows)
                }
                Format::Json => to_json(&histogram),
            }
        }
        Some(sweep_path) => {
            #[derive(Deserialize)]
            struct SweepRow {
                pair_rate_hz: f64,
            }
            #[derive(Serialize)]
            struct SweepResult {
                pair_rate_hz: f64,
                measured_hz: f64,
                accidentals_hz: f64,
                car: f64,
            }
            let mut reader = csv::Reader::from_path(sweep_path)?;
            let mut results = Vec::new();
            for row in reader.deserialize() {
                let row: SweepRow = row?;
                let histogram = simulate_histogram(args, row.pair_rate_hz, seed)?;
                let analysis = analyze_histogram(&histogram, args.window_ns * 1e-9)?;
                results.push(SweepResult {
                    pair_rate_hz: row.pair_rate_hz,
                    measured_hz: analysis.measured_hz,
                    accidentals_hz: analysis.accidentals_hz,
                    car: analysis.car,
                });
            }
            match format {
                Format::Csv => csv_from_records(&results),
                Format::Json => to_json(&results),
            }
        }
    }
}
