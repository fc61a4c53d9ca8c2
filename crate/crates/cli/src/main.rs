//! `opo-steering`: command-line front end over the model library.
//!
//! Exit codes: 0 success, 2 usage/configuration error, 1 numeric failure.

mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{parse_bipartitions, parse_modes, parse_range, CliResult, Config, Failure};
use opo_steering::coupling::{coupling_matrix, pump_weights, PumpSetting};
use opo_steering::gaussian::{covariance, propagate, Bipartition, CovarianceMatrix};
use opo_steering::hg::{calibrated_overlap_table, OverlapTable, WaistConfig};
use opo_steering::io::{
    cm_csv, cm_json, coupling_csv, coupling_json, grid_csv, grid_legend_json, grid_ppm,
    overlaps_csv, overlaps_json, photons_csv, photons_json, pump_integral_rows, Metadata,
};
use opo_steering::scan::{sweep, Axis, AxisSpec, RegionGrid, SweepPlan, Task};
use opo_steering::steering::{
    classify_pair, genuine_pentapartite, steer_multi, Direction, QuadScale, DEFAULT_CLASS_TOL,
};

#[derive(Parser)]
#[command(
    name = "opo-steering",
    version,
    about = "Five-mode structured-pump OPO model: coupling matrices, Gaussian covariance \
             propagation, EPR-steering quantifiers, and parameter-region scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrated HG mode-overlap table, optionally with pump integrals
    Overlaps(OverlapsCmd),
    /// Pump weights and the 5x5 coupling matrix at a setting
    Coupling(CouplingCmd),
    /// 10x10 covariance matrix, optionally reduced to a mode subset
    Cm(CmCmd),
    /// Mean photon number of each mode
    Photons(PhotonsCmd),
    /// Directional multimode steerabilities of a bipartition
    Steer(SteerCmd),
    /// Six-type steering classification of a mode pair
    ClassifyPair(ClassifyCmd),
    /// Presence-pattern grid over two pump axes
    MultiScan(MultiScanCmd),
    /// Genuine pentapartite criterion at a setting
    Genuine(GenuineCmd),
    /// Pair-class or genuine-map grid over two pump axes
    Scan(ScanCmd),
}

#[derive(Args)]
struct PumpArgs {
    /// HG30/HG03 balance b in [0,1] (default 0.5)
    #[arg(long)]
    b: Option<f64>,
    /// HG21/HG12 balance c in [0,1] (default 0.5)
    #[arg(long)]
    c: Option<f64>,
    /// Pump mixing angle theta in radians (default pi/4)
    #[arg(long, conflicts_with = "theta_pi")]
    theta: Option<f64>,
    /// Theta as a multiple of pi, e.g. 0.34375 for 11pi/32
    #[arg(long, value_name = "FRACTION")]
    theta_pi: Option<f64>,
    /// Global nonlinearity scale (default 1)
    #[arg(long)]
    chi: Option<f64>,
}

#[derive(Args)]
struct OutArgs {
    /// Plain key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default stdout); grid outputs get a .legend.json sidecar
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv, json, or ppm (support varies per command)
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct OverlapsCmd {
    /// Append the involved-pump integrals block
    #[arg(long)]
    integrals: bool,
    /// Integrand power for the pump integrals: 1 or 2 (default 1)
    #[arg(long)]
    power: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CouplingCmd {
    #[command(flatten)]
    pump: PumpArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CmCmd {
    #[command(flatten)]
    pump: PumpArgs,
    /// Interaction time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Reduce to this mode subset, e.g. 1,3
    #[arg(long)]
    modes: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PhotonsCmd {
    #[command(flatten)]
    pump: PumpArgs,
    /// Interaction time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SteerCmd {
    #[command(flatten)]
    pump: PumpArgs,
    /// Interaction time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Steering party modes, e.g. 1,2
    #[arg(long)]
    a: Option<String>,
    /// Steered party modes, e.g. 3
    #[arg(long)]
    bpart: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ClassifyCmd {
    #[command(flatten)]
    pump: PumpArgs,
    /// Interaction time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Mode pair, e.g. 2,3
    #[arg(long)]
    pair: Option<String>,
    /// Relative tolerance of the symmetric two-way band (default 1e-3)
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GridArgs {
    /// x axis knob: b, c, or theta (default b)
    #[arg(long)]
    x: Option<String>,
    /// y axis knob (default c)
    #[arg(long)]
    y: Option<String>,
    /// x range as lo,hi (default 0,1)
    #[arg(long)]
    x_range: Option<String>,
    /// y range as lo,hi (default 0,1)
    #[arg(long)]
    y_range: Option<String>,
    /// Grid points per axis: 200 is the figure preset, 50 the quick preset
    #[arg(long)]
    res: Option<usize>,
}

#[derive(Args)]
struct MultiScanCmd {
    #[command(flatten)]
    pump: PumpArgs,
    /// Interaction time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Directed bipartitions, e.g. 3:12,4:12,5:12
    #[arg(long)]
    bipartitions: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GenuineCmd {
    #[command(flatten)]
    pump: PumpArgs,
    /// Interaction time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Quadrature scale: unit or half (default unit)
    #[arg(long)]
    scale: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ScanCmd {
    #[command(flatten)]
    pump: PumpArgs,
    /// Interaction time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Classify this mode pair per cell, e.g. 2,3
    #[arg(long, conflicts_with = "genuine_map")]
    pair: Option<String>,
    /// Map the genuine pentapartite criterion instead of a pair class
    #[arg(long)]
    genuine_map: bool,
    /// Quadrature scale for --genuine-map: unit or half (default unit)
    #[arg(long)]
    scale: Option<String>,
    /// Relative tolerance of the symmetric two-way band (default 1e-3)
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            std::process::ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Overlaps(cmd) => cmd_overlaps(cmd),
        Command::Coupling(cmd) => cmd_coupling(cmd),
        Command::Cm(cmd) => cmd_cm(cmd),
        Command::Photons(cmd) => cmd_photons(cmd),
        Command::Steer(cmd) => cmd_steer(cmd),
        Command::ClassifyPair(cmd) => cmd_classify(cmd),
        Command::MultiScan(cmd) => cmd_multi_scan(cmd),
        Command::Genuine(cmd) => cmd_genuine(cmd),
        Command::Scan(cmd) => cmd_scan(cmd),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Format {
    Csv,
    Json,
    Ppm,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Ppm => "ppm",
        }
    }
}

fn resolve_format(
    args: &OutArgs,
    cfg: &Config,
    default: Format,
    allowed: &[Format],
) -> CliResult<Format> {
    let raw = match (&args.format, cfg.get_raw("format")) {
        (Some(f), _) => f.as_str(),
        (None, Some(f)) => f,
        (None, None) => return Ok(default),
    };
    let fmt = match raw {
        "csv" => Format::Csv,
        "json" => Format::Json,
        "ppm" => Format::Ppm,
        other => return Err(Failure::Usage(format!("unknown format '{other}'"))),
    };
    if !allowed.contains(&fmt) {
        return Err(Failure::Usage(format!(
            "format '{}' is not supported here (use one of: {})",
            fmt.name(),
            allowed.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(fmt)
}

fn table() -> CliResult<OverlapTable> {
    calibrated_overlap_table(&WaistConfig::default()).map_err(Failure::from_core)
}

fn resolve_pump(p: &PumpArgs, cfg: &Config) -> CliResult<PumpSetting> {
    let b = match p.b {
        Some(v) => v,
        None => cfg.get("b")?.unwrap_or(0.5),
    };
    let c = match p.c {
        Some(v) => v,
        None => cfg.get("c")?.unwrap_or(0.5),
    };
    let theta = match (p.theta, p.theta_pi) {
        (Some(v), _) => v,
        (None, Some(frac)) => frac * std::f64::consts::PI,
        (None, None) => match (cfg.get::<f64>("theta")?, cfg.get::<f64>("theta_pi")?) {
            (Some(v), _) => v,
            (None, Some(frac)) => frac * std::f64::consts::PI,
            (None, None) => std::f64::consts::FRAC_PI_4,
        },
    };
    let chi = match p.chi {
        Some(v) => v,
        None => cfg.get("chi")?.unwrap_or(1.0),
    };
    let setting = PumpSetting::with_chi(b, c, theta, chi).map_err(Failure::from_core)?;
    if !setting.theta_in_domain() {
        eprintln!(
            "warning: theta = {theta} lies outside the nominal [0, pi/2] domain; \
             pump weights take negative values"
        );
    }
    Ok(setting)
}

fn resolve_t(flag: Option<f64>, cfg: &Config) -> CliResult<f64> {
    Ok(match flag {
        Some(v) => v,
        None => cfg.get("t")?.unwrap_or(0.5),
    })
}

fn resolve_scale(flag: Option<&str>, cfg: &Config) -> CliResult<QuadScale> {
    let raw = match (flag, cfg.get_raw("scale")) {
        (Some(s), _) => Some(s.to_string()),
        (None, Some(s)) => Some(s.to_string()),
        (None, None) => None,
    };
    match raw {
        None => Ok(QuadScale::default()),
        Some(s) => s.parse().map_err(Failure::from_core),
    }
}

fn pump_meta(meta: Metadata, s: &PumpSetting) -> Metadata {
    meta.with_param("b", s.b)
        .with_param("c", s.c)
        .with_param("theta", s.theta)
        .with_param("chi", s.chi)
}

fn state_at(s: &PumpSetting, t: f64, table: &OverlapTable) -> CliResult<CovarianceMatrix> {
    let g = coupling_matrix(s, table);
    Ok(covariance(&propagate(&g, t).map_err(Failure::from_core)?))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Numeric(format!("cannot write stdout: {e}"))),
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display()))),
    }
}

fn cmd_overlaps(cmd: OverlapsCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    let fmt = resolve_format(&cmd.out, &cfg, Format::Csv, &[Format::Csv, Format::Json])?;
    let table = table()?;
    let with_integrals = cmd.integrals || cfg.get_raw("integrals") == Some("true");
    let power = match cmd.power {
        Some(p) => p,
        None => cfg.get("power")?.unwrap_or(1),
    };
    let rows = if with_integrals {
        Some(pump_integral_rows(&table, power).map_err(Failure::from_core)?)
    } else {
        None
    };
    let meta = Metadata::new("overlaps", QuadScale::default(), table.calibration_factor())
        .with_param("integrals", with_integrals)
        .with_param("power", power);
    let text = match fmt {
        Format::Csv => overlaps_csv(&table, rows.as_deref(), &meta),
        Format::Json => overlaps_json(&table, rows.as_deref(), &meta),
        Format::Ppm => unreachable!(),
    };
    write_bytes(cmd.out.out.as_deref(), text.as_bytes())
}

fn cmd_coupling(cmd: CouplingCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    let fmt = resolve_format(&cmd.out, &cfg, Format::Csv, &[Format::Csv, Format::Json])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let table = table()?;
    let g = coupling_matrix(&setting, &table);
    let meta = pump_meta(
        Metadata::new("coupling", QuadScale::default(), table.calibration_factor()),
        &setting,
    );
    let text = match fmt {
        Format::Csv => coupling_csv(&g, &meta),
        Format::Json => coupling_json(&g, pump_weights(&setting), &meta),
        Format::Ppm => unreachable!(),
    };
    write_bytes(cmd.out.out.as_deref(), text.as_bytes())
}

fn cmd_cm(cmd: CmCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    let fmt = resolve_format(&cmd.out, &cfg, Format::Json, &[Format::Csv, Format::Json])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let t = resolve_t(cmd.t, &cfg)?;
    let table = table()?;
    let mut cm = state_at(&setting, t, &table)?;
    let modes_raw = match &cmd.modes {
        Some(m) => Some(m.clone()),
        None => cfg.get_raw("modes").map(str::to_string),
    };
    if let Some(raw) = &modes_raw {
        cm = cm.reduce(&parse_modes(raw)?).map_err(Failure::from_core)?;
    }
    let mut meta = pump_meta(
        Metadata::new("cm", QuadScale::default(), table.calibration_factor()),
        &setting,
    )
    .with_param("t", t);
    if let Some(raw) = &modes_raw {
        meta = meta.with_param("modes", raw);
    }
    let text = match fmt {
        Format::Csv => cm_csv(&cm, &meta),
        Format::Json => cm_json(&cm, &meta),
        Format::Ppm => unreachable!(),
    };
    write_bytes(cmd.out.out.as_deref(), text.as_bytes())
}

fn cmd_photons(cmd: PhotonsCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    let fmt = resolve_format(&cmd.out, &cfg, Format::Json, &[Format::Csv, Format::Json])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let t = resolve_t(cmd.t, &cfg)?;
    let table = table()?;
    let cm = state_at(&setting, t, &table)?;
    let meta = pump_meta(
        Metadata::new("photons", QuadScale::default(), table.calibration_factor()),
        &setting,
    )
    .with_param("t", t);
    let text = match fmt {
        Format::Csv => photons_csv(&cm, &meta),
        Format::Json => photons_json(&cm, &meta),
        Format::Ppm => unreachable!(),
    };
    write_bytes(cmd.out.out.as_deref(), text.as_bytes())
}

fn cmd_steer(cmd: SteerCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    resolve_format(&cmd.out, &cfg, Format::Json, &[Format::Json])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let t = resolve_t(cmd.t, &cfg)?;
    let a_raw = cmd
        .a
        .or_else(|| cfg.get_raw("a").map(str::to_string))
        .ok_or_else(|| Failure::Usage("missing --a (steering party modes)".to_string()))?;
    let b_raw = cmd
        .bpart
        .or_else(|| cfg.get_raw("bpart").map(str::to_string))
        .ok_or_else(|| Failure::Usage("missing --bpart (steered party modes)".to_string()))?;
    let a_modes = parse_modes(&a_raw)?;
    let b_modes = parse_modes(&b_raw)?;
    let part = Bipartition::new(a_modes.clone(), b_modes.clone()).map_err(Failure::from_core)?;
    let table = table()?;
    let cm = state_at(&setting, t, &table)?;
    let union: Vec<usize> = a_modes.iter().chain(&b_modes).copied().collect();
    let red = cm.reduce(&union).map_err(Failure::from_core)?;
    let fwd = steer_multi(&red, &part, Direction::AToB).map_err(Failure::from_core)?;
    let back = steer_multi(&red, &part, Direction::BToA).map_err(Failure::from_core)?;
    let meta = pump_meta(
        Metadata::new("steer", QuadScale::default(), table.calibration_factor()),
        &setting,
    )
    .with_param("t", t)
    .with_param("a", &a_raw)
    .with_param("bpart", &b_raw);
    let value = serde_json::json!({
        "metadata": meta,
        "partition": { "a": a_modes, "b": b_modes },
        "g_a_to_b": fwd,
        "g_b_to_a": back,
    });
    write_bytes(cmd.out.out.as_deref(), pretty(&value).as_bytes())
}

fn cmd_classify(cmd: ClassifyCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    resolve_format(&cmd.out, &cfg, Format::Json, &[Format::Json])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let t = resolve_t(cmd.t, &cfg)?;
    let pair_raw = cmd
        .pair
        .or_else(|| cfg.get_raw("pair").map(str::to_string))
        .ok_or_else(|| Failure::Usage("missing --pair (e.g. 2,3)".to_string()))?;
    let pair = parse_modes(&pair_raw)?;
    if pair.len() != 2 {
        return Err(Failure::Usage(format!("--pair needs exactly two modes, got '{pair_raw}'")));
    }
    let tol = match cmd.tol {
        Some(v) => v,
        None => cfg.get("tol")?.unwrap_or(DEFAULT_CLASS_TOL),
    };
    let table = table()?;
    let cm = state_at(&setting, t, &table)?;
    let red = cm.reduce(&pair).map_err(Failure::from_core)?;
    let report = classify_pair(&red, tol).map_err(Failure::from_core)?;
    let meta = pump_meta(
        Metadata::new("classify-pair", QuadScale::default(), table.calibration_factor()),
        &setting,
    )
    .with_param("t", t)
    .with_param("pair", &pair_raw)
    .with_param("tol", tol);
    let mut value = serde_json::to_value(&report).expect("serializable report");
    value["metadata"] = serde_json::to_value(&meta).expect("serializable metadata");
    value["pair"] = serde_json::json!(pair);
    write_bytes(cmd.out.out.as_deref(), pretty(&value).as_bytes())
}

fn cmd_genuine(cmd: GenuineCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    resolve_format(&cmd.out, &cfg, Format::Json, &[Format::Json])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let t = resolve_t(cmd.t, &cfg)?;
    let scale = resolve_scale(cmd.scale.as_deref(), &cfg)?;
    let table = table()?;
    let cm = state_at(&setting, t, &table)?;
    let result = genuine_pentapartite(&cm, scale).map_err(Failure::from_core)?;
    let meta = pump_meta(
        Metadata::new("genuine", scale, table.calibration_factor()),
        &setting,
    )
    .with_param("t", t);
    let mut value = serde_json::to_value(&result).expect("serializable result");
    value["metadata"] = serde_json::to_value(&meta).expect("serializable metadata");
    write_bytes(cmd.out.out.as_deref(), pretty(&value).as_bytes())
}

fn resolve_grid(grid: &GridArgs, cfg: &Config) -> CliResult<(AxisSpec, AxisSpec)> {
    let axis_of = |flag: &Option<String>, key: &str, default: Axis| -> CliResult<Axis> {
        let raw = match flag {
            Some(s) => Some(s.clone()),
            None => cfg.get_raw(key).map(str::to_string),
        };
        match raw {
            None => Ok(default),
            Some(s) => s.parse().map_err(Failure::from_core),
        }
    };
    let x_axis = axis_of(&grid.x, "x", Axis::B)?;
    let y_axis = axis_of(&grid.y, "y", Axis::C)?;
    let range_of = |flag: &Option<String>, key: &str| -> CliResult<Option<(f64, f64)>> {
        let raw = match flag {
            Some(s) => Some(s.clone()),
            None => cfg.get_raw(key).map(str::to_string),
        };
        raw.map(|s| parse_range(&s)).transpose()
    };
    let (x_min, x_max) = range_of(&grid.x_range, "x_range")?.unwrap_or((0.0, 1.0));
    let (y_min, y_max) = range_of(&grid.y_range, "y_range")?.unwrap_or((0.0, 1.0));
    let res = match grid.res {
        Some(v) => v,
        None => cfg.get("res")?.unwrap_or(200),
    };
    Ok((
        AxisSpec::new(x_axis, x_min, x_max, res).map_err(Failure::from_core)?,
        AxisSpec::new(y_axis, y_min, y_max, res).map_err(Failure::from_core)?,
    ))
}

fn grid_meta(meta: Metadata, plan: &SweepPlan, t: f64) -> Metadata {
    meta.with_param("t", t)
        .with_param("x", format!("{}:{}:{}:{}", plan.x.axis.name(), plan.x.min, plan.x.max, plan.x.points))
        .with_param("y", format!("{}:{}:{}:{}", plan.y.axis.name(), plan.y.min, plan.y.max, plan.y.points))
}

fn emit_grid(
    grid: &RegionGrid,
    meta: &Metadata,
    fmt: Format,
    out: Option<&Path>,
) -> CliResult<()> {
    let payload = match fmt {
        Format::Csv => grid_csv(grid, meta).into_bytes(),
        Format::Ppm => grid_ppm(grid),
        Format::Json => unreachable!(),
    };
    write_bytes(out, &payload)?;
    if let Some(path) = out {
        let sidecar = path.with_extension("legend.json");
        write_bytes(Some(&sidecar), grid_legend_json(grid, meta).as_bytes())?;
    }
    Ok(())
}

fn cmd_multi_scan(cmd: MultiScanCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    let fmt = resolve_format(&cmd.out, &cfg, Format::Csv, &[Format::Csv, Format::Ppm])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let t = resolve_t(cmd.t, &cfg)?;
    let parts_raw = cmd
        .bipartitions
        .or_else(|| cfg.get_raw("bipartitions").map(str::to_string))
        .ok_or_else(|| {
            Failure::Usage("missing --bipartitions (e.g. 3:12,4:12,5:12)".to_string())
        })?;
    let bipartitions = parse_bipartitions(&parts_raw)?;
    let table = table()?;
    let (x, y) = resolve_grid(&cmd.grid, &cfg)?;
    let plan = SweepPlan {
        x,
        y,
        base: setting,
        t,
        task: Task::MultiPresence { bipartitions },
    };
    let grid = sweep(&plan, &table).map_err(Failure::from_core)?;
    let meta = grid_meta(
        pump_meta(
            Metadata::new("multi-scan", QuadScale::default(), table.calibration_factor()),
            &setting,
        )
        .with_param("bipartitions", &parts_raw),
        &plan,
        t,
    );
    emit_grid(&grid, &meta, fmt, cmd.out.out.as_deref())
}

fn cmd_scan(cmd: ScanCmd) -> CliResult<()> {
    let cfg = Config::load(cmd.out.config.as_deref())?;
    let fmt = resolve_format(&cmd.out, &cfg, Format::Csv, &[Format::Csv, Format::Ppm])?;
    let setting = resolve_pump(&cmd.pump, &cfg)?;
    let t = resolve_t(cmd.t, &cfg)?;
    let scale = resolve_scale(cmd.scale.as_deref(), &cfg)?;
    let pair_raw = match &cmd.pair {
        Some(p) => Some(p.clone()),
        None => cfg.get_raw("pair").map(str::to_string),
    };
    let (task, extra): (Task, Vec<(&str, String)>) = if cmd.genuine_map {
        (Task::GenuineMap { scale }, vec![("genuine_map", "true".to_string())])
    } else if let Some(raw) = &pair_raw {
        let pair = parse_modes(raw)?;
        if pair.len() != 2 {
            return Err(Failure::Usage(format!("--pair needs exactly two modes, got '{raw}'")));
        }
        let tol = match cmd.tol {
            Some(v) => v,
            None => cfg.get("tol")?.unwrap_or(DEFAULT_CLASS_TOL),
        };
        (
            Task::PairClass {
                mode_a: pair[0],
                mode_b: pair[1],
                tol,
            },
            vec![("pair", raw.clone()), ("tol", tol.to_string())],
        )
    } else {
        return Err(Failure::Usage(
            "scan needs either --pair A,B or --genuine-map".to_string(),
        ));
    };
    let table = table()?;
    let (x, y) = resolve_grid(&cmd.grid, &cfg)?;
    let plan = SweepPlan {
        x,
        y,
        base: setting,
        t,
        task,
    };
    let grid = sweep(&plan, &table).map_err(Failure::from_core)?;
    let mut meta = pump_meta(
        Metadata::new("scan", scale, table.calibration_factor()),
        &setting,
    );
    for (k, v) in extra {
        meta = meta.with_param(k, v);
    }
    let meta = grid_meta(meta, &plan, t);
    emit_grid(&grid, &meta, fmt, cmd.out.out.as_deref())
}
