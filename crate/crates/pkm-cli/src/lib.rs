//! `pkm` — analysis and design CLI for two planar 2-DOF parallel
//! kinematic machines (Biglide, 2-DOF Orthoglide).
//!
//! Subcommands map onto the library operations: `vaf`, `ik`, `fk`,
//! `locus`, and `singular` for pointwise/field analysis, `design` and
//! `compare` for the square useful-workspace sizing procedure, and
//! `plot` for standalone figure rendering. Exit codes: 0 on success,
//! 1 on domain errors (infeasible design, singular pose, ...), 2 on
//! usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use pkm_core::kinetostatics::{self, trace_isotropy_locus, vaf_at, vaf_grid, TOL_ISO};
use pkm_core::mechanisms::{
    forward_kinematics, inverse_kinematics, MechanismGeometry, MechanismKind, Sign, WorkingMode,
};
use pkm_core::planar::{Rect, Vec2};
use pkm_core::singularity::{build_cworkspace, classify, Interval, TOL_A, TOL_B};
use pkm_core::sizing::{compare_designs, design_mechanism, DesignOutcome};
use pkm_core::workspace::DesignOptions;
use pkm_core::{JointPos, VafBounds};

pub mod config;
pub mod output;
pub mod plot;
pub mod svg;

use config::{load_config, parse_mechanism, ConfigError, RunConfig};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl From<pkm_core::Error> for CliError {
    fn from(e: pkm_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(format!("i/o error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "pkm",
    version,
    about = "Kinetostatic analysis and workspace sizing for planar 2-DOF parallel kinematic machines",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Velocity amplification factors at a pose.
    Vaf(PoseArgs),
    /// Inverse kinematics: joint coordinates reaching a pose.
    Ik(PoseArgs),
    /// Forward kinematics: pose assembled from joint coordinates.
    Fk(FkArgs),
    /// Trace the isotropy continuum and export it as CSV/SVG.
    Locus(LocusArgs),
    /// Classify a pose, or grid the Cartesian workspace under joint limits.
    Singular(SingularArgs),
    /// Run the full design pipeline for one mechanism.
    Design(DesignArgs),
    /// Design both mechanisms for the same task and compare them.
    Compare(CompareArgs),
    /// Render figures for a configured mechanism.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GeometryArgs {
    /// Mechanism kind: biglide | orthoglide2.
    #[arg(long)]
    mechanism: String,
    /// Strut length in meters.
    #[arg(long = "L", value_name = "METERS")]
    strut_length: f64,
    /// Perpendicular gap between the Biglide rails (default 0).
    #[arg(long, value_name = "METERS")]
    rail_gap: Option<f64>,
    /// Working-mode branch signs, e.g. `--mode -1 1`.
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_name = "SIGN")]
    mode: Option<Vec<i8>>,
}

impl GeometryArgs {
    fn geometry(&self) -> Result<MechanismGeometry, CliError> {
        let kind = parse_mechanism(&self.mechanism).map_err(CliError::Usage)?;
        let mut geom = MechanismGeometry::new(kind, self.strut_length)?;
        if let Some(e) = self.rail_gap {
            geom = geom.with_rail_gap(e)?;
        }
        if let Some(signs) = &self.mode {
            let sign = |v: i8| -> Result<Sign, CliError> {
                match v {
                    -1 => Ok(Sign::Neg),
                    1 => Ok(Sign::Pos),
                    other => Err(CliError::Usage(format!(
                        "--mode entries must be -1 or 1, got {other}"
                    ))),
                }
            };
            geom = geom.with_mode(WorkingMode::new(sign(signs[0])?, sign(signs[1])?));
        }
        Ok(geom)
    }
}

#[derive(Args)]
struct PoseArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Tool pose, two coordinates in meters.
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_name = "METERS")]
    at: Vec<f64>,
}

#[derive(Args)]
struct FkArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Joint coordinates, two values in meters.
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_name = "METERS")]
    joints: Vec<f64>,
}

#[derive(Args)]
struct LocusArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Trace region `x_min y_min x_max y_max` in meters (default: the
    /// bulk of the reachable workspace).
    #[arg(long = "box", num_args = 4, allow_hyphen_values = true, value_name = "METERS")]
    region: Option<Vec<f64>>,
    /// Marching step in meters (default L/500).
    #[arg(long)]
    step: Option<f64>,
    /// Acceptance threshold on cond(J) - 1.
    #[arg(long, default_value_t = TOL_ISO)]
    tol: f64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SingularArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Classify a single pose instead of gridding.
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_name = "METERS")]
    at: Option<Vec<f64>>,
    /// Joint limits `rho1_min rho1_max rho2_min rho2_max` in meters.
    #[arg(long, num_args = 4, allow_hyphen_values = true, value_name = "METERS")]
    limits: Option<Vec<f64>>,
    /// Grid box `x_min y_min x_max y_max` in meters.
    #[arg(long = "box", num_args = 4, allow_hyphen_values = true, value_name = "METERS")]
    region: Option<Vec<f64>>,
    /// Grid pitch in meters (default 0.01 L).
    #[arg(long)]
    pitch: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DesignArgs {
    /// Mechanism kind: biglide | orthoglide2.
    #[arg(long)]
    mechanism: Option<String>,
    /// Side of the square useful workspace, meters.
    #[arg(long, value_name = "METERS")]
    target_side: Option<f64>,
    /// Amplification bounds `lo hi`.
    #[arg(long, num_args = 2, value_name = "FACTOR")]
    bounds: Option<Vec<f64>>,
    /// JSON config file; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Side of the square useful workspace, meters.
    #[arg(long, value_name = "METERS")]
    target_side: Option<f64>,
    /// Amplification bounds `lo hi`.
    #[arg(long, num_args = 2, value_name = "FACTOR")]
    bounds: Option<Vec<f64>>,
    /// JSON config file; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// JSON config file selecting the mechanism, scale, and layers.
    #[arg(long)]
    config: PathBuf,
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message (help/version go to stdout)
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Vaf(args) => cmd_vaf(args),
        Command::Ik(args) => cmd_ik(args),
        Command::Fk(args) => cmd_fk(args),
        Command::Locus(args) => cmd_locus(args),
        Command::Singular(args) => cmd_singular(args),
        Command::Design(args) => cmd_design(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
    }
}

fn pose_from(values: &[f64]) -> Vec2 {
    Vec2::new(values[0], values[1])
}

fn cmd_vaf(args: PoseArgs) -> Result<(), CliError> {
    let geom = args.geometry.geometry()?;
    let p = pose_from(&args.at);
    let vaf = vaf_at(&geom, p)?;
    println!(
        "vaf: ({:.6}, {:.6}) dimensionless",
        vaf.lambda_min, vaf.lambda_max
    );
    println!("cond: {:.6} dimensionless", vaf.cond());
    Ok(())
}

fn cmd_ik(args: PoseArgs) -> Result<(), CliError> {
    let geom = args.geometry.geometry()?;
    let q = inverse_kinematics(&geom, pose_from(&args.at))?;
    println!("joints: rho1 = {:.6} m, rho2 = {:.6} m", q.rho1, q.rho2);
    Ok(())
}

fn cmd_fk(args: FkArgs) -> Result<(), CliError> {
    let geom = args.geometry.geometry()?;
    let p = forward_kinematics(&geom, JointPos::new(args.joints[0], args.joints[1]))?;
    println!("pose: x = {:.6} m, y = {:.6} m", p.x, p.y);
    Ok(())
}

fn default_locus_region(geom: &MechanismGeometry) -> Rect {
    let l = geom.strut_length();
    match geom.kind() {
        MechanismKind::Orthoglide2D => Rect::from_bounds(-0.9 * l, -0.9 * l, 0.9 * l, 0.9 * l),
        MechanismKind::Biglide => Rect::from_bounds(-l, 0.05 * l, l, 0.95 * l),
    }
}

fn rect_from(values: &[f64]) -> Result<Rect, CliError> {
    if values[2] <= values[0] || values[3] <= values[1] {
        return Err(CliError::Usage(
            "--box expects x_min y_min x_max y_max with max > min".into(),
        ));
    }
    Ok(Rect::from_bounds(values[0], values[1], values[2], values[3]))
}

fn cmd_locus(args: LocusArgs) -> Result<(), CliError> {
    let geom = args.geometry.geometry()?;
    let region = match &args.region {
        Some(v) => rect_from(v)?,
        None => default_locus_region(&geom),
    };
    let step = args.step.unwrap_or(geom.strut_length() / 500.0);
    let locus = trace_isotropy_locus(&geom, region, step, args.tol)?;
    let csv_path = args.out_dir.join("locus.csv");
    output::write_atomic(&csv_path, &output::locus_csv(&locus))?;
    let canvas = svg::Canvas::new(region, 720.0);
    let mut doc = svg::Svg::new(canvas);
    let grid = vaf_grid(&geom, region, (region.width() / 160.0).max(step));
    plot::heatmap_layer(&mut doc, &grid);
    plot::locus_layer(&mut doc, &locus);
    let svg_path = args.out_dir.join("locus.svg");
    output::write_atomic(&svg_path, &doc.finish())?;
    println!(
        "isotropy locus: {} points, common vaf in [{:.6}, {:.6}]",
        locus.points.len(),
        locus.vaf_along.iter().cloned().fold(f64::INFINITY, f64::min),
        locus
            .vaf_along
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max),
    );
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}

fn cmd_singular(args: SingularArgs) -> Result<(), CliError> {
    let geom = args.geometry.geometry()?;
    let l = geom.strut_length();
    if let Some(at) = &args.at {
        let p = pose_from(at);
        let q = inverse_kinematics(&geom, p)?;
        let class = classify(&geom, p, q, TOL_A, TOL_B)?;
        println!(
            "class: {:?} (det A = {:.6e} m^2, det B = {:.6e} m^2)",
            class.kind, class.det_a, class.det_b
        );
        return Ok(());
    }
    let limits = match &args.limits {
        Some(v) => [Interval::new(v[0], v[1]), Interval::new(v[2], v[3])],
        None => [
            Interval::new(f64::NEG_INFINITY, f64::INFINITY),
            Interval::new(f64::NEG_INFINITY, f64::INFINITY),
        ],
    };
    let region = match &args.region {
        Some(v) => rect_from(v)?,
        None => match geom.kind() {
            MechanismKind::Orthoglide2D => {
                Rect::from_bounds(-1.1 * l, -1.1 * l, 1.1 * l, 1.1 * l)
            }
            MechanismKind::Biglide => Rect::from_bounds(-1.5 * l, 0.0, 1.5 * l, 1.05 * l),
        },
    };
    let pitch = args.pitch.unwrap_or(0.01 * l);
    let cw = build_cworkspace(&geom, &limits, region, pitch)?;
    let counts = cw.counts();
    let csv_path = args.out_dir.join("cworkspace.csv");
    output::write_atomic(&csv_path, &cw.to_csv())?;
    let mut doc = svg::Svg::new(svg::Canvas::new(region, 720.0));
    plot::cworkspace_layer(&mut doc, &cw);
    let svg_path = args.out_dir.join("cworkspace.svg");
    output::write_atomic(&svg_path, &doc.finish())?;
    println!(
        "cells: {} regular, {} serial-boundary, {} parallel-singular, {} unreachable",
        counts.regular, counts.serial_boundary, counts.parallel_singular, counts.unreachable
    );
    println!(
        "reachable area: {:.6} m^2; t-connected: {}",
        cw.reachable_area(),
        cw.reachable_t_connected().ok
    );
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}

/// Resolves design/compare inputs from an optional config plus flag
/// overrides.
struct DesignScenario {
    bounds: VafBounds,
    target_side: f64,
    options: DesignOptions,
    out_dir: PathBuf,
    plots: config::PlotToggles,
}

fn resolve_scenario(
    config_path: Option<&Path>,
    mechanism_flag: Option<&str>,
    target_flag: Option<f64>,
    bounds_flag: Option<&[f64]>,
    out_dir_flag: Option<&Path>,
    require_mechanism: bool,
) -> Result<(Option<MechanismKind>, DesignScenario), CliError> {
    let config = match config_path {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let kind = match (mechanism_flag, &config) {
        (Some(name), _) => Some(parse_mechanism(name).map_err(CliError::Usage)?),
        (None, Some(cfg)) => Some(cfg.kind()?),
        (None, None) => None,
    };
    if require_mechanism && kind.is_none() {
        return Err(CliError::Usage(
            "--mechanism (or --config with a mechanism) is required".into(),
        ));
    }
    let target_side = match (target_flag, &config) {
        (Some(t), _) => t,
        (None, Some(cfg)) => cfg.target_side.ok_or_else(|| {
            CliError::Usage("config has no target_side; pass --target-side".into())
        })?,
        (None, None) => {
            return Err(CliError::Usage(
                "--target-side (or --config with target_side) is required".into(),
            ))
        }
    };
    if !(target_side > 0.0) {
        return Err(CliError::Usage(format!(
            "--target-side must be positive, got {target_side}"
        )));
    }
    let bounds = match (bounds_flag, &config) {
        (Some(v), _) => VafBounds::new(v[0], v[1])?,
        (None, Some(cfg)) => cfg.vaf_bounds()?,
        (None, None) => VafBounds::default(),
    };
    if !(bounds.lo > 0.0) {
        return Err(CliError::Usage(format!(
            "--bounds lower value must be positive, got {}",
            bounds.lo
        )));
    }
    let options = config
        .as_ref()
        .map(|cfg| cfg.design_options())
        .unwrap_or_default();
    let out_dir = out_dir_flag
        .map(Path::to_path_buf)
        .or_else(|| config.as_ref().map(|cfg| PathBuf::from(&cfg.out_dir)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let plots = config.as_ref().map(|cfg| cfg.plots).unwrap_or_default();
    Ok((
        kind,
        DesignScenario {
            bounds,
            target_side,
            options,
            out_dir,
            plots,
        },
    ))
}

/// Renders the design figure: occupancy cells, rails/struts, isotropy
/// locus, u-workspace square, and binding markers.
fn design_figure(outcome: &DesignOutcome) -> String {
    let r = &outcome.result;
    let geom = MechanismGeometry::new(r.kind, r.strut_length).expect("valid design geometry");
    let region = outcome.cworkspace.bounds;
    let mut doc = svg::Svg::new(svg::Canvas::new(region, 760.0));
    plot::cworkspace_layer(&mut doc, &outcome.cworkspace);
    plot::mechanism_layer(&mut doc, &geom, &r.joint_ranges, r.workspace.center);
    if let Ok(locus) = trace_isotropy_locus(
        &geom,
        region,
        geom.strut_length() / 500.0,
        TOL_ISO,
    ) {
        plot::locus_layer(&mut doc, &locus);
    }
    plot::square_layer(&mut doc, &geom, &r.workspace);
    for b in &r.bindings {
        doc.circle(
            b.point,
            0.01 * geom.strut_length(),
            "fill=\"#d64545\" stroke=\"#7a1515\"",
        );
    }
    doc.finish()
}

fn run_design(
    kind: MechanismKind,
    scenario: &DesignScenario,
) -> Result<DesignOutcome, CliError> {
    design_mechanism(kind, &scenario.bounds, scenario.target_side, &scenario.options)
        .map_err(CliError::from)
}

fn write_design_outputs(
    outcome: &DesignOutcome,
    scenario: &DesignScenario,
) -> Result<(), CliError> {
    let label = outcome.result.kind.label();
    output::write_atomic(
        &scenario.out_dir.join(format!("design_{label}.json")),
        &output::design_json(&outcome.result),
    )?;
    output::write_atomic(
        &scenario.out_dir.join(format!("centermap_{label}.csv")),
        &output::center_map_csv(&outcome.center_map_norm),
    )?;
    if scenario.plots.cworkspace || scenario.plots.workspace_square {
        output::write_atomic(
            &scenario.out_dir.join(format!("design_{label}.svg")),
            &design_figure(outcome),
        )?;
    }
    Ok(())
}

fn cmd_design(args: DesignArgs) -> Result<(), CliError> {
    let (kind, scenario) = resolve_scenario(
        args.config.as_deref(),
        args.mechanism.as_deref(),
        args.target_side,
        args.bounds.as_deref(),
        args.out_dir.as_deref(),
        true,
    )?;
    let kind = kind.expect("required above");
    let outcome = run_design(kind, &scenario)?;
    write_design_outputs(&outcome, &scenario)?;
    print!("{}", output::design_summary(&outcome.result));
    println!(
        "wrote design_{label}.json, centermap_{label}.csv, design_{label}.svg in {}",
        scenario.out_dir.display(),
        label = kind.label()
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let (_, scenario) = resolve_scenario(
        args.config.as_deref(),
        None,
        args.target_side,
        args.bounds.as_deref(),
        args.out_dir.as_deref(),
        false,
    )?;
    let mut results = Vec::new();
    for kind in [MechanismKind::Biglide, MechanismKind::Orthoglide2D] {
        let outcome = run_design(kind, &scenario)?;
        write_design_outputs(&outcome, &scenario)?;
        results.push(outcome.result);
    }
    let table = compare_designs(&results)?;
    output::write_atomic(&scenario.out_dir.join("compare.csv"), &table.to_csv())?;
    let text = table.to_text();
    output::write_atomic(&scenario.out_dir.join("compare.txt"), &text)?;
    print!("{text}");
    println!("wrote compare.csv and compare.txt in {}", scenario.out_dir.display());
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let cfg: RunConfig = load_config(&args.config)?;
    let kind = cfg.kind()?;
    let bounds = cfg.vaf_bounds()?;
    let out_dir = PathBuf::from(&cfg.out_dir);

    // analysis geometry: direct strut length, or the one designed for
    // the target side
    let (geom, design): (MechanismGeometry, Option<DesignOutcome>) = match cfg.strut_length {
        Some(l) => (MechanismGeometry::new(kind, l)?, None),
        None => {
            let outcome =
                design_mechanism(kind, &bounds, cfg.target_side.unwrap(), &cfg.design_options())?;
            let geom = MechanismGeometry::new(kind, outcome.result.strut_length)?;
            (geom, Some(outcome))
        }
    };
    let l = geom.strut_length();
    let region = match kind {
        MechanismKind::Orthoglide2D => Rect::from_bounds(-1.05 * l, -1.05 * l, 1.05 * l, 1.05 * l),
        MechanismKind::Biglide => Rect::from_bounds(-1.5 * l, 0.0, 1.5 * l, 1.05 * l),
    };
    let mut doc = svg::Svg::new(svg::Canvas::new(region, 760.0));
    if cfg.plots.vaf_heatmap {
        let grid = vaf_grid(&geom, region, cfg.pitch_rel * l);
        plot::heatmap_layer(&mut doc, &grid);
        plot::bound_isolines_layer(&mut doc, &grid, bounds.lo, bounds.hi);
    }
    if cfg.plots.cworkspace {
        if let Some(outcome) = &design {
            plot::cworkspace_layer(&mut doc, &outcome.cworkspace);
        } else {
            let unlimited = [
                Interval::new(f64::NEG_INFINITY, f64::INFINITY),
                Interval::new(f64::NEG_INFINITY, f64::INFINITY),
            ];
            let cw = build_cworkspace(&geom, &unlimited, region, cfg.pitch_rel * l)?;
            plot::cworkspace_layer(&mut doc, &cw);
        }
    }
    if cfg.plots.isotropy_locus {
        if let Ok(locus) = trace_isotropy_locus(&geom, region, l / 500.0, TOL_ISO) {
            plot::locus_layer(&mut doc, &locus);
        }
    }
    if cfg.plots.ellipses {
        plot::ellipse_layer(&mut doc, &geom, region, 12, 0.05 * l);
    }
    if cfg.plots.workspace_square {
        if let Some(outcome) = &design {
            plot::square_layer(&mut doc, &geom, &outcome.result.workspace);
        }
    }
    let path = out_dir.join(format!("plot_{}.svg", kind.label()));
    output::write_atomic(&path, &doc.finish())?;
    println!("wrote {}", path.display());
    Ok(())
}

// re-export for integration tests
pub use kinetostatics::Vaf;
pub use pkm_core as core;
