use std::env;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pathforge::discretize::nagata_error_table;
use pathforge::geometry::{frame_from_three_points, Vec3};
use pathforge::io::{
    self, frame_to_json, trace_to_csv, trajectory_to_csv, write_atomic, PathSpec, RunConfig,
    CONFIG_ENV_VAR,
};
use pathforge::sim::{run_force_controlled, run_open_loop, SurfaceModel};
use pathforge::FuzzyPi;

#[derive(Parser)]
#[command(
    name = "pathforge",
    version,
    about = "Discretize nominal robot paths and simulate force-controlled execution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate a frame from three taught points and write it to a file.
    Calibrate(CalibrateArgs),
    /// Discretize a path spec into a trajectory CSV.
    Discretize(DiscretizeArgs),
    /// Run the contact simulation with and without the force loop.
    Simulate(SimulateArgs),
    /// Tabulate curve-section deviation from a reference arc.
    Errors(ErrorsArgs),
}

#[derive(Args)]
struct CalibrateArgs {
    /// Frame origin as "x,y,z" (mm).
    #[arg(short = 'a', long = "point-a", value_parser = parse_point, allow_hyphen_values = true)]
    point_a: Vec3,
    /// Point on the +x axis as "x,y,z" (mm).
    #[arg(short = 'b', long = "point-b", value_parser = parse_point, allow_hyphen_values = true)]
    point_b: Vec3,
    /// Point in the positive xOy half-plane as "x,y,z" (mm).
    #[arg(short = 'c', long = "point-c", value_parser = parse_point, allow_hyphen_values = true)]
    point_c: Vec3,
    /// Output frame file (JSON).
    #[arg(long, default_value = "frame.json")]
    out: PathBuf,
}

#[derive(Args)]
struct DiscretizeArgs {
    /// Path spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output trajectory file (CSV).
    #[arg(long, default_value = "traj.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Path spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Run config file (JSON); falls back to the PATHFORGE_CONFIG
    /// environment variable, then to built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file for the unadjusted run.
    #[arg(long, default_value = "open.csv")]
    out_open: PathBuf,
    /// Output file for the force-controlled run.
    #[arg(long, default_value = "closed.csv")]
    out_closed: PathBuf,
}

#[derive(Args)]
struct ErrorsArgs {
    /// Total arc angle in degrees.
    #[arg(long)]
    alpha: f64,
    /// Number of equal sections the arc is split into.
    #[arg(long, default_value_t = 1)]
    sections: usize,
    /// Sample increments per section.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Output CSV file; prints to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_point(text: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got '{text}'"));
    }
    let mut values = [0.0; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("bad coordinate '{part}'"))?;
        if !slot.is_finite() {
            return Err(format!("coordinate '{part}' is not finite"));
        }
    }
    Ok(Vec3::new(values[0], values[1], values[2]))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Calibrate(args) => calibrate(args),
        Command::Discretize(args) => discretize(args),
        Command::Simulate(args) => simulate(args),
        Command::Errors(args) => errors(args),
    }
}

fn calibrate(args: CalibrateArgs) -> Result<()> {
    let frame = frame_from_three_points(args.point_a, args.point_b, args.point_c)
        .context("frame calibration failed")?;
    write_atomic(&args.out, &frame_to_json(&frame))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn discretize(args: DiscretizeArgs) -> Result<()> {
    let spec = PathSpec::load(&args.spec)
        .with_context(|| format!("failed to load {}", args.spec.display()))?;
    let trajectory = spec.discretize().context("discretization failed")?;
    write_atomic(&args.out, &trajectory_to_csv(&trajectory))?;
    println!(
        "wrote {} ({} samples)",
        args.out.display(),
        trajectory.len()
    );
    Ok(())
}

fn load_config(explicit: Option<&Path>) -> Result<RunConfig> {
    if let Some(path) = explicit {
        return RunConfig::load(path).with_context(|| format!("failed to load {}", path.display()));
    }
    if let Some(from_env) = env::var_os(CONFIG_ENV_VAR) {
        let path = PathBuf::from(from_env);
        return RunConfig::load(&path)
            .with_context(|| format!("failed to load {} (from {CONFIG_ENV_VAR})", path.display()));
    }
    Ok(RunConfig::default())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = PathSpec::load(&args.spec)
        .with_context(|| format!("failed to load {}", args.spec.display()))?;
    let trajectory = spec.discretize().context("discretization failed")?;
    let config = load_config(args.config.as_deref())?;

    let knots = match &config.surface {
        Some(path) => io::load_surface_knots(path)
            .with_context(|| format!("failed to load surface {}", path.display()))?,
        None => SurfaceModel::benchmark_knots(),
    };
    let surface =
        SurfaceModel::new(knots, config.stiffness, config.force_max).context("invalid surface")?;

    let open = run_open_loop(&trajectory, &surface);
    let controller = FuzzyPi::new(config.gains, config.selection, config.rule_table.build());
    let closed = run_force_controlled(&trajectory, &surface, controller, config.force_setpoint);

    write_atomic(&args.out_open, &trace_to_csv(&open))?;
    write_atomic(&args.out_closed, &trace_to_csv(&closed))?;

    println!(
        "open loop:   peak {:.1} N, {} contact-loss steps, {} abort(s) -> {}",
        open.peak_force(),
        open.contact_loss_steps(),
        open.abort_count(),
        args.out_open.display()
    );
    println!(
        "closed loop: peak {:.1} N, {} contact-loss steps, {} abort(s) -> {}",
        closed.peak_force(),
        closed.contact_loss_steps(),
        closed.abort_count(),
        args.out_closed.display()
    );
    Ok(())
}

fn errors(args: ErrorsArgs) -> Result<()> {
    if args.alpha <= 0.0 || args.alpha / args.sections.max(1) as f64 >= 180.0 {
        bail!("alpha must be positive and below 180 degrees per section");
    }
    let rows = nagata_error_table(args.alpha.to_radians(), args.sections, args.steps)
        .context("error table failed")?;
    let mut csv = String::from("section,pct_path,radial_pct,parametric_pct\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.section, row.path_pct, row.radial_pct, row.parametric_pct
        ));
    }
    match &args.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
