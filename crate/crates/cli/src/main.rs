//! `transvect`: batch driver for landmark-based diffeomorphic shape analysis.
//!
//! Exit codes: 0 on success, 1 for usage errors (the offending flag is named
//! on stderr), 2 for computation or file errors. All outputs are
//! deterministic; re-running a subcommand on the same inputs reproduces every
//! file byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use transvect_core::diagnostics::ErrorKind;
use transvect_core::geodesics::shoot_with_points;
use transvect_core::registration::register;
use transvect_core::strain::{area_strain_error, local_area_strain};
use transvect_core::symmetric_ops::{midpoint, symmetry};
use transvect_core::transport::pole_ladder;
use transvect_core::{ControlSystem, KernelParams, PointSet, Variant};

use transvect_cli::config::{load_config, ExperimentConfig};
use transvect_cli::off::{load_mesh, save_mesh};
use transvect_cli::report::{
    format_control_csv, format_delta_csv, format_errors_csv, format_registration_json,
    format_scalar_csv, format_summary_json, parse_control_csv,
};
use transvect_cli::synth::{
    generate_population, load_population, write_population, PopulationParams,
};
use transvect_cli::CliError;

#[derive(Parser)]
#[command(
    name = "transvect",
    version,
    about = "Geodesic registration, transport, and consistency diagnostics for triangulated shapes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register a template mesh onto a target mesh
    Register(RegisterArgs),
    /// Shoot a mesh along a geodesic given control points and momenta
    Shoot(ShootArgs),
    /// Midpoint of the geodesic between two meshes
    Midpoint(MidpointArgs),
    /// Geodesic reflection of a subject through a center mesh
    Symmetry(SymmetryArgs),
    /// Transport a subject's deformation to the template by pole ladder
    PoleLadder(PoleLadderArgs),
    /// Run the consistency-error suite over a population
    Errors(ErrorsArgs),
    /// Local area strain maps and their comparison
    Strain(StrainArgs),
    /// Generate a synthetic population
    Synth(SynthArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (falls back to the configuration's output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegisterArgs {
    /// Template mesh (OFF)
    #[arg(long)]
    template: PathBuf,
    /// Target mesh (OFF)
    #[arg(long)]
    target: PathBuf,
    /// Regularization weight (defaults to the first configured value)
    #[arg(long)]
    alpha_squared: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ShootArgs {
    /// Mesh to deform (OFF)
    #[arg(long)]
    shape: PathBuf,
    /// Control points and momenta (CSV: index,x,y,z,mx,my,mz)
    #[arg(long)]
    momenta: PathBuf,
    /// Integration horizon in [0, 1]
    #[arg(long, default_value_t = 1.0, value_parser = parse_unit_interval)]
    t_end: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct MidpointArgs {
    /// Mesh the connecting geodesic is shot from (OFF)
    #[arg(long)]
    base: PathBuf,
    /// Mesh the geodesic is registered onto (OFF)
    #[arg(long)]
    other: PathBuf,
    /// Operator variant
    #[arg(long, default_value = "with_residual", value_parser = parse_variant)]
    variant: Variant,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SymmetryArgs {
    /// Center of the reflection (OFF)
    #[arg(long)]
    center: PathBuf,
    /// Mesh to reflect (OFF)
    #[arg(long)]
    subject: PathBuf,
    /// Operator variant
    #[arg(long, default_value = "with_residual", value_parser = parse_variant)]
    variant: Variant,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PoleLadderArgs {
    /// Template the deformation is transported to (OFF)
    #[arg(long)]
    template: PathBuf,
    /// Subject baseline mesh (OFF)
    #[arg(long)]
    subject: PathBuf,
    /// Subject follow-up mesh (OFF)
    #[arg(long)]
    followup: PathBuf,
    /// Operator variant
    #[arg(long, default_value = "with_residual", value_parser = parse_variant)]
    variant: Variant,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ErrorsArgs {
    /// Population directory holding population.json
    #[arg(long)]
    population: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct StrainArgs {
    /// Reference mesh (OFF)
    #[arg(long)]
    reference: PathBuf,
    /// First deformed mesh (OFF)
    #[arg(long)]
    first: PathBuf,
    /// Optional second deformed mesh to compare against the first (OFF)
    #[arg(long)]
    second: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of subjects
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    subjects: u64,
    /// Generator seed (defaults to the configured seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Ellipsoid semi-axes, comma separated
    #[arg(long, value_parser = parse_radii)]
    radii: Option<Radii>,
    /// Icosphere subdivision level
    #[arg(long)]
    subdivisions: Option<u32>,
    /// Standard deviation of the random subject momenta
    #[arg(long, value_parser = parse_non_negative)]
    subject_amplitude: Option<f64>,
    /// Standard deviation of the per-vertex noise
    #[arg(long, value_parser = parse_non_negative)]
    noise_amplitude: Option<f64>,
    /// Strength of the radial contraction in the follow-up deformation
    #[arg(long, value_parser = parse_non_negative)]
    systolic_amplitude: Option<f64>,
    /// Standard deviation of the random part of the follow-up momenta
    #[arg(long, value_parser = parse_non_negative)]
    systolic_randomness: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy)]
struct Radii([f64; 3]);

fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "with_residual" => Ok(Variant::WithResidual),
        "without_residual" => Ok(Variant::WithoutResidual),
        other => Err(format!("must be 'with_residual' or 'without_residual', got '{other}'")),
    }
}

fn parse_unit_interval(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("invalid number '{s}'"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("must lie in [0, 1], got {x}"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("invalid number '{s}'"))?;
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("must be non-negative and finite, got {x}"))
    }
}

fn parse_radii(s: &str) -> Result<Radii, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated semi-axes, got '{s}'"));
    }
    let mut radii = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        let x: f64 = p.trim().parse().map_err(|_| format!("invalid number '{p}'"))?;
        if !x.is_finite() || x <= 0.0 {
            return Err(format!("semi-axes must be positive, got {x}"));
        }
        radii[i] = x;
    }
    Ok(Radii(radii))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Register(args) => cmd_register(args),
        Command::Shoot(args) => cmd_shoot(args),
        Command::Midpoint(args) => cmd_midpoint(args),
        Command::Symmetry(args) => cmd_symmetry(args),
        Command::PoleLadder(args) => cmd_pole_ladder(args),
        Command::Errors(args) => cmd_errors(args),
        Command::Strain(args) => cmd_strain(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn load_cfg(path: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => load_config(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn resolve_out(common: &CommonArgs, cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    fs::create_dir_all(&dir).map_err(CliError::Io)?;
    Ok(dir)
}

fn scheme_label(cfg: &ExperimentConfig) -> &'static str {
    match cfg.scheme {
        transvect_core::Scheme::Euler => "euler",
        transvect_core::Scheme::Rk2 => "rk2",
    }
}

fn cmd_register(args: RegisterArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.common.config)?;
    let alpha = args.alpha_squared.unwrap_or(cfg.alpha_squared[0]);
    let reg_cfg = cfg.registration(alpha);
    let template = load_mesh(&args.template)?;
    let target = load_mesh(&args.target)?;
    let result = register(&template, &target, &reg_cfg)?;
    let out = resolve_out(&args.common, &cfg)?;

    fs::write(
        out.join("result.json"),
        format_registration_json(&result, cfg.sigma, alpha, cfg.n_steps, scheme_label(&cfg))?,
    )?;
    fs::write(out.join("momenta.csv"), format_control_csv(&result.system))?;
    save_mesh(&result.deformed, out.join("deformed.off"))?;
    fs::write(out.join("delta.csv"), format_delta_csv(&result.delta))?;

    println!(
        "registered {} vertices with {} control points: criterion {:.6e}, residual rms {:.6e}, {} iterations, converged: {}",
        template.vertex_count(),
        result.system.control_points().len(),
        result.total,
        result.residual_rms(),
        result.iterations,
        result.converged,
    );
    Ok(())
}

fn cmd_shoot(args: ShootArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.common.config)?;
    let shape = load_mesh(&args.shape)?;
    let text = fs::read_to_string(&args.momenta)?;
    let (points, momenta) = parse_control_csv(&text)?;
    let kernel = KernelParams::new(cfg.sigma)?;
    let sys = ControlSystem::new(points, momenta, kernel)?;
    let vertices = PointSet::new(shape.vertices().to_vec())?;
    let traj = shoot_with_points(&sys, &vertices, cfg.n_steps, args.t_end, cfg.scheme)?;
    let deformed = shape
        .with_vertices(traj.final_points().expect("trajectory carries points").to_vec())?;
    let out = resolve_out(&args.common, &cfg)?;

    save_mesh(&deformed, out.join("deformed.off"))?;
    fs::write(out.join("system_end.csv"), format_control_csv(&traj.system_at(traj.n_steps())))?;

    println!(
        "shot {} vertices to t = {} in {} steps",
        shape.vertex_count(),
        args.t_end,
        cfg.n_steps
    );
    Ok(())
}

fn cmd_midpoint(args: MidpointArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.common.config)?;
    let alpha = cfg.alpha_squared[0];
    let reg_cfg = cfg.registration(alpha);
    let base = load_mesh(&args.base)?;
    let other = load_mesh(&args.other)?;
    let (mid, reg) = midpoint(&base, &other, &reg_cfg, args.variant)?;
    let out = resolve_out(&args.common, &cfg)?;

    save_mesh(&mid, out.join("midpoint.off"))?;
    fs::write(
        out.join("registration.json"),
        format_registration_json(&reg, cfg.sigma, alpha, cfg.n_steps, scheme_label(&cfg))?,
    )?;

    println!(
        "midpoint ({}) of {} vertices, registration converged: {}",
        args.variant.name(),
        base.vertex_count(),
        reg.converged
    );
    Ok(())
}

fn cmd_symmetry(args: SymmetryArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.common.config)?;
    let alpha = cfg.alpha_squared[0];
    let reg_cfg = cfg.registration(alpha);
    let center = load_mesh(&args.center)?;
    let subject = load_mesh(&args.subject)?;
    let outcome = symmetry(&center, &subject, &reg_cfg, args.variant)?;
    let out = resolve_out(&args.common, &cfg)?;

    save_mesh(&outcome.result, out.join("reflected.off"))?;
    fs::write(
        out.join("registration.json"),
        format_registration_json(
            &outcome.registration,
            cfg.sigma,
            alpha,
            cfg.n_steps,
            scheme_label(&cfg),
        )?,
    )?;

    println!(
        "reflected {} vertices ({}), registration converged: {}",
        subject.vertex_count(),
        args.variant.name(),
        outcome.registration.converged
    );
    Ok(())
}

#[derive(Serialize)]
struct RungJson {
    converged: [bool; 3],
}

#[derive(Serialize)]
struct TraceJson {
    n_rungs: usize,
    variant: &'static str,
    rungs: Vec<RungJson>,
}

fn cmd_pole_ladder(args: PoleLadderArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.common.config)?;
    let reg_cfg = cfg.registration(cfg.alpha_squared[0]);
    let template = load_mesh(&args.template)?;
    let subject = load_mesh(&args.subject)?;
    let followup = load_mesh(&args.followup)?;
    let (transported, trace) =
        pole_ladder(&template, &subject, &followup, &reg_cfg, args.variant, cfg.n_rungs)?;
    let out = resolve_out(&args.common, &cfg)?;

    save_mesh(&transported, out.join("transported.off"))?;
    let trace_json = TraceJson {
        n_rungs: trace.rungs.len(),
        variant: args.variant.name(),
        rungs: trace.rungs.iter().map(|r| RungJson { converged: r.converged }).collect(),
    };
    fs::write(
        out.join("trace.json"),
        serde_json::to_string_pretty(&trace_json).map_err(CliError::Json)? + "\n",
    )?;

    println!(
        "transported deformation over {} rung(s) ({})",
        trace.rungs.len(),
        args.variant.name()
    );
    Ok(())
}

fn cmd_errors(args: ErrorsArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.common.config)?;
    let population = load_population(&args.population)?;
    let pairs: Vec<_> = population
        .subjects
        .into_iter()
        .map(|s| (s.baseline, s.followup))
        .collect();
    let base_cfg = cfg.registration(cfg.alpha_squared[0]);
    let report = transvect_core::diagnostics::run_suite(
        &population.template,
        &pairs,
        &cfg.alpha_squared,
        &cfg.variants,
        &base_cfg,
    );
    let out = resolve_out(&args.common, &cfg)?;

    fs::write(out.join("errors.csv"), format_errors_csv(&report))?;
    fs::write(out.join("summary.json"), format_summary_json(&report)?)?;

    println!(
        "evaluated {} subjects x {} weights x {} variants ({} error kinds); {} failures",
        pairs.len(),
        cfg.alpha_squared.len(),
        cfg.variants.len(),
        ErrorKind::ALL.len(),
        report.failures.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct StrainComparisonJson {
    area_strain_error: f64,
}

fn cmd_strain(args: StrainArgs) -> Result<(), CliError> {
    let reference = load_mesh(&args.reference)?;
    let first = load_mesh(&args.first)?;
    let las_first = local_area_strain(&reference, &first)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("strain_first.csv"), format_scalar_csv(&las_first))?;

    match &args.second {
        Some(second_path) => {
            let second = load_mesh(second_path)?;
            let las_second = local_area_strain(&reference, &second)?;
            let ase = area_strain_error(&las_first, &las_second)?;
            fs::write(args.out.join("strain_second.csv"), format_scalar_csv(&las_second))?;
            fs::write(
                args.out.join("comparison.json"),
                serde_json::to_string_pretty(&StrainComparisonJson { area_strain_error: ase })
                    .map_err(CliError::Json)?
                    + "\n",
            )?;
            println!(
                "computed strain maps over {} vertices; area strain error {:.6e}",
                reference.vertex_count(),
                ase
            );
        }
        None => {
            println!("computed strain map over {} vertices", reference.vertex_count());
        }
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.common.config)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let mut params = PopulationParams::default();
    if let Some(Radii(radii)) = args.radii {
        params.radii = radii;
    }
    if let Some(s) = args.subdivisions {
        params.subdivisions = s;
    }
    if let Some(a) = args.subject_amplitude {
        params.subject_amplitude = a;
    }
    if let Some(a) = args.noise_amplitude {
        params.noise_amplitude = a;
    }
    if let Some(a) = args.systolic_amplitude {
        params.systolic_amplitude = a;
    }
    if let Some(a) = args.systolic_randomness {
        params.systolic_randomness = a;
    }
    let population = generate_population(seed, args.subjects as usize, &cfg, &params)?;
    let out = resolve_out(&args.common, &cfg)?;
    write_population(&out, &population, seed, &params)?;

    println!(
        "wrote template and {} subject pair(s) to {}",
        population.subjects.len(),
        display_dir(&out)
    );
    Ok(())
}

fn display_dir(path: &Path) -> String {
    path.display().to_string()
}
