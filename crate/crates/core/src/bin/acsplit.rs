//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use acsplit::coeffs::{Branch, SchemeId};
use acsplit::harness::config::{ExperimentConfig, KTol, ProblemKind};
use acsplit::harness::experiments::{
    converge, family_table, linspace, run_problem, sweep_omega, write_family_csv, write_named_csv, write_run_outputs,
    ConvergeOptions, Family,
};
use acsplit::solver::RunStatus;
use acsplit::{Error, Result};

#[derive(Parser)]
#[command(name = "acsplit", version, about = "Operator splitting for the Allen-Cahn equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print splitting coefficients as CSV.
    Coeffs(CoeffsArgs),
    /// Integrate one problem with one scheme and write fields and diagnostics.
    Run(RunArgs),
    /// Measure errors over a set of step sizes and fit convergence slopes.
    Converge(ConvergeArgs),
    /// Error of the third-order family as a function of omega.
    SweepOmega(SweepArgs),
}

#[derive(Args)]
struct CoeffsArgs {
    /// Family to tabulate (s2, s3+, s3-); without it the named schemes are listed.
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    omega_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    omega_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Named schemes to list.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<SchemeId>>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Settings shared by every integrating subcommand; each overrides the config file.
#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Heat multiplier cut-off, a number >= 1 or `inf`.
    #[arg(long)]
    k_tol: Option<KTol>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cells per axis.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(base.merge(ExperimentConfig {
            problem: self.problem,
            epsilon: self.epsilon,
            k_tol: self.k_tol,
            seed: self.seed,
            cells: self.cells,
            length: self.length,
            t_final: self.t_final,
            output: self.output.clone(),
            ..Default::default()
        }))
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    /// Times at which to save the field (default: the final time).
    #[arg(long, value_delimiter = ',', conflicts_with = "no_snapshots")]
    snapshots: Option<Vec<f64>>,
    /// Write diagnostics only.
    #[arg(long)]
    no_snapshots: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated scheme list.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    dts: Option<Vec<f64>>,
    /// Step of the reference run on problems without a closed form.
    #[arg(long)]
    reference_dt: Option<f64>,
    /// Also write a matplotlib script next to the CSV files.
    #[arg(long)]
    plot_script: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    /// `+` or `-`.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    branch: String,
    #[arg(long, default_value_t = 0.26, allow_hyphen_values = true)]
    omega_min: f64,
    #[arg(long, default_value_t = 0.30, allow_hyphen_values = true)]
    omega_max: f64,
    #[arg(long, default_value_t = 81)]
    points: usize,
    /// Defaults to `2^-4 / s`.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1e4,1e9")]
    k_tols: Vec<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn flush(mut out: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    out.flush()
        .map_err(|e| io_err(path.unwrap_or(Path::new("<stdout>")), e))
}

fn coeffs(args: CoeffsArgs) -> Result<()> {
    let path = args.output.as_deref();
    let mut out = sink(path)?;
    let wrap = |e| io_err(path.unwrap_or(Path::new("<stdout>")), e);
    match args.family {
        Some(family) => {
            let omegas = linspace(args.omega_min, args.omega_max, args.points);
            write_family_csv(&family_table(family, &omegas), &mut out).map_err(wrap)?;
        }
        None => {
            let ids = args.schemes.unwrap_or_else(SchemeId::standard_set);
            write_named_csv(&ids, &mut out)?;
        }
    }
    flush(out, path)
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = args.common.config()?.merge(ExperimentConfig {
        scheme: args.scheme,
        dt: args.dt,
        snapshots: if args.no_snapshots {
            Some(Vec::new())
        } else {
            args.snapshots
        },
        ..Default::default()
    });
    let (problem, run_cfg) = cfg.run_config()?;
    let traj = run_problem(&problem, &run_cfg)?;
    let dir = cfg.output.unwrap_or_else(|| PathBuf::from("acsplit-run"));
    let outputs = write_run_outputs(&problem, &run_cfg, &traj, &dir)?;
    let last = traj.diagnostics.last();
    println!(
        "{} {} dt={} steps={} t={} status={}",
        problem.name(),
        run_cfg.scheme,
        run_cfg.dt,
        traj.diagnostics.len().saturating_sub(1),
        traj.final_time,
        traj.status.label()
    );
    if let Some(d) = last {
        println!("min={} max={} energy={}", d.min, d.max, d.energy);
    }
    for path in outputs.snapshots.iter().chain([&outputs.diagnostics]) {
        println!("wrote {}", path.display());
    }
    match traj.status {
        RunStatus::Completed => Ok(()),
        RunStatus::Diverged { step, cell, reason } => Err(Error::ConvergenceFailure(format!(
            "run diverged at step {step}, cell {cell}: {reason}"
        ))),
    }
}

fn converge_cmd(args: ConvergeArgs) -> Result<()> {
    let cfg = args.common.config()?.merge(ExperimentConfig {
        schemes: args.schemes,
        dts: args.dts,
        reference_dt: args.reference_dt,
        ..Default::default()
    });
    let (problem, _) = cfg.problem_with_time()?;
    let mut opts = ConvergeOptions::new(cfg.schemes()?, cfg.dts(&problem));
    opts.cutoff = cfg.cutoff()?;
    opts.reference_dt = cfg.reference_dt;
    if let Some(p) = cfg.phi_max {
        opts.phi_max = p;
    }
    let report = converge(&problem, &opts)?;

    println!(
        "{:<12} {:>5} {:>8} {:>9} {:>6}",
        "scheme", "order", "slope", "residual", "points"
    );
    for f in &report.fits {
        match &f.fit {
            Some(s) => println!(
                "{:<12} {:>5} {:>8.3} {:>9.3} {:>6}",
                f.scheme.to_string(),
                f.order,
                s.slope,
                s.residual,
                s.points
            ),
            None => println!(
                "{:<12} {:>5} {:>8} {:>9} {:>6}",
                f.scheme.to_string(),
                f.order,
                "-",
                "-",
                0
            ),
        }
    }

    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let rows = dir.join("errors.csv");
        let file = File::create(&rows).map_err(|e| io_err(&rows, e))?;
        report
            .write_rows_csv(BufWriter::new(file))
            .map_err(|e| io_err(&rows, e))?;
        let slopes = dir.join("slopes.csv");
        let file = File::create(&slopes).map_err(|e| io_err(&slopes, e))?;
        report
            .write_slopes_csv(BufWriter::new(file))
            .map_err(|e| io_err(&slopes, e))?;
        if args.plot_script {
            let script = dir.join("plot_errors.py");
            std::fs::write(&script, report.plot_script(&rows)).map_err(|e| io_err(&script, e))?;
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let branch = match args.branch.as_str() {
        "+" | "positive" => Branch::Positive,
        "-" | "negative" => Branch::Negative,
        other => return Err(Error::Config(format!("unknown branch `{other}`"))),
    };
    let base = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = base.merge(ExperimentConfig {
        epsilon: args.epsilon,
        cells: args.cells,
        ..Default::default()
    });
    let (problem, _) = cfg.problem_with_time()?;
    let dt = match (args.dt, &problem) {
        (Some(dt), _) => dt,
        (None, acsplit::harness::Problem::TravelingWave { spec, .. }) => 0.0625 / spec.speed(),
        (None, _) => return Err(Error::Config("omega sweeps need the traveling-wave problem".into())),
    };
    let omegas = linspace(args.omega_min, args.omega_max, args.points);
    let report = sweep_omega(&problem, branch, &omegas, dt, &args.k_tols)?;
    let path = args.output.as_deref();
    let mut out = sink(path)?;
    report
        .write_csv(&mut out)
        .map_err(|e| io_err(path.unwrap_or(Path::new("<stdout>")), e))?;
    flush(out, path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Coeffs(a) => coeffs(a),
        Command::Run(a) => run(a),
        Command::Converge(a) => converge_cmd(a),
        Command::SweepOmega(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("acsplit: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
