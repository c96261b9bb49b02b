//! Experiment drivers: coefficient tables, convergence studies, omega sweeps
//! and single runs. Every driver returns plain data; CSV rendering lives next
//! to each report type.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::coeffs::{
    discriminant, named_scheme, omega_u, omega_v, order_residuals, second_order_family, third_order_family, Branch,
    SchemeId, SpecialPoint, SplitCoefficients,
};
use crate::error::{Error, Result};
use crate::harness::fit::{fit_slope, FitWindow, SlopeFit};
use crate::harness::io::save_field;
use crate::operators::{CutoffPolicy, ModelParams};
use crate::problems::{spinodal_initial, traveling_wave_field, SpinodalSpec, TravelingWaveSpec};
use crate::solver::{relative_l2_error, run_with, RunConfig, RunStatus, Trajectory, DEFAULT_PHI_MAX};
use crate::spectral::Field;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    TravelingWave { spec: TravelingWaveSpec, cells: usize },
    Spinodal { spec: SpinodalSpec, t_final: f64 },
}

impl Problem {
    /// The 1D front on `[0, 4]` with `h = 2^-5`.
    pub fn traveling_wave_default() -> Self {
        Problem::TravelingWave {
            spec: TravelingWaveSpec::default(),
            cells: 128,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::TravelingWave { .. } => "traveling-wave",
            Problem::Spinodal { .. } => "spinodal",
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Problem::TravelingWave { spec, .. } => spec.epsilon,
            Problem::Spinodal { spec, .. } => spec.epsilon,
        }
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::new(self.epsilon())
    }

    pub fn t_final(&self) -> f64 {
        match self {
            Problem::TravelingWave { spec, .. } => spec.final_time(),
            Problem::Spinodal { t_final, .. } => *t_final,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Problem::TravelingWave { .. } => None,
            Problem::Spinodal { spec, .. } => Some(spec.seed),
        }
    }

    pub fn initial(&self) -> Result<Field> {
        match self {
            Problem::TravelingWave { spec, cells } => traveling_wave_field(&spec.grid(*cells)?, 0.0, spec),
            Problem::Spinodal { spec, .. } => spinodal_initial(spec),
        }
    }

    /// Closed-form solution at `t`, when one exists.
    pub fn analytic(&self, t: f64) -> Result<Option<Field>> {
        match self {
            Problem::TravelingWave { spec, cells } => Ok(Some(traveling_wave_field(&spec.grid(*cells)?, t, spec)?)),
            Problem::Spinodal { .. } => Ok(None),
        }
    }

    /// Default step sizes: `2^-k / s` for `k = 2..=10` on the traveling
    /// wave, `10^-3 / 2^k` for `k = 1..=5` on the spinodal problem.
    pub fn default_dts(&self) -> Vec<f64> {
        match self {
            Problem::TravelingWave { spec, .. } => {
                let s = spec.speed();
                (2..=10).map(|k| 0.5f64.powi(k) / s).collect()
            }
            Problem::Spinodal { .. } => (1..=5).map(|k| 1e-3 * 0.5f64.powi(k)).collect(),
        }
    }

    fn grid_label(&self) -> String {
        let grid = match self {
            Problem::TravelingWave { spec, cells } => spec.grid(*cells),
            Problem::Spinodal { spec, .. } => spec.grid(),
        };
        match grid {
            Ok(g) => {
                let cells: Vec<String> = g.cells().iter().map(|m| m.to_string()).collect();
                let lengths: Vec<String> = g.lengths().iter().map(|l| l.to_string()).collect();
                format!("{}@{}", cells.join("x"), lengths.join("x"))
            }
            Err(_) => "invalid".into(),
        }
    }
}

/// Provenance attached to every output row.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub problem: String,
    pub epsilon: f64,
    pub grid: String,
    pub k_tol: f64,
    pub seed: Option<u64>,
    pub t_final: f64,
    pub version: &'static str,
}

impl Metadata {
    fn new(problem: &Problem, cutoff: &CutoffPolicy, t_final: f64) -> Self {
        Self {
            problem: problem.name().into(),
            epsilon: problem.epsilon(),
            grid: problem.grid_label(),
            k_tol: cutoff.k_tol(),
            seed: problem.seed(),
            t_final,
            version: VERSION,
        }
    }

    const HEADER: &'static str = "problem,epsilon,grid,k_tol,seed,t_final,version";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.problem,
            self.epsilon,
            self.grid,
            fmt_k_tol(self.k_tol),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.t_final,
            self.version
        )
    }
}

fn fmt_k_tol(k: f64) -> String {
    if k.is_infinite() {
        "inf".into()
    } else {
        k.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// coefficient tables

/// One row of a family sweep; `result` carries the error for rejected omegas.
#[derive(Debug)]
pub struct FamilyRow {
    pub omega: f64,
    pub result: Result<SplitCoefficients>,
    pub discriminant: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Second,
    Third(Branch),
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s2" => Ok(Family::Second),
            "s3+" | "s3p" => Ok(Family::Third(Branch::Positive)),
            "s3-" | "s3m" => Ok(Family::Third(Branch::Negative)),
            _ => Err(Error::Config(format!("unknown family `{s}` (expected s2, s3+ or s3-)"))),
        }
    }
}

pub fn family_table(family: Family, omegas: &[f64]) -> Vec<FamilyRow> {
    omegas
        .iter()
        .map(|&omega| match family {
            Family::Second => FamilyRow {
                omega,
                result: second_order_family(omega),
                discriminant: None,
            },
            Family::Third(branch) => FamilyRow {
                omega,
                discriminant: Some(discriminant(omega)),
                result: third_order_family(omega, branch).map(|s| s.coefficients),
            },
        })
        .collect()
}

pub fn write_family_csv(rows: &[FamilyRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "omega,a1,b1,a2,b2,a3,b3,D,min,max,bounded,status")?;
    for row in rows {
        let d = fmt_opt(row.discriminant);
        match &row.result {
            Ok(c) => {
                let mut cells: Vec<String> = c.interleaved().iter().map(|v| v.to_string()).collect();
                cells.resize(6, String::new());
                writeln!(
                    out,
                    "{},{},{d},{},{},{},ok",
                    row.omega,
                    cells.join(","),
                    c.min(),
                    c.max(),
                    c.max_abs() <= 1.0
                )?;
            }
            Err(e) => {
                let reason = e.to_string().replace(',', ";");
                writeln!(out, "{},,,,,,,{d},,,,error: {reason}", row.omega)?;
            }
        }
    }
    Ok(())
}

/// Parameter reported next to a named scheme: the located special omega,
/// `omega_U`, `omega_V` or the family parameter.
fn scheme_omega(id: SchemeId) -> Result<Option<f64>> {
    Ok(match id {
        SchemeId::S1 => None,
        SchemeId::S2(w) | SchemeId::S3(w, _) => Some(w),
        SchemeId::S3X => Some(crate::coeffs::locate_special(SpecialPoint::X)?.omega),
        SchemeId::S3Y => Some(crate::coeffs::locate_special(SpecialPoint::Y)?.omega),
        SchemeId::S3Z => Some(crate::coeffs::locate_special(SpecialPoint::Z)?.omega),
        SchemeId::S4U => Some(omega_u()),
        SchemeId::S4V => Some(omega_v()),
    })
}

pub fn write_named_csv(ids: &[SchemeId], mut out: impl Write) -> Result<()> {
    let schemes = ids
        .iter()
        .map(|&id| Ok((id, scheme_omega(id)?, named_scheme(id)?)))
        .collect::<Result<Vec<_>>>()?;
    let p_max = schemes.iter().map(|s| s.2.stages()).max().unwrap_or(0);
    let io = |e| Error::io("<output>", e);
    let mut header = String::from("label,order,stages,omega,min,max,max_residual");
    for j in 1..=p_max {
        header.push_str(&format!(",a{j},b{j}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    for (id, omega, c) in schemes {
        let res = order_residuals(&c).max_through(c.claimed_order().min(3));
        let mut cells: Vec<String> = c.interleaved().iter().map(|v| v.to_string()).collect();
        cells.resize(2 * p_max, String::new());
        writeln!(
            out,
            "{id},{},{},{},{},{},{res:e},{}",
            c.claimed_order(),
            c.stages(),
            fmt_opt(omega),
            c.min(),
            c.max(),
            cells.join(",")
        )
        .map_err(io)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// convergence studies

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeOptions {
    pub schemes: Vec<SchemeId>,
    pub dts: Vec<f64>,
    pub cutoff: CutoffPolicy,
    pub window: FitWindow,
    /// Step of the S4V reference run for problems without a closed form;
    /// defaults to a quarter of the smallest compared step.
    pub reference_dt: Option<f64>,
    pub phi_max: f64,
}

impl ConvergeOptions {
    pub fn new(schemes: Vec<SchemeId>, dts: Vec<f64>) -> Self {
        Self {
            schemes,
            dts,
            cutoff: CutoffPolicy::default(),
            window: FitWindow::default(),
            reference_dt: None,
            phi_max: DEFAULT_PHI_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub scheme: SchemeId,
    pub dt: f64,
    pub error: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeFit {
    pub scheme: SchemeId,
    pub order: u8,
    pub fit: Option<SlopeFit>,
    /// Errors along the fit window, ordered by decreasing `dt`.
    pub window: Vec<(f64, f64)>,
}

impl SchemeFit {
    /// Errors decrease strictly along the fit window.
    pub fn monotone(&self) -> bool {
        self.window.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub metadata: Metadata,
    pub rows: Vec<ErrorRow>,
    pub fits: Vec<SchemeFit>,
    /// Error level below which the time-step error is no longer visible.
    pub floor: Option<f64>,
    pub reference: String,
}

impl ErrorReport {
    pub fn fit(&self, scheme: SchemeId) -> Option<&SchemeFit> {
        self.fits.iter().find(|f| f.scheme == scheme)
    }

    pub fn errors(&self, scheme: SchemeId) -> Vec<(f64, Option<f64>)> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| (r.dt, r.error))
            .collect()
    }

    pub fn write_rows_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "scheme,dt,rel_l2_error,status,reference,{}", Metadata::HEADER)?;
        let meta = self.metadata.csv();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{meta}",
                r.scheme,
                r.dt,
                fmt_opt(r.error),
                r.status,
                self.reference
            )?;
        }
        Ok(())
    }

    pub fn write_slopes_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "scheme,order,slope,intercept,residual,points,dt_min,dt_max,monotone,floor,{}",
            Metadata::HEADER
        )?;
        let meta = self.metadata.csv();
        for f in &self.fits {
            let (slope, intercept, residual, points, dt_min, dt_max) = match &f.fit {
                Some(s) => (
                    s.slope.to_string(),
                    s.intercept.to_string(),
                    s.residual.to_string(),
                    s.points.to_string(),
                    s.dt_min.to_string(),
                    s.dt_max.to_string(),
                ),
                None => Default::default(),
            };
            writeln!(
                out,
                "{},{},{slope},{intercept},{residual},{points},{dt_min},{dt_max},{},{},{meta}",
                f.scheme,
                f.order,
                f.monotone(),
                fmt_opt(self.floor)
            )?;
        }
        Ok(())
    }

    /// Matplotlib script that plots the rows CSV; a convenience only.
    pub fn plot_script(&self, rows_csv: &Path) -> String {
        format!(
            r#"# error vs dt, generated by acsplit {version}
import csv
import collections
import matplotlib.pyplot as plt

curves = collections.defaultdict(list)
with open({path:?}) as fh:
    for row in csv.DictReader(fh):
        if row["status"] == "completed" and row["rel_l2_error"]:
            curves[row["scheme"]].append((float(row["dt"]), float(row["rel_l2_error"])))

for scheme, pts in sorted(curves.items()):
    pts.sort()
    plt.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=scheme)
plt.xlabel("dt")
plt.ylabel("relative l2 error")
plt.title("{problem}")
plt.legend()
plt.grid(True, which="both", alpha=0.3)
plt.savefig({png:?}, dpi=150)
"#,
            version = VERSION,
            path = rows_csv.display().to_string(),
            problem = self.metadata.problem,
            png = rows_csv.with_extension("png").display().to_string(),
        )
    }
}

fn run_status(t: &Trajectory) -> String {
    match &t.status {
        RunStatus::Completed if t.shortened_step.is_some() => "completed-shortened".into(),
        s => s.label().into(),
    }
}

/// Runs every `(scheme, dt)` pair and compares at `T_f` against the closed
/// form (traveling wave) or an S4V reference run (spinodal).
pub fn converge(problem: &Problem, opts: &ConvergeOptions) -> Result<ErrorReport> {
    if opts.schemes.is_empty() || opts.dts.is_empty() {
        return Err(Error::Config("need at least one scheme and one dt".into()));
    }
    let model = problem.model()?;
    let t_final = problem.t_final();
    let f0 = problem.initial()?;
    let dt_min = opts.dts.iter().copied().fold(f64::INFINITY, f64::min);

    let base = |scheme: SchemeId, dt: f64| {
        let mut cfg = RunConfig::new(scheme, dt, t_final, model).with_cutoff(opts.cutoff);
        cfg.phi_max = opts.phi_max;
        cfg
    };
    let final_field = |coeffs: &SplitCoefficients, dt: f64| -> Result<Field> {
        let t = run_with(&f0, coeffs, &base(SchemeId::S4V, dt))?;
        match t.status {
            RunStatus::Completed => Ok(t.final_field),
            RunStatus::Diverged { reason, .. } => Err(Error::ConvergenceFailure(format!(
                "reference run with dt = {dt} diverged: {reason}"
            ))),
        }
    };
    let s4v = named_scheme(SchemeId::S4V)?;

    let exact = problem.analytic(t_final)?;
    let analytic = exact.is_some();
    let (reference, floor, reference_label) = match exact {
        Some(exact) => {
            // near time-exact run: what remains is the spatial error
            let fine = final_field(&s4v, dt_min / 4.0)?;
            let floor = relative_l2_error(&fine, &exact)?;
            (exact, floor, "analytic".to_string())
        }
        None => {
            let dt_ref = opts.reference_dt.unwrap_or(dt_min / 4.0);
            if dt_ref > dt_min / 2.0 {
                return Err(Error::Config(format!(
                    "reference dt {dt_ref} must be at least 2x finer than {dt_min}"
                )));
            }
            let (reference, coarse) = rayon::join(|| final_field(&s4v, dt_ref), || final_field(&s4v, 2.0 * dt_ref));
            let reference = reference?;
            // Richardson estimate of the reference's own error
            let floor = relative_l2_error(&coarse?, &reference)? / 15.0;
            (reference, floor, format!("S4V@{dt_ref}"))
        }
    };

    let coeffs = opts
        .schemes
        .iter()
        .map(|&id| Ok((id, named_scheme(id)?)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = (0..coeffs.len())
        .flat_map(|i| opts.dts.iter().map(move |&dt| (i, dt)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(i, dt)| {
            let (id, c) = &coeffs[i];
            let t = run_with(&f0, c, &base(*id, dt))?;
            let error = if t.status.is_completed() {
                Some(relative_l2_error(&t.final_field, &reference)?)
            } else {
                None
            };
            Ok((
                i,
                ErrorRow {
                    scheme: *id,
                    dt,
                    error,
                    status: run_status(&t),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.dt.total_cmp(&a.1.dt)));
    let rows: Vec<ErrorRow> = rows.into_iter().map(|(_, r)| r).collect();
    let floor = if analytic {
        // Round-off grows with the step count, so the finest run is not
        // necessarily the most accurate one; take the best error seen.
        rows.iter()
            .filter_map(|r| r.error)
            .filter(|e| *e > 0.0)
            .fold(floor, f64::min)
    } else {
        floor
    };

    let fits = coeffs
        .iter()
        .map(|(id, c)| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.scheme == *id)
                .map(|r| (r.dt, r.error.unwrap_or(f64::NAN)))
                .collect();
            let mut window = opts.window.select(&pts, Some(floor));
            let fit = fit_slope(&window);
            window.reverse();
            SchemeFit {
                scheme: *id,
                order: c.claimed_order(),
                fit,
                window,
            }
        })
        .collect();

    Ok(ErrorReport {
        metadata: Metadata::new(problem, &opts.cutoff, t_final),
        rows,
        fits,
        floor: Some(floor),
        reference: reference_label,
    })
}

// ---------------------------------------------------------------------------
// omega sweeps

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub k_tol: f64,
    pub error: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub metadata: Metadata,
    pub branch: Branch,
    pub dt: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn curve(&self, k_tol: f64) -> Vec<(f64, Option<f64>)> {
        self.rows
            .iter()
            .filter(|r| r.k_tol == k_tol)
            .map(|r| (r.omega, r.error))
            .collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "branch,omega,dt,rel_l2_error,status,{}", Metadata::HEADER)?;
        for r in &self.rows {
            let mut meta = self.metadata.clone();
            meta.k_tol = r.k_tol;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.branch.sign(),
                r.omega,
                self.dt,
                fmt_opt(r.error),
                r.status,
                meta.csv()
            )?;
        }
        Ok(())
    }
}

/// Error of the third-order family at `T_f` as a function of `omega`, for
/// each cut-off in `k_tols`. Omegas without a real solution appear with
/// status `invalid-omega`.
pub fn sweep_omega(problem: &Problem, branch: Branch, omegas: &[f64], dt: f64, k_tols: &[f64]) -> Result<SweepReport> {
    let model = problem.model()?;
    let t_final = problem.t_final();
    let f0 = problem.initial()?;
    let reference = problem
        .analytic(t_final)?
        .ok_or_else(|| Error::Config("omega sweeps need a problem with a closed-form solution".into()))?;
    let cutoffs = k_tols
        .iter()
        .map(|&k| CutoffPolicy::new(k))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(f64, CutoffPolicy)> = omegas
        .iter()
        .flat_map(|&w| cutoffs.iter().map(move |&c| (w, c)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(omega, cutoff)| {
            let coeffs = match third_order_family(omega, branch) {
                Ok(s) => s.coefficients,
                Err(_) => {
                    return Ok(SweepRow {
                        omega,
                        k_tol: cutoff.k_tol(),
                        error: None,
                        status: "invalid-omega".into(),
                    })
                }
            };
            let cfg = RunConfig::new(SchemeId::S3(omega, branch), dt, t_final, model).with_cutoff(cutoff);
            let t = run_with(&f0, &coeffs, &cfg)?;
            let error = if t.status.is_completed() {
                Some(relative_l2_error(&t.final_field, &reference)?)
            } else {
                None
            };
            Ok(SweepRow {
                omega,
                k_tol: cutoff.k_tol(),
                error,
                status: run_status(&t),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.k_tol.total_cmp(&b.k_tol).then(a.omega.total_cmp(&b.omega)));

    let mut metadata = Metadata::new(problem, &CutoffPolicy::default(), t_final);
    metadata.k_tol = f64::NAN;
    Ok(SweepReport {
        metadata,
        branch,
        dt,
        rows,
    })
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

// ---------------------------------------------------------------------------
// single runs

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub snapshots: Vec<PathBuf>,
    pub diagnostics: PathBuf,
}

pub fn run_problem(problem: &Problem, cfg: &RunConfig) -> Result<Trajectory> {
    let coeffs = named_scheme(cfg.scheme)?;
    run_with(&problem.initial()?, &coeffs, cfg)
}

pub fn write_diagnostics_csv(t: &Trajectory, meta: &Metadata, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "step,t,min,max,energy,status,{}", Metadata::HEADER)?;
    let status = run_status(t);
    let meta = meta.csv();
    for d in &t.diagnostics {
        writeln!(
            out,
            "{},{},{},{},{},{status},{meta}",
            d.step, d.time, d.min, d.max, d.energy
        )?;
    }
    Ok(())
}

/// Writes `snapshot_<k>_t<time>.acf` per snapshot and `diagnostics.csv`
/// into `dir`.
pub fn write_run_outputs(problem: &Problem, cfg: &RunConfig, t: &Trajectory, dir: &Path) -> Result<RunOutputs> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut snapshots = Vec::new();
    for (k, s) in t.snapshots.iter().enumerate() {
        let path = dir.join(format!("snapshot_{k}_t{}.acf", s.time));
        save_field(&s.field, &path)?;
        snapshots.push(path);
    }
    let diagnostics = dir.join("diagnostics.csv");
    let file = std::fs::File::create(&diagnostics).map_err(|e| Error::io(&diagnostics, e))?;
    let meta = Metadata::new(problem, &cfg.cutoff, cfg.t_final);
    write_diagnostics_csv(t, &meta, std::io::BufWriter::new(file)).map_err(|e| Error::io(&diagnostics, e))?;
    Ok(RunOutputs { snapshots, diagnostics })
}
