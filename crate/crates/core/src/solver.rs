//! Composition of the sub-flows and time marching.

use crate::coeffs::{named_scheme, SchemeId, SplitCoefficients};
use crate::error::{Error, Result};
use crate::operators::{energy_with, free_energy_in_place, CutoffPolicy, HeatPropagator, ModelParams};
use crate::spectral::Field;

pub const DEFAULT_PHI_MAX: f64 = 10.0;

/// Which sub-flow plays the role of `A` (the operator applied first in every
/// stage). The heat flow is `A` unless explicitly swapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorOrder {
    #[default]
    HeatFirst,
    FreeEnergyFirst,
}

/// Reusable stepping state for one grid, scheme and step size.
///
/// Heat multipliers for every stage are computed once per `dt`.
pub struct Stepper {
    heat: HeatPropagator,
    coeffs: SplitCoefficients,
    model: ModelParams,
    cutoff: CutoffPolicy,
    order: OperatorOrder,
    phi_max: f64,
    dt: f64,
    multipliers: Vec<Option<Vec<f64>>>,
}

impl Stepper {
    pub fn new(heat: HeatPropagator, coeffs: SplitCoefficients, model: ModelParams, cutoff: CutoffPolicy) -> Self {
        Self {
            heat,
            coeffs,
            model,
            cutoff,
            order: OperatorOrder::HeatFirst,
            phi_max: f64::INFINITY,
            dt: f64::NAN,
            multipliers: Vec::new(),
        }
    }

    pub fn with_order(mut self, order: OperatorOrder) -> Self {
        self.order = order;
        self.dt = f64::NAN;
        self
    }

    pub fn with_phi_max(mut self, phi_max: f64) -> Self {
        self.phi_max = phi_max;
        self
    }

    pub fn heat(&self) -> &HeatPropagator {
        &self.heat
    }

    pub fn coefficients(&self) -> &SplitCoefficients {
        &self.coeffs
    }

    fn prepare(&mut self, dt: f64) {
        if self.dt == dt {
            return;
        }
        let heat_fracs = match self.order {
            OperatorOrder::HeatFirst => self.coeffs.a(),
            OperatorOrder::FreeEnergyFirst => self.coeffs.b(),
        };
        self.multipliers = heat_fracs
            .iter()
            .map(|&frac| {
                let tau = frac * dt;
                (tau != 0.0).then(|| self.heat.multipliers(tau, &self.cutoff))
            })
            .collect();
        self.dt = dt;
    }

    /// Advances `values` by one step of size `dt` in place.
    pub fn step_in_place(&mut self, values: &mut [f64], dt: f64) -> Result<()> {
        self.prepare(dt);
        let free_fracs = match self.order {
            OperatorOrder::HeatFirst => self.coeffs.b(),
            OperatorOrder::FreeEnergyFirst => self.coeffs.a(),
        };
        for (mult, &frac) in self.multipliers.iter().zip(free_fracs) {
            let tau = frac * dt;
            match self.order {
                OperatorOrder::HeatFirst => {
                    self.heat_substep(values, mult.as_deref())?;
                    self.free_energy_substep(values, tau)?;
                }
                OperatorOrder::FreeEnergyFirst => {
                    self.free_energy_substep(values, tau)?;
                    self.heat_substep(values, mult.as_deref())?;
                }
            }
        }
        Ok(())
    }

    fn heat_substep(&self, values: &mut [f64], mult: Option<&[f64]>) -> Result<()> {
        match mult {
            Some(m) => {
                self.heat.apply_in_place(values, m);
                self.guard(values)
            }
            None => Ok(()),
        }
    }

    fn free_energy_substep(&self, values: &mut [f64], tau: f64) -> Result<()> {
        if tau == 0.0 {
            return Ok(());
        }
        free_energy_in_place(values, tau, &self.model)?;
        self.guard(values)
    }

    fn guard(&self, values: &[f64]) -> Result<()> {
        match values
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_nan() || v.abs() > self.phi_max)
        {
            Some((cell, &value)) => Err(Error::Blowup {
                cell,
                value,
                limit: self.phi_max,
            }),
            None => Ok(()),
        }
    }

    pub fn energy(&self, values: &[f64]) -> f64 {
        energy_with(&self.heat, values, &self.model)
    }
}

/// One splitting step: for `j = 1..p`, heat flow over `a_j dt` then
/// free-energy flow over `b_j dt`. Zero-length substeps are skipped.
pub fn step(
    f: &Field,
    coeffs: &SplitCoefficients,
    dt: f64,
    model: &ModelParams,
    cutoff: &CutoffPolicy,
) -> Result<Field> {
    let mut stepper = Stepper::new(HeatPropagator::new(f.grid()), coeffs.clone(), *model, *cutoff);
    let mut values = f.values().to_vec();
    stepper.step_in_place(&mut values, dt)?;
    Ok(Field::from_parts(f.grid().clone(), values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeId,
    pub dt: f64,
    pub t_final: f64,
    pub model: ModelParams,
    pub cutoff: CutoffPolicy,
    pub snapshot_times: Vec<f64>,
    pub phi_max: f64,
    pub order: OperatorOrder,
}

impl RunConfig {
    pub fn new(scheme: SchemeId, dt: f64, t_final: f64, model: ModelParams) -> Self {
        Self {
            scheme,
            dt,
            t_final,
            model,
            cutoff: CutoffPolicy::default(),
            snapshot_times: Vec::new(),
            phi_max: DEFAULT_PHI_MAX,
            order: OperatorOrder::HeatFirst,
        }
    }

    pub fn with_cutoff(mut self, cutoff: CutoffPolicy) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final = {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.phi_max.is_nan() || self.phi_max <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "phi_max must exceed 1, got {}",
                self.phi_max
            )));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| t.is_nan() || **t < 0.0) {
            return Err(Error::InvalidParameter(format!("snapshot time {t} is negative")));
        }
        Ok(())
    }

    /// `(full steps, length of a trailing shortened step)`.
    pub fn schedule(&self) -> (usize, Option<f64>) {
        let ratio = self.t_final / self.dt;
        let n = ratio.round();
        if (n * self.dt - self.t_final).abs() <= 1e-12 * self.t_final {
            (n as usize, None)
        } else {
            let full = ratio.floor();
            (full as usize, Some(self.t_final - full * self.dt))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub min: f64,
    pub max: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Diverged {
        /// 1-based index of the step that failed.
        step: usize,
        cell: usize,
        reason: String,
    },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Diverged { .. } => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested: f64,
    pub time: f64,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Last successfully computed state (the state before the failing step
    /// when the run diverged).
    pub final_field: Field,
    /// Time of `final_field`.
    pub final_time: f64,
    pub diagnostics: Vec<StepDiagnostics>,
    pub snapshots: Vec<Snapshot>,
    pub status: RunStatus,
    /// Length of the trailing shortened step, when `dt` does not divide
    /// `t_final`.
    pub shortened_step: Option<f64>,
}

pub fn run(f0: &Field, cfg: &RunConfig) -> Result<Trajectory> {
    let coeffs = named_scheme(cfg.scheme)?;
    run_with(f0, &coeffs, cfg)
}

/// Marches `f0` to `cfg.t_final` with explicit coefficients; `cfg.scheme` is
/// ignored. Divergence ends the run early and is reported in the status.
pub fn run_with(f0: &Field, coeffs: &SplitCoefficients, cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = f0.grid().clone();
    let mut stepper = Stepper::new(HeatPropagator::new(&grid), coeffs.clone(), cfg.model, cfg.cutoff)
        .with_order(cfg.order)
        .with_phi_max(cfg.phi_max);

    let (full, short) = cfg.schedule();
    let total = full + usize::from(short.is_some());
    let time_of = |step: usize| {
        if step > full {
            cfg.t_final
        } else {
            step as f64 * cfg.dt
        }
    };
    let snapshot_step = |t: f64| ((t / cfg.dt).round() as usize).min(total);

    let mut values = f0.values().to_vec();
    let mut last_good = values.clone();
    let mut snapshots = Vec::new();
    let take_snapshots = |step: usize, values: &[f64], snapshots: &mut Vec<Snapshot>| {
        for &t in &cfg.snapshot_times {
            if snapshot_step(t) == step {
                snapshots.push(Snapshot {
                    requested: t,
                    time: time_of(step),
                    field: Field::from_parts(grid.clone(), values.to_vec()),
                });
            }
        }
    };
    let diag = |step: usize, values: &[f64], stepper: &Stepper| StepDiagnostics {
        step,
        time: time_of(step),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        energy: stepper.energy(values),
    };

    let mut diagnostics = vec![diag(0, &values, &stepper)];
    take_snapshots(0, &values, &mut snapshots);
    let mut status = RunStatus::Completed;
    let mut final_step = 0;

    for step in 1..=total {
        let h = if step > full { short.unwrap_or(cfg.dt) } else { cfg.dt };
        if let Err(err) = stepper.step_in_place(&mut values, h) {
            let cell = match &err {
                Error::Divergence { cell, .. } | Error::Blowup { cell, .. } => *cell,
                _ => return Err(err),
            };
            status = RunStatus::Diverged {
                step,
                cell,
                reason: err.to_string(),
            };
            break;
        }
        last_good.copy_from_slice(&values);
        final_step = step;
        diagnostics.push(diag(step, &values, &stepper));
        take_snapshots(step, &values, &mut snapshots);
    }

    Ok(Trajectory {
        final_field: Field::from_parts(grid, last_good),
        final_time: time_of(final_step),
        diagnostics,
        snapshots,
        status,
        shortened_step: short,
    })
}

/// `||f - g|| / ||g||` in the discrete l2 norm; `g` is the reference.
pub fn relative_l2_error(f: &Field, g: &Field) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let den = g.l2_norm();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}
