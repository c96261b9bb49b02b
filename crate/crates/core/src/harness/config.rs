//! JSON experiment configuration.
//!
//! Every field is optional; command-line flags override file values and
//! missing values fall back to the problem defaults. Example:
//!
//! ```json
//! {
//!   "problem": "spinodal",
//!   "schemes": ["S2", "S3X", "S4V"],
//!   "dts": [5e-4, 2.5e-4, 1.25e-4],
//!   "cells": 32,
//!   "seed": 7,
//!   "k_tol": "inf"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coeffs::SchemeId;
use crate::error::{Error, Result};
use crate::harness::experiments::Problem;
use crate::operators::{CutoffPolicy, ModelParams};
use crate::problems::{SpinodalSpec, TravelingWaveSpec};
use crate::solver::{OperatorOrder, RunConfig, DEFAULT_PHI_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    #[default]
    TravelingWave,
    Spinodal,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "traveling-wave" | "tw" => Ok(Self::TravelingWave),
            "spinodal" => Ok(Self::Spinodal),
            _ => Err(Error::Config(format!(
                "unknown problem `{s}` (expected traveling-wave or spinodal)"
            ))),
        }
    }
}

/// `K_tol` as written in a config: a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KTol {
    Value(f64),
    Text(KTolText),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KTolText {
    Inf,
}

impl KTol {
    pub fn cutoff(self) -> Result<CutoffPolicy> {
        match self {
            KTol::Value(k) => CutoffPolicy::new(k),
            KTol::Text(KTolText::Inf) => Ok(CutoffPolicy::unbounded()),
        }
    }
}

impl std::str::FromStr for KTol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "none" => Ok(KTol::Text(KTolText::Inf)),
            other => other
                .parse::<f64>()
                .map(KTol::Value)
                .map_err(|_| Error::Config(format!("K_tol `{s}` is neither a number nor `inf`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: Option<ProblemKind>,
    /// Scheme for single runs.
    pub scheme: Option<String>,
    /// Schemes compared in a convergence study.
    pub schemes: Option<Vec<String>>,
    pub dt: Option<f64>,
    pub dts: Option<Vec<f64>>,
    pub t_final: Option<f64>,
    pub epsilon: Option<f64>,
    pub k_tol: Option<KTol>,
    pub seed: Option<u64>,
    /// Cells per axis.
    pub cells: Option<usize>,
    pub length: Option<f64>,
    pub amplitude: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub reference_dt: Option<f64>,
    pub phi_max: Option<f64>,
    pub order: Option<OperatorOrder>,
    /// Output directory.
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            problem,
            scheme,
            schemes,
            dt,
            dts,
            t_final,
            epsilon,
            k_tol,
            seed,
            cells,
            length,
            amplitude,
            snapshots,
            reference_dt,
            phi_max,
            order,
            output
        );
        self
    }

    pub fn problem(&self) -> Result<Problem> {
        match self.problem.unwrap_or_default() {
            ProblemKind::TravelingWave => {
                if self.seed.is_some() || self.amplitude.is_some() {
                    return Err(Error::Config(
                        "seed and amplitude only apply to the spinodal problem".into(),
                    ));
                }
                let mut spec = TravelingWaveSpec::default();
                if let Some(e) = self.epsilon {
                    spec.epsilon = e;
                }
                if let Some(l) = self.length {
                    spec.length = l;
                }
                ModelParams::new(spec.epsilon)?;
                Ok(Problem::TravelingWave {
                    spec,
                    cells: self.cells.unwrap_or(128),
                })
            }
            ProblemKind::Spinodal => {
                let d = SpinodalSpec::default();
                let spec = SpinodalSpec {
                    epsilon: self.epsilon.unwrap_or(d.epsilon),
                    amplitude: self.amplitude.unwrap_or(d.amplitude),
                    seed: self.seed.unwrap_or(d.seed),
                    cells: self.cells.unwrap_or(d.cells),
                    length: self.length.unwrap_or(d.length),
                };
                spec.validate()?;
                Ok(Problem::Spinodal { spec, t_final: 0.01 })
            }
        }
    }

    /// The problem with `t_final` applied.
    pub fn problem_with_time(&self) -> Result<(Problem, f64)> {
        let problem = self.problem()?;
        let t_final = self.t_final.unwrap_or_else(|| problem.t_final());
        let problem = match problem {
            Problem::Spinodal { spec, .. } => Problem::Spinodal { spec, t_final },
            p => p,
        };
        Ok((problem, t_final))
    }

    pub fn cutoff(&self) -> Result<CutoffPolicy> {
        self.k_tol.map_or(Ok(CutoffPolicy::default()), KTol::cutoff)
    }

    pub fn scheme(&self) -> Result<SchemeId> {
        self.scheme.as_deref().unwrap_or("S4V").parse()
    }

    pub fn schemes(&self) -> Result<Vec<SchemeId>> {
        match &self.schemes {
            Some(list) => list.iter().map(|s| s.parse()).collect(),
            None => Ok(SchemeId::standard_set()),
        }
    }

    pub fn dts(&self, problem: &Problem) -> Vec<f64> {
        self.dts.clone().unwrap_or_else(|| problem.default_dts())
    }

    /// Configuration of a single run. The traveling wave defaults to
    /// `dt = 2^-6 / s`, the spinodal problem to `10^-4`. Without a snapshot
    /// list the field is saved once, at `t_final`; an empty list saves none.
    pub fn run_config(&self) -> Result<(Problem, RunConfig)> {
        let (problem, t_final) = self.problem_with_time()?;
        let dt = match (self.dt, &problem) {
            (Some(dt), _) => dt,
            (None, Problem::TravelingWave { spec, .. }) => 0.5f64.powi(6) / spec.speed(),
            (None, Problem::Spinodal { .. }) => 1e-4,
        };
        let mut cfg = RunConfig::new(self.scheme()?, dt, t_final, problem.model()?)
            .with_cutoff(self.cutoff()?)
            .with_snapshots(self.snapshots.clone().unwrap_or_else(|| vec![t_final]));
        cfg.phi_max = self.phi_max.unwrap_or(DEFAULT_PHI_MAX);
        cfg.order = self.order.unwrap_or_default();
        cfg.validate()?;
        Ok((problem, cfg))
    }
}
