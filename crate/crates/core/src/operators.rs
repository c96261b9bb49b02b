//! Exact sub-flows of the Allen-Cahn splitting.
//!
//! * free-energy flow `dphi/dt = (phi - phi^3) / eps^2`, solved pointwise in
//!   closed form;
//! * heat flow `dphi/dt = lap(phi)` with zero-Neumann boundaries, solved by
//!   scaling cosine coefficients with `min(exp(A_k tau), K_tol)`.
//!
//! Both accept negative times. Backward heat steps amplify high modes
//! exponentially; the cut-off `K_tol` bounds that amplification. Values from
//! `1e4` to `1e9` are typical.

use crate::error::{Error, Result};
use crate::spectral::{laplacian_eigenvalues, CosineTransform, Field, GridSpec};

/// Radicands at or below this value are reported as divergence.
pub const RADICAND_GUARD: f64 = 1e-14;

/// Default cut-off, the strongest value used in the reference experiments.
pub const DEFAULT_K_TOL: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    epsilon: f64,
    epsilon_sq: f64,
}

impl ModelParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            epsilon_sq: epsilon * epsilon,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon_sq(&self) -> f64 {
        self.epsilon_sq
    }
}

/// Double-well potential `F(phi) = (phi^2 - 1)^2 / 4`.
pub fn double_well(phi: f64) -> f64 {
    let q = phi * phi - 1.0;
    0.25 * q * q
}

/// `F'(phi) = phi^3 - phi`.
pub fn double_well_derivative(phi: f64) -> f64 {
    phi * phi * phi - phi
}

/// Clamp on the spectral heat multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    k_tol: f64,
}

impl CutoffPolicy {
    /// `k_tol` must be at least 1 so forward steps are never clamped;
    /// `f64::INFINITY` disables the cut-off.
    pub fn new(k_tol: f64) -> Result<Self> {
        if k_tol.is_nan() || k_tol < 1.0 {
            return Err(Error::InvalidParameter(format!("K_tol must be >= 1, got {k_tol}")));
        }
        Ok(Self { k_tol })
    }

    pub fn unbounded() -> Self {
        Self { k_tol: f64::INFINITY }
    }

    pub fn k_tol(&self) -> f64 {
        self.k_tol
    }

    pub fn is_unbounded(&self) -> bool {
        self.k_tol.is_infinite()
    }
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self { k_tol: DEFAULT_K_TOL }
    }
}

/// Applies the closed-form free-energy flow to every value.
///
/// Backward steps (`tau < 0`) whose radicand falls to [`RADICAND_GUARD`] or
/// below are reported as divergence. Values are left partially updated when
/// an error is returned.
pub fn free_energy_in_place(values: &mut [f64], tau: f64, model: &ModelParams) -> Result<()> {
    let decay = (-2.0 * tau / model.epsilon_sq()).exp();
    let backward = tau < 0.0;
    for (cell, v) in values.iter_mut().enumerate() {
        let phi = *v;
        if phi == 0.0 {
            continue;
        }
        let phi_sq = phi * phi;
        let radicand = phi_sq + (1.0 - phi_sq) * decay;
        if backward && (radicand <= RADICAND_GUARD || !radicand.is_finite()) {
            return Err(Error::Divergence {
                cell,
                value: phi,
                radicand,
            });
        }
        // forward: radicand >= min(1, phi^2) > 0 unless phi^2 underflows
        *v = if radicand > 0.0 {
            phi / radicand.sqrt()
        } else {
            phi.signum()
        };
    }
    Ok(())
}

/// `F^tau(phi) = phi / sqrt(phi^2 + (1 - phi^2) exp(-2 tau / eps^2))`.
pub fn free_energy_evolve(f: &Field, tau: f64, model: &ModelParams) -> Result<Field> {
    let mut out = f.clone();
    free_energy_in_place(out.values_mut(), tau, model)?;
    Ok(out)
}

/// Planned heat flow on one grid: a cosine transform plus the eigenvalue
/// table of the Neumann Laplacian.
#[derive(Debug, Clone)]
pub struct HeatPropagator {
    transform: CosineTransform,
    eigenvalues: Vec<f64>,
}

impl HeatPropagator {
    pub fn new(grid: &GridSpec) -> Self {
        Self {
            transform: CosineTransform::new(grid),
            eigenvalues: laplacian_eigenvalues(grid).into_coefficients(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.transform.grid()
    }

    pub fn transform(&self) -> &CosineTransform {
        &self.transform
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Per-mode factors `min(exp(A_k tau), K_tol)`.
    pub fn multipliers(&self, tau: f64, cutoff: &CutoffPolicy) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|&a| (a * tau).exp().min(cutoff.k_tol()))
            .collect()
    }

    /// Transforms, scales by `multipliers` and transforms back.
    ///
    /// With an unbounded cut-off the factors can overflow and the result
    /// may be non-finite; callers check.
    pub fn apply_in_place(&self, values: &mut [f64], multipliers: &[f64]) {
        self.transform.forward_in_place(values);
        for (c, m) in values.iter_mut().zip(multipliers) {
            *c *= m;
        }
        self.transform.inverse_in_place(values);
    }

    pub fn evolve(&self, f: &Field, tau: f64, cutoff: &CutoffPolicy) -> Field {
        let mut values = f.values().to_vec();
        self.apply_in_place(&mut values, &self.multipliers(tau, cutoff));
        Field::from_parts(f.grid().clone(), values)
    }
}

/// `C^-1[ min(exp(A_k tau), K_tol) C[f] ]`.
///
/// Output is finite for finite input whenever the cut-off is bounded.
pub fn heat_evolve(f: &Field, tau: f64, cutoff: &CutoffPolicy) -> Field {
    HeatPropagator::new(f.grid()).evolve(f, tau, cutoff)
}

/// Discrete free energy `h^d sum [F(phi)/eps^2 + |grad phi|^2 / 2]`, with the
/// gradient term evaluated spectrally through Parseval. Monitoring only.
pub fn energy(f: &Field, model: &ModelParams) -> f64 {
    energy_with(&HeatPropagator::new(f.grid()), f.values(), model)
}

pub(crate) fn energy_with(heat: &HeatPropagator, values: &[f64], model: &ModelParams) -> f64 {
    let grid = heat.grid();
    let bulk: f64 = values.iter().map(|&p| double_well(p)).sum::<f64>() / model.epsilon_sq();
    let mut coeffs = values.to_vec();
    heat.transform().forward_in_place(&mut coeffs);
    let gradient: f64 = coeffs.iter().zip(heat.eigenvalues()).map(|(c, a)| -a * c * c).sum();
    grid.cell_volume() * (bulk + 0.5 * gradient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(m: usize, l: f64) -> GridSpec {
        GridSpec::line(m, l).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(0.0).is_err());
        assert!(ModelParams::new(f64::NAN).is_err());
        assert!(CutoffPolicy::new(0.5).is_err());
        assert!(CutoffPolicy::new(f64::NAN).is_err());
        assert!(CutoffPolicy::new(1.0).is_ok());
        assert_eq!(CutoffPolicy::default().k_tol(), 1e9);
    }

    #[test]
    fn free_energy_fixed_points() {
        let m = ModelParams::new(0.1).unwrap();
        let f = Field::new(line(3, 1.0), vec![0.0, 1.0, -1.0]).unwrap();
        for tau in [-0.05, -1e-3, 0.0, 1e-3, 10.0] {
            let g = free_energy_evolve(&f, tau, &m).unwrap();
            assert_eq!(g.values(), f.values(), "tau={tau}");
        }
    }

    #[test]
    fn free_energy_known_value() {
        let eps = 0.2;
        let m = ModelParams::new(eps).unwrap();
        let f = Field::new(line(2, 1.0), vec![0.5, -0.5]).unwrap();
        let g = free_energy_evolve(&f, eps * eps, &m).unwrap();
        // frozen from an adaptive RK oracle of dphi/dt = (phi - phi^3)/eps^2
        assert!((g.values()[0] - 0.843_347_256_014_74).abs() < 1e-12);
        assert!((g.values()[1] + 0.843_347_256_014_74).abs() < 1e-12);
    }

    #[test]
    fn free_energy_inverse_pair() {
        let eps = 0.05;
        let m = ModelParams::new(eps).unwrap();
        let vals: Vec<f64> = (0..19).map(|i| -0.9 + 0.1 * i as f64).collect();
        let f = Field::new(line(19, 1.0), vals).unwrap();
        for s in [-5.0, -1.0, 0.3, 5.0] {
            let tau = s * eps * eps;
            let g = free_energy_evolve(&free_energy_evolve(&f, tau, &m).unwrap(), -tau, &m).unwrap();
            for (a, b) in g.values().iter().zip(f.values()) {
                assert!((a - b).abs() < 1e-10, "tau={tau}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn free_energy_backward_blowup_is_reported() {
        let m = ModelParams::new(0.1).unwrap();
        let f = Field::new(line(3, 1.0), vec![0.2, 1.5, 0.3]).unwrap();
        // radicand 2.25 - 1.25 exp(2) < 0
        match free_energy_evolve(&f, -0.01, &m) {
            Err(Error::Divergence { cell, .. }) => assert_eq!(cell, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn forward_steps_never_diverge() {
        let m = ModelParams::new(0.05).unwrap();
        let f = Field::new(line(4, 1.0), vec![1e-9, -1e-12, 0.5, 1.2]).unwrap();
        let g = free_energy_evolve(&f, 1e3, &m).unwrap();
        assert_eq!(g.values(), &[1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn heat_leaves_constants_alone() {
        let f = Field::constant(line(16, 2.0), 0.3).unwrap();
        for tau in [-0.1, 0.0, 0.5] {
            let g = heat_evolve(&f, tau, &CutoffPolicy::default());
            assert!(g.values().iter().all(|v| (v - 0.3).abs() < 1e-14));
        }
    }

    #[test]
    fn heat_single_mode_decay() {
        let m = 32;
        let f = Field::from_fn(line(m, 1.0), |x| (PI * x[0]).cos()).unwrap();
        let g = heat_evolve(&f, 0.01, &CutoffPolicy::default());
        let factor = (-0.01 * PI * PI).exp();
        assert!((factor - 0.906_018_055_79).abs() < 1e-10);
        for (a, b) in g.values().iter().zip(f.values()) {
            assert!((a - factor * b).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_clamps_backward_amplification() {
        let grid = line(1024, 1.0);
        let heat = HeatPropagator::new(&grid);
        let cut = CutoffPolicy::new(1e4).unwrap();
        let mult = heat.multipliers(-0.01, &cut);
        for (k, m) in mult.iter().enumerate() {
            let raw = (PI * PI * (k * k) as f64 * 0.01).exp();
            if raw > 1e4 {
                assert_eq!(*m, 1e4, "k={k}");
            } else {
                assert!((m - raw).abs() <= 1e-12 * raw);
            }
        }
        let fwd = heat.multipliers(0.01, &cut);
        assert_eq!(fwd, heat.multipliers(0.01, &CutoffPolicy::unbounded()));
    }

    #[test]
    fn energy_of_uniform_states() {
        let m = ModelParams::new(0.1).unwrap();
        let g = GridSpec::new(&[8, 4], &[2.0, 1.5]).unwrap();
        assert!(energy(&Field::constant(g.clone(), 1.0).unwrap(), &m).abs() < 1e-14);
        let e0 = energy(&Field::constant(g.clone(), 0.0).unwrap(), &m);
        assert!((e0 - 0.25 / 0.01 * 3.0).abs() < 1e-10);
    }
}
