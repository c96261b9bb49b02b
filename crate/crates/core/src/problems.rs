//! Benchmark problems: a 1D traveling front with a closed-form solution and
//! a randomly seeded 3D spinodal decomposition.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, GridSpec};

/// `phi(x, t) = (1 - tanh((x - x0 - s t) / (2 sqrt(2) eps))) / 2` with
/// `s = 3 / (sqrt(2) eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelingWaveSpec {
    pub epsilon: f64,
    /// Domain length `L`.
    pub length: f64,
    /// Front position at `t = 0`.
    pub offset: f64,
}

impl Default for TravelingWaveSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.03 * std::f64::consts::SQRT_2,
            length: 4.0,
            offset: 0.5,
        }
    }
}

impl TravelingWaveSpec {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn speed(&self) -> f64 {
        3.0 / (std::f64::consts::SQRT_2 * self.epsilon)
    }

    /// `T_f = 1/s`, the time the front needs to travel one unit.
    pub fn final_time(&self) -> f64 {
        1.0 / self.speed()
    }

    /// 1D grid on `[0, L]` with `cells` cells.
    pub fn grid(&self, cells: usize) -> Result<GridSpec> {
        GridSpec::line(cells, self.length)
    }
}

pub fn traveling_wave(x: f64, t: f64, spec: &TravelingWaveSpec) -> f64 {
    let arg = (x - spec.offset - spec.speed() * t) / (2.0 * std::f64::consts::SQRT_2 * spec.epsilon);
    0.5 * (1.0 - arg.tanh())
}

pub fn traveling_wave_field(grid: &GridSpec, t: f64, spec: &TravelingWaveSpec) -> Result<Field> {
    if grid.dims() != 1 {
        return Err(Error::InvalidGrid(format!(
            "traveling wave needs a 1D grid, got {} dimensions",
            grid.dims()
        )));
    }
    Field::from_fn(grid.clone(), |x| traveling_wave(x[0], t, spec))
}

/// Small random perturbation of the unstable state `phi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinodalSpec {
    pub epsilon: f64,
    pub amplitude: f64,
    pub seed: u64,
    /// Cells per axis of the cubic grid.
    pub cells: usize,
    /// Edge length of the cube.
    pub length: f64,
}

impl Default for SpinodalSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.015,
            amplitude: 0.005,
            seed: 0,
            cells: 64,
            length: 1.0,
        }
    }
}

impl SpinodalSpec {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::cube(self.cells, self.length)
    }

    pub fn validate(&self) -> Result<()> {
        let limit = 1.0 / 3f64.sqrt();
        if !(self.amplitude > 0.0 && self.amplitude < limit) {
            return Err(Error::InvalidParameter(format!(
                "amplitude {} must lie in (0, 1/sqrt(3))",
                self.amplitude
            )));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Uniform variate on `[-1, 1)` from the top 53 bits of one 64-bit draw.
fn symmetric_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// `amplitude * u` per cell with `u ~ U[-1, 1)`.
///
/// The stream is ChaCha8 seeded through `seed_from_u64(seed)`; one 64-bit
/// draw is consumed per cell in linear (axis-0 slowest) order, so a seed
/// fixes the field on every platform.
pub fn spinodal_initial(spec: &SpinodalSpec) -> Result<Field> {
    spec.validate()?;
    let grid = spec.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = (0..grid.total())
        .map(|_| spec.amplitude * symmetric_unit(&mut rng))
        .collect();
    Field::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_speed_consistency() {
        for eps in [0.01, 0.03 * std::f64::consts::SQRT_2, 0.2] {
            let spec = TravelingWaveSpec::with_epsilon(eps);
            assert!((spec.speed() * eps * std::f64::consts::SQRT_2 - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn wave_values() {
        let spec = TravelingWaveSpec::default();
        for t in [0.0, 0.01, 0.02] {
            let x = 0.5 + spec.speed() * t;
            assert!((traveling_wave(x, t, &spec) - 0.5).abs() < 1e-15);
        }
        assert!((traveling_wave(-50.0, 0.0, &spec) - 1.0).abs() < 1e-15);
        assert!(traveling_wave(50.0, 0.0, &spec).abs() < 1e-15);
        let x = 0.5 + 2.0 * std::f64::consts::SQRT_2 * spec.epsilon;
        assert!((x - 0.62).abs() < 1e-15);
        assert!((traveling_wave(x, 0.0, &spec) - 0.119_202_922).abs() < 1e-9);
    }

    #[test]
    fn wave_field_shape() {
        let spec = TravelingWaveSpec::default();
        let g = spec.grid(128).unwrap();
        assert_eq!(g.spacing(0), 1.0 / 32.0);
        let f = traveling_wave_field(&g, 0.0, &spec).unwrap();
        assert!(f.values().windows(2).all(|w| w[0] >= w[1]));
        let tf = spec.final_time();
        assert!((traveling_wave(1.5, tf, &spec) - 0.5).abs() < 1e-12);
        assert!(traveling_wave_field(&GridSpec::cube(4, 1.0).unwrap(), 0.0, &spec).is_err());
    }

    #[test]
    fn spinodal_is_bounded_and_seeded() {
        let spec = SpinodalSpec {
            cells: 16,
            seed: 42,
            ..SpinodalSpec::default()
        };
        let a = spinodal_initial(&spec).unwrap();
        let b = spinodal_initial(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs() <= 0.005);
        let c = spinodal_initial(&SpinodalSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
        assert!(spinodal_initial(&SpinodalSpec { amplitude: 0.0, ..spec }).is_err());
    }
}
