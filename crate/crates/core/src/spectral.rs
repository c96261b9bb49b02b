//! Cell-centered grids, fields and the orthonormal cosine transform.
//!
//! Values are stored in a single linear buffer with axis 0 varying slowest,
//! i.e. cell `(i0, i1, i2)` lives at `(i0 * M1 + i1) * M2 + i2`. The same
//! ordering is used for cosine coefficients, eigenvalue tables and field
//! files.
//!
//! The forward transform is the DCT-II with weights `sqrt(1/M)` for `k = 0`
//! and `sqrt(2/M)` otherwise, applied along each axis in turn. With these
//! weights the transform is orthogonal, so the discrete l2 norm is preserved
//! and the inverse is the transpose.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};

/// Below this many cells the per-axis passes run on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 12;

/// Uniform cell-centered tensor grid on `[0, L_0] x ... x [0, L_{d-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    cells: Vec<usize>,
    lengths: Vec<f64>,
}

impl GridSpec {
    pub fn new(cells: &[usize], lengths: &[f64]) -> Result<Self> {
        if cells.is_empty() || cells.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                cells.len()
            )));
        }
        if cells.len() != lengths.len() {
            return Err(Error::InvalidGrid(format!(
                "{} cell counts but {} lengths",
                cells.len(),
                lengths.len()
            )));
        }
        if let Some(m) = cells.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidGrid(format!("cell count {m} is below 2")));
        }
        if let Some(l) = lengths.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidGrid(format!("length {l} is not positive")));
        }
        Ok(Self {
            cells: cells.to_vec(),
            lengths: lengths.to_vec(),
        })
    }

    pub fn line(cells: usize, length: f64) -> Result<Self> {
        Self::new(&[cells], &[length])
    }

    /// `cells^3` grid on the cube `[0, length]^3`.
    pub fn cube(cells: usize, length: f64) -> Result<Self> {
        Self::new(&[cells; 3], &[length; 3])
    }

    pub fn dims(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    /// Volume of a single cell, `h_0 * ... * h_{d-1}`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Coordinate of cell center `l` along `axis`: `(L/M)(l + 1/2)`.
    pub fn center(&self, axis: usize, l: usize) -> f64 {
        self.spacing(axis) * (l as f64 + 0.5)
    }

    /// Decomposes a linear index into per-axis indices.
    pub fn multi_index(&self, mut index: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for axis in (0..self.dims()).rev() {
            out[axis] = index % self.cells[axis];
            index /= self.cells[axis];
        }
        out
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.cells).fold(0, |acc, (&i, &m)| acc * m + i)
    }

    /// Product of the cell counts of all axes after `axis`.
    fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().product()
    }
}

/// Real scalar per cell in physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total() {
            return Err(Error::SizeMismatch {
                expected: grid.total(),
                found: values.len(),
            });
        }
        if let Some((cell, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { cell, value });
        }
        Ok(Self { grid, values })
    }

    /// Callers guarantee length and finiteness.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.total());
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        let n = grid.total();
        Self::new(grid, vec![value; n])
    }

    /// Samples `f` at every cell center. Only the first `dims` coordinates
    /// of the argument are meaningful.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dims = grid.dims();
        let values = (0..grid.total())
            .map(|i| {
                let idx = grid.multi_index(i);
                let mut x = [0.0; 3];
                for a in 0..dims {
                    x[a] = grid.center(a, idx[a]);
                }
                f(&x[..dims])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Plain Euclidean norm of the value vector.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine coefficients indexed like [`Field`] values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<f64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != grid.total() {
            return Err(Error::SizeMismatch {
                expected: grid.total(),
                found: coefficients.len(),
            });
        }
        if let Some((cell, &value)) = coefficients.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { cell, value });
        }
        Ok(Self { grid, coefficients })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn get(&self, k: &[usize]) -> f64 {
        self.coefficients[self.grid.linear_index(k)]
    }

    pub fn l2_norm(&self) -> f64 {
        self.coefficients.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Planned orthonormal DCT-II / DCT-III pair for one grid.
///
/// Planning is not free, so long-running code builds one of these up front
/// and reuses it for every transform.
#[derive(Clone)]
pub struct CosineTransform {
    grid: GridSpec,
    plans: Vec<Arc<dyn TransformType2And3<f64>>>,
}

impl std::fmt::Debug for CosineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CosineTransform")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl CosineTransform {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = DctPlanner::new();
        let plans = grid.cells().iter().map(|&m| planner.plan_dct2(m)).collect();
        Self {
            grid: grid.clone(),
            plans,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn forward(&self, f: &Field) -> SpectralField {
        assert_eq!(f.grid(), &self.grid, "field grid differs from plan grid");
        let mut data = f.values().to_vec();
        self.forward_in_place(&mut data);
        SpectralField {
            grid: self.grid.clone(),
            coefficients: data,
        }
    }

    pub fn inverse(&self, s: &SpectralField) -> Field {
        assert_eq!(s.grid(), &self.grid, "coefficient grid differs from plan grid");
        let mut data = s.coefficients().to_vec();
        self.inverse_in_place(&mut data);
        Field::from_parts(self.grid.clone(), data)
    }

    pub fn forward_in_place(&self, data: &mut [f64]) {
        for axis in 0..self.grid.dims() {
            self.axis_pass(data, axis, Direction::Forward);
        }
    }

    pub fn inverse_in_place(&self, data: &mut [f64]) {
        for axis in 0..self.grid.dims() {
            self.axis_pass(data, axis, Direction::Inverse);
        }
    }

    fn axis_pass(&self, data: &mut [f64], axis: usize, dir: Direction) {
        assert_eq!(data.len(), self.grid.total());
        let n = self.grid.cells()[axis];
        let stride = self.grid.stride(axis);
        let plan = &self.plans[axis];
        let w0 = (1.0 / n as f64).sqrt();
        let wk = (2.0 / n as f64).sqrt();

        // Each block of `n * stride` values holds complete lanes along `axis`.
        let run_block = |block: &mut [f64]| {
            let mut lane = vec![0.0; n];
            let mut scratch = vec![0.0; plan.get_scratch_len()];
            for inner in 0..stride {
                for (l, v) in lane.iter_mut().enumerate() {
                    *v = block[l * stride + inner];
                }
                match dir {
                    Direction::Forward => {
                        plan.process_dct2_with_scratch(&mut lane, &mut scratch);
                        lane[0] *= w0;
                        lane[1..].iter_mut().for_each(|v| *v *= wk);
                    }
                    Direction::Inverse => {
                        lane[0] *= 2.0 * w0;
                        lane[1..].iter_mut().for_each(|v| *v *= wk);
                        plan.process_dct3_with_scratch(&mut lane, &mut scratch);
                    }
                }
                for (l, v) in lane.iter().enumerate() {
                    block[l * stride + inner] = *v;
                }
            }
        };

        let block_len = n * stride;
        if data.len() >= PARALLEL_THRESHOLD && data.len() > block_len {
            data.par_chunks_mut(block_len).for_each(run_block);
        } else {
            data.chunks_mut(block_len).for_each(run_block);
        }
    }
}

pub fn dct_forward(f: &Field) -> SpectralField {
    CosineTransform::new(f.grid()).forward(f)
}

pub fn dct_inverse(s: &SpectralField) -> Field {
    CosineTransform::new(s.grid()).inverse(s)
}

/// Eigenvalues `A_k = -sum_i (pi k_i / L_i)^2` of the zero-Neumann Laplacian
/// for every cosine mode, in coefficient layout.
pub fn laplacian_eigenvalues(grid: &GridSpec) -> SpectralField {
    let per_axis: Vec<Vec<f64>> = (0..grid.dims())
        .map(|a| {
            let l = grid.lengths()[a];
            (0..grid.cells()[a])
                .map(|k| {
                    let w = PI * k as f64 / l;
                    -w * w
                })
                .collect()
        })
        .collect();
    let coefficients = (0..grid.total())
        .map(|i| {
            let idx = grid.multi_index(i);
            (0..grid.dims()).map(|a| per_axis[a][idx[a]]).sum()
        })
        .collect();
    SpectralField {
        grid: grid.clone(),
        coefficients,
    }
}
