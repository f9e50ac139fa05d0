//! Periodic grids, the discrete Fourier transform and Fourier multipliers.
//!
//! The torus has period 2π in every axis, so the frequency lattice is
//! `{-N/2, ..., N/2-1}^n` with unit spacing. Transforms use the non-unitary
//! convention
//!
//! ```text
//! f̂(k) = Σ_j f(x_j) e^{-ik·x_j} (2π/N)^n,     f(x) = (2π)^{-n} Σ_k f̂(k) e^{ik·x}
//! ```
//!
//! and both arrays are stored row-major (axis 0 slowest) in natural, unshifted
//! DFT order: array index `i` on an axis holds frequency `i` for `i < N/2` and
//! `i - N` otherwise.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// A lattice frequency, padded with zeros beyond the grid dimension.
pub type Lattice = [i64; MAX_DIM];

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// A cubic periodic grid of `size^dim` points on `[0, 2π)^dim`.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    size: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("size", &self.size)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.size == other.size
    }
}

impl Eq for Grid {}

impl Grid {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "grid dimension must be 2 or 3, got {dim}"
            )));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be a power of two >= 8, got {size}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        };
        Ok(Self {
            dim,
            size,
            plans: Arc::new(plans),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Total number of grid points, `size^dim`.
    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Domain period, fixed at 2π.
    pub fn period(&self) -> f64 {
        2.0 * PI
    }

    /// Sample spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    /// Volume of one grid cell, `(2π/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lattice frequency stored at array position `i` along one axis.
    #[inline]
    pub fn axis_frequency(&self, i: usize) -> i64 {
        let n = self.size as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Lattice frequency at flat index `index`.
    #[inline]
    pub fn lattice(&self, index: usize) -> Lattice {
        let mut k = [0i64; MAX_DIM];
        let mut rem = index;
        for d in (0..self.dim).rev() {
            k[d] = self.axis_frequency(rem % self.size);
            rem /= self.size;
        }
        k
    }

    /// Flat index holding frequency `k` (coordinates are reduced modulo N).
    #[inline]
    pub fn index_of(&self, k: &Lattice) -> usize {
        let n = self.size as i64;
        let mut index = 0usize;
        for &kd in k.iter().take(self.dim) {
            index = index * self.size + kd.rem_euclid(n) as usize;
        }
        index
    }

    /// Spatial coordinates of grid point `index`.
    #[inline]
    pub fn position(&self, index: usize) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        let mut rem = index;
        let h = self.spacing();
        for d in (0..self.dim).rev() {
            x[d] = (rem % self.size) as f64 * h;
            rem /= self.size;
        }
        x
    }

    /// `|k|` for every lattice frequency, in storage order.
    pub fn frequency_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| lattice_norm(&self.lattice(i)))
            .collect()
    }

    /// Largest `|k|` on the lattice, attained at the corner `(-N/2, ..., -N/2)`.
    pub fn max_frequency_norm(&self) -> f64 {
        (self.dim as f64).sqrt() * self.size as f64 / 2.0
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "grid mismatch: (n={}, N={}) vs (n={}, N={})",
                self.dim, self.size, other.dim, other.size
            )))
        }
    }

    pub(crate) fn ensure_len(&self, len: usize, what: &str) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what} has {len} values, grid expects {}",
                self.len()
            )))
        }
    }

    /// Unnormalized n-dimensional FFT in place (`e^{-i}` forward, `e^{+i}` inverse).
    pub(crate) fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len());
        let fft = if inverse {
            &self.plans.inverse
        } else {
            &self.plans.forward
        };
        let n = self.size;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // Last axis is contiguous: one call transforms every line.
        fft.process_with_scratch(data, &mut scratch);
        let mut lines = Vec::new();
        for axis in (0..self.dim - 1).rev() {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = n * stride;
            lines.resize(block, Complex64::new(0.0, 0.0));
            for chunk in data.chunks_mut(block) {
                for inner in 0..stride {
                    for t in 0..n {
                        lines[inner * n + t] = chunk[t * stride + inner];
                    }
                }
                fft.process_with_scratch(&mut lines, &mut scratch);
                for inner in 0..stride {
                    for t in 0..n {
                        chunk[t * stride + inner] = lines[inner * n + t];
                    }
                }
            }
        }
    }
}

#[inline]
pub(crate) fn lattice_norm(k: &Lattice) -> f64 {
    let s: i64 = k.iter().map(|&v| v * v).sum();
    (s as f64).sqrt()
}

/// Complex samples of a function on the grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        grid.ensure_len(values.len(), "grid function")?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64; MAX_DIM]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// `e^{ik·x}` sampled on the grid.
    pub fn plane_wave(grid: &Grid, k: &Lattice) -> Self {
        Self::from_fn(grid, |x| {
            let phase: f64 = (0..grid.dim()).map(|d| k[d] as f64 * x[d]).sum();
            Complex64::from_polar(1.0, phase)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Largest modulus over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &GridFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// True when every sample is bitwise equal to the first.
    pub fn is_constant(&self) -> bool {
        let first = self.values[0];
        self.values.iter().all(|v| v == &first)
    }

    /// Riemann-sum inner product `Σ f·conj(g) (2π/N)^n`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let prods: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .collect();
        Ok(crate::sum::pairwise_sum_complex(&prods) * self.grid.cell_volume())
    }

    /// Largest pointwise difference.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Discrete Fourier coefficients indexed by the frequency lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.ensure_len(coeffs.len(), "spectrum")?;
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&Lattice) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|i| f(&grid.lattice(i))).collect();
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, k: &Lattice) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    /// Multiplies the coefficients by `m` in place.
    pub fn apply(&mut self, m: &Multiplier) -> Result<()> {
        self.grid.ensure_same(&m.grid)?;
        for (c, w) in self.coeffs.iter_mut().zip(&m.weights) {
            *c *= w;
        }
        Ok(())
    }
}

/// A Fourier multiplier table `m(k)` on the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    grid: Grid,
    weights: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(grid: &Grid, weights: Vec<Complex64>) -> Result<Self> {
        grid.ensure_len(weights.len(), "multiplier")?;
        Ok(Self {
            grid: grid.clone(),
            weights,
        })
    }

    pub fn ones(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            weights: vec![Complex64::new(1.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&Lattice) -> Complex64) -> Self {
        let weights = (0..grid.len()).map(|i| f(&grid.lattice(i))).collect();
        Self {
            grid: grid.clone(),
            weights,
        }
    }

    /// Real weights from a function of the lattice frequency.
    pub fn from_real_fn(grid: &Grid, f: impl Fn(&Lattice) -> f64) -> Self {
        Self::from_fn(grid, |k| Complex64::new(f(k), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn weight(&self, k: &Lattice) -> Complex64 {
        self.weights[self.grid.index_of(k)]
    }

    /// Pointwise product `m₁·m₂`, the symbol of the composition.
    pub fn product(&self, other: &Multiplier) -> Result<Multiplier> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Multiplier {
            grid: self.grid.clone(),
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn conj(&self) -> Multiplier {
        Multiplier {
            grid: self.grid.clone(),
            weights: self.weights.iter().map(|w| w.conj()).collect(),
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }
}

/// `f̂(k) = Σ_j f(x_j) e^{-ik·x_j} (2π/N)^n`.
pub fn forward_dft(f: &GridFunction) -> Spectrum {
    let mut coeffs = f.values.clone();
    f.grid.fft_in_place(&mut coeffs, false);
    let scale = f.grid.cell_volume();
    for c in &mut coeffs {
        *c *= scale;
    }
    Spectrum {
        grid: f.grid.clone(),
        coeffs,
    }
}

/// `f(x) = (2π)^{-n} Σ_k f̂(k) e^{ik·x}`.
pub fn inverse_dft(spectrum: &Spectrum) -> GridFunction {
    inverse_dft_owned(spectrum.clone())
}

pub(crate) fn inverse_dft_owned(spectrum: Spectrum) -> GridFunction {
    let Spectrum { grid, mut coeffs } = spectrum;
    grid.fft_in_place(&mut coeffs, true);
    let scale = (2.0 * PI).powi(-(grid.dim() as i32));
    for c in &mut coeffs {
        *c *= scale;
    }
    GridFunction {
        grid,
        values: coeffs,
    }
}

/// `m(D)f`, the inverse transform of `m(k)·f̂(k)`.
///
/// A constant input has its whole spectrum at `k = 0`, so the result is the
/// constant `m(0)·f` without going through the transform.
pub fn apply_multiplier(m: &Multiplier, f: &GridFunction) -> Result<GridFunction> {
    m.grid.ensure_same(&f.grid)?;
    if f.is_constant() {
        let w0 = m.weights[0];
        return Ok(GridFunction::constant(&f.grid, w0 * f.values[0]));
    }
    let mut spectrum = forward_dft(f);
    spectrum.apply(m)?;
    Ok(inverse_dft_owned(spectrum))
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
#[inline]
pub fn japanese_bracket(norm: f64) -> f64 {
    (1.0 + norm * norm).sqrt()
}

/// Weights `⟨k⟩^s = exp(s·log⟨k⟩)` for a complex exponent `s`.
pub fn sobolev_weight(grid: &Grid, s: Complex64) -> Multiplier {
    Multiplier::from_fn(grid, |k| {
        let sq: i64 = k.iter().map(|&v| v * v).sum();
        let log_bracket = 0.5 * (1.0 + sq as f64).ln();
        (s * log_bracket).exp()
    })
}
