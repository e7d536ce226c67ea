//! Periodic 1-D grids with spectral differentiation, convolution and norms.
//!
//! All inner products and norms carry the grid weight `h = L/M`, so a
//! continuum-normalized function stays normalized when the resolution
//! changes.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid mismatch: {0} vs {1} points")]
    Mismatch(usize, usize),
    #[error("grid needs at least 4 points, got {0}")]
    TooSmall(usize),
    #[error("grid length must be positive, got {0}")]
    BadLength(f64),
}

/// Uniform periodic grid: points `x_i = i·h`, `i = 0..M`, spacing `h = L/M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    m: usize,
    l: f64,
}

impl Grid {
    pub fn new(m: usize, l: f64) -> Result<Self, GridError> {
        if m < 4 {
            return Err(GridError::TooSmall(m));
        }
        if !l.is_finite() || l <= 0.0 {
            return Err(GridError::BadLength(l));
        }
        Ok(Grid { m, l })
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.m as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Angular wavenumber of Fourier mode `m`, in the symmetric convention
    /// (negative for modes above M/2).
    pub fn wavenumber(&self, mode: usize) -> f64 {
        let m = self.m as isize;
        let k = mode as isize;
        let signed = if 2 * k <= m { k } else { k - m };
        2.0 * std::f64::consts::PI * signed as f64 / self.l
    }

    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> GridFunction {
        let values = (0..self.m).map(|i| f(self.coord(i))).collect();
        GridFunction { grid: *self, values }
    }

    pub fn sample_real<F: Fn(f64) -> f64>(&self, f: F) -> GridFunction {
        self.sample(|x| Complex64::new(f(x), 0.0))
    }

    pub fn zero(&self) -> GridFunction {
        GridFunction {
            grid: *self,
            values: vec![Complex64::new(0.0, 0.0); self.m],
        }
    }
}

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache::new());
}

fn fft_plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((m, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(m)
                } else {
                    planner.plan_fft_forward(m)
                }
            })
            .clone()
    })
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != grid.points() {
            return Err(GridError::Mismatch(values.len(), grid.points()));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<(), GridError> {
        if self.grid != other.grid {
            return Err(GridError::Mismatch(self.grid.points(), other.grid.points()));
        }
        Ok(())
    }

    /// Raw DFT (rustfft forward, unnormalized).
    pub(crate) fn dft_raw(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        fft_plan(self.grid.points(), false).process(&mut buf);
        buf
    }

    pub(crate) fn idft_raw(grid: Grid, mut buf: Vec<Complex64>) -> GridFunction {
        fft_plan(grid.points(), true).process(&mut buf);
        let scale = 1.0 / grid.points() as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
        GridFunction { grid, values: buf }
    }

    /// Fourier coefficients in the unitary convention (norm-preserving).
    pub fn fourier_coefficients(&self) -> Vec<Complex64> {
        let scale = 1.0 / (self.grid.points() as f64).sqrt();
        self.dft_raw().into_iter().map(|z| z * scale).collect()
    }

    /// Applies a Fourier multiplier `mode -> factor`.
    pub fn apply_multiplier<F: Fn(usize) -> Complex64>(&self, mult: F) -> GridFunction {
        let mut buf = self.dft_raw();
        for (mode, z) in buf.iter_mut().enumerate() {
            *z *= mult(mode);
        }
        GridFunction::idft_raw(self.grid, buf)
    }

    /// Spectral Laplacian: multiplier `-k^2`. Exact for band-limited input.
    pub fn spectral_laplacian(&self) -> GridFunction {
        self.apply_multiplier(|mode| {
            let k = self.grid.wavenumber(mode);
            Complex64::new(-k * k, 0.0)
        })
    }

    /// Spectral derivative: multiplier `i·k`.
    pub fn spectral_gradient(&self) -> GridFunction {
        self.apply_multiplier(|mode| Complex64::new(0.0, self.grid.wavenumber(mode)))
    }

    /// Periodic convolution `(f ⋆ g)(x_i) = h · Σ_j f(x_j) g(x_{i-j})`.
    pub fn convolve(&self, other: &GridFunction) -> Result<GridFunction, GridError> {
        self.check_same_grid(other)?;
        let fa = self.dft_raw();
        let fb = other.dft_raw();
        let h = self.grid.spacing();
        let buf = fa
            .into_iter()
            .zip(fb)
            .map(|(a, b)| a * b * h)
            .collect();
        Ok(GridFunction::idft_raw(self.grid, buf))
    }

    /// Discrete L² pairing `⟨f,g⟩ = h Σ f* g`, conjugate-linear in `self`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64, GridError> {
        self.check_same_grid(other)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a.conj() * b;
        }
        Ok(acc * self.grid.spacing())
    }

    pub fn norms(&self) -> Norms {
        let h = self.grid.spacing();
        let mut l1 = 0.0;
        let mut l2sq = 0.0;
        let mut linf: f64 = 0.0;
        for z in &self.values {
            let a = z.norm();
            l1 += a;
            l2sq += a * a;
            linf = linf.max(a);
        }
        let h1 = self.spectral_gradient();
        let grad_l2sq: f64 = h1.values.iter().map(|z| z.norm_sqr()).sum();
        Norms {
            l1: h * l1,
            l2: (h * l2sq).sqrt(),
            linf,
            h1_seminorm: (h * grad_l2sq).sqrt(),
        }
    }

    pub fn l2(&self) -> f64 {
        let h = self.grid.spacing();
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (h * s).sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn normalized(&self) -> GridFunction {
        let n = self.l2();
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction, GridError> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Pointwise product (multiplication operator applied to `self`).
    pub fn mul_pointwise(&self, other: &GridFunction) -> Result<GridFunction, GridError> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// |f|² as a real grid function.
    pub fn abs_sqr(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|z| Complex64::new(z.norm_sqr(), 0.0))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub h1_seminorm: f64,
}
