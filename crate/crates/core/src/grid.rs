//! Tensor grid on the periodic strip `[0, 2pi) x [0, y_max]`.
//!
//! The x direction is uniform and periodic. The y direction is stretched
//! towards the wall by `y_j = y_max (exp(s j/(ny-1)) - 1)/(exp(s) - 1)` and is
//! uniform when `s = 0`. Quadrature is the rectangle rule in x and the
//! trapezoid rule in y.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest admissible grid and domain height.
pub const MIN_POINTS: usize = 8;
pub const MIN_Y_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub y_max: f64,
    pub stretch: f64,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, y_max: f64, stretch: f64, dt: f64) -> Self {
        Self { nx, ny, y_max, stretch, dt }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < MIN_POINTS || self.ny < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need nx, ny >= {MIN_POINTS}, got nx = {}, ny = {}",
                self.nx, self.ny
            )));
        }
        if !(self.y_max >= MIN_Y_MAX) || !self.y_max.is_finite() {
            return Err(Error::InvalidGrid(format!("need y_max >= {MIN_Y_MAX}, got {}", self.y_max)));
        }
        if !self.stretch.is_finite() || self.stretch < 0.0 {
            return Err(Error::InvalidGrid(format!("stretch must be finite and >= 0, got {}", self.stretch)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// How x derivatives of explicit terms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XDerivative {
    #[default]
    FourthOrder,
    Spectral,
}

/// Uniform periodic nodes `2 pi i / nx`.
pub fn x_coordinates(nx: usize) -> Vec<f64> {
    (0..nx).map(|i| 2.0 * PI * i as f64 / nx as f64).collect()
}

/// Wall-clustered nodes on `[0, y_max]`; uniform for `stretch == 0`.
pub fn y_coordinates(ny: usize, y_max: f64, stretch: f64) -> Vec<f64> {
    let last = (ny - 1) as f64;
    (0..ny)
        .map(|j| {
            let s = j as f64 / last;
            if stretch == 0.0 {
                y_max * s
            } else {
                y_max * (stretch * s).exp_m1() / stretch.exp_m1()
            }
        })
        .collect()
}

/// Conormal weight `phi(y) = y/(1+y)`.
pub fn conormal_weight(y: f64) -> f64 {
    y / (1.0 + y)
}

/// Finite-difference weights for derivatives of order `0..=order` at `z`
/// using the nodes `nodes` (Fornberg's recursion).
pub fn fd_weights(z: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A derivative stencil `sum_k w[k] (f[start + k] - f[center])`, exact zero on constants.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub start: usize,
    pub center: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    fn build(y: &[f64], j: usize, start: usize, len: usize, order: usize) -> Self {
        let w = fd_weights(y[j], &y[start..start + len], order);
        Stencil { start, center: j, weights: w[order].clone() }
    }

    #[inline]
    pub fn apply(&self, line: &[f64]) -> f64 {
        let c = line[self.center];
        self.weights.iter().zip(&line[self.start..]).map(|(w, f)| w * (f - c)).sum()
    }
}

pub struct Grid {
    spec: GridSpec,
    x_mode: XDerivative,
    x: Vec<f64>,
    y: Vec<f64>,
    dx: f64,
    wy: Vec<f64>,
    phi: Vec<f64>,
    dy1: Vec<Stencil>,
    dy2: Vec<Stencil>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).field("x_mode", &self.x_mode).finish_non_exhaustive()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.x_mode == other.x_mode
    }
}

/// Builds and validates a grid with fourth-order x derivatives.
pub fn build_grid(spec: GridSpec) -> Result<Arc<Grid>> {
    Grid::new(spec, XDerivative::default()).map(Arc::new)
}

impl Grid {
    pub fn new(spec: GridSpec, x_mode: XDerivative) -> Result<Self> {
        spec.validate()?;
        let x = x_coordinates(spec.nx);
        let y = y_coordinates(spec.ny, spec.y_max, spec.stretch);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite y nodes".into()));
        }
        let min_gap = spec.y_max * 1e-12;
        if y.windows(2).any(|w| !(w[1] - w[0] > min_gap)) {
            return Err(Error::InvalidGrid(format!(
                "y nodes are not strictly increasing (stretch {} too strong for ny = {})",
                spec.stretch, spec.ny
            )));
        }
        let ny = spec.ny;
        let mut wy = vec![0.0; ny];
        for j in 0..ny - 1 {
            let half = 0.5 * (y[j + 1] - y[j]);
            wy[j] += half;
            wy[j + 1] += half;
        }
        let phi = y.iter().map(|&v| conormal_weight(v)).collect();
        let mut dy1 = Vec::with_capacity(ny);
        let mut dy2 = Vec::with_capacity(ny);
        for j in 0..ny {
            let s1 = if j == 0 {
                0
            } else if j == ny - 1 {
                ny - 3
            } else {
                j - 1
            };
            dy1.push(Stencil::build(&y, j, s1, 3, 1));
            let s2 = if j == 0 {
                0
            } else if j == ny - 1 {
                ny - 4
            } else {
                j - 1
            };
            let len = if j == 0 || j == ny - 1 { 4 } else { 3 };
            dy2.push(Stencil::build(&y, j, s2, len, 2));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(spec.nx);
        let ifft = planner.plan_fft_inverse(spec.nx);
        Ok(Grid { spec, x_mode, dx: 2.0 * PI / spec.nx as f64, x, y, wy, phi, dy1, dy2, fft, ifft })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn x_mode(&self) -> XDerivative {
        self.x_mode
    }
    pub fn nx(&self) -> usize {
        self.spec.nx
    }
    pub fn ny(&self) -> usize {
        self.spec.ny
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    /// Quadrature weight of every x node.
    pub fn wx(&self) -> f64 {
        self.dx
    }
    /// Trapezoid weights in y.
    pub fn wy(&self) -> &[f64] {
        &self.wy
    }
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }
    pub fn dy_min(&self) -> f64 {
        self.y.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
    pub fn dy_at(&self, j: usize) -> f64 {
        let n = self.ny();
        if j + 1 < n {
            self.y[j + 1] - self.y[j]
        } else {
            self.y[n - 1] - self.y[n - 2]
        }
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros((self.nx(), self.ny()))
    }

    // ---- raw operators on (nx, ny) arrays, row-major with y contiguous ----

    pub(crate) fn apply_dx(&self, f: &Array2<f64>) -> Array2<f64> {
        match self.x_mode {
            XDerivative::FourthOrder => self.dx_fd4(f),
            XDerivative::Spectral => self.dx_spectral(f, 1),
        }
    }

    pub(crate) fn apply_dxx(&self, f: &Array2<f64>) -> Array2<f64> {
        match self.x_mode {
            XDerivative::FourthOrder => self.dxx_fd4(f),
            XDerivative::Spectral => self.dx_spectral(f, 2),
        }
    }

    fn dx_fd4(&self, f: &Array2<f64>) -> Array2<f64> {
        let (nx, ny) = f.dim();
        let src = f.as_slice().expect("standard layout");
        let mut out = vec![0.0; nx * ny];
        let c = 1.0 / (12.0 * self.dx);
        for i in 0..nx {
            let im2 = ((i + nx - 2) % nx) * ny;
            let im1 = ((i + nx - 1) % nx) * ny;
            let ip1 = ((i + 1) % nx) * ny;
            let ip2 = ((i + 2) % nx) * ny;
            let row = &mut out[i * ny..(i + 1) * ny];
            for (j, o) in row.iter_mut().enumerate() {
                *o = c * (8.0 * (src[ip1 + j] - src[im1 + j]) - (src[ip2 + j] - src[im2 + j]));
            }
        }
        Array2::from_shape_vec((nx, ny), out).expect("shape")
    }

    fn dxx_fd4(&self, f: &Array2<f64>) -> Array2<f64> {
        let (nx, ny) = f.dim();
        let src = f.as_slice().expect("standard layout");
        let mut out = vec![0.0; nx * ny];
        let c = 1.0 / (12.0 * self.dx * self.dx);
        for i in 0..nx {
            let im2 = ((i + nx - 2) % nx) * ny;
            let im1 = ((i + nx - 1) % nx) * ny;
            let i0 = i * ny;
            let ip1 = ((i + 1) % nx) * ny;
            let ip2 = ((i + 2) % nx) * ny;
            let row = &mut out[i0..i0 + ny];
            for (j, o) in row.iter_mut().enumerate() {
                let f0 = src[i0 + j];
                let near = (src[im1 + j] - f0) + (src[ip1 + j] - f0);
                let far = (src[im2 + j] - f0) + (src[ip2 + j] - f0);
                *o = c * (16.0 * near - far);
            }
        }
        Array2::from_shape_vec((nx, ny), out).expect("shape")
    }

    /// Three-point periodic second difference, the operator treated implicitly.
    pub(crate) fn dxx_compact(&self, f: &Array2<f64>) -> Array2<f64> {
        let (nx, ny) = f.dim();
        let src = f.as_slice().expect("standard layout");
        let mut out = vec![0.0; nx * ny];
        let c = 1.0 / (self.dx * self.dx);
        for i in 0..nx {
            let im1 = ((i + nx - 1) % nx) * ny;
            let i0 = i * ny;
            let ip1 = ((i + 1) % nx) * ny;
            let row = &mut out[i0..i0 + ny];
            for (j, o) in row.iter_mut().enumerate() {
                *o = c * ((src[im1 + j] - src[i0 + j]) + (src[ip1 + j] - src[i0 + j]));
            }
        }
        Array2::from_shape_vec((nx, ny), out).expect("shape")
    }

    fn dx_spectral(&self, f: &Array2<f64>, order: u32) -> Array2<f64> {
        let (nx, ny) = f.dim();
        let mut out = Array2::zeros((nx, ny));
        let mut buf = vec![Complex::new(0.0, 0.0); nx];
        let half = nx / 2;
        for j in 0..ny {
            for i in 0..nx {
                buf[i] = Complex::new(f[[i, j]], 0.0);
            }
            self.fft.process(&mut buf);
            for (k, c) in buf.iter_mut().enumerate() {
                let wave = if k <= half { k as f64 } else { k as f64 - nx as f64 };
                let factor = if nx % 2 == 0 && k == half && order % 2 == 1 {
                    Complex::new(0.0, 0.0)
                } else {
                    Complex::new(0.0, wave).powu(order)
                };
                *c *= factor;
            }
            self.ifft.process(&mut buf);
            let scale = 1.0 / nx as f64;
            for i in 0..nx {
                out[[i, j]] = buf[i].re * scale;
            }
        }
        out
    }

    pub(crate) fn apply_dy(&self, f: &Array2<f64>) -> Array2<f64> {
        self.apply_y_stencils(f, &self.dy1)
    }

    pub(crate) fn apply_dyy(&self, f: &Array2<f64>) -> Array2<f64> {
        self.apply_y_stencils(f, &self.dy2)
    }

    /// Second y difference with the Neumann ghost closure `f_{-1} = f_1` at the wall.
    pub(crate) fn dyy_neumann(&self, f: &Array2<f64>) -> Array2<f64> {
        let mut out = self.apply_dyy(f);
        let h0 = self.y[1] - self.y[0];
        for i in 0..self.nx() {
            out[[i, 0]] = 2.0 * (f[[i, 1]] - f[[i, 0]]) / (h0 * h0);
        }
        out
    }

    fn apply_y_stencils(&self, f: &Array2<f64>, stencils: &[Stencil]) -> Array2<f64> {
        let (nx, ny) = f.dim();
        let src = f.as_slice().expect("standard layout");
        let mut out = vec![0.0; nx * ny];
        for i in 0..nx {
            let line = &src[i * ny..(i + 1) * ny];
            let row = &mut out[i * ny..(i + 1) * ny];
            for (o, s) in row.iter_mut().zip(stencils) {
                *o = s.apply(line);
            }
        }
        Array2::from_shape_vec((nx, ny), out).expect("shape")
    }

    /// Cumulative trapezoid integral from the wall, zero on the first row.
    pub(crate) fn cumulative_y(&self, f: &Array2<f64>) -> Array2<f64> {
        let (nx, ny) = f.dim();
        let mut out = Array2::zeros((nx, ny));
        for i in 0..nx {
            let mut acc = 0.0;
            for j in 1..ny {
                acc += 0.5 * (self.y[j] - self.y[j - 1]) * (f[[i, j - 1]] + f[[i, j]]);
                out[[i, j]] = acc;
            }
        }
        out
    }

    /// Interior three-point coefficients `(lower, diag, upper)` of `d^2/dy^2` at row `j`.
    pub(crate) fn dyy_coefficients(&self, j: usize) -> (f64, f64, f64) {
        let h1 = self.y[j] - self.y[j - 1];
        let h2 = self.y[j + 1] - self.y[j];
        let lower = 2.0 / (h1 * (h1 + h2));
        let upper = 2.0 / (h2 * (h1 + h2));
        (lower, -(lower + upper), upper)
    }
}
