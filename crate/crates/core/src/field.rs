//! Scalar grid functions and the conormal multi-index.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Values of a scalar function on every grid node, indexed `[i, j]` for `(x_i, y_j)`.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Array2<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Field { grid: grid.clone(), values: grid.zeros() }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Field { grid: grid.clone(), values: Array2::from_elem((grid.nx(), grid.ny()), c) }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = grid.zeros();
        for (i, &x) in grid.x().iter().enumerate() {
            for (j, &y) in grid.y().iter().enumerate() {
                values[[i, j]] = f(x, y);
            }
        }
        Field { grid: grid.clone(), values }
    }

    /// Function of y only, constant along x.
    pub fn from_profile(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |_, y| f(y))
    }

    pub fn from_array(grid: &Arc<Grid>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nx(), grid.ny()) {
            return Err(Error::InvalidInput(format!(
                "array shape {:?} does not match grid ({}, {})",
                values.dim(),
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(Field { grid: grid.clone(), values: values.as_standard_layout().into_owned() })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }
    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    fn wrap(&self, values: Array2<f64>) -> Field {
        Field { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        self.wrap(self.values.mapv(f))
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert!(self.same_grid(other));
        let mut out = self.values.clone();
        Zip::from(&mut out).and(&other.values).for_each(|a, &b| *a = f(*a, b));
        self.wrap(out)
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn scale(&self, c: f64) -> Field {
        self.wrap(&self.values * c)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn dx(&self) -> Field {
        self.wrap(self.grid.apply_dx(&self.values))
    }
    pub fn dxx(&self) -> Field {
        self.wrap(self.grid.apply_dxx(&self.values))
    }
    pub fn dx_n(&self, n: usize) -> Field {
        (0..n).fold(self.clone(), |f, _| f.dx())
    }
    pub fn dy(&self) -> Field {
        self.wrap(self.grid.apply_dy(&self.values))
    }
    pub fn dyy(&self) -> Field {
        self.wrap(self.grid.apply_dyy(&self.values))
    }
    /// Second y derivative with the zero-flux ghost closure on the wall row.
    pub fn dyy_neumann(&self) -> Field {
        self.wrap(self.grid.dyy_neumann(&self.values))
    }
    /// `phi(y) d/dy`, exactly zero on the wall row.
    pub fn z2(&self) -> Field {
        let mut out = self.grid.apply_dy(&self.values);
        for mut row in out.rows_mut() {
            for (o, &p) in row.iter_mut().zip(self.grid.phi()) {
                *o *= p;
            }
        }
        self.wrap(out)
    }
    /// `int_0^y f dy'` by the cumulative trapezoid rule.
    pub fn cumulative_y(&self) -> Field {
        self.wrap(self.grid.cumulative_y(&self.values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
    pub fn ensure_finite(&self, name: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(name.to_string()))
        }
    }
    /// Largest absolute value on the row `y = y_max`.
    pub fn far_field_max(&self) -> f64 {
        let last = self.grid.ny() - 1;
        self.values.column(last).iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
    /// Largest absolute value on the wall row.
    pub fn wall_max(&self) -> f64 {
        self.values.column(0).iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                debug_assert!(self.same_grid(rhs), "fields on different grids");
                self.wrap(&self.values $op &rhs.values)
            }
        }
        impl $trait<Field> for Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Field> for Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                (&self).$method(rhs)
            }
        }
        impl $trait<Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                self.$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, c: f64) -> Field {
        self.scale(c)
    }
}

impl Mul<f64> for Field {
    type Output = Field;
    fn mul(self, c: f64) -> Field {
        self.scale(c)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

/// Pointwise quotient.
pub fn divide(num: &Field, den: &Field) -> Field {
    num.zip_map(den, |a, b| a / b)
}

/// Conormal multi-index: `t` time derivatives, `x` tangential derivatives and
/// `z2` applications of `phi(y) d/dy`, applied in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex {
    pub t: usize,
    pub x: usize,
    pub z2: usize,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex { t: 0, x: 0, z2: 0 };

    pub fn new(t: usize, x: usize, z2: usize) -> Self {
        MultiIndex { t, x, z2 }
    }
    /// Tangential index `(t, x)` with no normal part.
    pub fn tangential(t: usize, x: usize) -> Self {
        MultiIndex { t, x, z2: 0 }
    }
    pub fn order(&self) -> usize {
        self.t + self.x + self.z2
    }
    pub fn tangential_order(&self) -> usize {
        self.t + self.x
    }
    pub fn is_zero(&self) -> bool {
        self.order() == 0
    }
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.t <= other.t && self.x <= other.x && self.z2 <= other.z2
    }
    pub fn minus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex { t: self.t - other.t, x: self.x - other.x, z2: self.z2 - other.z2 }
    }
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex { t: self.t + other.t, x: self.x + other.x, z2: self.z2 + other.z2 }
    }
    /// Every `beta <= self`, in lexicographic order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for t in 0..=self.t {
            for x in 0..=self.x {
                for z2 in 0..=self.z2 {
                    out.push(MultiIndex { t, x, z2 });
                }
            }
        }
        out
    }
    /// Product of binomial coefficients `C(self, beta)`.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        binomial(self.t, beta.t) * binomial(self.x, beta.x) * binomial(self.z2, beta.z2)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
