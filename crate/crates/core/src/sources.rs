//! Compatibility sources for the regularized system.
//!
//! The tangential diffusion added by the regularization is compensated by
//! the Taylor polynomials
//! `r(t) = sum_{i < m} t^i / i! * d^i/dt^i (d_x rho, d_y rho, d_x u1, d_x h1)(0)`,
//! whose coefficients are time derivatives of the original (unregularized)
//! system at the initial instant.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::pde::{time_jet, DENSITY_FLOOR};
use crate::state::{Physics, State, DEFAULT_DELTA0};

/// Number of source components: `(r1, r2, r_u, r_h)`.
pub const COMPONENTS: usize = 4;

/// Taylor coefficients `c_i = d^i/dt^i (d_x rho, d_y rho, d_x u1, d_x h1)` at `t = 0`.
#[derive(Debug, Clone)]
pub struct SourceBundle {
    levels: Vec<[Field; COMPONENTS]>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl SourceBundle {
    pub fn from_levels(levels: Vec<[Field; COMPONENTS]>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidInput("source bundle needs at least one level".into()));
        }
        Ok(SourceBundle { levels })
    }

    /// Number of Taylor coefficients `m`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> &[Field; COMPONENTS] {
        &self.levels[i]
    }

    /// Replaces the zeroth coefficients, for initial data with exact derivatives.
    pub fn with_level0(mut self, level0: [Field; COMPONENTS]) -> Self {
        self.levels[0] = level0;
        self
    }

    /// `d^k/dt^k r(t) = sum_{i >= k} t^{i-k}/(i-k)! c_i`.
    pub fn derivative_at(&self, t: f64, k: usize) -> [Field; COMPONENTS] {
        let grid = self.levels[0][0].grid();
        let mut out: [Field; COMPONENTS] = std::array::from_fn(|_| Field::zeros(grid));
        for i in k..self.levels.len() {
            let coef = t.powi((i - k) as i32) / factorial(i - k);
            for (o, c) in out.iter_mut().zip(&self.levels[i]) {
                *o = o.axpy(coef, c);
            }
        }
        out
    }
}

/// Source values `(r1, r2, r_u, r_h)` at time `t`.
pub fn assemble_sources(bundle: &SourceBundle, t: f64) -> [Field; COMPONENTS] {
    bundle.derivative_at(t, 0)
}

/// Time derivatives `0..m` of `(d_x rho, d_y rho, d_x u1, d_x h1)` for the
/// unregularized system started from physical data `(rho0, u10, h10)`.
pub fn bootstrap_time_derivatives(
    rho0: &Field,
    u10: &Field,
    h10: &Field,
    m: usize,
    physics: Physics,
) -> Result<SourceBundle> {
    if m == 0 {
        return Err(Error::InvalidInput("source depth m must be >= 1".into()));
    }
    let min_rho = rho0.min();
    if !(min_rho >= DENSITY_FLOOR) {
        return Err(Error::DensityFloor { min_rho });
    }
    let state = State::from_physical(rho0, u10, h10, physics.with_eps(0.0), 0.0, DEFAULT_DELTA0)?;
    let jet = time_jet(&state, m - 1)?;
    let levels: Vec<[Field; COMPONENTS]> = (0..m)
        .map(|i| {
            if i == 0 {
                [rho0.dx(), rho0.dy(), u10.dx(), h10.dx()]
            } else {
                [jet.rho[i].dx(), jet.rho[i].dy(), jet.u[i].dx(), jet.h[i].dx()]
            }
        })
        .collect();
    for (i, lvl) in levels.iter().enumerate() {
        for f in lvl {
            f.ensure_finite(&format!("source level {i}"))?;
        }
    }
    SourceBundle::from_levels(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};

    #[test]
    fn level_zero_is_spatial_derivative() {
        let g = build_grid(GridSpec::new(32, 64, 12.0, 1.5, 0.01)).unwrap();
        let a = 0.05;
        let rho = Field::from_fn(&g, |x, y| 1.0 + a * (-y).exp() * x.cos());
        let one = Field::constant(&g, 1.0);
        let b = bootstrap_time_derivatives(&rho, &one, &one, 2, Physics::default()).unwrap();
        assert_eq!(b.depth(), 2);
        let r1 = &b.level(0)[0];
        assert_eq!((r1 - &rho.dx()).max_abs(), 0.0);
        // d/dt rho = a exp(-y) sin x, so d/dt d_x rho = a exp(-y) cos x
        let exact = Field::from_fn(&g, |x, y| a * (-y).exp() * x.cos());
        assert!((&b.level(1)[0] - &exact).max_abs() < 1e-4);
        assert!(b.level(1)[2].max_abs() < 1e-12);
    }

    #[test]
    fn taylor_polynomial_and_derivatives() {
        let g = build_grid(GridSpec::new(8, 16, 12.0, 1.0, 0.01)).unwrap();
        let lv = |c: f64| -> [Field; 4] { std::array::from_fn(|_| Field::constant(&g, c)) };
        let b = SourceBundle::from_levels(vec![lv(1.0), lv(2.0), lv(3.0)]).unwrap();
        let t = 0.5;
        let r = assemble_sources(&b, t);
        assert!((r[0].values()[[0, 0]] - (1.0 + 2.0 * t + 1.5 * t * t)).abs() < 1e-15);
        let d1 = b.derivative_at(t, 1);
        assert!((d1[3].values()[[2, 3]] - (2.0 + 3.0 * t)).abs() < 1e-15);
        let d3 = b.derivative_at(t, 3);
        assert_eq!(d3[1].max_abs(), 0.0);
    }

    #[test]
    fn rejects_vacuum() {
        let g = build_grid(GridSpec::new(8, 16, 12.0, 1.0, 0.01)).unwrap();
        let rho = Field::constant(&g, 0.05);
        let one = Field::constant(&g, 1.0);
        assert!(matches!(
            bootstrap_time_derivatives(&rho, &one, &one, 2, Physics::default()),
            Err(Error::DensityFloor { .. })
        ));
    }
}
