//! Shifted boundary-layer state and its diagnostic fields.
//!
//! The evolved unknowns are the shifted density `rho - 1`, velocity
//! `u1 - 1 + exp(-y)` and magnetic field `h1 - 1`. The normal components
//! and the magnetic stream function are recovered from the divergence-free
//! constraint by integrating from the wall.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::sources::SourceBundle;

/// Viscosity `mu`, resistivity `kappa` and tangential regularization `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub mu: f64,
    pub kappa: f64,
    pub eps: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Physics { mu: 1.0, kappa: 1.0, eps: 0.01 }
    }
}

impl Physics {
    pub fn new(mu: f64, kappa: f64, eps: f64) -> Self {
        Physics { mu, kappa, eps }
    }
    pub fn with_eps(self, eps: f64) -> Self {
        Physics { eps, ..self }
    }
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("kappa", self.kappa)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidInput(format!("eps must be >= 0, got {}", self.eps)));
        }
        Ok(())
    }
}

/// Default lower bound `delta0` on the magnetic field.
pub const DEFAULT_DELTA0: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct State {
    pub grid: Arc<Grid>,
    pub rho: Field,
    pub u: Field,
    pub h: Field,
    pub v: Field,
    pub g: Field,
    pub psi: Field,
    pub physics: Physics,
    pub time: f64,
    pub delta0: f64,
    pub sources: Option<Arc<SourceBundle>>,
}

/// The profile `exp(-y)` carried by the shifted velocity.
pub fn background(grid: &Arc<Grid>) -> Field {
    Field::from_profile(grid, |y| (-y).exp())
}

/// Fills `v`, `g` and `psi` from the primary unknowns.
pub fn derive_secondary(mut state: State) -> State {
    state.v = -state.u.dx().cumulative_y();
    state.g = -state.h.dx().cumulative_y();
    state.psi = state.h.cumulative_y();
    state
}

impl State {
    /// Builds a state from shifted unknowns and derives the secondary fields.
    pub fn new(rho: Field, u: Field, h: Field, physics: Physics, time: f64, delta0: f64) -> Result<State> {
        for (name, f) in [("rho", &rho), ("u", &u), ("h", &h)] {
            f.ensure_finite(name)?;
        }
        if !rho.same_grid(&u) || !rho.same_grid(&h) {
            return Err(Error::GridMismatch);
        }
        if !(delta0 > 0.0) {
            return Err(Error::InvalidInput(format!("delta0 must be positive, got {delta0}")));
        }
        let grid = rho.grid().clone();
        let zero = Field::zeros(&grid);
        Ok(derive_secondary(State {
            grid,
            rho,
            u,
            h,
            v: zero.clone(),
            g: zero.clone(),
            psi: zero,
            physics,
            time,
            delta0,
            sources: None,
        }))
    }

    /// Builds a state from physical density, tangential velocity and tangential field.
    pub fn from_physical(
        rho: &Field,
        u1: &Field,
        h1: &Field,
        physics: Physics,
        time: f64,
        delta0: f64,
    ) -> Result<State> {
        let grid = rho.grid().clone();
        let shifted_u = u1 - &Field::constant(&grid, 1.0) + background(&grid);
        State::new(rho.map(|r| r - 1.0), shifted_u, h1.map(|v| v - 1.0), physics, time, delta0)
    }

    /// The steady profile `(rho, u1, h1) = (1, 1, 1)`, i.e. shifted `(0, exp(-y), 0)`.
    pub fn equilibrium(grid: &Arc<Grid>, physics: Physics, delta0: f64) -> State {
        let zero = Field::zeros(grid);
        State::new(zero.clone(), background(grid), zero, physics, 0.0, delta0).expect("finite equilibrium")
    }

    pub fn with_sources(mut self, sources: Option<Arc<SourceBundle>>) -> State {
        self.sources = sources;
        self
    }

    pub fn density(&self) -> Field {
        self.rho.map(|r| r + 1.0)
    }
    /// Tangential velocity `u1 = u + 1 - exp(-y)`.
    pub fn velocity(&self) -> Field {
        &self.u + &Field::constant(&self.grid, 1.0) - background(&self.grid)
    }
    /// Tangential magnetic field `h1 = h + 1`.
    pub fn magnetic(&self) -> Field {
        self.h.map(|v| v + 1.0)
    }
    /// `d/dy (u - exp(-y))`, the wall shear of the physical velocity.
    pub fn shear(&self) -> Field {
        (&self.u - &background(&self.grid)).dy()
    }

    /// Same state with a different time stamp.
    pub fn at_time(mut self, time: f64) -> State {
        self.time = time;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.u.is_finite() && self.h.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn secondary_fields_vanish_on_wall() {
        let g = build_grid(GridSpec::new(16, 64, 12.0, 2.0, 0.01)).unwrap();
        let u = Field::from_fn(&g, |x, y| x.sin() * y * (-y * y).exp());
        let h = Field::from_fn(&g, |x, y| x.cos() * (1.0 - 2.0 * y * y) * (-y * y).exp());
        let s = State::new(Field::zeros(&g), u, h, Physics::default(), 0.0, 0.25).unwrap();
        assert_eq!(s.v.wall_max(), 0.0);
        assert_eq!(s.g.wall_max(), 0.0);
        assert_eq!(s.psi.wall_max(), 0.0);
        // psi = y exp(-y^2) cos x vanishes far away
        assert!(s.psi.far_field_max() < 1e-3);
        let j = 20;
        let y = g.y()[j];
        assert_abs_diff_eq!(s.psi.values()[[0, j]], y * (-y * y).exp(), epsilon = 2e-3);
    }

    #[test]
    fn physical_round_trip() {
        let g = build_grid(GridSpec::new(8, 16, 12.0, 1.0, 0.01)).unwrap();
        let rho = Field::constant(&g, 1.2);
        let u1 = Field::from_profile(&g, |y| 1.0 - (-y).exp());
        let h1 = Field::constant(&g, 0.9);
        let s = State::from_physical(&rho, &u1, &h1, Physics::default(), 0.0, 0.25).unwrap();
        assert_abs_diff_eq!(s.rho.max_abs(), 0.2, epsilon = 1e-15);
        assert!(s.u.max_abs() < 1e-15);
        assert_abs_diff_eq!((s.velocity() - u1).max_abs(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        let g = build_grid(GridSpec::new(8, 16, 12.0, 1.0, 0.01)).unwrap();
        let bad = Field::constant(&g, f64::NAN);
        let z = Field::zeros(&g);
        assert!(State::new(bad, z.clone(), z, Physics::default(), 0.0, 0.25).is_err());
    }
}
