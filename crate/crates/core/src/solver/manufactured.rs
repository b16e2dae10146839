//! Manufactured solutions built from separable analytic terms.
//!
//! Each unknown is a sum of `amp * T(t) X(x) Y(y)` terms with closed-form
//! derivatives and y-antiderivatives, so the normal components, the stream
//! function and the forcing that makes the fields an exact solution are all
//! available pointwise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::state::{Physics, State};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// `exp(rate t)`
    Exp(f64),
    /// `1 + amp sin(freq t)`
    OnePlusSin {
        amp: f64,
        freq: f64,
    },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Exp(r) => (r * t).exp(),
            TimeProfile::OnePlusSin { amp, freq } => 1.0 + amp * (freq * t).sin(),
        }
    }
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 0.0,
            TimeProfile::Exp(r) => r * (r * t).exp(),
            TimeProfile::OnePlusSin { amp, freq } => amp * freq * (freq * t).cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XProfile {
    One,
    Cos(f64),
    Sin(f64),
}

impl XProfile {
    /// Value and first two derivatives.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        match *self {
            XProfile::One => [1.0, 0.0, 0.0],
            XProfile::Cos(k) => [(k * x).cos(), -k * (k * x).sin(), -k * k * (k * x).cos()],
            XProfile::Sin(k) => [(k * x).sin(), k * (k * x).cos(), -k * k * (k * x).sin()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YProfile {
    /// `exp(-y^2)`
    Gauss,
    /// `y exp(-y^2)`
    YGauss,
    /// `(1 - 2 y^2) exp(-y^2)`, zero mean on the half line
    Hermite2,
    /// `exp(-y)`
    Exp,
    /// `y exp(-y)`
    YExp,
}

impl YProfile {
    /// Value, first and second derivative, and `int_0^y`.
    pub fn eval(&self, y: f64) -> [f64; 4] {
        let g = (-y * y).exp();
        let e = (-y).exp();
        match self {
            YProfile::Gauss => {
                [g, -2.0 * y * g, (4.0 * y * y - 2.0) * g, 0.5 * std::f64::consts::PI.sqrt() * libm::erf(y)]
            }
            YProfile::YGauss => [y * g, (1.0 - 2.0 * y * y) * g, (4.0 * y * y * y - 6.0 * y) * g, 0.5 * (1.0 - g)],
            YProfile::Hermite2 => [
                (1.0 - 2.0 * y * y) * g,
                (4.0 * y * y * y - 6.0 * y) * g,
                (-8.0 * y.powi(4) + 24.0 * y * y - 6.0) * g,
                y * g,
            ],
            YProfile::Exp => [e, -e, e, 1.0 - e],
            YProfile::YExp => [y * e, (1.0 - y) * e, (y - 2.0) * e, 1.0 - (1.0 + y) * e],
        }
    }
}

/// `amp T(t) X(x) Y(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separable {
    pub amp: f64,
    pub time: TimeProfile,
    pub x: XProfile,
    pub y: YProfile,
}

impl Separable {
    pub fn new(amp: f64, time: TimeProfile, x: XProfile, y: YProfile) -> Self {
        Separable { amp, time, x, y }
    }
}

/// Pointwise jet of an analytic field.
#[derive(Debug, Clone, Copy, Default)]
pub struct Point {
    pub f: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub yy: f64,
    /// `int_0^y f`
    pub anti: f64,
    /// `int_0^y d_x f`
    pub anti_x: f64,
}

fn evaluate(terms: &[Separable], t: f64, x: f64, y: f64) -> Point {
    let mut p = Point::default();
    for s in terms {
        let tv = s.amp * s.time.value(t);
        let td = s.amp * s.time.derivative(t);
        let [xv, xd, xdd] = s.x.eval(x);
        let [yv, yd, ydd, ya] = s.y.eval(y);
        p.f += tv * xv * yv;
        p.t += td * xv * yv;
        p.x += tv * xd * yv;
        p.y += tv * xv * yd;
        p.xx += tv * xdd * yv;
        p.yy += tv * xv * ydd;
        p.anti += tv * xv * ya;
        p.anti_x += tv * xd * ya;
    }
    p
}

/// Analytic shifted fields `(rho - 1, u, h)`, each a sum of separable terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Manufactured {
    pub rho: Vec<Separable>,
    pub u: Vec<Separable>,
    pub h: Vec<Separable>,
}

/// Pointwise values of all three unknowns and the derived components.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub rho: Point,
    pub u: Point,
    pub h: Point,
}

impl Sample {
    pub fn v(&self) -> f64 {
        -self.u.anti_x
    }
    pub fn g(&self) -> f64 {
        -self.h.anti_x
    }
    pub fn psi(&self) -> f64 {
        self.h.anti
    }
}

/// Time instants at which boundary compatibility is checked.
const CHECK_TIMES: [f64; 4] = [0.0, 0.37, 1.0, 2.5];
/// Allowed size of the fields on the truncation row.
pub const FAR_FIELD_TOLERANCE: f64 = 1e-4;

impl Manufactured {
    /// The steady profile `(0, exp(-y), 0)`.
    pub fn equilibrium() -> Self {
        Manufactured {
            rho: vec![],
            u: vec![Separable::new(1.0, TimeProfile::Constant, XProfile::One, YProfile::Exp)],
            h: vec![],
        }
    }

    /// Smooth time-dependent fields satisfying all boundary conditions, used in convergence studies.
    pub fn standard() -> Self {
        Manufactured {
            rho: vec![Separable::new(0.2, TimeProfile::Exp(-1.0), XProfile::Cos(1.0), YProfile::Gauss)],
            u: vec![Separable::new(
                0.5,
                TimeProfile::OnePlusSin { amp: 0.5, freq: 2.0 },
                XProfile::Sin(1.0),
                YProfile::YGauss,
            )],
            h: vec![Separable::new(0.3, TimeProfile::Exp(-0.5), XProfile::Cos(1.0), YProfile::Hermite2)],
        }
    }

    pub fn sample(&self, t: f64, x: f64, y: f64) -> Sample {
        Sample { rho: evaluate(&self.rho, t, x, y), u: evaluate(&self.u, t, x, y), h: evaluate(&self.h, t, x, y) }
    }

    /// Rejects fields that violate the wall conditions or do not decay by `y_max`.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let y_max = grid.spec().y_max;
        for &t in &CHECK_TIMES {
            for &x in grid.x() {
                let wall = self.sample(t, x, 0.0);
                if wall.rho.y.abs() > 1e-12 {
                    return Err(Error::IncompatibleManufactured(format!(
                        "d_y rho != 0 at the wall (t = {t}, x = {x})"
                    )));
                }
                if wall.h.y.abs() > 1e-12 {
                    return Err(Error::IncompatibleManufactured(format!("d_y h != 0 at the wall (t = {t}, x = {x})")));
                }
                if wall.u.t.abs() > 1e-12 {
                    return Err(Error::IncompatibleManufactured(format!(
                        "wall velocity is not constant in time (t = {t}, x = {x})"
                    )));
                }
                let top = self.sample(t, x, y_max);
                let worst = top.rho.f.abs().max(top.u.f.abs()).max(top.h.f.abs()).max(top.psi().abs());
                if worst > FAR_FIELD_TOLERANCE {
                    return Err(Error::IncompatibleManufactured(format!(
                        "fields do not decay at y_max = {y_max} (|w| = {worst:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Shifted state sampled at time `t`, secondary fields derived numerically.
    pub fn state(&self, grid: &Arc<Grid>, t: f64, physics: Physics, delta0: f64) -> Result<State> {
        let rho = Field::from_fn(grid, |x, y| evaluate(&self.rho, t, x, y).f);
        let u = Field::from_fn(grid, |x, y| evaluate(&self.u, t, x, y).f);
        let h = Field::from_fn(grid, |x, y| evaluate(&self.h, t, x, y).f);
        State::new(rho, u, h, physics, t, delta0)
    }

    /// Exact `(rho, u, h, v, g, psi)` at time `t`.
    pub fn exact_fields(&self, grid: &Arc<Grid>, t: f64) -> [Field; 6] {
        let pick = |k: usize| {
            Field::from_fn(grid, |x, y| {
                let s = self.sample(t, x, y);
                [s.rho.f, s.u.f, s.h.f, s.v(), s.g(), s.psi()][k]
            })
        };
        [pick(0), pick(1), pick(2), pick(3), pick(4), pick(5)]
    }

    /// Exact right-hand sides of the shifted equations (no sources) at one point.
    pub fn exact_rhs(&self, physics: Physics, t: f64, x: f64, y: f64) -> [f64; 3] {
        let s = self.sample(t, x, y);
        let (r, u, h) = (s.rho, s.u, s.h);
        let e = (-y).exp();
        let density = 1.0 + r.f;
        let big_u = u.f + 1.0 - e;
        let big_h = 1.0 + h.f;
        let shear = u.y + e;
        let (v, g) = (s.v(), s.g());
        let Physics { mu, kappa, eps } = physics;
        let d_rho = -big_u * r.x - v * r.y + eps * (r.xx + r.yy);
        let d_u = (-density * big_u * u.x - density * v * shear + eps * u.xx + mu * (u.yy - e) + big_h * h.x + g * h.y)
            / density;
        let d_h = -big_u * h.x - v * h.y + big_h * u.x + g * shear + eps * h.xx + kappa * h.yy;
        [d_rho, d_u, d_h]
    }

    /// Forcing that makes the fields an exact solution: `d_t w - rhs(w)`.
    pub fn forcing_point(&self, physics: Physics, t: f64, x: f64, y: f64) -> [f64; 3] {
        let s = self.sample(t, x, y);
        let rhs = self.exact_rhs(physics, t, x, y);
        [s.rho.t - rhs[0], s.u.t - rhs[1], s.h.t - rhs[2]]
    }

    /// Exact time derivatives `(d_t rho, d_t u, d_t h)` on the grid.
    pub fn time_derivatives(&self, grid: &Arc<Grid>, t: f64) -> [Field; 3] {
        let pick = |k: usize| {
            Field::from_fn(grid, |x, y| {
                let s = self.sample(t, x, y);
                [s.rho.t, s.u.t, s.h.t][k]
            })
        };
        [pick(0), pick(1), pick(2)]
    }
}

/// Extra right-hand side added to the shifted equations.
pub trait Forcing: Send + Sync + std::fmt::Debug {
    fn eval(&self, grid: &Arc<Grid>, t: f64) -> [Field; 3];
}

/// Forcing of a manufactured solution for fixed physical parameters.
#[derive(Debug, Clone)]
pub struct ManufacturedForcing {
    pub solution: Manufactured,
    pub physics: Physics,
}

impl Forcing for ManufacturedForcing {
    fn eval(&self, grid: &Arc<Grid>, t: f64) -> [Field; 3] {
        let mut out = [grid.zeros(), grid.zeros(), grid.zeros()];
        for (i, &x) in grid.x().iter().enumerate() {
            for (j, &y) in grid.y().iter().enumerate() {
                let f = self.solution.forcing_point(self.physics, t, x, y);
                for k in 0..3 {
                    out[k][[i, j]] = f[k];
                }
            }
        }
        out.map(|a| Field::from_array(grid, a).expect("grid shape"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let h = 1e-5;
        for p in [YProfile::Gauss, YProfile::YGauss, YProfile::Hermite2, YProfile::Exp, YProfile::YExp] {
            for &y in &[0.3, 1.1, 2.0] {
                let [f, d, dd, a] = p.eval(y);
                let fp = p.eval(y + h)[0];
                let fm = p.eval(y - h)[0];
                assert!(((fp - fm) / (2.0 * h) - d).abs() < 1e-8, "{p:?}");
                assert!(((fp - 2.0 * f + fm) / (h * h) - dd).abs() < 1e-4, "{p:?}");
                let ap = p.eval(y + h)[3];
                let am = p.eval(y - h)[3];
                assert!(((ap - am) / (2.0 * h) - f).abs() < 1e-8, "{p:?}");
                assert!(a.is_finite());
            }
            assert_eq!(p.eval(0.0)[3], 0.0);
        }
    }

    #[test]
    fn equilibrium_has_zero_forcing() {
        let m = Manufactured::equilibrium();
        for &y in &[0.0, 0.5, 3.0] {
            let f = m.forcing_point(Physics::default(), 0.3, 1.0, y);
            assert_eq!(f, [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn validation() {
        let g = build_grid(GridSpec::new(16, 32, 12.0, 2.0, 0.01)).unwrap();
        assert!(Manufactured::standard().validate(&g).is_ok());
        assert!(Manufactured::equilibrium().validate(&g).is_ok());
        let bad = Manufactured {
            rho: vec![Separable::new(0.1, TimeProfile::Constant, XProfile::One, YProfile::YGauss)],
            u: vec![],
            h: vec![],
        };
        assert!(bad.validate(&g).is_err());
        let moving_wall = Manufactured {
            rho: vec![],
            u: vec![Separable::new(0.1, TimeProfile::Exp(-1.0), XProfile::One, YProfile::Gauss)],
            h: vec![],
        };
        assert!(moving_wall.validate(&g).is_err());
    }
}
