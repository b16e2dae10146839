//! Time derivatives obtained by substituting the evolution equations.
//!
//! `time_jet` returns `d^k/dt^k` of every unknown for `k = 0..=depth`. Each
//! level is produced from the lower ones by differentiating the equations in
//! time with the Leibniz rule, so no time differencing of stored snapshots is
//! involved. With `eps = 0` and no sources this is the jet of the original
//! (unregularized) system.

use crate::error::{Error, Result};
use crate::field::{binomial, Field};
use crate::state::{background, State};

/// Lower bound on the density below which the velocity equation cannot be solved for `du/dt`.
pub const DENSITY_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unknown {
    Rho,
    U,
    H,
    V,
    G,
    Psi,
}

/// Time derivatives of all unknowns at one instant; index `k` holds `d^k/dt^k`.
#[derive(Debug, Clone)]
pub struct TimeJet {
    pub rho: Vec<Field>,
    pub u: Vec<Field>,
    pub h: Vec<Field>,
    pub v: Vec<Field>,
    pub g: Vec<Field>,
    pub psi: Vec<Field>,
}

impl TimeJet {
    pub fn depth(&self) -> usize {
        self.rho.len() - 1
    }

    pub fn levels(&self, which: Unknown) -> &[Field] {
        match which {
            Unknown::Rho => &self.rho,
            Unknown::U => &self.u,
            Unknown::H => &self.h,
            Unknown::V => &self.v,
            Unknown::G => &self.g,
            Unknown::Psi => &self.psi,
        }
    }

    pub fn level(&self, which: Unknown, k: usize) -> Result<&Field> {
        self.levels(which).get(k).ok_or(Error::MissingTimeDerivative { needed: k, available: self.depth() })
    }
}

/// `sum_j C(k, j) a[j] b[k - j]`.
pub(crate) fn leibniz(a: &[Field], b: &[Field], k: usize) -> Field {
    let mut acc = &a[0] * &b[k];
    for j in 1..=k {
        acc = acc + (&a[j] * &b[k - j]) * binomial(k, j);
    }
    acc
}

/// Computes `d^k/dt^k` of every unknown for `k <= depth`.
pub fn time_jet(state: &State, depth: usize) -> Result<TimeJet> {
    let grid = &state.grid;
    let p = state.physics;
    let density = state.density();
    let min_rho = density.min();
    if !(min_rho >= DENSITY_FLOOR) {
        return Err(Error::DensityFloor { min_rho });
    }
    let bg = background(grid);
    let one = Field::constant(grid, 1.0);
    let sources = match (&state.sources, p.eps > 0.0) {
        (Some(b), true) => Some(b.clone()),
        _ => None,
    };

    let mut jet = TimeJet {
        rho: vec![state.rho.clone()],
        u: vec![state.u.clone()],
        h: vec![state.h.clone()],
        v: vec![state.v.clone()],
        g: vec![state.g.clone()],
        psi: vec![state.psi.clone()],
    };
    // physical coefficients and first derivatives, per level
    let mut big_rho = vec![density];
    let mut big_u = vec![&state.u + &one - &bg];
    let mut big_h = vec![state.h.map(|v| v + 1.0)];
    let mut rho_x = vec![state.rho.dx()];
    let mut rho_y = vec![state.rho.dy()];
    let mut u_x = vec![state.u.dx()];
    let mut shear = vec![(&state.u - &bg).dy()];
    let mut h_x = vec![state.h.dx()];
    let mut h_y = vec![state.h.dy()];
    let mut rho_u = vec![&big_rho[0] * &big_u[0]];
    let mut rho_v = vec![&big_rho[0] * &state.v];

    for k in 0..depth {
        let src = sources.as_ref().map(|b| b.derivative_at(state.time, k));

        // density
        let mut d_rho = -(leibniz(&big_u, &rho_x, k) + leibniz(&jet.v, &rho_y, k));
        if p.eps > 0.0 {
            let r = &jet.rho[k];
            let diff = r.dxx() + r.dyy_neumann();
            d_rho = d_rho + diff * p.eps;
            if let Some(s) = &src {
                d_rho = d_rho - (s[0].dx() + s[1].dy()) * p.eps;
            }
        }

        // velocity: rho du/dt = N, differentiated k times
        let u_k = if k == 0 { &jet.u[0] - &bg } else { jet.u[k].clone() };
        let mut n = -(leibniz(&rho_u, &u_x, k) + leibniz(&rho_v, &shear, k))
            + leibniz(&big_h, &h_x, k)
            + leibniz(&jet.g, &h_y, k)
            + u_k.dyy() * p.mu;
        if p.eps > 0.0 {
            n = n + jet.u[k].dxx() * p.eps;
            if let Some(s) = &src {
                n = n - s[2].dx() * p.eps;
            }
        }
        #[allow(clippy::needless_range_loop)]
        for j in 1..=k {
            n = n - (&big_rho[j] * &jet.u[k + 1 - j]) * binomial(k, j);
        }
        let d_u = crate::field::divide(&n, &big_rho[0]);

        // magnetic field
        let h_k = &jet.h[k];
        let mut d_h = -(leibniz(&big_u, &h_x, k) + leibniz(&jet.v, &h_y, k))
            + leibniz(&big_h, &u_x, k)
            + leibniz(&jet.g, &shear, k)
            + h_k.dyy_neumann() * p.kappa;
        if p.eps > 0.0 {
            d_h = d_h + h_k.dxx() * p.eps;
            if let Some(s) = &src {
                d_h = d_h - s[3].dx() * p.eps;
            }
        }

        let level = k + 1;
        let du_x = d_u.dx();
        let dh_x = d_h.dx();
        jet.v.push(-du_x.cumulative_y());
        jet.g.push(-dh_x.cumulative_y());
        jet.psi.push(d_h.cumulative_y());
        rho_x.push(d_rho.dx());
        rho_y.push(d_rho.dy());
        u_x.push(du_x);
        shear.push(d_u.dy());
        h_x.push(dh_x);
        h_y.push(d_h.dy());
        big_rho.push(d_rho.clone());
        big_u.push(d_u.clone());
        big_h.push(d_h.clone());
        jet.rho.push(d_rho);
        jet.u.push(d_u);
        jet.h.push(d_h);
        rho_u.push(leibniz(&big_rho, &big_u, level));
        rho_v.push(leibniz(&big_rho, &jet.v, level));
    }
    Ok(jet)
}

/// `d/dt` of one unknown from the evolution equations at the state's time.
pub fn time_derivative_via_pde(state: &State, which: Unknown) -> Result<Field> {
    let jet = time_jet(state, 1)?;
    Ok(jet.levels(which)[1].clone())
}
