//! Weighted Lebesgue norms, conormal Sobolev norms and the composite data norms.
//!
//! Every conormal norm here is the square root of `sum ||Z^a f||^2` over an
//! index set, where `Z^a = d_t^{a_t} d_x^{a_x} (phi d_y)^{a_2}`. Time
//! derivatives come from a [`TimeJet`](crate::pde::TimeJet), so callers pass
//! the time levels of the quantity being measured.

use crate::error::{Error, Result};
use crate::field::{Field, MultiIndex};
use crate::pde::{time_jet, Unknown};
use crate::state::{Physics, State, DEFAULT_DELTA0};

/// `(1 + y)^l` on every row.
fn row_weights(f: &Field, l: f64) -> Vec<f64> {
    f.grid().y().iter().map(|&y| (1.0 + y).powf(l)).collect()
}

/// Squared `L^2_l` norm by grid quadrature.
pub fn weighted_l2_sq(f: &Field, l: f64) -> f64 {
    let g = f.grid();
    let w = row_weights(f, 2.0 * l);
    let mut total = 0.0;
    for row in f.values().rows() {
        for ((v, wy), wl) in row.iter().zip(g.wy()).zip(&w) {
            total += wy * wl * v * v;
        }
    }
    total * g.wx()
}

/// `sqrt(int (1+y)^{2l} f^2 dx dy)`.
pub fn weighted_l2(f: &Field, l: f64) -> f64 {
    weighted_l2_sq(f, l).sqrt()
}

/// `max (1+y)^l |f|` over grid nodes.
pub fn weighted_linf(f: &Field, l: f64) -> f64 {
    weighted_linf_below(f, l, f64::INFINITY)
}

/// [`weighted_linf`] restricted to nodes with `y <= y_cap`.
pub fn weighted_linf_below(f: &Field, l: f64, y_cap: f64) -> f64 {
    let w = row_weights(f, l);
    let y = f.grid().y();
    let mut m: f64 = 0.0;
    for row in f.values().rows() {
        for (j, v) in row.iter().enumerate() {
            if y[j] <= y_cap {
                m = m.max(w[j] * v.abs());
            }
        }
    }
    m
}

/// Which multi-indices enter a conormal norm of order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSet {
    /// All `|a| <= m`.
    Full,
    /// `|a| <= m` with at most `m - 1` tangential derivatives (the energy set).
    TangentialCapped,
    /// Tangential indices only, `|a_1| <= m`, no normal part.
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub m: usize,
    pub l: f64,
    pub set: IndexSet,
}

impl NormSpec {
    pub fn new(m: usize, l: f64, set: IndexSet) -> Self {
        NormSpec { m, l, set }
    }
    pub fn full(m: usize, l: f64) -> Self {
        Self::new(m, l, IndexSet::Full)
    }
}

/// Multi-indices of the set, ordered by `(t, x, z2)`.
///
/// For `m = 0` the capped set keeps the zero index.
pub fn multi_indices(m: usize, set: IndexSet) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for t in 0..=m {
        for x in 0..=m - t {
            let tan = t + x;
            let keep_tan = match set {
                IndexSet::TangentialCapped => tan < m.max(1),
                _ => true,
            };
            if !keep_tan {
                continue;
            }
            let z_max = match set {
                IndexSet::Tangential => 0,
                _ => m - tan,
            };
            for z2 in 0..=z_max {
                out.push(MultiIndex::new(t, x, z2));
            }
        }
    }
    out
}

/// `Z^a f` where `levels[k]` holds `d^k f/dt^k`.
pub fn zderiv_levels(levels: &[Field], alpha: MultiIndex) -> Result<Field> {
    let base = levels
        .get(alpha.t)
        .ok_or(Error::MissingTimeDerivative { needed: alpha.t, available: levels.len().saturating_sub(1) })?;
    let mut f = base.dx_n(alpha.x);
    for _ in 0..alpha.z2 {
        f = f.z2();
    }
    Ok(f)
}

/// `Z^a f` for a field, with time derivatives taken from the evolution
/// equations of `pde_context` when `alpha.t > 0`.
pub fn zderiv(f: &Field, alpha: MultiIndex, pde_context: Option<(&State, Unknown)>) -> Result<Field> {
    if alpha.t == 0 {
        return zderiv_levels(std::slice::from_ref(f), alpha);
    }
    let (state, which) = pde_context.ok_or(Error::MissingTimeDerivative { needed: alpha.t, available: 0 })?;
    let jet = time_jet(state, alpha.t)?;
    zderiv_levels(jet.levels(which), alpha)
}

/// Applies `visit(alpha, Z^alpha f)` over the index set, sharing work between indices.
fn for_each_conormal(
    levels: &[Field],
    m: usize,
    set: IndexSet,
    mut visit: impl FnMut(MultiIndex, &Field),
) -> Result<()> {
    let indices = multi_indices(m, set);
    let mut t_x: Vec<(usize, usize)> = indices.iter().map(|a| (a.t, a.x)).collect();
    t_x.dedup();
    for (t, x) in t_x {
        let z_max = indices.iter().filter(|a| a.t == t && a.x == x).map(|a| a.z2).max().unwrap_or(0);
        let mut f = zderiv_levels(levels, MultiIndex::new(t, x, 0))?;
        visit(MultiIndex::new(t, x, 0), &f);
        for z2 in 1..=z_max {
            f = f.z2();
            visit(MultiIndex::new(t, x, z2), &f);
        }
    }
    Ok(())
}

/// `sum ||Z^a f||^2_{L^2_l}` over the index set.
pub fn conormal_sq(levels: &[Field], spec: NormSpec) -> Result<f64> {
    let mut total = 0.0;
    for_each_conormal(levels, spec.m, spec.set, |_, f| total += weighted_l2_sq(f, spec.l))?;
    Ok(total)
}

/// `sum ||op(Z^a f)||^2_{L^2_l}` over the index set, for an operator applied
/// after the conormal derivative (such as `d_y Z^a`).
pub fn conormal_sq_with(levels: &[Field], spec: NormSpec, op: impl Fn(&Field) -> Field) -> Result<f64> {
    let mut total = 0.0;
    for_each_conormal(levels, spec.m, spec.set, |_, f| total += weighted_l2_sq(&op(f), spec.l))?;
    Ok(total)
}

/// `sum ||Z^a f||^2_{L^inf_l}` over the index set, optionally only on `y <= y_cap`.
pub fn conormal_sup_sq(levels: &[Field], spec: NormSpec, y_cap: f64) -> Result<f64> {
    let mut total = 0.0;
    for_each_conormal(levels, spec.m, spec.set, |_, f| {
        let s = weighted_linf_below(f, spec.l, y_cap);
        total += s * s;
    })?;
    Ok(total)
}

/// Square root of [`conormal_sq`].
pub fn conormal_norm(levels: &[Field], spec: NormSpec) -> Result<f64> {
    conormal_sq(levels, spec).map(f64::sqrt)
}

/// Conormal norm of one unknown of a state, time derivatives by substitution.
pub fn state_conormal_norm(state: &State, which: Unknown, spec: NormSpec) -> Result<f64> {
    let depth = if spec.set == IndexSet::TangentialCapped { spec.m.saturating_sub(1) } else { spec.m };
    let jet = time_jet(state, depth)?;
    conormal_norm(jet.levels(which), spec)
}

/// Levels of `d op f / dt^k` for a linear spatial operator `op`.
pub fn map_levels(levels: &[Field], op: impl Fn(&Field) -> Field) -> Vec<Field> {
    levels.iter().map(op).collect()
}

/// The two data norms: `b_bar` and `b_hat` (both as sums of squares), plus
/// `b_hat` with its sup part taken on `y <= 5` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BNorms {
    pub b_bar: f64,
    pub b_hat: f64,
    pub b_hat_near_wall: f64,
}

/// Height below which the restricted sup variant is evaluated.
pub const NEAR_WALL_HEIGHT: f64 = 5.0;

/// Data norms of physical fields `(rho, u1, h1)`, with time derivatives from
/// the unregularized equations with viscosity `mu` and resistivity `kappa`.
pub fn b_norms(rho: &Field, u1: &Field, h1: &Field, m: usize, l: f64, physics: Physics) -> Result<BNorms> {
    if m == 0 {
        return Err(Error::InvalidInput("data norms need m >= 1".into()));
    }
    let state = State::from_physical(rho, u1, h1, physics.with_eps(0.0), 0.0, DEFAULT_DELTA0)?;
    let depth = 2 * m - 1;
    let jet = time_jet(&state, depth)?;
    let one = Field::constant(&state.grid, 1.0);
    // deviations (rho - 1, u1 - 1, h1 - 1); higher levels coincide with the shifted jet
    let u_dev: Vec<Field> = jet.u.iter().enumerate().map(|(k, f)| if k == 0 { u1 - &one } else { f.clone() }).collect();
    let full_m = NormSpec::full(m, l);
    let full_m1 = NormSpec::full(m - 1, l);

    let mut b_bar = 0.0;
    for lv in [&jet.rho, &u_dev, &jet.h] {
        b_bar += conormal_sq(lv, full_m)?;
    }
    for lv in [&jet.rho, &u_dev, &jet.h] {
        b_bar += conormal_sq(&map_levels(lv, Field::dy), full_m1)?;
    }
    b_bar += conormal_sup_sq(&map_levels(&jet.rho, Field::dy), NormSpec::full(1, 1.0), f64::INFINITY)?;

    let rho_x = map_levels(&jet.rho, Field::dx);
    let rho_y = map_levels(&jet.rho, Field::dy);
    let u_x = map_levels(&jet.u, Field::dx);
    let h_x = map_levels(&jet.h, Field::dx);
    let rho_xxy = map_levels(&jet.rho, |f| f.dxx().dy());
    let rho_yyy = map_levels(&jet.rho, |f| f.dyy().dy());
    let mut b_hat = 0.0;
    let mut sup_full = 0.0;
    let mut sup_near = 0.0;
    for i in 0..m {
        for lv in [&rho_x, &rho_y, &u_x, &h_x] {
            b_hat += conormal_sq(&lv[i..], full_m)?;
            b_hat += conormal_sq(&map_levels(&lv[i..], Field::dy), full_m1)?;
        }
        for lv in [&rho_xxy, &rho_yyy] {
            sup_full += conormal_sup_sq(&lv[i..], NormSpec::full(1, 0.0), f64::INFINITY)?;
            sup_near += conormal_sup_sq(&lv[i..], NormSpec::full(1, 0.0), NEAR_WALL_HEIGHT)?;
        }
    }
    Ok(BNorms { b_bar, b_hat: b_hat + sup_full, b_hat_near_wall: b_hat + sup_near })
}
