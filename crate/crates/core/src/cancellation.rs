//! Stream-function good unknowns and their evolution equations.
//!
//! For a tangential index `a = (t, x)` the good unknowns are
//! `w_m = Z^a w - eta_w Z^a psi` with `eta_rho = d_y rho / (h + 1)`,
//! `eta_u = d_y (u - e^{-y}) / (h + 1)` and `eta_h = d_y h / (h + 1)`. The
//! combination removes `Z^a v`, which costs one tangential derivative, from
//! the differentiated equations. The residuals below evaluate each evolution
//! equation term by term, with the commutator sums written out from their
//! definitions, and time derivatives obtained by substitution.

use crate::error::{Error, Result};
use crate::field::{divide, Field, MultiIndex};
use crate::inequalities::{InequalityReport, SHARP_TOLERANCE};
use crate::norms::{weighted_l2, weighted_linf, zderiv_levels};
use crate::pde::{leibniz, time_jet, TimeJet};
use crate::state::{background, State};

/// Deepest time-derivative count allowed in the tangential index of an
/// evolution-equation residual, which needs one more time level.
pub const MAX_TIME_ORDER: usize = 1;

/// Which good unknown (or evolution equation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GoodField {
    Rho,
    U,
    H,
}

impl GoodField {
    pub const ALL: [GoodField; 3] = [GoodField::Rho, GoodField::U, GoodField::H];

    pub fn name(&self) -> &'static str {
        match self {
            GoodField::Rho => "rho_m",
            GoodField::U => "u_m",
            GoodField::H => "h_m",
        }
    }
}

/// Sign given to the `Z^a psi (transport) eta` term in the density and
/// magnetic equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportSign {
    /// Minus, as obtained by expanding the transport operator on `eta Z^a psi`.
    #[default]
    Derived,
    /// Plus, as the term is sometimes written.
    AsPrinted,
}

#[derive(Debug, Clone)]
pub struct GoodUnknowns {
    pub alpha1: MultiIndex,
    pub eta_rho: Field,
    pub eta_u: Field,
    pub eta_h: Field,
    pub rho_m: Field,
    pub u_m: Field,
    pub h_m: Field,
    /// Raw tangential derivatives `Z^a (rho, u, h, psi)`.
    pub z_rho: Field,
    pub z_u: Field,
    pub z_h: Field,
    pub z_psi: Field,
}

impl GoodUnknowns {
    /// `max |Z^a w - (w_m + eta_w Z^a psi)|` over the three unknowns.
    pub fn reconstruction_defect(&self) -> f64 {
        [
            (&self.z_rho, &self.rho_m, &self.eta_rho),
            (&self.z_u, &self.u_m, &self.eta_u),
            (&self.z_h, &self.h_m, &self.eta_h),
        ]
        .iter()
        .map(|(z, m, eta)| (*z - &(*m + &(*eta * &self.z_psi))).max_abs())
        .fold(0.0, f64::max)
    }

    pub fn field(&self, which: GoodField) -> &Field {
        match which {
            GoodField::Rho => &self.rho_m,
            GoodField::U => &self.u_m,
            GoodField::H => &self.h_m,
        }
    }
}

fn check_index(alpha1: MultiIndex) -> Result<()> {
    if alpha1.z2 != 0 || alpha1.tangential_order() == 0 {
        return Err(Error::InvalidInput(format!("good unknowns need a nonzero tangential index, got {alpha1:?}")));
    }
    Ok(())
}

fn check_residual_index(alpha1: MultiIndex) -> Result<()> {
    check_index(alpha1)?;
    if alpha1.t > MAX_TIME_ORDER {
        return Err(Error::InvalidInput(format!(
            "time order {} exceeds the substitution cap {MAX_TIME_ORDER}",
            alpha1.t
        )));
    }
    Ok(())
}

fn check_floor(state: &State, floor: f64) -> Result<()> {
    let min = state.h.min() + 1.0;
    if !(floor > 0.0) || !(min >= floor) {
        return Err(Error::MagneticFloor { min, floor });
    }
    Ok(())
}

/// Good unknowns of a state for the tangential index `alpha1`.
pub fn good_unknowns(state: &State, alpha1: MultiIndex, delta_floor: f64) -> Result<GoodUnknowns> {
    check_index(alpha1)?;
    check_floor(state, delta_floor)?;
    let jet = time_jet(state, alpha1.t)?;
    build_good_unknowns(state, &jet, alpha1)
}

/// Good unknowns from an already computed jet of depth at least `alpha1.t`;
/// no floor check.
pub(crate) fn build_good_unknowns(state: &State, jet: &TimeJet, alpha1: MultiIndex) -> Result<GoodUnknowns> {
    let big_h = state.magnetic();
    let eta_rho = divide(&state.rho.dy(), &big_h);
    let eta_u = divide(&state.shear(), &big_h);
    let eta_h = divide(&state.h.dy(), &big_h);
    let z_rho = zderiv_levels(&jet.rho, alpha1)?;
    let z_u = zderiv_levels(&jet.u, alpha1)?;
    let z_h = zderiv_levels(&jet.h, alpha1)?;
    let z_psi = zderiv_levels(&jet.psi, alpha1)?;
    Ok(GoodUnknowns {
        alpha1,
        rho_m: &z_rho - &(&eta_rho * &z_psi),
        u_m: &z_u - &(&eta_u * &z_psi),
        h_m: &z_h - &(&eta_h * &z_psi),
        eta_rho,
        eta_u,
        eta_h,
        z_rho,
        z_u,
        z_h,
        z_psi,
    })
}

/// Everything the residuals need at one instant.
struct Slice<'a> {
    state: &'a State,
    alpha: MultiIndex,
    jet: TimeJet,
    good: GoodUnknowns,
    /// Time levels of `U1 = u + 1 - e^{-y}`, `H1 = h + 1` and `rho`.
    big_u: Vec<Field>,
    big_h: Vec<Field>,
    big_rho: Vec<Field>,
    /// `d_y (u - e^{-y})` levels.
    shear: Vec<Field>,
    /// Tangential derivatives of the sources `(r1, r2, r_u, r_h)`, when active.
    sources: Option<[Field; 4]>,
}

impl<'a> Slice<'a> {
    fn new(state: &'a State, alpha: MultiIndex, delta_floor: f64) -> Result<Self> {
        check_residual_index(alpha)?;
        check_floor(state, delta_floor)?;
        let jet = time_jet(state, alpha.t + 1)?;
        let good = build_good_unknowns(state, &jet, alpha)?;
        let bg = background(&state.grid);
        let with_base = |levels: &[Field], base: Field| -> Vec<Field> {
            let mut out = vec![base];
            out.extend(levels[1..].iter().cloned());
            out
        };
        let big_u = with_base(&jet.u, state.velocity());
        let big_h = with_base(&jet.h, state.magnetic());
        let big_rho = with_base(&jet.rho, state.density());
        let shear = with_base(&jet.u.iter().map(Field::dy).collect::<Vec<_>>(), (&state.u - &bg).dy());
        let sources = match (&state.sources, state.physics.eps > 0.0) {
            (Some(b), true) => {
                let r = b.derivative_at(state.time, alpha.t);
                Some(r.map(|f| f.dx_n(alpha.x)))
            }
            _ => None,
        };
        Ok(Slice { state, alpha, jet, good, big_u, big_h, big_rho, shear, sources })
    }

    fn z(&self, levels: &[Field], beta: MultiIndex) -> Field {
        zderiv_levels(levels, beta).expect("jet deep enough")
    }

    /// Indices `beta <= alpha`, skipping zero and optionally `alpha` itself.
    fn splits(&self, include_alpha: bool) -> Vec<(MultiIndex, MultiIndex, f64)> {
        let a = self.alpha;
        a.sub_indices()
            .into_iter()
            .filter(|b| !b.is_zero() && (include_alpha || *b != a))
            .map(|b| (b, a.minus(&b), a.binomial(&b)))
            .collect()
    }

    /// `[Z^a, coef d_x] f = sum_{beta != 0} C Z^beta coef d_x Z^gamma f`.
    fn commutator_dx(&self, coef: &[Field], f: &[Field]) -> Field {
        let mut acc = Field::zeros(&self.state.grid);
        for (b, c, w) in self.splits(true) {
            acc = acc + (self.z(coef, b) * self.z(f, c).dx()) * w;
        }
        acc
    }

    /// `sum_{beta != 0, beta != a} C Z^beta p Z^gamma q` (or including `beta = a`).
    fn product_sum(&self, p: &[Field], q: &[Field], include_alpha: bool) -> Field {
        let mut acc = Field::zeros(&self.state.grid);
        for (b, c, w) in self.splits(include_alpha) {
            acc = acc + (self.z(p, b) * self.z(q, c)) * w;
        }
        acc
    }

    fn dy_levels(levels: &[Field]) -> Vec<Field> {
        levels.iter().map(Field::dy).collect()
    }

    /// `d_t Z^a f`.
    fn dt_z(&self, levels: &[Field]) -> Field {
        self.z(levels, self.alpha.plus(&MultiIndex::tangential(1, 0)))
    }

    /// `d_t eta` for `eta = num / H1`, given `d_t num`.
    fn dt_eta(&self, eta: &Field, dt_num: &Field) -> Field {
        divide(&(dt_num - &(eta * &self.jet.h[1])), &self.big_h[0])
    }

    /// `f_psi = -[Z^a, U1 d_x] psi - sum C Z^beta v Z^gamma d_y psi`.
    fn f_psi(&self) -> Field {
        -self.commutator_dx(&self.big_u, &self.jet.psi)
            - self.product_sum(&self.jet.v, &Self::dy_levels(&self.jet.psi), false)
    }

    fn eps(&self) -> f64 {
        self.state.physics.eps
    }

    /// `Z^a d_x r_h` and `d_y^{-1} Z^a d_x r_h`.
    fn rh_terms(&self) -> Option<(Field, Field)> {
        self.sources.as_ref().map(|r| {
            let z = r[3].dx();
            let anti = z.cumulative_y();
            (z, anti)
        })
    }

    /// `d_t w + U1 d_x w + v d_y w - eps d_xx w - diff dyy w`.
    fn transport(&self, w: &Field, dt_w: &Field, diffusivity: f64, neumann: bool) -> Field {
        let yy = if neumann { w.dyy_neumann() } else { w.dyy() };
        dt_w + &(&self.big_u[0] * &w.dx()) + &self.state.v * &w.dy() - w.dxx() * self.eps() - yy * diffusivity
    }

    /// `d_t eta + U1 d_x eta + v d_y eta - eps d_xx eta` (without the normal diffusion).
    fn tangential_transport(&self, eta: &Field, dt_eta: &Field) -> Field {
        dt_eta + &(&self.big_u[0] * &eta.dx()) + &self.state.v * &eta.dy() - eta.dxx() * self.eps()
    }

    fn h_residual(&self, sign: TransportSign) -> Field {
        let st = self.state;
        let p = st.physics;
        let gu = &self.good;
        let (eta, zpsi) = (&gu.eta_h, &gu.z_psi);
        let dt_zh = self.dt_z(&self.jet.h);
        let dt_zpsi = self.dt_z(&self.jet.psi);
        let dt_eta = self.dt_eta(eta, &self.jet.h[1].dy());
        let h_m = &gu.h_m;
        let dt_hm = &dt_zh - &(&(&dt_eta * zpsi) + &(eta * &dt_zpsi));
        let lhs = self.transport(h_m, &dt_hm, p.kappa, true);
        let coupling = self.h_coupling();
        let base = self.h_base_rhs();
        let mut extra =
            -(eta * &self.f_psi()) + (eta.dx() * zpsi.dx()) * (2.0 * p.eps) + (eta.dy() * zpsi.dy()) * (2.0 * p.kappa);
        let eta_transport = self.tangential_transport(eta, &dt_eta) - eta.dyy() * p.kappa;
        extra = match sign {
            TransportSign::Derived => extra - zpsi * &eta_transport,
            TransportSign::AsPrinted => extra + zpsi * &eta_transport,
        };
        if let Some((_, anti)) = self.rh_terms() {
            extra = extra + (eta * &anti) * p.eps;
        }
        lhs - coupling - (base + extra)
    }

    /// `H1 d_x Z^a u + g d_y Z^a u + Z^a g d_y (u - e^{-y})`.
    fn h_coupling(&self) -> Field {
        let gu = &self.good;
        &(&self.big_h[0] * &gu.z_u.dx())
            + &(&self.state.g * &gu.z_u.dy())
            + &self.z(&self.jet.g, self.alpha) * &self.shear[0]
    }

    /// `-eps Z^a d_x r_h + f_h`.
    fn h_base_rhs(&self) -> Field {
        let f_h = -self.commutator_dx(&self.big_u, &self.jet.h) + self.commutator_dx(&self.big_h, &self.jet.u)
            - self.product_sum(&self.jet.v, &Self::dy_levels(&self.jet.h), false)
            + self.product_sum(&self.jet.g, &Self::dy_levels(&self.jet.u), false);
        match self.rh_terms() {
            Some((z, _)) => -(z * self.eps()) + f_h,
            None => f_h,
        }
    }

    /// Residual of the tangentially differentiated magnetic equation, before
    /// any cancellation.
    fn h_differentiated_residual(&self) -> Field {
        let p = self.state.physics;
        let zh = &self.good.z_h;
        let lhs = self.transport(zh, &self.dt_z(&self.jet.h), p.kappa, true)
            + &self.z(&self.jet.v, self.alpha) * &self.state.h.dy();
        lhs - self.h_coupling() - self.h_base_rhs()
    }

    fn rho_residual(&self, sign: TransportSign) -> Field {
        let st = self.state;
        let p = st.physics;
        let gu = &self.good;
        let (eta, zpsi) = (&gu.eta_rho, &gu.z_psi);
        let dt_zrho = self.dt_z(&self.jet.rho);
        let dt_zpsi = self.dt_z(&self.jet.psi);
        let dt_eta = self.dt_eta(eta, &self.jet.rho[1].dy());
        let dt_rm = &dt_zrho - &(&(&dt_eta * zpsi) + &(eta * &dt_zpsi));
        let lhs = self.transport(&gu.rho_m, &dt_rm, p.eps, true);
        let f_rho = -self.commutator_dx(&self.big_u, &self.jet.rho)
            - self.product_sum(&self.jet.v, &Self::dy_levels(&self.jet.rho), false);
        let mut rhs = f_rho - eta * &self.f_psi() + (eta.dx() * zpsi.dx()) * (2.0 * p.eps)
            - (eta * &zpsi.dyy()) * p.kappa
            + (eta * zpsi).dyy() * p.eps;
        let eta_transport = self.tangential_transport(eta, &dt_eta);
        rhs = match sign {
            TransportSign::Derived => rhs - zpsi * &eta_transport,
            TransportSign::AsPrinted => rhs + zpsi * &eta_transport,
        };
        if let (Some(r), Some((_, anti))) = (&self.sources, self.rh_terms()) {
            rhs = rhs - (r[0].dx() + r[1].dy()) * p.eps + (eta * &anti) * p.eps;
        }
        lhs - rhs
    }

    fn u_residual(&self) -> Field {
        let st = self.state;
        let p = st.physics;
        let gu = &self.good;
        let (eta, zpsi) = (&gu.eta_u, &gu.z_psi);
        let rho = &self.big_rho[0];
        let dt_zu = self.dt_z(&self.jet.u);
        let dt_zpsi = self.dt_z(&self.jet.psi);
        let dt_eta = self.dt_eta(eta, &self.shear[1]);
        let u_m = &gu.u_m;
        let dt_um = &dt_zu - &(&(&dt_eta * zpsi) + &(eta * &dt_zpsi));
        let lhs = rho * &dt_um + rho * &(&self.big_u[0] * &u_m.dx()) + rho * &(&st.v * &u_m.dy())
            - u_m.dxx() * p.eps
            - u_m.dyy() * p.mu;
        let coupling =
            &(&self.big_h[0] * &gu.z_h.dx()) + &(&st.g * &gu.z_h.dy()) + &self.z(&self.jet.g, self.alpha) * &st.h.dy();

        let rho_u: Vec<Field> = (0..self.jet.rho.len()).map(|k| leibniz(&self.big_rho, &self.big_u, k)).collect();
        let rho_v: Vec<Field> = (0..self.jet.rho.len()).map(|k| leibniz(&self.big_rho, &self.jet.v, k)).collect();
        // [Z^a, rho d_t] u = sum_{beta != 0} C Z^beta rho d_t Z^gamma u
        let mut rho_dt = Field::zeros(&st.grid);
        for (b, c, w) in self.splits(true) {
            rho_dt =
                rho_dt + (self.z(&self.big_rho, b) * self.z(&self.jet.u, c.plus(&MultiIndex::tangential(1, 0)))) * w;
        }
        let mut rho_v_shear = Field::zeros(&st.grid);
        for (b, c, w) in self.splits(true) {
            rho_v_shear = rho_v_shear + (self.z(&self.big_rho, b) * self.z(&self.jet.v, c) * &self.shear[0]) * w;
        }
        let f_u = -rho_dt - self.commutator_dx(&rho_u, &self.jet.u) + self.commutator_dx(&self.big_h, &self.jet.h)
            - rho_v_shear
            - self.product_sum(&rho_v, &Self::dy_levels(&self.jet.u), false)
            + self.product_sum(&self.jet.g, &Self::dy_levels(&self.jet.h), false);

        let eta_transport = rho * &dt_eta + rho * &(&self.big_u[0] * &eta.dx()) + rho * &(&st.v * &eta.dy());
        let mut rhs = f_u
            - rho * &(eta * &self.f_psi())
            - zpsi * &eta_transport
            - (&rho.map(|r| r - 1.0) * &(eta * &zpsi.dxx())) * p.eps
            - (rho * &(eta * &zpsi.dyy())) * p.kappa
            + (eta.dx() * zpsi.dx()) * (2.0 * p.eps)
            + (eta.dxx() * zpsi) * p.eps
            + (eta * zpsi).dyy() * p.mu;
        if let (Some(r), Some((_, anti))) = (&self.sources, self.rh_terms()) {
            rhs = rhs - r[2].dx() * p.eps + (rho * &(eta * &anti)) * p.eps;
        }
        // the wall row carries no-slip, not the momentum equation
        let mut res = lhs - coupling - rhs;
        res.values_mut().column_mut(0).fill(0.0);
        res
    }
}

/// Residual of one good-unknown evolution equation at one instant.
pub fn slice_residual(
    state: &State,
    alpha1: MultiIndex,
    which: GoodField,
    sign: TransportSign,
    delta_floor: f64,
) -> Result<Field> {
    let slice = Slice::new(state, alpha1, delta_floor)?;
    Ok(match which {
        GoodField::Rho => slice.rho_residual(sign),
        GoodField::U => slice.u_residual(),
        GoodField::H => slice.h_residual(sign),
    })
}

/// `max |r|` over all rows above the wall. The wall row carries the boundary
/// closure (no-slip for `u_m`, the mirror ghost for `rho_m` and `h_m`) and is
/// only first order there for generic data.
pub fn interior_sup(residual: &Field) -> f64 {
    residual.values().slice(ndarray::s![.., 1..]).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Weighted `L^2_l` norm over the rows above the wall.
pub fn interior_l2(residual: &Field, l: f64) -> f64 {
    let mut r = residual.clone();
    r.values_mut().column_mut(0).fill(0.0);
    weighted_l2(&r, l)
}

/// Residual of each good-unknown equation along a sequence of states.
pub fn cancellation_residual(
    states: &[State],
    alpha1: MultiIndex,
    which: GoodField,
    sign: TransportSign,
    delta_floor: f64,
) -> Result<Vec<Field>> {
    states.iter().map(|s| slice_residual(s, alpha1, which, sign, delta_floor)).collect()
}

/// Residual of the tangentially differentiated magnetic equation (no
/// cancellation); coincides with the `h_m` residual when `h` vanishes.
pub fn differentiated_h_residual(state: &State, alpha1: MultiIndex, delta_floor: f64) -> Result<Field> {
    Ok(Slice::new(state, alpha1, delta_floor)?.h_differentiated_residual())
}

/// The `Z^a psi * (transport) eta` terms whose sign distinguishes the two
/// readings of the density and magnetic equations.
pub fn transport_sign_term(state: &State, alpha1: MultiIndex, which: GoodField, delta_floor: f64) -> Result<Field> {
    let s = Slice::new(state, alpha1, delta_floor)?;
    let gu = &s.good;
    Ok(match which {
        GoodField::Rho => {
            let dt = s.dt_eta(&gu.eta_rho, &s.jet.rho[1].dy());
            &gu.z_psi * &s.tangential_transport(&gu.eta_rho, &dt)
        }
        GoodField::H => {
            let dt = s.dt_eta(&gu.eta_h, &s.jet.h[1].dy());
            &gu.z_psi * &(s.tangential_transport(&gu.eta_h, &dt) - gu.eta_h.dyy() * state.physics.kappa)
        }
        GoodField::U => Field::zeros(&state.grid),
    })
}

/// Constant of the combined tangential bound: `max(2, 8 / (2l - 1)^2)`.
pub fn tangential_bound_constant(l: f64) -> f64 {
    (8.0 / (2.0 * l - 1.0).powi(2)).max(2.0)
}

/// The four stream-function estimates and the combined tangential bound.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub reports: Vec<InequalityReport>,
    /// `Z^a psi` decays at the top of the domain (hypothesis of the Hardy step).
    pub decay_hypothesis: bool,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
    pub fn worst_ratio(&self) -> f64 {
        self.reports.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }
}

/// Checks the stream-function norm estimates for `|a| = m`, weight `l >= 1`
/// and lower bound `h + 1 >= delta`.
pub fn norm_equivalence_check(state: &State, alpha1: MultiIndex, l: f64, delta: f64) -> Result<EquivalenceReport> {
    if !(l >= 1.0) {
        return Err(Error::Precondition(format!("weight l must be >= 1, got {l}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    let gu = good_unknowns(state, alpha1, delta)?;
    let big_h = state.magnetic();
    let c = 2.0 / (2.0 * l - 1.0);
    let inv = 1.0 / delta;
    let hm = weighted_l2(&gu.h_m, l);
    let hy = state.h.dy();
    let meta = format!("a=({},{}) l={l} delta={delta}", alpha1.t, alpha1.x);
    let mut reports = Vec::new();

    let psi_over = divide(&gu.z_psi, &big_h);
    reports.push(InequalityReport::sharp(
        "b11",
        weighted_l2(&psi_over, l - 1.0),
        c * inv * hm,
        SHARP_TOLERANCE,
        meta.clone(),
    ));

    let lhs = weighted_l2(&gu.z_h, l);
    let rhs = hm + c * inv * weighted_linf(&hy, 1.0) * hm;
    reports.push(InequalityReport::sharp("b12", lhs, rhs, SHARP_TOLERANCE, meta.clone()));

    let lhs = weighted_l2(&divide(&gu.z_psi.dx(), &big_h), l - 1.0);
    let rhs = c * inv * weighted_l2(&gu.h_m.dx(), l) + 2.0 * c * inv * inv * weighted_linf(&state.h.dx(), 0.0) * hm;
    reports.push(InequalityReport::sharp("b13", lhs, rhs, SHARP_TOLERANCE, meta.clone()));

    let lhs = weighted_l2(&gu.z_h.dy(), l);
    let c14 = (2.0 * l + 1.0) / (2.0 * l - 1.0);
    let rhs =
        weighted_l2(&gu.h_m.dy(), l) + c14 * inv * (weighted_linf(&hy, 0.0) + weighted_linf(&hy.dy().z2(), 1.0)) * hm;
    reports.push(InequalityReport::sharp("b14", lhs, rhs, SHARP_TOLERANCE, meta.clone()));

    let sq = |f: &Field| weighted_l2(f, l).powi(2);
    let lhs = (sq(&gu.z_rho) + sq(&gu.z_u) + sq(&gu.z_h)).sqrt();
    let slope = [state.rho.dy(), state.shear(), hy.clone()].iter().map(|f| weighted_linf(f, 1.0).powi(2)).sum::<f64>();
    let good = sq(&gu.rho_m) + sq(&gu.u_m) + sq(&gu.h_m);
    let rhs = (tangential_bound_constant(l) * inv * inv * (1.0 + slope) * good).sqrt();
    reports.push(InequalityReport::sharp("b22", lhs, rhs, SHARP_TOLERANCE, meta));

    let top = gu.z_psi.far_field_max();
    let decay_hypothesis = top <= 1e-3 * gu.z_psi.max_abs().max(f64::MIN_POSITIVE) || top == 0.0;
    Ok(EquivalenceReport { reports, decay_hypothesis })
}
