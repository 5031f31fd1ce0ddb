//! Conserved currents from variational symmetries.
//!
//! A generator `X` is a divergence (variational) symmetry of `L` when
//!
//! ```text
//! pr X(L) + L (D_t xi_t + D_s xi_s) = D_t V_t + D_s V_s
//! ```
//!
//! for some first-order `(V_t, V_s)`; strictly variational when both are
//! zero.  The conserved current is then
//!
//! ```text
//! T_t = xi_t L + zeta dL/dphi_t - V_t
//! T_s = xi_s L + zeta dL/dphi_s - V_s,     zeta = eta - xi_t phi_t - xi_s phi_s
//! ```
//!
//! with the off-shell identity `D_t T_t + D_s T_s = zeta (phi_tt + G phi_ss
//! - H)`, so the divergence vanishes on shell.  Currents convert to
//! Eulerian coordinates through `phi_s -> 1/rho`, `phi_t -> u`,
//! `phi -> x` and the mass-coordinate Jacobian: density `rho T_t`, flux
//! `T_s + u rho T_t`.  Currents whose components keep an explicit `s`
//! have no local Eulerian image and stay in the Lagrangian frame.

mod table;

pub use table::{euler_table, match_current, scalar_str, EulerRow, MatchError, MatchReport};

use crate::expr::{
    integrate, is_zero, partial, substitute, total_derivative, Dir, Expr, ExprError, Frame,
    JetContext, Symbol, Var,
};
use crate::model::{build_lagrangian, ModelSpec};
use crate::rng::Srng;
use crate::symmetry::{prolong2, Generator};
use std::collections::BTreeMap;

/// The divergence remainder `(V_t, V_s)` of a variational symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTerm {
    pub v_t: Expr,
    pub v_s: Expr,
}

impl DivergenceTerm {
    pub fn zero() -> Self {
        DivergenceTerm { v_t: Expr::zero(), v_s: Expr::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.v_t.is_zero_expr() && self.v_s.is_zero_expr()
    }
}

/// A conserved pair with its coordinate frame.
#[derive(Debug, Clone)]
pub struct ConservedCurrent {
    pub density: Expr,
    pub flux: Expr,
    pub frame: Frame,
    /// Name of the generator the current came from.
    pub source: String,
}

#[derive(Debug, thiserror::Error)]
pub enum NoetherError {
    #[error("{generator} is not a variational symmetry: residual `{remainder}` is not a total divergence")]
    NotVariational { generator: String, remainder: Expr },
    #[error("current `{0}` has no local Eulerian image (explicit mass coordinate s)")]
    NoEulerianForm(String),
    #[error("expected a {expected:?}-frame current, got {got:?}")]
    WrongFrame { expected: Frame, got: Frame },
    #[error("internal divergence check failed for {generator}: {residual}")]
    DivergenceCheck { generator: String, residual: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `pr X(L) + L (D_t xi_t + D_s xi_s)`, the obstruction to invariance of
/// the action.  Zero means strictly variational; a total divergence means
/// a divergence symmetry; anything else means no Noether current.
pub fn variational_defect(x: &Generator, l: &Expr) -> Result<Expr, ExprError> {
    let ctx = JetContext::lagrangian();
    let p = prolong2(x);
    let applied = p.apply_pr1(l)?;
    let div_xi = Expr::add(vec![
        total_derivative(&x.xi_t, Dir::T, &ctx)?,
        total_derivative(&x.xi_s, Dir::Space, &ctx)?,
    ]);
    Ok(Expr::add(vec![applied, Expr::mul(vec![l.clone(), div_xi])]).normalize())
}

/// Splits a first-order expression `R` into `D_t V_t + D_s V_s` by exact
/// homotopy integration.
///
/// Writing `R = P(t,s,phi) + Q1(t,s,phi) phi_t + Q2(t,s,phi) phi_s` (any
/// other jet dependence is an immediate failure), take `V_t = int Q1 dphi`
/// and `V_s = int Q2 dphi + d(t,s)` with `d_s` equal to the leftover
/// `(t,s)`-part of `P`; the construction succeeds exactly when `R` is a
/// total divergence with `P_phi = Q1_t + Q2_s`, which covers every
/// divergence symmetry of the classification.
pub fn split_divergence(r: &Expr) -> Result<DivergenceTerm, NoetherError> {
    let r = r.normalize();
    if r.is_zero_expr() {
        return Ok(DivergenceTerm::zero());
    }
    let fail = |remainder: &Expr| NoetherError::NotVariational {
        generator: String::new(),
        remainder: remainder.clone(),
    };

    let phi_t = Symbol::Var(Var::PhiT);
    let phi_s = Symbol::Var(Var::PhiS);
    let phi = Symbol::Var(Var::Phi);
    let s = Symbol::Var(Var::S);
    let t = Symbol::Var(Var::T);

    if r.jet_order() > 1 {
        return Err(fail(&r));
    }
    let q1 = partial(&r, &phi_t)?;
    let q2 = partial(&r, &phi_s)?;
    // Linearity in the first jets: the coefficients must be jet-free.
    if q1.jet_order() > 0 || q2.jet_order() > 0 {
        return Err(fail(&r));
    }
    let p = Expr::add(vec![
        r.clone(),
        Expr::neg(Expr::mul(vec![q1.clone(), Expr::var(Var::PhiT)])),
        Expr::neg(Expr::mul(vec![q2.clone(), Expr::var(Var::PhiS)])),
    ])
    .normalize();
    if p.jet_order() > 0 {
        return Err(fail(&r));
    }

    let v_t = integrate(&q1, &phi).map_err(|_| fail(&r))?;
    let v_s_phi = integrate(&q2, &phi).map_err(|_| fail(&r))?;

    // Remaining (t, s) dependence: d_s = P - d/dt V_t - d/ds (int Q2 dphi).
    let leftover = Expr::add(vec![
        p,
        Expr::neg(partial(&v_t, &t)?),
        Expr::neg(partial(&v_s_phi, &s)?),
    ])
    .normalize();
    if leftover.contains(&phi) {
        return Err(fail(&r));
    }
    let d = integrate(&leftover, &s).map_err(|_| fail(&r))?;
    let v_s = Expr::add(vec![v_s_phi, d]).normalize();

    // Exactness check stays structural: the construction is exact, so any
    // residue signals a genuine obstruction.
    let ctx = JetContext::lagrangian();
    let check = Expr::add(vec![
        total_derivative(&v_t, Dir::T, &ctx)?,
        total_derivative(&v_s, Dir::Space, &ctx)?,
        Expr::neg(r.clone()),
    ])
    .normalize();
    if !check.vanishes() {
        return Err(fail(&check));
    }
    Ok(DivergenceTerm { v_t, v_s })
}

/// Builds the Noether current of a variational symmetry in the Lagrangian
/// frame, verifying the on-shell divergence before returning.
pub fn noether_current(
    x: &Generator,
    m: &ModelSpec,
    rng: &mut Srng,
) -> Result<ConservedCurrent, NoetherError> {
    let l = m.concretize(&build_lagrangian(m));
    let defect = variational_defect(x, &l)?;
    let v = split_divergence(&defect).map_err(|e| match e {
        NoetherError::NotVariational { remainder, .. } => {
            NoetherError::NotVariational { generator: x.name.clone(), remainder }
        }
        other => other,
    })?;
    let zeta = x.characteristic();
    let density = Expr::add(vec![
        Expr::mul(vec![x.xi_t.clone(), l.clone()]),
        Expr::mul(vec![zeta.clone(), partial(&l, &Symbol::Var(Var::PhiT))?]),
        Expr::neg(v.v_t.clone()),
    ])
    .normalize();
    let flux = Expr::add(vec![
        Expr::mul(vec![x.xi_s.clone(), l.clone()]),
        Expr::mul(vec![zeta, partial(&l, &Symbol::Var(Var::PhiS))?]),
        Expr::neg(v.v_s.clone()),
    ])
    .normalize();
    let current = ConservedCurrent {
        density,
        flux,
        frame: Frame::Lagrangian,
        source: x.name.clone(),
    };
    // On-shell divergence must vanish before the current is handed out.
    let div = lagrangian_divergence_on_shell(&current, m)?;
    let z = is_zero(&div, &m.domain, rng)?;
    if !z.is_zero {
        return Err(NoetherError::DivergenceCheck {
            generator: x.name.clone(),
            residual: z.normalized.to_string(),
        });
    }
    Ok(current)
}

/// `D_t T_t + D_s T_s` with `phi_tt` eliminated on shell.
pub fn lagrangian_divergence_on_shell(
    c: &ConservedCurrent,
    m: &ModelSpec,
) -> Result<Expr, NoetherError> {
    if c.frame != Frame::Lagrangian {
        return Err(NoetherError::WrongFrame { expected: Frame::Lagrangian, got: c.frame });
    }
    let ctx = JetContext::lagrangian();
    let div = Expr::add(vec![
        total_derivative(&c.density, Dir::T, &ctx)?,
        total_derivative(&c.flux, Dir::Space, &ctx)?,
    ]);
    let mut bind = BTreeMap::new();
    bind.insert(Symbol::Var(Var::PhiTT), crate::symmetry::on_shell_binding(m));
    Ok(m.concretize(&substitute(&div.normalize(), &bind)))
}

/// Off-shell Noether identity defect:
/// `D_t T_t + D_s T_s - zeta (phi_tt + G phi_ss - H)`, identically zero
/// for a Noether current of `x`.
pub fn noether_identity_defect(
    x: &Generator,
    c: &ConservedCurrent,
    m: &ModelSpec,
) -> Result<Expr, NoetherError> {
    if c.frame != Frame::Lagrangian {
        return Err(NoetherError::WrongFrame { expected: Frame::Lagrangian, got: c.frame });
    }
    let ctx = JetContext::lagrangian();
    let div = Expr::add(vec![
        total_derivative(&c.density, Dir::T, &ctx)?,
        total_derivative(&c.flux, Dir::Space, &ctx)?,
    ]);
    let defect = Expr::add(vec![
        div,
        Expr::neg(Expr::mul(vec![x.characteristic(), m.el_residual()])),
    ]);
    let defect = m.concretize(&defect.normalize());
    Ok(if defect.vanishes() { Expr::zero() } else { defect })
}

/// Converts a Lagrangian-frame current to Eulerian coordinates.  Fails
/// when a component references the mass coordinate `s` explicitly: such
/// conservation laws have no local Eulerian representation and stay in
/// the Lagrangian frame.
pub fn to_eulerian(c: &ConservedCurrent) -> Result<ConservedCurrent, NoetherError> {
    if c.frame != Frame::Lagrangian {
        return Err(NoetherError::WrongFrame { expected: Frame::Lagrangian, got: c.frame });
    }
    for comp in [&c.density, &c.flux] {
        if comp.contains_var(Var::S) {
            return Err(NoetherError::NoEulerianForm(c.source.clone()));
        }
    }
    let mut bind = BTreeMap::new();
    bind.insert(Symbol::Var(Var::PhiS), Expr::powi(Expr::var(Var::Rho), -1));
    bind.insert(Symbol::Var(Var::PhiT), Expr::var(Var::U));
    bind.insert(Symbol::Var(Var::Phi), Expr::var(Var::X));
    let tt = substitute(&c.density, &bind);
    let ts = substitute(&c.flux, &bind);
    let rho = Expr::var(Var::Rho);
    let u = Expr::var(Var::U);
    let density = Expr::mul(vec![rho.clone(), tt.clone()]).normalize();
    let flux = Expr::add(vec![ts, Expr::mul(vec![u, rho, tt])]).normalize();
    Ok(ConservedCurrent { density, flux, frame: Frame::Eulerian, source: c.source.clone() })
}

/// Off-shell Eulerian divergence `D_t T_t + D_x T_x`.
pub fn eulerian_divergence(c: &ConservedCurrent) -> Result<Expr, NoetherError> {
    if c.frame != Frame::Eulerian {
        return Err(NoetherError::WrongFrame { expected: Frame::Eulerian, got: c.frame });
    }
    let ctx = JetContext::eulerian();
    Ok(Expr::add(vec![
        total_derivative(&c.density, Dir::T, &ctx)?,
        total_derivative(&c.flux, Dir::Space, &ctx)?,
    ])
    .normalize())
}

/// Checks `D_t T_t + D_x T_x = 0` modulo the Eulerian system: `rho_t` and
/// `u_t` are substituted from the continuity and momentum equations.
pub fn verify_eulerian_divergence(
    c: &ConservedCurrent,
    m: &ModelSpec,
    rng: &mut Srng,
) -> Result<bool, NoetherError> {
    let div = eulerian_divergence(c)?;
    let rho = Expr::var(Var::Rho);
    let u = Expr::var(Var::U);
    let rho_t = Expr::neg(Expr::add(vec![
        Expr::mul(vec![u.clone(), Expr::var(Var::RhoX)]),
        Expr::mul(vec![rho.clone(), Expr::var(Var::UX)]),
    ]));
    let g_at = m.concretize(&Expr::app(
        crate::expr::Func::GChain(0),
        Expr::powi(rho.clone(), -1),
    ));
    let u_t = Expr::add(vec![
        Expr::neg(Expr::mul(vec![u, Expr::var(Var::UX)])),
        Expr::mul(vec![g_at, Expr::powi(rho, -3), Expr::var(Var::RhoX)]),
        m.concretize(&Expr::app(crate::expr::Func::HChain(0), Expr::var(Var::X))),
    ]);
    let mut bind = BTreeMap::new();
    bind.insert(Symbol::Var(Var::RhoT), rho_t.normalize());
    bind.insert(Symbol::Var(Var::UT), u_t.normalize());
    let onshell = m.concretize(&substitute(&div, &bind));
    let z = is_zero(&onshell, &m.domain, rng)?;
    Ok(z.is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, rat, Func, ParamSpec, ParameterDomain, Rat, Sign};
    use crate::model::{Coeff, GFamily, HFamily};

    fn t() -> Expr {
        Expr::var(Var::T)
    }
    fn phi() -> Expr {
        Expr::var(Var::Phi)
    }

    fn gen(name: &str, xi_t: Expr, xi_s: Expr, eta: Expr) -> Generator {
        Generator::new(name, xi_t, xi_s, eta).unwrap()
    }

    fn h0_model() -> ModelSpec {
        ModelSpec::new(GFamily::opaque(), HFamily::Zero, ParameterDomain::new()).unwrap()
    }

    #[test]
    fn time_translation_is_strictly_variational() {
        let m = ModelSpec::generic();
        let l = m.concretize(&build_lagrangian(&m));
        let x = gen("X1", Expr::one(), Expr::zero(), Expr::zero());
        let r = variational_defect(&x, &l).unwrap();
        assert!(r.is_zero_expr(), "defect {r}");
    }

    #[test]
    fn galilean_shift_has_divergence_defect() {
        // X = t d_phi on H = 0: defect phi_t = D_t(phi).
        let m = h0_model();
        let l = m.concretize(&build_lagrangian(&m));
        let x = gen("X4", Expr::zero(), Expr::zero(), t());
        let r = variational_defect(&x, &l).unwrap();
        assert_eq!(r, Expr::var(Var::PhiT));
        let v = split_divergence(&r).unwrap();
        assert_eq!(v.v_t, phi());
        assert!(v.v_s.is_zero_expr());
    }

    #[test]
    fn zero_splits_trivially() {
        let v = split_divergence(&Expr::zero()).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn uniform_scaling_on_inverse_linear_h_is_not_variational() {
        // X = t d_t + s d_s + phi d_phi with H = beta phi^-1 is admitted
        // but its defect 2L + beta contains phi_t^2, which no first-order
        // divergence produces; the splitter must reject it.
        let d = ParameterDomain::new().with(
            "beta",
            ParamSpec { sign: Sign::Any, nonzero: true, exclude: vec![] },
        );
        let m = ModelSpec::new(
            GFamily::opaque(),
            HFamily::PowerLaw { alpha: Coeff::Rat(rat(-1, 1)), beta: Coeff::Sym(d.param("beta")) },
            d,
        )
        .unwrap();
        let l = m.concretize(&build_lagrangian(&m));
        let x = gen("X3", t(), Expr::var(Var::S), phi());
        let r = variational_defect(&x, &l).unwrap();
        assert!(!r.is_zero_expr());
        let err = split_divergence(&r);
        assert!(matches!(err, Err(NoetherError::NotVariational { .. })));
        let mut rng = Srng::new(51);
        assert!(matches!(noether_current(&x, &m, &mut rng), Err(NoetherError::NotVariational { .. })));
    }

    #[test]
    fn oscillator_shift_splits_with_trig_v() {
        // X = sin(w t) d_phi on H = alpha phi (alpha < 0):
        // V_t proportional to w cos(w t) phi.
        let d = ParameterDomain::new().with(
            "alpha",
            ParamSpec { sign: Sign::Negative, nonzero: true, exclude: vec![] },
        );
        let alpha = d.param("alpha");
        let m = ModelSpec::new(
            GFamily::opaque(),
            HFamily::Linear { alpha: Coeff::Sym(alpha.clone()) },
            d,
        )
        .unwrap();
        let l = m.concretize(&build_lagrangian(&m));
        let root = Expr::sqrt(Expr::app(Func::Abs, Expr::param(&alpha)));
        let x = gen(
            "X3",
            Expr::zero(),
            Expr::zero(),
            Expr::app(Func::Sin, Expr::mul(vec![root.clone(), t()])),
        );
        let r = variational_defect(&x, &l).unwrap();
        let v = split_divergence(&r).unwrap();
        let expect = Expr::mul(vec![
            root.clone(),
            Expr::app(Func::Cos, Expr::mul(vec![root, t()])),
            phi(),
        ])
        .normalize();
        assert_eq!(v.v_t, expect);
        assert!(v.v_s.is_zero_expr());
        // and D_t V_t + D_s V_s reproduces the defect
        let ctx = JetContext::lagrangian();
        let back = Expr::add(vec![
            total_derivative(&v.v_t, Dir::T, &ctx).unwrap(),
            total_derivative(&v.v_s, Dir::Space, &ctx).unwrap(),
            Expr::neg(r),
        ])
        .normalize();
        assert!(back.is_zero_expr());
    }

    #[test]
    fn zero_generator_gives_zero_current() {
        let mut rng = Srng::new(52);
        let m = h0_model();
        let c = noether_current(&Generator::zero(), &m, &mut rng).unwrap();
        assert!(c.density.is_zero_expr());
        assert!(c.flux.is_zero_expr());
    }

    #[test]
    fn momentum_current_maps_to_euler_row() {
        // X = d_phi on H = 0: Eulerian image (rho u, rho u^2 + gp).
        let mut rng = Srng::new(53);
        let m = h0_model();
        let x = gen("X3", Expr::zero(), Expr::zero(), Expr::one());
        let c = noether_current(&x, &m, &mut rng).unwrap();
        assert_eq!(c.density, Expr::var(Var::PhiT));
        let e = to_eulerian(&c).unwrap();
        let table = Default::default();
        let expect_density = parse_expr("rho*u", &table).unwrap();
        let expect_flux = parse_expr("rho*u^2 + gp(rho^-1)", &table).unwrap();
        assert_eq!(e.density, expect_density);
        assert_eq!(e.flux, expect_flux);
        assert!(verify_eulerian_divergence(&e, &m, &mut rng).unwrap());
    }

    #[test]
    fn mass_flux_current_matches_up_to_scalar() {
        // X = d_s on the generic model; Eulerian image is the printed
        // (u, u^2/2 - g - h + gp/rho) row scaled by -1.
        let mut rng = Srng::new(54);
        let m = ModelSpec::generic();
        let x = gen("X2", Expr::zero(), Expr::one(), Expr::zero());
        let c = noether_current(&x, &m, &mut rng).unwrap();
        let e = to_eulerian(&c).unwrap();
        let table = Default::default();
        let printed_density = parse_expr("u", &table).unwrap();
        assert_eq!(e.density, Expr::neg(printed_density).normalize());
        assert!(verify_eulerian_divergence(&e, &m, &mut rng).unwrap());
    }

    #[test]
    fn scaling_current_keeps_mass_coordinate() {
        // The variational scaling for lambda = -3, H = 0 carries explicit
        // s and therefore has no Eulerian image.
        let mut rng = Srng::new(55);
        let m = ModelSpec::new(
            GFamily::Power { lambda: Coeff::Rat(rat(-3, 1)), c: Rat::from_integer(0.into()) },
            HFamily::Zero,
            ParameterDomain::new(),
        )
        .unwrap();
        // (3 lambda + 4) t d_t + (lambda + 4) s d_s + lambda phi d_phi
        let x = gen(
            "Xvs",
            Expr::mul(vec![Expr::int(-5), t()]),
            Expr::var(Var::S),
            Expr::mul(vec![Expr::int(-3), phi()]),
        );
        let c = noether_current(&x, &m, &mut rng).unwrap();
        assert!(c.flux.contains_var(Var::S));
        assert!(matches!(to_eulerian(&c), Err(NoetherError::NoEulerianForm(_))));
    }

    #[test]
    fn perturbed_row_fails_divergence() {
        // Breaking the momentum row's flux by +rho must be detected.
        let mut rng = Srng::new(56);
        let m = h0_model();
        let table = Default::default();
        let c = ConservedCurrent {
            density: parse_expr("rho*u", &table).unwrap(),
            flux: parse_expr("rho*u^2 + gp(rho^-1) + rho", &table).unwrap(),
            frame: Frame::Eulerian,
            source: "broken".into(),
        };
        assert!(!verify_eulerian_divergence(&c, &m, &mut rng).unwrap());
    }

    #[test]
    fn noether_identity_holds_off_shell() {
        let mut rng = Srng::new(57);
        let m = ModelSpec::generic();
        for x in [
            gen("X1", Expr::one(), Expr::zero(), Expr::zero()),
            gen("X2", Expr::zero(), Expr::one(), Expr::zero()),
        ] {
            let c = noether_current(&x, &m, &mut rng).unwrap();
            let defect = noether_identity_defect(&x, &c, &m).unwrap();
            assert!(
                defect.is_zero_expr(),
                "identity defect for {}: {defect}",
                x.name
            );
        }
    }
}
