//! Lie point symmetries of the wave equation: generators on `(t, s, phi)`
//! space, second prolongation to the jet variables, and verification that
//! a generator is admitted by a model (the prolonged action annihilates
//! the equation residual on shell).

mod catalog;
mod classify;
mod equivalence;

pub use catalog::{catalog, entry, CatalogEntry, CatalogError};
pub use classify::{classifying_residuals, AnsatzError, ReducedAnsatz};
pub use equivalence::{
    apply_equivalence, equivalence_generators, EquivError, EquivalenceGenerator, TransformKind,
};

use crate::expr::{
    is_zero, partial, substitute, total_derivative, Dir, Expr, ExprError, JetContext, Symbol, Var,
    ZeroOutcome,
};
use crate::model::ModelSpec;
use crate::rng::Srng;

/// A point generator `xi_t d_t + xi_s d_s + eta d_phi` with coefficients
/// in `(t, s, phi)` and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub xi_t: Expr,
    pub xi_s: Expr,
    pub eta: Expr,
}

#[derive(Debug, thiserror::Error)]
pub enum SymmetryError {
    #[error("generator coefficient `{0}` references jet variables")]
    JetInCoefficient(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl Generator {
    pub fn new(name: &str, xi_t: Expr, xi_s: Expr, eta: Expr) -> Result<Generator, SymmetryError> {
        for c in [&xi_t, &xi_s, &eta] {
            if c.jet_order() > 0 {
                return Err(SymmetryError::JetInCoefficient(c.to_string()));
            }
        }
        Ok(Generator {
            name: name.to_string(),
            xi_t: xi_t.normalize(),
            xi_s: xi_s.normalize(),
            eta: eta.normalize(),
        })
    }

    pub fn zero() -> Generator {
        Generator::new("0", Expr::zero(), Expr::zero(), Expr::zero()).unwrap()
    }

    /// `zeta = eta - xi_t phi_t - xi_s phi_s`, the characteristic.
    pub fn characteristic(&self) -> Expr {
        Expr::add(vec![
            self.eta.clone(),
            Expr::neg(Expr::mul(vec![self.xi_t.clone(), Expr::var(Var::PhiT)])),
            Expr::neg(Expr::mul(vec![self.xi_s.clone(), Expr::var(Var::PhiS)])),
        ])
        .normalize()
    }

    /// Applies the generator to a function of `(t, s, phi)` only.
    pub fn apply_point(&self, e: &Expr) -> Result<Expr, ExprError> {
        Ok(Expr::add(vec![
            Expr::mul(vec![self.xi_t.clone(), partial(e, &Symbol::Var(Var::T))?]),
            Expr::mul(vec![self.xi_s.clone(), partial(e, &Symbol::Var(Var::S))?]),
            Expr::mul(vec![self.eta.clone(), partial(e, &Symbol::Var(Var::Phi))?]),
        ])
        .normalize())
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.xi_t.is_zero_expr() {
            parts.push(format!("({})*d_t", self.xi_t));
        }
        if !self.xi_s.is_zero_expr() {
            parts.push(format!("({})*d_s", self.xi_s));
        }
        if !self.eta.is_zero_expr() {
            parts.push(format!("({})*d_phi", self.eta));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Second prolongation: the jet coefficients of `pr^2 X`.
#[derive(Debug, Clone)]
pub struct ProlongedGenerator {
    pub base: Generator,
    pub zeta_t: Expr,
    pub zeta_s: Expr,
    pub zeta_tt: Expr,
    pub zeta_ts: Expr,
    pub zeta_ss: Expr,
}

/// Standard prolongation recursion,
/// `zeta_Ji = D_i(zeta_J) - phi_Jt D_i(xi_t) - phi_Js D_i(xi_s)`.
pub fn prolong2(x: &Generator) -> ProlongedGenerator {
    let ctx = JetContext::lagrangian();
    let d = |e: &Expr, dir: Dir| total_derivative(e, dir, &ctx).expect("order-0/1 inputs");
    let pt = Expr::var(Var::PhiT);
    let ps = Expr::var(Var::PhiS);
    let ptt = Expr::var(Var::PhiTT);
    let pts = Expr::var(Var::PhiTS);
    let pss = Expr::var(Var::PhiSS);

    let first = |dir: Dir| {
        Expr::add(vec![
            d(&x.eta, dir),
            Expr::neg(Expr::mul(vec![pt.clone(), d(&x.xi_t, dir)])),
            Expr::neg(Expr::mul(vec![ps.clone(), d(&x.xi_s, dir)])),
        ])
        .normalize()
    };
    let zeta_t = first(Dir::T);
    let zeta_s = first(Dir::Space);

    let second = |zeta: &Expr, dir: Dir, jt: &Expr, js: &Expr| {
        Expr::add(vec![
            d(zeta, dir),
            Expr::neg(Expr::mul(vec![jt.clone(), d(&x.xi_t, dir)])),
            Expr::neg(Expr::mul(vec![js.clone(), d(&x.xi_s, dir)])),
        ])
        .normalize()
    };
    let zeta_tt = second(&zeta_t, Dir::T, &ptt, &pts);
    let zeta_ts = second(&zeta_t, Dir::Space, &ptt, &pts);
    let zeta_ss = second(&zeta_s, Dir::Space, &pts, &pss);

    ProlongedGenerator { base: x.clone(), zeta_t, zeta_s, zeta_tt, zeta_ts, zeta_ss }
}

impl ProlongedGenerator {
    /// Applies `pr^2 X` to an expression on the order-2 jet space.
    pub fn apply(&self, e: &Expr) -> Result<Expr, ExprError> {
        let slots: [(&Expr, Var); 8] = [
            (&self.base.xi_t, Var::T),
            (&self.base.xi_s, Var::S),
            (&self.base.eta, Var::Phi),
            (&self.zeta_t, Var::PhiT),
            (&self.zeta_s, Var::PhiS),
            (&self.zeta_tt, Var::PhiTT),
            (&self.zeta_ts, Var::PhiTS),
            (&self.zeta_ss, Var::PhiSS),
        ];
        let mut parts = Vec::new();
        for (coeff, v) in slots {
            if coeff.is_zero_expr() {
                continue;
            }
            let dv = partial(e, &Symbol::Var(v))?;
            if !dv.is_zero_expr() {
                parts.push(Expr::mul(vec![coeff.clone(), dv]));
            }
        }
        Ok(Expr::add(parts).normalize())
    }

    /// First-order part only (enough for first-order Lagrangians).
    pub fn apply_pr1(&self, e: &Expr) -> Result<Expr, ExprError> {
        let slots: [(&Expr, Var); 5] = [
            (&self.base.xi_t, Var::T),
            (&self.base.xi_s, Var::S),
            (&self.base.eta, Var::Phi),
            (&self.zeta_t, Var::PhiT),
            (&self.zeta_s, Var::PhiS),
        ];
        let mut parts = Vec::new();
        for (coeff, v) in slots {
            if coeff.is_zero_expr() {
                continue;
            }
            let dv = partial(e, &Symbol::Var(v))?;
            if !dv.is_zero_expr() {
                parts.push(Expr::mul(vec![coeff.clone(), dv]));
            }
        }
        Ok(Expr::add(parts).normalize())
    }
}

/// Verdict of an admitted-symmetry check, with the on-shell residual kept
/// for diagnostics.
#[derive(Debug, Clone)]
pub struct Admissibility {
    pub admitted: bool,
    pub residual: Expr,
    pub outcome: ZeroOutcome,
}

/// The on-shell substitution `phi_tt -> H - G phi_ss` for a model.
pub fn on_shell_binding(m: &ModelSpec) -> Expr {
    Expr::add(vec![
        m.h_expr(),
        Expr::neg(Expr::mul(vec![m.g_expr(), Expr::var(Var::PhiSS)])),
    ])
    .normalize()
}

/// Applies `pr^2 X` to the model's Euler-Lagrange residual, substitutes
/// on shell, and zero-tests under the model's parameter domain.
pub fn check_admitted(
    x: &Generator,
    m: &ModelSpec,
    rng: &mut Srng,
) -> Result<Admissibility, ExprError> {
    let residual_expr = m.el_residual();
    let applied = prolong2(x).apply(&residual_expr)?;
    let mut bind = std::collections::BTreeMap::new();
    bind.insert(Symbol::Var(Var::PhiTT), on_shell_binding(m));
    let onshell = substitute(&applied, &bind);
    let onshell = m.concretize(&onshell);
    let outcome = is_zero(&onshell, &m.domain, rng)?;
    Ok(Admissibility { admitted: outcome.is_zero, residual: outcome.normalized.clone(), outcome })
}
