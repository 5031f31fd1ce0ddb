//! The classifying equations.
//!
//! The determining equations reduce every admitted generator to the ansatz
//!
//! ```text
//! xi_s = C1 s + C2
//! eta  = (xi_t'/2 + C3) phi + tau1(t) s + tau2(t)
//! ```
//!
//! with `xi_t = xi_t(t)`, leaving three residual conditions on the
//! constants, `tau1`, `tau2` and the arbitrary elements:
//!
//! ```text
//! R1 = ((xi_t'/2 + C3 - C1) phi_s + tau1) G' + 2 (xi_t' - C1) G
//! R2 = ((xi_t'/2 + C3) phi + tau2) H' - (C3 - 3 xi_t'/2) H
//!        - xi_t''' phi / 2 - tau2''
//! R3 = tau1 H' - tau1''
//! ```
//!
//! All three vanish exactly when the generator is admitted.

use super::Generator;
use crate::expr::{free_of, partial, Chain, Expr, ExprError, Symbol, Var};
use crate::model::ModelSpec;

/// A generator decomposed into the reduced-ansatz data.
#[derive(Debug, Clone)]
pub struct ReducedAnsatz {
    pub xi_t: Expr,
    pub c1: Expr,
    pub c2: Expr,
    pub c3: Expr,
    pub tau1: Expr,
    pub tau2: Expr,
}

#[derive(Debug, thiserror::Error)]
pub enum AnsatzError {
    #[error("generator is outside the reduced ansatz: {0}")]
    OutOfAnsatz(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn must_be_free(e: &Expr, of: &[Var], what: &str) -> Result<(), AnsatzError> {
    let syms: Vec<Symbol> = of.iter().map(|v| Symbol::Var(*v)).collect();
    if free_of(e, &syms) {
        Ok(())
    } else {
        Err(AnsatzError::OutOfAnsatz(format!("{what} = {e} depends on a forbidden variable")))
    }
}

/// Pattern-matches the generator against the reduced ansatz.
pub fn extract_ansatz(x: &Generator) -> Result<ReducedAnsatz, AnsatzError> {
    let t = Symbol::Var(Var::T);
    let s = Symbol::Var(Var::S);
    let phi = Symbol::Var(Var::Phi);

    must_be_free(&x.xi_t, &[Var::S, Var::Phi], "xi_t")?;
    must_be_free(&x.xi_s, &[Var::T, Var::Phi], "xi_s")?;

    let c1 = partial(&x.xi_s, &s)?;
    must_be_free(&c1, &[Var::T, Var::S, Var::Phi], "C1 = d xi_s / d s")?;
    let c2 = Expr::add(vec![
        x.xi_s.clone(),
        Expr::neg(Expr::mul(vec![c1.clone(), Expr::sym(s.clone())])),
    ])
    .normalize();
    must_be_free(&c2, &[Var::T, Var::S, Var::Phi], "C2")?;

    // eta = A(t) phi + tau1(t) s + tau2(t) with A = xi_t'/2 + C3
    let a = partial(&x.eta, &phi)?;
    must_be_free(&a, &[Var::S, Var::Phi], "d eta / d phi")?;
    let tau1 = partial(&x.eta, &s)?;
    must_be_free(&tau1, &[Var::S, Var::Phi], "tau1 = d eta / d s")?;
    let tau2 = Expr::add(vec![
        x.eta.clone(),
        Expr::neg(Expr::mul(vec![a.clone(), Expr::sym(phi.clone())])),
        Expr::neg(Expr::mul(vec![tau1.clone(), Expr::sym(s.clone())])),
    ])
    .normalize();
    must_be_free(&tau2, &[Var::S, Var::Phi], "tau2")?;

    let xi_t_t = partial(&x.xi_t, &t)?;
    let c3 = Expr::add(vec![
        a,
        Expr::neg(Expr::mul(vec![Expr::rational(1, 2), xi_t_t])),
    ])
    .normalize();
    must_be_free(&c3, &[Var::T, Var::S, Var::Phi], "C3 = d eta/d phi - xi_t'/2")?;

    Ok(ReducedAnsatz { xi_t: x.xi_t.clone(), c1, c2, c3, tau1, tau2 })
}

/// The three classifying residuals for `x` against the model's `G`, `H`.
/// Admitted generators give `(0, 0, 0)`.
pub fn classifying_residuals(
    x: &Generator,
    m: &ModelSpec,
) -> Result<[Expr; 3], AnsatzError> {
    let a = extract_ansatz(x)?;
    let t = Symbol::Var(Var::T);
    let phi_s = Expr::var(Var::PhiS);
    let phi = Expr::var(Var::Phi);

    let xi_t_t = partial(&a.xi_t, &t)?;
    let xi_t_ttt = partial(&partial(&xi_t_t, &t)?, &t)?;
    let tau1_tt = partial(&partial(&a.tau1, &t)?, &t)?;
    let tau2_tt = partial(&partial(&a.tau2, &t)?, &t)?;

    let half_xi = Expr::mul(vec![Expr::rational(1, 2), xi_t_t.clone()]);

    let g0 = m
        .chain_template(Chain::G, 0, &phi_s)
        .expect("G is defined at order 0");
    let g1 = m
        .chain_template(Chain::G, 1, &phi_s)
        .expect("G' is defined at order 1");
    let h0 = m.chain_template(Chain::H, 0, &phi).expect("H at order 0");
    let h1 = m.chain_template(Chain::H, 1, &phi).expect("H' at order 1");

    // R1 = ((xi_t'/2 + C3 - C1) phi_s + tau1) G' + 2 (xi_t' - C1) G
    let r1 = Expr::add(vec![
        Expr::mul(vec![
            Expr::add(vec![
                Expr::mul(vec![
                    Expr::add(vec![half_xi.clone(), a.c3.clone(), Expr::neg(a.c1.clone())]),
                    phi_s.clone(),
                ]),
                a.tau1.clone(),
            ]),
            g1,
        ]),
        Expr::mul(vec![
            Expr::int(2),
            Expr::add(vec![xi_t_t.clone(), Expr::neg(a.c1.clone())]),
            g0,
        ]),
    ])
    .normalize();

    // R2 = ((xi_t'/2 + C3) phi + tau2) H' - (C3 - 3 xi_t'/2) H
    //        - xi_t''' phi / 2 - tau2''
    let r2 = Expr::add(vec![
        Expr::mul(vec![
            Expr::add(vec![
                Expr::mul(vec![Expr::add(vec![half_xi.clone(), a.c3.clone()]), phi.clone()]),
                a.tau2.clone(),
            ]),
            h1.clone(),
        ]),
        Expr::neg(Expr::mul(vec![
            Expr::add(vec![
                a.c3.clone(),
                Expr::neg(Expr::mul(vec![Expr::rational(3, 2), xi_t_t.clone()])),
            ]),
            h0,
        ])),
        Expr::neg(Expr::mul(vec![Expr::rational(1, 2), xi_t_ttt, phi.clone()])),
        Expr::neg(tau2_tt),
    ])
    .normalize();

    // R3 = tau1 H' - tau1''
    let r3 = Expr::add(vec![
        Expr::mul(vec![a.tau1.clone(), h1]),
        Expr::neg(tau1_tt),
    ])
    .normalize();

    Ok([r1, r2, r3])
}
