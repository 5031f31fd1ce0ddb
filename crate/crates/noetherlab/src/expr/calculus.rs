//! Partial and total derivatives, substitution, and the small power-rule
//! integrator used by the divergence splitter.

use super::jet::LiftResult;
use super::{Dir, Expr, ExprError, Func, JetContext, Node, Symbol};
use std::collections::BTreeMap;

/// Partial derivative of `e` by the symbol `v`, all other symbols held
/// independent.  The result is normalized.
pub fn partial(e: &Expr, v: &Symbol) -> Result<Expr, ExprError> {
    Ok(partial_raw(e, v)?.normalize())
}

fn partial_raw(e: &Expr, v: &Symbol) -> Result<Expr, ExprError> {
    match e.node() {
        Node::Num(_) => Ok(Expr::zero()),
        Node::Sym(s) => Ok(if s == v { Expr::one() } else { Expr::zero() }),
        Node::Add(ts) => {
            let parts: Result<Vec<Expr>, _> = ts.iter().map(|t| partial_raw(t, v)).collect();
            Ok(Expr::add(parts?))
        }
        Node::Mul(fs) => {
            let mut sum = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = partial_raw(f, v)?;
                if df.is_zero_expr() {
                    continue;
                }
                let mut prod = vec![df];
                for (j, g) in fs.iter().enumerate() {
                    if i != j {
                        prod.push(g.clone());
                    }
                }
                sum.push(Expr::mul(prod));
            }
            Ok(Expr::add(sum))
        }
        Node::Pow(b, x) => {
            let db = partial_raw(b, v)?;
            let dx = partial_raw(x, v)?;
            if dx.is_zero_expr() {
                if db.is_zero_expr() {
                    return Ok(Expr::zero());
                }
                // x * b^(x-1) * db
                let xm1 = Expr::add(vec![x.clone(), Expr::int(-1)]);
                Ok(Expr::mul(vec![x.clone(), Expr::pow(b.clone(), xm1), db]))
            } else {
                // b^x (dx ln b + x db / b)
                let term1 = Expr::mul(vec![dx, Expr::app(Func::Ln, b.clone())]);
                let term2 = Expr::mul(vec![x.clone(), db, Expr::powi(b.clone(), -1)]);
                Ok(Expr::mul(vec![e.clone(), Expr::add(vec![term1, term2])]))
            }
        }
        Node::App(f, a) => {
            let da = partial_raw(a, v)?;
            if da.is_zero_expr() {
                return Ok(Expr::zero());
            }
            let fprime = match f {
                Func::Exp => Expr::app(Func::Exp, a.clone()),
                Func::Ln => Expr::powi(a.clone(), -1),
                Func::Sin => Expr::app(Func::Cos, a.clone()),
                Func::Cos => Expr::neg(Expr::app(Func::Sin, a.clone())),
                Func::Sinh => Expr::app(Func::Cosh, a.clone()),
                Func::Cosh => Expr::app(Func::Sinh, a.clone()),
                Func::Abs => {
                    if a.assume_positive() {
                        Expr::one()
                    } else if a.assume_negative() {
                        Expr::int(-1)
                    } else {
                        return Err(ExprError::AbsDerivative(a.to_string()));
                    }
                }
                Func::GChain(k) => {
                    let next = k.checked_add(1).ok_or(ExprError::ChainOverflow)?;
                    Expr::app(Func::GChain(next), a.clone())
                }
                Func::HChain(k) => {
                    let next = k.checked_add(1).ok_or(ExprError::ChainOverflow)?;
                    Expr::app(Func::HChain(next), a.clone())
                }
            };
            Ok(Expr::mul(vec![fprime, da]))
        }
    }
}

/// Total derivative `D_t` or `D_s`/`D_x` on the jet space of `ctx`.
///
/// The input may contain jets of order <= 1 so the result stays within
/// the tracked order-2 space; higher input orders are an error.
pub fn total_derivative(e: &Expr, dir: Dir, ctx: &JetContext) -> Result<Expr, ExprError> {
    if ctx.order_in(e) >= ctx.max_order {
        return Err(ExprError::OrderOverflow(e.to_string()));
    }
    let mut parts: Vec<Expr> = Vec::new();
    // Explicit dependence on the independent variable.
    let indep = Symbol::Var(ctx.indep(dir));
    let d_indep = partial(e, &indep)?;
    if !d_indep.is_zero_expr() {
        parts.push(d_indep);
    }
    for v in e.symbols() {
        let Symbol::Var(var) = v else { continue };
        match ctx.lift(var, dir) {
            LiftResult::Zero | LiftResult::One => {} // independents handled above
            LiftResult::Jet(next) => {
                let dv = partial(e, &Symbol::Var(var))?;
                if !dv.is_zero_expr() {
                    parts.push(Expr::mul(vec![Expr::var(next), dv]));
                }
            }
            LiftResult::Overflow => {
                return Err(ExprError::OrderOverflow(e.to_string()));
            }
        }
    }
    Ok(Expr::add(parts).normalize())
}

/// Simultaneous substitution of symbols, then normalization.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
    subst_raw(e, bindings).normalize()
}

fn subst_raw(e: &Expr, b: &BTreeMap<Symbol, Expr>) -> Expr {
    match e.node() {
        Node::Num(_) => e.clone(),
        Node::Sym(s) => b.get(s).cloned().unwrap_or_else(|| e.clone()),
        Node::Add(ts) => Expr::add(ts.iter().map(|t| subst_raw(t, b)).collect()),
        Node::Mul(fs) => Expr::mul(fs.iter().map(|f| subst_raw(f, b)).collect()),
        Node::Pow(base, x) => Expr::pow(subst_raw(base, b), subst_raw(x, b)),
        Node::App(f, a) => Expr::app(*f, subst_raw(a, b)),
    }
}

/// Replaces chained function applications.  `mapper` receives the head and
/// the (already substituted) argument; returning `None` keeps the node.
pub fn substitute_funcs(
    e: &Expr,
    mapper: &impl Fn(Func, &Expr) -> Option<Expr>,
) -> Expr {
    fn go(e: &Expr, mapper: &impl Fn(Func, &Expr) -> Option<Expr>) -> Expr {
        match e.node() {
            Node::Num(_) | Node::Sym(_) => e.clone(),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| go(t, mapper)).collect()),
            Node::Mul(fs) => Expr::mul(fs.iter().map(|f| go(f, mapper)).collect()),
            Node::Pow(b, x) => Expr::pow(go(b, mapper), go(x, mapper)),
            Node::App(f, a) => {
                let arg = go(a, mapper);
                match mapper(*f, &arg) {
                    Some(replaced) => replaced,
                    None => Expr::app(*f, arg),
                }
            }
        }
    }
    go(e, mapper).normalize()
}

/// Antiderivative of `e` with respect to `v` for expressions polynomial
/// (or power-law) in `v`: each term must factor as `c(others) * v^k`.
/// `k == -1` integrates to `ln v`.
pub fn integrate(e: &Expr, v: &Symbol) -> Result<Expr, ExprError> {
    let n = e.normalize();
    let terms: Vec<Expr> = match n.node() {
        Node::Add(ts) => ts.clone(),
        _ => vec![n],
    };
    let vx = Expr::sym(v.clone());
    let mut out = Vec::new();
    for t in terms {
        let (exp, rest) = split_power_of(&t, v)?;
        if exp == Expr::int(-1) {
            out.push(Expr::mul(vec![rest, Expr::app(Func::Ln, vx.clone())]));
        } else {
            let kp1 = Expr::add(vec![exp, Expr::one()]).normalize();
            if kp1.is_zero_expr() {
                return Err(ExprError::NotIntegrable(t.to_string(), v.name()));
            }
            out.push(Expr::mul(vec![
                rest,
                Expr::powi(kp1.clone(), -1),
                Expr::pow(vx.clone(), kp1),
            ]));
        }
    }
    Ok(Expr::add(out).normalize())
}

/// Splits a normalized term into `(k, rest)` with `term == rest * v^k`,
/// requiring `rest` free of `v`.
fn split_power_of(t: &Expr, v: &Symbol) -> Result<(Expr, Expr), ExprError> {
    let vx = Expr::sym(v.clone());
    if !t.contains(v) {
        return Ok((Expr::zero(), t.clone()));
    }
    let factors: Vec<Expr> = match t.node() {
        Node::Mul(fs) => fs.clone(),
        _ => vec![t.clone()],
    };
    let mut k = Expr::zero();
    let mut rest = Vec::new();
    for f in factors {
        if !f.contains(v) {
            rest.push(f);
            continue;
        }
        match f.node() {
            Node::Sym(s) if s == v => k = Expr::add(vec![k, Expr::one()]),
            Node::Pow(b, x) if b == &vx && !x.contains(v) => {
                k = Expr::add(vec![k, x.clone()]);
            }
            _ => return Err(ExprError::NotIntegrable(t.to_string(), v.name())),
        }
    }
    Ok((k.normalize(), Expr::mul(rest).normalize()))
}

/// Derivative by name, for the CLI surface; unknown names are an error.
pub fn partial_by_name(
    e: &Expr,
    name: &str,
    table: &super::SymbolTable,
) -> Result<Expr, ExprError> {
    if let Some(v) = super::Var::from_name(name) {
        return partial(e, &Symbol::Var(v));
    }
    if let Some(p) = table.get(name) {
        return partial(e, &Symbol::Param(p.clone()));
    }
    // fall back: if the symbol occurs in the expression as a parameter
    for s in e.symbols() {
        if let Symbol::Param(p) = &s {
            if &*p.name == name {
                return partial(e, &s);
            }
        }
    }
    Err(ExprError::UnknownSymbol(name.to_string()))
}

/// Splits `e` (normalized) into the coefficient of `v^1` and the rest:
/// `e = coeff * v + remainder` where `coeff` is `v`-free; errors if `e`
/// has any other (nonlinear) dependence on `v`.
pub fn linear_coefficient(e: &Expr, v: &Symbol) -> Result<(Expr, Expr), ExprError> {
    let n = e.normalize();
    let terms: Vec<Expr> = match n.node() {
        Node::Add(ts) => ts.clone(),
        _ => vec![n.clone()],
    };
    let mut coeff = Vec::new();
    let mut rem = Vec::new();
    for t in terms {
        if !t.contains(v) {
            rem.push(t);
            continue;
        }
        let (k, rest) = split_power_of(&t, v)?;
        if k.is_one_expr() {
            coeff.push(rest);
        } else {
            return Err(ExprError::NotIntegrable(t.to_string(), v.name()));
        }
    }
    Ok((Expr::add(coeff).normalize(), Expr::add(rem).normalize()))
}

/// `true` when `e` references none of the listed symbols.
pub fn free_of(e: &Expr, syms: &[Symbol]) -> bool {
    syms.iter().all(|s| !e.contains(s))
}

impl Expr {
    /// Convenience wrapper for [`substitute`] with a single binding.
    pub fn subst(&self, sym: Symbol, to: Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(sym, to);
        substitute(self, &m)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Param, Sign, Var};
    use super::*;

    fn p(name: &str, sign: Sign) -> Param {
        Param::new(name, sign)
    }

    #[test]
    fn power_rule_with_symbolic_exponent() {
        // d/d phi_s (phi_s^lambda) = lambda phi_s^(lambda-1)
        let lam = p("lambda", Sign::Any);
        let e = Expr::pow(Expr::var(Var::PhiS), Expr::param(&lam));
        let d = partial(&e, &Symbol::Var(Var::PhiS)).unwrap();
        let expect = Expr::mul(vec![
            Expr::param(&lam),
            Expr::pow(
                Expr::var(Var::PhiS),
                Expr::add(vec![Expr::param(&lam), Expr::int(-1)]),
            ),
        ])
        .normalize();
        assert_eq!(d, expect);
    }

    #[test]
    fn chain_rule_with_negative_alpha() {
        // d/dt sin(sqrt(|alpha|) t) phi = sqrt(|alpha|) cos(sqrt(|alpha|) t) phi
        let alpha = p("alpha", Sign::Negative);
        let root = Expr::sqrt(Expr::app(Func::Abs, Expr::param(&alpha)));
        let e = Expr::mul(vec![
            Expr::app(Func::Sin, Expr::mul(vec![root.clone(), Expr::var(Var::T)])),
            Expr::var(Var::Phi),
        ])
        .normalize();
        let d = partial(&e, &Symbol::Var(Var::T)).unwrap();
        let expect = Expr::mul(vec![
            root.clone(),
            Expr::app(Func::Cos, Expr::mul(vec![root, Expr::var(Var::T)])),
            Expr::var(Var::Phi),
        ])
        .normalize();
        assert_eq!(d, expect);
    }

    #[test]
    fn lagrangian_momentum_slot() {
        // d/d phi_t (phi_t^2 / 2) = phi_t
        let e = Expr::mul(vec![
            Expr::rational(1, 2),
            Expr::powi(Expr::var(Var::PhiT), 2),
        ]);
        let d = partial(&e, &Symbol::Var(Var::PhiT)).unwrap();
        assert_eq!(d, Expr::var(Var::PhiT));
    }

    #[test]
    fn total_derivatives_bookkeeping() {
        let ctx = JetContext::lagrangian();
        // D_t phi = phi_t
        let d = total_derivative(&Expr::var(Var::Phi), Dir::T, &ctx).unwrap();
        assert_eq!(d, Expr::var(Var::PhiT));
        // D_s g(phi_s) = gp(phi_s) phi_ss
        let g = Expr::app(Func::GChain(-2), Expr::var(Var::PhiS));
        let d = total_derivative(&g, Dir::Space, &ctx).unwrap();
        let expect = Expr::mul(vec![
            Expr::app(Func::GChain(-1), Expr::var(Var::PhiS)),
            Expr::var(Var::PhiSS),
        ])
        .normalize();
        assert_eq!(d, expect);
        // order overflow
        assert!(total_derivative(&Expr::var(Var::PhiTT), Dir::T, &ctx).is_err());
    }

    #[test]
    fn commuting_total_derivatives() {
        let ctx = JetContext::lagrangian();
        let e = Expr::mul(vec![
            Expr::var(Var::Phi),
            Expr::app(Func::Sin, Expr::var(Var::T)),
        ]);
        let ts = total_derivative(
            &total_derivative(&e, Dir::T, &ctx).unwrap(),
            Dir::Space,
            &ctx,
        )
        .unwrap();
        let st = total_derivative(
            &total_derivative(&e, Dir::Space, &ctx).unwrap(),
            Dir::T,
            &ctx,
        )
        .unwrap();
        assert_eq!(ts, st);
    }

    #[test]
    fn on_shell_substitution() {
        // phi_tt + G phi_ss - H with phi_tt -> H - G phi_ss collapses to 0
        let g = Expr::app(Func::GChain(0), Expr::var(Var::PhiS));
        let h = Expr::app(Func::HChain(0), Expr::var(Var::Phi));
        let residual = Expr::add(vec![
            Expr::var(Var::PhiTT),
            Expr::mul(vec![g.clone(), Expr::var(Var::PhiSS)]),
            Expr::neg(h.clone()),
        ]);
        let onshell = Expr::add(vec![h, Expr::neg(Expr::mul(vec![g, Expr::var(Var::PhiSS)]))]);
        let out = residual.subst(Symbol::Var(Var::PhiTT), onshell);
        assert_eq!(out, Expr::zero());
    }

    #[test]
    fn parameter_substitution() {
        let lam = p("lambda", Sign::Any);
        let e = Expr::pow(Expr::var(Var::PhiS), Expr::param(&lam));
        let out = e.subst(Symbol::Param(lam), Expr::int(-3));
        assert_eq!(out, Expr::powi(Expr::var(Var::PhiS), -3).normalize());
    }

    #[test]
    fn integration_power_rule() {
        let phi = Symbol::Var(Var::Phi);
        // int 2 phi dphi = phi^2
        let e = Expr::mul(vec![Expr::int(2), Expr::var(Var::Phi)]);
        assert_eq!(
            integrate(&e, &phi).unwrap(),
            Expr::powi(Expr::var(Var::Phi), 2).normalize()
        );
        // int phi^-1 dphi = ln phi
        let e = Expr::powi(Expr::var(Var::Phi), -1);
        assert_eq!(
            integrate(&e, &phi).unwrap(),
            Expr::app(Func::Ln, Expr::var(Var::Phi))
        );
        // sin(phi) is not a polynomial in phi
        let e = Expr::app(Func::Sin, Expr::var(Var::Phi));
        assert!(integrate(&e, &phi).is_err());
    }

    #[test]
    fn linear_coefficient_extraction() {
        let v = Symbol::Var(Var::PhiT);
        let e = Expr::add(vec![
            Expr::mul(vec![Expr::var(Var::T), Expr::var(Var::PhiT)]),
            Expr::var(Var::Phi),
        ]);
        let (c, r) = linear_coefficient(&e, &v).unwrap();
        assert_eq!(c, Expr::var(Var::T));
        assert_eq!(r, Expr::var(Var::Phi));
        let quad = Expr::powi(Expr::var(Var::PhiT), 2);
        assert!(linear_coefficient(&quad, &v).is_err());
    }
}
