//! Tour of the symbolic kernel: parsing, normal form, derivatives on the
//! jet space, substitution, and the structural + numeric zero test.

use noetherlab::expr::{
    is_zero, parse_expr, partial, total_derivative, Dir, Expr, JetContext, ParamSpec,
    ParameterDomain, Sign, Symbol, Var,
};
use noetherlab::rng::Srng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = ParameterDomain::new()
        .with("lambda", ParamSpec { sign: Sign::Any, nonzero: true, exclude: vec![] })
        .with("alpha", ParamSpec { sign: Sign::Negative, nonzero: true, exclude: vec![] });
    let table = domain.symbol_table();

    // normal form: constants fold, like terms collect, powers merge
    let e = parse_expr("phi_s^lambda * phi_s^-1 * phi_s + 2*(1/3) - 2/3", &table)?;
    println!("normalized: {e}");

    // the fixed trig rewrite set
    let e = parse_expr("sin(t)^2 + cos(t)^2 - 1", &table)?;
    println!("sin^2 + cos^2 - 1  ->  {e}");
    let e = parse_expr("sin(2*t) - 2*sin(t)*cos(t)", &table)?;
    println!("double angle       ->  {e}");

    // |alpha| folds using the sign tag (alpha < 0 here)
    let e = parse_expr("abs(alpha)", &table)?;
    println!("abs(alpha), alpha < 0  ->  {e}");

    // partial derivatives: the power rule with a symbolic exponent
    let e = parse_expr("phi_s^lambda", &table)?;
    let d = partial(&e, &Symbol::Var(Var::PhiS))?;
    println!("d/d phi_s phi_s^lambda = {d}");

    // total derivatives chain through the antiderivative symbols
    let ctx = JetContext::lagrangian();
    let g = parse_expr("g(phi_s)", &table)?;
    println!("D_s g(phi_s) = {}", total_derivative(&g, Dir::Space, &ctx)?);
    let l = parse_expr("phi_t^2/2 + g(phi_s)", &table)?;
    let tl = Expr::mul(vec![Expr::var(Var::T), l.clone()]);
    println!("D_t (t L)    = {}", total_derivative(&tl, Dir::T, &ctx)?);

    // substitution: on shell the residual collapses
    let residual = parse_expr("phi_tt + G(phi_s)*phi_ss - H(phi)", &table)?;
    let onshell = parse_expr("H(phi) - G(phi_s)*phi_ss", &table)?;
    let collapsed = residual.subst(Symbol::Var(Var::PhiTT), onshell);
    println!("residual on shell = {collapsed}");

    // the zero test pairs the normal form with 100-point sampling
    let mut rng = Srng::new(42);
    let claim = parse_expr("cosh(t)^2 - sinh(t)^2 - 1", &table)?;
    let z = is_zero(&claim, &domain, &mut rng)?;
    println!("cosh^2 - sinh^2 - 1 == 0 ? {}", z.is_zero);
    let not_zero = parse_expr("phi_t + phi_s", &table)?;
    let z = is_zero(&not_zero, &domain, &mut rng)?;
    println!("phi_t + phi_s == 0 ? {} (worst |value| ratio {:.2e})", z.is_zero, z.worst_ratio);
    Ok(())
}
