//! The equivalence group: transformations of `(t, s, phi)` together with
//! the arbitrary elements `(G, H)` that preserve the structural class of
//! the equation.  Applying one to a `(model, generator)` pair yields a new
//! pair whose admitted-symmetry check must still pass.
//!
//! Finite forms are exact: scalings take a rational factor `k` (the group
//! parameter is `eps = ln k`), shifts take a rational `eps` directly, so
//! transformed models and generators stay inside the exact-rational
//! expression kernel.  A transformed family that leaves its normal form
//! (for example a scaled exponential `G`) degrades to the `Arbitrary`
//! family carrying the composed expression, which keeps every downstream
//! check available; combinations with no valid representation at all
//! (for example scaling an exponential `H`) are errors.

use super::Generator;
use crate::expr::{
    partial, substitute, Expr, ExprError, Func, Rat, Sign, Symbol, Var,
};
use crate::model::{Coeff, GFamily, HFamily, ModelError, ModelSpec};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// The finite transformations implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    /// `t -> t + eps`.
    TShift,
    /// `s -> s + eps`.
    SShift,
    /// `phi -> phi + eps`; `H` composes with the shift.
    PhiShift,
    /// `t -> k t, s -> k s`; `H -> H / k^2`, `G(z) -> G(k z)`.
    TsScale,
    /// `s -> k s`; `G(z) -> k^2 G(k z)`.
    SScale,
    /// `phi -> k phi`; `G(z) -> G(z/k)`, `H(z) -> k H(z/k)`.
    PhiScale,
    /// Family-preserving scaling for `G = -(phi_s + c)^lambda`:
    /// `t -> a t, s -> b s` with `b^(lambda+2) = a^2`, parametrized by a
    /// rational `w > 0` (`b = w^(2q)`, `a = w^(p+2q)` for `lambda = p/q`).
    PowerScale,
    /// `phi -> -phi, s -> -s`; `H(z) -> -H(-z)` (`G` unchanged).
    Involution,
    /// `phi -> phi + eps f(sqrt(|alpha|) t)` for `H = alpha phi`;
    /// the model is unchanged.
    TrigShift(Oscillator),
}

/// Which oscillator solution shifts `phi` in [`TransformKind::TrigShift`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillator {
    Sin,
    Cos,
    Sinh,
    Cosh,
}

/// A named equivalence generator with its infinitesimal coefficients
/// (kept for display) and the finite transform it exponentiates to.
#[derive(Debug, Clone)]
pub struct EquivalenceGenerator {
    pub name: String,
    pub kind: TransformKind,
    /// Infinitesimal form in the directions (d_t, d_s, d_phi, d_G, d_H,
    /// d_phi_s), written in the text grammar.
    pub infinitesimal: String,
}

/// The six kernel equivalence generators, the involution, and the
/// oscillator shifts of the linear-`H` column.
pub fn equivalence_generators() -> Vec<EquivalenceGenerator> {
    use TransformKind::*;
    let gen = |name: &str, kind, inf: &str| EquivalenceGenerator {
        name: name.into(),
        kind,
        infinitesimal: inf.into(),
    };
    vec![
        gen("E1", TShift, "d_t"),
        gen("E2", SShift, "d_s"),
        gen("E3", PhiShift, "d_phi"),
        gen("E4", TsScale, "t*d_t + s*d_s - 2*H*d_H - phi_s*d_phi_s"),
        gen("E5", SScale, "s*d_s + 2*G*d_G - phi_s*d_phi_s"),
        gen("E6", PhiScale, "phi*d_phi + H*d_H + phi_s*d_phi_s"),
        gen("E5xE4", PowerScale, "family-preserving combination of E4 and E5 for power G"),
        gen("R", Involution, "phi -> -phi, s -> -s, H -> -H"),
        gen("E7-sin", TrigShift(Oscillator::Sin), "sin(sqrt(abs(alpha))*t)*d_phi"),
        gen("E7-cos", TrigShift(Oscillator::Cos), "cos(sqrt(abs(alpha))*t)*d_phi"),
        gen("E7-sinh", TrigShift(Oscillator::Sinh), "sinh(sqrt(alpha)*t)*d_phi"),
        gen("E7-cosh", TrigShift(Oscillator::Cosh), "cosh(sqrt(alpha)*t)*d_phi"),
    ]
}

#[derive(Debug, thiserror::Error)]
pub enum EquivError {
    #[error("transform {kind:?} does not map this model back into a supported family: {why}")]
    Family { kind: String, why: String },
    #[error("scaling factor must be a positive rational, got {0}")]
    BadFactor(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn family_err(kind: TransformKind, why: &str) -> EquivError {
    EquivError::Family { kind: format!("{kind:?}"), why: why.into() }
}

/// Pushes a generator through the invertible point map `fwd` (images of
/// `t, s, phi` as expressions in `t, s, phi`) with inverse `inv`.
fn pushforward(x: &Generator, fwd: &[Expr; 3], inv: &[Expr; 3]) -> Result<Generator, ExprError> {
    let vars = [Var::T, Var::S, Var::Phi];
    let mut bind = BTreeMap::new();
    for (v, e) in vars.iter().zip(inv.iter()) {
        bind.insert(Symbol::Var(*v), e.clone());
    }
    let mut coeffs = Vec::with_capacity(3);
    for target in fwd {
        // X applied to the target coordinate, then re-expressed in the
        // new coordinates via the inverse map.
        let mut applied = Expr::zero();
        for (v, c) in vars.iter().zip([&x.xi_t, &x.xi_s, &x.eta]) {
            let d = partial(target, &Symbol::Var(*v))?;
            applied = Expr::add(vec![applied, Expr::mul(vec![c.clone(), d])]);
        }
        coeffs.push(substitute(&applied.normalize(), &bind));
    }
    Ok(Generator {
        name: format!("{}*", x.name),
        xi_t: coeffs[0].clone(),
        xi_s: coeffs[1].clone(),
        eta: coeffs[2].clone(),
    })
}

fn t() -> Expr {
    Expr::var(Var::T)
}
fn s() -> Expr {
    Expr::var(Var::S)
}
fn phi() -> Expr {
    Expr::var(Var::Phi)
}
fn phi_s() -> Expr {
    Expr::var(Var::PhiS)
}

/// Composes an arbitrary-family expression with an argument map.
fn composed(family_expr: &Expr, var: Var, image: Expr) -> Expr {
    family_expr.subst(Symbol::Var(var), image)
}

/// `G` as a concrete/opaque expression in `phi_s` for family degrades.
fn g_as_expr(m: &ModelSpec) -> Expr {
    m.g_expr()
}

fn h_as_expr(m: &ModelSpec) -> Expr {
    m.h_expr()
}

/// Applies the finite transform `e` with exact rational parameter `eps`
/// (a shift amount, or the scale factor `k = exp(eps)` for scalings).
pub fn apply_equivalence(
    e: &EquivalenceGenerator,
    eps: &Rat,
    m: &ModelSpec,
    x: &Generator,
) -> Result<(ModelSpec, Generator), EquivError> {
    use TransformKind::*;
    let ev = Expr::num(eps.clone());
    match e.kind {
        TShift => {
            let fwd = [Expr::add(vec![t(), ev.clone()]), s(), phi()];
            let inv = [Expr::sub(t(), ev.clone()), s(), phi()];
            let gx = pushforward(x, &fwd, &inv)?;
            Ok((m.clone(), gx))
        }
        SShift => {
            let fwd = [t(), Expr::add(vec![s(), ev.clone()]), phi()];
            let inv = [t(), Expr::sub(s(), ev.clone()), phi()];
            let gx = pushforward(x, &fwd, &inv)?;
            Ok((m.clone(), gx))
        }
        PhiShift => {
            let h = match &m.h {
                HFamily::Zero => HFamily::Zero,
                HFamily::Arbitrary(expr) => HFamily::Arbitrary(composed(
                    expr,
                    Var::Phi,
                    Expr::sub(phi(), ev.clone()),
                )),
                other => {
                    return Err(family_err(
                        e.kind,
                        &format!("phi-shift leaves the {other:?} family"),
                    ))
                }
            };
            let model = ModelSpec::new(m.g.clone(), h, m.domain.clone())?;
            let fwd = [t(), s(), Expr::add(vec![phi(), ev.clone()])];
            let inv = [t(), s(), Expr::sub(phi(), ev.clone())];
            Ok((model, pushforward(x, &fwd, &inv)?))
        }
        TsScale => {
            let k = positive_factor(eps)?;
            // G(z) -> G(k z)
            let g = match &m.g {
                GFamily::Arbitrary(expr) => GFamily::Arbitrary(composed(
                    expr,
                    Var::PhiS,
                    Expr::mul(vec![Expr::num(k.clone()), phi_s()]),
                )),
                GFamily::Exponential { mu } => match mu {
                    Coeff::Rat(q) => GFamily::Exponential { mu: Coeff::Rat(q * &k) },
                    Coeff::Sym(_) => GFamily::Arbitrary(composed(
                        &g_as_expr(m),
                        Var::PhiS,
                        Expr::mul(vec![Expr::num(k.clone()), phi_s()]),
                    )),
                },
                GFamily::Power { .. } => {
                    return Err(family_err(
                        e.kind,
                        "uniform (t, s) scaling rescales the power-family coefficient; \
                         use the family-preserving PowerScale combination instead",
                    ))
                }
            };
            // H -> H / k^2
            let inv_k2 = Coeff::Rat(Rat::one() / (&k * &k));
            let h = scale_h(&m.h, &inv_k2, m).map_err(|why| family_err(e.kind, &why))?;
            let model = ModelSpec::new(g, h, m.domain.clone())?;
            let ke = Expr::num(k.clone());
            let kinv = Expr::num(Rat::one() / &k);
            let fwd = [
                Expr::mul(vec![ke.clone(), t()]),
                Expr::mul(vec![ke, s()]),
                phi(),
            ];
            let inv = [
                Expr::mul(vec![kinv.clone(), t()]),
                Expr::mul(vec![kinv, s()]),
                phi(),
            ];
            Ok((model, pushforward(x, &fwd, &inv)?))
        }
        SScale => {
            let k = positive_factor(eps)?;
            // G(z) -> k^2 G(k z); lambda = -2 powers are invariant.
            let g = match &m.g {
                GFamily::Power { lambda, c }
                    if lambda.as_rat() == Some(&crate::expr::rat(-2, 1)) && c.is_zero() =>
                {
                    m.g.clone()
                }
                _ => {
                    let composed_g = composed(
                        &g_as_expr(m),
                        Var::PhiS,
                        Expr::mul(vec![Expr::num(k.clone()), phi_s()]),
                    );
                    GFamily::Arbitrary(
                        Expr::mul(vec![Expr::num(&k * &k), composed_g]).normalize(),
                    )
                }
            };
            let model = ModelSpec::new(g, m.h.clone(), m.domain.clone())?;
            let ke = Expr::num(k.clone());
            let kinv = Expr::num(Rat::one() / &k);
            let fwd = [t(), Expr::mul(vec![ke, s()]), phi()];
            let inv = [t(), Expr::mul(vec![kinv, s()]), phi()];
            Ok((model, pushforward(x, &fwd, &inv)?))
        }
        PhiScale => {
            let k = positive_factor(eps)?;
            let kinv = Rat::one() / &k;
            // G(z) -> G(z/k)
            let g = match &m.g {
                GFamily::Arbitrary(expr) => GFamily::Arbitrary(composed(
                    expr,
                    Var::PhiS,
                    Expr::mul(vec![Expr::num(kinv.clone()), phi_s()]),
                )),
                GFamily::Exponential { mu: Coeff::Rat(q) } => {
                    GFamily::Exponential { mu: Coeff::Rat(q * &kinv) }
                }
                _ => GFamily::Arbitrary(composed(
                    &g_as_expr(m),
                    Var::PhiS,
                    Expr::mul(vec![Expr::num(kinv.clone()), phi_s()]),
                )),
            };
            // H(z) -> k H(z/k)
            let h = match &m.h {
                HFamily::Zero => HFamily::Zero,
                HFamily::Linear { alpha } => HFamily::Linear { alpha: alpha.clone() },
                HFamily::PowerLaw { alpha: Coeff::Rat(a), beta: Coeff::Rat(b) } => {
                    // beta -> beta k^(1-alpha): rational only for integer alpha
                    if a.is_integer() {
                        let p = a.to_integer().to_i64().unwrap_or(i64::MAX);
                        if p.unsigned_abs() <= 16 {
                            let factor = rat_pow(&k, 1 - p);
                            HFamily::PowerLaw {
                                alpha: Coeff::Rat(a.clone()),
                                beta: Coeff::Rat(b * &factor),
                            }
                        } else {
                            return Err(family_err(e.kind, "power-law exponent too large"));
                        }
                    } else {
                        degrade_h(m, &k)?
                    }
                }
                HFamily::CubicPlusLinear { alpha, beta } => {
                    let b = match beta {
                        Coeff::Rat(b) => Coeff::Rat(b * &rat_pow(&k, 4)),
                        Coeff::Sym(_) => return Ok(degraded_phi_scale(m, x, &k)?),
                    };
                    HFamily::CubicPlusLinear { alpha: alpha.clone(), beta: b }
                }
                HFamily::Arbitrary(expr) => {
                    let inner =
                        composed(expr, Var::Phi, Expr::mul(vec![Expr::num(kinv.clone()), phi()]));
                    HFamily::Arbitrary(Expr::mul(vec![Expr::num(k.clone()), inner]).normalize())
                }
                _ => degrade_h(m, &k)?,
            };
            let model = ModelSpec::new(g, h, m.domain.clone())?;
            let ke = Expr::num(k.clone());
            let kinv_e = Expr::num(kinv);
            let fwd = [t(), s(), Expr::mul(vec![ke, phi()])];
            let inv = [t(), s(), Expr::mul(vec![kinv_e, phi()])];
            Ok((model, pushforward(x, &fwd, &inv)?))
        }
        PowerScale => {
            let GFamily::Power { lambda, c } = &m.g else {
                return Err(family_err(e.kind, "PowerScale applies to the power family only"));
            };
            let Some(lam) = lambda.as_rat() else {
                return Err(family_err(e.kind, "PowerScale needs a concrete rational lambda"));
            };
            let w = positive_factor(eps)?;
            let p = lam
                .numer()
                .to_i64()
                .ok_or_else(|| EquivError::BadFactor("lambda numerator overflow".into()))?;
            let q = lam
                .denom()
                .to_i64()
                .ok_or_else(|| EquivError::BadFactor("lambda denominator overflow".into()))?;
            if q.unsigned_abs() > 4 || p.unsigned_abs() > 12 {
                return Err(family_err(e.kind, "lambda too wild for an exact power scale"));
            }
            // t -> a t, s -> b s with b^(lambda+2) = a^2 keeps the family:
            // b = w^(2q), a = w^(p + 2q); c rescales by 1/b.
            let a = rat_pow(&w, p + 2 * q);
            let b = rat_pow(&w, 2 * q);
            let c_new = c * &(Rat::one() / &b);
            let g = GFamily::Power { lambda: lambda.clone(), c: c_new };
            // H -> H / a^2
            let inv_a2 = Coeff::Rat(Rat::one() / (&a * &a));
            let h = scale_h(&m.h, &inv_a2, m).map_err(|why| family_err(e.kind, &why))?;
            let model = ModelSpec::new(g, h, m.domain.clone())?;
            let (ae, be) = (Expr::num(a.clone()), Expr::num(b.clone()));
            let (ai, bi) = (Expr::num(Rat::one() / &a), Expr::num(Rat::one() / &b));
            let fwd = [Expr::mul(vec![ae, t()]), Expr::mul(vec![be, s()]), phi()];
            let inv = [Expr::mul(vec![ai, t()]), Expr::mul(vec![bi, s()]), phi()];
            Ok((model, pushforward(x, &fwd, &inv)?))
        }
        Involution => {
            // phi -> -phi, s -> -s: phi_s is untouched so G is unchanged;
            // H(z) -> -H(-z).
            let h = match &m.h {
                HFamily::Zero => HFamily::Zero,
                HFamily::Linear { alpha } => HFamily::Linear { alpha: alpha.clone() },
                HFamily::CubicPlusLinear { alpha, beta } => {
                    HFamily::CubicPlusLinear { alpha: alpha.clone(), beta: beta.clone() }
                }
                HFamily::PowerLaw { alpha, beta } => {
                    let Some(a) = alpha.as_rat() else {
                        return Err(family_err(e.kind, "involution of a symbolic power law"));
                    };
                    if !a.is_integer() {
                        return Err(family_err(
                            e.kind,
                            "involution flips the sign of phi; non-integer powers leave the real domain",
                        ));
                    }
                    let odd = (a.to_integer() % 2i32).abs() == 1.into();
                    let b = match (odd, beta) {
                        (true, b) => b.clone(),
                        (false, Coeff::Rat(b)) => Coeff::Rat(-b.clone()),
                        (false, Coeff::Sym(_)) => {
                            return Err(family_err(
                                e.kind,
                                "even power law with symbolic coefficient flips sign out of its domain tag",
                            ))
                        }
                    };
                    HFamily::PowerLaw { alpha: alpha.clone(), beta: b }
                }
                HFamily::Arbitrary(expr) => {
                    let inner = composed(expr, Var::Phi, Expr::neg(phi()));
                    HFamily::Arbitrary(Expr::neg(inner).normalize())
                }
                HFamily::Exponential { .. } => {
                    return Err(family_err(e.kind, "-exp(-alpha phi) is outside the family"))
                }
            };
            let model = ModelSpec::new(m.g.clone(), h, m.domain.clone())?;
            let fwd = [t(), Expr::neg(s()), Expr::neg(phi())];
            let inv = [t(), Expr::neg(s()), Expr::neg(phi())];
            Ok((model, pushforward(x, &fwd, &inv)?))
        }
        TrigShift(osc) => {
            let HFamily::Linear { alpha } = &m.h else {
                return Err(family_err(e.kind, "oscillator shifts require H = alpha phi"));
            };
            let sign_ok = |wants_negative: bool| match alpha {
                Coeff::Rat(q) => q.is_negative() == wants_negative,
                Coeff::Sym(p) => {
                    (p.sign == Sign::Negative) == wants_negative && p.sign != Sign::Any
                }
            };
            let (f, needs_negative) = oscillator_expr(osc, alpha, &m.domain);
            if !sign_ok(needs_negative) {
                return Err(family_err(e.kind, "oscillator kind does not match sign(alpha)"));
            }
            let shift = Expr::mul(vec![ev.clone(), f]).normalize();
            let fwd = [t(), s(), Expr::add(vec![phi(), shift.clone()])];
            let inv = [t(), s(), Expr::sub(phi(), shift)];
            Ok((m.clone(), pushforward(x, &fwd, &inv)?))
        }
    }
}

/// Scales every coefficient of `H` by a rational factor; errors (with a
/// reason) when the family cannot absorb it.
fn scale_h(h: &HFamily, factor: &Coeff, _m: &ModelSpec) -> Result<HFamily, String> {
    let Coeff::Rat(k) = factor else {
        return Err("internal: scale factor must be rational".into());
    };
    Ok(match h {
        HFamily::Zero => HFamily::Zero,
        HFamily::Linear { alpha } => HFamily::Linear {
            alpha: scale_coeff(alpha, k).ok_or("linear coefficient cannot absorb the factor")?,
        },
        HFamily::PowerLaw { alpha, beta } => HFamily::PowerLaw {
            alpha: alpha.clone(),
            beta: scale_coeff(beta, k).ok_or("power-law coefficient cannot absorb the factor")?,
        },
        HFamily::CubicPlusLinear { alpha, beta } => HFamily::CubicPlusLinear {
            alpha: scale_coeff(alpha, k).ok_or("linear part cannot absorb the factor")?,
            beta: scale_coeff(beta, k).ok_or("cubic part cannot absorb the factor")?,
        },
        HFamily::Arbitrary(expr) => {
            HFamily::Arbitrary(Expr::mul(vec![Expr::num(k.clone()), expr.clone()]).normalize())
        }
        HFamily::Exponential { .. } => {
            return Err("a scaled exponential source leaves the family".into())
        }
    })
}

/// `coeff * k`, staying exact: rational coefficients multiply; symbolic
/// ones survive only under the identity factor.
fn scale_coeff(c: &Coeff, k: &Rat) -> Option<Coeff> {
    match c {
        Coeff::Rat(q) => Some(Coeff::Rat(q * k)),
        Coeff::Sym(p) => {
            if k.is_one() {
                Some(Coeff::Sym(p.clone()))
            } else {
                // alpha * k with symbolic alpha: the scaled model keeps the
                // same sign tag, so fold the factor into a fresh scaled
                // symbol is not possible exactly; signal a degrade.
                None
            }
        }
    }
}

fn degrade_h(m: &ModelSpec, k: &Rat) -> Result<HFamily, EquivError> {
    let kinv = Rat::one() / k;
    let inner = composed(
        &h_as_expr(m),
        Var::Phi,
        Expr::mul(vec![Expr::num(kinv), phi()]),
    );
    Ok(HFamily::Arbitrary(
        Expr::mul(vec![Expr::num(k.clone()), inner]).normalize(),
    ))
}

fn degraded_phi_scale(
    m: &ModelSpec,
    x: &Generator,
    k: &Rat,
) -> Result<(ModelSpec, Generator), EquivError> {
    let kinv = Rat::one() / k;
    let g = GFamily::Arbitrary(composed(
        &g_as_expr(m),
        Var::PhiS,
        Expr::mul(vec![Expr::num(kinv.clone()), phi_s()]),
    ));
    let h = degrade_h(m, k)?;
    let model = ModelSpec::new(g, h, m.domain.clone())?;
    let fwd = [t(), s(), Expr::mul(vec![Expr::num(k.clone()), phi()])];
    let inv = [t(), s(), Expr::mul(vec![Expr::num(kinv), phi()])];
    Ok((model, pushforward(x, &fwd, &inv)?))
}

fn oscillator_expr(osc: Oscillator, alpha: &Coeff, domain: &crate::expr::ParameterDomain) -> (Expr, bool) {
    let alpha_expr = match alpha {
        Coeff::Rat(q) => Expr::num(q.clone()),
        Coeff::Sym(p) => Expr::param(&domain.param(&p.name)),
    };
    let root_abs = Expr::sqrt(Expr::app(Func::Abs, alpha_expr.clone()));
    let arg = Expr::mul(vec![root_abs, t()]).normalize();
    match osc {
        Oscillator::Sin => (Expr::app(Func::Sin, arg), true),
        Oscillator::Cos => (Expr::app(Func::Cos, arg), true),
        Oscillator::Sinh => (Expr::app(Func::Sinh, arg), false),
        Oscillator::Cosh => (Expr::app(Func::Cosh, arg), false),
    }
}

fn positive_factor(eps: &Rat) -> Result<Rat, EquivError> {
    if eps.is_positive() {
        Ok(eps.clone())
    } else {
        Err(EquivError::BadFactor(eps.to_string()))
    }
}

fn rat_pow(b: &Rat, n: i64) -> Rat {
    let mut acc = Rat::one();
    let mut base = if n >= 0 { b.clone() } else { Rat::one() / b };
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc *= &base;
        }
        let sq = &base * &base;
        base = sq;
        k >>= 1;
    }
    acc
}
