//! The classified model families and the equation they generate.
//!
//! A [`ModelSpec`] is a `(G, H)` pair: `G(phi_s) = g''` multiplies `phi_ss`
//! and `H(phi) = h'` is the source, giving the Euler-Lagrange equation of
//! `L = phi_t^2/2 + g(phi_s) + h(phi)`:
//!
//! ```text
//! phi_tt + G(phi_s) phi_ss - H(phi) = 0          (residual convention)
//! ```
//!
//! `G < 0` keeps the equation hyperbolic (wave speed `sqrt(-G)`), so the
//! concrete families all carry a leading minus sign.  The default `phi_s`
//! domain is `(0, inf)`: `rho = 1/phi_s` stays positive and real powers are
//! well defined.
//!
//! In Eulerian coordinates the same model reads
//!
//! ```text
//! rho_t + u rho_x + rho u_x = 0
//! u_t + u u_x - G(1/rho) rho^-3 rho_x - H(x) = 0
//! ```

use crate::expr::{
    parse_expr, parse_rational, partial, substitute_funcs, total_derivative, Chain, Dir, Expr,
    ExprError, Func, JetContext, Param, ParameterDomain, Rat, Sign, Symbol, Var,
};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

fn rat(n: i64, d: i64) -> Rat {
    crate::expr::rat(n, d)
}

/// A coefficient that is either an exact rational or a named parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Coeff {
    Rat(Rat),
    Sym(Param),
}

impl Coeff {
    pub fn expr(&self) -> Expr {
        match self {
            Coeff::Rat(q) => Expr::num(q.clone()),
            Coeff::Sym(p) => Expr::param(p),
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Coeff::Rat(q) => Some(q),
            Coeff::Sym(_) => None,
        }
    }

    /// Parses "-3" or "1/2" as a rational, anything identifier-like as a
    /// parameter name resolved against the domain.
    pub fn parse(s: &str, domain: &ParameterDomain) -> Result<Coeff, ModelError> {
        if let Some(q) = parse_rational(s) {
            return Ok(Coeff::Rat(q));
        }
        if s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        {
            return Ok(Coeff::Sym(domain.param(s)));
        }
        Err(ModelError::BadCoefficient(s.to_string()))
    }

    fn to_raw(&self) -> String {
        match self {
            Coeff::Rat(q) => {
                if q.is_integer() {
                    q.to_integer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Coeff::Sym(p) => p.name.to_string(),
        }
    }
}

/// The `G = g''` family of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum GFamily {
    /// An arbitrary expression in `phi_s`; the fully opaque case is
    /// `G(phi_s)` itself (see [`GFamily::opaque`]).
    Arbitrary(Expr),
    /// `G = -(phi_s + c)^lambda`, `lambda (1 - lambda) != 0`.
    Power { lambda: Coeff, c: Rat },
    /// `G = -exp(mu phi_s)`, `mu != 0`.
    Exponential { mu: Coeff },
}

impl GFamily {
    pub fn opaque() -> GFamily {
        GFamily::Arbitrary(Expr::app(Func::GChain(0), Expr::var(Var::PhiS)))
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self, GFamily::Arbitrary(e)
            if *e == Expr::app(Func::GChain(0), Expr::var(Var::PhiS)))
    }
}

/// The `H = h'` family of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum HFamily {
    Zero,
    /// `H = alpha phi`, `alpha != 0`.
    Linear { alpha: Coeff },
    /// `H = beta phi^alpha`, `alpha != 0, 1`, `beta != 0`.
    PowerLaw { alpha: Coeff, beta: Coeff },
    /// `H = exp(alpha phi)`, `alpha != 0`.
    Exponential { alpha: Coeff },
    /// `H = beta phi^-3 + alpha phi`, `alpha != 0`.
    CubicPlusLinear { alpha: Coeff, beta: Coeff },
    /// An arbitrary expression in `phi`; fully opaque case is `H(phi)`.
    Arbitrary(Expr),
}

impl HFamily {
    pub fn opaque() -> HFamily {
        HFamily::Arbitrary(Expr::app(Func::HChain(0), Expr::var(Var::Phi)))
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self, HFamily::Arbitrary(e)
            if *e == Expr::app(Func::HChain(0), Expr::var(Var::Phi)))
    }
}

/// One classified equation: the two families plus the sign/nonzero
/// constraints of every parameter they mention.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub g: GFamily,
    pub h: HFamily,
    pub domain: ParameterDomain,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("power exponent lambda = {0} violates lambda(1 - lambda) != 0")]
    DegeneratePower(String),
    #[error("coefficient `{0}` must be nonzero")]
    ZeroCoefficient(String),
    #[error("power-law exponent alpha = {0} violates alpha != 0, 1")]
    DegeneratePowerLaw(String),
    #[error("malformed coefficient `{0}`")]
    BadCoefficient(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("the Lagrangian may reference jets of order <= 1 only, got `{0}`")]
    HigherOrderLagrangian(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl ModelSpec {
    /// Validates family constraints and completes the domain so every
    /// referenced parameter has an entry; symbolic exponents get the
    /// antiderivative poles excluded so `g`, `gp` formulas sample cleanly.
    pub fn new(g: GFamily, h: HFamily, domain: ParameterDomain) -> Result<ModelSpec, ModelError> {
        let mut domain = domain;
        match &g {
            GFamily::Power { lambda, .. } => match lambda {
                Coeff::Rat(q) => {
                    if q.is_zero() || q.is_one() {
                        return Err(ModelError::DegeneratePower(q.to_string()));
                    }
                }
                Coeff::Sym(p) => {
                    let spec = domain.params.entry(p.name.to_string()).or_default();
                    spec.nonzero = true;
                    for excl in ["0", "1", "-1", "-2"] {
                        if !spec.exclude.iter().any(|e| e == excl) {
                            spec.exclude.push(excl.to_string());
                        }
                    }
                }
            },
            GFamily::Exponential { mu } => {
                require_nonzero(mu, &mut domain)?;
            }
            GFamily::Arbitrary(_) => {}
        }
        match &h {
            HFamily::Zero | HFamily::Arbitrary(_) => {}
            HFamily::Linear { alpha } | HFamily::Exponential { alpha } => {
                require_nonzero(alpha, &mut domain)?;
            }
            HFamily::PowerLaw { alpha, beta } => {
                match alpha {
                    Coeff::Rat(q) => {
                        if q.is_zero() || q.is_one() {
                            return Err(ModelError::DegeneratePowerLaw(q.to_string()));
                        }
                    }
                    Coeff::Sym(p) => {
                        let spec = domain.params.entry(p.name.to_string()).or_default();
                        spec.nonzero = true;
                        for excl in ["0", "1", "-1"] {
                            if !spec.exclude.iter().any(|e| e == excl) {
                                spec.exclude.push(excl.to_string());
                            }
                        }
                    }
                }
                require_nonzero(beta, &mut domain)?;
            }
            HFamily::CubicPlusLinear { alpha, beta } => {
                require_nonzero(alpha, &mut domain)?;
                touch(beta, &mut domain);
            }
        }
        for e in family_exprs(&g, &h) {
            for s in e.symbols() {
                if let Symbol::Param(p) = s {
                    let spec = domain.params.entry(p.name.to_string()).or_default();
                    if spec.sign == Sign::Any {
                        spec.sign = p.sign;
                    }
                }
            }
        }
        Ok(ModelSpec { g, h, domain })
    }

    /// The fully-opaque model: arbitrary `G` and arbitrary `H`.
    pub fn generic() -> ModelSpec {
        ModelSpec::new(GFamily::opaque(), HFamily::opaque(), ParameterDomain::new()).unwrap()
    }

    /// Closed-form expression for the chain symbol of the given order,
    /// evaluated at `arg`: order 0 is `G` (resp. `H`), -1 its first
    /// antiderivative, and so on.  `None` when no closed form exists
    /// (non-opaque arbitrary families below order 0).
    pub fn chain_template(&self, chain: Chain, order: i32, arg: &Expr) -> Option<Expr> {
        match chain {
            Chain::G => g_template(&self.g, order, arg),
            Chain::H => h_template(&self.h, order, arg),
        }
    }

    /// Replaces every chain-symbol application that has a closed form for
    /// this model; the rest stay opaque.
    pub fn concretize(&self, e: &Expr) -> Expr {
        substitute_funcs(e, &|f, arg| match f {
            Func::GChain(k) => self.chain_template(Chain::G, k as i32, arg),
            Func::HChain(k) => self.chain_template(Chain::H, k as i32, arg),
            _ => None,
        })
    }

    /// `G(phi_s)` for this model (concrete where possible).
    pub fn g_expr(&self) -> Expr {
        self.concretize(&Expr::app(Func::GChain(0), Expr::var(Var::PhiS)))
    }

    /// `H(phi)` for this model (concrete where possible).
    pub fn h_expr(&self) -> Expr {
        self.concretize(&Expr::app(Func::HChain(0), Expr::var(Var::Phi)))
    }

    /// The Euler-Lagrange residual `phi_tt + G phi_ss - H`, concretized.
    pub fn el_residual(&self) -> Expr {
        let l = build_lagrangian(self);
        let r = euler_lagrange(&l).expect("the built Lagrangian is first order");
        self.concretize(&r)
    }

    /// Residuals of the Eulerian system `(continuity, momentum)`.
    pub fn eulerian_system(&self) -> (Expr, Expr) {
        let rho = Expr::var(Var::Rho);
        let u = Expr::var(Var::U);
        let continuity = Expr::add(vec![
            Expr::var(Var::RhoT),
            Expr::mul(vec![u.clone(), Expr::var(Var::RhoX)]),
            Expr::mul(vec![rho.clone(), Expr::var(Var::UX)]),
        ])
        .normalize();
        let g_at_inv_rho = self.concretize(&Expr::app(
            Func::GChain(0),
            Expr::powi(rho.clone(), -1),
        ));
        let h_at_x = self.concretize(&Expr::app(Func::HChain(0), Expr::var(Var::X)));
        let momentum = Expr::add(vec![
            Expr::var(Var::UT),
            Expr::mul(vec![u, Expr::var(Var::UX)]),
            Expr::neg(Expr::mul(vec![
                g_at_inv_rho,
                Expr::powi(rho, -3),
                Expr::var(Var::RhoX),
            ])),
            Expr::neg(h_at_x),
        ])
        .normalize();
        (continuity, momentum)
    }

    /// Samples `G(phi_s)` over the positive `phi_s` window and checks
    /// `G < 0` at every point.  Opaque `G` is vacuously hyperbolic (the
    /// standing assumption, not a theorem).
    pub fn hyperbolic_on_domain(&self, rng: &mut crate::rng::Srng) -> Result<bool, ExprError> {
        if self.g.is_opaque() {
            return Ok(true);
        }
        let g = self.g_expr();
        for _ in 0..200 {
            let mut env = crate::expr::sample_env(&g, &self.domain, rng);
            env.vals.insert(Symbol::Var(Var::PhiS), rng.uniform(0.05, 5.0));
            match env.eval(&g) {
                Ok(v) if v < 0.0 => {}
                Ok(_) => return Ok(false),
                Err(_) => {} // branch point under an extreme sample; skip
            }
        }
        Ok(true)
    }

    /// All parameters referenced by the two families.
    pub fn params(&self) -> Vec<Param> {
        let mut out = Vec::new();
        for e in family_exprs(&self.g, &self.h) {
            for s in e.symbols() {
                if let Symbol::Param(p) = s {
                    out.push(p);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Human-readable `G`, `H` description for reports.
    pub fn describe(&self) -> String {
        format!("G = {}, H = {}", self.g_expr(), self.h_expr())
    }
}

fn require_nonzero(c: &Coeff, domain: &mut ParameterDomain) -> Result<(), ModelError> {
    match c {
        Coeff::Rat(q) => {
            if q.is_zero() {
                return Err(ModelError::ZeroCoefficient(q.to_string()));
            }
        }
        Coeff::Sym(p) => {
            domain.params.entry(p.name.to_string()).or_default().nonzero = true;
        }
    }
    Ok(())
}

fn touch(c: &Coeff, domain: &mut ParameterDomain) {
    if let Coeff::Sym(p) = c {
        domain.params.entry(p.name.to_string()).or_default();
    }
}

fn family_exprs(g: &GFamily, h: &HFamily) -> Vec<Expr> {
    let mut out = Vec::new();
    match g {
        GFamily::Arbitrary(e) => out.push(e.clone()),
        GFamily::Power { lambda, .. } => out.push(lambda.expr()),
        GFamily::Exponential { mu } => out.push(mu.expr()),
    }
    match h {
        HFamily::Zero => {}
        HFamily::Arbitrary(e) => out.push(e.clone()),
        HFamily::Linear { alpha } | HFamily::Exponential { alpha } => out.push(alpha.expr()),
        HFamily::PowerLaw { alpha, beta } | HFamily::CubicPlusLinear { alpha, beta } => {
            out.push(alpha.expr());
            out.push(beta.expr());
        }
    }
    out
}

/// Falling factorial `prod_{i=0}^{k-1} (lambda - i)` as an expression.
fn falling_factorial(lambda: &Expr, k: i32) -> Expr {
    let mut fs = Vec::new();
    for i in 0..k {
        fs.push(Expr::add(vec![lambda.clone(), Expr::int(-(i as i64))]));
    }
    if fs.is_empty() {
        Expr::one()
    } else {
        Expr::mul(fs)
    }
}

fn g_template(g: &GFamily, order: i32, arg: &Expr) -> Option<Expr> {
    match g {
        GFamily::Arbitrary(e) => {
            if *e == Expr::app(Func::GChain(0), Expr::var(Var::PhiS)) {
                // fully opaque: every order is the chain symbol itself
                let k = i8::try_from(order).ok()?;
                return Some(Expr::app(Func::GChain(k), arg.clone()));
            }
            if order < 0 {
                return None; // no closed antiderivative of an arbitrary G
            }
            let mut d = e.clone();
            for _ in 0..order {
                d = partial(&d, &Symbol::Var(Var::PhiS)).ok()?;
            }
            Some(d.subst(Symbol::Var(Var::PhiS), arg.clone()))
        }
        GFamily::Power { lambda, c } => {
            let lam = lambda.expr();
            let base = Expr::add(vec![arg.clone(), Expr::num(c.clone())]).normalize();
            if order >= 0 {
                let ff = falling_factorial(&lam, order);
                let expo = Expr::add(vec![lam, Expr::int(-(order as i64))]);
                return Some(
                    Expr::neg(Expr::mul(vec![ff, Expr::pow(base, expo)])).normalize(),
                );
            }
            let lam_rat = lambda.as_rat();
            match order {
                -1 => {
                    if lam_rat == Some(&rat(-1, 1)) {
                        return Some(Expr::neg(Expr::app(Func::Ln, base)).normalize());
                    }
                    let lp1 = Expr::add(vec![lam.clone(), Expr::one()]);
                    Some(
                        Expr::neg(Expr::mul(vec![
                            Expr::powi(lp1.clone(), -1),
                            Expr::pow(base, lp1),
                        ]))
                        .normalize(),
                    )
                }
                -2 => {
                    if lam_rat == Some(&rat(-1, 1)) {
                        // antiderivative of -ln(base)
                        return Some(
                            Expr::add(vec![
                                Expr::neg(Expr::mul(vec![
                                    base.clone(),
                                    Expr::app(Func::Ln, base.clone()),
                                ])),
                                base,
                            ])
                            .normalize(),
                        );
                    }
                    if lam_rat == Some(&rat(-2, 1)) {
                        return Some(Expr::app(Func::Ln, base).normalize());
                    }
                    let lp1 = Expr::add(vec![lam.clone(), Expr::one()]);
                    let lp2 = Expr::add(vec![lam, Expr::int(2)]);
                    Some(
                        Expr::neg(Expr::mul(vec![
                            Expr::powi(lp1, -1),
                            Expr::powi(lp2.clone(), -1),
                            Expr::pow(base, lp2),
                        ]))
                        .normalize(),
                    )
                }
                _ => None,
            }
        }
        GFamily::Exponential { mu } => {
            let m = mu.expr();
            let body = Expr::app(Func::Exp, Expr::mul(vec![m.clone(), arg.clone()]));
            Some(
                Expr::neg(Expr::mul(vec![Expr::pow(m, Expr::int(order as i64)), body]))
                    .normalize(),
            )
        }
    }
}

fn h_template(h: &HFamily, order: i32, arg: &Expr) -> Option<Expr> {
    match h {
        HFamily::Zero => Some(Expr::zero()),
        HFamily::Arbitrary(e) => {
            if *e == Expr::app(Func::HChain(0), Expr::var(Var::Phi)) {
                let k = i8::try_from(order).ok()?;
                return Some(Expr::app(Func::HChain(k), arg.clone()));
            }
            if order < 0 {
                return None;
            }
            let mut d = e.clone();
            for _ in 0..order {
                d = partial(&d, &Symbol::Var(Var::Phi)).ok()?;
            }
            Some(d.subst(Symbol::Var(Var::Phi), arg.clone()))
        }
        HFamily::Linear { alpha } => {
            let a = alpha.expr();
            Some(match order {
                -1 => Expr::mul(vec![Expr::rational(1, 2), a, Expr::powi(arg.clone(), 2)])
                    .normalize(),
                0 => Expr::mul(vec![a, arg.clone()]).normalize(),
                1 => a,
                k if k >= 2 => Expr::zero(),
                _ => return None,
            })
        }
        HFamily::PowerLaw { alpha, beta } => {
            let a = alpha.expr();
            let b = beta.expr();
            if order >= 0 {
                let ff = falling_factorial(&a, order);
                let expo = Expr::add(vec![a, Expr::int(-(order as i64))]);
                return Some(Expr::mul(vec![b, ff, Expr::pow(arg.clone(), expo)]).normalize());
            }
            if order == -1 {
                if alpha.as_rat() == Some(&rat(-1, 1)) {
                    return Some(
                        Expr::mul(vec![b, Expr::app(Func::Ln, arg.clone())]).normalize(),
                    );
                }
                let ap1 = Expr::add(vec![a, Expr::one()]);
                return Some(
                    Expr::mul(vec![b, Expr::powi(ap1.clone(), -1), Expr::pow(arg.clone(), ap1)])
                        .normalize(),
                );
            }
            None
        }
        HFamily::Exponential { alpha } => {
            let a = alpha.expr();
            let body = Expr::app(Func::Exp, Expr::mul(vec![a.clone(), arg.clone()]));
            Some(Expr::mul(vec![Expr::pow(a, Expr::int(order as i64)), body]).normalize())
        }
        HFamily::CubicPlusLinear { alpha, beta } => {
            let lin = HFamily::Linear { alpha: alpha.clone() };
            let cub = HFamily::PowerLaw { alpha: Coeff::Rat(rat(-3, 1)), beta: beta.clone() };
            let l = h_template(&lin, order, arg)?;
            let c = h_template(&cub, order, arg)?;
            Some(Expr::add(vec![l, c]).normalize())
        }
    }
}

/// `L = phi_t^2/2 + g(phi_s) + h(phi)` with `g`, `h` as chained
/// antiderivative symbols (`h` omitted for the zero family).
pub fn build_lagrangian(m: &ModelSpec) -> Expr {
    let mut terms = vec![
        Expr::mul(vec![Expr::rational(1, 2), Expr::powi(Expr::var(Var::PhiT), 2)]),
        Expr::app(Func::GChain(-2), Expr::var(Var::PhiS)),
    ];
    if !matches!(m.h, HFamily::Zero) {
        terms.push(Expr::app(Func::HChain(-1), Expr::var(Var::Phi)));
    }
    Expr::add(terms).normalize()
}

/// Euler-Lagrange residual of a first-order Lagrangian, oriented so that
/// the generic `L` yields `phi_tt + G phi_ss - H` (the negated variational
/// derivative; the sign convention is fixed once here).
pub fn euler_lagrange(l: &Expr) -> Result<Expr, ModelError> {
    let ctx = JetContext::lagrangian();
    if ctx.order_in(l) > 1 {
        return Err(ModelError::HigherOrderLagrangian(l.to_string()));
    }
    let dl_dphi = partial(l, &Symbol::Var(Var::Phi))?;
    let dl_dphit = partial(l, &Symbol::Var(Var::PhiT))?;
    let dl_dphis = partial(l, &Symbol::Var(Var::PhiS))?;
    let dt = total_derivative(&dl_dphit, Dir::T, &ctx)?;
    let ds = total_derivative(&dl_dphis, Dir::Space, &ctx)?;
    let delta = Expr::add(vec![dl_dphi, Expr::neg(dt), Expr::neg(ds)]);
    Ok(Expr::neg(delta).normalize())
}

// ---------------------------------------------------------------------------
// JSON form: {"g": {"family": ...}, "h": {"family": ...}, "domain": {...}}
// ---------------------------------------------------------------------------

/// Serializable form of a [`ModelSpec`]; field values are strings so
/// rationals stay exact.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RawModel {
    pub g: BTreeMap<String, String>,
    pub h: BTreeMap<String, String>,
    #[serde(default)]
    pub domain: ParameterDomain,
}

impl ModelSpec {
    pub fn from_raw(raw: &RawModel) -> Result<ModelSpec, ModelError> {
        let domain = raw.domain.clone();
        let table = domain.symbol_table();
        let get = |m: &BTreeMap<String, String>, k: &str| -> Result<Coeff, ModelError> {
            let v = m
                .get(k)
                .ok_or_else(|| ModelError::BadCoefficient(format!("missing field {k}")))?;
            Coeff::parse(v, &domain)
        };
        let gfam = raw
            .g
            .get("family")
            .ok_or_else(|| ModelError::UnknownFamily("missing g.family".into()))?;
        let g = match gfam.as_str() {
            "arbitrary" => match raw.g.get("expr") {
                None => GFamily::opaque(),
                Some(src) => GFamily::Arbitrary(parse_expr(src, &table)?),
            },
            "power" => GFamily::Power {
                lambda: get(&raw.g, "lambda")?,
                c: raw
                    .g
                    .get("c")
                    .map(|s| {
                        parse_rational(s).ok_or_else(|| ModelError::BadCoefficient(s.clone()))
                    })
                    .transpose()?
                    .unwrap_or_else(Rat::zero),
            },
            "exponential" => GFamily::Exponential { mu: get(&raw.g, "mu")? },
            other => return Err(ModelError::UnknownFamily(other.to_string())),
        };
        let hfam = raw
            .h
            .get("family")
            .ok_or_else(|| ModelError::UnknownFamily("missing h.family".into()))?;
        let h = match hfam.as_str() {
            "zero" => HFamily::Zero,
            "linear" => HFamily::Linear { alpha: get(&raw.h, "alpha")? },
            "power_law" => HFamily::PowerLaw {
                alpha: get(&raw.h, "alpha")?,
                beta: get(&raw.h, "beta")?,
            },
            "exponential" => HFamily::Exponential { alpha: get(&raw.h, "alpha")? },
            "cubic_plus_linear" => HFamily::CubicPlusLinear {
                alpha: get(&raw.h, "alpha")?,
                beta: get(&raw.h, "beta")?,
            },
            "arbitrary" => match raw.h.get("expr") {
                None => HFamily::opaque(),
                Some(src) => HFamily::Arbitrary(parse_expr(src, &table)?),
            },
            other => return Err(ModelError::UnknownFamily(other.to_string())),
        };
        ModelSpec::new(g, h, domain)
    }

    pub fn to_raw(&self) -> RawModel {
        let mut g = BTreeMap::new();
        match &self.g {
            GFamily::Arbitrary(e) => {
                g.insert("family".into(), "arbitrary".into());
                if !self.g.is_opaque() {
                    g.insert("expr".into(), e.to_string());
                }
            }
            GFamily::Power { lambda, c } => {
                g.insert("family".into(), "power".into());
                g.insert("lambda".into(), lambda.to_raw());
                g.insert("c".into(), Coeff::Rat(c.clone()).to_raw());
            }
            GFamily::Exponential { mu } => {
                g.insert("family".into(), "exponential".into());
                g.insert("mu".into(), mu.to_raw());
            }
        }
        let mut h = BTreeMap::new();
        match &self.h {
            HFamily::Zero => {
                h.insert("family".into(), "zero".into());
            }
            HFamily::Linear { alpha } => {
                h.insert("family".into(), "linear".into());
                h.insert("alpha".into(), alpha.to_raw());
            }
            HFamily::PowerLaw { alpha, beta } => {
                h.insert("family".into(), "power_law".into());
                h.insert("alpha".into(), alpha.to_raw());
                h.insert("beta".into(), beta.to_raw());
            }
            HFamily::Exponential { alpha } => {
                h.insert("family".into(), "exponential".into());
                h.insert("alpha".into(), alpha.to_raw());
            }
            HFamily::CubicPlusLinear { alpha, beta } => {
                h.insert("family".into(), "cubic_plus_linear".into());
                h.insert("alpha".into(), alpha.to_raw());
                h.insert("beta".into(), beta.to_raw());
            }
            HFamily::Arbitrary(e) => {
                h.insert("family".into(), "arbitrary".into());
                if !self.h.is_opaque() {
                    h.insert("expr".into(), e.to_string());
                }
            }
        }
        RawModel { g, h, domain: self.domain.clone() }
    }
}
