//! Minimal symbolic kernel over the jet space of the wave equation
//! `phi_tt + G(phi_s) phi_ss - H(phi) = 0` and of its Eulerian form.
//!
//! Expression trees are immutable (`Arc`-shared, freely sendable across
//! threads) and every public operation returns a normalized tree, so
//! structural equality after [`Expr::normalize`] is the equality test used
//! throughout the crate.  The variable universe is fixed: the Lagrangian
//! jet coordinates `t, s, phi, phi_t, phi_s, phi_tt, phi_ts, phi_ss`, the
//! Eulerian coordinates `t, x, rho, u` with their first jets, and named
//! parameters carrying a sign tag.
//!
//! `g`, `gp`, `G`, ... and `h`, `H`, ... are chained function symbols:
//! differentiating `g` yields `gp`, differentiating `gp` yields `G`, and so
//! on (`G = g''`, `H = h'`).  Models later replace chain symbols by their
//! concrete family expressions; until then they stay opaque, which is what
//! lets one equation carry an arbitrary `G` through a symmetry check.

mod calculus;
mod display;
mod eval;
mod jet;
mod normalize;
mod parse;
mod zero;

pub use calculus::{
    free_of, integrate, linear_coefficient, partial, partial_by_name, substitute,
    substitute_funcs, total_derivative,
};
pub use eval::{FuncInstance, NumEnv, Poly};
pub use jet::{Dir, Frame, JetContext};
pub use parse::{parse_expr, SymbolTable};
pub use zero::{
    is_zero, parse_rat_pub as parse_rational, sample_env, ParamSpec, ParameterDomain, ZeroOutcome,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

/// Exact rational scalar used for all constants and coefficients.
pub type Rat = BigRational;

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Sign information attached to a parameter symbol.
///
/// `abs(p)` folds to `p` or `-p` at normalization time when the tag decides
/// the sign; the same tag drives numeric sampling in [`is_zero`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default,
         serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Any,
    Positive,
    Negative,
}

/// Coordinate and jet variables of the two frames.
///
/// `Phi`, `PhiS`, `Rho` and `X` are assumed positive by the rewrite rules
/// (power-of-power merging, `ln` expansion); the sampling domain used by
/// [`is_zero`] draws them from the same positive window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    // Lagrangian frame (t, s), dependent phi.
    T,
    S,
    Phi,
    PhiT,
    PhiS,
    PhiTT,
    PhiTS,
    PhiSS,
    // Eulerian frame (t, x), dependents rho, u.
    X,
    Rho,
    U,
    RhoT,
    RhoX,
    UT,
    UX,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::S => "s",
            Var::Phi => "phi",
            Var::PhiT => "phi_t",
            Var::PhiS => "phi_s",
            Var::PhiTT => "phi_tt",
            Var::PhiTS => "phi_ts",
            Var::PhiSS => "phi_ss",
            Var::X => "x",
            Var::Rho => "rho",
            Var::U => "u",
            Var::RhoT => "rho_t",
            Var::RhoX => "rho_x",
            Var::UT => "u_t",
            Var::UX => "u_x",
        }
    }

    pub fn all() -> &'static [Var] {
        &[
            Var::T,
            Var::S,
            Var::Phi,
            Var::PhiT,
            Var::PhiS,
            Var::PhiTT,
            Var::PhiTS,
            Var::PhiSS,
            Var::X,
            Var::Rho,
            Var::U,
            Var::RhoT,
            Var::RhoX,
            Var::UT,
            Var::UX,
        ]
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::all().iter().copied().find(|v| v.name() == name)
    }

    /// Positive-by-assumption variables (see module docs).
    pub fn assumed_positive(self) -> bool {
        matches!(self, Var::Phi | Var::PhiS | Var::Rho | Var::X)
    }
}

/// A named scalar parameter with a sign tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param {
    pub name: Arc<str>,
    pub sign: Sign,
}

impl Param {
    pub fn new(name: &str, sign: Sign) -> Self {
        Param { name: name.into(), sign }
    }
}

/// Symbols that may appear as leaves of an expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Var(Var),
    Param(Param),
}

impl Symbol {
    pub fn name(&self) -> String {
        match self {
            Symbol::Var(v) => v.name().to_string(),
            Symbol::Param(p) => p.name.to_string(),
        }
    }
}

/// Which antiderivative chain a function symbol belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chain {
    /// g, gp, G, Gp, ... with G = g''.
    G,
    /// h, H, Hp, ... with H = h'.
    H,
}

/// Function heads.  `GChain(k)`/`HChain(k)` are the chained symbols:
/// order 0 is `G` (resp. `H`), negative orders are antiderivatives
/// (`-1 = gp`, `-2 = g`; `-1 = h`), positive orders are derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Abs,
    GChain(i8),
    HChain(i8),
}

impl Func {
    pub fn name(self) -> String {
        match self {
            Func::Exp => "exp".into(),
            Func::Ln => "ln".into(),
            Func::Sin => "sin".into(),
            Func::Cos => "cos".into(),
            Func::Sinh => "sinh".into(),
            Func::Cosh => "cosh".into(),
            Func::Abs => "abs".into(),
            Func::GChain(-2) => "g".into(),
            Func::GChain(-1) => "gp".into(),
            Func::GChain(k) if k >= 0 => format!("G{}", "p".repeat(k as usize)),
            Func::GChain(k) => format!("gint{}", -k - 2),
            Func::HChain(-1) => "h".into(),
            Func::HChain(k) if k >= 0 => format!("H{}", "p".repeat(k as usize)),
            Func::HChain(k) => format!("hint{}", -k - 1),
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            "abs" => Some(Func::Abs),
            "g" => Some(Func::GChain(-2)),
            "gp" => Some(Func::GChain(-1)),
            "h" => Some(Func::HChain(-1)),
            _ => {
                if let Some(rest) = name.strip_prefix('G') {
                    if rest.chars().all(|c| c == 'p') {
                        return Some(Func::GChain(rest.len() as i8));
                    }
                }
                if let Some(rest) = name.strip_prefix('H') {
                    if rest.chars().all(|c| c == 'p') {
                        return Some(Func::HChain(rest.len() as i8));
                    }
                }
                None
            }
        }
    }
}

/// Expression node.  Sums and products are n-ary and kept flattened,
/// sorted, and coefficient-extracted by [`Expr::normalize`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(Rat),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Expr),
    App(Func, Expr),
}

/// An immutable, shareable expression tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(pub(crate) Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(q: Rat) -> Expr {
        Expr(Arc::new(Node::Num(q)))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(Rat::from(BigInt::from(n)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::num(rat(num, den))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr(Arc::new(Node::Sym(Symbol::Var(v))))
    }

    pub fn param(p: &Param) -> Expr {
        Expr(Arc::new(Node::Sym(Symbol::Param(p.clone()))))
    }

    pub fn sym(s: Symbol) -> Expr {
        Expr(Arc::new(Node::Sym(s)))
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        Expr(Arc::new(Node::Add(terms)))
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        Expr(Arc::new(Node::Mul(factors)))
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        Expr(Arc::new(Node::Pow(base, exponent)))
    }

    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, Expr::int(n))
    }

    pub fn app(f: Func, arg: Expr) -> Expr {
        Expr(Arc::new(Node::App(f, arg)))
    }

    pub fn sqrt(e: Expr) -> Expr {
        Expr::pow(e, Expr::rational(1, 2))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::mul(vec![Expr::int(-1), e])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg(b)])
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::mul(vec![a, Expr::powi(b, -1)])
    }

    pub fn is_num(&self) -> Option<&Rat> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_zero_expr(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_zero())
    }

    pub fn is_one_expr(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_one())
    }

    /// Integer value if this is an integral constant.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self.node() {
            Node::Num(q) if q.is_integer() => Some(q.to_integer()),
            _ => None,
        }
    }

    /// Collects every symbol occurring in the tree (sorted, deduplicated).
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let Node::Sym(s) = n {
                out.push(s.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    /// True if the symbol occurs anywhere in the tree.
    pub fn contains(&self, sym: &Symbol) -> bool {
        let mut found = false;
        self.walk(&mut |n| {
            if let Node::Sym(s) = n {
                if s == sym {
                    found = true;
                }
            }
        });
        found
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.contains(&Symbol::Var(v))
    }

    /// True if any chained function symbol (`g`, `G`, `h`, `H`, ...) occurs.
    pub fn contains_chain(&self) -> bool {
        let mut found = false;
        self.walk(&mut |n| {
            if let Node::App(Func::GChain(_) | Func::HChain(_), _) = n {
                found = true;
            }
        });
        found
    }

    fn walk(&self, f: &mut impl FnMut(&Node)) {
        f(self.node());
        match self.node() {
            Node::Add(es) | Node::Mul(es) => {
                for e in es {
                    e.walk(f);
                }
            }
            Node::Pow(b, x) => {
                b.walk(f);
                x.walk(f);
            }
            Node::App(_, a) => a.walk(f),
            _ => {}
        }
    }

    /// Highest jet order of any variable present (0 for `t, s, phi, x, rho, u`,
    /// 1 for first jets, 2 for second jets).
    pub fn jet_order(&self) -> u8 {
        let mut order = 0;
        self.walk(&mut |n| {
            if let Node::Sym(Symbol::Var(v)) = n {
                let o = match v {
                    Var::T | Var::S | Var::Phi | Var::X | Var::Rho | Var::U => 0,
                    Var::PhiT | Var::PhiS | Var::RhoT | Var::RhoX | Var::UT | Var::UX => 1,
                    Var::PhiTT | Var::PhiTS | Var::PhiSS => 2,
                };
                order = order.max(o);
            }
        });
        order
    }

    /// Conservative positivity analysis used by the rewrite rules.
    pub fn assume_positive(&self) -> bool {
        self.known_sign() == Some(Sign::Positive)
    }

    /// Conservative negativity analysis (used to fold `abs`).
    pub fn assume_negative(&self) -> bool {
        self.known_sign() == Some(Sign::Negative)
    }

    fn known_sign(&self) -> Option<Sign> {
        match self.node() {
            Node::Num(q) => {
                if q.is_positive() {
                    Some(Sign::Positive)
                } else if q.is_negative() {
                    Some(Sign::Negative)
                } else {
                    None
                }
            }
            Node::Sym(Symbol::Var(v)) => v.assumed_positive().then_some(Sign::Positive),
            Node::Sym(Symbol::Param(p)) => match p.sign {
                Sign::Positive => Some(Sign::Positive),
                Sign::Negative => Some(Sign::Negative),
                Sign::Any => None,
            },
            Node::Add(ts) => {
                let signs: Option<Vec<Sign>> = ts.iter().map(|t| t.known_sign()).collect();
                let signs = signs?;
                if signs.iter().all(|s| *s == Sign::Positive) {
                    Some(Sign::Positive)
                } else if signs.iter().all(|s| *s == Sign::Negative) {
                    Some(Sign::Negative)
                } else {
                    None
                }
            }
            Node::Mul(fs) => {
                let mut negs = 0usize;
                for f in fs {
                    match f.known_sign()? {
                        Sign::Negative => negs += 1,
                        Sign::Positive => {}
                        Sign::Any => return None,
                    }
                }
                Some(if negs % 2 == 0 { Sign::Positive } else { Sign::Negative })
            }
            Node::Pow(b, x) => match b.known_sign()? {
                Sign::Positive => Some(Sign::Positive),
                Sign::Negative => {
                    let n = x.as_integer()?;
                    Some(if (&n % 2u8) == BigInt::from(0) { Sign::Positive } else { Sign::Negative })
                }
                Sign::Any => None,
            },
            Node::App(Func::Exp | Func::Cosh, _) => Some(Sign::Positive),
            Node::App(Func::Abs, _) => None,
            _ => None,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display::format_expr(self, f)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// Errors surfaced by the expression kernel.
#[derive(Debug, thiserror::Error)]
pub enum ExprError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("jet order overflow: total derivative of `{0}` leaves the tracked order-2 jet space")]
    OrderOverflow(String),
    #[error("derivative of abs({0}) is undefined without a sign assumption")]
    AbsDerivative(String),
    #[error("cannot integrate `{0}` with respect to {1}: not polynomial in the variable")]
    NotIntegrable(String, String),
    #[error("function chain order out of range")]
    ChainOverflow,
    #[error("numeric evaluation failed: {0}")]
    Eval(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(
        "simplifier gap: structural and numeric zero tests disagree \
         (structural zero = {structural}, residual `{residual}`)"
    )]
    ZeroDisagreement { structural: bool, residual: String },
    #[error("domain sampling failed: {0} of {1} evaluation points hit poles")]
    TooManyPoles(usize, usize),
}
