//! Normal form.
//!
//! The normal form is an expanded sum of terms; each term is a rational
//! coefficient times a sorted product of atoms raised to (possibly symbolic)
//! exponents.  Rules, beyond flatten/sort/collect:
//!
//! * constants fold exactly (rationals, integer powers, perfect roots);
//! * powers of a common base merge by adding exponents; `exp` factors merge
//!   by adding arguments; `(e^u)^v -> e^(u v)`;
//! * products distribute over sums, integer powers of sums expand;
//! * `exp`/`ln` inverse pairs cancel, `ln` expands over positive factors
//!   and powers;
//! * trig/hyperbolic: parity, `sin/cos(0)`, even-integer argument halving
//!   (`sin(2u) -> 2 sin u cos u`, `cos(2u) -> 2 cos^2 u - 1`, hyperbolic
//!   alike), and `sin^2 -> 1 - cos^2`, `sinh^2 -> cosh^2 - 1` for integer
//!   powers >= 2.  That fixed set covers every identity the classification
//!   tables need; there is no general trig normal form here.
//! * `abs` distributes over products and folds on sign-tagged arguments.
//!
//! Idempotence (`normalize(normalize(e)) == normalize(e)`) is a tested
//! invariant.

use super::{Expr, Func, Node, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

impl Expr {
    /// Rewrites the tree into normal form.
    pub fn normalize(&self) -> Expr {
        norm(self)
    }

    /// Structural equality after normalization.
    pub fn equivalent(&self, other: &Expr) -> bool {
        norm(self) == norm(other)
    }

    /// Structural zero test with denominator clearing: when the normal
    /// form keeps negative integer powers of sums (for example the
    /// `(1 + lambda)^-1` factors of symbolic antiderivatives), the
    /// expression is multiplied by those nonzero atoms and renormalized,
    /// which lets `(2 + 3 lambda + lambda^2) (1+lambda)^-1 (2+lambda)^-1`
    /// collapse.  Sound because the multiplier vanishes nowhere on the
    /// sampling domain's dense subset.
    pub fn vanishes(&self) -> bool {
        let n = norm(self);
        if n.is_zero_expr() {
            return true;
        }
        let denominators = sum_denominators(&n);
        if denominators.is_empty() {
            return false;
        }
        // Multiply term by term so each denominator atom meets its inverse
        // power inside the term before any distribution happens.
        let terms: Vec<Expr> = match n.node() {
            Node::Add(ts) => ts.clone(),
            _ => vec![n],
        };
        let cleared: Vec<Expr> = terms
            .into_iter()
            .map(|t| {
                let mut fs = denominators.clone();
                fs.push(t);
                norm_mul(fs)
            })
            .collect();
        norm_add(cleared).is_zero_expr()
    }
}

/// Collects `base^|k|` multipliers for every `Pow(sum, -k)` atom present
/// (capped to keep the clearing cheap).
fn sum_denominators(e: &Expr) -> Vec<Expr> {
    use std::collections::BTreeMap as Map;
    let mut found: Map<Expr, i64> = Map::new();
    fn walk(e: &Expr, found: &mut std::collections::BTreeMap<Expr, i64>) {
        match e.node() {
            Node::Add(ts) => ts.iter().for_each(|t| walk(t, found)),
            Node::Mul(fs) => fs.iter().for_each(|f| walk(f, found)),
            Node::Pow(b, x) => {
                if let (Node::Add(_), Some(n)) = (b.node(), x.as_integer()) {
                    if let Some(k) = n.to_i64() {
                        if k < 0 {
                            let entry = found.entry(b.clone()).or_insert(0);
                            *entry = (*entry).max(-k);
                        }
                    }
                }
                walk(b, found);
                walk(x, found);
            }
            Node::App(_, a) => walk(a, found),
            _ => {}
        }
    }
    walk(e, &mut found);
    let mut out = Vec::new();
    let mut budget = 12i64;
    for (base, k) in found {
        let k = k.min(budget.max(0));
        for _ in 0..k {
            out.push(base.clone());
        }
        budget -= k;
    }
    out
}

fn norm(e: &Expr) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Sym(_) => e.clone(),
        Node::Add(ts) => norm_add(ts.iter().map(norm).collect()),
        Node::Mul(fs) => norm_mul(fs.iter().map(norm).collect()),
        Node::Pow(b, x) => norm_pow(norm(b), norm(x)),
        Node::App(f, a) => norm_app(*f, norm(a)),
    }
}

/// Splits a normalized term into (rational coefficient, monomial key).
/// The monomial key for a pure constant is 1.
fn coeff_split(t: &Expr) -> (Rat, Expr) {
    match t.node() {
        Node::Num(q) => (q.clone(), Expr::one()),
        Node::Mul(fs) => {
            if let Some(Node::Num(q)) = fs.first().map(|f| f.node()) {
                let rest: Vec<Expr> = fs[1..].to_vec();
                let key = match rest.len() {
                    0 => Expr::one(),
                    1 => rest[0].clone(),
                    _ => Expr::mul(rest),
                };
                (q.clone(), key)
            } else {
                (Rat::one(), t.clone())
            }
        }
        _ => (Rat::one(), t.clone()),
    }
}

/// Rebuilds `coeff * monomial` in canonical shape.
fn coeff_join(coeff: Rat, key: Expr) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    if key.is_one_expr() {
        return Expr::num(coeff);
    }
    if coeff.is_one() {
        return key;
    }
    let mut factors = vec![Expr::num(coeff)];
    match key.node() {
        Node::Mul(fs) => factors.extend(fs.iter().cloned()),
        _ => factors.push(key),
    }
    Expr::mul(factors)
}

/// Inputs must already be normalized.
fn norm_add(terms: Vec<Expr>) -> Expr {
    let mut acc: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut stack = terms;
    stack.reverse();
    while let Some(t) = stack.pop() {
        match t.node() {
            Node::Add(inner) => stack.extend(inner.iter().cloned()),
            _ => {
                let (c, key) = coeff_split(&t);
                let entry = acc.entry(key).or_insert_with(Rat::zero);
                *entry += c;
            }
        }
    }
    let mut out: Vec<Expr> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(key, c)| coeff_join(c, key))
        .collect();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => {
            out.sort();
            Expr::add(out)
        }
    }
}

/// Inputs must already be normalized.
fn norm_mul(factors: Vec<Expr>) -> Expr {
    let mut coeff = Rat::one();
    // base -> accumulated exponent terms
    let mut powers: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    let mut exp_args: Vec<Expr> = Vec::new();
    let mut sums: Vec<Expr> = Vec::new();

    let mut stack = factors;
    stack.reverse();
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Num(q) => {
                if q.is_zero() {
                    return Expr::zero();
                }
                coeff *= q;
            }
            Node::Mul(inner) => stack.extend(inner.iter().cloned()),
            // Sums join the base merge: (S)^1 meets (S)^-1 here.
            Node::Add(_) => powers.entry(f.clone()).or_default().push(Expr::one()),
            Node::Pow(b, x) => powers.entry(b.clone()).or_default().push(x.clone()),
            Node::App(Func::Exp, a) => exp_args.push(a.clone()),
            _ => powers.entry(f.clone()).or_default().push(Expr::one()),
        }
    }

    let mut out: Vec<Expr> = Vec::new();
    let mut needs_repass = false;
    for (base, exps) in powers {
        let exponent = norm_add(exps);
        if exponent.is_zero_expr() {
            continue;
        }
        if let Node::Add(_) = base.node() {
            // Positive integer powers of sums become repeated distribution
            // below; anything else stays an atomic power of the sum.
            match exponent.as_integer().and_then(|n| n.to_i64()) {
                Some(n) if (1..=16).contains(&n) => {
                    for _ in 0..n {
                        sums.push(base.clone());
                    }
                }
                _ => out.push(Expr::pow(base, exponent)),
            }
            continue;
        }
        let factor = if exponent.is_one_expr() { base } else { norm_pow(base, exponent) };
        match factor.node() {
            Node::Num(q) => coeff *= q,
            Node::Add(_) => sums.push(factor),
            // A composite needs re-flattening; a plain power is final
            // (collection keys are never `Pow`, so no further merge exists).
            Node::Mul(_) | Node::App(Func::Exp, _) => {
                needs_repass = true;
                out.push(factor);
            }
            _ => out.push(factor),
        }
    }
    if !exp_args.is_empty() {
        let arg = norm_add(exp_args);
        if !arg.is_zero_expr() {
            let f = norm_app(Func::Exp, arg);
            match f.node() {
                Node::Num(q) => coeff *= q,
                Node::App(Func::Exp, _) => out.push(f),
                Node::Add(_) => sums.push(f),
                _ => {
                    needs_repass = true;
                    out.push(f);
                }
            }
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    if needs_repass {
        let mut all = vec![Expr::num(coeff)];
        all.extend(out);
        all.extend(sums);
        return norm_mul_repass(all);
    }

    if sums.is_empty() {
        out.sort();
        return match (coeff.is_one(), out.len()) {
            (_, 0) => Expr::num(coeff),
            (true, 1) => out.pop().unwrap(),
            (true, _) => Expr::mul(out),
            (false, _) => {
                let mut fs = vec![Expr::num(coeff)];
                fs.extend(out);
                Expr::mul(fs)
            }
        };
    }

    // Distribute the sum factors over the collected rest.
    let rest = coeff_join(coeff, {
        out.sort();
        match out.len() {
            0 => Expr::one(),
            1 => out[0].clone(),
            _ => Expr::mul(out),
        }
    });
    let mut expanded: Vec<Expr> = vec![rest];
    for s in sums {
        let terms: Vec<Expr> = match s.node() {
            Node::Add(ts) => ts.clone(),
            _ => vec![s.clone()],
        };
        let mut next = Vec::with_capacity(expanded.len() * terms.len());
        for partial in &expanded {
            for term in &terms {
                next.push(norm_mul(vec![partial.clone(), term.clone()]));
            }
        }
        expanded = next;
    }
    norm_add(expanded)
}

/// Restricted re-entry that avoids infinite recursion: inputs are the
/// factors produced by a first collection pass.
fn norm_mul_repass(factors: Vec<Expr>) -> Expr {
    norm_mul(factors)
}

fn norm_pow(base: Expr, exponent: Expr) -> Expr {
    if exponent.is_zero_expr() {
        return Expr::one();
    }
    if exponent.is_one_expr() {
        return base;
    }
    if base.is_one_expr() {
        return Expr::one();
    }
    if base.is_zero_expr() {
        if let Some(q) = exponent.is_num() {
            if q.is_positive() {
                return Expr::zero();
            }
        }
        return Expr::pow(base, exponent);
    }

    // Constant folding.
    if let (Some(b), Some(x)) = (base.is_num(), exponent.is_num()) {
        if let Some(folded) = fold_rational_pow(b, x) {
            return folded;
        }
        // Extract the sign of a negative base under a non-integer odd-root
        // exponent is not attempted; keep symbolic.
    }

    match base.node() {
        Node::Pow(b2, x2) => {
            let merge_ok = exponent.as_integer().is_some() || b2.assume_positive();
            if merge_ok {
                let merged = norm_mul(vec![x2.clone(), exponent.clone()]);
                return norm_pow(b2.clone(), merged);
            }
            Expr::pow(base, exponent)
        }
        Node::Mul(fs) => {
            if exponent.as_integer().is_some() || fs.iter().all(|f| f.assume_positive()) {
                let parts: Vec<Expr> =
                    fs.iter().map(|f| norm_pow(f.clone(), exponent.clone())).collect();
                return norm_mul(parts);
            }
            // Split off positive factors (including a positive coefficient).
            let (pos, rest): (Vec<Expr>, Vec<Expr>) =
                fs.iter().cloned().partition(|f| f.assume_positive());
            if !pos.is_empty() && !rest.is_empty() {
                let mut parts: Vec<Expr> =
                    pos.into_iter().map(|f| norm_pow(f, exponent.clone())).collect();
                parts.push(Expr::pow(norm_mul(rest), exponent));
                return norm_mul(parts);
            }
            Expr::pow(base, exponent)
        }
        Node::Add(_) => {
            if let Some(n) = exponent.as_integer() {
                if let Some(n) = n.to_i64() {
                    if (2..=16).contains(&n) {
                        return expand_sum_power(&base, n as u32);
                    }
                }
            }
            Expr::pow(base, exponent)
        }
        Node::App(Func::Exp, a) => norm_app(Func::Exp, norm_mul(vec![a.clone(), exponent])),
        Node::App(Func::Sin, u) => reduce_even_trig(Func::Sin, u, &exponent)
            .unwrap_or_else(|| Expr::pow(base.clone(), exponent)),
        Node::App(Func::Sinh, u) => reduce_even_trig(Func::Sinh, u, &exponent)
            .unwrap_or_else(|| Expr::pow(base.clone(), exponent)),
        Node::App(Func::Abs, a) => {
            if let Some(n) = exponent.as_integer() {
                if (&n % 2u8) == BigInt::from(0) {
                    return norm_pow(a.clone(), exponent);
                }
            }
            Expr::pow(base, exponent)
        }
        _ => Expr::pow(base, exponent),
    }
}

/// `sin^n -> (1 - cos^2)^(n div 2) sin^(n mod 2)` for integer n >= 2
/// (hyperbolic: `sinh^2 = cosh^2 - 1`).
fn reduce_even_trig(f: Func, arg: &Expr, exponent: &Expr) -> Option<Expr> {
    let n = exponent.as_integer()?.to_i64()?;
    if n < 2 {
        return None;
    }
    let (cof, square) = match f {
        Func::Sin => {
            let c = Expr::app(Func::Cos, arg.clone());
            (f, Expr::add(vec![Expr::one(), Expr::neg(Expr::powi(c, 2))]))
        }
        Func::Sinh => {
            let c = Expr::app(Func::Cosh, arg.clone());
            (f, Expr::add(vec![Expr::powi(c, 2), Expr::int(-1)]))
        }
        _ => return None,
    };
    let half = norm_pow(norm(&square), Expr::int(n / 2));
    let odd = if n % 2 == 1 { Expr::app(cof, arg.clone()) } else { Expr::one() };
    Some(norm_mul(vec![half, odd]))
}

fn expand_sum_power(base: &Expr, n: u32) -> Expr {
    let terms: Vec<Expr> = match base.node() {
        Node::Add(ts) => ts.clone(),
        _ => vec![base.clone()],
    };
    let mut expanded = vec![Expr::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(expanded.len() * terms.len());
        for p in &expanded {
            for t in &terms {
                next.push(norm_mul(vec![p.clone(), t.clone()]));
            }
        }
        expanded = next;
    }
    norm_add(expanded)
}

fn fold_rational_pow(b: &Rat, x: &Rat) -> Option<Expr> {
    if x.is_integer() {
        let n = x.to_integer().to_i64()?;
        if n.unsigned_abs() <= 256 {
            let p = rat_pow(b, n);
            return Some(Expr::num(p));
        }
        return None;
    }
    // Rational exponent p/q: fold only when the base is an exact q-th power.
    let p = x.numer().to_i64()?;
    let q = x.denom().to_i64()?;
    if p.unsigned_abs() > 16 || !(2..=4).contains(&q) {
        return None;
    }
    if b.is_negative() {
        return None;
    }
    let num_root = exact_root(b.numer(), q as u32)?;
    let den_root = exact_root(b.denom(), q as u32)?;
    let root = Rat::new(num_root, den_root);
    Some(Expr::num(rat_pow(&root, p)))
}

fn rat_pow(b: &Rat, n: i64) -> Rat {
    let mut acc = Rat::one();
    let mut base = if n >= 0 { b.clone() } else { b.recip() };
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

fn exact_root(v: &BigInt, q: u32) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.nth_root(q);
    if num_traits::pow::pow(r.clone(), q as usize) == *v {
        Some(r)
    } else {
        None
    }
}

fn norm_app(f: Func, arg: Expr) -> Expr {
    match f {
        Func::Exp => {
            if arg.is_zero_expr() {
                return Expr::one();
            }
            if let Node::App(Func::Ln, u) = arg.node() {
                return u.clone();
            }
            // exp(k ln u + rest) -> u^k exp(rest)
            if let Node::Add(ts) = arg.node() {
                let mut extracted: Vec<Expr> = Vec::new();
                let mut rest: Vec<Expr> = Vec::new();
                for t in ts {
                    match extract_ln_multiple(t) {
                        Some((k, u)) => extracted.push(norm_pow(u, Expr::num(k))),
                        None => rest.push(t.clone()),
                    }
                }
                if !extracted.is_empty() {
                    let tail = norm_add(rest);
                    if !tail.is_zero_expr() {
                        extracted.push(Expr::app(Func::Exp, tail));
                    }
                    return norm_mul(extracted);
                }
            }
            Expr::app(Func::Exp, arg)
        }
        Func::Ln => {
            if arg.is_one_expr() {
                return Expr::zero();
            }
            if let Node::App(Func::Exp, u) = arg.node() {
                return u.clone();
            }
            if let Node::Pow(b, x) = arg.node() {
                if b.assume_positive() {
                    return norm_mul(vec![x.clone(), norm_app(Func::Ln, b.clone())]);
                }
            }
            if let Node::Mul(fs) = arg.node() {
                let (pos, rest): (Vec<Expr>, Vec<Expr>) =
                    fs.iter().cloned().partition(|f| f.assume_positive());
                if !pos.is_empty() && (rest.is_empty() || norm_mul(rest.clone()).assume_positive())
                {
                    let mut terms: Vec<Expr> =
                        pos.into_iter().map(|p| norm_app(Func::Ln, p)).collect();
                    if !rest.is_empty() {
                        terms.push(norm_app(Func::Ln, norm_mul(rest)));
                    }
                    return norm_add(terms);
                }
            }
            Expr::app(Func::Ln, arg)
        }
        Func::Sin | Func::Cos | Func::Sinh | Func::Cosh => norm_trig(f, arg),
        Func::Abs => {
            if let Some(q) = arg.is_num() {
                return Expr::num(q.abs());
            }
            if arg.assume_positive() {
                return arg;
            }
            if arg.assume_negative() {
                return norm_mul(vec![Expr::int(-1), arg]);
            }
            if let Node::Mul(fs) = arg.node() {
                let parts: Vec<Expr> =
                    fs.iter().map(|f| norm_app(Func::Abs, f.clone())).collect();
                return norm_mul(parts);
            }
            Expr::app(Func::Abs, arg)
        }
        Func::GChain(_) | Func::HChain(_) => Expr::app(f, arg),
    }
}

/// Matches `k * ln(u)` (k rational, possibly 1) inside a normalized term.
fn extract_ln_multiple(t: &Expr) -> Option<(Rat, Expr)> {
    match t.node() {
        Node::App(Func::Ln, u) => Some((Rat::one(), u.clone())),
        Node::Mul(fs) if fs.len() == 2 => {
            if let (Node::Num(k), Node::App(Func::Ln, u)) = (fs[0].node(), fs[1].node()) {
                Some((k.clone(), u.clone()))
            } else {
                None
            }
        }
        _ => None,
    }
}

fn norm_trig(f: Func, arg: Expr) -> Expr {
    if arg.is_zero_expr() {
        return match f {
            Func::Sin | Func::Sinh => Expr::zero(),
            Func::Cos | Func::Cosh => Expr::one(),
            _ => unreachable!(),
        };
    }
    let (c, w) = coeff_split(&arg);
    // Parity: pull a negative coefficient out.
    if c.is_negative() {
        let pos = norm_mul(vec![Expr::num(-c), w]);
        return match f {
            Func::Sin => norm_mul(vec![Expr::int(-1), norm_trig(Func::Sin, pos)]),
            Func::Sinh => norm_mul(vec![Expr::int(-1), norm_trig(Func::Sinh, pos)]),
            Func::Cos => norm_trig(Func::Cos, pos),
            Func::Cosh => norm_trig(Func::Cosh, pos),
            _ => unreachable!(),
        };
    }
    // Even-integer coefficient halving (double-angle reduction), skipped for
    // pure numeric arguments where no cancellation partner can exist.
    if !w.is_one_expr() && c.is_integer() {
        let n = c.to_integer();
        if (&n % 2u8) == BigInt::from(0) && !n.is_zero() {
            let half = norm_mul(vec![Expr::num(Rat::from(n / 2)), w]);
            return match f {
                Func::Sin => norm_mul(vec![
                    Expr::int(2),
                    norm_trig(Func::Sin, half.clone()),
                    norm_trig(Func::Cos, half),
                ]),
                Func::Cos => norm_add(vec![
                    norm_mul(vec![
                        Expr::int(2),
                        norm_pow(norm_trig(Func::Cos, half.clone()), Expr::int(2)),
                    ]),
                    Expr::int(-1),
                ]),
                Func::Sinh => norm_mul(vec![
                    Expr::int(2),
                    norm_trig(Func::Sinh, half.clone()),
                    norm_trig(Func::Cosh, half),
                ]),
                Func::Cosh => norm_add(vec![
                    norm_mul(vec![
                        Expr::int(2),
                        norm_pow(norm_trig(Func::Cosh, half.clone()), Expr::int(2)),
                    ]),
                    Expr::int(-1),
                ]),
                _ => unreachable!(),
            };
        }
    }
    Expr::app(f, arg)
}
