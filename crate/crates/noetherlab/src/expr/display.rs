//! Plain-text rendering in the same infix grammar accepted by
//! [`super::parse_expr`]: `^` for powers, `*` explicit, jet names like
//! `phi_s`, function symbols `g`, `gp`, `G`, `h`, `H`, ...

use super::{Expr, Func, Node, Rat};
use num_traits::Signed;
use std::fmt;

pub(super) fn format_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}", render(e))
}

fn render(e: &Expr) -> String {
    match e.node() {
        Node::Num(q) => render_num(q),
        Node::Sym(s) => s.name(),
        Node::Add(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (neg, body) = strip_sign(t);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                } else {
                    out.push_str(if neg { " - " } else { " + " });
                }
                out.push_str(&body);
            }
            out
        }
        Node::Mul(fs) => {
            let mut head = String::new();
            let mut parts = Vec::new();
            for (i, x) in fs.iter().enumerate() {
                // A leading numeric coefficient needs no parens: `1/2*x`
                // and `-2*x` reparse to the same tree; a bare -1 becomes
                // a sign.
                if i == 0 && fs.len() > 1 {
                    if let Node::Num(q) = x.node() {
                        if *q == -Rat::from_integer(1.into()) {
                            head = "-".into();
                        } else {
                            parts.push(render_num(q));
                        }
                        continue;
                    }
                }
                parts.push(atom(x, /*in_product=*/ true));
            }
            format!("{head}{}", parts.join("*"))
        }
        Node::Pow(b, x) => format!("{}^{}", atom(b, true), exponent(x)),
        Node::App(fun, a) => format!("{}({})", fun.name(), render(a)),
    }
}

fn render_num(q: &Rat) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Splits a leading -1 / negative coefficient off a term for sum rendering.
fn strip_sign(t: &Expr) -> (bool, String) {
    match t.node() {
        Node::Num(q) if q.is_negative() => (true, render_num(&-q.clone())),
        Node::Mul(fs) => {
            if let Some(Node::Num(q)) = fs.first().map(|f| f.node()) {
                if q.is_negative() {
                    let pos = -q.clone();
                    let mut parts = Vec::new();
                    if !num_traits::One::is_one(&pos) || fs.len() == 1 {
                        parts.push(render_num(&pos));
                    }
                    for x in &fs[1..] {
                        parts.push(atom(x, true));
                    }
                    return (true, parts.join("*"));
                }
            }
            (false, render(t))
        }
        _ => (false, render(t)),
    }
}

fn atom(e: &Expr, in_product: bool) -> String {
    match e.node() {
        Node::Add(_) => format!("({})", render(e)),
        Node::Mul(_) if in_product => format!("({})", render(e)),
        Node::Num(q) if (q.is_negative() || !q.is_integer()) && in_product => {
            format!("({})", render_num(q))
        }
        _ => render(e),
    }
}

fn exponent(x: &Expr) -> String {
    match x.node() {
        Node::Num(q) if q.is_integer() && !q.is_negative() => q.to_integer().to_string(),
        Node::Sym(s) => s.name(),
        _ => format!("({})", render(x)),
    }
}

#[allow(dead_code)]
pub(super) fn func_display_name(f: Func) -> String {
    f.name()
}

#[cfg(test)]
mod tests {
    use super::super::{Expr, Func, Param, Sign, Var};

    #[test]
    fn renders_readably() {
        let lam = Param::new("lambda", Sign::Any);
        let e = Expr::add(vec![
            Expr::mul(vec![Expr::int(-2), Expr::var(Var::PhiT)]),
            Expr::pow(Expr::var(Var::PhiS), Expr::param(&lam)),
        ])
        .normalize();
        let s = e.to_string();
        assert!(s.contains("phi_s^lambda"), "got {s}");
        assert!(s.contains("2*phi_t"), "got {s}");
        let g = Expr::app(Func::GChain(-1), Expr::var(Var::PhiS));
        assert_eq!(g.to_string(), "gp(phi_s)");
    }
}
