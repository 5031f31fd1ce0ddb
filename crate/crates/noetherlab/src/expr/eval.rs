//! Floating-point evaluation.
//!
//! Opaque chain symbols (`g`, `gp`, `G`, ..., `h`, `H`, ...) are
//! instantiated by random polynomials whose antiderivative/derivative
//! relations hold exactly, so an identity that is zero for *arbitrary*
//! `G`, `H` evaluates to zero for every instantiation while a
//! non-identity almost surely does not.

use super::{Expr, ExprError, Func, Node, Symbol};
use crate::rng::Srng;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;

/// Dense polynomial in one variable, coefficient of `z^i` at index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, z: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Antiderivative with integration constant `c0`.
    pub fn antiderivative(&self, c0: f64) -> Poly {
        let mut out = vec![c0];
        out.extend(self.0.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        Poly(out)
    }

    pub fn random(rng: &mut Srng, degree: usize) -> Poly {
        Poly((0..=degree).map(|_| rng.uniform(-1.5, 1.5)).collect())
    }
}

/// Consistent instantiation of the two chains: `chain(0)` is the base
/// polynomial; positive orders differentiate, negative orders integrate
/// (with random integration constants fixed at construction).
#[derive(Debug, Clone)]
pub struct FuncInstance {
    g_orders: BTreeMap<i8, Poly>,
    h_orders: BTreeMap<i8, Poly>,
}

impl FuncInstance {
    pub fn random(rng: &mut Srng) -> FuncInstance {
        let g0 = Poly::random(rng, 3);
        let h0 = Poly::random(rng, 3);
        let mut g_orders = BTreeMap::new();
        let mut h_orders = BTreeMap::new();
        g_orders.insert(0, g0);
        h_orders.insert(0, h0);
        let mut inst = FuncInstance { g_orders, h_orders };
        // Fix antiderivative constants now so they are consistent.
        let c1 = rng.uniform(-1.0, 1.0);
        let c2 = rng.uniform(-1.0, 1.0);
        let gm1 = inst.g_orders[&0].antiderivative(c1);
        let gm2 = gm1.antiderivative(c2);
        inst.g_orders.insert(-1, gm1);
        inst.g_orders.insert(-2, gm2);
        let c3 = rng.uniform(-1.0, 1.0);
        inst.h_orders.insert(-1, inst.h_orders[&0].antiderivative(c3));
        inst
    }

    fn chain(&mut self, f: Func) -> Result<&Poly, ExprError> {
        let (orders, k) = match f {
            Func::GChain(k) => (&mut self.g_orders, k),
            Func::HChain(k) => (&mut self.h_orders, k),
            _ => return Err(ExprError::Eval(format!("{} is not a chain symbol", f.name()))),
        };
        if !orders.contains_key(&k) {
            if k < *orders.keys().next().unwrap() {
                return Err(ExprError::Eval(format!(
                    "no instantiation for antiderivative order {k}"
                )));
            }
            let mut j = *orders.keys().next_back().unwrap();
            while j < k {
                let next = orders[&j].derivative();
                orders.insert(j + 1, next);
                j += 1;
            }
        }
        Ok(&orders[&k])
    }
}

/// A point in symbol space plus the opaque-function instantiation.
#[derive(Debug, Clone)]
pub struct NumEnv {
    pub vals: BTreeMap<Symbol, f64>,
    pub funcs: FuncInstance,
}

impl NumEnv {
    pub fn new(vals: BTreeMap<Symbol, f64>, funcs: FuncInstance) -> Self {
        NumEnv { vals, funcs }
    }

    /// Evaluates `e`, also reporting the largest absolute value reached by
    /// any subterm (the scale used for relative zero tolerances).
    pub fn eval_scaled(&mut self, e: &Expr) -> Result<(f64, f64), ExprError> {
        let mut scale = 0.0f64;
        let v = self.go(e, &mut scale)?;
        Ok((v, scale))
    }

    pub fn eval(&mut self, e: &Expr) -> Result<f64, ExprError> {
        Ok(self.eval_scaled(e)?.0)
    }

    fn go(&mut self, e: &Expr, scale: &mut f64) -> Result<f64, ExprError> {
        let v = match e.node() {
            Node::Num(q) => q
                .to_f64()
                .ok_or_else(|| ExprError::Eval("rational out of f64 range".into()))?,
            Node::Sym(s) => *self
                .vals
                .get(s)
                .ok_or_else(|| ExprError::Eval(format!("unbound symbol {}", s.name())))?,
            Node::Add(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += self.go(t, scale)?;
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= self.go(f, scale)?;
                }
                acc
            }
            Node::Pow(b, x) => {
                let bv = self.go(b, scale)?;
                let xv = self.go(x, scale)?;
                if bv == 0.0 && xv <= 0.0 {
                    return Err(ExprError::Eval("pole: 0 raised to nonpositive power".into()));
                }
                if bv < 0.0 {
                    // only integer exponents are real
                    if (xv - xv.round()).abs() > 1e-9 {
                        return Err(ExprError::Eval(format!(
                            "branch: negative base {bv} under exponent {xv}"
                        )));
                    }
                    let n = xv.round() as i32;
                    bv.powi(n)
                } else {
                    bv.powf(xv)
                }
            }
            Node::App(f, a) => {
                let av = self.go(a, scale)?;
                match f {
                    Func::Exp => av.exp(),
                    Func::Ln => {
                        if av <= 0.0 {
                            return Err(ExprError::Eval(format!("branch: ln({av})")));
                        }
                        av.ln()
                    }
                    Func::Sin => av.sin(),
                    Func::Cos => av.cos(),
                    Func::Sinh => av.sinh(),
                    Func::Cosh => av.cosh(),
                    Func::Abs => av.abs(),
                    Func::GChain(_) | Func::HChain(_) => self.funcs.chain(*f)?.eval(av),
                }
            }
        };
        if !v.is_finite() {
            return Err(ExprError::Eval(format!("non-finite value in {e}")));
        }
        *scale = scale.max(v.abs());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Param, Sign, Var};
    use super::*;
    use crate::rng::Srng;

    #[test]
    fn poly_calculus() {
        let p = Poly(vec![1.0, 2.0, 3.0]); // 1 + 2z + 3z^2
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative().0, vec![2.0, 6.0]);
        let a = p.antiderivative(5.0);
        assert_eq!(a.0, vec![5.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn chain_consistency_fd() {
        // gp must be the derivative of g, G of gp, for the instantiation.
        let mut rng = Srng::new(7);
        let inst = FuncInstance::random(&mut rng);
        let mut env = NumEnv::new(BTreeMap::new(), inst);
        let z = 0.73;
        let h = 1e-6;
        for (f, fp) in [
            (Func::GChain(-2), Func::GChain(-1)),
            (Func::GChain(-1), Func::GChain(0)),
            (Func::GChain(0), Func::GChain(1)),
            (Func::HChain(-1), Func::HChain(0)),
        ] {
            let up = env.funcs.chain(f).unwrap().eval(z + h);
            let dn = env.funcs.chain(f).unwrap().eval(z - h);
            let fd = (up - dn) / (2.0 * h);
            let sym = env.funcs.chain(fp).unwrap().eval(z);
            assert!((fd - sym).abs() < 1e-6, "{:?}: fd {fd} vs {sym}", f);
        }
    }

    #[test]
    fn evaluates_with_scale() {
        let mut rng = Srng::new(1);
        let mut env = NumEnv::new(BTreeMap::new(), FuncInstance::random(&mut rng));
        env.vals.insert(Symbol::Var(Var::T), 0.5);
        let alpha = Param::new("alpha", Sign::Negative);
        env.vals.insert(Symbol::Param(alpha.clone()), -2.0);
        // sqrt(-alpha) * t
        let e = Expr::mul(vec![
            Expr::sqrt(Expr::neg(Expr::param(&alpha))),
            Expr::var(Var::T),
        ])
        .normalize();
        let (v, scale) = env.eval_scaled(&e).unwrap();
        assert!((v - 0.5 * 2.0f64.sqrt()).abs() < 1e-12);
        assert!(scale >= 2.0); // saw -alpha = 2
    }

    #[test]
    fn poles_are_errors() {
        let mut rng = Srng::new(1);
        let mut env = NumEnv::new(BTreeMap::new(), FuncInstance::random(&mut rng));
        env.vals.insert(Symbol::Var(Var::Phi), -1.0);
        let e = Expr::app(Func::Ln, Expr::var(Var::Phi));
        assert!(env.eval(&e).is_err());
        let e = Expr::pow(Expr::var(Var::Phi), Expr::rational(1, 2));
        assert!(env.eval(&e).is_err());
    }
}
