//! Robust zero testing: structural normal form cross-checked against
//! numeric sampling over a constrained parameter domain.

use super::{Expr, ExprError, FuncInstance, NumEnv, Param, Rat, Sign, Symbol, Var};
use crate::rng::Srng;
use num_traits::{Signed, ToPrimitive};
use std::collections::BTreeMap;

/// Constraints on one parameter.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParamSpec {
    #[serde(default)]
    pub sign: Sign,
    #[serde(default)]
    pub nonzero: bool,
    /// Rational values (as strings, e.g. "-2", "1/2") the sampler must avoid.
    #[serde(default)]
    pub exclude: Vec<String>,
}

/// Sign/nonzero constraints for every parameter of a model or catalog entry.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ParameterDomain {
    pub params: BTreeMap<String, ParamSpec>,
}

impl ParameterDomain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, spec: ParamSpec) -> Self {
        self.params.insert(name.to_string(), spec);
        self
    }

    /// The parameter symbol carrying this domain's sign tag.
    pub fn param(&self, name: &str) -> Param {
        let sign = self.params.get(name).map(|s| s.sign).unwrap_or_default();
        Param::new(name, sign)
    }

    /// Symbol table for parsing expressions against this domain.
    pub fn symbol_table(&self) -> super::SymbolTable {
        let mut t = super::SymbolTable::new();
        for (name, spec) in &self.params {
            t.declare(name, spec.sign);
        }
        t
    }

    /// Merges another domain (for generator + model constraint unions).
    pub fn merged(&self, other: &ParameterDomain) -> ParameterDomain {
        let mut out = self.clone();
        for (k, v) in &other.params {
            let entry = out.params.entry(k.clone()).or_default();
            if entry.sign == Sign::Any {
                entry.sign = v.sign;
            }
            entry.nonzero |= v.nonzero;
            for e in &v.exclude {
                if !entry.exclude.contains(e) {
                    entry.exclude.push(e.clone());
                }
            }
        }
        out
    }

    fn sample_param(&self, p: &Param, rng: &mut Srng) -> f64 {
        let spec = self.params.get(&*p.name).cloned().unwrap_or(ParamSpec {
            sign: p.sign,
            nonzero: false,
            exclude: vec![],
        });
        let excluded: Vec<f64> = spec
            .exclude
            .iter()
            .filter_map(|s| parse_rat(s).and_then(|q| q.to_f64()))
            .collect();
        loop {
            // Magnitude stays away from 0 so nonzero verdicts are stable;
            // nonzero constraints hold by construction.
            let mag = rng.uniform(0.3, 2.2);
            let v = match spec.sign {
                Sign::Positive => mag,
                Sign::Negative => -mag,
                Sign::Any => {
                    if rng.chance(0.5) {
                        mag
                    } else {
                        -mag
                    }
                }
            };
            if excluded.iter().all(|x| (v - x).abs() > 0.05) {
                return v;
            }
        }
    }
}

/// Parses a rational literal: "-2", "1/3", "0.25".
pub fn parse_rat_pub(s: &str) -> Option<Rat> {
    parse_rat(s)
}

pub(crate) fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: num_bigint::BigInt = n.trim().parse().ok()?;
        let d: num_bigint::BigInt = d.trim().parse().ok()?;
        Some(Rat::new(n, d))
    } else if let Some((i, f)) = s.split_once('.') {
        let whole: num_bigint::BigInt = if i.is_empty() { 0.into() } else { i.parse().ok()? };
        let digits = f.len() as u32;
        let frac: num_bigint::BigInt = f.parse().ok()?;
        let den = num_bigint::BigInt::from(10u32).pow(digits);
        let neg = i.starts_with('-');
        let mag = Rat::from(whole.clone()).abs()
            + Rat::new(frac, den);
        Some(if neg || whole < 0.into() { -mag } else { mag })
    } else {
        let n: num_bigint::BigInt = s.parse().ok()?;
        Some(Rat::from(n))
    }
}

/// Draws one evaluation point: jet variables from their windows, parameters
/// from the domain, opaque chains as random polynomials.
pub fn sample_env(e: &Expr, domain: &ParameterDomain, rng: &mut Srng) -> NumEnv {
    let mut vals = BTreeMap::new();
    for s in e.symbols() {
        let v = match &s {
            Symbol::Var(v) => match v {
                Var::T | Var::S => rng.uniform(-1.0, 1.0),
                Var::Phi | Var::PhiS | Var::Rho | Var::X => rng.uniform(0.35, 1.85),
                _ => rng.uniform(-1.0, 1.0),
            },
            Symbol::Param(p) => domain.sample_param(p, rng),
        };
        vals.insert(s, v);
    }
    NumEnv::new(vals, FuncInstance::random(rng))
}

/// Outcome of a zero test, carrying diagnostics.
#[derive(Debug, Clone)]
pub struct ZeroOutcome {
    pub is_zero: bool,
    pub normalized: Expr,
    /// Largest |value|/scale ratio observed over the sample points.
    pub worst_ratio: f64,
}

const POINTS: usize = 100;
const TOL: f64 = 1e-10;

/// Structural-plus-numeric zero test.
///
/// Returns `Ok(outcome)` when the normal form and 100-point sampling agree,
/// `Err(ZeroDisagreement)` when they do not (a simplifier gap), and
/// `Err(TooManyPoles)` when more than half the samples hit branch cuts.
pub fn is_zero(e: &Expr, domain: &ParameterDomain, rng: &mut Srng) -> Result<ZeroOutcome, ExprError> {
    let mut normalized = e.normalize();
    let structural = normalized.is_zero_expr() || {
        // denominator-cleared fallback (see `Expr::vanishes`)
        let v = normalized.vanishes();
        if v {
            normalized = Expr::zero();
        }
        v
    };

    let mut worst = 0.0f64;
    let mut done = 0usize;
    let mut failures = 0usize;
    let max_attempts = POINTS * 4;
    let mut attempts = 0usize;
    while done < POINTS && attempts < max_attempts {
        attempts += 1;
        let mut env = sample_env(e, domain, rng);
        match env.eval_scaled(e) {
            Ok((v, scale)) => {
                let ratio = v.abs() / (1.0 + scale);
                worst = worst.max(ratio);
                done += 1;
            }
            Err(_) => failures += 1,
        }
    }
    if done < POINTS / 2 {
        return Err(ExprError::TooManyPoles(failures, attempts));
    }
    let numeric = worst < TOL;
    if numeric != structural {
        return Err(ExprError::ZeroDisagreement {
            structural,
            residual: normalized.to_string(),
        });
    }
    Ok(ZeroOutcome { is_zero: structural, normalized, worst_ratio: worst })
}
