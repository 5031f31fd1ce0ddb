//! Shared helpers for the integration suites: independent oracles
//! (group-flow finite differences, random generator perturbations) that
//! never call the code paths they check.

#![allow(dead_code)]

use noetherlab::expr::{Expr, NumEnv, Symbol, Var};
use noetherlab::rng::Srng;
use noetherlab::symmetry::Generator;

/// Random small perturbations of catalog generators that are (almost
/// surely) not admitted: used to prove the checker rejects.
pub fn perturbed_generators(rng: &mut Srng, count: usize) -> Vec<(String, Generator)> {
    let entries = ["powG-H0-lam4", "arbG-H0", "expG-H0", "isoG-arbH", "arbG-linH-neg"];
    let t = Expr::var(Var::T);
    let s = Expr::var(Var::S);
    let phi = Expr::var(Var::Phi);
    let candidates: Vec<(&str, Expr, Expr, Expr)> = vec![
        ("tdt", t.clone(), Expr::zero(), Expr::zero()),
        ("tds", Expr::zero(), t.clone(), Expr::zero()),
        ("sdt", s.clone(), Expr::zero(), Expr::zero()),
        ("phidphi", Expr::zero(), Expr::zero(), phi.clone()),
        ("t2dt", Expr::powi(t.clone(), 2), Expr::zero(), Expr::zero()),
        ("sdphi", Expr::zero(), Expr::zero(), s.clone()),
        ("t2dphi", Expr::zero(), Expr::zero(), Expr::powi(t.clone(), 2)),
        ("sds_phidphi", Expr::zero(), s.clone(), Expr::mul(vec![Expr::int(3), phi.clone()])),
        ("tdt_sds", t.clone(), Expr::mul(vec![Expr::int(2), s.clone()]), Expr::zero()),
        ("phi2", Expr::zero(), Expr::zero(), Expr::powi(phi.clone(), 2)),
    ];
    let mut out = Vec::new();
    for i in 0..count {
        let (name, xt, xs, eta) = &candidates[i % candidates.len()];
        let entry = entries[rng.below(entries.len())];
        out.push((
            entry.to_string(),
            Generator::new(name, xt.clone(), xs.clone(), eta.clone()).unwrap(),
        ));
    }
    out
}

/// Numerically flows the one-parameter group of a generator and extracts
/// the transformed jet of a quadratic test function by finite differences.
/// This is the independent oracle for the prolongation formulas: it never
/// touches the symbolic total-derivative recursion.
pub struct GroupFlowOracle {
    /// Coefficients as compiled closures over (t, s, phi).
    xi_t: Box<dyn Fn(f64, f64, f64) -> f64>,
    xi_s: Box<dyn Fn(f64, f64, f64) -> f64>,
    eta: Box<dyn Fn(f64, f64, f64) -> f64>,
}

/// A quadratic test surface phi(t, s) with prescribed jet at the origin of
/// the patch.
#[derive(Debug, Clone, Copy)]
pub struct Jet2 {
    pub t: f64,
    pub s: f64,
    pub phi: f64,
    pub phi_t: f64,
    pub phi_s: f64,
    pub phi_tt: f64,
    pub phi_ts: f64,
    pub phi_ss: f64,
}

impl Jet2 {
    pub fn random(rng: &mut Srng) -> Jet2 {
        Jet2 {
            t: rng.uniform(-0.6, 0.6),
            s: rng.uniform(-0.6, 0.6),
            phi: rng.uniform(0.5, 1.5),
            phi_t: rng.uniform(-0.8, 0.8),
            phi_s: rng.uniform(0.5, 1.5),
            phi_tt: rng.uniform(-0.8, 0.8),
            phi_ts: rng.uniform(-0.8, 0.8),
            phi_ss: rng.uniform(-0.8, 0.8),
        }
    }

    /// The unique quadratic with this 2-jet at (t0, s0).
    fn eval(&self, t: f64, s: f64) -> f64 {
        let dt = t - self.t;
        let ds = s - self.s;
        self.phi
            + self.phi_t * dt
            + self.phi_s * ds
            + 0.5 * self.phi_tt * dt * dt
            + self.phi_ts * dt * ds
            + 0.5 * self.phi_ss * ds * ds
    }
}

impl GroupFlowOracle {
    pub fn new(gen: &Generator, env: &NumEnv) -> GroupFlowOracle {
        let compile = |e: &Expr| -> Box<dyn Fn(f64, f64, f64) -> f64> {
            let e = e.clone();
            let env = env.clone();
            Box::new(move |t, s, phi| {
                let mut env = env.clone();
                env.vals.insert(Symbol::Var(Var::T), t);
                env.vals.insert(Symbol::Var(Var::S), s);
                env.vals.insert(Symbol::Var(Var::Phi), phi);
                env.eval(&e).expect("generator coefficients evaluate")
            })
        };
        GroupFlowOracle {
            xi_t: compile(&gen.xi_t),
            xi_s: compile(&gen.xi_s),
            eta: compile(&gen.eta),
        }
    }

    /// RK4 flow of (t, s, phi) by group parameter `eps`.
    fn flow_point(&self, mut p: [f64; 3], eps: f64) -> [f64; 3] {
        let steps = 64;
        let h = eps / steps as f64;
        let f = |p: [f64; 3]| {
            [
                (self.xi_t)(p[0], p[1], p[2]),
                (self.xi_s)(p[0], p[1], p[2]),
                (self.eta)(p[0], p[1], p[2]),
            ]
        };
        for _ in 0..steps {
            let k1 = f(p);
            let k2 = f(add(p, scale(k1, h / 2.0)));
            let k3 = f(add(p, scale(k2, h / 2.0)));
            let k4 = f(add(p, scale(k3, h)));
            for i in 0..3 {
                p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        p
    }

    /// Value of the transformed function at new-coordinates (tn, sn):
    /// flow (tn, sn) back, evaluate the test surface, flow the value
    /// forward along the graph.
    fn transformed_value(&self, jet: &Jet2, eps: f64, tn: f64, sn: f64) -> f64 {
        // Invert the base flow: integrate backwards. phi plays no role in
        // the (t, s) motion only when xi depends on phi; integrate the full
        // 3d system backwards from a phi guess... The graph transform is
        // cleaner: flow forward from the preimage. Since our xi_t, xi_s
        // never depend on phi in the catalog, the base motion decouples and
        // backwards integration of (t, s) alone is exact.
        let back = self.flow_point([tn, sn, 0.0], -eps);
        let (t0, s0) = (back[0], back[1]);
        let phi0 = jet.eval(t0, s0);
        let fwd = self.flow_point([t0, s0, phi0], eps);
        fwd[2]
    }

    /// Transformed jet at the image of the jet's base point, by 5-point
    /// finite-difference stencils on the transformed function (values
    /// memoized per stencil offset).
    pub fn transformed_jet(&self, jet: &Jet2, eps: f64) -> Jet2 {
        let image = self.flow_point([jet.t, jet.s, jet.phi], eps);
        let (tn, sn) = (image[0], image[1]);
        let h = 0.012;
        let cache = std::cell::RefCell::new(std::collections::BTreeMap::<(i64, i64), f64>::new());
        let val = |i: i64, j: i64| {
            *cache
                .borrow_mut()
                .entry((i, j))
                .or_insert_with(|| {
                    self.transformed_value(jet, eps, tn + i as f64 * h, sn + j as f64 * h)
                })
        };
        // 5-point first and second derivative stencils, O(h^4)
        let d1 = |f: &dyn Fn(i64) -> f64| {
            (-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h)
        };
        let d2 = |f: &dyn Fn(i64) -> f64| {
            (-f(2) + 16.0 * f(1) - 30.0 * f(0) + 16.0 * f(-1) - f(-2)) / (12.0 * h * h)
        };
        let ft = |i: i64| val(i, 0);
        let fs = |j: i64| val(0, j);
        let phi_t = d1(&ft);
        let phi_s = d1(&fs);
        let phi_tt = d2(&ft);
        let phi_ss = d2(&fs);
        // mixed: centered cross stencil, O(h^2) with Richardson
        let cross = |hh: f64| {
            let v = |a: f64, b: f64| self.transformed_value(jet, eps, tn + a, sn + b);
            (v(hh, hh) - v(hh, -hh) - v(-hh, hh) + v(-hh, -hh)) / (4.0 * hh * hh)
        };
        let phi_ts = (4.0 * cross(h / 2.0) - cross(h)) / 3.0;
        Jet2 {
            t: tn,
            s: sn,
            phi: image[2],
            phi_t,
            phi_s,
            phi_tt,
            phi_ts,
            phi_ss,
        }
    }

    /// d/d eps at eps = 0 of each transformed jet coordinate, by central
    /// differences with Richardson extrapolation: these are the reference
    /// values for the zeta coefficients.
    pub fn jet_velocity(&self, jet: &Jet2, eps: f64) -> Jet2 {
        let central = |e: f64| {
            let plus = self.transformed_jet(jet, e);
            let minus = self.transformed_jet(jet, -e);
            [
                (plus.phi - minus.phi) / (2.0 * e),
                (plus.phi_t - minus.phi_t) / (2.0 * e),
                (plus.phi_s - minus.phi_s) / (2.0 * e),
                (plus.phi_tt - minus.phi_tt) / (2.0 * e),
                (plus.phi_ts - minus.phi_ts) / (2.0 * e),
                (plus.phi_ss - minus.phi_ss) / (2.0 * e),
            ]
        };
        let full = central(eps);
        let half = central(eps / 2.0);
        let richardson = |i: usize| (4.0 * half[i] - full[i]) / 3.0;
        Jet2 {
            t: jet.t,
            s: jet.s,
            phi: richardson(0),
            phi_t: richardson(1),
            phi_s: richardson(2),
            phi_tt: richardson(3),
            phi_ts: richardson(4),
            phi_ss: richardson(5),
        }
    }
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], k: f64) -> [f64; 3] {
    [a[0] * k, a[1] * k, a[2] * k]
}

/// Relative difference scaled by magnitudes.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Least-squares slope of log2(err) against refinement level (levels are
/// successive halvings, so the slope is the observed order).
pub fn observed_order(errors: &[f64]) -> f64 {
    let mut ratios = Vec::new();
    for w in errors.windows(2) {
        if w[1] > 0.0 && w[0] > 0.0 {
            ratios.push((w[0] / w[1]).log2());
        }
    }
    ratios.iter().sum::<f64>() / ratios.len() as f64
}
