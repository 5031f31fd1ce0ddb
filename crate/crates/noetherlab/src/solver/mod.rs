//! Explicit integration of `phi_tt + G(phi_s) phi_ss - H(phi) = 0` on a
//! uniform mass grid.
//!
//! The scheme is velocity Verlet on the second-order form with the spatial
//! term in conservative face form,
//!
//! ```text
//! a_i = H(phi_i) - (gp(d_i) - gp(d_{i-1})) / ds,    d_i = (phi_{i+1} - phi_i)/ds
//! ```
//!
//! which equals `H - G(phi_s) phi_ss` to second order and telescopes over a
//! periodic grid, so the total `sum(phi_t) ds` changes only by roundoff
//! when `H = 0`.  Periodic runs store the field as a linear background
//! plus a periodic part: `phi(s + S) = phi(s) + jump`, with the jump
//! carrying its own oscillator update when `H` is linear (sources beyond
//! `H = alpha phi` are incompatible with a periodic mass interval and are
//! rejected at setup).  Breakdown policy is stop-and-report: the step
//! fails when a face slope loses positivity or a value goes non-finite;
//! there is no artificial viscosity.

mod ic;
mod monitor;

pub use ic::InitialCondition;
pub use monitor::{CompiledCurrent, Monitor, MonitorRecord, MonitorSeries};

use crate::expr::{Chain, Expr, NumEnv, Symbol, Var};
use crate::model::{Coeff, HFamily, ModelSpec};
use std::collections::BTreeMap;

/// Uniform mass grid on `[0, length)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub n: usize,
    pub length: f64,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    FixedEnds,
}

impl Grid {
    pub fn new(n: usize, length: f64, boundary: Boundary) -> Result<Grid, SolverError> {
        if n < 8 {
            return Err(SolverError::Grid(format!("need at least 8 cells, got {n}")));
        }
        if !(length > 0.0) {
            return Err(SolverError::Grid(format!("domain length must be positive, got {length}")));
        }
        Ok(Grid { n, length, boundary })
    }

    pub fn ds(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.ds()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("loss of hyperbolicity/positivity: phi_s = {value} at face {index} (t = {time})")]
    PositivityLoss { index: usize, value: f64, time: f64 },
    #[error("non-finite value at node {index} (t = {time})")]
    NonFinite { index: usize, time: f64 },
    #[error("G(phi_s) = {0} >= 0: no real wave speed")]
    NonHyperbolic(f64),
    #[error("time step {dt} exceeds the stability bound {max}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("cannot simulate this model numerically: {0}")]
    Model(String),
    #[error("periodic runs support H = 0 or H = alpha phi; {0} breaks mass periodicity")]
    PeriodicSource(String),
    #[error("monitor `{0}`: {1}")]
    Monitor(String, String),
    #[error("initial condition: {0}")]
    InitialCondition(String),
    #[error("Eulerian extraction needs monotone phi; slope {value} at face {index}")]
    NonMonotone { index: usize, value: f64 },
}

/// Closures for the model's `g`-chain and source, plus everything the
/// monitors need to evaluate currents.
pub struct NumericModel {
    pub g: Box<dyn Fn(f64) -> f64>,
    pub gp: Box<dyn Fn(f64) -> f64>,
    pub big_g: Box<dyn Fn(f64) -> f64>,
    pub h_source: Box<dyn Fn(f64) -> f64>,
    /// `Some(alpha)` when `H = alpha phi` (zero family gives 0.0); `None`
    /// for nonlinear sources, which excludes periodic runs.
    pub linear_alpha: Option<f64>,
    pub description: String,
    /// The symbolic model, kept for monitor compilation.
    pub spec: ModelSpec,
    pub params: BTreeMap<String, f64>,
}

impl NumericModel {
    /// Compiles a model, substituting numeric values for any symbolic
    /// parameters.  Arbitrary (opaque) families cannot be simulated.
    pub fn compile(
        m: &ModelSpec,
        params: &BTreeMap<String, f64>,
    ) -> Result<NumericModel, SolverError> {
        let chain_fn = |order: i32| -> Result<Box<dyn Fn(f64) -> f64>, SolverError> {
            let z = Expr::var(Var::PhiS);
            let template = m
                .chain_template(Chain::G, order, &z)
                .ok_or_else(|| SolverError::Model("G has no closed antiderivatives".into()))?;
            compile_scalar(&template, Var::PhiS, params)
        };
        let g = chain_fn(-2)?;
        let gp = chain_fn(-1)?;
        let big_g = chain_fn(0)?;
        let h_template = m
            .chain_template(Chain::H, 0, &Expr::var(Var::Phi))
            .ok_or_else(|| SolverError::Model("H has no closed form".into()))?;
        let h_source = compile_scalar(&h_template, Var::Phi, params)?;
        let linear_alpha = match &m.h {
            HFamily::Zero => Some(0.0),
            HFamily::Linear { alpha } => Some(coeff_value(alpha, params)?),
            _ => None,
        };
        let probe = big_g(1.0);
        if !probe.is_finite() {
            return Err(SolverError::Model("G(1) is not finite".into()));
        }
        Ok(NumericModel {
            g,
            gp,
            big_g,
            h_source,
            linear_alpha,
            description: m.describe(),
            spec: m.clone(),
            params: params.clone(),
        })
    }
}

fn coeff_value(c: &Coeff, params: &BTreeMap<String, f64>) -> Result<f64, SolverError> {
    match c {
        Coeff::Rat(q) => num_traits::ToPrimitive::to_f64(q)
            .ok_or_else(|| SolverError::Model("coefficient out of f64 range".into())),
        Coeff::Sym(p) => params
            .get(&*p.name)
            .copied()
            .ok_or_else(|| SolverError::Model(format!("no numeric value for parameter {}", p.name))),
    }
}

/// Compiles a single-variable expression (after parameter substitution)
/// into a closure.
fn compile_scalar(
    template: &Expr,
    var: Var,
    params: &BTreeMap<String, f64>,
) -> Result<Box<dyn Fn(f64) -> f64>, SolverError> {
    if template.contains_chain() {
        return Err(SolverError::Model(format!(
            "`{template}` keeps an opaque function symbol; provide a concrete family"
        )));
    }
    let mut vals = BTreeMap::new();
    for s in template.symbols() {
        if let Symbol::Param(p) = &s {
            let v = params.get(&*p.name).copied().ok_or_else(|| {
                SolverError::Model(format!("no numeric value for parameter {}", p.name))
            })?;
            vals.insert(s.clone(), v);
        }
    }
    let template = template.clone();
    let base_env =
        NumEnv::new(vals, crate::expr::FuncInstance::random(&mut crate::rng::Srng::new(0)));
    Ok(Box::new(move |z: f64| {
        let mut env = base_env.clone();
        env.vals.insert(Symbol::Var(var), z);
        env.eval(&template).unwrap_or(f64::NAN)
    }))
}

/// Discrete fields on the mass grid.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub grid: Grid,
    pub phi: Vec<f64>,
    pub phi_t: Vec<f64>,
    /// Periodic runs: `phi(s + S) = phi(s) + jump` (the Eulerian extent).
    pub jump: f64,
    pub jump_t: f64,
    pub time: f64,
    pub steps: u64,
}

impl SolverState {
    pub fn new(grid: Grid, ic: &InitialCondition) -> Result<SolverState, SolverError> {
        let (phi, phi_t, jump) = ic.build(&grid)?;
        let st = SolverState { grid, phi, phi_t, jump, jump_t: 0.0, time: 0.0, steps: 0 };
        st.check_positivity()?;
        Ok(st)
    }

    /// Face slopes `d_i = (phi_{i+1} - phi_i)/ds`; periodic grids have `n`
    /// faces (the last wraps through the jump), fixed ends have `n - 1`.
    pub fn face_slopes(&self) -> Vec<f64> {
        let n = self.grid.n;
        let ds = self.grid.ds();
        let mut out = Vec::with_capacity(n);
        for i in 0..n - 1 {
            out.push((self.phi[i + 1] - self.phi[i]) / ds);
        }
        if self.grid.boundary == Boundary::Periodic {
            out.push((self.phi[0] + self.jump - self.phi[n - 1]) / ds);
        }
        out
    }

    /// Central-difference slope at each node (wrap- and end-aware).
    pub fn central_slopes(&self) -> Vec<f64> {
        let n = self.grid.n;
        let ds = self.grid.ds();
        let mut out = Vec::with_capacity(n);
        match self.grid.boundary {
            Boundary::Periodic => {
                for i in 0..n {
                    let right = if i + 1 < n { self.phi[i + 1] } else { self.phi[0] + self.jump };
                    let left = if i > 0 { self.phi[i - 1] } else { self.phi[n - 1] - self.jump };
                    out.push((right - left) / (2.0 * ds));
                }
            }
            Boundary::FixedEnds => {
                out.push((self.phi[1] - self.phi[0]) / ds);
                for i in 1..n - 1 {
                    out.push((self.phi[i + 1] - self.phi[i - 1]) / (2.0 * ds));
                }
                out.push((self.phi[n - 1] - self.phi[n - 2]) / ds);
            }
        }
        out
    }

    pub fn min_phi_s(&self) -> f64 {
        self.face_slopes().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_positivity(&self) -> Result<(), SolverError> {
        for (i, d) in self.face_slopes().iter().enumerate() {
            if !d.is_finite() {
                return Err(SolverError::NonFinite { index: i, time: self.time });
            }
            if *d <= 0.0 {
                return Err(SolverError::PositivityLoss { index: i, value: *d, time: self.time });
            }
        }
        Ok(())
    }
}

/// Conservative acceleration `H(phi) - D_s gp(phi_s)` (face form).
fn acceleration(st: &SolverState, nm: &NumericModel) -> Vec<f64> {
    let n = st.grid.n;
    let ds = st.grid.ds();
    let faces = st.face_slopes();
    let flux: Vec<f64> = faces.iter().map(|d| (nm.gp)(*d)).collect();
    let mut a = vec![0.0; n];
    match st.grid.boundary {
        Boundary::Periodic => {
            for i in 0..n {
                let right = flux[i];
                let left = flux[(i + n - 1) % n];
                a[i] = (nm.h_source)(st.phi[i]) - (right - left) / ds;
            }
        }
        Boundary::FixedEnds => {
            // pinned ends: interior nodes only
            for i in 1..n - 1 {
                a[i] = (nm.h_source)(st.phi[i]) - (flux[i] - flux[i - 1]) / ds;
            }
        }
    }
    a
}

/// Largest stable step: `nu ds / max sqrt(-G(phi_s))` with `nu = 0.5`.
pub fn cfl_dt(st: &SolverState, nm: &NumericModel) -> Result<f64, SolverError> {
    let mut max_speed: f64 = 0.0;
    for d in st.face_slopes() {
        let g = (nm.big_g)(d);
        if !(g < 0.0) {
            return Err(SolverError::NonHyperbolic(g));
        }
        max_speed = max_speed.max((-g).sqrt());
    }
    Ok(0.5 * st.grid.ds() / max_speed)
}

/// One velocity-Verlet step.  `dt` must respect [`cfl_dt`]; the returned
/// state has its positivity invariant re-checked.
pub fn step(st: &SolverState, nm: &NumericModel, dt: f64) -> Result<SolverState, SolverError> {
    let bound = cfl_dt(st, nm)?;
    if dt > bound * (1.0 + 1e-12) {
        return Err(SolverError::StepTooLarge { dt, max: bound });
    }
    if st.grid.boundary == Boundary::Periodic && nm.linear_alpha.is_none() {
        return Err(SolverError::PeriodicSource(nm.description.clone()));
    }
    let n = st.grid.n;
    let mut next = st.clone();
    let alpha = nm.linear_alpha.unwrap_or(0.0);

    let a = acceleration(st, nm);
    let mut vhalf: Vec<f64> = (0..n).map(|i| st.phi_t[i] + 0.5 * dt * a[i]).collect();
    for i in 0..n {
        next.phi[i] = st.phi[i] + dt * vhalf[i];
    }
    // jump oscillator (exactly the per-node linear dynamics)
    let jump_a = alpha * st.jump;
    let jump_vhalf = st.jump_t + 0.5 * dt * jump_a;
    next.jump = st.jump + dt * jump_vhalf;
    next.jump_t = jump_vhalf;

    next.time = st.time + dt;
    let a2 = acceleration(&next, nm);
    for i in 0..n {
        vhalf[i] += 0.5 * dt * a2[i];
    }
    next.phi_t = vhalf;
    next.jump_t += 0.5 * dt * alpha * next.jump;
    next.steps = st.steps + 1;

    for (i, v) in next.phi.iter().chain(next.phi_t.iter()).enumerate() {
        if !v.is_finite() {
            return Err(SolverError::NonFinite { index: i % n, time: next.time });
        }
    }
    next.check_positivity()?;
    Ok(next)
}

/// Sampled Eulerian fields `x = phi`, `rho = 1/phi_s`, `u = phi_t`.
#[derive(Debug, Clone)]
pub struct EulerianFields {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

pub fn to_eulerian_fields(st: &SolverState) -> Result<EulerianFields, SolverError> {
    for (i, d) in st.face_slopes().iter().enumerate() {
        if *d <= 0.0 {
            return Err(SolverError::NonMonotone { index: i, value: *d });
        }
    }
    let slopes = st.central_slopes();
    Ok(EulerianFields {
        x: st.phi.clone(),
        rho: slopes.iter().map(|d| 1.0 / d).collect(),
        u: st.phi_t.clone(),
    })
}

/// Discrete residuals of the Eulerian system measured from three
/// consecutive snapshots (material time derivative at fixed mass node,
/// second-order differences in `x`): the max-norm of the continuity and
/// momentum residuals over interior nodes.
pub fn eulerian_residuals(
    prev: &SolverState,
    mid: &SolverState,
    next: &SolverState,
    nm: &NumericModel,
) -> Result<(f64, f64), SolverError> {
    let dt = next.time - prev.time;
    if !(dt > 0.0) {
        return Err(SolverError::Grid("snapshots must be time-ordered".into()));
    }
    let fp = to_eulerian_fields(prev)?;
    let fm = to_eulerian_fields(mid)?;
    let fnx = to_eulerian_fields(next)?;
    let n = mid.grid.n;
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    // nonuniform 3-point first derivative, O(h^2)
    let ddx = |f: &[f64], x: &[f64], i: usize| -> f64 {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        (hm * hm * f[i + 1] - hp * hp * f[i - 1] + (hp * hp - hm * hm) * f[i])
            / (hp * hm * (hp + hm))
    };
    for i in 1..n - 1 {
        let rho_dot = (fnx.rho[i] - fp.rho[i]) / dt;
        let u_dot = (fnx.u[i] - fp.u[i]) / dt;
        let u_x = ddx(&fm.u, &fm.x, i);
        let rho_x = ddx(&fm.rho, &fm.x, i);
        // material form of the continuity equation
        let c = rho_dot + fm.rho[i] * u_x;
        // u_dot is the material derivative u_t + u u_x already
        let g = (nm.big_g)(1.0 / fm.rho[i]);
        let mmt = u_dot - g * fm.rho[i].powi(-3) * rho_x - (nm.h_source)(fm.x[i]);
        r1 = r1.max(c.abs());
        r2 = r2.max(mmt.abs());
    }
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rat, ParameterDomain, Rat};
    use crate::model::GFamily;

    fn shallow_water() -> NumericModel {
        let m = ModelSpec::new(
            GFamily::Power { lambda: Coeff::Rat(rat(-3, 1)), c: Rat::from_integer(0.into()) },
            HFamily::Zero,
            ParameterDomain::new(),
        )
        .unwrap();
        NumericModel::compile(&m, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(4, 1.0, Boundary::Periodic).is_err());
        assert!(Grid::new(8, 0.0, Boundary::Periodic).is_err());
        let g = Grid::new(10, 2.0, Boundary::Periodic).unwrap();
        assert!((g.ds() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let grid = Grid::new(16, 1.0, Boundary::Periodic).unwrap();
        let st = SolverState::new(grid, &InitialCondition::Equilibrium { slope: 1.0 }).unwrap();
        let nm = shallow_water();
        let dt = cfl_dt(&st, &nm).unwrap();
        let mut cur = st.clone();
        for _ in 0..50 {
            cur = step(&cur, &nm, dt).unwrap();
        }
        for i in 0..st.grid.n {
            assert!((cur.phi[i] - st.phi[i]).abs() < 1e-13, "phi drifted at {i}");
            assert!(cur.phi_t[i].abs() < 1e-13);
        }
    }

    #[test]
    fn cfl_arithmetic() {
        // G = -phi_s^-4 at phi_s = 2 gives speed 1/4; ds = 0.01 -> dt 0.02.
        let m = ModelSpec::new(
            GFamily::Power { lambda: Coeff::Rat(rat(-4, 1)), c: Rat::from_integer(0.into()) },
            HFamily::Zero,
            ParameterDomain::new(),
        )
        .unwrap();
        let nm = NumericModel::compile(&m, &BTreeMap::new()).unwrap();
        let grid = Grid::new(100, 1.0, Boundary::Periodic).unwrap(); // ds = 0.01
        let st = SolverState::new(grid, &InitialCondition::Equilibrium { slope: 2.0 }).unwrap();
        let dt = cfl_dt(&st, &nm).unwrap();
        assert!((dt - 0.02).abs() < 1e-12, "dt = {dt}");
    }

    #[test]
    fn cfl_shrinks_with_slope_for_negative_lambda() {
        let nm = shallow_water();
        let grid = Grid::new(64, 1.0, Boundary::Periodic).unwrap();
        let mut prev = f64::INFINITY;
        for slope in [2.0, 1.0, 0.5, 0.25] {
            let st =
                SolverState::new(grid.clone(), &InitialCondition::Equilibrium { slope }).unwrap();
            let dt = cfl_dt(&st, &nm).unwrap();
            assert!(dt < prev, "dt must shrink as phi_s shrinks (lambda < 0)");
            prev = dt;
        }
    }

    #[test]
    fn positivity_loss_is_reported() {
        let grid = Grid::new(16, 1.0, Boundary::Periodic).unwrap();
        let mut st =
            SolverState::new(grid, &InitialCondition::Equilibrium { slope: 0.05 }).unwrap();
        // Strong compression collapses a cell within a few steps.
        for i in 0..st.grid.n {
            st.phi_t[i] = -2.0 * (std::f64::consts::TAU * st.grid.node(i)).sin();
        }
        let nm = shallow_water();
        let mut cur = st;
        let mut failed = false;
        for _ in 0..4000 {
            let dt = match cfl_dt(&cur, &nm) {
                Ok(d) => d,
                Err(_) => {
                    failed = true;
                    break;
                }
            };
            match step(&cur, &nm, dt) {
                Ok(nxt) => cur = nxt,
                Err(SolverError::PositivityLoss { .. }) | Err(SolverError::NonFinite { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(failed, "expected a breakdown report");
    }

    #[test]
    fn uniform_state_follows_the_oscillator() {
        // H = alpha phi (alpha > 0) with phi = s A(t) + B(t): per-node
        // a_i = alpha phi_i exactly, so the field follows
        // A = cosh(sqrt(alpha) t), B = w0 sinh(sqrt(alpha) t)/sqrt(alpha).
        let alpha = 1.0f64;
        let w0 = 0.3f64;
        let m = ModelSpec::new(
            GFamily::Power { lambda: Coeff::Rat(rat(-3, 1)), c: Rat::from_integer(0.into()) },
            HFamily::Linear { alpha: Coeff::Rat(rat(1, 1)) },
            ParameterDomain::new(),
        )
        .unwrap();
        let nm = NumericModel::compile(&m, &BTreeMap::new()).unwrap();
        let grid = Grid::new(16, 1.0, Boundary::Periodic).unwrap();
        let mut st =
            SolverState::new(grid, &InitialCondition::Equilibrium { slope: 1.0 }).unwrap();
        for v in st.phi_t.iter_mut() {
            *v = w0;
        }
        let dt = 1e-3;
        let t_end = 1.0;
        while st.time < t_end - 1e-12 {
            st = step(&st, &nm, dt).unwrap();
        }
        let root = alpha.sqrt();
        for i in 0..st.grid.n {
            let exact = st.grid.node(i) * (root * st.time).cosh()
                + w0 * (root * st.time).sinh() / root;
            assert!(
                (st.phi[i] - exact).abs() < 1e-4,
                "node {i}: {} vs {exact}",
                st.phi[i]
            );
        }
    }

    #[test]
    fn eulerian_fields_extraction() {
        let grid = Grid::new(16, 1.0, Boundary::Periodic).unwrap();
        let st = SolverState::new(grid, &InitialCondition::Equilibrium { slope: 2.0 }).unwrap();
        let f = to_eulerian_fields(&st).unwrap();
        for r in &f.rho {
            assert!((r - 0.5).abs() < 1e-12);
        }
        for u in &f.u {
            assert_eq!(*u, 0.0);
        }
        for w in f.x.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn reversibility_of_the_integrator() {
        let nm = shallow_water();
        let grid = Grid::new(200, std::f64::consts::TAU, Boundary::Periodic).unwrap();
        let ic = InitialCondition::GaussianVelocity {
            slope: 1.0,
            amplitude: 0.05,
            center: 0.5,
            width: 0.08,
        };
        let st0 = SolverState::new(grid, &ic).unwrap();
        let dt = 0.75 * cfl_dt(&st0, &nm).unwrap();
        let mut cur = st0.clone();
        for _ in 0..100 {
            cur = step(&cur, &nm, dt).unwrap();
        }
        for v in cur.phi_t.iter_mut() {
            *v = -*v;
        }
        cur.jump_t = -cur.jump_t;
        for _ in 0..100 {
            cur = step(&cur, &nm, dt).unwrap();
        }
        let scale: f64 = st0.phi.iter().map(|p| p.abs()).fold(0.0, f64::max);
        for i in 0..st0.grid.n {
            let err = (cur.phi[i] - st0.phi[i]).abs() / scale;
            assert!(err < 1e-6, "node {i}: relative {err}");
        }
    }
}
