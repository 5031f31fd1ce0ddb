//! Initial-condition library: equilibrium, a Gaussian velocity bump,
//! a sinusoidal slope perturbation, and free-form expressions in `s`.

use super::{Boundary, Grid, SolverError};
use crate::expr::{parse_expr, NumEnv, Symbol, Var};
use std::collections::BTreeMap;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `phi = slope s`, `phi_t = 0`.
    Equilibrium { slope: f64 },
    /// `phi = slope s` with a periodized Gaussian bump on `phi_t`;
    /// `center` is a fraction of the domain length.
    GaussianVelocity { slope: f64, amplitude: f64, center: f64, width: f64 },
    /// `phi_s = slope + amplitude sin(2 pi k s / S)`, `phi_t = 0`.
    SinusoidalSlope { slope: f64, amplitude: f64, wavenumber: u32 },
    /// Free-form `phi(s)`, `phi_t(s)` in the text grammar.  On periodic
    /// grids the jump is `phi(S) - phi(0)` and `phi_t` must close up.
    Expression { phi: String, phi_t: String },
}

impl InitialCondition {
    pub(super) fn build(&self, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>, f64), SolverError> {
        let n = grid.n;
        let len = grid.length;
        match self {
            InitialCondition::Equilibrium { slope } => {
                let phi = (0..n).map(|i| slope * grid.node(i)).collect();
                Ok((phi, vec![0.0; n], slope * len))
            }
            InitialCondition::GaussianVelocity { slope, amplitude, center, width } => {
                if *width <= 0.0 {
                    return Err(SolverError::InitialCondition("width must be positive".into()));
                }
                let c = center * len;
                let phi = (0..n).map(|i| slope * grid.node(i)).collect();
                let bump = |s: f64| {
                    // sum over periodic images keeps the seam smooth
                    let mut v = 0.0;
                    for k in -2i32..=2 {
                        let d = s - c + k as f64 * len;
                        v += amplitude * (-d * d / (2.0 * width * width)).exp();
                    }
                    v
                };
                let phi_t = (0..n).map(|i| bump(grid.node(i))).collect();
                Ok((phi, phi_t, slope * len))
            }
            InitialCondition::SinusoidalSlope { slope, amplitude, wavenumber } => {
                if *wavenumber == 0 {
                    return Err(SolverError::InitialCondition(
                        "wavenumber must be at least 1".into(),
                    ));
                }
                let k = std::f64::consts::TAU * (*wavenumber as f64) / len;
                // phi = slope s - (amplitude/k) cos(k s): phi_s = slope + amplitude sin(k s)
                let phi = (0..n)
                    .map(|i| {
                        let s = grid.node(i);
                        slope * s - amplitude / k * (k * s).cos()
                    })
                    .collect();
                Ok((phi, vec![0.0; n], slope * len))
            }
            InitialCondition::Expression { phi, phi_t } => {
                let table = Default::default();
                let pe = parse_expr(phi, &table)
                    .map_err(|e| SolverError::InitialCondition(e.to_string()))?;
                let ve = parse_expr(phi_t, &table)
                    .map_err(|e| SolverError::InitialCondition(e.to_string()))?;
                for e in [&pe, &ve] {
                    let ok = e
                        .symbols()
                        .iter()
                        .all(|sym| matches!(sym, Symbol::Var(Var::S)));
                    if !ok {
                        return Err(SolverError::InitialCondition(format!(
                            "initial data may depend on s only, got `{e}`"
                        )));
                    }
                }
                let mut env = NumEnv::new(
                    BTreeMap::new(),
                    crate::expr::FuncInstance::random(&mut crate::rng::Srng::new(0)),
                );
                let mut eval_at = |e: &crate::expr::Expr, s: f64| -> Result<f64, SolverError> {
                    env.vals.insert(Symbol::Var(Var::S), s);
                    env.eval(e).map_err(|er| SolverError::InitialCondition(er.to_string()))
                };
                let mut phi_v = Vec::with_capacity(n);
                let mut vel_v = Vec::with_capacity(n);
                for i in 0..n {
                    phi_v.push(eval_at(&pe, grid.node(i))?);
                    vel_v.push(eval_at(&ve, grid.node(i))?);
                }
                let jump = eval_at(&pe, len)? - eval_at(&pe, 0.0)?;
                if grid.boundary == Boundary::Periodic {
                    let seam = (eval_at(&ve, len)? - eval_at(&ve, 0.0)?).abs();
                    if seam > 1e-9 {
                        return Err(SolverError::InitialCondition(format!(
                            "phi_t must be s-periodic, seam mismatch {seam:.3e}"
                        )));
                    }
                }
                Ok((phi_v, vel_v, jump))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_bump_is_seam_smooth() {
        let grid = Grid::new(64, 1.0, Boundary::Periodic).unwrap();
        let ic = InitialCondition::GaussianVelocity {
            slope: 1.0,
            amplitude: 0.1,
            center: 0.5,
            width: 0.05,
        };
        let (_, phi_t, jump) = ic.build(&grid).unwrap();
        assert!((jump - 1.0).abs() < 1e-14);
        // periodized: values at the two ends agree to high accuracy
        assert!((phi_t[0] - phi_t[63]).abs() < 1e-6);
    }

    #[test]
    fn sinusoidal_slope_stays_positive() {
        let grid = Grid::new(64, 2.0, Boundary::Periodic).unwrap();
        let ic = InitialCondition::SinusoidalSlope { slope: 1.0, amplitude: 0.3, wavenumber: 2 };
        let st = super::super::SolverState::new(grid, &ic).unwrap();
        assert!(st.min_phi_s() > 0.5);
    }

    #[test]
    fn expression_ic_parses_and_validates() {
        let grid = Grid::new(16, 1.0, Boundary::FixedEnds).unwrap();
        let ic = InitialCondition::Expression {
            phi: "2*s".into(),
            phi_t: "0".into(),
        };
        let (phi, _, jump) = ic.build(&grid).unwrap();
        assert!((jump - 2.0).abs() < 1e-14);
        assert!((phi[8] - 2.0 * grid.node(8)).abs() < 1e-14);
        // t-dependence rejected
        let bad = InitialCondition::Expression { phi: "t*s".into(), phi_t: "0".into() };
        assert!(bad.build(&grid).is_err());
    }
}
