//! Grid-refinement study: monitor drifts and the Eulerian residuals both
//! fall off at second order.

use noetherlab::config::{run_simulation, SimConfig};
use noetherlab::expr::rat;
use noetherlab::model::{Coeff, GFamily, HFamily, ModelSpec};
use noetherlab::solver::{
    cfl_dt, eulerian_residuals, step, Boundary, Grid, InitialCondition, NumericModel, SolverState,
};
use std::collections::BTreeMap;

fn quartic(n: usize) -> SimConfig {
    SimConfig::from_json(&format!(
        r#"{{
        "model": {{"entry": "powG-H0-lam4"}},
        "grid": {{"n": {n}, "length": 6.283185307179586, "boundary": "periodic"}},
        "ic": {{"kind": "sinusoidal_slope", "slope": 1.0, "amplitude": 0.1, "wavenumber": 2}},
        "monitors": [{{"name": "dilation", "generator": "X6"}},
                     {{"name": "projective", "generator": "X7"}}],
        "t_end": 1.0,
        "seed": 42
    }}"#
    ))
    .unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("monitor drifts under grid halving (lambda = -4 projective pair):");
    println!("{:>6} {:>14} {:>14}", "n", "dilation", "projective");
    let mut prev: Option<(f64, f64)> = None;
    for n in [100, 200, 400] {
        let out = run_simulation(&quartic(n))?;
        let d = out.series.drift_of("dilation").unwrap();
        let p = out.series.drift_of("projective").unwrap();
        let ratios = prev
            .map(|(pd, pp)| format!("   (ratios {:.2}, {:.2})", pd / d, pp / p))
            .unwrap_or_default();
        println!("{n:>6} {d:>14.3e} {p:>14.3e}{ratios}");
        prev = Some((d, p));
    }

    println!("\nEulerian system residuals under refinement (shallow water):");
    let m = ModelSpec::new(
        GFamily::Power { lambda: Coeff::Rat(rat(-3, 1)), c: noetherlab::expr::Rat::from_integer(0.into()) },
        HFamily::Zero,
        Default::default(),
    )?;
    let nm = NumericModel::compile(&m, &BTreeMap::new())?;
    println!("{:>6} {:>14} {:>14}", "n", "continuity", "momentum");
    for n in [100, 200, 400] {
        let grid = Grid::new(n, std::f64::consts::TAU, Boundary::Periodic)?;
        let ic = InitialCondition::GaussianVelocity {
            slope: 1.0,
            amplitude: 0.08,
            center: 0.5,
            width: 0.25,
        };
        let mut st = SolverState::new(grid, &ic)?;
        let dt = 0.35 * cfl_dt(&st, &nm)?;
        while st.time < 0.25 {
            st = step(&st, &nm, dt)?;
        }
        let prev = st.clone();
        let mid = step(&prev, &nm, dt)?;
        let next = step(&mid, &nm, dt)?;
        let (r1, r2) = eulerian_residuals(&prev, &mid, &next, &nm)?;
        println!("{n:>6} {r1:>14.3e} {r2:>14.3e}");
    }
    Ok(())
}
