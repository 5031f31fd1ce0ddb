//! Noether currents: variational defects, divergence remainders, and the
//! conserved pairs they produce — including a generator that is admitted
//! but not variational.

use noetherlab::expr::{Expr, Var};
use noetherlab::model::{build_lagrangian, ModelSpec};
use noetherlab::noether::{noether_current, split_divergence, variational_defect, NoetherError};
use noetherlab::rng::Srng;
use noetherlab::symmetry::{entry, Generator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = Srng::new(42);

    // time translation on the generic model: strictly variational
    let generic = ModelSpec::generic();
    let l = generic.concretize(&build_lagrangian(&generic));
    let x1 = Generator::new("X1", Expr::one(), Expr::zero(), Expr::zero())?;
    println!("defect of d_t on L: {}", variational_defect(&x1, &l)?);
    let c = noether_current(&x1, &generic, &mut rng)?;
    println!("energy current: T_t = {}", c.density);
    println!("                T_s = {}", c.flux);
    println!();

    // t d_phi on H = 0: a divergence symmetry (V_t = phi)
    let h0 = entry("arbG-H0").unwrap();
    let x4 = h0.generator("X4").unwrap();
    let l0 = h0.model.concretize(&build_lagrangian(&h0.model));
    let defect = variational_defect(x4, &l0)?;
    println!("defect of t d_phi: {defect}");
    let v = split_divergence(&defect)?;
    println!("splits as V_t = {}, V_s = {}", v.v_t, v.v_s);
    let c = noether_current(x4, &h0.model, &mut rng)?;
    println!("center-of-mass current: T_t = {}", c.density);
    println!();

    // the uniform scaling on H = beta/phi is admitted but NOT variational
    let inv = entry("arbG-invH").unwrap();
    let x3 = inv.generator("X3").unwrap();
    match noether_current(x3, &inv.model, &mut rng) {
        Err(NoetherError::NotVariational { remainder, .. }) => {
            println!("scaling on H = beta/phi: not variational;");
            println!("  obstruction (contains phi_t^2): {remainder}");
        }
        other => panic!("expected a rejection, got {other:?}"),
    }
    println!();

    // the lambda = -4 projective generator carries a phi^2/2 remainder
    let proj = entry("powG-H0-lam4").unwrap();
    let x7 = proj.generator("X7").unwrap();
    let l4 = proj.model.concretize(&build_lagrangian(&proj.model));
    let defect = variational_defect(x7, &l4)?;
    let v = split_divergence(&defect)?;
    println!("projective defect {defect} splits with V_t = {}", v.v_t);
    let c = noether_current(x7, &proj.model, &mut rng)?;
    println!("projective current: T_t = {}", c.density);

    // currents of s-dependent symmetries stay Lagrangian: see
    // eulerian_table.rs for the frame conversion.
    let _ = Var::S;
    Ok(())
}
