//! From a model family to its equations: the Lagrangian, the
//! Euler-Lagrange residual, and the Eulerian system.

use noetherlab::expr::{rat, ParameterDomain, Rat};
use noetherlab::model::{build_lagrangian, Coeff, GFamily, HFamily, ModelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // shallow water: G = -phi_s^-3, H = 0
    let shallow = ModelSpec::new(
        GFamily::Power { lambda: Coeff::Rat(rat(-3, 1)), c: Rat::from_integer(0.into()) },
        HFamily::Zero,
        ParameterDomain::new(),
    )?;
    println!("model: {}", shallow.describe());
    println!("L     = {}", build_lagrangian(&shallow));
    println!("EL    = {} = 0", shallow.el_residual());
    let (cont, mom) = shallow.eulerian_system();
    println!("continuity: {cont} = 0");
    println!("momentum:   {mom} = 0");
    println!();

    // a variable-bottom model: H stays an arbitrary function
    let bottom = ModelSpec::new(
        GFamily::Power { lambda: Coeff::Rat(rat(-3, 1)), c: Rat::from_integer(0.into()) },
        HFamily::opaque(),
        ParameterDomain::new(),
    )?;
    let (_, mom) = bottom.eulerian_system();
    println!("with a bottom source H(x): momentum: {mom} = 0");
    println!();

    // fully generic model: both arbitrary elements stay opaque
    let generic = ModelSpec::generic();
    println!("generic model: L = {}", build_lagrangian(&generic));
    println!("generic EL   = {} = 0", generic.el_residual());
    Ok(())
}
