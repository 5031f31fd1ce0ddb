//! The reduced determining system: extract the ansatz data from a
//! generator and evaluate the three classifying residuals.

use noetherlab::expr::{is_zero, Expr, Var};
use noetherlab::rng::Srng;
use noetherlab::symmetry::{classifying_residuals, entry, Generator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = Srng::new(42);
    let e = entry("powG-H0-lam4").expect("catalog entry");
    println!("entry: {} ({})", e.name, e.citation);
    for gen in &e.generators {
        let rs = classifying_residuals(gen, &e.model)?;
        let verdicts: Vec<bool> = rs
            .iter()
            .map(|r| is_zero(r, &e.model.domain, &mut rng).map(|z| z.is_zero).unwrap_or(false))
            .collect();
        println!("  {:<3} {:<28} residuals zero: {:?}", gen.name, gen.describe(), verdicts);
    }

    // a generator outside the admitted algebra leaves a nonzero residual
    let broken = Generator::new("tdt", Expr::var(Var::T), Expr::zero(), Expr::zero())?;
    let rs = classifying_residuals(&broken, &e.model)?;
    println!("\nbroken generator {}:", broken.describe());
    for (i, r) in rs.iter().enumerate() {
        println!("  R{} = {}", i + 1, r);
    }

    // eta quadratic in phi does not even fit the ansatz
    let outside = Generator::new(
        "phi2",
        Expr::zero(),
        Expr::zero(),
        Expr::powi(Expr::var(Var::Phi), 2),
    )?;
    match classifying_residuals(&outside, &e.model) {
        Err(err) => println!("\nout-of-ansatz generator rejected: {err}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
