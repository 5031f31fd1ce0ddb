//! The equivalence group in action: finite transforms move a (model,
//! generator) pair to a new pair that is still admitted.

use noetherlab::expr::rat;
use noetherlab::rng::Srng;
use noetherlab::symmetry::{
    apply_equivalence, check_admitted, entry, equivalence_generators,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = Srng::new(42);
    let transforms = equivalence_generators();
    println!("available transforms:");
    for t in &transforms {
        println!("  {:<7} {}", t.name, t.infinitesimal);
    }
    println!();

    let e = entry("powG-H0-lam4").unwrap();
    let x7 = e.generator("X7").unwrap();
    println!("start: {} with {}", e.model.describe(), x7.describe());
    for (name, eps) in [("E1", rat(1, 4)), ("E2", rat(-1, 2)), ("E5xE4", rat(9, 8))] {
        let tr = transforms.iter().find(|t| t.name == name).unwrap();
        let (m2, x2) = apply_equivalence(tr, &eps, &e.model, x7)?;
        let verdict = check_admitted(&x2, &m2, &mut rng)?;
        println!(
            "under {name} (parameter {eps}): model {} | pushforward {} | admitted: {}",
            m2.describe(),
            x2.describe(),
            verdict.admitted
        );
    }
    println!();

    // the involution flips phi and H
    let lin = entry("arbG-linH-neg").unwrap();
    let x3 = lin.generator("X3").unwrap();
    let r = transforms.iter().find(|t| t.name == "R").unwrap();
    let (m2, x2) = apply_equivalence(r, &rat(1, 1), &lin.model, x3)?;
    let verdict = check_admitted(&x2, &m2, &mut rng)?;
    println!(
        "involution on the oscillator model: pushforward {} admitted: {}",
        x2.describe(),
        verdict.admitted
    );

    // a transform outside its validity domain reports the family break
    let e4 = transforms.iter().find(|t| t.name == "E4").unwrap();
    match apply_equivalence(e4, &rat(3, 2), &e.model, x7) {
        Err(err) => println!("\nE4 on the power family: {err}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
