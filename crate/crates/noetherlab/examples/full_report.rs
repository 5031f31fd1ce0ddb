//! Builds the aggregate verification report (same as `noetherlab report`)
//! and prints it to stdout.

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let md = noetherlab::report::full_report(42)?;
    print!("{md}");
    Ok(())
}
