//! Sweep the classification catalog: every generator of every entry must
//! annihilate its equation on shell.  Equivalent to
//! `noetherlab verify-symmetries --all`.

use noetherlab::report::{symmetry_report_text, verify_symmetries};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = verify_symmetries(None, 42)?;
    print!("{}", symmetry_report_text(&report));
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}
