//! Run one verification suite (default `pointwise`) and print its summary table.
//!
//! `cargo run --release --example verify_suite -- product 7`

use octwave::verify::{run_suite, summary_table};

fn main() -> octwave::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "pointwise".to_string());
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let report = run_suite(&name, seed)?;
    print!("{}", summary_table(std::slice::from_ref(&report)));
    for (k, v) in &report.fitted_constants {
        println!("{k} = {v:.6e}");
    }
    for case in report.failures() {
        if !case.note.is_empty() {
            eprintln!("{}: {}", case.name, case.note);
        }
    }
    Ok(())
}
