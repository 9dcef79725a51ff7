//! Side-by-side statistics for the stage-1 and two-stage matches on one
//! district: rank distributions, unmatched counts, and core verdicts,
//! as text and as JSON.
//!
//! ```bash
//! cargo run --example compare
//! ```

use dattc::compare_report;
use dattc::fixtures;

fn main() {
    let inst = fixtures::ex1();
    let report = compare_report(&inst, 1_000_000);
    print!("{}", report.render_text());
    println!();
    println!("{}", report.to_json());
}
