//! The two-layer mechanism collapses to familiar single-layer ones at
//! the extremes: all-singleton groups freeze the stage-1 match, while a
//! single group per school frees every seat to trade.
//!
//! ```bash
//! cargo run --example degenerations
//! ```

use dattc::core::is_pareto_efficient_students;
use dattc::fixtures;
use dattc::run_pipeline;
use dattc::serialize_match;

fn main() {
    let strict = fixtures::ex1_strict();
    let run = run_pipeline(&strict);
    println!("singleton groups: priorities fully rigid");
    assert_eq!(run.stage1, run.stage2);
    println!("  stage 2 returned the stage-1 match unchanged:");
    for line in serialize_match(&strict, &run.stage2).lines() {
        println!("    {line}");
    }

    let coarse = fixtures::ex1_coarse();
    let run = run_pipeline(&coarse);
    println!("one group per school: every seat tradable");
    let efficient = is_pareto_efficient_students(&coarse, &run.stage2, 1_000_000)
        .expect("search fits the budget")
        .is_none();
    println!("  stage 2 pareto-efficient for students: {efficient}");
    for line in serialize_match(&coarse, &run.stage2).lines() {
        println!("    {line}");
    }
}
