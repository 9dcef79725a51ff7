//! Print the round-by-round record of both stages: who proposed where,
//! who got rejected, and which trading cycles fired.
//!
//! ```bash
//! cargo run --example traces
//! ```

use dattc::fixtures;
use dattc::run_pipeline;

fn main() {
    for (name, inst) in [("ex1", fixtures::ex1()), ("ex2", fixtures::ex2())] {
        println!("=== {name} ===");
        let run = run_pipeline(&inst);
        println!("deferred acceptance:");
        print!("{}", run.da_trace.render(&inst));
        println!("restricted trading:");
        print!("{}", run.ttc_trace.render(&inst));
        println!("trades executed: {}", run.ttc_trace.trade_count());
        println!();
    }
}
