//! Run the two-stage pipeline on a bundled district and show how the
//! trading stage improves on the deferred acceptance baseline.
//!
//! ```bash
//! cargo run --example pipeline
//! ```

use dattc::fixtures;
use dattc::model::student_rank;
use dattc::run_pipeline;
use dattc::serialize_match;

fn main() {
    let inst = fixtures::ex1();
    let run = run_pipeline(&inst);

    println!("stage 1 (deferred acceptance):");
    print!("{}", serialize_match(&inst, &run.stage1));
    println!();
    println!("stage 2 (after restricted trading):");
    print!("{}", serialize_match(&inst, &run.stage2));
    println!();

    for i in 0..inst.n_students() {
        let before = student_rank(&inst, i, &run.stage1);
        let after = student_rank(&inst, i, &run.stage2);
        if let (Some(b), Some(a)) = (before, after) {
            if a < b {
                println!(
                    "student {} moved from choice {b} to choice {a}",
                    inst.student_id(i)
                );
            }
        }
    }
}
