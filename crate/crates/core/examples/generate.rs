//! Generate a random district from a seed, print it in the instance
//! file format, and redraw its tie-breaking lotteries.
//!
//! ```bash
//! cargo run --example generate
//! ```

use dattc::generator::{redraw_within_lotteries, GeneratorParams};
use dattc::{generate_instance, run_pipeline, serialize_instance, serialize_match};

fn main() {
    let params = GeneratorParams {
        seed: 42,
        n_students: 6,
        n_schools: 3,
        capacity_range: (1, 2),
        list_length_range: (1, 3),
        groups_per_school_range: (1, 3),
    };
    let inst = generate_instance(&params).expect("feasible parameters");
    println!("# seed {} instance", params.seed);
    print!("{}", serialize_instance(&inst));
    println!();

    let run = run_pipeline(&inst);
    println!("# two-stage outcome");
    print!("{}", serialize_match(&inst, &run.stage2));
    println!();

    // Same district, fresh lottery: group structure and preferences stay
    // put, only the within-group tie-breaks move.
    let redrawn = redraw_within_lotteries(&inst, 7);
    let rerun = run_pipeline(&redrawn);
    println!("# outcome under lottery redraw 7");
    print!("{}", serialize_match(&redrawn, &rerun.stage2));
}
