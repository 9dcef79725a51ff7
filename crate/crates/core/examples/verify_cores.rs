//! Check three candidate matches for the same district against the
//! unified core, the fairness standard, and the efficient core, showing
//! how the three notions pull apart.
//!
//! ```bash
//! cargo run --example verify_cores
//! ```

use dattc::core::{check_fair, is_pareto_efficient_students, FairVerdict};
use dattc::fixtures;
use dattc::format::serialize_certificate;
use dattc::model::{Instance, Match};
use dattc::{is_in_efficient_core, is_in_unified_core, CoreVerdict};

const BUDGET: u64 = 1_000_000;

fn describe(inst: &Instance, name: &str, m: &Match) {
    println!("--- {name} ---");
    match is_in_unified_core(inst, m, BUDGET) {
        CoreVerdict::In => println!("unified core: in"),
        CoreVerdict::Out(cert) => {
            println!("unified core: out, witnessed by");
            for line in serialize_certificate(inst, &cert).lines() {
                println!("    {line}");
            }
        }
        CoreVerdict::Unknown { budget } => println!("unified core: unknown (budget {budget})"),
    }
    match check_fair(inst, m) {
        FairVerdict::Fair => println!("fairness: clean"),
        FairVerdict::NotIndividuallyRational { student } => {
            println!(
                "fairness: student {} held off her list",
                inst.student_id(student)
            )
        }
        FairVerdict::Violation { student, school } => println!(
            "fairness: student {} has a claim at {}",
            inst.student_id(student),
            inst.school_id(school)
        ),
    }
    match is_in_efficient_core(inst, m, BUDGET) {
        CoreVerdict::In => println!("efficient core: in"),
        CoreVerdict::Out(_) => println!("efficient core: out"),
        CoreVerdict::Unknown { budget } => println!("efficient core: unknown (budget {budget})"),
    }
    match is_pareto_efficient_students(inst, m, BUDGET) {
        Ok(None) => println!("pareto: efficient for students"),
        Ok(Some(_)) => println!("pareto: dominated"),
        Err(e) => println!("pareto: {e}"),
    }
    println!();
}

fn main() {
    let inst = fixtures::ex1();
    describe(
        &inst,
        "stage-1 match (fair baseline)",
        &fixtures::ex1_stage1_match(&inst),
    );
    describe(&inst, "two-stage match", &fixtures::ex1_final_match(&inst));
    describe(
        &inst,
        "fully traded match (ignores groups)",
        &fixtures::ex1_single_group_match(&inst),
    );
}
