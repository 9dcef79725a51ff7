//! Bundled sample districts and their known outcomes.
//!
//! These four instances exercise every corner of the mechanism and are
//! shipped both as text files under `fixtures/` (for the CLI) and as
//! constructors here. The `*_match` helpers build the outcomes the
//! pipeline is expected to reach on them.

use crate::format::parse_instance;
use crate::model::{Instance, Match, RawInstance};

pub const EX1_TEXT: &str = include_str!("../fixtures/ex1.txt");
pub const EX1_STRICT_TEXT: &str = include_str!("../fixtures/ex1_strict.txt");
pub const EX1_COARSE_TEXT: &str = include_str!("../fixtures/ex1_coarse.txt");
pub const EX2_TEXT: &str = include_str!("../fixtures/ex2.txt");

/// Six students, six unit-capacity schools, mixed group structure.
pub fn ex1() -> Instance {
    parse_instance(EX1_TEXT).expect("bundled fixture")
}

/// `ex1` with fully strict (singleton-group) priorities.
pub fn ex1_strict() -> Instance {
    parse_instance(EX1_STRICT_TEXT).expect("bundled fixture")
}

/// `ex1` with a single priority group per school.
pub fn ex1_coarse() -> Instance {
    parse_instance(EX1_COARSE_TEXT).expect("bundled fixture")
}

/// Three students, two seats; the tempting 1-2 swap is inadmissible.
pub fn ex2() -> Instance {
    parse_instance(EX2_TEXT).expect("bundled fixture")
}

/// Raw (editable) form of `ex1`, for tests that break invariants.
pub fn ex1_raw() -> RawInstance {
    raw_of(EX1_TEXT)
}

/// Raw form of `ex2`.
pub fn ex2_raw() -> RawInstance {
    raw_of(EX2_TEXT)
}

fn raw_of(text: &str) -> RawInstance {
    let inst = parse_instance(text).expect("bundled fixture");
    let mut raw = RawInstance {
        students: inst.student_ids().iter().map(|id| id.0.clone()).collect(),
        ..RawInstance::default()
    };
    for school in inst.schools() {
        raw.schools.push((school.id.0.clone(), school.capacity));
    }
    for i in 0..inst.n_students() {
        raw.prefs.push((
            inst.student_id(i).0.clone(),
            inst.pref_list(i)
                .iter()
                .map(|&s| inst.school_id(s).0.clone())
                .collect(),
        ));
    }
    for s in 0..inst.n_schools() {
        raw.between.push((
            inst.school_id(s).0.clone(),
            inst.groups(s)
                .iter()
                .map(|g| g.iter().map(|&i| inst.student_id(i).0.clone()).collect())
                .collect(),
        ));
        raw.within.push((
            inst.school_id(s).0.clone(),
            inst.within_order(s)
                .iter()
                .map(|&i| inst.student_id(i).0.clone())
                .collect(),
        ));
    }
    raw
}

/// Stage-1 outcome on `ex1` (also on its strict and coarse variants,
/// which share preferences and within orders).
pub fn ex1_stage1_match(inst: &Instance) -> Match {
    Match::from_names(
        inst,
        &[
            ("1", "b"),
            ("2", "a"),
            ("3", "c"),
            ("1'", "b'"),
            ("2'", "a'"),
            ("3'", "c'"),
        ],
    )
}

/// Two-stage outcome on `ex1`: the unprimed pair trades up, the primed
/// pair stays put because a' separates its groups.
pub fn ex1_final_match(inst: &Instance) -> Match {
    Match::from_names(
        inst,
        &[
            ("1", "a"),
            ("2", "b"),
            ("3", "c"),
            ("1'", "b'"),
            ("2'", "a'"),
            ("3'", "c'"),
        ],
    )
}

/// Two-stage outcome on `ex1_coarse`: with one group per school both
/// pairs trade, at the cost of a between-group claim under `ex1` itself.
pub fn ex1_single_group_match(inst: &Instance) -> Match {
    Match::from_names(
        inst,
        &[
            ("1", "a"),
            ("2", "b"),
            ("3", "c"),
            ("1'", "a'"),
            ("2'", "b'"),
            ("3'", "c'"),
        ],
    )
}

/// Stage-1 outcome on `ex2`; stage 2 leaves it unchanged.
pub fn ex2_stage1_match(inst: &Instance) -> Match {
    Match::from_names(inst, &[("1", "b"), ("2", "a"), ("3", "-")])
}
