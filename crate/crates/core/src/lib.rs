//! School choice matching with two-layer priorities.
//!
//! Each school ranks students twice. The between-group order partitions
//! students into priority groups and is treated as a hard entitlement:
//! no outcome may place a student somewhere a higher-group student wants
//! and deserves. The within-group order breaks ties inside each group
//! and is treated as an opportunity: it decides who gets a contested
//! seat first, but the seat may then be traded to a group mate.
//!
//! The matching pipeline has two stages. [`da::run_da`] runs
//! student-proposing deferred acceptance on the strict within-group
//! order, producing a fair baseline. [`ttc::run_ttc`] then lets seat
//! holders trade along top trading cycles, restricted so seats only move
//! inside a priority group. The result weakly improves every student and
//! admits neither a hard-priority claim nor a group-respecting trade
//! objection; [`core`] holds the checkers and searchers that certify
//! this, and [`report`] compares the two stages.
//!
//! Start with the runnable examples (`cargo run --example pipeline`) or
//! the bundled [`fixtures`].

pub mod core;
pub mod da;
pub mod fixtures;
pub mod format;
pub mod generator;
pub mod model;
pub mod priority;
pub mod report;
pub mod ttc;

pub use crate::core::{
    is_in_efficient_core, is_in_unified_core, BlockCertificate, BlockKind, CoreVerdict,
};
pub use crate::da::run_da;
pub use crate::format::{parse_instance, parse_match, serialize_instance, serialize_match};
pub use crate::generator::{generate_instance, GeneratorParams};
pub use crate::model::{
    is_individually_rational, is_valid_match, validate_instance, Assigned, Instance, Match,
    RawInstance,
};
pub use crate::report::{compare_report, run_pipeline, ComparisonReport, PipelineRun};
pub use crate::ttc::run_ttc;
