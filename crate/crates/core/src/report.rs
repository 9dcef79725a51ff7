//! The two-stage pipeline and mechanism comparison reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::core::{check_fair, is_in_efficient_core, is_in_unified_core, CoreVerdict, FairVerdict};
use crate::da::{run_da, DaTrace};
use crate::model::{student_rank, Instance, Match};
use crate::ttc::{run_ttc, TtcTrace};

/// Output of a full run: the stage-1 match, the stage-2 match, and both
/// traces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub stage1: Match,
    pub stage2: Match,
    pub da_trace: DaTrace,
    pub ttc_trace: TtcTrace,
}

/// Run deferred acceptance, then restricted top trading cycles over its
/// output.
pub fn run_pipeline(inst: &Instance) -> PipelineRun {
    let (stage1, da_trace) = run_da(inst);
    let (stage2, ttc_trace) = run_ttc(inst, &stage1);
    PipelineRun {
        stage1,
        stage2,
        da_trace,
        ttc_trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictTag {
    In,
    Out,
    Unknown,
}

impl From<&CoreVerdict> for VerdictTag {
    fn from(v: &CoreVerdict) -> Self {
        match v {
            CoreVerdict::In => VerdictTag::In,
            CoreVerdict::Out(_) => VerdictTag::Out,
            CoreVerdict::Unknown { .. } => VerdictTag::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FairTag {
    Fair,
    NotIndividuallyRational { student: String },
    Violation { student: String, school: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoreVerdicts {
    pub unified: VerdictTag,
    pub fair: FairTag,
    pub efficient: VerdictTag,
}

/// Statistics for one mechanism's match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MechanismReport {
    /// How many students landed their 1st, 2nd, ... listed choice.
    pub rank_histogram: BTreeMap<usize, usize>,
    pub unmatched: usize,
    /// Students whose rank strictly improved between stage 1 and this
    /// mechanism's output; zero for the stage-1 mechanism itself.
    pub improved_by_stage2: usize,
    pub core: CoreVerdicts,
}

/// Side-by-side comparison of the stage-1 match against the full
/// two-stage output on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonReport {
    pub da: MechanismReport,
    pub da_ttc: MechanismReport,
}

fn fair_tag(inst: &Instance, verdict: FairVerdict) -> FairTag {
    match verdict {
        FairVerdict::Fair => FairTag::Fair,
        FairVerdict::NotIndividuallyRational { student } => FairTag::NotIndividuallyRational {
            student: inst.student_id(student).to_string(),
        },
        FairVerdict::Violation { student, school } => FairTag::Violation {
            student: inst.student_id(student).to_string(),
            school: inst.school_id(school).to_string(),
        },
    }
}

fn mechanism_report(
    inst: &Instance,
    m: &Match,
    improved_by_stage2: usize,
    budget: u64,
) -> MechanismReport {
    let mut rank_histogram = BTreeMap::new();
    let mut unmatched = 0usize;
    for i in 0..inst.n_students() {
        match student_rank(inst, i, m) {
            Some(rank) => *rank_histogram.entry(rank).or_insert(0) += 1,
            None => unmatched += 1,
        }
    }
    MechanismReport {
        rank_histogram,
        unmatched,
        improved_by_stage2,
        core: CoreVerdicts {
            unified: (&is_in_unified_core(inst, m, budget)).into(),
            fair: fair_tag(inst, check_fair(inst, m)),
            efficient: (&is_in_efficient_core(inst, m, budget)).into(),
        },
    }
}

/// Run the pipeline and report rank distributions, unmatched counts,
/// stage-2 improvements, and budgeted core verdicts for both stages.
/// Budget exhaustion surfaces as an `unknown` verdict, never a failure.
pub fn compare_report(inst: &Instance, budget: u64) -> ComparisonReport {
    let run = run_pipeline(inst);
    let improved = (0..inst.n_students())
        .filter(|&i| inst.strictly_prefers(i, run.stage2.assigned(i), run.stage1.assigned(i)))
        .count();
    ComparisonReport {
        da: mechanism_report(inst, &run.stage1, 0, budget),
        da_ttc: mechanism_report(inst, &run.stage2, improved, budget),
    }
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn render_text(&self) -> String {
        fn verdict(tag: VerdictTag) -> &'static str {
            match tag {
                VerdictTag::In => "in",
                VerdictTag::Out => "out",
                VerdictTag::Unknown => "unknown",
            }
        }
        fn fair(tag: &FairTag) -> String {
            match tag {
                FairTag::Fair => "fair".into(),
                FairTag::NotIndividuallyRational { student } => {
                    format!("not individually rational ({student})")
                }
                FairTag::Violation { student, school } => {
                    format!("violated by ({student}, {school})")
                }
            }
        }
        let mut out = String::new();
        for (name, report) in [("da", &self.da), ("da-ttc", &self.da_ttc)] {
            writeln!(out, "{name}:").unwrap();
            let ranks: Vec<String> = report
                .rank_histogram
                .iter()
                .map(|(rank, count)| format!("{rank}:{count}"))
                .collect();
            writeln!(
                out,
                "  ranks        {}",
                if ranks.is_empty() {
                    "-".into()
                } else {
                    ranks.join(" ")
                }
            )
            .unwrap();
            writeln!(out, "  unmatched    {}", report.unmatched).unwrap();
            writeln!(out, "  improved     {}", report.improved_by_stage2).unwrap();
            writeln!(out, "  unified      {}", verdict(report.core.unified)).unwrap();
            writeln!(out, "  fairness     {}", fair(&report.core.fair)).unwrap();
            writeln!(out, "  efficient    {}", verdict(report.core.efficient)).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generator::{generate_instance, GeneratorParams};

    #[test]
    fn pipeline_on_canonical_instances() {
        let ex1 = fixtures::ex1();
        let run = run_pipeline(&ex1);
        assert_eq!(run.stage1, fixtures::ex1_stage1_match(&ex1));
        assert_eq!(run.stage2, fixtures::ex1_final_match(&ex1));

        let ex2 = fixtures::ex2();
        let run = run_pipeline(&ex2);
        assert_eq!(run.stage1, fixtures::ex2_stage1_match(&ex2));
        assert_eq!(run.stage2, run.stage1);

        let strict = fixtures::ex1_strict();
        let run = run_pipeline(&strict);
        assert_eq!(run.stage1, fixtures::ex1_stage1_match(&strict));
        assert_eq!(run.stage2, run.stage1);
    }

    #[test]
    fn ex1_report_counts_two_improvements() {
        let inst = fixtures::ex1();
        let report = compare_report(&inst, 1_000_000);
        assert_eq!(report.da.improved_by_stage2, 0);
        assert_eq!(report.da_ttc.improved_by_stage2, 2);
        assert_eq!(report.da_ttc.core.unified, VerdictTag::In);
        assert_eq!(report.da.core.unified, VerdictTag::Out);
        assert!(matches!(report.da.core.fair, FairTag::Fair));
        assert!(matches!(report.da_ttc.core.fair, FairTag::Violation { .. }));
    }

    #[test]
    fn ex2_report_shows_no_gain() {
        let report = compare_report(&fixtures::ex2(), 1_000_000);
        assert_eq!(report.da_ttc.improved_by_stage2, 0);
        assert_eq!(report.da.unmatched, 1);
        assert_eq!(report.da_ttc.unmatched, 1);
    }

    #[test]
    fn single_group_instance_lands_in_the_efficient_core() {
        let report = compare_report(&fixtures::ex1_coarse(), 1_000_000);
        assert_eq!(report.da_ttc.core.efficient, VerdictTag::In);
        assert_eq!(report.da_ttc.core.unified, VerdictTag::In);
    }

    #[test]
    fn stage2_ranks_first_order_dominate_stage1() {
        for seed in 0..120u64 {
            let n = 1 + (seed % 6) as usize;
            let m = 1 + (seed % 5) as usize;
            let inst = generate_instance(&GeneratorParams {
                seed,
                n_students: n,
                n_schools: m,
                capacity_range: (1, 2),
                list_length_range: (0, m),
                groups_per_school_range: (1, n),
            })
            .unwrap();
            let report = compare_report(&inst, 10_000_000);
            assert_eq!(report.da.unmatched, report.da_ttc.unmatched, "seed {seed}");
            // Cumulative counts at every rank prefix only move up.
            let max_rank = report.da.rank_histogram.keys().max().copied().unwrap_or(0);
            let mut cum_da = 0usize;
            let mut cum_ttc = 0usize;
            for rank in 1..=max_rank {
                cum_da += report.da.rank_histogram.get(&rank).copied().unwrap_or(0);
                cum_ttc += report
                    .da_ttc
                    .rank_histogram
                    .get(&rank)
                    .copied()
                    .unwrap_or(0);
                assert!(cum_ttc >= cum_da, "seed {seed}, rank {rank}");
            }
        }
    }

    #[test]
    fn json_form_parses_back() {
        let report = compare_report(&fixtures::ex1(), 1_000_000);
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(value["da_ttc"]["improved_by_stage2"], 2);
        assert!(!report.render_text().is_empty());
    }
}
