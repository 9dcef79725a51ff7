//! Stage 2: top trading cycles restricted to priority groups.
//!
//! Every student owns the seat she holds after stage 1. Seats may only
//! change hands between students whom the school places in the same
//! priority group, and only the holders with the least between-group
//! claim at each school take part, so a trade never creates a
//! between-group violation.

use crate::model::{Assigned, Instance, Match};

/// Activation flags plus the evolving stage-2 assignment.
#[derive(Debug, Clone)]
pub struct TtcState {
    active_students: Vec<bool>,
    active_schools: Vec<bool>,
    /// Stage-1 cohort of each school; fixed for the whole stage, since it
    /// is ownership (not the evolving assignment) that drives pointing.
    cohort: Vec<Vec<usize>>,
    assignment: Match,
    round: usize,
}

impl TtcState {
    pub fn is_student_active(&self, student: usize) -> bool {
        self.active_students[student]
    }

    pub fn is_school_active(&self, school: usize) -> bool {
        self.active_schools[school]
    }

    pub fn assignment(&self) -> &Match {
        &self.assignment
    }

    pub fn round(&self) -> usize {
        self.round
    }

    fn refresh_school_flags(&mut self) {
        for s in 0..self.active_schools.len() {
            self.active_schools[s] = self.cohort[s].iter().any(|&i| self.active_students[i]);
        }
    }
}

/// Set up activation over a stage-1 match.
///
/// A student is active when she holds a seat and nobody at her school
/// sits in a strictly lower priority group; unmatched students own
/// nothing and never trade. A school is active while it still holds an
/// active student.
pub fn init_activation(inst: &Instance, stage1: &Match) -> TtcState {
    let n = inst.n_students();
    let m = inst.n_schools();
    let mut cohort: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..n {
        if let Some(s) = stage1.school_of(i) {
            cohort[s].push(i);
        }
    }
    let mut active_students = vec![false; n];
    for (i, flag) in active_students.iter_mut().enumerate() {
        if let Some(s) = stage1.school_of(i) {
            *flag = cohort[s]
                .iter()
                .all(|&j| inst.group_of(s, j) <= inst.group_of(s, i));
        }
    }
    let mut state = TtcState {
        active_students,
        active_schools: vec![false; m],
        cohort,
        assignment: stage1.clone(),
        round: 0,
    };
    state.refresh_school_flags();
    state
}

/// Schools an active student may point to: those still active that hold
/// an active seat owner from her own priority group. Always contains the
/// school she owns.
pub fn admissible_schools(inst: &Instance, state: &TtcState, student: usize) -> Vec<usize> {
    (0..inst.n_schools())
        .filter(|&s| {
            state.active_schools[s]
                && state.cohort[s].iter().any(|&j| {
                    state.active_students[j] && inst.group_of(s, j) == inst.group_of(s, student)
                })
        })
        .collect()
}

/// A trading cycle: each entry is a student and the school she receives.
pub type Cycle = Vec<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtcRound {
    pub cycles: Vec<Cycle>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TtcTrace {
    pub rounds: Vec<TtcRound>,
}

impl TtcTrace {
    /// Number of genuine trades: cycles moving two or more students.
    pub fn trade_count(&self) -> usize {
        self.rounds
            .iter()
            .flat_map(|r| &r.cycles)
            .filter(|c| c.len() >= 2)
            .count()
    }

    pub fn render(&self, inst: &Instance) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for (k, round) in self.rounds.iter().enumerate() {
            writeln!(out, "round {}", k + 1).unwrap();
            for cycle in &round.cycles {
                let parts: Vec<String> = cycle
                    .iter()
                    .map(|(i, s)| format!("{} -> {}", inst.student_id(*i), inst.school_id(*s)))
                    .collect();
                let tag = if cycle.len() >= 2 { "trade" } else { "keep " };
                writeln!(out, "  {} {}", tag, parts.join(", ")).unwrap();
            }
        }
        out
    }
}

/// Run restricted top trading cycles over a stage-1 match.
///
/// Callers hand in a stage-1 match that is free of between-group blocks;
/// the result then weakly improves every student while each school keeps
/// a cohort equivalent to its stage-1 cohort, group by group.
pub fn run_ttc(inst: &Instance, stage1: &Match) -> (Match, TtcTrace) {
    let mut state = init_activation(inst, stage1);
    let mut trace = TtcTrace::default();

    while (0..inst.n_students()).any(|i| state.active_students[i]) {
        state.round += 1;

        // Student pointers: most preferred admissible school.
        let mut points_to = vec![usize::MAX; inst.n_students()];
        for (i, target) in points_to.iter_mut().enumerate() {
            if !state.active_students[i] {
                continue;
            }
            let admissible = admissible_schools(inst, &state, i);
            *target = admissible
                .into_iter()
                .min_by_key(|&s| {
                    let pos = inst
                        .pref_list(i)
                        .iter()
                        .position(|&t| t == s)
                        .unwrap_or(inst.n_schools() + 1);
                    (pos, s)
                })
                .expect("active student always has her own school admissible");
        }

        // School pointers: highest-priority active seat owner.
        let mut school_points_to = vec![usize::MAX; inst.n_schools()];
        for (s, target) in school_points_to.iter_mut().enumerate() {
            if !state.active_schools[s] {
                continue;
            }
            *target = state.cohort[s]
                .iter()
                .copied()
                .filter(|&i| state.active_students[i])
                .min_by_key(|&i| inst.within_rank(s, i))
                .expect("active school holds an active student");
        }

        // Cycles of the composite student -> student map.
        let step = |i: usize| school_points_to[points_to[i]];
        let mut color = vec![0u8; inst.n_students()]; // 0 new, 1 on path, 2 done
        let mut cycles: Vec<Cycle> = Vec::new();
        for start in 0..inst.n_students() {
            if !state.active_students[start] || color[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = start;
            while color[cur] == 0 {
                color[cur] = 1;
                path.push(cur);
                cur = step(cur);
            }
            if color[cur] == 1 {
                let at = path.iter().position(|&x| x == cur).unwrap();
                cycles.push(path[at..].iter().map(|&i| (i, points_to[i])).collect());
            }
            for i in path {
                color[i] = 2;
            }
        }

        for cycle in &cycles {
            for &(i, s) in cycle {
                state.assignment.set(i, Assigned::School(s));
                state.active_students[i] = false;
            }
        }
        state.refresh_school_flags();
        trace.rounds.push(TtcRound { cycles });
    }

    (state.assignment.clone(), trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weakly_improves(inst: &Instance, after: &Match, before: &Match) -> bool {
        (0..inst.n_students())
            .all(|i| inst.weakly_prefers(i, after.assigned(i), before.assigned(i)))
    }
    use crate::da::run_da;
    use crate::fixtures;
    use crate::generator::{generate_instance, GeneratorParams};
    use crate::model::{validate_instance, RawInstance};
    use crate::priority::sets_equivalent;

    #[test]
    fn activation_on_ex1_stage1() {
        let inst = fixtures::ex1();
        let stage1 = fixtures::ex1_stage1_match(&inst);
        let state = init_activation(&inst, &stage1);
        for i in 0..inst.n_students() {
            assert!(state.is_student_active(i));
        }
        for s in 0..inst.n_schools() {
            assert!(state.is_school_active(s));
        }
    }

    #[test]
    fn only_the_lowest_group_holder_activates() {
        // School y holds x and z, with x in a strictly higher group.
        let raw = RawInstance {
            students: vec!["x".into(), "z".into()],
            schools: vec![("y".into(), 2)],
            prefs: vec![
                ("x".into(), vec!["y".into()]),
                ("z".into(), vec!["y".into()]),
            ],
            between: vec![("y".into(), vec![vec!["x".into()], vec!["z".into()]])],
            within: vec![("y".into(), vec!["x".into(), "z".into()])],
        };
        let inst = validate_instance(&raw).unwrap();
        let (stage1, _) = run_da(&inst);
        let state = init_activation(&inst, &stage1);
        assert!(!state.is_student_active(inst.student_index("x")));
        assert!(state.is_student_active(inst.student_index("z")));
    }

    #[test]
    fn unmatched_students_stay_inactive() {
        let inst = fixtures::ex2();
        let (stage1, _) = run_da(&inst);
        let state = init_activation(&inst, &stage1);
        assert!(!state.is_student_active(inst.student_index("3")));
    }

    #[test]
    fn admissible_schools_on_ex1() {
        let inst = fixtures::ex1();
        let stage1 = fixtures::ex1_stage1_match(&inst);
        let state = init_activation(&inst, &stage1);
        let ids = |v: &[&str]| -> Vec<usize> { v.iter().map(|s| inst.school_index(s)).collect() };
        assert_eq!(
            admissible_schools(&inst, &state, inst.student_index("1")),
            ids(&["a", "b"])
        );
        assert_eq!(
            admissible_schools(&inst, &state, inst.student_index("1'")),
            ids(&["b'"])
        );
        for i in 0..inst.n_students() {
            let own = stage1.school_of(i).unwrap();
            assert!(admissible_schools(&inst, &state, i).contains(&own));
        }
    }

    #[test]
    fn ex1_trades_up_to_the_final_match() {
        let inst = fixtures::ex1();
        let stage1 = fixtures::ex1_stage1_match(&inst);
        let (stage2, trace) = run_ttc(&inst, &stage1);
        assert_eq!(stage2, fixtures::ex1_final_match(&inst));
        assert_eq!(trace.trade_count(), 1);
    }

    #[test]
    fn ex2_swap_is_inadmissible() {
        let inst = fixtures::ex2();
        let (stage1, _) = run_da(&inst);
        let (stage2, trace) = run_ttc(&inst, &stage1);
        assert_eq!(stage2, stage1);
        assert_eq!(trace.trade_count(), 0);
    }

    #[test]
    fn single_group_instance_reaches_the_efficient_outcome() {
        let inst = fixtures::ex1_coarse();
        let (stage1, _) = run_da(&inst);
        let (stage2, _) = run_ttc(&inst, &stage1);
        assert_eq!(stage2, fixtures::ex1_single_group_match(&inst));
    }

    #[test]
    fn single_group_outcomes_are_pareto_efficient() {
        // With one group per school every seat can trade, so stage 2
        // must leave no student-improving rearrangement on the table.
        for seed in 0..100u64 {
            let n = 1 + (seed % 6) as usize;
            let m = 1 + (seed % 5) as usize;
            let params = GeneratorParams {
                seed: seed.wrapping_add(9_000),
                n_students: n,
                n_schools: m,
                capacity_range: (1, 2),
                list_length_range: (0, m),
                groups_per_school_range: (1, 1),
            };
            let inst = generate_instance(&params).unwrap();
            let (stage1, _) = run_da(&inst);
            let (stage2, _) = run_ttc(&inst, &stage1);
            let witness = crate::core::is_pareto_efficient_students(&inst, &stage2, 10_000_000)
                .expect("search fits the budget");
            assert_eq!(witness, None, "seed {seed}");
        }
    }

    #[test]
    fn singleton_groups_freeze_stage_one() {
        let inst = fixtures::ex1_strict();
        let (stage1, _) = run_da(&inst);
        let (stage2, trace) = run_ttc(&inst, &stage1);
        assert_eq!(stage2, stage1);
        assert_eq!(trace.trade_count(), 0);

        for seed in 0..100u64 {
            let n = 1 + (seed % 6) as usize;
            let m = 1 + (seed % 5) as usize;
            let params = GeneratorParams {
                seed,
                n_students: n,
                n_schools: m,
                capacity_range: (1, 2),
                list_length_range: (0, m),
                groups_per_school_range: (n, n), // all singleton groups
            };
            let inst = generate_instance(&params).unwrap();
            let (stage1, _) = run_da(&inst);
            let (stage2, _) = run_ttc(&inst, &stage1);
            assert_eq!(stage2, stage1, "seed {seed}");
        }
    }

    #[test]
    fn stage_two_never_hurts_and_conserves_cohorts() {
        for seed in 0..300u64 {
            let n = 1 + (seed % 6) as usize;
            let m = 1 + (seed % 5) as usize;
            let params = GeneratorParams {
                seed,
                n_students: n,
                n_schools: m,
                capacity_range: (1, 2),
                list_length_range: (0, m),
                groups_per_school_range: (1, n),
            };
            let inst = generate_instance(&params).unwrap();
            let (stage1, _) = run_da(&inst);
            let (stage2, trace) = run_ttc(&inst, &stage1);
            assert!(weakly_improves(&inst, &stage2, &stage1), "seed {seed}");
            for s in 0..inst.n_schools() {
                let before = stage1.occupants(s);
                let after = stage2.occupants(s);
                assert_eq!(before.len(), after.len(), "seed {seed}");
                assert!(sets_equivalent(&inst, s, &after, &before), "seed {seed}");
            }
            assert!(trace.rounds.len() <= inst.n_students(), "seed {seed}");
        }
    }
}
