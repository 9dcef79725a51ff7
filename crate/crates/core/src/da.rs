//! Stage 1: student-proposing deferred acceptance.
//!
//! Students propose down their lists in simultaneous rounds; each school
//! keeps the top applicants under its strict within-group order, up to
//! capacity, and rejects the rest. Rejections are permanent, so the loop
//! ends once nobody is over-subscribed.

use crate::model::{Assigned, Instance, Match};

/// One proposal round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaRound {
    /// New proposals made this round, `(student, target)`. A target of
    /// `Unmatched` records a student settling for herself after
    /// exhausting her list.
    pub proposals: Vec<(usize, Assigned)>,
    /// `(school, student)` rejections issued this round.
    pub rejections: Vec<(usize, usize)>,
}

/// Full record of a deferred acceptance run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DaTrace {
    pub rounds: Vec<DaRound>,
}

impl DaTrace {
    /// Human-readable round-by-round report.
    pub fn render(&self, inst: &Instance) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for (k, round) in self.rounds.iter().enumerate() {
            writeln!(out, "round {}", k + 1).unwrap();
            for (i, target) in &round.proposals {
                match target {
                    Assigned::School(s) => writeln!(
                        out,
                        "  propose {} -> {}",
                        inst.student_id(*i),
                        inst.school_id(*s)
                    )
                    .unwrap(),
                    Assigned::Unmatched => {
                        writeln!(out, "  settle  {} -> -", inst.student_id(*i)).unwrap()
                    }
                }
            }
            for (s, i) in &round.rejections {
                writeln!(
                    out,
                    "  reject  {} -x {}",
                    inst.school_id(*s),
                    inst.student_id(*i)
                )
                .unwrap();
            }
        }
        out
    }
}

/// Run deferred acceptance and return the stage-1 match with its trace.
///
/// The outcome is individually rational by construction: a student whose
/// list runs out keeps her own seat and is never rejected again.
pub fn run_da(inst: &Instance) -> (Match, DaTrace) {
    let n = inst.n_students();
    let m = inst.n_schools();

    // cursor[i]: next list position student i will propose to.
    let mut cursor = vec![0usize; n];
    // held[s]: students tentatively accepted by school s.
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); m];
    // Where each student currently stands.
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Free,
        Held(usize),
        OnOwn,
    }
    let mut state = vec![State::Free; n];
    let mut trace = DaTrace::default();

    loop {
        let mut proposals: Vec<(usize, Assigned)> = Vec::new();
        let mut new_by_school: Vec<Vec<usize>> = vec![Vec::new(); m];
        for i in 0..n {
            if state[i] != State::Free {
                continue;
            }
            match inst.pref_list(i).get(cursor[i]) {
                Some(&s) => {
                    proposals.push((i, Assigned::School(s)));
                    new_by_school[s].push(i);
                }
                None => {
                    proposals.push((i, Assigned::Unmatched));
                    state[i] = State::OnOwn;
                }
            }
        }
        if proposals.is_empty() {
            break;
        }

        let mut rejections: Vec<(usize, usize)> = Vec::new();
        for s in 0..m {
            if new_by_school[s].is_empty() {
                continue;
            }
            let mut pool = std::mem::take(&mut held[s]);
            pool.extend(&new_by_school[s]);
            pool.sort_unstable_by_key(|&i| inst.within_rank(s, i));
            let keep = inst.capacity(s).min(pool.len());
            for &i in &pool[keep..] {
                rejections.push((s, i));
                state[i] = State::Free;
                cursor[i] += 1;
            }
            pool.truncate(keep);
            for &i in &pool {
                state[i] = State::Held(s);
            }
            held[s] = pool;
        }
        trace.rounds.push(DaRound {
            proposals,
            rejections,
        });
    }

    let mut result = Match::empty(n);
    for (i, st) in state.iter().enumerate() {
        match st {
            State::Held(s) => result.set(i, Assigned::School(*s)),
            State::OnOwn => result.set(i, Assigned::Unmatched),
            State::Free => unreachable!("loop exits only when nobody is free"),
        }
    }
    (result, trace)
}
