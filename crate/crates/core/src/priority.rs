//! Priority comparisons and their extension from students to sets.
//!
//! Schools order students twice: a weak between-group order (the group
//! partition) that is never traded away, and a strict within-group order
//! refining it. Sets of students are compared under the between-group
//! order responsively, by pairing the members of one set against the
//! other best-to-best.

use crate::model::Instance;

/// Outcome of comparing two students in a school's priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorityCmp {
    Higher,
    Lower,
    Same,
}

/// Index of the group holding `student` at `school`, 0 = highest.
pub fn group_index(inst: &Instance, school: usize, student: usize) -> usize {
    inst.group_of(school, student)
}

/// Between-group comparison of `i` against `j` at `school`.
pub fn between_compare(inst: &Instance, school: usize, i: usize, j: usize) -> PriorityCmp {
    let (gi, gj) = (inst.group_of(school, i), inst.group_of(school, j));
    match gi.cmp(&gj) {
        std::cmp::Ordering::Less => PriorityCmp::Higher,
        std::cmp::Ordering::Greater => PriorityCmp::Lower,
        std::cmp::Ordering::Equal => PriorityCmp::Same,
    }
}

/// Within-group comparison of `i` against `j` at `school`. Strict: `Same`
/// only when `i == j`.
pub fn within_compare(inst: &Instance, school: usize, i: usize, j: usize) -> PriorityCmp {
    let (ri, rj) = (inst.within_rank(school, i), inst.within_rank(school, j));
    match ri.cmp(&rj) {
        std::cmp::Ordering::Less => PriorityCmp::Higher,
        std::cmp::Ordering::Greater => PriorityCmp::Lower,
        std::cmp::Ordering::Equal => PriorityCmp::Same,
    }
}

fn group_counts(inst: &Instance, school: usize, set: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; inst.groups(school).len()];
    for &i in set {
        counts[inst.group_of(school, i)] += 1;
    }
    counts
}

/// True when the two sets are equivalent under `school`'s between-group
/// order, which holds exactly when they draw the same number of students
/// from every priority group.
pub fn sets_equivalent(inst: &Instance, school: usize, a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    group_counts(inst, school, a) == group_counts(inst, school, b)
}

/// Responsive weak dominance of `a` over `b` at `school`.
///
/// Equal-size sets are compared by pairing best against best: sort both
/// by group index and require the pairing to hold pointwise. A larger set
/// dominates when its best `|b|` members do; a smaller set never does.
pub fn set_weak_dominance(inst: &Instance, school: usize, a: &[usize], b: &[usize]) -> bool {
    if a.len() < b.len() {
        return false;
    }
    let mut ga: Vec<usize> = a.iter().map(|&i| inst.group_of(school, i)).collect();
    let mut gb: Vec<usize> = b.iter().map(|&i| inst.group_of(school, i)).collect();
    ga.sort_unstable();
    gb.sort_unstable();
    gb.iter().zip(&ga).all(|(grp_b, grp_a)| grp_a <= grp_b)
}

/// Students in `student`'s own group at `school` with weakly higher
/// within-group priority. Always contains the student herself.
pub fn upper_contour_within(inst: &Instance, school: usize, student: usize) -> Vec<usize> {
    let g = inst.group_of(school, student);
    let r = inst.within_rank(school, student);
    (0..inst.n_students())
        .filter(|&j| inst.group_of(school, j) == g && inst.within_rank(school, j) <= r)
        .collect()
}

/// Students anywhere with strictly higher within-group priority at
/// `school`. Empty for the school's top-ranked student.
pub fn upper_contour_efficient(inst: &Instance, school: usize, student: usize) -> Vec<usize> {
    let r = inst.within_rank(school, student);
    (0..inst.n_students())
        .filter(|&j| inst.within_rank(school, j) < r)
        .collect()
}
