//! Blocking predicates, block search, and core membership verdicts.
//!
//! Two kinds of objection exist against a match. A between-group block
//! asserts a hard priority: some coalition member outranks a seat holder
//! in the school's group order (or the school has room). A within-group
//! block is a trade objection: the coalition rearranges seats so that
//! every touched school keeps a group-equivalent cohort, and too few
//! higher-ranked group mates are left outside the coalition to veto it.
//! A match clear of both objections is in the unified core.
//!
//! Between-group blocks reduce to pairwise claims, so that checker is
//! exact at any scale. Within-group (and efficient) blocks require a
//! search over alternative matches and coalitions; those searchers are
//! exhaustive and therefore budgeted.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Assigned, Instance, Match};
use crate::priority::{
    between_compare, sets_equivalent, upper_contour_efficient, upper_contour_within, PriorityCmp,
};

/// A nonempty set of students raising an objection together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    /// Member student indices, ascending.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Between,
    Within,
    Efficient,
}

/// Per-school witness data for a certificate: how the coalition's target
/// school fares on cohort equivalence and interrupter slack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchoolEvidence {
    pub school: usize,
    pub cohort_equivalent: bool,
    pub interrupter_sum: usize,
    pub slack: usize,
}

/// A machine-checkable witness that a match is blocked.
///
/// Certificates re-verify: [`verify_certificate`] re-runs the enforce
/// predicate matching `kind` against the original match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCertificate {
    pub kind: BlockKind,
    pub coalition: Coalition,
    pub alt_match: Match,
    pub evidence: Vec<SchoolEvidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search budget of {budget} candidate matches exhausted")]
    BudgetExceeded { budget: u64 },
}

/// Membership verdict for a budgeted core check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreVerdict {
    In,
    Out(Box<BlockCertificate>),
    Unknown { budget: u64 },
}

/// Fairness verdict under the strict within-group order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairVerdict {
    Fair,
    NotIndividuallyRational { student: usize },
    Violation { student: usize, school: usize },
}

impl FairVerdict {
    pub fn is_fair(&self) -> bool {
        matches!(self, FairVerdict::Fair)
    }
}

/// True when every member weakly gains moving from `mu` to `nu` and at
/// least one member strictly gains.
pub fn coalition_prefers(inst: &Instance, members: &[usize], nu: &Match, mu: &Match) -> bool {
    let mut any_strict = false;
    for &i in members {
        let (x, y) = (nu.assigned(i), mu.assigned(i));
        if !inst.weakly_prefers(i, x, y) {
            return false;
        }
        any_strict |= inst.strictly_prefers(i, x, y);
    }
    any_strict
}

/// Hard-priority enforceability: every member either leaves for herself,
/// targets a school with a free seat under `mu`, or outranks one of its
/// current holders in the between-group order.
pub fn can_between_enforce(inst: &Instance, members: &[usize], nu: &Match, mu: &Match) -> bool {
    members.iter().all(|&i| match nu.assigned(i) {
        Assigned::Unmatched => true,
        Assigned::School(s) => {
            let holders = mu.occupants(s);
            holders.len() < inst.capacity(s)
                || holders
                    .iter()
                    .any(|&j| between_compare(inst, s, i, j) == PriorityCmp::Higher)
        }
    })
}

fn enforce_over_schools<F>(
    inst: &Instance,
    members: &[usize],
    nu: &Match,
    mu: &Match,
    require_equivalence: bool,
    contour: F,
) -> bool
where
    F: Fn(&Instance, usize, usize) -> Vec<usize>,
{
    let targets: BTreeSet<usize> = members.iter().filter_map(|&i| nu.school_of(i)).collect();
    for s in targets {
        let cohort_nu = nu.occupants(s);
        if cohort_nu.len() > inst.capacity(s) {
            return false;
        }
        if require_equivalence && !sets_equivalent(inst, s, &cohort_nu, &mu.occupants(s)) {
            return false;
        }
        let slack = inst.capacity(s) - cohort_nu.len();
        let interrupters: usize = members
            .iter()
            .filter(|&&i| nu.school_of(i) == Some(s))
            .map(|&i| {
                contour(inst, s, i)
                    .into_iter()
                    .filter(|j| !members.contains(j))
                    .count()
            })
            .sum();
        if interrupters > slack {
            return false;
        }
    }
    true
}

/// Trade enforceability: every school the coalition moves into keeps a
/// cohort group-equivalent to its old one, and the members' within-group
/// interrupters (group mates ranked weakly above them, outside the
/// coalition, counted once per member) fit into the school's slack.
pub fn can_within_enforce(inst: &Instance, members: &[usize], nu: &Match, mu: &Match) -> bool {
    enforce_over_schools(inst, members, nu, mu, true, |inst, s, i| {
        upper_contour_within(inst, s, i)
    })
}

/// Like [`can_within_enforce`] with the group discipline removed: no
/// cohort equivalence, and interrupters are drawn from the whole strict
/// order above the member rather than her group.
pub fn can_efficient_enforce(inst: &Instance, members: &[usize], nu: &Match, mu: &Match) -> bool {
    enforce_over_schools(inst, members, nu, mu, false, |inst, s, i| {
        upper_contour_efficient(inst, s, i)
    })
}

/// Build a certificate for a known block, recomputing the per-school
/// evidence rows from scratch.
pub fn assemble_certificate(
    inst: &Instance,
    kind: BlockKind,
    mut members: Vec<usize>,
    nu: Match,
    mu: &Match,
) -> BlockCertificate {
    members.sort_unstable();
    let targets: BTreeSet<usize> = members.iter().filter_map(|&i| nu.school_of(i)).collect();
    let evidence = targets
        .into_iter()
        .map(|s| {
            let cohort_nu = nu.occupants(s);
            let interrupter_sum = members
                .iter()
                .filter(|&&i| nu.school_of(i) == Some(s))
                .map(|&i| {
                    let contour = match kind {
                        BlockKind::Efficient => upper_contour_efficient(inst, s, i),
                        _ => upper_contour_within(inst, s, i),
                    };
                    contour.into_iter().filter(|j| !members.contains(j)).count()
                })
                .sum();
            SchoolEvidence {
                school: s,
                cohort_equivalent: sets_equivalent(inst, s, &cohort_nu, &mu.occupants(s)),
                interrupter_sum,
                slack: inst.capacity(s).saturating_sub(cohort_nu.len()),
            }
        })
        .collect();
    BlockCertificate {
        kind,
        coalition: Coalition { members },
        alt_match: nu,
        evidence,
    }
}

/// Re-run a certificate against `mu`: the alternative match must be
/// valid, preferred by the coalition, and enforceable under the
/// certificate's own blocking notion.
pub fn verify_certificate(inst: &Instance, cert: &BlockCertificate, mu: &Match) -> bool {
    let members = &cert.coalition.members;
    if members.is_empty() || !crate::model::is_valid_match(inst, &cert.alt_match) {
        return false;
    }
    if !coalition_prefers(inst, members, &cert.alt_match, mu) {
        return false;
    }
    match cert.kind {
        BlockKind::Between => can_between_enforce(inst, members, &cert.alt_match, mu),
        BlockKind::Within => can_within_enforce(inst, members, &cert.alt_match, mu),
        BlockKind::Efficient => can_efficient_enforce(inst, members, &cert.alt_match, mu),
    }
}

/// Exact between-group block detection.
///
/// A coalition objection always collapses to one student: she either
/// wants out (the match was not individually rational) or claims a seat
/// at a school with room or with a group-dominated holder, sending the
/// displaced holder to herself. So scanning student-school pairs decides
/// blockedness at any instance size.
pub fn find_between_block(inst: &Instance, mu: &Match) -> Option<BlockCertificate> {
    for i in 0..inst.n_students() {
        if let Assigned::School(s) = mu.assigned(i) {
            if !inst.lists(i, s) {
                let mut nu = mu.clone();
                nu.set(i, Assigned::Unmatched);
                return Some(assemble_certificate(
                    inst,
                    BlockKind::Between,
                    vec![i],
                    nu,
                    mu,
                ));
            }
        }
    }
    for i in 0..inst.n_students() {
        let current = mu.assigned(i);
        for &s in inst.pref_list(i) {
            if !inst.strictly_prefers(i, Assigned::School(s), current) {
                break; // list is ordered, nothing below here is better
            }
            let holders = mu.occupants(s);
            let displaced = if holders.len() < inst.capacity(s) {
                None
            } else {
                match holders
                    .iter()
                    .copied()
                    .filter(|&j| between_compare(inst, s, i, j) == PriorityCmp::Higher)
                    .max_by_key(|&j| inst.within_rank(s, j))
                {
                    Some(j) => Some(j),
                    None => continue,
                }
            };
            let mut nu = mu.clone();
            nu.set(i, Assigned::School(s));
            if let Some(j) = displaced {
                nu.set(j, Assigned::Unmatched);
            }
            return Some(assemble_certificate(
                inst,
                BlockKind::Between,
                vec![i],
                nu,
                mu,
            ));
        }
    }
    None
}

/// Fairness check against the strict within-group order: no student may
/// prefer a school that has room or holds someone she outranks there.
pub fn check_fair(inst: &Instance, mu: &Match) -> FairVerdict {
    for i in 0..inst.n_students() {
        if let Assigned::School(s) = mu.assigned(i) {
            if !inst.lists(i, s) {
                return FairVerdict::NotIndividuallyRational { student: i };
            }
        }
    }
    match fair_violations(inst, mu).into_iter().next() {
        Some((student, school)) => FairVerdict::Violation { student, school },
        None => FairVerdict::Fair,
    }
}

/// All pairs `(student, school)` witnessing unfairness, in student order.
pub fn fair_violations(inst: &Instance, mu: &Match) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..inst.n_students() {
        let current = mu.assigned(i);
        for &s in inst.pref_list(i) {
            if !inst.strictly_prefers(i, Assigned::School(s), current) {
                break;
            }
            let holders = mu.occupants(s);
            let claim = holders.len() < inst.capacity(s)
                || holders
                    .iter()
                    .any(|&j| inst.within_rank(s, i) < inst.within_rank(s, j));
            if claim {
                out.push((i, s));
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum SearchMode {
    Within,
    Efficient,
}

/// Exhaustive search state over candidate matches. Students are assigned
/// in index order; `usize::MAX` marks a student kept on her own.
struct BlockSearch<'a> {
    inst: &'a Instance,
    mode: SearchMode,
    budget: u64,
    visited: u64,
    mu_scale: Vec<usize>,
    mu_counts: Vec<Vec<usize>>,
    contour_mask: Vec<Vec<u64>>, // [school][student]
    suffix_can_improve: Vec<bool>,
    assign: Vec<usize>,
    remaining: Vec<usize>,
    nu_counts: Vec<Vec<usize>>,
    nu_size: Vec<usize>,
    found: Option<(Vec<usize>, Match)>,
}

const ON_OWN: usize = usize::MAX;

impl<'a> BlockSearch<'a> {
    fn new(inst: &'a Instance, mu: &'a Match, mode: SearchMode, budget: u64) -> Self {
        let n = inst.n_students();
        let m = inst.n_schools();
        let mu_scale: Vec<usize> = (0..n).map(|i| inst.pref_scale(i, mu.assigned(i))).collect();
        let mut mu_counts = vec![Vec::new(); m];
        for s in 0..m {
            let mut counts = vec![0usize; inst.groups(s).len()];
            for j in mu.occupants(s) {
                counts[inst.group_of(s, j)] += 1;
            }
            mu_counts[s] = counts;
        }
        let mut contour_mask = vec![vec![0u64; n]; m];
        for (s, row) in contour_mask.iter_mut().enumerate() {
            for (i, mask) in row.iter_mut().enumerate() {
                let contour = match mode {
                    SearchMode::Within => upper_contour_within(inst, s, i),
                    SearchMode::Efficient => upper_contour_efficient(inst, s, i),
                };
                for j in contour {
                    *mask |= 1 << j;
                }
            }
        }
        // A student can only ever strictly improve when her current seat
        // is not already her top option.
        let mut suffix_can_improve = vec![false; n + 1];
        for i in (0..n).rev() {
            suffix_can_improve[i] = suffix_can_improve[i + 1] || mu_scale[i] > 0;
        }
        BlockSearch {
            inst,
            mode,
            budget,
            visited: 0,
            mu_scale,
            mu_counts,
            contour_mask,
            suffix_can_improve,
            assign: vec![ON_OWN; n],
            remaining: (0..m).map(|s| inst.capacity(s)).collect(),
            nu_counts: (0..m).map(|s| vec![0usize; inst.groups(s).len()]).collect(),
            nu_size: vec![0; m],
            found: None,
        }
    }

    fn run(mut self) -> Result<Option<(Vec<usize>, Match)>, SearchError> {
        // The bitmask machinery and any realistic budget both top out
        // long before 64 students or schools.
        if self.inst.n_students() > 64 || self.inst.n_schools() > 64 {
            return Err(SearchError::BudgetExceeded {
                budget: self.budget,
            });
        }
        self.descend(0, false)?;
        Ok(self.found)
    }

    fn descend(&mut self, depth: usize, any_strict: bool) -> Result<bool, SearchError> {
        if !any_strict && !self.suffix_can_improve[depth] {
            return Ok(false); // no leaf below can hold a strict improver
        }
        if depth == self.inst.n_students() {
            return self.leaf();
        }
        for s in 0..self.inst.n_schools() {
            if self.remaining[s] == 0 {
                continue;
            }
            self.remaining[s] -= 1;
            self.nu_counts[s][self.inst.group_of(s, depth)] += 1;
            self.nu_size[s] += 1;
            self.assign[depth] = s;
            let strict = self.inst.pref_scale(depth, Assigned::School(s)) < self.mu_scale[depth];
            let stop = self.descend(depth + 1, any_strict || strict)?;
            self.assign[depth] = ON_OWN;
            self.nu_size[s] -= 1;
            self.nu_counts[s][self.inst.group_of(s, depth)] -= 1;
            self.remaining[s] += 1;
            if stop {
                return Ok(true);
            }
        }
        let strict = self.inst.pref_list(depth).len() < self.mu_scale[depth];
        self.descend(depth + 1, any_strict || strict)
    }

    fn leaf(&mut self) -> Result<bool, SearchError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(SearchError::BudgetExceeded {
                budget: self.budget,
            });
        }
        let n = self.inst.n_students();
        let mut weak: u64 = 0;
        let mut strict: u64 = 0;
        for i in 0..n {
            let scale = match self.assign[i] {
                ON_OWN => self.inst.pref_list(i).len(),
                s => self.inst.pref_scale(i, Assigned::School(s)),
            };
            if scale <= self.mu_scale[i] {
                weak |= 1 << i;
                if scale < self.mu_scale[i] {
                    strict |= 1 << i;
                }
            }
        }
        if strict == 0 {
            return Ok(false);
        }
        // Only students whose target school keeps an equivalent cohort
        // can join a within-mode coalition at all.
        let mut usable: u64 = 0;
        let mut bits = weak;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let ok = match self.assign[i] {
                ON_OWN => true,
                s => self.mode == SearchMode::Efficient || self.nu_counts[s] == self.mu_counts[s],
            };
            if ok {
                usable |= 1 << i;
            }
        }
        if usable & strict == 0 {
            return Ok(false);
        }
        let mut coalition = usable;
        loop {
            if coalition & strict != 0 && self.coalition_enforces(coalition) {
                let members: Vec<usize> = (0..n).filter(|i| coalition >> i & 1 == 1).collect();
                let mut nu = Match::empty(n);
                for i in 0..n {
                    match self.assign[i] {
                        ON_OWN => nu.set(i, Assigned::Unmatched),
                        s => nu.set(i, Assigned::School(s)),
                    }
                }
                self.found = Some((members, nu));
                return Ok(true);
            }
            if coalition == 0 {
                return Ok(false);
            }
            coalition = (coalition - 1) & usable;
        }
    }

    fn coalition_enforces(&self, coalition: u64) -> bool {
        let mut sums = [0usize; 64];
        let mut touched: Vec<usize> = Vec::new();
        let mut bits = coalition;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let s = self.assign[i];
            if s == ON_OWN {
                continue;
            }
            if sums[s] == 0 && !touched.contains(&s) {
                touched.push(s);
            }
            sums[s] += (self.contour_mask[s][i] & !coalition).count_ones() as usize;
        }
        touched
            .into_iter()
            .all(|s| sums[s] <= self.inst.capacity(s) - self.nu_size[s])
    }
}

/// Exhaustive within-group block search over every valid match and every
/// preferring coalition. `budget` caps the number of candidate matches
/// examined; exceeding it withholds the verdict instead of guessing.
pub fn find_within_block_exhaustive(
    inst: &Instance,
    mu: &Match,
    budget: u64,
) -> Result<Option<BlockCertificate>, SearchError> {
    let hit = BlockSearch::new(inst, mu, SearchMode::Within, budget).run()?;
    Ok(hit.map(|(members, nu)| assemble_certificate(inst, BlockKind::Within, members, nu, mu)))
}

/// Same search as [`find_within_block_exhaustive`] with the group
/// discipline dropped, which is the blocking notion behind the efficient
/// core.
pub fn find_efficient_block_exhaustive(
    inst: &Instance,
    mu: &Match,
    budget: u64,
) -> Result<Option<BlockCertificate>, SearchError> {
    let hit = BlockSearch::new(inst, mu, SearchMode::Efficient, budget).run()?;
    Ok(hit.map(|(members, nu)| assemble_certificate(inst, BlockKind::Efficient, members, nu, mu)))
}

/// Unified core membership: exact between-group check first, then the
/// budgeted within-group search.
pub fn is_in_unified_core(inst: &Instance, mu: &Match, budget: u64) -> CoreVerdict {
    if let Some(cert) = find_between_block(inst, mu) {
        return CoreVerdict::Out(Box::new(cert));
    }
    match find_within_block_exhaustive(inst, mu, budget) {
        Ok(Some(cert)) => CoreVerdict::Out(Box::new(cert)),
        Ok(None) => CoreVerdict::In,
        Err(SearchError::BudgetExceeded { budget }) => CoreVerdict::Unknown { budget },
    }
}

/// Efficient core membership via the efficient block search alone. A
/// match failing individual rationality is caught by the search, since a
/// student walking away enforces vacuously.
pub fn is_in_efficient_core(inst: &Instance, mu: &Match, budget: u64) -> CoreVerdict {
    match find_efficient_block_exhaustive(inst, mu, budget) {
        Ok(Some(cert)) => CoreVerdict::Out(Box::new(cert)),
        Ok(None) => CoreVerdict::In,
        Err(SearchError::BudgetExceeded { budget }) => CoreVerdict::Unknown { budget },
    }
}

/// Search for a match every student weakly prefers and someone strictly
/// prefers. Returns the dominating match if one exists, `None` when `mu`
/// is Pareto efficient for students.
///
/// Each student's options are restricted to targets she weakly prefers
/// to her current seat, so the space is usually tiny.
pub fn is_pareto_efficient_students(
    inst: &Instance,
    mu: &Match,
    budget: u64,
) -> Result<Option<Match>, SearchError> {
    let n = inst.n_students();
    let m = inst.n_schools();
    // options[i]: weakly preferred targets, best first.
    let mut options: Vec<Vec<Assigned>> = Vec::with_capacity(n);
    for i in 0..n {
        let scale_mu = inst.pref_scale(i, mu.assigned(i));
        let mut opts: Vec<Assigned> = Vec::new();
        for &s in inst.pref_list(i) {
            if inst.pref_scale(i, Assigned::School(s)) <= scale_mu {
                opts.push(Assigned::School(s));
            }
        }
        if inst.pref_list(i).len() <= scale_mu {
            opts.push(Assigned::Unmatched);
        }
        if scale_mu > inst.pref_list(i).len() {
            // Current seat is off her list: any unlisted school ties it.
            for s in 0..m {
                if !inst.lists(i, s) {
                    opts.push(Assigned::School(s));
                }
            }
        }
        options.push(opts);
    }

    struct Dfs<'a> {
        inst: &'a Instance,
        mu: &'a Match,
        options: &'a [Vec<Assigned>],
        remaining: Vec<usize>,
        assign: Vec<Assigned>,
        budget: u64,
        visited: u64,
    }
    impl Dfs<'_> {
        fn go(&mut self, depth: usize, any_strict: bool) -> Result<Option<Match>, SearchError> {
            if depth == self.assign.len() {
                self.visited += 1;
                if self.visited > self.budget {
                    return Err(SearchError::BudgetExceeded {
                        budget: self.budget,
                    });
                }
                if !any_strict {
                    return Ok(None);
                }
                let mut nu = Match::empty(self.assign.len());
                for (i, a) in self.assign.iter().enumerate() {
                    nu.set(i, *a);
                }
                return Ok(Some(nu));
            }
            for k in 0..self.options[depth].len() {
                let target = self.options[depth][k];
                if let Assigned::School(s) = target {
                    if self.remaining[s] == 0 {
                        continue;
                    }
                    self.remaining[s] -= 1;
                }
                self.assign[depth] = target;
                let strict = self
                    .inst
                    .strictly_prefers(depth, target, self.mu.assigned(depth));
                let got = self.go(depth + 1, any_strict || strict)?;
                if let Assigned::School(s) = target {
                    self.remaining[s] += 1;
                }
                if got.is_some() {
                    return Ok(got);
                }
            }
            Ok(None)
        }
    }

    let mut dfs = Dfs {
        inst,
        mu,
        options: &options,
        remaining: (0..m).map(|s| inst.capacity(s)).collect(),
        assign: vec![Assigned::Unmatched; n],
        budget,
        visited: 0,
    };
    dfs.go(0, false)
}
