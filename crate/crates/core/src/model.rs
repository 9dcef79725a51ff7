//! Problem instances and matches.
//!
//! An [`Instance`] is built by validating a [`RawInstance`]; every later
//! operation assumes a validated instance and works with dense indices
//! (`usize`) into the instance's student and school tables. The raw form
//! exists so that files and generators can describe arbitrary, possibly
//! broken, data and get every violation reported at once.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Opaque student identifier. Case sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StudentId(pub String);

/// Opaque school identifier. Case sensitive, disjoint from student ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchoolId(pub String);

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for SchoolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A school together with its seat count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct School {
    pub id: SchoolId,
    pub capacity: usize,
}

/// Unvalidated instance data, as read from a file or built by a generator.
///
/// All cross-references are by name. `prefs`, `between` and `within` are
/// keyed by owner; a student with no `prefs` entry finds every school
/// unacceptable, while every school must declare both priority layers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub students: Vec<String>,
    pub schools: Vec<(String, usize)>,
    /// Ranked school lists, most preferred first. Schools left off a list
    /// are unacceptable to the student (worse than staying unmatched).
    pub prefs: Vec<(String, Vec<String>)>,
    /// Ordered priority groups per school, highest group first. Must
    /// partition the full student set.
    pub between: Vec<(String, Vec<Vec<String>>)>,
    /// Strict order per school, highest first. Must be a permutation of
    /// the students that lists whole groups contiguously in group order.
    pub within: Vec<(String, Vec<String>)>,
}

/// A violation found while validating a [`RawInstance`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("duplicate or clashing identifier `{id}`")]
    DuplicateId { id: String },
    #[error("school `{school}` has capacity {capacity}, need at least 1")]
    NonPositiveCapacity { school: String, capacity: usize },
    #[error("{context} refers to unknown id `{id}`")]
    DanglingReference { context: String, id: String },
    #[error("preference list of `{student}` lists `{school}` twice")]
    DuplicatePreference { student: String, school: String },
    #[error("{context} declared more than once for `{id}`")]
    MultipleDeclarations { context: String, id: String },
    #[error("{context} missing for `{id}`")]
    MissingDeclaration { context: String, id: String },
    #[error("between groups of school `{school}`: {detail}")]
    PartitionError { school: String, detail: String },
    #[error("within order of school `{school}`: {detail}")]
    PermutationError { school: String, detail: String },
    #[error(
        "within order of school `{school}` places `{above}` above `{below}`, \
         contradicting their between-group order"
    )]
    RefinementError {
        school: String,
        above: String,
        below: String,
    },
}

/// A validated school choice problem.
///
/// Students and schools are referred to by dense index in the order they
/// were declared. Priority lookups are precomputed so the comparison
/// operations in [`crate::priority`] are O(1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    students: Vec<StudentId>,
    schools: Vec<School>,
    prefs: Vec<Vec<usize>>,
    between: Vec<Vec<Vec<usize>>>,
    within: Vec<Vec<usize>>,
    group_of: Vec<Vec<usize>>,    // [school][student]
    within_rank: Vec<Vec<usize>>, // [school][student]
    pref_pos: Vec<Vec<usize>>,    // [student][school], list position or len+1
    student_index: BTreeMap<String, usize>,
    school_index: BTreeMap<String, usize>,
}

/// Where a student ends up under a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Assigned {
    School(usize),
    Unmatched,
}

/// An assignment of students to seats (or to themselves).
///
/// A `Match` may be partial or over capacity while it is being built or
/// after parsing arbitrary input; [`is_valid_match`] decides whether it
/// satisfies totality and the capacity bounds. Algorithms that state a
/// validity precondition use [`Match::assigned`], which panics on a slot
/// that was never filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    slots: Vec<Option<Assigned>>,
}

impl Match {
    /// A match with every student still unassigned (not even to SELF).
    pub fn empty(n_students: usize) -> Self {
        Match {
            slots: vec![None; n_students],
        }
    }

    /// Build from `(student, school-or-"-")` pairs.
    ///
    /// Panics on unknown names; meant for fixtures and tests.
    pub fn from_names(inst: &Instance, pairs: &[(&str, &str)]) -> Self {
        let mut m = Match::empty(inst.n_students());
        for (student, target) in pairs {
            let i = inst.student_index(student);
            let a = if *target == "-" {
                Assigned::Unmatched
            } else {
                Assigned::School(inst.school_index(target))
            };
            m.set(i, a);
        }
        m
    }

    pub fn set(&mut self, student: usize, a: Assigned) {
        self.slots[student] = Some(a);
    }

    pub fn get(&self, student: usize) -> Option<Assigned> {
        self.slots[student]
    }

    /// Assignment of `student`. Panics if the slot was never filled.
    pub fn assigned(&self, student: usize) -> Assigned {
        self.slots[student].expect("match is not total")
    }

    /// School index of `student`, or `None` when unmatched.
    pub fn school_of(&self, student: usize) -> Option<usize> {
        match self.assigned(student) {
            Assigned::School(s) => Some(s),
            Assigned::Unmatched => None,
        }
    }

    pub fn is_total(&self) -> bool {
        self.slots.iter().all(|s| s.is_some())
    }

    pub fn n_students(&self) -> usize {
        self.slots.len()
    }

    /// Students currently assigned to `school`, in index order.
    pub fn occupants(&self, school: usize) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == Some(Assigned::School(school)))
            .map(|(i, _)| i)
            .collect()
    }
}

impl Instance {
    pub fn n_students(&self) -> usize {
        self.students.len()
    }

    pub fn n_schools(&self) -> usize {
        self.schools.len()
    }

    pub fn student_ids(&self) -> &[StudentId] {
        &self.students
    }

    pub fn schools(&self) -> &[School] {
        &self.schools
    }

    pub fn student_id(&self, student: usize) -> &StudentId {
        &self.students[student]
    }

    pub fn school_id(&self, school: usize) -> &SchoolId {
        &self.schools[school].id
    }

    pub fn capacity(&self, school: usize) -> usize {
        self.schools[school].capacity
    }

    /// Index of a student by name. Panics on unknown names.
    pub fn student_index(&self, id: &str) -> usize {
        self.find_student(id)
            .unwrap_or_else(|| panic!("unknown student `{id}`"))
    }

    /// Index of a school by name. Panics on unknown names.
    pub fn school_index(&self, id: &str) -> usize {
        self.find_school(id)
            .unwrap_or_else(|| panic!("unknown school `{id}`"))
    }

    pub fn find_student(&self, id: &str) -> Option<usize> {
        self.student_index.get(id).copied()
    }

    pub fn find_school(&self, id: &str) -> Option<usize> {
        self.school_index.get(id).copied()
    }

    /// Ranked school list of `student`, most preferred first.
    pub fn pref_list(&self, student: usize) -> &[usize] {
        &self.prefs[student]
    }

    /// Ordered priority groups at `school`, highest first.
    pub fn groups(&self, school: usize) -> &[Vec<usize>] {
        &self.between[school]
    }

    /// Strict priority order at `school`, highest first.
    pub fn within_order(&self, school: usize) -> &[usize] {
        &self.within[school]
    }

    /// Index of the group containing `student` at `school` (0 = highest).
    pub fn group_of(&self, school: usize, student: usize) -> usize {
        self.group_of[school][student]
    }

    /// Position of `student` in the within order at `school` (0 = highest).
    pub fn within_rank(&self, school: usize, student: usize) -> usize {
        self.within_rank[school][student]
    }

    /// True when `school` appears on `student`'s preference list.
    pub fn lists(&self, student: usize, school: usize) -> bool {
        self.pref_pos[student][school] <= self.prefs[student].len()
            && self.prefs[student].get(self.pref_pos[student][school]) == Some(&school)
    }

    /// Comparison scale for a student over schools and SELF: listed
    /// schools take their list position, SELF sits just past the list,
    /// and unlisted schools share one tier strictly below SELF.
    pub(crate) fn pref_scale(&self, student: usize, target: Assigned) -> usize {
        match target {
            Assigned::School(s) => self.pref_pos[student][s],
            Assigned::Unmatched => self.prefs[student].len(),
        }
    }

    pub fn strictly_prefers(&self, student: usize, x: Assigned, y: Assigned) -> bool {
        self.pref_scale(student, x) < self.pref_scale(student, y)
    }

    pub fn weakly_prefers(&self, student: usize, x: Assigned, y: Assigned) -> bool {
        self.pref_scale(student, x) <= self.pref_scale(student, y)
    }
}

/// Check every invariant of a [`RawInstance`] and build the dense form.
///
/// Returns all violations rather than the first one; every error names
/// the entity at fault.
pub fn validate_instance(raw: &RawInstance) -> Result<Instance, Vec<InstanceError>> {
    let mut errors = Vec::new();

    let mut student_index = BTreeMap::new();
    for (i, name) in raw.students.iter().enumerate() {
        if student_index.insert(name.clone(), i).is_some() {
            errors.push(InstanceError::DuplicateId { id: name.clone() });
        }
    }
    let mut school_index = BTreeMap::new();
    for (s, (name, capacity)) in raw.schools.iter().enumerate() {
        if school_index.insert(name.clone(), s).is_some() || student_index.contains_key(name) {
            errors.push(InstanceError::DuplicateId { id: name.clone() });
        }
        if *capacity == 0 {
            errors.push(InstanceError::NonPositiveCapacity {
                school: name.clone(),
                capacity: *capacity,
            });
        }
    }

    let n = raw.students.len();
    let m = raw.schools.len();

    // Preference lists, one per student, empty when absent.
    let mut prefs: Vec<Option<Vec<usize>>> = vec![None; n];
    for (owner, list) in &raw.prefs {
        let Some(&i) = student_index.get(owner.as_str()) else {
            errors.push(InstanceError::DanglingReference {
                context: "preference declaration".into(),
                id: owner.clone(),
            });
            continue;
        };
        if prefs[i].is_some() {
            errors.push(InstanceError::MultipleDeclarations {
                context: "preference list".into(),
                id: owner.clone(),
            });
            continue;
        }
        let mut resolved = Vec::with_capacity(list.len());
        for school in list {
            match school_index.get(school.as_str()) {
                Some(&s) => {
                    if resolved.contains(&s) {
                        errors.push(InstanceError::DuplicatePreference {
                            student: owner.clone(),
                            school: school.clone(),
                        });
                    } else {
                        resolved.push(s);
                    }
                }
                None => errors.push(InstanceError::DanglingReference {
                    context: format!("preference list of `{owner}`"),
                    id: school.clone(),
                }),
            }
        }
        prefs[i] = Some(resolved);
    }
    let prefs: Vec<Vec<usize>> = prefs.into_iter().map(Option::unwrap_or_default).collect();

    // Between groups and within orders, both mandatory per school.
    let mut between: Vec<Option<Vec<Vec<usize>>>> = vec![None; m];
    for (owner, groups) in &raw.between {
        let Some(&s) = school_index.get(owner.as_str()) else {
            errors.push(InstanceError::DanglingReference {
                context: "between-group declaration".into(),
                id: owner.clone(),
            });
            continue;
        };
        if between[s].is_some() {
            errors.push(InstanceError::MultipleDeclarations {
                context: "between-group declaration".into(),
                id: owner.clone(),
            });
            continue;
        }
        let mut seen = vec![false; n];
        let mut resolved_groups = Vec::with_capacity(groups.len());
        for group in groups {
            if group.is_empty() {
                errors.push(InstanceError::PartitionError {
                    school: owner.clone(),
                    detail: "contains an empty group".into(),
                });
            }
            let mut resolved = Vec::with_capacity(group.len());
            for member in group {
                match student_index.get(member.as_str()) {
                    Some(&i) => {
                        if seen[i] {
                            errors.push(InstanceError::PartitionError {
                                school: owner.clone(),
                                detail: format!("student `{member}` appears twice"),
                            });
                        } else {
                            seen[i] = true;
                            resolved.push(i);
                        }
                    }
                    None => errors.push(InstanceError::DanglingReference {
                        context: format!("between groups of `{owner}`"),
                        id: member.clone(),
                    }),
                }
            }
            resolved_groups.push(resolved);
        }
        for (i, covered) in seen.iter().enumerate() {
            if !covered {
                errors.push(InstanceError::PartitionError {
                    school: owner.clone(),
                    detail: format!("student `{}` is missing", raw.students[i]),
                });
            }
        }
        between[s] = Some(resolved_groups);
    }

    let mut within: Vec<Option<Vec<usize>>> = vec![None; m];
    for (owner, order) in &raw.within {
        let Some(&s) = school_index.get(owner.as_str()) else {
            errors.push(InstanceError::DanglingReference {
                context: "within-order declaration".into(),
                id: owner.clone(),
            });
            continue;
        };
        if within[s].is_some() {
            errors.push(InstanceError::MultipleDeclarations {
                context: "within-order declaration".into(),
                id: owner.clone(),
            });
            continue;
        }
        let mut seen = vec![false; n];
        let mut resolved = Vec::with_capacity(order.len());
        for member in order {
            match student_index.get(member.as_str()) {
                Some(&i) => {
                    if seen[i] {
                        errors.push(InstanceError::PermutationError {
                            school: owner.clone(),
                            detail: format!("student `{member}` appears twice"),
                        });
                    } else {
                        seen[i] = true;
                        resolved.push(i);
                    }
                }
                None => errors.push(InstanceError::DanglingReference {
                    context: format!("within order of `{owner}`"),
                    id: member.clone(),
                }),
            }
        }
        for (i, covered) in seen.iter().enumerate() {
            if !covered {
                errors.push(InstanceError::PermutationError {
                    school: owner.clone(),
                    detail: format!("student `{}` is missing", raw.students[i]),
                });
            }
        }
        within[s] = Some(resolved);
    }

    for (s, (name, _)) in raw.schools.iter().enumerate() {
        if school_index.get(name.as_str()) != Some(&s) {
            continue; // duplicate school id, already reported
        }
        if between[s].is_none() {
            errors.push(InstanceError::MissingDeclaration {
                context: "between-group declaration".into(),
                id: name.clone(),
            });
        }
        if within[s].is_none() {
            errors.push(InstanceError::MissingDeclaration {
                context: "within-order declaration".into(),
                id: name.clone(),
            });
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let between: Vec<Vec<Vec<usize>>> = between.into_iter().map(Option::unwrap).collect();
    let within: Vec<Vec<usize>> = within.into_iter().map(Option::unwrap).collect();

    // Group and rank tables; both partitions are complete at this point.
    let mut group_of = vec![vec![0usize; n]; m];
    let mut within_rank = vec![vec![0usize; n]; m];
    for s in 0..m {
        for (g, group) in between[s].iter().enumerate() {
            for &i in group {
                group_of[s][i] = g;
            }
        }
        for (r, &i) in within[s].iter().enumerate() {
            within_rank[s][i] = r;
        }
    }

    // The within order must list whole groups contiguously in group order.
    for s in 0..m {
        let order = &within[s];
        for w in order.windows(2) {
            let (x, y) = (w[0], w[1]);
            if group_of[s][x] > group_of[s][y] {
                errors.push(InstanceError::RefinementError {
                    school: raw.schools[s].0.clone(),
                    above: raw.students[x].clone(),
                    below: raw.students[y].clone(),
                });
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let mut pref_pos = vec![Vec::new(); n];
    for (i, list) in prefs.iter().enumerate() {
        let mut pos = vec![list.len() + 1; m];
        for (k, &s) in list.iter().enumerate() {
            pos[s] = k;
        }
        pref_pos[i] = pos;
    }

    Ok(Instance {
        students: raw.students.iter().cloned().map(StudentId).collect(),
        schools: raw
            .schools
            .iter()
            .map(|(id, capacity)| School {
                id: SchoolId(id.clone()),
                capacity: *capacity,
            })
            .collect(),
        prefs,
        between,
        within,
        group_of,
        within_rank,
        pref_pos,
        student_index,
        school_index,
    })
}

/// True when `m` assigns every student exactly once and no school is
/// over capacity.
pub fn is_valid_match(inst: &Instance, m: &Match) -> bool {
    if m.n_students() != inst.n_students() || !m.is_total() {
        return false;
    }
    let mut load = vec![0usize; inst.n_schools()];
    for i in 0..inst.n_students() {
        if let Some(s) = m.school_of(i) {
            load[s] += 1;
            if load[s] > inst.capacity(s) {
                return false;
            }
        }
    }
    true
}

/// True when every student weakly prefers her seat to being unmatched,
/// that is, nobody holds a school missing from her preference list.
pub fn is_individually_rational(inst: &Instance, m: &Match) -> bool {
    (0..inst.n_students()).all(|i| match m.assigned(i) {
        Assigned::Unmatched => true,
        Assigned::School(s) => inst.lists(i, s),
    })
}

/// 1-based position of the student's assigned school on her list, or
/// `None` when she is unmatched (or holds a school she never listed).
pub fn student_rank(inst: &Instance, student: usize, m: &Match) -> Option<usize> {
    match m.assigned(student) {
        Assigned::Unmatched => None,
        Assigned::School(s) => {
            if inst.lists(student, s) {
                Some(inst.pref_pos[student][s] + 1)
            } else {
                None
            }
        }
    }
}
