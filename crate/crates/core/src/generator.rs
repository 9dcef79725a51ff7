//! Seeded random instance generation.
//!
//! Everything is driven by [`SplitMix64`], so a seed pins the instance
//! exactly. Reproducibility is promised per release of this crate, not
//! across unrelated implementations.

use thiserror::Error;

use crate::model::{validate_instance, Instance, RawInstance};

/// SplitMix64: the 64-bit mixing generator from Steele, Lea and Flood's
/// "Fast splittable pseudorandom number generators". One addition and
/// three xor-shift-multiply rounds per draw.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Unbiased draw from `0..bound`. `bound` must be positive.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        loop {
            let v = self.next_u64();
            let r = v % bound;
            // Reject draws from the truncated final block.
            if v.wrapping_sub(r) <= u64::MAX - (bound - 1) {
                return r;
            }
        }
    }

    /// Inclusive range draw.
    pub fn next_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.next_below((hi - lo + 1) as u64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for k in (1..items.len()).rev() {
            let j = self.next_below(k as u64 + 1) as usize;
            items.swap(k, j);
        }
    }
}

/// Knobs for [`generate_instance`]. All ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorParams {
    pub seed: u64,
    pub n_students: usize,
    pub n_schools: usize,
    pub capacity_range: (usize, usize),
    pub list_length_range: (usize, usize),
    pub groups_per_school_range: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

fn check(params: &GeneratorParams) -> Result<(), GeneratorError> {
    let err = |msg: &str| Err(GeneratorError::Infeasible(msg.into()));
    if params.n_students == 0 || params.n_schools == 0 {
        return err("need at least one student and one school");
    }
    let ranges = [
        ("capacity", params.capacity_range),
        ("list length", params.list_length_range),
        ("groups per school", params.groups_per_school_range),
    ];
    for (name, (lo, hi)) in ranges {
        if lo > hi {
            return Err(GeneratorError::Infeasible(format!("empty {name} range")));
        }
    }
    if params.capacity_range.0 == 0 {
        return err("capacities start at 1");
    }
    if params.list_length_range.1 > params.n_schools {
        return err("preference lists cannot exceed the school count");
    }
    if params.groups_per_school_range.0 == 0 || params.groups_per_school_range.1 > params.n_students
    {
        return err("groups per school must fall in 1..=n_students");
    }
    Ok(())
}

/// Generate a validated instance, deterministic in the seed.
///
/// Preference lists are uniform random prefixes of a school shuffle.
/// Each school draws a group count, splits a student shuffle at that
/// many random cut points into ordered groups, and then draws its strict
/// order as an independent lottery inside every group.
pub fn generate_instance(params: &GeneratorParams) -> Result<Instance, GeneratorError> {
    check(params)?;
    let mut rng = SplitMix64::new(params.seed);
    let n = params.n_students;
    let m = params.n_schools;

    let students: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    let school_names: Vec<String> = (1..=m).map(|k| format!("s{k}")).collect();

    let mut raw = RawInstance {
        students: students.clone(),
        ..RawInstance::default()
    };
    for name in &school_names {
        let capacity = rng.next_in(params.capacity_range.0, params.capacity_range.1);
        raw.schools.push((name.clone(), capacity));
    }

    for student in &students {
        let len = rng.next_in(params.list_length_range.0, params.list_length_range.1);
        let mut pool = school_names.clone();
        rng.shuffle(&mut pool);
        pool.truncate(len);
        raw.prefs.push((student.clone(), pool));
    }

    for name in &school_names {
        let k = rng.next_in(
            params.groups_per_school_range.0,
            params.groups_per_school_range.1,
        );
        let mut order = students.clone();
        rng.shuffle(&mut order);

        // k-1 distinct cut points over the n-1 gaps.
        let mut gaps: Vec<usize> = (1..n).collect();
        rng.shuffle(&mut gaps);
        let mut cuts: Vec<usize> = gaps.into_iter().take(k - 1).collect();
        cuts.sort_unstable();
        cuts.push(n);

        let mut groups: Vec<Vec<String>> = Vec::with_capacity(k);
        let mut start = 0;
        for cut in cuts {
            groups.push(order[start..cut].to_vec());
            start = cut;
        }

        // Within order: an independent lottery inside each group.
        let mut within = Vec::with_capacity(n);
        for group in &groups {
            let mut lottery = group.clone();
            rng.shuffle(&mut lottery);
            within.extend(lottery);
        }

        raw.between.push((name.clone(), groups));
        raw.within.push((name.clone(), within));
    }

    Ok(validate_instance(&raw).expect("generated instances satisfy every invariant"))
}

/// Redraw every school's within-group lottery with a fresh seed, keeping
/// students, capacities, preferences and group structure fixed.
pub fn redraw_within_lotteries(inst: &Instance, seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
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
        let name = inst.school_id(s).0.clone();
        let groups: Vec<Vec<String>> = inst
            .groups(s)
            .iter()
            .map(|g| g.iter().map(|&i| inst.student_id(i).0.clone()).collect())
            .collect();
        let mut within = Vec::with_capacity(inst.n_students());
        for group in &groups {
            let mut lottery = group.clone();
            rng.shuffle(&mut lottery);
            within.extend(lottery);
        }
        raw.between.push((name.clone(), groups));
        raw.within.push((name, within));
    }
    validate_instance(&raw).expect("lottery redraw preserves every invariant")
}
