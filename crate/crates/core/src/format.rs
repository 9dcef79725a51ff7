//! Line-oriented text formats for instances, matches, and certificates.
//!
//! Tokens are whitespace separated and `#` starts a comment. An instance
//! file uses five directives:
//!
//! ```text
//! students <id>+
//! school <id> capacity <int>
//! pref <student> : <school>*
//! between <school> : { <student>+ } { <student>+ } ...
//! within <school> : <student>+
//! ```
//!
//! Match files hold one `match <student> : <school|->` line per student,
//! with `-` meaning the student stays unmatched. Certificate files are a
//! match file plus a `coalition : <student>+` line and a
//! `kind : between|within|efficient` line; match parsing skips those two
//! directives so a certificate can be replayed as a plain match.

use std::fmt::Write as _;

use thiserror::Error;

use crate::core::{BlockCertificate, BlockKind};
use crate::model::{
    is_valid_match, validate_instance, Assigned, Instance, InstanceError, Match, RawInstance,
};

/// A validation failure, attributed to a source line when one is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatedError {
    pub line: Option<usize>,
    pub error: InstanceError,
}

impl std::fmt::Display for LocatedError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{message}")]
    Incomplete { message: String },
    #[error("{}", render_located(.0))]
    Invalid(Vec<LocatedError>),
}

fn render_located(errors: &[LocatedError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Tokenized non-empty lines with their 1-based line numbers.
fn tokens(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(k, raw)| {
            let line = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                None
            } else {
                Some((k + 1, toks))
            }
        })
        .collect()
}

#[derive(Default)]
struct LineIndex {
    students: Option<usize>,
    school: Vec<(String, usize)>,
    pref: Vec<(String, usize)>,
    between: Vec<(String, usize)>,
    within: Vec<(String, usize)>,
}

impl LineIndex {
    fn lookup(list: &[(String, usize)], id: &str) -> Option<usize> {
        list.iter().find(|(name, _)| name == id).map(|(_, l)| *l)
    }

    /// Best-effort line attribution for a validation error.
    fn locate(&self, error: &InstanceError) -> Option<usize> {
        use InstanceError::*;
        match error {
            NonPositiveCapacity { school, .. } => Self::lookup(&self.school, school),
            PartitionError { school, .. } => Self::lookup(&self.between, school),
            PermutationError { school, .. } | RefinementError { school, .. } => {
                Self::lookup(&self.within, school)
            }
            DuplicatePreference { student, .. } => Self::lookup(&self.pref, student),
            DuplicateId { id } => Self::lookup(&self.school, id).or(self.students),
            MissingDeclaration { id, .. } => Self::lookup(&self.school, id),
            MultipleDeclarations { context, id } | DanglingReference { context, id } => {
                let owner = context
                    .split('`')
                    .nth(1)
                    .map(str::to_owned)
                    .unwrap_or_else(|| id.clone());
                if context.starts_with("preference") {
                    Self::lookup(&self.pref, &owner).or(Self::lookup(&self.pref, id))
                } else if context.starts_with("between") {
                    Self::lookup(&self.between, &owner).or(Self::lookup(&self.between, id))
                } else if context.starts_with("within") {
                    Self::lookup(&self.within, &owner).or(Self::lookup(&self.within, id))
                } else {
                    None
                }
            }
        }
    }
}

/// Parse and validate an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut raw = RawInstance::default();
    let mut index = LineIndex::default();

    for (line, toks) in tokens(text) {
        match toks[0] {
            "students" => {
                index.students.get_or_insert(line);
                raw.students.extend(toks[1..].iter().map(|s| s.to_string()));
            }
            "school" => {
                if toks.len() != 4 || toks[2] != "capacity" {
                    return Err(syntax(line, "expected `school <id> capacity <int>`"));
                }
                let capacity: usize = toks[3]
                    .parse()
                    .map_err(|_| syntax(line, format!("bad capacity `{}`", toks[3])))?;
                index.school.push((toks[1].to_string(), line));
                raw.schools.push((toks[1].to_string(), capacity));
            }
            "pref" => {
                if toks.len() < 3 || toks[2] != ":" {
                    return Err(syntax(line, "expected `pref <student> : <school>*`"));
                }
                index.pref.push((toks[1].to_string(), line));
                raw.prefs.push((
                    toks[1].to_string(),
                    toks[3..].iter().map(|s| s.to_string()).collect(),
                ));
            }
            "between" => {
                if toks.len() < 3 || toks[2] != ":" {
                    return Err(syntax(
                        line,
                        "expected `between <school> : { <student>+ } ...`",
                    ));
                }
                let mut groups: Vec<Vec<String>> = Vec::new();
                let mut current: Option<Vec<String>> = None;
                for &tok in &toks[3..] {
                    match tok {
                        "{" => {
                            if current.is_some() {
                                return Err(syntax(line, "nested `{`"));
                            }
                            current = Some(Vec::new());
                        }
                        "}" => match current.take() {
                            Some(group) => groups.push(group),
                            None => return Err(syntax(line, "`}` without `{`")),
                        },
                        id => match current.as_mut() {
                            Some(group) => group.push(id.to_string()),
                            None => return Err(syntax(line, format!("`{id}` outside any group"))),
                        },
                    }
                }
                if current.is_some() {
                    return Err(syntax(line, "unclosed `{`"));
                }
                index.between.push((toks[1].to_string(), line));
                raw.between.push((toks[1].to_string(), groups));
            }
            "within" => {
                if toks.len() < 3 || toks[2] != ":" {
                    return Err(syntax(line, "expected `within <school> : <student>+`"));
                }
                index.within.push((toks[1].to_string(), line));
                raw.within.push((
                    toks[1].to_string(),
                    toks[3..].iter().map(|s| s.to_string()).collect(),
                ));
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    validate_instance(&raw).map_err(|errors| {
        ParseError::Invalid(
            errors
                .into_iter()
                .map(|error| LocatedError {
                    line: index.locate(&error),
                    error,
                })
                .collect(),
        )
    })
}

/// Canonical text form of an instance; parsing it back yields an equal
/// instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("students");
    for id in inst.student_ids() {
        write!(out, " {id}").unwrap();
    }
    out.push('\n');
    for school in inst.schools() {
        writeln!(out, "school {} capacity {}", school.id, school.capacity).unwrap();
    }
    for i in 0..inst.n_students() {
        write!(out, "pref {} :", inst.student_id(i)).unwrap();
        for &s in inst.pref_list(i) {
            write!(out, " {}", inst.school_id(s)).unwrap();
        }
        out.push('\n');
    }
    for s in 0..inst.n_schools() {
        write!(out, "between {} :", inst.school_id(s)).unwrap();
        for group in inst.groups(s) {
            out.push_str(" {");
            for &i in group {
                write!(out, " {}", inst.student_id(i)).unwrap();
            }
            out.push_str(" }");
        }
        out.push('\n');
        write!(out, "within {} :", inst.school_id(s)).unwrap();
        for &i in inst.within_order(s) {
            write!(out, " {}", inst.student_id(i)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parse a match file against an instance. The result is total and
/// capacity-respecting; `coalition` and `kind` lines are skipped so
/// certificate files replay directly.
pub fn parse_match(text: &str, inst: &Instance) -> Result<Match, ParseError> {
    let mut m = Match::empty(inst.n_students());
    let mut load = vec![0usize; inst.n_schools()];
    for (line, toks) in tokens(text) {
        match toks[0] {
            "coalition" | "kind" => continue,
            "match" => {
                if toks.len() != 4 || toks[2] != ":" {
                    return Err(syntax(line, "expected `match <student> : <school|->`"));
                }
                let Some(i) = inst.find_student(toks[1]) else {
                    return Err(syntax(line, format!("unknown student `{}`", toks[1])));
                };
                if m.get(i).is_some() {
                    return Err(syntax(
                        line,
                        format!("student `{}` assigned twice", toks[1]),
                    ));
                }
                if toks[3] == "-" {
                    m.set(i, Assigned::Unmatched);
                } else {
                    let Some(s) = inst.find_school(toks[3]) else {
                        return Err(syntax(line, format!("unknown school `{}`", toks[3])));
                    };
                    load[s] += 1;
                    if load[s] > inst.capacity(s) {
                        return Err(syntax(
                            line,
                            format!(
                                "school `{}` is over its capacity of {}",
                                toks[3],
                                inst.capacity(s)
                            ),
                        ));
                    }
                    m.set(i, Assigned::School(s));
                }
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    for i in 0..inst.n_students() {
        if m.get(i).is_none() {
            return Err(ParseError::Incomplete {
                message: format!("student `{}` has no match line", inst.student_id(i)),
            });
        }
    }
    debug_assert!(is_valid_match(inst, &m));
    Ok(m)
}

pub fn serialize_match(inst: &Instance, m: &Match) -> String {
    let mut out = String::new();
    for i in 0..inst.n_students() {
        match m.assigned(i) {
            Assigned::School(s) => {
                writeln!(out, "match {} : {}", inst.student_id(i), inst.school_id(s)).unwrap()
            }
            Assigned::Unmatched => writeln!(out, "match {} : -", inst.student_id(i)).unwrap(),
        }
    }
    out
}

/// The pieces of a certificate file: kind, coalition, alternative match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateParts {
    pub kind: BlockKind,
    pub members: Vec<usize>,
    pub alt_match: Match,
}

pub fn parse_certificate(text: &str, inst: &Instance) -> Result<CertificateParts, ParseError> {
    let alt_match = parse_match(text, inst)?;
    let mut kind = None;
    let mut members: Option<Vec<usize>> = None;
    for (line, toks) in tokens(text) {
        match toks[0] {
            "kind" => {
                if toks.len() != 3 || toks[1] != ":" {
                    return Err(syntax(line, "expected `kind : between|within|efficient`"));
                }
                kind = Some(match toks[2] {
                    "between" => BlockKind::Between,
                    "within" => BlockKind::Within,
                    "efficient" => BlockKind::Efficient,
                    other => return Err(syntax(line, format!("unknown kind `{other}`"))),
                });
            }
            "coalition" => {
                if toks.len() < 3 || toks[1] != ":" {
                    return Err(syntax(line, "expected `coalition : <student>+`"));
                }
                let mut list = Vec::new();
                for &id in &toks[2..] {
                    match inst.find_student(id) {
                        Some(i) => list.push(i),
                        None => return Err(syntax(line, format!("unknown student `{id}`"))),
                    }
                }
                members = Some(list);
            }
            _ => continue,
        }
    }
    match (kind, members) {
        (Some(kind), Some(mut members)) => {
            members.sort_unstable();
            members.dedup();
            Ok(CertificateParts {
                kind,
                members,
                alt_match,
            })
        }
        _ => Err(ParseError::Incomplete {
            message: "certificate needs both `kind` and `coalition` lines".into(),
        }),
    }
}

pub fn serialize_certificate(inst: &Instance, cert: &BlockCertificate) -> String {
    let mut out = String::new();
    let kind = match cert.kind {
        BlockKind::Between => "between",
        BlockKind::Within => "within",
        BlockKind::Efficient => "efficient",
    };
    writeln!(out, "kind : {kind}").unwrap();
    out.push_str("coalition :");
    for &i in &cert.coalition.members {
        write!(out, " {}", inst.student_id(i)).unwrap();
    }
    out.push('\n');
    out.push_str(&serialize_match(inst, &cert.alt_match));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{find_between_block, verify_certificate};
    use crate::fixtures;
    use crate::generator::{generate_instance, GeneratorParams};
    use proptest::prelude::*;

    #[test]
    fn ex1_text_parses_to_six_by_six() {
        let inst = parse_instance(fixtures::EX1_TEXT).unwrap();
        assert_eq!(inst.n_students(), 6);
        assert_eq!(inst.n_schools(), 6);
    }

    #[test]
    fn instance_round_trip() {
        for inst in [
            fixtures::ex1(),
            fixtures::ex1_strict(),
            fixtures::ex1_coarse(),
            fixtures::ex2(),
        ] {
            let text = serialize_instance(&inst);
            assert_eq!(parse_instance(&text).unwrap(), inst);
        }
    }

    #[test]
    fn partition_errors_carry_the_between_line() {
        // Drop student 3 from school b's lowest group in the ex1 text.
        let text = fixtures::EX1_TEXT.replace(
            "between b : { 1 2 } { 3 1' 2' 3' }",
            "between b : { 1 2 } { 1' 2' 3' }",
        );
        let expected_line = text
            .lines()
            .position(|l| l.starts_with("between b"))
            .unwrap()
            + 1;
        match parse_instance(&text) {
            Err(ParseError::Invalid(errors)) => {
                let hit = errors
                    .iter()
                    .find(|e| {
                        matches!(&e.error, InstanceError::PartitionError { school, .. } if school == "b")
                    })
                    .expect("partition error");
                assert_eq!(hit.line, Some(expected_line));
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_their_line() {
        let err = parse_instance("students x\nschool y capacity one\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                message: "bad capacity `one`".into()
            }
        );
    }

    #[test]
    fn match_round_trip_and_errors() {
        let inst = fixtures::ex1();
        let uc = fixtures::ex1_final_match(&inst);
        let text = serialize_match(&inst, &uc);
        assert_eq!(parse_match(&text, &inst).unwrap(), uc);

        let dup = "match 1 : a\nmatch 1 : b\n";
        assert!(matches!(
            parse_match(dup, &inst),
            Err(ParseError::Syntax { line: 2, .. })
        ));

        let unknown = "match zz : a\n";
        assert!(matches!(
            parse_match(unknown, &inst),
            Err(ParseError::Syntax { line: 1, .. })
        ));

        let over = "match 1 : a\nmatch 2 : a\n";
        assert!(matches!(
            parse_match(over, &inst),
            Err(ParseError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn certificate_round_trip_and_replay() {
        let inst = fixtures::ex1();
        let rtz = fixtures::ex1_single_group_match(&inst);
        let cert = find_between_block(&inst, &rtz).unwrap();
        let text = serialize_certificate(&inst, &cert);

        let parts = parse_certificate(&text, &inst).unwrap();
        assert_eq!(parts.kind, cert.kind);
        assert_eq!(parts.members, cert.coalition.members);
        assert_eq!(parts.alt_match, cert.alt_match);

        // The same file is readable as a plain match.
        let replayed = parse_match(&text, &inst).unwrap();
        assert_eq!(replayed, cert.alt_match);
        assert!(verify_certificate(&inst, &cert, &rtz));
    }

    proptest! {
        #[test]
        fn generated_instances_survive_the_round_trip(seed in any::<u64>()) {
            let n = 1 + (seed % 6) as usize;
            let m = 1 + (seed % 5) as usize;
            let params = GeneratorParams {
                seed,
                n_students: n,
                n_schools: m,
                capacity_range: (1, 3),
                list_length_range: (0, m),
                groups_per_school_range: (1, n),
            };
            let inst = generate_instance(&params).unwrap();
            let text = serialize_instance(&inst);
            prop_assert_eq!(parse_instance(&text).unwrap(), inst);
        }
    }
}
