//! Thin command line front end over the library.
//!
//! Exit codes: `verify` uses 0 for membership, 1 for a refuted match
//! (certificate on stdout) and 2 when the search budget ran out. Every
//! subcommand uses 3 for usage, I/O and parse errors.

use std::process::ExitCode;

use dattc::core::{
    check_fair, fair_violations, is_in_efficient_core, is_in_unified_core, CoreVerdict, FairVerdict,
};
use dattc::format::{
    parse_instance, parse_match, serialize_certificate, serialize_instance, serialize_match,
};
use dattc::generator::{generate_instance, redraw_within_lotteries, GeneratorParams};
use dattc::model::Instance;
use dattc::report::compare_report;
use dattc::run_pipeline;

const USAGE: &str = "\
usage:
  dattc solve <instance> [--stage da|da-ttc] [--trace] [-o FILE]
  dattc verify <instance> <match> --core unified|fair|efficient [--budget N]
  dattc gen --seed S --students N --schools M [--capacities LO:HI]
            [--list-len LO:HI] [--groups LO:HI] [-o FILE]
  dattc compare <instance> [--trials N] [--budget N] [--json]

Matches print as `match <student> : <school|->` lines. `verify` exits 0
when the match belongs to the requested core, 1 with a certificate when
it does not, and 2 when the budget was exhausted before a verdict.";

const DEFAULT_BUDGET: u64 = 5_000_000;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match args.first().map(String::as_str) {
        Some("solve") => cmd_solve(&args[1..]),
        Some("verify") => cmd_verify(&args[1..]),
        Some("gen") => cmd_gen(&args[1..]),
        Some("compare") => cmd_compare(&args[1..]),
        Some("--help") | Some("-h") | None => {
            println!("{USAGE}");
            Ok(0)
        }
        Some(other) => Err(format!("unknown subcommand `{other}`\n{USAGE}")),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

fn load_instance(path: &str) -> Result<Instance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read `{path}`: {e}"))?;
    parse_instance(&text).map_err(|e| format!("`{path}`: {e}"))
}

fn emit(output: Option<&str>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| format!("cannot write `{path}`: {e}"))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn take_value<'a>(args: &'a [String], k: &mut usize, flag: &str) -> Result<&'a str, String> {
    *k += 1;
    args.get(*k)
        .map(String::as_str)
        .ok_or_else(|| format!("`{flag}` needs a value"))
}

fn parse_range(text: &str, flag: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("`{flag}` expects LO:HI, got `{text}`"))?;
    let lo = lo
        .parse()
        .map_err(|_| format!("bad `{flag}` bound `{lo}`"))?;
    let hi = hi
        .parse()
        .map_err(|_| format!("bad `{flag}` bound `{hi}`"))?;
    Ok((lo, hi))
}

fn cmd_solve(args: &[String]) -> Result<u8, String> {
    let mut instance_path = None;
    let mut stage = "da-ttc";
    let mut trace = false;
    let mut output = None;
    let mut k = 0;
    while k < args.len() {
        match args[k].as_str() {
            "--stage" => {
                stage = take_value(args, &mut k, "--stage")?;
                if stage != "da" && stage != "da-ttc" {
                    return Err(format!("`--stage` must be da or da-ttc, got `{stage}`"));
                }
            }
            "--trace" => trace = true,
            "-o" | "--output" => output = Some(take_value(args, &mut k, "-o")?),
            flag if flag.starts_with('-') => return Err(format!("unknown flag `{flag}`")),
            path if instance_path.is_none() => instance_path = Some(path),
            extra => return Err(format!("unexpected argument `{extra}`")),
        }
        k += 1;
    }
    let inst = load_instance(instance_path.ok_or("solve needs an instance file")?)?;
    let run = run_pipeline(&inst);
    let chosen = if stage == "da" {
        &run.stage1
    } else {
        &run.stage2
    };

    if trace {
        let mut report = String::new();
        report.push_str("stage 1 (deferred acceptance)\n");
        report.push_str(&run.da_trace.render(&inst));
        if stage == "da-ttc" {
            report.push_str("stage 2 (restricted trading)\n");
            report.push_str(&run.ttc_trace.render(&inst));
        }
        // Comment form keeps the combined output a parseable match file.
        for line in report.lines() {
            println!("# {line}");
        }
    }
    emit(output, &serialize_match(&inst, chosen))?;
    Ok(0)
}

fn cmd_verify(args: &[String]) -> Result<u8, String> {
    let mut positional = Vec::new();
    let mut core = None;
    let mut budget = DEFAULT_BUDGET;
    let mut k = 0;
    while k < args.len() {
        match args[k].as_str() {
            "--core" => core = Some(take_value(args, &mut k, "--core")?.to_string()),
            "--budget" => {
                let v = take_value(args, &mut k, "--budget")?;
                budget = v
                    .parse()
                    .map_err(|_| format!("bad `--budget` value `{v}`"))?;
            }
            flag if flag.starts_with('-') => return Err(format!("unknown flag `{flag}`")),
            path => positional.push(path.to_string()),
        }
        k += 1;
    }
    let [instance_path, match_path] = positional.as_slice() else {
        return Err("verify needs an instance file and a match file".into());
    };
    let inst = load_instance(instance_path)?;
    let match_text = std::fs::read_to_string(match_path)
        .map_err(|e| format!("cannot read `{match_path}`: {e}"))?;
    let m = parse_match(&match_text, &inst).map_err(|e| format!("`{match_path}`: {e}"))?;

    let verdict = match core.as_deref() {
        Some("unified") => is_in_unified_core(&inst, &m, budget),
        Some("efficient") => is_in_efficient_core(&inst, &m, budget),
        Some("fair") => {
            return Ok(match check_fair(&inst, &m) {
                FairVerdict::Fair => {
                    println!("fair");
                    0
                }
                FairVerdict::NotIndividuallyRational { student } => {
                    println!("kind : fair-violation");
                    println!("student : {}", inst.student_id(student));
                    println!("school : -");
                    1
                }
                FairVerdict::Violation { student, school } => {
                    println!("kind : fair-violation");
                    println!("student : {}", inst.student_id(student));
                    println!("school : {}", inst.school_id(school));
                    for (i, s) in fair_violations(&inst, &m).into_iter().skip(1) {
                        println!("# also ({}, {})", inst.student_id(i), inst.school_id(s));
                    }
                    1
                }
            });
        }
        Some(other) => return Err(format!("unknown core `{other}`")),
        None => return Err("verify needs `--core unified|fair|efficient`".into()),
    };
    Ok(match verdict {
        CoreVerdict::In => {
            println!("in");
            0
        }
        CoreVerdict::Out(cert) => {
            print!("{}", serialize_certificate(&inst, &cert));
            1
        }
        CoreVerdict::Unknown { budget } => {
            println!("unknown (budget {budget} exhausted)");
            2
        }
    })
}

fn cmd_gen(args: &[String]) -> Result<u8, String> {
    let mut seed = None;
    let mut students = None;
    let mut schools = None;
    let mut capacities = (1, 2);
    let mut list_len = None;
    let mut groups = None;
    let mut output = None;
    let mut k = 0;
    while k < args.len() {
        match args[k].as_str() {
            "--seed" => {
                let v = take_value(args, &mut k, "--seed")?;
                seed = Some(v.parse().map_err(|_| format!("bad `--seed` value `{v}`"))?);
            }
            "--students" => {
                let v = take_value(args, &mut k, "--students")?;
                students = Some(
                    v.parse()
                        .map_err(|_| format!("bad `--students` value `{v}`"))?,
                );
            }
            "--schools" => {
                let v = take_value(args, &mut k, "--schools")?;
                schools = Some(
                    v.parse()
                        .map_err(|_| format!("bad `--schools` value `{v}`"))?,
                );
            }
            "--capacities" => {
                capacities = parse_range(take_value(args, &mut k, "--capacities")?, "--capacities")?
            }
            "--list-len" => {
                list_len = Some(parse_range(
                    take_value(args, &mut k, "--list-len")?,
                    "--list-len",
                )?)
            }
            "--groups" => {
                groups = Some(parse_range(
                    take_value(args, &mut k, "--groups")?,
                    "--groups",
                )?)
            }
            "-o" | "--output" => output = Some(take_value(args, &mut k, "-o")?.to_string()),
            flag => return Err(format!("unknown flag `{flag}`")),
        }
        k += 1;
    }
    let n: usize = students.ok_or("gen needs `--students N`")?;
    let m: usize = schools.ok_or("gen needs `--schools M`")?;
    let params = GeneratorParams {
        seed: seed.ok_or("gen needs `--seed S`")?,
        n_students: n,
        n_schools: m,
        capacity_range: capacities,
        list_length_range: list_len.unwrap_or((1.min(m), m)),
        groups_per_school_range: groups.unwrap_or((1, n)),
    };
    let inst = generate_instance(&params).map_err(|e| e.to_string())?;
    emit(output.as_deref(), &serialize_instance(&inst))?;
    Ok(0)
}

fn cmd_compare(args: &[String]) -> Result<u8, String> {
    let mut instance_path = None;
    let mut trials = 0u64;
    let mut budget = DEFAULT_BUDGET;
    let mut json = false;
    let mut k = 0;
    while k < args.len() {
        match args[k].as_str() {
            "--trials" => {
                let v = take_value(args, &mut k, "--trials")?;
                trials = v
                    .parse()
                    .map_err(|_| format!("bad `--trials` value `{v}`"))?;
            }
            "--budget" => {
                let v = take_value(args, &mut k, "--budget")?;
                budget = v
                    .parse()
                    .map_err(|_| format!("bad `--budget` value `{v}`"))?;
            }
            "--json" => json = true,
            flag if flag.starts_with('-') => return Err(format!("unknown flag `{flag}`")),
            path if instance_path.is_none() => instance_path = Some(path),
            extra => return Err(format!("unexpected argument `{extra}`")),
        }
        k += 1;
    }
    let inst = load_instance(instance_path.ok_or("compare needs an instance file")?)?;

    if trials == 0 {
        let report = compare_report(&inst, budget);
        if json {
            println!("{}", report.to_json());
        } else {
            print!("{}", report.render_text());
        }
        return Ok(0);
    }

    // Trial mode re-draws every school's within-group lottery per seed,
    // leaving preferences and group structure alone, to show how much of
    // the outcome rides on the lottery.
    let mut reports = Vec::new();
    for seed in 1..=trials {
        let redrawn = redraw_within_lotteries(&inst, seed);
        reports.push((seed, compare_report(&redrawn, budget)));
    }
    if json {
        let items: Vec<serde_json::Value> = reports
            .iter()
            .map(|(seed, report)| {
                serde_json::json!({
                    "seed": seed,
                    "report": serde_json::from_str::<serde_json::Value>(&report.to_json()).unwrap(),
                })
            })
            .collect();
        let total_improved: usize = reports
            .iter()
            .map(|(_, r)| r.da_ttc.improved_by_stage2)
            .sum();
        let doc = serde_json::json!({
            "trials": trials,
            "mean_improved_by_stage2": total_improved as f64 / trials as f64,
            "runs": items,
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        for (seed, report) in &reports {
            println!("lottery seed {seed}");
            for line in report.render_text().lines() {
                println!("  {line}");
            }
        }
        let total_improved: usize = reports
            .iter()
            .map(|(_, r)| r.da_ttc.improved_by_stage2)
            .sum();
        println!(
            "mean improved by stage 2 over {trials} lotteries: {:.3}",
            total_improved as f64 / trials as f64
        );
    }
    Ok(0)
}
