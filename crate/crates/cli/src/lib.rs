//! Scenario runner for the valuation toolkit: reads TOML scenarios, runs
//! their tasks in order and emits deterministic reports.

pub mod exec;
pub mod report;
pub mod scenario;

use std::time::Instant;

use sha2::{Digest, Sha256};

use report::{mask_timing, Report, Status, TaskReport, REPORT_SCHEMA, TOOL};
use scenario::{parse_scenario, resolve, InputError};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub precision: Option<String>,
    pub horizon: Option<usize>,
    /// Comma-separated task indices or op names.
    pub tasks: Option<String>,
}

fn selected(filter: &Option<String>, index: usize, op: &str) -> bool {
    match filter {
        None => true,
        Some(f) => f.split(',').map(str::trim).any(|p| p == op || p.parse::<usize>().ok() == Some(index)),
    }
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Runs every selected task; task failures are recorded, not raised.
pub fn run_text(text: &str, opts: &RunOptions) -> Result<Report, InputError> {
    let sc = parse_scenario(text)?;
    let r = resolve(&sc, opts.seed, opts.precision.as_deref(), opts.horizon)?;
    let mut tasks = Vec::new();
    for (i, task) in sc.tasks.iter().enumerate() {
        let op = task.spec.op();
        if !selected(&opts.tasks, i, op) {
            continue;
        }
        let start = Instant::now();
        let outcome = exec::run_task(&task.spec, &r, i);
        let time_us = start.elapsed().as_micros() as u64;
        let (status, fields, error) = match (outcome, &task.expect_error) {
            (Ok(f), None) => (Status::Ok, f, None),
            (Ok(f), Some(kind)) => (Status::Error, f, Some(format!("expected {kind} but the task succeeded"))),
            (Err(e), Some(kind)) if e.kind() == kind.as_str() => {
                (Status::Ok, vec![("expected_error".to_string(), e.to_string())], None)
            }
            (Err(e), _) => (Status::Error, Vec::new(), Some(e.to_string())),
        };
        tasks.push(TaskReport { index: i, op: op.to_string(), status, fields, error, time_us });
    }
    Ok(Report {
        schema: REPORT_SCHEMA.to_string(),
        tool: TOOL.to_string(),
        scenario: sc.name.clone(),
        input_digest: digest(text),
        seed: r.seed,
        precision: r.precision.to_string(),
        horizon: r.horizon,
        tasks_filter: opts.tasks.clone(),
        tasks,
        input: text.to_string(),
    })
}

/// Outcome of re-running the inputs echoed in a report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub mismatches: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs the echoed scenario with the recorded settings and compares
/// every evidence line (timing excluded).
pub fn verify_report(text: &str) -> Result<Verification, InputError> {
    let old = Report::parse(text).map_err(InputError)?;
    let mut mismatches = Vec::new();
    if digest(&old.input) != old.input_digest {
        mismatches.push("input_digest does not match the echoed input".to_string());
    }
    let precision = old.precision.trim_start_matches('(').trim_end_matches(')').to_string();
    let opts = RunOptions {
        seed: Some(old.seed),
        precision: Some(precision),
        horizon: Some(old.horizon),
        tasks: old.tasks_filter.clone(),
    };
    let new = run_text(&old.input, &opts)?;
    let a = mask_timing(&old.to_text());
    let b = mask_timing(&new.to_text());
    for (x, y) in a.lines().zip(b.lines()) {
        if x != y {
            mismatches.push(format!("expected `{x}`, recomputed `{y}`"));
        }
    }
    if a.lines().count() != b.lines().count() {
        mismatches.push("report lengths differ".to_string());
    }
    Ok(Verification { mismatches })
}
