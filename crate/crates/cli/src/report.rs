//! Reports: `key = value` lines (text) or JSON (structured).

use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = "valring-report/1";
pub const TOOL: &str = concat!("valring ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskReport {
    pub index: usize,
    pub op: String,
    pub status: Status,
    /// Evidence in emission order.
    pub fields: Vec<(String, String)>,
    pub error: Option<String>,
    pub time_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool: String,
    pub scenario: String,
    pub input_digest: String,
    pub seed: u64,
    pub precision: String,
    pub horizon: usize,
    /// Task filter in effect, if any.
    pub tasks_filter: Option<String>,
    pub tasks: Vec<TaskReport>,
    /// Scenario text as read.
    pub input: String,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.tasks.iter().filter(|t| t.status == Status::Error).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        };
        line("schema", &self.schema);
        line("tool", &self.tool);
        line("scenario", &self.scenario);
        line("input_digest", &self.input_digest);
        line("seed", &self.seed.to_string());
        line("precision", &self.precision);
        line("horizon", &self.horizon.to_string());
        if let Some(f) = &self.tasks_filter {
            line("tasks_filter", f);
        }
        for t in &self.tasks {
            let p = format!("task.{}", t.index);
            line(&format!("{p}.op"), &t.op);
            line(&format!("{p}.status"), if t.status == Status::Ok { "ok" } else { "error" });
            for (k, v) in &t.fields {
                line(&format!("{p}.{k}"), v);
            }
            if let Some(e) = &t.error {
                line(&format!("{p}.error"), e);
            }
            line(&format!("{p}.time_us"), &t.time_us.to_string());
        }
        line("summary.tasks", &self.tasks.len().to_string());
        line("summary.failed", &self.failed().to_string());
        for (i, l) in self.input.lines().enumerate() {
            line(&format!("input.{i:04}"), l);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Reads either format back.
    pub fn parse(text: &str) -> Result<Report, String> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| format!("report parse error: {e}"));
        }
        parse_text(text)
    }
}

/// Replaces every timing value by `*`.
pub fn mask_timing(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for l in text.lines() {
        match l.split_once(" = ") {
            Some((k, _)) if k.ends_with(".time_us") => {
                out.push_str(k);
                out.push_str(" = *");
            }
            _ => match l.trim_start().strip_prefix("\"time_us\": ") {
                Some(rest) => {
                    let indent = &l[..l.len() - l.trim_start().len()];
                    let comma = if rest.ends_with(',') { "," } else { "" };
                    out.push_str(&format!("{indent}\"time_us\": 0{comma}"));
                }
                None => out.push_str(l),
            },
        }
        out.push('\n');
    }
    out
}

fn parse_text(text: &str) -> Result<Report, String> {
    let mut r = Report {
        schema: String::new(),
        tool: String::new(),
        scenario: String::new(),
        input_digest: String::new(),
        seed: 0,
        precision: String::new(),
        horizon: 0,
        tasks_filter: None,
        tasks: Vec::new(),
        input: String::new(),
    };
    for (n, l) in text.lines().enumerate() {
        let err = |m: &str| format!("report line {}: {m}", n + 1);
        let (k, v) = l.split_once(" = ").ok_or_else(|| err("expected `key = value`"))?;
        let v = v.to_string();
        match k {
            "schema" => r.schema = v,
            "tool" => r.tool = v,
            "scenario" => r.scenario = v,
            "input_digest" => r.input_digest = v,
            "seed" => r.seed = v.parse().map_err(|_| err("bad seed"))?,
            "precision" => r.precision = v,
            "horizon" => r.horizon = v.parse().map_err(|_| err("bad horizon"))?,
            "tasks_filter" => r.tasks_filter = Some(v),
            "summary.tasks" | "summary.failed" => {}
            _ if k.starts_with("input.") => {
                r.input.push_str(&v);
                r.input.push('\n');
            }
            _ if k.starts_with("task.") => {
                let rest = &k[5..];
                let (idx, key) = rest.split_once('.').ok_or_else(|| err("bad task key"))?;
                let index: usize = idx.parse().map_err(|_| err("bad task index"))?;
                if r.tasks.last().map_or(true, |t| t.index != index) {
                    r.tasks.push(TaskReport {
                        index,
                        op: String::new(),
                        status: Status::Ok,
                        fields: Vec::new(),
                        error: None,
                        time_us: 0,
                    });
                }
                let t = r.tasks.last_mut().unwrap();
                match key {
                    "op" => t.op = v,
                    "status" => t.status = if v == "ok" { Status::Ok } else { Status::Error },
                    "error" => t.error = Some(v),
                    "time_us" => t.time_us = v.parse().unwrap_or(0),
                    _ => t.fields.push((key.to_string(), v)),
                }
            }
            _ => return Err(err(&format!("unknown key {k:?}"))),
        }
    }
    if r.schema != REPORT_SCHEMA {
        return Err(format!("report schema {:?} is not {REPORT_SCHEMA:?}", r.schema));
    }
    Ok(r)
}
