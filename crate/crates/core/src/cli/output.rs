//! Result files.

use crate::experiments::{worst_case_regret, RegretRow};
use crate::sde::TrajectoryLog;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const REGRET_HEADER: &str = "a,b,strategy,mean_cost,stderr,ecost_opt,mreg,mreg_stderr,flags";
pub const LEMMA_HEADER: &str = "lemma,param_json,estimate,stderr,n";

pub use crate::sde::fmt_f64;

/// JSON number, or the strings `inf`, `-inf`, `nan`.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(fmt_f64(x))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.flush()
}

pub fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    write_text(path, &s)
}

pub fn write_trajectory(path: &Path, log: &TrajectoryLog) -> std::io::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    log.write_csv(&mut f)?;
    f.flush()
}

pub fn regret_csv(rows: &[RegretRow]) -> String {
    let mut s = String::from(REGRET_HEADER);
    s.push('\n');
    for r in rows {
        let fields = [
            fmt_f64(r.a),
            fmt_f64(r.b),
            csv_field(&r.strategy),
            fmt_f64(r.mc_cost.mean),
            fmt_f64(r.mc_cost.stderr),
            fmt_f64(r.ecost_opt),
            fmt_f64(r.mreg),
            fmt_f64(r.mreg_stderr),
            csv_field(&r.flags),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

/// Worst case per `a` and strategy, in sweep order.
pub fn regret_summary(rows: &[RegretRow]) -> Value {
    let mut a_order: Vec<f64> = Vec::new();
    for r in rows {
        if !a_order.iter().any(|a| a.to_bits() == r.a.to_bits()) {
            a_order.push(r.a);
        }
    }
    let mut worst = Vec::new();
    for a in a_order {
        let sub: Vec<RegretRow> = rows.iter().filter(|r| r.a.to_bits() == a.to_bits()).cloned().collect();
        if let Ok(ws) = worst_case_regret(&sub) {
            for w in ws {
                worst.push(json!({
                    "a": json_f64(a),
                    "strategy": w.strategy,
                    "max_mreg": json_f64(w.max_mreg),
                    "argmax_b": json_f64(w.argmax_b),
                }));
            }
        }
    }
    let flagged = rows.iter().filter(|r| !r.flags.is_empty()).count();
    json!({ "rows": rows.len(), "flagged_rows": flagged, "worst_case": worst })
}

pub struct LemmaRow {
    pub lemma: String,
    pub params: Value,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
}

pub fn lemma_csv(rows: &[LemmaRow]) -> String {
    let mut s = String::from(LEMMA_HEADER);
    s.push('\n');
    for r in rows {
        let fields = [
            csv_field(&r.lemma),
            csv_field(&r.params.to_string()),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            r.n.to_string(),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn lemma_summary(rows: &[LemmaRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "lemma": r.lemma,
                    "params": r.params,
                    "estimate": json_f64(r.estimate),
                    "stderr": json_f64(r.stderr),
                    "n": r.n,
                })
            })
            .collect(),
    )
}
