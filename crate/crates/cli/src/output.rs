//! Rendering of tables and transcripts as JSON, CSV or aligned text.

use std::fmt::Write as _;

use clap::ValueEnum;
use qsr_core::protocols::ProtocolTranscript;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => number_text(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(number_text(*x)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Shortest text that parses back to the same `f64`; `inf`, `-inf`, `nan` otherwise.
fn number_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

/// Rows under fixed headers.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| (*h).to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Pretty => self.pretty(),
        }
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (h, c) in self.headers.iter().zip(row) {
                    obj.insert(h.clone(), c.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table is serializable");
        s.push('\n');
        s
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    fn pretty(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::text).collect())
            .collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([self.headers[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &[String]| {
            let padded: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, &w)| format!("{s:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, &self.headers);
        for r in &cells {
            line(&mut out, r);
        }
        out
    }
}

/// Column names of the per-step transcript table.
pub const STEP_HEADERS: [&str; 8] = [
    "step",
    "actor",
    "description",
    "qubits_sent",
    "cobits_sent",
    "singlets_consumed",
    "coherent_qubits_out",
    "free",
];

fn free_text(free: Option<bool>) -> &'static str {
    match free {
        Some(true) => "yes",
        Some(false) => "no",
        None => "",
    }
}

fn steps_table(t: &ProtocolTranscript) -> Table {
    let mut table = Table::new(&STEP_HEADERS);
    for (i, s) in t.steps.iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            s.actor.as_str().into(),
            s.description.as_str().into(),
            s.deltas.qubits_sent.into(),
            s.deltas.cobits_sent.into(),
            s.deltas.singlets_consumed.into(),
            s.deltas.coherent_qubits_out.into(),
            free_text(s.free_operation).into(),
        ]);
    }
    table
}

fn counters_json(c: &qsr_core::protocols::ResourceCounters) -> Value {
    json!({
        "qubits_sent": c.qubits_sent,
        "cobits_sent": c.cobits_sent,
        "singlets_consumed": c.singlets_consumed,
        "coherent_qubits_out": c.coherent_qubits_out,
    })
}

/// JSON object of a transcript; snapshots are embedded only when requested.
pub fn transcript_json(t: &ProtocolTranscript, with_snapshots: bool) -> Value {
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            let mut obj = json!({
                "actor": s.actor.as_str(),
                "description": s.description,
                "deltas": counters_json(&s.deltas),
                "free_operation": s.free_operation,
            });
            if with_snapshots {
                if let Some(rho) = &s.snapshot {
                    let state =
                        crate::state_io::write_state(&crate::state_io::State::Mixed(rho.clone()));
                    obj["snapshot"] =
                        serde_json::from_str(&state).expect("state writer emits JSON");
                }
            }
            obj
        })
        .collect();
    let metrics: Map<String, Value> = t
        .metrics
        .iter()
        .map(|(k, v)| (k.clone(), Cell::Num(*v).json()))
        .collect();
    json!({
        "protocol": t.protocol,
        "counters": counters_json(&t.counters),
        "achieved_fidelity": t.achieved_fidelity,
        "metrics": metrics,
        "notes": t.notes,
        "steps": steps,
    })
}

/// JSON: the full transcript. CSV: one row per step. Pretty: a summary then the steps.
pub fn render_transcript(t: &ProtocolTranscript, format: Format, with_snapshots: bool) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&transcript_json(t, with_snapshots))
                .expect("transcript is serializable");
            s.push('\n');
            s
        }
        Format::Csv => steps_table(t).render(Format::Csv),
        Format::Pretty => {
            let mut out = String::new();
            let c = &t.counters;
            let _ = writeln!(out, "protocol: {}", t.protocol);
            let _ = writeln!(
                out,
                "achieved fidelity: {}",
                number_text(t.achieved_fidelity)
            );
            let _ = writeln!(
                out,
                "counters: qubits_sent={} cobits_sent={} singlets_consumed={} coherent_qubits_out={}",
                c.qubits_sent, c.cobits_sent, c.singlets_consumed, c.coherent_qubits_out
            );
            for (k, v) in &t.metrics {
                let _ = writeln!(out, "  {k} = {}", number_text(*v));
            }
            for n in &t.notes {
                let _ = writeln!(out, "note: {n}");
            }
            out.push('\n');
            out.push_str(&steps_table(t).render(Format::Pretty));
            out
        }
    }
}
