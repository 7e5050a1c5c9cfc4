use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSettings {
    pub time_secs: f64,
    pub max_states: Option<usize>,
    pub workers: usize,
}

/// One line of machine-readable output per invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub inputs: Vec<String>,
    pub version: String,
    pub budget: BudgetSettings,
    pub method: Option<String>,
    /// Number of `Voter*` modules in the system, when there are any.
    pub voters: Option<usize>,
    pub verdict: String,
    pub states: Option<usize>,
    pub transitions: Option<u64>,
    pub elapsed_ms: u64,
    #[serde(default)]
    pub diagnostics: Vec<String>,
    #[serde(default)]
    pub details: serde_json::Value,
}

impl RunRecord {
    pub fn new(command: &str, inputs: Vec<String>, budget: BudgetSettings) -> Self {
        RunRecord {
            command: command.to_string(),
            inputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            budget,
            method: None,
            voters: None,
            verdict: String::new(),
            states: None,
            transitions: None,
            elapsed_ms: 0,
            diagnostics: Vec::new(),
            details: serde_json::Value::Null,
        }
    }
}

pub const TIMEOUT: &str = "Timeout";

#[derive(Default)]
struct Group {
    states: Option<usize>,
    transitions: Option<u64>,
    dfs: Option<String>,
    apprx: Option<String>,
}

impl Group {
    fn add(&mut self, r: &RunRecord) {
        if r.states.is_some() {
            self.states = r.states;
            self.transitions = r.transitions;
        }
        let cell = if r.verdict == TIMEOUT {
            "timeout".to_string()
        } else {
            format!("{:.2}/{}", r.elapsed_ms as f64 / 1000.0, r.verdict)
        };
        match r.method.as_deref() {
            Some("dfs") => self.dfs = Some(cell),
            Some("apprx") => self.apprx = Some(cell),
            _ => {}
        }
    }

    fn cells(&self) -> [String; 4] {
        let dash = || "-".to_string();
        [
            self.states.map_or_else(dash, |s| s.to_string()),
            self.transitions.map_or_else(dash, |t| t.to_string()),
            self.dfs.clone().unwrap_or_else(dash),
            self.apprx.clone().unwrap_or_else(dash),
        ]
    }
}

/// Monolithic (`check`) and assume-guarantee (`ag`) results side by side,
/// one row per system size. Later records override earlier ones.
pub fn render_table(records: &[RunRecord]) -> String {
    let mut rows: BTreeMap<Option<usize>, (Group, Group)> = BTreeMap::new();
    for r in records {
        let row = rows.entry(r.voters).or_default();
        match r.command.as_str() {
            "check" => row.0.add(r),
            "ag" => row.1.add(r),
            _ => {}
        }
    }
    let mut lines = vec![
        ["", "monolithic", "", "", "", "assume-guarantee", "", "", ""].map(String::from),
        [
            "V", "#st", "#tr", "DFS", "Apprx", "#st", "#tr", "DFS", "Apprx",
        ]
        .map(String::from),
    ];
    for (v, (mono, ag)) in &rows {
        let mut line = vec![v.map_or_else(|| "-".to_string(), |v| v.to_string())];
        line.extend(mono.cells());
        line.extend(ag.cells());
        lines.push(line.try_into().expect("nine columns"));
    }
    let widths: Vec<usize> = (0..9)
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for l in &lines {
        let cells: Vec<String> = l
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
