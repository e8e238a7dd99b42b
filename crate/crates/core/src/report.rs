//! Statistics report shared by the CLI's human and JSON output.

use serde::Serialize;

use crate::engine::{Backend, FactorizationReport, Mode, Timings};
use crate::window::DecompStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub schema: u32,
    #[serde(rename = "N")]
    pub text_len: u64,
    #[serde(rename = "n")]
    pub rules: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub longest: Option<u64>,
    /// LZ77 phrase count, for conversions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    pub c: Option<u64>,
    pub alpha: Option<u64>,
    pub n_alpha: Option<u64>,
    pub total_window_chars: Option<u64>,
    /// The coverage identity was evaluated and held.
    pub coverage_checked: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub rebuilds: u32,
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentinel: Option<u8>,
    pub peak_tree_nodes: u64,
    pub trie_nodes: u64,
    pub timings: Timings,
}

impl StatsReport {
    /// Window statistics only.
    pub fn from_decomp(d: &DecompStats) -> Self {
        StatsReport {
            schema: SCHEMA_VERSION,
            text_len: d.text_len,
            rules: d.rules,
            m: None,
            longest: None,
            r: None,
            c: Some(d.c),
            alpha: Some(d.alpha),
            n_alpha: Some(d.n_alpha),
            total_window_chars: Some(d.total_window_chars),
            coverage_checked: true,
            backend: None,
            mode: None,
            rebuilds: 0,
            fallback: false,
            sentinel: None,
            peak_tree_nodes: 0,
            trie_nodes: 0,
            timings: Timings::default(),
        }
    }

    pub fn from_run(
        text_len: u64,
        rules: u64,
        backend: Backend,
        mode: Mode,
        r: &FactorizationReport,
    ) -> Self {
        let d = r.stats;
        StatsReport {
            schema: SCHEMA_VERSION,
            text_len,
            rules,
            m: Some(r.m),
            longest: Some(r.longest),
            r: None,
            c: d.map(|d| d.c),
            alpha: d.map(|d| d.alpha),
            n_alpha: d.map(|d| d.n_alpha),
            total_window_chars: d.map(|d| d.total_window_chars),
            coverage_checked: d.is_some(),
            backend: Some(backend),
            mode: Some(mode),
            rebuilds: r.rebuilds,
            fallback: r.fallback,
            sentinel: r.sentinel,
            peak_tree_nodes: r.peak_tree_nodes,
            trie_nodes: r.trie_nodes,
            timings: r.timings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `key: value` lines for terminals.
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(&format!("{k:<20}{v}\n"));
        };
        line("N", self.text_len.to_string());
        line("n", self.rules.to_string());
        let opt = |v: Option<u64>| v.map_or("-".to_string(), |v| v.to_string());
        if self.m.is_some() {
            line("m", opt(self.m));
            line("L", opt(self.longest));
        }
        if self.r.is_some() {
            line("r", opt(self.r));
        }
        line("c", opt(self.c));
        line("alpha", opt(self.alpha));
        line("n_alpha", opt(self.n_alpha));
        line("total_window_chars", opt(self.total_window_chars));
        line("coverage_checked", self.coverage_checked.to_string());
        if let (Some(b), Some(m)) = (self.backend, self.mode) {
            line("backend", format!("{b:?}").to_lowercase());
            line("mode", format!("{m:?}").to_lowercase());
            line("rebuilds", self.rebuilds.to_string());
            line("fallback", self.fallback.to_string());
            line("peak_tree_nodes", self.peak_tree_nodes.to_string());
            line("trie_nodes", self.trie_nodes.to_string());
            line(
                "time_ms",
                format!(
                    "access {:.3} index {:.3} factorize {:.3}",
                    self.timings.access_ms, self.timings.index_ms, self.timings.factorize_ms
                ),
            );
        }
        out
    }
}
