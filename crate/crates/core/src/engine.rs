//! LZ78 factorization of an SLP-compressed text.
//!
//! The LZ78 trie is grown as marked nodes inside a suffix tree of the
//! window strings. For each factor start `p`, the window locator finds the
//! boundary string holding the text from `p`, the suffix-tree leaf for that
//! suffix gives a root path spelling the upcoming text, and its nearest
//! marked ancestor is the longest previous factor that prefixes it.

use std::collections::HashSet;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::access::{AccessError, AccessIndex};
use crate::lz77::{lz77_to_slp, Lz77Error, Lz77Factorization};
use crate::lz78::{
    check_length_bounds, choose_sentinel, factorize_naive, verify_factorization, Lz78Factorization,
    Lz78Pair,
};
use crate::slp::{compute_stats, Rule, SlpGrammar, VariableStats};
use crate::suffix_tree::{
    build_gst, build_st_of_trie, check_structure, source_starts, NodeId, PositionHandle,
    SuffixTree, TreeError,
};
use crate::window::{
    build_overlap_trie, build_windows, compute_alpha, window_length, DecompStats, OverlapTrie,
    WindowError, WindowSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Generalized suffix tree of the window strings.
    Gst,
    /// Suffix tree of the overlap trie.
    Trie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fixed,
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub backend: Backend,
    pub mode: Mode,
    pub verify: bool,
    /// Byte range to draw a sentinel from when the last character recurs.
    /// `None` factorizes the text as is.
    pub sentinel: Option<(u8, u8)>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            backend: Backend::Gst,
            mode: Mode::Fixed,
            verify: false,
            sentinel: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Access(#[from] AccessError),
    #[error(transparent)]
    Lz77(#[from] Lz77Error),
    #[error("no byte in {lo:#04x}..={hi:#04x} is free to serve as a sentinel")]
    NoSentinel { lo: u8, hi: u8 },
    #[error("verification failed at factor {factor}: {msg}")]
    Verify { factor: usize, msg: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub access_ms: f64,
    pub index_ms: f64,
    pub factorize_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    #[serde(skip)]
    pub factorization: Lz78Factorization,
    pub m: u64,
    pub longest: u64,
    pub rebuilds: u32,
    /// Window statistics of the last index built (none on fallback).
    pub stats: Option<DecompStats>,
    /// The text was expanded and factorized directly.
    pub fallback: bool,
    pub sentinel: Option<u8>,
    /// Largest suffix-tree size reached, overlay nodes included.
    pub peak_tree_nodes: u64,
    /// Overlap-trie size (trie backend).
    pub trie_nodes: u64,
    pub timings: Timings,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Suffix index over windows of one length, with the lookups the main loop needs.
struct WindowIndex {
    c: u64,
    ws: WindowSet,
    stats: DecompStats,
    tree: SuffixTree,
    trie: Option<OverlapTrie>,
    /// Leaf by key: global suffix start (gst) or trie node (trie).
    leaf_of: Vec<NodeId>,
    entry_start: Vec<u32>,
}

impl WindowIndex {
    fn build(
        g: &SlpGrammar,
        st: &VariableStats,
        c: u64,
        cfg: &EngineConfig,
    ) -> Result<Self, EngineError> {
        let ws = build_windows(g, st, c);
        if ws.is_empty() {
            return Err(WindowError::NoWindows { c }.into());
        }
        let stats = compute_alpha(g, st, &ws)?;
        let (tree, trie, entry_start) = match cfg.backend {
            Backend::Gst => {
                let refs: Vec<&[u8]> = ws.entries.iter().map(|e| &e.t[..]).collect();
                (build_gst(&refs), None, source_starts(&refs))
            }
            Backend::Trie => {
                let trie = build_overlap_trie(g, st, &ws, stats.n_alpha)?;
                (build_st_of_trie(&trie), Some(trie), Vec::new())
            }
        };
        let keys = match &trie {
            Some(t) => t.parent.len(),
            None => ws.entries.iter().map(|e| e.t.len() + 1).sum(),
        };
        if cfg.verify {
            check_structure(&tree).map_err(|msg| EngineError::Verify { factor: 0, msg })?;
        }
        let mut leaf_of = vec![0 as NodeId; keys];
        for v in 0..tree.original_count() as NodeId {
            if tree.is_leaf(v) {
                leaf_of[tree.leaf_key(v) as usize] = v;
            }
        }
        Ok(WindowIndex {
            c,
            ws,
            stats,
            tree,
            trie,
            leaf_of,
            entry_start,
        })
    }

    /// Leaf spelling the text from `p`, and the window string and offset
    /// holding that text.
    fn locate(&self, acc: &AccessIndex, p: u64) -> Result<(NodeId, usize, usize), EngineError> {
        let (j, q) = acc.locate_suffix(p, self.c)?;
        let entry = self.ws.index[j as usize] as usize;
        let leaf = match &self.trie {
            None => self.leaf_of[(self.entry_start[entry] as u64 + q - 1) as usize],
            Some(trie) => {
                let rem = acc.text_len() - p + 1;
                let node = if rem < self.c {
                    trie.base[rem as usize]
                } else {
                    trie.window_node(j, q)
                };
                self.leaf_of[node as usize]
            }
        };
        Ok((leaf, entry, q as usize - 1))
    }

    fn node_count(&self) -> u64 {
        self.tree.node_count() as u64
    }
}

/// Marked nodes of the current index, by factor id (0 is the root).
struct Embedding {
    node_of: Vec<NodeId>,
    fid_of: Vec<u32>,
}

impl Embedding {
    fn new() -> Self {
        Embedding {
            node_of: vec![0],
            fid_of: vec![0],
        }
    }

    fn add(&mut self, tree: &mut SuffixTree, h: PositionHandle) -> Result<NodeId, TreeError> {
        let v = tree.insert_overlay_node(h);
        tree.mark(v)?;
        if self.fid_of.len() < tree.node_count() {
            self.fid_of.resize(tree.node_count(), 0);
        }
        self.fid_of[v as usize] = self.node_of.len() as u32;
        self.node_of.push(v);
        Ok(v)
    }

    /// Rebuilds the marks of `pairs` in a fresh tree, each factor one
    /// symbol below its parent.
    fn replay(tree: &mut SuffixTree, pairs: &[Lz78Pair]) -> Result<Self, EngineError> {
        let mut e = Embedding::new();
        for (i, p) in pairs.iter().enumerate() {
            let from = PositionHandle::at(e.node_of[p.parent as usize]);
            let h = tree
                .descend_by_sym(from, p.ch as u32)
                .ok_or_else(|| EngineError::Verify {
                    factor: i + 1,
                    msg: "factor missing from rebuilt index".into(),
                })?;
            e.add(tree, h)?;
        }
        Ok(e)
    }
}

fn last_char_recurs(g: &SlpGrammar, st: &VariableStats, acc: &AccessIndex) -> bool {
    let last = acc.char_at(g.text_len()).expect("non-empty text");
    let count: u64 = g
        .rules()
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == Rule::Terminal(last))
        .map(|(i, _)| st.vocc[i])
        .sum();
    count > 1
}

fn finish_report(
    text_len: u64,
    pairs: Vec<Lz78Pair>,
    cfg: &EngineConfig,
    expand: impl FnOnce() -> Vec<u8>,
) -> Result<(Lz78Factorization, u64), EngineError> {
    let f = Lz78Factorization { pairs };
    check_length_bounds(text_len, &f).map_err(|msg| EngineError::Verify {
        factor: f.len(),
        msg,
    })?;
    if cfg.verify && text_len <= 1 << 22 {
        verify_factorization(&expand(), &f).map_err(|v| EngineError::Verify {
            factor: v.factor_index(),
            msg: v.to_string(),
        })?;
    }
    let longest = f.longest();
    Ok((f, longest))
}

/// LZ78 factorization of `val(g)`, following `cfg.mode`.
pub fn factorize(g: &SlpGrammar, cfg: &EngineConfig) -> Result<FactorizationReport, EngineError> {
    match cfg.mode {
        Mode::Fixed => factorize_slp(g, cfg),
        Mode::Doubling => factorize_doubling(g, cfg),
    }
}

fn prepare(
    g: &SlpGrammar,
    cfg: &EngineConfig,
) -> Result<(SlpGrammar, VariableStats, AccessIndex, Option<u8>), EngineError> {
    let st = compute_stats(g);
    let acc = AccessIndex::new(g, &st);
    if let Some((lo, hi)) = cfg.sentinel {
        if last_char_recurs(g, &st, &acc) {
            let s = choose_sentinel(&g.alphabet(), (lo, hi))
                .ok_or(EngineError::NoSentinel { lo, hi })?;
            let g2 = g.with_trailing(s);
            let st2 = compute_stats(&g2);
            let acc2 = AccessIndex::new(&g2, &st2);
            return Ok((g2, st2, acc2, Some(s)));
        }
    }
    Ok((g.clone(), st, acc, None))
}

fn fallback(
    g: &SlpGrammar,
    cfg: &EngineConfig,
    sentinel: Option<u8>,
    timings: Timings,
) -> Result<FactorizationReport, EngineError> {
    let t = Instant::now();
    let text = g.expand();
    let f = factorize_naive(&text);
    let (factorization, longest) = finish_report(g.text_len(), f.pairs, cfg, || text.clone())?;
    Ok(FactorizationReport {
        m: factorization.len() as u64,
        factorization,
        longest,
        rebuilds: 0,
        stats: None,
        fallback: true,
        sentinel,
        peak_tree_nodes: 0,
        trie_nodes: 0,
        timings: Timings {
            factorize_ms: ms(t),
            ..timings
        },
    })
}

/// Outcome of trying to extend the factorization by one factor.
enum Step {
    Emitted(u64),
    Finished,
    Outgrown,
}

struct Run<'a> {
    acc: &'a AccessIndex,
    cfg: &'a EngineConfig,
    n: u64,
    pairs: Vec<Lz78Pair>,
    seen: HashSet<(u32, u8)>,
}

impl Run<'_> {
    fn step(
        &mut self,
        idx: &mut WindowIndex,
        emb: &mut Embedding,
        p: u64,
        limit: Option<u64>,
    ) -> Result<Step, EngineError> {
        let rem = self.n - p + 1;
        let (w, entry, off) = idx.locate(self.acc, p)?;
        let x = idx.tree.nma(w);
        let d = idx.tree.depth(x) as u64;
        let fx = emb.fid_of[x as usize];
        if d == rem {
            self.pairs.push(self.pairs[fx as usize - 1]);
            return Ok(Step::Finished);
        }
        if let Some(l) = limit {
            if d + 1 >= l && d + 1 < rem {
                return Ok(Step::Outgrown);
            }
        }
        let t = &idx.ws.entries[entry].t;
        let i = off + d as usize;
        if i >= t.len() {
            return Err(EngineError::Verify {
                factor: self.pairs.len() + 1,
                msg: format!(
                    "factor of length {} exceeds the window length {}",
                    d + 1,
                    idx.c
                ),
            });
        }
        let ch = t[i];
        if self.cfg.verify && !self.seen.insert((fx, ch)) {
            return Err(EngineError::Verify {
                factor: self.pairs.len() + 1,
                msg: format!("factor {fx} extended by {ch:#04x} was already emitted"),
            });
        }
        let h = idx.tree.descend_one(PositionHandle::at(x), w)?;
        emb.add(&mut idx.tree, h)?;
        self.pairs.push(Lz78Pair { parent: fx, ch });
        Ok(Step::Emitted(d + 1))
    }
}

/// Fixed window length `c = window_length(N)`.
pub fn factorize_slp(
    g: &SlpGrammar,
    cfg: &EngineConfig,
) -> Result<FactorizationReport, EngineError> {
    let t0 = Instant::now();
    let (g, st, acc, sentinel) = prepare(g, cfg)?;
    let mut timings = Timings {
        access_ms: ms(t0),
        ..Timings::default()
    };
    let n = g.text_len();
    if n < 3 {
        return fallback(&g, cfg, sentinel, timings);
    }
    let c = window_length(n);
    let t1 = Instant::now();
    let mut idx = match WindowIndex::build(&g, &st, c, cfg) {
        Ok(idx) => idx,
        Err(EngineError::Window(WindowError::NoWindows { .. })) => {
            return fallback(&g, cfg, sentinel, timings)
        }
        Err(e) => return Err(e),
    };
    timings.index_ms = ms(t1);
    let t2 = Instant::now();
    let mut emb = Embedding::new();
    let mut run = Run {
        acc: &acc,
        cfg,
        n,
        pairs: Vec::new(),
        seen: HashSet::new(),
    };
    let mut p = 1;
    while p <= n {
        match run.step(&mut idx, &mut emb, p, None)? {
            Step::Emitted(len) => p += len,
            Step::Finished | Step::Outgrown => break,
        }
    }
    timings.factorize_ms = ms(t2);
    let peak = idx.node_count();
    let trie_nodes = idx.trie.as_ref().map_or(0, |t| t.node_count());
    let (factorization, longest) = finish_report(n, run.pairs, cfg, || g.expand())?;
    Ok(FactorizationReport {
        m: factorization.len() as u64,
        factorization,
        longest,
        rebuilds: 0,
        stats: Some(idx.stats),
        fallback: false,
        sentinel,
        peak_tree_nodes: peak,
        trie_nodes,
        timings,
    })
}

/// Window length starting at 2 and doubled whenever a factor would reach it.
/// The random-access index is built once; after each rebuild the factors
/// found so far are re-embedded from their parents.
pub fn factorize_doubling(
    g: &SlpGrammar,
    cfg: &EngineConfig,
) -> Result<FactorizationReport, EngineError> {
    let t0 = Instant::now();
    let (g, st, acc, sentinel) = prepare(g, cfg)?;
    let mut timings = Timings {
        access_ms: ms(t0),
        ..Timings::default()
    };
    let n = g.text_len();
    if n < 3 {
        return fallback(&g, cfg, sentinel, timings);
    }
    let mut l = 2u64;
    let t1 = Instant::now();
    let mut idx = WindowIndex::build(&g, &st, l, cfg)?;
    let mut index_ms = ms(t1);
    let mut emb = Embedding::new();
    let mut peak = 0u64;
    let mut trie_nodes = 0u64;
    let mut rebuilds = 0u32;
    let mut run = Run {
        acc: &acc,
        cfg,
        n,
        pairs: Vec::new(),
        seen: HashSet::new(),
    };
    let t2 = Instant::now();
    let mut p = 1;
    while p <= n {
        match run.step(&mut idx, &mut emb, p, Some(l))? {
            Step::Emitted(len) => p += len,
            Step::Finished => break,
            Step::Outgrown => {
                peak = peak.max(idx.node_count());
                trie_nodes = trie_nodes.max(idx.trie.as_ref().map_or(0, |t| t.node_count()));
                l = (2 * l).min(n);
                rebuilds += 1;
                let t = Instant::now();
                idx = WindowIndex::build(&g, &st, l, cfg)?;
                emb = Embedding::replay(&mut idx.tree, &run.pairs)?;
                index_ms += ms(t);
            }
        }
    }
    peak = peak.max(idx.node_count());
    trie_nodes = trie_nodes.max(idx.trie.as_ref().map_or(0, |t| t.node_count()));
    timings.index_ms = index_ms;
    timings.factorize_ms = ms(t2) - index_ms;
    let (factorization, longest) = finish_report(n, run.pairs, cfg, || g.expand())?;
    Ok(FactorizationReport {
        m: factorization.len() as u64,
        factorization,
        longest,
        rebuilds,
        stats: Some(idx.stats),
        fallback: false,
        sentinel,
        peak_tree_nodes: peak,
        trie_nodes,
        timings,
    })
}

/// Upper limit on doubling rebuilds for a longest factor of length `l`.
pub fn rebuild_bound(l: u64) -> u32 {
    64 - l.saturating_sub(1).leading_zeros() + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ncd {
    pub m_x: u64,
    pub m_y: u64,
    pub m_xy: u64,
    pub value: f64,
}

/// Normalized compression distance with LZ78 factor counts as the
/// compressor: `(C(xy) - min(C(x), C(y))) / max(C(x), C(y))`. The
/// concatenation is one extra rule over the two grammars.
pub fn ncd_lz78(gx: &SlpGrammar, gy: &SlpGrammar, cfg: &EngineConfig) -> Result<Ncd, EngineError> {
    let m_x = factorize(gx, cfg)?.m;
    let m_y = factorize(gy, cfg)?.m;
    let m_xy = factorize(&gx.concat(gy), cfg)?.m;
    let (lo, hi) = (m_x.min(m_y), m_x.max(m_y));
    Ok(Ncd {
        m_x,
        m_y,
        m_xy,
        value: (m_xy as f64 - lo as f64) / hi as f64,
    })
}

/// LZ78 factorization of the text encoded by an LZ77 parse, through its
/// balanced grammar.
pub fn lz77_to_lz78(
    z: &Lz77Factorization,
    cfg: &EngineConfig,
) -> Result<FactorizationReport, EngineError> {
    let g = lz77_to_slp(z)?;
    factorize(&g, cfg)
}
