//! Window strings around variable boundaries and the shared overlap trie.
//!
//! For a window length `c`, every length-`c` substring of the text lies in
//! the string `t_i` of the variable whose derivation node it stabs: the last
//! `c - 1` characters of the left child followed by the first `c - 1` of the
//! right child. Repeated variables contribute the same windows, which the
//! trie stores only once.

use serde::Serialize;
use thiserror::Error;

use crate::level_ancestor::NIL;
use crate::slp::{Rule, SlpGrammar, VarId, VariableStats};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("coverage identity failed: windows account for {covered} of {n} positions")]
    Coverage { covered: u64, n: u64 },
    #[error("overlap trie has {nodes} nodes but N_alpha is {expected}")]
    TrieSize { nodes: u64, expected: u64 },
    #[error("no variable derives {c} or more characters")]
    NoWindows { c: u64 },
}

/// `max(2, largest c with c(c+1)/2 <= n)`.
pub fn window_length(n: u64) -> u64 {
    let mut c = ((2.0 * n as f64).sqrt()) as u64;
    while c > 0 && c * (c + 1) / 2 > n {
        c -= 1;
    }
    while (c + 1) * (c + 2) / 2 <= n {
        c += 1;
    }
    c.max(2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowEntry {
    pub var: VarId,
    pub t: Vec<u8>,
    /// Characters of `t` taken from the left child.
    pub left_keep: usize,
}

impl WindowEntry {
    /// Number of windows of length `c` starting in the left part.
    pub fn starts(&self, c: u64) -> u64 {
        self.t.len() as u64 + 1 - c
    }
}

#[derive(Debug, Clone)]
pub struct WindowSet {
    pub c: u64,
    pub entries: Vec<WindowEntry>,
    /// Entry index per variable, `NIL` when the variable has none.
    pub index: Vec<u32>,
    /// Last `min(c - 1, N)` characters of the text.
    pub root_suffix: Vec<u8>,
}

impl WindowSet {
    pub fn entry(&self, v: VarId) -> Option<&WindowEntry> {
        let i = self.index[v as usize];
        (i != NIL).then(|| &self.entries[i as usize])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_chars(&self) -> u64 {
        self.entries.iter().map(|e| e.t.len() as u64).sum()
    }
}

/// Windows for every reachable variable deriving at least `c` characters.
pub fn build_windows(g: &SlpGrammar, st: &VariableStats, c: u64) -> WindowSet {
    assert!(c >= 2, "window length must be at least 2");
    let keep = (c - 1) as usize;
    let n = g.size();
    let mut pre: Vec<Vec<u8>> = Vec::with_capacity(n);
    let mut suf: Vec<Vec<u8>> = Vec::with_capacity(n);
    let mut entries = Vec::new();
    let mut index = vec![NIL; n];
    for (i, rule) in g.rules().iter().enumerate() {
        match *rule {
            Rule::Terminal(b) => {
                pre.push(vec![b]);
                suf.push(vec![b]);
            }
            Rule::Pair(l, r) => {
                let (l, r) = (l as usize, r as usize);
                let mut p = pre[l].clone();
                if p.len() < keep {
                    let take = (keep - p.len()).min(pre[r].len());
                    p.extend_from_slice(&pre[r][..take]);
                }
                let s = if suf[r].len() >= keep {
                    suf[r].clone()
                } else {
                    let need = keep - suf[r].len();
                    let from = suf[l].len().saturating_sub(need);
                    let mut s = suf[l][from..].to_vec();
                    s.extend_from_slice(&suf[r]);
                    s
                };
                if st.length[i] >= c && st.vocc[i] > 0 {
                    let mut t = suf[l].clone();
                    t.extend_from_slice(&pre[r]);
                    index[i] = entries.len() as u32;
                    entries.push(WindowEntry {
                        var: i as VarId,
                        t,
                        left_keep: suf[l].len(),
                    });
                }
                pre.push(p);
                suf.push(s);
            }
        }
    }
    let root_suffix = suf[g.root() as usize].clone();
    WindowSet {
        c,
        entries,
        index,
        root_suffix,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecompStats {
    #[serde(rename = "N")]
    pub text_len: u64,
    #[serde(rename = "n")]
    pub rules: u64,
    pub c: u64,
    pub alpha: u64,
    pub n_alpha: u64,
    pub total_window_chars: u64,
}

/// Redundancy `alpha = sum (vocc - 1)(|t_i| - (c - 1))` and `N_alpha = N - alpha`.
pub fn compute_alpha(
    g: &SlpGrammar,
    st: &VariableStats,
    ws: &WindowSet,
) -> Result<DecompStats, WindowError> {
    let n = g.text_len();
    let mut alpha = 0u64;
    let mut covered = 0u64;
    for e in &ws.entries {
        let fresh = e.starts(ws.c);
        let occ = st.vocc[e.var as usize];
        alpha += (occ - 1) * fresh;
        covered += occ * fresh;
    }
    if n >= ws.c && covered + ws.c - 1 != n {
        return Err(WindowError::Coverage {
            covered: covered + ws.c - 1,
            n,
        });
    }
    Ok(DecompStats {
        text_len: n,
        rules: g.size() as u64,
        c: ws.c,
        alpha,
        n_alpha: n - alpha,
        total_window_chars: ws.total_chars(),
    })
}

/// Trie whose upward paths spell text: reading `c` labels from any
/// non-base node towards the root yields a window of some `t_i`.
#[derive(Debug, Clone)]
pub struct OverlapTrie {
    pub c: u64,
    /// Parent of each node; node 0 is the root.
    pub parent: Vec<u32>,
    pub label: Vec<u8>,
    pub depth: Vec<u32>,
    /// `base[k]` reads the last `k` characters of the text.
    pub base: Vec<u32>,
    /// Node of the window starting at `t_v[s_max]`, per variable.
    window_base: Vec<u32>,
    window_count: Vec<u32>,
}

impl OverlapTrie {
    /// Nodes excluding the root.
    pub fn node_count(&self) -> u64 {
        self.parent.len() as u64 - 1
    }

    /// Node whose upward reading starts with `t_v[q..]` (1-based `q`).
    pub fn window_node(&self, v: VarId, q: u64) -> u32 {
        let b = self.window_base[v as usize];
        debug_assert!(b != NIL && q >= 1 && q <= self.window_count[v as usize] as u64);
        b + (self.window_count[v as usize] - q as u32)
    }

    /// Up to `len` labels read from `node` towards the root.
    pub fn upward(&self, mut node: u32, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len);
        while node != 0 && out.len() < len {
            out.push(self.label[node as usize]);
            node = self.parent[node as usize];
        }
        out
    }

    /// A single path whose node at depth `k` reads the last `k` characters of `s`.
    #[cfg(test)]
    pub(crate) fn path_for_tests(s: &[u8]) -> Self {
        let mut t = OverlapTrie {
            c: s.len() as u64,
            parent: vec![NIL],
            label: vec![0],
            depth: vec![0],
            base: vec![0],
            window_base: Vec::new(),
            window_count: Vec::new(),
        };
        let mut cur = 0;
        for &b in s.iter().rev() {
            cur = t.push(cur, b);
            t.base.push(cur);
        }
        t
    }

    fn push(&mut self, parent: u32, label: u8) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(parent);
        self.label.push(label);
        self.depth.push(self.depth[parent as usize] + 1);
        id
    }
}

enum Step {
    Visit(VarId),
    Own(VarId),
    Finish(VarId),
}

/// Walks the derivation tree right to left. A variable seen before is not
/// expanded again: its first position already has a node whose upward
/// reading of `c` characters lies inside the variable, so the text to its
/// left can hang below that node.
pub fn build_overlap_trie(
    g: &SlpGrammar,
    st: &VariableStats,
    ws: &WindowSet,
    expected_nodes: u64,
) -> Result<OverlapTrie, WindowError> {
    let c = ws.c;
    if g.text_len() < c || ws.is_empty() {
        return Err(WindowError::NoWindows { c });
    }
    let n = g.size();
    let mut trie = OverlapTrie {
        c,
        parent: vec![NIL],
        label: vec![0],
        depth: vec![0],
        base: vec![0],
        window_base: vec![NIL; n],
        window_count: vec![0; n],
    };
    let mut cur = 0u32;
    for &b in ws.root_suffix.iter().rev() {
        cur = trie.push(cur, b);
        trie.base.push(cur);
    }
    let mut first = vec![NIL; n];
    let mut stack = vec![Step::Visit(g.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Visit(v) => {
                if st.length[v as usize] < c {
                    continue;
                }
                if first[v as usize] != NIL {
                    cur = first[v as usize];
                    continue;
                }
                let Rule::Pair(l, r) = g.rule(v) else {
                    unreachable!("terminals are shorter than c >= 2")
                };
                stack.push(Step::Finish(v));
                stack.push(Step::Visit(l));
                stack.push(Step::Own(v));
                stack.push(Step::Visit(r));
            }
            Step::Own(v) => {
                let e = ws.entry(v).expect("reachable long variable has windows");
                let smax = e.starts(c) as usize;
                trie.window_count[v as usize] = smax as u32;
                for s in (1..=smax).rev() {
                    cur = trie.push(cur, e.t[s - 1]);
                    if s == smax {
                        trie.window_base[v as usize] = cur;
                    }
                }
            }
            Step::Finish(v) => first[v as usize] = cur,
        }
    }
    if trie.node_count() != expected_nodes {
        return Err(WindowError::TrieSize {
            nodes: trie.node_count(),
            expected: expected_nodes,
        });
    }
    Ok(trie)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::{compute_stats, example_grammar};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    #[test]
    fn window_lengths() {
        assert_eq!(window_length(13), 4);
        assert_eq!(window_length(1), 2);
        assert_eq!(window_length(10), 4);
        assert_eq!(window_length(9), 3);
        for n in 1..5000u64 {
            let c = window_length(n);
            let naive = (1..=n)
                .take_while(|c| c * (c + 1) / 2 <= n)
                .last()
                .unwrap_or(0);
            assert_eq!(c, naive.max(2), "{n}");
        }
    }

    #[test]
    fn running_example_windows_alpha_and_trie() {
        let g = example_grammar();
        let st = compute_stats(&g);
        let ws = build_windows(&g, &st, 4);
        let ts: Vec<(VarId, &[u8])> = ws.entries.iter().map(|e| (e.var, &e.t[..])).collect();
        assert_eq!(
            ts,
            vec![(4, &b"abaab"[..]), (5, &b"aababa"[..]), (6, &b"aababa"[..])]
        );
        let ds = compute_alpha(&g, &st, &ws).unwrap();
        assert_eq!((ds.alpha, ds.n_alpha, ds.total_window_chars), (2, 11, 17));
        let trie = build_overlap_trie(&g, &st, &ws, ds.n_alpha).unwrap();
        assert_eq!(trie.node_count(), 11);
        assert_eq!(trie.upward(trie.window_node(4, 1), 4), b"abaa");
        assert_eq!(trie.upward(trie.base[3], 4), b"aab");
    }

    #[test]
    fn mismatched_size_fails_loudly() {
        let g = example_grammar();
        let st = compute_stats(&g);
        let ws = build_windows(&g, &st, 4);
        assert_eq!(
            build_overlap_trie(&g, &st, &ws, 10).unwrap_err(),
            WindowError::TrieSize {
                nodes: 11,
                expected: 10
            }
        );
        let ws = build_windows(&g, &st, 14);
        assert!(ws.is_empty());
        assert!(build_overlap_trie(&g, &st, &ws, 0).is_err());
    }

    fn substrings(s: &[u8], c: usize) -> BTreeSet<Vec<u8>> {
        s.windows(c).map(|w| w.to_vec()).collect()
    }

    #[test]
    fn random_grammars_cover_text_and_build_exact_tries() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut done = 0;
        while done < 100 {
            let n = rng.gen_range(2..40);
            let g = crate::slp::tests::random_grammar(&mut rng, n, 3);
            let len = g.text_len();
            if !(4..=256).contains(&len) {
                continue;
            }
            done += 1;
            let st = compute_stats(&g);
            let text = g.expand();
            for c in [2, window_length(len), 5.min(len)] {
                let ws = build_windows(&g, &st, c);
                for e in &ws.entries {
                    let x = g.expand_var(e.var);
                    let Rule::Pair(l, _) = g.rule(e.var) else {
                        panic!()
                    };
                    let ll = st.length[l as usize] as usize;
                    let lo = ll - e.left_keep;
                    assert_eq!(&x[lo..lo + e.t.len()], &e.t[..]);
                }
                let mut in_t = BTreeSet::new();
                for e in &ws.entries {
                    in_t.extend(substrings(&e.t, c as usize));
                }
                assert_eq!(in_t, substrings(&text, c as usize));
                let ds = compute_alpha(&g, &st, &ws).unwrap();
                assert!(ds.n_alpha <= len.min(ds.total_window_chars + c - 1));
                let trie = build_overlap_trie(&g, &st, &ws, ds.n_alpha).unwrap();
                let paths: BTreeSet<Vec<u8>> = (1..trie.parent.len() as u32)
                    .map(|v| trie.upward(v, c as usize))
                    .filter(|p| p.len() == c as usize)
                    .collect();
                assert_eq!(paths, in_t);
                let long_paths = (1..trie.parent.len() as u32)
                    .filter(|&v| trie.depth[v as usize] as u64 >= c)
                    .count() as u64;
                assert_eq!(long_paths, ds.n_alpha - (c - 1));
            }
        }
    }
}
