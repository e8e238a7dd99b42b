//! Random access and interval stabbing on an SLP without decompression.
//!
//! Every pair variable designates its longer child as heavy (ties go left).
//! Heavy edges form a forest whose roots are the terminals, so the heavy
//! path of a variable is its ancestor chain in that forest. For each
//! variable we keep how many characters lie left and right of the terminal
//! at the bottom of its heavy path; a descent binary-searches the chain
//! (through level-ancestor queries) for the node where the target position
//! leaves the path, then continues in the light child. Each light step at
//! least halves the remaining length, so a query switches paths at most
//! `floor(log2 N) + 1` times; a single switch costs O(log n).

use thiserror::Error;

use crate::level_ancestor::{LevelAncestor, NIL};
use crate::slp::{Rule, SlpGrammar, VarId, VariableStats};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AccessError {
    #[error("position {pos} is outside 1..={len}")]
    OutOfRange { pos: u64, len: u64 },
    #[error("interval [{begin}, {end}] does not have begin < end")]
    EmptyInterval { begin: u64, end: u64 },
    #[error("window at position {pos} degenerates to a single character")]
    DegenerateWindow { pos: u64 },
    #[error("window length {c} exceeds text length {len}")]
    WindowTooLong { c: u64, len: u64 },
}

#[derive(Debug, Clone)]
pub struct AccessIndex {
    rules: Vec<Rule>,
    length: Vec<u64>,
    heavy: Vec<u32>,
    left_size: Vec<u64>,
    right_size: Vec<u64>,
    forest: LevelAncestor,
    root: VarId,
}

/// The deepest derivation-tree node whose interval contains `[p, e]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabResult {
    pub var: VarId,
    /// Global 1-based start of the stabbing occurrence.
    pub occ_begin: u64,
    /// Global end of the left child's interval.
    pub left_end: u64,
    /// 1-based offset of `p` inside `val(var)`.
    pub offset_p: u64,
    /// Light-child steps taken by the two descents (the larger of them).
    pub switches: u32,
}

/// Where a position leaves the heavy path of a variable.
struct Exit {
    /// Distance from the starting variable along its heavy path.
    k: u32,
    var: VarId,
    /// Position relative to `var`.
    pos: u64,
}

impl AccessIndex {
    pub fn new(g: &SlpGrammar, st: &VariableStats) -> Self {
        let n = g.size();
        let rules = g.rules().to_vec();
        let mut heavy = vec![NIL; n];
        let mut left_size = vec![0u64; n];
        let mut right_size = vec![0u64; n];
        for (i, r) in rules.iter().enumerate() {
            if let Rule::Pair(l, r) = *r {
                let (l, r) = (l as usize, r as usize);
                if st.length[l] >= st.length[r] {
                    heavy[i] = l as u32;
                    left_size[i] = left_size[l];
                    right_size[i] = right_size[l] + st.length[r];
                } else {
                    heavy[i] = r as u32;
                    left_size[i] = st.length[l] + left_size[r];
                    right_size[i] = right_size[r];
                }
            }
        }
        let forest = LevelAncestor::new(&heavy);
        AccessIndex {
            rules,
            length: st.length.clone(),
            heavy,
            left_size,
            right_size,
            forest,
            root: g.root(),
        }
    }

    pub fn text_len(&self) -> u64 {
        self.length[self.root as usize]
    }

    pub fn heavy_child(&self, v: VarId) -> Option<VarId> {
        let h = self.heavy[v as usize];
        (h != NIL).then_some(h)
    }

    /// Number of variables on the heavy path starting at `v` (including the terminal).
    pub fn heavy_path_len(&self, v: VarId) -> u32 {
        self.forest.depth(v) + 1
    }

    fn exit(&self, v: VarId, p: u64) -> Exit {
        let ls = self.left_size[v as usize];
        let d = self.forest.depth(v);
        let anc = |k: u32| self.forest.ancestor(v, k).unwrap();
        if p == ls + 1 {
            let t = anc(d);
            return Exit {
                k: d,
                var: t,
                pos: 1,
            };
        }
        // Largest k whose variable still contains p; sizes shrink with k.
        let holds = |k: u32| -> bool {
            let u = anc(k) as usize;
            if p <= ls {
                self.left_size[u] > ls - p
            } else {
                self.right_size[u] >= p - ls - 1
            }
        };
        let (mut lo, mut hi) = (0u32, d);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let u = anc(lo);
        Exit {
            k: lo,
            var: u,
            pos: p - (ls - self.left_size[u as usize]),
        }
    }

    fn check_pos(&self, p: u64) -> Result<(), AccessError> {
        let len = self.text_len();
        if p == 0 || p > len {
            return Err(AccessError::OutOfRange { pos: p, len });
        }
        Ok(())
    }

    /// Character at 1-based position `p`, with the number of heavy-path switches.
    pub fn char_at_counted(&self, p: u64) -> Result<(u8, u32), AccessError> {
        self.check_pos(p)?;
        let (mut v, mut p) = (self.root, p);
        let mut switches = 0;
        loop {
            let ex = self.exit(v, p);
            match self.rules[ex.var as usize] {
                Rule::Terminal(b) => return Ok((b, switches)),
                Rule::Pair(l, r) => {
                    switches += 1;
                    let ll = self.length[l as usize];
                    if ex.pos <= ll {
                        v = l;
                        p = ex.pos;
                    } else {
                        v = r;
                        p = ex.pos - ll;
                    }
                }
            }
        }
    }

    /// Character at 1-based position `p`.
    pub fn char_at(&self, p: u64) -> Result<u8, AccessError> {
        self.char_at_counted(p).map(|(b, _)| b)
    }

    /// Runs the descents for `p` and `e` in lockstep and stops at the first
    /// variable where they part.
    pub fn stab(&self, p: u64, e: u64) -> Result<StabResult, AccessError> {
        self.check_pos(p)?;
        self.check_pos(e)?;
        if p >= e {
            return Err(AccessError::EmptyInterval { begin: p, end: e });
        }
        let (mut v, mut pp, mut ee) = (self.root, p, e);
        let mut base = 0u64;
        let mut switches = 0u32;
        loop {
            let xp = self.exit(v, pp);
            let xe = self.exit(v, ee);
            let k = xp.k.min(xe.k);
            let u = self.forest.ancestor(v, k).unwrap();
            let shift = self.left_size[v as usize] - self.left_size[u as usize];
            let (pu, eu) = (pp - shift, ee - shift);
            let Rule::Pair(l, r) = self.rules[u as usize] else {
                unreachable!("two distinct positions cannot end at one terminal");
            };
            let ll = self.length[l as usize];
            let ubase = base + shift;
            if xp.k != xe.k || (pu <= ll) != (eu <= ll) {
                return Ok(StabResult {
                    var: u,
                    occ_begin: ubase + 1,
                    left_end: ubase + ll,
                    offset_p: pu,
                    switches: switches + 1,
                });
            }
            switches += 1;
            if pu <= ll {
                v = l;
                pp = pu;
                ee = eu;
                base = ubase;
            } else {
                v = r;
                pp = pu - ll;
                ee = eu - ll;
                base = ubase + ll;
            }
        }
    }

    /// Locates the length-`c` window starting at `p` inside the boundary
    /// string `t_j` of the variable stabbing it. Returns `(j, q)` with `q`
    /// the 1-based offset of `p` in `t_j`.
    pub fn window_locator(&self, p: u64, c: u64) -> Result<(VarId, u64), AccessError> {
        let n = self.text_len();
        self.check_pos(p)?;
        if p >= n {
            return Err(AccessError::DegenerateWindow { pos: p });
        }
        self.locate_suffix(p, c)
    }

    /// Like [`window_locator`](Self::window_locator) but valid for every
    /// position: when fewer than `c` characters remain, the window is
    /// shifted left to end at `N` and `q` is adjusted accordingly.
    pub fn locate_suffix(&self, p: u64, c: u64) -> Result<(VarId, u64), AccessError> {
        let n = self.text_len();
        self.check_pos(p)?;
        if c < 2 || c > n {
            return Err(AccessError::WindowTooLong { c, len: n });
        }
        let start = p.min(n - c + 1);
        let s = self.stab(start, start + c - 1)?;
        let Rule::Pair(l, _) = self.rules[s.var as usize] else {
            unreachable!()
        };
        let left_keep = (c - 1).min(self.length[l as usize]);
        let q = left_keep - (s.left_end - start) + (p - start);
        Ok((s.var, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::{compute_stats, example_grammar, text_to_slp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn index(g: &SlpGrammar) -> AccessIndex {
        AccessIndex::new(g, &compute_stats(g))
    }

    /// Explicit derivation tree: (var, begin, end) for every internal node.
    fn derivation_nodes(g: &SlpGrammar) -> Vec<(VarId, u64, u64, u64)> {
        let st = compute_stats(g);
        let mut out = Vec::new();
        let mut stack = vec![(g.root(), 1u64)];
        while let Some((v, b)) = stack.pop() {
            let e = b + st.length[v as usize] - 1;
            if let Rule::Pair(l, r) = g.rule(v) {
                let mid = b + st.length[l as usize] - 1;
                out.push((v, b, e, mid));
                stack.push((l, b));
                stack.push((r, mid + 1));
            }
        }
        out
    }

    fn brute_stab(nodes: &[(VarId, u64, u64, u64)], p: u64, e: u64) -> (VarId, u64, u64) {
        // Deepest = shortest interval containing [p, e].
        let (v, b, _, mid) = nodes
            .iter()
            .filter(|&&(_, b, end, _)| b <= p && e <= end)
            .min_by_key(|&&(_, b, end, _)| end - b)
            .copied()
            .unwrap();
        (v, b, mid)
    }

    #[test]
    fn heavy_children_of_running_example() {
        let g = example_grammar();
        let idx = index(&g);
        assert_eq!(idx.heavy_child(6), Some(5));
        assert_eq!(idx.heavy_child(0), None);
        assert_eq!(idx.char_at(4), Ok(b'a'));
        assert_eq!(idx.char_at(1), Ok(b'a'));
        assert_eq!(
            idx.char_at(14),
            Err(AccessError::OutOfRange { pos: 14, len: 13 })
        );
        assert!(idx.char_at(0).is_err());
    }

    #[test]
    fn single_terminal() {
        let g = text_to_slp(b"z").unwrap();
        let idx = index(&g);
        assert_eq!(idx.char_at_counted(1), Ok((b'z', 0)));
        assert_eq!(idx.heavy_path_len(0), 1);
    }

    #[test]
    fn stab_examples() {
        let g = example_grammar();
        let idx = index(&g);
        let s = idx.stab(4, 7).unwrap();
        assert_eq!((s.var, s.occ_begin, s.left_end, s.offset_p), (4, 4, 5, 1));
        let s = idx.stab(1, 13).unwrap();
        assert_eq!((s.var, s.occ_begin), (6, 1));
        assert!(matches!(
            idx.stab(5, 5),
            Err(AccessError::EmptyInterval { .. })
        ));
    }

    #[test]
    fn stab_matches_derivation_tree_on_running_example() {
        let g = example_grammar();
        let idx = index(&g);
        let nodes = derivation_nodes(&g);
        for p in 1..=10 {
            let e = p + 3;
            let s = idx.stab(p, e).unwrap();
            let (v, b, mid) = brute_stab(&nodes, p, e);
            assert_eq!((s.var, s.occ_begin, s.left_end), (v, b, mid), "[{p}, {e}]");
            assert!(s.occ_begin <= p && p <= s.left_end && s.left_end < e);
        }
    }

    #[test]
    fn window_locator_examples() {
        let g = example_grammar();
        let idx = index(&g);
        assert_eq!(idx.window_locator(4, 4), Ok((4, 1)));
        assert_eq!(idx.window_locator(1, 4), Ok((5, 1)));
        assert_eq!(
            idx.window_locator(13, 4),
            Err(AccessError::DegenerateWindow { pos: 13 })
        );
    }

    #[test]
    fn left_spine_grammar_stays_logarithmic() {
        let mut rules = vec![Rule::Terminal(b'a'), Rule::Terminal(b'b'), Rule::Pair(0, 1)];
        while rules.len() < 1000 {
            let prev = (rules.len() - 1) as VarId;
            rules.push(Rule::Pair(prev, (rules.len() % 2) as VarId));
        }
        let g = SlpGrammar::new(rules).unwrap();
        let idx = index(&g);
        assert!(idx.heavy_path_len(g.root()) >= 998);
        let text = g.expand();
        let n = text.len() as u64;
        let bound = 64 - n.leading_zeros();
        for p in 1..=n {
            let (b, sw) = idx.char_at_counted(p).unwrap();
            assert_eq!(b, text[p as usize - 1]);
            assert!(sw <= bound);
        }
    }

    #[test]
    fn random_grammars_full_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut done = 0;
        while done < 100 {
            let n = rng.gen_range(2..60);
            let g = crate::slp::tests::random_grammar(&mut rng, n, 3);
            if g.text_len() > 4096 {
                continue;
            }
            done += 1;
            let idx = index(&g);
            let text = g.expand();
            let n = text.len() as u64;
            let bound = 64 - n.leading_zeros();
            for p in 1..=n {
                let (b, sw) = idx.char_at_counted(p).unwrap();
                assert_eq!(b, text[p as usize - 1]);
                assert!(sw <= bound, "switches {sw} > {bound}");
            }
        }
    }

    #[test]
    fn stab_agrees_with_derivation_tree_on_short_texts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut done = 0;
        while done < 60 {
            let n = rng.gen_range(2..25);
            let g = crate::slp::tests::random_grammar(&mut rng, n, 3);
            if g.text_len() > 64 || g.text_len() < 2 {
                continue;
            }
            done += 1;
            let idx = index(&g);
            let nodes = derivation_nodes(&g);
            let len = g.text_len();
            for p in 1..len {
                for e in p + 1..=len {
                    let s = idx.stab(p, e).unwrap();
                    let (v, b, mid) = brute_stab(&nodes, p, e);
                    assert_eq!((s.var, s.occ_begin, s.left_end), (v, b, mid));
                    assert_eq!(s.offset_p, p - b + 1);
                }
            }
        }
    }
}
