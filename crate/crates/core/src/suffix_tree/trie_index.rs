//! Suffix tree of the upward strings of an overlap trie.
//!
//! Every non-root trie node `x` contributes the string read from `x`
//! towards the root, cut at `c` characters, followed by its own terminator.
//! Strings are ranked by prefix doubling over level ancestors, sorted, and
//! the compacted tree is assembled from the sorted order and the longest
//! common prefixes of neighbours. This takes O(N_alpha log c) time.

use super::{Labels, NodeId, SuffixTree};
use crate::level_ancestor::{LevelAncestor, NIL};
use crate::window::OverlapTrie;

/// Rank of every node's upward string of length `min(2^k, depth)`, per level `k`.
struct Ranks {
    levels: Vec<Vec<u32>>,
}

impl Ranks {
    fn build(trie: &OverlapTrie, la: &LevelAncestor, cap: u32) -> Self {
        let n = trie.parent.len();
        let first: Vec<u32> = (0..n)
            .map(|v| if v == 0 { 0 } else { trie.label[v] as u32 + 1 })
            .collect();
        let mut levels = vec![first];
        let mut span = 1u32;
        let mut keys: Vec<(u32, u32, u32)> = Vec::with_capacity(n);
        while span * 2 <= cap {
            let prev = levels.last().unwrap();
            keys.clear();
            for v in 0..n as u32 {
                let up = la.ancestor(v, span).unwrap_or(0);
                keys.push((prev[v as usize], prev[up as usize], v));
            }
            keys.sort_unstable();
            let mut next = vec![0u32; n];
            let mut r = 0u32;
            for i in 0..n {
                let (a, b, v) = keys[i];
                if i > 0 && (keys[i - 1].0, keys[i - 1].1) != (a, b) {
                    r += 1;
                }
                // Root keeps rank 0; every real string sorts after it.
                next[v as usize] = if v == 0 { 0 } else { r + 1 };
            }
            levels.push(next);
            span *= 2;
        }
        Ranks { levels }
    }
}

/// Suffix tree over the trie's upward strings, cut at `trie.c` characters.
/// Leaf keys are trie node ids.
pub fn build_st_of_trie(trie: &OverlapTrie) -> SuffixTree {
    let cap = trie.c as u32;
    let la = LevelAncestor::new(&trie.parent);
    let ranks = Ranks::build(trie, &la, cap);
    let top = ranks.levels.len() - 1;
    let span = 1u32 << top;
    let m = trie.parent.len() as u32;
    let len = |x: u32| trie.depth[x as usize].min(cap);
    let r_top = &ranks.levels[top];

    let mut order: Vec<u32> = (1..m).collect();
    // Two overlapping blocks of `span` characters cover the first `cap`;
    // strings that reach the root earlier are padded with the root's rank.
    order.sort_unstable_by_key(|&x| {
        let tail = la.ancestor(x, cap - span).map_or(0, |a| r_top[a as usize]);
        (r_top[x as usize], tail, x)
    });

    let lcp = |x: u32, y: u32| -> u32 {
        let limit = len(x).min(len(y));
        let mut l = 0u32;
        for k in (0..=top).rev() {
            let step = 1u32 << k;
            if l + step <= limit {
                let a = la.ancestor(x, l).unwrap();
                let b = la.ancestor(y, l).unwrap();
                if ranks.levels[k][a as usize] == ranks.levels[k][b as usize] {
                    l += step;
                }
            }
        }
        l
    };

    let mut parent: Vec<NodeId> = vec![NIL];
    let mut depth: Vec<u32> = vec![0];
    let mut witness: Vec<u32> = vec![0];
    let mut leaf_key: Vec<u32> = vec![NIL];
    let mut stack: Vec<NodeId> = vec![0];
    let mut prev = NIL;
    for &x in &order {
        let l = if prev == NIL { 0 } else { lcp(prev, x) };
        let mut last = NIL;
        while depth[*stack.last().unwrap() as usize] > l {
            last = stack.pop().unwrap();
            let top = *stack.last().unwrap();
            if depth[top as usize] >= l {
                parent[last as usize] = top;
            }
        }
        let top = *stack.last().unwrap();
        if last != NIL && depth[top as usize] < l {
            let u = parent.len() as NodeId;
            parent.push(NIL);
            depth.push(l);
            witness.push(witness[last as usize]);
            leaf_key.push(NIL);
            parent[last as usize] = u;
            stack.push(u);
        }
        let leaf = parent.len() as NodeId;
        parent.push(NIL);
        depth.push(len(x) + 1);
        witness.push(x);
        leaf_key.push(x);
        stack.push(leaf);
        prev = x;
    }
    while stack.len() > 1 {
        let v = stack.pop().unwrap();
        parent[v as usize] = *stack.last().unwrap();
    }

    // Renumber so parents precede children.
    let n = parent.len();
    let mut kids: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for v in 1..n {
        kids[parent[v] as usize].push(v as NodeId);
    }
    let mut bfs = vec![0 as NodeId];
    let mut head = 0;
    while head < bfs.len() {
        let v = bfs[head] as usize;
        head += 1;
        bfs.extend_from_slice(&kids[v]);
    }
    let mut new_id = vec![0 as NodeId; n];
    for (i, &v) in bfs.iter().enumerate() {
        new_id[v as usize] = i as NodeId;
    }
    let remap = |a: &Vec<u32>| bfs.iter().map(|&v| a[v as usize]).collect::<Vec<_>>();
    let new_parent = bfs
        .iter()
        .map(|&v| {
            let p = parent[v as usize];
            if p == NIL {
                NIL
            } else {
                new_id[p as usize]
            }
        })
        .collect();
    SuffixTree::assemble(
        Labels::Trie {
            label: trie.label.clone(),
            depth: trie.depth.clone(),
            la,
            cap,
        },
        new_parent,
        remap(&depth),
        remap(&witness),
        remap(&leaf_key),
    )
}
