//! Online construction of the generalized suffix tree of a set of strings.
//!
//! The sources are concatenated, each followed by its own terminator, and
//! built as one string. Terminators are unique, so no internal node spells
//! one; leaf edges are then cut right after their source's terminator.

use std::collections::HashMap;

use super::{Labels, NodeId, SuffixTree, Sym, TERMINATOR_BASE};
use crate::level_ancestor::NIL;

const OPEN: u32 = u32::MAX;

struct Nodes {
    start: Vec<u32>,
    end: Vec<u32>,
    link: Vec<NodeId>,
    /// Suffix start for leaves, `NIL` for internal nodes.
    suffix: Vec<u32>,
}

impl Nodes {
    fn push(&mut self, start: u32, end: u32, suffix: u32) -> NodeId {
        self.start.push(start);
        self.end.push(end);
        self.link.push(0);
        self.suffix.push(suffix);
        (self.start.len() - 1) as NodeId
    }
}

/// Generalized suffix tree of `sources`. Leaf keys are global suffix starts
/// in the concatenation; use [`source_starts`] to map `(source, offset)`.
pub fn build_gst(sources: &[&[u8]]) -> SuffixTree {
    let mut text: Vec<Sym> = Vec::new();
    let mut term_of = Vec::new();
    for (k, s) in sources.iter().enumerate() {
        assert!(!s.is_empty(), "sources must be non-empty");
        text.extend(s.iter().map(|&b| b as Sym));
        let term = text.len() as u32;
        text.push(TERMINATOR_BASE + k as Sym);
        term_of.extend(std::iter::repeat_n(term, s.len() + 1));
    }
    let n = text.len() as u32;

    let mut nodes = Nodes {
        start: vec![0],
        end: vec![0],
        link: vec![0],
        suffix: vec![NIL],
    };
    let mut child: HashMap<(NodeId, Sym), NodeId> = HashMap::with_capacity(2 * n as usize);

    let mut active_node: NodeId = 0;
    let mut active_edge: u32 = 0;
    let mut active_len: u32 = 0;
    let mut remainder: u32 = 0;

    for i in 0..n {
        remainder += 1;
        let mut last_new: NodeId = NIL;
        while remainder > 0 {
            if active_len == 0 {
                active_edge = i;
            }
            let a = text[active_edge as usize];
            match child.get(&(active_node, a)).copied() {
                None => {
                    let leaf = nodes.push(i, OPEN, i + 1 - remainder);
                    child.insert((active_node, a), leaf);
                    if last_new != NIL {
                        nodes.link[last_new as usize] = active_node;
                        last_new = NIL;
                    }
                }
                Some(next) => {
                    let edge_len = nodes.end[next as usize].min(i + 1) - nodes.start[next as usize];
                    if active_len >= edge_len {
                        active_edge += edge_len;
                        active_len -= edge_len;
                        active_node = next;
                        continue;
                    }
                    if text[(nodes.start[next as usize] + active_len) as usize] == text[i as usize]
                    {
                        if last_new != NIL && active_node != 0 {
                            nodes.link[last_new as usize] = active_node;
                        }
                        active_len += 1;
                        break;
                    }
                    let s = nodes.start[next as usize];
                    let mid = nodes.push(s, s + active_len, NIL);
                    child.insert((active_node, a), mid);
                    let leaf = nodes.push(i, OPEN, i + 1 - remainder);
                    child.insert((mid, text[i as usize]), leaf);
                    nodes.start[next as usize] += active_len;
                    child.insert((mid, text[nodes.start[next as usize] as usize]), next);
                    if last_new != NIL {
                        nodes.link[last_new as usize] = mid;
                    }
                    last_new = mid;
                }
            }
            remainder -= 1;
            if active_node == 0 && active_len > 0 {
                active_len -= 1;
                active_edge = i + 1 - remainder;
            } else if active_node != 0 {
                active_node = nodes.link[active_node as usize];
            }
        }
    }

    // Parent links and string depths, root first.
    let count = nodes.start.len();
    let mut parent = vec![NIL; count];
    for (&(p, _), &c) in &child {
        parent[c as usize] = p;
    }
    let mut kids: Vec<Vec<NodeId>> = vec![Vec::new(); count];
    for (c, &p) in parent.iter().enumerate() {
        if p != NIL {
            kids[p as usize].push(c as NodeId);
        }
    }
    let mut depth = vec![0u32; count];
    let mut witness = vec![0u32; count];
    let mut leaf_key = vec![NIL; count];
    let mut order = vec![0 as NodeId];
    let mut head = 0;
    while head < order.len() {
        let v = order[head] as usize;
        head += 1;
        for &c in &kids[v] {
            let c = c as usize;
            if nodes.suffix[c] != NIL {
                let s = nodes.suffix[c];
                depth[c] = term_of[s as usize] + 1 - s;
                witness[c] = s;
                leaf_key[c] = s;
            } else {
                depth[c] = depth[v] + nodes.end[c] - nodes.start[c];
                witness[c] = nodes.end[c] - depth[c];
            }
            order.push(c as NodeId);
        }
    }
    // Renumber in BFS order so parents precede children.
    let mut new_id = vec![0 as NodeId; count];
    for (i, &v) in order.iter().enumerate() {
        new_id[v as usize] = i as NodeId;
    }
    let remap = |v: &Vec<u32>| order.iter().map(|&o| v[o as usize]).collect::<Vec<_>>();
    let parent: Vec<NodeId> = order
        .iter()
        .map(|&o| {
            let p = parent[o as usize];
            if p == NIL {
                NIL
            } else {
                new_id[p as usize]
            }
        })
        .collect();
    SuffixTree::assemble(
        Labels::Flat(text),
        parent,
        remap(&depth),
        remap(&witness),
        remap(&leaf_key),
    )
}

/// Global start of every source in the concatenation used by [`build_gst`].
pub fn source_starts(sources: &[&[u8]]) -> Vec<u32> {
    let mut out = Vec::with_capacity(sources.len());
    let mut pos = 0u32;
    for s in sources {
        out.push(pos);
        pos += s.len() as u32 + 1;
    }
    out
}
