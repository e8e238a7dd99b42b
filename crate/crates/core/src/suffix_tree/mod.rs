//! Suffix trees over window strings with an overlay of marked nodes.
//!
//! Two builders produce the same structure: a generalized suffix tree of
//! the window strings (Ukkonen) and the suffix tree of the overlap trie.
//! After construction the tree is extended only by splitting edges; the
//! nodes created that way are "overlay" nodes. Level-ancestor queries are
//! answered on the original tree, and marks are kept so that the marked
//! nodes always form a top-down connected subtree.

mod check;
mod trie_index;
mod ukkonen;

use std::fmt::Write as _;

use thiserror::Error;

use crate::level_ancestor::{LevelAncestor, NIL};

pub use check::check_structure;
pub use trie_index::build_st_of_trie;
pub use ukkonen::{build_gst, source_starts};

/// Bytes are `0..=255`; terminators are `256 + k`.
pub type Sym = u32;
pub type NodeId = u32;

pub const TERMINATOR_BASE: Sym = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} is already marked")]
    AlreadyMarked(NodeId),
    #[error("node {node} cannot be marked before its parent {parent}")]
    ParentUnmarked { node: NodeId, parent: NodeId },
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error("level {level} exceeds the depth {depth} of node {node}")]
    LevelTooDeep {
        node: NodeId,
        level: u32,
        depth: u32,
    },
    #[error("path to node {0} is exhausted")]
    PathExhausted(NodeId),
}

/// Where edge labels are read from.
#[derive(Debug, Clone)]
pub(crate) enum Labels {
    /// Concatenated sources; a node's witness is the start of an occurrence
    /// of its path string.
    Flat(Vec<Sym>),
    /// Overlap trie; a node's witness is a trie node whose upward reading
    /// (capped at `cap` characters, then its terminator) spells a path
    /// through the node.
    Trie {
        label: Vec<u8>,
        depth: Vec<u32>,
        la: LevelAncestor,
        cap: u32,
    },
}

/// A point in the tree: `offset == 0` is the node itself, otherwise the
/// point `offset` characters below the parent on the edge into `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositionHandle {
    pub node: NodeId,
    pub edge_offset: u32,
}

impl PositionHandle {
    pub fn at(node: NodeId) -> Self {
        PositionHandle {
            node,
            edge_offset: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuffixTree {
    labels: Labels,
    parent: Vec<NodeId>,
    depth: Vec<u32>,
    witness: Vec<u32>,
    /// Children sorted by the first symbol of their edge.
    children: Vec<Vec<(Sym, NodeId)>>,
    leaf_key: Vec<u32>,
    original_count: u32,
    la: LevelAncestor,
    marked: Vec<bool>,
    /// For an overlay node, the original node at the bottom of its edge.
    chain_bottom: Vec<NodeId>,
    /// For an original node, the topmost node of the split edge above it.
    edge_top: Vec<NodeId>,
    /// For an original node, the deepest marked overlay node above it on its edge.
    edge_mark: Vec<NodeId>,
}

impl SuffixTree {
    /// Assembles a tree from parent links (root first) and fixes up the
    /// derived arrays. `leaf_key` identifies the suffix a leaf stands for.
    pub(crate) fn assemble(
        labels: Labels,
        parent: Vec<NodeId>,
        depth: Vec<u32>,
        witness: Vec<u32>,
        leaf_key: Vec<u32>,
    ) -> Self {
        let n = parent.len();
        let mut tree = SuffixTree {
            labels,
            children: vec![Vec::new(); n],
            la: LevelAncestor::new(&parent),
            parent,
            depth,
            witness,
            leaf_key,
            original_count: n as u32,
            marked: vec![false; n],
            chain_bottom: vec![NIL; n],
            edge_top: (0..n as NodeId).collect(),
            edge_mark: vec![NIL; n],
        };
        for v in 1..n as NodeId {
            let p = tree.parent[v as usize];
            let s = tree.sym(v, tree.depth[p as usize] + 1);
            tree.children[p as usize].push((s, v));
        }
        for ch in &mut tree.children {
            ch.sort_unstable();
        }
        tree.marked[0] = true;
        tree
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn original_count(&self) -> usize {
        self.original_count as usize
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.original_count as usize)
            .filter(|&v| self.children[v].is_empty() && v != 0)
            .count()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[v as usize];
        (p != NIL).then_some(p)
    }

    /// String depth.
    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[(Sym, NodeId)] {
        &self.children[v as usize]
    }

    pub fn is_overlay(&self, v: NodeId) -> bool {
        v >= self.original_count
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v as usize].is_empty() && v != 0
    }

    pub fn is_marked(&self, v: NodeId) -> bool {
        self.marked[v as usize]
    }

    /// Key of a leaf: global suffix start for a window-string tree, trie
    /// node for a trie index.
    pub fn leaf_key(&self, v: NodeId) -> u32 {
        self.leaf_key[v as usize]
    }

    /// Symbol at string depth `d` (1-based) on the path to `v`.
    pub fn sym(&self, v: NodeId, d: u32) -> Sym {
        debug_assert!(d >= 1 && d <= self.depth[v as usize]);
        let w = self.witness[v as usize];
        match &self.labels {
            Labels::Flat(text) => text[(w + d - 1) as usize],
            Labels::Trie {
                label,
                depth,
                la,
                cap,
            } => {
                let len = depth[w as usize].min(*cap);
                if d > len {
                    TERMINATOR_BASE + w
                } else {
                    let x = la.ancestor(w, d - 1).expect("within trie depth");
                    label[x as usize] as Sym
                }
            }
        }
    }

    /// Path string of `v`.
    pub fn path_string(&self, v: NodeId) -> Vec<Sym> {
        (1..=self.depth[v as usize])
            .map(|d| self.sym(v, d))
            .collect()
    }

    /// The `level`-th original ancestor of original node `v`.
    pub fn level_ancestor(&self, v: NodeId, level: u32) -> Result<NodeId, TreeError> {
        if v >= self.original_count {
            return Err(TreeError::NoSuchNode(v));
        }
        self.la.ancestor(v, level).ok_or(TreeError::LevelTooDeep {
            node: v,
            level,
            depth: self.la.depth(v),
        })
    }

    /// Number of edges between original node `v` and the root, ignoring overlay nodes.
    pub fn node_depth(&self, v: NodeId) -> u32 {
        self.la.depth(v)
    }

    fn current_string_depth(&self, h: PositionHandle) -> u32 {
        if h.edge_offset == 0 {
            self.depth[h.node as usize]
        } else {
            self.depth[self.parent[h.node as usize] as usize] + h.edge_offset
        }
    }

    fn enter(&self, child: NodeId, from_depth: u32) -> PositionHandle {
        if self.depth[child as usize] == from_depth + 1 {
            PositionHandle::at(child)
        } else {
            PositionHandle {
                node: child,
                edge_offset: 1,
            }
        }
    }

    /// Moves one character down towards original node `toward`, which must
    /// lie below `h`. Branching original nodes pick the child through a
    /// level-ancestor query on `toward`.
    pub fn descend_one(
        &self,
        h: PositionHandle,
        toward: NodeId,
    ) -> Result<PositionHandle, TreeError> {
        let d = self.current_string_depth(h);
        if h.edge_offset > 0 {
            return Ok(if d + 1 == self.depth[h.node as usize] {
                PositionHandle::at(h.node)
            } else {
                PositionHandle {
                    node: h.node,
                    edge_offset: h.edge_offset + 1,
                }
            });
        }
        let v = h.node;
        if v == toward {
            return Err(TreeError::PathExhausted(toward));
        }
        let child = if self.is_overlay(v) {
            self.children[v as usize][0].1
        } else {
            let hops = self.la.depth(toward) - self.la.depth(v);
            let u = self
                .la
                .ancestor(toward, hops - 1)
                .expect("toward lies below v");
            self.edge_top[u as usize]
        };
        Ok(self.enter(child, d))
    }

    /// Moves one character down along symbol `s`, if that path exists.
    pub fn descend_by_sym(&self, h: PositionHandle, s: Sym) -> Option<PositionHandle> {
        let d = self.current_string_depth(h);
        if h.edge_offset > 0 {
            if self.sym(h.node, d + 1) != s {
                return None;
            }
            return Some(if d + 1 == self.depth[h.node as usize] {
                PositionHandle::at(h.node)
            } else {
                PositionHandle {
                    node: h.node,
                    edge_offset: h.edge_offset + 1,
                }
            });
        }
        let ch = &self.children[h.node as usize];
        let i = ch.binary_search_by_key(&s, |&(c, _)| c).ok()?;
        Some(self.enter(ch[i].1, d))
    }

    /// Makes the point `h` explicit, splitting its edge if needed.
    pub fn insert_overlay_node(&mut self, h: PositionHandle) -> NodeId {
        if h.edge_offset == 0 {
            return h.node;
        }
        let v = h.node;
        let p = self.parent[v as usize];
        let o = self.parent.len() as NodeId;
        let od = self.depth[p as usize] + h.edge_offset;
        let first = self.sym(v, self.depth[p as usize] + 1);
        let below = self.sym(v, od + 1);
        self.parent.push(p);
        self.depth.push(od);
        self.witness.push(self.witness[v as usize]);
        self.children.push(vec![(below, v)]);
        self.leaf_key.push(NIL);
        self.marked.push(false);
        let bottom = if self.is_overlay(v) {
            self.chain_bottom[v as usize]
        } else {
            v
        };
        self.chain_bottom.push(bottom);
        self.edge_top.push(NIL);
        self.edge_mark.push(NIL);
        self.parent[v as usize] = o;
        let slot = self.children[p as usize]
            .binary_search_by_key(&first, |&(c, _)| c)
            .expect("edge into v starts with its first symbol");
        self.children[p as usize][slot].1 = o;
        if !self.is_overlay(p) {
            self.edge_top[bottom as usize] = o;
        }
        o
    }

    pub fn mark(&mut self, v: NodeId) -> Result<(), TreeError> {
        if v as usize >= self.parent.len() {
            return Err(TreeError::NoSuchNode(v));
        }
        if self.marked[v as usize] {
            return Err(TreeError::AlreadyMarked(v));
        }
        let p = self.parent[v as usize];
        if !self.marked[p as usize] {
            return Err(TreeError::ParentUnmarked { node: v, parent: p });
        }
        self.marked[v as usize] = true;
        if self.is_overlay(v) {
            self.edge_mark[self.chain_bottom[v as usize] as usize] = v;
        }
        Ok(())
    }

    /// Deepest marked ancestor-or-self. Marks form a prefix of every root
    /// path, so the first marked original ancestor is found by galloping
    /// and binary search over level ancestors, and the answer is refined
    /// by the marks on the edge just below it.
    pub fn nma(&self, v: NodeId) -> NodeId {
        if self.marked[v as usize] {
            return v;
        }
        if self.is_overlay(v) {
            let bottom = self.chain_bottom[v as usize];
            let m = self.edge_mark[bottom as usize];
            if m != NIL {
                return m;
            }
            let p = self
                .la
                .ancestor(bottom, 1)
                .expect("overlay nodes are never above the root");
            return self.nma(p);
        }
        let marked_at = |k: u32| self.marked[self.la.ancestor(v, k).unwrap() as usize];
        let top = self.la.depth(v);
        let mut hi = 1u32;
        while hi < top && !marked_at(hi) {
            hi = (hi * 2).min(top);
        }
        let mut lo = hi / 2 + 1;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if marked_at(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let below = self.la.ancestor(v, hi - 1).unwrap();
        let m = self.edge_mark[below as usize];
        if m != NIL {
            m
        } else {
            self.la.ancestor(v, hi).unwrap()
        }
    }

    /// Approximate footprint in 32-bit words, for reporting.
    pub fn words(&self) -> usize {
        let n = self.parent.len();
        let child_words: usize = self.children.iter().map(|c| 2 * c.len()).sum();
        n * 8 + child_words + self.la.words()
    }

    fn write_sym(out: &mut String, s: Sym) {
        if s >= TERMINATOR_BASE {
            let _ = write!(out, "${}", s - TERMINATOR_BASE);
        } else {
            crate::format::escape_byte_into(s as u8, out);
        }
    }

    /// Indented listing of every edge label, children in symbol order.
    pub fn dump(&self) -> String {
        let mut out = String::from("root\n");
        let mut stack: Vec<(NodeId, usize)> = self.children[0]
            .iter()
            .rev()
            .map(|&(_, c)| (c, 1))
            .collect();
        while let Some((v, level)) = stack.pop() {
            out.push_str(&"  ".repeat(level));
            let from = self.depth[self.parent[v as usize] as usize] + 1;
            for d in from..=self.depth[v as usize] {
                Self::write_sym(&mut out, self.sym(v, d));
            }
            if self.marked[v as usize] {
                out.push_str(" *");
            }
            out.push('\n');
            for &(_, c) in self.children[v as usize].iter().rev() {
                stack.push((c, level + 1));
            }
        }
        out
    }
}
