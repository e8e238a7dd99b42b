use super::{NodeId, SuffixTree};
use crate::level_ancestor::NIL;

/// Checks the shape invariants of a (possibly overlaid) suffix tree:
/// depths grow along edges, siblings start with distinct symbols in sorted
/// order, original branching nodes keep at least two children, overlay
/// nodes have exactly one, and every original leaf carries a key.
pub fn check_structure(t: &SuffixTree) -> Result<(), String> {
    for v in 0..t.node_count() as NodeId {
        let ch = t.children(v);
        for w in ch.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(format!("children of {v} not strictly sorted by symbol"));
            }
        }
        for &(s, c) in ch {
            if t.parent(c) != Some(v) {
                return Err(format!("child {c} of {v} has a different parent"));
            }
            if t.depth(c) <= t.depth(v) {
                return Err(format!("edge {v} -> {c} has non-positive length"));
            }
            if t.sym(c, t.depth(v) + 1) != s {
                return Err(format!("edge {v} -> {c} is filed under the wrong symbol"));
            }
        }
        if t.is_overlay(v) {
            if ch.len() != 1 {
                return Err(format!("overlay node {v} has {} children", ch.len()));
            }
        } else if v != 0 && ch.len() == 1 {
            return Err(format!("original node {v} has a single child"));
        } else if ch.is_empty() && v != 0 && t.leaf_key(v) == NIL {
            return Err(format!("leaf {v} has no key"));
        }
    }
    Ok(())
}
