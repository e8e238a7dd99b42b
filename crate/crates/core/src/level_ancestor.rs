//! Static level-ancestor queries via ladder decomposition and jump pointers.
//!
//! Works on forests given as parent arrays (`NIL` marks a root). After
//! O(n log n) preprocessing, `ancestor(v, l)` costs one jump plus one
//! ladder lookup.

pub const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct LevelAncestor {
    depth: Vec<u32>,
    levels: usize,
    /// `jump[v * levels + k]` is the `2^k`-th ancestor of `v` (or `NIL`).
    jump: Vec<u32>,
    ladder_of: Vec<u32>,
    ladder_pos: Vec<u32>,
    ladder_start: Vec<u32>,
    ladder_nodes: Vec<u32>,
}

impl LevelAncestor {
    pub fn new(parent: &[u32]) -> Self {
        let n = parent.len();
        let mut child_start = vec![0u32; n + 1];
        for &p in parent {
            if p != NIL {
                child_start[p as usize + 1] += 1;
            }
        }
        for i in 0..n {
            child_start[i + 1] += child_start[i];
        }
        let mut fill = child_start.clone();
        let mut children = vec![0u32; child_start[n] as usize];
        for (v, &p) in parent.iter().enumerate() {
            if p != NIL {
                children[fill[p as usize] as usize] = v as u32;
                fill[p as usize] += 1;
            }
        }

        // Top-down order.
        let mut order: Vec<u32> = (0..n as u32)
            .filter(|&v| parent[v as usize] == NIL)
            .collect();
        let mut depth = vec![0u32; n];
        let mut head = 0;
        while head < order.len() {
            let v = order[head] as usize;
            head += 1;
            for &c in &children[child_start[v] as usize..child_start[v + 1] as usize] {
                depth[c as usize] = depth[v] + 1;
                order.push(c);
            }
        }
        assert_eq!(order.len(), n, "parent array contains a cycle");

        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let levels = (u32::BITS - max_depth.leading_zeros()).max(1) as usize;
        let mut jump = vec![NIL; n * levels];
        for &v in &order {
            let v = v as usize;
            jump[v * levels] = parent[v];
            for k in 1..levels {
                let mid = jump[v * levels + k - 1];
                jump[v * levels + k] = if mid == NIL {
                    NIL
                } else {
                    jump[mid as usize * levels + k - 1]
                };
            }
        }

        // Heights and long children.
        let mut height = vec![1u32; n];
        let mut long_child = vec![NIL; n];
        for &v in order.iter().rev() {
            let v = v as usize;
            let p = parent[v];
            if p != NIL {
                let p = p as usize;
                if height[v] + 1 > height[p] {
                    height[p] = height[v] + 1;
                    long_child[p] = v as u32;
                }
            }
        }

        // Long paths, each extended upward by its own length into a ladder.
        let mut ladder_of = vec![NIL; n];
        let mut ladder_pos = vec![0u32; n];
        let mut ladder_start = Vec::new();
        let mut ladder_nodes = Vec::new();
        for &top in &order {
            let t = top as usize;
            let is_head = parent[t] == NIL || long_child[parent[t] as usize] != top;
            if !is_head {
                continue;
            }
            let mut path = Vec::with_capacity(height[t] as usize);
            let mut cur = top;
            while cur != NIL {
                path.push(cur);
                cur = long_child[cur as usize];
            }
            let id = ladder_start.len() as u32;
            let start = ladder_nodes.len() as u32;
            ladder_start.push(start);
            // Bottom first.
            for (i, &v) in path.iter().rev().enumerate() {
                ladder_of[v as usize] = id;
                ladder_pos[v as usize] = i as u32;
                ladder_nodes.push(v);
            }
            let mut up = parent[t];
            let mut extra = path.len();
            while up != NIL && extra > 0 {
                ladder_nodes.push(up);
                up = parent[up as usize];
                extra -= 1;
            }
        }
        ladder_start.push(ladder_nodes.len() as u32);

        LevelAncestor {
            depth,
            levels,
            jump,
            ladder_of,
            ladder_pos,
            ladder_start,
            ladder_nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    /// Number of edges between `v` and its root.
    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    /// The `l`-th node on the path from `v` to its root; `l = 0` gives `v`.
    pub fn ancestor(&self, v: u32, l: u32) -> Option<u32> {
        if l > self.depth[v as usize] {
            return None;
        }
        if l == 0 {
            return Some(v);
        }
        let k = (u32::BITS - 1 - l.leading_zeros()) as usize;
        let u = self.jump[v as usize * self.levels + k];
        let rest = l - (1 << k);
        let ladder = self.ladder_of[u as usize] as usize;
        let idx = self.ladder_start[ladder] + self.ladder_pos[u as usize] + rest;
        debug_assert!(idx < self.ladder_start[ladder + 1]);
        Some(self.ladder_nodes[idx as usize])
    }

    /// Approximate heap footprint in 32-bit words.
    pub fn words(&self) -> usize {
        self.depth.len() * 3 + self.jump.len() + self.ladder_start.len() + self.ladder_nodes.len()
    }
}
