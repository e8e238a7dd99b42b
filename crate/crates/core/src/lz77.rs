//! Non-self-referential LZ77 parsing and its conversion to a balanced SLP.
//!
//! Each phrase is either a fresh literal or the longest prefix of the
//! remaining text that also occurs entirely inside the already parsed
//! prefix; ties go to the leftmost source. The conversion builds an AVL
//! grammar phrase by phrase: a copy is cut out of the grammar of the prefix
//! as O(h) boundary variables which are then joined with rotations.

use thiserror::Error;

use crate::slp::{GrammarBuilder, Rule, SlpGrammar, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lz77Factor {
    Literal(u8),
    /// Copy of `len` characters starting at 1-based position `src`.
    Copy {
        src: u64,
        len: u64,
    },
}

impl Lz77Factor {
    pub fn len(&self) -> u64 {
        match *self {
            Lz77Factor::Literal(_) => 1,
            Lz77Factor::Copy { len, .. } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lz77Factorization {
    pub factors: Vec<Lz77Factor>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Lz77Error {
    #[error(
        "phrase {index} copies [{src}, {end}] which is not inside the first {avail} characters"
    )]
    BadCopy {
        index: usize,
        src: u64,
        end: u64,
        avail: u64,
    },
    #[error("the parse is empty")]
    Empty,
}

impl Lz77Factorization {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn text_len(&self) -> u64 {
        self.factors.iter().map(|f| f.len()).sum()
    }

    fn check_copy(index: usize, src: u64, len: u64, avail: u64) -> Result<(), Lz77Error> {
        let end = src + len - 1;
        if src == 0 || len == 0 || end > avail {
            return Err(Lz77Error::BadCopy {
                index,
                src,
                end,
                avail,
            });
        }
        Ok(())
    }

    pub fn decode(&self) -> Result<Vec<u8>, Lz77Error> {
        let mut out: Vec<u8> = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            match *f {
                Lz77Factor::Literal(b) => out.push(b),
                Lz77Factor::Copy { src, len } => {
                    Self::check_copy(i, src, len, out.len() as u64)?;
                    let s = src as usize - 1;
                    out.extend_from_within(s..s + len as usize);
                }
            }
        }
        Ok(out)
    }
}

fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

fn push_phrase(out: &mut Vec<Lz77Factor>, text: &[u8], p: usize, src: usize, len: usize) {
    if len == 0 {
        out.push(Lz77Factor::Literal(text[p]));
    } else {
        out.push(Lz77Factor::Copy {
            src: src as u64 + 1,
            len: len as u64,
        });
    }
}

/// Quadratic reference parser.
pub fn factorize_lz77_naive(text: &[u8]) -> Lz77Factorization {
    let mut factors = Vec::new();
    let mut p = 0;
    while p < text.len() {
        let (mut best, mut best_src) = (0, 0);
        for s in 0..p {
            let l = common_prefix(&text[s..p], &text[p..]);
            if l > best {
                best = l;
                best_src = s;
            }
        }
        push_phrase(&mut factors, text, p, best_src, best);
        p += best.max(1);
    }
    Lz77Factorization { factors }
}

struct SparseMin {
    table: Vec<Vec<u32>>,
}

impl SparseMin {
    fn new(values: Vec<u32>) -> Self {
        let mut table = vec![values];
        let mut w = 1;
        while 2 * w <= table[0].len() {
            let prev = table.last().unwrap();
            let next = (0..prev.len() - w)
                .map(|i| prev[i].min(prev[i + w]))
                .collect();
            table.push(next);
            w *= 2;
        }
        SparseMin { table }
    }

    /// Minimum over the inclusive range `[i, j]`.
    fn min(&self, i: usize, j: usize) -> u32 {
        let k = (usize::BITS - 1 - (j - i + 1).leading_zeros()) as usize;
        self.table[k][i].min(self.table[k][j + 1 - (1 << k)])
    }
}

fn suffix_array(text: &[u8]) -> Vec<u32> {
    let n = text.len();
    let mut sa: Vec<u32> = (0..n as u32).collect();
    let mut rank: Vec<u32> = text.iter().map(|&b| b as u32 + 1).collect();
    let mut tmp = vec![0u32; n];
    let mut k = 1;
    loop {
        let key = |i: u32| {
            let i = i as usize;
            (rank[i], if i + k < n { rank[i + k] } else { 0 })
        };
        sa.sort_unstable_by_key(|&i| key(i));
        tmp[sa[0] as usize] = 1;
        for w in 1..n {
            let bump = (key(sa[w - 1]) != key(sa[w])) as u32;
            tmp[sa[w] as usize] = tmp[sa[w - 1] as usize] + bump;
        }
        std::mem::swap(&mut rank, &mut tmp);
        if rank[sa[n - 1] as usize] as usize == n || k >= n {
            return sa;
        }
        k *= 2;
    }
}

/// Kasai: `lcp[r]` is the LCP of the suffixes at ranks `r - 1` and `r`.
fn lcp_array(text: &[u8], sa: &[u32], rank: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r > 0 {
            let j = sa[r - 1] as usize;
            while i + h < n && j + h < n && text[i + h] == text[j + h] {
                h += 1;
            }
            lcp[r] = h as u32;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}

/// Greedy parse using a suffix array: for each phrase, binary search the
/// length and test for a source in the matching SA interval that ends
/// before the phrase starts.
pub fn factorize_lz77(text: &[u8]) -> Lz77Factorization {
    let n = text.len();
    if n < 64 {
        return factorize_lz77_naive(text);
    }
    let sa = suffix_array(text);
    let mut rank = vec![0u32; n];
    for (r, &s) in sa.iter().enumerate() {
        rank[s as usize] = r as u32;
    }
    let lcp = SparseMin::new(lcp_array(text, &sa, &rank));
    let pos_min = SparseMin::new(sa.clone());

    // Ranks sharing a prefix of length `len` with rank `r`.
    let interval = |r: usize, len: u32| -> (usize, usize) {
        let (mut lo, mut hi) = (0usize, r);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if lcp.min(mid + 1, r) >= len {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let left = lo;
        let (mut lo, mut hi) = (r, n - 1);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if lcp.min(r + 1, mid) >= len {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        (left, lo)
    };
    let source = |p: usize, len: usize| -> Option<usize> {
        let (a, b) = interval(rank[p] as usize, len as u32);
        let s = pos_min.min(a, b) as usize;
        (s + len <= p).then_some(s)
    };

    let mut factors = Vec::new();
    let mut p = 0;
    while p < n {
        let (mut lo, mut hi) = (0usize, p.min(n - p));
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if source(p, mid).is_some() {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let src = if lo > 0 { source(p, lo).unwrap() } else { 0 };
        push_phrase(&mut factors, text, p, src, lo);
        p += lo.max(1);
    }
    Lz77Factorization { factors }
}

/// AVL-balanced joins on top of a [`GrammarBuilder`].
struct AvlBuilder {
    b: GrammarBuilder,
}

impl AvlBuilder {
    fn h(&self, v: VarId) -> i64 {
        self.b.height_of(v) as i64
    }

    fn children(&self, v: VarId) -> (VarId, VarId) {
        match self.b.rule(v) {
            Rule::Pair(l, r) => (l, r),
            Rule::Terminal(_) => unreachable!("taller side is never a terminal"),
        }
    }

    /// Pair of `l` and `r` whose heights differ by at most two, rebalanced.
    fn node(&mut self, l: VarId, r: VarId) -> VarId {
        let d = self.h(l) - self.h(r);
        if d.abs() <= 1 {
            return self.b.pair(l, r);
        }
        if d > 1 {
            let (a, b) = self.children(l);
            if self.h(a) >= self.h(b) {
                let nr = self.b.pair(b, r);
                self.b.pair(a, nr)
            } else {
                let (b1, b2) = self.children(b);
                let nl = self.b.pair(a, b1);
                let nr = self.b.pair(b2, r);
                self.b.pair(nl, nr)
            }
        } else {
            let (a, b) = self.children(r);
            if self.h(b) >= self.h(a) {
                let nl = self.b.pair(l, a);
                self.b.pair(nl, b)
            } else {
                let (a1, a2) = self.children(a);
                let nl = self.b.pair(l, a1);
                let nr = self.b.pair(a2, b);
                self.b.pair(nl, nr)
            }
        }
    }

    fn join(&mut self, x: VarId, y: VarId) -> VarId {
        let (hx, hy) = (self.h(x), self.h(y));
        if (hx - hy).abs() <= 1 {
            self.b.pair(x, y)
        } else if hx > hy {
            let (l, r) = self.children(x);
            let nr = self.join(r, y);
            self.node(l, nr)
        } else {
            let (l, r) = self.children(y);
            let nl = self.join(x, l);
            self.node(nl, r)
        }
    }

    /// Variables covering `[lo, hi)` of `val(v)`, left to right.
    fn cover(&self, v: VarId, lo: u64, hi: u64, out: &mut Vec<VarId>) {
        if lo == 0 && hi == self.b.len_of(v) {
            out.push(v);
            return;
        }
        let (l, r) = self.children(v);
        let ll = self.b.len_of(l);
        if lo < ll {
            self.cover(l, lo, hi.min(ll), out);
        }
        if hi > ll {
            self.cover(r, lo.max(ll) - ll, hi - ll, out);
        }
    }

    fn extract(&mut self, v: VarId, lo: u64, hi: u64) -> VarId {
        let mut parts = Vec::new();
        self.cover(v, lo, hi, &mut parts);
        // Left boundary pieces grow in height towards the middle, right ones
        // shrink; fold each side from its short end.
        let split = parts
            .iter()
            .enumerate()
            .max_by_key(|&(_, &p)| self.h(p))
            .map(|(i, _)| i)
            .unwrap();
        let mut acc = parts[split];
        let mut left = None;
        for &p in parts[..split].iter() {
            left = Some(match left {
                None => p,
                Some(q) => self.join(q, p),
            });
        }
        let mut right = None;
        for &p in parts[split + 1..].iter().rev() {
            right = Some(match right {
                None => p,
                Some(q) => self.join(p, q),
            });
        }
        if let Some(l) = left {
            acc = self.join(l, acc);
        }
        if let Some(r) = right {
            acc = self.join(acc, r);
        }
        acc
    }
}

/// Balanced grammar for the text encoded by `z`.
pub fn lz77_to_slp(z: &Lz77Factorization) -> Result<SlpGrammar, Lz77Error> {
    let mut avl = AvlBuilder {
        b: GrammarBuilder::new(),
    };
    let mut cur: Option<VarId> = None;
    for (i, f) in z.factors.iter().enumerate() {
        let piece = match *f {
            Lz77Factor::Literal(b) => avl.b.terminal(b),
            Lz77Factor::Copy { src, len } => {
                let avail = cur.map_or(0, |c| avl.b.len_of(c));
                Lz77Factorization::check_copy(i, src, len, avail)?;
                avl.extract(cur.unwrap(), src - 1, src - 1 + len)
            }
        };
        cur = Some(match cur {
            None => piece,
            Some(c) => avl.join(c, piece),
        });
    }
    let root = cur.ok_or(Lz77Error::Empty)?;
    Ok(avl.b.finish(root))
}

/// Largest height difference between the two children of any rule.
pub fn max_imbalance(g: &SlpGrammar) -> u32 {
    let st = crate::slp::compute_stats(g);
    g.rules()
        .iter()
        .map(|r| match *r {
            Rule::Pair(l, r) => st.height[l as usize].abs_diff(st.height[r as usize]),
            Rule::Terminal(_) => 0,
        })
        .max()
        .unwrap_or(0)
}

/// Height allowed for an AVL grammar deriving `n` characters.
pub fn avl_height_bound(n: u64) -> f64 {
    1.45 * ((n + 2) as f64).log2() + 1.0
}

/// Rule budget `8 r max(1, log2 N)` for a parse with `r` phrases.
pub fn avl_rule_bound(r: usize, n: u64) -> f64 {
    8.0 * r as f64 * (n as f64).log2().max(1.0)
}
