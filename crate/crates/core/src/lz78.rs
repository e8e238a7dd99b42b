//! LZ78 factorizations: the pair encoding, the incremental trie algorithm on
//! uncompressed text, and an independent checker.

use std::collections::HashMap;

use thiserror::Error;

/// One factor: the id of the previous factor it extends (0 = empty factor)
/// and the character appended to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lz78Pair {
    pub parent: u32,
    pub ch: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lz78Factorization {
    pub pairs: Vec<Lz78Pair>,
}

impl Lz78Factorization {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Length of every factor, indexed by factor id (entry 0 is the empty factor).
    pub fn factor_lengths(&self) -> Vec<u64> {
        let mut lens = Vec::with_capacity(self.pairs.len() + 1);
        lens.push(0u64);
        for p in &self.pairs {
            let l = lens[p.parent as usize] + 1;
            lens.push(l);
        }
        lens
    }

    /// Longest factor length `L`.
    pub fn longest(&self) -> u64 {
        self.factor_lengths().into_iter().max().unwrap_or(0)
    }

    /// Factor `id` (1-based) as a string.
    pub fn factor(&self, id: u32) -> Vec<u8> {
        let mut out = Vec::new();
        let mut cur = id;
        while cur != 0 {
            let p = self.pairs[cur as usize - 1];
            out.push(p.ch);
            cur = p.parent;
        }
        out.reverse();
        out
    }

    /// Concatenation of all factors.
    pub fn decode(&self) -> Vec<u8> {
        let lens = self.factor_lengths();
        let mut start = vec![0usize; self.pairs.len() + 1];
        let mut out = Vec::with_capacity(lens.iter().sum::<u64>() as usize);
        for (i, p) in self.pairs.iter().enumerate() {
            let id = i + 1;
            start[id] = out.len();
            let plen = lens[p.parent as usize] as usize;
            let ps = start[p.parent as usize];
            for k in 0..plen {
                let b = out[ps + k];
                out.push(b);
            }
            out.push(p.ch);
        }
        out
    }
}

/// Greedy LZ78 on an uncompressed text using a parent/character table.
///
/// The text is taken as is; when the remainder after the last new factor is
/// itself a previous factor, the final pair repeats that factor's pair.
pub fn factorize_naive(text: &[u8]) -> Lz78Factorization {
    let mut children: HashMap<(u32, u8), u32> = HashMap::new();
    let mut pairs: Vec<Lz78Pair> = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let mut node = 0u32;
        loop {
            if i == text.len() {
                // The remainder is an existing factor.
                pairs.push(pairs[node as usize - 1]);
                return Lz78Factorization { pairs };
            }
            match children.get(&(node, text[i])) {
                Some(&next) => {
                    node = next;
                    i += 1;
                }
                None => break,
            }
        }
        let id = pairs.len() as u32 + 1;
        pairs.push(Lz78Pair {
            parent: node,
            ch: text[i],
        });
        children.insert((node, text[i]), id);
        i += 1;
    }
    Lz78Factorization { pairs }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Lz78Violation {
    #[error("factor {factor} refers to parent {parent}, which is not an earlier factor")]
    BadParent { factor: usize, parent: u32 },
    #[error("factor {factor} does not match the text at position {position}")]
    Mismatch { factor: usize, position: usize },
    #[error("factors cover {covered} characters but the text has {expected}")]
    LengthMismatch { covered: u64, expected: usize },
    #[error("factor {factor} repeats factor {earlier} (parse is not greedy)")]
    NotGreedy { factor: usize, earlier: usize },
}

impl Lz78Violation {
    /// 1-based factor the violation was found at, 0 for length mismatches.
    pub fn factor_index(&self) -> usize {
        match *self {
            Lz78Violation::BadParent { factor, .. }
            | Lz78Violation::Mismatch { factor, .. }
            | Lz78Violation::NotGreedy { factor, .. } => factor,
            Lz78Violation::LengthMismatch { .. } => 0,
        }
    }
}

/// Checks concatenation, parent closure and pairwise distinctness. Only
/// the last factor may repeat an earlier one, and then only because the
/// text ends there.
pub fn verify_factorization(text: &[u8], f: &Lz78Factorization) -> Result<(), Lz78Violation> {
    let m = f.pairs.len();
    let mut lens = vec![0u64; m + 1];
    let mut start = vec![0usize; m + 1];
    let mut seen: HashMap<Lz78Pair, usize> = HashMap::with_capacity(m);
    let mut pos = 0usize;
    for (i, p) in f.pairs.iter().enumerate() {
        let id = i + 1;
        if p.parent as usize >= id {
            return Err(Lz78Violation::BadParent {
                factor: id,
                parent: p.parent,
            });
        }
        if let Some(&earlier) = seen.get(p) {
            if id != m {
                return Err(Lz78Violation::NotGreedy {
                    factor: id,
                    earlier,
                });
            }
        } else {
            seen.insert(*p, id);
        }
        let plen = lens[p.parent as usize] as usize;
        lens[id] = plen as u64 + 1;
        start[id] = pos;
        if pos + plen >= text.len() {
            return Err(Lz78Violation::LengthMismatch {
                covered: (pos + plen + 1) as u64,
                expected: text.len(),
            });
        }
        let ps = start[p.parent as usize];
        if text[pos..pos + plen] != text[ps..ps + plen] || text[pos + plen] != p.ch {
            return Err(Lz78Violation::Mismatch {
                factor: id,
                position: pos + 1,
            });
        }
        pos += plen + 1;
    }
    if pos != text.len() {
        return Err(Lz78Violation::LengthMismatch {
            covered: pos as u64,
            expected: text.len(),
        });
    }
    Ok(())
}

/// Largest integer `c` with `c(c+1)/2 <= n`, i.e. the floor of the factor
/// length bound for a text of length `n`.
pub fn factor_length_bound(n: u64) -> u64 {
    let mut c = (((8.0 * n as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while c > 0 && c * (c + 1) / 2 > n {
        c -= 1;
    }
    while (c + 1) * (c + 2) / 2 <= n {
        c += 1;
    }
    c
}

/// Both factor-count and factor-length bounds for an LZ78 parse of a text
/// of length `n`: `m(m+1)/2 >= n` and every factor is at most
/// [`factor_length_bound`] long.
pub fn check_length_bounds(n: u64, f: &Lz78Factorization) -> Result<(), String> {
    let m = f.len() as u64;
    if m * (m + 1) / 2 < n {
        return Err(format!("only {m} factors for a text of length {n}"));
    }
    let longest = f.longest();
    let bound = factor_length_bound(n);
    if longest > bound {
        return Err(format!("factor of length {longest} exceeds bound {bound}"));
    }
    Ok(())
}

/// Default range searched for a sentinel character.
pub const DEFAULT_SENTINEL_RANGE: (u8, u8) = (0x00, 0x1f);

/// Environment variable overriding the sentinel range, as `lo-hi` with
/// decimal or `0x`-prefixed bounds.
pub const SENTINEL_RANGE_ENV: &str = "SLPLZ_SENTINEL_RANGE";

pub fn parse_sentinel_range(spec: &str) -> Result<(u8, u8), String> {
    let parse = |s: &str| -> Result<u8, String> {
        let s = s.trim();
        let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(h) => u8::from_str_radix(h, 16),
            None => s.parse::<u8>(),
        };
        r.map_err(|e| format!("bad sentinel bound {s:?}: {e}"))
    };
    let (lo, hi) = spec
        .split_once('-')
        .ok_or_else(|| format!("sentinel range {spec:?} is not of the form lo-hi"))?;
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty sentinel range {spec:?}"));
    }
    Ok((lo, hi))
}

/// Sentinel range from the environment, or the default.
pub fn sentinel_range_from_env() -> Result<(u8, u8), String> {
    match std::env::var(SENTINEL_RANGE_ENV) {
        Ok(v) => parse_sentinel_range(&v),
        Err(_) => Ok(DEFAULT_SENTINEL_RANGE),
    }
}

/// First byte of `range` not in `alphabet`.
pub fn choose_sentinel(alphabet: &[u8], range: (u8, u8)) -> Option<u8> {
    let mut used = [false; 256];
    for &b in alphabet {
        used[b as usize] = true;
    }
    (range.0..=range.1).find(|&b| !used[b as usize])
}
