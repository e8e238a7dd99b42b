//! Straight-line programs: representation, validation, metadata and
//! construction helpers.
//!
//! Variables are addressed by dense 0-based indices in rule order; the text
//! format numbers them from 1. Every pair rule refers only to earlier rules
//! and the last rule is the root.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::format::{self, content_lines, parse_header, parse_number, FormatError};
use crate::lz78::Lz78Factorization;

/// Index of a grammar variable (0-based).
pub type VarId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Terminal(u8),
    Pair(VarId, VarId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("line {line}: rule {rule} refers to later variable {child}")]
    ForwardReference {
        line: usize,
        rule: usize,
        child: usize,
    },
    #[error("line {line}: rule {rule} refers to undefined variable {child}")]
    DanglingReference {
        line: usize,
        rule: usize,
        child: usize,
    },
    #[error("grammar has no rules")]
    NoRules,
    #[error("expansion length overflows 64 bits at rule {rule}")]
    TooLong { rule: usize },
    #[error("cannot build a grammar for the empty text")]
    EmptyText,
}

/// A validated straight-line program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlpGrammar {
    rules: Vec<Rule>,
    text_len: u64,
}

impl SlpGrammar {
    /// Validates `rules` (0-based child indices) and builds a grammar.
    pub fn new(rules: Vec<Rule>) -> Result<Self, SlpError> {
        if rules.is_empty() {
            return Err(SlpError::NoRules);
        }
        let mut lens = Vec::with_capacity(rules.len());
        for (i, r) in rules.iter().enumerate() {
            let len = match *r {
                Rule::Terminal(_) => 1u64,
                Rule::Pair(l, r) => {
                    for c in [l as usize, r as usize] {
                        if c >= rules.len() {
                            return Err(SlpError::DanglingReference {
                                line: 0,
                                rule: i + 1,
                                child: c + 1,
                            });
                        }
                        if c >= i {
                            return Err(SlpError::ForwardReference {
                                line: 0,
                                rule: i + 1,
                                child: c + 1,
                            });
                        }
                    }
                    let a: u64 = lens[l as usize];
                    a.checked_add(lens[r as usize])
                        .ok_or(SlpError::TooLong { rule: i + 1 })?
                }
            };
            lens.push(len);
        }
        let text_len = *lens.last().unwrap();
        Ok(SlpGrammar { rules, text_len })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, v: VarId) -> Rule {
        self.rules[v as usize]
    }

    /// Number of rules `n`.
    pub fn size(&self) -> usize {
        self.rules.len()
    }

    pub fn root(&self) -> VarId {
        (self.rules.len() - 1) as VarId
    }

    /// Length `N` of the derived text.
    pub fn text_len(&self) -> u64 {
        self.text_len
    }

    /// Sorted set of characters used by terminal rules.
    pub fn alphabet(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for r in &self.rules {
            if let Rule::Terminal(b) = *r {
                seen[b as usize] = true;
            }
        }
        (0..=255u8).filter(|&b| seen[b as usize]).collect()
    }

    /// Derives the full text. Uses an explicit stack, so deep grammars are fine.
    pub fn expand(&self) -> Vec<u8> {
        self.expand_var(self.root())
    }

    pub fn expand_var(&self, v: VarId) -> Vec<u8> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(v) = stack.pop() {
            match self.rules[v as usize] {
                Rule::Terminal(b) => out.push(b),
                Rule::Pair(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }

    /// Serializes to the `SLP1` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("SLP1 {}\n", self.rules.len());
        for r in &self.rules {
            match *r {
                Rule::Terminal(b) => {
                    out.push_str("T ");
                    format::escape_byte_into(b, &mut out);
                    out.push('\n');
                }
                Rule::Pair(l, r) => {
                    let _ = writeln!(out, "P {} {}", l + 1, r + 1);
                }
            }
        }
        out
    }

    /// Grammar for `val(self) · val(other)`: the rules of `other` are
    /// renumbered after ours and one pair rule joins the two roots.
    pub fn concat(&self, other: &SlpGrammar) -> SlpGrammar {
        let shift = self.rules.len() as VarId;
        let mut rules = self.rules.clone();
        rules.extend(other.rules.iter().map(|r| match *r {
            Rule::Terminal(b) => Rule::Terminal(b),
            Rule::Pair(l, r) => Rule::Pair(l + shift, r + shift),
        }));
        rules.push(Rule::Pair(self.root(), other.root() + shift));
        SlpGrammar::new(rules).expect("concatenation of valid grammars is valid")
    }

    /// Grammar for `val(self) · sentinel`.
    pub fn with_trailing(&self, sentinel: u8) -> SlpGrammar {
        let mut rules = self.rules.clone();
        rules.push(Rule::Terminal(sentinel));
        let t = (rules.len() - 1) as VarId;
        rules.push(Rule::Pair(self.root(), t));
        SlpGrammar::new(rules).expect("appending a terminal keeps the grammar valid")
    }
}

/// Parses the `SLP1` text format.
pub fn parse_slp(input: &str) -> Result<SlpGrammar, SlpError> {
    let mut lines = content_lines(input);
    let (hl, header) = lines.next().ok_or(FormatError::Empty)?;
    let declared = parse_header(hl, header, "SLP1")?;
    let mut rules = Vec::with_capacity(declared);
    for (no, line) in lines {
        let i = rules.len() + 1;
        let mut parts = line.split_whitespace();
        let rule = match parts.next() {
            Some("T") => {
                let tok = parts
                    .next()
                    .ok_or_else(|| format::syntax(no, "missing terminal character"))?;
                Rule::Terminal(format::unescape_byte(tok).map_err(|m| format::syntax(no, m))?)
            }
            Some("P") => {
                let l: usize = parse_number(no, parts.next(), "left variable id")?;
                let r: usize = parse_number(no, parts.next(), "right variable id")?;
                for c in [l, r] {
                    if c == 0 || c > declared {
                        return Err(SlpError::DanglingReference {
                            line: no,
                            rule: i,
                            child: c,
                        });
                    }
                    if c >= i {
                        return Err(SlpError::ForwardReference {
                            line: no,
                            rule: i,
                            child: c,
                        });
                    }
                }
                Rule::Pair((l - 1) as VarId, (r - 1) as VarId)
            }
            _ => {
                return Err(format::syntax(no, "expected `T <char>` or `P <left> <right>`").into())
            }
        };
        if parts.next().is_some() {
            return Err(format::syntax(no, "trailing tokens").into());
        }
        rules.push(rule);
    }
    if rules.len() != declared {
        return Err(FormatError::CountMismatch {
            declared,
            found: rules.len(),
        }
        .into());
    }
    SlpGrammar::new(rules)
}

/// Exact per-variable metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableStats {
    /// `|X_i|`.
    pub length: Vec<u64>,
    /// Occurrences of each variable in the derivation tree (0 if unreachable).
    pub vocc: Vec<u64>,
    /// Derivation height; terminals have height 1.
    pub height: Vec<u32>,
}

impl VariableStats {
    pub fn compute(g: &SlpGrammar) -> Self {
        let n = g.size();
        let mut length = vec![0u64; n];
        let mut height = vec![0u32; n];
        for (i, r) in g.rules().iter().enumerate() {
            match *r {
                Rule::Terminal(_) => {
                    length[i] = 1;
                    height[i] = 1;
                }
                Rule::Pair(l, r) => {
                    length[i] = length[l as usize] + length[r as usize];
                    height[i] = 1 + height[l as usize].max(height[r as usize]);
                }
            }
        }
        let mut vocc = vec![0u64; n];
        vocc[n - 1] = 1;
        for i in (0..n).rev() {
            if let Rule::Pair(l, r) = g.rules()[i] {
                let v = vocc[i];
                vocc[l as usize] += v;
                vocc[r as usize] += v;
            }
        }
        VariableStats {
            length,
            vocc,
            height,
        }
    }
}

pub fn compute_stats(g: &SlpGrammar) -> VariableStats {
    VariableStats::compute(g)
}

/// Builds grammars bottom-up, sharing identical rules.
#[derive(Debug, Default, Clone)]
pub struct GrammarBuilder {
    rules: Vec<Rule>,
    lens: Vec<u64>,
    heights: Vec<u32>,
    terminals: HashMap<u8, VarId>,
    pairs: HashMap<(VarId, VarId), VarId>,
}

impl GrammarBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terminal(&mut self, b: u8) -> VarId {
        if let Some(&v) = self.terminals.get(&b) {
            return v;
        }
        let v = self.push(Rule::Terminal(b), 1, 1);
        self.terminals.insert(b, v);
        v
    }

    pub fn pair(&mut self, l: VarId, r: VarId) -> VarId {
        if let Some(&v) = self.pairs.get(&(l, r)) {
            return v;
        }
        let len = self.lens[l as usize] + self.lens[r as usize];
        let h = 1 + self.heights[l as usize].max(self.heights[r as usize]);
        let v = self.push(Rule::Pair(l, r), len, h);
        self.pairs.insert((l, r), v);
        v
    }

    fn push(&mut self, rule: Rule, len: u64, h: u32) -> VarId {
        self.rules.push(rule);
        self.lens.push(len);
        self.heights.push(h);
        (self.rules.len() - 1) as VarId
    }

    pub fn len_of(&self, v: VarId) -> u64 {
        self.lens[v as usize]
    }

    pub fn height_of(&self, v: VarId) -> u32 {
        self.heights[v as usize]
    }

    pub fn rule(&self, v: VarId) -> Rule {
        self.rules[v as usize]
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Keeps only the rules reachable from `root` and renumbers them in
    /// their original order, which makes `root` the last rule.
    pub fn finish(self, root: VarId) -> SlpGrammar {
        let n = root as usize + 1;
        let mut keep = vec![false; n];
        keep[n - 1] = true;
        for i in (0..n).rev() {
            if keep[i] {
                if let Rule::Pair(l, r) = self.rules[i] {
                    keep[l as usize] = true;
                    keep[r as usize] = true;
                }
            }
        }
        let mut new_id = vec![VarId::MAX; n];
        let mut rules = Vec::new();
        for i in 0..n {
            if !keep[i] {
                continue;
            }
            new_id[i] = rules.len() as VarId;
            rules.push(match self.rules[i] {
                Rule::Terminal(b) => Rule::Terminal(b),
                Rule::Pair(l, r) => Rule::Pair(new_id[l as usize], new_id[r as usize]),
            });
        }
        SlpGrammar::new(rules).expect("builder only emits valid rules")
    }
}

/// Balanced grammar for `s` by recursive halving; identical halves share rules.
pub fn text_to_slp(s: &[u8]) -> Result<SlpGrammar, SlpError> {
    if s.is_empty() {
        return Err(SlpError::EmptyText);
    }
    let mut b = GrammarBuilder::new();
    let mut memo: HashMap<&[u8], VarId> = HashMap::new();
    // Post-order over (slice, expanded?) frames.
    let mut stack: Vec<(&[u8], bool)> = vec![(s, false)];
    let mut results: Vec<VarId> = Vec::new();
    while let Some((part, expanded)) = stack.pop() {
        if part.len() == 1 {
            results.push(b.terminal(part[0]));
            continue;
        }
        if let Some(&v) = memo.get(part) {
            results.push(v);
            continue;
        }
        let mid = part.len().div_ceil(2);
        if !expanded {
            stack.push((part, true));
            stack.push((&part[mid..], false));
            stack.push((&part[..mid], false));
        } else {
            let r = results.pop().unwrap();
            let l = results.pop().unwrap();
            let v = b.pair(l, r);
            memo.insert(part, v);
            results.push(v);
        }
    }
    let root = results.pop().unwrap();
    Ok(b.finish(root))
}

/// Grammar of size O(m) deriving the text of an LZ78 factorization: one
/// terminal per distinct character, one pair per factor with a non-empty
/// parent, and a left-to-right concatenation spine.
pub fn lz78_to_slp(f: &Lz78Factorization) -> SlpGrammar {
    assert!(!f.pairs.is_empty(), "factorization must be non-empty");
    let mut rules: Vec<Rule> = Vec::new();
    let mut term: HashMap<u8, VarId> = HashMap::new();
    let mut factor_var: Vec<VarId> = Vec::with_capacity(f.pairs.len() + 1);
    factor_var.push(VarId::MAX);
    for p in &f.pairs {
        let t = *term.entry(p.ch).or_insert_with(|| {
            rules.push(Rule::Terminal(p.ch));
            (rules.len() - 1) as VarId
        });
        let v = if p.parent == 0 {
            t
        } else {
            rules.push(Rule::Pair(factor_var[p.parent as usize], t));
            (rules.len() - 1) as VarId
        };
        factor_var.push(v);
    }
    let mut acc = factor_var[1];
    for &v in &factor_var[2..] {
        rules.push(Rule::Pair(acc, v));
        acc = (rules.len() - 1) as VarId;
    }
    SlpGrammar::new(rules).expect("factor rules reference earlier rules only")
}

/// The grammar drawn in the running example: `aababaababaab`.
pub fn example_grammar() -> SlpGrammar {
    use Rule::*;
    SlpGrammar::new(vec![
        Terminal(b'a'),
        Terminal(b'b'),
        Pair(0, 1),
        Pair(0, 2),
        Pair(2, 3),
        Pair(3, 4),
        Pair(5, 4),
    ])
    .unwrap()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lz78::Lz78Pair;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) const EXAMPLE_SLP: &str = "SLP1 7\nT a\nT b\nP 1 2\nP 1 3\nP 3 4\nP 4 5\nP 6 5\n";

    fn naive_expand(g: &SlpGrammar, v: VarId, out: &mut Vec<u8>) {
        match g.rule(v) {
            Rule::Terminal(b) => out.push(b),
            Rule::Pair(l, r) => {
                naive_expand(g, l, out);
                naive_expand(g, r, out);
            }
        }
    }

    pub(crate) fn random_grammar(rng: &mut ChaCha8Rng, n: usize, sigma: u8) -> SlpGrammar {
        let mut rules = Vec::with_capacity(n);
        let terms = rng.gen_range(1..=sigma.min(n as u8).max(1));
        for t in 0..terms {
            rules.push(Rule::Terminal(b'a' + t));
        }
        while rules.len() < n {
            let i = rules.len() as VarId;
            rules.push(Rule::Pair(rng.gen_range(0..i), rng.gen_range(0..i)));
        }
        SlpGrammar::new(rules).unwrap()
    }

    #[test]
    fn parses_running_example() {
        let g = parse_slp(EXAMPLE_SLP).unwrap();
        assert_eq!(g.size(), 7);
        assert_eq!(g.root(), 6);
        assert_eq!(g, example_grammar());
        assert_eq!(g.expand(), b"aababaababaab");
        assert_eq!(parse_slp(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn smallest_grammar() {
        let g = parse_slp("SLP1 1\nT a\n").unwrap();
        assert_eq!(g.expand(), b"a");
        let st = compute_stats(&g);
        assert_eq!(st.length, vec![1]);
        assert_eq!(st.vocc, vec![1]);
        assert_eq!(st.height, vec![1]);
    }

    #[test]
    fn parse_errors() {
        let dangling = "SLP1 7\nT a\nT b\nP 1 2\nP 1 9\nP 3 4\nP 4 5\nP 6 5\n";
        assert!(matches!(
            parse_slp(dangling),
            Err(SlpError::DanglingReference {
                line: 5,
                rule: 4,
                child: 9
            })
        ));
        let forward = "SLP1 3\nT a\nP 1 3\nP 1 2\n";
        assert!(matches!(
            parse_slp(forward),
            Err(SlpError::ForwardReference {
                line: 3,
                rule: 2,
                child: 3
            })
        ));
        assert!(matches!(
            parse_slp("SLP1 2\nT a\nQ 1 1\n"),
            Err(SlpError::Format(FormatError::Syntax { line: 3, .. }))
        ));
        assert!(matches!(
            parse_slp("SLP1 0\n"),
            Err(SlpError::Format(FormatError::CountMismatch { .. })) | Err(SlpError::NoRules)
        ));
        assert!(matches!(
            parse_slp(""),
            Err(SlpError::Format(FormatError::Empty))
        ));
        assert!(matches!(
            parse_slp("SLP1 1\nT a\nT b\n"),
            Err(SlpError::Format(FormatError::CountMismatch {
                declared: 1,
                found: 2
            }))
        ));
    }

    #[test]
    fn comments_and_escapes() {
        let g = parse_slp("# header comment\nSLP1 3\n  # indented comment\nT \\x20\nT #\nP 1 2\n")
            .unwrap();
        assert_eq!(g.expand(), b" #");
    }

    #[test]
    fn stats_of_running_example() {
        let g = example_grammar();
        let st = compute_stats(&g);
        // Frozen from expanding each variable separately.
        let measured: Vec<u64> = (0..7).map(|v| g.expand_var(v).len() as u64).collect();
        assert_eq!(measured, vec![1, 1, 2, 3, 5, 8, 13]);
        assert_eq!(st.length, measured);
        assert_eq!(st.vocc[4], 2);
        assert_eq!(st.vocc[6], 1);
        assert_eq!(st.height, vec![1, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn random_grammars_expand_like_recursion_and_satisfy_recurrences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=50);
            let g = random_grammar(&mut rng, n, 4);
            if g.text_len() > 1 << 16 {
                continue;
            }
            let mut oracle = Vec::new();
            naive_expand(&g, g.root(), &mut oracle);
            assert_eq!(g.expand(), oracle);
            let st = compute_stats(&g);
            let mut term_occ = 0;
            let mut expected_vocc = vec![0u64; g.size()];
            expected_vocc[g.root() as usize] = 1;
            for i in (0..g.size()).rev() {
                if let Rule::Pair(l, r) = g.rules()[i] {
                    expected_vocc[l as usize] += expected_vocc[i];
                    expected_vocc[r as usize] += expected_vocc[i];
                }
            }
            for (i, r) in g.rules().iter().enumerate() {
                match *r {
                    Rule::Terminal(_) => {
                        assert_eq!(st.length[i], 1);
                        term_occ += st.vocc[i];
                    }
                    Rule::Pair(l, r) => {
                        assert_eq!(st.length[i], st.length[l as usize] + st.length[r as usize]);
                        let mut a = g.expand_var(l);
                        a.extend(g.expand_var(r));
                        assert_eq!(g.expand_var(i as VarId), a);
                    }
                }
            }
            assert_eq!(st.vocc, expected_vocc);
            assert_eq!(term_occ, g.text_len());
        }
    }

    #[test]
    fn text_to_slp_examples() {
        let g = text_to_slp(b"ab").unwrap();
        assert_eq!(g.size(), 3);
        assert_eq!(g.expand(), b"ab");
        let g = text_to_slp(b"aababaababaab").unwrap();
        assert_eq!(g.expand(), b"aababaababaab");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let text: Vec<u8> = (0..1000).map(|_| rng.gen_range(b'a'..=b'z')).collect();
        let g = text_to_slp(&text).unwrap();
        let st = compute_stats(&g);
        assert!(st.height[g.root() as usize] <= 11);
        assert_eq!(g.expand(), text);
        assert_eq!(text_to_slp(b""), Err(SlpError::EmptyText));
    }

    #[test]
    fn lz78_to_slp_small_cases() {
        let single = Lz78Factorization {
            pairs: vec![Lz78Pair {
                parent: 0,
                ch: b'a',
            }],
        };
        let g = lz78_to_slp(&single);
        assert_eq!(g.size(), 1);
        assert_eq!(g.expand(), b"a");

        let ex1 = crate::lz78::factorize_naive(b"aaabaabbbaaaaaaaba$");
        let g = lz78_to_slp(&ex1);
        assert_eq!(g.expand(), b"aaabaabbbaaaaaaaba$");
        assert!(g.size() <= 2 * ex1.len() + 3);
    }

    #[test]
    fn concat_and_trailing() {
        let g = example_grammar();
        let h = text_to_slp(b"xy").unwrap();
        assert_eq!(g.concat(&h).expand(), b"aababaababaabxy");
        assert_eq!(g.with_trailing(b'$').expand(), b"aababaababaab$");
    }

    proptest! {
        #[test]
        fn lz78_round_trip(s in proptest::collection::vec(b'a'..b'e', 1..300)) {
            let f = crate::lz78::factorize_naive(&s);
            let g = lz78_to_slp(&f);
            prop_assert_eq!(g.expand(), s);
            let sigma = g.alphabet().len();
            prop_assert!(g.size() <= 2 * f.len() + sigma);
        }

        #[test]
        fn text_round_trip_is_balanced(s in proptest::collection::vec(any::<u8>(), 1..600)) {
            let g = text_to_slp(&s).unwrap();
            prop_assert_eq!(g.expand(), s.clone());
            let h = compute_stats(&g).height[g.root() as usize];
            let bound = (s.len() as f64).log2().ceil() as u32 + 1;
            prop_assert!(h <= bound);
            prop_assert_eq!(parse_slp(&g.to_text()).unwrap(), g);
        }
    }
}
