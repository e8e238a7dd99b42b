//! Text and grammar generators used by tests, benchmarks and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::slp::{GrammarBuilder, Rule, SlpGrammar, VarId};

/// Fibonacci grammar: `X1 = b`, `X2 = a`, `X_k = X_{k-1} X_{k-2}`.
/// Order 7 derives `abaababaabaab`.
pub fn fibonacci_slp(order: usize) -> SlpGrammar {
    assert!(order >= 1, "order starts at 1");
    let mut rules = vec![Rule::Terminal(b'b')];
    if order >= 2 {
        rules.push(Rule::Terminal(b'a'));
    }
    for k in 2..order {
        rules.push(Rule::Pair(k as u32 - 1, k as u32 - 2));
    }
    SlpGrammar::new(rules).expect("valid by construction")
}

pub fn fibonacci(order: usize) -> Vec<u8> {
    fibonacci_slp(order).expand()
}

/// `base` repeated `2^k` times, as a grammar of size `|base|`-ish + k.
pub fn power_slp(base: &[u8], k: u32) -> SlpGrammar {
    let g = crate::slp::text_to_slp(base).expect("non-empty base");
    let mut rules = g.rules().to_vec();
    for _ in 0..k {
        let top = (rules.len() - 1) as u32;
        rules.push(Rule::Pair(top, top));
    }
    SlpGrammar::new(rules).expect("valid by construction")
}

/// `base` repeated `k` times by square-and-multiply, O(|base| + log k) rules.
pub fn repeat_slp(base: &[u8], k: u64) -> SlpGrammar {
    assert!(k >= 1, "at least one copy");
    let g = crate::slp::text_to_slp(base).expect("non-empty base");
    let mut b = GrammarBuilder::new();
    let mut ids: Vec<VarId> = Vec::with_capacity(g.size());
    for r in g.rules() {
        let v = match *r {
            Rule::Terminal(c) => b.terminal(c),
            Rule::Pair(l, r) => b.pair(ids[l as usize], ids[r as usize]),
        };
        ids.push(v);
    }
    let mut unit = ids[g.root() as usize];
    let mut acc: Option<VarId> = None;
    let mut k = k;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => unit,
                Some(a) => b.pair(a, unit),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        unit = b.pair(unit, unit);
    }
    b.finish(acc.expect("k >= 1"))
}

/// Uniform random text over the first `sigma` lowercase letters.
pub fn random_text(n: usize, sigma: u8, seed: u64) -> Vec<u8> {
    assert!((1..=26).contains(&sigma));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| b'a' + rng.gen_range(0..sigma)).collect()
}
