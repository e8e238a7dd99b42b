use slp_lz78::format::{parse_lz78, write_lz78};
use slp_lz78::lz78::factorize_naive;
use slp_lz78::slp::{example_grammar, parse_slp};
use slp_lz78::suffix_tree::build_gst;
use slp_lz78::{factorize, Backend, EngineConfig, Mode};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn running_example_tree_dump() {
    let t = build_gst(&[b"abaab", b"aababa", b"aababa"]);
    assert_eq!(t.dump(), golden("example_gst.txt"));
}

#[test]
fn running_example_grammar_round_trip() {
    let text = golden("example.slp");
    let g = parse_slp(&text).unwrap();
    assert_eq!(g, example_grammar());
    assert_eq!(g.to_text(), text);
}

#[test]
fn running_example_factorization_all_configs() {
    let g = parse_slp(&golden("example.slp")).unwrap();
    let want = golden("example.lz78");
    for backend in [Backend::Gst, Backend::Trie] {
        for mode in [Mode::Fixed, Mode::Doubling] {
            let cfg = EngineConfig {
                backend,
                mode,
                verify: true,
                sentinel: None,
            };
            let r = factorize(&g, &cfg).unwrap();
            assert_eq!(write_lz78(&r.factorization), want, "{backend:?} {mode:?}");
        }
    }
}

#[test]
fn second_example_naive() {
    let want = golden("example1.lz78");
    let f = factorize_naive(b"aaabaabbbaaaaaaaba$");
    assert_eq!(write_lz78(&f), want);
    assert_eq!(parse_lz78(&want).unwrap(), f);
    assert_eq!(f.decode(), b"aaabaabbbaaaaaaaba$");
}
