use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use slp_lz78::corpus::random_text;
use slp_lz78::format::{write_lz77, write_lz78};
use slp_lz78::lz77::factorize_lz77;
use slp_lz78::lz78::factorize_naive;
use slp_lz78::slp::{parse_slp, text_to_slp};

const EXAMPLE_SLP: &str = "SLP1 7\nT a\nT b\nP 1 2\nP 1 3\nP 3 4\nP 4 5\nP 6 5\n";

fn slplz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slplz"))
        .args(args)
        .env_remove("SLPLZ_SENTINEL_RANGE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, data: &[u8]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, data).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn factorize_running_example_every_backend() {
    let dir = tempfile::tempdir().unwrap();
    let slp = write(dir.path(), "example.slp", EXAMPLE_SLP.as_bytes());
    let gst = slplz(&["factorize", s(&slp), "--backend", "gst"]);
    assert!(gst.status.success());
    assert_eq!(stdout(&gst), "LZ78 6\n0 a\n1 b\n2 a\n3 b\n1 a\n0 b\n");
    let out = dir.path().join("trie.lz78");
    let trie = slplz(&[
        "--json",
        "factorize",
        s(&slp),
        "--backend",
        "trie",
        "--mode",
        "doubling",
        "--verify",
        "-o",
        s(&out),
    ]);
    assert!(trie.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&gst));
    let report: serde_json::Value = serde_json::from_slice(&trie.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["m"], 6);
    assert_eq!(report["L"], 4);
    let fixed = slplz(&["--json", "factorize", s(&slp), "-o", s(&out)]);
    let report: serde_json::Value = serde_json::from_slice(&fixed.stdout).unwrap();
    assert_eq!(
        (report["c"].as_u64(), report["alpha"].as_u64()),
        (Some(4), Some(2))
    );
}

#[test]
fn corrupt_grammar_exits_with_parse_error_and_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let slp = write(dir.path(), "bad.slp", b"SLP1 2\nT a\nP 1 7\n");
    let out = dir.path().join("never.lz78");
    let o = slplz(&["factorize", s(&slp), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn exit_codes_for_usage_and_io() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.txt", b"");
    assert_eq!(slplz(&["naive", s(&empty)]).status.code(), Some(64));
    assert_eq!(slplz(&["factorize"]).status.code(), Some(64));
    assert_eq!(
        slplz(&["factorize", "x", "--bogus"]).status.code(),
        Some(64)
    );
    let missing = dir.path().join("missing.slp");
    assert_eq!(slplz(&["factorize", s(&missing)]).status.code(), Some(3));
    assert_eq!(slplz(&["--help"]).status.code(), Some(0));
}

#[test]
fn naive_second_example() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.txt", b"aaabaabbbaaaaaaaba$");
    let o = slplz(&["naive", s(&t)]);
    assert_eq!(
        stdout(&o),
        "LZ78 9\n0 a\n1 a\n0 b\n2 b\n3 b\n2 a\n6 a\n3 a\n0 $\n"
    );
}

#[test]
fn naive_agrees_with_grammar_factorization() {
    let dir = tempfile::tempdir().unwrap();
    let text = random_text(5000, 3, 11);
    let t = write(dir.path(), "t.txt", &text);
    let g = write(
        dir.path(),
        "t.slp",
        text_to_slp(&text).unwrap().to_text().as_bytes(),
    );
    let a = slplz(&["naive", s(&t)]);
    let b = slplz(&["factorize", s(&g), "--backend", "trie"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn convert_matches_naive_of_decoded_text() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..100u64 {
        let text = random_text(
            1 + (seed as usize * 37) % 700,
            [2, 4, 26][seed as usize % 3],
            seed,
        );
        let z = write(
            dir.path(),
            "in.lz77",
            write_lz77(&factorize_lz77(&text)).as_bytes(),
        );
        let slp = dir.path().join("mid.slp");
        let o = slplz(&["convert", s(&z), "--slp-out", s(&slp)]);
        assert!(o.status.success(), "seed {seed}");
        assert_eq!(
            stdout(&o),
            write_lz78(&factorize_naive(&text)),
            "seed {seed}"
        );
        let g = parse_slp(&std::fs::read_to_string(&slp).unwrap()).unwrap();
        assert_eq!(g.expand(), text);
    }
    let single = write(
        dir.path(),
        "one.lz77",
        write_lz77(&factorize_lz77(b"q")).as_bytes(),
    );
    assert_eq!(stdout(&slplz(&["convert", s(&single)])), "LZ78 1\n0 q\n");
}

#[test]
fn convert_reports_phrase_count() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(
        dir.path(),
        "in.lz77",
        write_lz77(&factorize_lz77(b"aababaababaab")).as_bytes(),
    );
    let out = dir.path().join("out.lz78");
    let o = slplz(&["--json", "convert", s(&z), "-o", s(&out)]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["r"], 6);
    assert_eq!(report["m"], 6);
}

#[test]
fn stats_reports_window_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let slp = write(dir.path(), "example.slp", EXAMPLE_SLP.as_bytes());
    let o = slplz(&["--json", "stats", s(&slp)]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        (v["alpha"].as_u64(), v["n_alpha"].as_u64()),
        (Some(2), Some(11))
    );
    assert_eq!(v["coverage_checked"], true);
    let one = write(dir.path(), "one.slp", b"SLP1 1\nT z\n");
    let v: serde_json::Value =
        serde_json::from_slice(&slplz(&["--json", "stats", s(&one)]).stdout).unwrap();
    assert_eq!(v["alpha"], 0);
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(
        stdout(&slplz(&["gen", "fibonacci", "7", "--text"])),
        "abaababaabaab"
    );
    let g = parse_slp(&stdout(&slplz(&["gen", "fibonacci", "7"]))).unwrap();
    assert_eq!(g.text_len(), 13);
    assert_eq!(stdout(&slplz(&["gen", "repeat", "a", "1", "--text"])), "a");
    let a = slplz(&["gen", "random", "512", "4", "--seed", "9"]);
    let b = slplz(&["gen", "random", "512", "4", "--seed", "9"]);
    let c = slplz(&["gen", "random", "512", "4", "--seed", "10"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(a.stdout.len(), 512);
    assert_eq!(slplz(&["gen", "random", "0", "4"]).status.code(), Some(64));
}

#[test]
fn ncd_of_single_characters_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.slp", b"SLP1 1\nT a\n");
    let y = write(dir.path(), "y.slp", b"SLP1 1\nT b\n");
    let o = slplz(&["--json", "ncd", s(&x), s(&y)]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ncd"].as_f64(), Some(1.0));
}

#[test]
fn ncd_with_itself_is_below_ncd_with_unrelated_text() {
    let dir = tempfile::tempdir().unwrap();
    let fib = slplz(&["gen", "fibonacci", "22"]).stdout;
    let x = write(dir.path(), "f.slp", &fib);
    let n = parse_slp(std::str::from_utf8(&fib).unwrap())
        .unwrap()
        .text_len() as usize;
    let other = text_to_slp(&random_text(n, 2, 5)).unwrap();
    let y = write(dir.path(), "r.slp", other.to_text().as_bytes());
    let ncd = |a: &Path, b: &Path| -> f64 {
        let v: serde_json::Value =
            serde_json::from_slice(&slplz(&["--json", "ncd", s(a), s(b)]).stdout).unwrap();
        v["ncd"].as_f64().unwrap()
    };
    let same = ncd(&x, &x);
    let diff = ncd(&x, &y);
    assert!(same < 0.6 && same < diff, "same {same} diff {diff}");
}

#[test]
fn verify_agrees_and_locates_mutations() {
    let dir = tempfile::tempdir().unwrap();
    let slp = write(dir.path(), "example.slp", EXAMPLE_SLP.as_bytes());
    let o = slplz(&["verify", s(&slp)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches(": ok").count(), 4);
    let good = write(
        dir.path(),
        "good.lz78",
        b"LZ78 6\n0 a\n1 b\n2 a\n3 b\n1 a\n0 b\n",
    );
    assert!(slplz(&["verify", s(&slp), "--pairs", s(&good)])
        .status
        .success());
    let bad = write(
        dir.path(),
        "bad.lz78",
        b"LZ78 6\n0 a\n1 b\n2 a\n3 b\n1 b\n0 b\n",
    );
    let o = slplz(&["verify", s(&slp), "--pairs", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("factor 5"));
}

#[test]
fn verify_sweep_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..10u64 {
        let text = random_text(300, 2 + seed as u8 % 3, seed);
        let slp = write(
            dir.path(),
            "r.slp",
            text_to_slp(&text).unwrap().to_text().as_bytes(),
        );
        assert!(slplz(&["verify", s(&slp)]).status.success(), "seed {seed}");
    }
}

#[test]
fn sentinel_flag_and_range_override() {
    let dir = tempfile::tempdir().unwrap();
    let slp = write(dir.path(), "example.slp", EXAMPLE_SLP.as_bytes());
    let o = slplz(&[
        "--json",
        "factorize",
        s(&slp),
        "--sentinel",
        "-o",
        s(&dir.path().join("o")),
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sentinel"], 0);
    let o = Command::new(env!("CARGO_BIN_EXE_slplz"))
        .args([
            "--json",
            "factorize",
            s(&slp),
            "--sentinel",
            "-o",
            s(&dir.path().join("o")),
        ])
        .env("SLPLZ_SENTINEL_RANGE", "0x21-0x7e")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sentinel"], 0x21);
}

#[test]
fn dump_tree_prints_the_initial_index() {
    let dir = tempfile::tempdir().unwrap();
    let slp = write(dir.path(), "example.slp", EXAMPLE_SLP.as_bytes());
    let o = slplz(&["factorize", s(&slp), "--dump-tree"]);
    let dump = stdout(&o);
    assert!(dump.starts_with("root\n"));
    assert_eq!(
        dump.lines()
            .filter(|l| l.trim_start().starts_with('$') || l.ends_with("$0"))
            .count(),
        20
    );
}
