use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};

use slp_lz78::corpus::{fibonacci_slp, random_text, repeat_slp};
use slp_lz78::engine::{lz77_to_lz78, ncd_lz78};
use slp_lz78::format::{parse_lz77, parse_lz78, write_lz78};
use slp_lz78::lz77::lz77_to_slp;
use slp_lz78::lz78::{factorize_naive, sentinel_range_from_env, verify_factorization};
use slp_lz78::report::{StatsReport, SCHEMA_VERSION};
use slp_lz78::slp::{compute_stats, parse_slp, text_to_slp};
use slp_lz78::suffix_tree::{build_gst, build_st_of_trie};
use slp_lz78::window::{build_overlap_trie, build_windows, compute_alpha, window_length};
use slp_lz78::{
    factorize, Backend, EngineConfig, EngineError, Lz78Factorization, Mode, SlpGrammar,
};

const EXIT_PARSE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "slplz",
    version,
    about = "LZ78 factorization of grammar-compressed text"
)]
struct Cli {
    /// Print reports as JSON instead of `key: value` lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Gst,
    Trie,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Doubling,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value = "gst")]
    backend: BackendArg,
    #[arg(long, value_enum, default_value = "fixed")]
    mode: ModeArg,
    /// Check internal structures and the final factorization.
    #[arg(long)]
    verify: bool,
    /// Append a fresh end marker when the last character recurs.
    #[arg(long)]
    sentinel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize an SLP file.
    Factorize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        /// Print the suffix tree over the initial windows and exit.
        #[arg(long)]
        dump_tree: bool,
    },
    /// Factorize a plain text file directly.
    Naive {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convert an LZ77 file to LZ78.
    Convert {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the balanced intermediate grammar.
        #[arg(long)]
        slp_out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Window statistics of an SLP file.
    Stats { input: PathBuf },
    /// Generate a benchmark input.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
        /// Write the expanded text instead of the grammar.
        #[arg(long, global = true)]
        text: bool,
    },
    /// Compression distance of two SLP files.
    Ncd {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Cross-check every backend and mode against the naive parser.
    Verify {
        input: PathBuf,
        /// Check this LZ78 file against the grammar's text instead.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Fibonacci word grammar of the given order.
    Fibonacci { order: usize },
    /// `base` repeated `k` times.
    Repeat { base: String, k: u64 },
    /// Uniform random text; always written as text unless converted.
    Random {
        n: usize,
        sigma: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write a grammar built from the text instead.
        #[arg(long)]
        slp: bool,
    },
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

fn fail(code: u8, err: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        err: err.into(),
    }
}

fn engine_failure(e: EngineError) -> Failure {
    let code = match e {
        EngineError::NoSentinel { .. } => EXIT_USAGE,
        EngineError::Lz77(_) => EXIT_PARSE,
        _ => EXIT_VERIFY,
    };
    fail(code, e)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| fail(EXIT_IO, anyhow!("{}: {e}", path.display())))
}

fn read_utf8(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read_bytes(path)?)
        .map_err(|e| fail(EXIT_PARSE, anyhow!("{}: {e}", path.display())))
}

fn read_slp(path: &Path) -> Result<SlpGrammar, Failure> {
    parse_slp(&read_utf8(path)?).map_err(|e| fail(EXIT_PARSE, anyhow!("{}: {e}", path.display())))
}

/// Writes via a temporary file in the target directory, so a failed run
/// leaves no partial output. `None` writes to stdout.
fn write_output(path: Option<&Path>, data: &[u8]) -> CmdResult {
    let io = |e: std::io::Error| fail(EXIT_IO, e);
    let Some(path) = path else {
        return std::io::stdout().write_all(data).map_err(io);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| fail(EXIT_IO, anyhow!("{}: {e}", dir.display())))?;
    tmp.write_all(data).map_err(io)?;
    tmp.persist(path)
        .map_err(|e| fail(EXIT_IO, anyhow!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Reports go to stdout when the main output went to a file, else to stderr.
fn emit_report(json: bool, to_stdout: bool, report: &StatsReport) {
    let s = if json {
        report.to_json() + "\n"
    } else {
        report.to_human()
    };
    if to_stdout {
        print!("{s}");
    } else {
        eprint!("{s}");
    }
}

fn config(a: &EngineArgs) -> Result<EngineConfig, Failure> {
    let sentinel = if a.sentinel {
        Some(sentinel_range_from_env().map_err(|e| fail(EXIT_USAGE, anyhow!(e)))?)
    } else {
        None
    };
    Ok(EngineConfig {
        backend: match a.backend {
            BackendArg::Gst => Backend::Gst,
            BackendArg::Trie => Backend::Trie,
        },
        mode: match a.mode {
            ModeArg::Fixed => Mode::Fixed,
            ModeArg::Doubling => Mode::Doubling,
        },
        verify: a.verify,
        sentinel,
    })
}

fn cmd_factorize(
    json: bool,
    input: &Path,
    output: Option<&Path>,
    engine: &EngineArgs,
    dump: bool,
) -> CmdResult {
    let g = read_slp(input)?;
    let cfg = config(engine)?;
    if dump {
        return dump_tree(&g, cfg.backend, output);
    }
    let r = factorize(&g, &cfg).map_err(engine_failure)?;
    write_output(output, write_lz78(&r.factorization).as_bytes())?;
    let report = StatsReport::from_run(g.text_len(), g.size() as u64, cfg.backend, cfg.mode, &r);
    emit_report(json, output.is_some(), &report);
    Ok(())
}

fn dump_tree(g: &SlpGrammar, backend: Backend, output: Option<&Path>) -> CmdResult {
    let st = compute_stats(g);
    let c = window_length(g.text_len());
    let ws = build_windows(g, &st, c);
    if ws.is_empty() {
        return Err(fail(
            EXIT_USAGE,
            anyhow!("text of length {} is too short for windows", g.text_len()),
        ));
    }
    let tree = match backend {
        Backend::Gst => {
            let refs: Vec<&[u8]> = ws.entries.iter().map(|e| &e.t[..]).collect();
            build_gst(&refs)
        }
        Backend::Trie => {
            let d = compute_alpha(g, &st, &ws).map_err(|e| fail(EXIT_VERIFY, e))?;
            let trie =
                build_overlap_trie(g, &st, &ws, d.n_alpha).map_err(|e| fail(EXIT_VERIFY, e))?;
            build_st_of_trie(&trie)
        }
    };
    write_output(output, tree.dump().as_bytes())
}

fn cmd_naive(input: &Path, output: Option<&Path>) -> CmdResult {
    let text = read_bytes(input)?;
    if text.is_empty() {
        return Err(fail(
            EXIT_USAGE,
            anyhow!("{}: input is empty", input.display()),
        ));
    }
    write_output(output, write_lz78(&factorize_naive(&text)).as_bytes())
}

fn cmd_convert(
    json: bool,
    input: &Path,
    output: Option<&Path>,
    slp_out: Option<&Path>,
    engine: &EngineArgs,
) -> CmdResult {
    let z = parse_lz77(&read_utf8(input)?)
        .map_err(|e| fail(EXIT_PARSE, anyhow!("{}: {e}", input.display())))?;
    let cfg = config(engine)?;
    if let Some(p) = slp_out {
        let g = lz77_to_slp(&z).map_err(|e| fail(EXIT_PARSE, e))?;
        write_output(Some(p), g.to_text().as_bytes())?;
    }
    let r = lz77_to_lz78(&z, &cfg).map_err(engine_failure)?;
    write_output(output, write_lz78(&r.factorization).as_bytes())?;
    let g = lz77_to_slp(&z).map_err(|e| fail(EXIT_PARSE, e))?;
    let mut report =
        StatsReport::from_run(g.text_len(), g.size() as u64, cfg.backend, cfg.mode, &r);
    report.r = Some(z.len() as u64);
    emit_report(json, output.is_some(), &report);
    Ok(())
}

fn cmd_stats(json: bool, input: &Path) -> CmdResult {
    let g = read_slp(input)?;
    let st = compute_stats(&g);
    let ws = build_windows(&g, &st, window_length(g.text_len()));
    let d = compute_alpha(&g, &st, &ws).map_err(|e| fail(EXIT_VERIFY, e))?;
    emit_report(json, true, &StatsReport::from_decomp(&d));
    Ok(())
}

fn cmd_gen(kind: &GenKind, output: Option<&Path>, as_text: bool) -> CmdResult {
    let usage = |msg: String| fail(EXIT_USAGE, anyhow!(msg));
    let (g, text_default) = match *kind {
        GenKind::Fibonacci { order } => {
            if order == 0 {
                return Err(usage("fibonacci order starts at 1".into()));
            }
            (fibonacci_slp(order), false)
        }
        GenKind::Repeat { ref base, k } => {
            if base.is_empty() || k == 0 {
                return Err(usage("repeat needs a non-empty base and k >= 1".into()));
            }
            (repeat_slp(base.as_bytes(), k), false)
        }
        GenKind::Random {
            n,
            sigma,
            seed,
            slp,
        } => {
            if n == 0 || !(1..=26).contains(&sigma) {
                return Err(usage("random needs n >= 1 and sigma in 1..=26".into()));
            }
            let g = text_to_slp(&random_text(n, sigma, seed)).expect("non-empty text");
            (g, !slp)
        }
    };
    if as_text || text_default {
        write_output(output, &g.expand())
    } else {
        write_output(output, g.to_text().as_bytes())
    }
}

fn cmd_ncd(json: bool, x: &Path, y: &Path, engine: &EngineArgs) -> CmdResult {
    let gx = read_slp(x)?;
    let gy = read_slp(y)?;
    let d = ncd_lz78(&gx, &gy, &config(engine)?).map_err(engine_failure)?;
    if json {
        let v = serde_json::json!({
            "schema": SCHEMA_VERSION,
            "m_x": d.m_x,
            "m_y": d.m_y,
            "m_xy": d.m_xy,
            "ncd": d.value,
        });
        println!("{v}");
    } else {
        println!("{:.6}", d.value);
        eprintln!("m_x {} m_y {} m_xy {}", d.m_x, d.m_y, d.m_xy);
    }
    Ok(())
}

fn first_difference(a: &Lz78Factorization, b: &Lz78Factorization) -> Option<usize> {
    let i = a.pairs.iter().zip(&b.pairs).position(|(x, y)| x != y);
    match i {
        Some(i) => Some(i + 1),
        None if a.len() != b.len() => Some(a.len().min(b.len()) + 1),
        None => None,
    }
}

fn cmd_verify(json: bool, input: &Path, pairs: Option<&Path>) -> CmdResult {
    let g = read_slp(input)?;
    let text = g.expand();
    let naive = factorize_naive(&text);
    if let Some(p) = pairs {
        let f = parse_lz78(&read_utf8(p)?)
            .map_err(|e| fail(EXIT_PARSE, anyhow!("{}: {e}", p.display())))?;
        if let Err(v) = verify_factorization(&text, &f) {
            return Err(fail(EXIT_VERIFY, anyhow!("{}: {v}", p.display())));
        }
        if let Some(i) = first_difference(&f, &naive) {
            return Err(fail(
                EXIT_VERIFY,
                anyhow!(
                    "{}: differs from the greedy parse at factor {i}",
                    p.display()
                ),
            ));
        }
        println!("{}: ok ({} factors)", p.display(), f.len());
        return Ok(());
    }
    let configs: Vec<EngineConfig> = [Backend::Gst, Backend::Trie]
        .into_iter()
        .flat_map(|backend| {
            [Mode::Fixed, Mode::Doubling].map(|mode| EngineConfig {
                backend,
                mode,
                verify: true,
                sentinel: None,
            })
        })
        .collect();
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(|| factorize(&g, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    let mut bad = 0;
    for (cfg, res) in configs.iter().zip(results) {
        let name = format!("{:?}/{:?}", cfg.backend, cfg.mode).to_lowercase();
        let status = match res {
            Ok(r) => match first_difference(&r.factorization, &naive) {
                None => "ok".to_string(),
                Some(i) => format!("differs at factor {i}"),
            },
            Err(e) => format!("error: {e}"),
        };
        if status != "ok" {
            bad += 1;
        }
        rows.push((name, status));
    }
    if json {
        let v = serde_json::json!({
            "schema": SCHEMA_VERSION,
            "m": naive.len(),
            "results": rows
                .iter()
                .map(|(n, s)| serde_json::json!({ "config": n, "status": s }))
                .collect::<Vec<_>>(),
        });
        println!("{v}");
    } else {
        println!("naive: {} factors", naive.len());
        for (n, s) in &rows {
            println!("{n}: {s}");
        }
    }
    if bad > 0 {
        return Err(fail(
            EXIT_VERIFY,
            anyhow!("{bad} configuration(s) disagree"),
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let json = cli.json;
    match &cli.command {
        Command::Factorize {
            input,
            output,
            engine,
            dump_tree,
        } => cmd_factorize(json, input, output.as_deref(), engine, *dump_tree),
        Command::Naive { input, output } => cmd_naive(input, output.as_deref()),
        Command::Convert {
            input,
            output,
            slp_out,
            engine,
        } => cmd_convert(json, input, output.as_deref(), slp_out.as_deref(), engine),
        Command::Stats { input } => cmd_stats(json, input),
        Command::Gen { kind, output, text } => cmd_gen(kind, output.as_deref(), *text),
        Command::Ncd { x, y, engine } => cmd_ncd(json, x, y, engine),
        Command::Verify { input, pairs } => cmd_verify(json, input, pairs.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("slplz: error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
