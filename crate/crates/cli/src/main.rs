//! `gsindex`: build and query compressed self-indexes from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gsindex::corpus::{generate, CorpusSpec};
use gsindex::grammar::Slp;
use gsindex::index::Stats;
use gsindex::oracle::{naive_cyclic, naive_locate, naive_maximal};
use gsindex::{BuildOptions, LocateOptions, Mode, Occurrence, SelfIndex};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "gsindex", version, about = "Compressed self-index for highly repetitive texts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Verify,
    Fp,
}

#[derive(clap::Args)]
struct Patterns {
    /// Pattern given on the command line (repeatable).
    #[arg(short = 'p', long = "pattern")]
    patterns: Vec<String>,
    /// File whose whole contents is one pattern, read as raw bytes (repeatable).
    #[arg(long = "pattern-file")]
    files: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an index over a text file.
    Build {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "verify")]
        mode: ModeArg,
        /// Modulus exponent and grammar balance factor.
        #[arg(long, default_value_t = 4)]
        c: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rule listing of a grammar for the text to use instead of building one.
        #[arg(long)]
        slp: Option<PathBuf>,
    },
    /// Print every occurrence of the patterns.
    Locate {
        #[arg(short = 'x', long = "index")]
        index: PathBuf,
        #[command(flatten)]
        patterns: Patterns,
        /// Check each reported occurrence against the text.
        #[arg(long)]
        verify_occurrences: bool,
        #[arg(long)]
        json: bool,
        /// Worker threads when several patterns are given.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Print the number of occurrences of the patterns.
    Count {
        #[arg(short = 'x', long = "index")]
        index: PathBuf,
        #[command(flatten)]
        patterns: Patterns,
    },
    /// Print a substring of the indexed text.
    Extract {
        #[arg(short = 'x', long = "index")]
        index: PathBuf,
        /// 1-based start position.
        #[arg(long)]
        from: usize,
        #[arg(long)]
        len: usize,
    },
    /// Print the rotations of the pattern that occur in the text.
    Cyclic {
        #[arg(short = 'x', long = "index")]
        index: PathBuf,
        #[command(flatten)]
        patterns: Patterns,
    },
    /// Print the maximal substrings of the pattern that occur in the text.
    Maximal {
        #[arg(short = 'x', long = "index")]
        index: PathBuf,
        #[command(flatten)]
        patterns: Patterns,
    },
    /// Print index statistics.
    Stats {
        #[arg(short = 'x', long = "index")]
        index: PathBuf,
    },
    /// Write a repetitive corpus: a random DNA base plus mutated copies.
    Gen {
        #[arg(long)]
        base_len: usize,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = 0.0)]
        mut_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Check the index against brute-force scans on random texts.
    Selftest {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

type CmdResult = Result<(), String>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let res = run(cli.cmd, &mut out).and_then(|()| out.flush().map_err(|e| e.to_string()));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            drop(out);
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<SelfIndex, String> {
    SelfIndex::load_file(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn collect_patterns(p: &Patterns) -> Result<Vec<Vec<u8>>, String> {
    let mut out: Vec<Vec<u8>> = p.patterns.iter().map(|s| s.as_bytes().to_vec()).collect();
    for f in &p.files {
        out.push(read(f)?);
    }
    if out.is_empty() {
        return Err("no pattern given; use -p or --pattern-file".into());
    }
    Ok(out)
}

/// Prints a `# pattern` header before each block when there are several.
fn header(out: &mut impl Write, patterns: &[Vec<u8>], p: &[u8]) -> io::Result<()> {
    if patterns.len() > 1 {
        out.write_all(b"# ")?;
        out.write_all(p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn json_line(occ: &[Occurrence]) -> String {
    let items: Vec<String> = occ
        .iter()
        .map(|o| format!("{{\"pos\":{},\"kind\":\"{}\"}}", o.pos, o.kind.as_str()))
        .collect();
    format!("[{}]", items.join(","))
}

fn io_err(e: io::Error) -> String {
    e.to_string()
}

fn run(cmd: Cmd, out: &mut impl Write) -> CmdResult {
    match cmd {
        Cmd::Build {
            input,
            output,
            mode,
            c,
            seed,
            slp,
        } => {
            let text = read(&input)?;
            let slp = match slp {
                Some(p) => {
                    let listing = String::from_utf8(read(&p)?).map_err(|_| format!("{}: not UTF-8", p.display()))?;
                    Some(Slp::import(&listing).map_err(|e| format!("{}: {e}", p.display()))?)
                }
                None => None,
            };
            let opts = BuildOptions {
                mode: match mode {
                    ModeArg::Verify => Mode::Verify,
                    ModeArg::Fp => Mode::Fingerprint,
                },
                c,
                seed,
                slp,
            };
            let idx = SelfIndex::build(&text, &opts).map_err(|e| e.to_string())?;
            idx.save_file(&output).map_err(|e| format!("{}: {e}", output.display()))?;
            log::info!("indexed {} bytes into {} phrases", idx.len(), idx.num_phrases());
        }
        Cmd::Locate {
            index,
            patterns,
            verify_occurrences,
            json,
            threads,
        } => {
            let idx = load(&index)?;
            let pats = collect_patterns(&patterns)?;
            let opts = LocateOptions { verify_occurrences };
            let results = idx.locate_batch(&pats, threads, &opts);
            for (p, res) in pats.iter().zip(results) {
                let occ = res.map_err(|e| e.to_string())?;
                if json {
                    writeln!(out, "{}", json_line(&occ)).map_err(io_err)?;
                } else {
                    header(out, &pats, p).map_err(io_err)?;
                    for o in &occ {
                        writeln!(out, "{}", o.pos).map_err(io_err)?;
                    }
                }
            }
        }
        Cmd::Count { index, patterns } => {
            let idx = load(&index)?;
            let pats = collect_patterns(&patterns)?;
            for p in &pats {
                let n = idx.count(p).map_err(|e| e.to_string())?;
                header(out, &pats, p).map_err(io_err)?;
                writeln!(out, "{n}").map_err(io_err)?;
            }
        }
        Cmd::Extract { index, from, len } => {
            let idx = load(&index)?;
            let s = idx.extract(from, len).map_err(|e| e.to_string())?;
            out.write_all(&s).map_err(io_err)?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        Cmd::Cyclic { index, patterns } => {
            let idx = load(&index)?;
            let pats = collect_patterns(&patterns)?;
            for p in &pats {
                let rots = idx.cyclic_matches(p).map_err(|e| e.to_string())?;
                header(out, &pats, p).map_err(io_err)?;
                for j in rots {
                    writeln!(out, "{j}").map_err(io_err)?;
                }
            }
        }
        Cmd::Maximal { index, patterns } => {
            let idx = load(&index)?;
            let pats = collect_patterns(&patterns)?;
            for p in &pats {
                let ivs = idx.maximal_substrings(p).map_err(|e| e.to_string())?;
                header(out, &pats, p).map_err(io_err)?;
                for (h, j) in ivs {
                    writeln!(out, "{h} {j}").map_err(io_err)?;
                }
            }
        }
        Cmd::Stats { index } => {
            let idx = load(&index)?;
            print_stats(out, &idx.stats()).map_err(io_err)?;
        }
        Cmd::Gen {
            base_len,
            copies,
            mut_rate,
            seed,
            output,
        } => {
            if !(0.0..=1.0).contains(&mut_rate) {
                return Err(format!("mutation rate {mut_rate} is not in [0, 1]"));
            }
            let text = generate(&CorpusSpec {
                base_len,
                copies,
                mut_rate,
                seed,
            });
            fs::write(&output, text).map_err(|e| format!("{}: {e}", output.display()))?;
        }
        Cmd::Selftest { cases, seed } => selftest(out, cases, seed)?,
    }
    Ok(())
}

fn print_stats(out: &mut impl Write, s: &Stats) -> io::Result<()> {
    writeln!(out, "n\t{}", s.n)?;
    writeln!(out, "z\t{}", s.z)?;
    writeln!(out, "sigma\t{}", s.sigma)?;
    writeln!(out, "mode\t{}", s.mode.as_str())?;
    if s.mode == Mode::Fingerprint {
        writeln!(out, "modulus\t{}", s.q)?;
    }
    writeln!(out, "rules_s\t{}", s.rules_s)?;
    writeln!(out, "rules_sprime\t{}", s.rules_sprime)?;
    writeln!(out, "n_prime\t{}", s.n_prime)?;
    writeln!(out, "height_s\t{}", s.height_s)?;
    writeln!(out, "height_sprime\t{}", s.height_sprime)?;
    writeln!(out, "radius\t{}", s.radius)?;
    writeln!(out, "levels\t{}", join(&s.levels))?;
    writeln!(out, "fp_levels\t{}", join(&s.fp_levels))?;
    writeln!(out, "trie_nodes\t{} {}", s.trie_nodes.0, s.trie_nodes.1)?;
    writeln!(out, "sources\t{}", s.sources)?;
    for (name, bytes) in &s.sections {
        writeln!(out, "section.{name}\t{bytes}")?;
    }
    writeln!(out, "total_bytes\t{}", s.total_bytes)
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Random texts over small alphabets, every query type checked against the
/// scans in both modes, plus a save/load round trip.
fn selftest(out: &mut impl Write, cases: usize, seed: u64) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = 0usize;
    for case in 0..cases {
        let n = rng.random_range(1..=300usize);
        let sigma = rng.random_range(1..=4usize);
        let text: Vec<u8> = if case % 3 == 0 {
            generate(&CorpusSpec {
                base_len: n / 4 + 1,
                copies: 3,
                mut_rate: 0.02,
                seed: rng.random_range(0..u64::MAX),
            })
        } else {
            (0..n).map(|_| b"acgt"[rng.random_range(0..sigma)]).collect()
        };
        for opts in [BuildOptions::default(), BuildOptions::fingerprint()] {
            let fail = |what: String| format!("case {case} ({} mode): {what}", opts.mode.as_str());
            let built = SelfIndex::build(&text, &opts).map_err(|e| fail(e.to_string()))?;
            let idx = SelfIndex::from_bytes(&built.to_bytes()).map_err(|e| fail(e.to_string()))?;
            for _ in 0..10 {
                let m = rng.random_range(1..=12usize.min(text.len()));
                let i = rng.random_range(0..=text.len() - m);
                let mut p = text[i..i + m].to_vec();
                if rng.random_bool(0.3) {
                    let j = rng.random_range(0..m);
                    p[j] = b"ACGTacgt"[rng.random_range(0..8)];
                }
                let pos: Vec<usize> = idx.locate(&p).map_err(|e| fail(e.to_string()))?.iter().map(|o| o.pos).collect();
                if pos != naive_locate(&text, &p) {
                    return Err(fail(format!("locate {:?}", String::from_utf8_lossy(&p))));
                }
                if idx.cyclic_matches(&p).map_err(|e| fail(e.to_string()))? != naive_cyclic(&text, &p) {
                    return Err(fail(format!("cyclic {:?}", String::from_utf8_lossy(&p))));
                }
                if idx.maximal_substrings(&p).map_err(|e| fail(e.to_string()))? != naive_maximal(&text, &p) {
                    return Err(fail(format!("maximal {:?}", String::from_utf8_lossy(&p))));
                }
                let len = rng.random_range(0..=text.len() - i);
                if idx.extract(i + 1, len).map_err(|e| fail(e.to_string()))? != text[i..i + len] {
                    return Err(fail(format!("extract({}, {len})", i + 1)));
                }
                queries += 4;
            }
        }
    }
    writeln!(out, "ok: {cases} texts, {queries} queries").map_err(io_err)
}
