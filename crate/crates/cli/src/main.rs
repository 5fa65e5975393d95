//! `wvpa`: evaluate, rank, synthesize and enumerate from the command line.
//!
//! Exit codes: 0 on success, 2 on bad input, 3 when synthesis or a batch
//! check fails.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wvpa::hankel::{block_rank, build_block, stabilized_block, word_hankel_rank_growth};
use wvpa::nested_words::enumerate_well_matched;
use wvpa::synthesis::{grid_side, synthesize, verify_equivalence, SynthesisOptions, SynthesisReport};
use wvpa::wvpa::random_wvpa;
use wvpa::{format_sig12, Alphabet, Error, FunctionOracle, Wvpa};

#[derive(Parser)]
#[command(name = "wvpa", version, about = "Weighted visibly pushdown automata and nested Hankel matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the value an automaton assigns to a word.
    Eval {
        #[arg(long)]
        automaton: PathBuf,
        /// Tagged word such as `<a a a>`; `eps` is the empty word.
        #[arg(long)]
        word: String,
    },
    /// Print the stabilized nested Hankel rank of a function.
    Rank {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        block: BlockArgs,
        /// Write the final block as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Synthesize an automaton from a function and check it.
    Synth {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        block: BlockArgs,
        /// Where to write the automaton JSON; printed after the report if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        fit_tol: f64,
        #[arg(long, default_value_t = 8)]
        verify_len: usize,
        /// Largest relative round-trip error accepted.
        #[arg(long, default_value_t = 1e-6)]
        verify_tol: f64,
    },
    /// Check the rank bound and re-synthesis on random automata.
    Roundtrip {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, default_value_t = 1)]
        gamma: usize,
        #[arg(long, default_value = "a")]
        alphabet: String,
        #[arg(long, default_value_t = 8)]
        verify_len: usize,
        #[arg(long, default_value_t = 1e-6)]
        verify_tol: f64,
    },
    /// Word Hankel rank against nested Hankel rank for balanced brackets.
    DyckDemo {
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// List well-matched words in shortlex order with counts per length.
    Enum {
        #[arg(long, default_value = "a")]
        alphabet: String,
        #[arg(long)]
        max_len: usize,
    },
}

#[derive(Args)]
struct Source {
    /// paren_count, dyck_one, constant0 or `constant(<c>)`.
    #[arg(long, conflicts_with = "automaton", required_unless_present = "automaton")]
    function: Option<String>,
    /// Automaton JSON whose behavior is the function.
    #[arg(long)]
    automaton: Option<PathBuf>,
    /// Base alphabet for builtin functions, comma separated.
    #[arg(long, default_value = "a")]
    alphabet: String,
}

#[derive(Args)]
struct BlockArgs {
    #[arg(long, default_value_t = 2)]
    start_len: usize,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    /// Relative singular value cutoff.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoNonzeroBasis(_)
            | Error::NotInSpan { .. }
            | Error::NotStabilized { .. }
            | Error::InsufficientTerms { .. }
            | Error::NotRankOne(_)
            | Error::ZeroMatrix => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome = Result<ExitCode, Failure>;

fn load_automaton(path: &Path) -> Result<Wvpa, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Wvpa::from_json(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

impl Source {
    fn resolve(&self) -> Result<(FunctionOracle, Alphabet), Failure> {
        match (&self.function, &self.automaton) {
            (Some(name), None) => Ok((FunctionOracle::builtin(name)?, Alphabet::parse_list(&self.alphabet)?)),
            (None, Some(path)) => {
                let a = load_automaton(path)?;
                let sigma = a.alphabet().clone();
                Ok((FunctionOracle::automaton(a), sigma))
            }
            _ => Err(input_error("give exactly one of --function and --automaton")),
        }
    }
}

fn eval(automaton: &Path, word: &str) -> Outcome {
    let a = load_automaton(automaton)?;
    let w = a.alphabet().parse_word(word)?;
    println!("{}", format_sig12(a.behavior(w.letters())?));
    Ok(ExitCode::SUCCESS)
}

fn rank(source: &Source, block: &BlockArgs, dump: Option<&Path>) -> Outcome {
    let (f, sigma) = source.resolve()?;
    let s = stabilized_block(&f, &sigma, block.start_len, block.max_len, block.tol)?;
    println!(
        "rank={} n={} stabilized={} rows={} cols={} label_len={}",
        s.rank,
        grid_side(s.rank),
        s.stabilized,
        s.block.row_labels().len(),
        s.block.col_labels().len(),
        s.label_len
    );
    let history: Vec<String> = s.history.iter().map(|(l, r)| format!("{l}:{r}")).collect();
    println!("history {}", history.join(" "));
    if let Some(path) = dump {
        fs::write(path, s.block.to_csv(&sigma)).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn synth_report(rep: &SynthesisReport, f: &FunctionOracle, sigma: &Alphabet, verify_len: usize) -> Result<String, Failure> {
    let mut out = String::new();
    let words = |ws: &[wvpa::TaggedWord]| ws.iter().map(|w| sigma.format_word(w)).collect::<Vec<_>>().join(" | ");
    let _ = writeln!(out, "function: {}", f.id());
    let _ = writeln!(out, "rank={} n={} stabilized={} label_len={}", rep.rank, rep.n, rep.block.stabilized, rep.block.label_len);
    let _ = writeln!(out, "states={} gamma={}", rep.automaton.states(), rep.automaton.gamma());
    let _ = writeln!(out, "basis: {}", words(rep.grid.basis()));
    let _ = writeln!(out, "grid:");
    for row in rep.grid.words() {
        let _ = writeln!(out, "  {}", words(row));
    }
    for (label, r) in &rep.residuals {
        let _ = writeln!(out, "residual {label}: {}", sci(*r));
    }
    let method = if rep.nesting.alternating { "alternating least squares" } else { "truncated SVD" };
    let _ = writeln!(out, "nesting fit: {method}, operator rank {}", rep.nesting.operator_rank);
    let _ = writeln!(out, "identity residuals: value {} nesting {}", sci(rep.identities.value), sci(rep.identities.nesting));
    match &rep.grid_construction {
        Ok(gc) => {
            let eq = verify_equivalence(&gc.automaton, f, sigma, verify_len)?;
            let _ = writeln!(
                out,
                "grid construction: identity residuals {} {}, round trip max abs error {} at {}",
                sci(gc.value_residual),
                sci(gc.nesting_residual),
                format_sig12(eq.max_abs_error),
                sigma.format_word(&eq.worst_word)
            );
        }
        Err(e) => {
            let _ = writeln!(out, "grid construction: unavailable ({e})");
        }
    }
    let rt = &rep.roundtrip;
    let _ = writeln!(
        out,
        "round trip: words={} max_abs_error={} max_rel_error={} worst={}",
        rt.words_checked,
        sci(rt.max_abs_error),
        sci(rt.max_rel_error),
        sigma.format_word(&rt.worst_word)
    );
    Ok(out)
}

fn synth(source: &Source, block: &BlockArgs, out: Option<&Path>, fit_tol: f64, verify_len: usize, verify_tol: f64) -> Outcome {
    let (f, sigma) = source.resolve()?;
    let opts = SynthesisOptions {
        start_len: block.start_len,
        max_len: block.max_len,
        rank_tol: block.tol,
        fit_tol,
        verify_len,
        sample_len: None,
    };
    let rep = synthesize(&f, &sigma, &opts)?;
    print!("{}", synth_report(&rep, &f, &sigma, verify_len)?);
    let json = rep.automaton.to_json();
    match out {
        Some(path) => fs::write(path, json + "\n").map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    if rep.roundtrip.max_rel_error < verify_tol {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("round trip error {} exceeds {}", sci(rep.roundtrip.max_rel_error), sci(verify_tol));
        Ok(ExitCode::from(3))
    }
}

#[allow(clippy::too_many_arguments)]
fn roundtrip(n: usize, seeds: u64, first_seed: u64, gamma: usize, alphabet: &str, verify_len: usize, verify_tol: f64) -> Outcome {
    if n == 0 || seeds == 0 || gamma == 0 {
        return Err(input_error("--n, --seeds and --gamma must be positive"));
    }
    let sigma = Alphabet::parse_list(alphabet)?;
    let opts = SynthesisOptions { verify_len, ..Default::default() };
    println!("{:>6} {:>5} {:>5} {:>6} {:>13} {:>6}", "seed", "rank", "bound", "states", "rel_error", "result");
    let mut passed = 0;
    for seed in first_seed..first_seed + seeds {
        let f = FunctionOracle::automaton(random_wvpa(n, &sigma, gamma, seed)?);
        let s = stabilized_block(&f, &sigma, 2, 8, 1e-7)?;
        let rank_ok = s.rank <= n * n;
        let (states, error, synth_ok) = match synthesize(&f, &sigma, &opts) {
            Ok(rep) => {
                let e = rep.roundtrip.max_rel_error;
                (rep.automaton.states().to_string(), sci(e), e < verify_tol)
            }
            Err(e) => ("-".into(), e.to_string(), false),
        };
        let ok = rank_ok && synth_ok;
        passed += usize::from(ok);
        println!(
            "{seed:>6} {:>5} {:>5} {states:>6} {error:>13} {:>6}",
            s.rank,
            n * n,
            if ok { "pass" } else { "fail" }
        );
    }
    println!("{passed}/{seeds} passed");
    Ok(if passed as u64 == seeds { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn dyck_demo(max_len: usize, tol: f64) -> Outcome {
    if max_len > 10 {
        return Err(input_error("--max-len must be at most 10"));
    }
    let sigma = Alphabet::parse_list("a")?;
    let f = FunctionOracle::DyckOne;
    let lengths: Vec<usize> = if max_len < 2 { vec![max_len] } else { (2..=max_len).step_by(2).collect() };
    println!("{:>3} {:>9} {:>11}", "L", "word_rank", "nested_rank");
    for (len, word_rank) in word_hankel_rank_growth(&f, &sigma, &lengths, tol) {
        let labels = enumerate_well_matched(&sigma, len);
        let nested = block_rank(&build_block(&f, &labels, &labels)?, tol);
        println!("{len:>3} {word_rank:>9} {nested:>11}");
    }
    Ok(ExitCode::SUCCESS)
}

fn enumerate(alphabet: &str, max_len: usize) -> Outcome {
    if max_len > 12 {
        return Err(input_error("--max-len must be at most 12"));
    }
    let sigma = Alphabet::parse_list(alphabet)?;
    let words = enumerate_well_matched(&sigma, max_len);
    let mut counts = vec![0usize; max_len + 1];
    for w in &words {
        counts[w.len()] += 1;
        println!("{}", sigma.format_word(w));
    }
    let counts: Vec<String> = counts.iter().map(usize::to_string).collect();
    println!("counts: {}", counts.join(","));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Eval { automaton, word } => eval(automaton, word),
        Command::Rank { source, block, dump } => rank(source, block, dump.as_deref()),
        Command::Synth { source, block, out, fit_tol, verify_len, verify_tol } => {
            synth(source, block, out.as_deref(), *fit_tol, *verify_len, *verify_tol)
        }
        Command::Roundtrip { n, seeds, first_seed, gamma, alphabet, verify_len, verify_tol } => {
            roundtrip(*n, *seeds, *first_seed, *gamma, alphabet, *verify_len, *verify_tol)
        }
        Command::DyckDemo { max_len, tol } => dyck_demo(*max_len, *tol),
        Command::Enum { alphabet, max_len } => enumerate(alphabet, *max_len),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
