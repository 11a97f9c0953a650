//! `qrpsm`: searches, constructions and verifiers for quadratic-residue PSM protocols.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;

/// Output of a successful command: text to print and the exit status.
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned, labelled text.
    Human,
    /// One whitespace-separated record per line (default).
    Lines,
    /// One strict JSON value per line.
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Residuosity of a_0 + g(x) per input (LQR protocols only).
    Fast,
    /// Every input and every randomness value, with exact message distributions.
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value = "lines", global = true)]
    pub format: Format,
    /// Worker threads (default: all cores). Results never depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Upper limit for every prime search.
    #[arg(long, default_value_t = qrpsm_core::peralta::DEFAULT_MAX_PRIME, global = true)]
    pub max_p: u64,
    /// Decode (-1)^f(x) instead of the default +1 for f(x) = 1.
    #[arg(long, global = true)]
    pub sign_flip: bool,
    /// Peralta cache file. Defaults to $QRPSM_CACHE_DIR/peralta-cache when that variable is set.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "qrpsm", version, about = "Quadratic-residue PSM protocols over small primes")]
#[command(after_help = "Exit status: 0 success, 1 verified false, 2 usage error, 3 budget or search limit exceeded.")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Least n-Peralta prime. Lines output: `N P_N`.
    Peralta {
        #[arg(long)]
        n: usize,
        /// Instead of searching, test whether P is n-Peralta. Lines output: `P true|false`.
        #[arg(long)]
        p: Option<u64>,
    },
    /// Quadratic residue sequence S_p as a 0/1 string.
    Qrseq {
        #[arg(long)]
        p: u64,
    },
    /// Least prime realizing every n-variable function as an LQR protocol. Lines output: `N L_N`.
    LqrPrime {
        #[arg(long)]
        n: usize,
        /// Also print `CODE a0,a1,...` for the first canonical witness of each function.
        #[arg(long)]
        witnesses: bool,
    },
    /// Build an LQR protocol from an embedding. Lines output: the descriptor `{"p":..,"a":[..]}`.
    Synth {
        /// Function: AND:N, OR:N, XOR:N, EQ:N, MAJ:N, SMAJ:N or tt:0xHEX:N.
        #[arg(long)]
        f: String,
        /// sym | weighted:W1,W2,... | any | comp:M,K
        #[arg(long)]
        embed: String,
    },
    /// Least-modulus LQR protocol for a function. Lines output: the descriptor.
    Minimal {
        #[arg(long)]
        f: String,
    },
    /// Check protocols against a function. Lines output: `PASS` or `FAIL <counterexample>` per protocol.
    Verify {
        /// Inline JSON descriptor, a file with one descriptor per line, or `fkn` for the built-in COMP protocol.
        #[arg(long)]
        protocol: String,
        #[arg(long)]
        f: String,
        #[arg(long, value_enum, default_value = "fast")]
        mode: Mode,
        /// Maximum inputs x randomness pairs for exhaustive checks.
        #[arg(long, default_value_t = qrpsm_core::psm::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Execute one protocol run. Lines output: `seed=S x=[..] r=[..] m=[..] out=V`.
    Run {
        /// Inline JSON descriptor, a file holding one, or `fkn`.
        #[arg(long)]
        protocol: String,
        /// Comma-separated inputs.
        #[arg(long)]
        x: String,
        /// Seed for the randomness; drawn from the OS and printed when absent.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exhaustively verify the DRE of a polynomial. Lines output: `PASS len=S rand=R` or `FAIL ...`.
    DreCheck {
        /// Polynomial such as `x1*x2 + x3`.
        #[arg(long, conflicts_with = "product_plus", required_unless_present = "product_plus")]
        poly: Option<String>,
        /// Use the dedicated encoding of x1*...*xK + x(K+1).
        #[arg(long)]
        product_plus: Option<usize>,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = qrpsm_core::psm::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Compile a QR-PSM protocol from an embedding polynomial and a DRE.
    /// Lines output: the descriptor, then `PASS`/`FAIL` unless --no-verify.
    CompileDre {
        #[arg(long)]
        f: String,
        /// Embedding polynomial g over x1..xn.
        #[arg(long)]
        poly: String,
        /// Skip exhaustive verification.
        #[arg(long)]
        no_verify: bool,
        /// Include every encoder component in the descriptor.
        #[arg(long)]
        dump: bool,
        #[arg(long, default_value_t = qrpsm_core::psm::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Property (*)_n of the Paley graph or tournament on Z_p. Lines output: `P N true|false`.
    Paley {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        /// Check every cyclic window rather than only {1..n}.
        #[arg(long)]
        full: bool,
        /// Print the edge list (`x y` or `x>y` per line) instead of the report.
        #[arg(long)]
        edges: bool,
    },
    /// Least graph and tournament primes with (*)_n. Lines output: `N m_G m_T m`.
    PaleyM {
        #[arg(long)]
        n: usize,
    },
    /// Regenerate the reference tables and diff them against the embedded copies.
    Tables {
        /// Largest n for the L_n rows.
        #[arg(long, default_value_t = 4)]
        lqr_max_n: usize,
        /// Largest n for exhaustive checks of the protocol list.
        #[arg(long, default_value_t = 3)]
        exhaustive_max_n: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.global, &cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
