use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "djr",
    version,
    about = "Block language, measures and tower certificates for generalized del Junco-Rudolph shifts"
)]
pub struct Cli {
    /// Output format; text on a terminal, json when --out is given.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Largest block (in symbols) that may be materialized.
    #[arg(long, global = true, env = "DJR_CAP")]
    pub cap: Option<u64>,

    /// TOML file with defaults for a, b, cap, depth and format.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Scan level M used for measures and towers.
    #[arg(long, global = true)]
    pub depth: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Family {
    /// Copies of B_k before the spacer, in units of b^k.
    #[arg(long)]
    pub a: Option<u64>,
    /// Branching base.
    #[arg(long)]
    pub b: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print B_k, or its symbol at one position.
    Block {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        k: usize,
        /// Zero-based position; may exceed 64 bits.
        #[arg(long)]
        pos: Option<String>,
    },
    /// Exact density d_M of an event on B_M^Z.
    Density {
        #[command(flatten)]
        family: Family,
        /// Event expression, e.g. "010@0 & !1@5".
        #[arg(long)]
        event: String,
        #[arg(long)]
        level: Option<usize>,
        /// Scan the materialized block instead of lifting counts.
        #[arg(long)]
        scan: bool,
    },
    /// Certified interval for the invariant measure of an event.
    Measure {
        #[command(flatten)]
        family: Family,
        #[arg(long, required_unless_present = "spacer", conflicts_with = "spacer")]
        event: Option<String>,
        /// Use the spacer event S_k.
        #[arg(long)]
        spacer: Option<usize>,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Certify delta(T^{h_k}) < 2^-k.
    Rigidity {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        k: usize,
    },
    /// Iterate the skew product (x, y) -> (bx, xy + 1) mod q from (1, 0).
    Skew {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        b: Option<u64>,
        #[arg(long, default_value_t = 1)]
        steps: u64,
        /// Also report the orbit period and permutation order.
        #[arg(long)]
        order: bool,
    },
    /// Levels k <= k_max with h_k = 1 mod q.
    Nq {
        #[arg(long)]
        b: Option<u64>,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k_max: usize,
        /// List k with h_{k+1} = 1 mod q instead.
        #[arg(long)]
        witnesses: bool,
    },
    /// Rank-one certificate for T^q at level N.
    Tower {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
    },
    /// Run every check and write a JSON report.
    Verify {
        #[command(flatten)]
        family: Family,
        /// Largest modulus in the residue checks.
        #[arg(long)]
        q_max: Option<u64>,
        /// Largest block level in the block-structure checks.
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}
