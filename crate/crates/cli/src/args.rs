use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ggs_core::group::{DEFAULT_ENUM_CAP, DEFAULT_ORBIT_CAP};

#[derive(Debug, Parser)]
#[command(name = "ggs", version, about = "GGS-groups on p^n-adic trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// R sequence, S sums, finiteness, periodicity, class E and thresholds.
    Classify(Target),
    /// Order of a^(i p^r) b^(j p^s): closed formula against the leaf permutation.
    Order(Target),
    /// Verify the standard Beauville structure at a level (default: m_G).
    Beauville {
        #[command(flatten)]
        target: Target,
        /// Use the finite-group variant of the construction; needs --level.
        #[arg(long)]
        finite: bool,
        /// Also check that the structure survives one level further.
        #[arg(long)]
        persistence: bool,
    },
    /// Certify that level quotients admit no Beauville structure.
    Certify(Target),
    /// Classification table over all nonzero vectors for (p, n), or a vector file.
    Sweep(Target),
    /// Run structural property suites.
    Properties(Target),
}

#[derive(Debug, Args)]
pub struct Target {
    /// Vector spec such as `p=2 n=2 e=1,0,1`.
    pub spec: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Opts {
    #[arg(long, global = true)]
    pub p: Option<u32>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Comma-separated defining vector entries.
    #[arg(long, global = true)]
    pub e: Option<String>,
    /// Vector file: one spec per line, `#` starts a comment.
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,
    /// Every periodic vector for --p and --n.
    #[arg(long, global = true)]
    pub all_periodic: bool,
    /// `auto`, one level, or a comma-separated list.
    #[arg(long, global = true)]
    pub level: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    pub r: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub s: u32,
    #[arg(long, global = true, default_value_t = 1, allow_hyphen_values = true)]
    pub i: i64,
    #[arg(long, global = true, default_value_t = 1, allow_hyphen_values = true)]
    pub j: i64,
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_CAP)]
    pub cap_enum: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_ORBIT_CAP)]
    pub cap_orbit: usize,
    /// Deepest level tried by the threshold scan.
    #[arg(long, global = true, default_value_t = 8)]
    pub cap_scan: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Suite name or `all`.
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Run on this many vectors drawn with --seed instead of all of them.
    #[arg(long, global = true)]
    pub sample: Option<usize>,
    /// Allow sweeps with p^n above 9.
    #[arg(long, global = true)]
    pub large: bool,
}
