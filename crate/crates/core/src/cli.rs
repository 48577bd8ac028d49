//! Command-line frontend: multiplicity tables, oracle verification runs and
//! recursion-support grids.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage error, 3 resource cap.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Zero;
use num_rational::Ratio;
use serde::Serialize;

use crate::cg_oracle::{oracle_multiplicities, weight_multiplicity, DEFAULT_COMPOSITION_CAP};
use crate::channel::{
    character_check, commutant_dimension, haar_sample_su2, DEFAULT_COMMUTANT_DIM_CAP, DEFAULT_COMMUTANT_SAMPLES,
    DEFAULT_SECTOR_DIM_CAP,
};
use crate::error::DfsError;
use crate::multiplicity::{build_table, recursion_support, MultiplicityTable};
use crate::types::{Multiplicity, SectorIndex, SpinLabel};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Pass threshold for the character oracle.
pub const CHARACTER_TOL: f64 = 1e-8;

pub const ENV_CAP_COMPOSITIONS: &str = "DFS_CAP_COMPOSITIONS";
pub const ENV_CAP_SECTOR_DIM: &str = "DFS_CAP_SECTOR_DIM";

#[derive(Debug, Parser)]
#[command(name = "dfs", version, about = "Decoherence-free subsystem dimensions under collective depolarization")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Cg,
    Weight,
    Character,
    Commutant,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit K^j_{NL} for all 1 ≤ N ≤ n, 0 ≤ L ≤ l-max.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long)]
        l_max: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the recursion against an independent oracle on one sector.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, value_enum)]
        oracle: Oracle,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export the lattice points and bounding rectangle summed for one K^j_{NL}.
    Grid {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        two_j: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// One row of `dfs table`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub n_uses: u32,
    pub total_excitations: u32,
    pub two_j: u32,
    /// Decimal string; values exceed the exactly representable range of JSON numbers.
    pub multiplicity: String,
    pub irrep_dimension: u32,
}

#[derive(Debug, Serialize)]
struct TableDocument<'a> {
    n_max: u32,
    l_max: u32,
    records: &'a [OutputRecord],
}

/// One row of `dfs grid`: a summed lattice point or a rectangle vertex, in `(L', j')`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridRecord {
    pub kind: &'static str,
    pub l_prime: String,
    pub j_prime: String,
}

#[derive(Debug, Serialize)]
struct GridDocument<'a> {
    n_uses: u32,
    total_excitations: u32,
    two_j: u32,
    records: &'a [GridRecord],
}

/// Oracle caps, overridable through the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub compositions: u64,
    pub sector_dim: u64,
    pub commutant_dim: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            compositions: DEFAULT_COMPOSITION_CAP,
            sector_dim: DEFAULT_SECTOR_DIM_CAP,
            commutant_dim: DEFAULT_COMMUTANT_DIM_CAP,
        }
    }
}

impl Caps {
    /// Defaults with `DFS_CAP_COMPOSITIONS` / `DFS_CAP_SECTOR_DIM` applied.
    /// The sector-dimension override applies to both basis and commutant work.
    pub fn from_env() -> Result<Self, String> {
        let read = |name: &str| -> Result<Option<u64>, String> {
            match std::env::var(name) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map(Some)
                    .map_err(|_| format!("{name} must be a nonnegative integer, got {v:?}")),
                Err(_) => Ok(None),
            }
        };
        let mut caps = Caps::default();
        if let Some(c) = read(ENV_CAP_COMPOSITIONS)? {
            caps.compositions = c;
        }
        if let Some(c) = read(ENV_CAP_SECTOR_DIM)? {
            caps.sector_dim = c;
            caps.commutant_dim = c;
        }
        Ok(caps)
    }
}

enum Failure {
    Usage(String),
    Resource(String),
    Mismatch,
    Io(io::Error),
}

impl From<DfsError> for Failure {
    fn from(e: DfsError) -> Self {
        match e {
            DfsError::InvalidArgument(msg) => Failure::Usage(msg),
            e @ DfsError::ResourceCap { .. } => Failure::Resource(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    let result = Caps::from_env()
        .map_err(Failure::Usage)
        .and_then(|caps| dispatch(cli.command, caps, out));
    match result {
        Ok(()) => EXIT_PASS,
        Err(Failure::Mismatch) => EXIT_MISMATCH,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Resource(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_RESOURCE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RESOURCE
        }
    }
}

fn dispatch(command: Command, caps: Caps, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Table { n, l_max, format, output } => match output {
            Some(path) => {
                let mut file = BufWriter::new(File::create(path)?);
                cmd_table(n, l_max, format, &mut file)?;
                file.flush()?;
                Ok(())
            }
            None => cmd_table(n, l_max, format, out),
        },
        Command::Verify { n, l, oracle, seed } => cmd_verify(n, l, oracle, seed, caps, out),
        Command::Grid { n, l, two_j, format } => cmd_grid(n, l, two_j, format, out),
    }
}

/// Nonzero records of a built table in `(N, L, 2j)` order.
pub fn table_records(table: &MultiplicityTable) -> Vec<OutputRecord> {
    table
        .entries()
        .filter(|(_, _, k)| !k.is_zero())
        .map(|(sector, spin, k)| OutputRecord {
            n_uses: sector.n_uses(),
            total_excitations: sector.total_excitations(),
            two_j: spin.two_j(),
            multiplicity: k.to_str_radix(10),
            irrep_dimension: spin.dim(),
        })
        .collect()
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn write_records<R: Serialize>(records: &[R], out: &mut dyn Write) -> Result<(), Failure> {
    let mut w = csv_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<D: Serialize>(doc: &D, out: &mut dyn Write) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn cmd_table(n: u32, l_max: u32, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let table = build_table(n, l_max)?;
    let records = table_records(&table);
    match format {
        Format::Csv => write_records(&records, out),
        Format::Json => write_json(
            &TableDocument {
                n_max: n,
                l_max,
                records: &records,
            },
            out,
        ),
    }
}

/// Summed lattice points followed by the four rectangle vertices.
pub fn grid_records(l: u32, two_j: u32) -> Result<Vec<GridRecord>, DfsError> {
    let sector = SectorIndex::new(1, l)?;
    let points = recursion_support(sector, SpinLabel::new(two_j))?;
    let half = |num: i64, den: i64| Ratio::new(num, den).to_string();
    let (l, t) = (i64::from(l), i64::from(two_j));
    let mut records: Vec<GridRecord> = points
        .into_iter()
        .map(|(lp, tjp)| GridRecord {
            kind: "point",
            l_prime: lp.to_string(),
            j_prime: half(i64::from(tjp), 2),
        })
        .collect();
    // (L, j), (L − 2j, 0), (L/2 − j, L/4 − j/2), (L/2 + j, L/4 + j/2) with j = t/2.
    let vertices = [
        (Ratio::from_integer(l), Ratio::new(t, 2)),
        (Ratio::from_integer(l - t), Ratio::from_integer(0)),
        (Ratio::new(l - t, 2), Ratio::new(l - t, 4)),
        (Ratio::new(l + t, 2), Ratio::new(l + t, 4)),
    ];
    records.extend(vertices.into_iter().map(|(lp, jp)| GridRecord {
        kind: "vertex",
        l_prime: lp.to_string(),
        j_prime: jp.to_string(),
    }));
    Ok(records)
}

fn cmd_grid(n: u32, l: u32, two_j: u32, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let records = grid_records(l, two_j)?;
    match format {
        Format::Csv => write_records(&records, out),
        Format::Json => write_json(
            &GridDocument {
                n_uses: n,
                total_excitations: l,
                two_j,
                records: &records,
            },
            out,
        ),
    }
}

fn compare_exact(
    table: &MultiplicityTable,
    sector: SectorIndex,
    label: &str,
    oracle: impl Fn(SpinLabel) -> Multiplicity,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    for spin in sector.valid_spins() {
        let recursion = table.lookup(sector.n_uses(), sector.total_excitations(), spin.two_j());
        let expected = oracle(spin);
        if recursion != expected {
            writeln!(
                out,
                "FAIL: mismatch at j={spin} (2j={}): recursion {recursion}, {label} {expected}",
                spin.two_j()
            )?;
            return Err(Failure::Mismatch);
        }
        writeln!(out, "j={spin} (2j={}): recursion {recursion}, {label} {expected}", spin.two_j())?;
    }
    writeln!(out, "PASS")?;
    Ok(())
}

fn cmd_verify(n: u32, l: u32, oracle: Oracle, seed: u64, caps: Caps, out: &mut dyn Write) -> Result<(), Failure> {
    let sector = SectorIndex::new(n, l)?;
    let table = build_table(n, l)?;
    writeln!(out, "sector {sector}, oracle {oracle:?}")?;
    match oracle {
        Oracle::Cg => {
            let spectrum = oracle_multiplicities(sector, caps.compositions)?;
            compare_exact(&table, sector, "cg", |s| spectrum.count(s), out)
        }
        Oracle::Weight => compare_exact(&table, sector, "weight", |s| weight_multiplicity(sector, s), out),
        Oracle::Character => {
            let omega_prime = haar_sample_su2(seed);
            let residual = character_check(sector, &table, &omega_prime, caps.sector_dim)?;
            for spin in sector.valid_spins() {
                writeln!(out, "j={spin} (2j={}): K={}", spin.two_j(), table.lookup(n, l, spin.two_j()))?;
            }
            writeln!(out, "seed {seed}, theta {:.12}", omega_prime.rotation_angle())?;
            writeln!(out, "residual {residual:.3e} (tolerance {CHARACTER_TOL:e})")?;
            if residual < CHARACTER_TOL {
                writeln!(out, "PASS")?;
                Ok(())
            } else {
                writeln!(out, "FAIL: character residual above tolerance")?;
                Err(Failure::Mismatch)
            }
        }
        Oracle::Commutant => {
            let dim = commutant_dimension(sector, DEFAULT_COMMUTANT_SAMPLES, seed, caps.commutant_dim)?;
            let terms: Vec<String> = sector
                .valid_spins()
                .into_iter()
                .map(|s| format!("{}²", table.lookup(n, l, s.two_j())))
                .collect();
            let expected: BigUint = sector
                .valid_spins()
                .into_iter()
                .map(|s| {
                    let k = table.lookup(n, l, s.two_j());
                    &k * &k
                })
                .sum();
            writeln!(out, "commutant dimension {dim}, expected {expected} = {}", terms.join(" + "))?;
            if BigUint::from(dim) == expected {
                writeln!(out, "PASS")?;
                Ok(())
            } else {
                writeln!(out, "FAIL: commutant dimension mismatch")?;
                Err(Failure::Mismatch)
            }
        }
    }
}
