//! Batch front end: reads channel, graph, distance, code and candidate files,
//! evaluates one quantity over a parameter grid and writes a CSV or JSON
//! table. Rows follow grid order and output is byte-identical for identical
//! arguments.

pub mod grid;
pub mod table;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use cqsp::channel::{CQChannel, Composition};
use cqsp::composite::{self, DEFAULT_EPSILON};
use cqsp::exponent::{self, ExponentValue};
use cqsp::par::{map_indexed, Execution};
use cqsp::renyi::{bht_exponents, MuFunction};
use cqsp::theta;

pub use grid::Grid;
use table::{Cell, Table};

pub const EXIT_IO: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

const DEFAULT_SPU_RHOS: [f64; 3] = [1.0, 2.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    E0,
    Esp,
    Rinf,
    Theta,
    Marton,
    EspCond,
    Espu,
    Elias,
    OracleMindist,
    Bht,
}

impl Quantity {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "cqsp",
    version,
    about = "Error-exponent bounds for classical-quantum channels"
)]
pub struct Args {
    #[arg(long, value_enum)]
    pub quantity: Quantity,

    /// Channel, graph, family or distance file, depending on the quantity.
    #[arg(long)]
    pub input: PathBuf,

    /// `a:b:steps[:lin|:log]` or a comma-separated list.
    #[arg(long)]
    pub rho_grid: Option<Grid>,

    #[arg(long)]
    pub rate_grid: Option<Grid>,

    #[arg(long)]
    pub s_grid: Option<Grid>,

    /// Composition file or `uniform`.
    #[arg(long, default_value = "uniform")]
    pub composition: String,

    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,

    /// Required by the randomized quantities (theta, marton).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    /// Candidate bundle for espu and elias.
    #[arg(long)]
    pub candidates: Option<PathBuf>,

    /// Block length for oracle-mindist.
    #[arg(long)]
    pub block_length: Option<usize>,

    /// Writes the theta certificate (representation and handle) as JSON.
    #[arg(long)]
    pub certificate: Option<PathBuf>,

    /// Random restarts for theta and marton.
    #[arg(long)]
    pub restarts: Option<usize>,

    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<cqsp::Error> for CliError {
    fn from(e: cqsp::Error) -> Self {
        let code = match e {
            cqsp::Error::Parse(_) => EXIT_PARSE,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })
}

fn required<'a, T>(v: &'a Option<T>, flag: &str, q: Quantity) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| invalid(format!("{} requires --{flag}", q.name())))
}

fn composition(arg: &str, k: usize) -> Result<Composition, CliError> {
    let p = if arg == "uniform" {
        Composition::uniform(k)
    } else {
        cqsp::io::parse_composition(&read(Path::new(arg))?)?
    };
    if p.len() != k {
        return Err(invalid(format!(
            "composition has {} entries, expected {k}",
            p.len()
        )));
    }
    Ok(p)
}

fn exponent_cells(e: &ExponentValue) -> [Cell; 4] {
    [
        Cell::Num(e.value),
        Cell::Text(e.status.to_string()),
        Cell::Int(e.iterations),
        Cell::Num(e.gap_estimate),
    ]
}

const BASE: [&str; 4] = ["value", "status", "iterations", "gap_estimate"];

fn columns(param: Option<&'static str>, extra: &[&'static str]) -> Vec<&'static str> {
    param
        .into_iter()
        .chain(BASE)
        .chain(extra.iter().copied())
        .collect()
}

/// Evaluates `f` at every grid point, in parallel unless sequential, and
/// prepends the grid value to each row.
fn sweep<F>(grid: &Grid, exec: Execution, f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    F: Fn(f64) -> Result<Vec<Cell>, CliError> + Sync + Send,
{
    map_indexed(exec, grid.0.len(), |i| {
        let mut row = vec![Cell::Num(grid.0[i])];
        row.extend(f(grid.0[i])?);
        Ok(row)
    })
    .into_iter()
    .collect()
}

fn channel(args: &Args) -> Result<CQChannel, CliError> {
    Ok(cqsp::io::parse_channel(&read(&args.input)?)?)
}

fn theta_options(args: &Args, exec: Execution) -> theta::ThetaOptions {
    theta::ThetaOptions {
        restarts: args.restarts.unwrap_or(theta::DEFAULT_RESTARTS),
        exec,
    }
}

fn theta_row(
    args: &Args,
    obj: &theta::HandleObjective,
    restarts: usize,
) -> Result<Vec<Cell>, CliError> {
    if let Some(path) = &args.certificate {
        let mut text = serde_json::to_string_pretty(&cqsp::io::certificate_json(obj))
            .expect("certificates serialize");
        text.push('\n');
        write(path, &text)?;
    }
    Ok(vec![
        Cell::Num(obj.value),
        Cell::Text("upper-bound".into()),
        Cell::Int(restarts),
        Cell::Text("n/a".into()),
    ])
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })
}

/// Builds the result table for the parsed arguments.
pub fn evaluate(args: &Args) -> Result<Table, CliError> {
    let q = args.quantity;
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(invalid(format!(
            "epsilon must be positive, got {}",
            args.epsilon
        )));
    }
    let eps = args.epsilon;
    let (cols, rows) = match q {
        Quantity::E0 => {
            let c = channel(args)?;
            let p = composition(&args.composition, c.alphabet_size())?;
            let grid = required(&args.rho_grid, "rho-grid", q)?;
            let rows = sweep(grid, exec, |rho| {
                Ok(exponent_cells(&exponent::e0cc(&c, rho, &p)?.exponent).to_vec())
            })?;
            (columns(Some("rho"), &[]), rows)
        }
        Quantity::Esp => {
            let c = channel(args)?;
            let p = composition(&args.composition, c.alphabet_size())?;
            let grid = required(&args.rate_grid, "rate-grid", q)?;
            let rows = sweep(grid, exec, |r| {
                Ok(exponent_cells(&exponent::espcc(&c, r, &p, eps)?).to_vec())
            })?;
            (columns(Some("rate"), &[]), rows)
        }
        Quantity::Rinf => {
            let c = channel(args)?;
            let p = composition(&args.composition, c.alphabet_size())?;
            (
                columns(None, &[]),
                vec![exponent_cells(&exponent::rinf(&c, &p)?.exponent).to_vec()],
            )
        }
        Quantity::Theta | Quantity::Marton => {
            let g = cqsp::io::parse_graph(&read(&args.input)?)?;
            let seed = *required(&args.seed, "seed", q)?;
            let opts = theta_options(args, exec);
            let obj = if q == Quantity::Theta {
                theta::lovasz_theta_with(&g, seed, &opts)?
            } else {
                let p = composition(&args.composition, g.vertex_count())?;
                theta::marton_theta_with(&g, &p, seed, &opts)?
            };
            (
                columns(None, &[]),
                vec![theta_row(args, &obj, opts.restarts)?],
            )
        }
        Quantity::EspCond => {
            let (fam, v) = cqsp::io::parse_family(&read(&args.input)?)?;
            let p = composition(&args.composition, fam.len())?;
            let grid = required(&args.rate_grid, "rate-grid", q)?;
            let rows = sweep(grid, exec, |r| {
                Ok(exponent_cells(&composite::espcc_conditional(&fam, r, &v, &p, eps)?).to_vec())
            })?;
            (columns(Some("rate"), &[]), rows)
        }
        Quantity::Espu => {
            let c = channel(args)?;
            let p = composition(&args.composition, c.alphabet_size())?;
            let grid = required(&args.rate_grid, "rate-grid", q)?;
            let candidates = match &args.candidates {
                Some(path) => cqsp::io::parse_candidates(&read(path)?)?,
                None => {
                    let rhos = args
                        .rho_grid
                        .as_ref()
                        .map_or(DEFAULT_SPU_RHOS.to_vec(), |g| g.0.clone());
                    composite::heuristic_candidates(&c, &p, &rhos)?
                }
            };
            let rows = sweep(grid, exec, |r| {
                let b = composite::espucc_with(&c, r, &p, &candidates, eps, Execution::Sequential)?;
                let mut row = exponent_cells(&b.value).to_vec();
                row.push(Cell::Int(b.best));
                Ok(row)
            })?;
            (columns(Some("rate"), &["best_candidate"]), rows)
        }
        Quantity::Elias => {
            let d = cqsp::io::parse_distance(&read(&args.input)?)?;
            let p = composition(&args.composition, d.alphabet_size())?;
            let grid = required(&args.rate_grid, "rate-grid", q)?;
            let candidates =
                cqsp::io::parse_candidates(&read(required(&args.candidates, "candidates", q)?)?)?;
            let rows = sweep(grid, exec, |r| {
                let b = composite::elias_distance_bound_with(
                    &d,
                    r,
                    &p,
                    &candidates,
                    eps,
                    Execution::Sequential,
                )?;
                let mut row = exponent_cells(&b.bound.value).to_vec();
                row.push(Cell::Int(b.bound.best));
                match b.shortcut {
                    Some((value, threshold, _)) => {
                        row.extend([Cell::Num(value), Cell::Num(threshold)])
                    }
                    None => row.extend([Cell::Text("n/a".into()), Cell::Text("n/a".into())]),
                }
                Ok(row)
            })?;
            (
                columns(
                    Some("rate"),
                    &["best_candidate", "shortcut", "shortcut_threshold"],
                ),
                rows,
            )
        }
        Quantity::OracleMindist => {
            let d = cqsp::io::parse_distance(&read(&args.input)?)?;
            let p = composition(&args.composition, d.alphabet_size())?;
            let grid = required(&args.rate_grid, "rate-grid", q)?;
            let n = *required(&args.block_length, "block-length", q)?;
            let rows = sweep(grid, exec, |r| {
                Ok(
                    exponent_cells(&ExponentValue::exact(composite::brute_force_min_distance(
                        n, r, &p, &d,
                    )?))
                    .to_vec(),
                )
            })?;
            (columns(Some("rate"), &[]), rows)
        }
        Quantity::Bht => {
            let c = channel(args)?;
            if c.alphabet_size() < 2 {
                return Err(invalid("bht needs a file with at least two states"));
            }
            let mu = MuFunction::new(c.state(0), c.state(1))?;
            let grid = required(&args.s_grid, "s-grid", q)?;
            let rows = sweep(grid, exec, |s| {
                let b = bht_exponents(&mu, s)?;
                let mut row = exponent_cells(&ExponentValue::exact(b.exp_first_kind)).to_vec();
                row.push(Cell::Num(b.exp_second_kind));
                Ok(row)
            })?;
            (columns(Some("s"), &["second_kind"]), rows)
        }
    };
    Ok(Table {
        quantity: q.name(),
        columns: cols,
        rows,
    })
}

/// Evaluates and writes the table; returns the rendered output.
pub fn run(args: &Args) -> Result<String, CliError> {
    let table = evaluate(args)?;
    let text = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    if let Some(path) = &args.out {
        write(path, &text)?;
    }
    Ok(text)
}
