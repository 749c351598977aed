//! `msopoly`: build, solve and check extended formulations of MSO polytopes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use msopoly::decompose::{decompose_system, point_from_map, point_to_map};
use msopoly::logic::{
    desugar, parse_formula, CoreFormula, DEFAULT_EVAL_BUDGET, DOMINATING_SET, INDEPENDENT_SET, THREE_COLORING,
    VERTEX_COVER,
};
use msopoly::oracle::{enumerate_satisfying, integer_points, DEFAULT_POINT_BUDGET};
use msopoly::pipeline::{build, corrupt_nu, run_checks, Build, BuildOptions, CheckOptions};
use msopoly::polytope::SparseSystem;
use msopoly::solve::{export_lp, parse_weights, solve_lp, Objective, Sense, Status};
use msopoly::structures::{parse_dimacs, parse_td_file};
use msopoly::Error;
use num_traits::{One, Zero};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "msopoly", version, about = "Extended formulations of MSO polytopes over tree decompositions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the system and write it as LP or JSON.
    Build(Common),
    /// Optimize a weighted sum of the free-variable indicators.
    Solve(Common),
    /// List the satisfying assignments by brute force.
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// Also list the integer points of the system.
        #[arg(long)]
        points: bool,
    },
    /// Cross-check the system against the brute-force oracles.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        corrupt_nu: bool,
    },
    /// Split an integer point of rP into r points of P.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// JSON map from variable name to integer.
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Print size statistics.
    Stats(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    IndependentSet,
    VertexCover,
    DominatingSet,
    #[value(name = "3col")]
    ThreeCol,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Lp,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    Min,
    Max,
}

#[derive(Args)]
struct Common {
    /// Graph in DIMACS edge format.
    #[arg(long)]
    graph: PathBuf,
    /// Formula file.
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    formula: Option<PathBuf>,
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    /// Weights file with `w <vertex> <index> <rational>` lines.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Tree decomposition of the graph.
    #[arg(long)]
    td: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "max")]
    sense: SenseArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lp")]
    format: Format,
    #[arg(long, default_value_t = 4)]
    max_k: usize,
    #[arg(long, default_value_t = 24)]
    max_witness: usize,
    #[arg(long, default_value_t = DEFAULT_EVAL_BUDGET)]
    eval_budget: u128,
    /// Largest universe |V| + |E| the oracle checks accept.
    #[arg(long, default_value_t = 16)]
    check_limit: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Failure {
    class: &'static str,
    detail: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { class: e.class(), detail: e.to_string() }
    }
}

fn fail(class: &'static str, detail: impl Into<String>) -> Failure {
    Failure { class, detail: detail.into() }
}

fn exit_code(class: &str) -> u8 {
    match class {
        "SyntaxError"
        | "UnboundVariable"
        | "DuplicateFree"
        | "ShadowedVariable"
        | "SortMismatch"
        | "InputError"
        | "IoError"
        | "InvalidStructure"
        | "InvalidDecomposition" => 2,
        "BudgetExceeded" | "WitnessTooLarge" | "TooLarge" | "UniverseTooLarge" => 3,
        "NotInDilate" | "InconsistentPoint" | "PairingFailed" | "NotDecomposable" => 4,
        _ => 1,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail("IoError", format!("{}: {e}", path.display())))
}

fn formula(c: &Common) -> Result<CoreFormula, Failure> {
    let text = match (c.problem, &c.formula) {
        (Some(Problem::IndependentSet), _) => INDEPENDENT_SET.to_string(),
        (Some(Problem::VertexCover), _) => VERTEX_COVER.to_string(),
        (Some(Problem::DominatingSet), _) => DOMINATING_SET.to_string(),
        (Some(Problem::ThreeCol), _) => THREE_COLORING.to_string(),
        (None, Some(p)) => read(p)?,
        (None, None) => return Err(fail("InputError", "need --formula or --problem")),
    };
    Ok(desugar(&parse_formula(&text).map_err(Error::from)?))
}

fn load(c: &Common) -> Result<Build, Failure> {
    let graph = parse_dimacs(&read(&c.graph)?).map_err(Error::from)?;
    let f = formula(c)?;
    let td = match &c.td {
        Some(p) => Some(parse_td_file(&read(p)?).map_err(Error::from)?),
        None => None,
    };
    let opts = BuildOptions {
        max_k: c.max_k,
        max_witness: c.max_witness,
        eval_budget: c.eval_budget,
        td,
        ..Default::default()
    };
    Ok(build(&graph, &f, &opts)?)
}

fn objective(c: &Common, sys: &SparseSystem) -> Result<Objective, Failure> {
    let sense = match c.sense {
        SenseArg::Min => Sense::Min,
        SenseArg::Max => Sense::Max,
    };
    Ok(match &c.weights {
        Some(p) => Objective::with_weights(parse_weights(&read(p)?).map_err(Error::from)?, sense),
        None => Objective::unit(sys, sense),
    })
}

fn within_limit(c: &Common, b: &Build) -> Result<(), Failure> {
    if b.structure.len() > c.check_limit {
        return Err(fail(
            "BudgetExceeded",
            format!("universe of {} elements exceeds --check-limit {}", b.structure.len(), c.check_limit),
        ));
    }
    Ok(())
}

fn system_json(sys: &SparseSystem) -> Value {
    let names: Vec<String> = sys.vars().iter().map(ToString::to_string).collect();
    let rows: Vec<Value> = sys
        .rows()
        .iter()
        .map(|r| {
            let terms: Vec<Value> = r.terms.iter().map(|(c, a)| json!([names[*c], a.to_string()])).collect();
            json!({ "terms": terms, "rhs": r.rhs.to_string() })
        })
        .collect();
    let free: Vec<&String> = names.iter().enumerate().filter(|(c, _)| !sys.is_nonneg(*c)).map(|(_, n)| n).collect();
    json!({ "vars": names, "free": free, "rows": rows })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn emit(c: &Common, text: &str) -> Result<(), Failure> {
    match &c.out {
        Some(p) => fs::write(p, text).map_err(|e| fail("IoError", format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Build(c) => {
            let start = Instant::now();
            let b = load(&c)?;
            let text = match c.format {
                Format::Lp => export_lp(&b.sys, &objective(&c, &b.sys)?).map_err(Error::from)?,
                Format::Json => pretty(&system_json(&b.sys)),
            };
            emit(&c, &text)?;
            let mut stats = b.stats()?;
            stats["wall_ms"] = json!(start.elapsed().as_millis() as u64);
            eprintln!("{stats}");
        }
        Cmd::Stats(c) => {
            let b = load(&c)?;
            emit(&c, &pretty(&b.stats()?))?;
        }
        Cmd::Solve(c) => {
            let b = load(&c)?;
            let res = solve_lp(&b.sys, &objective(&c, &b.sys)?).map_err(Error::from)?;
            let status = format!("{:?}", res.status);
            let out = if res.status == Status::Optimal {
                let y: BTreeMap<String, Value> = res
                    .y_values(&b.sys)
                    .into_iter()
                    .map(|((v, i), x)| {
                        let val = if x.is_zero() {
                            json!(0)
                        } else if x.is_one() {
                            json!(1)
                        } else {
                            json!(x.to_string())
                        };
                        (format!("y_{v}_{i}"), val)
                    })
                    .collect();
                json!({ "status": status, "value": res.value.to_string(), "y": y })
            } else {
                json!({ "status": status })
            };
            emit(&c, &pretty(&out))?;
        }
        Cmd::Enumerate { common: c, points } => {
            let b = load(&c)?;
            within_limit(&c, &b)?;
            let sats = enumerate_satisfying(&b.formula, &b.structure, c.eval_budget).map_err(Error::from)?;
            let sets: Vec<Value> = sats.iter().map(|a| json!(a.sets())).collect();
            let mut out = json!({ "free": b.formula.free_vars(), "assignments": sets });
            if points {
                let pts = integer_points(&b.sys, DEFAULT_POINT_BUDGET).map_err(Error::from)?;
                out["points"] = json!(pts.iter().map(|p| point_to_map(&b.sys, p)).collect::<Vec<_>>());
            }
            emit(&c, &pretty(&out))?;
        }
        Cmd::Check { common: c, corrupt_nu: corrupt } => {
            let mut b = load(&c)?;
            within_limit(&c, &b)?;
            if corrupt {
                corrupt_nu(&mut b);
            }
            let opts = CheckOptions { seed: c.seed, oracle_budget: c.eval_budget, ..Default::default() };
            let items = run_checks(&b, &opts)?;
            let mut text = String::new();
            for item in &items {
                text += &format!("{} {} {}\n", if item.pass { "PASS" } else { "FAIL" }, item.name, item.detail);
            }
            emit(&c, &text)?;
            if items.iter().any(|i| !i.pass) {
                return Ok(1);
            }
        }
        Cmd::Decompose { common: c, point, r } => {
            let b = load(&c)?;
            let map: BTreeMap<String, i64> = serde_json::from_str(&read(&point)?)
                .map_err(|e| fail("SyntaxError", format!("{}: {e}", point.display())))?;
            let pt = point_from_map(&b.sys, &map).map_err(Error::from)?;
            let parts = decompose_system(&pt, r, &b.sys).map_err(Error::from)?;
            let out: Vec<_> = parts.iter().map(|p| point_to_map(&b.sys, p)).collect();
            emit(&c, &pretty(&json!(out)))?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}: {}", f.class, f.detail.replace('\n', " "));
            ExitCode::from(exit_code(f.class))
        }
    }
}
