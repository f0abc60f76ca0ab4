use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use serde_json::json;

use hyperred_core::coeffring::{
    RingParams, DEFAULT_MAX_RAM_INDEX, DEFAULT_MAX_RES_DEGREE, DEFAULT_PRECISION,
};
use hyperred_core::error::{Error, Q};
use hyperred_core::reduction::{build_reduction, Options, ThicknessPolicy};

mod input;
mod report;

use input::{parse_rational, CurveInput};

const EXIT_HARD_FAILURE: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Annotations {
    PaperExactOnly,
    WithInferred,
    WithHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckLevel {
    Fast,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Dot,
    Both,
}

/// Stable reduction of hyperelliptic curves y² = F(x) over 2-adic fields.
#[derive(Debug, Parser)]
#[command(name = "hyperred", version)]
struct Cli {
    /// Curve description (JSON); "-" reads standard input.
    input: PathBuf,
    /// Directory receiving report.json and graph.dot.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
    /// Absolute precision in units of v(2), e.g. 12 or 25/2.
    #[arg(long)]
    precision: Option<String>,
    #[arg(long)]
    max_ram_index: Option<u32>,
    #[arg(long)]
    max_residue_degree: Option<u32>,
    /// Work with equations truncated at valuation 2.
    #[arg(long)]
    truncate: bool,
    #[arg(long, value_enum)]
    thickness_annotations: Option<Annotations>,
    #[arg(long, value_enum)]
    check_invariants: Option<CheckLevel>,
    #[arg(long, value_enum, default_value = "both")]
    emit: Emit,
}

struct Resolved {
    params: RingParams,
    truncate: bool,
    policy: ThicknessPolicy,
    strict: bool,
    options_json: serde_json::Value,
}

fn annotations_from(s: &str) -> Result<Annotations> {
    Annotations::from_str(s, false).map_err(|e| anyhow::anyhow!("thickness_annotation: {e}"))
}

fn level_from(s: &str) -> Result<CheckLevel> {
    CheckLevel::from_str(s, false).map_err(|e| anyhow::anyhow!("invariant_check: {e}"))
}

fn value_name(v: impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// Command-line flags override the options stored in the input file.
fn resolve(cli: &Cli, c: &CurveInput) -> Result<Resolved> {
    let o = &c.options;
    let precision = match cli.precision.as_deref().or(o.precision.as_deref()) {
        Some(s) => parse_rational(s).context("precision")?,
        None => Q::from_integer(DEFAULT_PRECISION),
    };
    let max_n = cli.max_ram_index.or(o.max_n).unwrap_or(DEFAULT_MAX_RAM_INDEX);
    let max_d = cli.max_residue_degree.or(o.max_d).unwrap_or(DEFAULT_MAX_RES_DEGREE);
    let truncate = cli.truncate || o.truncation.unwrap_or(false);
    let annotations = match (cli.thickness_annotations, &o.thickness_annotation) {
        (Some(a), _) => a,
        (None, Some(s)) => annotations_from(s)?,
        (None, None) => Annotations::WithInferred,
    };
    let level = match (cli.check_invariants, &o.invariant_check) {
        (Some(l), _) => l,
        (None, Some(s)) => level_from(s)?,
        (None, None) => CheckLevel::Fast,
    };
    let params = RingParams::with_caps(1, 1, precision, max_n, max_d)?;
    let policy = match annotations {
        Annotations::PaperExactOnly => ThicknessPolicy::PaperExactOnly,
        Annotations::WithInferred => ThicknessPolicy::WithInferred,
        Annotations::WithHeuristic => ThicknessPolicy::WithHeuristic,
    };
    let options_json = json!({
        "precision": report::rat(precision),
        "max_N": max_n,
        "max_d": max_d,
        "truncation": truncate,
        "thickness_annotation": value_name(annotations),
        "invariant_check": value_name(level),
    });
    Ok(Resolved {
        params,
        truncate,
        policy,
        strict: level == CheckLevel::Strict,
        options_json,
    })
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
    }
}

enum Failure {
    Input(anyhow::Error),
    Pipeline(anyhow::Error),
}

fn run(cli: &Cli) -> std::result::Result<bool, Failure> {
    let text = read_input(&cli.input).map_err(Failure::Input)?;
    let curve = CurveInput::from_json(&text).map_err(Failure::Input)?;
    let r = resolve(cli, &curve).map_err(Failure::Input)?;
    let factors = curve.polynomials(&r.params).map_err(Failure::Pipeline)?;
    let opts = Options {
        truncate: r.truncate,
        strict: r.strict,
    };
    let g = build_reduction(&factors, &opts)
        .context("reduction failed")
        .map_err(Failure::Pipeline)?;
    let info = report::RunInfo {
        options: r.options_json,
        ramification: factors[0].ring().n,
    };
    let write = || -> Result<()> {
        fs::create_dir_all(&cli.out)
            .with_context(|| format!("cannot create {}", cli.out.display()))?;
        if matches!(cli.emit, Emit::Json | Emit::Both) {
            let mut s = serde_json::to_string_pretty(&report::report(&g, r.policy, &info))?;
            s.push('\n');
            fs::write(cli.out.join("report.json"), s)?;
        }
        if matches!(cli.emit, Emit::Dot | Emit::Both) {
            fs::write(cli.out.join("graph.dot"), report::dot(&g, r.policy))?;
        }
        Ok(())
    };
    write().map_err(Failure::Pipeline)?;
    let hard = g.hard_failures();
    for c in &hard {
        eprintln!("hard invariant failure: {}: {}", c.name, c.detail);
    }
    println!(
        "genus {} toric rank {} ({} stable components, {} stable nodes)",
        g.genus,
        g.totals.toric_rank,
        g.stable_nodes.len(),
        g.stable_edges.len()
    );
    Ok(hard.is_empty())
}

fn hint(e: &anyhow::Error) -> Option<&'static str> {
    match e.downcast_ref::<Error>()? {
        Error::CapExceeded { what: "ramification index", .. } => Some("raise --max-ram-index"),
        Error::CapExceeded { what: "residue degree", .. } => Some("raise --max-residue-degree"),
        Error::WildRootObstruction => Some("split F into factors with known roots"),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_HARD_FAILURE),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {e:#}");
            if let Some(hint) = hint(&e) {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(EXIT_PIPELINE)
        }
    }
}
