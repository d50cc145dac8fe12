//! Command-line front end: ledger emission, surface manufacture, audits,
//! certification, iteration and plot-data export.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flatcert::grid::gf1::{read_gf1, write_gf1};
use flatcert::harmonic::PoissonOptions;
use flatcert::hp::{Hp, LogReal};
use flatcert::ledger::{check_threshold_chain, derive_ledger, ledger_json, HarnackParams};
use flatcert::mse::{exact_solution, solve_with_data, ExactKind, SolveOptions};
use flatcert::pipeline::{
    closeness_csv, harnack_decay_audit, improvement_step, iterate_flatness, PipelineError, PipelineOptions,
};
use flatcert::scalar::fmt_real;
use flatcert::{Constants, Grid, GridFunction, Surface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "flatcert", version, about = "Certified improvement of flatness for minimal graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constant ledger and threshold chain as JSON.
    Ledger {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the minimal surface equation for a boundary preset, write gf1.
    Solve {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 129)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a catalog solution, write gf1.
    Exact {
        #[command(flatten)]
        exact: ExactArgs,
        #[arg(long, default_value_t = 129)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decay audit of a surface around a base point.
    Audit {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        center: [f64; 2],
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One improvement of flatness step, certificate as JSON.
    Certify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated improvement steps, certificate list as JSON.
    Iterate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge certificate or iteration JSON files into one closeness CSV.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long, default_value = "0.25")]
    eps1: String,
    #[arg(long, default_value = "0.2")]
    eta: String,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long = "exact", value_enum)]
    kind: Option<ExactName>,
    /// Slope of the affine solution.
    #[arg(long, value_parser = parse_pair, default_value = "0,0")]
    a: [f64; 2],
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    /// Scale of the Scherk solution.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args)]
struct SourceArgs {
    /// Graph in gf1 format.
    #[arg(long, conflicts_with_all = ["kind", "preset"])]
    surface: Option<PathBuf>,
    #[command(flatten)]
    exact: ExactArgs,
    /// Boundary preset solved on the fly at the given eps.
    #[arg(long, value_enum, conflicts_with = "kind")]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 129)]
    nodes: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExactName {
    Affine,
    Scherk,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Odd cubic data.
    Odd,
    /// Data with an even quadratic part.
    Generic,
    /// Odd data plus a seeded odd harmonic perturbation.
    Bumped,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got {s:?}"));
    }
    let p = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([p(parts[0])?, p(parts[1])?])
}

fn unit_grid(nodes: usize) -> Result<Arc<Grid<f64>>> {
    if nodes < 17 {
        bail!("resolution must be at least 17 nodes per diameter, got {nodes}");
    }
    Ok(Arc::new(Grid::with_nodes_per_diameter(2, 1.0, nodes)?))
}

/// Boundary data of a preset, `sup ≤ eps` on the unit disk.
fn preset_data(preset: Preset, eps: f64, seed: u64) -> impl Fn([f64; 2]) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Coefficients of Re and Im of z³ and z⁵.
    let bump: [f64; 4] = std::array::from_fn(|_| 0.04 * rng.gen_range(-1.0..1.0));
    move |x: [f64; 2]| {
        let (a, b) = (x[0], x[1]);
        let odd = 0.3 * a - 0.2 * b + 0.45 * (a.powi(3) - 3.0 * a * b * b);
        let v = match preset {
            Preset::Odd => odd,
            Preset::Generic => 0.3 * a + 0.4 * (a * a - b * b) + 0.2 * a * b,
            Preset::Bumped => {
                let z3 = [a.powi(3) - 3.0 * a * b * b, 3.0 * a * a * b - b.powi(3)];
                let z2 = [a * a - b * b, 2.0 * a * b];
                let z5 = [z3[0] * z2[0] - z3[1] * z2[1], z3[0] * z2[1] + z3[1] * z2[0]];
                0.9 * odd + bump[0] * z3[0] + bump[1] * z3[1] + bump[2] * z5[0] + bump[3] * z5[1]
            }
        };
        Some(eps * v)
    }
}

fn solve_preset(preset: Preset, eps: f64, seed: u64, nodes: usize) -> Result<GridFunction<f64>> {
    let opts = SolveOptions { tol: Some(1e-13), max_iter: 50 };
    Ok(solve_with_data(unit_grid(nodes)?, preset_data(preset, eps, seed), &opts)?.u)
}

fn exact_kind(args: &ExactArgs, kind: ExactName) -> ExactKind<f64> {
    match kind {
        ExactName::Affine => ExactKind::Affine {
            slope: args.a,
            offset: args.offset,
        },
        ExactName::Scherk => ExactKind::Scherk { scale: args.scale },
    }
}

fn load_surface(src: &SourceArgs, eps: f64) -> Result<Surface<f64>> {
    let graph = if let Some(path) = &src.surface {
        read_gf1(path).with_context(|| format!("reading {}", path.display()))?
    } else if let Some(kind) = src.exact.kind {
        exact_solution(exact_kind(&src.exact, kind), unit_grid(src.nodes)?)?
    } else if let Some(preset) = src.preset {
        solve_preset(preset, eps, src.seed, src.nodes)?
    } else {
        bail!("one of --surface, --exact or --preset is required");
    };
    Ok(Surface::from_graph(graph))
}

fn ledger_params(p: &ParamArgs) -> Result<HarnackParams<Hp>> {
    Ok(HarnackParams::from_decimal(p.n, &p.eps1, &p.eta)?)
}

fn constants(p: &ParamArgs) -> Result<Constants<f64>> {
    Ok(derive_ledger(&ledger_params(p)?)?.constants())
}

fn float_params(p: &ParamArgs) -> Result<HarnackParams<f64>> {
    let parse = |s: &str| s.parse::<f64>().with_context(|| format!("bad number {s:?}"));
    Ok(HarnackParams::new(p.n, parse(&p.eps1)?, parse(&p.eta)?)?)
}

fn pipeline_options(nodes: usize) -> PipelineOptions<f64> {
    let d = PipelineOptions::default();
    PipelineOptions {
        nodes,
        mse: SolveOptions { tol: Some(1e-13), max_iter: 50 },
        poisson: PoissonOptions { tol: 1e-13, ..d.poisson },
        ..d
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Failure of a verdict, reported as the first failing inequality.
struct Failure(String);

fn staged(e: &PipelineError) -> Failure {
    match e {
        PipelineError::Stage { stage, margin, stages } => {
            let mut msg = format!("stage `{stage}` failed: margin {}", fmt_real(*margin));
            for s in stages {
                msg.push_str(&format!(
                    "\n  {:<20} {} margin {}",
                    s.name,
                    if s.verdict { "pass" } else { "FAIL" },
                    fmt_real(s.margin)
                ));
            }
            Failure(msg)
        }
        other => Failure(other.to_string()),
    }
}

fn run(cli: Cli) -> Result<Option<Failure>> {
    match cli.command {
        Command::Ledger { params, out } => {
            let ledger = derive_ledger(&ledger_params(&params)?)?;
            let chain = check_threshold_chain(&ledger);
            emit(out.as_deref(), &json_text(&ledger_json(&ledger, &chain)))?;
            Ok(chain.links.iter().find(|l| !l.holds).map(|l| {
                Failure(format!("threshold link `{}` failed: log2 margin {}", l.name, l.margin_log2.to_decimal()))
            }))
        }
        Command::Solve {
            preset,
            eps,
            nodes,
            seed,
            out,
        } => {
            emit(out.as_deref(), &write_gf1(&solve_preset(preset, eps, seed, nodes)?))?;
            Ok(None)
        }
        Command::Exact { exact, nodes, out } => {
            let Some(kind) = exact.kind else { bail!("--exact is required") };
            emit(out.as_deref(), &write_gf1(&exact_solution(exact_kind(&exact, kind), unit_grid(nodes)?)?))?;
            Ok(None)
        }
        Command::Audit {
            source,
            params,
            eps,
            center,
            format,
            out,
        } => {
            let surface = load_surface(&source, eps)?;
            let audit = harnack_decay_audit(
                &surface,
                center,
                eps,
                &float_params(&params)?,
                &constants(&params)?,
                &pipeline_options(source.nodes),
            )?;
            let text = match format {
                Format::Csv => audit.to_csv(),
                Format::Json => json_text(&serde_json::json!({
                    "eps": fmt_real(audit.eps),
                    "M": fmt_real(audit.m),
                    "Mtilde": audit.m_tilde,
                    "rows": audit.rows.iter().map(|r| serde_json::json!({
                        "m": r.m,
                        "radius": fmt_real(r.radius),
                        "measured": fmt_real(r.measured),
                        "bound": fmt_real(r.bound),
                        "samples": r.samples,
                        "refined": r.refined,
                        "holds": r.holds,
                    })).collect::<Vec<_>>(),
                    "truncatedAt": audit.truncated_at,
                    "modulusMargin": fmt_real(audit.modulus.margin),
                    "verdict": audit.verdict,
                })),
            };
            emit(out.as_deref(), &text)?;
            if let Some(r) = audit.rows.iter().find(|r| !r.holds) {
                return Ok(Some(Failure(format!(
                    "decay row m={} failed: margin {}",
                    r.m,
                    fmt_real(r.bound - r.measured)
                ))));
            }
            if !audit.modulus.verdict {
                return Ok(Some(Failure(format!(
                    "certified modulus failed: margin {}",
                    fmt_real(audit.modulus.margin)
                ))));
            }
            Ok(None)
        }
        Command::Certify {
            source,
            params,
            eps,
            out,
        } => {
            let surface = load_surface(&source, eps)?;
            match improvement_step(&surface, eps, &constants(&params)?, &pipeline_options(source.nodes)) {
                Ok(cert) => {
                    emit(out.as_deref(), &json_text(&cert.to_json()))?;
                    Ok(None)
                }
                Err(e @ PipelineError::Stage { .. }) => Ok(Some(staged(&e))),
                Err(e) => Err(e.into()),
            }
        }
        Command::Iterate {
            source,
            params,
            eps,
            steps,
            out,
        } => {
            let surface = load_surface(&source, eps)?;
            let it = iterate_flatness(&surface, eps, steps, &constants(&params)?, &pipeline_options(source.nodes));
            emit(out.as_deref(), &json_text(&it.to_json()))?;
            Ok(it.failure.as_ref().map(staged))
        }
        Command::Report { inputs, out } => {
            let mut rows = Vec::new();
            let mut failure = None;
            for path in &inputs {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                let certs = match v.get("steps").and_then(Value::as_array) {
                    Some(steps) => steps.clone(),
                    None => vec![v.clone()],
                };
                for c in &certs {
                    let num = |p: &str| -> Result<f64> {
                        c.pointer(p)
                            .and_then(Value::as_str)
                            .and_then(|s| s.parse().ok())
                            .with_context(|| format!("{}: missing {p}", path.display()))
                    };
                    rows.push((num("/eps")?, num("/closeness/measured")?, num("/closeness/bound")?));
                    if c["verdict"] != Value::Bool(true) && failure.is_none() {
                        failure = Some(Failure(format!("{}: certificate verdict is false", path.display())));
                    }
                }
                if let Some(f) = v.get("failure").and_then(Value::as_str) {
                    failure.get_or_insert(Failure(format!("{}: {f}", path.display())));
                }
            }
            emit(out.as_deref(), &closeness_csv(&rows))?;
            Ok(failure)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Failure(msg))) => {
            eprintln!("verdict failed: {msg}");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
