use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ars2d::distance::{self, DistanceError};
use ars2d::graph::{builtin_graph, equivalent, GraphError, LabelledGraph};
use ars2d::locus::LocusError;
use ars2d::model::{builtin, FixtureParams};
use ars2d::report::{analyze, ReportError};
use ars2d::{ArsSpec, Vec2};

#[derive(Parser)]
#[command(
    name = "ars2d",
    version,
    about = "Analyze two-dimensional almost-Riemannian structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the singular locus, check (H0) and build the labelled graph.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two structures or graphs are equivalent.
    Compare {
        a: String,
        b: String,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Estimate the distance between two points.
    Distance {
        #[command(flatten)]
        input: InputArgs,
        /// Start point `x,y`.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// End point `x,y` (grid method).
        #[arg(long, allow_hyphen_values = true)]
        to: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Grid)]
        method: Method,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        /// Initial covector `px,py` (shoot method).
        #[arg(long, allow_hyphen_values = true)]
        covector: Option<String>,
        /// Integration time (shoot method).
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        /// RK4 steps (shoot method).
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
    /// Print the labelled graph of a structure or graph file.
    Graph {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a point as ordinary, Grushin or tangency.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        /// Point `x,y`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Fit the exponent of `d(p, p + h v)` against `h`.
    Ballbox {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long, default_value_t = 0.01)]
        h_min: f64,
        #[arg(long, default_value_t = 0.16)]
        h_max: f64,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Structure or graph file, or the name of a bundled fixture.
    input: Option<String>,
    /// Bundled fixture to use instead of a file.
    #[arg(long)]
    fixture: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// `psi(x)` for the tangency normal form.
    #[arg(long)]
    psi: Option<String>,
    /// `phi(x, y)` for the ordinary and Grushin normal forms.
    #[arg(long)]
    phi: Option<String>,
    /// `xi(x, y)` for the tangency normal form.
    #[arg(long)]
    xi: Option<String>,
}

impl ParamArgs {
    fn fixture_params(&self) -> FixtureParams {
        let d = FixtureParams::default();
        FixtureParams {
            phi: self.phi.clone().unwrap_or(d.phi),
            psi: self.psi.clone().unwrap_or(d.psi),
            xi: self.xi.clone().unwrap_or(d.xi),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Grid,
    Shoot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

/// Error carrying the process exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn exit(code: u8, message: impl Into<String>) -> anyhow::Error {
    Exit {
        code,
        message: message.into(),
    }
    .into()
}

const EXIT_INVALID: u8 = 2;
const EXIT_H0: u8 = 3;
const EXIT_UNREACHABLE: u8 = 4;

enum Input {
    Spec(ArsSpec),
    Graph(LabelledGraph),
}

fn load(name: &str, params: &ParamArgs) -> Result<Input> {
    let path = Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("{name} is not JSON"))?;
        return if value.get("vertices").is_some() {
            Ok(Input::Graph(
                LabelledGraph::from_json(&text).with_context(|| format!("reading graph {name}"))?,
            ))
        } else if value.get("surface").is_some() {
            Ok(Input::Spec(
                ArsSpec::from_json(&text).with_context(|| format!("reading structure {name}"))?,
            ))
        } else {
            bail!("{name} is neither a structure nor a graph file")
        };
    }
    if let Some(spec) = builtin(name, &params.fixture_params())? {
        return Ok(Input::Spec(spec));
    }
    if let Some(g) = builtin_graph(name)? {
        return Ok(Input::Graph(g));
    }
    bail!("no such file or fixture: {name}")
}

fn load_input(args: &InputArgs) -> Result<Input> {
    match (&args.fixture, &args.input) {
        (Some(name), None) | (None, Some(name)) => load(name, &args.params),
        (Some(_), Some(_)) => bail!("give either an input or --fixture, not both"),
        (None, None) => bail!("missing input"),
    }
}

fn load_spec(args: &InputArgs) -> Result<ArsSpec> {
    match load_input(args)? {
        Input::Spec(s) => Ok(s),
        Input::Graph(_) => bail!("expected a structure, got a graph"),
    }
}

fn parse_point(text: &str) -> Result<Vec2> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        bail!("expected `x,y`, got `{text}`");
    }
    let x: f64 = parts[0]
        .trim()
        .parse()
        .with_context(|| format!("bad coordinate in `{text}`"))?;
    let y: f64 = parts[1]
        .trim()
        .parse()
        .with_context(|| format!("bad coordinate in `{text}`"))?;
    Ok(Vec2::new(x, y))
}

/// Locus failures that break (H0) map to the (H0) exit code.
fn report_error(e: ReportError) -> anyhow::Error {
    let h0 = match &e {
        ReportError::Locus(l) | ReportError::Graph(GraphError::Locus(l)) => matches!(
            l,
            LocusError::NotRegular(_)
                | LocusError::TangencyNotTransversal(_)
                | LocusError::SaddleAmbiguity(_)
                | LocusError::LiftUnstable { .. }
                | LocusError::Residual { .. }
        ),
        ReportError::Graph(GraphError::AdjacencyAmbiguous { .. }) => true,
        _ => false,
    };
    if h0 {
        exit(EXIT_H0, format!("(H0) violated: {e}"))
    } else {
        anyhow!(e)
    }
}

fn graph_of(input: Input, resolution: usize) -> Result<LabelledGraph> {
    match input {
        Input::Graph(g) => Ok(g),
        Input::Spec(spec) => {
            if !spec.chart.is_torus() {
                return Err(GraphError::NotCompact.into());
            }
            let report = analyze(&spec, resolution).map_err(report_error)?;
            Ok(report.graph.expect("torus charts have a graph"))
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze {
            input,
            resolution,
            out,
        } => {
            let spec = load_spec(&input)?;
            let report = analyze(&spec, resolution).map_err(report_error)?;
            emit(&(report.to_json() + "\n"), out.as_deref())?;
            if report.h0.passed {
                Ok(0)
            } else {
                eprintln!(
                    "(H0) failed: {} offending item(s)",
                    report.h0.failures.len()
                );
                Ok(EXIT_H0)
            }
        }
        Command::Compare {
            a,
            b,
            resolution,
            params,
        } => {
            let ga = graph_of(load(&a, &params)?, resolution)?;
            let gb = graph_of(load(&b, &params)?, resolution)?;
            match equivalent(&ga, &gb) {
                Some(w) => {
                    println!("EQUIVALENT flipped={}", w.flipped);
                    println!("{}", serde_json::to_string_pretty(&w)?);
                    Ok(0)
                }
                None => {
                    println!("NOT-EQUIVALENT");
                    Ok(1)
                }
            }
        }
        Command::Distance {
            input,
            from,
            to,
            method,
            resolution,
            covector,
            time,
            steps,
        } => {
            let spec = load_spec(&input)?;
            let p = parse_point(&from)?;
            match method {
                Method::Grid => {
                    let q = parse_point(to.as_deref().ok_or_else(|| anyhow!("--to is required"))?)?;
                    match distance::cc_distance_grid(&spec, p, q, resolution) {
                        Ok(d) => {
                            println!("{d}");
                            Ok(0)
                        }
                        Err(e @ DistanceError::Unreachable { .. }) => {
                            Err(exit(EXIT_UNREACHABLE, e.to_string()))
                        }
                        Err(e) => Err(e.into()),
                    }
                }
                Method::Shoot => {
                    let p0 = parse_point(
                        covector
                            .as_deref()
                            .ok_or_else(|| anyhow!("--covector is required"))?,
                    )?;
                    let curve = distance::geodesic_shoot(&spec, p, p0, time, steps)?;
                    let length = distance::curve_length(&spec, &curve)?;
                    let end = curve.end();
                    println!("endpoint {},{}", end[0], end[1]);
                    println!("length {length}");
                    println!("time {}", curve.duration());
                    Ok(0)
                }
            }
        }
        Command::Graph {
            input,
            format,
            resolution,
            out,
        } => {
            let g = graph_of(load_input(&input)?, resolution)?;
            let text = match format {
                Format::Json => g.to_json() + "\n",
                Format::Dot => g.to_dot(),
            };
            emit(&text, out.as_deref())?;
            Ok(0)
        }
        Command::Classify { input, point } => {
            let spec = load_spec(&input)?;
            let class = spec.classify_point(parse_point(&point)?)?;
            println!("{class:?}");
            Ok(0)
        }
        Command::Ballbox {
            input,
            point,
            direction,
            h_min,
            h_max,
            resolution,
        } => {
            let spec = load_spec(&input)?;
            let fit = distance::ballbox_exponent(
                &spec,
                parse_point(&point)?,
                parse_point(&direction)?,
                h_min,
                h_max,
                resolution,
            )?;
            println!("exponent {}", fit.exponent);
            for (h, d) in fit.samples {
                println!("{h} {d}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Exit>().map_or(EXIT_INVALID, |x| x.code);
            ExitCode::from(code)
        }
    }
}
