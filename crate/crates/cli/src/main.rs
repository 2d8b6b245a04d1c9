use anyhow::Context;
use clap::{Parser, Subcommand};
use rhg_core::cayley::{BallConfig, CayleyBall};
use rhg_core::floyd::{parse_rational, DistortionFunction, Karlsson, ScalingFunction};
use rhg_core::groups::{GroupSpec, PeripheralSpec};
use rhg_core::relative::{build_horospheres, build_relative_graph};
use rhg_core::runner::{csv_rational, exit_code, run, write_outputs};
use rhg_core::scenario::{builtin, builtin_scenarios, Scenario};
use rhg_core::Error;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rhg", version, about = "Finite-scale experiments on relatively hyperbolic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in scenario by name.
    Run {
        scenario: String,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Print the built-in scenario as JSON.
    ShowScenario { name: String },
    /// Print Karlsson constants K(eps) as CSV.
    KarlssonTable {
        #[arg(long, default_value = "exp(1/2)")]
        scaling: String,
        #[arg(long, default_value = "id")]
        alpha: String,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        eps: Vec<String>,
    },
    /// Dump a Cayley ball as CSV (vertices by default).
    DumpBall {
        #[arg(long)]
        group: String,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 0)]
        margin: u32,
        #[arg(long)]
        edges: bool,
    },
    /// Dump the relative Cayley graph of a ball as edge-list CSV.
    DumpRelgraph {
        #[arg(long)]
        group: String,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 0)]
        margin: u32,
        #[arg(long, value_delimiter = ',')]
        peripheral: Vec<String>,
        #[arg(long, default_value_t = 0)]
        thickening: u32,
    },
}

fn load(arg: &str) -> rhg_core::Result<Scenario> {
    if let Some(s) = builtin(arg) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| Error::Config(format!("'{arg}' is neither a built-in scenario nor a readable file: {e}")))?;
    Scenario::from_json(&text)
}

fn run_command(scenario: &str, workers: usize, out: &PathBuf) -> rhg_core::Result<i32> {
    let sc = load(scenario)?;
    let outcome = run(&sc, workers)?;
    write_outputs(&outcome, out)?;
    let summary = &outcome.report.summary;
    for (notion, verdict) in &summary.verdicts {
        println!("{notion}: {verdict}");
    }
    for v in &summary.violations {
        println!("violation [{}]: {}", v.check, v.detail);
    }
    println!(
        "expectation {}: {}",
        format!("{:?}", summary.expectation).to_lowercase(),
        if summary.expectation_met { "met" } else { "not met" }
    );
    Ok(outcome.exit_code())
}

fn karlsson_table(scaling: &str, alpha: &str, eps: &[String]) -> rhg_core::Result<String> {
    let f = ScalingFunction::parse(scaling)?;
    let a = DistortionFunction::parse(alpha)?;
    let k = Karlsson::new(&f, &a)?;
    let mut s = String::from("eps,k\n");
    for e in eps {
        let e = parse_rational(e)?;
        s.push_str(&format!("{},{}\n", csv_rational(&e), k.eval(&e)?));
    }
    Ok(s)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result: anyhow::Result<i32> = (|| {
        let mut stdout = io::stdout().lock();
        match cli.command {
            Command::Run { scenario, workers, out } => Ok(run_command(&scenario, workers, &out)?),
            Command::ListScenarios => {
                for s in builtin_scenarios() {
                    writeln!(stdout, "{}\t{}", s.name, s.description)?;
                }
                Ok(0)
            }
            Command::ShowScenario { name } => {
                let s = builtin(&name).ok_or_else(|| Error::Config(format!("no built-in scenario '{name}'")))?;
                writeln!(stdout, "{}", s.to_json())?;
                Ok(0)
            }
            Command::KarlssonTable { scaling, alpha, eps } => {
                stdout.write_all(karlsson_table(&scaling, &alpha, &eps)?.as_bytes())?;
                Ok(0)
            }
            Command::DumpBall {
                group,
                radius,
                margin,
                edges,
            } => {
                let spec = GroupSpec::parse(&group)?;
                let ball = CayleyBall::build(&spec, &BallConfig::new(radius).margin(margin))?;
                if edges {
                    ball.write_edges_csv(&mut stdout)?;
                } else {
                    ball.write_vertices_csv(&mut stdout)?;
                }
                Ok(0)
            }
            Command::DumpRelgraph {
                group,
                radius,
                margin,
                peripheral,
                thickening,
            } => {
                let spec = GroupSpec::parse(&group)?;
                let ball = CayleyBall::build(&spec, &BallConfig::new(radius).margin(margin))?;
                let periph = if peripheral.is_empty() {
                    PeripheralSpec::empty()
                } else {
                    PeripheralSpec::new(&spec, &peripheral)?
                };
                let system = build_horospheres(&ball, &periph, thickening)?;
                let g = build_relative_graph(&ball, system);
                g.write_edges_csv(&mut stdout).context("writing relative graph")?;
                Ok(0)
            }
        }
    })();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(1, exit_code);
            ExitCode::from(code as u8)
        }
    }
}
