use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use critvar::harness::{parse_scenario, run, Analysis, RunOptions, RunReport, Scenario};
use critvar::harness::scenario::WeightSpec;
use critvar::{Error, Result};

#[derive(Parser)]
#[command(name = "critvar", version, about = "Radial laboratory for weighted critical-exponent systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the sweep.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Bubble constants, thresholds and their verification residuals.
    Constants {
        #[command(flatten)]
        common: Common,
        /// Dimension, used when no config is given.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// First Dirichlet eigenpairs of both weighted operators.
    Eig {
        #[command(flatten)]
        common: Common,
        /// Weight as `key = value` pairs, e.g. "gamma0 = 1, coefficient = 1, exponent = 2".
        #[arg(long)]
        weight: Option<String>,
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 2000)]
        cells: usize,
    },
    /// Constrained minimization over the coupling sweep.
    Minimize {
        #[command(flatten)]
        common: Common,
    },
    /// Bubble energy curves and leading-coefficient fits.
    Asymptotics {
        #[command(flatten)]
        common: Common,
    },
    /// Integral identity on converged minimizers.
    Pohozaev {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate of the quotient infimum against its printed bounds.
    Omega {
        #[command(flatten)]
        common: Common,
    },
    /// Every analysis.
    All {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(report) => {
            if report.invariant_failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &report.invariant_failures {
                    eprintln!("invariant failed: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<RunReport> {
    let (common, scenario) = match cli.command {
        Command::Constants { common, dim } => {
            let s = match (&common.config, dim) {
                (Some(_), _) => load(&common, Analysis::Constants)?,
                (None, Some(dim)) => parse_scenario(&synthetic(dim, 1.0, 2000, "gamma0 = 1.0", &["constants"]))?,
                (None, None) => return Err(Error::ConfigError("constants needs --config or --dim".into())),
            };
            (common, s)
        }
        Command::Eig {
            common,
            weight,
            dim,
            radius,
            cells,
        } => {
            let s = match (&common.config, weight) {
                (Some(_), _) => load(&common, Analysis::Eig)?,
                (None, Some(w)) => {
                    check_weight(&w)?;
                    parse_scenario(&synthetic(dim, radius, cells, &w.replace(',', "\n"), &["eig"]))?
                }
                (None, None) => return Err(Error::ConfigError("eig needs --config or --weight".into())),
            };
            (common, s)
        }
        Command::Minimize { common } => {
            let s = load(&common, Analysis::Minimize)?;
            (common, s)
        }
        Command::Asymptotics { common } => {
            let s = load(&common, Analysis::Asymptotics)?;
            (common, s)
        }
        Command::Pohozaev { common } => {
            let s = load(&common, Analysis::Pohozaev)?;
            (common, s)
        }
        Command::Omega { common } => {
            let s = load(&common, Analysis::Omega)?;
            (common, s)
        }
        Command::All { common } => {
            let s = load_scenario(&common)?;
            (common, s)
        }
    };
    let report = run(
        &scenario,
        &RunOptions {
            jobs: common.jobs,
            plots: common.plots || scenario.output.plots,
        },
    )?;
    let dir = common.out.clone().unwrap_or_else(|| scenario.output.dir.clone());
    let written = report.write(&dir, common.plots || scenario.output.plots)?;
    print_summary(&report);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(report)
}

fn load_scenario(common: &Common) -> Result<Scenario> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::ConfigError("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

/// The scenario restricted to one analysis (its prerequisites are added by the plan).
fn load(common: &Common, analysis: Analysis) -> Result<Scenario> {
    let mut s = load_scenario(common)?;
    s.analyses = vec![analysis];
    Ok(s)
}

fn check_weight(text: &str) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct Wrapper {
        #[allow(dead_code)]
        w: WeightSpec,
    }
    toml::from_str::<Wrapper>(&format!("w = {{ {text} }}"))
        .map(|_| ())
        .map_err(|e| Error::ConfigError(format!("--weight: {}", e.message())))
}

fn synthetic(dim: usize, radius: f64, cells: usize, weight: &str, analyses: &[&str]) -> String {
    let list: Vec<String> = analyses.iter().map(|a| format!("\"{a}\"")).collect();
    format!(
        "schema = 1\nanalyses = [{}]\n[domain]\ndim = {dim}\nradius = {radius:?}\ncells = {cells}\nmode = \"machinery\"\n[weights.a]\n{weight}\n[weights.b]\n{weight}\n",
        list.join(", ")
    )
}

fn print_summary(report: &RunReport) {
    if !report.constants.is_empty() {
        println!("{:<18} {:>24} {:>24} {:>12}", "name", "value", "reference", "rel_residual");
        for r in &report.constants {
            println!(
                "{:<18} {:>24.16e} {:>24} {:>12}",
                r.name,
                r.value,
                r.reference.map_or("-".into(), |x| format!("{x:.16e}")),
                r.rel_residual.map_or("-".into(), |x| format!("{x:.2e}"))
            );
        }
    }
    if let Some(e) = &report.eig {
        println!("lambda1(a) = {:.12}", e.a.lambda1);
        println!("lambda1(b) = {:.12}", e.b.lambda1);
    }
    for r in &report.rows {
        println!(
            "lambda = {:<8} q_hat = {:<22} status = {:<13} verdict = {} ({})",
            r.lambda,
            r.q_hat.map_or("-".into(), |q| format!("{q:.12}")),
            r.status.map_or("failed", |s| s.as_str()),
            r.verdict.verdict.as_str(),
            r.verdict.case_id.as_str()
        );
    }
    for f in &report.fits {
        println!(
            "lambda = {:<8} fitted = {:<22} predicted = {}",
            f.lambda,
            f.fitted.map_or("-".into(), |x| format!("{x:.8}")),
            f.predicted.map_or("-".into(), |x| format!("{x:.8}"))
        );
    }
    if let Some(o) = &report.omega {
        println!("omega = {}", o.value.as_f64());
    }
    for p in &report.pohozaev {
        println!("lambda = {:<8} pohozaev relative residual = {:.3e}", p.lambda, p.report.relative_residual);
    }
}
