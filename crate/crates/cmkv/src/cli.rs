//! Command-line entry point.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use cmkv_core::divergences::{gaussian_kl, inequality_suite_with, mollification_entropy, Density1d, Quantity};
use cmkv_core::kernels::check_assumption_k;
use cmkv_core::models::{check_assumption_r_law, preset_with, probe_bounds, GaussianLaw, PresetOptions, DEFAULT_SATURATION};
use cmkv_core::schedule::{optimize_rate, rate_bound, schedule, theorem_rate, RateGrid};
use cmkv_core::{KernelId, KernelSpec, Strategy};

use crate::config::{load_config, Loaded, Overrides, DEFAULT_C, DEFAULT_R};
use crate::error::{CliError, Result};
use crate::exec::{default_workers, Pool, WORKERS_ENV};
use crate::output::{read_results, OutputDir};
use crate::plot::{render, Chart, Series};
use crate::report::{report_convergence, summary_csv, TV_METRIC};
use crate::run::simulate;
use crate::sweep::sweep;

#[derive(Debug, Parser)]
#[command(name = "cmkv", version, about = "Particle simulation of conditional McKean-Vlasov equations")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Naive,
    Celllist,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Naive => Strategy::Naive,
            StrategyArg::Celllist => Strategy::CellList,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Inequalities,
    Mollification,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML configuration; a `[sweep]` table makes it a plan.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
    /// Take h and epsilon from the schedule, ignoring configured values.
    #[arg(long)]
    pub auto_schedule: bool,
    /// Override the drift strategy.
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and write snapshots, diagnostics and results.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Also export every snapshot as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Run every cell of a plan file and write a tidy results table.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check kernel requirements, initial-law regularity and coefficient bounds.
    CheckAssumptions {
        /// Preset model name.
        #[arg(long, default_value = "decoupled-oracle")]
        model: String,
        /// gaussian, epanechnikov or uniform-ball.
        #[arg(long, default_value = "gaussian")]
        kernel: String,
        /// Bandwidth (variance scale) for the R.1 check.
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        /// Saturation level of clamped presets.
        #[arg(long, default_value_t = DEFAULT_SATURATION)]
        saturation: f64,
        /// Write a CSV here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overwrite an existing output file.
        #[arg(long)]
        force: bool,
    },
    /// Information-inequality suite or mollification-entropy table.
    Divergence {
        #[arg(long, value_enum, default_value = "inequalities")]
        suite: Suite,
        /// Random trials of the inequality suite.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Seed of the trial generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write a CSV here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overwrite an existing output file.
        #[arg(long)]
        force: bool,
    },
    /// Tabulate the rate bound at the schedule point, optionally optimised.
    Rate {
        /// Particle counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e3, 1e6, 1e9])]
        n: Vec<f64>,
        /// Block dimension.
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Block count; the bound scales with its square root.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_R)]
        r: f64,
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
        /// Also search a log grid for the smallest bound.
        #[arg(long)]
        optimize: bool,
        /// Grid points per axis for --optimize.
        #[arg(long, default_value_t = 60)]
        grid_points: usize,
    },
    /// Summarise a results table by n.
    Report {
        /// A results.csv written by simulate or sweep.
        #[arg(long)]
        results: PathBuf,
        /// Metric to summarise.
        #[arg(long, default_value = TV_METRIC)]
        metric: String,
        #[arg(long, default_value_t = DEFAULT_R)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
    },
}

/// Parses `args`, runs the command and returns the process exit code. Errors
/// are printed to stderr as one JSON line.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::Usage(e.to_string().lines().next().unwrap_or("invalid arguments").to_string());
            eprintln!("{}", err.json_line());
            return err.exit_code();
        }
    };
    match execute(cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.json_line());
            e.exit_code()
        }
    }
}

fn pool(workers: Option<usize>) -> Result<Pool> {
    Pool::new(workers.unwrap_or_else(default_workers)).map_err(|e| CliError::Failed(e.to_string()))
}

fn io<W: Write>(out: &mut W, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

pub fn execute<W: Write>(cli: Cli, stdout: &mut W) -> Result<()> {
    match cli.command {
        Command::Simulate { run, csv } => {
            let overrides = overrides(&run);
            let Loaded::Run(config) = load_config(&run.config, &overrides)? else {
                return Err(CliError::Usage("this file has a [sweep] table; use `cmkv sweep`".into()));
            };
            let out = OutputDir::create(&run.out, run.force)?;
            let outcome = simulate(&config, &out, &pool(cli.workers)?, csv)?;
            io(
                stdout,
                &format!(
                    "simulated {} particles to t = {} (h = {}, epsilon = {}); digest {}\n",
                    config.sim.n,
                    outcome.trajectory.final_state.t(),
                    config.sim.h,
                    config.sim.epsilon,
                    outcome.config_digest
                ),
            )
        }
        Command::Sweep { run } => {
            let overrides = overrides(&run);
            let Loaded::Plan(plan) = load_config(&run.config, &overrides)? else {
                return Err(CliError::Usage("this file has no [sweep] table; use `cmkv simulate`".into()));
            };
            let out = OutputDir::create(&run.out, run.force)?;
            let outcome = sweep(&plan, &out, &pool(cli.workers)?)?;
            let failed = outcome.rows.iter().filter(|r| r.status != "ok").count();
            io(stdout, &format!("{} cells, {} failed\n", plan.cells.len(), failed))?;
            if let Some(s) = &outcome.summary {
                io(stdout, "n,seeds,mean,std_error\n")?;
                for p in &s.points {
                    io(stdout, &format!("{},{},{},{}\n", p.n, p.seeds, p.mean, p.std_error))?;
                }
                io(stdout, &format!("verdict: {} (drop {:.2} standard errors)\n", s.verdict(), s.drop_in_se))?;
            } else if let Some(note) = &outcome.summary_note {
                io(stdout, &format!("no summary: {note}\n"))?;
            }
            Ok(())
        }
        Command::CheckAssumptions { model, kernel, h, saturation, out, force } => {
            let text = check_assumptions(&model, &kernel, h, saturation)?;
            if let Some(dir) = out {
                OutputDir::create(dir, force)?.write("assumptions.csv", text.as_bytes())?;
            }
            io(stdout, &text)
        }
        Command::Divergence { suite, trials, seed, out, force } => {
            let (name, text, svg) = match suite {
                Suite::Inequalities => {
                    let report = inequality_suite_with(trials, seed, &pool(cli.workers)?)?;
                    let mut text = String::from("quantity,checks,violations\n");
                    for q in Quantity::ALL {
                        let rows: Vec<_> = report.rows.iter().filter(|r| r.quantity == q).collect();
                        let bad = rows.iter().filter(|r| !r.pass).count();
                        text.push_str(&format!("{},{},{}\n", q.as_str(), rows.len(), bad));
                    }
                    if let Some(dir) = &out {
                        OutputDir::create(dir, force)?.write("inequalities.csv", text.as_bytes())?;
                    }
                    io(stdout, &text)?;
                    let violations = report.violation_count();
                    if violations > 0 {
                        return Err(CliError::Failed(format!("{violations} inequality violations")));
                    }
                    return Ok(());
                }
                Suite::Mollification => {
                    let (text, svg) = mollification_table()?;
                    ("mollification.csv", text, svg)
                }
            };
            if let Some(dir) = &out {
                let dir = OutputDir::create(dir, force)?;
                dir.write(name, text.as_bytes())?;
                if let Some(svg) = svg {
                    if let Err(e) = dir.write("mollification.svg", svg.as_bytes()) {
                        eprintln!("warning: plot not written: {e}");
                    }
                }
            }
            io(stdout, &text)
        }
        Command::Rate { n, d, k, r, c, optimize, grid_points } => io(stdout, &rate_table(&n, d, k, r, c, optimize, grid_points)?),
        Command::Report { results, metric, r, d, c } => {
            let rows = read_results(&results)?;
            let summary = report_convergence(&rows, &metric, r, d)?;
            let bytes = summary_csv(&summary, c)?;
            io(stdout, &String::from_utf8_lossy(&bytes))
        }
    }
}

fn overrides(run: &RunArgs) -> Overrides {
    Overrides { seed: run.seed, strategy: run.strategy.map(Into::into), auto_schedule: run.auto_schedule }
}

fn check_assumptions(model: &str, kernel: &str, h: f64, saturation: f64) -> Result<String> {
    let spec = preset_with(model, &PresetOptions { saturation })?;
    let id: KernelId = kernel.parse()?;
    let kernel = KernelSpec::new(id, spec.d())?;
    let mut text = String::from("section,item,value,pass\n");
    let k = check_assumption_k(&kernel)?;
    for (item, c) in [("mass", k.mass), ("mean", k.mean_check), ("exp_moment", k.exp_moment), ("symmetric", k.symmetric), ("sup", k.sup)] {
        text.push_str(&format!("kernel,{item},{},{}\n", c.value, c.pass));
    }
    let r = check_assumption_r_law(spec.mu0(), spec.m(), spec.d(), h, &kernel)?;
    for e in &r.r1 {
        text.push_str(&format!("initial_law,r1[{}],{},{}\n", e.block, e.value, e.finite));
    }
    let optional = [
        ("log_density_moment", r.log_density_moment),
        ("score_fourth_moment", r.score_fourth_moment),
        ("laplacian_ratio_moment", r.laplacian_ratio_moment),
    ];
    for (item, v) in optional {
        match v {
            Some(v) => text.push_str(&format!("initial_law,{item},{v},{}\n", v.is_finite())),
            None => text.push_str(&format!("initial_law,{item},,skipped\n")),
        }
    }
    text.push_str(&format!("initial_law,moments_finite,,{}\n", r.moments_finite));
    text.push_str(&format!("initial_law,sup_density,{},{}\n", r.sup_density, r.bounded));
    text.push_str(&format!("initial_law,positive,,{}\n", r.positive));
    let bounds = probe_bounds(&spec, 100_000, 0);
    let declared = spec.bounds();
    text.push_str(&format!("coefficients,max_b,{},{}\n", bounds.max_b, bounds.max_b <= declared.b));
    text.push_str(&format!("coefficients,max_v,{},{}\n", bounds.max_v, bounds.max_v <= declared.v));
    Ok(text)
}

pub const MOLLIFICATION_H: [f64; 7] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0];

fn mollification_table() -> Result<(String, Option<String>)> {
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let standard = GaussianLaw::standard(1);
    let mut text = String::from("kernel,h,value,gaussian_closed_form,ratio_to_h2_over_4\n");
    let mut series = Vec::new();
    for id in KernelId::ALL {
        let kernel = KernelSpec::new(id, 1)?;
        let mut points = Vec::new();
        for h in MOLLIFICATION_H {
            let v = mollification_entropy(Density1d::new(&pdf), &kernel, h)?;
            let closed = if id == KernelId::Gaussian {
                gaussian_kl(&standard, &GaussianLaw::diagonal(vec![0.0], &[1.0 + h])?)?.to_string()
            } else {
                String::new()
            };
            text.push_str(&format!("{id},{h},{v},{closed},{}\n", v / (h * h / 4.0)));
            points.push((h, v));
        }
        series.push(Series { label: id.as_str(), points, errors: vec![], dashed: false });
    }
    let svg = render(&Chart {
        title: "Mollification entropy of N(0,1)",
        x_label: "h",
        y_label: "entropy",
        log_x: true,
        log_y: true,
        series,
    });
    Ok((text, svg))
}

fn rate_table(ns: &[f64], d: usize, k: usize, r: f64, c: f64, optimize: bool, points: usize) -> Result<String> {
    let mut text = String::from("n,d,k,r,C,h,epsilon,bound,theorem_rate");
    if optimize {
        text.push_str(",opt_h,opt_epsilon,opt_bound,on_boundary");
    }
    text.push('\n');
    for &n in ns {
        let p = schedule(n, d, r, c)?;
        let bound = rate_bound(p.h, p.epsilon, n, d, k, r, c)?;
        text.push_str(&format!("{n},{d},{k},{r},{c},{},{},{bound},{}", p.h, p.epsilon, theorem_rate(n, d, k, r, c)));
        if optimize {
            let grid = RateGrid { h: (1e-3, 1.0), epsilon: (1e-6, 1.0), points: (points, points) };
            let best = optimize_rate(n, d, k, r, c, &grid)?;
            text.push_str(&format!(",{},{},{},{}", best.h, best.epsilon, best.value, best.on_boundary));
        }
        text.push('\n');
    }
    Ok(text)
}
