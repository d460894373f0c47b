use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use milp::SolveParams;
use robtt::eval::{
    compare_algorithms, evaluate, generate_instance, Algorithm, CompareConfig, EvalConfig, GeneratorParams, Instance,
    InstanceKind,
};
use robtt::io::{self, seed_offset, Config};
use robtt::pesp::{apply_passenger_cutoff, match_heuristic, solve_pesp};
use robtt::robust::{cutting_plane, iterative_heuristic, CuttingPlaneConfig, HeuristicConfig, RobustRunState};
use robtt::{rollout, PeriodicEan, Scenario, Timetable};

/// Delay-robust periodic timetabling.
#[derive(Parser)]
#[command(name = "robtt", version)]
struct Cli {
    /// Instance directory holding events.csv, activities.csv and config.csv.
    #[arg(short, long, global = true, default_value = ".")]
    instance: PathBuf,

    /// Maximum number of concurrent solves.
    #[arg(short, long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance into the instance directory.
    Generate {
        #[arg(long, default_value = "toy")]
        kind: InstanceKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Solve the nominal timetabling problem to (near) optimality.
    SolvePesp {
        #[command(flatten)]
        solve: SolveArgs,
        /// Timetable to warm-start from.
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Zero-buffer baseline timetable.
    SolveMatch {
        #[arg(short, long, default_value = "timetable.csv")]
        output: PathBuf,
    },
    /// Robustify with the cutting-plane method over the no-wait strategy.
    RobustifyFrpt {
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
        /// Time limit of every robustification and pessimization step, seconds.
        #[arg(long, default_value_t = 60.0)]
        step_time_limit: f64,
        #[command(flatten)]
        robust: RobustArgs,
    },
    /// Robustify with scenario sampling and optimal delay management.
    RobustifyRpts {
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
        /// Scenarios sampled per iteration.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Time limit of every master solve, seconds.
        #[arg(long, default_value_t = 60.0)]
        step_time_limit: f64,
        /// Time limit of every sampled delay management solve, seconds.
        #[arg(long, default_value_t = 10.0)]
        pdm_time_limit: f64,
        #[command(flatten)]
        robust: RobustArgs,
    },
    /// Expand a timetable into the aperiodic network over the horizon.
    Rollout {
        #[arg(short, long, default_value = "timetable.csv")]
        timetable: PathBuf,
        #[command(flatten)]
        horizon: HorizonArgs,
        /// Output directory; defaults to `<instance>/rollout`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a timetable on sampled delay scenarios.
    Evaluate {
        #[arg(short, long, default_value = "timetable.csv")]
        timetable: PathBuf,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, default_value_t = 10)]
        scenarios: usize,
        /// Label written to the report.
        #[arg(long, default_value = "timetable")]
        label: String,
        #[arg(short, long, default_value = "report.csv")]
        output: PathBuf,
    },
    /// Run and evaluate several algorithms and write the comparison tables.
    Compare {
        /// Comma-separated subset of match, frpt, rpts.
        #[arg(long, value_delimiter = ',', default_value = "match,frpt,rpts")]
        algorithms: Vec<Algorithm>,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, default_value_t = 10)]
        scenarios: usize,
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 60.0)]
        step_time_limit: f64,
        /// Output directory for tables, timetables and traces.
        #[arg(short, long, default_value = "compare")]
        output: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Solver time limit, seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    mip_gap: f64,
    #[arg(short, long, default_value = "timetable.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct RobustArgs {
    /// Starting timetable; the baseline is used when absent.
    #[arg(long)]
    start: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-7)]
    mip_gap: f64,
    #[arg(short, long, default_value = "timetable.csv")]
    output: PathBuf,
    #[arg(long, default_value = "trace.csv")]
    trace: PathBuf,
    /// Bound trace per passenger as whitespace-separated plot data.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct HorizonArgs {
    /// Horizon length in minutes from the configured start; config.csv when absent.
    #[arg(long)]
    horizon: Option<i64>,
}

impl HorizonArgs {
    fn resolve(&self, cfg: &Config) -> (i64, i64) {
        match self.horizon {
            Some(len) => (cfg.horizon_lo, cfg.horizon_lo + len),
            None => cfg.horizon(),
        }
    }
}

/// Exit codes: 0 success, 1 infeasibility, 2 I/O or configuration errors.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<robtt::Error>() {
        Some(e) if e.is_infeasibility() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info,highs=error")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Resolves `path` against the instance directory unless absolute.
fn within(dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        dir.join(path)
    }
}

fn load(dir: &Path) -> Result<(PeriodicEan, Config)> {
    Ok(io::read_instance(dir)?)
}

fn load_timetable(dir: &Path, path: &Path, ean: &PeriodicEan) -> Result<Timetable> {
    let tt = io::read_timetable(&within(dir, path), ean)?;
    tt.ensure_feasible(ean)?;
    Ok(tt)
}

fn write_robust_outputs(dir: &Path, args: &RobustArgs, ean: &PeriodicEan, tt: &Timetable, state: &RobustRunState) -> Result<()> {
    io::write_timetable(&within(dir, &args.output), ean, tt)?;
    io::write_trace(&within(dir, &args.trace), state)?;
    if let Some(p) = &args.plot_data {
        let p = within(dir, p);
        let file = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        state
            .write_plot_data(BufWriter::new(file), ean.passengers())
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

/// The instance restricted by the passenger cutoff, and its starting timetable.
fn robust_setup(dir: &Path, args: &RobustArgs) -> Result<(PeriodicEan, PeriodicEan, Config, Timetable)> {
    let (full, cfg) = load(dir)?;
    let ean = apply_passenger_cutoff(&full, cfg.passenger_cutoff);
    let start = match &args.start {
        Some(p) => load_timetable(dir, p, &full)?.on(&ean)?,
        None => match_heuristic(&ean, cfg.sub_seed(seed_offset::MATCH))?,
    };
    Ok((full, ean, cfg, start))
}

fn run(cli: &Cli) -> Result<()> {
    let dir = cli.instance.as_path();
    match &cli.command {
        Command::Generate { kind, seed } => {
            let inst = generate_instance(*kind, &GeneratorParams::for_kind(*kind), *seed);
            io::write_instance(dir, &inst.ean, &inst.config)?;
            println!(
                "{}: {} events, {} activities, {} passengers",
                inst.label,
                inst.ean.num_events(),
                inst.ean.num_activities(),
                inst.ean.passengers()
            );
        }
        Command::SolvePesp { solve, start } => {
            let (ean, _) = load(dir)?;
            let start = start.as_ref().map(|p| load_timetable(dir, p, &ean)).transpose()?;
            let params = SolveParams {
                time_limit: solve.time_limit,
                mip_gap: solve.mip_gap,
                ..SolveParams::default()
            };
            let (tt, out) = solve_pesp(&ean, params, start.as_ref())?;
            io::write_timetable(&within(dir, &solve.output), &ean, &tt)?;
            println!("{}: objective {} ({:.1}s)", out.status, out.objective(), out.seconds);
        }
        Command::SolveMatch { output } => {
            let (ean, cfg) = load(dir)?;
            let tt = match_heuristic(&ean, cfg.sub_seed(seed_offset::MATCH))?;
            io::write_timetable(&within(dir, output), &ean, &tt)?;
            println!("objective {}", tt.weighted_duration(&ean));
        }
        Command::RobustifyFrpt {
            eps,
            max_iter,
            step_time_limit,
            robust,
        } => {
            let (full, ean, cfg, start) = robust_setup(dir, robust)?;
            let c = CuttingPlaneConfig {
                epsilon: *eps,
                iter_cap: *max_iter,
                master_time_limit: Some(*step_time_limit),
                fwc_time_limit: Some(*step_time_limit),
                mip_gap: robust.mip_gap,
                start: Some(start),
            };
            let (tt, ub, state) = cutting_plane(&ean, &cfg.uncertainty(), &Scenario::zero(&ean), &c)?;
            write_robust_outputs(dir, robust, &full, &tt.on(&full)?, &state)?;
            println!("{}: ub {ub} after {} iterations", state.termination.map_or("running", |t| t.as_str()), state.iterations());
        }
        Command::RobustifyRpts {
            max_iter,
            samples,
            step_time_limit,
            pdm_time_limit,
            robust,
        } => {
            let (full, ean, cfg, start) = robust_setup(dir, robust)?;
            let c = HeuristicConfig {
                iterations: *max_iter,
                samples: *samples,
                master_time_limit: Some(*step_time_limit),
                pdm_time_limit: Some(*pdm_time_limit),
                mip_gap: robust.mip_gap,
                seed: cfg.sub_seed(seed_offset::HEURISTIC),
                jobs: cli.jobs,
                start: Some(start),
            };
            let (tt, lb, state) = iterative_heuristic(&ean, &cfg.uncertainty(), &Scenario::zero(&ean), &c)?;
            write_robust_outputs(dir, robust, &full, &tt.on(&full)?, &state)?;
            println!("{}: lb {lb} after {} iterations", state.termination.map_or("running", |t| t.as_str()), state.iterations());
        }
        Command::Rollout {
            timetable,
            horizon,
            output,
        } => {
            let (ean, cfg) = load(dir)?;
            let tt = load_timetable(dir, timetable, &ean)?;
            let aper = rollout(&ean, &tt, horizon.resolve(&cfg));
            let out = output.as_ref().map_or_else(|| dir.join("rollout"), |p| within(dir, p));
            io::write_aperiodic(&out, &ean, &aper)?;
            println!("{} events, {} activities", aper.events.len(), aper.activities.len());
        }
        Command::Evaluate {
            timetable,
            horizon,
            scenarios,
            label,
            output,
        } => {
            let (ean, cfg) = load(dir)?;
            let tt = load_timetable(dir, timetable, &ean)?;
            let ec = EvalConfig {
                horizon: horizon.resolve(&cfg),
                scenarios: *scenarios,
                seed: cfg.sub_seed(seed_offset::EVALUATION),
                jobs: cli.jobs,
                ..EvalConfig::default()
            };
            let instance = dir.display().to_string();
            let r = evaluate(&ean, &tt, &cfg.uncertainty(), &ec, label, &instance)?;
            io::write_report(&within(dir, output), &r)?;
            println!(
                "nominal {:.2}, delayed min {:.2} max {:.2} avg {:.2}, passenger delay {:.2}",
                r.nominal,
                r.min_delayed(),
                r.max_delayed(),
                r.avg_delayed(),
                r.avg_passenger_delay()
            );
        }
        Command::Compare {
            algorithms,
            horizon,
            scenarios,
            max_iter,
            samples,
            step_time_limit,
            output,
        } => {
            let (ean, config) = load(dir)?;
            let mut c = CompareConfig::from_config(&config);
            c.eval.horizon = horizon.resolve(&config);
            c.eval.scenarios = *scenarios;
            c.eval.jobs = cli.jobs;
            c.cutting_plane.iter_cap = *max_iter;
            c.cutting_plane.master_time_limit = Some(*step_time_limit);
            c.cutting_plane.fwc_time_limit = Some(*step_time_limit);
            c.heuristic.iterations = *max_iter;
            c.heuristic.samples = *samples;
            c.heuristic.master_time_limit = Some(*step_time_limit);
            c.heuristic.jobs = cli.jobs;
            let label = dir
                .canonicalize()
                .ok()
                .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .unwrap_or_else(|| "instance".into());
            let inst = Instance {
                label,
                kind: None,
                ean,
                config,
            };
            let cmp = compare_algorithms(&inst, algorithms, &c)?;
            let out = within(dir, output);
            cmp.write(&out)?;
            for run in &cmp.runs {
                let name = run.algorithm.as_str();
                io::write_timetable(&out.join(format!("timetable_{name}.csv")), &inst.ean, &run.timetable)?;
                if let Some(state) = &run.state {
                    let p = out.join(format!("bounds_{name}.dat"));
                    let file = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    state
                        .write_plot_data(BufWriter::new(file), inst.ean.passengers())
                        .with_context(|| format!("writing {}", p.display()))?;
                    io::write_trace(&out.join(format!("trace_{name}.csv")), state)?;
                }
            }
            print!("{}", cmp.text());
        }
    }
    Ok(())
}
