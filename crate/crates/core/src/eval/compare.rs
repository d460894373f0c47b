use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::eval::evaluate::{evaluate, EvalConfig, EvalReport};
use crate::eval::generate::Instance;
use crate::io::{seed_offset, Config};
use crate::pesp::{apply_passenger_cutoff, match_heuristic};
use crate::robust::{cutting_plane, iterative_heuristic, CuttingPlaneConfig, HeuristicConfig, RobustRunState};
use crate::scenario::Scenario;
use crate::timetable::Timetable;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Zero-buffer baseline.
    Match,
    /// Cutting planes over the no-wait strategy.
    Frpt,
    /// Sampled scenarios with optimal delay management.
    Rpts,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Match, Algorithm::Frpt, Algorithm::Rpts];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Match => "match",
            Algorithm::Frpt => "frpt",
            Algorithm::Rpts => "rpts",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Match => "MATCH",
            Algorithm::Frpt => "F-RPT",
            Algorithm::Rpts => "RPT(S')",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "match" => Ok(Algorithm::Match),
            "frpt" => Ok(Algorithm::Frpt),
            "rpts" => Ok(Algorithm::Rpts),
            other => Err(format!("unknown algorithm '{other}' (match, frpt, rpts)")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CompareConfig {
    pub eval: EvalConfig,
    pub cutting_plane: CuttingPlaneConfig,
    pub heuristic: HeuristicConfig,
    /// Seed of the baseline's line-order tie breaking.
    pub match_seed: u64,
}

impl CompareConfig {
    /// Defaults with every seed and the horizon taken from `config`.
    pub fn from_config(config: &Config) -> Self {
        CompareConfig {
            eval: EvalConfig {
                horizon: config.horizon(),
                seed: config.sub_seed(seed_offset::EVALUATION),
                ..EvalConfig::default()
            },
            heuristic: HeuristicConfig {
                seed: config.sub_seed(seed_offset::HEURISTIC),
                ..HeuristicConfig::default()
            },
            match_seed: config.sub_seed(seed_offset::MATCH),
            ..CompareConfig::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub timetable: Timetable,
    /// Upper bound (F-RPT) or lower bound (RPT(S')) reported by the method.
    pub bound: Option<f64>,
    pub state: Option<RobustRunState>,
    pub seconds: f64,
    pub report: EvalReport,
}

/// Computes the timetable of one algorithm. The robust methods see the
/// instance with the passenger cutoff applied and start from the baseline.
pub fn timetable_for(
    algorithm: Algorithm,
    instance: &Instance,
    cfg: &CompareConfig,
    baseline: Option<&Timetable>,
) -> Result<(Timetable, Option<f64>, Option<RobustRunState>), Error> {
    let full = &instance.ean;
    if algorithm == Algorithm::Match {
        return Ok((match_heuristic(full, cfg.match_seed)?, None, None));
    }
    let ean = apply_passenger_cutoff(full, instance.config.passenger_cutoff);
    let start = match baseline {
        Some(tt) => tt.on(&ean)?,
        None => match_heuristic(&ean, cfg.match_seed)?,
    };
    let unc = instance.config.uncertainty();
    let zero = Scenario::zero(&ean);
    let (tt, bound, state) = if algorithm == Algorithm::Frpt {
        let c = CuttingPlaneConfig {
            start: Some(start),
            ..cfg.cutting_plane.clone()
        };
        cutting_plane(&ean, &unc, &zero, &c)?
    } else {
        let c = HeuristicConfig {
            start: Some(start),
            ..cfg.heuristic.clone()
        };
        iterative_heuristic(&ean, &unc, &zero, &c)?
    };
    Ok((tt.on(full)?, Some(bound), Some(state)))
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub instance: String,
    pub runs: Vec<AlgorithmRun>,
}

/// Runs every algorithm on the instance and evaluates its timetable on the
/// full network with the same scenario seeds.
pub fn compare_algorithms(instance: &Instance, algorithms: &[Algorithm], cfg: &CompareConfig) -> Result<Comparison, Error> {
    let attribute = |a: Algorithm| move |e: Error| Error::Algorithm {
        algorithm: a.label().to_string(),
        source: Box::new(e),
    };
    let unc = instance.config.uncertainty();
    let mut baseline: Option<Timetable> = None;
    let mut runs = Vec::with_capacity(algorithms.len());
    for &alg in algorithms {
        let clock = Instant::now();
        let (tt, bound, state) = timetable_for(alg, instance, cfg, baseline.as_ref()).map_err(attribute(alg))?;
        let seconds = clock.elapsed().as_secs_f64();
        if alg == Algorithm::Match {
            baseline = Some(tt.clone());
        }
        let report = evaluate(&instance.ean, &tt, &unc, &cfg.eval, alg.label(), &instance.label).map_err(attribute(alg))?;
        log::info!(
            "{} on {}: nominal {:.3}, average delayed {:.3} ({seconds:.1}s)",
            alg.label(),
            instance.label,
            report.nominal,
            report.avg_delayed()
        );
        runs.push(AlgorithmRun {
            algorithm: alg,
            timetable: tt,
            bound,
            state,
            seconds,
            report,
        });
    }
    Ok(Comparison {
        instance: instance.label.clone(),
        runs,
    })
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

impl Comparison {
    pub fn nominal_csv(&self) -> String {
        let rows = self
            .runs
            .iter()
            .map(|r| vec![self.instance.clone(), r.algorithm.label().into(), format!("{:.4}", r.report.nominal)])
            .collect();
        csv_table(&["instance", "algorithm", "nominal"], rows)
    }

    pub fn delayed_csv(&self) -> String {
        let rows = self
            .runs
            .iter()
            .map(|r| {
                vec![
                    self.instance.clone(),
                    r.algorithm.label().into(),
                    format!("{:.4}", r.report.min_delayed()),
                    format!("{:.4}", r.report.max_delayed()),
                    format!("{:.4}", r.report.avg_delayed()),
                ]
            })
            .collect();
        csv_table(&["instance", "algorithm", "min", "max", "avg"], rows)
    }

    pub fn passenger_delay_csv(&self) -> String {
        let rows = self
            .runs
            .iter()
            .map(|r| {
                vec![
                    self.instance.clone(),
                    r.algorithm.label().into(),
                    format!("{:.4}", r.report.avg_passenger_delay()),
                ]
            })
            .collect();
        csv_table(&["instance", "algorithm", "avg_passenger_delay"], rows)
    }

    /// The three tables with algorithms as columns.
    pub fn text(&self) -> String {
        let mut s = String::new();
        let head: String = self.runs.iter().map(|r| format!("{:>10}", r.algorithm.label())).collect();
        let row = |name: &str, f: &dyn Fn(&EvalReport) -> f64| -> String {
            let vals: String = self.runs.iter().map(|r| format!("{:>10.1}", f(&r.report))).collect();
            format!("{name:<18}{vals}\n")
        };
        let _ = writeln!(s, "Nominal travel time (min), {}", self.instance);
        let _ = writeln!(s, "{:<18}{head}", "");
        s += &row("Nominal", &|r| r.nominal);
        let _ = writeln!(s, "\nDelayed travel time (min), {}", self.instance);
        let _ = writeln!(s, "{:<18}{head}", "");
        s += &row("Minimum", &|r| r.min_delayed());
        s += &row("Maximum", &|r| r.max_delayed());
        s += &row("Average", &|r| r.avg_delayed());
        let _ = writeln!(s, "\nAverage passenger delay (min), {}", self.instance);
        let _ = writeln!(s, "{:<18}{head}", "");
        s += &row("Delay", &|r| r.avg_passenger_delay());
        s
    }

    /// Writes `nominal.csv`, `delayed.csv`, `passenger_delay.csv` and
    /// `tables.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), Error> {
        let io = |path: &Path| {
            let p = path.display().to_string();
            move |source| Error::Io { path: p, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, body) in [
            ("nominal.csv", self.nominal_csv()),
            ("delayed.csv", self.delayed_csv()),
            ("passenger_delay.csv", self.passenger_delay_csv()),
            ("tables.txt", self.text()),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(io(&p))?;
        }
        Ok(())
    }
}
