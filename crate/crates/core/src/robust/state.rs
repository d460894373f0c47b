use std::io::Write;

use milp::SolveStatus;

use crate::scenario::Scenario;
use crate::timetable::Timetable;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// `ub - lb <= ε`.
    Converged,
    IterationCap,
    /// Every sampled scenario was already in the pool.
    NoNewScenario,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration_cap",
            Termination::NoNewScenario => "no_new_scenario",
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub k: usize,
    pub lb: f64,
    pub ub: f64,
    /// Seconds since the start of the run, at the end of this iteration.
    pub wall_seconds: f64,
    pub pool_size: usize,
    pub master_status: SolveStatus,
    /// Status of the worst-case solve (cutting plane) or of the last sample
    /// that raised the bound (heuristic); `None` if no such solve happened.
    pub sub_status: Option<SolveStatus>,
    /// `τ` of this iteration's timetable under the scenario it produced.
    pub scenario_value: f64,
}

#[derive(Clone, Debug)]
pub struct RobustRunState {
    pub pool: Vec<Scenario>,
    pub incumbent: Option<Timetable>,
    pub records: Vec<IterationRecord>,
    pub termination: Option<Termination>,
}

impl RobustRunState {
    pub fn new(initial: Scenario) -> Self {
        RobustRunState {
            pool: vec![initial],
            incumbent: None,
            records: Vec::new(),
            termination: None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn lb(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.lb).collect()
    }

    pub fn ub(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ub).collect()
    }

    /// Writes `k;lb;ub;wall_seconds;pool_size;master_status;sub_status`.
    pub fn write_trace<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(out);
        w.write_record(["k", "lb", "ub", "wall_seconds", "pool_size", "master_status", "sub_status"])?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                r.lb.to_string(),
                r.ub.to_string(),
                format!("{:.3}", r.wall_seconds),
                r.pool_size.to_string(),
                r.master_status.as_str().to_string(),
                r.sub_status.map_or("none", |s| s.as_str()).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Whitespace-separated `k lb ub` per iteration, each bound divided by
    /// `norm` (passengers) for plotting; missing bounds are written as `NaN`.
    pub fn write_plot_data<W: Write>(&self, mut out: W, norm: f64) -> std::io::Result<()> {
        writeln!(out, "# k lb ub")?;
        for r in &self.records {
            writeln!(out, "{} {} {}", r.k, r.lb / norm, r.ub / norm)?;
        }
        Ok(())
    }
}
