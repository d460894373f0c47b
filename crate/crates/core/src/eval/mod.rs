//! Experimental workflow: synthetic instances, rollout-based evaluation with
//! aperiodic delay management, and algorithm comparison tables.

mod compare;
mod evaluate;
mod generate;

pub use compare::{compare_algorithms, timetable_for, Algorithm, AlgorithmRun, CompareConfig, Comparison};
pub use evaluate::{evaluate, evaluate_scenarios, EvalConfig, EvalReport};
pub use generate::{generate_instance, GeneratorParams, Instance, InstanceKind};
