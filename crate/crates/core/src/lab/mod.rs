//! Scenarios, eps sweeps, convergence fits and reports.

mod fit;
mod oracle;
mod report;
mod run;
mod scenario;
mod verdict;

pub use fit::{fit_convergence, ConvergenceFit, FLOOR_SLOPE_RATIO};
pub use oracle::{
    cayley_menger, dense_agreement, flat_torus, log_log_slope, run_oracle, sphere_convergence,
    DENSE_ORACLE_VERTICES, ORACLE_NAMES,
};
pub use run::{
    build_scenario_mesh, multi_collar_scenario, nodal_export, run_scenario, ComponentPlacement,
    EpsRun, KFit, MorseSummary, NodalExport, ScenarioReport, SmoothedCheck, SweepRecord,
};
pub use scenario::{
    neumann_reference, MetricMode, NeumannReference, Scenario, ScenarioConfig, ScenarioName,
    Tolerances,
};
pub use verdict::Verdict;
