//! Classical compass-needle simulation of adiabatic ground-state dragging on
//! Ising instances, with exact ground-state oracles and a simulated
//! annealing baseline.
//!
//! The usual flow: build an [`IsingInstance`] (the eight-spin gadget or a
//! random ±1 Chimera instance), solve it exactly with [`oracle`], drag it
//! with [`dynamics::run_drag`] or run a seeded [`batch`], then summarize the
//! records with [`readout`].

pub mod batch;
pub mod dynamics;
pub mod error;
pub mod instance;
pub mod oracle;
pub mod readout;
pub mod report;
pub mod sa;

pub use batch::{compass_batch, derive_seed, exact_batch, sa_batch, BatchPlan};
pub use dynamics::{
    residual_kinetic_energy, run_drag, CompassModel, CompassState, DragConfig, NoiseSpec, RunDiagnostics,
    ScheduleKind, Trajectory,
};
pub use error::{Error, Result};
pub use instance::{
    build_eight_spin_gadget, generate_chimera, ising_energy, parse_instance, random_pm1_instance,
    serialize_instance, Adjacency, ChimeraSpec, IsingInstance, Spin,
};
pub use oracle::{brute_force_ground, default_chimera_order, exact_ground, exact_ground_dp, OracleResult};
pub use readout::{histogram, isolated_cluster_stats, project_spins, success_probability, HistogramSummary, RunRecord};
pub use sa::{sa_run, SaSchedule, SweepOrder};
