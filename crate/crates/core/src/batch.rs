//! Seeded batches of independent runs over a set of instances.
//!
//! Every `(instance, run)` pair gets its own generator seeded from
//! `(master seed, instance id, run id)`, so results do not depend on the
//! worker count or on scheduling order. Records come back sorted by
//! `(instance_id, run_id)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{run_drag_with, CompassModel, CompassState, DragConfig, NoiseSpec};
use crate::error::{Error, Result};
use crate::instance::IsingInstance;
use crate::oracle::{exact_ground, exact_ground_dp, OracleResult};
use crate::readout::{is_success, project_spins, RunRecord, DEFAULT_TIE_EPSILON};
use crate::sa::{sa_run_with, SaSchedule};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-run seed derived from the master seed and the run's coordinates.
pub fn derive_seed(master_seed: u64, instance_id: u64, run_id: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ instance_id) ^ run_id)
}

/// Shape of a batch: runs per instance, master seed, and worker threads
/// (0 means one per available core).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    pub runs: usize,
    pub master_seed: u64,
    pub workers: usize,
}

impl BatchPlan {
    pub fn new(runs: usize, master_seed: u64) -> Self {
        Self {
            runs,
            master_seed,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

fn check_inputs(instances: &[IsingInstance], ground_energies: &[f64], plan: &BatchPlan) -> Result<()> {
    if instances.len() != ground_energies.len() {
        return Err(Error::LengthMismatch {
            expected: instances.len(),
            got: ground_energies.len(),
        });
    }
    if plan.runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    Ok(())
}

fn run_pool<T, F>(plan: &BatchPlan, n_instances: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync + Send,
{
    let pairs: Vec<(usize, usize)> = (0..n_instances)
        .flat_map(|i| (0..plan.runs).map(move |r| (i, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| pairs.par_iter().map(|&(i, r)| job(i, r)).collect())
}

/// Exact ground states of every instance, solved concurrently. With an
/// elimination order every instance uses bucket elimination along it;
/// otherwise [`exact_ground`] picks the method.
pub fn exact_batch(instances: &[IsingInstance], order: Option<&[usize]>, workers: usize) -> Result<Vec<OracleResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| {
        instances
            .par_iter()
            .map(|inst| match order {
                Some(order) => exact_ground_dp(inst, order),
                None => exact_ground(inst),
            })
            .collect()
    })
}

/// Compass-model drags, each projected with the run's own generator and
/// scored against the supplied ground energies.
pub fn compass_batch(
    instances: &[IsingInstance],
    ground_energies: &[f64],
    config: &DragConfig,
    noise: &NoiseSpec,
    plan: &BatchPlan,
) -> Result<Vec<RunRecord>> {
    check_inputs(instances, ground_energies, plan)?;
    config.validate()?;
    if noise.enabled {
        noise.validate()?;
    }
    let models: Vec<CompassModel> = instances.iter().map(CompassModel::new).collect();
    run_pool(plan, instances.len(), |i, r| {
        let seed = derive_seed(plan.master_seed, i as u64, r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, diag) = run_drag_with(&models[i], config, noise, &mut rng, usize::MAX, &mut |_: &CompassState| {})?;
        let projected = project_spins(&state.theta, DEFAULT_TIE_EPSILON, &mut rng);
        let final_energy = instances[i].energy_unchecked(&projected);
        Ok(RunRecord {
            instance_id: i,
            run_id: r,
            seed,
            final_energy,
            ground_energy: ground_energies[i],
            success: is_success(final_energy, ground_energies[i]),
            projected,
            residual_ke: diag.residual_ke,
        })
    })
}

/// Simulated-annealing runs scored the same way as [`compass_batch`].
pub fn sa_batch(
    instances: &[IsingInstance],
    ground_energies: &[f64],
    schedule: &SaSchedule,
    plan: &BatchPlan,
) -> Result<Vec<RunRecord>> {
    check_inputs(instances, ground_energies, plan)?;
    schedule.validate()?;
    run_pool(plan, instances.len(), |i, r| {
        let seed = derive_seed(plan.master_seed, i as u64, r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let projected = sa_run_with(&instances[i], schedule, &mut rng)?;
        let final_energy = instances[i].energy_unchecked(&projected);
        Ok(RunRecord {
            instance_id: i,
            run_id: r,
            seed,
            final_energy,
            ground_energy: ground_energies[i],
            success: is_success(final_energy, ground_energies[i]),
            projected,
            residual_ke: 0.0,
        })
    })
}
