//! Single-spin-flip Metropolis simulated annealing, the randomized baseline.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{IsingInstance, Spin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BetaRamp {
    #[default]
    Linear,
    Geometric,
}

/// Order in which a sweep visits the spins. Each spin gets exactly one flip
/// proposal per sweep either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// A fresh random permutation every sweep.
    #[default]
    Shuffled,
    /// Index order `0..n`. Zero-cost flips are then accepted on every sweep,
    /// so free spins flip back and forth in lockstep.
    Fixed,
}

/// Inverse-temperature ramp over a fixed number of sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: usize,
    pub ramp: BetaRamp,
    pub order: SweepOrder,
}

impl Default for SaSchedule {
    fn default() -> Self {
        Self {
            beta_start: 0.1,
            beta_end: 3.0,
            sweeps: 100,
            ramp: BetaRamp::Linear,
            order: SweepOrder::Shuffled,
        }
    }
}

impl SaSchedule {
    pub fn new(beta_start: f64, beta_end: f64, sweeps: usize) -> Self {
        Self {
            beta_start,
            beta_end,
            sweeps,
            ramp: BetaRamp::Linear,
            order: SweepOrder::Shuffled,
        }
    }

    pub fn geometric(mut self) -> Self {
        self.ramp = BetaRamp::Geometric;
        self
    }

    pub fn with_order(mut self, order: SweepOrder) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.beta_start && self.beta_start <= self.beta_end && self.beta_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= beta_start <= beta_end, got {} -> {}",
                self.beta_start, self.beta_end
            )));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
        }
        if self.ramp == BetaRamp::Geometric && self.beta_start == 0.0 && self.beta_end > 0.0 {
            return Err(Error::InvalidParameter("geometric ramp needs beta_start > 0".into()));
        }
        Ok(())
    }

    /// Inverse temperature of sweep `k` (0-based).
    pub fn beta(&self, k: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.beta_end;
        }
        let u = k as f64 / (self.sweeps - 1) as f64;
        match self.ramp {
            BetaRamp::Linear => self.beta_start + (self.beta_end - self.beta_start) * u,
            BetaRamp::Geometric if self.beta_start == self.beta_end => self.beta_start,
            BetaRamp::Geometric => self.beta_start * (self.beta_end / self.beta_start).powf(u),
        }
    }
}

/// Single-spin-flip Metropolis chain over `±1` assignments.
#[derive(Debug, Clone)]
pub struct Metropolis {
    h: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    spins: Vec<Spin>,
    visit: Vec<usize>,
}

impl Metropolis {
    pub fn new(instance: &IsingInstance, start: Vec<Spin>) -> Result<Self> {
        if start.len() != instance.n() {
            return Err(Error::LengthMismatch {
                expected: instance.n(),
                got: start.len(),
            });
        }
        let mut offsets = vec![0];
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        for list in instance.neighbor_lists() {
            for (j, w) in list {
                neighbors.push(j);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        Ok(Self {
            h: instance.fields().to_vec(),
            offsets,
            neighbors,
            weights,
            visit: (0..start.len()).collect(),
            spins: start,
        })
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn into_spins(self) -> Vec<Spin> {
        self.spins
    }

    /// Energy change from flipping spin `i`.
    pub fn flip_delta(&self, i: usize) -> f64 {
        let mut local = self.h[i];
        for k in self.offsets[i]..self.offsets[i + 1] {
            local += self.weights[k] * f64::from(self.spins[self.neighbors[k]]);
        }
        2.0 * f64::from(self.spins[i]) * local
    }

    /// One flip proposal per spin, accepted with probability
    /// `min(1, exp(-β ΔE))`. Returns the number of accepted flips.
    pub fn sweep<R: Rng + ?Sized>(&mut self, beta: f64, order: SweepOrder, rng: &mut R) -> usize {
        match order {
            SweepOrder::Fixed => {
                for (k, v) in self.visit.iter_mut().enumerate() {
                    *v = k;
                }
            }
            SweepOrder::Shuffled => self.visit.shuffle(rng),
        }
        let mut accepted = 0;
        for k in 0..self.visit.len() {
            let i = self.visit[k];
            let delta = self.flip_delta(i);
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                self.spins[i] = -self.spins[i];
                accepted += 1;
            }
        }
        accepted
    }
}

/// Anneals from a uniformly random assignment drawn from `rng`.
pub fn sa_run_with<R: Rng + ?Sized>(instance: &IsingInstance, schedule: &SaSchedule, rng: &mut R) -> Result<Vec<Spin>> {
    schedule.validate()?;
    let start: Vec<Spin> = (0..instance.n())
        .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
        .collect();
    let mut chain = Metropolis::new(instance, start)?;
    for k in 0..schedule.sweeps {
        chain.sweep(schedule.beta(k), schedule.order, rng);
    }
    Ok(chain.into_spins())
}

/// One seeded annealing run.
pub fn sa_run(instance: &IsingInstance, schedule: &SaSchedule, seed: u64) -> Result<Vec<Spin>> {
    sa_run_with(instance, schedule, &mut ChaCha8Rng::seed_from_u64(seed))
}
