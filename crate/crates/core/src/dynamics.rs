//! The classical compass model.
//!
//! Each spin is a planar rotor with angle `θ_i` and unit moment of inertia.
//! The potential interpolates from a transverse term to the Ising term,
//!
//! ```text
//! V(θ, t) = A(t) · (-Bx Σ_i sin θ_i)
//!         + B(t) · (-Σ_i h_i cos θ_i - Σ_{i<j} J_ij cos θ_i cos θ_j)
//! ```
//!
//! and the angles obey `θ̈_i = -∂V/∂θ_i`, integrated with velocity Verlet.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::IsingInstance;

/// Any `|ω_i|` above this aborts the run; it means `dt` is far too large.
pub const MAX_ANGULAR_VELOCITY: f64 = 1e3;

/// Interpolation `(A(t), B(t))` between the transverse and Ising potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `A = 1 - t/T`, `B = t/T`.
    #[default]
    Linear,
    /// Cubic smoothstep `s = 3u² - 2u³` with `u = t/T`; `A = 1 - s`, `B = s`.
    Smoothstep,
    /// Fixed `(A, B)` for all times. Used for frozen-Hamiltonian diagnostics.
    Constant { a: f64, b: f64 },
}

/// Schedule value at time `t` for a drag of duration `duration`. Times past
/// the end return the endpoint value.
pub fn schedule(t: f64, duration: f64, kind: ScheduleKind) -> (f64, f64) {
    let u = (t / duration).clamp(0.0, 1.0);
    match kind {
        ScheduleKind::Linear => (1.0 - u, u),
        ScheduleKind::Smoothstep => {
            let s = u * u * (3.0 - 2.0 * u);
            (1.0 - s, s)
        }
        ScheduleKind::Constant { a, b } => (a, b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragConfig {
    /// Drag duration `T`.
    pub duration: f64,
    pub dt: f64,
    /// Transverse field strength `Bx`.
    pub bx: f64,
    /// Extra time integrated with the potential frozen at its `t = T` value.
    pub hold: f64,
    pub schedule: ScheduleKind,
}

impl DragConfig {
    /// Linear drag of the given duration with `dt = 0.01`, `Bx = 1` and a
    /// hold of `0.2 T`.
    pub fn new(duration: f64) -> Self {
        Self {
            duration,
            dt: 0.01,
            bx: 1.0,
            hold: 0.2 * duration,
            schedule: ScheduleKind::Linear,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_hold(mut self, hold: f64) -> Self {
        self.hold = hold;
        self
    }

    pub fn with_bx(mut self, bx: f64) -> Self {
        self.bx = bx;
        self
    }

    pub fn with_schedule(mut self, schedule: ScheduleKind) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("drag duration must be positive, got {}", self.duration));
        }
        if !(self.dt > 0.0 && self.dt <= self.duration) {
            return bad(format!("dt must lie in (0, T], got {}", self.dt));
        }
        if !(self.hold >= 0.0 && self.hold.is_finite()) {
            return bad(format!("hold must be non-negative, got {}", self.hold));
        }
        if !self.bx.is_finite() {
            return bad("Bx must be finite".into());
        }
        Ok(())
    }

    pub fn drag_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn hold_steps(&self) -> usize {
        (self.hold / self.dt).round() as usize
    }

    /// `(A, B)` at time `t`, frozen after the drag ends.
    pub fn coefficients(&self, t: f64) -> (f64, f64) {
        schedule(t, self.duration, self.schedule)
    }
}

impl Default for DragConfig {
    fn default() -> Self {
        Self::new(1000.0)
    }
}

/// Periodic velocity kicks: at `t = Δ, 2Δ, … ≤ T` every `ω_i` receives an
/// independent uniform increment in `[-amplitude, amplitude]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub period: f64,
    pub enabled: bool,
}

impl NoiseSpec {
    pub fn off() -> Self {
        Self {
            amplitude: 0.0,
            period: 10.0,
            enabled: false,
        }
    }

    pub fn kicks(amplitude: f64, period: f64) -> Self {
        Self {
            amplitude,
            period,
            enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kick amplitude must be non-negative, got {}",
                self.amplitude
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kick period must be positive, got {}",
                self.period
            )));
        }
        Ok(())
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::off()
    }
}

/// Angles (unwrapped, radians), angular velocities and the current time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompassState {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub t: f64,
}

impl CompassState {
    /// All needles along the transverse direction and at rest: the minimum
    /// of the transverse potential for `Bx > 0`.
    pub fn transverse_ground(n: usize) -> Self {
        Self {
            theta: vec![std::f64::consts::FRAC_PI_2; n],
            omega: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.theta.iter().all(|v| v.is_finite())
            && self.omega.iter().all(|v| v.is_finite())
    }
}

/// `Σ_i ½ ω_i²`.
pub fn residual_kinetic_energy(state: &CompassState) -> f64 {
    state.omega.iter().map(|w| 0.5 * w * w).sum()
}

/// Instance data laid out for force evaluation: fields plus a CSR neighbor
/// table. Built once per instance and shared across runs.
#[derive(Debug, Clone)]
pub struct CompassModel {
    h: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    /// Each coupling once, for the potential.
    pairs: Vec<(usize, usize, f64)>,
}

impl CompassModel {
    pub fn new(instance: &IsingInstance) -> Self {
        let lists = instance.neighbor_lists();
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for list in &lists {
            for &(j, w) in list {
                neighbors.push(j);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        Self {
            h: instance.fields().to_vec(),
            offsets,
            neighbors,
            weights,
            pairs: instance.couplings().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            Err(Error::LengthMismatch {
                expected: self.n(),
                got: len,
            })
        } else {
            Ok(())
        }
    }

    pub fn potential(&self, theta: &[f64], a: f64, b: f64, bx: f64) -> Result<f64> {
        self.check_len(theta.len())?;
        let cos: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let transverse: f64 = -bx * theta.iter().map(|t| t.sin()).sum::<f64>();
        let mut ising = 0.0;
        for (hi, ci) in self.h.iter().zip(&cos) {
            ising -= hi * ci;
        }
        for &(i, j, w) in &self.pairs {
            ising -= w * cos[i] * cos[j];
        }
        Ok(a * transverse + b * ising)
    }

    /// Writes `∂V/∂θ_i` into `out`. `trig` is scratch space of length `2n`.
    fn gradient_into(&self, theta: &[f64], a: f64, b: f64, bx: f64, trig: &mut [f64], out: &mut [f64]) {
        let n = self.n();
        let (sin, cos) = trig.split_at_mut(n);
        for ((t, s), c) in theta.iter().zip(sin.iter_mut()).zip(cos.iter_mut()) {
            (*s, *c) = t.sin_cos();
        }
        for i in 0..n {
            let mut local = self.h[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                local += self.weights[k] * cos[self.neighbors[k]];
            }
            out[i] = -a * bx * cos[i] + b * sin[i] * local;
        }
    }

    pub fn gradient(&self, theta: &[f64], a: f64, b: f64, bx: f64) -> Result<Vec<f64>> {
        self.check_len(theta.len())?;
        let mut trig = vec![0.0; 2 * self.n()];
        let mut out = vec![0.0; self.n()];
        self.gradient_into(theta, a, b, bx, &mut trig, &mut out);
        Ok(out)
    }

    /// Total energy `Σ ½ω² + V` at the schedule value of `state.t`.
    pub fn total_energy(&self, state: &CompassState, config: &DragConfig) -> Result<f64> {
        let (a, b) = config.coefficients(state.t);
        Ok(residual_kinetic_energy(state) + self.potential(&state.theta, a, b, config.bx)?)
    }
}

pub fn potential(instance: &IsingInstance, theta: &[f64], a: f64, b: f64, bx: f64) -> Result<f64> {
    CompassModel::new(instance).potential(theta, a, b, bx)
}

/// Analytic gradient `∂V/∂θ_i = -A Bx cos θ_i + B sin θ_i (h_i + Σ_j J_ij cos θ_j)`.
pub fn gradient(instance: &IsingInstance, theta: &[f64], a: f64, b: f64, bx: f64) -> Result<Vec<f64>> {
    CompassModel::new(instance).gradient(theta, a, b, bx)
}

/// Velocity-Verlet integrator with a cached force.
struct Integrator<'a> {
    model: &'a CompassModel,
    config: DragConfig,
    force: Vec<f64>,
    trig: Vec<f64>,
}

impl<'a> Integrator<'a> {
    fn new(model: &'a CompassModel, config: DragConfig, state: &CompassState) -> Self {
        let n = model.n();
        let mut this = Self {
            model,
            config,
            force: vec![0.0; n],
            trig: vec![0.0; 2 * n],
        };
        this.refresh_force(&state.theta, state.t);
        this
    }

    fn refresh_force(&mut self, theta: &[f64], t: f64) {
        let (a, b) = self.config.coefficients(t);
        self.model
            .gradient_into(theta, a, b, self.config.bx, &mut self.trig, &mut self.force);
        for f in &mut self.force {
            *f = -*f;
        }
    }

    /// Advances `state` from `t` to `t_next`.
    fn advance(&mut self, state: &mut CompassState, t_next: f64) -> Result<()> {
        let dt = self.config.dt;
        let half = 0.5 * dt;
        for ((th, w), f) in state.theta.iter_mut().zip(&mut state.omega).zip(&self.force) {
            *w += half * f;
            *th += dt * *w;
        }
        self.refresh_force(&state.theta, t_next);
        let mut ok = true;
        for (w, f) in state.omega.iter_mut().zip(&self.force) {
            *w += half * f;
            ok &= w.abs() <= MAX_ANGULAR_VELOCITY;
        }
        state.t = t_next;
        if !ok {
            return Err(divergence(state));
        }
        Ok(())
    }
}

fn divergence(state: &CompassState) -> Error {
    let reason = match state
        .omega
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.abs() <= MAX_ANGULAR_VELOCITY))
    {
        Some((i, w)) => format!("|omega_{i}| = {w} exceeds {MAX_ANGULAR_VELOCITY}"),
        None => "non-finite state".into(),
    };
    Error::Diverged { t: state.t, reason }
}

/// One velocity-Verlet step of length `config.dt`, with the force evaluated
/// at the schedule values of the old and new times.
pub fn step(state: &CompassState, instance: &IsingInstance, config: &DragConfig) -> Result<CompassState> {
    let model = CompassModel::new(instance);
    model.check_len(state.theta.len())?;
    model.check_len(state.omega.len())?;
    if !state.is_finite() {
        return Err(divergence(state));
    }
    let mut next = state.clone();
    let mut integrator = Integrator::new(&model, *config, state);
    if integrator.force.iter().any(|f| !f.is_finite()) {
        return Err(divergence(state));
    }
    integrator.advance(&mut next, state.t + config.dt)?;
    Ok(next)
}

/// Adds an independent uniform draw from `[-κ, κ]` to every `ω_i`.
pub fn apply_kick<R: Rng + ?Sized>(state: &mut CompassState, noise: &NoiseSpec, rng: &mut R) {
    if !noise.enabled || noise.amplitude == 0.0 {
        return;
    }
    let k = noise.amplitude;
    for w in &mut state.omega {
        *w += rng.gen_range(-k..=k);
    }
}

/// Summary of one drag run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    /// `Σ ½ω²` at the end of the run (after the hold).
    pub residual_ke: f64,
    /// Kinetic energy at `t = T`.
    pub drag_end_ke: f64,
    /// Largest kinetic energy seen during the hold; equals `drag_end_ke`
    /// when there is no hold.
    pub max_hold_ke: f64,
    /// Potential at the final state with the end-of-drag coefficients.
    pub final_potential: f64,
    pub kicks: usize,
    pub steps: usize,
}

/// Receives the state at `t = 0`, every `stride` steps and at the last step.
pub trait Observer {
    fn observe(&mut self, state: &CompassState);
}

impl<F: FnMut(&CompassState)> Observer for F {
    fn observe(&mut self, state: &CompassState) {
        self(state)
    }
}

struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: &CompassState) {}
}

/// Sampled trajectory of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<CompassState>,
}

impl Observer for Trajectory {
    fn observe(&mut self, state: &CompassState) {
        self.samples.push(state.clone());
    }
}

/// Runs one drag from the transverse ground state, drawing kicks from `rng`.
///
/// The drag covers `t ∈ [0, T]`; the hold continues with the potential frozen
/// at its `t = T` value and no kicks.
pub fn run_drag_with<R: Rng + ?Sized>(
    model: &CompassModel,
    config: &DragConfig,
    noise: &NoiseSpec,
    rng: &mut R,
    stride: usize,
    observer: &mut dyn Observer,
) -> Result<(CompassState, RunDiagnostics)> {
    config.validate()?;
    if noise.enabled {
        noise.validate()?;
    }
    let drag_steps = config.drag_steps();
    let total_steps = drag_steps + config.hold_steps();
    let kick_every = if noise.enabled {
        ((noise.period / config.dt).round() as usize).max(1)
    } else {
        0
    };
    let stride = stride.max(1);

    let mut state = CompassState::transverse_ground(model.n());
    let mut integrator = Integrator::new(model, *config, &state);
    let mut kicks = 0;
    let mut drag_end_ke = residual_kinetic_energy(&state);
    let mut max_hold_ke = 0.0f64;
    observer.observe(&state);

    for k in 1..=total_steps {
        integrator.advance(&mut state, k as f64 * config.dt)?;
        if kick_every > 0 && k <= drag_steps && k % kick_every == 0 {
            apply_kick(&mut state, noise, rng);
            kicks += 1;
        }
        if k == drag_steps {
            drag_end_ke = residual_kinetic_energy(&state);
        }
        if k >= drag_steps {
            max_hold_ke = max_hold_ke.max(residual_kinetic_energy(&state));
        }
        if k % stride == 0 || k == total_steps {
            observer.observe(&state);
        }
    }
    if total_steps == drag_steps {
        max_hold_ke = drag_end_ke;
    }

    let (a, b) = config.coefficients(config.duration);
    let diagnostics = RunDiagnostics {
        residual_ke: residual_kinetic_energy(&state),
        drag_end_ke,
        max_hold_ke,
        final_potential: model.potential(&state.theta, a, b, config.bx)?,
        kicks,
        steps: total_steps,
    };
    Ok((state, diagnostics))
}

/// Runs one drag with kicks drawn from a generator seeded with `seed`.
pub fn run_drag(
    instance: &IsingInstance,
    config: &DragConfig,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<(CompassState, RunDiagnostics)> {
    let model = CompassModel::new(instance);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_drag_with(&model, config, noise, &mut rng, usize::MAX, &mut NoObserver)
}

/// Like [`run_drag`], also sampling the trajectory every `stride` steps.
pub fn run_drag_traced(
    instance: &IsingInstance,
    config: &DragConfig,
    noise: &NoiseSpec,
    seed: u64,
    stride: usize,
) -> Result<(CompassState, RunDiagnostics, Trajectory)> {
    let model = CompassModel::new(instance);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectory = Trajectory::default();
    let (state, diag) = run_drag_with(&model, config, noise, &mut rng, stride, &mut trajectory)?;
    Ok((state, diag, trajectory))
}
