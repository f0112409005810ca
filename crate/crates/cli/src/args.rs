use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use compass_core::sa::{BetaRamp, SweepOrder};
use compass_core::{ChimeraSpec, DragConfig, NoiseSpec, SaSchedule};

#[derive(Debug, Parser)]
#[command(name = "compass", version, about = "Classical compass-needle adiabatic dragging experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eight-spin gadget: adiabatic, noisy and diabatic trajectories, plus
    /// isolated/cluster statistics over a batch of runs.
    Gadget8(Gadget8Args),
    /// Compass-model success-probability benchmark over an instance set.
    Bench(BenchArgs),
    /// Simulated-annealing baseline over an instance set.
    Sa(SaArgs),
    /// Exact ground energies and degeneracies.
    Exact(ExactArgs),
    /// Write random ±1 Chimera instances (or the gadget) to instance files.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Shuffled,
    Fixed,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed; per-run seeds derive from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Format for record and oracle tables.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DragArgs {
    /// Drag duration T.
    #[arg(long = "T", default_value_t = 1000.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Transverse field strength.
    #[arg(long, default_value_t = 1.0)]
    pub bx: f64,
    /// Post-drag hold time (default 0.2 T).
    #[arg(long)]
    pub hold: Option<f64>,
}

impl DragArgs {
    pub fn config(&self) -> DragConfig {
        let mut c = DragConfig::new(self.duration).with_dt(self.dt).with_bx(self.bx);
        if let Some(h) = self.hold {
            c = c.with_hold(h);
        }
        c
    }
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Kick half-width κ; 0 disables kicks.
    #[arg(long = "noise-amp", alias = "noise")]
    pub amplitude: Option<f64>,
    /// Kick period Δ.
    #[arg(long = "noise-period", default_value_t = 10.0)]
    pub period: f64,
    /// Disable kicks regardless of --noise-amp.
    #[arg(long)]
    pub no_noise: bool,
}

impl NoiseArgs {
    pub fn spec(&self, default_amplitude: f64) -> NoiseSpec {
        let amp = self.amplitude.unwrap_or(default_amplitude);
        if self.no_noise || amp == 0.0 {
            NoiseSpec::off()
        } else {
            NoiseSpec::kicks(amp, self.period)
        }
    }
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Instance files; overrides generation.
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Use the eight-spin gadget as the only instance.
    #[arg(long)]
    pub gadget: bool,
    /// Number of generated random ±1 Chimera instances.
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Chimera grid as ROWSxCOLS.
    #[arg(long, default_value = "3x3", value_parser = parse_grid)]
    pub chimera: (usize, usize),
    #[arg(long, default_value_t = 4)]
    pub shore: usize,
    /// Disabled raw spin indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mask: Vec<usize>,
}

impl SourceArgs {
    pub fn chimera_spec(&self) -> ChimeraSpec {
        ChimeraSpec::new(self.chimera.0, self.chimera.1)
            .with_shore(self.shore)
            .with_mask(self.mask.iter().copied())
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got '{s}'"))?;
    let r = r.trim().parse().map_err(|_| format!("bad row count '{r}'"))?;
    let c = c.trim().parse().map_err(|_| format!("bad column count '{c}'"))?;
    Ok((r, c))
}

#[derive(Debug, Args)]
pub struct Gadget8Args {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub drag: DragArgs,
    /// Noise for the noisy scenario and the batch (default κ = 0.02).
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Batch size for isolated/cluster statistics (0 = trajectories only).
    #[arg(long, default_value_t = 0)]
    pub runs: usize,
    /// Trajectory sampling stride in steps.
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub drag: DragArgs,
    /// Kicks (default off).
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = compass_core::readout::DEFAULT_BINS)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct SaArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 0.1)]
    pub beta_start: f64,
    #[arg(long, default_value_t = 3.0)]
    pub beta_end: f64,
    #[arg(long, default_value_t = 100)]
    pub sweeps: usize,
    /// Geometric instead of linear β ramp.
    #[arg(long)]
    pub geometric: bool,
    #[arg(long, value_enum, default_value_t = OrderArg::Shuffled)]
    pub sweep_order: OrderArg,
    #[arg(long, default_value_t = 30)]
    pub runs: usize,
    #[arg(long, default_value_t = compass_core::readout::DEFAULT_BINS)]
    pub bins: usize,
}

impl SaArgs {
    pub fn schedule(&self) -> SaSchedule {
        SaSchedule {
            beta_start: self.beta_start,
            beta_end: self.beta_end,
            sweeps: self.sweeps,
            ramp: if self.geometric { BetaRamp::Geometric } else { BetaRamp::Linear },
            order: match self.sweep_order {
                OrderArg::Shuffled => SweepOrder::Shuffled,
                OrderArg::Fixed => SweepOrder::Fixed,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Force exhaustive enumeration.
    #[arg(long)]
    pub brute: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: SourceArgs,
}
