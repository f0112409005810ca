//! Readout of compass states into spin assignments, per-instance success
//! statistics, the isolated/cluster comparison on the gadget, and success
//! probability histograms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Spin;

/// Default `|cos θ|` below which a needle counts as unpolarized.
pub const DEFAULT_TIE_EPSILON: f64 = 1e-6;
/// Default histogram bin count.
pub const DEFAULT_BINS: usize = 20;

/// Sign of each needle's z-projection. Needles with `|cos θ| ≤ epsilon` get
/// a uniformly random sign from `rng`.
pub fn project_spins<R: Rng + ?Sized>(theta: &[f64], epsilon: f64, rng: &mut R) -> Vec<Spin> {
    theta
        .iter()
        .map(|t| {
            let c = t.cos();
            if c > epsilon {
                1
            } else if c < -epsilon {
                -1
            } else if rng.gen_bool(0.5) {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// One completed run of either solver on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: usize,
    pub run_id: usize,
    pub seed: u64,
    pub final_energy: f64,
    pub ground_energy: f64,
    pub success: bool,
    pub projected: Vec<Spin>,
    pub residual_ke: f64,
}

/// Whether `energy` reaches the exact ground energy. Integer-valued energies
/// compare exactly; others within `1e-9` relative.
pub fn is_success(energy: f64, ground_energy: f64) -> bool {
    if energy.fract() == 0.0 && ground_energy.fract() == 0.0 {
        energy <= ground_energy
    } else {
        energy <= ground_energy + 1e-9 * ground_energy.abs().max(1.0)
    }
}

/// Fraction of successful runs. `None` for an empty slice or when the
/// records span more than one instance.
pub fn success_probability(records: &[RunRecord]) -> Option<f64> {
    let first = records.first()?;
    if records.iter().any(|r| r.instance_id != first.instance_id) {
        return None;
    }
    let hits = records.iter().filter(|r| r.success).count();
    Some(hits as f64 / records.len() as f64)
}

/// Per-instance success probabilities, in increasing instance id order.
pub fn success_by_instance(records: &[RunRecord]) -> Vec<(usize, f64)> {
    let mut tallies: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
    for r in records {
        let e = tallies.entry(r.instance_id).or_default();
        e.0 += usize::from(r.success);
        e.1 += 1;
    }
    tallies
        .into_iter()
        .map(|(id, (hits, total))| (id, hits as f64 / total as f64))
        .collect()
}

/// Isolated-state probability `p_s` and mean cluster-state probability
/// `p_C` on the eight-spin gadget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolatedClusterStats {
    pub p_s: f64,
    pub p_c: f64,
    pub runs: usize,
}

/// `p_s` is the fraction of runs projecting to all-down; `p_C` is the
/// fraction landing anywhere in the 16 all-cores-up states, divided by 16.
pub fn isolated_cluster_stats<'a, I>(projections: I) -> Result<IsolatedClusterStats>
where
    I: IntoIterator<Item = &'a [Spin]>,
{
    let mut runs = 0;
    let mut isolated = 0;
    let mut cluster = 0;
    for s in projections {
        if s.len() != 8 {
            return Err(Error::WrongInstanceSize {
                expected: 8,
                got: s.len(),
            });
        }
        runs += 1;
        if s.iter().all(|&x| x == -1) {
            isolated += 1;
        } else if s[..4].iter().all(|&x| x == 1) {
            cluster += 1;
        }
    }
    if runs == 0 {
        return Err(Error::InvalidParameter("no runs to summarize".into()));
    }
    Ok(IsolatedClusterStats {
        p_s: isolated as f64 / runs as f64,
        p_c: cluster as f64 / runs as f64 / 16.0,
        runs,
    })
}

/// Convenience wrapper over [`isolated_cluster_stats`] for run records.
pub fn isolated_cluster_stats_of(records: &[RunRecord]) -> Result<IsolatedClusterStats> {
    isolated_cluster_stats(records.iter().map(|r| r.projected.as_slice()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub n_instances: usize,
}

impl HistogramSummary {
    /// Combined count of the first and last bins.
    pub fn extreme_mass(&self) -> usize {
        match self.counts.len() {
            0 => 0,
            1 => self.counts[0],
            k => self.counts[0] + self.counts[k - 1],
        }
    }

    /// `(lo, hi, count)` per bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.bin_edges
            .windows(2)
            .zip(&self.counts)
            .map(|(e, &c)| (e[0], e[1], c))
    }

    /// Sums two histograms over the same bins.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.bin_edges != other.bin_edges {
            return Err(Error::InvalidParameter("histogram bins differ".into()));
        }
        Ok(Self {
            bin_edges: self.bin_edges.clone(),
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
            n_instances: self.n_instances + other.n_instances,
        })
    }
}

/// Equal-width histogram over `[0, 1]`; a value of exactly 1 falls in the
/// last bin.
pub fn histogram(values: &[f64], n_bins: usize) -> Result<HistogramSummary> {
    if n_bins < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 bins, got {n_bins}")));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidParameter(format!("probability {v} outside [0, 1]")));
    }
    let bin_edges: Vec<f64> = (0..=n_bins).map(|k| k as f64 / n_bins as f64).collect();
    let mut counts = vec![0; n_bins];
    for &v in values {
        let k = ((v * n_bins as f64).floor() as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    Ok(HistogramSummary {
        bin_edges,
        counts,
        n_instances: values.len(),
    })
}
