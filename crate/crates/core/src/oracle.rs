//! Exact ground states: exhaustive enumeration for small instances and
//! min-sum bucket elimination for bounded-treewidth graphs such as Chimera.
//!
//! Both solvers also count ground-state degeneracy. Ties are decided exactly
//! for integer-valued instances; otherwise within a relative tolerance of
//! `1e-9` of the instance's total coupling weight.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Adjacency, ChimeraSpec, IsingInstance, Spin};

/// Largest instance accepted by [`brute_force_ground`].
pub const BRUTE_FORCE_CAP: usize = 24;
/// Largest intermediate factor scope accepted by [`exact_ground_dp`].
pub const WIDTH_CAP: usize = 20;
/// Default number of ground states listed by [`brute_force_ground`].
pub const DEFAULT_STATE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub ground_energy: f64,
    /// Saturates at `u128::MAX`.
    pub degeneracy: u128,
    /// Ground states in lexicographic order (`-1 < +1`), when requested and
    /// the degeneracy does not exceed the cap.
    pub states: Option<Vec<Vec<Spin>>>,
    /// Induced width of the elimination order, for the DP solver.
    pub width: Option<usize>,
}

fn tie_tolerance(instance: &IsingInstance) -> f64 {
    if instance.is_integer_valued() {
        0.0
    } else {
        let scale: f64 = instance.fields().iter().map(|v| v.abs()).sum::<f64>()
            + instance.couplings().map(|(_, _, v)| v.abs()).sum::<f64>();
        1e-9 * scale.max(1.0)
    }
}

/// Exhaustive search, listing up to [`DEFAULT_STATE_CAP`] ground states.
pub fn brute_force_ground(instance: &IsingInstance) -> Result<OracleResult> {
    brute_force_ground_with(instance, Some(DEFAULT_STATE_CAP))
}

/// Exhaustive search in Gray-code order. With `list_cap = Some(c)` the ground
/// states are listed when there are at most `c` of them.
pub fn brute_force_ground_with(instance: &IsingInstance, list_cap: Option<usize>) -> Result<OracleResult> {
    let n = instance.n();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooManySpins {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let tol = tie_tolerance(instance);
    let neighbors = instance.neighbor_lists();
    let h = instance.fields();

    let mut s: Vec<Spin> = vec![-1; n];
    let mut energy = instance.energy_unchecked(&s);
    let mut best = energy;
    let mut count: u128 = 1;
    let mut states: Vec<Vec<Spin>> = Vec::new();
    let keep = |states: &mut Vec<Vec<Spin>>, s: &[Spin], count: u128| {
        if let Some(cap) = list_cap {
            if count as usize <= cap {
                states.push(s.to_vec());
            }
        }
    };
    keep(&mut states, &s, count);

    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        let local: f64 = h[i] + neighbors[i].iter().map(|&(j, w)| w * f64::from(s[j])).sum::<f64>();
        energy += 2.0 * f64::from(s[i]) * local;
        s[i] = -s[i];
        if energy < best - tol {
            best = energy;
            count = 1;
            states.clear();
            keep(&mut states, &s, count);
        } else if energy <= best + tol {
            count += 1;
            keep(&mut states, &s, count);
        }
    }

    let states = match list_cap {
        Some(cap) if count as usize <= cap => {
            states.sort();
            Some(states)
        }
        _ => None,
    };
    // Report the energy of an actual minimizer, free of accumulated rounding.
    let ground_energy = match &states {
        Some(list) => instance.energy_unchecked(&list[0]),
        None => best,
    };
    Ok(OracleResult {
        ground_energy,
        degeneracy: count,
        states,
        width: None,
    })
}

/// A table over `{-1,+1}^scope`; bit `k` of an index is set when spin
/// `scope[k]` is `+1`. Each entry holds the minimum energy and the number of
/// eliminated-variable assignments attaining it.
#[derive(Debug, Clone)]
struct Factor {
    scope: Vec<usize>,
    energy: Vec<f64>,
    count: Vec<u128>,
}

impl Factor {
    fn unary(i: usize, h: f64) -> Self {
        Self {
            scope: vec![i],
            energy: vec![h, -h],
            count: vec![1; 2],
        }
    }

    fn pair(i: usize, j: usize, w: f64) -> Self {
        // index bits: (s_j, s_i); aligned when both bits agree
        Self {
            scope: vec![i, j],
            energy: vec![-w, w, w, -w],
            count: vec![1; 4],
        }
    }
}

/// Min-sum bucket elimination along `order`, which must be a permutation of
/// the spins. Fails with [`Error::WidthExceeded`] when an intermediate
/// factor would involve more than [`WIDTH_CAP`] spins.
pub fn exact_ground_dp(instance: &IsingInstance, order: &[usize]) -> Result<OracleResult> {
    let n = instance.n();
    let mut position = vec![usize::MAX; n];
    if order.len() != n {
        return Err(Error::BadOrder(n));
    }
    for (p, &v) in order.iter().enumerate() {
        if v >= n || position[v] != usize::MAX {
            return Err(Error::BadOrder(n));
        }
        position[v] = p;
    }
    let tol = tie_tolerance(instance);

    let mut buckets: Vec<Vec<Factor>> = vec![Vec::new(); n];
    let place = |f: Factor, buckets: &mut Vec<Vec<Factor>>| {
        let first = f.scope.iter().map(|&v| position[v]).min();
        match first {
            Some(p) => buckets[p].push(f),
            None => unreachable!("scoped factors only"),
        }
    };
    for (i, &h) in instance.fields().iter().enumerate() {
        if h != 0.0 {
            place(Factor::unary(i, h), &mut buckets);
        }
    }
    for (i, j, w) in instance.couplings() {
        place(Factor::pair(i, j, w), &mut buckets);
    }

    let mut constant_energy = 0.0;
    let mut constant_count: u128 = 1;
    let mut width = 0;

    for p in 0..n {
        let var = order[p];
        let bucket = std::mem::take(&mut buckets[p]);
        // union scope with the eliminated variable at bit 0
        let mut rest: BTreeSet<usize> = BTreeSet::new();
        for f in &bucket {
            rest.extend(f.scope.iter().copied().filter(|&v| v != var));
        }
        let rest: Vec<usize> = rest.into_iter().collect();
        if rest.len() > WIDTH_CAP {
            return Err(Error::WidthExceeded {
                width: rest.len(),
                cap: WIDTH_CAP,
            });
        }
        width = width.max(rest.len());

        let union: Vec<usize> = std::iter::once(var).chain(rest.iter().copied()).collect();
        let bit_of = |v: usize| union.iter().position(|&u| u == v).unwrap();
        let maps: Vec<Vec<usize>> = bucket
            .iter()
            .map(|f| f.scope.iter().map(|&v| bit_of(v)).collect())
            .collect();

        let size = 1usize << rest.len();
        let mut energy = vec![0.0; size];
        let mut count = vec![0u128; size];
        for m in 0..size {
            let mut best = f64::INFINITY;
            let mut best_count: u128 = 0;
            for x in 0..2usize {
                let u = (m << 1) | x;
                let mut e = 0.0;
                let mut c: u128 = 1;
                for (f, map) in bucket.iter().zip(&maps) {
                    let mut idx = 0;
                    for (k, &bit) in map.iter().enumerate() {
                        idx |= ((u >> bit) & 1) << k;
                    }
                    e += f.energy[idx];
                    c = c.saturating_mul(f.count[idx]);
                }
                if e < best - tol {
                    best = e;
                    best_count = c;
                } else if e <= best + tol {
                    best_count = best_count.saturating_add(c);
                }
            }
            energy[m] = best;
            count[m] = best_count;
        }

        if rest.is_empty() {
            constant_energy += energy[0];
            constant_count = constant_count.saturating_mul(count[0]);
        } else {
            place(
                Factor {
                    scope: rest,
                    energy,
                    count,
                },
                &mut buckets,
            );
        }
    }

    Ok(OracleResult {
        ground_energy: constant_energy,
        degeneracy: constant_count,
        states: None,
        width: Some(width),
    })
}

/// Induced width of `order` on `adjacency`: the largest number of
/// not-yet-eliminated neighbors a vertex has when it is eliminated.
pub fn induced_width(adjacency: &Adjacency, order: &[usize]) -> Result<usize> {
    let n = adjacency.n();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(Error::BadOrder(n));
    }
    let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(i, j) in adjacency.edges() {
        nbrs[i].insert(j);
        nbrs[j].insert(i);
    }
    let mut width = 0;
    for &v in order {
        let live: Vec<usize> = std::mem::take(&mut nbrs[v]).into_iter().collect();
        width = width.max(live.len());
        for &a in &live {
            nbrs[a].remove(&v);
            for &b in &live {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
    }
    Ok(width)
}

/// Cell-by-cell elimination order for a Chimera graph, sweeping along the
/// longer grid dimension so the frontier spans the shorter one. Within a
/// cell the horizontally coupled shore goes first. Indices are compacted
/// (masked spins skipped).
pub fn default_chimera_order(spec: &ChimeraSpec) -> Vec<usize> {
    let map = spec.compaction();
    let mut order = Vec::with_capacity(spec.len());
    let mut visit = |row: usize, col: usize| {
        for side in [1, 0] {
            for k in 0..spec.shore {
                if let Some(c) = map[spec.raw_index(row, col, side, k)] {
                    order.push(c);
                }
            }
        }
    };
    if spec.cols <= spec.rows {
        for row in 0..spec.rows {
            for col in 0..spec.cols {
                visit(row, col);
            }
        }
    } else {
        for col in 0..spec.cols {
            for row in 0..spec.rows {
                visit(row, col);
            }
        }
    }
    order
}

/// Ground energy and degeneracy by the cheapest applicable exact method:
/// enumeration up to 16 spins, otherwise bucket elimination along a
/// min-degree order.
pub fn exact_ground(instance: &IsingInstance) -> Result<OracleResult> {
    if instance.n() <= 16 {
        brute_force_ground_with(instance, None)
    } else {
        exact_ground_dp(instance, &min_degree_order(&instance.adjacency()))
    }
}

/// Greedy min-degree elimination order (ties broken by lowest index).
pub fn min_degree_order(adjacency: &Adjacency) -> Vec<usize> {
    let n = adjacency.n();
    let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(i, j) in adjacency.edges() {
        nbrs[i].insert(j);
        nbrs[j].insert(i);
    }
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (nbrs[v].len(), v))
            .unwrap();
        alive[v] = false;
        order.push(v);
        let live: Vec<usize> = std::mem::take(&mut nbrs[v]).into_iter().collect();
        for &a in &live {
            nbrs[a].remove(&v);
            for &b in &live {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
    }
    order
}
