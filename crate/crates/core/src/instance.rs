//! Ising problem instances and the two benchmark families: the eight-spin
//! core/ancilla gadget and Chimera graphs with random ±1 couplings.
//!
//! Energies follow `E(s) = -Σ_i h_i s_i - Σ_{i<j} J_ij s_i s_j`, so a positive
//! coupling is ferromagnetic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A classical spin value, `+1` or `-1`.
pub type Spin = i8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    n: usize,
    h: Vec<f64>,
    /// Keyed by `(i, j)` with `i < j`.
    couplings: BTreeMap<(usize, usize), f64>,
    label: String,
}

impl IsingInstance {
    /// An instance with `n` free spins and no fields or couplings.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            h: vec![0.0; n],
            couplings: BTreeMap::new(),
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn set_field(&mut self, i: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        self.h[i] = value;
        Ok(())
    }

    /// Adds the coupling `J_ij`. Each unordered pair may be added once.
    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        let key = (i.min(j), i.max(j));
        if self.couplings.contains_key(&key) {
            return Err(Error::DuplicateEdge(key.0, key.1));
        }
        self.couplings.insert(key, value);
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn field(&self, i: usize) -> f64 {
        self.h[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    /// `J_ij` for either ordering of the pair; zero when absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Couplings as `(i, j, J_ij)` with `i < j`, in lexicographic order.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn num_couplings(&self) -> usize {
        self.couplings.len()
    }

    /// Per-spin neighbor lists `(j, J_ij)`.
    pub fn neighbor_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let mut lists = vec![Vec::new(); self.n];
        for (i, j, v) in self.couplings() {
            lists[i].push((j, v));
            lists[j].push((i, v));
        }
        lists
    }

    /// The interaction graph, with coupling values dropped.
    pub fn adjacency(&self) -> Adjacency {
        Adjacency {
            n: self.n,
            edges: self.couplings.keys().copied().collect(),
        }
    }

    /// True when every `J` is ±1 and every `h` is in {-1, 0, +1}, which is the
    /// case for both benchmark ensembles.
    pub fn is_pm1_ensemble(&self) -> bool {
        self.couplings.values().all(|&v| v == 1.0 || v == -1.0)
            && self.h.iter().all(|&v| v == 0.0 || v == 1.0 || v == -1.0)
    }

    /// True when all fields and couplings are integers. Energies of such
    /// instances are integers and compare exactly in `f64`.
    pub fn is_integer_valued(&self) -> bool {
        self.h.iter().chain(self.couplings.values()).all(|v| v.fract() == 0.0)
    }

    /// Applies a spin relabeling: spin `i` of `self` becomes spin `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        let mut out = IsingInstance::new(self.n).with_label(self.label.clone());
        for (i, &p) in perm.iter().enumerate() {
            out.set_field(p, self.h[i])?;
        }
        for (i, j, v) in self.couplings() {
            out.add_coupling(perm[i], perm[j], v)?;
        }
        Ok(out)
    }

    /// The same instance with every field and coupling scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            h: self.h.iter().map(|v| v * factor).collect(),
            couplings: self.couplings.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            label: self.label.clone(),
        }
    }

    /// The same instance with every field negated.
    pub fn fields_negated(&self) -> Self {
        Self {
            n: self.n,
            h: self.h.iter().map(|v| -v).collect(),
            couplings: self.couplings.clone(),
            label: self.label.clone(),
        }
    }

    /// Energy of an assignment without validation. Entries are read as
    /// numbers, so any `±1` slice works.
    pub(crate) fn energy_unchecked(&self, s: &[Spin]) -> f64 {
        let mut e = 0.0;
        for (hi, &si) in self.h.iter().zip(s) {
            e -= hi * f64::from(si);
        }
        for (&(i, j), &v) in &self.couplings {
            e -= v * f64::from(s[i]) * f64::from(s[j]);
        }
        e
    }
}

/// Classical Ising energy of a `±1` assignment.
pub fn ising_energy(instance: &IsingInstance, assignment: &[Spin]) -> Result<f64> {
    if assignment.len() != instance.n() {
        return Err(Error::LengthMismatch {
            expected: instance.n(),
            got: assignment.len(),
        });
    }
    if let Some((index, &value)) = assignment
        .iter()
        .enumerate()
        .find(|(_, &s)| s != 1 && s != -1)
    {
        return Err(Error::NotASpin { index, value });
    }
    Ok(instance.energy_unchecked(assignment))
}

/// An undirected simple graph on spins `0..n`; edges stored as `(i, j)` with
/// `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjacency {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Adjacency {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            for k in [i, j] {
                if k >= n {
                    return Err(Error::IndexOutOfRange { index: k, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !set.insert((i.min(j), i.max(j))) {
                return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
            }
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }
}

/// The eight-spin gadget: core spins 0..4 on a ferromagnetic 4-cycle with
/// field +1, each carrying one pendant ancilla (spins 4..8) with field -1.
///
/// Its ground space is the 16 states with all cores up plus the all-down
/// state, all at energy -8.
pub fn build_eight_spin_gadget() -> IsingInstance {
    let mut inst = IsingInstance::new(8).with_label("gadget8");
    for i in 0..4 {
        inst.h[i] = 1.0;
        inst.h[i + 4] = -1.0;
    }
    for i in 0..4 {
        inst.couplings.insert((i.min((i + 1) % 4), i.max((i + 1) % 4)), 1.0);
        inst.couplings.insert((i, i + 4), 1.0);
    }
    inst
}

/// Core spins of the gadget built by [`build_eight_spin_gadget`].
pub const GADGET_CORE: [usize; 4] = [0, 1, 2, 3];
/// Ancilla spins of the gadget built by [`build_eight_spin_gadget`].
pub const GADGET_ANCILLAE: [usize; 4] = [4, 5, 6, 7];

/// Shape of a Chimera graph: a `rows × cols` grid of `K_{shore,shore}` cells.
///
/// Raw spin indices run `((row * cols + col) * 2 + side) * shore + k`, with
/// side 0 the left shore (coupled vertically between cells) and side 1 the
/// right shore (coupled horizontally). Masked raw indices are removed and the
/// remaining spins renumbered in increasing raw order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraSpec {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
    pub mask: BTreeSet<usize>,
}

impl ChimeraSpec {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            shore: 4,
            mask: BTreeSet::new(),
        }
    }

    pub fn with_shore(mut self, shore: usize) -> Self {
        self.shore = shore;
        self
    }

    pub fn with_mask(mut self, mask: impl IntoIterator<Item = usize>) -> Self {
        self.mask = mask.into_iter().collect();
        self
    }

    /// Spin count before masking.
    pub fn raw_len(&self) -> usize {
        self.rows * self.cols * 2 * self.shore
    }

    /// Spin count after masking.
    pub fn len(&self) -> usize {
        self.raw_len() - self.mask.iter().filter(|&&m| m < self.raw_len()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn raw_index(&self, row: usize, col: usize, side: usize, k: usize) -> usize {
        ((row * self.cols + col) * 2 + side) * self.shore + k
    }

    /// Map from raw index to compacted index (`None` for masked spins).
    pub fn compaction(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        (0..self.raw_len())
            .map(|r| {
                if self.mask.contains(&r) {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.shore == 0 {
            return Err(Error::InvalidParameter(format!(
                "chimera dimensions must be positive, got {}x{}x{}",
                self.rows, self.cols, self.shore
            )));
        }
        if let Some(&m) = self.mask.iter().find(|&&m| m >= self.raw_len()) {
            return Err(Error::IndexOutOfRange {
                index: m,
                n: self.raw_len(),
            });
        }
        Ok(())
    }
}

/// Raw (unmasked) Chimera edge list.
fn chimera_raw_edges(spec: &ChimeraSpec) -> Vec<(usize, usize)> {
    let s = spec.shore;
    let mut edges = Vec::new();
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            for a in 0..s {
                for b in 0..s {
                    edges.push((spec.raw_index(row, col, 0, a), spec.raw_index(row, col, 1, b)));
                }
            }
            for k in 0..s {
                if row + 1 < spec.rows {
                    edges.push((spec.raw_index(row, col, 0, k), spec.raw_index(row + 1, col, 0, k)));
                }
                if col + 1 < spec.cols {
                    edges.push((spec.raw_index(row, col, 1, k), spec.raw_index(row, col + 1, 1, k)));
                }
            }
        }
    }
    edges
}

pub fn generate_chimera(spec: &ChimeraSpec) -> Result<Adjacency> {
    spec.validate()?;
    let map = spec.compaction();
    let edges = chimera_raw_edges(spec)
        .into_iter()
        .filter_map(|(i, j)| Some((map[i]?, map[j]?)));
    Adjacency::new(spec.len(), edges)
}

/// Assigns each edge `+1` or `-1` with equal probability. All fields are zero.
pub fn random_pm1_instance(adjacency: &Adjacency, seed: u64) -> IsingInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = IsingInstance::new(adjacency.n()).with_label(format!("pm1-{seed}"));
    for &(i, j) in adjacency.edges() {
        let v = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        inst.couplings.insert((i, j), v);
    }
    inst
}

const LABEL_PREFIX: &str = "# label:";

/// Serializes to the line-oriented text format:
///
/// ```text
/// n <spin-count>
/// h <i> <value>
/// J <i> <j> <value>
/// ```
///
/// Zero fields are omitted. The label, if any, goes in a leading
/// `# label: ...` comment.
pub fn serialize_instance(instance: &IsingInstance) -> String {
    let mut out = String::new();
    if !instance.label.is_empty() {
        let _ = writeln!(out, "{LABEL_PREFIX} {}", instance.label);
    }
    let _ = writeln!(out, "n {}", instance.n);
    for (i, &v) in instance.h.iter().enumerate() {
        if v != 0.0 {
            let _ = writeln!(out, "h {i} {v:?}");
        }
    }
    for (i, j, v) in instance.couplings() {
        let _ = writeln!(out, "J {i} {j} {v:?}");
    }
    out
}

pub fn parse_instance(text: &str) -> Result<IsingInstance> {
    let mut inst: Option<IsingInstance> = None;
    let mut label = String::new();
    let mut seen_h = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| Error::Parse { line, msg };
        if let Some(rest) = raw.trim_start().strip_prefix(LABEL_PREFIX) {
            label = rest.trim().to_string();
            continue;
        }
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let index = |tok: &str| -> Result<usize> {
            tok.parse::<usize>()
                .map_err(|_| err(format!("invalid spin index '{tok}'")))
        };
        let value = |tok: &str| -> Result<f64> {
            let v = tok
                .parse::<f64>()
                .map_err(|_| err(format!("invalid value '{tok}'")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("non-finite value '{tok}'")))
            }
        };
        match (tokens[0], tokens.len()) {
            ("n", 2) => {
                if inst.is_some() {
                    return Err(err("repeated 'n' record".into()));
                }
                let n = tokens[1]
                    .parse::<usize>()
                    .map_err(|_| err(format!("invalid spin count '{}'", tokens[1])))?;
                inst = Some(IsingInstance::new(n));
            }
            ("h", 3) => {
                let inst = inst
                    .as_mut()
                    .ok_or_else(|| err("'h' record before 'n'".into()))?;
                let i = index(tokens[1])?;
                let v = value(tokens[2])?;
                if !seen_h.insert(i) {
                    return Err(err(format!("duplicate field for spin {i}")));
                }
                inst.set_field(i, v).map_err(|e| err(e.to_string()))?;
            }
            ("J", 4) => {
                let inst = inst
                    .as_mut()
                    .ok_or_else(|| err("'J' record before 'n'".into()))?;
                let i = index(tokens[1])?;
                let j = index(tokens[2])?;
                let v = value(tokens[3])?;
                inst.add_coupling(i, j, v).map_err(|e| err(e.to_string()))?;
            }
            (tag, _) => return Err(err(format!("malformed record '{content}' (tag '{tag}')"))),
        }
    }
    let mut inst = inst.ok_or_else(|| Error::Parse {
        line: text.lines().count().max(1),
        msg: "missing 'n' record".into(),
    })?;
    inst.label = label;
    Ok(inst)
}
