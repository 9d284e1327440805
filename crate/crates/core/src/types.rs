//! Shared domain types: problem instances, normal estimates, knowledge sets
//! and communication sequences.
//!
//! Node indices are zero-based inside the library. Every I/O surface (trace
//! files, CSV, JSON, CLI flags) shifts them to one-based.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Consensus detection tolerance for dense estimates.
pub const EPS_CONS: f64 = 1e-9;
/// Tolerance on the normalization identity `v.v = v.w`.
pub const EPS_NORM: f64 = 1e-9;

/// Sum vectors in index order and divide by `n`.
///
/// Every place that forms the network average goes through this function so
/// that the result is bit-reproducible.
pub fn mean_in_order<'a, I>(vectors: I, n: usize, d: usize) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc = vec![0.0; d];
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    let nf = n as f64;
    acc.iter_mut().for_each(|a| *a /= nf);
    acc
}

/// The initial data of a consensus problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub n: usize,
    pub d: usize,
    pub initials: Vec<Vec<f64>>,
    pub average: Vec<f64>,
}

/// Build an instance and precompute the average of the initial vectors.
pub fn make_instance(n: usize, d: usize, initials: Vec<Vec<f64>>) -> Result<ProblemInstance> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInstance(format!(
            "need n >= 1 and d >= 1, got n={n}, d={d}"
        )));
    }
    if initials.len() != n {
        return Err(Error::InvalidInstance(format!(
            "expected {n} initial vectors, got {}",
            initials.len()
        )));
    }
    if let Some((i, v)) = initials.iter().enumerate().find(|(_, v)| v.len() != d) {
        return Err(Error::InvalidInstance(format!(
            "initial vector of node {} has dimension {}, expected {d}",
            i + 1,
            v.len()
        )));
    }
    if initials.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInstance(
            "initial vectors must be finite".into(),
        ));
    }
    let average = mean_in_order(initials.iter().map(Vec::as_slice), n, d);
    Ok(ProblemInstance {
        n,
        d,
        initials,
        average,
    })
}

impl ProblemInstance {
    /// The instance used throughout the simulation study: `s_i(0) = i` (one-based).
    pub fn index_initials(n: usize, d: usize) -> Result<Self> {
        make_instance(n, d, (1..=n).map(|i| vec![i as f64; d]).collect())
    }

    /// Value the network must agree on under `goal`.
    pub fn target(&self, goal: &Goal) -> Vec<f64> {
        match goal {
            Goal::Average => self.average.clone(),
            Goal::Weighted(w) => {
                let mut acc = vec![0.0; self.d];
                for (s, wi) in self.initials.iter().zip(w) {
                    for (a, x) in acc.iter_mut().zip(s) {
                        *a += wi * x;
                    }
                }
                acc
            }
        }
    }
}

/// A vector in `{0, 1/n}^n`, stored as a bit set so that equality with the
/// consensus vector is exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Support {
    n: usize,
    words: Vec<u64>,
}

impl Support {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        let mut s = Self::empty(n);
        s.insert(i);
        s
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        (0..n).for_each(|i| s.insert(i));
        s
    }

    pub fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        idx.into_iter().for_each(|i| s.insert(i));
        s
    }

    /// Dimension of the underlying vector.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "index {i} outside 0..{}", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.n {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn union(&self, other: &Support) -> Support {
        debug_assert_eq!(self.n, other.n);
        Support {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Size of the intersection with `other`.
    pub fn overlap(&self, other: &Support) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.n
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.contains(i))
    }

    /// Dense form with entries in `{0, scale}`.
    pub fn to_dense(&self, scale: f64) -> Vec<f64> {
        (0..self.n)
            .map(|i| if self.contains(i) { scale } else { 0.0 })
            .collect()
    }

    /// Scalars needed for the two-sided encoding: the smaller of the support
    /// and its complement, each index costing one scalar.
    pub fn encoded_len(&self) -> usize {
        let c = self.count();
        c.min(self.n - c)
    }
}

impl fmt::Debug for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|i| i + 1)).finish()
    }
}

/// A node's normal consensus estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum NormalEstimate {
    /// Entries in `{0, 1/n}` (BM, OH, DDA).
    Lattice(Support),
    /// General real entries (DA).
    Dense(Vec<f64>),
}

impl NormalEstimate {
    pub fn dim(&self) -> usize {
        match self {
            NormalEstimate::Lattice(s) => s.dim(),
            NormalEstimate::Dense(v) => v.len(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            NormalEstimate::Lattice(s) => s.to_dense(1.0 / s.dim() as f64),
            NormalEstimate::Dense(v) => v.clone(),
        }
    }

    pub fn component(&self, i: usize) -> f64 {
        match self {
            NormalEstimate::Lattice(s) if s.contains(i) => 1.0 / s.dim() as f64,
            NormalEstimate::Lattice(_) => 0.0,
            NormalEstimate::Dense(v) => v[i],
        }
    }

    pub fn as_lattice(&self) -> Option<&Support> {
        match self {
            NormalEstimate::Lattice(s) => Some(s),
            NormalEstimate::Dense(_) => None,
        }
    }
}

/// The six algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    Bm,
    Da,
    Oh,
    Dda,
    Gossip,
    Aris,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 6] = [
        AlgorithmKind::Bm,
        AlgorithmKind::Da,
        AlgorithmKind::Oh,
        AlgorithmKind::Dda,
        AlgorithmKind::Gossip,
        AlgorithmKind::Aris,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Bm => "bm",
            AlgorithmKind::Da => "da",
            AlgorithmKind::Oh => "oh",
            AlgorithmKind::Dda => "dda",
            AlgorithmKind::Gossip => "gossip",
            AlgorithmKind::Aris => "aris",
        }
    }

    /// Whether the algorithm tracks a normal estimate.
    pub fn has_normal(self) -> bool {
        !matches!(self, AlgorithmKind::Gossip | AlgorithmKind::Aris)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// Projection target for the normal estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum Goal {
    /// `(1/n) 1`: the network average.
    Average,
    /// A general weight vector `w`; the agreed value becomes `sum_i w_i s_i(0)`.
    Weighted(Vec<f64>),
}

/// Goal configuration replacing `(1/n) 1` by `w`.
pub fn weighted_goal(w: Vec<f64>) -> Result<Goal> {
    if w.is_empty() || w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(
            "goal weights must be a non-empty finite vector".into(),
        ));
    }
    Ok(Goal::Weighted(w))
}

impl Goal {
    pub fn vector(&self, n: usize) -> Vec<f64> {
        match self {
            Goal::Average => vec![1.0 / n as f64; n],
            Goal::Weighted(w) => w.clone(),
        }
    }

    /// True when the goal is exactly the uniform average.
    pub fn is_uniform(&self, n: usize) -> bool {
        match self {
            Goal::Average => true,
            Goal::Weighted(w) => w.len() == n && w.iter().all(|&x| x == 1.0 / n as f64),
        }
    }
}

/// Extra state carried by ARIS nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ArisState {
    pub counter: u64,
    pub indicator: Support,
    /// `d x r` sketch, row-major: row `l` holds the `r` samples drawn with rate `s_il(0)`.
    pub sketch: Vec<f64>,
    pub r: usize,
}

/// Everything a node stores.
#[derive(Clone, Debug, PartialEq)]
pub struct KnowledgeSet {
    pub node: usize,
    pub n: usize,
    /// `s_i(0)`; released by BM and OH once the node reaches consensus, never held by Gossip.
    pub own_initial: Option<Vec<f64>>,
    /// Absent for Gossip and ARIS.
    pub normal: Option<NormalEstimate>,
    pub estimate: Vec<f64>,
    /// Initial vectors known to a BM node, keyed by node index (includes its own).
    pub stored_initials: BTreeMap<usize, Vec<f64>>,
    pub aris: Option<ArisState>,
}

impl KnowledgeSet {
    pub fn lattice(&self) -> Option<&Support> {
        self.normal.as_ref().and_then(NormalEstimate::as_lattice)
    }

    pub fn dim(&self) -> usize {
        self.estimate.len()
    }
}

/// A directed message between two nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub sender: usize,
    pub receiver: usize,
    pub t_send: f64,
    pub t_recv: f64,
    /// Half of an instantaneous two-way exchange (applied atomically by Gossip).
    pub bidir: bool,
}

impl Signal {
    pub fn new(sender: usize, receiver: usize, t_send: f64, t_recv: f64) -> Self {
        Self {
            sender,
            receiver,
            t_send,
            t_recv,
            bidir: false,
        }
    }
}

/// A finite list of signals ordered by receive time (ties by original position).
#[derive(Clone, Debug, PartialEq)]
pub struct CommSequence {
    n: usize,
    signals: Vec<Signal>,
    partners: Vec<Option<usize>>,
}

impl CommSequence {
    /// Validate and order a list of signals for an `n`-node network.
    pub fn new(n: usize, mut signals: Vec<Signal>) -> Result<Self> {
        for (q, s) in signals.iter().enumerate() {
            if s.sender >= n || s.receiver >= n {
                return Err(Error::Trace(format!(
                    "signal {q}: node index {}->{} outside 1..{n}",
                    s.sender + 1,
                    s.receiver + 1
                )));
            }
            if s.sender == s.receiver {
                return Err(Error::Trace(format!(
                    "signal {q}: node {} sends to itself",
                    s.sender + 1
                )));
            }
            if !(s.t_send.is_finite() && s.t_recv.is_finite()) {
                return Err(Error::Trace(format!("signal {q}: non-finite time")));
            }
            if s.t_recv < s.t_send {
                return Err(Error::Trace(format!(
                    "signal {q}: received at {} before it was sent at {}",
                    s.t_recv, s.t_send
                )));
            }
        }
        signals.sort_by(|a, b| a.t_recv.total_cmp(&b.t_recv));
        let mut last: BTreeMap<usize, f64> = BTreeMap::new();
        for s in &signals {
            if last.insert(s.receiver, s.t_recv) == Some(s.t_recv) {
                return Err(Error::Trace(format!(
                    "node {} receives two signals at time {}",
                    s.receiver + 1,
                    s.t_recv
                )));
            }
        }
        let partners = pair_bidirectional(&signals)?;
        Ok(Self {
            n,
            signals,
            partners,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            signals: Vec::new(),
            partners: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// The other half of a bidirectional exchange.
    pub fn partner(&self, q: usize) -> Option<usize> {
        self.partners[q]
    }

    /// Last receive time, or `None` for an empty sequence.
    pub fn end_time(&self) -> Option<f64> {
        self.signals.last().map(|s| s.t_recv)
    }

    /// Append `other` after this sequence, shifting its times by `offset`.
    pub fn concat(&self, other: &CommSequence, offset: f64) -> Result<CommSequence> {
        let mut all = self.signals.clone();
        all.extend(other.signals.iter().map(|s| Signal {
            t_send: s.t_send + offset,
            t_recv: s.t_recv + offset,
            ..s.clone()
        }));
        CommSequence::new(self.n.max(other.n), all)
    }
}

fn pair_bidirectional(signals: &[Signal]) -> Result<Vec<Option<usize>>> {
    let mut partners = vec![None; signals.len()];
    let mut open: HashMap<(usize, usize, u64), Vec<usize>> = HashMap::new();
    for (q, s) in signals.iter().enumerate().filter(|(_, s)| s.bidir) {
        let reverse = (s.receiver, s.sender, s.t_send.to_bits());
        match open.get_mut(&reverse).and_then(Vec::pop) {
            Some(o) => {
                partners[q] = Some(o);
                partners[o] = Some(q);
            }
            None => open
                .entry((s.sender, s.receiver, s.t_send.to_bits()))
                .or_default()
                .push(q),
        }
    }
    if let Some(&q) = open.values().flatten().min() {
        let s = &signals[q];
        return Err(Error::Trace(format!(
            "bidirectional signal {}->{} at {} has no reverse half",
            s.sender + 1,
            s.receiver + 1,
            s.t_send
        )));
    }
    Ok(partners)
}
