//! Per-node state machines: what a sender emits and how a receiver updates.
//!
//! Every update is a pure function from `(knowledge, payload)` to a new
//! knowledge set. The simulator owns sequencing and random streams.

mod aris;
mod bm;
mod da;
mod dda;
mod gossip;
mod oh;

use std::collections::BTreeMap;

pub use aris::{aris_signal, aris_update};
pub use bm::{bm_signal, bm_update};
pub use da::{da_signal, da_update, project_onto_span};
pub use dda::{dda_signal, dda_update, DdaVariant};
pub use gossip::{gossip_receive, gossip_signal, gossip_update};
pub use oh::{oh_signal, oh_update};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::types::{
    AlgorithmKind, ArisState, Goal, KnowledgeSet, NormalEstimate, ProblemInstance, Support,
};

/// Message contents, one variant per algorithm.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Bm(BmPayload),
    Da {
        normal: Vec<f64>,
        estimate: Vec<f64>,
    },
    Oh(OhPayload),
    Dda {
        normal: Support,
        estimate: Vec<f64>,
    },
    Gossip {
        estimate: Vec<f64>,
    },
    Aris {
        counter: u64,
        estimate: Vec<f64>,
        sketch: Vec<f64>,
        indicator: Support,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum BmPayload {
    /// Every initial vector the sender knows, plus its normal estimate.
    Flood {
        normal: Support,
        initials: BTreeMap<usize, Vec<f64>>,
    },
    /// Sent once the sender holds the average; the normal estimate is `(1/n) 1`.
    Terminal { estimate: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum OhPayload {
    /// The sender's own index and initial vector.
    Initial { sender: usize, initial: Vec<f64> },
    /// Marker 0: the sender has reached consensus and forwards the average.
    Average { estimate: Vec<f64> },
}

impl Payload {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Payload::Bm(_) => AlgorithmKind::Bm,
            Payload::Da { .. } => AlgorithmKind::Da,
            Payload::Oh(_) => AlgorithmKind::Oh,
            Payload::Dda { .. } => AlgorithmKind::Dda,
            Payload::Gossip { .. } => AlgorithmKind::Gossip,
            Payload::Aris { .. } => AlgorithmKind::Aris,
        }
    }
}

/// Which closed-form branch an update took.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    BmMerge,
    BmComplete,
    BmTerminal,
    /// Only `e_i` is independent: the span collapses to the local direction.
    DaRank1,
    DaRank2,
    DaRank3,
    OhInitial,
    OhAverage,
    /// Disjoint supports outside `i`: take the union.
    DdaUnion,
    /// Overlapping supports, sender strictly larger: adopt the sender's estimate.
    DdaAdopt,
    /// Overlapping supports, receiver at least as large: keep.
    DdaKeep,
    /// Alternative variant on an equal-size tie: adopt the sender's estimate.
    DdaTieAdopt,
    GossipMidpoint,
    ArisStale,
    ArisMerge,
    ArisRoundComplete,
    ArisCatchUp,
    ArisCatchUpComplete,
}

/// Result of applying one payload.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateOutcome {
    pub knowledge: KnowledgeSet,
    /// Decrease of the squared normal error; zero for algorithms without a normal estimate.
    pub error_drop: f64,
    pub case: CaseTag,
}

/// Algorithm selection plus its options.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    pub goal: Goal,
    pub dda_variant: DdaVariant,
    /// ARIS sketch width `r`.
    pub aris_r: usize,
    /// Seed for the ARIS per-node streams and the DDA switching stream.
    pub seed: u64,
}

impl AlgorithmSpec {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            kind,
            goal: Goal::Average,
            dda_variant: DdaVariant::Primary,
            aris_r: 1,
            seed: 0,
        }
    }

    pub fn with_goal(mut self, goal: Goal) -> Self {
        self.goal = goal;
        self
    }

    pub fn with_dda_variant(mut self, v: DdaVariant) -> Self {
        self.dda_variant = v;
        self
    }

    pub fn with_aris_r(mut self, r: usize) -> Self {
        self.aris_r = r;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Check the options against an instance.
    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        if let Goal::Weighted(w) = &self.goal {
            if w.len() != inst.n {
                return Err(Error::Config(format!(
                    "goal has {} weights for {} nodes",
                    w.len(),
                    inst.n
                )));
            }
        }
        match self.kind {
            AlgorithmKind::Bm
            | AlgorithmKind::Oh
            | AlgorithmKind::Dda
            | AlgorithmKind::Gossip
            | AlgorithmKind::Aris
                if !self.goal.is_uniform(inst.n) =>
            {
                return Err(Error::UnsupportedGoal(self.kind.name()));
            }
            _ => {}
        }
        if let DdaVariant::Randomized { p } = self.dda_variant {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "DDA switching probability {p} outside [0, 1]"
                )));
            }
        }
        if self.kind == AlgorithmKind::Aris {
            if self.aris_r == 0 {
                return Err(Error::Config("ARIS needs r >= 1".into()));
            }
            for (node, s) in inst.initials.iter().enumerate() {
                if let Some(&value) = s.iter().find(|&&x| x <= 0.0) {
                    return Err(Error::Positivity {
                        node: node + 1,
                        value,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Fill a fresh `d x r` sketch from `rng`, row `l` with rate `rates[l]`.
pub(crate) fn sample_sketch(rates: &[f64], r: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let mut w = Vec::with_capacity(rates.len() * r);
    for &rate in rates {
        for _ in 0..r {
            w.push(rng.exponential(rate));
        }
    }
    w
}

/// Initial knowledge set of node `i`.
///
/// `rng` is node `i`'s stream; only ARIS consumes it.
pub fn init_knowledge(
    inst: &ProblemInstance,
    i: usize,
    spec: &AlgorithmSpec,
    rng: &mut SplitMix64,
) -> Result<KnowledgeSet> {
    if i >= inst.n {
        return Err(Error::Config(format!(
            "node {} outside 1..{}",
            i + 1,
            inst.n
        )));
    }
    let n = inst.n;
    let s_i = inst.initials[i].clone();
    let scaled = |c: f64| s_i.iter().map(|x| c * x).collect::<Vec<_>>();
    let mut k = KnowledgeSet {
        node: i,
        n,
        own_initial: Some(s_i.clone()),
        normal: None,
        estimate: Vec::new(),
        stored_initials: BTreeMap::new(),
        aris: None,
    };
    match spec.kind {
        AlgorithmKind::Bm | AlgorithmKind::Oh | AlgorithmKind::Dda => {
            if !spec.goal.is_uniform(n) {
                return Err(Error::UnsupportedGoal(spec.kind.name()));
            }
            k.normal = Some(NormalEstimate::Lattice(Support::singleton(n, i)));
            k.estimate = scaled(1.0 / n as f64);
            if spec.kind == AlgorithmKind::Bm {
                k.stored_initials.insert(i, s_i.clone());
            }
            if n == 1 {
                finish_single_node(&mut k, spec.kind, inst);
            }
        }
        AlgorithmKind::Da => {
            let w = spec.goal.vector(n);
            let mut v = vec![0.0; n];
            v[i] = w[i];
            k.normal = Some(NormalEstimate::Dense(v));
            k.estimate = scaled(w[i]);
        }
        AlgorithmKind::Gossip => {
            k.own_initial = None;
            k.estimate = s_i;
        }
        AlgorithmKind::Aris => {
            if let Some(&value) = s_i.iter().find(|&&x| x <= 0.0) {
                return Err(Error::Positivity { node: i + 1, value });
            }
            if spec.aris_r == 0 {
                return Err(Error::Config("ARIS needs r >= 1".into()));
            }
            k.estimate = scaled(1.0 / n as f64);
            k.aris = Some(ArisState {
                counter: 0,
                indicator: Support::singleton(n, i),
                sketch: sample_sketch(&s_i, spec.aris_r, rng),
                r: spec.aris_r,
            });
        }
    }
    Ok(k)
}

/// A lone node already holds the average; BM and OH release their private data.
fn finish_single_node(k: &mut KnowledgeSet, kind: AlgorithmKind, inst: &ProblemInstance) {
    if matches!(kind, AlgorithmKind::Bm | AlgorithmKind::Oh) {
        k.estimate = inst.average.clone();
        k.stored_initials.clear();
        k.own_initial = None;
    }
}

/// Payload node `k` emits under `kind`.
pub fn signal(k: &KnowledgeSet, kind: AlgorithmKind) -> Payload {
    match kind {
        AlgorithmKind::Bm => bm_signal(k),
        AlgorithmKind::Da => da_signal(k),
        AlgorithmKind::Oh => oh_signal(k),
        AlgorithmKind::Dda => dda_signal(k),
        AlgorithmKind::Gossip => gossip_signal(k),
        AlgorithmKind::Aris => aris_signal(k),
    }
}

/// Apply `payload` at the receiver.
///
/// `rng` is the receiver's own stream (ARIS resampling) and `switch` the
/// shared stream used by randomized DDA.
pub fn update(
    k: &KnowledgeSet,
    payload: &Payload,
    spec: &AlgorithmSpec,
    rng: &mut SplitMix64,
    switch: &mut SplitMix64,
) -> Result<UpdateOutcome> {
    if payload.kind() != spec.kind {
        return Err(Error::MalformedPayload(format!(
            "{} payload delivered to a {} node",
            payload.kind(),
            spec.kind
        )));
    }
    match spec.kind {
        AlgorithmKind::Bm => bm_update(k, payload),
        AlgorithmKind::Da => da_update(k, payload, &spec.goal),
        AlgorithmKind::Oh => oh_update(k, payload),
        AlgorithmKind::Dda => dda_update(k, payload, spec.dda_variant, switch),
        AlgorithmKind::Gossip => gossip_receive(k, payload),
        AlgorithmKind::Aris => aris_update(k, payload, rng),
    }
}

/// Squared distance of a lattice estimate from `(1/n) 1`, computed from counts.
pub(crate) fn lattice_sq_error(s: &Support) -> f64 {
    let n = s.dim() as f64;
    (s.dim() - s.count()) as f64 / (n * n)
}

pub(crate) fn check_dim(what: &str, v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::MalformedPayload(format!(
            "{what} has dimension {}, expected {expected}",
            v.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_support(s: &Support, n: usize) -> Result<()> {
    if s.dim() != n {
        return Err(Error::MalformedPayload(format!(
            "normal estimate over {} nodes, expected {n}",
            s.dim()
        )));
    }
    Ok(())
}

pub(crate) fn wrong_payload(expected: AlgorithmKind, got: &Payload) -> Error {
    Error::MalformedPayload(format!("expected a {expected} payload, got {}", got.kind()))
}

pub(crate) fn own_lattice(k: &KnowledgeSet) -> Result<&Support> {
    k.lattice()
        .ok_or_else(|| Error::MalformedPayload("receiver has no lattice estimate".into()))
}
