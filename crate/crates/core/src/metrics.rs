//! Error metrics and scalar-count resource accounting.
//!
//! Cost conventions: a vector in `R^m` costs `2m` scalars (index and value per
//! entry), so node indices, `n` and the ARIS counter cost 2 each; an unordered
//! set costs its cardinality. Lattice estimates (`{0, 1/n}` entries) and the
//! ARIS indicator are sent as whichever of support or co-support is smaller.
//! Dense normal estimates omit zero entries.

use crate::algorithms::{BmPayload, OhPayload, Payload};
use crate::types::{AlgorithmKind, KnowledgeSet, NormalEstimate};

fn norm2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `||s_i - target||_2` for one node.
pub fn node_consensus_error(k: &KnowledgeSet, target: &[f64]) -> f64 {
    norm2(&k.estimate, target)
}

/// Sum over nodes of `||s_i - target||_2`.
pub fn network_consensus_error(states: &[KnowledgeSet], target: &[f64]) -> f64 {
    states.iter().map(|k| node_consensus_error(k, target)).sum()
}

/// `||v - goal||_2`.
pub fn normal_error(v: &NormalEstimate, goal: &[f64]) -> f64 {
    normal_sq_error(v, goal).sqrt()
}

/// `||v - goal||_2^2`; exact for lattice estimates against the uniform goal.
pub fn normal_sq_error(v: &NormalEstimate, goal: &[f64]) -> f64 {
    match v {
        NormalEstimate::Lattice(s) if goal.iter().all(|&g| g == 1.0 / s.dim() as f64) => {
            let n = s.dim() as f64;
            (s.dim() - s.count()) as f64 / (n * n)
        }
        _ => {
            let d = v.to_dense();
            d.iter().zip(goal).map(|(x, y)| (x - y) * (x - y)).sum()
        }
    }
}

/// Sum over nodes of the normal error.
pub fn network_normal_error(states: &[KnowledgeSet], goal: &[f64]) -> f64 {
    states
        .iter()
        .filter_map(|k| k.normal.as_ref())
        .map(|v| normal_error(v, goal))
        .sum()
}

/// Sum over nodes of the squared normal error.
pub fn network_normal_sq_error(states: &[KnowledgeSet], goal: &[f64]) -> f64 {
    states
        .iter()
        .filter_map(|k| k.normal.as_ref())
        .map(|v| normal_sq_error(v, goal))
        .sum()
}

/// Storage, communication and total cost in scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostLedger {
    pub phi: u64,
    pub rho: u64,
    pub omega: u64,
}

const SCALAR: u64 = 2;

fn vec_cost(v: &[f64]) -> u64 {
    2 * v.len() as u64
}

fn normal_cost(v: &NormalEstimate) -> u64 {
    match v {
        NormalEstimate::Lattice(s) => s.encoded_len() as u64,
        NormalEstimate::Dense(d) => 2 * d.iter().filter(|x| **x != 0.0).count() as u64,
    }
}

/// Scalars needed to store `k` under `alg`.
pub fn storage_cost(k: &KnowledgeSet, alg: AlgorithmKind) -> u64 {
    let est = vec_cost(&k.estimate);
    let normal = k.normal.as_ref().map_or(0, normal_cost);
    let consensus = k.lattice().is_some_and(|s| s.is_full());
    match alg {
        AlgorithmKind::Gossip => est,
        AlgorithmKind::Bm if consensus => normal + est,
        AlgorithmKind::Bm => {
            let stored: u64 = k.stored_initials.values().map(|s| vec_cost(s)).sum();
            2 * SCALAR + normal + est + stored
        }
        AlgorithmKind::Oh if consensus => normal + est,
        AlgorithmKind::Da | AlgorithmKind::Oh | AlgorithmKind::Dda => {
            2 * SCALAR + normal + est + k.own_initial.as_deref().map_or(0, vec_cost)
        }
        AlgorithmKind::Aris => {
            let a = k.aris.as_ref().expect("ARIS state");
            3 * SCALAR
                + est
                + vec_cost(&a.sketch)
                + a.indicator.encoded_len() as u64
                + k.own_initial.as_deref().map_or(0, vec_cost)
        }
    }
}

/// Scalars needed to transmit `p`.
pub fn signal_cost(p: &Payload) -> u64 {
    match p {
        Payload::Bm(BmPayload::Flood { normal, initials }) => {
            normal.encoded_len() as u64 + initials.values().map(|s| vec_cost(s)).sum::<u64>()
        }
        // The normal estimate is the full vector, whose co-support is empty.
        Payload::Bm(BmPayload::Terminal { estimate }) => vec_cost(estimate),
        Payload::Da { normal, estimate } => {
            2 * normal.iter().filter(|x| **x != 0.0).count() as u64 + vec_cost(estimate)
        }
        Payload::Oh(OhPayload::Initial { initial, .. }) => SCALAR + vec_cost(initial),
        Payload::Oh(OhPayload::Average { estimate }) => SCALAR + vec_cost(estimate),
        Payload::Dda { normal, estimate } => normal.encoded_len() as u64 + vec_cost(estimate),
        Payload::Gossip { estimate } => vec_cost(estimate),
        Payload::Aris {
            estimate,
            sketch,
            indicator,
            ..
        } => SCALAR + vec_cost(estimate) + vec_cost(sketch) + indicator.encoded_len() as u64,
    }
}

/// Cost ledger for a node's knowledge set and a signal it receives.
pub fn measure_costs(k: &KnowledgeSet, sig: &Payload, alg: AlgorithmKind) -> CostLedger {
    let phi = storage_cost(k, alg);
    let rho = signal_cost(sig);
    CostLedger {
        phi,
        rho,
        omega: phi + rho,
    }
}

/// `[min, max]` bounds on each cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostBounds {
    pub phi: (u64, u64),
    pub rho: (u64, u64),
    pub omega: (u64, u64),
}

impl CostBounds {
    pub fn contains(&self, c: &CostLedger) -> bool {
        let within = |(lo, hi): (u64, u64), x: u64| lo <= x && x <= hi;
        within(self.phi, c.phi) && within(self.rho, c.rho) && within(self.omega, c.omega)
    }
}

/// The published cost table, entry by entry, for a network that has not yet
/// reached consensus.
///
/// The ARIS `omega` entries contain the term `4(r + 3/2)d = (4r + 6)d`.
pub fn cost_table(alg: AlgorithmKind, n: u64, d: u64, r: u64) -> CostBounds {
    let h = n / 2;
    match alg {
        AlgorithmKind::Bm => CostBounds {
            phi: (4 * d + 5, 2 * n * d + 4 + h),
            rho: (2 * d + 1, 2 * (n - 1) * d + h),
            omega: (6 * d + 6, 2 * (2 * n - 1) * d + 4 + 2 * h),
        },
        AlgorithmKind::Da => CostBounds {
            phi: (4 * d + 6, 4 * d + 2 * n + 4),
            rho: (2 * d + 1, 2 * d + 2 * n),
            omega: (6 * d + 8, 6 * d + 4 * n + 4),
        },
        AlgorithmKind::Oh => CostBounds {
            phi: (4 * d + 5, 4 * d + 4 + h),
            rho: (2 * d + 2, 2 * d + 2),
            omega: (6 * d + 7, 6 * d + 6 + h),
        },
        AlgorithmKind::Dda => CostBounds {
            phi: (4 * d + 5, 4 * d + 4 + h),
            rho: (2 * d + 1, 2 * d + h),
            omega: (6 * d + 6, 6 * d + 4 + 2 * h),
        },
        AlgorithmKind::Gossip => CostBounds {
            phi: (2 * d, 2 * d),
            rho: (2 * d, 2 * d),
            omega: (4 * d, 4 * d),
        },
        AlgorithmKind::Aris => CostBounds {
            phi: (7 + 2 * (r + 2) * d, h + 6 + 2 * (r + 2) * d),
            rho: (3 + 2 * (r + 1) * d, h + 2 + 2 * (r + 1) * d),
            omega: (10 + (4 * r + 6) * d, 2 * h + 8 + (4 * r + 6) * d),
        },
    }
}

/// Bounds implied by the itemized conventions above. Differs from
/// [`cost_table`] only in the DA minimum `rho`: the smallest DA signal carries
/// one nonzero entry (2 scalars) plus `s_j`, i.e. `2d + 2`, which is also the
/// value the table's own `omega` minimum `6d + 8 = (4d + 6) + (2d + 2)` implies.
pub fn itemized_bounds(alg: AlgorithmKind, n: u64, d: u64, r: u64) -> CostBounds {
    let mut b = cost_table(alg, n, d, r);
    if alg == AlgorithmKind::Da {
        b.rho.0 = 2 * d + 2;
    }
    b
}
