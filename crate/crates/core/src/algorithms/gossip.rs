//! Pairwise averaging.

use super::{check_dim, wrong_payload, CaseTag, Payload, UpdateOutcome};
use crate::error::Result;
use crate::types::{AlgorithmKind, KnowledgeSet};

pub fn gossip_signal(k: &KnowledgeSet) -> Payload {
    Payload::Gossip {
        estimate: k.estimate.clone(),
    }
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// One-sided update: the receiver moves to the midpoint, the sender is untouched.
pub fn gossip_receive(k: &KnowledgeSet, payload: &Payload) -> Result<UpdateOutcome> {
    let Payload::Gossip { estimate } = payload else {
        return Err(wrong_payload(AlgorithmKind::Gossip, payload));
    };
    check_dim("estimate", estimate, k.dim())?;
    let mut next = k.clone();
    next.estimate = midpoint(&k.estimate, estimate);
    Ok(UpdateOutcome {
        knowledge: next,
        error_drop: 0.0,
        case: CaseTag::GossipMidpoint,
    })
}

/// Update a pair of nodes. With `bidirectional` both adopt the midpoint of
/// their pre-update estimates; otherwise only `ki` (the receiver) moves.
pub fn gossip_update(
    ki: &KnowledgeSet,
    kj: &KnowledgeSet,
    bidirectional: bool,
) -> (KnowledgeSet, KnowledgeSet) {
    let m = midpoint(&ki.estimate, &kj.estimate);
    let mut a = ki.clone();
    let mut b = kj.clone();
    a.estimate = m.clone();
    if bidirectional {
        b.estimate = m;
    }
    (a, b)
}
