//! One-hop: nodes only ever forward their own initial vector, or the average
//! once they hold it.

use super::{
    check_dim, lattice_sq_error, own_lattice, wrong_payload, CaseTag, OhPayload, Payload,
    UpdateOutcome,
};
use crate::error::{Error, Result};
use crate::types::{AlgorithmKind, KnowledgeSet, NormalEstimate, Support};

pub fn oh_signal(k: &KnowledgeSet) -> Payload {
    let done = k.lattice().is_some_and(Support::is_full);
    match (&k.own_initial, done) {
        (Some(s), false) => Payload::Oh(OhPayload::Initial {
            sender: k.node,
            initial: s.clone(),
        }),
        _ => Payload::Oh(OhPayload::Average {
            estimate: k.estimate.clone(),
        }),
    }
}

pub fn oh_update(k: &KnowledgeSet, payload: &Payload) -> Result<UpdateOutcome> {
    let Payload::Oh(p) = payload else {
        return Err(wrong_payload(AlgorithmKind::Oh, payload));
    };
    let n = k.n;
    let d = k.dim();
    let vi = own_lattice(k)?;
    let before = lattice_sq_error(vi);
    let mut next = k.clone();
    if vi.is_full() {
        return Ok(UpdateOutcome {
            knowledge: next,
            error_drop: 0.0,
            case: CaseTag::OhAverage,
        });
    }
    let case = match p {
        OhPayload::Average { estimate } => {
            check_dim("estimate", estimate, d)?;
            next.normal = Some(NormalEstimate::Lattice(Support::full(n)));
            next.estimate = estimate.clone();
            next.own_initial = None;
            CaseTag::OhAverage
        }
        OhPayload::Initial { sender, initial } => {
            if *sender >= n {
                return Err(Error::MalformedPayload(format!(
                    "sender index {} outside 1..{n}",
                    sender + 1
                )));
            }
            check_dim("initial vector", initial, d)?;
            if !vi.contains(*sender) {
                let inv_n = 1.0 / n as f64;
                let mut v = vi.clone();
                v.insert(*sender);
                next.estimate = k
                    .estimate
                    .iter()
                    .zip(initial)
                    .map(|(s, x)| s + inv_n * x)
                    .collect();
                if v.is_full() {
                    next.own_initial = None;
                }
                next.normal = Some(NormalEstimate::Lattice(v));
            }
            CaseTag::OhInitial
        }
    };
    let after = lattice_sq_error(next.lattice().expect("lattice estimate"));
    Ok(UpdateOutcome {
        knowledge: next,
        error_drop: before - after,
        case,
    })
}
