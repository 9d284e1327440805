//! Flooding benchmark: forward every known initial vector until the support
//! of the normal estimate is complete.

use super::{
    check_dim, check_support, lattice_sq_error, own_lattice, wrong_payload, BmPayload, CaseTag,
    Payload, UpdateOutcome,
};
use crate::error::{Error, Result};
use crate::types::{mean_in_order, AlgorithmKind, KnowledgeSet, NormalEstimate, Support};

pub fn bm_signal(k: &KnowledgeSet) -> Payload {
    let normal = k
        .lattice()
        .cloned()
        .unwrap_or_else(|| Support::singleton(k.n, k.node));
    if normal.is_full() {
        Payload::Bm(BmPayload::Terminal {
            estimate: k.estimate.clone(),
        })
    } else {
        Payload::Bm(BmPayload::Flood {
            normal,
            initials: k.stored_initials.clone(),
        })
    }
}

pub fn bm_update(k: &KnowledgeSet, payload: &Payload) -> Result<UpdateOutcome> {
    let Payload::Bm(p) = payload else {
        return Err(wrong_payload(AlgorithmKind::Bm, payload));
    };
    let n = k.n;
    let d = k.dim();
    let mine = own_lattice(k)?;
    let before = lattice_sq_error(mine);
    let mut next = k.clone();

    if mine.is_full() {
        // Consensus is absorbing.
        return Ok(UpdateOutcome {
            knowledge: next,
            error_drop: 0.0,
            case: CaseTag::BmTerminal,
        });
    }

    let case = match p {
        BmPayload::Terminal { estimate } => {
            check_dim("estimate", estimate, d)?;
            next.normal = Some(NormalEstimate::Lattice(Support::full(n)));
            next.estimate = estimate.clone();
            next.stored_initials.clear();
            next.own_initial = None;
            CaseTag::BmTerminal
        }
        BmPayload::Flood { normal, initials } => {
            check_support(normal, n)?;
            for (&l, s) in initials {
                if l >= n {
                    return Err(Error::MalformedPayload(format!(
                        "initial vector for node {} outside 1..{n}",
                        l + 1
                    )));
                }
                check_dim("initial vector", s, d)?;
                if !normal.contains(l) {
                    return Err(Error::MalformedPayload(format!(
                        "initial vector for node {} not covered by the sender's estimate",
                        l + 1
                    )));
                }
            }
            let union = mine.union(normal);
            for (&l, s) in initials {
                next.stored_initials.entry(l).or_insert_with(|| s.clone());
            }
            if union.is_full() {
                next.estimate =
                    mean_in_order(next.stored_initials.values().map(Vec::as_slice), n, d);
                next.stored_initials.clear();
                next.own_initial = None;
                next.normal = Some(NormalEstimate::Lattice(union));
                CaseTag::BmComplete
            } else {
                next.estimate =
                    mean_in_order(next.stored_initials.values().map(Vec::as_slice), n, d);
                next.normal = Some(NormalEstimate::Lattice(union));
                CaseTag::BmMerge
            }
        }
    };
    let after = lattice_sq_error(next.lattice().expect("lattice estimate"));
    Ok(UpdateOutcome {
        knowledge: next,
        error_drop: before - after,
        case,
    })
}
