//! Discretized distributed averaging: the best combination of `v_i`, `v_j`
//! and `e_i` that stays on the `{0, 1/n}` lattice.

use super::{
    check_dim, check_support, lattice_sq_error, own_lattice, wrong_payload, CaseTag, Payload,
    UpdateOutcome,
};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::types::{AlgorithmKind, KnowledgeSet, NormalEstimate};

/// Tie handling when both supports (outside `i`) overlap and have equal size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DdaVariant {
    /// Keep the receiver's estimate.
    Primary,
    /// Adopt the sender's estimate.
    Alternative,
    /// Per event, primary with probability `p`, alternative otherwise.
    Randomized { p: f64 },
}

pub fn dda_signal(k: &KnowledgeSet) -> Payload {
    let normal = k
        .lattice()
        .cloned()
        .unwrap_or_else(|| crate::types::Support::singleton(k.n, k.node));
    Payload::Dda {
        normal,
        estimate: k.estimate.clone(),
    }
}

/// Apply a DDA payload. `switch` is only drawn from by the randomized variant
/// (exactly once per call, so the stream position does not depend on data).
pub fn dda_update(
    k: &KnowledgeSet,
    payload: &Payload,
    variant: DdaVariant,
    switch: &mut SplitMix64,
) -> Result<UpdateOutcome> {
    let Payload::Dda {
        normal: vj,
        estimate: sj,
    } = payload
    else {
        return Err(wrong_payload(AlgorithmKind::Dda, payload));
    };
    let n = k.n;
    let i = k.node;
    check_support(vj, n)?;
    check_dim("estimate", sj, k.dim())?;
    let vi = own_lattice(k)?;
    let s_own = k
        .own_initial
        .as_ref()
        .ok_or_else(|| Error::MalformedPayload("receiver lost its initial vector".into()))?;

    let primary = match variant {
        DdaVariant::Primary => true,
        DdaVariant::Alternative => false,
        DdaVariant::Randomized { p } => switch.next_f64() < p,
    };

    let vji = vj.contains(i);
    let mut vi_rest = vi.clone();
    vi_rest.remove(i);
    let mut vj_rest = vj.clone();
    vj_rest.remove(i);
    let overlap = vi_rest.overlap(&vj_rest);
    let (ni, nj) = (vi_rest.count(), vj_rest.count());
    let inv_n = 1.0 / n as f64;

    let mut next = k.clone();
    let case = if overlap == 0 {
        // (a, b, c) = (1, 1, -v_ji)
        let c = if vji { -inv_n } else { 0.0 };
        next.normal = Some(NormalEstimate::Lattice(vi.union(vj)));
        next.estimate = combine(&k.estimate, sj, s_own, 1.0, 1.0, c);
        CaseTag::DdaUnion
    } else if ni < nj || (ni == nj && !primary && vi_rest != vj_rest) {
        // (a, b, c) = (0, 1, 1/n - v_ji)
        let c = if vji { 0.0 } else { inv_n };
        let mut v = vj.clone();
        v.insert(i);
        next.normal = Some(NormalEstimate::Lattice(v));
        next.estimate = combine(&k.estimate, sj, s_own, 0.0, 1.0, c);
        if ni < nj {
            CaseTag::DdaAdopt
        } else {
            CaseTag::DdaTieAdopt
        }
    } else {
        CaseTag::DdaKeep
    };
    let drop = lattice_sq_error(vi) - lattice_sq_error(next.lattice().expect("lattice estimate"));
    Ok(UpdateOutcome {
        knowledge: next,
        error_drop: drop,
        case,
    })
}

fn combine(si: &[f64], sj: &[f64], s0: &[f64], a: f64, b: f64, c: f64) -> Vec<f64> {
    si.iter()
        .zip(sj)
        .zip(s0)
        .map(|((x, y), z)| a * x + b * y + c * z)
        .collect()
}
