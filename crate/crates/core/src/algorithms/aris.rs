//! ARIS: averaging through exponential min-sketches.
//!
//! The minimum over nodes of `Exp(s_l)` samples is `Exp(sum_l s_l)`, so the
//! mean of `r` such minima estimates `1 / sum_l s_l`. Each node tracks which
//! nodes its sketch already covers (the indicator) and, once coverage is
//! complete, folds `(1 / mean) / n` into a running average and starts a new
//! round with fresh samples.

use super::{
    check_dim, check_support, sample_sketch, wrong_payload, CaseTag, Payload, UpdateOutcome,
};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::types::{AlgorithmKind, KnowledgeSet, Support};

pub fn aris_signal(k: &KnowledgeSet) -> Payload {
    let a = k.aris.as_ref().expect("ARIS knowledge set");
    Payload::Aris {
        counter: a.counter,
        estimate: k.estimate.clone(),
        sketch: a.sketch.clone(),
        indicator: a.indicator.clone(),
    }
}

fn elementwise_min(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).collect()
}

/// Row means of a row-major `d x r` sketch.
fn row_means(w: &[f64], r: usize) -> Vec<f64> {
    w.chunks(r)
        .map(|row| row.iter().sum::<f64>() / r as f64)
        .collect()
}

/// `(k * s + (1 / mean) / n) / (k + 1)` per component.
fn running_average(k: u64, s: &[f64], mean: &[f64], n: usize) -> Result<Vec<f64>> {
    let kf = k as f64;
    s.iter()
        .zip(mean)
        .map(|(si, m)| {
            if m.is_nan() || *m <= 0.0 {
                return Err(Error::Domain(format!("sketch mean {m} is not positive")));
            }
            Ok((kf * si + (1.0 / m) / n as f64) / (kf + 1.0))
        })
        .collect()
}

/// Apply an ARIS payload. `rng` is the receiver's own stream; fresh samples
/// use the receiver's initial vector as rates.
pub fn aris_update(
    k: &KnowledgeSet,
    payload: &Payload,
    rng: &mut SplitMix64,
) -> Result<UpdateOutcome> {
    let Payload::Aris {
        counter: kj,
        estimate: sj,
        sketch: wj,
        indicator: ind_j,
    } = payload
    else {
        return Err(wrong_payload(AlgorithmKind::Aris, payload));
    };
    let n = k.n;
    let i = k.node;
    let state = k
        .aris
        .as_ref()
        .ok_or_else(|| Error::MalformedPayload("receiver has no ARIS state".into()))?;
    let r = state.r;
    check_support(ind_j, n)?;
    check_dim("estimate", sj, k.dim())?;
    check_dim("sketch", wj, k.dim() * r)?;
    let rates = k
        .own_initial
        .as_ref()
        .ok_or_else(|| Error::MalformedPayload("receiver lost its initial vector".into()))?;
    let ki = state.counter;
    let kj = *kj;

    let mut next = k.clone();
    let a = next.aris.as_mut().expect("ARIS state");

    let case = if kj < ki {
        CaseTag::ArisStale
    } else if kj == ki {
        let merged = state.indicator.union(ind_j);
        let both = elementwise_min(wj, &state.sketch);
        if merged.is_full() {
            next.estimate = running_average(ki, &k.estimate, &row_means(&both, r), n)?;
            a.counter = ki + 1;
            a.indicator = Support::singleton(n, i);
            a.sketch = sample_sketch(rates, r, rng);
            CaseTag::ArisRoundComplete
        } else {
            a.indicator = merged;
            a.sketch = both;
            CaseTag::ArisMerge
        }
    } else {
        // The sender is ahead: restart from a fresh local sample for its round.
        let merged = Support::singleton(n, i).union(ind_j);
        let fresh = sample_sketch(rates, r, rng);
        let joined = elementwise_min(wj, &fresh);
        if merged.is_full() {
            next.estimate = running_average(kj, sj, &row_means(&joined, r), n)?;
            a.counter = kj + 1;
            a.indicator = Support::singleton(n, i);
            a.sketch = sample_sketch(rates, r, rng);
            CaseTag::ArisCatchUpComplete
        } else {
            next.estimate = sj.clone();
            a.counter = kj;
            a.indicator = merged;
            a.sketch = joined;
            CaseTag::ArisCatchUp
        }
    };
    Ok(UpdateOutcome {
        knowledge: next,
        error_drop: 0.0,
        case,
    })
}
