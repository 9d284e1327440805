//! Distributed averaging: project the goal vector onto
//! `span{v_i, v_j, e_i}` and apply the same coefficients to the estimates.

use super::{check_dim, wrong_payload, CaseTag, Payload, UpdateOutcome};
use crate::error::{Error, Result};
use crate::types::{AlgorithmKind, Goal, KnowledgeSet, NormalEstimate};

/// Relative threshold on squared residual norms for declaring a column
/// dependent. Residuals are accurate to a few ulps of the column norm, so
/// directions down to 1e-10 of the largest column are still resolved.
const PIVOT_TOL: f64 = 1e-20;

pub fn da_signal(k: &KnowledgeSet) -> Payload {
    let normal = k
        .normal
        .as_ref()
        .map(NormalEstimate::to_dense)
        .unwrap_or_default();
    Payload::Da {
        normal,
        estimate: k.estimate.clone(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Coefficients of the orthogonal projection of `target` onto the span of
/// `cols`, all vectors of the same length.
///
/// Columns are orthogonalized against each other with re-orthogonalized
/// Gram-Schmidt, largest residual first. A column whose squared residual
/// falls below `PIVOT_TOL` times the largest squared column norm counts as
/// dependent and receives a zero coefficient. Returns the coefficients and
/// the number of independent columns.
pub fn project_onto_span(cols: [&[f64]; 3], target: &[f64]) -> ([f64; 3], usize) {
    let scale = cols.iter().map(|c| dot(c, c)).fold(0.0, f64::max);
    let tol = PIVOT_TOL * scale;
    let mut resid: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(3);
    let mut chosen: Vec<usize> = Vec::with_capacity(3);
    let mut remaining: Vec<usize> = vec![0, 1, 2];
    while !remaining.is_empty() {
        let norms: Vec<f64> = remaining
            .iter()
            .map(|&c| dot(&resid[c], &resid[c]))
            .collect();
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| norms[a.0].total_cmp(&norms[b.0]).then(b.1.cmp(a.1)))
            .expect("non-empty");
        let pivot = norms[pos];
        if pivot.is_nan() || pivot <= tol {
            break;
        }
        remaining.remove(pos);
        let mut u = std::mem::take(&mut resid[p]);
        for qk in &q {
            let h = dot(qk, &u);
            u.iter_mut().zip(qk).for_each(|(x, y)| *x -= h * y);
        }
        let len = dot(&u, &u).sqrt();
        u.iter_mut().for_each(|x| *x /= len);
        for &c in &remaining {
            let h = dot(&u, &resid[c]);
            resid[c].iter_mut().zip(&u).for_each(|(x, y)| *x -= h * y);
        }
        q.push(u);
        chosen.push(p);
    }
    // Back-substitute R c = Q' target with R[k][m] = q_k . a_{chosen m}.
    let y: Vec<f64> = q.iter().map(|qk| dot(qk, target)).collect();
    let mut coef = [0.0; 3];
    for m in (0..chosen.len()).rev() {
        let mut acc = y[m];
        for l in m + 1..chosen.len() {
            acc -= dot(&q[m], cols[chosen[l]]) * coef[chosen[l]];
        }
        coef[chosen[m]] = acc / dot(&q[m], cols[chosen[m]]);
    }
    (coef, chosen.len())
}

pub fn da_update(k: &KnowledgeSet, payload: &Payload, goal: &Goal) -> Result<UpdateOutcome> {
    let Payload::Da {
        normal: vj,
        estimate: sj,
    } = payload
    else {
        return Err(wrong_payload(AlgorithmKind::Da, payload));
    };
    let n = k.n;
    let i = k.node;
    let d = k.dim();
    check_dim("normal estimate", vj, n)?;
    check_dim("estimate", sj, d)?;
    let Some(NormalEstimate::Dense(vi)) = &k.normal else {
        return Err(Error::MalformedPayload(
            "receiver has no dense normal estimate".into(),
        ));
    };
    let s_own = k
        .own_initial
        .as_ref()
        .ok_or_else(|| Error::MalformedPayload("receiver lost its initial vector".into()))?;
    let w = goal.vector(n);

    // Project the residual w - v_i, which is small near consensus, and add
    // v_i back; v_i lies in the span so the result is the same projection.
    let mut ei = vec![0.0; n];
    ei[i] = 1.0;
    let gap: Vec<f64> = w.iter().zip(vi).map(|(a, b)| a - b).collect();
    let (c, rank) = project_onto_span([vi, vj, &ei], &gap);

    let mut v = vi.clone();
    for l in 0..n {
        v[l] += c[0] * vi[l] + c[1] * vj[l];
    }
    v[i] += c[2];
    let estimate: Vec<f64> = (0..d)
        .map(|q| k.estimate[q] + c[0] * k.estimate[q] + c[1] * sj[q] + c[2] * s_own[q])
        .collect();

    let before = sq_dist(vi, &w);
    let after = sq_dist(&v, &w);
    let mut next = k.clone();
    next.normal = Some(NormalEstimate::Dense(v));
    next.estimate = estimate;
    let case = match rank {
        0 | 1 => CaseTag::DaRank1,
        2 => CaseTag::DaRank2,
        _ => CaseTag::DaRank3,
    };
    Ok(UpdateOutcome {
        knowledge: next,
        error_drop: before - after,
        case,
    })
}
