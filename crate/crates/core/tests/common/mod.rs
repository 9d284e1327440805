//! Shared scenario builders for the integration tests.

#![allow(dead_code)]

use consensus_core::connectivity::{check_svcc, check_svsc, Window};
use consensus_core::generators::{gen_random_protocol, DelayModel, RandomProtocolConfig};
use consensus_core::{make_instance, CommSequence, ProblemInstance, Signal};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Instance with i.i.d. uniform components in `[lo, hi)`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    lo: f64,
    hi: f64,
) -> ProblemInstance {
    let initials = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(lo..hi)).collect())
        .collect();
    make_instance(n, d, initials).unwrap()
}

/// Same instance with node `j`'s initial vector shifted by `delta` in every component.
pub fn perturbed(inst: &ProblemInstance, j: usize, delta: f64) -> ProblemInstance {
    let mut initials = inst.initials.clone();
    initials[j].iter_mut().for_each(|x| *x += delta);
    make_instance(inst.n, inst.d, initials).unwrap()
}

/// Random protocol with uniform delays in `[0, max_delay]`.
pub fn delayed_protocol(
    n: usize,
    p: f64,
    horizon: usize,
    seed: u64,
    max_delay: f64,
) -> CommSequence {
    let cfg = RandomProtocolConfig::new(n, p, horizon, seed)
        .with_delay(DelayModel::Uniform(0.0, max_delay));
    gen_random_protocol(&cfg).unwrap()
}

/// First delayed random protocol, scanning seeds from `seed`, that is
/// strongly connected over its whole span.
pub fn svsc_block(n: usize, horizon: usize, seed: u64) -> CommSequence {
    (seed..)
        .map(|s| delayed_protocol(n, 0.5, horizon, s, 1.5))
        .find(|seq| check_svsc(seq, &Window::all()).holds)
        .unwrap()
}

/// A complete-connectivity block on `[0, len)`: every non-hub node signals
/// the hub, then the hub signals every other node, with `noise` random
/// extra signals interleaved. Each signal occupies its own unit slot.
pub fn svcc_block(rng: &mut ChaCha8Rng, n: usize, noise: usize) -> CommSequence {
    let hub = rng.gen_range(0..n);
    let mut others: Vec<usize> = (0..n).filter(|&j| j != hub).collect();
    others.shuffle(rng);
    let mut inbound: Vec<(usize, usize)> = others.iter().map(|&j| (j, hub)).collect();
    others.shuffle(rng);
    let mut outbound: Vec<(usize, usize)> = others.iter().map(|&j| (hub, j)).collect();
    let random_pair = |rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        (a, b)
    };
    for _ in 0..noise {
        let pair = random_pair(rng);
        if rng.gen_bool(0.5) {
            let at = rng.gen_range(0..=inbound.len());
            inbound.insert(at, pair);
        } else {
            let at = rng.gen_range(0..=outbound.len());
            outbound.insert(at, pair);
        }
    }
    let signals = inbound
        .into_iter()
        .chain(outbound)
        .enumerate()
        .map(|(slot, (s, r))| {
            let t = slot as f64;
            Signal::new(s, r, t, t + rng.gen_range(0.1..0.9))
        })
        .collect();
    let seq = CommSequence::new(n, signals).unwrap();
    assert!(check_svcc(&seq, &Window::all()).is_some());
    seq
}

/// Concatenate blocks so each starts strictly after the previous one ends.
/// Returns the sequence and each block's last receive time.
pub fn concat_blocks(n: usize, blocks: &[CommSequence]) -> (CommSequence, Vec<f64>) {
    let mut seq = CommSequence::empty(n);
    let mut ends = Vec::with_capacity(blocks.len());
    let mut offset = 0.0;
    for b in blocks {
        let first = b
            .signals()
            .iter()
            .map(|s| s.t_send)
            .fold(f64::INFINITY, f64::min);
        let shift = offset + 1.0 - first;
        seq = seq.concat(b, shift).unwrap();
        offset = b.end_time().unwrap() + shift;
        ends.push(offset);
    }
    (seq, ends)
}
