//! Communication sequence generators: the randomized pairwise protocol and
//! the unit-delay double cycle.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::types::{CommSequence, Signal};

/// Receive-time offset separating signals delivered in the same step.
pub const TIE_ETA: f64 = 1.0 / (1u64 << 20) as f64;

/// Transit time of each signal, in step units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DelayModel {
    Instantaneous,
    Fixed(f64),
    Uniform(f64, f64),
}

impl DelayModel {
    fn validate(self) -> Result<()> {
        let ok = match self {
            DelayModel::Instantaneous => true,
            DelayModel::Fixed(d) => d.is_finite() && d >= 0.0,
            DelayModel::Uniform(lo, hi) => {
                lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid delay model {self:?}")))
        }
    }

    fn draw(self, rng: &mut SplitMix64) -> f64 {
        match self {
            DelayModel::Instantaneous => 0.0,
            DelayModel::Fixed(d) => d,
            DelayModel::Uniform(lo, hi) => rng.uniform(lo, hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomProtocolConfig {
    pub n: usize,
    /// Probability that the chosen receiver answers in the same step.
    pub p: f64,
    /// Number of steps.
    pub horizon: usize,
    pub seed: u64,
    pub delay: DelayModel,
}

impl RandomProtocolConfig {
    pub fn new(n: usize, p: f64, horizon: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            horizon,
            seed,
            delay: DelayModel::Instantaneous,
        }
    }

    pub fn with_delay(mut self, delay: DelayModel) -> Self {
        self.delay = delay;
        self
    }
}

/// Randomized pairwise protocol.
///
/// Step `k = 1..=horizon` draws an ordered pair `(i, j)`, `i != j`, from a
/// single `below(n(n-1))` call, sends `i -> j` at time `k`, then draws
/// `u = next_f64()` and, if `u < p`, sends `j -> i` at time `k` as well.
/// Delays (if random) are drawn after `u`, forward signal first. The signal
/// of rank `m` within a step is received `m * TIE_ETA` later than its delay
/// alone implies. Under instantaneous delay the two halves of an answered
/// step are tagged as one bidirectional exchange.
pub fn gen_random_protocol(cfg: &RandomProtocolConfig) -> Result<CommSequence> {
    let n = cfg.n;
    if n < 2 {
        return Err(Error::Config(format!(
            "random protocol needs n >= 2, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(Error::Config(format!(
            "back-signal probability {} outside [0, 1]",
            cfg.p
        )));
    }
    cfg.delay.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let pairs = (n * (n - 1)) as u64;
    let bidir = cfg.delay == DelayModel::Instantaneous;
    let mut signals = Vec::with_capacity(cfg.horizon * 2);
    for k in 1..=cfg.horizon {
        let t = k as f64;
        let idx = rng.below(pairs) as usize;
        let i = idx / (n - 1);
        let jj = idx % (n - 1);
        let j = if jj >= i { jj + 1 } else { jj };
        let answered = rng.next_f64() < cfg.p;
        let d0 = cfg.delay.draw(&mut rng);
        signals.push(Signal {
            bidir: bidir && answered,
            ..Signal::new(i, j, t, t + d0)
        });
        if answered {
            let d1 = cfg.delay.draw(&mut rng);
            signals.push(Signal {
                bidir,
                ..Signal::new(j, i, t, t + d1 + TIE_ETA)
            });
        }
    }
    CommSequence::new(n, signals)
}

/// The unit-delay double cycle on `n` nodes: a ring `1 -> 2 -> ... -> n -> 1`
/// followed by a second pass `1 -> 2 -> ... -> n-1`, each signal sent one
/// step after the previous reception.
pub fn gen_double_cycle(n: usize) -> Result<CommSequence> {
    if n < 2 {
        return Err(Error::Config(format!("double cycle needs n >= 2, got {n}")));
    }
    let at = |q: usize| (2.0 * (q as f64 - 1.0), 2.0 * q as f64 - 1.0);
    let mut signals = Vec::with_capacity(2 * (n - 1));
    for q in 1..=2 * (n - 1) {
        let (t0, t1) = at(q);
        // 1-based sender/receiver from the three index ranges.
        let (s, r) = match q {
            q if q < n => (q, q + 1),
            q if q == n => (n, 1),
            q => (q - n, q - n + 1),
        };
        signals.push(Signal::new(s - 1, r - 1, t0, t1));
    }
    CommSequence::new(n, signals)
}
