//! Classification of communication sequences: time-respecting paths, single
//! strong and complete connectivity, greedy block partitions, and the
//! condition under which one-hop forwarding succeeds.
//!
//! A path is a chain of signals where each signal after the first is sent
//! strictly after the previous one was received. Equal times do not chain,
//! matching the simulator, which snapshots a sender before applying any
//! reception with the same timestamp.

use crate::types::{CommSequence, Signal};

/// Lower end of a time window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Start {
    /// Signals sent at or after `t`.
    Inclusive(f64),
    /// Signals sent strictly after `t`.
    Exclusive(f64),
}

impl Start {
    fn admits(self, t: f64) -> bool {
        match self {
            Start::Inclusive(s) => t >= s,
            Start::Exclusive(s) => t > s,
        }
    }
}

/// Signals are in a window when sent within its start and received by `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub start: Start,
    pub end: f64,
}

impl Window {
    /// Every signal.
    pub fn all() -> Self {
        Self {
            start: Start::Inclusive(f64::NEG_INFINITY),
            end: f64::INFINITY,
        }
    }

    /// Signals sent at or after `from` and received by `to`.
    pub fn closed(from: f64, to: f64) -> Self {
        Self {
            start: Start::Inclusive(from),
            end: to,
        }
    }

    pub fn contains(&self, s: &Signal) -> bool {
        self.start.admits(s.t_send) && s.t_recv <= self.end
    }
}

/// A time-respecting chain of signals, given by indices into the sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct PathWitness {
    pub src: usize,
    pub dst: usize,
    pub signals: Vec<usize>,
}

impl PathWitness {
    /// Check the chain against `seq` and `window`.
    pub fn is_valid(&self, seq: &CommSequence, window: &Window) -> bool {
        let sig = seq.signals();
        if self.signals.is_empty() || self.signals.iter().any(|&q| q >= sig.len()) {
            return false;
        }
        let first = &sig[self.signals[0]];
        let last = &sig[*self.signals.last().expect("non-empty")];
        if first.sender != self.src || last.receiver != self.dst {
            return false;
        }
        self.signals.iter().all(|&q| window.contains(&sig[q]))
            && self.signals.windows(2).all(|w| {
                let (a, b) = (&sig[w[0]], &sig[w[1]]);
                a.receiver == b.sender && b.t_send > a.t_recv
            })
    }
}

/// Signal indices sorted by send time (ties by index).
fn send_order(seq: &CommSequence) -> Vec<usize> {
    let mut order: Vec<usize> = (0..seq.len()).collect();
    order.sort_by(|&a, &b| {
        seq.signals()[a]
            .t_send
            .total_cmp(&seq.signals()[b].t_send)
            .then(a.cmp(&b))
    });
    order
}

/// Earliest arrival time at every node from `src`, with the signal that
/// achieved it.
struct Arrivals {
    time: Vec<f64>,
    via: Vec<Option<usize>>,
}

fn earliest_arrivals(seq: &CommSequence, order: &[usize], src: usize, window: &Window) -> Arrivals {
    let n = seq.n();
    let mut time = vec![f64::INFINITY; n];
    let mut via = vec![None; n];
    time[src] = f64::NEG_INFINITY;
    let mut reached = 1;
    // Once every node is reached, signals sent after the latest arrival cannot improve anything.
    let mut bound = f64::INFINITY;
    let sig = seq.signals();
    let first = order.partition_point(|&q| !window.start.admits(sig[q].t_send));
    for &q in &order[first..] {
        let s = &sig[q];
        if s.t_send > bound {
            break;
        }
        if s.t_recv > window.end || time[s.sender] >= s.t_send {
            continue;
        }
        if s.t_recv < time[s.receiver] {
            let first_visit = time[s.receiver] == f64::INFINITY;
            time[s.receiver] = s.t_recv;
            via[s.receiver] = Some(q);
            if first_visit {
                reached += 1;
                if reached == n {
                    bound = time.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                }
            }
        }
    }
    Arrivals { time, via }
}

impl Arrivals {
    fn witness(&self, seq: &CommSequence, src: usize, dst: usize) -> Option<PathWitness> {
        if src == dst || self.time[dst] == f64::INFINITY {
            return None;
        }
        let mut chain = Vec::new();
        let mut at = dst;
        while at != src {
            let q = self.via[at]?;
            chain.push(q);
            at = seq.signals()[q].sender;
        }
        chain.reverse();
        Some(PathWitness {
            src,
            dst,
            signals: chain,
        })
    }
}

/// Earliest-arrival path from `src` to `dst` inside `window`.
pub fn find_path(
    seq: &CommSequence,
    src: usize,
    dst: usize,
    window: &Window,
) -> Option<PathWitness> {
    if src == dst || src >= seq.n() || dst >= seq.n() {
        return None;
    }
    let order = send_order(seq);
    earliest_arrivals(seq, &order, src, window).witness(seq, src, dst)
}

/// Outcome of the strong-connectivity check.
#[derive(Clone, Debug, PartialEq)]
pub struct SvscReport {
    pub holds: bool,
    /// Ordered pairs `(src, dst)` with no path.
    pub missing: Vec<(usize, usize)>,
}

/// Every ordered pair of distinct nodes is joined by a path inside `window`.
pub fn check_svsc(seq: &CommSequence, window: &Window) -> SvscReport {
    let order = send_order(seq);
    let mut missing = Vec::new();
    for src in 0..seq.n() {
        let arr = earliest_arrivals(seq, &order, src, window);
        missing.extend(
            (0..seq.n())
                .filter(|&dst| dst != src && arr.time[dst] == f64::INFINITY)
                .map(|dst| (src, dst)),
        );
    }
    SvscReport {
        holds: missing.is_empty(),
        missing,
    }
}

/// A hub that hears from everyone by `split`, then reaches everyone directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hub {
    pub hub: usize,
    pub split: f64,
    /// Receive time of the last outgoing signal needed.
    pub done: f64,
}

/// For each hub candidate, the earliest completion of the star pattern.
fn hub_completion(seq: &CommSequence, window: &Window, hub: usize) -> Option<Hub> {
    let n = seq.n();
    let sig = seq.signals();
    let mut heard = vec![f64::INFINITY; n];
    heard[hub] = f64::NEG_INFINITY;
    for s in sig
        .iter()
        .filter(|s| s.receiver == hub && window.contains(s))
    {
        heard[s.sender] = heard[s.sender].min(s.t_recv);
    }
    let split = heard.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if split == f64::INFINITY {
        return None;
    }
    let split = if n == 1 { f64::NEG_INFINITY } else { split };
    let mut told = vec![f64::INFINITY; n];
    told[hub] = f64::NEG_INFINITY;
    for s in sig
        .iter()
        .filter(|s| s.sender == hub && s.t_send > split && window.contains(s))
    {
        told[s.receiver] = told[s.receiver].min(s.t_recv);
    }
    let done = told.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (done < f64::INFINITY).then_some(Hub { hub, split, done })
}

/// Smallest hub index for which the complete-connectivity pattern holds.
pub fn check_svcc(seq: &CommSequence, window: &Window) -> Option<Hub> {
    (0..seq.n()).find_map(|h| hub_completion(seq, window, h))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Svsc,
    Svcc,
}

/// One block of a greedy partition: the window it occupies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub start: Start,
    pub end: f64,
}

impl Block {
    pub fn window(&self) -> Window {
        Window {
            start: self.start,
            end: self.end,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub blocks: Vec<Block>,
    /// Start of the trailing stretch that never satisfies the condition, if
    /// any signal is sent after the last complete block.
    pub trailing: Option<Start>,
}

impl Partition {
    pub fn count(&self) -> usize {
        self.blocks.len()
    }

    /// The finite stand-in for the infinite-sequence conditions.
    pub fn is_k_fold(&self, k: usize) -> bool {
        self.blocks.len() >= k
    }
}

/// Earliest end time at which the window opened at `start` satisfies `cond`.
fn earliest_end(seq: &CommSequence, order: &[usize], start: Start, cond: Condition) -> Option<f64> {
    let open = Window {
        start,
        end: f64::INFINITY,
    };
    match cond {
        Condition::Svsc => {
            let mut end = f64::NEG_INFINITY;
            for src in 0..seq.n() {
                let arr = earliest_arrivals(seq, order, src, &open);
                for (dst, &t) in arr.time.iter().enumerate() {
                    if dst != src {
                        end = end.max(t);
                    }
                }
                if end == f64::INFINITY {
                    return None;
                }
            }
            Some(end)
        }
        Condition::Svcc => (0..seq.n())
            .filter_map(|h| hub_completion(seq, &open, h))
            .map(|h| h.done)
            .min_by(f64::total_cmp),
    }
}

/// Split `seq` greedily into consecutive minimal blocks satisfying `cond`.
///
/// Each block ends at the earliest receive time that completes the condition;
/// the next block only uses signals sent strictly after that time.
pub fn partition_blocks(seq: &CommSequence, cond: Condition) -> Partition {
    let order = send_order(seq);
    let mut blocks = Vec::new();
    let mut start = Start::Inclusive(f64::NEG_INFINITY);
    if seq.n() < 2 {
        // Every window is trivially connected; report no blocks rather than infinitely many.
        return Partition {
            blocks,
            trailing: None,
        };
    }
    loop {
        match earliest_end(seq, &order, start, cond) {
            Some(end) => {
                blocks.push(Block { start, end });
                start = Start::Exclusive(end);
            }
            None => {
                let any_left = seq.signals().iter().any(|s| start.admits(s.t_send));
                return Partition {
                    blocks,
                    trailing: any_left.then_some(start),
                };
            }
        }
    }
}

/// Outcome of the one-hop forwarding condition.
#[derive(Clone, Debug, PartialEq)]
pub struct OneHopReport {
    pub holds: bool,
    /// Nodes that neither hear directly from everyone nor are reached by a
    /// path leaving such a node after it has heard from everyone.
    pub failing: Vec<usize>,
}

/// Check the condition for one-hop forwarding to reach consensus in `window`:
/// each node either receives a direct signal from every other node, or is
/// reached by a path from some node `l` whose first signal leaves after `l`
/// has received direct signals from all other nodes.
pub fn check_one_hop(seq: &CommSequence, window: &Window) -> OneHopReport {
    let n = seq.n();
    let order = send_order(seq);
    let mut full = vec![f64::INFINITY; n];
    for (l, f) in full.iter_mut().enumerate() {
        let mut heard = vec![f64::INFINITY; n];
        heard[l] = f64::NEG_INFINITY;
        for s in seq
            .signals()
            .iter()
            .filter(|s| s.receiver == l && window.contains(s))
        {
            heard[s.sender] = heard[s.sender].min(s.t_recv);
        }
        *f = heard.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    let mut ok: Vec<bool> = full.iter().map(|t| *t < f64::INFINITY).collect();
    for l in (0..n).filter(|&l| full[l] < f64::INFINITY) {
        let after = Window {
            start: tighter(window.start, full[l]),
            end: window.end,
        };
        let arr = earliest_arrivals(seq, &order, l, &after);
        for (i, t) in arr.time.iter().enumerate() {
            if *t < f64::INFINITY {
                ok[i] = true;
            }
        }
    }
    let failing: Vec<usize> = (0..n).filter(|&i| !ok[i]).collect();
    OneHopReport {
        holds: failing.is_empty(),
        failing,
    }
}

fn tighter(start: Start, after: f64) -> Start {
    match start {
        Start::Inclusive(s) | Start::Exclusive(s) if s > after => start,
        Start::Inclusive(s) if s == after => Start::Exclusive(s),
        _ => Start::Exclusive(after),
    }
}

/// Summary of all checks over the whole sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub svsc: SvscReport,
    pub svcc: Option<Hub>,
    pub ivsc_blocks: Partition,
    pub ivcc_blocks: Partition,
}

pub fn condition_report(seq: &CommSequence) -> ConditionReport {
    let all = Window::all();
    ConditionReport {
        svsc: check_svsc(seq, &all),
        svcc: check_svcc(seq, &all),
        ivsc_blocks: partition_blocks(seq, Condition::Svsc),
        ivcc_blocks: partition_blocks(seq, Condition::Svcc),
    }
}
