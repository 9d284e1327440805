//! Discrete-event simulation of a communication sequence.
//!
//! Each signal contributes two timeline entries: a snapshot of the sender at
//! `t_send` and an application at the receiver at `t_recv`. Entries are
//! ordered by time, snapshots before applications at equal times, then by
//! signal index. A payload therefore reflects every reception at the sender
//! strictly before the send time.

use crate::algorithms::{
    gossip_update, init_knowledge, signal, update, AlgorithmSpec, CaseTag, Payload,
};
use crate::error::{Error, Result};
use crate::metrics::{measure_costs, node_consensus_error, CostLedger};
use crate::rng::SplitMix64;
use crate::types::{
    AlgorithmKind, CommSequence, KnowledgeSet, NormalEstimate, ProblemInstance, EPS_CONS, EPS_NORM,
};

/// Stream id of the shared DDA switching stream.
pub const SWITCH_STREAM: u64 = u64::MAX;

/// One row of the recorded time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// Number of signals applied so far.
    pub event: usize,
    pub time: f64,
    pub node_errors: Vec<f64>,
    pub network_error: f64,
    pub cumulative_signals: usize,
    pub cumulative_omega: u64,
}

impl Sample {
    pub fn max_node_error(&self) -> f64 {
        self.node_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Smallest and largest costs seen over events where neither end had reached
/// consensus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostExtremes {
    pub min: CostLedger,
    pub max: CostLedger,
}

impl CostExtremes {
    fn absorb(slot: &mut Option<CostExtremes>, c: CostLedger) {
        match slot {
            None => *slot = Some(CostExtremes { min: c, max: c }),
            Some(e) => {
                e.min = CostLedger {
                    phi: e.min.phi.min(c.phi),
                    rho: e.min.rho.min(c.rho),
                    omega: e.min.omega.min(c.omega),
                };
                e.max = CostLedger {
                    phi: e.max.phi.max(c.phi),
                    rho: e.max.rho.max(c.rho),
                    omega: e.max.omega.max(c.omega),
                };
            }
        }
    }
}

/// When a node first reached consensus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attainment {
    pub time: f64,
    /// 1-based index of the applied signal, 0 if consensus held at start.
    pub event: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub kind: AlgorithmKind,
    pub sample_every: usize,
    pub samples: Vec<Sample>,
    /// Per node; `None` if never reached.
    pub consensus: Vec<Option<Attainment>>,
    pub final_states: Vec<KnowledgeSet>,
    /// Sum of per-event decreases of the squared normal error.
    pub total_error_drop: f64,
    pub costs: Option<CostExtremes>,
}

impl RunRecord {
    /// Time at which every node had reached consensus.
    pub fn network_consensus(&self) -> Option<Attainment> {
        let mut last: Option<Attainment> = None;
        for a in &self.consensus {
            let a = (*a)?;
            if last.is_none_or(|l| a.event > l.event) {
                last = Some(a);
            }
        }
        last
    }
}

/// Whether `k` has reached consensus under `kind`.
pub fn at_consensus(k: &KnowledgeSet, kind: AlgorithmKind, target: &[f64], goal: &[f64]) -> bool {
    match (&k.normal, kind) {
        (Some(NormalEstimate::Lattice(s)), _) => s.is_full(),
        (Some(NormalEstimate::Dense(v)), _) => {
            v.iter().zip(goal).all(|(x, w)| (x - w).abs() <= EPS_NORM)
        }
        _ => node_consensus_error(k, target) <= EPS_CONS,
    }
}

/// Stepwise simulator. Most callers want [`run`].
#[derive(Clone, Debug)]
pub struct Simulator<'a> {
    spec: &'a AlgorithmSpec,
    seq: &'a CommSequence,
    states: Vec<KnowledgeSet>,
    rngs: Vec<SplitMix64>,
    switch: SplitMix64,
    pending: Vec<Option<Payload>>,
    timeline: Vec<(f64, bool, usize)>,
    cursor: usize,
    applied: usize,
    target: Vec<f64>,
    goal: Vec<f64>,
}

/// What one applied signal did.
#[derive(Clone, Debug, PartialEq)]
pub struct Applied {
    pub signal: usize,
    pub time: f64,
    pub receiver: usize,
    pub case: CaseTag,
    pub error_drop: f64,
    pub cost: CostLedger,
    /// Both ends were short of consensus before the update.
    pub pre_consensus: bool,
    /// Second receiver of an atomic exchange.
    pub partner: Option<usize>,
}

impl<'a> Simulator<'a> {
    pub fn new(
        inst: &ProblemInstance,
        spec: &'a AlgorithmSpec,
        seq: &'a CommSequence,
    ) -> Result<Self> {
        spec.validate(inst)?;
        if seq.n() != inst.n {
            return Err(Error::Trace(format!(
                "sequence is for {} nodes, instance has {}",
                seq.n(),
                inst.n
            )));
        }
        let mut rngs: Vec<SplitMix64> = (0..inst.n)
            .map(|i| SplitMix64::stream(spec.seed, i as u64))
            .collect();
        let states = (0..inst.n)
            .map(|i| init_knowledge(inst, i, spec, &mut rngs[i]))
            .collect::<Result<Vec<_>>>()?;
        let mut timeline: Vec<(f64, bool, usize)> = Vec::with_capacity(2 * seq.len());
        for (q, s) in seq.signals().iter().enumerate() {
            timeline.push((s.t_send, false, q));
            timeline.push((s.t_recv, true, q));
        }
        timeline.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        Ok(Self {
            spec,
            seq,
            states,
            rngs,
            switch: SplitMix64::stream(spec.seed, SWITCH_STREAM),
            pending: vec![None; seq.len()],
            timeline,
            cursor: 0,
            applied: 0,
            target: inst.target(&spec.goal),
            goal: spec.goal.vector(inst.n),
        })
    }

    pub fn states(&self) -> &[KnowledgeSet] {
        &self.states
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn goal(&self) -> &[f64] {
        &self.goal
    }

    /// Signals applied so far (both halves of an exchange count).
    pub fn applied(&self) -> usize {
        self.applied
    }

    pub fn node_at_consensus(&self, i: usize) -> bool {
        at_consensus(&self.states[i], self.spec.kind, &self.target, &self.goal)
    }

    fn payload_at_consensus(&self, p: &Payload) -> bool {
        match p {
            Payload::Bm(crate::algorithms::BmPayload::Terminal { .. }) => true,
            Payload::Bm(crate::algorithms::BmPayload::Flood { normal, .. })
            | Payload::Dda { normal, .. } => normal.is_full(),
            Payload::Oh(crate::algorithms::OhPayload::Average { .. }) => true,
            _ => false,
        }
    }

    /// Advance to the next application. Returns `None` when the sequence is
    /// exhausted.
    pub fn step(&mut self) -> Result<Option<Applied>> {
        while self.cursor < self.timeline.len() {
            let (time, is_recv, q) = self.timeline[self.cursor];
            self.cursor += 1;
            let s = &self.seq.signals()[q];
            if !is_recv {
                self.pending[q] = Some(signal(&self.states[s.sender], self.spec.kind));
                continue;
            }
            let Some(payload) = self.pending[q].take() else {
                // Second half of an exchange already applied.
                continue;
            };
            let (i, j) = (s.receiver, s.sender);
            let pre_consensus = !self.node_at_consensus(i) && !self.payload_at_consensus(&payload);
            let cost = measure_costs(&self.states[i], &payload, self.spec.kind);
            let partner = self
                .seq
                .partner(q)
                .filter(|_| self.spec.kind == AlgorithmKind::Gossip);
            if let Some(p) = partner {
                let back = self.pending[p]
                    .take()
                    .expect("both halves are sent before either is received");
                let cost_back = measure_costs(&self.states[j], &back, self.spec.kind);
                let (a, b) = gossip_update(&self.states[i], &self.states[j], true);
                self.states[i] = a;
                self.states[j] = b;
                self.applied += 2;
                return Ok(Some(Applied {
                    signal: q,
                    time,
                    receiver: i,
                    case: CaseTag::GossipMidpoint,
                    error_drop: 0.0,
                    cost: CostLedger {
                        phi: cost.phi + cost_back.phi,
                        rho: cost.rho + cost_back.rho,
                        omega: cost.omega + cost_back.omega,
                    },
                    pre_consensus,
                    partner: Some(j),
                }));
            }
            let out = update(
                &self.states[i],
                &payload,
                self.spec,
                &mut self.rngs[i],
                &mut self.switch,
            )?;
            self.states[i] = out.knowledge;
            self.applied += 1;
            return Ok(Some(Applied {
                signal: q,
                time,
                receiver: i,
                case: out.case,
                error_drop: out.error_drop,
                cost,
                pre_consensus,
                partner: None,
            }));
        }
        Ok(None)
    }

    fn sample(&self, time: f64, cumulative_omega: u64) -> Sample {
        let node_errors: Vec<f64> = self
            .states
            .iter()
            .map(|k| node_consensus_error(k, &self.target))
            .collect();
        Sample {
            event: self.applied,
            time,
            network_error: node_errors.iter().sum(),
            node_errors,
            cumulative_signals: self.applied,
            cumulative_omega,
        }
    }

    pub fn into_states(self) -> Vec<KnowledgeSet> {
        self.states
    }
}

/// Run `seq` to completion, sampling every `sample_every` applied signals and
/// whenever a node first reaches consensus.
pub fn run(
    inst: &ProblemInstance,
    spec: &AlgorithmSpec,
    seq: &CommSequence,
    sample_every: usize,
) -> Result<RunRecord> {
    if sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".into()));
    }
    let mut sim = Simulator::new(inst, spec, seq)?;
    let start = seq.signals().first().map_or(0.0, |s| s.t_send.min(0.0));
    let mut samples = vec![sim.sample(start, 0)];
    let mut consensus: Vec<Option<Attainment>> = (0..inst.n)
        .map(|i| {
            sim.node_at_consensus(i).then_some(Attainment {
                time: start,
                event: 0,
            })
        })
        .collect();
    let mut omega = 0u64;
    let mut drop = 0.0;
    let mut costs = None;
    let mut since = 0usize;
    while let Some(a) = sim.step()? {
        omega += a.cost.omega;
        drop += a.error_drop;
        if a.pre_consensus && a.partner.is_none() {
            CostExtremes::absorb(&mut costs, a.cost);
        }
        since += if a.partner.is_some() { 2 } else { 1 };
        let mut reached = false;
        for node in std::iter::once(a.receiver).chain(a.partner) {
            if consensus[node].is_none() && sim.node_at_consensus(node) {
                consensus[node] = Some(Attainment {
                    time: a.time,
                    event: sim.applied(),
                });
                reached = true;
            }
        }
        if since >= sample_every || reached {
            since = 0;
            let s = sim.sample(a.time, omega);
            match samples.last_mut() {
                Some(last) if last.time == s.time => *last = s,
                _ => samples.push(s),
            }
        }
    }
    // Always close the series with the final state.
    if samples.last().is_some_and(|l| l.event != sim.applied()) {
        let t = seq.end_time().unwrap_or(start);
        let s = sim.sample(t, omega);
        match samples.last_mut() {
            Some(last) if last.time == s.time => *last = s,
            _ => samples.push(s),
        }
    }
    Ok(RunRecord {
        kind: spec.kind,
        sample_every,
        samples,
        consensus,
        final_states: sim.into_states(),
        total_error_drop: drop,
        costs,
    })
}

/// Re-run and compare the sampled series and final states bit for bit.
pub fn replay_check(
    record: &RunRecord,
    seq: &CommSequence,
    inst: &ProblemInstance,
    spec: &AlgorithmSpec,
) -> bool {
    let Ok(again) = run(inst, spec, seq, record.sample_every) else {
        return false;
    };
    let bits = |s: &Sample| {
        let mut v: Vec<u64> = vec![s.event as u64, s.time.to_bits(), s.network_error.to_bits()];
        v.extend(s.node_errors.iter().map(|x| x.to_bits()));
        v.push(s.cumulative_signals as u64);
        v.push(s.cumulative_omega);
        v
    };
    again.samples.len() == record.samples.len()
        && again
            .samples
            .iter()
            .zip(&record.samples)
            .all(|(a, b)| bits(a) == bits(b))
        && again.final_states == record.final_states
        && again.consensus == record.consensus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::DdaVariant;
    use crate::generators::{gen_double_cycle, gen_random_protocol, RandomProtocolConfig};

    #[test]
    fn empty_sequence_leaves_initial_states() {
        let inst = ProblemInstance::index_initials(4, 2).unwrap();
        for kind in AlgorithmKind::ALL {
            let spec = AlgorithmSpec::new(kind).with_aris_r(3);
            let rec = run(&inst, &spec, &CommSequence::empty(4), 1).unwrap();
            let fresh = Simulator::new(&inst, &spec, &CommSequence::empty(4))
                .unwrap()
                .into_states();
            assert_eq!(rec.final_states, fresh);
            assert_eq!(rec.samples.len(), 1);
        }
    }

    #[test]
    fn double_cycle_consensus_times_match() {
        for n in 3..7 {
            let inst = ProblemInstance::index_initials(n, 1).unwrap();
            let seq = gen_double_cycle(n).unwrap();
            let t: Vec<_> = [AlgorithmKind::Bm, AlgorithmKind::Da, AlgorithmKind::Dda]
                .iter()
                .map(|&k| {
                    run(&inst, &AlgorithmSpec::new(k), &seq, 1)
                        .unwrap()
                        .network_consensus()
                        .unwrap()
                })
                .collect();
            assert!(t
                .iter()
                .all(|a| a.time == (4 * n - 5) as f64 && a.event == t[0].event));
            let oh = run(&inst, &AlgorithmSpec::new(AlgorithmKind::Oh), &seq, 1).unwrap();
            assert!(oh.consensus.iter().any(Option::is_none));
        }
    }

    #[test]
    fn snapshots_precede_receptions() {
        // 1 -> 2 arrives at t=1 while 2 -> 3 leaves at t=1: node 3 must not see node 1.
        let seq = CommSequence::new(
            3,
            vec![
                crate::types::Signal::new(0, 1, 0.0, 1.0),
                crate::types::Signal::new(1, 2, 1.0, 2.0),
            ],
        )
        .unwrap();
        let inst = ProblemInstance::index_initials(3, 1).unwrap();
        let rec = run(&inst, &AlgorithmSpec::new(AlgorithmKind::Bm), &seq, 1).unwrap();
        assert_eq!(rec.final_states[2].lattice().unwrap().count(), 2);
    }

    #[test]
    fn samples_strictly_increase_and_replay() {
        let inst = ProblemInstance::index_initials(6, 1).unwrap();
        let seq = gen_random_protocol(&RandomProtocolConfig::new(6, 0.5, 300, 4)).unwrap();
        for kind in AlgorithmKind::ALL {
            let spec = AlgorithmSpec::new(kind)
                .with_aris_r(8)
                .with_seed(5)
                .with_dda_variant(DdaVariant::Randomized { p: 0.5 });
            let rec = run(&inst, &spec, &seq, 7).unwrap();
            assert!(rec.samples.windows(2).all(|w| w[0].time < w[1].time));
            assert!(replay_check(&rec, &seq, &inst, &spec));
            let mut bad = rec.clone();
            bad.samples[1].network_error += 1e-12;
            assert!(!replay_check(&bad, &seq, &inst, &spec));
        }
    }

    #[test]
    fn aris_seed_changes_record() {
        let inst = ProblemInstance::index_initials(4, 1).unwrap();
        let seq = gen_random_protocol(&RandomProtocolConfig::new(4, 1.0, 200, 2)).unwrap();
        let spec = AlgorithmSpec::new(AlgorithmKind::Aris)
            .with_aris_r(6)
            .with_seed(1);
        let rec = run(&inst, &spec, &seq, 10).unwrap();
        assert!(!replay_check(&rec, &seq, &inst, &spec.clone().with_seed(2)));
    }

    #[test]
    fn mismatched_sequence_is_rejected() {
        let inst = ProblemInstance::index_initials(4, 1).unwrap();
        let seq = gen_double_cycle(3).unwrap();
        assert!(matches!(
            run(&inst, &AlgorithmSpec::new(AlgorithmKind::Bm), &seq, 1),
            Err(Error::Trace(_))
        ));
    }
}
