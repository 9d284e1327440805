//! Output artifacts: per-run CSV series and the JSON summary.
//!
//! CSV columns, in order:
//! `time,network_error,max_node_error,cumulative_signals,cumulative_omega`.
//! Floats use 17 significant digits (`{:.16e}`) so a series can be compared
//! bit for bit after a round trip.

use std::io::Write;

use consensus_core::connectivity::{ConditionReport, OneHopReport, Partition, Start};
use consensus_core::metrics::CostLedger;
use consensus_core::sim::{Attainment, RunRecord};
use serde::Serialize;

pub const CSV_HEADER: &str =
    "time,network_error,max_node_error,cumulative_signals,cumulative_omega";

pub fn write_csv(mut w: impl Write, rec: &RunRecord) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for s in &rec.samples {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{}",
            s.time,
            s.network_error,
            s.max_node_error(),
            s.cumulative_signals,
            s.cumulative_omega
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AttainmentJson {
    pub time: f64,
    /// 1-based index of the applied signal; 0 when consensus held at start.
    pub event: usize,
}

impl From<Attainment> for AttainmentJson {
    fn from(a: Attainment) -> Self {
        Self {
            time: a.time,
            event: a.event,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CostJson {
    pub phi: u64,
    pub rho: u64,
    pub omega: u64,
}

impl From<CostLedger> for CostJson {
    fn from(c: CostLedger) -> Self {
        Self {
            phi: c.phi,
            rho: c.rho,
            omega: c.omega,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CostRangeJson {
    pub min: CostJson,
    pub max: CostJson,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunJson {
    pub algorithm: String,
    pub sequence: String,
    pub p: Option<f64>,
    pub seed: u64,
    pub csv: String,
    pub signals_applied: usize,
    /// When the last node reached consensus; `null` if some node never did.
    pub consensus: Option<AttainmentJson>,
    /// Entry `k` is node `k + 1`.
    pub node_consensus: Vec<Option<AttainmentJson>>,
    pub final_network_error: f64,
    pub final_max_node_error: f64,
    pub total_omega: u64,
    /// Cost extremes over events where neither end had reached consensus.
    pub cost_extremes: Option<CostRangeJson>,
}

impl RunJson {
    pub fn new(rec: &RunRecord, sequence: &str, p: Option<f64>, seed: u64, csv: String) -> Self {
        let last = rec.samples.last().expect("a run always has a sample");
        RunJson {
            algorithm: rec.kind.name().into(),
            sequence: sequence.into(),
            p,
            seed,
            csv,
            signals_applied: last.cumulative_signals,
            consensus: rec.network_consensus().map(Into::into),
            node_consensus: rec.consensus.iter().map(|a| a.map(Into::into)).collect(),
            final_network_error: last.network_error,
            final_max_node_error: last.max_node_error(),
            total_omega: last.cumulative_omega,
            cost_extremes: rec.costs.map(|c| CostRangeJson {
                min: c.min.into(),
                max: c.max.into(),
            }),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BlockJson {
    /// `null` for an unbounded start.
    pub start: Option<f64>,
    pub start_exclusive: bool,
    pub end: f64,
}

fn start_json(s: Start) -> (Option<f64>, bool) {
    let (t, exclusive) = match s {
        Start::Inclusive(t) => (t, false),
        Start::Exclusive(t) => (t, true),
    };
    (t.is_finite().then_some(t), exclusive)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TrailingJson {
    pub start: Option<f64>,
    pub start_exclusive: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PartitionJson {
    pub count: usize,
    pub blocks: Vec<BlockJson>,
    /// Start of the trailing incomplete stretch, if any.
    pub trailing: Option<TrailingJson>,
}

impl From<&Partition> for PartitionJson {
    fn from(p: &Partition) -> Self {
        let blocks = p
            .blocks
            .iter()
            .map(|b| {
                let (start, start_exclusive) = start_json(b.start);
                BlockJson {
                    start,
                    start_exclusive,
                    end: b.end,
                }
            })
            .collect();
        let trailing = p.trailing.map(|s| {
            let (start, start_exclusive) = start_json(s);
            TrailingJson {
                start,
                start_exclusive,
            }
        });
        PartitionJson {
            count: p.count(),
            blocks,
            trailing,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HubJson {
    pub hub: usize,
    pub split: f64,
    pub done: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConnectivityJson {
    pub sequence: String,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub n: usize,
    pub signals: usize,
    pub svsc: bool,
    /// `[from, to]` pairs with no time-respecting path, 1-based.
    pub svsc_missing: Vec<[usize; 2]>,
    /// Smallest hub completing the star pattern, 1-based.
    pub svcc_hub: Option<HubJson>,
    pub ivsc_blocks: PartitionJson,
    pub ivcc_blocks: PartitionJson,
    pub one_hop: bool,
    pub one_hop_failing: Vec<usize>,
    pub k_fold: usize,
    pub k_fold_ivsc: bool,
    pub k_fold_ivcc: bool,
}

pub struct SeqInfo<'a> {
    pub label: &'a str,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub n: usize,
    pub signals: usize,
}

impl ConnectivityJson {
    pub fn new(info: SeqInfo<'_>, rep: &ConditionReport, one_hop: &OneHopReport, k: usize) -> Self {
        ConnectivityJson {
            sequence: info.label.into(),
            p: info.p,
            seed: info.seed,
            n: info.n,
            signals: info.signals,
            svsc: rep.svsc.holds,
            svsc_missing: rep
                .svsc
                .missing
                .iter()
                .map(|&(a, b)| [a + 1, b + 1])
                .collect(),
            svcc_hub: rep.svcc.map(|h| HubJson {
                hub: h.hub + 1,
                split: h.split,
                done: h.done,
            }),
            ivsc_blocks: (&rep.ivsc_blocks).into(),
            ivcc_blocks: (&rep.ivcc_blocks).into(),
            one_hop: one_hop.holds,
            one_hop_failing: one_hop.failing.iter().map(|i| i + 1).collect(),
            k_fold: k,
            k_fold_ivsc: rep.ivsc_blocks.is_k_fold(k),
            k_fold_ivcc: rep.ivcc_blocks.is_k_fold(k),
        }
    }
}
