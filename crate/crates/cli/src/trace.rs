//! JSONL trace files: one signal per line,
//! `{"s": sender, "r": receiver, "t0": send, "t1": receive}` with 1-based
//! node indices and an optional `"bidir": true` marking one half of an
//! atomic two-way exchange.

use std::io::{BufRead, Write};

use consensus_core::{CommSequence, Signal};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct Line {
    s: usize,
    r: usize,
    t0: f64,
    t1: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    bidir: bool,
}

/// Parse a trace. With `n = None` the node count is the largest index seen.
pub fn read_trace(
    reader: impl BufRead,
    n: Option<usize>,
    name: &str,
) -> Result<CommSequence, Failure> {
    let mut signals = Vec::new();
    let mut largest = 0;
    for (no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Failure::config(format!("{name}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let l: Line = serde_json::from_str(&line)
            .map_err(|e| Failure::config(format!("{name}:{}: {e}", no + 1)))?;
        if l.s == 0 || l.r == 0 {
            return Err(Failure::config(format!(
                "{name}:{}: node indices are 1-based",
                no + 1
            )));
        }
        largest = largest.max(l.s).max(l.r);
        signals.push(Signal {
            bidir: l.bidir,
            ..Signal::new(l.s - 1, l.r - 1, l.t0, l.t1)
        });
    }
    let n = n.unwrap_or(largest);
    CommSequence::new(n, signals).map_err(|e| Failure::config(format!("{name}: {e}")))
}

pub fn write_trace(mut w: impl Write, seq: &CommSequence) -> std::io::Result<()> {
    for s in seq.signals() {
        let line = Line {
            s: s.sender + 1,
            r: s.receiver + 1,
            t0: s.t_send,
            t1: s.t_recv,
            bidir: s.bidir,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
