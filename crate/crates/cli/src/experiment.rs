//! Builds sequences and instances from [`Settings`] and runs every
//! (sequence, algorithm, seed) combination in parallel.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use consensus_core::algorithms::{AlgorithmSpec, DdaVariant};
use consensus_core::connectivity::{check_one_hop, condition_report, Window};
use consensus_core::generators::{
    gen_double_cycle, gen_random_protocol, DelayModel, RandomProtocolConfig,
};
use consensus_core::sim::run;
use consensus_core::{make_instance, AlgorithmKind, CommSequence, Error, ProblemInstance};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Initials, SeqSource, Settings, DEFAULT_N};
use crate::report::{write_csv, ConnectivityJson, RunJson, SeqInfo};
use crate::trace::{read_trace, write_trace};
use crate::Failure;

/// One communication sequence and how it was produced.
pub struct SeqJob {
    pub label: String,
    pub p: Option<f64>,
    /// Generator seed; `None` for sequences that do not depend on one.
    pub seed: Option<u64>,
    pub seq: CommSequence,
}

pub fn build_sequences(s: &Settings) -> Result<Vec<SeqJob>, Failure> {
    match &s.seq {
        SeqSource::Random => {
            let n = s.n.unwrap_or(DEFAULT_N);
            let mut jobs = Vec::with_capacity(s.ps.len() * s.seeds.len());
            for &p in &s.ps {
                for &seed in &s.seeds {
                    let cfg = RandomProtocolConfig::new(n, p, s.horizon, seed).with_delay(s.delay);
                    let seq = gen_random_protocol(&cfg).map_err(Failure::from_core)?;
                    jobs.push(SeqJob {
                        label: format!("p{p}"),
                        p: Some(p),
                        seed: Some(seed),
                        seq,
                    });
                }
            }
            Ok(jobs)
        }
        SeqSource::DoubleCycle => {
            let seq = gen_double_cycle(s.n.unwrap_or(DEFAULT_N)).map_err(Failure::from_core)?;
            Ok(vec![SeqJob {
                label: "double-cycle".into(),
                p: None,
                seed: None,
                seq,
            }])
        }
        SeqSource::Trace(path) => Ok(vec![load_trace(path, s.n)?]),
    }
}

pub fn load_trace(path: &Path, n: Option<usize>) -> Result<SeqJob, Failure> {
    let f = File::open(path)
        .map_err(|e| Failure::config(format!("cannot open trace {}: {e}", path.display())))?;
    let seq = read_trace(BufReader::new(f), n, &path.display().to_string())?;
    Ok(SeqJob {
        label: "trace".into(),
        p: None,
        seed: None,
        seq,
    })
}

pub fn build_instance(s: &Settings, n: usize) -> Result<ProblemInstance, Failure> {
    match &s.initials {
        Initials::Named(_) => {
            ProblemInstance::index_initials(n, s.d.unwrap_or(1)).map_err(Failure::from_core)
        }
        Initials::Explicit(rows) => {
            if rows.len() != n {
                return Err(Failure::config(format!(
                    "{} initial vectors given for {n} nodes",
                    rows.len()
                )));
            }
            let d = rows.first().map_or(0, Vec::len);
            if s.d.is_some_and(|want| want != d) {
                return Err(Failure::config(format!(
                    "initial vectors have dimension {d}, d = {}",
                    s.d.unwrap()
                )));
            }
            make_instance(n, d, rows.clone()).map_err(Failure::from_core)
        }
    }
}

fn spec_for(s: &Settings, kind: AlgorithmKind, n: usize, seed: u64) -> AlgorithmSpec {
    AlgorithmSpec::new(kind)
        .with_aris_r(s.r.unwrap_or(n))
        .with_dda_variant(s.dda_variant)
        .with_seed(seed)
}

pub fn connectivity(job: &SeqJob, k: usize) -> ConnectivityJson {
    let info = SeqInfo {
        label: &job.label,
        p: job.p,
        seed: job.seed,
        n: job.seq.n(),
        signals: job.seq.len(),
    };
    ConnectivityJson::new(
        info,
        &condition_report(&job.seq),
        &check_one_hop(&job.seq, &Window::all()),
        k,
    )
}

#[derive(Serialize)]
pub struct SettingsJson {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub initials: &'static str,
    pub algorithms: Vec<&'static str>,
    pub dda_variant: String,
    pub sequence: String,
    pub p: Vec<f64>,
    pub seeds: Vec<u64>,
    pub horizon: usize,
    pub sample_every: usize,
    pub k_fold: usize,
    pub delay: String,
}

#[derive(Serialize)]
pub struct Summary {
    pub settings: SettingsJson,
    pub connectivity: Vec<ConnectivityJson>,
    pub runs: Vec<RunJson>,
}

fn describe_variant(v: DdaVariant) -> String {
    match v {
        DdaVariant::Primary => "primary".into(),
        DdaVariant::Alternative => "alternative".into(),
        DdaVariant::Randomized { p } => format!("randomized:{p}"),
    }
}

fn describe_delay(d: DelayModel) -> String {
    match d {
        DelayModel::Instantaneous => "instantaneous".into(),
        DelayModel::Fixed(x) => format!("fixed:{x}"),
        DelayModel::Uniform(a, b) => format!("uniform:{a}:{b}"),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::io(format!("{}: {e}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| io_err(path, e))
}

/// Run everything and write CSVs, optional traces and `summary.json` to the
/// output directory.
pub fn run_experiment(s: &Settings) -> Result<Summary, Failure> {
    let jobs = build_sequences(s)?;
    let n = jobs[0].seq.n();
    let inst = build_instance(s, n)?;
    for &kind in &s.algs {
        spec_for(s, kind, n, 0)
            .validate(&inst)
            .map_err(Failure::from_core)?;
    }
    std::fs::create_dir_all(&s.out).map_err(|e| io_err(&s.out, e))?;

    if s.write_traces {
        for job in &jobs {
            let name = match job.seed {
                Some(seed) => format!("trace_{}_seed{seed}.jsonl", job.label),
                None => format!("trace_{}.jsonl", job.label),
            };
            let path = s.out.join(name);
            let f = File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut w = BufWriter::new(f);
            write_trace(&mut w, &job.seq)
                .and_then(|_| w.flush())
                .map_err(|e| io_err(&path, e))?;
        }
    }

    // Generated sequences carry their own seed; fixed ones are run once per seed.
    let mut tasks: Vec<(usize, AlgorithmKind, u64)> = Vec::new();
    for (q, job) in jobs.iter().enumerate() {
        let seeds = job.seed.map_or(s.seeds.clone(), |x| vec![x]);
        for &kind in &s.algs {
            tasks.extend(seeds.iter().map(|&seed| (q, kind, seed)));
        }
    }

    let runs = tasks
        .par_iter()
        .map(|&(q, kind, seed)| {
            let job = &jobs[q];
            let spec = spec_for(s, kind, n, seed);
            let rec = run(&inst, &spec, &job.seq, s.sample_every).map_err(Failure::from_core)?;
            let name = format!("{}_{}_seed{seed}.csv", kind.name(), job.label);
            let path = s.out.join(&name);
            let f = File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut w = BufWriter::new(f);
            write_csv(&mut w, &rec)
                .and_then(|_| w.flush())
                .map_err(|e| io_err(&path, e))?;
            Ok(RunJson::new(&rec, &job.label, job.p, seed, name))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let connectivity = jobs.par_iter().map(|j| connectivity(j, s.k_fold)).collect();

    let summary = Summary {
        settings: SettingsJson {
            n,
            d: inst.d,
            r: s.r.unwrap_or(n),
            initials: match s.initials {
                Initials::Named(_) => "index",
                Initials::Explicit(_) => "explicit",
            },
            algorithms: s.algs.iter().map(|k| k.name()).collect(),
            dda_variant: describe_variant(s.dda_variant),
            sequence: match &s.seq {
                SeqSource::Random => "random".into(),
                SeqSource::DoubleCycle => "double-cycle".into(),
                SeqSource::Trace(p) => format!("trace:{}", p.display()),
            },
            p: s.ps.clone(),
            seeds: s.seeds.clone(),
            horizon: s.horizon,
            sample_every: s.sample_every,
            k_fold: s.k_fold,
            delay: describe_delay(s.delay),
        },
        connectivity,
        runs,
    };
    write_json(&s.out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Condition reports only: for `trace` if given, else for the configured sequences.
pub fn check_only(s: &Settings, trace: Option<&Path>) -> Result<Vec<ConnectivityJson>, Failure> {
    let jobs = match trace {
        Some(path) => vec![load_trace(path, s.n)?],
        None => build_sequences(s)?,
    };
    Ok(jobs.par_iter().map(|j| connectivity(j, s.k_fold)).collect())
}

impl Failure {
    /// Map a library error to the exit-code classes.
    pub fn from_core(e: Error) -> Failure {
        match e {
            Error::Positivity { .. } => Failure::positivity(e.to_string()),
            Error::Config(_)
            | Error::InvalidInstance(_)
            | Error::UnsupportedGoal(_)
            | Error::Trace(_) => Failure::config(e.to_string()),
            Error::MalformedPayload(_) | Error::Domain(_) => Failure::io(e.to_string()),
        }
    }
}
