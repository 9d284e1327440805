//! Experiment configuration: a flat TOML file merged with command-line flags.
//! Flags win over file values, file values win over defaults.

use std::path::{Path, PathBuf};

use consensus_core::algorithms::DdaVariant;
use consensus_core::generators::DelayModel;
use consensus_core::AlgorithmKind;
use serde::Deserialize;

use crate::Failure;

/// Either one value or a list of them.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// `"index"` (`s_i(0) = i`) or an explicit list of initial vectors.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Initials {
    Named(String),
    Explicit(Vec<Vec<f64>>),
}

/// Keys accepted in the config file. All optional.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub d: Option<usize>,
    #[serde(alias = "aris_r")]
    pub r: Option<usize>,
    pub initials: Option<Initials>,
    #[serde(alias = "algorithms")]
    pub algs: Option<OneOrMany<String>>,
    pub dda_variant: Option<String>,
    #[serde(alias = "sequence")]
    pub seq: Option<String>,
    pub p: Option<OneOrMany<f64>>,
    pub seeds: Option<OneOrMany<u64>>,
    pub horizon: Option<usize>,
    pub sample_every: Option<usize>,
    pub out: Option<PathBuf>,
    pub k_fold: Option<usize>,
    pub delay: Option<String>,
    pub write_traces: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::config(format!("cannot parse config {}: {e}", path.display())))
    }

    /// Overlay `flags` on top of `self`.
    pub fn merge(self, flags: FileConfig) -> FileConfig {
        FileConfig {
            n: flags.n.or(self.n),
            d: flags.d.or(self.d),
            r: flags.r.or(self.r),
            initials: flags.initials.or(self.initials),
            algs: flags.algs.or(self.algs),
            dda_variant: flags.dda_variant.or(self.dda_variant),
            seq: flags.seq.or(self.seq),
            p: flags.p.or(self.p),
            seeds: flags.seeds.or(self.seeds),
            horizon: flags.horizon.or(self.horizon),
            sample_every: flags.sample_every.or(self.sample_every),
            out: flags.out.or(self.out),
            k_fold: flags.k_fold.or(self.k_fold),
            delay: flags.delay.or(self.delay),
            write_traces: flags.write_traces.or(self.write_traces),
        }
    }
}

/// Where the communication sequence comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SeqSource {
    Random,
    DoubleCycle,
    Trace(PathBuf),
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    /// `None` means "infer from the trace" (random and double-cycle use 80).
    pub n: Option<usize>,
    pub d: Option<usize>,
    /// ARIS sketch width; `None` means `r = n`.
    pub r: Option<usize>,
    pub initials: Initials,
    pub algs: Vec<AlgorithmKind>,
    pub dda_variant: DdaVariant,
    pub seq: SeqSource,
    pub ps: Vec<f64>,
    pub seeds: Vec<u64>,
    pub horizon: usize,
    pub sample_every: usize,
    pub out: PathBuf,
    pub k_fold: usize,
    pub delay: DelayModel,
    pub write_traces: bool,
}

pub const DEFAULT_N: usize = 80;
pub const DEFAULT_PS: [f64; 4] = [1.0, 0.5, 0.25, 0.0];
pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_SAMPLE_EVERY: usize = 100;
pub const DEFAULT_K_FOLD: usize = 1;

pub fn parse_seq(s: &str) -> Result<SeqSource, Failure> {
    match s.trim() {
        "random" => Ok(SeqSource::Random),
        "double-cycle" | "double_cycle" => Ok(SeqSource::DoubleCycle),
        t => match t.strip_prefix("trace:") {
            Some(path) if !path.is_empty() => Ok(SeqSource::Trace(PathBuf::from(path))),
            _ => Err(Failure::config(format!(
                "unknown sequence '{s}' (random | double-cycle | trace:PATH)"
            ))),
        },
    }
}

/// `primary`, `alternative`, or `randomized:P` (also `randomized(P)`).
pub fn parse_dda_variant(s: &str) -> Result<DdaVariant, Failure> {
    let t = s.trim().to_ascii_lowercase();
    match t.as_str() {
        "primary" => return Ok(DdaVariant::Primary),
        "alternative" => return Ok(DdaVariant::Alternative),
        _ => {}
    }
    let arg = t.strip_prefix("randomized:").or_else(|| {
        t.strip_prefix("randomized(")
            .and_then(|r| r.strip_suffix(')'))
    });
    let p = arg
        .and_then(|a| a.trim().parse::<f64>().ok())
        .ok_or_else(|| Failure::config(format!("unknown DDA variant '{s}'")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Failure::config(format!(
            "DDA switching probability {p} outside [0, 1]"
        )));
    }
    Ok(DdaVariant::Randomized { p })
}

/// `instantaneous`, `fixed:D` or `uniform:LO:HI`, in step units.
pub fn parse_delay(s: &str) -> Result<DelayModel, Failure> {
    let bad = || Failure::config(format!("unknown delay model '{s}'"));
    let parts: Vec<&str> = s.trim().split(':').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        ["instantaneous"] => Ok(DelayModel::Instantaneous),
        ["fixed", d] => Ok(DelayModel::Fixed(num(d)?)),
        ["uniform", lo, hi] => Ok(DelayModel::Uniform(num(lo)?, num(hi)?)),
        _ => Err(bad()),
    }
}

pub fn parse_initials(s: &str) -> Result<Initials, Failure> {
    if s.trim() == "index" {
        return Ok(Initials::Named("index".into()));
    }
    serde_json::from_str::<Vec<Vec<f64>>>(s)
        .map(Initials::Explicit)
        .map_err(|e| {
            Failure::config(format!(
                "initials must be 'index' or a JSON list of vectors: {e}"
            ))
        })
}

impl Settings {
    pub fn resolve(c: FileConfig) -> Result<Settings, Failure> {
        let algs = match c.algs {
            None => AlgorithmKind::ALL.to_vec(),
            Some(list) => list
                .into_vec()
                .iter()
                .flat_map(|s| s.split(','))
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.parse::<AlgorithmKind>()
                        .map_err(|e| Failure::config(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        if algs.is_empty() {
            return Err(Failure::config("no algorithms selected"));
        }
        let initials = c.initials.unwrap_or(Initials::Named("index".into()));
        if let Initials::Named(name) = &initials {
            if name != "index" {
                return Err(Failure::config(format!(
                    "unknown initials '{name}' (index or an explicit list)"
                )));
            }
        }
        let ps = c.p.map_or(DEFAULT_PS.to_vec(), OneOrMany::into_vec);
        if ps.is_empty() || ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Failure::config(format!(
                "back-signal probabilities {ps:?} must be non-empty and in [0, 1]"
            )));
        }
        let seeds = c.seeds.map_or(vec![1], OneOrMany::into_vec);
        if seeds.is_empty() {
            return Err(Failure::config("no seeds given"));
        }
        let sample_every = c.sample_every.unwrap_or(DEFAULT_SAMPLE_EVERY);
        if sample_every == 0 {
            return Err(Failure::config("sample_every must be at least 1"));
        }
        if c.r == Some(0) {
            return Err(Failure::config("ARIS needs r >= 1"));
        }
        Ok(Settings {
            n: c.n,
            d: c.d,
            r: c.r,
            initials,
            algs,
            dda_variant: c
                .dda_variant
                .as_deref()
                .map_or(Ok(DdaVariant::Primary), parse_dda_variant)?,
            seq: c.seq.as_deref().map_or(Ok(SeqSource::Random), parse_seq)?,
            ps,
            seeds,
            horizon: c.horizon.unwrap_or(DEFAULT_HORIZON),
            sample_every,
            out: c.out.unwrap_or_else(|| PathBuf::from("out")),
            k_fold: c.k_fold.unwrap_or(DEFAULT_K_FOLD),
            delay: c
                .delay
                .as_deref()
                .map_or(Ok(DelayModel::Instantaneous), parse_delay)?,
            write_traces: c.write_traces.unwrap_or(false),
        })
    }
}
