//! Communication sessions.
//!
//! Bob encodes a bit by choosing a configuration; Alice sends fresh photons
//! one at a time until one of her decoding detectors clicks. Dump and
//! absorption events are invisible to her and only cost a trial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{classical_path, outcome_distribution, propagate, ConcreteNetwork, EngineError, OutcomeDistribution};
use crate::envtrace::{self, EnvError, EnvModel};
use crate::netlist::{NetlistError, Network};
use crate::tsvf::{self, RegionVerdict, TsvfError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Tsvf(#[from] TsvfError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("detector `{0}` decodes more than one bit")]
    DecodeNotInjective(String),
    #[error("bit {0} has no decoding detector")]
    NoDetectorFor(u8),
    #[error("bit must be 0 or 1, got {0}")]
    BadBit(u8),
    #[error("bit {0} can never be received: no decoding detector clicks")]
    NeverClicks(u8),
    #[error("bit #{index} not received after {trials} trials")]
    MaxTrials { index: usize, trials: u64 },
}

/// How bits map to configurations and detectors to bits.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    pub network: Network,
    /// Configuration used for bit 0 and bit 1.
    pub configs: [String; 2],
    pub decode: Vec<(String, u8)>,
    pub max_trials: u64,
    /// Site that counts as Alice's.
    pub home: String,
    /// Sites checked for traces; every site except home unless narrowed.
    pub region: Vec<String>,
}

impl ProtocolSpec {
    pub fn new(
        network: Network,
        configs: [String; 2],
        decode: Vec<(String, u8)>,
        max_trials: u64,
        home: &str,
    ) -> Result<Self, ProtocolError> {
        for c in &configs {
            if network.config(c).is_none() {
                return Err(NetlistError::UnknownConfig(c.clone()).into());
            }
        }
        for (i, (d, b)) in decode.iter().enumerate() {
            if *b > 1 {
                return Err(ProtocolError::BadBit(*b));
            }
            if decode[..i].iter().any(|(e, _)| e == d) {
                return Err(ProtocolError::DecodeNotInjective(d.clone()));
            }
            if !network.element(d).is_some_and(|e| e.kind == crate::netlist::Kind::Detector) {
                return Err(EngineError::UnknownTerminal(d.clone()).into());
            }
        }
        for b in 0..2u8 {
            if !decode.iter().any(|(_, x)| *x == b) {
                return Err(ProtocolError::NoDetectorFor(b));
            }
        }
        if !network.sites.iter().any(|s| s == home) {
            return Err(NetlistError::UnknownSite(home.to_string()).into());
        }
        let region = network.sites_except(home);
        Ok(ProtocolSpec { network, configs, decode, max_trials, home: home.to_string(), region })
    }

    /// Open for 0, blocked for 1; D2 reads 0 and D1 reads 1; Alice's site is
    /// home.
    pub fn standard(network: Network) -> Result<Self, ProtocolError> {
        Self::new(
            network,
            ["open".into(), "blocked".into()],
            vec![("D1".into(), 1), ("D2".into(), 0)],
            100_000,
            "Alice",
        )
    }

    pub fn concrete(&self, bit: u8) -> Result<ConcreteNetwork, ProtocolError> {
        if bit > 1 {
            return Err(ProtocolError::BadBit(bit));
        }
        Ok(self.network.apply_config(&self.configs[bit as usize])?)
    }

    /// The detector that announces `bit`.
    pub fn detector_for(&self, bit: u8) -> Result<&str, ProtocolError> {
        self.decode
            .iter()
            .find(|(_, b)| *b == bit)
            .map(|(d, _)| d.as_str())
            .ok_or(ProtocolError::NoDetectorFor(bit))
    }

    fn decoded(&self, outcome: &str) -> Option<u8> {
        self.decode.iter().find(|(d, _)| d == outcome).map(|(_, b)| *b)
    }

    /// Check a narrower region than everything outside home.
    pub fn with_region(mut self, region: Vec<String>) -> Result<Self, ProtocolError> {
        for s in &region {
            if !self.network.sites.contains(s) {
                return Err(NetlistError::UnknownSite(s.clone()).into());
            }
        }
        self.region = region;
        Ok(self)
    }

    pub fn outside(&self) -> Vec<String> {
        self.region.clone()
    }
}

/// Exact distribution of a single photon's fate.
pub fn per_trial(spec: &ProtocolSpec, bit: u8) -> Result<OutcomeDistribution, ProtocolError> {
    Ok(outcome_distribution(&spec.concrete(bit)?))
}

/// Probability that a single photon is decoded at all, correctly or not.
pub fn click_probability(spec: &ProtocolSpec, bit: u8) -> Result<f64, ProtocolError> {
    let d = per_trial(spec, bit)?;
    Ok(spec.decode.iter().filter_map(|(n, _)| d.get(n)).sum())
}

/// Probability that a photon is decoded as the wrong bit.
pub fn error_probability(spec: &ProtocolSpec, bit: u8) -> Result<f64, ProtocolError> {
    let d = per_trial(spec, bit)?;
    Ok(spec.decode.iter().filter(|(_, b)| *b != bit).filter_map(|(n, _)| d.get(n)).sum())
}

/// Mean number of photons until a decodable click.
pub fn expected_trials(spec: &ProtocolSpec, bit: u8) -> Result<f64, ProtocolError> {
    let p = click_probability(spec, bit)?;
    if p <= 0.0 {
        return Err(ProtocolError::NeverClicks(bit));
    }
    Ok(1.0 / p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BitRecord {
    pub sent: u8,
    pub trials: u64,
    /// Count per outcome name, in the order of the outcome distribution.
    pub tally: Vec<(String, u64)>,
    pub decoded: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionStats {
    pub bits: Vec<BitRecord>,
    pub errors: usize,
    pub mean_trials: f64,
    /// Received bits per photon sent.
    pub success_rate: f64,
}

/// Random stream for bit `index` of a session. Streams of one seed never
/// overlap.
pub fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Index into `probs` drawn by inverse transform.
pub fn sample(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Send `bits` one after another, each with its own random stream.
pub fn session(spec: &ProtocolSpec, bits: &[u8], seed: u64) -> Result<SessionStats, ProtocolError> {
    let dists = [per_trial(spec, 0)?, per_trial(spec, 1)?];
    for b in 0..2u8 {
        if click_probability(spec, b)? <= 0.0 && bits.contains(&b) {
            return Err(ProtocolError::NeverClicks(b));
        }
    }
    let mut records = Vec::with_capacity(bits.len());
    let mut total = 0u64;
    for (index, &bit) in bits.iter().enumerate() {
        if bit > 1 {
            return Err(ProtocolError::BadBit(bit));
        }
        let dist = &dists[bit as usize];
        let probs: Vec<f64> = dist.outcomes.iter().map(|o| o.p).collect();
        let mut counts = vec![0u64; probs.len()];
        let mut rng = stream(seed, index);
        let mut decoded = None;
        let mut trials = 0;
        while decoded.is_none() {
            if trials == spec.max_trials {
                return Err(ProtocolError::MaxTrials { index, trials });
            }
            trials += 1;
            let k = sample(&mut rng, &probs);
            counts[k] += 1;
            decoded = spec.decoded(&dist.outcomes[k].name);
        }
        total += trials;
        let tally = dist.outcomes.iter().map(|o| o.name.clone()).zip(counts).collect();
        records.push(BitRecord { sent: bit, trials, tally, decoded: decoded.unwrap() });
    }
    let errors = records.iter().filter(|r| r.sent != r.decoded).count();
    let n = records.len().max(1) as f64;
    Ok(SessionStats {
        errors,
        mean_trials: total as f64 / n,
        success_rate: if total == 0 { 0.0 } else { records.len() as f64 / total as f64 },
        bits: records,
    })
}

/// How strongly a bit transfer avoids the region outside home.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Classification {
    /// A bright continuous path runs through the outside region.
    NotCounterfactual,
    /// No such path, but a first-order trace outside.
    PathCounterfactual,
    /// No first-order trace outside; a higher-order one remains.
    FirstOrderTraceCounterfactual,
    /// No trace outside at any order kept.
    FullyTraceFree,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::NotCounterfactual => "not counterfactual",
            Classification::PathCounterfactual => "path-counterfactual",
            Classification::FirstOrderTraceCounterfactual => "first-order-trace counterfactual",
            Classification::FullyTraceFree => "fully trace-free",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BitVerdict {
    pub bit: u8,
    pub detector: String,
    pub classical_path: bool,
    pub first_order: RegionVerdict,
    /// Fitted exponent of the largest environment term outside home, or
    /// `None` when that term vanishes identically.
    pub env_order: Option<envtrace::OrderFit>,
    /// Arms flipped in the largest outside term at the smallest grid point.
    pub env_witness: Vec<String>,
    pub class: Classification,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterfactualityReport {
    pub bits: [BitVerdict; 2],
    /// The weaker of the two bit verdicts.
    pub overall: Classification,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportOptions {
    /// Amplitude below which an arm counts as dark for the path test.
    pub tau: f64,
    pub grid: Vec<f64>,
    pub order_cap: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { tau: 1e-9, grid: envtrace::default_grid(), order_cap: envtrace::DEFAULT_ORDER }
    }
}

pub fn bit_verdict(spec: &ProtocolSpec, bit: u8, opts: &ReportOptions) -> Result<BitVerdict, ProtocolError> {
    let net = spec.concrete(bit)?;
    let detector = spec.detector_for(bit)?.to_string();
    let outside = spec.outside();
    let fwd = propagate(&net);
    let path = classical_path(&net, &fwd, &outside, &detector, opts.tau)?;
    let tm = tsvf::trace_map(&net, &detector)?;
    let first_order = tsvf::region_trace(&net, &tm, &outside)?;

    let mut witness = 0u128;
    let mut first = true;
    let fit = envtrace::order_fit(
        |eps| {
            let st = envtrace::evolve_env(&net, EnvModel::new(eps, opts.order_cap)?)?;
            let (m, flips) = envtrace::region_env_trace(&net, &st, &detector, &outside)?;
            if first {
                witness = flips;
                first = false;
            }
            Ok(m)
        },
        &opts.grid,
    );
    let env_order = match fit {
        Ok(f) => Some(f),
        Err(EnvError::ExactZero) => None,
        Err(e) => return Err(e.into()),
    };
    let class = if path {
        Classification::NotCounterfactual
    } else if first_order.present {
        Classification::PathCounterfactual
    } else if env_order.is_some() {
        Classification::FirstOrderTraceCounterfactual
    } else {
        Classification::FullyTraceFree
    };
    Ok(BitVerdict {
        bit,
        detector,
        classical_path: path,
        first_order,
        env_order,
        env_witness: envtrace::flip_names(&net, witness),
        class,
    })
}

pub fn counterfactuality_report(spec: &ProtocolSpec, opts: &ReportOptions) -> Result<CounterfactualityReport, ProtocolError> {
    let bits = [bit_verdict(spec, 0, opts)?, bit_verdict(spec, 1, opts)?];
    let overall = bits[0].class.min(bits[1].class);
    Ok(CounterfactualityReport { bits, overall })
}
