//! Stochastic execution of high-level nets: seeded traces, replication
//! experiments with Student-t confidence intervals, and bounded
//! breadth-first exploration of the reachability graph.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::hlpn::{enabled_transitions, fire, ExecError, Marking, Net};

/// Why a trace stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceEnd {
    /// The firing budget ran out with the net still live.
    FiringLimit,
    /// Nothing is enabled, every source is exhausted, and all tokens sit in
    /// sink places: the workflow drained to its final stores.
    Completed,
    /// Nothing is enabled for any other reason.
    Deadlock,
}

/// One seeded trace: the firing sequence, a per-place token-count series
/// sampled after every firing, and the final marking.
#[derive(Clone, Debug)]
pub struct Trace {
    pub firings: Vec<String>,
    /// `series[p][k]` = tokens in place `p` after the k-th firing.
    pub series: Vec<Vec<u64>>,
    pub final_marking: Marking,
    pub end: TraceEnd,
}

/// Fires up to `firings` uniformly-chosen enabled bindings from the initial
/// marking. Deterministic for a fixed `(net, firings, seed)`.
pub fn run_trace(net: &Net, firings: u64, seed: u64) -> Result<Trace, ExecError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut marking = net.initial_marking();
    let mut series: Vec<Vec<u64>> = vec![Vec::new(); net.places().len()];
    let mut fired = Vec::new();
    let mut end = TraceEnd::FiringLimit;
    for step in 0..=firings {
        let enabled = enabled_transitions(net, &marking)?;
        if enabled.is_empty() {
            end = if marking.budgets_exhausted() && net.tokens_only_in_sinks(&marking) {
                TraceEnd::Completed
            } else {
                TraceEnd::Deadlock
            };
            break;
        }
        if step == firings {
            break;
        }
        let choice = &enabled[rng.gen_range(0..enabled.len())];
        marking = fire(net, &marking, choice)?;
        fired.push(net.trans_name(choice.trans).to_string());
        for (p, counts) in marking.token_counts().into_iter().enumerate() {
            series[p].push(counts);
        }
    }
    Ok(Trace {
        firings: fired,
        series,
        final_marking: marking,
        end,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub firings: u64,
    pub replications: u32,
    pub seed: u64,
    pub alpha: f64,
}

impl SimConfig {
    pub fn new(firings: u64, replications: u32, seed: u64) -> Self {
        SimConfig {
            firings,
            replications,
            seed,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("firings and replications must both be at least 1")]
    EmptyConfig,
    #[error("alpha must lie strictly between 0 and 1")]
    BadAlpha,
    #[error("no samples to aggregate")]
    EmptySamples,
    #[error("execution failed: {0}")]
    Exec(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaceReport {
    pub name: String,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub model: String,
    pub config: SimConfig,
    pub places: Vec<PlaceReport>,
    pub trace_lengths: Vec<u64>,
    pub outcomes: Vec<TraceEnd>,
}

/// Derives the seed for replication `k` from the master seed. SplitMix64
/// finalizer over a golden-ratio stride, so consecutive replications get
/// decorrelated streams.
pub fn replication_seed(master: u64, k: u32) -> u64 {
    let mut z = master.wrapping_add((k as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Student-t confidence interval over the samples: mean ± t·s/√n at level
/// `1 - alpha`. A single sample degenerates to `(mean, mean)`.
pub fn confidence_interval(samples: &[f64], alpha: f64) -> Result<(f64, f64), SimError> {
    if samples.is_empty() {
        return Err(SimError::EmptySamples);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SimError::BadAlpha);
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok((mean, mean));
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let sd = var.sqrt();
    let t = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
        .expect("degrees of freedom are positive")
        .inverse_cdf(1.0 - alpha / 2.0);
    let half = t * sd / (n as f64).sqrt();
    Ok((mean - half, mean + half))
}

/// Runs `replications` seeded traces and aggregates per-place token means
/// with confidence intervals across replications.
pub fn replicate(net: &Net, config: SimConfig) -> Result<SimReport, SimError> {
    if config.firings == 0 || config.replications == 0 {
        return Err(SimError::EmptyConfig);
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(SimError::BadAlpha);
    }
    let mut per_place: Vec<Vec<f64>> = vec![Vec::new(); net.places().len()];
    let mut trace_lengths = Vec::new();
    let mut outcomes = Vec::new();
    for k in 0..config.replications {
        let seed = replication_seed(config.seed, k);
        let trace =
            run_trace(net, config.firings, seed).map_err(|e| SimError::Exec(e.to_string()))?;
        for (p, series) in trace.series.iter().enumerate() {
            let sample = if series.is_empty() {
                net.initial_marking().token_counts()[p] as f64
            } else {
                series.iter().sum::<u64>() as f64 / series.len() as f64
            };
            per_place[p].push(sample);
        }
        trace_lengths.push(trace.firings.len() as u64);
        outcomes.push(trace.end);
    }
    let places = net
        .places()
        .iter()
        .enumerate()
        .map(|(p, place)| {
            let samples = &per_place[p];
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let (ci_lo, ci_hi) = confidence_interval(samples, config.alpha)?;
            Ok(PlaceReport {
                name: place.name.clone(),
                mean,
                ci_lo,
                ci_hi,
            })
        })
        .collect::<Result<Vec<PlaceReport>, SimError>>()?;
    Ok(SimReport {
        model: net.name().to_string(),
        config,
        places,
        trace_lengths,
        outcomes,
    })
}

/// Outcome of a bounded breadth-first reachability exploration.
#[derive(Clone, Debug)]
pub struct ExploreReport {
    /// Number of distinct markings visited.
    pub states: usize,
    /// True when the bound stopped the search before exhausting the graph.
    pub truncated: bool,
    /// Places that hold at least one token in some visited marking.
    pub covered_places: Vec<String>,
    /// Places never marked in any visited state.
    pub uncovered_places: Vec<String>,
    /// Markings with nothing enabled that are genuine deadlocks.
    pub deadlocks: Vec<Marking>,
    /// Markings with nothing enabled that are completed workflows (sources
    /// exhausted, all tokens in sink places).
    pub completions: usize,
}

/// Breadth-first search over the reachability graph, visiting at most
/// `max_states` distinct markings.
pub fn bounded_explore(net: &Net, max_states: usize) -> Result<ExploreReport, ExecError> {
    let initial = net.initial_marking();
    let mut seen: HashMap<Marking, ()> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut covered = vec![false; net.places().len()];
    let mut deadlocks = Vec::new();
    let mut completions = 0usize;
    let mut truncated = false;

    seen.insert(initial.clone(), ());
    queue.push_back(initial);
    while let Some(marking) = queue.pop_front() {
        for (p, count) in marking.token_counts().into_iter().enumerate() {
            if count > 0 {
                covered[p] = true;
            }
        }
        let enabled = enabled_transitions(net, &marking)?;
        if enabled.is_empty() {
            if marking.budgets_exhausted() && net.tokens_only_in_sinks(&marking) {
                completions += 1;
            } else {
                deadlocks.push(marking.clone());
            }
            continue;
        }
        for choice in &enabled {
            let successor = fire(net, &marking, choice)?;
            if seen.contains_key(&successor) {
                continue;
            }
            if seen.len() >= max_states {
                truncated = true;
                continue;
            }
            seen.insert(successor.clone(), ());
            queue.push_back(successor);
        }
    }

    let mut covered_places = Vec::new();
    let mut uncovered_places = Vec::new();
    for (p, place) in net.places().iter().enumerate() {
        if covered[p] {
            covered_places.push(place.name.clone());
        } else {
            uncovered_places.push(place.name.clone());
        }
    }
    Ok(ExploreReport {
        states: seen.len(),
        truncated,
        covered_places,
        uncovered_places,
        deadlocks,
        completions,
    })
}
