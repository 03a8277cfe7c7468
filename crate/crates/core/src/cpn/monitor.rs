//! Place monitors: per-place token-count statistics collected while a
//! coloured net runs.
//!
//! A discrete monitor samples the place size at every observation and
//! averages over the sample count. A time-average monitor weights each
//! observed size by how long the marking held it on the model clock, so a
//! place that stays large for a long interval counts proportionally more.

use serde::Serialize;

use super::{step, ChoicePolicy, CpnEvent, CpnModel, CpnRunError, CpnState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How a monitor aggregates the sizes it observes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorKind {
    /// Mean of the sampled sizes.
    Discrete,
    /// Integral of size over clock time divided by elapsed clock time.
    /// Falls back to the discrete mean when no clock time has elapsed.
    TimeAverage,
}

/// Cumulative statistics for one place.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorStats {
    pub place: String,
    /// Number of marking observations.
    pub count: u64,
    pub sum: u64,
    pub average: f64,
    pub min: u64,
    pub max: u64,
    /// Set when no observation arrived, in which case the other statistics
    /// carry no information.
    pub empty: bool,
}

#[derive(Clone, Debug)]
struct PlaceAccumulator {
    count: u64,
    sum: u64,
    min: u64,
    max: u64,
    weighted: f64,
    last_size: u64,
    last_clock: u64,
    started: bool,
}

impl PlaceAccumulator {
    fn new() -> Self {
        PlaceAccumulator {
            count: 0,
            sum: 0,
            min: u64::MAX,
            max: 0,
            weighted: 0.0,
            last_size: 0,
            last_clock: 0,
            started: false,
        }
    }

    fn observe(&mut self, size: u64, clock: u64) {
        if self.started && clock > self.last_clock {
            self.weighted += self.last_size as f64 * (clock - self.last_clock) as f64;
        }
        self.count += 1;
        self.sum += size;
        self.min = self.min.min(size);
        self.max = self.max.max(size);
        self.last_size = size;
        self.last_clock = clock;
        self.started = true;
    }

    fn finish(&self, place: &str, kind: MonitorKind, start_clock: u64) -> MonitorStats {
        if self.count == 0 {
            return MonitorStats {
                place: place.to_string(),
                count: 0,
                sum: 0,
                average: 0.0,
                min: 0,
                max: 0,
                empty: true,
            };
        }
        let elapsed = self.last_clock.saturating_sub(start_clock);
        let average = match kind {
            MonitorKind::Discrete => self.sum as f64 / self.count as f64,
            MonitorKind::TimeAverage if elapsed > 0 => self.weighted / elapsed as f64,
            MonitorKind::TimeAverage => self.sum as f64 / self.count as f64,
        };
        MonitorStats {
            place: place.to_string(),
            count: self.count,
            sum: self.sum,
            average,
            min: self.min,
            max: self.max,
            empty: false,
        }
    }
}

/// Observes every place of `model` over one run and reports statistics in
/// place declaration order. The initial marking is observed once before the
/// first firing and the marking again after every firing.
#[derive(Clone, Debug)]
pub struct Monitor {
    kind: MonitorKind,
    start_clock: u64,
    accumulators: Vec<PlaceAccumulator>,
    started: bool,
}

impl Monitor {
    pub fn new(kind: MonitorKind, places: usize) -> Self {
        Monitor {
            kind,
            start_clock: 0,
            accumulators: vec![PlaceAccumulator::new(); places],
            started: false,
        }
    }

    pub fn observe(&mut self, state: &CpnState) {
        if !self.started {
            self.start_clock = state.clock;
            self.started = true;
        }
        for (acc, size) in self.accumulators.iter_mut().zip(state.place_sizes()) {
            acc.observe(size, state.clock);
        }
    }

    pub fn finish(&self, model: &CpnModel) -> Vec<MonitorStats> {
        self.accumulators
            .iter()
            .zip(&model.places)
            .map(|(acc, place)| acc.finish(&place.name, self.kind, self.start_clock))
            .collect()
    }
}

/// One monitored run: the fired events plus per-place statistics.
#[derive(Clone, Debug)]
pub struct MonitoredRun {
    pub events: Vec<CpnEvent>,
    pub final_state: CpnState,
    pub completed: bool,
    pub stats: Vec<MonitorStats>,
}

/// Runs the model like [`super::run`] while a monitor observes the initial
/// marking and the marking after every firing.
pub fn run_with_monitor(
    model: &CpnModel,
    max_steps: u64,
    seed: u64,
    policy: ChoicePolicy,
    kind: MonitorKind,
) -> Result<MonitoredRun, CpnRunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = model.initial_state();
    let mut monitor = Monitor::new(kind, model.places.len());
    monitor.observe(&state);
    let mut events = Vec::new();
    let mut completed = true;
    for _ in 0..max_steps {
        match step(model, &state, policy, &mut rng) {
            Ok((event, next)) => {
                events.push(event);
                state = next;
                monitor.observe(&state);
            }
            Err(CpnRunError::Deadlocked) => {
                return Ok(MonitoredRun {
                    events,
                    final_state: state,
                    completed: true,
                    stats: monitor.finish(model),
                });
            }
            Err(e) => return Err(e),
        }
        completed = false;
    }
    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    match step(model, &state, policy, &mut probe_rng) {
        Ok(_) => {}
        Err(CpnRunError::Deadlocked) => completed = true,
        Err(e) => return Err(e),
    }
    Ok(MonitoredRun {
        events,
        final_state: state,
        completed,
        stats: monitor.finish(model),
    })
}

/// Renders statistics as CSV with the columns
/// `place,count,sum,average,min,max`.
pub fn stats_to_csv(stats: &[MonitorStats]) -> String {
    let mut out = String::from("place,count,sum,average,min,max\n");
    for s in stats {
        let quoted = if s.place.contains(',') || s.place.contains('"') {
            format!("\"{}\"", s.place.replace('"', "\"\""))
        } else {
            s.place.clone()
        };
        out.push_str(&format!(
            "{},{},{},{:.6},{},{}\n",
            quoted, s.count, s.sum, s.average, s.min, s.max
        ));
    }
    out
}
