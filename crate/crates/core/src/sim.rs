//! Exact simulation of the continuous-time polling process.
//!
//! The process is advanced through its embedded jump chain: while the
//! server works under regime `(mu, gamma)` the total event rate is the
//! constant `Z = mu + sum(lambda)`, so holding times are `Exp(Z)` and the
//! next event is picked by inverse CDF in a fixed category order
//! (arrivals at relative offsets `0..=d`, feedback to offsets `1..=d`, or
//! `0..=d` for gated service, then departure).
//!
//! When the served station empties, the server jumps clockwise to the next
//! nonempty station within the same instant. A jump over `k` stations is
//! recorded as `k` coincident switch epochs and consumes `k` regimes from the
//! stream, so the regime at epoch `i` is always the one drawn for station
//! `[i]`.

use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Discipline, PollingSpec, Regime};
use crate::seed::{self, Rng as SimRng};
use crate::stream::{RegimeSource, RegimeStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Server {
    Station(usize),
    Idle,
}

/// Server position plus queue lengths in absolute station order.
///
/// `gate` counts customers still ahead of the gate at the served station and
/// is only used by gated service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Configuration {
    pub server: Server,
    pub queues: Vec<u64>,
    pub gate: u64,
}

impl Configuration {
    pub fn empty(spec: &PollingSpec) -> Self {
        Self { server: Server::Idle, queues: vec![0; spec.stations()], gate: 0 }
    }

    /// Server at `station` (location 0 for the revolver). For gated service
    /// every customer already at the station is ahead of the gate. An all-zero
    /// queue vector gives the idle configuration.
    pub fn new(spec: &PollingSpec, station: usize, queues: Vec<u64>) -> Result<Self> {
        if queues.len() != spec.stations() {
            return Err(Error::InvalidState(format!(
                "{} queue lengths for {} stations",
                queues.len(),
                spec.stations()
            )));
        }
        if station > spec.d || (spec.discipline == Discipline::Revolver && station != 0) {
            return Err(Error::InvalidState(format!("server cannot start at station {station}")));
        }
        if queues.iter().all(|q| *q == 0) {
            return Ok(Self { server: Server::Idle, queues, gate: 0 });
        }
        let gate = match spec.discipline {
            Discipline::Gated => queues[station],
            _ => 0,
        };
        Ok(Self { server: Server::Station(station), queues, gate })
    }

    pub fn total(&self) -> u64 {
        self.queues.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.server == Server::Idle
    }

    pub fn station(&self) -> Option<usize> {
        match self.server {
            Server::Station(n) => Some(n),
            Server::Idle => None,
        }
    }

    /// Queue lengths seen from the server: entry `i` is station `[N + i]`.
    pub fn relative(&self) -> Vec<u64> {
        let n = self.station().unwrap_or(0);
        let mut v = self.queues.clone();
        v.rotate_left(n);
        v
    }

    /// Checks the idle/nonempty invariants.
    pub fn check(&self, spec: &PollingSpec) -> Result<()> {
        if self.queues.len() != spec.stations() {
            return Err(Error::InvalidState("queue vector has wrong length".into()));
        }
        match self.server {
            Server::Idle if self.total() != 0 => Err(Error::InvalidState("idle server with customers present".into())),
            Server::Station(_) if self.total() == 0 => {
                Err(Error::InvalidState("server at a station of an empty system".into()))
            }
            Server::Station(n) if self.queues[n] == 0 => {
                Err(Error::InvalidState(format!("server at empty station {n}")))
            }
            Server::Station(n) if spec.discipline == Discipline::Gated && self.gate > self.queues[n] => {
                Err(Error::InvalidState("gate count exceeds queue".into()))
            }
            _ => Ok(()),
        }
    }
}

/// One embedded-chain event. Offsets are relative to the served station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Event {
    Arrival(usize),
    Feedback(usize),
    Departure,
}

/// `Z = mu + sum(lambda)`, the total event rate under regime `r`.
pub fn total_rate(spec: &PollingSpec, r: &Regime) -> f64 {
    r.mu + spec.total_arrival_rate()
}

fn first_feedback_offset(spec: &PollingSpec) -> usize {
    match spec.discipline {
        Discipline::Gated => 0,
        _ => 1,
    }
}

/// Every embedded transition from a busy configuration with its probability,
/// in the sampling order.
pub fn outcome_probabilities(spec: &PollingSpec, cfg: &Configuration, r: &Regime) -> Result<Vec<(Event, f64)>> {
    let n = cfg.station().ok_or_else(|| Error::InvalidState("no transitions out of the idle state here".into()))?;
    check_regime(spec, r)?;
    let z = total_rate(spec, r);
    let mut out = Vec::with_capacity(2 * spec.stations() + 1);
    for i in 0..=spec.d {
        out.push((Event::Arrival(i), spec.arrival_rate(n, i) / z));
    }
    for i in first_feedback_offset(spec)..=spec.d {
        out.push((Event::Feedback(i), r.mu * spec.feedback(r, i) / z));
    }
    out.push((Event::Departure, r.mu * r.leave_probability() / z));
    Ok(out)
}

fn check_regime(spec: &PollingSpec, r: &Regime) -> Result<()> {
    if r.gamma.len() != spec.gamma_len() {
        return Err(Error::RegimeShape { got: r.gamma.len(), expected: spec.gamma_len() });
    }
    Ok(())
}

/// Applies an event without moving the server; the served station may be
/// left empty.
pub fn apply_event(spec: &PollingSpec, cfg: &mut Configuration, event: Event) -> Result<()> {
    let n = cfg.station().ok_or_else(|| Error::InvalidState("idle server cannot serve".into()))?;
    let m = spec.stations();
    let serve = |cfg: &mut Configuration| -> Result<()> {
        if cfg.queues[n] == 0 {
            return Err(Error::InvalidState(format!("service at empty station {n}")));
        }
        cfg.queues[n] -= 1;
        if spec.discipline == Discipline::Gated {
            cfg.gate = cfg.gate.saturating_sub(1);
        }
        Ok(())
    };
    match event {
        Event::Arrival(i) => cfg.queues[(n + i) % m] += 1,
        Event::Feedback(i) => {
            serve(cfg)?;
            cfg.queues[(n + i) % m] += 1;
        }
        Event::Departure => serve(cfg)?,
    }
    Ok(())
}

fn sample_event<R: Rng + ?Sized>(spec: &PollingSpec, n: usize, r: &Regime, z: f64, rng: &mut R) -> Event {
    let mut u = rng.random::<f64>() * z;
    for i in 0..=spec.d {
        u -= spec.arrival_rate(n, i);
        if u < 0.0 {
            return Event::Arrival(i);
        }
    }
    for i in first_feedback_offset(spec)..=spec.d {
        u -= r.mu * spec.feedback(r, i);
        if u < 0.0 {
            return Event::Feedback(i);
        }
    }
    Event::Departure
}

/// One embedded-chain transition from a busy configuration. The server is
/// not moved; see [`relocate`].
pub fn step_embedded<R: Rng + ?Sized>(
    spec: &PollingSpec,
    cfg: &Configuration,
    r: &Regime,
    rng: &mut R,
) -> Result<(Configuration, Event)> {
    cfg.check(spec)?;
    check_regime(spec, r)?;
    let n = cfg.station().expect("checked nonempty");
    let event = sample_event(spec, n, r, total_rate(spec, r), rng);
    let mut next = cfg.clone();
    apply_event(spec, &mut next, event)?;
    Ok((next, event))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relocation {
    Stay,
    /// Server advanced over `k` station positions.
    Moved(usize),
    Emptied,
}

/// Moves the server on when its current visit is over.
pub fn relocate(spec: &PollingSpec, cfg: &mut Configuration) -> Relocation {
    let Some(n) = cfg.station() else {
        return Relocation::Emptied;
    };
    let visit_over = match spec.discipline {
        Discipline::Gated => cfg.gate == 0,
        _ => cfg.queues[n] == 0,
    };
    if !visit_over {
        return Relocation::Stay;
    }
    if cfg.total() == 0 {
        cfg.server = Server::Idle;
        cfg.gate = 0;
        return Relocation::Emptied;
    }
    let m = spec.stations();
    match spec.discipline {
        Discipline::Exhaustive => {
            let k = (1..m).find(|k| cfg.queues[(n + k) % m] > 0).expect("some queue is nonempty");
            cfg.server = Server::Station((n + k) % m);
            Relocation::Moved(k)
        }
        Discipline::Revolver => {
            let mut k = 0;
            while cfg.queues[0] == 0 {
                cfg.queues.rotate_left(1);
                k += 1;
            }
            Relocation::Moved(k)
        }
        Discipline::Gated => {
            let mut k = 0;
            let mut at = n;
            loop {
                k += 1;
                at = (at + 1) % m;
                if cfg.queues[at] > 0 {
                    break;
                }
            }
            cfg.server = Server::Station(at);
            cfg.gate = cfg.queues[at];
            Relocation::Moved(k)
        }
    }
}

/// First arrival into the idle system: `Exp(sum(lambda))` later, at station
/// `n` with probability `lambda_n / sum(lambda)`.
pub fn arrival_from_idle<R: Rng + ?Sized>(spec: &PollingSpec, rng: &mut R) -> (f64, Configuration) {
    let total = spec.total_arrival_rate();
    let e: f64 = rng.sample(Exp1);
    let mut u = rng.random::<f64>() * total;
    let mut station = spec.d;
    for (i, l) in spec.lambda.iter().enumerate() {
        u -= l;
        if u < 0.0 {
            station = i;
            break;
        }
    }
    let mut queues = vec![0; spec.stations()];
    queues[station] = 1;
    let cfg = Configuration::new(spec, station, queues).expect("valid single-customer state");
    (e / total, cfg)
}

/// Switch epoch `i`: time and queue lengths seen from station `[i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchEpoch {
    pub index: usize,
    pub station: usize,
    pub time: f64,
    pub relative: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Tau {
    Emptied(f64),
    /// Horizon reached at the given time while customers remained.
    Censored(f64),
}

impl Tau {
    pub fn time(self) -> f64 {
        match self {
            Tau::Emptied(t) | Tau::Censored(t) => t,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, Tau::Censored(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub tau: Tau,
    pub switch_epochs: Vec<SwitchEpoch>,
    pub events: u64,
    pub peak_total: u64,
    pub final_config: Configuration,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Maximum number of embedded events before the run is censored.
    pub horizon: u64,
    pub record_epochs: bool,
}

impl RunOptions {
    pub fn new(horizon: u64) -> Self {
        Self { horizon, record_epochs: false }
    }

    pub fn recording(mut self) -> Self {
        self.record_epochs = true;
        self
    }
}

struct Engine<'a, S: RegimeSource + ?Sized> {
    spec: &'a PollingSpec,
    stream: &'a S,
    cfg: Configuration,
    epoch: usize,
    regime: Regime,
    z: f64,
    time: f64,
    events: u64,
    peak: u64,
    epochs: Vec<SwitchEpoch>,
    record: bool,
}

impl<'a, S: RegimeSource + ?Sized> Engine<'a, S> {
    fn start(spec: &'a PollingSpec, init: &Configuration, stream: &'a S, record: bool) -> Result<Self> {
        let station = init.station().unwrap_or(0);
        let epoch = match spec.discipline {
            Discipline::Revolver => 0,
            _ => station,
        };
        let regime = stream.regime(epoch);
        check_regime(spec, &regime)?;
        let mut e = Self {
            spec,
            stream,
            cfg: init.clone(),
            epoch,
            z: total_rate(spec, &regime),
            regime,
            time: 0.0,
            events: 0,
            peak: init.total(),
            epochs: Vec::new(),
            record,
        };
        e.push_epoch();
        // an empty starting station is left at time zero
        if let Relocation::Moved(k) = relocate(spec, &mut e.cfg) {
            e.advance_epochs(k);
        }
        Ok(e)
    }

    fn push_epoch(&mut self) {
        if self.record {
            self.epochs.push(SwitchEpoch {
                index: self.epoch,
                station: self.cfg.station().unwrap_or(self.spec.wrap(self.epoch)),
                time: self.time,
                relative: self.cfg.relative_at(self.spec, self.epoch),
            });
        }
    }

    fn advance_epochs(&mut self, k: usize) {
        for _ in 0..k {
            self.epoch += 1;
            self.push_epoch();
        }
        self.regime = self.stream.regime(self.epoch);
        self.z = total_rate(self.spec, &self.regime);
    }

    /// One event plus any relocation it triggers.
    fn step(&mut self, rng: &mut SimRng) -> Relocation {
        let n = self.cfg.station().expect("engine only steps busy states");
        let e: f64 = rng.sample(Exp1);
        self.time += e / self.z;
        let event = sample_event(self.spec, n, &self.regime, self.z, rng);
        apply_event(self.spec, &mut self.cfg, event).expect("served station is nonempty");
        self.events += 1;
        self.peak = self.peak.max(self.cfg.total());
        let rel = relocate(self.spec, &mut self.cfg);
        if let Relocation::Moved(k) = rel {
            self.advance_epochs(k);
        }
        rel
    }
}

impl Configuration {
    /// Relative view anchored at the station of epoch `epoch`.
    fn relative_at(&self, spec: &PollingSpec, epoch: usize) -> Vec<u64> {
        let mut v = self.queues.clone();
        if spec.discipline != Discipline::Revolver {
            v.rotate_left(spec.wrap(epoch));
        }
        v
    }
}

/// Simulates until the system first empties or the event horizon is hit.
pub fn run_until_empty<S: RegimeSource + ?Sized>(
    spec: &PollingSpec,
    init: &Configuration,
    stream: &S,
    opts: RunOptions,
    rng: &mut SimRng,
) -> Result<RunRecord> {
    if init.is_empty() {
        return Ok(RunRecord {
            tau: Tau::Emptied(0.0),
            switch_epochs: Vec::new(),
            events: 0,
            peak_total: 0,
            final_config: init.clone(),
        });
    }
    init.check_start(spec)?;
    let mut eng = Engine::start(spec, init, stream, opts.record_epochs)?;
    let tau = loop {
        if eng.events >= opts.horizon {
            break Tau::Censored(eng.time);
        }
        if eng.step(rng) == Relocation::Emptied {
            break Tau::Emptied(eng.time);
        }
    };
    Ok(RunRecord { tau, switch_epochs: eng.epochs, events: eng.events, peak_total: eng.peak, final_config: eng.cfg })
}

/// State right after the server's first departure from its starting station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstSwitch {
    /// Time of the first server jump (or of emptying).
    pub time: f64,
    /// Stations advanced; 0 when the system emptied instead.
    pub advanced: usize,
    pub config: Configuration,
    pub events: u64,
}

/// Simulates until the server first leaves its starting station.
pub fn run_until_switch<S: RegimeSource + ?Sized>(
    spec: &PollingSpec,
    init: &Configuration,
    stream: &S,
    horizon: u64,
    rng: &mut SimRng,
) -> Result<Option<FirstSwitch>> {
    init.check(spec)?;
    let mut eng = Engine::start(spec, init, stream, false)?;
    while eng.events < horizon {
        match eng.step(rng) {
            Relocation::Stay => {}
            Relocation::Moved(k) => {
                return Ok(Some(FirstSwitch { time: eng.time, advanced: k, config: eng.cfg, events: eng.events }))
            }
            Relocation::Emptied => {
                return Ok(Some(FirstSwitch { time: eng.time, advanced: 0, config: eng.cfg, events: eng.events }))
            }
        }
    }
    Ok(None)
}

impl Configuration {
    /// Like [`Configuration::check`] but tolerates an empty starting station,
    /// which the simulator leaves at time zero.
    fn check_start(&self, spec: &PollingSpec) -> Result<()> {
        match self.server {
            Server::Station(n) if self.queues[n] == 0 && self.total() > 0 => Ok(()),
            _ => self.check(spec),
        }
    }
}

/// One replica of a tau experiment; the CSV row format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSample {
    pub replica: usize,
    pub seed: u64,
    pub tau: f64,
    pub censored: bool,
    pub events: u64,
    pub peak_total: u64,
}

/// Empirical `E[tau^s]` over uncensored runs, with a growth diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub s: f64,
    pub mean: Option<f64>,
    pub uncensored: usize,
    pub censored_fraction: f64,
    /// `(sample size, partial mean)` at successive sample-size doublings.
    pub partial_means: Vec<(usize, f64)>,
    /// Log-log slope of the partial means against sample size.
    pub growth_slope: Option<f64>,
    pub diverging: bool,
    pub all_censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauStats {
    pub samples: Vec<TauSample>,
    pub moments: Vec<MomentRow>,
}

/// Partial means grow at least like `n^DIVERGENCE_SLOPE` when flagged.
pub const DIVERGENCE_SLOPE: f64 = 0.2;
const MAX_DOUBLINGS: u32 = 10;

/// Runs independent replicas in parallel. Replica `r` uses seed
/// `derive(master, "replica", r)` for both its regime stream and its events.
pub fn simulate_replicas(
    spec: &PollingSpec,
    init: &Configuration,
    replicas: usize,
    horizon: u64,
    master: u64,
) -> Result<Vec<TauSample>> {
    (0..replicas)
        .into_par_iter()
        .map(|replica| {
            let seed = seed::derive(master, "replica", replica as u64);
            let stream = RegimeStream::new(spec, seed::derive(seed, "regimes", 0));
            let mut rng = seed::child_rng(seed, "events", 0);
            let rec = run_until_empty(spec, init, &stream, RunOptions::new(horizon), &mut rng)?;
            Ok(TauSample {
                replica,
                seed,
                tau: rec.tau.time(),
                censored: rec.tau.is_censored(),
                events: rec.events,
                peak_total: rec.peak_total,
            })
        })
        .collect()
}

/// Moment table for the given exponents over a replica set.
pub fn moment_table(samples: &[TauSample], s_list: &[f64]) -> Vec<MomentRow> {
    let taus: Vec<f64> = samples.iter().filter(|t| !t.censored).map(|t| t.tau).collect();
    let censored_fraction =
        if samples.is_empty() { 0.0 } else { (samples.len() - taus.len()) as f64 / samples.len() as f64 };
    s_list
        .iter()
        .map(|&s| {
            if taus.is_empty() {
                return MomentRow {
                    s,
                    mean: None,
                    uncensored: 0,
                    censored_fraction,
                    partial_means: Vec::new(),
                    growth_slope: None,
                    diverging: false,
                    all_censored: !samples.is_empty(),
                };
            }
            let u = taus.len();
            let mut sizes: Vec<usize> = (0..=MAX_DOUBLINGS).rev().map(|j| u >> j).filter(|&n| n >= 8).collect();
            sizes.dedup();
            let mut partial = Vec::with_capacity(sizes.len());
            let mut acc = 0.0;
            let mut next = 0;
            for (i, t) in taus.iter().enumerate() {
                acc += if s == 0.0 { 1.0 } else { t.powf(s) };
                if next < sizes.len() && i + 1 == sizes[next] {
                    partial.push((sizes[next], acc / (i + 1) as f64));
                    next += 1;
                }
            }
            let mean = acc / u as f64;
            let growth_slope = log_log_slope(&partial);
            MomentRow {
                s,
                mean: Some(mean),
                uncensored: u,
                censored_fraction,
                diverging: growth_slope.is_some_and(|g| g > DIVERGENCE_SLOPE),
                partial_means: partial,
                growth_slope,
                all_censored: false,
            }
        })
        .collect()
}

fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, m)| *m > 0.0).map(|&(n, m)| ((n as f64).ln(), m.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    Some(least_squares(&pts).0)
}

/// Slope, intercept and r² of an ordinary least-squares line.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Replicas plus the moment table.
pub fn estimate_tau_stats(
    spec: &PollingSpec,
    init: &Configuration,
    s_list: &[f64],
    replicas: usize,
    horizon: u64,
    master: u64,
) -> Result<TauStats> {
    let samples = simulate_replicas(spec, init, replicas, horizon, master)?;
    let moments = moment_table(&samples, s_list);
    Ok(TauStats { samples, moments })
}

/// Power-law fit of the empirical survival function of tau.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    /// Slope of `log P[tau > t]` against `log t`; estimates `-s0`.
    pub slope: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub r2: f64,
    /// Slopes over the lower and upper halves of the fit range.
    pub half_slopes: (f64, f64),
    /// False when the fit is poor or the tail steepens across the range.
    pub power_tail: bool,
}

pub const MIN_TAIL_SAMPLES: usize = 1000;
const TAIL_KEEP: usize = 30;
const TAIL_GRID: usize = 50;

/// Fits `log P[tau > t] ~ slope * log t` over one decade of `t` ending where
/// thirty uncensored samples remain (or at the earliest censoring time).
/// Censored runs count as exceeding every `t` in the fit range.
pub fn tail_slope(samples: &[(f64, bool)]) -> Result<TailFit> {
    let mut unc: Vec<f64> = samples.iter().filter(|s| !s.1).map(|s| s.0).collect();
    if unc.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail(format!("{} uncensored samples, need {MIN_TAIL_SAMPLES}", unc.len())));
    }
    unc.sort_by(f64::total_cmp);
    let censored = samples.len() - unc.len();
    let t_censor = samples.iter().filter(|s| s.1).map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t_hi = unc[unc.len() - 1 - TAIL_KEEP].min(t_censor);
    let t_lo = t_hi / 10.0;
    if !(t_lo > 0.0) {
        return Err(Error::InsufficientTail("degenerate tail range".into()));
    }
    let n = samples.len() as f64;
    let survival = |t: f64| {
        let above = unc.len() - unc.partition_point(|&x| x <= t);
        (above + censored) as f64 / n
    };
    let pts: Vec<(f64, f64)> = (0..TAIL_GRID)
        .map(|g| {
            let t = t_lo * 10f64.powf(g as f64 / (TAIL_GRID - 1) as f64);
            (t.ln(), survival(t).ln())
        })
        .collect();
    let (slope, _, r2) = least_squares(&pts);
    let half = TAIL_GRID / 2;
    let lower = least_squares(&pts[..half]).0;
    let upper = least_squares(&pts[half..]).0;
    let steepening = upper < 1.5 * lower;
    Ok(TailFit { slope, t_lo, t_hi, r2, half_slopes: (lower, upper), power_tail: r2 >= 0.98 && !steepening })
}

/// Writes `replica,seed,tau,censored,events,peak_total` rows.
pub fn write_tau_csv<W: Write>(mut w: W, samples: &[TauSample]) -> std::io::Result<()> {
    writeln!(w, "replica,seed,tau,censored,events,peak_total")?;
    for s in samples {
        writeln!(w, "{},{},{},{},{},{}", s.replica, s.seed, s.tau, s.censored as u8, s.events, s.peak_total)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_spec;
    use crate::presets::*;
    use crate::stream::FixedRegimes;

    fn fixed(mu: f64) -> FixedRegimes {
        FixedRegimes(vec![Regime::new(mu, vec![0.0])])
    }

    #[test]
    fn embedded_probabilities_two_station() {
        let spec = stable_scalar_spec();
        let cfg = Configuration::new(&spec, 0, vec![2, 0]).unwrap();
        let probs = outcome_probabilities(&spec, &cfg, &Regime::new(3.0, vec![0.4])).unwrap();
        let expected =
            [(Event::Arrival(0), 0.2), (Event::Arrival(1), 0.2), (Event::Feedback(1), 0.24), (Event::Departure, 0.36)];
        assert_eq!(probs.len(), expected.len());
        for ((e, p), (ee, pe)) in probs.iter().zip(expected) {
            assert_eq!(*e, ee);
            assert!((p - pe).abs() < 1e-15);
        }
        let total: f64 = probs.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_gamma_means_no_feedback() {
        let spec = d2_deterministic_spec();
        let cfg = Configuration::new(&spec, 1, vec![0, 3, 1]).unwrap();
        let probs = outcome_probabilities(&spec, &cfg, &Regime::new(4.0, vec![0.0, 0.0])).unwrap();
        for (e, p) in probs {
            if let Event::Feedback(_) = e {
                assert_eq!(p, 0.0);
            }
        }
    }

    #[test]
    fn step_sampling_matches_probabilities() {
        let spec = stable_scalar_spec();
        let cfg = Configuration::new(&spec, 0, vec![2, 0]).unwrap();
        let r = Regime::new(3.0, vec![0.4]);
        let mut rng = seed::rng(3);
        let n = 200_000;
        let mut dep = 0;
        for _ in 0..n {
            let (_, e) = step_embedded(&spec, &cfg, &r, &mut rng).unwrap();
            if e == Event::Departure {
                dep += 1;
            }
        }
        let f = dep as f64 / n as f64;
        // sd = 0.00107
        assert!((f - 0.36).abs() < 0.006, "{f}");
    }

    #[test]
    fn invalid_state_rejected() {
        let spec = stable_scalar_spec();
        let bad = Configuration { server: Server::Station(1), queues: vec![2, 0], gate: 0 };
        let mut rng = seed::rng(0);
        assert!(matches!(
            step_embedded(&spec, &bad, &Regime::new(3.0, vec![0.0]), &mut rng),
            Err(Error::InvalidState(_))
        ));
        let idle = Configuration { server: Server::Idle, queues: vec![1, 0], gate: 0 };
        assert!(idle.check(&spec).is_err());
    }

    #[test]
    fn empty_start_has_zero_tau() {
        let spec = stable_scalar_spec();
        let init = Configuration::empty(&spec);
        let rec = run_until_empty(&spec, &init, &fixed(3.0), RunOptions::new(10), &mut seed::rng(1)).unwrap();
        assert_eq!(rec.tau, Tau::Emptied(0.0));
        assert_eq!(rec.events, 0);
    }

    #[test]
    fn exhaustive_skip_consumes_regimes() {
        // station 1 empty: leaving station 0 jumps straight to station 2
        let spec = PollingSpec {
            d: 2,
            lambda: vec![1e-9; 3],
            nu: d2_deterministic_spec().nu,
            discipline: Discipline::Exhaustive,
        };
        let mut cfg = Configuration::new(&spec, 0, vec![1, 0, 4]).unwrap();
        apply_event(&spec, &mut cfg, Event::Departure).unwrap();
        assert_eq!(relocate(&spec, &mut cfg), Relocation::Moved(2));
        assert_eq!(cfg.server, Server::Station(2));
    }

    #[test]
    fn epochs_follow_station_order() {
        let spec = validate_spec(d2_random_spec()).unwrap();
        let init = Configuration::new(&spec, 0, vec![5, 0, 3]).unwrap();
        for seed_ in 0..20 {
            let stream = RegimeStream::new(&spec, seed_);
            let rec =
                run_until_empty(&spec, &init, &stream, RunOptions::new(100_000).recording(), &mut seed::rng(seed_))
                    .unwrap();
            let mut last = 0.0;
            for (k, ep) in rec.switch_epochs.iter().enumerate() {
                assert_eq!(ep.index, k);
                assert_eq!(ep.station, k % 3);
                assert!(ep.time >= last);
                last = ep.time;
            }
        }
    }

    #[test]
    fn run_is_reproducible() {
        let spec = validate_spec(slow_fast_spec(1.25)).unwrap();
        let init = Configuration::new(&spec, 0, vec![3, 1]).unwrap();
        let go = || {
            let stream = RegimeStream::new(&spec, 77);
            run_until_empty(&spec, &init, &stream, RunOptions::new(50_000).recording(), &mut seed::rng(78)).unwrap()
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn queues_change_by_at_most_one_each() {
        let spec = validate_spec(d2_random_spec()).unwrap();
        let stream = RegimeStream::new(&spec, 2);
        let mut rng = seed::rng(2);
        let mut cfg = Configuration::new(&spec, 0, vec![4, 2, 2]).unwrap();
        let mut epoch = 0;
        for _ in 0..5_000 {
            if cfg.is_empty() {
                break;
            }
            let (mut next, _) = step_embedded(&spec, &cfg, &stream.regime(epoch), &mut rng).unwrap();
            let diffs: Vec<i64> = next.queues.iter().zip(&cfg.queues).map(|(a, b)| *a as i64 - *b as i64).collect();
            let changed = diffs.iter().filter(|d| **d != 0).count();
            let net: i64 = diffs.iter().sum();
            assert!((1..=2).contains(&changed) || (changed == 0 && net == 0));
            assert!(diffs.iter().all(|d| d.abs() <= 1));
            assert!((-1..=1).contains(&net));
            if let Relocation::Moved(k) = relocate(&spec, &mut next) {
                epoch += k;
            }
            cfg = next;
        }
    }

    #[test]
    fn revolver_rotates_queues() {
        let spec = PollingSpec {
            d: 2,
            lambda: vec![1.0; 3],
            nu: vec![crate::model::RegimeLaw::single(Regime::new(4.0, vec![0.0, 0.0]))],
            discipline: Discipline::Revolver,
        };
        let mut cfg = Configuration::new(&spec, 0, vec![1, 0, 5]).unwrap();
        apply_event(&spec, &mut cfg, Event::Departure).unwrap();
        assert_eq!(relocate(&spec, &mut cfg), Relocation::Moved(2));
        assert_eq!(cfg.queues, vec![5, 0, 0]);
        assert_eq!(cfg.server, Server::Station(0));
    }

    #[test]
    fn gated_serves_only_pre_gate_customers() {
        let spec = PollingSpec {
            d: 1,
            lambda: vec![1.0, 1.0],
            nu: vec![crate::model::RegimeLaw::single(Regime::new(2.0, vec![0.5, 0.0])); 2],
            discipline: Discipline::Gated,
        };
        let mut cfg = Configuration::new(&spec, 0, vec![2, 1]).unwrap();
        assert_eq!(cfg.gate, 2);
        apply_event(&spec, &mut cfg, Event::Arrival(0)).unwrap();
        apply_event(&spec, &mut cfg, Event::Feedback(0)).unwrap();
        assert_eq!((cfg.queues[0], cfg.gate), (3, 1));
        apply_event(&spec, &mut cfg, Event::Departure).unwrap();
        assert_eq!(relocate(&spec, &mut cfg), Relocation::Moved(1));
        assert_eq!(cfg.server, Server::Station(1));
        assert_eq!(cfg.gate, 1);
        assert_eq!(cfg.queues, vec![2, 1]);
    }

    #[test]
    fn idle_arrival_law() {
        let spec = PollingSpec { lambda: vec![1.0, 3.0], ..stable_scalar_spec() };
        let mut rng = seed::rng(5);
        let n = 40_000;
        let mut at1 = 0;
        let mut dt = 0.0;
        for _ in 0..n {
            let (t, cfg) = arrival_from_idle(&spec, &mut rng);
            dt += t;
            if cfg.server == Server::Station(1) {
                at1 += 1;
                assert_eq!(cfg.queues, vec![0, 1]);
            }
        }
        assert!((at1 as f64 / n as f64 - 0.75).abs() < 0.01);
        assert!((dt / n as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn zeroth_moment_is_one() {
        let spec = validate_spec(stable_scalar_spec()).unwrap();
        let init = Configuration::new(&spec, 0, vec![4, 0]).unwrap();
        let stats = estimate_tau_stats(&spec, &init, &[0.0, 1.0], 500, 1_000_000, 3).unwrap();
        assert_eq!(stats.moments[0].mean, Some(1.0));
        assert_eq!(stats.moments[0].growth_slope, Some(0.0));
    }

    #[test]
    fn all_censored_flagged() {
        let spec = validate_spec(transient_scalar_spec()).unwrap();
        let init = Configuration::new(&spec, 0, vec![50, 0]).unwrap();
        let stats = estimate_tau_stats(&spec, &init, &[1.0], 20, 10, 3).unwrap();
        assert!(stats.moments[0].all_censored);
        assert_eq!(stats.moments[0].mean, None);
    }

    #[test]
    fn exponential_has_no_power_tail() {
        let mut rng = seed::rng(8);
        let pts: Vec<(f64, bool)> = (0..10_000).map(|_| (rng.sample::<f64, _>(Exp1), false)).collect();
        let fit = tail_slope(&pts).unwrap();
        assert!(!fit.power_tail, "{fit:?}");
    }

    #[test]
    fn pareto_slope_recovered() {
        let mut rng = seed::rng(9);
        let pts: Vec<(f64, bool)> =
            (0..20_000).map(|_| ((1.0 - rng.random::<f64>()).powf(-1.0 / 0.7), false)).collect();
        let fit = tail_slope(&pts).unwrap();
        assert!((fit.slope + 0.7).abs() < 0.1, "{fit:?}");
        assert!(fit.power_tail);
    }

    #[test]
    fn tail_needs_enough_samples() {
        let pts = vec![(1.0, false); 10];
        assert!(matches!(tail_slope(&pts), Err(Error::InsufficientTail(_))));
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_tau_csv(
            &mut buf,
            &[TauSample { replica: 0, seed: 1, tau: 2.5, censored: false, events: 3, peak_total: 4 }],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "replica,seed,tau,censored,events,peak_total\n0,1,2.5,0,3,4\n");
    }
}
