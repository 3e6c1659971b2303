//! Deterministic fluid counterpart of the polling system.
//!
//! Given a fixed regime sequence the fluid levels evolve as
//! `x(i+1) = Ã(i) x(i)`: the server drains its station in time
//! `T = x0 / (mu - lambda)` while every other station fills linearly, then
//! moves on one station. Exhaustive and revolver service are supported.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{step_matrix, Discipline, Matrix, PollingSpec, Regime, ValidatedSpec};
use crate::seed;
use crate::sim::{self, Configuration, Event};
use crate::stream::{Overridden, RegimeSource, RegimeStream};

/// Fluid levels at server epoch `epoch`, seen from station `[epoch]`.
/// The just-emptied station is dropped, so `x` has `d` entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluidState {
    pub epoch: usize,
    pub x: Vec<f64>,
    pub elapsed: f64,
}

impl FluidState {
    pub fn new(epoch: usize, x: Vec<f64>) -> Self {
        Self { epoch, x, elapsed: 0.0 }
    }

    pub fn mass(&self) -> f64 {
        l1(&self.x)
    }
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn require_fluid(spec: &PollingSpec) -> Result<()> {
    if spec.discipline == Discipline::Gated {
        return Err(Error::Unsupported("fluid model for gated service"));
    }
    Ok(())
}

fn check_state(spec: &PollingSpec, state: &FluidState) -> Result<()> {
    if state.x.len() != spec.d {
        return Err(Error::InvalidState(format!("fluid vector of length {}, expected {}", state.x.len(), spec.d)));
    }
    if state.x.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidState("fluid levels must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Time to pump the served station dry.
pub fn drain_time(spec: &PollingSpec, state: &FluidState, r: &Regime) -> Result<f64> {
    let rate = spec.drain_rate(spec.wrap(state.epoch), r);
    if rate <= 0.0 {
        return Err(Error::NonpositiveDrain(rate));
    }
    Ok(state.x.first().copied().unwrap_or(0.0) / rate)
}

/// Fill rate of the station `offset` ahead while the server works at `epoch`.
fn fill_rate(spec: &PollingSpec, epoch: usize, r: &Regime, offset: usize) -> f64 {
    r.mu * spec.feedback(r, offset) + spec.arrival_rate(spec.wrap(epoch), offset)
}

/// One server visit via the explicit update; returns the next state and the
/// drain time.
pub fn fluid_step(spec: &PollingSpec, state: &FluidState, r: &Regime) -> Result<(FluidState, f64)> {
    require_fluid(spec)?;
    check_state(spec, state)?;
    let t = drain_time(spec, state, r)?;
    let d = spec.d;
    let x = (0..d)
        .map(|j| {
            let carried = if j + 1 < d { state.x[j + 1] } else { 0.0 };
            carried + fill_rate(spec, state.epoch, r, j + 1) * t
        })
        .collect();
    Ok((FluidState { epoch: state.epoch + 1, x, elapsed: state.elapsed + t }, t))
}

/// Same step as a matrix-vector product with the step matrix.
pub fn fluid_step_matrix(spec: &PollingSpec, state: &FluidState, r: &Regime) -> Result<(FluidState, f64)> {
    require_fluid(spec)?;
    check_state(spec, state)?;
    let t = drain_time(spec, state, r)?;
    let m = step_matrix(spec, spec.wrap(state.epoch), r)?;
    Ok((FluidState { epoch: state.epoch + 1, x: m.mul_vec(&state.x), elapsed: state.elapsed + t }, t))
}

/// Drops the served coordinate of a full relative configuration, draining
/// it first: `(xi_0, ..., xi_d)` at epoch `i` becomes a `d`-vector at epoch
/// `i + 1` plus the drain time of `xi_0`.
pub fn fluid_first_step(spec: &PollingSpec, epoch: usize, full: &[f64], r: &Regime) -> Result<(FluidState, f64)> {
    require_fluid(spec)?;
    if full.len() != spec.stations() {
        return Err(Error::InvalidState(format!("{} levels for {} stations", full.len(), spec.stations())));
    }
    let rate = spec.drain_rate(spec.wrap(epoch), r);
    if rate <= 0.0 {
        return Err(Error::NonpositiveDrain(rate));
    }
    let t = full[0] / rate;
    let x = (0..spec.d).map(|j| full[j + 1] + fill_rate(spec, epoch, r, j + 1) * t).collect();
    Ok((FluidState { epoch: epoch + 1, x, elapsed: t }, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FluidOutcome {
    /// Total emptying time, including `tail`, the geometric estimate of the
    /// drain time left after truncation. `tail_error` bounds its error.
    Finite {
        total: f64,
        tail: f64,
        tail_error: f64,
    },
    Diverged,
}

impl FluidOutcome {
    pub fn total(self) -> Option<f64> {
        match self {
            FluidOutcome::Finite { total, .. } => Some(total),
            FluidOutcome::Diverged => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluidRun {
    pub outcome: FluidOutcome,
    pub epochs: usize,
    /// `D_1, D_2, ...` as drain times accumulate.
    pub partial_sums: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct FluidOptions {
    pub rel_tol: f64,
    pub max_epochs: usize,
    pub divergence_factor: f64,
}

impl Default for FluidOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, max_epochs: 100_000, divergence_factor: 1e6 }
    }
}

/// Sum of drain times until the fluid is gone.
///
/// The sum stops once the remaining mass falls below `rel_tol` times the
/// initial mass; the rest is estimated from the contraction over the last
/// full cycle.
pub fn fluid_empty_time<S: RegimeSource + ?Sized>(
    spec: &PollingSpec,
    init: &FluidState,
    stream: &S,
    opts: FluidOptions,
) -> Result<FluidRun> {
    require_fluid(spec)?;
    check_state(spec, init)?;
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol {} not in (0,1)", opts.rel_tol)));
    }
    let m0 = init.mass();
    if m0 == 0.0 {
        return Ok(FluidRun {
            outcome: FluidOutcome::Finite { total: 0.0, tail: 0.0, tail_error: 0.0 },
            epochs: 0,
            partial_sums: Vec::new(),
        });
    }
    let cycle = spec.stations();
    let mut state = init.clone();
    let mut masses = vec![m0];
    let mut drains: Vec<f64> = Vec::new();
    let mut partial = Vec::new();
    let mut total = 0.0;
    loop {
        let (next, t) = fluid_step(spec, &state, &stream.regime(state.epoch))?;
        total += t;
        partial.push(total);
        drains.push(t);
        state = next;
        let mass = state.mass();
        masses.push(mass);
        let n = drains.len();
        if mass > opts.divergence_factor * m0 || !mass.is_finite() {
            return Ok(FluidRun { outcome: FluidOutcome::Diverged, epochs: n, partial_sums: partial });
        }
        let ratio = (n >= cycle).then(|| mass / masses[n - cycle]);
        if mass < opts.rel_tol * m0 || n >= opts.max_epochs {
            let contracting = ratio.is_some_and(|q| q < 1.0) || mass == 0.0;
            if !contracting {
                return Ok(FluidRun { outcome: FluidOutcome::Diverged, epochs: n, partial_sums: partial });
            }
            let q = ratio.unwrap_or(0.0);
            let last_cycle: f64 = drains[n.saturating_sub(cycle)..].iter().sum();
            let tail = if mass == 0.0 { 0.0 } else { last_cycle * q / (1.0 - q) };
            return Ok(FluidRun {
                outcome: FluidOutcome::Finite { total: total + tail, tail, tail_error: tail },
                epochs: n,
                partial_sums: partial,
            });
        }
    }
}

/// Fluid emptying time from a full relative configuration `(xi_0..xi_d)` at
/// epoch `epoch`.
pub fn fluid_time_from_levels<S: RegimeSource + ?Sized>(
    spec: &PollingSpec,
    epoch: usize,
    full: &[f64],
    stream: &S,
    opts: FluidOptions,
) -> Result<FluidRun> {
    let (state, t) = fluid_first_step(spec, epoch, full, &stream.regime(epoch))?;
    let rest = fluid_empty_time(spec, &state, stream, opts)?;
    let outcome = match rest.outcome {
        FluidOutcome::Finite { total, tail, tail_error } => FluidOutcome::Finite { total: total + t, tail, tail_error },
        FluidOutcome::Diverged => FluidOutcome::Diverged,
    };
    let mut partial = vec![t];
    partial.extend(rest.partial_sums.iter().map(|p| p + t));
    Ok(FluidRun { outcome, epochs: rest.epochs + 1, partial_sums: partial })
}

/// Writes the per-epoch trajectory as `epoch,station,time,x0..,drain`.
pub fn write_fluid_trace<W: Write, S: RegimeSource + ?Sized>(
    mut w: W,
    spec: &PollingSpec,
    init: &FluidState,
    stream: &S,
    epochs: usize,
) -> Result<()> {
    let io = |e| Error::Io { context: "fluid trace".into(), source: e };
    let cols: Vec<String> = (0..spec.d).map(|j| format!("x{j}")).collect();
    writeln!(w, "epoch,station,time,{},drain", cols.join(",")).map_err(io)?;
    let mut state = init.clone();
    for _ in 0..epochs {
        let (next, t) = fluid_step(spec, &state, &stream.regime(state.epoch))?;
        let xs: Vec<String> = state.x.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{},{},{},{}", state.epoch, spec.wrap(state.epoch), state.elapsed, xs.join(","), t)
            .map_err(io)?;
        state = next;
    }
    Ok(())
}

/// Upper bound on the spread `max_j x_j / min_j x_j` once every station has
/// been visited.
pub fn ratio_bound_k(spec: &ValidatedSpec) -> f64 {
    let d = spec.d as f64;
    let base = 1.0 + (spec.lambda_max() + 1.0) / spec.eps0();
    base.powi(spec.d as i32 + 1) * (d + 1.0) * spec.m0().powi(2) / spec.lambda_min().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioCheck {
    pub max_ratio: f64,
    pub k: f64,
    pub ok: bool,
    /// Epochs skipped because a component was exactly zero.
    pub zero_components: usize,
}

/// Largest component spread over epochs `i > d` of one fluid run.
pub fn check_ratio_bound<S: RegimeSource + ?Sized>(
    spec: &ValidatedSpec,
    init: &FluidState,
    stream: &S,
    epochs: usize,
) -> Result<RatioCheck> {
    require_fluid(spec)?;
    check_state(spec, init)?;
    if init.x.contains(&0.0) {
        return Err(Error::InvalidArgument("every initial component must be nonzero".into()));
    }
    let k = ratio_bound_k(spec);
    let mut state = init.clone();
    let mut max_ratio: f64 = 1.0;
    let mut zero_components = 0;
    for i in 1..=epochs {
        state = fluid_step(spec, &state, &stream.regime(state.epoch))?.0;
        // renormalize so long runs stay in range; the ratio is scale free
        let mass = state.mass();
        if mass > 0.0 {
            state.x.iter_mut().for_each(|v| *v /= mass);
        }
        if i <= spec.d {
            continue;
        }
        let lo = state.x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = state.x.iter().copied().fold(0.0, f64::max);
        if lo == 0.0 {
            zero_components += 1;
            continue;
        }
        max_ratio = max_ratio.max(hi / lo);
    }
    Ok(RatioCheck { max_ratio, k, ok: max_ratio <= k, zero_components })
}

/// Constants `(C1, C2)` with `C1 |x| <= |Ã x| <= C2 |x|` for every step.
pub fn norm_sandwich(spec: &ValidatedSpec) -> (f64, f64) {
    let d = spec.d as f64;
    let c1 = (d * spec.lambda_min() / spec.m0()).min(1.0);
    let c2 = ((spec.m0() + d * spec.lambda_max()) / spec.eps0()).max(1.0);
    (c1, c2)
}

/// Emptying time over `n` full cycles against the norm of the partial sum of
/// cycle products on the same regimes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleSandwich {
    pub emptying_time: f64,
    pub product_sum_norm: f64,
    pub lower: f64,
    pub upper: f64,
}

impl CycleSandwich {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.emptying_time.abs();
        self.lower * self.product_sum_norm <= self.emptying_time + slack
            && self.emptying_time <= self.upper * self.product_sum_norm + slack
    }
}

/// Computes `D` after `n (d+1)` epochs from epoch 0 together with bounds
/// `lower, upper` so that `lower |L| <= D <= upper |L|`, where `L` is the sum
/// of the first `n` cycle products.
///
/// Lower: the mass present after a cycle arrived during that cycle, at rate
/// at most `M0 + d max(lambda)`, and `|B x| >= min(x) |B|`.
/// Upper: each cycle drains at most `(1 + C2 + .. + C2^d)|x| / eps0` and the
/// first cycle product has norm at least `d C1^(d+1)`.
pub fn cycle_sandwich<S: RegimeSource + ?Sized>(
    spec: &ValidatedSpec,
    init: &[f64],
    stream: &S,
    n: usize,
) -> Result<CycleSandwich> {
    require_fluid(spec)?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one cycle".into()));
    }
    let cycle = spec.stations();
    let dim = spec.d;
    let mut state = FluidState::new(0, init.to_vec());
    check_state(spec, &state)?;
    let mut emptying_time = 0.0;
    let mut product = Matrix::identity(dim);
    let mut sum = Matrix::zeros(dim);
    for c in 0..n {
        for k in 0..cycle {
            let epoch = c * cycle + k;
            let r = stream.regime(epoch);
            let (next, t) = fluid_step(spec, &state, &r)?;
            emptying_time += t;
            state = next;
            product = step_matrix(spec, spec.wrap(epoch), &r)?.mul(&product);
        }
        for (s, p) in sum.as_mut_slice().iter_mut().zip(product.as_slice()) {
            *s += p;
        }
    }
    let (c1, c2) = norm_sandwich(spec);
    let mass = l1(init);
    let min_x = init.iter().copied().fold(f64::INFINITY, f64::min);
    let lower = min_x / (spec.m0() + spec.d as f64 * spec.lambda_max());
    let geometric: f64 = (0..cycle).map(|j| c2.powi(j as i32)).sum();
    let upper = geometric / spec.eps0() * (1.0 + 1.0 / (dim as f64 * c1.powi(cycle as i32))) * mass;
    Ok(CycleSandwich { emptying_time, product_sum_norm: sum.l1_norm(), lower, upper })
}

/// Result of running the stochastic system and its fluid counterpart side by
/// side on shared regimes until the first server jump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub y0: f64,
    pub delta: f64,
    pub replicas: usize,
    /// Fraction with `|sigma - T| <= delta y0`.
    pub time_within: f64,
    /// Fraction whose post-jump queue vector is within `delta y0` of the fluid
    /// one in every component. Jumps past the next station count as misses.
    pub vector_within: f64,
    /// `V` in `1 - exp(-V y0)` matched to the time frequency; `None` when
    /// every replica was within.
    pub fitted_rate: Option<f64>,
    pub mean_abs_time_gap: f64,
}

/// One stochastic and one fluid visit per replica, sharing the regime of the
/// first visit. The system starts with `ceil(y0)` customers at station 0 and
/// nothing elsewhere; the fluid starts with `y0`.
pub fn coupling_experiment(
    spec: &ValidatedSpec,
    y0: f64,
    delta: f64,
    replicas: usize,
    master: u64,
) -> Result<CouplingReport> {
    if spec.discipline != Discipline::Exhaustive {
        return Err(Error::Unsupported("coupling experiment needs exhaustive service"));
    }
    if !(y0 > 0.0) || !(delta > 0.0) || replicas == 0 {
        return Err(Error::InvalidArgument("coupling needs y0 > 0, delta > 0, replicas > 0".into()));
    }
    let queues0 = y0.ceil() as u64;
    let mut queues = vec![0; spec.stations()];
    queues[0] = queues0;
    let init = Configuration::new(spec, 0, queues)?;
    let mut full = vec![0.0; spec.stations()];
    full[0] = y0;
    let tol = delta * y0;
    let rows: Vec<(bool, bool, f64)> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let seed_r = seed::derive(master, "coupling", rep as u64);
            let stream = RegimeStream::new(spec, seed::derive(seed_r, "regimes", 0));
            let mut rng = seed::child_rng(seed_r, "events", 0);
            let (fluid, t) = fluid_first_step(spec, 0, &full, &stream.regime(0))?;
            let jump = sim::run_until_switch(spec, &init, &stream, u64::MAX, &mut rng)?
                .expect("unbounded horizon always reaches a jump");
            let gap = (jump.time - t).abs();
            // queue vector seen from station 1: stations 1..d then station 0
            let vector_ok = jump.advanced == 1
                && jump.config.relative()[..spec.d].iter().zip(&fluid.x).all(|(z, zf)| (*z as f64 - zf).abs() <= tol);
            Ok((gap <= tol, vector_ok, gap))
        })
        .collect::<Result<_>>()?;
    let n = replicas as f64;
    let time_within = rows.iter().filter(|r| r.0).count() as f64 / n;
    let vector_within = rows.iter().filter(|r| r.1).count() as f64 / n;
    let fitted_rate = (time_within < 1.0).then(|| -(1.0 - time_within).ln() / y0);
    let mean_abs_time_gap = rows.iter().map(|r| r.2).sum::<f64>() / n;
    Ok(CouplingReport { y0, delta, replicas, time_within, vector_within, fitted_rate, mean_abs_time_gap })
}

/// Exact one-step drift of the fluid emptying time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub drift: f64,
    /// `-1/Z` for the regime in force.
    pub target: f64,
    /// `1/(sum(lambda) + M0)`; the drift lies below `-eps_hat`.
    pub eps_hat: f64,
    pub f_current: f64,
    /// Each embedded outcome with its probability and fluid emptying time.
    pub outcomes: Vec<(Event, f64, f64)>,
    /// Truncation error carried by the fluid evaluations.
    pub error_bound: f64,
}

/// Enumerates every embedded transition out of `cfg` under regime `r` and
/// averages the change of the fluid emptying time, holding the regimes of all
/// later epochs fixed to `stream`.
///
/// The emptying time is linear in the relative queue vector, so it is
/// evaluated through its coefficient vector; every branch then shares one
/// truncation point and the average is exact up to rounding.
pub fn drift_check<S: RegimeSource + ?Sized>(
    spec: &ValidatedSpec,
    cfg: &Configuration,
    r: &Regime,
    stream: &S,
    opts: FluidOptions,
) -> Result<DriftReport> {
    if spec.discipline != Discipline::Exhaustive {
        return Err(Error::Unsupported("drift check needs exhaustive service"));
    }
    cfg.check(spec)?;
    let n = cfg.station().expect("checked nonempty");
    let source = Overridden { inner: stream, at: n, first: r.clone() };
    let coeffs = fluid_coefficients(spec, n, &source, opts)?;
    let f = |xi: &[f64]| xi.iter().zip(&coeffs.values).map(|(a, b)| a * b).sum::<f64>();
    let cur: Vec<f64> = cfg.relative().iter().map(|q| *q as f64).collect();
    let f_current = f(&cur);
    let mut outcomes = Vec::new();
    let mut drift = 0.0;
    for (event, p) in sim::outcome_probabilities(spec, cfg, r)? {
        let mut next = cur.clone();
        match event {
            Event::Arrival(i) => next[i] += 1.0,
            Event::Feedback(i) => {
                next[0] -= 1.0;
                next[i] += 1.0;
            }
            Event::Departure => next[0] -= 1.0,
        }
        let fn_ = f(&next);
        drift += p * (fn_ - f_current);
        outcomes.push((event, p, fn_));
    }
    let z = sim::total_rate(spec, r);
    Ok(DriftReport {
        drift,
        target: -1.0 / z,
        eps_hat: 1.0 / (spec.total_arrival_rate() + spec.m0()),
        f_current,
        outcomes,
        error_bound: coeffs.tail_error * (cur.iter().sum::<f64>() + 1.0),
    })
}

struct Coefficients {
    values: Vec<f64>,
    tail_error: f64,
}

/// Coefficients `c` with fluid emptying time `c . xi` for full relative
/// levels `xi` at epoch `epoch`, computed by carrying all unit vectors
/// through the same steps.
fn fluid_coefficients<S: RegimeSource + ?Sized>(
    spec: &PollingSpec,
    epoch: usize,
    stream: &S,
    opts: FluidOptions,
) -> Result<Coefficients> {
    let m = spec.stations();
    let r = stream.regime(epoch);
    // levels after the first drain, one column per unit vector
    let mut cols: Vec<FluidState> = Vec::with_capacity(m);
    let mut values = vec![0.0; m];
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        let (state, t) = fluid_first_step(spec, epoch, &e, &r)?;
        values[j] = t;
        cols.push(state);
    }
    let start: f64 = cols.iter().map(FluidState::mass).sum();
    let mut history = vec![start];
    let mut drains: Vec<f64> = Vec::new();
    loop {
        let r = stream.regime(cols[0].epoch);
        let mut step_total = 0.0;
        for (j, col) in cols.iter_mut().enumerate() {
            let (next, t) = fluid_step(spec, col, &r)?;
            values[j] += t;
            step_total += t;
            *col = next;
        }
        drains.push(step_total);
        let mass: f64 = cols.iter().map(FluidState::mass).sum();
        history.push(mass);
        let k = drains.len();
        if mass > opts.divergence_factor * start || !mass.is_finite() {
            return Err(Error::DivergedFluid);
        }
        if mass < opts.rel_tol * start || k >= opts.max_epochs {
            let q = if k >= m { mass / history[k - m] } else { 0.0 };
            if mass > 0.0 && q >= 1.0 {
                return Err(Error::DivergedFluid);
            }
            let last: f64 = drains[k.saturating_sub(m)..].iter().sum();
            let tail = if mass == 0.0 { 0.0 } else { last * q / (1.0 - q) };
            return Ok(Coefficients { values, tail_error: tail });
        }
    }
}
