//! Moment growth rates of random cycle-matrix products.
//!
//! `k(s) = lim (E |A_n ... A_1|^s)^(1/n)` is estimated by Monte Carlo over
//! renormalized products. Because `E|P|^s` is dominated by rare large
//! products, atoms are drawn from a tilted law fitted by a few rounds of
//! cross-entropy on pilot runs, and every replica carries its likelihood
//! ratio. The estimator stays unbiased for `E|P|^s`; only its variance
//! depends on the tilt.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{slot_matrices, Matrix, PollingSpec};
use crate::seed::{self, Rng as SimRng};

const PILOT_ROUNDS: usize = 4;
const PILOT_SIZE: usize = 2000;
/// Share of the original law kept in every fitted tilt.
const TILT_FLOOR: f64 = 0.02;

struct Slot {
    matrices: Vec<Matrix>,
    log_p: Vec<f64>,
}

/// Sampling law per cycle slot.
#[derive(Debug, Clone)]
struct Tilt {
    cdf: Vec<Vec<f64>>,
    log_q: Vec<Vec<f64>>,
}

impl Tilt {
    fn from_probs(probs: &[Vec<f64>]) -> Self {
        let cdf = probs
            .iter()
            .map(|p| {
                let mut acc = 0.0;
                p.iter()
                    .map(|x| {
                        acc += x;
                        acc
                    })
                    .collect()
            })
            .collect();
        let log_q = probs.iter().map(|p| p.iter().map(|x| x.ln()).collect()).collect();
        Self { cdf, log_q }
    }

    fn sample(&self, slot: usize, rng: &mut SimRng) -> usize {
        let cdf = &self.cdf[slot];
        let u = rng.random::<f64>() * cdf[cdf.len() - 1];
        cdf.iter().position(|c| u < *c).unwrap_or(cdf.len() - 1)
    }
}

struct Sampler {
    slots: Vec<Slot>,
    dim: usize,
}

impl Sampler {
    fn new(spec: &PollingSpec) -> Result<Self> {
        let mats = slot_matrices(spec)?;
        let slots = mats
            .into_iter()
            .enumerate()
            .map(|(k, matrices)| Slot {
                matrices,
                log_p: spec.law_for_slot(k).atoms().iter().map(|(_, p)| p.ln()).collect(),
            })
            .collect();
        Ok(Self { slots, dim: spec.matrix_dim() })
    }

    fn original(&self) -> Vec<Vec<f64>> {
        self.slots.iter().map(|s| s.log_p.iter().map(|l| l.exp()).collect()).collect()
    }

    fn random(&self) -> bool {
        self.slots.iter().any(|s| s.matrices.len() > 1)
    }

    /// Steps per cycle, the unit of the multiplication budget.
    fn cycle_len(&self) -> u64 {
        self.slots.len() as u64
    }
}

/// One product of `n` cycles applied to `start`: returns the log likelihood
/// ratio and `log |P start|`. Atom counts per slot are added to `counts` when
/// given.
fn run_product(
    sampler: &Sampler,
    tilt: &Tilt,
    n: usize,
    start: &[f64],
    rng: &mut SimRng,
    mut counts: Option<&mut [Vec<u32>]>,
    mut per_cycle: Option<&mut Vec<(f64, f64)>>,
) -> Result<(f64, f64)> {
    let mut v = start.to_vec();
    let mut buf = vec![0.0; sampler.dim];
    let mut log_w = 0.0;
    let mut log_norm = 0.0;
    for _ in 0..n {
        for (k, slot) in sampler.slots.iter().enumerate() {
            let a = tilt.sample(k, rng);
            log_w += slot.log_p[a] - tilt.log_q[k][a];
            if let Some(c) = counts.as_deref_mut() {
                c[k][a] += 1;
            }
            mul_vec_into(&slot.matrices[a], &v, &mut buf);
            std::mem::swap(&mut v, &mut buf);
        }
        let norm: f64 = v.iter().sum();
        if !(norm > 0.0) {
            return Err(Error::DegenerateNorm);
        }
        log_norm += norm.ln();
        v.iter_mut().for_each(|x| *x /= norm);
        if let Some(p) = per_cycle.as_deref_mut() {
            p.push((log_w, log_norm));
        }
    }
    Ok((log_w, log_norm))
}

fn mul_vec_into(m: &Matrix, x: &[f64], out: &mut [f64]) {
    let d = m.dim();
    let a = m.as_slice();
    for i in 0..d {
        out[i] = a[i * d..(i + 1) * d].iter().zip(x).map(|(p, q)| p * q).sum();
    }
}

/// `log mean exp(x)` and the delta-method standard error of that log.
fn log_mean_exp(xs: &[f64]) -> (f64, f64, f64) {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let r = xs.len() as f64;
    let ys: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let mean = ys.iter().sum::<f64>() / r;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (r - 1.0).max(1.0);
    let ess = ys.iter().sum::<f64>().powi(2) / ys.iter().map(|y| y * y).sum::<f64>();
    (m + mean.ln(), (var / r).sqrt() / mean, ess)
}

/// Fits a tilt for `E|P|^s` over `n`-cycle products by weighted atom
/// frequencies on pilot runs.
fn fit_tilt(sampler: &Sampler, s: f64, n: usize, pilot: usize, seed_: u64) -> Result<Tilt> {
    let original = sampler.original();
    let mut tilt = Tilt::from_probs(&original);
    if !sampler.random() || s == 0.0 {
        return Ok(tilt);
    }
    let ones = vec![1.0; sampler.dim];
    for round in 0..PILOT_ROUNDS {
        let round_seed = seed::derive(seed_, "pilot", round as u64);
        let runs: Vec<(f64, Vec<Vec<u32>>)> = (0..pilot)
            .into_par_iter()
            .map(|r| {
                let mut rng = seed::child_rng(round_seed, "replica", r as u64);
                let mut counts: Vec<Vec<u32>> = sampler.slots.iter().map(|s| vec![0; s.matrices.len()]).collect();
                let (lw, ln) = run_product(sampler, &tilt, n, &ones, &mut rng, Some(&mut counts), None)?;
                Ok((lw + s * ln, counts))
            })
            .collect::<Result<_>>()?;
        let top = runs.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
        let mut freq: Vec<Vec<f64>> = sampler.slots.iter().map(|s| vec![0.0; s.matrices.len()]).collect();
        for (lx, counts) in &runs {
            let w = (lx - top).exp();
            for (f, c) in freq.iter_mut().zip(counts) {
                for (fa, ca) in f.iter_mut().zip(c) {
                    *fa += w * *ca as f64;
                }
            }
        }
        let probs: Vec<Vec<f64>> = freq
            .iter()
            .zip(&original)
            .map(|(f, p)| {
                let total: f64 = f.iter().sum();
                f.iter().zip(p).map(|(fa, pa)| (1.0 - TILT_FLOOR) * fa / total + TILT_FLOOR * pa).collect()
            })
            .collect();
        tilt = Tilt::from_probs(&probs);
    }
    Ok(tilt)
}

#[derive(Debug, Clone, Copy)]
pub struct KOptions {
    /// Cycles per product.
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Also estimate at `2n` and flag a length bias.
    pub length_check: bool,
}

impl KOptions {
    pub fn new(n: usize, replicas: usize, seed: u64) -> Self {
        Self { n, replicas, seed, length_check: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KEstimate {
    pub s: f64,
    pub k_hat: f64,
    pub stderr: f64,
    pub log_k: f64,
    pub log_stderr: f64,
    pub n: usize,
    pub replicas: usize,
    /// Effective sample size of the weighted replicas.
    pub ess: f64,
    pub k_hat_2n: Option<f64>,
    /// The `n` and `2n` estimates differ beyond noise and by more than 2%.
    pub length_bias: bool,
}

impl KEstimate {
    fn exact_one(s: f64, opts: &KOptions) -> Self {
        Self {
            s,
            k_hat: 1.0,
            stderr: 0.0,
            log_k: 0.0,
            log_stderr: 0.0,
            n: opts.n,
            replicas: opts.replicas,
            ess: opts.replicas as f64,
            k_hat_2n: None,
            length_bias: false,
        }
    }
}

fn check_k_args(s: f64, opts: &KOptions) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s = {s}: only finite s >= 0 is supported")));
    }
    if opts.n == 0 || opts.replicas < 2 {
        return Err(Error::InvalidArgument("need n >= 1 and at least 2 replicas".into()));
    }
    Ok(())
}

fn estimate_log_moment(sampler: &Sampler, s: f64, n: usize, replicas: usize, seed_: u64) -> Result<(f64, f64, f64)> {
    let tilt = fit_tilt(sampler, s, n, replicas.min(PILOT_SIZE), seed::derive(seed_, "tilt", 0))?;
    let ones = vec![1.0; sampler.dim];
    let main = seed::derive(seed_, "main", 0);
    let xs: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::child_rng(main, "replica", r as u64);
            let (lw, ln) = run_product(sampler, &tilt, n, &ones, &mut rng, None, None)?;
            Ok(lw + s * ln)
        })
        .collect::<Result<_>>()?;
    Ok(log_mean_exp(&xs))
}

/// Estimates `k(s)` from `replicas` products of `n` cycles.
pub fn estimate_k(spec: &PollingSpec, s: f64, opts: KOptions) -> Result<KEstimate> {
    check_k_args(s, &opts)?;
    if s == 0.0 {
        return Ok(KEstimate::exact_one(s, &opts));
    }
    let sampler = Sampler::new(spec)?;
    let (log_m, log_se, ess) = estimate_log_moment(&sampler, s, opts.n, opts.replicas, opts.seed)?;
    let nf = opts.n as f64;
    let log_k = log_m / nf;
    let log_stderr = log_se / nf;
    let k_hat = log_k.exp();
    let (k_hat_2n, length_bias) = if opts.length_check {
        let (m2, se2, _) =
            estimate_log_moment(&sampler, s, 2 * opts.n, opts.replicas, seed::derive(opts.seed, "double", 0))?;
        let (lk2, lse2) = (m2 / (2.0 * nf), se2 / (2.0 * nf));
        let gap = (log_k - lk2).abs();
        (Some(lk2.exp()), gap > 3.0 * (log_stderr.powi(2) + lse2.powi(2)).sqrt() && gap > 0.02)
    } else {
        (None, false)
    };
    Ok(KEstimate {
        s,
        k_hat,
        stderr: k_hat * log_stderr,
        log_k,
        log_stderr,
        n: opts.n,
        replicas: opts.replicas,
        ess,
        k_hat_2n,
        length_bias,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopExponent {
    pub lambda: f64,
    pub stderr: f64,
    pub n: usize,
    pub replicas: usize,
}

/// Almost-sure growth rate of the cycle products: a positive start vector is
/// pushed through `n` cycles; the mean log growth per cycle is averaged over
/// replicas.
pub fn estimate_top_exponent(spec: &PollingSpec, n: usize, replicas: usize, seed_: u64) -> Result<TopExponent> {
    if n == 0 || replicas < 2 {
        return Err(Error::InvalidArgument("need n >= 1 and at least 2 replicas".into()));
    }
    let sampler = Sampler::new(spec)?;
    let tilt = Tilt::from_probs(&sampler.original());
    let start = vec![1.0 / sampler.dim as f64; sampler.dim];
    let rates: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::child_rng(seed_, "top", r as u64);
            let (_, ln) = run_product(&sampler, &tilt, n, &start, &mut rng, None, None)?;
            Ok(ln / n as f64)
        })
        .collect::<Result<_>>()?;
    let rf = replicas as f64;
    let mean = rates.iter().sum::<f64>() / rf;
    let var = rates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rf - 1.0);
    Ok(TopExponent { lambda: mean, stderr: (var / rf).sqrt(), n, replicas })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum S0Outcome {
    /// `s0` lies in `[lo, hi]`.
    Bracket { lo: f64, hi: f64 },
    /// The top exponent is positive.
    AtZero,
    /// `k(s_max) < 1`, so `s0 >= s_max`.
    LowerBound(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct S0Result {
    pub outcome: S0Outcome,
    /// Set when a probe stayed inconclusive or the budget ran out.
    pub low_confidence: bool,
    pub probes: Vec<KEstimate>,
    pub multiplications: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct S0Options {
    pub s_max: f64,
    pub tol: f64,
    /// Two-sided confidence for every sign decision.
    pub confidence: f64,
    /// Cap on step-matrix applications, pilots included.
    pub budget: u64,
    pub n: usize,
    pub replicas: usize,
    pub max_replicas: usize,
    pub seed: u64,
}

impl Default for S0Options {
    fn default() -> Self {
        Self {
            s_max: 8.0,
            tol: 0.02,
            confidence: 0.99,
            budget: 4_000_000_000,
            n: 64,
            replicas: 4000,
            max_replicas: 64_000,
            seed: 0,
        }
    }
}

/// Standard-normal quantile for a two-sided confidence level.
pub fn z_score(confidence: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(0.5 + confidence / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sign {
    Below,
    Above,
    Unclear,
}

/// Locates `s0 = inf{s : k(s) > 1}` by bisection on the sign of `log k(s)`,
/// doubling replicas at a probe until its interval excludes zero.
pub fn estimate_s0(spec: &PollingSpec, top: &TopExponent, opts: S0Options) -> Result<S0Result> {
    if !(opts.s_max > 0.0) || !(opts.tol > 0.0) || !(opts.confidence > 0.0 && opts.confidence < 1.0) {
        return Err(Error::InvalidArgument("need s_max > 0, tol > 0, confidence in (0,1)".into()));
    }
    let z = z_score(opts.confidence);
    let mut result =
        S0Result { outcome: S0Outcome::AtZero, low_confidence: false, probes: Vec::new(), multiplications: 0 };
    if top.lambda - z * top.stderr > 0.0 {
        return Ok(result);
    }
    let sampler = Sampler::new(spec)?;
    let per_replica = opts.n as u64 * sampler.cycle_len();
    let probe = |s: f64, result: &mut S0Result| -> Result<Sign> {
        let mut replicas = opts.replicas;
        loop {
            let cost = per_replica * (replicas + PILOT_ROUNDS * replicas.min(PILOT_SIZE)) as u64;
            if result.multiplications + cost > opts.budget {
                result.low_confidence = true;
                return Ok(Sign::Unclear);
            }
            result.multiplications += cost;
            let probe_seed = seed::derive(opts.seed, "probe", s.to_bits() ^ replicas as u64);
            let est = estimate_k(spec, s, KOptions::new(opts.n, replicas, probe_seed))?;
            let sign = if est.log_k - z * est.log_stderr > 0.0 {
                Sign::Above
            } else if est.log_k + z * est.log_stderr < 0.0 {
                Sign::Below
            } else {
                Sign::Unclear
            };
            result.probes.push(est);
            if sign != Sign::Unclear || replicas >= opts.max_replicas {
                return Ok(sign);
            }
            replicas *= 2;
        }
    };
    let (mut lo, mut hi) = (0.0, opts.s_max);
    match probe(opts.s_max, &mut result)? {
        Sign::Below => {
            result.outcome = S0Outcome::LowerBound(opts.s_max);
            return Ok(result);
        }
        Sign::Unclear => {
            result.low_confidence = true;
            result.outcome = S0Outcome::LowerBound(opts.s_max);
            return Ok(result);
        }
        Sign::Above => {}
    }
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        match probe(mid, &mut result)? {
            Sign::Below => lo = mid,
            Sign::Above => hi = mid,
            Sign::Unclear => {
                result.low_confidence = true;
                break;
            }
        }
    }
    result.outcome = S0Outcome::Bracket { lo, hi };
    Ok(result)
}

/// Midpoint convexity of `log k` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityCheck {
    pub ok: bool,
    /// `(s, excess)` at the worst interior point, in units of `log k`.
    pub worst: Option<(f64, f64)>,
    pub checked: usize,
}

/// Checks that `log k_hat` at every interior grid point lies below the chord
/// of its neighbours, allowing three combined standard errors.
pub fn check_log_convexity(estimates: &[KEstimate]) -> ConvexityCheck {
    let mut pts: Vec<&KEstimate> = estimates.iter().collect();
    pts.sort_by(|a, b| a.s.total_cmp(&b.s));
    let mut worst: Option<(f64, f64)> = None;
    let mut ok = true;
    let mut checked = 0;
    for w in pts.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        if c.s == a.s {
            continue;
        }
        let t = (b.s - a.s) / (c.s - a.s);
        let chord = (1.0 - t) * a.log_k + t * c.log_k;
        let excess = b.log_k - chord;
        let noise =
            ((1.0 - t).powi(2) * a.log_stderr.powi(2) + b.log_stderr.powi(2) + t.powi(2) * c.log_stderr.powi(2)).sqrt();
        checked += 1;
        if worst.is_none_or(|(_, e)| excess > e) {
            worst = Some((b.s, excess));
        }
        if excess > 3.0 * noise + 1e-12 * (1.0 + b.log_k.abs()) {
            ok = false;
        }
    }
    ConvexityCheck { ok, worst, checked }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeriesVerdict {
    Bounded,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDiagnostic {
    pub s: f64,
    /// `log E|L_N|^s` for `N = 1..=N_max`, where `L_N` is the sum of the first
    /// `N` partial cycle products.
    pub log_moments: Vec<f64>,
    pub log_stderr: Vec<f64>,
    pub verdict: SeriesVerdict,
}

/// Growth in `N` of `E|C1 + C2 C1 + ... + CN...C1|^s` for i.i.d. cycle
/// matrices `Ci`.
///
/// Each replica's prefix likelihood ratio reweights its first `N` cycles, so
/// one tilted run serves every `N`. The verdict compares the last quarter's
/// increase of the log moment with the quarter before it: no significant
/// increase is BOUNDED, an undiminished increase is DIVERGING.
pub fn series_tail_diagnostic(
    spec: &PollingSpec,
    s: f64,
    n_max: usize,
    replicas: usize,
    seed_: u64,
) -> Result<SeriesDiagnostic> {
    if !(s > 0.0) || n_max < 4 || replicas < 2 {
        return Err(Error::InvalidArgument("need s > 0, n_max >= 4, replicas >= 2".into()));
    }
    let sampler = Sampler::new(spec)?;
    let tilt = fit_tilt(&sampler, s, n_max, replicas.min(PILOT_SIZE), seed::derive(seed_, "tilt", 0))?;
    let ones = vec![1.0; sampler.dim];
    let main = seed::derive(seed_, "series", 0);
    let paths: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::child_rng(main, "replica", r as u64);
            let mut cycles = Vec::with_capacity(n_max);
            run_product(&sampler, &tilt, n_max, &ones, &mut rng, None, Some(&mut cycles))?;
            let mut log_sum = f64::NEG_INFINITY;
            Ok(cycles
                .iter()
                .map(|&(lw, ln)| {
                    log_sum = log_add_exp(log_sum, ln);
                    lw + s * log_sum
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut log_moments = Vec::with_capacity(n_max);
    let mut log_stderr = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let xs: Vec<f64> = paths.iter().map(|p| p[n]).collect();
        let (m, se, _) = log_mean_exp(&xs);
        log_moments.push(m);
        log_stderr.push(se);
    }
    let verdict = series_verdict(&log_moments, &log_stderr);
    Ok(SeriesDiagnostic { s, log_moments, log_stderr, verdict })
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn series_verdict(m: &[f64], se: &[f64]) -> SeriesVerdict {
    let last = m.len() - 1;
    let (a, b) = (last / 2, (3 * last) / 4);
    let noise = |i: usize, j: usize| 3.0 * (se[i].powi(2) + se[j].powi(2)).sqrt() + 1e-9;
    let early = m[b] - m[a];
    let late = m[last] - m[b];
    if late <= noise(b, last) {
        SeriesVerdict::Bounded
    } else if late >= 0.9 * early - noise(a, b) {
        SeriesVerdict::Diverging
    } else {
        SeriesVerdict::Inconclusive
    }
}

/// Default report grid `0, 0.25, ..., s_max`.
pub fn default_grid(s_max: f64) -> Vec<f64> {
    let steps = (s_max / 0.25).round() as usize;
    (0..=steps).map(|i| i as f64 * 0.25).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub s_grid: Vec<f64>,
    pub estimates: Vec<KEstimate>,
    pub n: usize,
    pub replicas: usize,
    pub top_exponent: TopExponent,
    pub s0: S0Result,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub grid: Vec<f64>,
    pub n: usize,
    pub replicas: usize,
    pub top_n: usize,
    pub top_replicas: usize,
    pub length_check: bool,
    pub s0: S0Options,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            grid: default_grid(8.0),
            n: 64,
            replicas: 4000,
            top_n: 1000,
            top_replicas: 64,
            length_check: true,
            s0: S0Options::default(),
            seed: 0,
        }
    }
}

/// `k` on a grid, the top exponent and `s0`, each from its own seed branch.
pub fn lyapunov_report(spec: &PollingSpec, opts: &ReportOptions) -> Result<LyapunovReport> {
    let top = estimate_top_exponent(spec, opts.top_n, opts.top_replicas, seed::derive(opts.seed, "top", 0))?;
    let estimates = opts
        .grid
        .iter()
        .map(|&s| {
            let kopts = KOptions {
                n: opts.n,
                replicas: opts.replicas,
                seed: seed::derive(opts.seed, "grid", s.to_bits()),
                length_check: opts.length_check,
            };
            estimate_k(spec, s, kopts)
        })
        .collect::<Result<Vec<_>>>()?;
    let s0 = estimate_s0(spec, &top, S0Options { seed: seed::derive(opts.seed, "s0", 0), ..opts.s0 })?;
    Ok(LyapunovReport {
        s_grid: opts.grid.clone(),
        estimates,
        n: opts.n,
        replicas: opts.replicas,
        top_exponent: top,
        s0,
    })
}

/// Writes `s,k_hat,stderr` rows.
pub fn write_k_csv<W: Write>(mut w: W, estimates: &[KEstimate]) -> std::io::Result<()> {
    writeln!(w, "s,k_hat,stderr")?;
    for e in estimates {
        writeln!(w, "{},{},{}", e.s, e.k_hat, e.stderr)?;
    }
    Ok(())
}
