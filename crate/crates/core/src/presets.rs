//! Reference systems with closed-form stability parameters.
//!
//! The two-station systems have scalar cycle matrices, so `k(s)`, the top
//! exponent and `s0` are known exactly; they anchor the estimators.

use crate::model::{Discipline, PollingSpec, Regime, RegimeLaw};

fn regime(mu: f64) -> Regime {
    Regime::new(mu, vec![0.0])
}

fn two_station(mu0: RegimeLaw, mu1: RegimeLaw) -> PollingSpec {
    PollingSpec { d: 1, lambda: vec![1.0, 1.0], nu: vec![mu0, mu1], discipline: Discipline::Exhaustive }
}

/// Unit arrivals, `mu = 3` at both stations: cycle value `A = 0.25`.
pub fn stable_scalar_spec() -> PollingSpec {
    two_station(RegimeLaw::single(regime(3.0)), RegimeLaw::single(regime(3.0)))
}

/// Station 0 at `mu = 5`, station 1 at `mu = 3`: `A = 0.25 * 0.5 = 0.125`.
pub fn contracting_scalar_spec() -> PollingSpec {
    two_station(RegimeLaw::single(regime(5.0)), RegimeLaw::single(regime(3.0)))
}

/// Station 0 at `mu = 1.25`, station 1 at `mu = 1.5`: `A = 4 * 2 = 8`.
pub fn transient_scalar_spec() -> PollingSpec {
    two_station(RegimeLaw::single(regime(1.25)), RegimeLaw::single(regime(1.5)))
}

/// Equal mixture of a slow atom `mu = theta` and a fast atom `mu = 3`.
pub fn slow_fast_law(theta: f64) -> RegimeLaw {
    RegimeLaw::new(vec![(regime(theta), 0.5), (regime(3.0), 0.5)])
}

/// Slow/fast mixture at station 0, `mu = 3` at station 1.
///
/// The cycle value is `0.5 / (theta - 1)` or `0.25` with probability 1/2
/// each. At `theta = 1.25` this is the `{2, 0.25}` law with
/// `s0 = log2((1 + sqrt 5) / 2)`.
pub fn slow_fast_spec(theta: f64) -> PollingSpec {
    two_station(slow_fast_law(theta), RegimeLaw::single(regime(3.0)))
}

/// Exact `k(s)` for [`slow_fast_spec`].
pub fn slow_fast_k(theta: f64, s: f64) -> f64 {
    ((0.5 / (theta - 1.0)).powf(s) + 0.25f64.powf(s)) / 2.0
}

/// Three stations, unit arrivals, `mu = 4`, `gamma = (0.25, 0.25)` everywhere.
pub fn d2_deterministic_spec() -> PollingSpec {
    PollingSpec {
        d: 2,
        lambda: vec![1.0; 3],
        nu: vec![RegimeLaw::single(Regime::new(4.0, vec![0.25, 0.25])); 3],
        discipline: Discipline::Exhaustive,
    }
}

/// Three stations with a two-atom law at every station.
pub fn d2_random_spec() -> PollingSpec {
    let law = RegimeLaw::new(vec![(Regime::new(4.0, vec![0.25, 0.25]), 0.5), (Regime::new(2.5, vec![0.1, 0.3]), 0.5)]);
    PollingSpec { d: 2, lambda: vec![1.0; 3], nu: vec![law; 3], discipline: Discipline::Exhaustive }
}

/// Three stations under light load (`lambda = 0.5`) with a two-atom law;
/// positive recurrent.
pub fn d2_light_spec() -> PollingSpec {
    let law = RegimeLaw::new(vec![(Regime::new(4.0, vec![0.25, 0.25]), 0.5), (Regime::new(2.5, vec![0.1, 0.1]), 0.5)]);
    PollingSpec { d: 2, lambda: vec![0.5; 3], nu: vec![law; 3], discipline: Discipline::Exhaustive }
}

/// Two stations with unit arrival rates and no feedback, where a visit to
/// station 0 multiplies the fluid level by `a` with probability `p` (over
/// `factors`) and a visit to station 1 multiplies it by `a1`.
pub fn scalar_product_spec(factors: &[(f64, f64)], a1: f64) -> PollingSpec {
    let atom = |a: f64| Regime::new(1.0 + 1.0 / a, vec![0.0]);
    PollingSpec {
        d: 1,
        lambda: vec![1.0, 1.0],
        nu: vec![RegimeLaw::new(factors.iter().map(|&(a, p)| (atom(a), p)).collect()), RegimeLaw::single(atom(a1))],
        discipline: Discipline::Exhaustive,
    }
}
