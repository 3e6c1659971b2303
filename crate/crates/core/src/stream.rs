//! Regime streams: the pre-drawn sequence `R0, R1, ...` with `Ri` drawn from
//! the law of the station visited at server epoch `i`.

use crate::model::{PollingSpec, Regime};
use crate::seed;

/// Anything that yields the regime in force at a given server epoch.
pub trait RegimeSource {
    fn regime(&self, epoch: usize) -> Regime;
}

/// Lazily materialized i.i.d. regime sequence; `Ri` is a pure function of
/// `(seed, i)`, so two consumers holding the same stream see the same regimes.
#[derive(Debug, Clone)]
pub struct RegimeStream<'a> {
    spec: &'a PollingSpec,
    seed: u64,
}

impl<'a> RegimeStream<'a> {
    pub fn new(spec: &'a PollingSpec, seed: u64) -> Self {
        Self { spec, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of the atom chosen at epoch `i`.
    pub fn atom_index(&self, epoch: usize) -> usize {
        let mut rng = seed::child_rng(self.seed, "regime", epoch as u64);
        self.spec.law_for_epoch(epoch).sample_index(&mut rng)
    }
}

impl RegimeSource for RegimeStream<'_> {
    fn regime(&self, epoch: usize) -> Regime {
        let i = self.atom_index(epoch);
        self.spec.law_for_epoch(epoch).atoms()[i].0.clone()
    }
}

/// Explicit regimes, repeated cyclically. Handy for deterministic checks.
#[derive(Debug, Clone)]
pub struct FixedRegimes(pub Vec<Regime>);

impl RegimeSource for FixedRegimes {
    fn regime(&self, epoch: usize) -> Regime {
        self.0[epoch % self.0.len()].clone()
    }
}

/// A source whose epoch `at` is overridden by `first`.
pub(crate) struct Overridden<'s, S: ?Sized> {
    pub inner: &'s S,
    pub at: usize,
    pub first: Regime,
}

impl<S: RegimeSource + ?Sized> RegimeSource for Overridden<'_, S> {
    fn regime(&self, epoch: usize) -> Regime {
        if epoch == self.at {
            self.first.clone()
        } else {
            self.inner.regime(epoch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::*;

    #[test]
    fn same_seed_same_regime() {
        let spec = slow_fast_spec(1.25);
        let a = RegimeStream::new(&spec, 5);
        let b = RegimeStream::new(&spec, 5);
        for i in 0..100 {
            assert_eq!(a.regime(i), b.regime(i));
        }
        // random access agrees with sequential access
        assert_eq!(a.regime(57), b.regime(57));
    }

    #[test]
    fn odd_epochs_use_station_one_law() {
        let spec = slow_fast_spec(1.25);
        let s = RegimeStream::new(&spec, 1);
        for i in (1..200).step_by(2) {
            assert_eq!(s.regime(i).mu, 3.0);
        }
    }

    #[test]
    fn stream_law_goodness_of_fit() {
        // station-0 epochs draw from {1.25, 3} with weights 1/2; chi-square, 1 dof
        let spec = slow_fast_spec(1.25);
        let mut slow = 0usize;
        let mut total = 0usize;
        for seed in 0..200u64 {
            let s = RegimeStream::new(&spec, seed);
            for i in (0..100).step_by(2) {
                total += 1;
                if s.atom_index(i) == 0 {
                    slow += 1;
                }
            }
        }
        let e = total as f64 / 2.0;
        let chi2 = ((slow as f64 - e).powi(2) + ((total - slow) as f64 - e).powi(2)) / e;
        // 99.9% quantile of chi-square(1)
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }
}
