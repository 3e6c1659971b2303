//! System parameters, service regimes and the random switch matrices.
//!
//! A polling system has `d + 1` stations indexed by `0..=d`. Each time the
//! server arrives at station `n` it draws a [`Regime`] (service rate plus
//! feedback probabilities) from the station's [`RegimeLaw`]. Across one visit
//! the fluid levels of the other stations evolve linearly, which gives the
//! step matrices built here; their products drive every stability statistic
//! in the crate.

use std::fmt;
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::seed;

/// Tolerance on the sum of atom weights and of feedback probabilities.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Largest number of support combinations enumerated exhaustively.
pub const SCAN_CAP: u64 = 1_000_000;

const SCAN_SEED: u64 = 0x5ca9_7e55;

/// Service regime: service rate `mu` and feedback probabilities.
///
/// For exhaustive and revolver systems `gamma[k - 1]` is the probability of
/// feeding a served customer `k` stations ahead (`k = 1..=d`). For gated
/// systems the vector has `d + 1` entries and `gamma[0]` sends the customer
/// back to the same station behind the gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub mu: f64,
    pub gamma: Vec<f64>,
}

impl Regime {
    pub fn new(mu: f64, gamma: Vec<f64>) -> Self {
        Self { mu, gamma }
    }

    pub fn feedback_total(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// Probability that a served customer leaves the system.
    pub fn leave_probability(&self) -> f64 {
        (1.0 - self.feedback_total()).max(0.0)
    }
}

/// Finite-support probability law over regimes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeLaw {
    atoms: Vec<(Regime, f64)>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl RegimeLaw {
    pub fn new(atoms: Vec<(Regime, f64)>) -> Self {
        let mut acc = 0.0;
        let cdf = atoms
            .iter()
            .map(|(_, w)| {
                acc += *w;
                acc
            })
            .collect();
        Self { atoms, cdf }
    }

    pub fn single(regime: Regime) -> Self {
        Self::new(vec![(regime, 1.0)])
    }

    pub fn atoms(&self) -> &[(Regime, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Index of an atom drawn by inverse CDF in declaration order.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.atoms.len() == 1 {
            // still consume one draw so streams stay aligned across laws
            let _: f64 = rng.random();
            return 0;
        }
        let total = *self.cdf.last().expect("law has atoms");
        let u = rng.random::<f64>() * total;
        self.cdf.iter().position(|&c| u < c).unwrap_or(self.atoms.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Regime {
        &self.atoms[self.sample_index(rng)].0
    }
}

/// Service discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    /// Moving server, serves each station until it empties.
    Exhaustive,
    /// Fixed server at location 0; the queues rotate toward it.
    Revolver,
    /// Moving server, serves only the customers present on arrival.
    Gated,
}

impl Discipline {
    pub fn name(self) -> &'static str {
        match self {
            Discipline::Exhaustive => "exhaustive",
            Discipline::Revolver => "revolver",
            Discipline::Gated => "gated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exhaustive" => Some(Discipline::Exhaustive),
            "revolver" => Some(Discipline::Revolver),
            "gated" => Some(Discipline::Gated),
            _ => None,
        }
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full system description, before validation.
///
/// `nu` holds one law per station, except for the revolver model which
/// has a single law used at every rotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PollingSpec {
    pub d: usize,
    pub lambda: Vec<f64>,
    pub nu: Vec<RegimeLaw>,
    pub discipline: Discipline,
}

impl PollingSpec {
    pub fn stations(&self) -> usize {
        self.d + 1
    }

    /// `k mod (d + 1)`.
    pub fn wrap(&self, k: usize) -> usize {
        k % (self.d + 1)
    }

    /// Dimension of the step matrices and of the fluid state vector.
    pub fn matrix_dim(&self) -> usize {
        match self.discipline {
            Discipline::Gated => self.d + 1,
            _ => self.d,
        }
    }

    /// Expected feedback vector length for this discipline.
    pub fn gamma_len(&self) -> usize {
        match self.discipline {
            Discipline::Gated => self.d + 1,
            _ => self.d,
        }
    }

    /// Law of the regime drawn at server epoch `epoch`.
    pub fn law_for_epoch(&self, epoch: usize) -> &RegimeLaw {
        match self.discipline {
            Discipline::Revolver => &self.nu[0],
            _ => &self.nu[self.wrap(epoch)],
        }
    }

    /// Law used by cycle slot `slot` (`0..=d`) when composing a cycle matrix.
    pub fn law_for_slot(&self, slot: usize) -> &RegimeLaw {
        self.law_for_epoch(slot)
    }

    /// Arrival rate at the station `offset` positions ahead of the server,
    /// when the server sits at `station`.
    pub fn arrival_rate(&self, station: usize, offset: usize) -> f64 {
        match self.discipline {
            Discipline::Revolver => self.lambda[offset],
            _ => self.lambda[self.wrap(station + offset)],
        }
    }

    /// Feedback probability to the station `offset` positions ahead.
    /// Offset 0 is only meaningful for gated service.
    pub fn feedback(&self, r: &Regime, offset: usize) -> f64 {
        match self.discipline {
            Discipline::Gated => r.gamma[offset],
            _ if offset == 0 => 0.0,
            _ => r.gamma[offset - 1],
        }
    }

    /// Net drain rate of the served station, `mu - lambda` (or `mu` for gated).
    pub fn drain_rate(&self, station: usize, r: &Regime) -> f64 {
        match self.discipline {
            Discipline::Exhaustive => r.mu - self.lambda[station],
            Discipline::Revolver => r.mu - self.lambda[0],
            Discipline::Gated => r.mu,
        }
    }

    pub fn total_arrival_rate(&self) -> f64 {
        self.lambda.iter().sum()
    }
}

/// A spec that passed validation, with its derived ellipticity constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedSpec {
    spec: PollingSpec,
    eps0: f64,
    m0: f64,
    lambda_max: f64,
    lambda_min: f64,
    z_max: f64,
    deterministic_regimes: bool,
}

impl Deref for ValidatedSpec {
    type Target = PollingSpec;

    fn deref(&self) -> &PollingSpec {
        &self.spec
    }
}

impl ValidatedSpec {
    pub fn spec(&self) -> &PollingSpec {
        &self.spec
    }

    pub fn into_spec(self) -> PollingSpec {
        self.spec
    }

    /// Smallest drain margin over all atoms (`min mu - lambda_n`, or `min mu` for gated).
    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// Largest service rate over all atoms.
    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// `M0 + sum(lambda)`, the largest total event rate.
    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    /// True when every law is a single atom, so the cycle matrix is not random.
    pub fn deterministic_regimes(&self) -> bool {
        self.deterministic_regimes
    }
}

/// Checks structure and the ellipticity condition, collecting every violation.
pub fn validate_spec(spec: PollingSpec) -> Result<ValidatedSpec> {
    let mut violations = Vec::new();
    if spec.d == 0 {
        violations.push(Violation::NoStations);
        return Err(Error::Validation(violations));
    }
    let m = spec.stations();
    if spec.lambda.len() != m {
        violations.push(Violation::RateCount { expected: m, got: spec.lambda.len() });
    }
    for (station, &l) in spec.lambda.iter().enumerate() {
        if !(l > 0.0 && l.is_finite()) {
            violations.push(Violation::BadArrivalRate { station, lambda: l });
        }
    }
    let expected_laws = match spec.discipline {
        Discipline::Revolver => 1,
        _ => m,
    };
    if spec.nu.len() != expected_laws {
        violations.push(Violation::LawCount { expected: expected_laws, got: spec.nu.len() });
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }

    let glen = spec.gamma_len();
    let mut eps0 = f64::INFINITY;
    let mut m0 = 0.0f64;
    for (station, law) in spec.nu.iter().enumerate() {
        if law.is_empty() {
            violations.push(Violation::EmptyLaw { station });
            continue;
        }
        let sum: f64 = law.atoms().iter().map(|(_, w)| *w).sum();
        let weights_ok = law.atoms().iter().all(|(_, w)| *w > 0.0 && w.is_finite());
        if !weights_ok || (sum - 1.0).abs() > WEIGHT_TOL {
            violations.push(Violation::BadWeights { station, sum });
        }
        // station whose arrival rate the server must beat
        let served = match spec.discipline {
            Discipline::Revolver => 0,
            _ => station,
        };
        for (atom, (r, _)) in law.atoms().iter().enumerate() {
            if r.gamma.len() != glen {
                violations.push(Violation::GammaLength { station, atom, got: r.gamma.len(), expected: glen });
                continue;
            }
            let gamma_ok = r.gamma.iter().all(|g| *g >= 0.0 && g.is_finite()) && r.feedback_total() <= 1.0 + WEIGHT_TOL;
            if !gamma_ok {
                violations.push(Violation::GammaOutOfRange { station, atom });
            }
            let lambda = spec.lambda[served];
            let ok = match spec.discipline {
                Discipline::Gated => r.mu > 0.0 && r.mu.is_finite(),
                _ => r.mu > lambda && r.mu.is_finite(),
            };
            if !ok {
                violations.push(Violation::ConditionE { station, atom, mu: r.mu, lambda });
                continue;
            }
            eps0 = eps0.min(spec.drain_rate(served, r));
            m0 = m0.max(r.mu);
        }
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let lambda_max = spec.lambda.iter().cloned().fold(f64::MIN, f64::max);
    let lambda_min = spec.lambda.iter().cloned().fold(f64::MAX, f64::min);
    let z_max = m0 + spec.total_arrival_rate();
    let deterministic_regimes = spec.nu.iter().all(RegimeLaw::is_degenerate);
    Ok(ValidatedSpec { spec, eps0, m0, lambda_max, lambda_min, z_max, deterministic_regimes })
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self { dim, data: rows.iter().flatten().copied().collect() }
    }

    pub fn scalar(v: f64) -> Self {
        Self { dim: 1, data: vec![v] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim);
        self.mul_into(rhs, &mut out);
        out
    }

    pub fn mul_into(&self, rhs: &Matrix, out: &mut Matrix) {
        let n = self.dim;
        debug_assert_eq!(n, rhs.dim);
        out.dim = n;
        out.data.clear();
        out.data.resize(n * n, 0.0);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * x[j]).sum()).collect()
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// Sum of absolute entries.
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| *v >= 0.0 && v.is_finite())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.dim.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

fn check_gamma(r: &Regime, expected: usize) -> Result<()> {
    if r.gamma.len() != expected {
        return Err(Error::RegimeShape { got: r.gamma.len(), expected });
    }
    Ok(())
}

/// Companion-shaped matrix: `first_col` down column 0, ones on the superdiagonal.
fn companion(first_col: Vec<f64>) -> Matrix {
    let dim = first_col.len();
    let mut m = Matrix::zeros(dim);
    for (k, v) in first_col.into_iter().enumerate() {
        m.set(k, 0, v);
        if k + 1 < dim {
            m.set(k, k + 1, 1.0);
        }
    }
    m
}

/// Step matrix of the exhaustive system for a visit to station `n`.
pub fn build_matrix_exhaustive(spec: &PollingSpec, n: usize, r: &Regime) -> Result<Matrix> {
    check_gamma(r, spec.d)?;
    let denom = r.mu - spec.lambda[n];
    if denom <= 0.0 {
        return Err(Error::DivisionByNonpositive(denom));
    }
    let col = (0..spec.d).map(|k| (spec.lambda[spec.wrap(n + k + 1)] + r.gamma[k] * r.mu) / denom).collect();
    Ok(companion(col))
}

/// Step matrix of the revolver model; the server always sits at location 0.
pub fn build_matrix_revolver(spec: &PollingSpec, r: &Regime) -> Result<Matrix> {
    check_gamma(r, spec.d)?;
    let denom = r.mu - spec.lambda[0];
    if denom <= 0.0 {
        return Err(Error::DivisionByNonpositive(denom));
    }
    let col = (0..spec.d).map(|k| (spec.lambda[k + 1] + r.gamma[k] * r.mu) / denom).collect();
    Ok(companion(col))
}

/// `(d + 1) x (d + 1)` step matrix of the gated system at station `n`.
/// The last row carries the mass left behind the gate.
pub fn build_matrix_gated(spec: &PollingSpec, n: usize, r: &Regime) -> Result<Matrix> {
    check_gamma(r, spec.d + 1)?;
    if r.mu <= 0.0 {
        return Err(Error::DivisionByNonpositive(r.mu));
    }
    let mut col: Vec<f64> =
        (0..spec.d).map(|k| (spec.lambda[spec.wrap(n + k + 1)] + r.gamma[k + 1] * r.mu) / r.mu).collect();
    col.push((spec.lambda[n] + r.gamma[0] * r.mu) / r.mu);
    Ok(companion(col))
}

/// Step matrix for a visit at station `n`, whatever the discipline.
pub fn step_matrix(spec: &PollingSpec, n: usize, r: &Regime) -> Result<Matrix> {
    match spec.discipline {
        Discipline::Exhaustive => build_matrix_exhaustive(spec, n, r),
        Discipline::Revolver => build_matrix_revolver(spec, r),
        Discipline::Gated => build_matrix_gated(spec, n, r),
    }
}

/// Cycle matrix `A(d) ... A(0)` for one regime per station (station 0 rightmost).
pub fn compose_cycle(spec: &PollingSpec, regimes: &[Regime]) -> Result<Matrix> {
    if regimes.len() != spec.stations() {
        return Err(Error::InvalidArgument(format!(
            "need {} regimes for a cycle, got {}",
            spec.stations(),
            regimes.len()
        )));
    }
    let mut acc = step_matrix(spec, 0, &regimes[0])?;
    let mut tmp = Matrix::zeros(acc.dim());
    for (n, r) in regimes.iter().enumerate().skip(1) {
        step_matrix(spec, n, r)?.mul_into(&acc, &mut tmp);
        std::mem::swap(&mut acc, &mut tmp);
    }
    Ok(acc)
}

/// Matrices for every (cycle slot, atom) pair; finite support makes this cheap.
pub(crate) fn slot_matrices(spec: &PollingSpec) -> Result<Vec<Vec<Matrix>>> {
    (0..spec.stations())
        .map(|slot| spec.law_for_slot(slot).atoms().iter().map(|(r, _)| step_matrix(spec, slot, r)).collect())
        .collect()
}

const POWER_CAP: usize = 10_000;
const POWER_TOL: f64 = 1e-12;

fn power_iterate(m: &Matrix, shift: f64) -> std::result::Result<f64, f64> {
    let n = m.dim();
    let mut x = vec![1.0 / n as f64; n];
    let mut prev = f64::NAN;
    for _ in 0..POWER_CAP {
        let mut y = m.mul_vec(&x);
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += shift * xi);
        let g: f64 = y.iter().sum();
        if g == 0.0 {
            return Ok(0.0);
        }
        // Collatz-Wielandt bracket on a positive iterate
        if x.iter().all(|v| *v > 0.0) {
            let (lo, hi) = y.iter().zip(&x).fold((f64::MAX, f64::MIN), |(lo, hi), (yi, xi)| {
                let q = yi / xi;
                (lo.min(q), hi.max(q))
            });
            if hi - lo <= POWER_TOL * hi {
                return Ok(0.5 * (lo + hi));
            }
        }
        if (g - prev).abs() <= POWER_TOL * g {
            return Ok(g);
        }
        prev = g;
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / g);
    }
    Err(prev)
}

/// Spectral radius of a nonnegative matrix by power iteration. A failed run
/// is restarted on `M + cI`, which shares the Perron vector but is aperiodic.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    if !m.is_nonnegative() {
        return Err(Error::InvalidArgument("spectral_radius needs a nonnegative matrix".into()));
    }
    match power_iterate(m, 0.0) {
        Ok(r) => Ok(r),
        Err(best) => {
            let shift = if best.is_finite() && best > 0.0 { best } else { 1.0 };
            power_iterate(m, shift)
                .map(|r| (r - shift).max(0.0))
                .map_err(|b| Error::NoConvergence { estimate: b - shift })
        }
    }
}

/// Outcome of scanning the regime supports for a transient homogeneous system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportScan {
    pub found: bool,
    /// One regime per cycle slot whose cycle matrix has spectral radius > 1.
    pub witness: Option<Vec<Regime>>,
    pub witness_radius: Option<f64>,
    pub combinations_checked: u64,
    /// Set when the support product exceeded [`SCAN_CAP`] and combinations were sampled.
    pub partial: bool,
}

/// Looks for one atom per station whose deterministic cycle matrix has
/// spectral radius above 1; such a witness forces a finite moment threshold.
pub fn scan_transient_support(spec: &ValidatedSpec) -> Result<SupportScan> {
    let mats = slot_matrices(spec)?;
    let sizes: Vec<u64> = mats.iter().map(|v| v.len() as u64).collect();
    let total = sizes.iter().try_fold(1u64, |acc, &s| acc.checked_mul(s));
    let partial = total.is_none_or(|t| t > SCAN_CAP);
    let count = if partial { SCAN_CAP } else { total.unwrap_or(SCAN_CAP) };

    let dim = spec.matrix_dim();
    let mut rng = seed::rng(SCAN_SEED);
    let mut choice = vec![0usize; mats.len()];
    let mut acc = Matrix::zeros(dim);
    let mut tmp = Matrix::zeros(dim);
    for idx in 0..count {
        if partial {
            for (c, s) in choice.iter_mut().zip(&sizes) {
                *c = rng.random_range(0..*s as usize);
            }
        } else {
            let mut rem = idx;
            for (c, s) in choice.iter_mut().zip(&sizes) {
                *c = (rem % s) as usize;
                rem /= s;
            }
        }
        acc.clone_from(&mats[0][choice[0]]);
        for slot in 1..mats.len() {
            mats[slot][choice[slot]].mul_into(&acc, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        let rho = spectral_radius(&acc)?;
        if rho > 1.0 {
            let witness =
                choice.iter().enumerate().map(|(slot, &c)| spec.law_for_slot(slot).atoms()[c].0.clone()).collect();
            return Ok(SupportScan {
                found: true,
                witness: Some(witness),
                witness_radius: Some(rho),
                combinations_checked: idx + 1,
                partial,
            });
        }
    }
    Ok(SupportScan { found: false, witness: None, witness_radius: None, combinations_checked: count, partial })
}
