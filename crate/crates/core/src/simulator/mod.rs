//! Auxiliary-input simulators over finite distributions.
//!
//! Everything is an explicit dense table indexed by `x · 2^λ + z`, so every
//! advantage in this module is computed exactly rather than sampled.
//!
//! The pipeline is: an exact two-point simulator per distinguisher
//! ([`two_point_simulator`]), one mixture good against a whole family found by
//! multiplicative weights ([`minmax_mixture`]), a uniform sub-sample of that
//! mixture ([`sparsify`]) and value rounding for the distinguishers
//! ([`discretize_distinguisher`]). [`full_simulator`] chains them.

mod bench;
mod io;

pub use bench::{benchmark_instance, BenchmarkSpec};
pub use io::{read_distribution_csv, read_family_csv, sweep_to_csv, write_distribution_csv, write_family_csv};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normalization tolerance for probability tables.
pub const NORM_TOL: f64 = 1e-12;

pub const MAX_X_POINTS: usize = 1 << 12;
pub const MAX_LAMBDA: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid distinguisher table: {0}")]
    InvalidTable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no convergence after {rounds} rounds: best advantage {achieved:.6} > eps {eps}")]
    NoConvergence { rounds: usize, achieved: f64, eps: f64 },
    #[error("io: {0}")]
    Io(String),
}

fn check_shape(x_count: usize, lambda: usize, len: usize, what: &str) -> Result<(), SimError> {
    if x_count == 0 || x_count > MAX_X_POINTS {
        return Err(SimError::DimensionMismatch(format!("{what}: |X| = {x_count} outside 1..={MAX_X_POINTS}")));
    }
    if lambda > MAX_LAMBDA {
        return Err(SimError::DimensionMismatch(format!("{what}: λ = {lambda} > {MAX_LAMBDA}")));
    }
    if len != x_count << lambda {
        return Err(SimError::DimensionMismatch(format!("{what}: {len} entries for |X| = {x_count}, λ = {lambda}")));
    }
    Ok(())
}

/// Joint law of `(X, Z)` on `X × {0,1}^λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "io::RawDistribution", into = "io::RawDistribution")]
pub struct JointDistribution {
    x_count: usize,
    lambda: usize,
    prob: Vec<f64>,
}

impl JointDistribution {
    pub fn new(x_count: usize, lambda: usize, prob: Vec<f64>) -> Result<Self, SimError> {
        check_shape(x_count, lambda, prob.len(), "distribution")?;
        if let Some(p) = prob.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(SimError::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(SimError::InvalidDistribution(format!("total mass {total}")));
        }
        let dist = Self { x_count, lambda, prob };
        if let Some(x) = (0..x_count).find(|&x| dist.marginal(x) <= 0.0) {
            return Err(SimError::InvalidDistribution(format!("P_X({x}) = 0")));
        }
        Ok(dist)
    }

    /// `Z = z_of(x)` with `X` distributed as `px`.
    pub fn deterministic(px: &[f64], lambda: usize, z_of: impl Fn(usize) -> usize) -> Result<Self, SimError> {
        let zc = 1 << lambda;
        let mut prob = vec![0.0; px.len() * zc];
        for (x, &p) in px.iter().enumerate() {
            prob[x * zc + z_of(x) % zc] = p;
        }
        Self::new(px.len(), lambda, prob)
    }

    /// `Z` uniform and independent of `X`.
    pub fn independent_uniform(px: &[f64], lambda: usize) -> Result<Self, SimError> {
        let zc = 1 << lambda;
        let prob = px.iter().flat_map(|&p| std::iter::repeat_n(p / zc as f64, zc)).collect();
        Self::new(px.len(), lambda, prob)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn z_count(&self) -> usize {
        1 << self.lambda
    }

    pub fn p(&self, x: usize, z: usize) -> f64 {
        self.prob[x * self.z_count() + z]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let zc = self.z_count();
        &self.prob[x * zc..(x + 1) * zc]
    }

    pub fn marginal(&self, x: usize) -> f64 {
        self.row(x).iter().sum()
    }

    pub fn marginals(&self) -> Vec<f64> {
        (0..self.x_count).map(|x| self.marginal(x)).collect()
    }

    pub fn table(&self) -> &[f64] {
        &self.prob
    }
}

/// A `[0,1]`-valued test on `X × {0,1}^λ` with an abstract size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "io::RawDistinguisher", into = "io::RawDistinguisher")]
pub struct DistinguisherTable {
    x_count: usize,
    lambda: usize,
    values: Vec<f64>,
    size: f64,
}

impl DistinguisherTable {
    pub fn new(x_count: usize, lambda: usize, values: Vec<f64>, size: f64) -> Result<Self, SimError> {
        check_shape(x_count, lambda, values.len(), "distinguisher")?;
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(SimError::InvalidTable(format!("value {v} outside [0, 1]")));
        }
        if !(size.is_finite() && size > 0.0) {
            return Err(SimError::InvalidTable(format!("size {size} must be positive")));
        }
        Ok(Self { x_count, lambda, values, size })
    }

    pub fn constant(x_count: usize, lambda: usize, v: f64) -> Result<Self, SimError> {
        Self::new(x_count, lambda, vec![v; x_count << lambda], 1.0)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn size(&self) -> f64 {
        self.size
    }

    pub fn value(&self, x: usize, z: usize) -> f64 {
        self.values[(x << self.lambda) + z]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `1 − D`.
    pub fn complement(&self) -> Self {
        Self { values: self.values.iter().map(|v| 1.0 - v).collect(), ..self.clone() }
    }

    /// `E D(X, Z)`.
    pub fn expect_real(&self, dist: &JointDistribution) -> f64 {
        self.values.iter().zip(&dist.prob).map(|(d, p)| d * p).sum()
    }

    /// `E D(X, h(X))`.
    pub fn expect_sim(&self, dist: &JointDistribution, sim: &SimulatorFn) -> f64 {
        let zc = dist.z_count();
        (0..dist.x_count)
            .map(|x| {
                let row = &sim.rows[x * zc..(x + 1) * zc];
                let d = &self.values[x * zc..(x + 1) * zc];
                dist.marginal(x) * row.iter().zip(d).map(|(h, d)| h * d).sum::<f64>()
            })
            .sum()
    }

    /// Signed advantage `E D(X, Z) − E D(X, h(X))`.
    pub fn advantage(&self, dist: &JointDistribution, sim: &SimulatorFn) -> f64 {
        self.expect_real(dist) - self.expect_sim(dist, sim)
    }

    fn matches(&self, dist: &JointDistribution) -> Result<(), SimError> {
        if self.x_count != dist.x_count || self.lambda != dist.lambda {
            return Err(SimError::DimensionMismatch(format!(
                "distinguisher on |X| = {}, λ = {} vs distribution on |X| = {}, λ = {}",
                self.x_count, self.lambda, dist.x_count, dist.lambda
            )));
        }
        Ok(())
    }
}

/// A randomized map `X → {0,1}^λ`, stored as one distribution per `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorFn {
    x_count: usize,
    lambda: usize,
    rows: Vec<f64>,
    pub complexity_units: f64,
}

impl SimulatorFn {
    pub fn new(x_count: usize, lambda: usize, rows: Vec<f64>, complexity_units: f64) -> Result<Self, SimError> {
        check_shape(x_count, lambda, rows.len(), "simulator")?;
        let sim = Self { x_count, lambda, rows, complexity_units };
        for x in 0..x_count {
            let row = sim.row(x);
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > NORM_TOL {
                return Err(SimError::InvalidDistribution(format!("simulator row {x} is not normalized")));
            }
        }
        Ok(sim)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let zc = 1 << self.lambda;
        &self.rows[x * zc..(x + 1) * zc]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn max_row_error(&self) -> f64 {
        (0..self.x_count).map(|x| (self.row(x).iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Draw `h(x)`.
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (z, p) in self.row(x).iter().enumerate() {
            acc += p;
            if u < acc {
                return z;
            }
        }
        self.row(x).iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// Convex combination of simulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorMixture {
    pub components: Vec<(f64, SimulatorFn)>,
}

impl SimulatorMixture {
    pub fn new(components: Vec<(f64, SimulatorFn)>) -> Result<Self, SimError> {
        let first = components.first().ok_or_else(|| SimError::InvalidParameter("empty mixture".into()))?;
        let (xc, l) = (first.1.x_count, first.1.lambda);
        if components.iter().any(|(_, h)| h.x_count != xc || h.lambda != l) {
            return Err(SimError::DimensionMismatch("mixture components differ in shape".into()));
        }
        if components.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(SimError::InvalidParameter("negative mixture weight".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(SimError::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn uniform(sims: Vec<SimulatorFn>) -> Result<Self, SimError> {
        let w = 1.0 / sims.len().max(1) as f64;
        Self::new(sims.into_iter().map(|h| (w, h)).collect())
    }

    /// The averaged simulator `h̄` with rows `Σ w_i P_{h_i(x)}`.
    pub fn average(&self) -> SimulatorFn {
        let first = &self.components[0].1;
        let mut rows = vec![0.0; first.rows.len()];
        let mut units = 0.0;
        for (w, h) in &self.components {
            for (r, p) in rows.iter_mut().zip(&h.rows) {
                *r += w * p;
            }
            units += h.complexity_units;
        }
        SimulatorFn { x_count: first.x_count, lambda: first.lambda, rows, complexity_units: units }
    }
}

fn argmin_argmax(values: &[f64]) -> (usize, usize) {
    let (mut lo, mut hi) = (0, 0);
    for (z, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = z;
        }
        if v > values[hi] {
            hi = z;
        }
    }
    (lo, hi)
}

/// Two-point simulator `h = γ·h⁻ + (1−γ)·h⁺` matching `E D(X, Z)` exactly.
/// `h⁻`, `h⁺` pick the smallest `z` minimizing / maximizing `D(x, ·)`.
pub fn two_point_simulator(dist: &JointDistribution, d: &DistinguisherTable) -> Result<SimulatorFn, SimError> {
    d.matches(dist)?;
    let zc = dist.z_count();
    let picks: Vec<(usize, usize)> =
        (0..dist.x_count).map(|x| argmin_argmax(&d.values[x * zc..(x + 1) * zc])).collect();
    let px = dist.marginals();
    let e_real = d.expect_real(dist);
    let e_minus: f64 = picks.iter().enumerate().map(|(x, &(lo, _))| px[x] * d.value(x, lo)).sum();
    let e_plus: f64 = picks.iter().enumerate().map(|(x, &(_, hi))| px[x] * d.value(x, hi)).sum();
    let spread = e_plus - e_minus;
    let gamma =
        if spread <= f64::EPSILON * e_plus.abs().max(1.0) { 0.0 } else { ((e_plus - e_real) / spread).clamp(0.0, 1.0) };
    let mut rows = vec![0.0; dist.x_count * zc];
    for (x, &(lo, hi)) in picks.iter().enumerate() {
        rows[x * zc + lo] += gamma;
        rows[x * zc + hi] += 1.0 - gamma;
    }
    Ok(SimulatorFn { x_count: dist.x_count, lambda: dist.lambda, rows, complexity_units: 2.0 * zc as f64 * d.size })
}

/// `family` plus the complement of every member not already present.
pub fn complement_closure(family: &[DistinguisherTable]) -> Vec<DistinguisherTable> {
    let mut closed = family.to_vec();
    for d in family {
        let c = d.complement();
        if !closed.iter().any(|e| e.values == c.values) {
            closed.push(c);
        }
    }
    closed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinmaxOutcome {
    pub mixture: SimulatorMixture,
    pub rounds: usize,
    /// `max_D E D(X,Z) − E_{h←mixture} D(X,h(X))` over the closed family.
    pub advantage: f64,
    pub family_size: usize,
}

/// Default round budget `⌈4 ln N / eps²⌉`, where the regret bound of
/// multiplicative weights reaches `eps`.
pub fn default_max_rounds(family_size: usize, eps: f64) -> usize {
    ((4.0 * (family_size.max(2) as f64).ln() / (eps * eps)).ceil() as usize).max(1)
}

/// Multiplicative-weights search for one mixture of two-point simulators
/// good against every member of the complement-closed family.
pub fn minmax_mixture(
    dist: &JointDistribution,
    family: &[DistinguisherTable],
    eps: f64,
    max_rounds: Option<usize>,
) -> Result<MinmaxOutcome, SimError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(SimError::InvalidParameter(format!("eps = {eps} outside (0, 1]")));
    }
    if family.is_empty() {
        return Err(SimError::InvalidParameter("empty distinguisher family".into()));
    }
    for d in family {
        d.matches(dist)?;
    }
    let closed = complement_closure(family);
    let n = closed.len();
    let max_rounds = max_rounds.unwrap_or_else(|| default_max_rounds(n, eps));
    let eta = (0.5f64).min(((n as f64).ln() / max_rounds as f64).sqrt());
    let real: Vec<f64> = closed.iter().map(|d| d.expect_real(dist)).collect();
    let size = closed.iter().map(|d| d.size).fold(0.0, f64::max);

    let mut log_w = vec![0.0f64; n];
    let mut cumulative = vec![0.0f64; n];
    let mut sims = Vec::new();
    let mut best = f64::INFINITY;
    for round in 1..=max_rounds {
        // Weighted-average distinguisher, computed with shifted logs.
        let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut avg = vec![0.0; closed[0].values.len()];
        for (wi, d) in w.iter().zip(&closed) {
            for (a, v) in avg.iter_mut().zip(&d.values) {
                *a += wi * v;
            }
        }
        for a in &mut avg {
            *a = (*a / total).clamp(0.0, 1.0);
        }
        let d_bar = DistinguisherTable { values: avg, size, ..closed[0].clone() };
        let h = two_point_simulator(dist, &d_bar)?;
        let adv: Vec<f64> = closed.par_iter().zip(&real).map(|(d, r)| r - d.expect_sim(dist, &h)).collect();
        for i in 0..n {
            cumulative[i] += adv[i];
            log_w[i] += eta * adv[i];
        }
        sims.push(h);
        let achieved = cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max) / round as f64;
        best = best.min(achieved);
        if achieved <= eps {
            return Ok(MinmaxOutcome {
                mixture: SimulatorMixture::uniform(sims)?,
                rounds: round,
                advantage: achieved,
                family_size: n,
            });
        }
    }
    Err(SimError::NoConvergence { rounds: max_rounds, achieved: best, eps })
}

/// Uniform average of `t` components drawn i.i.d. from the mixture.
pub fn sparsify(mixture: &SimulatorMixture, t: usize, seed: u64) -> Result<SimulatorFn, SimError> {
    if t == 0 {
        return Err(SimError::InvalidParameter("t must be at least 1".into()));
    }
    let weights = WeightedIndex::new(mixture.components.iter().map(|(w, _)| *w))
        .map_err(|e| SimError::InvalidParameter(format!("mixture weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = &mixture.components[0].1;
    let mut rows = vec![0.0; first.rows.len()];
    let mut units = 0.0;
    for _ in 0..t {
        let h = &mixture.components[weights.sample(&mut rng)].1;
        for (r, p) in rows.iter_mut().zip(&h.rows) {
            *r += p;
        }
        units += h.complexity_units;
    }
    let inv = 1.0 / t as f64;
    for r in &mut rows {
        *r *= inv;
    }
    Ok(SimulatorFn { x_count: first.x_count, lambda: first.lambda, rows, complexity_units: units })
}

/// Round every value to the nearest of `{2^-ρ, 2·2^-ρ, …, 1}`.
pub fn discretize_distinguisher(d: &DistinguisherTable, rho: u32) -> Result<DistinguisherTable, SimError> {
    if rho == 0 || rho > 52 {
        return Err(SimError::InvalidParameter(format!("ρ = {rho} outside 1..=52")));
    }
    let scale = (1u64 << rho) as f64;
    let values = d.values.iter().map(|v| (v * scale).round().max(1.0) / scale).collect();
    Ok(DistinguisherTable { values, ..d.clone() })
}

/// `E_x ‖P_{a(x)} − P_{b(x)}‖₂²` with `x` drawn from the `X`-marginal.
pub fn mean_squared_row_distance(dist: &JointDistribution, a: &SimulatorFn, b: &SimulatorFn) -> f64 {
    (0..dist.x_count)
        .map(|x| {
            let sq: f64 = a.row(x).iter().zip(b.row(x)).map(|(p, q)| (p - q) * (p - q)).sum();
            dist.marginal(x) * sq
        })
        .sum()
}

/// `max_D |E D(X,Z) − E D(X,h(X))|` over the family.
pub fn max_advantage(dist: &JointDistribution, family: &[DistinguisherTable], sim: &SimulatorFn) -> f64 {
    family.iter().map(|d| d.advantage(dist, sim).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSimulatorReport {
    pub simulator: SimulatorFn,
    pub lambda: usize,
    pub eps: f64,
    pub rho: u32,
    pub rounds: usize,
    pub family_size: usize,
    /// Mixture advantage against the discretized closed family.
    pub mixture_advantage: f64,
    /// Advantage of the final simulator against the input family (closed).
    pub advantage: f64,
    pub t: usize,
    pub complexity_units: f64,
}

/// Cost of the final simulator in table lookups: `t` components, each
/// querying `2·2^λ` times an averaged distinguisher made of `⌈eps⁻²⌉`
/// discretized members of size `ρ · s`.
pub fn complexity_units(lambda: usize, eps: f64, rho: u32, size: f64, t: usize) -> f64 {
    let calls = 2.0 * (1u64 << lambda) as f64;
    let averaged = (1.0 / (eps * eps)).ceil() * f64::from(rho) * size;
    t as f64 * calls * averaged
}

/// Discretize, find the min-max mixture, then sparsify it.
pub fn full_simulator(
    dist: &JointDistribution,
    family: &[DistinguisherTable],
    eps: f64,
    seed: u64,
) -> Result<FullSimulatorReport, SimError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(SimError::InvalidParameter(format!("eps = {eps} outside (0, 1]")));
    }
    let rho = ((1.0 / eps).log2().ceil() as u32).max(1);
    let discrete = family.iter().map(|d| discretize_distinguisher(d, rho)).collect::<Result<Vec<_>, _>>()?;
    let outcome = minmax_mixture(dist, &discrete, eps, None)?;
    let lambda = dist.lambda;
    let t = ((1u64 << lambda) as f64 / (eps * eps)).ceil() as usize;
    let mut simulator = sparsify(&outcome.mixture, t, seed)?;
    let size = family.iter().map(|d| d.size).fold(0.0, f64::max);
    let units = complexity_units(lambda, eps, rho, size, t);
    simulator.complexity_units = units;
    let advantage = max_advantage(dist, &complement_closure(family), &simulator);
    Ok(FullSimulatorReport {
        simulator,
        lambda,
        eps,
        rho,
        rounds: outcome.rounds,
        family_size: outcome.family_size,
        mixture_advantage: outcome.advantage,
        advantage,
        t,
        complexity_units: units,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: usize,
    pub eps: f64,
    pub rounds: usize,
    pub advantage: f64,
    pub complexity_units: f64,
}

/// Run [`full_simulator`] on a fresh benchmark instance for every
/// `(λ, eps)` pair.
pub fn simulate_sweep(
    base: &BenchmarkSpec,
    lambdas: &[usize],
    epss: &[f64],
    seed: u64,
) -> Result<Vec<SweepRow>, SimError> {
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let (dist, family) = benchmark_instance(&BenchmarkSpec { lambda, ..*base })?;
        for &eps in epss {
            let r = full_simulator(&dist, &family, eps, seed)?;
            rows.push(SweepRow {
                lambda,
                eps,
                rounds: r.rounds,
                advantage: r.advantage,
                complexity_units: r.complexity_units,
            });
        }
    }
    Ok(rows)
}
