//! Generic back-and-forth tail chain.
//!
//! Outside the start block `{0, …, s}` the limit process is a multiplicative
//! random walk: `Y_t = h(Y_{t-1}, A_t, B_t)` forward and
//! `Y_{-t} = h(Y_{-t+1}, A_{-t}, B_{-t})` backward, where
//! `h(y, a, b) = y (a 1{y > 0} + b 1{y < 0})`. The backward increments follow
//! the adjoint of the forward law:
//!
//! ```text
//! E[f(M_{-1}/M_0) | M_0 = σ] = P(M_0 = σ)^{-1} E[f(M_0/M_1) (σ M_1)_+^α]
//!                             + [1 - P(M_0 = σ)^{-1} E[(σ M_1)_+^α]] f(0)
//! ```
//!
//! which [`build_adjoint`] realizes as a weighted bootstrap over a pool of
//! forward draws.

use std::fmt;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::cdf_table::MonotoneCdfTable;
use crate::distributions::{ParetoLaw, SignLaw, TiltedInnovationLaw};
use crate::error::{Error, Result};
use crate::streams::{stream, PathStreams};
use crate::tail_index::{garch_moment, log_drift, solve_moment_index, GarchParams, TailIndex};

type PairSampler = dyn Fn(&mut dyn RngCore) -> (f64, f64) + Send + Sync;
type BlockSampler = dyn Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync;

/// `h(y, a, b) = y (a 1{y > 0} + b 1{y < 0})`.
#[inline]
pub fn transition_h(y: f64, a: f64, b: f64) -> f64 {
    if y > 0.0 {
        y * a
    } else if y < 0.0 {
        y * b
    } else {
        0.0
    }
}

/// Forward increment law: draws `(A, B) = (φ(ε, +1), φ(ε, -1))` for a fresh
/// innovation, together with the chain's tail index and `P(M_0 = +1)`.
#[derive(Clone)]
pub struct IncrementLaw {
    alpha: f64,
    sign_balance: f64,
    sampler: Arc<PairSampler>,
}

impl fmt::Debug for IncrementLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IncrementLaw")
            .field("alpha", &self.alpha)
            .field("sign_balance", &self.sign_balance)
            .finish_non_exhaustive()
    }
}

impl IncrementLaw {
    pub fn new<F>(alpha: f64, sign_balance: f64, sampler: F) -> Result<Self>
    where
        F: Fn(&mut dyn RngCore) -> (f64, f64) + Send + Sync + 'static,
    {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("chain tail index must be positive, got {alpha}")));
        }
        SignLaw::new(sign_balance)?;
        Ok(Self {
            alpha,
            sign_balance,
            sampler: Arc::new(sampler),
        })
    }

    /// Law of a nonnegative chain: `M_0 = 1` and only `A` is ever used.
    pub fn nonnegative<F>(alpha: f64, sampler: F) -> Result<Self>
    where
        F: Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    {
        Self::new(alpha, 1.0, move |rng| {
            let a = sampler(rng);
            (a, a)
        })
    }

    /// `A ≡ c`.
    pub fn constant(c: f64, alpha: f64) -> Result<Self> {
        Self::nonnegative(alpha, move |_| c)
    }

    /// GARCH(1,1) volatility: `φ(ε) = sqrt(alpha1 ε² + beta1)`, chain index `2 alpha`.
    pub fn garch(params: &GarchParams, tail: &TailIndex) -> Result<Self> {
        let p = *params;
        Self::nonnegative(tail.two_alpha(), move |rng| {
            let eps: f64 = StandardNormal.sample(rng);
            p.phi(eps)
        })
    }

    /// GJR-GARCH(1,1): `φ(ε) = sqrt((alpha1 + delta1 1{ε > 0}) ε² + beta1)`.
    /// The index solves `E[φ(ε)^κ] = 1`.
    pub fn gjr_garch(alpha1: f64, delta1: f64, beta1: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && delta1 >= 0.0 && beta1 >= 0.0) {
            return Err(Error::param("GJR-GARCH needs alpha1 > 0, delta1 >= 0, beta1 >= 0"));
        }
        let half_moment = |coef: f64, a: f64| garch_moment(&GarchParams::tail(coef, beta1)?, a);
        let drift = 0.5
            * (log_drift(&GarchParams::tail(alpha1, beta1)?)? + log_drift(&GarchParams::tail(alpha1 + delta1, beta1)?)?);
        if drift >= 0.0 {
            return Err(Error::param(format!("GJR-GARCH log drift {drift:.6} is not negative")));
        }
        // index of the squared process, as for plain GARCH
        let tail = solve_moment_index(|a| Ok(0.5 * (half_moment(alpha1, a)? + half_moment(alpha1 + delta1, a)?)))?;
        Self::nonnegative(tail.two_alpha(), move |rng| {
            let eps: f64 = StandardNormal.sample(rng);
            let coef = if eps > 0.0 { alpha1 + delta1 } else { alpha1 };
            (coef * eps * eps + beta1).sqrt()
        })
    }

    /// SR-SARV in levels: `φ(η) = alpha1 η + beta1` for a nonnegative `η`.
    pub fn sr_sarv_linear<F>(alpha1: f64, beta1: f64, index: f64, eta: F) -> Result<Self>
    where
        F: Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    {
        Self::nonnegative(index, move |rng| alpha1 * eta(rng) + beta1)
    }

    /// SR-SARV in squares: `φ(η) = sqrt(alpha1 η + beta1)`.
    pub fn sr_sarv_sqrt<F>(alpha1: f64, beta1: f64, index: f64, eta: F) -> Result<Self>
    where
        F: Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    {
        Self::nonnegative(index, move |rng| (alpha1 * eta(rng) + beta1).sqrt())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sign_balance(&self) -> f64 {
        self.sign_balance
    }

    pub fn is_nonnegative(&self) -> bool {
        self.sign_balance == 1.0
    }

    #[inline]
    pub fn draw(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        (self.sampler)(rng)
    }

    /// Monte Carlo estimate of `E[A_+^alpha]` with its standard error.
    pub fn tilted_moment(&self, draws: usize, seed: u64) -> (f64, f64) {
        let mut rng = stream(seed, 0);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let (a, _) = self.draw(&mut rng);
            let w = a.max(0.0).powf(self.alpha);
            s += w;
            s2 += w * w;
        }
        let n = draws as f64;
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }
}

#[derive(Clone)]
enum BackwardBranch {
    Atoms {
        values: Arc<Vec<f64>>,
        index: Arc<WeightedIndex<f64>>,
        point_mass_zero: f64,
    },
    Table(Arc<MonotoneCdfTable>),
    Zero,
}

impl BackwardBranch {
    fn point_mass_zero(&self) -> f64 {
        match self {
            BackwardBranch::Atoms { point_mass_zero, .. } => *point_mass_zero,
            BackwardBranch::Table(_) => 0.0,
            BackwardBranch::Zero => 1.0,
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            BackwardBranch::Atoms {
                values,
                index,
                point_mass_zero,
            } => {
                if *point_mass_zero > 0.0 && rng.random::<f64>() < *point_mass_zero {
                    0.0
                } else {
                    values[index.sample(rng)]
                }
            }
            BackwardBranch::Table(t) => t.sample(rng),
            BackwardBranch::Zero => 0.0,
        }
    }
}

/// Law of the backward increments `(A_{-1}, B_{-1})`.
#[derive(Clone)]
pub struct BackwardLaw {
    positive: BackwardBranch,
    negative: BackwardBranch,
}

impl fmt::Debug for BackwardLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackwardLaw")
            .field("point_mass_zero", &self.point_mass_zero())
            .finish_non_exhaustive()
    }
}

impl BackwardLaw {
    /// Exact inverse-CDF sampler for a nonnegative chain.
    pub fn from_table(table: Arc<MonotoneCdfTable>) -> Self {
        Self {
            positive: BackwardBranch::Table(table),
            negative: BackwardBranch::Zero,
        }
    }

    /// Backward ratio identically zero.
    pub fn zero() -> Self {
        Self {
            positive: BackwardBranch::Zero,
            negative: BackwardBranch::Zero,
        }
    }

    /// `P(A_{-1} = 0)`.
    pub fn point_mass_zero(&self) -> f64 {
        self.positive.point_mass_zero()
    }

    /// `P(B_{-1} = 0)`.
    pub fn point_mass_zero_negative(&self) -> f64 {
        self.negative.point_mass_zero()
    }

    #[inline]
    pub fn draw(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        let a = self.positive.sample(rng);
        let b = self.negative.sample(rng);
        (a, b)
    }

    /// Positive-branch atoms and their normalized weights, when bootstrap based.
    pub fn atoms(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.positive {
            BackwardBranch::Atoms { values, index, .. } => {
                let w = index.weights().collect::<Vec<_>>();
                let total: f64 = w.iter().sum();
                Some((values.to_vec(), w.into_iter().map(|x| x / total).collect()))
            }
            _ => None,
        }
    }
}

/// Weighted-bootstrap backward law from a pool of `pool_size` forward draws.
///
/// Each pool draw `(a, b)` contributes the atoms `1/a` and `1/b` with weights
/// from the adjoint formula; the defect `1 - E[(σ M_1)_+^α] / P(M_0 = σ)` (when
/// positive) becomes a point mass at zero.
pub fn build_adjoint(increment: &IncrementLaw, pool_size: usize, seed: u64) -> Result<BackwardLaw> {
    if pool_size < 100_000 {
        return Err(Error::param(format!("pool size must be at least 1e5, got {pool_size}")));
    }
    let mut rng = stream(seed, u64::MAX);
    let pool: Vec<(f64, f64)> = (0..pool_size).map(|_| increment.draw(&mut rng)).collect();
    let p = increment.sign_balance();
    let kappa = increment.alpha();
    let positive = adjoint_branch(&pool, p, kappa, 1.0)?;
    let negative = adjoint_branch(&pool, p, kappa, -1.0)?;
    Ok(BackwardLaw { positive, negative })
}

fn adjoint_branch(pool: &[(f64, f64)], p: f64, kappa: f64, sigma: f64) -> Result<BackwardBranch> {
    let p_sigma = if sigma > 0.0 { p } else { 1.0 - p };
    if p_sigma == 0.0 {
        return Ok(BackwardBranch::Zero);
    }
    let mut values = Vec::new();
    let mut weights = Vec::new();
    let mut total = 0.0;
    let mut push = |value: f64, weight: f64| {
        if weight > 0.0 && weight.is_finite() {
            values.push(value);
            weights.push(weight);
            total += weight;
        }
    };
    for &(a, b) in pool {
        // M_0 = +1, M_1 = a
        if p > 0.0 {
            push(1.0 / a, p * (sigma * a).max(0.0).powf(kappa));
        }
        // M_0 = -1, M_1 = -b
        if p < 1.0 {
            push(1.0 / b, (1.0 - p) * (-sigma * b).max(0.0).powf(kappa));
        }
    }
    if values.is_empty() {
        return Err(Error::DegeneratePool);
    }
    let mass = total / pool.len() as f64 / p_sigma;
    let point_mass_zero = (1.0 - mass).max(0.0);
    let index = WeightedIndex::new(&weights).map_err(|_| Error::DegeneratePool)?;
    Ok(BackwardBranch::Atoms {
        values: Arc::new(values),
        index: Arc::new(index),
        point_mass_zero,
    })
}

/// Chain specification: increment law, backward law, and the start block
/// `(Y_0, …, Y_s)`.
#[derive(Clone)]
pub struct BftcSpec {
    increment: IncrementLaw,
    backward: BackwardLaw,
    s: usize,
    start_block: Arc<BlockSampler>,
}

impl fmt::Debug for BftcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BftcSpec")
            .field("increment", &self.increment)
            .field("backward", &self.backward)
            .field("s", &self.s)
            .finish_non_exhaustive()
    }
}

impl BftcSpec {
    /// The start-block sampler must return exactly `s + 1` finite values.
    pub fn new<F>(increment: IncrementLaw, backward: BackwardLaw, s: usize, start_block: F) -> Result<Self>
    where
        F: Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static,
    {
        let probe = start_block(&mut stream(0, 0));
        if probe.len() != s + 1 || probe.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "start block must yield {} finite values, got {:?}",
                s + 1,
                probe
            )));
        }
        Ok(Self {
            increment,
            backward,
            s,
            start_block: Arc::new(start_block),
        })
    }

    /// Classical self-conditioned chain: `s = 0`, `Y_0 = M_0 · Par(alpha)`.
    pub fn self_conditioned(increment: IncrementLaw, backward: BackwardLaw) -> Result<Self> {
        let pareto = ParetoLaw::new(increment.alpha())?;
        let signs = SignLaw::new(increment.sign_balance())?;
        Self::new(increment, backward, 0, move |rng| {
            let y = pareto.sample(rng);
            vec![signs.sample(rng) * y]
        })
    }

    /// GARCH(1,1) volatility chain conditioned on `|ζ_0| > x`: start block
    /// `σ_0 = |ζ_0| / |ε_1|`, `σ_1 = σ_0 φ(ε_1)` with `|ζ_0| ~ Par(2 alpha)` and
    /// `ε_1` from the tilted innovation law.
    pub fn garch_volatility(params: &GarchParams, tail: &TailIndex, backward: BackwardLaw) -> Result<Self> {
        let pareto = ParetoLaw::new(tail.two_alpha())?;
        let tilted = TiltedInnovationLaw::new(tail.alpha)?;
        let p = *params;
        Self::new(IncrementLaw::garch(params, tail)?, backward, 1, move |rng| {
            let zeta0 = pareto.sample(rng);
            let eps1 = tilted.sample_abs(rng);
            let sigma0 = zeta0 / eps1;
            vec![sigma0, sigma0 * p.phi(eps1)]
        })
    }

    pub fn increment(&self) -> &IncrementLaw {
        &self.increment
    }

    pub fn backward(&self) -> &BackwardLaw {
        &self.backward
    }

    pub fn s(&self) -> usize {
        self.s
    }
}

/// One realization indexed `-back ..= s + fwd`.
#[derive(Debug, Clone, PartialEq)]
pub struct BftcPath {
    pub back: usize,
    pub s: usize,
    pub values: Vec<f64>,
}

impl BftcPath {
    pub fn get(&self, t: isize) -> f64 {
        self.values[(t + self.back as isize) as usize]
    }

    pub fn first_lag(&self) -> isize {
        -(self.back as isize)
    }

    pub fn last_lag(&self) -> isize {
        self.values.len() as isize - 1 - self.back as isize
    }
}

/// Simulates lags `-m ..= s + n`. The start block and forward steps use the
/// forward stream; backward steps use the backward stream.
pub fn simulate_bftc(spec: &BftcSpec, m: usize, n: usize, streams: &mut PathStreams) -> BftcPath {
    let block = (spec.start_block)(&mut streams.forward);
    let mut values = vec![0.0; m + spec.s + n + 1];
    values[m..=m + spec.s].copy_from_slice(&block);
    for t in m + spec.s + 1..values.len() {
        let (a, b) = spec.increment.draw(&mut streams.forward);
        values[t] = transition_h(values[t - 1], a, b);
    }
    for t in (0..m).rev() {
        let (a, b) = spec.backward.draw(&mut streams.backward);
        values[t] = transition_h(values[t + 1], a, b);
    }
    BftcPath {
        back: m,
        s: spec.s,
        values,
    }
}

/// `P(Ŷ_0 = 0) = 1 - E|χ|^α / C`, clamped to `[0, 1]`.
pub fn point_mass_diagnostic(chi_moment: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) || !(chi_moment >= 0.0) {
        return Err(Error::param("need C > 0 and a nonnegative moment"));
    }
    if chi_moment > c * (1.0 + 1e-9) {
        return Err(Error::Inconsistent { moment: chi_moment, c });
    }
    Ok((1.0 - chi_moment / c).clamp(0.0, 1.0))
}
