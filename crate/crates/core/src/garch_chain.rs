//! Exact sampler for the joint GARCH(1,1) tail chain `(σ_t, ζ_t)` given an
//! extreme `|ζ_0|` (or `ζ_0 > x` with one-sided conditioning).
//!
//! Components, all independent:
//! `|ζ_0| ~ Par(2 alpha)`, `ε_1` from the tilted innovation law, i.i.d. standard
//! normal `ε_t` for `t >= 2`, i.i.d. backward increments `A_{-t}`, and i.i.d.
//! symmetric signs `S_t`. Then
//!
//! ```text
//! σ_0 = |ζ_0| / |ε_1|,   σ_t = σ_{t-1} φ(ε_t)  (t >= 1),   σ_{-t} = σ_{-t+1} A_{-t}
//! ζ_t = σ_t |ε_{t+1}| S_t  (t >= 0),   ζ_{-t} = σ_{-t} ((A_{-t}^{-2} - beta1) / alpha1)^{1/2} S_{-t}
//! ```

use std::io::Write;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::backward::BackwardIncrementLaw;
use crate::cdf_table::MonotoneCdfTable;
use crate::distributions::{ParetoLaw, SignLaw, TiltedInnovationLaw};
use crate::error::Result;
use crate::streams::PathStreams;
use crate::tail_index::{GarchParams, TailIndex};

/// `ln σ` below this is reported as `σ = 0`.
pub const LOG_UNDERFLOW: f64 = -700.0;
const ALGEBRA_TOL: f64 = 1e-12;

/// Conditioning event at lag 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conditioning {
    /// `ζ_0 > x`: the sign `S_0` is fixed to `+1`.
    OneSided,
    /// `|ζ_0| > x`.
    TwoSided,
}

/// Sampler for one GARCH(1,1) model with a solved tail index.
#[derive(Debug, Clone)]
pub struct GarchTailChain {
    params: GarchParams,
    tail: TailIndex,
    law: BackwardIncrementLaw,
    table: Arc<MonotoneCdfTable>,
    pareto: ParetoLaw,
    tilted: TiltedInnovationLaw,
}

/// One draw of the chain over lags `-m ..= n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarchTailChainSample {
    pub zeta0_mag: f64,
    pub eps1: f64,
    /// `S_t` for `t = -m ..= n`.
    pub signs: Vec<f64>,
    /// `ε_t` for `t = 2 ..= n + 1`.
    pub fwd_innovations: Vec<f64>,
    /// `A_{-t}` for `t = 1 ..= m`.
    pub bwd_increments: Vec<f64>,
    /// `σ_t` for `t = -m ..= n`.
    pub sigma_path: Vec<f64>,
    /// `ζ_t` for `t = -m ..= n`.
    pub zeta_path: Vec<f64>,
    pub m: usize,
    pub n: usize,
    /// Some `σ` underflowed and was reported as 0.
    pub saturated: bool,
}

impl GarchTailChain {
    /// Checks stationarity and that `tail` solves the index equation, then
    /// tabulates the backward increment law.
    pub fn new(params: GarchParams, tail: TailIndex) -> Result<Self> {
        params.require_stationary()?;
        let law = BackwardIncrementLaw::new(params, tail.alpha)?;
        let table = Arc::new(law.build_table()?);
        Ok(Self {
            params,
            tail,
            law,
            table,
            pareto: ParetoLaw::new(tail.two_alpha())?,
            tilted: TiltedInnovationLaw::new(tail.alpha)?,
        })
    }

    pub fn params(&self) -> GarchParams {
        self.params
    }

    pub fn tail(&self) -> TailIndex {
        self.tail
    }

    pub fn backward_law(&self) -> &BackwardIncrementLaw {
        &self.law
    }

    pub fn backward_table(&self) -> Arc<MonotoneCdfTable> {
        Arc::clone(&self.table)
    }

    /// Draws one chain. Forward stream order: `|ζ_0|`, `ε_1`, `S_0`, then
    /// `(ε_{t+1}, S_t)` for `t = 1 ..= n`; backward stream: `(A_{-t}, S_{-t})`.
    /// `S_0` is always drawn so both conditionings share every other component.
    pub fn sample(&self, m: usize, n: usize, conditioning: Conditioning, streams: &mut PathStreams) -> GarchTailChainSample {
        let fwd = &mut streams.forward;
        let zeta0_mag = self.pareto.sample(fwd);
        let eps1 = self.tilted.sample(fwd);
        let s0 = SignLaw::SYMMETRIC.sample(fwd);
        let s0 = match conditioning {
            Conditioning::OneSided => 1.0,
            Conditioning::TwoSided => s0,
        };

        let len = m + n + 1;
        let mut signs = vec![0.0; len];
        let mut sigma = vec![0.0; len];
        let mut zeta = vec![0.0; len];
        let mut fwd_innovations = Vec::with_capacity(n);
        let mut bwd_increments = Vec::with_capacity(m);
        let mut saturated = false;

        signs[m] = s0;
        let log_sigma0 = zeta0_mag.ln() - eps1.abs().ln();
        sigma[m] = log_sigma0.exp();
        zeta[m] = zeta0_mag * s0;

        let mut log_sigma = log_sigma0;
        let mut eps_t = eps1;
        for t in 1..=n {
            log_sigma += self.params.phi(eps_t).ln();
            let eps_next: f64 = StandardNormal.sample(fwd);
            let s = SignLaw::SYMMETRIC.sample(fwd);
            fwd_innovations.push(eps_next);
            let i = m + t;
            signs[i] = s;
            sigma[i] = reexp(log_sigma, &mut saturated);
            zeta[i] = sigma[i] * eps_next.abs() * s;
            eps_t = eps_next;
        }

        let bwd = &mut streams.backward;
        let mut log_sigma = log_sigma0;
        for t in 1..=m {
            let a = self.table.sample(bwd);
            let s = SignLaw::SYMMETRIC.sample(bwd);
            bwd_increments.push(a);
            log_sigma += a.ln();
            let i = m - t;
            signs[i] = s;
            sigma[i] = reexp(log_sigma, &mut saturated);
            zeta[i] = sigma[i] * self.law.z_from_increment(a) * s;
        }

        GarchTailChainSample {
            zeta0_mag,
            eps1,
            signs,
            fwd_innovations,
            bwd_increments,
            sigma_path: sigma,
            zeta_path: zeta,
            m,
            n,
            saturated,
        }
    }
}

#[inline]
fn reexp(log_value: f64, saturated: &mut bool) -> f64 {
    if log_value < LOG_UNDERFLOW {
        *saturated = true;
        0.0
    } else {
        log_value.exp()
    }
}

/// Free-function form of [`GarchTailChain::new`] followed by one draw.
pub fn sample_garch_tail_chain(
    params: &GarchParams,
    tail: &TailIndex,
    m: usize,
    n: usize,
    conditioning: Conditioning,
    streams: &mut PathStreams,
) -> Result<GarchTailChainSample> {
    Ok(GarchTailChain::new(*params, *tail)?.sample(m, n, conditioning, streams))
}

impl GarchTailChainSample {
    fn idx(&self, t: isize) -> usize {
        let i = t + self.m as isize;
        assert!(i >= 0 && (i as usize) < self.sigma_path.len(), "lag {t} outside -{}..={}", self.m, self.n);
        i as usize
    }

    pub fn sigma(&self, t: isize) -> f64 {
        self.sigma_path[self.idx(t)]
    }

    pub fn zeta(&self, t: isize) -> f64 {
        self.zeta_path[self.idx(t)]
    }

    pub fn sign(&self, t: isize) -> f64 {
        self.signs[self.idx(t)]
    }

    /// Writes `t,sigma,zeta` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "sigma", "zeta"])?;
        for (k, (s, z)) in self.sigma_path.iter().zip(&self.zeta_path).enumerate() {
            let t = k as isize - self.m as isize;
            w.write_record([t.to_string(), s.to_string(), z.to_string()])?;
        }
        w.flush()
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= ALGEBRA_TOL * a.abs().max(b.abs())
}

/// True iff every defining identity of the sample holds to relative `1e-12`.
/// Entries reported as saturated (`σ = 0`) are exempt from the product
/// identities but must keep `ζ = 0`.
pub fn chain_algebra_check(sample: &GarchTailChainSample, params: &GarchParams) -> bool {
    let (m, n) = (sample.m, sample.n);
    let len = m + n + 1;
    if [sample.signs.len(), sample.sigma_path.len(), sample.zeta_path.len()] != [len, len, len]
        || sample.fwd_innovations.len() != n
        || sample.bwd_increments.len() != m
    {
        return false;
    }
    if !(sample.zeta0_mag >= 1.0) || sample.signs.iter().any(|s| s.abs() != 1.0) {
        return false;
    }
    let ok_step = |prev: f64, cur: f64, factor: f64| {
        if cur == 0.0 {
            sample.saturated && prev * factor < LOG_UNDERFLOW.exp() * 2.0
        } else {
            cur > 0.0 && close(cur, prev * factor)
        }
    };
    let sigma0 = sample.sigma_path[m];
    if !(sigma0 > 0.0 && close(sigma0, sample.zeta0_mag / sample.eps1.abs())) {
        return false;
    }
    if !close(sample.zeta_path[m], sample.zeta0_mag * sample.signs[m]) {
        return false;
    }
    let eps = |t: usize| if t == 1 { sample.eps1 } else { sample.fwd_innovations[t - 2] };
    for t in 1..=n {
        let i = m + t;
        if !ok_step(sample.sigma_path[i - 1], sample.sigma_path[i], params.phi(eps(t))) {
            return false;
        }
        if !close(sample.zeta_path[i], sample.sigma_path[i] * eps(t + 1).abs() * sample.signs[i]) {
            return false;
        }
    }
    for t in 1..=m {
        let i = m - t;
        let a = sample.bwd_increments[t - 1];
        if !(a > 0.0 && a < params.backward_support_end()) {
            return false;
        }
        if !ok_step(sample.sigma_path[i + 1], sample.sigma_path[i], a) {
            return false;
        }
        let z = ((a.powi(-2) - params.beta1) / params.alpha1).max(0.0).sqrt();
        if !close(sample.zeta_path[i], sample.sigma_path[i] * z * sample.signs[i]) {
            return false;
        }
    }
    true
}
