//! Brute-force check of the tail chain: long stationary GARCH(1,1) paths,
//! empirical conditional laws at finite thresholds, and tail constants.
//!
//! A path of length `L` is the concatenation of independent stationary
//! segments of [`SEGMENT_LEN`] steps, each with its own burn-in and its own
//! random stream `(seed, segment)`. Exceedance windows never straddle two
//! segments. Thresholds are exact empirical quantiles of `ζ` over the whole
//! path, found in a first streaming pass; a second pass regenerates the
//! segments and accumulates the conditional counts.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::streams::stream;
use crate::tail_index::GarchParams;

pub const SEGMENT_LEN: usize = 1 << 20;
pub const MIN_BURN_IN: usize = 10_000;
pub const MIN_EXCEEDANCES: u64 = 500;
/// `u` values for the tightness diagnostic.
pub const TIGHTNESS_LEVELS: [f64; 2] = [2.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSimConfig {
    pub params: GarchParams,
    pub length: usize,
    pub burn_in: usize,
    /// Threshold as an empirical quantile of `ζ`.
    pub quantile: f64,
    pub seed: u64,
}

impl PathSimConfig {
    pub fn new(params: GarchParams, length: usize, quantile: f64, seed: u64) -> Self {
        Self {
            params,
            length,
            burn_in: MIN_BURN_IN,
            quantile,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        self.params.require_stationary()?;
        if self.burn_in < MIN_BURN_IN {
            return Err(Error::param(format!("burn-in must be at least {MIN_BURN_IN}")));
        }
        if self.length == 0 {
            return Err(Error::param("path length must be positive"));
        }
        Ok(())
    }

    fn segments(&self) -> Vec<(u64, usize)> {
        let n = self.length.div_ceil(SEGMENT_LEN);
        (0..n)
            .map(|i| (i as u64, SEGMENT_LEN.min(self.length - i * SEGMENT_LEN)))
            .collect()
    }
}

fn check_quantile(q: f64) -> Result<()> {
    if !(q > 0.99 && q < 1.0) {
        return Err(Error::param(format!("quantile must lie in (0.99, 1), got {q}")));
    }
    Ok(())
}

/// One stationary segment: `σ_t² = alpha0 + alpha1 ζ_{t-1}² + beta1 σ_{t-1}²`,
/// `ζ_t = σ_t ε_{t+1}`, started from `σ² = alpha0 / (1 - alpha1 - beta1)`.
fn simulate_segment(params: &GarchParams, len: usize, burn_in: usize, seed: u64, id: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream(seed, id);
    let GarchParams { alpha0, alpha1, beta1 } = *params;
    let mut var = alpha0 / (1.0 - alpha1 - beta1);
    let mut sigma = Vec::with_capacity(len);
    let mut zeta = Vec::with_capacity(len);
    for t in 0..burn_in + len {
        let s = var.sqrt();
        let eps: f64 = StandardNormal.sample(&mut rng);
        let z = s * eps;
        if t >= burn_in {
            sigma.push(s);
            zeta.push(z);
        }
        var = alpha0 + alpha1 * z * z + beta1 * var;
    }
    (sigma, zeta)
}

/// Materialized `(σ, ζ)` series of the configured length.
pub fn simulate_garch_path(config: &PathSimConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    config.validate()?;
    let parts: Vec<_> = config
        .segments()
        .into_par_iter()
        .map(|(id, len)| simulate_segment(&config.params, len, config.burn_in, config.seed, id))
        .collect();
    let mut sigma = Vec::with_capacity(config.length);
    let mut zeta = Vec::with_capacity(config.length);
    for (s, z) in parts {
        sigma.extend(s);
        zeta.extend(z);
    }
    Ok((sigma, zeta))
}

/// Finite-threshold analogues of the tail-chain quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalEmpirics {
    pub quantile: f64,
    pub x: f64,
    /// Exceedance times with a complete window.
    pub n_exceed: u64,
    pub m: usize,
    pub theta_hat: f64,
    /// `χ̂(h)` for `h = 1 ..= h_max`.
    pub chi: Vec<f64>,
    /// Binomial standard errors of `chi`, ignoring window overlap.
    pub chi_se: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_denominator: u64,
    /// `P̂(|ζ| > x) / P̂(σ > x)`.
    pub c_hat: f64,
    pub abs_exceed: u64,
    pub sigma_exceed: u64,
    pub length: usize,
    /// `(u, P̂(max σ_t / x > u over the window | ζ_0 > x))`.
    pub tightness: Vec<(f64, f64)>,
    pub window_len: usize,
}

#[derive(Debug, Clone, Default)]
struct Counts {
    n_exceed: u64,
    theta: u64,
    chi: Vec<u64>,
    gamma: Vec<u64>,
    quiet: u64,
    abs_exceed: u64,
    sigma_exceed: u64,
    tight: Vec<u64>,
}

impl Counts {
    fn new(h_max: usize) -> Self {
        Self {
            chi: vec![0; h_max],
            gamma: vec![0; h_max],
            tight: vec![0; TIGHTNESS_LEVELS.len()],
            ..Default::default()
        }
    }

    fn merge(mut self, o: Counts) -> Counts {
        self.n_exceed += o.n_exceed;
        self.theta += o.theta;
        self.quiet += o.quiet;
        self.abs_exceed += o.abs_exceed;
        self.sigma_exceed += o.sigma_exceed;
        for (a, b) in self.chi.iter_mut().zip(o.chi) {
            *a += b;
        }
        for (a, b) in self.gamma.iter_mut().zip(o.gamma) {
            *a += b;
        }
        for (a, b) in self.tight.iter_mut().zip(o.tight) {
            *a += b;
        }
        self
    }
}

fn accumulate(sigma: &[f64], zeta: &[f64], x: f64, h_max: usize, m: usize, c: &mut Counts) {
    let n = zeta.len();
    let w = m.max(h_max);
    c.abs_exceed += zeta.iter().filter(|z| z.abs() > x).count() as u64;
    c.sigma_exceed += sigma.iter().filter(|&&s| s > x).count() as u64;
    if n <= m + w {
        return;
    }
    for tau in m..n - w {
        if !(zeta[tau] > x) {
            continue;
        }
        c.n_exceed += 1;
        c.theta += zeta[tau + 1..=tau + m].iter().all(|&z| z < x) as u64;
        let quiet = zeta[tau - m..tau].iter().all(|&z| z <= x);
        c.quiet += quiet as u64;
        for h in 1..=h_max {
            let hit = zeta[tau + h] > x;
            c.chi[h - 1] += hit as u64;
            c.gamma[h - 1] += (hit && quiet) as u64;
        }
        let peak = sigma[tau - m..=tau + w].iter().fold(0.0f64, |a, &b| a.max(b)) / x;
        for (k, &u) in TIGHTNESS_LEVELS.iter().enumerate() {
            c.tight[k] += (peak > u) as u64;
        }
    }
}

fn finish(c: Counts, quantile: f64, x: f64, h_max: usize, m: usize, length: usize) -> Result<ConditionalEmpirics> {
    if c.n_exceed < MIN_EXCEEDANCES {
        return Err(Error::ExceedanceStarvation {
            count: c.n_exceed,
            required: MIN_EXCEEDANCES,
        });
    }
    let n = c.n_exceed as f64;
    let chi: Vec<f64> = c.chi.iter().map(|&k| k as f64 / n).collect();
    let chi_se = chi.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    let gamma = c
        .gamma
        .iter()
        .map(|&k| if c.quiet > 0 { k as f64 / c.quiet as f64 } else { f64::NAN })
        .collect();
    let c_hat = if c.sigma_exceed > 0 {
        c.abs_exceed as f64 / c.sigma_exceed as f64
    } else {
        f64::INFINITY
    };
    Ok(ConditionalEmpirics {
        quantile,
        x,
        n_exceed: c.n_exceed,
        m,
        theta_hat: c.theta as f64 / n,
        chi,
        chi_se,
        gamma,
        gamma_denominator: c.quiet,
        c_hat,
        abs_exceed: c.abs_exceed,
        sigma_exceed: c.sigma_exceed,
        length,
        tightness: TIGHTNESS_LEVELS
            .iter()
            .zip(&c.tight)
            .map(|(&u, &k)| (u, k as f64 / n))
            .collect(),
        window_len: m + m.max(h_max) + 1,
    })
}

/// Type-7 quantiles of a stream of values, computed exactly from the top
/// order statistics.
fn streamed_quantiles(config: &PathSimConfig, quantiles: &[f64]) -> Vec<f64> {
    let l = config.length;
    let q_min = quantiles.iter().cloned().fold(1.0, f64::min);
    let keep = (l - ((l - 1) as f64 * q_min).floor() as usize + 1).min(l);
    let tops: Vec<Vec<f64>> = config
        .segments()
        .into_par_iter()
        .map(|(id, len)| {
            let (_, mut z) = simulate_segment(&config.params, len, config.burn_in, config.seed, id);
            top_k(&mut z, keep)
        })
        .collect();
    let mut all: Vec<f64> = tops.into_iter().flatten().collect();
    let mut top = top_k(&mut all, keep);
    top.sort_by(f64::total_cmp);
    let offset = l - top.len();
    let at = |rank: usize| top[rank - offset];
    quantiles
        .iter()
        .map(|&q| {
            let h = (l - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(l - 1);
            at(lo) + (h - lo as f64) * (at(hi) - at(lo))
        })
        .collect()
}

fn top_k(v: &mut Vec<f64>, k: usize) -> Vec<f64> {
    if v.len() <= k {
        return std::mem::take(v);
    }
    let cut = v.len() - k;
    v.select_nth_unstable_by(cut, f64::total_cmp);
    v.split_off(cut)
}

/// Conditional empirics at several quantiles of one streamed path.
pub fn conditional_empirics_multi(
    config: &PathSimConfig,
    quantiles: &[f64],
    h_max: usize,
    m: usize,
) -> Result<Vec<ConditionalEmpirics>> {
    config.validate()?;
    for &q in quantiles {
        check_quantile(q)?;
    }
    if h_max < 1 || m < 1 {
        return Err(Error::param("need h_max >= 1 and m >= 1"));
    }
    let xs = streamed_quantiles(config, quantiles);
    let counts = config
        .segments()
        .into_par_iter()
        .map(|(id, len)| {
            let (s, z) = simulate_segment(&config.params, len, config.burn_in, config.seed, id);
            xs.iter()
                .map(|&x| {
                    let mut c = Counts::new(h_max);
                    accumulate(&s, &z, x, h_max, m, &mut c);
                    c
                })
                .collect::<Vec<_>>()
        })
        .reduce(
            || xs.iter().map(|_| Counts::new(h_max)).collect(),
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        );
    counts
        .into_iter()
        .zip(quantiles.iter().zip(&xs))
        .map(|(c, (&q, &x))| finish(c, q, x, h_max, m, config.length))
        .collect()
}

/// Conditional empirics at `config.quantile`.
pub fn conditional_empirics(config: &PathSimConfig, h_max: usize, m: usize) -> Result<ConditionalEmpirics> {
    Ok(conditional_empirics_multi(config, &[config.quantile], h_max, m)?.remove(0))
}

/// Same statistics for an in-memory series (`σ` optional; without it the
/// tail-ratio and tightness fields are NaN).
pub fn conditional_empirics_from_series(
    zeta: &[f64],
    sigma: Option<&[f64]>,
    quantile: f64,
    h_max: usize,
    m: usize,
) -> Result<ConditionalEmpirics> {
    check_quantile(quantile)?;
    if zeta.is_empty() || sigma.is_some_and(|s| s.len() != zeta.len()) {
        return Err(Error::param("series must be nonempty and of equal length"));
    }
    let x = crate::estimators::empirical_quantile(zeta, quantile);
    let nan = vec![f64::NAN; zeta.len()];
    let s = sigma.unwrap_or(&nan);
    let mut c = Counts::new(h_max);
    accumulate(s, zeta, x, h_max, m, &mut c);
    let mut e = finish(c, quantile, x, h_max, m, zeta.len())?;
    if sigma.is_none() {
        e.c_hat = f64::NAN;
        e.sigma_exceed = 0;
        e.tightness.iter_mut().for_each(|t| t.1 = f64::NAN);
    }
    Ok(e)
}

/// `ζ` with its time order destroyed.
pub fn shuffled(zeta: &[f64], seed: u64) -> Vec<f64> {
    let mut v = zeta.to_vec();
    v.shuffle(&mut stream(seed, u64::MAX - 1));
    v
}

/// Summary written by the command-line oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub params: GarchParams,
    pub x: f64,
    pub n_exceed: u64,
    pub theta_hat: f64,
    pub chi: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
}

impl ConditionalEmpirics {
    pub fn summary(&self, params: GarchParams) -> OracleSummary {
        OracleSummary {
            params,
            x: self.x,
            n_exceed: self.n_exceed,
            theta_hat: self.theta_hat,
            chi: self.chi.clone(),
            gamma: self.gamma.clone(),
            c_hat: self.c_hat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillEstimate {
    pub index: f64,
    pub std_error: f64,
    pub k: usize,
}

const HILL_BOOTSTRAP: usize = 200;

/// Hill estimator of the tail index of `|ζ|` from the `k` largest values,
/// with a bootstrap standard error over the log-spacings.
pub fn tail_index_empirical(zeta: &[f64], k: usize, seed: u64) -> Result<HillEstimate> {
    if k < 100 {
        return Err(Error::param(format!("need k >= 100 order statistics, got {k}")));
    }
    if k >= zeta.len() {
        return Err(Error::param(format!("k = {k} exceeds the sample size {}", zeta.len())));
    }
    let mut abs: Vec<f64> = zeta.iter().map(|z| z.abs()).collect();
    let top = top_k(&mut abs, k + 1);
    let base = top.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut logs: Vec<f64> = top.iter().map(|&v| (v / base).ln()).collect();
    // drop the reference order statistic itself
    let pos = logs.iter().position(|&l| l == 0.0).unwrap_or(0);
    logs.swap_remove(pos);
    if !(base > 0.0) || logs.iter().all(|&l| l == 0.0) {
        return Err(Error::param("series has no tail: top order statistics are tied"));
    }
    let hill = |v: &[f64]| v.len() as f64 / v.iter().sum::<f64>();
    let index = hill(&logs);
    let mut rng = stream(seed, 0);
    let mut draws = Vec::with_capacity(HILL_BOOTSTRAP);
    let mut buf = vec![0.0; logs.len()];
    for _ in 0..HILL_BOOTSTRAP {
        for b in buf.iter_mut() {
            *b = logs[rng.random_range(0..logs.len())];
        }
        draws.push(hill(&buf));
    }
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    Ok(HillEstimate {
        index,
        std_error: var.sqrt(),
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(len: usize) -> PathSimConfig {
        PathSimConfig::new(GarchParams::tail(0.15, 0.84).unwrap(), len, 0.999, 3)
    }

    #[test]
    fn rejects_nonstationary_and_short_burn_in() {
        let mut c = cfg(1000);
        c.params = GarchParams::tail(0.5, 0.6).unwrap();
        assert!(simulate_garch_path(&c).is_err());
        let mut c = cfg(1000);
        c.burn_in = 10;
        assert!(simulate_garch_path(&c).is_err());
    }

    #[test]
    fn path_is_deterministic_and_has_length() {
        let c = cfg(SEGMENT_LEN + 10);
        let a = simulate_garch_path(&c).unwrap();
        let b = simulate_garch_path(&c).unwrap();
        assert_eq!(a.1.len(), SEGMENT_LEN + 10);
        assert_eq!(a, b);
        assert!(a.0.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn streamed_quantile_matches_sort() {
        let c = cfg(3 * SEGMENT_LEN / 2);
        let (_, z) = simulate_garch_path(&c).unwrap();
        let qs = [0.995, 0.999];
        let got = streamed_quantiles(&c, &qs);
        for (q, g) in qs.iter().zip(got) {
            assert_eq!(g, crate::estimators::empirical_quantile(&z, *q));
        }
    }

    #[test]
    fn starvation_reported() {
        let e = conditional_empirics(&cfg(200_000), 3, 50).unwrap_err();
        assert!(matches!(e, Error::ExceedanceStarvation { .. }));
    }

    #[test]
    fn hill_rejects_bad_input() {
        assert!(tail_index_empirical(&vec![1.0; 1000], 200, 1).is_err());
        assert!(tail_index_empirical(&[1.0, 2.0], 100, 1).is_err());
        assert!(tail_index_empirical(&vec![1.0; 1000], 50, 1).is_err());
    }

    #[test]
    fn summary_keys() {
        let s = OracleSummary {
            params: GarchParams::tail(0.15, 0.84).unwrap(),
            x: 1.0,
            n_exceed: 10,
            theta_hat: 0.5,
            chi: vec![0.1],
            gamma: vec![0.05],
            c_hat: 2.5,
        };
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["C_hat", "chi", "gamma", "n_exceed", "params", "theta_hat", "x"]);
    }
}
