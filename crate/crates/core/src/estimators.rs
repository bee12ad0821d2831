//! Monte Carlo estimates of extremal characteristics from tail-chain runs,
//! and the blocks estimator of the extremal index for observed series.
//!
//! With one-sided conditioning the threshold normalizes to 1, so
//!
//! - `θ_m = P(max(ζ_1, …, ζ_m) < 1)`,
//! - `χ(h) = P(ζ_h > 1)`,
//! - `γ_m(h) = P(ζ_h > 1 | ζ_i <= 1, i = -m … -1)`.
//!
//! Path `i` of a run always uses the streams `(seed, i)`, and counts are
//! integers, so results do not depend on the number of worker threads.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bftc::{simulate_bftc, BftcSpec};
use crate::error::{Error, Result};
use crate::garch_chain::{Conditioning, GarchTailChain};
use crate::streams::{stream, PathStreams};
use crate::tail_index::{solve_tail_index, GarchParams, TailIndex};

/// `(alpha1, beta1)` of the seven reference models.
pub const TABLE1_ROWS: [(f64, f64); 7] = [
    (0.99, 0.0),
    (0.15, 0.84),
    (0.11, 0.88),
    (0.09, 0.90),
    (0.07, 0.92),
    (0.04, 0.95),
    (0.072, 0.920),
];

/// Default cluster horizon.
pub const DEFAULT_M: usize = 500;
/// Smallest accepted denominator count for `γ`.
pub const MIN_CONDITIONING: u64 = 50;
const Z95: f64 = 1.959_963_984_540_054;

/// Anything that yields one-sided `ζ` paths over lags `-back ..= fwd`.
pub trait TailChainSource: Sync {
    /// Returned vector has length `back + fwd + 1`; index `back` is lag 0.
    fn zeta_path(&self, back: usize, fwd: usize, streams: &mut PathStreams) -> Vec<f64>;

    fn garch(&self) -> Option<(GarchParams, TailIndex)> {
        None
    }
}

impl TailChainSource for GarchTailChain {
    fn zeta_path(&self, back: usize, fwd: usize, streams: &mut PathStreams) -> Vec<f64> {
        self.sample(back, fwd, Conditioning::OneSided, streams).zeta_path
    }

    fn garch(&self) -> Option<(GarchParams, TailIndex)> {
        Some((self.params(), self.tail()))
    }
}

impl TailChainSource for BftcSpec {
    fn zeta_path(&self, back: usize, fwd: usize, streams: &mut PathStreams) -> Vec<f64> {
        let path = simulate_bftc(self, back, fwd.saturating_sub(self.s()), streams);
        let mut v = path.values;
        v.truncate(back + fwd + 1);
        v
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EstimatorReport {
    pub estimate: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    /// Number of simulated chains.
    pub n_reps: usize,
    /// Paths counted in the numerator and the denominator.
    pub successes: u64,
    pub trials: u64,
    pub m: Option<usize>,
    pub h: Option<i64>,
    pub seed: u64,
    pub params: Option<GarchParams>,
    pub alpha: Option<f64>,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

fn binomial_report(source: &dyn TailChainSource, successes: u64, trials: u64, n_reps: usize, seed: u64) -> EstimatorReport {
    let p = successes as f64 / trials as f64;
    let garch = source.garch();
    EstimatorReport {
        estimate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        ci95: wilson_interval(successes, trials),
        n_reps,
        successes,
        trials,
        m: None,
        h: None,
        seed,
        params: garch.map(|g| g.0),
        alpha: garch.map(|g| g.1.alpha),
    }
}

fn check_reps(n_reps: usize) -> Result<()> {
    if n_reps < 100 {
        return Err(Error::param(format!("need at least 100 replications, got {n_reps}")));
    }
    Ok(())
}

fn count<S: TailChainSource + ?Sized>(
    source: &S,
    back: usize,
    fwd: usize,
    n_reps: usize,
    seed: u64,
    f: impl Fn(&[f64]) -> bool + Sync,
) -> u64 {
    (0..n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let path = source.zeta_path(back, fwd, &mut PathStreams::new(seed, i));
            f(&path) as u64
        })
        .sum()
}

/// `θ_m`: share of chains with no exceedance over lags `1 ..= m`.
pub fn estimate_theta<S: TailChainSource>(source: &S, m: usize, n_reps: usize, seed: u64) -> Result<EstimatorReport> {
    if m < 1 {
        return Err(Error::param("m must be at least 1"));
    }
    check_reps(n_reps)?;
    let k = count(source, 0, m, n_reps, seed, |z| z[1..].iter().all(|&v| v < 1.0));
    let mut r = binomial_report(source, k, n_reps as u64, n_reps, seed);
    r.m = Some(m);
    Ok(r)
}

/// `χ(h)`; negative lags run the backward chain. Lag 0 is the conditioning
/// event itself and returns 1.
pub fn estimate_chi<S: TailChainSource>(source: &S, h: i64, n_reps: usize, seed: u64) -> Result<EstimatorReport> {
    check_reps(n_reps)?;
    let k = if h == 0 {
        n_reps as u64
    } else if h > 0 {
        let h = h as usize;
        count(source, 0, h, n_reps, seed, |z| z[h] > 1.0)
    } else {
        count(source, h.unsigned_abs() as usize, 0, n_reps, seed, |z| z[0] > 1.0)
    };
    let mut r = binomial_report(source, k, n_reps as u64, n_reps, seed);
    r.h = Some(h);
    Ok(r)
}

fn ratio_report(
    source: &dyn TailChainSource,
    numerator: u64,
    denominator: u64,
    n_reps: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    if denominator < MIN_CONDITIONING {
        return Err(Error::InsufficientConditioning {
            count: denominator,
            required: MIN_CONDITIONING,
        });
    }
    let (x, d) = (numerator as f64, denominator as f64);
    let r = x / d;
    // delta method for mean(X) / mean(Y) with indicators X <= Y
    let ss = x * (1.0 - r).powi(2) + (d - x) * r * r;
    let mut rep = binomial_report(source, numerator, denominator, n_reps, seed);
    rep.estimate = r;
    rep.std_error = ss.sqrt() / d;
    rep.ci95 = wilson_interval(numerator, denominator);
    Ok(rep)
}

/// `γ_m(h)` from joint chains over lags `-m ..= h`.
pub fn estimate_gamma<S: TailChainSource>(source: &S, h: i64, m: usize, n_reps: usize, seed: u64) -> Result<EstimatorReport> {
    if h < 1 {
        return Err(Error::param("gamma needs h >= 1"));
    }
    check_reps(n_reps)?;
    let hu = h as usize;
    let (num, den) = (0..n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let z = source.zeta_path(m, hu, &mut PathStreams::new(seed, i));
            let quiet = z[..m].iter().all(|&v| v <= 1.0);
            ((quiet && z[m + hu] > 1.0) as u64, quiet as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mut r = ratio_report(source, num, den, n_reps, seed)?;
    r.m = Some(m);
    r.h = Some(h);
    Ok(r)
}

/// One line of the extremal-measure table.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Table1Row {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha: f64,
    pub theta: EstimatorReport,
    pub chi: [EstimatorReport; 3],
    pub gamma: [EstimatorReport; 3],
    pub seconds: f64,
}

/// `θ_m`, `χ(1..3)` and `γ_m(1..3)` for one model from a single set of joint
/// chains. Identical to the separate estimators on the same seed.
pub fn table1_row(chain: &GarchTailChain, n_reps: usize, m: usize, seed: u64) -> Result<Table1Row> {
    if m < 1 {
        return Err(Error::param("m must be at least 1"));
    }
    check_reps(n_reps)?;
    let start = std::time::Instant::now();
    let fwd = m.max(3);
    let counts = (0..n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let z = chain.zeta_path(m, fwd, &mut PathStreams::new(seed, i));
            let (past, future) = (&z[..m], &z[m + 1..]);
            let quiet = past.iter().all(|&v| v <= 1.0);
            let mut c = [0u64; 8];
            c[0] = future[..m].iter().all(|&v| v < 1.0) as u64;
            for h in 0..3 {
                let hit = future[h] > 1.0;
                c[1 + h] = hit as u64;
                c[4 + h] = (hit && quiet) as u64;
            }
            c[7] = quiet as u64;
            c
        })
        .reduce(|| [0u64; 8], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    let n = n_reps as u64;
    let mut theta = binomial_report(chain, counts[0], n, n_reps, seed);
    theta.m = Some(m);
    let chi = [1, 2, 3].map(|h| {
        let mut r = binomial_report(chain, counts[h], n, n_reps, seed);
        r.h = Some(h as i64);
        r
    });
    let mut gamma = Vec::with_capacity(3);
    for h in 1..=3 {
        let mut r = ratio_report(chain, counts[3 + h], counts[7], n_reps, seed)?;
        r.m = Some(m);
        r.h = Some(h as i64);
        gamma.push(r);
    }
    let params = chain.params();
    Ok(Table1Row {
        alpha1: params.alpha1,
        beta1: params.beta1,
        alpha: chain.tail().alpha,
        theta,
        chi,
        gamma: gamma.try_into().expect("three lags"),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs [`table1_row`] for each `(alpha1, beta1)`.
pub fn table1(rows: &[(f64, f64)], n_reps: usize, m: usize, seed: u64) -> Result<Vec<Table1Row>> {
    rows.iter()
        .map(|&(a1, b1)| {
            let params = GarchParams::tail(a1, b1)?;
            let tail = solve_tail_index(&params)?;
            let chain = GarchTailChain::new(params, tail)?;
            table1_row(&chain, n_reps, m, seed)
        })
        .collect()
}

pub const TABLE1_HEADER: [&str; 17] = [
    "alpha1", "beta1", "alpha", "theta", "chi1", "chi2", "chi3", "gamma1", "gamma2", "gamma3", "se_theta", "se_chi1",
    "se_chi2", "se_chi3", "se_gamma1", "se_gamma2", "se_gamma3",
];

/// Writes rows under [`TABLE1_HEADER`].
pub fn write_table1_csv<W: Write>(rows: &[Table1Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE1_HEADER).map_err(csv_err)?;
    for r in rows {
        let reports = std::iter::once(&r.theta).chain(&r.chi).chain(&r.gamma);
        let mut rec = vec![r.alpha1, r.beta1, r.alpha];
        rec.extend(reports.clone().map(|x| x.estimate));
        rec.extend(reports.map(|x| x.std_error));
        w.write_record(rec.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Observed series for the blocks estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub source: String,
    /// Rows that were not a single finite number (a leading header excluded).
    pub skipped: usize,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("series values must be finite"));
        }
        Ok(Self {
            values,
            source: source.into(),
            skipped: 0,
        })
    }

    /// One numeric column, optional header line, LF or CRLF.
    pub fn from_csv<R: Read>(input: R, source: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
        let mut values = Vec::new();
        let mut skipped = 0;
        for (i, rec) in rdr.records().enumerate() {
            let parsed = match rec {
                Ok(r) if r.len() == 1 => r[0].trim().parse::<f64>().ok().filter(|v| v.is_finite()),
                Ok(_) => None,
                Err(e) if e.is_io_error() => return Err(csv_err(e)),
                Err(_) => None,
            };
            match parsed {
                Some(v) => values.push(v),
                None if i == 0 => {}
                None => skipped += 1,
            }
        }
        Ok(Self {
            values,
            source: source.into(),
            skipped,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv(std::io::BufReader::new(f), path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Type-7 (linear interpolation) sample quantile.
pub fn empirical_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BlocksReport {
    pub estimate: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub threshold: f64,
    pub exceedances: u64,
    pub exceeding_blocks: u64,
    pub blocks: u64,
    pub block_len: usize,
    pub quantile: f64,
    pub n: usize,
    pub source: String,
    pub skipped_rows: usize,
    pub seed: u64,
}

const BOOTSTRAP_REPS: usize = 200;

fn blocks_formula(exceeding: u64, blocks: u64, exceedances: u64, n: u64, block_len: usize) -> f64 {
    if exceedances == 0 {
        return f64::NAN;
    }
    let theta = if exceeding < blocks && exceedances < n {
        let k = exceeding as f64 / blocks as f64;
        let p = exceedances as f64 / n as f64;
        (1.0 - k).ln() / (block_len as f64 * (1.0 - p).ln())
    } else {
        exceeding as f64 / exceedances as f64
    };
    theta.clamp(0.0, 1.0)
}

/// Blocks estimator of the extremal index.
///
/// Threshold: type-7 empirical `quantile`; exceedances are strict. With `k`
/// blocks of length `r` (the trailing partial block included), `K` of them
/// containing an exceedance, and `N` exceedances among `n` values,
/// `θ̂ = log(1 - K/k) / (r log(1 - N/n))`, clamped to `[0, 1]`; falls back to
/// `K/N` when every block exceeds. Standard error from a block bootstrap.
pub fn blocks_estimator(series: &ReturnSeries, block_len: usize, quantile: f64, seed: u64) -> Result<BlocksReport> {
    if !(quantile > 0.5 && quantile < 1.0) {
        return Err(Error::param(format!("quantile must lie in (0.5, 1), got {quantile}")));
    }
    if block_len < 1 {
        return Err(Error::param("block length must be at least 1"));
    }
    let n = series.len();
    if n < 2 * block_len {
        return Err(Error::param(format!(
            "series of length {n} is shorter than two blocks of {block_len}"
        )));
    }
    let threshold = empirical_quantile(&series.values, quantile);
    let per_block: Vec<(u64, u64)> = series
        .values
        .chunks(block_len)
        .map(|b| {
            let c = b.iter().filter(|&&v| v > threshold).count() as u64;
            ((c > 0) as u64, c)
        })
        .collect();
    let blocks = per_block.len() as u64;
    let exceeding: u64 = per_block.iter().map(|b| b.0).sum();
    let exceedances: u64 = per_block.iter().map(|b| b.1).sum();
    if exceedances == 0 {
        return Err(Error::NoExceedances { threshold });
    }
    let estimate = blocks_formula(exceeding, blocks, exceedances, n as u64, block_len);

    let mut rng = stream(seed, 0);
    let mut boot = Vec::with_capacity(BOOTSTRAP_REPS);
    for _ in 0..BOOTSTRAP_REPS {
        let (mut k, mut c) = (0, 0);
        for _ in 0..blocks {
            let b = per_block[rng.random_range(0..per_block.len())];
            k += b.0;
            c += b.1;
        }
        let t = blocks_formula(k, blocks, c, n as u64, block_len);
        if t.is_finite() {
            boot.push(t);
        }
    }
    let mean = boot.iter().sum::<f64>() / boot.len().max(1) as f64;
    let var = boot.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (boot.len().max(2) - 1) as f64;
    let std_error = var.sqrt();
    let ci95 = (
        (estimate - Z95 * std_error).max(0.0),
        (estimate + Z95 * std_error).min(1.0),
    );
    Ok(BlocksReport {
        estimate,
        std_error,
        ci95,
        threshold,
        exceedances,
        exceeding_blocks: exceeding,
        blocks,
        block_len,
        quantile,
        n,
        source: series.source.clone(),
        skipped_rows: series.skipped,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bftc::{BackwardLaw, IncrementLaw};

    fn dead_chain() -> BftcSpec {
        let inc = IncrementLaw::constant(0.0, 1.0).unwrap();
        BftcSpec::self_conditioned(inc, BackwardLaw::zero()).unwrap()
    }

    #[test]
    fn dead_chain_has_unit_theta() {
        let r = estimate_theta(&dead_chain(), 20, 500, 1).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert!(r.ci95.0 <= 1.0 && r.ci95.1 == 1.0);
    }

    #[test]
    fn lag_zero_chi_is_one() {
        assert_eq!(estimate_chi(&dead_chain(), 0, 100, 3).unwrap().estimate, 1.0);
    }

    #[test]
    fn gamma_starves_without_quiet_past() {
        // a constant unit-increment chain exceeds at every lag
        let inc = IncrementLaw::constant(1.0, 1.0).unwrap();
        let back = crate::bftc::build_adjoint(&inc, 100_000, 1).unwrap();
        let spec = BftcSpec::new(inc, back, 0, |_| vec![2.0]).unwrap();
        let e = estimate_gamma(&spec, 1, 5, 200, 1).unwrap_err();
        assert!(matches!(e, Error::InsufficientConditioning { count: 0, .. }));
    }

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0, 10), (10, 10), (3, 1000), (500, 1000)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn small_inputs_rejected() {
        assert!(estimate_theta(&dead_chain(), 0, 500, 1).is_err());
        assert!(estimate_theta(&dead_chain(), 5, 99, 1).is_err());
        assert!(estimate_gamma(&dead_chain(), 0, 5, 500, 1).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let text = "ret\r\n0.5\r\n-1.25\r\nbad\r\n1,2\r\n3e-2\r\nNaN\r\n";
        let s = ReturnSeries::from_csv(text.as_bytes(), "mem").unwrap();
        assert_eq!(s.values, vec![0.5, -1.25, 0.03]);
        assert_eq!(s.skipped, 3);
        let s = ReturnSeries::from_csv("1\n2\n".as_bytes(), "mem").unwrap();
        assert_eq!((s.values.len(), s.skipped), (2, 0));
    }

    #[test]
    fn quantile_type7() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(empirical_quantile(&v, 0.5), 3.0);
        assert_eq!(empirical_quantile(&v, 0.9), 4.6);
    }

    #[test]
    fn constant_series_has_no_exceedances() {
        let s = ReturnSeries::new(vec![1.0; 1000], "c").unwrap();
        assert!(matches!(blocks_estimator(&s, 10, 0.95, 1), Err(Error::NoExceedances { .. })));
        assert!(blocks_estimator(&s, 600, 0.95, 1).is_err());
    }

    #[test]
    fn table_csv_layout() {
        let p = GarchParams::tail(0.15, 0.84).unwrap();
        let chain = GarchTailChain::new(p, solve_tail_index(&p).unwrap()).unwrap();
        let row = table1_row(&chain, 2000, 20, 4).unwrap();
        let mut buf = Vec::new();
        write_table1_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TABLE1_HEADER.join(","));
        let fields: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 17);
        assert_eq!(fields[3], row.theta.estimate);
        assert_eq!(fields[16], row.gamma[2].std_error);
    }
}
