//! Tabulated monotone distribution functions with exact inversion of the
//! interpolant, used for inverse-CDF sampling of laws that are only available
//! through an integral.

use rand::Rng;

use crate::error::{Error, Result};

/// How values between grid nodes are interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Cubic Hermite with Fritsch–Carlson limited slopes (monotone).
    MonotoneCubic,
}

/// Monotone CDF on a strictly increasing grid.
///
/// `inverse` inverts the interpolant itself, so `inverse(cdf(x)) == x` up to
/// the segment solver tolerance anywhere inside the grid.
#[derive(Debug, Clone)]
pub struct MonotoneCdfTable {
    grid: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
    interpolation: Interpolation,
}

const END_TOL: f64 = 1e-12;

impl MonotoneCdfTable {
    /// Builds a table, estimating slopes from the data (PCHIP) when cubic.
    pub fn new(grid: Vec<f64>, cdf: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        validate(&grid, &cdf)?;
        let slopes = match interpolation {
            Interpolation::Linear => vec![0.0; grid.len()],
            Interpolation::MonotoneCubic => pchip_slopes(&grid, &cdf),
        };
        Ok(Self {
            grid,
            cdf,
            slopes,
            interpolation,
        })
    }

    /// Cubic Hermite table from known densities at the nodes. Slopes are
    /// limited where needed to keep the interpolant monotone.
    pub fn with_densities(grid: Vec<f64>, cdf: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        validate(&grid, &cdf)?;
        if densities.len() != grid.len() || densities.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::param("densities must be nonnegative, one per node"));
        }
        let mut slopes = densities;
        limit_slopes(&grid, &cdf, &mut slopes);
        Ok(Self {
            grid,
            cdf,
            slopes,
            interpolation: Interpolation::MonotoneCubic,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// First and last node.
    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Interpolated distribution function; 0 left of the grid, the last
    /// tabulated value right of it.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x < self.grid[0] {
            return 0.0;
        }
        if x >= self.grid[n - 1] {
            return self.cdf[n - 1];
        }
        let i = self.grid.partition_point(|&g| g <= x) - 1;
        let h = self.grid[i + 1] - self.grid[i];
        let t = (x - self.grid[i]) / h;
        self.eval_segment(i, t)
    }

    /// Generalized inverse of the interpolated CDF; `u` is clamped to the
    /// tabulated range.
    pub fn inverse(&self, u: f64) -> f64 {
        let n = self.cdf.len();
        let u = u.clamp(self.cdf[0], self.cdf[n - 1]);
        let j = self.cdf.partition_point(|&c| c < u);
        if j == 0 {
            return self.grid[0];
        }
        let i = j - 1;
        let (lo, hi) = (self.cdf[i], self.cdf[i + 1]);
        if hi <= lo {
            return self.grid[i];
        }
        let t = self.solve_segment(i, u);
        self.grid[i] + t * (self.grid[i + 1] - self.grid[i])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse(rng.random::<f64>())
    }

    #[inline]
    fn eval_segment(&self, i: usize, t: f64) -> f64 {
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        match self.interpolation {
            Interpolation::Linear => y0 + t * (y1 - y0),
            Interpolation::MonotoneCubic => {
                let h = self.grid[i + 1] - self.grid[i];
                let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                y0 * h00 + m0 * h10 + y1 * h01 + m1 * h11
            }
        }
    }

    #[inline]
    fn segment_derivative(&self, i: usize, t: f64) -> f64 {
        // d/dt of the Hermite form
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let h = self.grid[i + 1] - self.grid[i];
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        y0 * (6.0 * t2 - 6.0 * t) + m0 * (3.0 * t2 - 4.0 * t + 1.0) + y1 * (-6.0 * t2 + 6.0 * t) + m1 * (3.0 * t2 - 2.0 * t)
    }

    /// Solves `H_i(t) = u` for `t ∈ [0, 1]` by Newton steps kept inside a
    /// shrinking bisection bracket.
    fn solve_segment(&self, i: usize, u: f64) -> f64 {
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let mut t = ((u - y0) / (y1 - y0)).clamp(0.0, 1.0);
        if self.interpolation == Interpolation::Linear {
            return t;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let r = self.eval_segment(i, t) - u;
            if r == 0.0 {
                return t;
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.segment_derivative(i, t);
            let mut next = if d > 0.0 { t - r / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 || hi - lo <= 1e-15 {
                return next;
            }
            t = next;
        }
        t
    }
}

fn validate(grid: &[f64], cdf: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid.len() != cdf.len() {
        return Err(Error::param("table needs at least two nodes and matching lengths"));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("grid must be finite and strictly increasing"));
    }
    if cdf.iter().any(|c| !(0.0..=1.0).contains(c)) || cdf.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("cdf values must be nondecreasing within [0, 1]"));
    }
    if cdf[0] > END_TOL || cdf[cdf.len() - 1] < 1.0 - END_TOL {
        return Err(Error::param(format!(
            "table must cover the law: first value {} (<= {END_TOL}), last value {}",
            cdf[0],
            cdf[cdf.len() - 1]
        )));
    }
    Ok(())
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = delta[0];
        m[1] = delta[0];
    } else {
        m[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
        m[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    for k in 1..n - 1 {
        if delta[k - 1] > 0.0 && delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    limit_slopes(x, y, &mut m);
    m
}

// One-sided three-point slope, kept shape preserving.
fn pchip_end(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

// Fritsch–Carlson: keep (m_k, m_{k+1}) / secant inside the circle of radius 3.
fn limit_slopes(x: &[f64], y: &[f64], m: &mut [f64]) {
    for k in 0..x.len() - 1 {
        let delta = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
        if delta == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta;
        let b = m[k + 1] / delta;
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            m[k] = tau * a * delta;
            m[k + 1] = tau * b * delta;
        }
    }
}
