//! Law of the backward volatility increment `A_{-1}` of the GARCH(1,1) tail
//! chain.
//!
//! With `Z` a half-normal variable tilted by `(alpha1 z² + beta1)^alpha`,
//! i.e. with density `f(z) = sqrt(2/π) (alpha1 z² + beta1)^alpha exp(-z²/2)`
//! on `z > 0`, the increment is `A_{-1} = (alpha1 Z² + beta1)^{-1/2}`. Hence
//! `P(A_{-1} <= x) = P(Z >= L(x))` with `L(x) = ((x^{-2} - beta1) / alpha1)^{1/2}`,
//! and the tail-index equation is exactly the statement that `f` integrates
//! to one.
//!
//! The tilt is unbounded against a normal envelope, so sampling goes through
//! a tabulated inverse CDF rather than rejection.

use serde::{Deserialize, Serialize};

use crate::cdf_table::MonotoneCdfTable;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadConfig};
use crate::roots::bisect_monotone;
use crate::tail_index::{garch_moment, GarchParams};

/// Largest tolerated `|E[(alpha1 ε² + beta1)^alpha] - 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Number of logit-spaced probability targets used for the sampler table.
pub const TABLE_NODES: usize = 8192;

const TAIL_QUAD: QuadConfig = QuadConfig {
    abs_tol: 1e-13,
    rel_tol: 1e-12,
    max_intervals: 4000,
};
const PANEL_QUAD: QuadConfig = QuadConfig {
    abs_tol: 1e-19,
    rel_tol: 1e-13,
    max_intervals: 400,
};
const EDGE_PROB: f64 = 1e-13;

/// CDF value with a flag telling whether `x` was outside the open support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackwardCdf {
    pub value: f64,
    pub clamped: bool,
}

/// The backward increment law for a GARCH(1,1) model and its solved index.
#[derive(Debug, Clone, Copy)]
pub struct BackwardIncrementLaw {
    params: GarchParams,
    alpha: f64,
    normalization: f64,
}

impl BackwardIncrementLaw {
    /// Fails with [`Error::Consistency`] unless `alpha` solves the tail-index
    /// equation for `params` to within [`NORMALIZATION_TOL`].
    pub fn new(params: GarchParams, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("tail index must be positive, got {alpha}")));
        }
        let normalization = garch_moment(&params, alpha)?;
        if !((normalization - 1.0).abs() <= NORMALIZATION_TOL) {
            return Err(Error::Consistency { normalization });
        }
        Ok(Self {
            params,
            alpha,
            normalization,
        })
    }

    pub fn params(&self) -> GarchParams {
        self.params
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `E[(alpha1 ε² + beta1)^alpha]` at the supplied index.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Upper end of the support, `beta1^{-1/2}`.
    pub fn support_end(&self) -> f64 {
        self.params.backward_support_end()
    }

    /// Density of the tilted half-normal `Z`.
    #[inline]
    pub fn z_density(&self, z: f64) -> f64 {
        let base = self.params.alpha1 * z * z + self.params.beta1;
        let c = (2.0 / std::f64::consts::PI).sqrt();
        c * (self.alpha * base.ln() - 0.5 * z * z).exp()
    }

    /// `P(Z > z)`.
    pub fn z_survival(&self, z: f64) -> Result<f64> {
        Ok(integrate_to_infinity(|t| self.z_density(t), z.max(0.0), TAIL_QUAD)?.value)
    }

    /// Increment value for a given `Z`.
    #[inline]
    pub fn increment_from_z(&self, z: f64) -> f64 {
        (self.params.alpha1 * z * z + self.params.beta1).powf(-0.5)
    }

    /// Innovation magnitude `((x^{-2} - beta1) / alpha1)^{1/2}` behind an increment `x`.
    #[inline]
    pub fn z_from_increment(&self, x: f64) -> f64 {
        ((x.powi(-2) - self.params.beta1) / self.params.alpha1).max(0.0).sqrt()
    }

    /// `P(A_{-1} <= x)`; values outside `(0, beta1^{-1/2})` clamp to 0 or 1.
    pub fn cdf(&self, x: f64) -> Result<BackwardCdf> {
        if !(x > 0.0) {
            return Ok(BackwardCdf {
                value: 0.0,
                clamped: true,
            });
        }
        if x >= self.support_end() {
            return Ok(BackwardCdf {
                value: 1.0,
                clamped: true,
            });
        }
        let value = self.z_survival(self.z_from_increment(x))?.clamp(0.0, 1.0);
        Ok(BackwardCdf { value, clamped: false })
    }

    /// Density of `A_{-1}` at `x` inside the support.
    pub fn density(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < self.support_end()) {
            return 0.0;
        }
        let z = self.z_from_increment(x);
        if z == 0.0 {
            return f64::INFINITY;
        }
        self.z_density(z) * x.powi(-3) / (self.params.alpha1 * z)
    }

    /// Inverse-CDF table for `A_{-1}`.
    ///
    /// Nodes sit at logit-spaced probabilities between `1e-13` and `1 - 1e-13`,
    /// located by Newton steps on panel integrals of the `Z` density taken from
    /// the far tail inward; CDF values are the accumulated panel integrals
    /// rescaled by the total mass.
    pub fn build_table(&self) -> Result<MonotoneCdfTable> {
        let targets = logit_targets(TABLE_NODES);
        let z_top = bisect_monotone(
            |z| self.z_survival(z).unwrap_or(f64::NAN),
            targets[0],
            0.0,
            z_upper_bound(self.alpha),
            1e-12,
        );
        let mut zs = Vec::with_capacity(targets.len() + 1);
        let mut surv = Vec::with_capacity(targets.len() + 1);
        zs.push(z_top);
        surv.push(self.z_survival(z_top)?);

        for &u in &targets[1..] {
            let z_prev = *zs.last().expect("seeded");
            let s_prev = *surv.last().expect("seeded");
            let want = u - s_prev;
            if want <= 0.0 {
                continue;
            }
            let (z, mass) = self.locate_panel(z_prev, want)?;
            if z >= z_prev {
                continue;
            }
            zs.push(z);
            surv.push(s_prev + mass);
        }
        // Remaining mass near z = 0 (upper end of the increment support).
        let z_last = *zs.last().expect("seeded");
        let rest = integrate(|t| self.z_density(t), 0.0, z_last, PANEL_QUAD)?.value;
        let total = surv.last().expect("seeded") + rest;

        let mut grid = Vec::with_capacity(zs.len() + 1);
        let mut cdf = Vec::with_capacity(zs.len() + 1);
        let mut dens = Vec::with_capacity(zs.len() + 1);
        for (&z, &s) in zs.iter().zip(&surv) {
            let x = self.increment_from_z(z);
            if let Some(&last) = grid.last() {
                if x <= last {
                    continue;
                }
            }
            grid.push(x);
            cdf.push((s / total).min(1.0));
            dens.push(self.density(x) / total);
        }
        if self.params.beta1 > 0.0 {
            let end = self.support_end();
            if end > *grid.last().expect("non-empty") {
                let n = grid.len();
                let secant = (1.0 - cdf[n - 1]) / (end - grid[n - 1]);
                grid.push(end);
                cdf.push(1.0);
                dens.push(3.0 * secant);
            } else {
                *cdf.last_mut().expect("non-empty") = 1.0;
            }
        } else {
            // ARCH(1): unbounded support, last node keeps 1 - cdf of order 1e-13.
            let n = cdf.len();
            cdf[n - 1] = cdf[n - 1].max(1.0 - EDGE_PROB);
        }
        MonotoneCdfTable::with_densities(grid, cdf, dens)
    }

    /// Finds `z < z_prev` with `∫_z^{z_prev} f ≈ want`; returns `(z, exact integral)`.
    fn locate_panel(&self, z_prev: f64, want: f64) -> Result<(f64, f64)> {
        let panel = |z: f64| integrate(|t| self.z_density(t), z, z_prev, PANEL_QUAD).map(|r| r.value);
        let (mut lo, mut hi) = (0.0f64, z_prev);
        let mut z = (z_prev - want / self.z_density(z_prev)).clamp(0.0, z_prev);
        let mut mass = panel(z)?;
        for _ in 0..40 {
            let r = mass - want;
            if r.abs() <= 1e-6 * want {
                break;
            }
            // the panel integral decreases as z grows
            if r > 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            let d = self.z_density(z);
            let mut next = if d > 0.0 { z + r / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            z = next;
            mass = panel(z)?;
        }
        Ok((z, mass))
    }
}

fn logit_targets(n: usize) -> Vec<f64> {
    let lo = (EDGE_PROB / (1.0 - EDGE_PROB)).ln();
    let hi = -lo;
    (0..n)
        .map(|k| {
            let l = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            1.0 / (1.0 + (-l).exp())
        })
        .collect()
}

// z beyond which the tilted density carries far less than 1e-13 mass.
fn z_upper_bound(alpha: f64) -> f64 {
    12.0 + 4.0 * alpha.sqrt() + alpha
}

/// `P(A_{-1} <= x)` by adaptive quadrature (absolute error well below 1e-10).
pub fn backward_increment_cdf(x: f64, params: &GarchParams, alpha: f64) -> Result<BackwardCdf> {
    BackwardIncrementLaw::new(*params, alpha)?.cdf(x)
}

/// Inverse-CDF sampler table for `A_{-1}`.
pub fn build_backward_sampler(params: &GarchParams, alpha: f64) -> Result<MonotoneCdfTable> {
    BackwardIncrementLaw::new(*params, alpha)?.build_table()
}
