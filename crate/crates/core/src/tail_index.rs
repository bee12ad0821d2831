//! GARCH(1,1) parameters and the tail index of the squared process.
//!
//! The index `alpha` is the unique positive root of
//! `E[(alpha1 ε² + beta1)^alpha] = 1` for standard normal `ε`. The volatility
//! `σ_t` and the returns `ζ_t` are then regularly varying with index `2 alpha`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, normal_expectation_even, QuadConfig};
use crate::roots::illinois;

/// The triple `(alpha0, alpha1, beta1)` of a GARCH(1,1) model
/// `σ_t² = alpha0 + alpha1 σ_{t-1}² ε_t² + beta1 σ_{t-1}²`, `ζ_t = σ_t ε_{t+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl GarchParams {
    pub fn new(alpha0: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(Error::param(format!("alpha0 must be positive, got {alpha0}")));
        }
        if !(alpha1 > 0.0 && alpha1.is_finite()) {
            return Err(Error::param(format!("alpha1 must be positive, got {alpha1}")));
        }
        if !(beta1 >= 0.0 && beta1.is_finite()) {
            return Err(Error::param(format!("beta1 must be nonnegative, got {beta1}")));
        }
        Ok(Self { alpha0, alpha1, beta1 })
    }

    /// Parameters for tail-chain work, where the level `alpha0` plays no role.
    pub fn tail(alpha1: f64, beta1: f64) -> Result<Self> {
        Self::new(1e-6, alpha1, beta1)
    }

    pub fn is_stationary(&self) -> bool {
        self.alpha1 + self.beta1 < 1.0
    }

    pub fn require_stationary(&self) -> Result<()> {
        if self.is_stationary() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "alpha1 + beta1 = {} must be < 1 for simulation",
                self.alpha1 + self.beta1
            )))
        }
    }

    /// Forward volatility increment `φ(ε) = sqrt(alpha1 ε² + beta1)`.
    #[inline]
    pub fn phi(&self, eps: f64) -> f64 {
        (self.alpha1 * eps * eps + self.beta1).sqrt()
    }

    /// Upper end of the backward increment support, `beta1^{-1/2}` (∞ for ARCH(1)).
    pub fn backward_support_end(&self) -> f64 {
        if self.beta1 > 0.0 {
            self.beta1.powf(-0.5)
        } else {
            f64::INFINITY
        }
    }
}

/// Solved tail index of the squared GARCH process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIndex {
    /// Index of regular variation of `ζ_t²` and `σ_t²`.
    pub alpha: f64,
    /// Achieved `|E[(alpha1 ε² + beta1)^alpha] - 1|`.
    pub residual: f64,
}

impl TailIndex {
    /// Index of `|ζ_t|` and `σ_t`.
    pub fn two_alpha(&self) -> f64 {
        2.0 * self.alpha
    }
}

const MOMENT_QUAD: QuadConfig = QuadConfig {
    abs_tol: 1e-13,
    rel_tol: 1e-14,
    max_intervals: 4000,
};
const ROOT_TOL: f64 = 1e-12;
const BRACKET_START: f64 = 1e-6;
const BRACKET_CAP: f64 = 200.0;

/// `E[(alpha1 ε² + beta1)^a]` for standard normal `ε`.
pub fn garch_moment(params: &GarchParams, a: f64) -> Result<f64> {
    let (a1, b1) = (params.alpha1, params.beta1);
    let c = (2.0 / std::f64::consts::PI).sqrt();
    // combined in log space: base^a alone overflows for large a
    let r = integrate_to_infinity(
        |z| {
            let base = a1 * z * z + b1;
            if base > 0.0 {
                c * (a * base.ln() - 0.5 * z * z).exp()
            } else {
                0.0
            }
        },
        0.0,
        MOMENT_QUAD,
    )?;
    Ok(r.value)
}

/// `E[log(alpha1 ε² + beta1)]`; negative drift is the existence condition
/// for a stationary solution and a positive tail index.
pub fn log_drift(params: &GarchParams) -> Result<f64> {
    let (a1, b1) = (params.alpha1, params.beta1);
    normal_expectation_even(|z| (a1 * z * z + b1).ln(), MOMENT_QUAD)
}

/// Root of `moment(a) = 1` on `(0, 200]` for a convex moment function with
/// `moment(0) = 1` and negative slope at zero.
pub fn solve_moment_index<F: Fn(f64) -> Result<f64>>(moment: F) -> Result<TailIndex> {
    let g = |a: f64| moment(a).map(|v| v - 1.0);
    let mut lo = BRACKET_START;
    let g_lo = g(lo)?;
    if g_lo >= 0.0 {
        return Err(Error::param("moment function is not below 1 near zero"));
    }
    let mut hi = 1.0;
    loop {
        let g_hi = g(hi)?;
        if g_hi.abs() <= ROOT_TOL {
            return Ok(TailIndex {
                alpha: hi,
                residual: g_hi.abs(),
            });
        }
        if g_hi > 0.0 {
            break;
        }
        if hi >= BRACKET_CAP {
            return Err(Error::NoFiniteTailIndex { upper: BRACKET_CAP });
        }
        lo = hi;
        hi = (2.0 * hi).min(BRACKET_CAP);
    }
    let alpha = illinois(g, lo, hi, ROOT_TOL, 1e-15)?;
    let residual = g(alpha)?.abs();
    Ok(TailIndex { alpha, residual })
}

/// Unique positive solution of `E[(alpha1 ε² + beta1)^alpha] = 1`.
pub fn solve_tail_index(params: &GarchParams) -> Result<TailIndex> {
    let drift = log_drift(params)?;
    if drift >= 0.0 {
        return Err(Error::param(format!(
            "log drift E[log(alpha1 eps^2 + beta1)] = {drift:.6} is not negative; no stationary solution"
        )));
    }
    solve_moment_index(|a| garch_moment(params, a))
}

/// `E|ε|^p = π^{-1/2} 2^{p/2} Γ((p+1)/2)` for standard normal `ε`.
pub fn abs_normal_moment(p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("moment order must be positive, got {p}")));
    }
    let ln = 0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0)) - 0.5 * std::f64::consts::PI.ln();
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a1: f64, b1: f64) -> GarchParams {
        GarchParams::tail(a1, b1).unwrap()
    }

    #[test]
    fn arch_unit_coefficient_has_index_one() {
        let t = solve_tail_index(&params(1.0, 0.0)).unwrap();
        assert!((t.alpha - 1.0).abs() < 1e-9, "{t:?}");
    }

    #[test]
    fn residual_is_tiny() {
        for (a1, b1) in [(0.99, 0.0), (0.15, 0.84), (0.04, 0.95)] {
            let t = solve_tail_index(&params(a1, b1)).unwrap();
            assert!(t.residual < 1e-9);
            let back = garch_moment(&params(a1, b1), t.alpha).unwrap();
            assert!((back - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn explosive_drift_is_rejected() {
        let e = solve_tail_index(&params(10.0, 0.99)).unwrap_err();
        assert!(matches!(e, Error::Parameter(_)));
        assert!(log_drift(&params(10.0, 0.99)).unwrap() > 0.0);
    }

    #[test]
    fn log_drift_of_pure_arch() {
        // E log ε² = -(γ_EM + ln 2)
        let expected = -(0.577_215_664_901_532_9 + std::f64::consts::LN_2);
        let d = log_drift(&params(1.0, 0.0)).unwrap();
        assert!((d - expected).abs() < 1e-10, "{d}");
        assert!(log_drift(&params(0.04, 0.95)).unwrap() < 0.0);
    }

    #[test]
    fn abs_moments() {
        assert!((abs_normal_moment(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((abs_normal_moment(1.0).unwrap() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!((abs_normal_moment(4.0).unwrap() - 3.0).abs() < 1e-13);
        assert!(abs_normal_moment(0.0).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(GarchParams::new(0.0, 0.1, 0.1).is_err());
        assert!(GarchParams::new(1.0, 0.0, 0.1).is_err());
        assert!(GarchParams::new(1.0, 0.1, -0.1).is_err());
        assert!(!params(0.5, 0.5).is_stationary());
    }
}
