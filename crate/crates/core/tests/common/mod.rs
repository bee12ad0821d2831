//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's quadrature, root finders or tables.
#![allow(dead_code)]

use std::f64::consts::PI;

use tailchain_core::bftc::{BackwardLaw, IncrementLaw};
use tailchain_core::streams::stream;

/// Composite Simpson over `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `E[g(ε)]` for standard normal `ε` and even `g`, by Simpson in `u = sqrt(z)`
/// on `[0, sqrt(40)]` (smooths power singularities at the origin).
pub fn normal_even_expectation<F: Fn(f64) -> f64>(g: F) -> f64 {
    let c = (2.0 / PI).sqrt();
    simpson(|u| {
        let z = u * u;
        g(z) * c * (-0.5 * z * z).exp() * 2.0 * u
    }, 0.0, 40f64.sqrt(), 400_000)
}

/// Tilted half-normal survival `P(Z > z)` for the backward increment, tabulated
/// by Simpson panels accumulated from the far tail inward.
pub struct BackwardOracle {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha: f64,
    step: f64,
    /// `surv[i] = P(Z > i * step)`.
    surv: Vec<f64>,
}

impl BackwardOracle {
    pub fn new(alpha1: f64, beta1: f64, alpha: f64) -> Self {
        let z_max = 40.0 + 4.0 * alpha.sqrt();
        let step = 2e-4;
        let n = (z_max / step).ceil() as usize;
        let c = (2.0 / PI).sqrt();
        let dens = |z: f64| {
            let base = alpha1 * z * z + beta1;
            if base <= 0.0 {
                0.0
            } else {
                c * (alpha * base.ln() - 0.5 * z * z).exp()
            }
        };
        let mut surv = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let (a, b) = (i as f64 * step, (i + 1) as f64 * step);
            let m = 0.5 * (a + b);
            surv[i] = surv[i + 1] + (b - a) / 6.0 * (dens(a) + 4.0 * dens(m) + dens(b));
        }
        Self {
            alpha1,
            beta1,
            alpha,
            step,
            surv,
        }
    }

    /// `∫_0^∞` of the tilted density; equals `E[(alpha1 ε² + beta1)^alpha]`.
    pub fn total_mass(&self) -> f64 {
        self.surv[0]
    }

    pub fn z_survival(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return self.surv[0];
        }
        let u = z / self.step;
        let i = u.floor() as usize;
        if i + 1 >= self.surv.len() {
            return 0.0;
        }
        let t = u - i as f64;
        self.surv[i] * (1.0 - t) + self.surv[i + 1] * t
    }

    /// `P(A_{-1} <= x)` normalized by the total mass.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let r = x.powi(-2) - self.beta1;
        if r <= 0.0 {
            return 1.0;
        }
        self.z_survival((r / self.alpha1).sqrt()) / self.total_mass()
    }
}

/// One-sample Kolmogorov distance of `sample` against a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Kolmogorov distance of a weighted atomic law against a continuous CDF.
pub fn ks_weighted<F: Fn(f64) -> f64>(atoms: &[f64], weights: &[f64], point_mass_zero: f64, cdf: F) -> f64 {
    let mut idx: Vec<usize> = (0..atoms.len()).collect();
    idx.sort_by(|&a, &b| atoms[a].total_cmp(&atoms[b]));
    let scale = 1.0 - point_mass_zero;
    let mut acc = point_mass_zero;
    let mut d = point_mass_zero;
    for i in idx {
        let f = cdf(atoms[i]);
        d = d.max((f - acc).abs());
        acc += weights[i] * scale;
        d = d.max((acc - f).abs());
    }
    d
}

/// Two-sample Kolmogorov distance.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Mean and standard error.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// `E|ε|^p = 2^{p/2} Γ((p+1)/2) / sqrt(π)`.
pub fn abs_normal_moment(p: f64) -> f64 {
    (0.5 * p * 2f64.ln() + statrs::function::gamma::ln_gamma(0.5 * (p + 1.0))).exp() / PI.sqrt()
}

/// Pareto(1) mass of `[a, b]` with `a >= 1`.
pub fn par1_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        0.0
    } else {
        1.0 / a - if b.is_finite() { 1.0 / b } else { 0.0 }
    }
}

/// The seven reference models and their printed tail indices.
pub const REFERENCE_ALPHAS: [(f64, f64, f64); 7] = [
    (0.99, 0.0, 1.014),
    (0.15, 0.84, 1.478),
    (0.11, 0.88, 1.838),
    (0.09, 0.90, 2.203),
    (0.07, 0.92, 2.885),
    (0.04, 0.95, 5.991),
    (0.072, 0.920, 2.476),
];

/// Printed `(theta, chi(1..3), gamma(1..3))` for the reference models, in the
/// order of [`REFERENCE_ALPHAS`].
pub const REFERENCE_TABLE: [(f64, [f64; 3], [f64; 3]); 7] = [
    (0.570, [0.213, 0.139, 0.104], [0.251, 0.167, 0.125]),
    (0.207, [0.061, 0.063, 0.065], [0.153, 0.144, 0.139]),
    (0.245, [0.052, 0.042, 0.038], [0.110, 0.104, 0.104]),
    (0.304, [0.045, 0.035, 0.034], [0.089, 0.085, 0.081]),
    (0.397, [0.022, 0.020, 0.020], [0.055, 0.050, 0.053]),
    (0.854, [0.005, 0.004, 0.003], [0.007, 0.007, 0.006]),
    (0.317, [0.021, 0.020, 0.027], [0.063, 0.064, 0.066]),
];

/// Both sides of the min-moment identity with standard errors.
pub fn min_moment_sides(inc: &IncrementLaw, back: &BackwardLaw, x: f64, y: f64, n: usize, seed: u64) -> ((f64, f64), (f64, f64)) {
    let k = inc.alpha();
    let mut r1 = stream(seed, 10);
    let mut r2 = stream(seed, 11);
    let lhs: Vec<f64> = (0..n)
        .map(|_| {
            let (a, _) = inc.draw(&mut r1);
            x.powf(k).min((y * a).max(0.0).powf(k))
        })
        .collect();
    let rhs: Vec<f64> = (0..n)
        .map(|_| {
            let (a, _) = back.draw(&mut r2);
            (x * a).max(0.0).powf(k).min(y.powf(k))
        })
        .collect();
    (mean_se(&lhs), mean_se(&rhs))
}

/// `|∫ tilted density - 1|` from the oracle table.
pub fn oracle_total_mass_check(o: &BackwardOracle) -> f64 {
    (o.total_mass() - 1.0).abs()
}
