//! Exact samplers for the random ingredients of the GARCH tail chain.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tail_index::abs_normal_moment;

/// Pareto law with survival `x^{-index}` on `[1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoLaw {
    index: f64,
}

impl ParetoLaw {
    pub fn new(index: f64) -> Result<Self> {
        if !(index > 0.0 && index.is_finite()) {
            return Err(Error::param(format!("Pareto index must be positive, got {index}")));
        }
        Ok(Self { index })
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            x.powf(-self.index)
        }
    }

    /// Inverse-CDF transform of a uniform `u ∈ (0, 1]`.
    #[inline]
    pub fn from_uniform(&self, u: f64) -> f64 {
        u.powf(-1.0 / self.index)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // random() is in [0, 1); flip to (0, 1] so the result stays finite.
        let u = 1.0 - rng.random::<f64>();
        self.from_uniform(u)
    }
}

/// Convenience wrapper around [`ParetoLaw::sample`].
pub fn sample_pareto<R: Rng + ?Sized>(law: &ParetoLaw, rng: &mut R) -> f64 {
    law.sample(rng)
}

/// Law of `±1` with `P(+1) = prob_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignLaw {
    prob_plus: f64,
}

impl SignLaw {
    pub const SYMMETRIC: SignLaw = SignLaw { prob_plus: 0.5 };

    pub fn new(prob_plus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prob_plus) {
            return Err(Error::param(format!("sign probability must lie in [0, 1], got {prob_plus}")));
        }
        Ok(Self { prob_plus })
    }

    pub fn prob_plus(&self) -> f64 {
        self.prob_plus
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.prob_plus {
            1.0
        } else {
            -1.0
        }
    }
}

/// Law of the innovation `ε_1` given an extreme `|ζ_0|`: symmetric, with
/// `ε²/2 ~ Gamma(alpha + 1/2, 1)`. Its density is `|z|^{2 alpha} φ(z) / E|ε|^{2 alpha}`.
#[derive(Debug, Clone, Copy)]
pub struct TiltedInnovationLaw {
    alpha: f64,
    gamma: Gamma<f64>,
}

impl TiltedInnovationLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("tilt index must be positive, got {alpha}")));
        }
        let gamma = Gamma::new(alpha + 0.5, 1.0).map_err(|e| Error::param(e.to_string()))?;
        Ok(Self { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `E[ε²] = 2 alpha + 1`.
    pub fn second_moment(&self) -> f64 {
        2.0 * self.alpha + 1.0
    }

    /// `E[ε⁴] = (2 alpha + 1)(2 alpha + 3)`.
    pub fn fourth_moment(&self) -> f64 {
        (2.0 * self.alpha + 1.0) * (2.0 * self.alpha + 3.0)
    }

    /// Density of the tilted law at `z`.
    pub fn density(&self, z: f64) -> f64 {
        let norm = abs_normal_moment(2.0 * self.alpha).expect("alpha validated in new");
        let a = z.abs();
        if a == 0.0 {
            return 0.0;
        }
        let ln = 2.0 * self.alpha * a.ln() - 0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln();
        ln.exp() / norm
    }

    /// Magnitude `sqrt(2G)`, redrawn on the null event `G = 0`.
    pub fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let g = self.gamma.sample(rng);
            if g > 0.0 {
                return (2.0 * g).sqrt();
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let m = self.sample_abs(rng);
        SignLaw::SYMMETRIC.sample(rng) * m
    }
}

/// Convenience wrapper around [`TiltedInnovationLaw::sample`].
pub fn sample_tilted_innovation<R: Rng + ?Sized>(law: &TiltedInnovationLaw, rng: &mut R) -> f64 {
    law.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pareto_inverse_cdf_identity() {
        let law = ParetoLaw::new(2.028).unwrap();
        for u in [0.1, 0.5, 0.9, 1.0] {
            assert_eq!(law.from_uniform(u), u.powf(-1.0 / 2.028));
        }
        assert_eq!(law.survival(1.0), 1.0);
        assert!(ParetoLaw::new(0.0).is_err());
        assert!(ParetoLaw::new(-1.0).is_err());
    }

    #[test]
    fn pareto_support() {
        let law = ParetoLaw::new(0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..10_000).all(|_| law.sample(&mut rng) >= 1.0));
    }

    #[test]
    fn tilted_rejects_nonpositive() {
        assert!(TiltedInnovationLaw::new(0.0).is_err());
        assert!(TiltedInnovationLaw::new(-0.5).is_err());
    }

    #[test]
    fn tilted_density_integrates_to_one() {
        let law = TiltedInnovationLaw::new(1.478).unwrap();
        let r = crate::quadrature::integrate_to_infinity(|z| law.density(z), 0.0, Default::default()).unwrap();
        assert!((2.0 * r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sign_law_bounds() {
        assert!(SignLaw::new(1.5).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let always = SignLaw::new(1.0).unwrap();
        assert!((0..100).all(|_| always.sample(&mut rng) == 1.0));
    }
}
