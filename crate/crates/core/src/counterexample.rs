//! A continuous `f` with `f(Y) ~ Par(1)` for `Y ~ Par(1)` such that the law
//! of `Y / x` given `f(Y) > x` has a continuum of weak accumulation points as
//! `x → ∞`.
//!
//! `f(t) = t` for `t <= 1`. Each block `[z, 5z]`, `z = 5^i`, is mapped onto
//! itself through four pieces:
//!
//! ```text
//! [z, 2.25z]     increasing z → 3z, defined through its inverse
//! [2.25z, 3z]    symmetric bump, rising 3z → 5z on the left half
//! [3z, 4z]       linear 3z → z
//! [4z, 5z]       linear z → 5z
//! ```
//!
//! The first two pieces are fixed by requiring `P(f(Y) > x) = 1/x`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::bisect_monotone;

/// Pieces of `f` on one block `[z, 5z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelBlock {
    pub z: f64,
}

impl LevelBlock {
    pub fn new(z: f64) -> Self {
        Self { z }
    }

    /// Block containing `t >= 1`: the largest `z = 5^i <= t`.
    pub fn containing(t: f64) -> Self {
        let mut z = 1.0;
        while 5.0 * z <= t {
            z *= 5.0;
        }
        Self { z }
    }

    pub fn bump_centre(&self) -> f64 {
        2.625 * self.z
    }

    pub fn f3(&self, t: f64) -> f64 {
        9.0 * self.z - 2.0 * t
    }

    pub fn f3_inverse(&self, x: f64) -> f64 {
        (9.0 * self.z - x) / 2.0
    }

    pub fn f4(&self, t: f64) -> f64 {
        self.z + 4.0 * (t - 4.0 * self.z)
    }

    pub fn f4_inverse(&self, x: f64) -> f64 {
        (15.0 * self.z + x) / 4.0
    }

    /// `f1^{-1}(x) = 1 / (1/x + 1/f3^{-1}(x) - 1/f4^{-1}(x))` on `[z, 3z]`.
    pub fn f1_inverse(&self, x: f64) -> f64 {
        1.0 / (1.0 / x + 1.0 / self.f3_inverse(x) - 1.0 / self.f4_inverse(x))
    }

    /// `f1` on `[z, 2.25z]`, by bisection on the increasing `f1^{-1}`.
    pub fn f1(&self, t: f64) -> f64 {
        let z = self.z;
        if t <= z {
            return z;
        }
        if t >= 2.25 * z {
            return 3.0 * z;
        }
        bisect_monotone(|x| self.f1_inverse(x), t, z, 3.0 * z, 0.0)
    }

    /// Left end `g` of `{f2 > x}` for `x ∈ [3z, 5z]`:
    /// `1/g - 1/(5.25z - g) = 1/x - 1/f4^{-1}(x)`.
    pub fn f2_left_inverse(&self, x: f64) -> f64 {
        let r = (1.0 / x - 1.0 / self.f4_inverse(x)).max(0.0);
        // r g² - (5.25 r z + 2) g + 5.25 z = 0, smaller root
        let c = 5.25 * self.z;
        let b = r * c + 2.0;
        2.0 * c / (b + (b * b - 4.0 * r * c).max(0.0).sqrt())
    }

    /// `f2` on `[2.25z, 3z]`, reflected about `2.625z`.
    pub fn f2(&self, t: f64) -> f64 {
        let z = self.z;
        let t = if t > self.bump_centre() { 5.25 * z - t } else { t };
        let r = (1.0 / t - 1.0 / (5.25 * z - t)).max(0.0);
        // 1/x - 4/(15z + x) = r  =>  r x² + (15 r z + 3) x - 15 z = 0
        let b = 15.0 * r * z + 3.0;
        30.0 * z / (b + (b * b + 60.0 * r * z).sqrt())
    }

    /// `f` on `[z, 5z]`.
    pub fn eval(&self, t: f64) -> f64 {
        let z = self.z;
        if t <= 2.25 * z {
            self.f1(t)
        } else if t <= 3.0 * z {
            self.f2(t)
        } else if t <= 4.0 * z {
            self.f3(t)
        } else {
            self.f4(t)
        }
    }

    /// Monotone pieces `(lo, hi)` in order.
    pub fn pieces(&self) -> [(f64, f64); 5] {
        let z = self.z;
        [
            (z, 2.25 * z),
            (2.25 * z, self.bump_centre()),
            (self.bump_centre(), 3.0 * z),
            (3.0 * z, 4.0 * z),
            (4.0 * z, 5.0 * z),
        ]
    }
}

/// `f(t)` for `t >= 0`.
pub fn eval_f(t: f64) -> f64 {
    if t <= 1.0 {
        return t;
    }
    LevelBlock::containing(t).eval(t)
}

/// `P(Y ∈ (a, b))` for `Y ~ Par(1)`.
fn pareto_mass(a: f64, b: f64) -> f64 {
    let a = a.max(1.0);
    if b <= a {
        return 0.0;
    }
    1.0 / a - if b.is_finite() { 1.0 / b } else { 0.0 }
}

/// `{t >= 1 : f(t) > x}` for `x >= 1` as disjoint intervals, located by
/// bisection on `f` over each monotone piece of the block containing `x`.
/// Lower blocks never exceed `x`; every higher block does.
pub fn preimage_above(x: f64) -> Vec<(f64, f64)> {
    let block = LevelBlock::containing(x);
    let mut out = Vec::new();
    for (lo, hi) in block.pieces() {
        let (flo, fhi) = (eval_f(lo), eval_f(hi));
        if flo.max(fhi) <= x {
            continue;
        }
        if flo.min(fhi) > x {
            out.push((lo, hi));
            continue;
        }
        let cross = bisect_monotone(eval_f, x, lo, hi, 0.0);
        if fhi > flo {
            out.push((cross, hi));
        } else {
            out.push((lo, cross));
        }
    }
    out.push((5.0 * block.z, f64::INFINITY));
    // merge touching intervals
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
    for (a, b) in out {
        match merged.last_mut() {
            Some(last) if last.1 >= a => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

fn measure(intervals: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    intervals.iter().map(|&(a, b)| pareto_mass(a.max(lo), b.min(hi))).sum()
}

/// `max |P(f(Y) > x) - 1/x|` over the grid.
pub fn verify_pareto_pushforward(grid: &[f64]) -> Result<f64> {
    if grid.iter().any(|&x| !(x >= 1.0 && x.is_finite())) {
        return Err(Error::param("grid points must be finite and at least 1"));
    }
    Ok(grid
        .iter()
        .map(|&x| (measure(&preimage_above(x), 1.0, f64::INFINITY) - 1.0 / x).abs())
        .fold(0.0, f64::max))
}

/// `b_c = (15 + c) / (4c)`.
pub fn gap_end(c: f64) -> f64 {
    (15.0 + c) / (4.0 * c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelLaw {
    pub level: u32,
    pub x: f64,
    /// `P(f(Y) > x)`.
    pub exceed_prob: f64,
    /// `P(Y/x ∈ (1, b_c) | f(Y) > x)`.
    pub gap_prob: f64,
    /// `P(Y/x <= 1 | f(Y) > x)`.
    pub below_one_prob: f64,
    /// `(b, P(Y/x > b | f(Y) > x))`.
    pub tail: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccumulationSummary {
    pub c: f64,
    /// Upper end of the gap; 1 for the pure powers of 5.
    pub gap_end: f64,
    pub levels: Vec<LevelLaw>,
}

/// Grid of `b` values used for the tail column.
pub fn default_b_grid(c: f64) -> Vec<f64> {
    let mut b: Vec<f64> = (0..=60).map(|k| 0.5 + 0.05 * k as f64).collect();
    b.push(gap_end(c));
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Exact conditional law of `Y / x_i` given `f(Y) > x_i` along
/// `x_i = c 5^i`, `i = 0 .. levels`. `c = 1` gives the pure powers of 5.
pub fn accumulation_point_experiment(c: f64, levels: u32) -> Result<AccumulationSummary> {
    if !(c == 1.0 || (3.0..5.0).contains(&c)) {
        return Err(Error::param(format!("c must be 1 or lie in [3, 5), got {c}")));
    }
    if levels < 5 {
        return Err(Error::param(format!("need at least 5 levels, got {levels}")));
    }
    let b_end = if c == 1.0 { 1.0 } else { gap_end(c) };
    let grid = default_b_grid(c);
    let levels = (0..levels)
        .map(|i| {
            let x = c * 5f64.powi(i as i32);
            let set = preimage_above(x);
            let total = measure(&set, 1.0, f64::INFINITY);
            LevelLaw {
                level: i,
                x,
                exceed_prob: total,
                gap_prob: measure(&set, x, b_end * x) / total,
                below_one_prob: measure(&set, 1.0, x) / total,
                tail: grid.iter().map(|&b| (b, measure(&set, b * x, f64::INFINITY) / total)).collect(),
            }
        })
        .collect();
    Ok(AccumulationSummary { c, gap_end: b_end, levels })
}

impl AccumulationSummary {
    /// Rows `c,b,probability` from the highest level.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["c", "b", "probability"]).map_err(err)?;
        if let Some(top) = self.levels.last() {
            for &(b, p) in &top.tail {
                w.write_record([self.c.to_string(), b.to_string(), p.to_string()]).map_err(err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest relative jump of `f` across the piece junctions of the first
/// `levels` blocks.
pub fn junction_mismatch(levels: u32) -> f64 {
    let mut worst = 0.0f64;
    let mut z = 1.0;
    for _ in 0..levels {
        let b = LevelBlock::new(z);
        let next = LevelBlock::new(5.0 * z);
        let pairs = [
            (b.f1(2.25 * z), b.f2(2.25 * z)),
            (b.f2(3.0 * z), b.f3(3.0 * z)),
            (b.f3(4.0 * z), b.f4(4.0 * z)),
            (b.f4(5.0 * z), next.f1(5.0 * z)),
            (b.f1(z), z),
        ];
        for (l, r) in pairs {
            worst = worst.max((l - r).abs() / l.abs().max(r.abs()));
        }
        z *= 5.0;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_below_one() {
        assert_eq!(eval_f(0.5), 0.5);
        assert_eq!(eval_f(0.0), 0.0);
    }

    #[test]
    fn linear_pieces() {
        assert_eq!(eval_f(20.0), 5.0);
        assert_eq!(eval_f(25.0), 25.0);
        assert_eq!(eval_f(15.0), 15.0);
    }

    #[test]
    fn first_piece_endpoints() {
        for z in [1.0, 5.0, 25.0] {
            let b = LevelBlock::new(z);
            assert!((b.f1(2.25 * z) - 3.0 * z).abs() <= 1e-12 * z);
            assert!((b.f1_inverse(z) - z).abs() <= 1e-12 * z);
            assert!((b.f1_inverse(3.0 * z) - 2.25 * z).abs() <= 1e-12 * z);
        }
    }

    #[test]
    fn bump_peaks_at_five_z() {
        let b = LevelBlock::new(5.0);
        assert!((b.f2(b.bump_centre()) - 25.0).abs() < 1e-12);
        assert!((b.f2(2.4 * 5.0) - b.f2(2.85 * 5.0)).abs() < 1e-12);
    }

    #[test]
    fn junctions_are_continuous() {
        assert!(junction_mismatch(8) < 1e-9);
    }

    #[test]
    fn gap_ends() {
        assert_eq!(gap_end(3.0), 1.5);
        assert_eq!(gap_end(4.0), 19.0 / 16.0);
    }

    #[test]
    fn bad_arguments() {
        assert!(accumulation_point_experiment(2.0, 6).is_err());
        assert!(accumulation_point_experiment(3.0, 4).is_err());
        assert!(verify_pareto_pushforward(&[0.5]).is_err());
    }
}
