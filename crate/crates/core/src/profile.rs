//! Sampled radial profiles and frozen single-field interpolants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{bracket_index, local_cubic, quintic};

/// Discrete radial grid with `(f, f', g, g')` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
}

impl RadialProfile {
    /// Evenly spaced grid `r_i = i r_max / intervals`, filled from `state(r)`.
    pub fn sample_uniform(r_max: f64, intervals: usize, mut state: impl FnMut(f64) -> [f64; 4]) -> Self {
        let h = r_max / intervals as f64;
        let mut p = Self::with_capacity(intervals + 1);
        for i in 0..=intervals {
            let r = if i == intervals { r_max } else { i as f64 * h };
            p.push(r, state(r));
        }
        p
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            r: Vec::with_capacity(n),
            f: Vec::with_capacity(n),
            df: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            dg: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, r: f64, s: [f64; 4]) {
        self.r.push(r);
        self.f.push(s[0]);
        self.df.push(s[1]);
        self.g.push(s[2]);
        self.dg.push(s[3]);
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }

    /// Column lengths agree and radii strictly increase.
    pub fn check(&self) -> Result<()> {
        let n = self.r.len();
        if [self.f.len(), self.df.len(), self.g.len(), self.dg.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::InvalidArgument("profile columns differ in length".into()));
        }
        if let Some(i) = self.r.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "profile radii not strictly increasing at sample {}",
                i + 1
            )));
        }
        Ok(())
    }

    /// Spacing if the grid is uniform to relative `1e-9`.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.r.len() < 2 {
            return None;
        }
        let h = (self.r_max() - self.r[0]) / (self.r.len() - 1) as f64;
        let ok = self
            .r
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        ok.then_some(h)
    }

    /// Index of the sample at radius `r` (within a tenth of a cell).
    pub fn index_of(&self, r: f64) -> Option<usize> {
        if self.r.len() < 2 {
            return None;
        }
        let i = bracket_index(&self.r, r);
        let cell = self.r[i + 1] - self.r[i];
        if (self.r[i] - r).abs() <= 0.1 * cell {
            Some(i)
        } else if (self.r[i + 1] - r).abs() <= 0.1 * cell {
            Some(i + 1)
        } else {
            None
        }
    }

    /// Local cubic interpolation of `(f, g)` at `r`.
    pub fn interpolate_fields(&self, r: f64) -> (f64, f64) {
        (local_cubic(&self.r, &self.f, r), local_cubic(&self.r, &self.g, r))
    }

    pub fn state_at(&self, i: usize) -> [f64; 4] {
        [self.f[i], self.df[i], self.g[i], self.dg[i]]
    }
}

/// Monotonicity direction required of a frozen field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
}

/// A single profile held fixed while the other field is shot, sampled on a
/// uniform grid with value, slope and curvature and evaluated by quintic
/// Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenField {
    h: f64,
    r_max: f64,
    samples: Vec<[f64; 3]>,
    asymptote: f64,
}

impl FrozenField {
    /// Samples `jet(r) = [v, v', v'']` on `intervals` equal cells of `[0, r_max]`.
    pub fn from_fn(r_max: f64, intervals: usize, asymptote: f64, mut jet: impl FnMut(f64) -> [f64; 3]) -> Self {
        assert!(intervals >= 1 && r_max > 0.0);
        let h = r_max / intervals as f64;
        let samples = (0..=intervals)
            .map(|i| jet(if i == intervals { r_max } else { i as f64 * h }))
            .collect();
        Self {
            h,
            r_max,
            samples,
            asymptote,
        }
    }

    /// Identically `value` on `[0, r_max]`.
    pub fn constant(value: f64, r_max: f64) -> Self {
        Self::from_fn(r_max, 1, value, |_| [value, 0.0, 0.0])
    }

    pub fn zero(r_max: f64) -> Self {
        Self::constant(0.0, r_max)
    }

    /// `target r^n / (1 + r^n)`, the fixed-point starting guess.
    pub fn rational_seed(target: f64, n: u32, r_max: f64, intervals: usize) -> Self {
        let nf = f64::from(n);
        Self::from_fn(r_max, intervals, target, |r| {
            if r == 0.0 {
                let slope = if n == 1 { target } else { 0.0 };
                let curv = if n == 2 { 2.0 * target } else if n == 1 { -2.0 * target } else { 0.0 };
                return [0.0, slope, curv];
            }
            let p = r.powf(nf);
            let d = 1.0 + p;
            let dp = nf * r.powf(nf - 1.0);
            let ddp = nf * (nf - 1.0) * r.powf(nf - 2.0);
            let v = p / d;
            let dv = dp / (d * d);
            let ddv = (ddp * d - 2.0 * dp * dp) / (d * d * d);
            [target * v, target * dv, target * ddv]
        })
    }

    /// `target tanh^n(r)`: exponential approach to the target.
    pub fn tanh_seed(target: f64, n: u32, r_max: f64, intervals: usize) -> Self {
        Self::tanh_tail_seed(target, n, 0.0, r_max, intervals)
    }

    /// `target tanh^n(r) (1 - tail / (r^2 + w^2))` with `w^2 = 2 tail + 1`:
    /// a tanh core with a `-tail / r^2` relative far-field deficit.
    pub fn tanh_tail_seed(target: f64, n: u32, tail: f64, r_max: f64, intervals: usize) -> Self {
        let nf = f64::from(n);
        let tail = tail.max(0.0);
        let w2 = 2.0 * tail + 1.0;
        Self::from_fn(r_max, intervals, target, |r| {
            let t = r.tanh();
            let s = 1.0 - t * t;
            let pow = |k: f64| if k <= 0.0 { if k == 0.0 { 1.0 } else { 0.0 } } else { t.powf(k) };
            let v = pow(nf);
            let dv = nf * pow(nf - 1.0) * s;
            let ddv = nf * s * ((nf - 1.0) * pow(nf - 2.0) * s - 2.0 * pow(nf));
            let d = r * r + w2;
            let q = 1.0 - tail / d;
            let dq = 2.0 * tail * r / (d * d);
            let ddq = 2.0 * tail * (w2 - 3.0 * r * r) / (d * d * d);
            [
                target * v * q,
                target * (dv * q + v * dq),
                target * (ddv * q + 2.0 * dv * dq + v * ddq),
            ]
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn asymptote(&self) -> f64 {
        self.asymptote
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    /// `[v, v', v'']` at `r`; constant continuation outside `[0, r_max]`.
    #[inline]
    pub fn jet(&self, r: f64) -> [f64; 3] {
        if r >= self.r_max {
            let last = self.samples[self.samples.len() - 1];
            return if r == self.r_max { last } else { [last[0], 0.0, 0.0] };
        }
        if r <= 0.0 {
            return self.samples[0];
        }
        let x = r / self.h;
        let i = (x as usize).min(self.samples.len() - 2);
        let t = x - i as f64;
        quintic(self.samples[i], self.samples[i + 1], self.h, t)
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.jet(r)[0]
    }

    /// Sup-norm distance on the union of both sample grids.
    pub fn sup_distance(&self, other: &FrozenField) -> f64 {
        let mut d: f64 = 0.0;
        for (i, s) in self.samples.iter().enumerate() {
            let r = (i as f64 * self.h).min(self.r_max);
            d = d.max((s[0] - other.value(r)).abs());
        }
        for (i, s) in other.samples.iter().enumerate() {
            let r = (i as f64 * other.h).min(other.r_max);
            d = d.max((s[0] - self.value(r)).abs());
        }
        d
    }

    /// Pointwise affine combination `(1 - w) self + w other` on `self`'s grid.
    pub fn blend(&self, other: &FrozenField, w: f64) -> FrozenField {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let o = other.jet((i as f64 * self.h).min(self.r_max));
                [
                    (1.0 - w) * s[0] + w * o[0],
                    (1.0 - w) * s[1] + w * o[1],
                    (1.0 - w) * s[2] + w * o[2],
                ]
            })
            .collect();
        FrozenField {
            h: self.h,
            r_max: self.r_max,
            samples,
            asymptote: self.asymptote,
        }
    }

    /// Monotone in `dir` up to `tol` times the range of the field.
    pub fn check_monotone(&self, dir: Monotone, tol: f64) -> Result<()> {
        let (lo, hi) = self
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s[0]), b.max(s[0])));
        let slack = tol * (hi - lo).abs().max(f64::MIN_POSITIVE);
        for (i, w) in self.samples.windows(2).enumerate() {
            let step = w[1][0] - w[0][0];
            let bad = match dir {
                Monotone::Increasing => step < -slack,
                Monotone::Decreasing => step > slack,
            };
            if bad {
                return Err(Error::PreconditionViolation(format!(
                    "frozen field is not {dir:?} near r = {:.6}",
                    i as f64 * self.h
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_field_interpolates_smooth_function() {
        let ff = FrozenField::from_fn(10.0, 400, 1.0, |r| {
            let t = r.tanh();
            let s = 1.0 - t * t;
            [t, s, -2.0 * t * s]
        });
        for k in 0..997 {
            let r = k as f64 * 0.01003;
            let [v, dv, _] = ff.jet(r);
            assert!((v - r.tanh()).abs() < 1e-11, "r={r}");
            assert!((dv - (1.0 - r.tanh().powi(2))).abs() < 1e-9);
        }
        assert!(ff.check_monotone(Monotone::Increasing, 1e-12).is_ok());
        assert!(ff.check_monotone(Monotone::Decreasing, 1e-12).is_err());
    }

    #[test]
    fn rational_seed_values() {
        let ff = FrozenField::rational_seed(0.9, 2, 20.0, 2000);
        let r: f64 = 1.7;
        let expect = 0.9 * r * r / (1.0 + r * r);
        assert!((ff.value(r) - expect).abs() < 1e-12);
        assert_eq!(ff.value(0.0), 0.0);
        assert!(ff.check_monotone(Monotone::Increasing, 0.0).is_ok());
    }

    #[test]
    fn tanh_seed_jets() {
        for n in 1..4 {
            let ff = FrozenField::tanh_seed(0.8, n, 10.0, 1000);
            let v = |r: f64| 0.8 * r.tanh().powi(n as i32);
            for &r in &[0.0, 0.3, 1.2, 4.0] {
                let [a, b, c] = ff.jet(r);
                let h = 1e-4;
                assert!((a - v(r)).abs() < 1e-14);
                if r > 0.0 {
                    assert!((b - (v(r + h) - v(r - h)) / (2.0 * h)).abs() < 1e-7);
                    assert!((c - (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h)).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn tail_seed_jets_and_deficit() {
        let tail = 0.7;
        let ff = FrozenField::tanh_tail_seed(0.8, 1, tail, 40.0, 4000);
        let v = |r: f64| 0.8 * r.tanh() * (1.0 - tail / (r * r + 2.0 * tail + 1.0));
        for &r in &[0.3, 1.2, 4.0, 20.0] {
            let [a, b, c] = ff.jet(r);
            let h = 1e-4;
            assert!((a - v(r)).abs() < 1e-14);
            assert!((b - (v(r + h) - v(r - h)) / (2.0 * h)).abs() < 1e-7);
            assert!((c - (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h)).abs() < 1e-5);
        }
        let r = 30.0;
        assert!(((0.8 - ff.value(r)) / 0.8 * r * r - tail).abs() < 1e-2);
        assert!(ff.samples().windows(2).all(|w| w[1][0] > w[0][0]));
    }

    #[test]
    fn profile_checks() {
        let p = RadialProfile::sample_uniform(2.0, 4, |r| [r, 1.0, 0.0, 0.0]);
        assert!(p.check().is_ok());
        assert_eq!(p.uniform_spacing(), Some(0.5));
        assert_eq!(p.index_of(1.5), Some(3));
        assert_eq!(p.index_of(1.25), None);
        let mut q = p.clone();
        q.r[2] = q.r[1];
        assert!(q.check().is_err());
    }
}
