//! Finite unions of closed arcs of `[-π, π]`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// Sorted, pairwise disjoint, nonempty closed intervals inside `[-π, π]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSet {
    arcs: Vec<(f64, f64)>,
}

const EDGE_SLACK: f64 = 1e-12;

impl ArcSet {
    /// Validates and normalizes: arcs are sorted, touching arcs merged.
    pub fn new(mut arcs: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &arcs {
            if !(a.is_finite() && b.is_finite()) || a >= b {
                return usage(format!("arc [{a}, {b}] is empty or not finite"));
            }
            if a < -PI - EDGE_SLACK || b > PI + EDGE_SLACK {
                return usage(format!("arc [{a}, {b}] leaves [-π, π]"));
            }
        }
        arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(arcs.len());
        for (a, b) in arcs {
            let (a, b) = (a.max(-PI), b.min(PI));
            if let Some(last) = out.last_mut() {
                if a < last.1 {
                    return usage(format!("arcs overlap near {a}"));
                }
                if a == last.1 {
                    last.1 = b;
                    continue;
                }
            }
            out.push((a, b));
        }
        Ok(Self { arcs: out })
    }

    pub fn empty() -> Self {
        Self { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        Self {
            arcs: vec![(-PI, PI)],
        }
    }

    /// `[-θ, θ]` for `0 ≤ θ ≤ π`.
    pub fn symmetric(theta: f64) -> Self {
        let t = theta.clamp(0.0, PI);
        if t == 0.0 {
            Self::empty()
        } else {
            Self {
                arcs: vec![(-t, t)],
            }
        }
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.arcs.iter().any(|&(a, b)| a <= theta && theta <= b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.arcs.len() && j < other.arcs.len() {
            let (a0, a1) = self.arcs[i];
            let (b0, b1) = other.arcs[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { arcs: out }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        (self.intersect(other).measure() - self.measure()).abs() <= 1e-12
    }

    /// Between one and `max_arcs` arcs with uniformly drawn endpoints.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_arcs: usize) -> Self {
        let n = rng.gen_range(1..=max_arcs.max(1));
        let mut pts: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-PI..PI)).collect();
        pts.sort_by(f64::total_cmp);
        let arcs = pts
            .chunks(2)
            .filter(|p| p[0] < p[1])
            .map(|p| (p[0], p[1]))
            .collect();
        // distinct sorted draws are disjoint; equal draws are dropped above
        Self::new(arcs).unwrap_or_else(|_| Self::empty())
    }

    /// Union of the `round(measure / h)` grid cells with the largest
    /// samples. Cell `j` is centered at `θ_j = -π + jh`; cell 0 wraps
    /// around `±π`.
    pub fn top_cells(samples: &[f64], measure: f64) -> Self {
        let m = samples.len();
        let h = 2.0 * PI / m as f64;
        let k = ((measure / h).round() as usize).min(m);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| samples[b].total_cmp(&samples[a]).then(a.cmp(&b)));
        let mut chosen = vec![false; m];
        for &j in &idx[..k] {
            chosen[j] = true;
        }
        let mut arcs = Vec::new();
        let mut j = 0;
        while j < m {
            if !chosen[j] {
                j += 1;
                continue;
            }
            let start = j;
            while j < m && chosen[j] {
                j += 1;
            }
            let lo = -PI + (start as f64 - 0.5) * h;
            let hi = -PI + (j as f64 - 0.5) * h;
            arcs.push((lo.max(-PI), hi.min(PI)));
        }
        if chosen[0] {
            arcs.push((PI - 0.5 * h, PI));
            if chosen[m - 1] {
                // the run ending at m-1 already reaches π - h/2; extend it
                let last = arcs.len() - 2;
                if (arcs[last].1 - (PI - 0.5 * h)).abs() < 1e-12 {
                    arcs.pop();
                    arcs[last].1 = PI;
                }
            }
        }
        Self::new(arcs).unwrap_or_else(|_| Self::empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(ArcSet::new(vec![(0.0, 0.0)]).is_err());
        assert!(ArcSet::new(vec![(0.0, 4.0)]).is_err());
        assert!(ArcSet::new(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        let s = ArcSet::new(vec![(1.0, 2.0), (0.0, 1.0)]).unwrap();
        assert_eq!(s.arcs(), &[(0.0, 2.0)]);
        assert_eq!(ArcSet::full().measure(), 2.0 * PI);
        assert_eq!(ArcSet::empty().measure(), 0.0);
    }

    #[test]
    fn intersection() {
        let a = ArcSet::new(vec![(-3.0, -1.0), (0.0, 2.0)]).unwrap();
        let b = ArcSet::new(vec![(-2.0, 0.5), (1.5, 3.0)]).unwrap();
        let c = a.intersect(&b);
        assert_eq!(c.arcs(), &[(-2.0, -1.0), (0.0, 0.5), (1.5, 2.0)]);
        assert!(c.is_subset_of(&a) && c.is_subset_of(&b));
    }

    #[test]
    fn random_sets_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = ArcSet::random(&mut rng, 4);
            assert!(s.measure() >= 0.0 && s.measure() <= 2.0 * PI);
            for w in s.arcs().windows(2) {
                assert!(w[0].1 < w[1].0);
            }
        }
    }

    #[test]
    fn top_cells_measure_and_wrap() {
        let m = 16;
        let h = 2.0 * PI / m as f64;
        // peak at θ = -π (index 0): cells must wrap across ±π
        let samples: Vec<f64> = (0..m)
            .map(|j| {
                (crate::series::grid_theta(j, m)).cos().abs()
                    * if !(4..=12).contains(&j) { 2.0 } else { 1.0 }
            })
            .collect();
        let e = ArcSet::top_cells(&samples, 3.0 * h);
        assert!((e.measure() - 3.0 * h).abs() < 1e-12);
        assert!(e.contains(-PI) && e.contains(PI));
        let all = ArcSet::top_cells(&samples, 2.0 * PI);
        assert!((all.measure() - 2.0 * PI).abs() < 1e-12);
    }
}
