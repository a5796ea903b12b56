//! Truncated Maclaurin series with complex coefficients.
//!
//! A [`ComplexSeries`] of order `N` stores `c_0..c_N`. All arithmetic keeps
//! the order of its inputs; products are truncated at degree `N`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, usage, Error, Result};
use crate::{R_MAX, TOL_CONST};

pub type C64 = Complex<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSeries {
    coeffs: Vec<C64>,
}

impl ComplexSeries {
    /// Wraps `coeffs` (`c_0..c_N`). Needs at least two entries, all finite.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return usage("a series needs order at least 1");
        }
        if let Some(n) = coeffs
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Degenerate(format!("coefficient {n} is not finite")));
        }
        Ok(Self { coeffs })
    }

    /// Real coefficients, zero-padded or truncated to `order`.
    pub fn from_real(coeffs: &[f64], order: usize) -> Result<Self> {
        let mut c = vec![C64::new(0.0, 0.0); order + 1];
        for (dst, &src) in c.iter_mut().zip(coeffs) {
            dst.re = src;
        }
        Self::new(c)
    }

    /// Complex coefficients, zero-padded or truncated to `order`.
    pub fn from_complex(coeffs: &[C64], order: usize) -> Result<Self> {
        let mut c = vec![C64::new(0.0, 0.0); order + 1];
        for (dst, &src) in c.iter_mut().zip(coeffs) {
            *dst = src;
        }
        Self::new(c)
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![C64::new(0.0, 0.0); order.max(1) + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = C64::new(1.0, 0.0);
        s
    }

    /// The series of `z`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[1] = C64::new(1.0, 0.0);
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Truncates or zero-pads to a new order.
    pub fn resized(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order.max(1) + 1, C64::new(0.0, 0.0));
        Self { coeffs: c }
    }

    fn check_order(&self, other: &Self, what: &str) -> Result<()> {
        if self.order() != other.order() {
            return usage(format!(
                "{what}: order mismatch ({} vs {})",
                self.order(),
                other.order()
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other, "add")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other, "sub")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { coeffs })
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Adds `k` to the constant term.
    pub fn add_constant(&self, k: C64) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += k;
        s
    }

    /// Coefficients `c_n ↦ ε^n c_n`, i.e. the series of `a(εz)`.
    pub fn rotate_argument(&self, eps: C64) -> Self {
        let mut p = C64::new(1.0, 0.0);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * p;
                p *= eps;
                v
            })
            .collect();
        Self { coeffs }
    }

    /// Cauchy product truncated to the common order.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_order(other, "multiply")?;
        let n = self.order();
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for (o, b) in out[i..].iter_mut().zip(&other.coeffs) {
                *o += a * b;
            }
        }
        Ok(Self { coeffs: out })
    }

    /// `exp(a)` for a series with `a_0 = 0`, via `n e_n = Σ_{k=1}^{n} k a_k e_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if self.coeffs[0].norm() > TOL_CONST {
            return usage("exp expects a series with zero constant term");
        }
        let n = self.order();
        // k a_k, the coefficients of z a'(z)
        let da: Vec<C64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * k as f64)
            .collect();
        let mut e = vec![C64::new(0.0, 0.0); n + 1];
        e[0] = C64::new(1.0, 0.0);
        for m in 1..=n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 1..=m {
                acc += da[k] * e[m - k];
            }
            e[m] = acc / m as f64;
        }
        Self::new(e)
    }

    /// Term-by-term integral from 0: `b_0 = 0`, `b_n = a_{n-1}/n`. The top
    /// coefficient `a_N` falls off the end.
    pub fn integrate(&self) -> Self {
        let n = self.order();
        let mut b = vec![C64::new(0.0, 0.0); n + 1];
        for (k, bk) in b.iter_mut().enumerate().skip(1) {
            *bk = self.coeffs[k - 1] / k as f64;
        }
        Self { coeffs: b }
    }

    /// `a(z)/z` for a series vanishing at the origin. The top coefficient
    /// of the result is beyond the truncation and is set to zero.
    pub fn divide_by_z(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() > TOL_CONST {
            return domain(format!("integrand has a pole at 0 (constant term {c0})"));
        }
        let n = self.order();
        let mut b = vec![C64::new(0.0, 0.0); n + 1];
        b[..n].copy_from_slice(&self.coeffs[1..]);
        Ok(Self { coeffs: b })
    }

    /// The series of `z a'(z)`, i.e. `n c_n`.
    pub fn z_derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * n as f64)
                .collect(),
        }
    }

    /// `a ∘ w` for `w(0) = 0`, by Horner's scheme on truncated series.
    ///
    /// The partial sum `p_k = a_k + w p_{k+1}` is only needed up to degree
    /// `N - k`, since it is multiplied by `w^k` afterwards.
    pub fn compose(&self, w: &Self) -> Result<Self> {
        self.check_order(w, "compose")?;
        if w.coeffs[0].norm() > TOL_CONST {
            return usage("compose expects an inner series with w(0) = 0");
        }
        let n = self.order();
        let mut p = vec![C64::new(0.0, 0.0); n + 1];
        let mut next = vec![C64::new(0.0, 0.0); n + 1];
        p[0] = self.coeffs[n];
        for k in (0..n).rev() {
            let deg = n - k;
            next[0] = self.coeffs[k];
            for m in 1..=deg {
                let mut acc = C64::new(0.0, 0.0);
                for i in 1..=m {
                    acc += w.coeffs[i] * p[m - i];
                }
                next[m] = acc;
            }
            std::mem::swap(&mut p, &mut next);
        }
        Self::new(p)
    }

    /// Horner evaluation at a point.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Values at `r e^{iθ_j}`, `θ_j = -π + 2πj/M`, computed with one FFT.
    pub fn eval_on_circle(&self, r: f64, grid: usize) -> Result<CircleSamples> {
        check_radius(r)?;
        check_grid(grid, self.order())?;
        let mut buf = vec![C64::new(0.0, 0.0); grid];
        let mut rn = 1.0;
        for (n, c) in self.coeffs.iter().enumerate() {
            // e^{inθ_j} = (-1)^n e^{2πinj/M}
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            buf[n] = c * (rn * sign);
            rn *= r;
        }
        inverse_fft(&mut buf);
        Ok(CircleSamples {
            radius: r,
            values: buf,
        })
    }
}

pub(crate) fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= R_MAX) {
        return domain(format!("radius {r} outside (0, {R_MAX}]"));
    }
    Ok(())
}

pub(crate) fn check_grid(grid: usize, order: usize) -> Result<()> {
    if grid < 4 || !grid.is_power_of_two() {
        return usage(format!(
            "grid size {grid} must be a power of two and at least 4"
        ));
    }
    if grid < 2 * (order + 1) {
        return usage(format!(
            "grid size {grid} is below 2(N+1) = {}",
            2 * (order + 1)
        ));
    }
    Ok(())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized `x_j ← Σ_k x_k e^{+2πijk/M}`.
pub(crate) fn inverse_fft(buf: &mut [C64]) {
    plan(buf.len(), true).process(buf);
}

/// Unnormalized `x_k ← Σ_j x_j e^{-2πijk/M}`.
pub(crate) fn forward_fft(buf: &mut [C64]) {
    plan(buf.len(), false).process(buf);
}

/// Spectral derivative `d/dθ` of real samples on the uniform grid over
/// `[-π, π)`. The Nyquist mode is dropped.
pub fn spectral_derivative(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    forward_fft(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let freq = if k < m / 2 {
            k as f64
        } else if k == m / 2 {
            0.0
        } else {
            k as f64 - m as f64
        };
        *b *= C64::new(0.0, freq) / m as f64;
    }
    inverse_fft(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Samples of an analytic function on the circle `|z| = radius`.
#[derive(Clone, Debug)]
pub struct CircleSamples {
    pub radius: f64,
    pub values: Vec<C64>,
}

impl CircleSamples {
    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.values.len() as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        grid_theta(j, self.values.len())
    }
}

/// `θ_j = -π + 2πj/M`.
pub fn grid_theta(j: usize, grid: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / grid as f64
}
