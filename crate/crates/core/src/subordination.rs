//! Numerical subordination: containment of the image of `|z| = r` under
//! `log f'` in the region bounded by the image under `log k_Ω'`, discrete
//! convexity of that boundary, and the identity
//! `∂_θ log|k_Ω'(re^{iθ})| = -Im φ_Ω(re^{iθ})`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::omega::OmegaDomain;
use crate::profile::{lagrange_weights, stencil};
use crate::series::{check_radius, grid_theta, spectral_derivative, ComplexSeries, C64};
use crate::{R_MAX, TOL_CONST};

/// Closed polyline through the points, in order.
#[derive(Clone, Debug)]
pub struct JordanCurveSamples {
    points: Vec<C64>,
    signed_area: f64,
    /// Samples of a smooth periodic map at uniform parameters, so the
    /// polyline may be refined by interpolation.
    uniform: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLocation {
    Inside,
    Outside,
    /// Within the distance tolerance of the curve.
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityCheck {
    pub convex: bool,
    /// Smallest normalized cross product of consecutive edges, signed so
    /// that positive means turning with the orientation.
    pub margin: f64,
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    let t = if len2 > 0.0 {
        ((p - a).re * d.re + (p - a).im * d.im) / len2
    } else {
        0.0
    };
    (p - (a + d * t.clamp(0.0, 1.0))).norm()
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl JordanCurveSamples {
    /// A generic polyline. Fails unless it has nonzero area and no two
    /// non-adjacent edges cross.
    pub fn new(points: Vec<C64>) -> Result<Self> {
        Self::build(points, false)
    }

    /// Samples `Γ(θ_j)` of a smooth closed curve at `θ_j = -π + 2πj/M`.
    pub fn from_uniform_samples(points: Vec<C64>) -> Result<Self> {
        Self::build(points, true)
    }

    fn build(points: Vec<C64>, uniform: bool) -> Result<Self> {
        if points.len() < 3 || (uniform && points.len() < 8) {
            return usage("a closed curve needs at least 3 points (8 for uniform samples)");
        }
        if points
            .iter()
            .any(|p| !(p.re.is_finite() && p.im.is_finite()))
        {
            return usage("curve points must be finite");
        }
        let n = points.len();
        let signed_area = 0.5
            * (0..n)
                .map(|i| cross(points[i], points[(i + 1) % n]))
                .sum::<f64>();
        if signed_area == 0.0 || !signed_area.is_finite() {
            return Err(Error::Degenerate("closed curve encloses no area".into()));
        }
        let curve = Self {
            points,
            signed_area,
            uniform,
        };
        if !curve.convexity().convex && !curve.is_simple() {
            return Err(Error::Hypothesis("sampled curve intersects itself".into()));
        }
        Ok(curve)
    }

    fn is_simple(&self) -> bool {
        let n = self.points.len();
        let p = &self.points;
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// `+1` counterclockwise, `-1` clockwise.
    pub fn orientation(&self) -> f64 {
        self.signed_area.signum()
    }

    pub fn signed_area(&self) -> f64 {
        self.signed_area
    }

    pub fn diameter(&self) -> f64 {
        // exact for convex curves, an upper bound within a factor 2 otherwise
        let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for p in &self.points {
            lo_re = lo_re.min(p.re);
            hi_re = hi_re.max(p.re);
            lo_im = lo_im.min(p.im);
            hi_im = hi_im.max(p.im);
        }
        (hi_re - lo_re).hypot(hi_im - lo_im)
    }

    pub fn winding_number(&self, w: C64) -> i64 {
        let n = self.points.len();
        let turn: f64 = (0..n)
            .map(|i| ((self.points[(i + 1) % n] - w) / (self.points[i] - w)).arg())
            .sum();
        (turn / (2.0 * PI)).round() as i64
    }

    pub fn distance(&self, w: C64) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| segment_distance(w, self.points[i], self.points[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Winding-number test; points closer than `dist_tol` to the polyline
    /// are indeterminate.
    pub fn contains(&self, w: C64, dist_tol: f64) -> PointLocation {
        if self.distance(w) <= dist_tol {
            return PointLocation::Indeterminate;
        }
        match self.winding_number(w).abs() {
            1 => PointLocation::Inside,
            _ => PointLocation::Outside,
        }
    }

    pub fn convexity(&self) -> ConvexityCheck {
        let n = self.points.len();
        let s = self.orientation();
        let mut margin = f64::INFINITY;
        let mut turning = 0.0;
        for i in 0..n {
            let e0 = self.points[(i + 1) % n] - self.points[i];
            let e1 = self.points[(i + 2) % n] - self.points[(i + 1) % n];
            let norm = e0.norm() * e1.norm();
            let c = if norm > 0.0 {
                s * cross(e0, e1) / norm
            } else {
                f64::NEG_INFINITY
            };
            margin = margin.min(c);
            turning += (e1 / e0).arg();
        }
        // a convex polygon turns exactly once
        let once = ((turning.abs() / (2.0 * PI)) - 1.0).abs() < 1e-6;
        ConvexityCheck {
            convex: margin > 0.0 && once,
            margin,
        }
    }

    /// Curve point at fractional index `j + u` by degree-7 interpolation.
    fn interpolate(&self, j: usize, u: f64) -> C64 {
        let w = lagrange_weights(u);
        stencil(j, self.points.len())
            .iter()
            .zip(w)
            .map(|(&i, wi)| self.points[i] * wi)
            .sum()
    }

    /// Unwrapped arguments about `center`, if the curve is strictly
    /// star-shaped with respect to it (arguments strictly monotone).
    fn radial_arguments(&self, center: C64) -> Option<Vec<f64>> {
        let n = self.points.len();
        let s = self.orientation();
        let mut args = Vec::with_capacity(n + 1);
        let mut a = (self.points[0] - center).arg();
        args.push(a);
        for i in 0..n {
            let step = ((self.points[(i + 1) % n] - center) / (self.points[i] - center)).arg();
            if s * step <= 0.0 || step.is_nan() {
                return None;
            }
            a += step;
            args.push(a);
        }
        ((args[n] - args[0]).abs() - 2.0 * PI)
            .abs()
            .lt(&1e-6)
            .then_some(args)
    }
}

/// Radial containment test for a curve star-shaped about `center`:
/// `|Γ(θ*) - c| - |w - c|` where `arg(Γ(θ*) - c) = arg(w - c)`.
/// Positive inside. For uniform samples `Γ` is the interpolant, otherwise
/// the polyline.
#[derive(Clone, Debug)]
pub struct RadialTester {
    curve: JordanCurveSamples,
    center: C64,
    args: Vec<f64>,
    min_radius: f64,
    convex: bool,
}

impl RadialTester {
    pub fn new(curve: JordanCurveSamples, center: C64) -> Option<Self> {
        let args = curve.radial_arguments(center)?;
        let min_radius = curve
            .points
            .iter()
            .map(|p| (p - center).norm())
            .fold(f64::INFINITY, f64::min);
        let convex = curve.convexity().convex;
        Some(Self {
            curve,
            center,
            args,
            min_radius,
            convex,
        })
    }

    pub fn curve(&self) -> &JordanCurveSamples {
        &self.curve
    }

    /// Signed radial margin of `w`. With `skip_above`, points whose chord
    /// margin already exceeds it are not refined (chords of a convex
    /// curve lie inside it, so the chord margin is a lower bound).
    pub fn margin(&self, w: C64, skip_above: Option<f64>) -> f64 {
        let d = w - self.center;
        let rho = d.norm();
        if rho == 0.0 {
            return self.min_radius;
        }
        let n = self.curve.points.len();
        let s = self.curve.orientation();
        let a0 = s * self.args[0];
        let target = a0 + (s * d.arg() - a0).rem_euclid(2.0 * PI);
        let j = self.args[..n]
            .partition_point(|&a| s * a <= target)
            .saturating_sub(1);
        let dir = d / rho;
        let p0 = self.curve.points[j] - self.center;
        let p1 = self.curve.points[(j + 1) % n] - self.center;
        // angle of a curve point past the ray, increasing along the curve
        let g = |p: C64| s * (p * dir.conj()).arg();
        let (mut glo, mut ghi) = (g(p0), g(p1));
        let t = if ghi != glo {
            (glo / (glo - ghi)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let chord = ((p0 + (p1 - p0) * t) * dir.conj()).re - rho;
        if !self.curve.uniform {
            return chord;
        }
        if let Some(bound) = skip_above {
            if self.convex && chord > bound {
                return chord;
            }
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut u = t;
        let mut side = 0;
        for _ in 0..100 {
            if !(u > lo && u < hi) {
                u = 0.5 * (lo + hi);
            }
            let gu = g(self.curve.interpolate(j, u) - self.center);
            if gu.abs() < 1e-16 || hi - lo < 1e-15 {
                break;
            }
            if gu < 0.0 {
                lo = u;
                glo = gu;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = u;
                ghi = gu;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
            u = lo - glo * (hi - lo) / (ghi - glo);
        }
        ((self.curve.interpolate(j, u) - self.center) * dir.conj()).re - rho
    }
}

/// The image of `|z| = r` under an outer series, prepared for repeated
/// subordination checks.
#[derive(Clone, Debug)]
pub struct OuterImage {
    tester: RadialTester,
    center: C64,
    pub diameter: f64,
    pub dist_tol: f64,
}

impl OuterImage {
    pub fn new(outer: &ComplexSeries, r: f64, grid: usize) -> Result<Self> {
        let samples = outer.eval_on_circle(r, grid)?;
        let center = outer.coeff(0);
        let curve = JordanCurveSamples::from_uniform_samples(samples.values)?;
        let diameter = curve.diameter();
        let tester = RadialTester::new(curve, center).ok_or_else(|| {
            Error::Hypothesis("outer image is not star-shaped about its center".into())
        })?;
        Ok(Self {
            tester,
            center,
            diameter,
            dist_tol: BOUNDARY_BAND * diameter,
        })
    }

    pub fn check_samples(&self, inner_center: C64, samples: &[C64]) -> SubordinationReport {
        let centers_agree = (inner_center - self.center).norm() <= TOL_CONST;
        let grid = samples.len();
        let (mut inside, mut on_boundary, mut outside) = (0, 0, 0);
        let mut worst = (f64::INFINITY, C64::new(0.0, 0.0), 0.0);
        for (j, &w) in samples.iter().enumerate() {
            let m = self.tester.margin(w, Some(self.dist_tol));
            if m > self.dist_tol {
                inside += 1;
            } else if m >= -self.dist_tol {
                on_boundary += 1;
            } else {
                outside += 1;
            }
            if m < worst.0 {
                worst = (m, w, grid_theta(j, grid));
            }
        }
        SubordinationReport {
            contained: outside == 0 && centers_agree,
            centers_agree,
            inside,
            on_boundary,
            outside,
            worst_point: [worst.1.re, worst.1.im],
            worst_theta: worst.2,
            margin: worst.0,
            diameter: self.diameter,
            dist_tol: self.dist_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubordinationReport {
    pub contained: bool,
    pub centers_agree: bool,
    pub inside: usize,
    pub on_boundary: usize,
    pub outside: usize,
    /// Inner sample with the smallest radial margin.
    pub worst_point: [f64; 2],
    pub worst_theta: f64,
    /// Smallest radial margin, positive inside.
    pub margin: f64,
    pub diameter: f64,
    pub dist_tol: f64,
}

/// Relative width of the on-boundary band.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Checks that every sample of `inner` on `|z| = r_inner` lies in the region
/// bounded by the image of `|z| = r_outer` under `outer`. The outer image
/// must be star-shaped about `outer(0)`, which holds when it is convex.
pub fn check_subordination(
    inner: &ComplexSeries,
    outer: &ComplexSeries,
    r_inner: f64,
    r_outer: f64,
    grid: usize,
) -> Result<SubordinationReport> {
    if !(r_inner <= r_outer && r_outer <= R_MAX) {
        return usage(format!(
            "need r_inner ≤ r_outer ≤ {R_MAX}, got {r_inner}, {r_outer}"
        ));
    }
    let image = OuterImage::new(outer, r_outer, grid)?;
    let inner_samples = inner.eval_on_circle(r_inner, grid)?;
    Ok(image.check_samples(inner.coeff(0), &inner_samples.values))
}

/// Discrete convexity of the image of `|z| = r` under `series`.
pub fn check_convexity(series: &ComplexSeries, r: f64, grid: usize) -> Result<ConvexityCheck> {
    let s = series.eval_on_circle(r, grid)?;
    Ok(JordanCurveSamples::from_uniform_samples(s.values)?.convexity())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeIdentityReport {
    pub max_abs_error: f64,
    /// `min Im φ_Ω(re^{iθ_j})` over grid points with `θ_j ∈ (0, π)`,
    /// taken from the spectral side; positive when the sign condition holds.
    pub negativity_margin: f64,
}

/// Spectral `θ`-derivative of `log|k_Ω'(re^{iθ})|` against `-Im φ_Ω(re^{iθ})`.
pub fn check_derivative_identity(
    domain: &OmegaDomain,
    log_kprime: &ComplexSeries,
    r: f64,
    grid: usize,
) -> Result<DerivativeIdentityReport> {
    check_radius(r)?;
    let s = log_kprime.eval_on_circle(r, grid)?;
    let re: Vec<f64> = s.values.iter().map(|w| w.re).collect();
    let d = spectral_derivative(&re);
    let mut max_abs_error: f64 = 0.0;
    let mut negativity_margin = f64::INFINITY;
    for (j, dj) in d.iter().enumerate() {
        let theta = grid_theta(j, grid);
        let exact = -domain.phi_at(C64::from_polar(r, theta)).im;
        max_abs_error = max_abs_error.max((dj - exact).abs());
        if theta > 0.0 && theta < PI {
            negativity_margin = negativity_margin.min(-dj);
        }
    }
    Ok(DerivativeIdentityReport {
        max_abs_error,
        negativity_margin,
    })
}

/// A failed check, for the JSON violation log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub domain: String,
    pub member_id: String,
    pub r: f64,
    pub worst_point: Option<[f64; 2]>,
    pub margin: f64,
}
