//! Arclength, integral means of subharmonic gauges of `log f'`, and their
//! restrictions to arc sets.
//!
//! Full-circle integrals use the periodic trapezoidal rule on the FFT
//! samples of `log f'`. Restricted integrals go through
//! [`PeriodicProfile`]. Gauges that are piecewise linear in `Re`/`Im log f'`
//! (hinges) are integrated exactly from the level sets of the smooth inner
//! function, so their kinks cost no accuracy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use crate::arcs::ArcSet;
use crate::error::{usage, Result};
use crate::members::MemberFunction;
use crate::profile::PeriodicProfile;
use crate::series::{ComplexSeries, C64};
use crate::LOG_CLAMP;

/// A convex function `Φ` on the real line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexGauge {
    Exp,
    /// `(t - t0)^+`.
    Hinge {
        t0: f64,
    },
    Square,
    /// `a t + b`.
    Linear {
        a: f64,
        b: f64,
    },
    /// Slope `slopes[0]` left of `breakpoints[0]`, `slopes[i]` between
    /// `breakpoints[i-1]` and `breakpoints[i]`; `Φ(breakpoints[0]) = value`.
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        value: f64,
    },
}

/// `Φ(t) = constant + linear·t + Σ weight·(t - level)^+`.
#[derive(Clone, Debug, PartialEq)]
pub struct HingeForm {
    pub constant: f64,
    pub linear: f64,
    pub hinges: Vec<(f64, f64)>,
}

impl HingeForm {
    pub fn eval(&self, t: f64) -> f64 {
        self.constant
            + self.linear * t
            + self
                .hinges
                .iter()
                .map(|(lvl, w)| w * (t - lvl).max(0.0))
                .sum::<f64>()
    }
}

impl ConvexGauge {
    pub fn validate(&self) -> Result<()> {
        if let ConvexGauge::PiecewiseLinear {
            breakpoints,
            slopes,
            value,
        } = self
        {
            if breakpoints.is_empty() || slopes.len() != breakpoints.len() + 1 {
                return usage("piecewise-linear gauge needs k ≥ 1 breakpoints and k + 1 slopes");
            }
            if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                return usage("breakpoints must be strictly increasing");
            }
            if slopes.windows(2).any(|w| w[0] > w[1]) {
                return usage("slopes must be nondecreasing for a convex gauge");
            }
            if !value.is_finite() {
                return usage("piecewise-linear gauge value must be finite");
            }
        }
        Ok(())
    }

    pub fn nondecreasing(&self) -> bool {
        match self {
            ConvexGauge::Exp | ConvexGauge::Hinge { .. } => true,
            ConvexGauge::Square => false,
            ConvexGauge::Linear { a, .. } => *a >= 0.0,
            ConvexGauge::PiecewiseLinear { slopes, .. } => slopes[0] >= 0.0,
        }
    }

    /// Piecewise-linear gauges as a sum of hinges; `None` for smooth ones.
    pub fn hinge_form(&self) -> Option<HingeForm> {
        match self {
            ConvexGauge::Exp | ConvexGauge::Square => None,
            ConvexGauge::Hinge { t0 } => Some(HingeForm {
                constant: 0.0,
                linear: 0.0,
                hinges: vec![(*t0, 1.0)],
            }),
            ConvexGauge::Linear { a, b } => Some(HingeForm {
                constant: *b,
                linear: *a,
                hinges: vec![],
            }),
            ConvexGauge::PiecewiseLinear {
                breakpoints,
                slopes,
                value,
            } => {
                let b0 = breakpoints[0];
                let hinges = breakpoints
                    .iter()
                    .enumerate()
                    .map(|(i, b)| (*b, slopes[i + 1] - slopes[i]))
                    .collect();
                Some(HingeForm {
                    constant: value - slopes[0] * b0,
                    linear: slopes[0],
                    hinges,
                })
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ConvexGauge::Exp => t.exp(),
            ConvexGauge::Square => t * t,
            _ => self.hinge_form().map(|h| h.eval(t)).unwrap_or(f64::NAN),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ConvexGauge::Exp => "exp".into(),
            ConvexGauge::Hinge { t0 } => format!("hinge({t0})"),
            ConvexGauge::Square => "square".into(),
            ConvexGauge::Linear { a, b } => format!("linear({a},{b})"),
            ConvexGauge::PiecewiseLinear { breakpoints, .. } => {
                format!("pwl(k={})", breakpoints.len())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Sign::Plus => t,
            Sign::Minus => -t,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// A subharmonic function `u` of `w = log f'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubharmonicGauge {
    /// `r e^{Re w}`; its mean is the arclength `L_r`.
    ArcLength {
        r: f64,
    },
    /// `log |w|`.
    LogAbs,
    /// `|w|^p`, `p > 0`.
    PowAbs {
        p: f64,
    },
    ConvexOfRe {
        phi: ConvexGauge,
        sign: Sign,
    },
    /// `Φ(±Im w)`, with `Im log f' = arg f'` on the continuous branch.
    ConvexOfIm {
        phi: ConvexGauge,
        sign: Sign,
    },
}

impl SubharmonicGauge {
    pub fn validate(&self) -> Result<()> {
        match self {
            SubharmonicGauge::PowAbs { p } if !(*p > 0.0 && p.is_finite()) => {
                usage(format!("power gauge needs 0 < p < ∞, got {p}"))
            }
            SubharmonicGauge::ArcLength { r } if r.is_nan() || *r <= 0.0 => {
                usage("arclength gauge needs r > 0")
            }
            SubharmonicGauge::ConvexOfRe { phi, .. } | SubharmonicGauge::ConvexOfIm { phi, .. } => {
                phi.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, w: C64) -> f64 {
        match self {
            SubharmonicGauge::ArcLength { r } => r * w.re.exp(),
            SubharmonicGauge::LogAbs => w.norm().ln().max(LOG_CLAMP),
            SubharmonicGauge::PowAbs { p } => w.norm().powf(*p),
            SubharmonicGauge::ConvexOfRe { phi, sign } => phi.eval(sign.apply(w.re)),
            SubharmonicGauge::ConvexOfIm { phi, sign } => phi.eval(sign.apply(w.im)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SubharmonicGauge::ArcLength { r } => format!("arclength_gauge(r={r})"),
            SubharmonicGauge::LogAbs => "log_abs".into(),
            SubharmonicGauge::PowAbs { p } => format!("pow_abs(p={p})"),
            SubharmonicGauge::ConvexOfRe { phi, sign } => {
                format!("{}({}re)", phi.label(), sign.symbol())
            }
            SubharmonicGauge::ConvexOfIm { phi, sign } => {
                format!("{}({}im)", phi.label(), sign.symbol())
            }
        }
    }

    /// The gauges of the integral-mean sweep: `log|w|`, `|w|`, `|w|²`, and
    /// `Φ(±Re w)`, `Φ(±Im w)` for `Φ ∈ {exp, (t)^+, t²}`.
    pub fn default_family() -> Vec<SubharmonicGauge> {
        let mut v = vec![
            SubharmonicGauge::LogAbs,
            SubharmonicGauge::PowAbs { p: 1.0 },
            SubharmonicGauge::PowAbs { p: 2.0 },
        ];
        let phis = [
            ConvexGauge::Exp,
            ConvexGauge::Hinge { t0: 0.0 },
            ConvexGauge::Square,
        ];
        for phi in &phis {
            for sign in [Sign::Plus, Sign::Minus] {
                v.push(SubharmonicGauge::ConvexOfRe {
                    phi: phi.clone(),
                    sign,
                });
            }
        }
        for phi in &phis {
            for sign in [Sign::Plus, Sign::Minus] {
                v.push(SubharmonicGauge::ConvexOfIm {
                    phi: phi.clone(),
                    sign,
                });
            }
        }
        v
    }
}

/// `Φ ∘ s` for a smooth periodic `s`, integrable over arcs.
#[derive(Clone, Debug)]
pub struct ComposedProfile {
    inner: PeriodicProfile,
    phi: ConvexGauge,
    hinges: Option<HingeForm>,
    smooth: Option<PeriodicProfile>,
}

impl ComposedProfile {
    pub fn new(inner: Vec<f64>, phi: &ConvexGauge) -> Result<Self> {
        phi.validate()?;
        let hinges = phi.hinge_form();
        let smooth = match hinges {
            Some(_) => None,
            None => Some(PeriodicProfile::new(
                inner.iter().map(|&s| phi.eval(s)).collect(),
            )?),
        };
        Ok(Self {
            inner: PeriodicProfile::new(inner)?,
            phi: phi.clone(),
            hinges,
            smooth,
        })
    }

    pub fn inner(&self) -> &PeriodicProfile {
        &self.inner
    }

    /// `∫_E Φ(s)`.
    pub fn integral_over(&self, set: &ArcSet) -> f64 {
        if let Some(p) = &self.smooth {
            return p.integral_over(set);
        }
        let form = self.hinges.as_ref().expect("piecewise-linear gauge");
        let mut total = form.constant * set.measure();
        if form.linear != 0.0 {
            total += form.linear * self.inner.integral_over(set);
        }
        for &(level, weight) in &form.hinges {
            if weight == 0.0 {
                continue;
            }
            let above = self.inner.superlevel(level).intersect(set);
            total += weight * (self.inner.integral_over(&above) - level * above.measure());
        }
        total
    }

    pub fn total(&self) -> f64 {
        self.integral_over(&ArcSet::full())
    }

    /// `(Φ ∘ s)*(θ)`; requires a nondecreasing `Φ`.
    pub fn star(&self, theta: f64) -> Result<f64> {
        if !self.phi.nondecreasing() {
            return usage("star-function through level sets needs a nondecreasing Φ");
        }
        Ok(self
            .inner
            .star_with(theta, |e| self.integral_over(e), |t| self.phi.eval(t)))
    }
}

/// `log f'` sampled on `|z| = r`.
#[derive(Clone, Debug)]
pub struct CircleData {
    pub r: f64,
    pub log_fprime: Vec<C64>,
    identically_zero: bool,
}

impl CircleData {
    pub fn new(member: &MemberFunction, r: f64, grid: usize) -> Result<Self> {
        Self::from_log_fprime(&member.log_fprime, r, grid)
    }

    pub fn from_log_fprime(log_fprime: &ComplexSeries, r: f64, grid: usize) -> Result<Self> {
        let s = log_fprime.eval_on_circle(r, grid)?;
        let identically_zero = log_fprime.coeffs().iter().all(|c| c.norm() == 0.0);
        Ok(Self {
            r,
            log_fprime: s.values,
            identically_zero,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.log_fprime.len()
    }

    fn step(&self) -> f64 {
        2.0 * PI / self.log_fprime.len() as f64
    }

    /// `|f'(re^{iθ_j})| = exp(Re log f')`.
    pub fn fprime_abs(&self) -> Vec<f64> {
        self.log_fprime.iter().map(|w| w.re.exp()).collect()
    }

    /// `±Re log f'` or `±Im log f'` samples.
    pub fn component(&self, imaginary: bool, sign: Sign) -> Vec<f64> {
        self.log_fprime
            .iter()
            .map(|w| sign.apply(if imaginary { w.im } else { w.re }))
            .collect()
    }

    /// `L_r(f) = ∫ r |f'(re^{iθ})| dθ`.
    pub fn arclength(&self) -> f64 {
        self.step()
            * self
                .log_fprime
                .iter()
                .map(|w| self.r * w.re.exp())
                .sum::<f64>()
    }

    /// `∫ u(log f'(re^{iθ})) dθ`.
    pub fn integral_mean(&self, gauge: &SubharmonicGauge) -> Result<f64> {
        gauge.validate()?;
        match gauge {
            SubharmonicGauge::LogAbs if self.identically_zero => Ok(f64::NEG_INFINITY),
            SubharmonicGauge::ConvexOfRe { phi, sign }
            | SubharmonicGauge::ConvexOfIm { phi, sign }
                if phi.hinge_form().is_some() =>
            {
                let imag = matches!(gauge, SubharmonicGauge::ConvexOfIm { .. });
                Ok(ComposedProfile::new(self.component(imag, *sign), phi)?.total())
            }
            _ => Ok(self.step() * self.log_fprime.iter().map(|&w| gauge.eval(w)).sum::<f64>()),
        }
    }

    /// `∫_E r |f'(re^{is})| ds`.
    pub fn partial_arclength(&self, set: &ArcSet) -> Result<f64> {
        let g: Vec<f64> = self
            .log_fprime
            .iter()
            .map(|w| self.r * w.re.exp())
            .collect();
        Ok(PeriodicProfile::new(g)?.integral_over(set))
    }

    /// `∫_E Φ(log |f'(re^{is})|) ds` for a nondecreasing convex `Φ`.
    pub fn partial_mean(&self, phi: &ConvexGauge, set: &ArcSet) -> Result<f64> {
        Ok(self.log_abs_profile(phi)?.integral_over(set))
    }

    /// `Φ ∘ log|f'|` as a composed profile; `Φ` must be nondecreasing.
    pub fn log_abs_profile(&self, phi: &ConvexGauge) -> Result<ComposedProfile> {
        if !phi.nondecreasing() {
            return usage(format!("gauge {} is not nondecreasing", phi.label()));
        }
        ComposedProfile::new(self.component(false, Sign::Plus), phi)
    }
}

pub fn arclength(member: &MemberFunction, r: f64, grid: usize) -> Result<f64> {
    Ok(CircleData::new(member, r, grid)?.arclength())
}

pub fn integral_mean(
    member: &MemberFunction,
    gauge: &SubharmonicGauge,
    r: f64,
    grid: usize,
) -> Result<f64> {
    CircleData::new(member, r, grid)?.integral_mean(gauge)
}

pub fn partial_arclength(
    member: &MemberFunction,
    set: &ArcSet,
    r: f64,
    grid: usize,
) -> Result<f64> {
    CircleData::new(member, r, grid)?.partial_arclength(set)
}

pub fn partial_mean(
    member: &MemberFunction,
    phi: &ConvexGauge,
    set: &ArcSet,
    r: f64,
    grid: usize,
) -> Result<f64> {
    CircleData::new(member, r, grid)?.partial_mean(phi, set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::members::SchwarzSpec;
    use crate::omega::OmegaDomain;
    use crate::{DEFAULT_GRID, DEFAULT_ORDER};

    fn extremal(beta: f64) -> MemberFunction {
        let d = OmegaDomain::half_plane(beta).unwrap().verified().unwrap();
        MemberFunction::extremal(&d, DEFAULT_ORDER).unwrap()
    }

    fn identity_member() -> MemberFunction {
        let d = OmegaDomain::half_plane(0.0).unwrap().verified().unwrap();
        let spec = SchwarzSpec::Monomial {
            c: [0.0, 0.0],
            k: 1,
        };
        MemberFunction::random_member(&d, &spec, DEFAULT_ORDER).unwrap()
    }

    /// Composite Gauss–Legendre on 512 panels, independent of the grid code.
    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.236_926_885_056_189_1,
            0.478_628_670_499_366_5,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
        ];
        let panels = 512;
        let h = (b - a) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(weights) {
                s += 0.5 * h * w * f(c + 0.5 * h * x);
            }
        }
        s
    }

    #[test]
    fn arclength_of_identity_is_circumference() {
        let f = identity_member();
        for r in [0.1, 0.5, 0.9] {
            assert!((arclength(&f, r, DEFAULT_GRID).unwrap() - 2.0 * PI * r).abs() < 1e-12);
        }
    }

    #[test]
    fn keogh_value_at_half() {
        let l = arclength(&extremal(0.0), 0.5, DEFAULT_GRID).unwrap();
        assert!((l - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn arclength_minus_half_against_quadrature() {
        let l = arclength(&extremal(-0.5), 0.5, DEFAULT_GRID).unwrap();
        let oracle = quad(|t| 0.5 * (1.25 - t.cos()).powf(-1.5), -PI, PI);
        assert!((l - oracle).abs() < 1e-8, "{l} vs {oracle}");
    }

    #[test]
    fn gauge_examples() {
        let f = identity_member();
        let v = integral_mean(&f, &SubharmonicGauge::PowAbs { p: 2.0 }, 0.5, DEFAULT_GRID).unwrap();
        assert_eq!(v, 0.0);
        let v = integral_mean(&f, &SubharmonicGauge::LogAbs, 0.5, DEFAULT_GRID).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);

        let k = extremal(0.0);
        let r = 0.7;
        let exp_re = SubharmonicGauge::ConvexOfRe {
            phi: ConvexGauge::Exp,
            sign: Sign::Plus,
        };
        let m = integral_mean(&k, &exp_re, r, DEFAULT_GRID).unwrap();
        assert!((r * m - arclength(&k, r, DEFAULT_GRID).unwrap()).abs() < 1e-12);
        let arc = integral_mean(&k, &SubharmonicGauge::ArcLength { r }, r, DEFAULT_GRID).unwrap();
        assert!((arc - arclength(&k, r, DEFAULT_GRID).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn log_abs_against_closed_form() {
        // log k' = -2 log(1 - z) for the right half-plane
        let k = extremal(0.0);
        let v = integral_mean(&k, &SubharmonicGauge::LogAbs, 0.5, DEFAULT_GRID).unwrap();
        let oracle = quad(
            |t| {
                let z = C64::from_polar(0.5, t);
                (-2.0 * (1.0 - z).ln()).norm().ln()
            },
            -PI,
            PI,
        );
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn hinge_mean_is_exact() {
        let k = extremal(-0.5);
        let r = 0.8;
        let g = SubharmonicGauge::ConvexOfRe {
            phi: ConvexGauge::Hinge { t0: 0.3 },
            sign: Sign::Plus,
        };
        let v = integral_mean(&k, &g, r, DEFAULT_GRID).unwrap();
        // Re log k' = -3 log|1 - z|
        // the excess is positive exactly where 1 - 2r cos t + r² < e^{-0.2}
        let t0 = ((1.0 + r * r - (-0.2f64).exp()) / (2.0 * r)).acos();
        let oracle = quad(
            |t| -3.0 * (1.0 - C64::from_polar(r, t)).norm().ln() - 0.3,
            -t0,
            t0,
        );
        assert!((v - oracle).abs() < 1e-11, "{v} vs {oracle}");
        // rotations by off-grid angles keep the value to high accuracy
        let rot = k.rotate(C64::from_polar(1.0, 0.123_456)).unwrap();
        let w = integral_mean(&rot, &g, r, DEFAULT_GRID).unwrap();
        assert!((v - w).abs() < 1e-11 * v.abs().max(1.0), "{v} vs {w}");
    }

    #[test]
    fn partial_examples() {
        let k = extremal(0.0);
        let r = 0.6;
        let full = partial_arclength(&k, &ArcSet::full(), r, DEFAULT_GRID).unwrap();
        assert!((full - arclength(&k, r, DEFAULT_GRID).unwrap()).abs() < 1e-12);
        assert_eq!(
            partial_arclength(&k, &ArcSet::empty(), r, DEFAULT_GRID).unwrap(),
            0.0
        );

        let f = identity_member();
        let e = ArcSet::new(vec![(-2.0, -1.5), (0.1, 0.6)]).unwrap();
        assert!((partial_arclength(&f, &e, r, DEFAULT_GRID).unwrap() - r).abs() < 1e-13);

        // hinge above the max of log|f'| integrates to zero
        let h = ConvexGauge::Hinge { t0: 10.0 };
        assert_eq!(
            partial_mean(&k, &h, &ArcSet::full(), r, DEFAULT_GRID).unwrap(),
            0.0
        );
        let p = partial_mean(&k, &ConvexGauge::Exp, &ArcSet::full(), r, DEFAULT_GRID).unwrap();
        assert!((p - arclength(&k, r, DEFAULT_GRID).unwrap() / r).abs() < 1e-11);

        assert!(partial_mean(&k, &ConvexGauge::Square, &e, r, DEFAULT_GRID).is_err());
    }

    #[test]
    fn partial_arclength_against_quadrature() {
        let k = extremal(-0.5);
        let r = 0.9;
        let e = ArcSet::new(vec![(-1.234, -0.2), (0.05, 0.77)]).unwrap();
        let v = partial_arclength(&k, &e, r, DEFAULT_GRID).unwrap();
        let g = |t: f64| r * (1.0 - C64::from_polar(r, t)).norm().powi(-3);
        let oracle = quad(g, -1.234, -0.2) + quad(g, 0.05, 0.77);
        assert!((v - oracle).abs() < 1e-9 * oracle, "{v} vs {oracle}");
    }

    #[test]
    fn symmetric_arc_dominates_grid_cell_unions() {
        // brute force over unions of 4 cells out of 16 on a coarse grid
        let k = extremal(0.0);
        let r = 0.7;
        let m = 16;
        let h = 2.0 * PI / m as f64;
        let data = CircleData::new(&k, r, DEFAULT_GRID).unwrap();
        let prof = data.log_abs_profile(&ConvexGauge::Exp).unwrap();
        let bound = prof.integral_over(&ArcSet::symmetric(2.0 * h));
        let mut worst = f64::INFINITY;
        for mask in 0u32..(1 << m) {
            if mask.count_ones() != 4 {
                continue;
            }
            let arcs = (0..m)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| (-PI + j as f64 * h, -PI + (j + 1) as f64 * h))
                .collect();
            let e = ArcSet::new(arcs).unwrap();
            worst = worst.min(bound - prof.integral_over(&e));
        }
        assert!(worst >= -1e-12, "{worst}");
    }

    #[test]
    fn piecewise_linear_gauge() {
        let g = ConvexGauge::PiecewiseLinear {
            breakpoints: vec![-1.0, 1.0],
            slopes: vec![0.0, 1.0, 3.0],
            value: 2.0,
        };
        g.validate().unwrap();
        assert!(g.nondecreasing());
        assert_eq!(g.eval(-5.0), 2.0);
        assert_eq!(g.eval(0.0), 3.0);
        assert_eq!(g.eval(2.0), 2.0 + 2.0 + 3.0);
        let bad = ConvexGauge::PiecewiseLinear {
            breakpoints: vec![0.0],
            slopes: vec![1.0, 0.0],
            value: 0.0,
        };
        assert!(bad.validate().is_err());
    }
}
