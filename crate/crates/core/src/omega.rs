//! Target domains `Ω ∋ 1` and their normalized conformal maps `φ_Ω`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::series::{check_grid, grid_theta, ComplexSeries, C64};
use crate::{DEFAULT_ORDER, R_MAX, TOL_STAR, TOL_SYM};

/// How a domain is specified. Serialized as
/// `{"kind": "half_plane", "beta": -0.5}`, `{"kind": "sector", "alpha": 0.5}`
/// or `{"kind": "custom", "coeffs": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    /// `{Re w > β}`, `φ(z) = (1 + (1-2β)z)/(1-z)`.
    HalfPlane { beta: f64 },
    /// `{|Arg w| < απ/2}`, `φ(z) = ((1+z)/(1-z))^α`.
    Sector { alpha: f64 },
    /// Raw Maclaurin coefficients of `φ`.
    Custom { coeffs: Vec<[f64; 2]> },
}

/// Parameter-range policy. Half-planes with `β < -1/2` still contain 1 and
/// are convex, so they may be admitted explicitly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainPolicy {
    #[serde(default)]
    pub allow_extended_beta: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaDomain {
    kind: DomainKind,
    starlike_verified: bool,
    symmetric_verified: bool,
}

/// Outcome of the starlikeness probe on `|z| = ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StarlikeCheck {
    pub starlike: bool,
    /// `min_j Re[z_j φ'(z_j) / (φ(z_j) - 1)]`.
    pub margin: f64,
    /// Winding number of `φ - 1` around 0 along the probe circle.
    pub winding: i64,
    pub normalized: bool,
}

impl OmegaDomain {
    pub fn new(kind: DomainKind) -> Result<Self> {
        Self::with_policy(kind, DomainPolicy::default())
    }

    pub fn with_policy(kind: DomainKind, policy: DomainPolicy) -> Result<Self> {
        match &kind {
            DomainKind::HalfPlane { beta } => {
                let lower_ok = policy.allow_extended_beta || *beta >= -0.5;
                if !(beta.is_finite() && lower_ok && *beta < 1.0) {
                    return usage(format!(
                        "half-plane parameter beta = {beta} outside [-1/2, 1)"
                    ));
                }
            }
            DomainKind::Sector { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return usage(format!("sector parameter alpha = {alpha} outside (0, 1]"));
                }
            }
            DomainKind::Custom { coeffs } => {
                if coeffs.len() < 2 {
                    return usage("custom domain needs at least two coefficients");
                }
                if coeffs.iter().flatten().any(|v| !v.is_finite()) {
                    return usage("custom coefficients must be finite");
                }
                let c0 = coeffs[0];
                if (c0[0] - 1.0).abs() > 1e-14 || c0[1].abs() > 1e-14 {
                    return usage("custom map must satisfy φ(0) = 1");
                }
            }
        }
        let mut d = Self {
            kind,
            starlike_verified: false,
            symmetric_verified: false,
        };
        d.symmetric_verified = d.check_symmetric();
        Ok(d)
    }

    pub fn half_plane(beta: f64) -> Result<Self> {
        Self::new(DomainKind::HalfPlane { beta })
    }

    pub fn sector(alpha: f64) -> Result<Self> {
        Self::new(DomainKind::Sector { alpha })
    }

    pub fn custom(coeffs: &[C64]) -> Result<Self> {
        Self::new(DomainKind::Custom {
            coeffs: coeffs.iter().map(|c| [c.re, c.im]).collect(),
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn starlike_verified(&self) -> bool {
        self.starlike_verified
    }

    pub fn symmetric_verified(&self) -> bool {
        self.symmetric_verified
    }

    /// Short label used in reports, e.g. `half_plane(beta=-0.5)`.
    pub fn label(&self) -> String {
        match &self.kind {
            DomainKind::HalfPlane { beta } => format!("half_plane(beta={beta})"),
            DomainKind::Sector { alpha } => format!("sector(alpha={alpha})"),
            DomainKind::Custom { coeffs } => format!("custom(n={})", coeffs.len()),
        }
    }

    /// Truncated Maclaurin series of `φ_Ω`.
    pub fn phi_series(&self, order: usize) -> Result<ComplexSeries> {
        match &self.kind {
            DomainKind::HalfPlane { beta } => {
                let mut c = vec![2.0 * (1.0 - beta); order + 1];
                c[0] = 1.0;
                ComplexSeries::from_real(&c, order)
            }
            DomainKind::Sector { alpha } => {
                // ((1+z)/(1-z))^α = exp(2α atanh z), atanh z = Σ z^{2k+1}/(2k+1)
                let mut l = vec![0.0; order + 1];
                for (n, v) in l.iter_mut().enumerate() {
                    if n % 2 == 1 {
                        *v = 2.0 * alpha / n as f64;
                    }
                }
                let s = ComplexSeries::from_real(&l, order)?.exp()?;
                // real by construction; drop rounding noise in the imaginary parts
                let c: Vec<f64> = s.coeffs().iter().map(|c| c.re).collect();
                ComplexSeries::from_real(&c, order)
            }
            DomainKind::Custom { coeffs } => {
                let c: Vec<C64> = coeffs.iter().map(|c| C64::new(c[0], c[1])).collect();
                ComplexSeries::from_complex(&c, order)
            }
        }
    }

    /// `φ_Ω(z)`, in closed form for the catalog families.
    pub fn phi_at(&self, z: C64) -> C64 {
        match &self.kind {
            DomainKind::HalfPlane { beta } => (1.0 + (1.0 - 2.0 * beta) * z) / (1.0 - z),
            DomainKind::Sector { alpha } => ((1.0 + z) / (1.0 - z)).powf(*alpha),
            DomainKind::Custom { coeffs } => coeffs
                .iter()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, c| acc * z + C64::new(c[0], c[1])),
        }
    }

    /// `z φ_Ω'(z)`.
    pub fn z_phi_prime_at(&self, z: C64) -> C64 {
        match &self.kind {
            DomainKind::HalfPlane { beta } => z * 2.0 * (1.0 - beta) / ((1.0 - z) * (1.0 - z)),
            DomainKind::Sector { alpha } => self.phi_at(z) * z * 2.0 * alpha / (1.0 - z * z),
            DomainKind::Custom { coeffs } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, (n, c)| {
                    acc * z + C64::new(c[0], c[1]) * n as f64
                }),
        }
    }

    /// Whether `w` lies in `Ω`. Only decidable in closed form for the
    /// catalog families; `None` for custom domains.
    pub fn contains(&self, w: C64) -> Option<f64> {
        match &self.kind {
            DomainKind::HalfPlane { beta } => Some(w.re - beta),
            DomainKind::Sector { alpha } => Some(0.5 * PI * alpha - w.arg().abs()),
            DomainKind::Custom { .. } => None,
        }
    }

    /// Probe `Re[zφ'/(φ-1)] ≥ -tol` on `|z| = ρ`, plus the normalization
    /// `φ'(0) > 0` and winding number one of `φ - 1` around 0.
    pub fn check_starlike(&self, rho: f64, grid: usize) -> Result<StarlikeCheck> {
        if !(rho > 0.0 && rho <= R_MAX) {
            return Err(Error::Domain(format!(
                "probe radius {rho} outside (0, {R_MAX}]"
            )));
        }
        check_grid(grid, 1)?;
        let phi1 = self.phi_series(1)?.coeff(1);
        let normalized = phi1.re > 0.0 && phi1.im.abs() <= TOL_SYM;
        let mut margin = f64::INFINITY;
        let mut turn = 0.0;
        let mut prev: Option<C64> = None;
        let mut first: Option<C64> = None;
        for j in 0..grid {
            let z = C64::from_polar(rho, grid_theta(j, grid));
            let g = self.phi_at(z) - 1.0;
            if g.norm() < 1e-14 {
                return Err(Error::Degenerate(format!("φ(z) = 1 at probe point {z}")));
            }
            let q = self.z_phi_prime_at(z) / g;
            margin = margin.min(q.re);
            if let Some(p) = prev {
                turn += (g / p).arg();
            }
            first.get_or_insert(g);
            prev = Some(g);
        }
        if let (Some(p), Some(f)) = (prev, first) {
            turn += (f / p).arg();
        }
        let winding = (turn / (2.0 * PI)).round() as i64;
        let starlike = normalized && winding == 1 && margin >= -TOL_STAR;
        Ok(StarlikeCheck {
            starlike,
            margin,
            winding,
            normalized,
        })
    }

    /// `true` iff every coefficient of `φ_Ω` is real to `TOL_SYM`.
    pub fn check_symmetric(&self) -> bool {
        match &self.kind {
            DomainKind::HalfPlane { .. } | DomainKind::Sector { .. } => true,
            DomainKind::Custom { coeffs } => coeffs.iter().all(|c| c[1].abs() <= TOL_SYM),
        }
    }

    /// Runs the starlikeness probe at `R_MAX` and marks the domain verified,
    /// or fails with a diagnostic.
    pub fn verified(mut self) -> Result<Self> {
        let order = match &self.kind {
            DomainKind::Custom { coeffs } => coeffs.len(),
            _ => DEFAULT_ORDER,
        };
        let grid = crate::default_grid(order);
        let check = self.check_starlike(R_MAX, grid)?;
        if !check.starlike {
            return Err(Error::Hypothesis(format!(
                "{} is not verified starlike w.r.t. 1 (margin {:.3e}, winding {}, normalized {})",
                self.label(),
                check.margin,
                check.winding,
                check.normalized
            )));
        }
        self.starlike_verified = true;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_GRID;

    #[test]
    fn half_plane_coefficients() {
        let s = OmegaDomain::half_plane(0.0).unwrap().phi_series(8).unwrap();
        assert_eq!(s.coeff(0).re, 1.0);
        assert!((1..=8).all(|n| s.coeff(n) == C64::new(2.0, 0.0)));
        let s = OmegaDomain::half_plane(-0.5)
            .unwrap()
            .phi_series(8)
            .unwrap();
        // (1+2z)/(1-z) = (1+2z) Σ z^n
        let oracle: Vec<f64> = (0..=8)
            .map(|n| if n == 0 { 1.0 } else { 1.0 + 2.0 })
            .collect();
        assert!((0..=8).all(|n| s.coeff(n).re == oracle[n]));
    }

    #[test]
    fn sector_one_is_right_half_plane() {
        let a = OmegaDomain::sector(1.0).unwrap().phi_series(64).unwrap();
        let b = OmegaDomain::half_plane(0.0)
            .unwrap()
            .phi_series(64)
            .unwrap();
        for n in 0..=64 {
            assert!((a.coeff(n) - b.coeff(n)).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn sector_first_coefficient_is_two_alpha() {
        for alpha in [0.25, 0.5, 0.8, 1.0] {
            let s = OmegaDomain::sector(alpha).unwrap().phi_series(32).unwrap();
            assert!((s.coeff(1).re - 2.0 * alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn series_matches_closed_form() {
        for d in [
            OmegaDomain::sector(0.25).unwrap(),
            OmegaDomain::half_plane(0.5).unwrap(),
        ] {
            let s = d.phi_series(256).unwrap();
            let z = C64::from_polar(0.6, 1.1);
            assert!((s.eval(z) - d.phi_at(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn order_doubling_is_exact_for_catalog() {
        for d in [
            OmegaDomain::sector(0.5).unwrap(),
            OmegaDomain::half_plane(-0.5).unwrap(),
        ] {
            let a = d.phi_series(128).unwrap();
            let b = d.phi_series(256).unwrap();
            assert!((0..=128).all(|n| a.coeff(n) == b.coeff(n)));
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(OmegaDomain::half_plane(1.0).is_err());
        assert!(OmegaDomain::half_plane(-0.6).is_err());
        assert!(OmegaDomain::with_policy(
            DomainKind::HalfPlane { beta: -0.6 },
            DomainPolicy {
                allow_extended_beta: true
            }
        )
        .is_ok());
        assert!(OmegaDomain::sector(0.0).is_err());
        assert!(OmegaDomain::sector(1.5).is_err());
        assert!(OmegaDomain::custom(&[C64::new(2.0, 0.0), C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn starlike_probe_examples() {
        let c = OmegaDomain::half_plane(0.0)
            .unwrap()
            .check_starlike(0.9, DEFAULT_GRID)
            .unwrap();
        assert!(c.starlike && c.margin > 0.0);
        // min Re 1/(1-z) on |z| = 0.9 is 1/1.9
        assert!((c.margin - 1.0 / 1.9).abs() < 1e-6);
        let c = OmegaDomain::sector(0.5)
            .unwrap()
            .check_starlike(0.9, DEFAULT_GRID)
            .unwrap();
        assert!(c.starlike && c.margin > 0.0);
        // negative control: φ = 1 + 5z² has φ'(0) = 0 and winds twice
        let d = OmegaDomain::custom(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(5.0, 0.0)])
            .unwrap();
        let c = d.check_starlike(0.9, 256).unwrap();
        assert!(!c.starlike);
        assert!(d.verified().is_err());
    }

    #[test]
    fn starlike_margin_decreases_with_radius() {
        for beta in [-0.5, 0.0, 0.5, 0.9] {
            let d = OmegaDomain::half_plane(beta).unwrap();
            let mut last = f64::INFINITY;
            for rho in [0.1, 0.3, 0.5, 0.7, 0.9, R_MAX] {
                let m = d.check_starlike(rho, 1024).unwrap().margin;
                assert!(m <= last + 1e-12 && m >= 0.0);
                last = m;
            }
        }
    }

    #[test]
    fn symmetry_flags() {
        assert!(OmegaDomain::half_plane(0.3).unwrap().symmetric_verified());
        assert!(OmegaDomain::sector(0.3).unwrap().check_symmetric());
        let d = OmegaDomain::custom(&[C64::new(1.0, 0.0), C64::new(1.0, 0.1)]).unwrap();
        assert!(!d.check_symmetric());
    }

    #[test]
    fn config_format() {
        let k: DomainKind =
            serde_json::from_str(r#"{"kind": "half_plane", "beta": -0.5}"#).unwrap();
        assert_eq!(k, DomainKind::HalfPlane { beta: -0.5 });
        let k: DomainKind = serde_json::from_str(r#"{"kind": "sector", "alpha": 0.5}"#).unwrap();
        assert_eq!(k, DomainKind::Sector { alpha: 0.5 });
        let k: DomainKind =
            serde_json::from_str(r#"{"kind": "custom", "coeffs": [[1, 0], [2, 0]]}"#).unwrap();
        assert_eq!(
            k,
            DomainKind::Custom {
                coeffs: vec![[1.0, 0.0], [2.0, 0.0]]
            }
        );
    }

    #[test]
    fn verification_sets_flag() {
        let d = OmegaDomain::sector(0.25).unwrap();
        assert!(!d.starlike_verified());
        assert!(d.verified().unwrap().starlike_verified());
    }
}
