//! Elements of `C(Ω)`: the extremal function `k_Ω`, its rotations, and
//! members built from Schwarz functions.
//!
//! Every member comes from a function `h` with `h(0) = 1` and `h(D) ⊂ Ω`
//! through `log f'(z) = ∫_0^z (h(ζ) - 1)/ζ dζ`. The extremal function uses
//! `h = φ_Ω`; other members use `h = φ_Ω ∘ ω` for a Schwarz function `ω`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::omega::OmegaDomain;
use crate::series::{ComplexSeries, C64};

const UNIMODULAR_TOL: f64 = 1e-14;
pub const MAX_MONOMIAL_POWER: u32 = 8;

/// A Schwarz function `ω` with `ω(0) = 0` and `|ω(z)| ≤ |z|`.
///
/// Config form: `{"kind": "monomial", "c": [re, im], "k": 2}`,
/// `{"kind": "rotation", "eps": [re, im]}`,
/// `{"kind": "blaschke", "zeros": [[re, im], ...], "eta": [re, im]}`,
/// `{"kind": "identity"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchwarzSpec {
    Identity,
    /// `ω(z) = εz`, `|ε| = 1`.
    Rotation {
        eps: [f64; 2],
    },
    /// `ω(z) = c z^k`, `|c| ≤ 1`, `1 ≤ k ≤ 8`.
    Monomial {
        c: [f64; 2],
        k: u32,
    },
    /// `ω(z) = η z Π (z - a_i)/(1 - ā_i z)`.
    Blaschke {
        zeros: Vec<[f64; 2]>,
        eta: [f64; 2],
    },
}

fn cx(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn check_unimodular(v: C64, what: &str) -> Result<()> {
    if (v.norm() - 1.0).abs() > UNIMODULAR_TOL {
        return usage(format!("{what} = {v} is not unimodular"));
    }
    Ok(())
}

impl SchwarzSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SchwarzSpec::Identity => Ok(()),
            SchwarzSpec::Rotation { eps } => check_unimodular(cx(*eps), "rotation ε"),
            SchwarzSpec::Monomial { c, k } => {
                if cx(*c).norm() > 1.0 + UNIMODULAR_TOL {
                    return usage(format!(
                        "monomial coefficient |c| = {} exceeds 1",
                        cx(*c).norm()
                    ));
                }
                if *k < 1 || *k > MAX_MONOMIAL_POWER {
                    return usage(format!(
                        "monomial power {k} outside 1..={MAX_MONOMIAL_POWER}"
                    ));
                }
                Ok(())
            }
            SchwarzSpec::Blaschke { zeros, eta } => {
                check_unimodular(cx(*eta), "Blaschke η")?;
                for a in zeros {
                    if cx(*a).norm() >= 1.0 {
                        return usage(format!("Blaschke zero {:?} is not inside the disk", a));
                    }
                }
                Ok(())
            }
        }
    }

    /// Truncated series of `ω`.
    pub fn series(&self, order: usize) -> Result<ComplexSeries> {
        self.validate()?;
        match self {
            SchwarzSpec::Identity => Ok(ComplexSeries::identity(order)),
            SchwarzSpec::Rotation { eps } => Ok(ComplexSeries::identity(order).scale(cx(*eps))),
            SchwarzSpec::Monomial { c, k } => {
                let mut s = ComplexSeries::zero(order).into_coeffs();
                if (*k as usize) <= order {
                    s[*k as usize] = cx(*c);
                }
                ComplexSeries::new(s)
            }
            SchwarzSpec::Blaschke { zeros, eta } => {
                let mut w = ComplexSeries::identity(order).scale(cx(*eta));
                for a in zeros {
                    w = w.multiply(&blaschke_factor(cx(*a), order)?)?;
                }
                Ok(w)
            }
        }
    }
}

/// Series of `(z - a)/(1 - ā z)`: `-a`, then `ā^{n-1}(1 - |a|²)`.
fn blaschke_factor(a: C64, order: usize) -> Result<ComplexSeries> {
    let ab = a.conj();
    let scale = 1.0 - a.norm_sqr();
    let mut c = vec![C64::new(0.0, 0.0); order + 1];
    c[0] = -a;
    let mut p = C64::new(scale, 0.0);
    for cn in c.iter_mut().skip(1) {
        *cn = p;
        p *= ab;
    }
    ComplexSeries::new(c)
}

/// Draws random Schwarz functions: `0..=max_zeros` Blaschke zeros uniform
/// in `|a| ≤ zero_radius`, and `η` uniform on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzSampler {
    pub max_zeros: usize,
    pub zero_radius: f64,
}

impl Default for SchwarzSampler {
    fn default() -> Self {
        Self {
            max_zeros: 3,
            zero_radius: 0.8,
        }
    }
}

impl SchwarzSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SchwarzSpec {
        let count = rng.gen_range(0..=self.max_zeros);
        let zeros = (0..count)
            .map(|_| {
                let rad = self.zero_radius * rng.gen::<f64>().sqrt();
                let z = C64::from_polar(rad, rng.gen_range(-PI..PI));
                [z.re, z.im]
            })
            .collect();
        let eta = C64::from_polar(1.0, rng.gen_range(-PI..PI));
        SchwarzSpec::Blaschke {
            zeros,
            eta: [eta.re, eta.im],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Extremal,
    Rotated {
        eps: [f64; 2],
        base: Box<Provenance>,
    },
    Random {
        spec: SchwarzSpec,
    },
    /// Built from an arbitrary `h` without checking `h(D) ⊂ Ω`.
    Unchecked,
}

impl Provenance {
    fn is_unchecked(&self) -> bool {
        match self {
            Provenance::Unchecked => true,
            Provenance::Rotated { base, .. } => base.is_unchecked(),
            _ => false,
        }
    }
}

/// `f ∈ C(Ω)` carried by the series of `log f'`, `f'` and `f`.
#[derive(Clone, Debug)]
pub struct MemberFunction {
    pub domain: OmegaDomain,
    pub log_fprime: ComplexSeries,
    pub fprime: ComplexSeries,
    pub f: ComplexSeries,
    pub provenance: Provenance,
}

impl MemberFunction {
    fn from_log_fprime(
        domain: OmegaDomain,
        log_fprime: ComplexSeries,
        provenance: Provenance,
    ) -> Result<Self> {
        let fprime = log_fprime.exp()?;
        let f = fprime.integrate();
        Ok(Self {
            domain,
            log_fprime,
            fprime,
            f,
            provenance,
        })
    }

    fn from_h(domain: OmegaDomain, h: &ComplexSeries, provenance: Provenance) -> Result<Self> {
        let log_fprime = h
            .add_constant(C64::new(-1.0, 0.0))
            .divide_by_z()?
            .integrate();
        Self::from_log_fprime(domain, log_fprime, provenance)
    }

    /// The extremal function `k_Ω`. The domain must have passed the
    /// starlikeness probe.
    pub fn extremal(domain: &OmegaDomain, order: usize) -> Result<Self> {
        if !domain.starlike_verified() {
            return Err(Error::Hypothesis(format!(
                "{} has not been verified starlike w.r.t. 1; call OmegaDomain::verified first",
                domain.label()
            )));
        }
        let phi = domain.phi_series(order)?;
        Self::from_h(domain.clone(), &phi, Provenance::Extremal)
    }

    /// The member with `h = φ_Ω ∘ ω`.
    pub fn random_member(domain: &OmegaDomain, spec: &SchwarzSpec, order: usize) -> Result<Self> {
        let w = spec.series(order)?;
        let phi = domain.phi_series(order)?;
        let h = phi.compose(&w)?;
        Self::from_h(
            domain.clone(),
            &h,
            Provenance::Random { spec: spec.clone() },
        )
    }

    /// A "member" from an arbitrary `h` with `h(0) = 1`, for failure-path
    /// fixtures. Nothing guarantees membership in `C(Ω)`.
    pub fn from_h_unchecked(domain: &OmegaDomain, h: &ComplexSeries) -> Result<Self> {
        Self::from_h(domain.clone(), h, Provenance::Unchecked)
    }

    /// `ε̄ f(εz)` for `|ε| = 1`.
    pub fn rotate(&self, eps: C64) -> Result<Self> {
        check_unimodular(eps, "rotation ε")?;
        Ok(Self {
            domain: self.domain.clone(),
            log_fprime: self.log_fprime.rotate_argument(eps),
            fprime: self.fprime.rotate_argument(eps),
            f: self.f.rotate_argument(eps).scale(eps.conj()),
            provenance: Provenance::Rotated {
                eps: [eps.re, eps.im],
                base: Box::new(self.provenance.clone()),
            },
        })
    }

    pub fn order(&self) -> usize {
        self.log_fprime.order()
    }

    /// `h = 1 + z f''/f' = 1 + z (log f')'`.
    pub fn h_series(&self) -> ComplexSeries {
        self.log_fprime
            .z_derivative()
            .add_constant(C64::new(1.0, 0.0))
    }

    /// Rebuilds the member at another truncation order.
    pub fn at_order(&self, order: usize) -> Result<Self> {
        if self.provenance.is_unchecked() {
            let mut m = Self::from_h_unchecked(&self.domain, &self.h_series().resized(order))?;
            m.provenance = self.provenance.clone();
            return Ok(m);
        }
        self.rebuild(&self.provenance, order)
    }

    fn rebuild(&self, provenance: &Provenance, order: usize) -> Result<Self> {
        match provenance {
            Provenance::Extremal => Self::extremal(&self.domain, order),
            Provenance::Random { spec } => Self::random_member(&self.domain, spec, order),
            Provenance::Rotated { eps, base } => self.rebuild(base, order)?.rotate(cx(*eps)),
            Provenance::Unchecked => unreachable!("handled in at_order"),
        }
    }

    /// The normalization `log f'(0) = 0`, `f'(0) = 1`, `f(0) = 0`, `f'(0) = 1`.
    pub fn normalization_error(&self) -> f64 {
        let one = C64::new(1.0, 0.0);
        [
            self.log_fprime.coeff(0).norm(),
            (self.fprime.coeff(0) - one).norm(),
            self.f.coeff(0).norm(),
            (self.f.coeff(1) - one).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// If the first coefficients of `log f'` agree with those of
    /// `log k'(εz)` for some unimodular `ε`, returns that `ε`.
    pub fn rotation_against(&self, extremal: &MemberFunction, tol: f64) -> Option<C64> {
        let b1 = self.log_fprime.coeff(1);
        let k1 = extremal.log_fprime.coeff(1);
        if k1.norm() < 1e-300 {
            return None;
        }
        let eps = b1 / k1;
        if (eps.norm() - 1.0).abs() > tol {
            return None;
        }
        let eps = eps / eps.norm();
        let n_check = 8.min(self.order());
        let mut p = C64::new(1.0, 0.0);
        for n in 1..=n_check {
            p *= eps;
            let want = extremal.log_fprime.coeff(n) * p;
            if (self.log_fprime.coeff(n) - want).norm() > tol * want.norm().max(1.0) {
                return None;
            }
        }
        Some(eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ORDER;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hp(beta: f64) -> OmegaDomain {
        OmegaDomain::half_plane(beta).unwrap().verified().unwrap()
    }

    #[test]
    fn extremal_half_plane_zero_is_keogh_function() {
        let k = MemberFunction::extremal(&hp(0.0), 64).unwrap();
        // f = z/(1-z), f' = (1-z)^{-2}
        for n in 1..64 {
            assert!((k.f.coeff(n) - C64::new(1.0, 0.0)).norm() < 1e-12, "n={n}");
            assert!((k.fprime.coeff(n) - C64::new((n + 1) as f64, 0.0)).norm() < 1e-12 * n as f64);
        }
        assert_eq!(k.f.coeff(0), C64::new(0.0, 0.0));
    }

    #[test]
    fn extremal_half_plane_minus_half() {
        let order = 200;
        let k = MemberFunction::extremal(&hp(-0.5), order).unwrap();
        for n in 0..=order {
            // f' = (1-z)^{-3}: binomial coefficient (n+1)(n+2)/2
            let want = ((n + 1) * (n + 2)) as f64 / 2.0;
            assert!((k.fprime.coeff(n).re - want).abs() <= 1e-12 * want, "n={n}");
        }
        // f = ((1-z)^{-2} - 1)/2 has coefficients (n+1)/2 for n ≥ 1
        for n in 1..order {
            assert!((k.f.coeff(n).re - (n + 1) as f64 / 2.0).abs() <= 1e-12 * n as f64);
        }
    }

    #[test]
    fn extremal_sector_leading_term() {
        for alpha in [0.25, 0.5, 1.0] {
            let d = OmegaDomain::sector(alpha).unwrap().verified().unwrap();
            let k = MemberFunction::extremal(&d, 64).unwrap();
            assert_eq!(k.log_fprime.coeff(0), C64::new(0.0, 0.0));
            assert!((k.log_fprime.coeff(1).re - 2.0 * alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn extremal_requires_verified_domain() {
        let d = OmegaDomain::half_plane(0.0).unwrap();
        assert!(matches!(
            MemberFunction::extremal(&d, 16),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn extremal_reproduces_phi() {
        for d in [
            hp(-0.5),
            hp(0.5),
            OmegaDomain::sector(0.25).unwrap().verified().unwrap(),
        ] {
            let k = MemberFunction::extremal(&d, DEFAULT_ORDER).unwrap();
            let phi = d.phi_series(DEFAULT_ORDER).unwrap();
            let h = k.h_series();
            for n in 0..DEFAULT_ORDER {
                assert!((h.coeff(n) - phi.coeff(n)).norm() <= 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn random_member_special_cases() {
        let d = hp(0.0);
        let k = MemberFunction::extremal(&d, 64).unwrap();
        let id = MemberFunction::random_member(&d, &SchwarzSpec::Identity, 64).unwrap();
        assert_eq!(id.log_fprime, k.log_fprime);

        let zero = SchwarzSpec::Monomial {
            c: [0.0, 0.0],
            k: 1,
        };
        let z = MemberFunction::random_member(&d, &zero, 64).unwrap();
        assert!(z.log_fprime.coeffs().iter().all(|c| c.norm() == 0.0));
        assert_eq!(z.f, ComplexSeries::identity(64));

        let eps = C64::from_polar(1.0, 2.1);
        let r = MemberFunction::random_member(
            &d,
            &SchwarzSpec::Rotation {
                eps: [eps.re, eps.im],
            },
            64,
        )
        .unwrap();
        let rk = k.rotate(eps).unwrap();
        for n in 0..=64 {
            assert!((r.log_fprime.coeff(n) - rk.log_fprime.coeff(n)).norm() < 1e-13);
            assert!((r.f.coeff(n) - rk.f.coeff(n)).norm() < 1e-12 * (n as f64).max(1.0));
        }
    }

    #[test]
    fn blaschke_validation() {
        let d = hp(0.0);
        let bad = SchwarzSpec::Blaschke {
            zeros: vec![[1.0, 0.0]],
            eta: [1.0, 0.0],
        };
        assert!(matches!(
            MemberFunction::random_member(&d, &bad, 16),
            Err(Error::Usage(_))
        ));
        let bad = SchwarzSpec::Monomial {
            c: [0.5, 0.0],
            k: 9,
        };
        assert!(bad.validate().is_err());
        let bad = SchwarzSpec::Rotation { eps: [0.5, 0.0] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn blaschke_series_matches_product() {
        let spec = SchwarzSpec::Blaschke {
            zeros: vec![[0.3, -0.4], [-0.7, 0.1]],
            eta: [0.6, 0.8],
        };
        let w = spec.series(200).unwrap();
        let z = C64::new(0.2, 0.5);
        let a1 = C64::new(0.3, -0.4);
        let a2 = C64::new(-0.7, 0.1);
        let want = C64::new(0.6, 0.8) * z * (z - a1) / (1.0 - a1.conj() * z) * (z - a2)
            / (1.0 - a2.conj() * z);
        assert!((w.eval(z) - want).norm() < 1e-13);
        assert_eq!(w.coeff(0), C64::new(0.0, 0.0));
    }

    #[test]
    fn rotation_examples() {
        let k = MemberFunction::extremal(&hp(0.0), 32).unwrap();
        let same = k.rotate(C64::new(1.0, 0.0)).unwrap();
        assert_eq!(same.f, k.f);
        // ε = -1: -f(-z) = z/(1+z)
        let m = k.rotate(C64::new(-1.0, 0.0)).unwrap();
        for n in 1..32 {
            let want = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!((m.f.coeff(n).re - want).abs() < 1e-12);
        }
        let eps = C64::from_polar(1.0, 0.9);
        let back = k.rotate(eps).unwrap().rotate(eps.conj()).unwrap();
        for n in 0..=32 {
            assert!((back.f.coeff(n) - k.f.coeff(n)).norm() < 1e-12);
        }
        assert!(k.rotate(C64::new(1.1, 0.0)).is_err());
    }

    #[test]
    fn normalization_holds_for_all_constructors() {
        let d = OmegaDomain::sector(0.5).unwrap().verified().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sampler = SchwarzSampler::default();
        for _ in 0..10 {
            let spec = sampler.sample(&mut rng);
            let m = MemberFunction::random_member(&d, &spec, 64).unwrap();
            assert!(m.normalization_error() < 1e-14);
        }
        let k = MemberFunction::extremal(&d, 64).unwrap();
        assert!(
            k.rotate(C64::from_polar(1.0, 1.0))
                .unwrap()
                .normalization_error()
                < 1e-14
        );
    }

    #[test]
    fn rotation_detection() {
        let k = MemberFunction::extremal(&hp(0.0), 64).unwrap();
        let eps = C64::from_polar(1.0, -0.4);
        let r = k.rotate(eps).unwrap();
        let got = r.rotation_against(&k, 1e-9).unwrap();
        assert!((got - eps).norm() < 1e-12);
        let spec = SchwarzSpec::Monomial {
            c: [1.0, 0.0],
            k: 2,
        };
        let m = MemberFunction::random_member(&k.domain, &spec, 64).unwrap();
        assert!(m.rotation_against(&k, 1e-9).is_none());
    }

    #[test]
    fn spec_config_format() {
        let s: SchwarzSpec =
            serde_json::from_str(r#"{"kind":"monomial","c":[0.5,0.0],"k":2}"#).unwrap();
        assert_eq!(
            s,
            SchwarzSpec::Monomial {
                c: [0.5, 0.0],
                k: 2
            }
        );
    }
}
