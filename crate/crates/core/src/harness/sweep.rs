use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::SweepConfig;
use super::report::{EqualityCandidate, Report, Row};
use crate::arcs::ArcSet;
use crate::error::{Error, Result};
use crate::functionals::{CircleData, ComposedProfile, SubharmonicGauge};
use crate::members::{MemberFunction, SchwarzSampler, SchwarzSpec};
use crate::omega::OmegaDomain;
use crate::subordination::{check_convexity, check_derivative_identity, OuterImage, BOUNDARY_BAND};
use crate::symmetrization::{check_baernstein, SampledPeriodic, BAERNSTEIN_TOL};
use crate::{IDENTITY_ABS_TOL, INEQ_REL_TOL, NEAR_EQUALITY};

/// Tolerance of the derivative identity.
pub const DERIVATIVE_TOL: f64 = 1e-8;
/// Largest relative change allowed when order and grid are doubled.
pub const CONVERGENCE_TOL: f64 = 1e-9;
/// Coefficient tolerance of the rotation fit for equality candidates.
const ROTATION_FIT_TOL: f64 = 1e-8;

pub(crate) fn scale(bound: f64) -> f64 {
    bound.abs().max(1.0)
}

/// `value ≤ bound` with relative slack.
fn upper(
    check: String,
    domain: &str,
    id: &str,
    r: f64,
    inputs: String,
    value: f64,
    bound: f64,
) -> Row {
    let margin = if value == bound { 0.0 } else { bound - value };
    Row::new(
        check,
        domain,
        id,
        r,
        inputs,
        value,
        bound,
        margin,
        INEQ_REL_TOL * scale(bound),
    )
}

pub(crate) fn member_id(index: Option<usize>) -> String {
    match index {
        None => "extremal".into(),
        Some(i) => format!("m{i:04}"),
    }
}

/// Everything about `k_Ω` on one circle that member checks compare against.
struct ExtremalCircle<'a> {
    config: &'a SweepConfig,
    domain_index: usize,
    domain: &'a OmegaDomain,
    label: String,
    extremal: &'a MemberFunction,
    r: f64,
    arclength: f64,
    gauge_means: Vec<f64>,
    profiles: Vec<ComposedProfile>,
    /// `(Φ ∘ log|k'|)*` at `star_thetas`, per partial gauge.
    stars: Vec<Vec<f64>>,
    star_thetas: Vec<f64>,
    outer: OuterImage,
    log_abs: SampledPeriodic,
}

impl<'a> ExtremalCircle<'a> {
    fn new(
        config: &'a SweepConfig,
        domain_index: usize,
        domain: &'a OmegaDomain,
        extremal: &'a MemberFunction,
        r: f64,
    ) -> Result<Self> {
        let data = CircleData::new(extremal, r, config.grid)?;
        let gauge_means = config
            .gauges
            .iter()
            .map(|g| data.integral_mean(g))
            .collect::<Result<_>>()?;
        let profiles: Vec<ComposedProfile> = config
            .partial_gauges
            .iter()
            .map(|phi| data.log_abs_profile(phi))
            .collect::<Result<_>>()?;
        let p = config.star_points;
        // θ = 0 is an equality for every function and is left out
        let star_thetas: Vec<f64> = (1..p).map(|i| i as f64 * PI / (p - 1) as f64).collect();
        let stars = profiles
            .iter()
            .map(|prof| {
                star_thetas
                    .iter()
                    .map(|&t| prof.star(t))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            config,
            domain_index,
            domain,
            label: domain.label(),
            extremal,
            r,
            arclength: data.arclength(),
            gauge_means,
            profiles,
            stars,
            star_thetas,
            outer: OuterImage::new(&extremal.log_fprime, r, config.grid)?,
            log_abs: SampledPeriodic::new(data.component(false, crate::Sign::Plus))?,
        })
    }

    /// Checks on `k_Ω` alone.
    fn extremal_rows(&self) -> Result<Vec<Row>> {
        let (label, r) = (self.label.as_str(), self.r);
        let id = member_id(None);
        let mut rows = Vec::new();
        let err = self.extremal.normalization_error();
        rows.push(Row::new(
            "normalization",
            label,
            &id,
            r,
            "",
            err,
            0.0,
            -err,
            IDENTITY_ABS_TOL,
        ));

        let conv = check_convexity(&self.extremal.log_fprime, r, self.config.grid)?;
        let margin = if conv.convex {
            conv.margin
        } else {
            -conv.margin.abs().max(f64::MIN_POSITIVE)
        };
        rows.push(Row::new(
            "convexity",
            label,
            &id,
            r,
            "log k' image",
            conv.margin,
            0.0,
            margin,
            0.0,
        ));

        if self.domain.check_symmetric() {
            let d = check_derivative_identity(
                self.domain,
                &self.extremal.log_fprime,
                r,
                self.config.grid,
            )?;
            rows.push(Row::new(
                "derivative_identity",
                label,
                &id,
                r,
                "max |d/dθ log|k'| + Im φ|",
                d.max_abs_error,
                0.0,
                -d.max_abs_error,
                DERIVATIVE_TOL,
            ));
            rows.push(Row::new(
                "derivative_sign",
                label,
                &id,
                r,
                "min Im φ on (0, π)",
                d.negativity_margin,
                0.0,
                d.negativity_margin,
                0.0,
            ));
            // log|k'| on the circle is its own symmetric decreasing rearrangement
            let v = self.log_abs.values();
            let re = self.log_abs.rearrange();
            let m = v.len();
            let c = m / 2;
            let mut dev: f64 = 0.0;
            for k in 1..c {
                dev = dev.max((v[c + k] - v[c - k]).abs());
                dev = dev.max(v[c + k] - v[c + k - 1]);
            }
            let sorted_dev = v
                .iter()
                .zip(re.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            dev = dev.max(sorted_dev);
            rows.push(Row::new(
                "profile_symmetric_decreasing",
                label,
                &id,
                r,
                "log|k'|",
                dev,
                0.0,
                -dev,
                IDENTITY_ABS_TOL,
            ));
        }
        Ok(rows)
    }

    fn member_rows(
        &self,
        f: &MemberFunction,
        index: Option<usize>,
    ) -> Result<(Vec<Row>, Vec<EqualityCandidate>)> {
        let (label, r) = (self.label.as_str(), self.r);
        let id = member_id(index);
        let cfg = self.config;
        let data = CircleData::new(f, r, cfg.grid)?;
        let mut rows = Vec::new();

        rows.push(upper(
            "arclength".into(),
            label,
            &id,
            r,
            String::new(),
            data.arclength(),
            self.arclength,
        ));
        for (g, &bound) in cfg.gauges.iter().zip(&self.gauge_means) {
            let v = data.integral_mean(g)?;
            rows.push(upper(
                format!("integral_mean:{}", g.label()),
                label,
                &id,
                r,
                String::new(),
                v,
                bound,
            ));
        }

        if let Some(m) = membership_margin(self.domain, f, r, cfg.grid)? {
            rows.push(Row::new(
                "membership",
                label,
                &id,
                r,
                "1 + z f''/f' in Ω",
                m,
                0.0,
                m,
                IDENTITY_ABS_TOL,
            ));
        }

        let sub = self.outer.check_samples(
            f.log_fprime.coeff(0),
            &f.log_fprime.eval_on_circle(r, cfg.grid)?.values,
        );
        let rel = if sub.centers_agree {
            sub.margin / sub.diameter
        } else {
            f64::NEG_INFINITY
        };
        rows.push(
            Row::new(
                "subordination",
                label,
                &id,
                r,
                format!(
                    "inside={} boundary={} outside={}",
                    sub.inside, sub.on_boundary, sub.outside
                ),
                sub.margin,
                0.0,
                rel,
                BOUNDARY_BAND,
            )
            .with_point(sub.worst_point),
        );

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(arc_stream(self.domain_index, index));
        let mut sets: Vec<ArcSet> = (0..cfg.arc_sets_per_member)
            .map(|_| ArcSet::random(&mut rng, 4))
            .collect();
        let greedy = ArcSet::top_cells(&data.fprime_abs(), PI);

        for (pi, phi) in cfg.partial_gauges.iter().enumerate() {
            let prof = data.log_abs_profile(phi)?;
            let tag = phi.label();

            let mut worst: Option<Row> = None;
            for (t, bound) in self.star_thetas.iter().zip(&self.stars[pi]) {
                let v = prof.star(*t)?;
                let row = upper(
                    format!("star_domination:{tag}"),
                    label,
                    &id,
                    r,
                    format!("theta={t:e}"),
                    v,
                    *bound,
                );
                keep_worst(&mut worst, row);
            }
            rows.extend(worst);

            if self.domain.check_symmetric() {
                let mut worst: Option<Row> = None;
                for e in sets.iter() {
                    let v = prof.integral_over(e);
                    let bound =
                        self.profiles[pi].integral_over(&ArcSet::symmetric(0.5 * e.measure()));
                    let inputs = format!("|E|={:e} arcs={}", e.measure(), e.arcs().len());
                    keep_worst(
                        &mut worst,
                        upper(
                            format!("partial_mean_random:{tag}"),
                            label,
                            &id,
                            r,
                            inputs,
                            v,
                            bound,
                        ),
                    );
                }
                rows.extend(worst);
                let v = prof.integral_over(&greedy);
                let bound =
                    self.profiles[pi].integral_over(&ArcSet::symmetric(0.5 * greedy.measure()));
                let inputs = format!("|E|={:e} top cells", greedy.measure());
                rows.push(upper(
                    format!("partial_mean_greedy:{tag}"),
                    label,
                    &id,
                    r,
                    inputs,
                    v,
                    bound,
                ));
            }
        }
        sets.clear();

        let fa = SampledPeriodic::new(data.component(false, crate::Sign::Plus))?;
        let row = match check_baernstein(&fa, &self.log_abs) {
            Ok(b) => {
                let agree = b.holds_b == b.holds_c;
                let margin = if agree {
                    0.0
                } else {
                    -(b.worst_gap_b - b.worst_gap_c).abs()
                };
                Row::new(
                    "baernstein_consistency",
                    label,
                    &id,
                    r,
                    format!(
                        "holds_a={} holds_b={} holds_c={}",
                        b.holds_a_on_family, b.holds_b, b.holds_c
                    ),
                    b.worst_gap_c,
                    b.worst_gap_b,
                    margin,
                    BAERNSTEIN_TOL,
                )
            }
            Err(Error::Internal(msg)) => Row::new(
                "baernstein_consistency",
                label,
                &id,
                r,
                msg,
                f64::NAN,
                f64::NAN,
                f64::NEG_INFINITY,
                BAERNSTEIN_TOL,
            ),
            Err(e) => return Err(e),
        };
        rows.push(row);

        let candidates = self.equality_candidates(f, &rows);
        Ok((rows, candidates))
    }

    fn equality_candidates(&self, f: &MemberFunction, rows: &[Row]) -> Vec<EqualityCandidate> {
        let mut out = Vec::new();
        let mut rotation: Option<Option<[f64; 2]>> = None;
        for row in rows {
            let inequality = [
                "arclength",
                "integral_mean",
                "star_domination",
                "partial_mean",
            ]
            .iter()
            .any(|p| row.check_id.starts_with(p));
            if !inequality || !row.bound.is_finite() || row.bound.abs() <= 1e-9 {
                continue;
            }
            let rel = row.margin / scale(row.bound);
            if rel >= NEAR_EQUALITY {
                continue;
            }
            let rot = *rotation.get_or_insert_with(|| {
                f.rotation_against(self.extremal, ROTATION_FIT_TOL)
                    .map(|e| [e.re, e.im])
            });
            out.push(EqualityCandidate {
                check_id: row.check_id.clone(),
                domain: row.domain.clone(),
                member_id: row.member_id.clone(),
                r: row.r,
                relative_margin: rel,
                rotation: rot,
                anomaly: rot.is_none(),
            });
        }
        out
    }
}

fn keep_worst(worst: &mut Option<Row>, row: Row) {
    let replace = match worst {
        None => true,
        Some(w) => row.relative_margin() < w.relative_margin(),
    };
    if replace {
        *worst = Some(row);
    }
}

fn arc_stream(domain: usize, member: Option<usize>) -> u64 {
    ((domain as u64 + 1) << 32) | member.map(|m| m as u64 + 1).unwrap_or(0)
}

/// `min over |z| = r` of the closed-form containment margin of
/// `1 + z f''/f'` in `Ω`; `None` for custom domains.
fn membership_margin(
    domain: &OmegaDomain,
    f: &MemberFunction,
    r: f64,
    grid: usize,
) -> Result<Option<f64>> {
    let h = f.h_series().eval_on_circle(r, grid)?;
    let mut worst = f64::INFINITY;
    for w in &h.values {
        match domain.contains(*w) {
            Some(m) => worst = worst.min(m),
            None => return Ok(None),
        }
    }
    Ok(Some(worst))
}

/// The members of one domain: Schwarz functions drawn sequentially from
/// the domain's own stream, so results do not depend on scheduling.
pub fn domain_members(
    config: &SweepConfig,
    domain_index: usize,
    domain: &OmegaDomain,
) -> Result<Vec<MemberFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(domain_index as u64);
    let sampler = SchwarzSampler::default();
    let specs: Vec<SchwarzSpec> = (0..config.members_per_domain)
        .map(|_| sampler.sample(&mut rng))
        .collect();
    specs
        .par_iter()
        .map(|s| MemberFunction::random_member(domain, s, config.order))
        .collect()
}

/// The functionals compared across resolutions.
fn functionals(
    f: &MemberFunction,
    r: f64,
    grid: usize,
    gauges: &[SubharmonicGauge],
) -> Result<Vec<(String, f64)>> {
    let data = CircleData::new(f, r, grid)?;
    let mut out = vec![("arclength".to_string(), data.arclength())];
    for g in gauges {
        out.push((
            format!("integral_mean:{}", g.label()),
            data.integral_mean(g)?,
        ));
    }
    Ok(out)
}

/// Reruns the extremal and the first members at doubled order and grid.
fn convergence_rows(
    config: &SweepConfig,
    label: &str,
    fs: &[(Option<usize>, &MemberFunction)],
) -> Result<Vec<Row>> {
    let work: Vec<(Option<usize>, &MemberFunction, f64)> = fs
        .iter()
        .flat_map(|&(i, f)| config.radii.iter().map(move |&r| (i, f, r)))
        .collect();
    let per: Vec<Vec<Row>> = work
        .par_iter()
        .map(|&(i, f, r)| {
            let fine = f.at_order(2 * config.order)?;
            let a = functionals(f, r, config.grid, &config.gauges)?;
            let b = functionals(&fine, r, 2 * config.grid, &config.gauges)?;
            let id = member_id(i);
            Ok(a.into_iter()
                .zip(b)
                .map(|((name, va), (_, vb))| {
                    let change = if va == vb { 0.0 } else { (vb - va).abs() };
                    let tol = CONVERGENCE_TOL * convergence_scale(va);
                    Row::new(
                        format!("self_convergence:{name}"),
                        label,
                        &id,
                        r,
                        "N,M doubled",
                        va,
                        vb,
                        -change,
                        tol,
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

pub(crate) fn convergence_scale(v: f64) -> f64 {
    v.abs().max(1.0)
}

/// Runs every check of the sweep. Rows come out in the order
/// domain, radius, member (extremal first), check.
pub fn verify_all(config: &SweepConfig) -> Result<Report> {
    config.validate()?;
    let domains = config.omega_domains()?;
    let mut rows = Vec::new();
    let mut candidates = Vec::new();
    for (di, domain) in domains.iter().enumerate() {
        let k = MemberFunction::extremal(domain, config.order)?;
        let members = domain_members(config, di, domain)?;
        for &r in &config.radii {
            let ctx = ExtremalCircle::new(config, di, domain, &k, r)?;
            rows.extend(ctx.extremal_rows()?);
            let all: Vec<(Option<usize>, &MemberFunction)> = std::iter::once((None, &k))
                .chain(members.iter().enumerate().map(|(i, m)| (Some(i), m)))
                .collect();
            let results: Vec<(Vec<Row>, Vec<EqualityCandidate>)> = all
                .par_iter()
                .map(|&(i, f)| ctx.member_rows(f, i))
                .collect::<Result<_>>()?;
            for (r_rows, c) in results {
                rows.extend(r_rows);
                candidates.extend(c);
            }
        }
        let mut conv: Vec<(Option<usize>, &MemberFunction)> = vec![(None, &k)];
        conv.extend(
            members
                .iter()
                .take(config.convergence_members)
                .enumerate()
                .map(|(i, m)| (Some(i), m)),
        );
        rows.extend(convergence_rows(config, &domain.label(), &conv)?);
    }
    Ok(Report::from_rows(Some(config.seed), rows, candidates))
}

/// Runs the same checks for one hand-built function against its domain's
/// extremal function, e.g. an `h` that is not subordinate to `φ_Ω`.
pub fn verify_function(
    config: &SweepConfig,
    domain: &OmegaDomain,
    f: &MemberFunction,
    id: usize,
) -> Result<Report> {
    config.validate()?;
    let domain = domain.clone().verified()?;
    let k = MemberFunction::extremal(&domain, config.order)?;
    let mut cfg = config.clone();
    cfg.domains = vec![domain.kind().clone()];
    let mut rows = Vec::new();
    let mut candidates = Vec::new();
    for &r in &config.radii {
        let ctx = ExtremalCircle::new(&cfg, 0, &domain, &k, r)?;
        let (r_rows, c) = ctx.member_rows(f, Some(id))?;
        rows.extend(r_rows);
        candidates.extend(c);
    }
    Ok(Report::from_rows(Some(config.seed), rows, candidates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::DomainKind;
    use crate::series::ComplexSeries;

    fn small(members: usize) -> SweepConfig {
        SweepConfig {
            domains: vec![
                DomainKind::HalfPlane { beta: 0.0 },
                DomainKind::Sector { alpha: 0.5 },
            ],
            radii: vec![0.6],
            members_per_domain: members,
            star_points: 16,
            arc_sets_per_member: 4,
            convergence_members: 1,
            ..SweepConfig::standard()
        }
    }

    #[test]
    fn extremal_only_sweep_is_exact() {
        let rep = verify_all(&small(0)).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.violations);
        for row in &rep.rows {
            let cmp = ["arclength", "integral_mean", "star_domination"];
            if cmp.iter().any(|c| row.check_id.starts_with(c)) {
                assert!(row.margin.abs() <= 1e-10 * scale(row.bound), "{row:?}");
            }
        }
    }

    #[test]
    fn small_sweep_passes_and_is_deterministic() {
        let cfg = small(3);
        let a = verify_all(&cfg).unwrap();
        assert!(a.all_pass(), "{:?}", a.violations);
        let b = verify_all(&cfg).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn non_subordinate_fixture_fails() {
        let mut cfg = small(0);
        cfg.radii = vec![0.9];
        let d = OmegaDomain::half_plane(0.0).unwrap();
        let h = ComplexSeries::from_real(&[1.0, 3.0], cfg.order).unwrap();
        let fake = MemberFunction::from_h_unchecked(&d, &h).unwrap();
        let rep = verify_function(&cfg, &d, &fake, 0).unwrap();
        assert!(!rep.all_pass());
        let failed: Vec<&str> = rep.violations.iter().map(|v| v.check.as_str()).collect();
        assert!(
            failed.contains(&"membership") && failed.contains(&"subordination"),
            "{failed:?}"
        );
    }

    #[test]
    fn rotations_are_equality_candidates() {
        let cfg = small(0);
        let d = OmegaDomain::half_plane(0.0).unwrap().verified().unwrap();
        let k = MemberFunction::extremal(&d, cfg.order).unwrap();
        let rot = k.rotate(crate::C64::from_polar(1.0, 0.4)).unwrap();
        let rep = verify_function(&cfg, &d, &rot, 0).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.violations);
        assert!(!rep.equality_candidates.is_empty());
        assert!(rep
            .equality_candidates
            .iter()
            .all(|c| c.rotation.is_some() && !c.anomaly));
    }
}
