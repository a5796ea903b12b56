use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::functionals::{ConvexGauge, SubharmonicGauge};
use crate::omega::{DomainKind, DomainPolicy, OmegaDomain};
use crate::series::{check_grid, check_radius};
use crate::{DEFAULT_GRID, DEFAULT_ORDER};

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

fn default_arc_sets() -> usize {
    16
}

fn default_star_points() -> usize {
    128
}

fn default_convergence_members() -> usize {
    2
}

fn default_partial_gauges() -> Vec<ConvexGauge> {
    vec![
        ConvexGauge::Exp,
        ConvexGauge::Hinge { t0: 0.0 },
        ConvexGauge::Hinge { t0: 1.0 },
    ]
}

fn default_output() -> String {
    "convarc".into()
}

/// A sweep over domains, radii and random members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub domains: Vec<DomainKind>,
    pub radii: Vec<f64>,
    /// Random members per domain, in addition to the extremal function.
    pub members_per_domain: usize,
    pub seed: u64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Gauges `u` of the integral-mean comparison.
    #[serde(default = "SubharmonicGauge::default_family")]
    pub gauges: Vec<SubharmonicGauge>,
    /// Nondecreasing convex `Φ` for the arc and star-function comparisons.
    #[serde(default = "default_partial_gauges")]
    pub partial_gauges: Vec<ConvexGauge>,
    #[serde(default = "default_arc_sets")]
    pub arc_sets_per_member: usize,
    /// Number of `θ` in `[0, π]` at which star-functions are compared.
    #[serde(default = "default_star_points")]
    pub star_points: usize,
    /// Members per domain (besides the extremal) rerun at doubled order and grid.
    #[serde(default = "default_convergence_members")]
    pub convergence_members: usize,
    #[serde(default)]
    pub policy: DomainPolicy,
    #[serde(default = "default_output")]
    pub output: String,
}

impl SweepConfig {
    /// Three half-planes, three sectors, three radii, 200 members each.
    pub fn standard() -> Self {
        Self {
            domains: vec![
                DomainKind::HalfPlane { beta: -0.5 },
                DomainKind::HalfPlane { beta: 0.0 },
                DomainKind::HalfPlane { beta: 0.5 },
                DomainKind::Sector { alpha: 0.25 },
                DomainKind::Sector { alpha: 0.5 },
                DomainKind::Sector { alpha: 1.0 },
            ],
            radii: vec![0.3, 0.6, 0.9],
            members_per_domain: 200,
            seed: 1729,
            order: DEFAULT_ORDER,
            grid: DEFAULT_GRID,
            gauges: SubharmonicGauge::default_family(),
            partial_gauges: default_partial_gauges(),
            arc_sets_per_member: default_arc_sets(),
            star_points: default_star_points(),
            convergence_members: default_convergence_members(),
            policy: DomainPolicy::default(),
            output: default_output(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for &r in &self.radii {
            check_radius(r)?;
        }
        check_grid(self.grid, self.order)?;
        if self.order < 1 {
            return usage("order must be at least 1");
        }
        if self.star_points < 2 {
            return usage("star_points must be at least 2");
        }
        for g in &self.gauges {
            g.validate()?;
        }
        for phi in &self.partial_gauges {
            phi.validate()?;
            if !phi.nondecreasing() {
                return usage(format!(
                    "partial gauge {} must be nondecreasing",
                    phi.label()
                ));
            }
        }
        self.omega_domains()?;
        Ok(())
    }

    /// The configured domains, range-checked and verified starlike.
    pub fn omega_domains(&self) -> Result<Vec<OmegaDomain>> {
        self.domains
            .iter()
            .map(|k| OmegaDomain::with_policy(k.clone(), self.policy)?.verified())
            .collect()
    }

    pub fn report_path(&self) -> String {
        format!("{}_report.json", self.output)
    }

    pub fn rows_path(&self) -> String {
        format!("{}_rows.csv", self.output)
    }
}
