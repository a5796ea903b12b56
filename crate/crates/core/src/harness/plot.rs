use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::config::SweepConfig;
use super::known::keogh_bound;
use super::report::fmt_f64;
use super::sweep::{domain_members, member_id};
use crate::error::{usage, Result};
use crate::functionals::{CircleData, Sign};
use crate::members::MemberFunction;
use crate::series::grid_theta;

const STAR_POINTS: usize = 33;

fn writer(path: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

/// Writes `<prefix>_profiles.csv` (`θ ↦ log|k_Ω'(re^{iθ})|` on `[0, π]`),
/// `<prefix>_star.csv` (star-functions of the first member against the
/// extremal) and `<prefix>_growth.csv` (`r ↦ L_r(k_Ω)`). Requires the
/// artifacts of a previous verification run with the same prefix.
pub fn emit_plot_data(config: &SweepConfig) -> Result<Vec<String>> {
    config.validate()?;
    for p in [config.report_path(), config.rows_path()] {
        if !Path::new(&p).exists() {
            return usage(format!("{p} not found; run verify with this config first"));
        }
    }
    let prefix = &config.output;
    let paths = [
        format!("{prefix}_profiles.csv"),
        format!("{prefix}_star.csv"),
        format!("{prefix}_growth.csv"),
    ];
    let mut prof = writer(&paths[0])?;
    prof.write_record(["domain", "r", "theta", "log_abs_kprime"])?;
    let mut star = writer(&paths[1])?;
    star.write_record([
        "domain",
        "member_id",
        "r",
        "gauge",
        "theta",
        "star_member",
        "star_extremal",
    ])?;
    let mut growth = writer(&paths[2])?;
    growth.write_record(["domain", "r", "arclength", "keogh_bound"])?;

    let m = config.grid;
    for (di, domain) in config.omega_domains()?.iter().enumerate() {
        let label = domain.label();
        let k = MemberFunction::extremal(domain, config.order)?;
        let mut cfg = config.clone();
        cfg.members_per_domain = config.members_per_domain.min(1);
        let first = domain_members(&cfg, di, domain)?;
        for &r in &config.radii {
            let data = CircleData::new(&k, r, m)?;
            let s = data.component(false, Sign::Plus);
            for j in (m / 2..m).chain(std::iter::once(0)) {
                let theta = if j == 0 { PI } else { grid_theta(j, m) };
                prof.write_record([label.clone(), fmt_f64(r), fmt_f64(theta), fmt_f64(s[j])])?;
            }
            if let Some(f) = first.first() {
                let fd = CircleData::new(f, r, m)?;
                for phi in &config.partial_gauges {
                    let pk = data.log_abs_profile(phi)?;
                    let pf = fd.log_abs_profile(phi)?;
                    for i in 0..STAR_POINTS {
                        let t = i as f64 * PI / (STAR_POINTS - 1) as f64;
                        star.write_record([
                            label.clone(),
                            member_id(Some(0)),
                            fmt_f64(r),
                            phi.label(),
                            fmt_f64(t),
                            fmt_f64(pf.star(t)?),
                            fmt_f64(pk.star(t)?),
                        ])?;
                    }
                }
            }
        }
        for i in 1..=19 {
            let r = i as f64 / 20.0;
            let l = CircleData::new(&k, r, m)?.arclength();
            growth.write_record([
                label.clone(),
                fmt_f64(r),
                fmt_f64(l),
                fmt_f64(keogh_bound(r)),
            ])?;
        }
    }
    prof.flush()?;
    star.flush()?;
    growth.flush()?;
    Ok(paths.to_vec())
}
