use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use convarc::harness::{emit_plot_data, known_values, verify_all, Report, SweepConfig};
use convarc::subordination::{check_convexity, check_derivative_identity};
use convarc::symmetrization::write_profile_csv;
use convarc::{
    default_grid, CircleData, DomainKind, MemberFunction, OmegaDomain, SampledPeriodic,
    SubharmonicGauge, DEFAULT_ORDER,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "convarc",
    version,
    about = "Arclength and integral-mean checks for convex-type function classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce closed-form arclength values and estimates; rows go to stdout as CSV.
    KnownValues,
    /// Run a sweep and write `<prefix>_rows.csv` and `<prefix>_report.json`.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        /// Output prefix, overriding the config.
        #[arg(long)]
        out: Option<String>,
    },
    /// Summarize the extremal function of a domain on `|z| = r` as JSON.
    Extremal {
        /// Domain as JSON, e.g. '{"kind":"half_plane","beta":0}'.
        #[arg(long)]
        domain: String,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
    /// Symmetric decreasing rearrangement of a sampled profile (last CSV column).
    Rearrange {
        #[arg(long)]
        input: PathBuf,
        /// Print the star-function on `[0, π]` instead.
        #[arg(long)]
        star: bool,
    },
    /// Write plot CSVs next to the artifacts of a previous `verify`.
    PlotData {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn print_summary(report: &Report) {
    let s = &report.summary;
    eprintln!(
        "{}/{} checks pass; worst margin/tolerance {:e}",
        s.n_pass, s.n_checks, s.worst_margin
    );
    if let Some(w) = &s.worst_check {
        eprintln!("worst: {w}");
    }
    for v in report.violations.iter().take(20) {
        eprintln!(
            "FAIL {} {} {} r={} margin={:e}",
            v.check, v.domain, v.member_id, v.r, v.margin
        );
    }
    if report.violations.len() > 20 {
        eprintln!("... {} more", report.violations.len() - 20);
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::KnownValues => {
            let report = known_values()?;
            report.write_csv(io::stdout().lock())?;
            print_summary(&report);
            Ok(report.all_pass())
        }
        Command::Verify {
            config,
            seed,
            order,
            grid,
            out,
        } => {
            let mut cfg = SweepConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = order {
                cfg.order = n;
                if grid.is_none() {
                    cfg.grid = cfg.grid.max(default_grid(n));
                }
            }
            if let Some(m) = grid {
                cfg.grid = m;
            }
            if let Some(p) = out {
                cfg.output = p;
            }
            let report = verify_all(&cfg)?;
            report.write_artifacts(&cfg.output)?;
            println!("{}", cfg.rows_path());
            println!("{}", cfg.report_path());
            print_summary(&report);
            Ok(report.all_pass())
        }
        Command::Extremal { domain, r, order } => {
            let kind: DomainKind = serde_json::from_str(&domain).context("parsing --domain")?;
            let domain = OmegaDomain::new(kind)?.verified()?;
            let k = MemberFunction::extremal(&domain, order)?;
            let grid = default_grid(order);
            let data = CircleData::new(&k, r, grid)?;
            let convexity = check_convexity(&k.log_fprime, r, grid)?;
            let identity = check_derivative_identity(&domain, &k.log_fprime, r, grid)?;
            let means: serde_json::Map<_, _> = SubharmonicGauge::default_family()
                .iter()
                .map(|g| Ok((g.label(), json!(data.integral_mean(g)?))))
                .collect::<convarc::Result<_>>()?;
            let coeffs: Vec<[f64; 2]> = k.f.coeffs().iter().take(8).map(|c| [c.re, c.im]).collect();
            let out = json!({
                "domain": domain.label(),
                "r": r,
                "order": order,
                "grid": grid,
                "f_coefficients": coeffs,
                "arclength": data.arclength(),
                "integral_means": means,
                "log_fprime_image_convex": convexity,
                "derivative_identity": identity,
            });
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &out)?;
            writeln!(stdout)?;
            Ok(true)
        }
        Command::Rearrange { input, star } => {
            let file =
                File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let h = SampledPeriodic::read_csv(BufReader::new(file))?;
            let out = io::stdout().lock();
            if star {
                write_profile_csv(out, &h.star_thetas(), &h.star_function())?;
            } else {
                let hs = h.rearrange();
                write_profile_csv(out, &hs.thetas(), hs.values())?;
            }
            Ok(true)
        }
        Command::PlotData { config } => {
            let cfg = SweepConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            for p in emit_plot_data(&cfg)? {
                println!("{p}");
            }
            Ok(true)
        }
    }
}
