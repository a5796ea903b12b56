use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::subordination::Violation;

/// One verified inequality or identity. `pass` iff `margin ≥ -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub check_id: String,
    pub domain: String,
    pub member_id: String,
    pub r: f64,
    pub inputs: String,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
}

impl Row {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        check_id: impl Into<String>,
        domain: &str,
        member_id: &str,
        r: f64,
        inputs: impl Into<String>,
        value: f64,
        bound: f64,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            check_id: check_id.into(),
            domain: domain.to_string(),
            member_id: member_id.to_string(),
            r,
            inputs: inputs.into(),
            value,
            bound,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            point: None,
        }
    }

    pub fn with_point(mut self, p: [f64; 2]) -> Self {
        self.point = Some(p);
        self
    }

    /// `margin / tolerance`, the slack in units of the allowed error.
    pub fn relative_margin(&self) -> f64 {
        if self.tolerance > 0.0 {
            self.margin / self.tolerance
        } else {
            self.margin
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n_checks: usize,
    pub n_pass: usize,
    /// The smallest `margin / tolerance` over all rows.
    pub worst_margin: f64,
    pub worst_check: Option<String>,
}

/// A near-equality found by the sweep, with the outcome of the rotation fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EqualityCandidate {
    pub check_id: String,
    pub domain: String,
    pub member_id: String,
    pub r: f64,
    pub relative_margin: f64,
    /// `ε` with `f(z) = ε̄ k(εz)`, if the leading coefficients match.
    pub rotation: Option<[f64; 2]>,
    /// Near-equality without a matching rotation.
    pub anomaly: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub seed: Option<u64>,
    pub rows: Vec<Row>,
    pub summary: Summary,
    pub violations: Vec<Violation>,
    pub equality_candidates: Vec<EqualityCandidate>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

impl Report {
    pub fn from_rows(
        seed: Option<u64>,
        rows: Vec<Row>,
        equality_candidates: Vec<EqualityCandidate>,
    ) -> Self {
        let n_pass = rows.iter().filter(|r| r.pass).count();
        let mut worst_margin = f64::INFINITY;
        let mut worst_check = None;
        for row in &rows {
            let m = row.relative_margin();
            if m < worst_margin || m.is_nan() {
                worst_margin = m;
                worst_check = Some(format!(
                    "{}/{}/{}/r={}",
                    row.check_id, row.domain, row.member_id, row.r
                ));
            }
        }
        let violations = rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| Violation {
                check: r.check_id.clone(),
                domain: r.domain.clone(),
                member_id: r.member_id.clone(),
                r: r.r,
                worst_point: r.point,
                margin: r.margin,
            })
            .collect();
        let summary = Summary {
            n_checks: rows.len(),
            n_pass,
            worst_margin,
            worst_check,
        };
        Self {
            seed,
            rows,
            summary,
            violations,
            equality_candidates,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.n_pass == self.summary.n_checks
    }

    /// `check_id,domain,member_id,r,inputs,value,bound,margin,tolerance,pass,seed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record([
            "check_id",
            "domain",
            "member_id",
            "r",
            "inputs",
            "value",
            "bound",
            "margin",
            "tolerance",
            "pass",
            "seed",
        ])?;
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        for row in &self.rows {
            w.write_record([
                row.check_id.as_str(),
                &row.domain,
                &row.member_id,
                &fmt_f64(row.r),
                &row.inputs,
                &fmt_f64(row.value),
                &fmt_f64(row.bound),
                &fmt_f64(row.margin),
                &fmt_f64(row.tolerance),
                if row.pass { "true" } else { "false" },
                &seed,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Writes `<prefix>_rows.csv` and `<prefix>_report.json`.
    pub fn write_artifacts(&self, prefix: &str) -> Result<()> {
        if let Some(parent) = Path::new(prefix).parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut csv_out = BufWriter::new(File::create(format!("{prefix}_rows.csv"))?);
        self.write_csv(&mut csv_out)?;
        csv_out.flush()?;
        let mut json_out = BufWriter::new(File::create(format!("{prefix}_report.json"))?);
        self.write_json(&mut json_out)?;
        json_out.write_all(b"\n")?;
        json_out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_is_consistent() {
        let rows = vec![
            Row::new("a", "d", "m", 0.5, "", 1.0, 2.0, 1.0, 1e-8),
            Row::new("b", "d", "m", 0.5, "", 2.0, 1.0, -1.0, 1e-8),
            Row::new("c", "d", "m", 0.5, "", 1.0, 1.0, -1e-9, 1e-8),
        ];
        let rep = Report::from_rows(Some(3), rows, vec![]);
        assert_eq!(rep.summary.n_checks, 3);
        assert_eq!(rep.summary.n_pass, 2);
        assert!(!rep.all_pass());
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].check, "b");
        assert!(rep
            .summary
            .worst_check
            .as_deref()
            .unwrap()
            .starts_with("b/"));
    }

    #[test]
    fn csv_layout() {
        let rep = Report::from_rows(
            Some(9),
            vec![Row::new("x", "d", "m", 0.25, "in", 0.1, 0.2, 0.1, 0.0)],
            vec![],
        );
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "check_id,domain,member_id,r,inputs,value,bound,margin,tolerance,pass,seed\nx,d,m,2.5e-1,in,1e-1,2e-1,1e-1,0e0,true,9\n"
        );
    }
}
