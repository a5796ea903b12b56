use std::f64::consts::PI;

use super::report::{Report, Row};
use super::sweep::scale;
use crate::error::Result;
use crate::functionals::arclength;
use crate::members::MemberFunction;
use crate::omega::OmegaDomain;
use crate::series::ComplexSeries;
use crate::{DEFAULT_GRID, DEFAULT_ORDER, INEQ_REL_TOL};

/// Relative tolerance of the closed-form arclength.
pub const KEOGH_TOL: f64 = 1e-9;
/// Order used for the Koebe series; its coefficients grow like `n²`.
const KOEBE_ORDER: usize = 1024;

pub fn known_radii() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// `2πr / (1 - r²)`, the largest arclength in the convex class.
pub fn keogh_bound(r: f64) -> f64 {
    2.0 * PI * r / (1.0 - r * r)
}

/// Lower estimate `2πr √(r⁴ + 4r² + 1) / (1 - r²)²` for the Koebe function.
pub fn yamashita_lower(r: f64) -> f64 {
    2.0 * PI * r * (r.powi(4) + 4.0 * r * r + 1.0).sqrt() / (1.0 - r * r).powi(2)
}

/// Upper estimate `2πr / (1 - r)²` over the univalent class.
pub fn univalent_upper(r: f64) -> f64 {
    2.0 * PI * r / (1.0 - r).powi(2)
}

/// Arclength of the image of `|z| = r` under `k(z) = z/(1-z)²`, from the
/// series `k'(z) = Σ (n+1)² zⁿ`.
pub fn koebe_arclength(r: f64, grid: usize) -> Result<f64> {
    let coeffs: Vec<f64> = (0..=KOEBE_ORDER)
        .map(|n| ((n + 1) * (n + 1)) as f64)
        .collect();
    let s = ComplexSeries::from_real(&coeffs, KOEBE_ORDER)?.eval_on_circle(r, grid)?;
    let h = 2.0 * PI / grid as f64;
    Ok(h * s.values.iter().map(|w| r * w.norm()).sum::<f64>())
}

fn lower(check: String, r: f64, inputs: &str, value: f64, bound: f64) -> Row {
    Row::new(
        check,
        "",
        "",
        r,
        inputs,
        value,
        bound,
        value - bound,
        INEQ_REL_TOL * scale(bound),
    )
}

/// Closed-form values and estimates reproduced on `r = 0.1, …, 0.9`.
pub fn known_values() -> Result<Report> {
    let hp0 = OmegaDomain::half_plane(0.0)?.verified()?;
    let k = MemberFunction::extremal(&hp0, DEFAULT_ORDER)?;
    let sector = OmegaDomain::sector(0.5)?.verified()?;
    let ks = MemberFunction::extremal(&sector, DEFAULT_ORDER)?;
    let mut rows = Vec::new();
    for r in known_radii() {
        let l = arclength(&k, r, DEFAULT_GRID)?;
        let b = keogh_bound(r);
        let rel = (l - b).abs() / b;
        rows.push(Row::new(
            "keogh",
            &hp0.label(),
            "extremal",
            r,
            "2πr/(1-r²)",
            l,
            b,
            -rel,
            KEOGH_TOL,
        ));

        let lk = koebe_arclength(r, DEFAULT_GRID)?;
        let m = yamashita_lower(r);
        rows.push(lower("koebe_lower".into(), r, "m(r) ≤ L_r(koebe)", lk, m));
        let u = univalent_upper(r);
        rows.push(lower(
            "koebe_upper".into(),
            r,
            "L_r(koebe) ≤ 2πr/(1-r)²",
            u,
            lk,
        ));

        let c1 = 2.0 * PI * r * (1.0 + r) / (1.0 - r).powi(2) * 6f64.sqrt() / 8.0;
        let c2 = PI * r * (1.0 + r) / (2.0 * (1.0 - r).powi(2));
        let c3 = 6f64.sqrt() / 2.0 * PI * r / (1.0 - r).powi(2);
        rows.push(lower(
            "lower_chain_first".into(),
            r,
            "m(r) ≥ (2πr(1+r)/(1-r)²)(√6/8)",
            m,
            c1,
        ));
        rows.push(Row::new(
            "lower_chain_strict",
            "",
            "",
            r,
            "(2πr(1+r)/(1-r)²)(√6/8) > πr(1+r)/(2(1-r)²)",
            c1,
            c2,
            c1 - c2,
            0.0,
        ));
        rows.push(lower(
            "lower_chain_alt".into(),
            r,
            "m(r) ≥ (√6/2)πr/(1-r)²",
            m,
            c3,
        ));
    }
    // first-order behavior f'(0) = 1
    for f in [&k, &ks] {
        let r = 0.1;
        let l = arclength(f, r, DEFAULT_GRID)?;
        let rel = (l / (2.0 * PI * r) - 1.0).abs();
        rows.push(Row::new(
            "small_radius",
            &f.domain.label(),
            "extremal",
            r,
            "|L_r/(2πr) - 1| ≤ 0.02",
            rel,
            0.02,
            0.02 - rel,
            0.0,
        ));
    }
    Ok(Report::from_rows(None, rows, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_formulas_at_half() {
        assert!((keogh_bound(0.5) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((univalent_upper(0.5) - 4.0 * PI).abs() < 1e-14);
        assert!((yamashita_lower(0.5) - PI * 2.0625f64.sqrt() / 0.5625).abs() < 1e-14);
    }

    #[test]
    fn koebe_against_direct_quadrature() {
        // |k'| = |1 + z| / |1 - z|³ summed on a fine grid
        let r = 0.7;
        let m = 1 << 16;
        let h = 2.0 * PI / m as f64;
        let direct: f64 = (0..m)
            .map(|j| {
                let z = crate::C64::from_polar(r, -PI + j as f64 * h);
                r * (1.0 + z).norm() / (1.0 - z).norm().powi(3)
            })
            .sum::<f64>()
            * h;
        assert!((koebe_arclength(r, DEFAULT_GRID).unwrap() - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn all_known_values_pass() {
        let rep = known_values().unwrap();
        assert!(rep.all_pass(), "{:?}", rep.violations);
        assert_eq!(rep.rows.iter().filter(|r| r.check_id == "keogh").count(), 9);
    }
}
