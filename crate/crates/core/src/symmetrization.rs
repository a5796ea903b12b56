//! Distribution functions, symmetric nonincreasing rearrangements and
//! star-functions of functions on `[-π, π]`, for sampled and
//! piecewise-constant data.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::series::grid_theta;
use crate::LOG_CLAMP;

/// Values at the uniform grid `θ_j = -π + 2πj/M`, each cell of measure `2π/M`.
/// Entries may be `-∞`; `+∞` and NaN are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPeriodic {
    values: Vec<f64>,
}

impl SampledPeriodic {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return usage(format!("need at least 4 samples, got {}", values.len()));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return usage("samples must not be NaN or +∞");
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn cell(&self) -> f64 {
        2.0 * PI / self.values.len() as f64
    }

    pub fn distribution(&self) -> DistributionFn {
        let h = self.cell();
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut levels = Vec::new();
        let mut measures = Vec::new();
        let mut i = 0;
        while i < n {
            let v = sorted[i];
            while i < n && sorted[i] == v {
                i += 1;
            }
            levels.push(v);
            measures.push((n - i) as f64 * h);
        }
        DistributionFn { levels, measures }
    }

    /// Largest value at `θ = 0`, then alternately right and left of it.
    /// Ties keep their original order.
    pub fn rearrange(&self) -> SampledPeriodic {
        let m = self.values.len();
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut out = vec![0.0; m];
        let center = m / 2;
        let (mut right, mut left) = (1usize, 1usize);
        out[center] = sorted[0];
        for (k, &v) in sorted.iter().enumerate().skip(1) {
            let go_right = (k % 2 == 1 && center + right < m) || center < left;
            if go_right {
                out[center + right] = v;
                right += 1;
            } else {
                out[center - left] = v;
                left += 1;
            }
        }
        SampledPeriodic { values: out }
    }

    /// `h*(θ_k)` at `θ_k = kπ/M`, `k = 0..=M`: the sum of the `k` largest
    /// values times the cell measure. `-∞` entries count as the log floor.
    pub fn star_function(&self) -> Vec<f64> {
        let h = self.cell();
        let mut sorted: Vec<f64> = self.values.iter().map(|v| v.max(LOG_CLAMP)).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut out = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for v in sorted {
            acc += v * h;
            out.push(acc);
        }
        out
    }

    /// Abscissae matching [`Self::star_function`].
    pub fn star_thetas(&self) -> Vec<f64> {
        let m = self.values.len();
        (0..=m).map(|k| k as f64 * PI / m as f64).collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        let m = self.values.len();
        (0..m).map(|j| grid_theta(j, m)).collect()
    }

    /// Reads a one-column (`value`) or two-column (`theta,value`) CSV with a
    /// header row; the grid is taken to be uniform.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = rec.get(rec.len().saturating_sub(1)).unwrap_or("");
            let v = match field {
                "-inf" | "-Inf" | "-INF" => f64::NEG_INFINITY,
                s => s
                    .parse::<f64>()
                    .map_err(|e| Error::Usage(format!("bad value {s:?}: {e}")))?,
            };
            values.push(v);
        }
        Self::new(values)
    }
}

/// Piecewise constant: `values[i]` on `(breakpoints[i], breakpoints[i+1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return usage("a step function needs k ≥ 1 values and k + 1 breakpoints");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return usage("breakpoints must be strictly increasing");
        }
        let (a, b) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
        if (a + PI).abs() > 1e-12 || (b - PI).abs() > 1e-12 {
            return usage("breakpoints must cover [-π, π]");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return usage("step values must be finite");
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: vec![-PI, PI],
            values: vec![c],
        }
    }

    /// Up to `max_pieces` pieces with uniform breakpoints and values on a
    /// quarter-integer lattice in `[-4, 4]`, so ties between pieces occur.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize) -> Self {
        let k = rng.gen_range(1..=max_pieces.max(1));
        let mut inner: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(-PI..PI)).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        let mut bps = vec![-PI];
        bps.extend(inner.into_iter().filter(|&t| t > -PI));
        bps.push(PI);
        let values = (0..bps.len() - 1)
            .map(|_| rng.gen_range(-16i32..=16) as f64 / 4.0)
            .collect();
        Self {
            breakpoints: bps,
            values,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, self.breakpoints[i + 1] - self.breakpoints[i]))
    }

    /// Value at `θ`, taking the right piece at breakpoints.
    pub fn eval(&self, theta: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= theta);
        self.values[i.saturating_sub(1).min(self.values.len() - 1)]
    }

    pub fn integral(&self) -> f64 {
        self.pieces().map(|(v, w)| v * w).sum()
    }

    pub fn integral_between(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let lo = self.breakpoints[i].max(a);
            let hi = self.breakpoints[i + 1].min(b);
            if hi > lo {
                s += v * (hi - lo);
            }
        }
        s
    }

    /// `∫ (h - t)^+`.
    pub fn excess(&self, t: f64) -> f64 {
        self.pieces().map(|(v, w)| (v - t).max(0.0) * w).sum()
    }

    /// Exact distribution from the piece widths.
    pub fn distribution(&self) -> DistributionFn {
        let mut pieces: Vec<(f64, f64)> = self.pieces().collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut levels = Vec::new();
        let mut measures = Vec::new();
        let mut above: f64 = pieces.iter().map(|p| p.1).sum();
        let mut i = 0;
        while i < pieces.len() {
            let v = pieces[i].0;
            while i < pieces.len() && pieces[i].0 == v {
                above -= pieces[i].1;
                i += 1;
            }
            levels.push(v);
            measures.push(above.max(0.0));
        }
        if let Some(last) = measures.last_mut() {
            *last = 0.0;
        }
        DistributionFn { levels, measures }
    }

    /// The level sets of `h`, highest first, nested symmetrically about 0.
    pub fn rearrange(&self) -> StepFunction {
        let dist = self.distribution();
        // measure of {h ≥ level} for each distinct level, highest first
        let mut half_widths = Vec::new();
        let mut vals = Vec::new();
        for k in (0..dist.levels.len()).rev() {
            let ge = if k == 0 {
                2.0 * PI
            } else {
                dist.measures[k - 1]
            };
            half_widths.push(0.5 * ge);
            vals.push(dist.levels[k]);
        }
        let n = vals.len();
        let mut bps = Vec::with_capacity(2 * n);
        let mut values = Vec::with_capacity(2 * n - 1);
        for k in (0..n).rev() {
            bps.push(-half_widths[k]);
            values.push(vals[k]);
        }
        for k in 1..n {
            bps.push(half_widths[k - 1]);
            values.push(vals[k]);
        }
        bps.push(PI);
        bps[0] = -PI;
        // drop zero-width pieces left by rounding
        let mut b2 = vec![bps[0]];
        let mut v2 = Vec::new();
        for (i, v) in values.into_iter().enumerate() {
            if bps[i + 1] > *b2.last().unwrap() {
                b2.push(bps[i + 1]);
                v2.push(v);
            }
        }
        *b2.last_mut().unwrap() = PI;
        StepFunction {
            breakpoints: b2,
            values: v2,
        }
    }

    /// `h*(θ) = ∫_{-θ}^{θ} ĥ`.
    pub fn star_at(&self, theta: f64) -> f64 {
        let t = theta.clamp(0.0, PI);
        self.rearrange().integral_between(-t, t)
    }

    /// The `θ` at which `h*` changes slope.
    pub fn star_breakpoints(&self) -> Vec<f64> {
        let d = self.distribution();
        let mut out: Vec<f64> = d.measures.iter().map(|m| 0.5 * m).collect();
        out.push(0.0);
        out.push(PI);
        out
    }

    /// `(θ, ĥ(θ))` sample columns for export.
    pub fn sample(&self, grid: usize) -> SampledPeriodic {
        SampledPeriodic {
            values: (0..grid).map(|j| self.eval(grid_theta(j, grid))).collect(),
        }
    }
}

/// `h*(θ) = sup_{|E| = 2θ} ∫_E h`, filled greedily from the highest level.
pub fn star_function_by_sup(h: &StepFunction, theta: f64) -> f64 {
    let mut pieces: Vec<(f64, f64)> = h.pieces().collect();
    pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut budget = 2.0 * theta.clamp(0.0, PI);
    let mut s = 0.0;
    for (v, w) in pieces {
        let take = w.min(budget);
        s += v * take;
        budget -= take;
        if budget <= 0.0 {
            break;
        }
    }
    s
}

/// `λ(t) = |{h > t}|` as right-continuous step data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionFn {
    /// Distinct values taken, ascending.
    pub levels: Vec<f64>,
    /// `λ(levels[k])`.
    pub measures: Vec<f64>,
}

impl DistributionFn {
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.levels.partition_point(|&l| l <= t);
        if k == 0 {
            2.0 * PI
        } else {
            self.measures[k - 1]
        }
    }
}

/// Functions on `[-π, π]` comparable by majorization of their excess integrals.
pub trait Majorizable {
    /// Every distinct finite value.
    fn levels(&self) -> Vec<f64>;
    /// `∫ (h - t)^+`.
    fn excess(&self, t: f64) -> f64;
    fn excess_on(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter().map(|&t| self.excess(t)).collect()
    }
    /// `∫ Φ(h)` for `Φ = exp`.
    fn exp_integral(&self) -> f64;
    fn star_at(&self, theta: f64) -> f64;
    fn star_on(&self, thetas: &[f64]) -> Vec<f64> {
        thetas.iter().map(|&t| self.star_at(t)).collect()
    }
    /// Abscissae at which `h*` may change slope.
    fn star_nodes(&self) -> Vec<f64>;
}

impl Majorizable for StepFunction {
    fn levels(&self) -> Vec<f64> {
        self.values.clone()
    }

    fn excess(&self, t: f64) -> f64 {
        StepFunction::excess(self, t)
    }

    fn exp_integral(&self) -> f64 {
        self.pieces().map(|(v, w)| v.exp() * w).sum()
    }

    fn star_at(&self, theta: f64) -> f64 {
        StepFunction::star_at(self, theta)
    }

    fn star_nodes(&self) -> Vec<f64> {
        self.star_breakpoints()
    }
}

impl Majorizable for SampledPeriodic {
    fn levels(&self) -> Vec<f64> {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect()
    }

    fn excess(&self, t: f64) -> f64 {
        self.cell() * self.values.iter().map(|v| (v - t).max(0.0)).sum::<f64>()
    }

    fn excess_on(&self, ts: &[f64]) -> Vec<f64> {
        // suffix sums over the ascending samples
        let mut sorted: Vec<f64> = self
            .values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + sorted[i];
        }
        ts.iter()
            .map(|&t| {
                let i = sorted.partition_point(|&v| v <= t);
                self.cell() * (suffix[i] - (n - i) as f64 * t)
            })
            .collect()
    }

    fn exp_integral(&self) -> f64 {
        self.cell() * self.values.iter().map(|v| v.exp()).sum::<f64>()
    }

    fn star_at(&self, theta: f64) -> f64 {
        self.star_on(&[theta])[0]
    }

    fn star_on(&self, thetas: &[f64]) -> Vec<f64> {
        let star = self.star_function();
        let m = self.values.len() as f64;
        thetas
            .iter()
            .map(|&theta| {
                let x = theta.clamp(0.0, PI) * m / PI;
                let k = (x.floor() as usize).min(star.len() - 2);
                let u = x - k as f64;
                star[k] + u * (star[k + 1] - star[k])
            })
            .collect()
    }

    fn star_nodes(&self) -> Vec<f64> {
        self.star_thetas()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaernsteinReport {
    /// `∫Φ(h) ≤ ∫Φ(H)` for hinges at all levels, midpoints between them, and `exp`.
    pub holds_a_on_family: bool,
    /// `∫(h-t)^+ ≤ ∫(H-t)^+` at every merged level.
    pub holds_b: bool,
    /// `h* ≤ H*` at every star node of either function.
    pub holds_c: bool,
    pub worst_gap_b: f64,
    pub worst_gap_c: f64,
}

/// Absolute slack shared by the three statements.
pub const BAERNSTEIN_TOL: f64 = 1e-10;

/// Checks the three equivalent majorization statements for `h` against `H`.
/// A disagreement between the second and third beyond [`BAERNSTEIN_TOL`]
/// is an internal error.
pub fn check_baernstein<T: Majorizable>(h: &T, big_h: &T) -> Result<BaernsteinReport> {
    let mut levels: Vec<f64> = h.levels();
    levels.extend(big_h.levels());
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.is_empty() {
        return usage("both functions are identically -∞");
    }
    let lo = levels[0] - 1.0;
    let hi = levels[levels.len() - 1] + 1.0;
    let mut ts = vec![lo];
    ts.extend(levels.iter().copied());
    ts.push(hi);

    let worst_gap_b = h
        .excess_on(&ts)
        .into_iter()
        .zip(big_h.excess_on(&ts))
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut nodes = h.star_nodes();
    nodes.extend(big_h.star_nodes());
    let worst_gap_c = h
        .star_on(&nodes)
        .into_iter()
        .zip(big_h.star_on(&nodes))
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);

    let holds_b = worst_gap_b <= BAERNSTEIN_TOL;
    let holds_c = worst_gap_c <= BAERNSTEIN_TOL;
    if holds_b != holds_c && (worst_gap_b - worst_gap_c).abs() > BAERNSTEIN_TOL {
        return Err(Error::Internal(format!(
            "majorization verdicts disagree: excess gap {worst_gap_b:e}, star gap {worst_gap_c:e}"
        )));
    }

    let mut spot: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    spot.extend(ts.iter().copied());
    let hinges_hold = h
        .excess_on(&spot)
        .into_iter()
        .zip(big_h.excess_on(&spot))
        .all(|(a, b)| a <= b + BAERNSTEIN_TOL);
    let (eh, eh_big) = (h.exp_integral(), big_h.exp_integral());
    let exp_holds = eh <= eh_big + BAERNSTEIN_TOL * eh_big.abs().max(1.0);

    Ok(BaernsteinReport {
        holds_a_on_family: hinges_hold && exp_holds,
        holds_b,
        holds_c,
        worst_gap_b,
        worst_gap_c,
    })
}

/// Two-column `theta,value` CSV.
pub fn write_profile_csv<W: Write>(out: W, thetas: &[f64], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "value"])?;
    for (t, v) in thetas.iter().zip(values) {
        w.write_record([format!("{t:.17e}"), format!("{v:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}
