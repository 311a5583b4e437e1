//! Least concave majorants and the pseudoconcavity (Peetre) test.

use serde::{Deserialize, Serialize};

use super::expr::PiecewiseLinear;
use super::ParamExpr;
use crate::error::{Error, Result};
use crate::logdomain::{LogGrid, DEFAULT_DENSITY};

/// Piecewise-linear concave majorant of a sample set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConcaveMajorant {
    /// Vertices of the upper hull, collinear points included.
    pub hull: Vec<[f64; 2]>,
    /// The hull, continued by its end tangents. Equals the samples at every
    /// hull vertex.
    pub majorant: ParamExpr,
    /// Value of the left tangent line at `t = 0`.
    pub intercept: f64,
    /// `|intercept| + 1` when the left tangent dips to `<= 0`, else `0`.
    pub shift: f64,
    /// `majorant + shift`: concave and positive on `(0, t_last]`.
    pub envelope: ParamExpr,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Upper concave hull (monotone chain). A middle point is dropped only on a
/// strict convex turn, so collinear samples stay vertices.
pub fn upper_hull(samples: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(samples.len());
    for &p in samples {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) > 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Least concave majorant of sorted `(t, value)` samples.
///
/// Left of the first hull vertex the first hull segment is continued as a
/// tangent line; right of the last vertex the last segment is continued.
/// If the left tangent is not positive at `0`, `envelope` lifts everything
/// by `|intercept| + 1`; no positive concave function can match the hull
/// vertices in that case.
pub fn concave_majorant(samples: &[[f64; 2]]) -> Result<ConcaveMajorant> {
    if samples.len() < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    for p in samples {
        if !(p[0].is_finite() && p[1].is_finite()) || !(p[0] > 0.0) || !(p[1] > 0.0) {
            return Err(Error::invalid(format!(
                "sample ({}, {}) is not positive and finite",
                p[0], p[1]
            )));
        }
    }
    if samples.windows(2).any(|w| !(w[1][0] > w[0][0])) {
        return Err(Error::invalid("abscissae must be strictly increasing"));
    }
    let hull = upper_hull(samples);
    let slope = |a: [f64; 2], b: [f64; 2]| (b[1] - a[1]) / (b[0] - a[0]);
    let k = hull.len();
    let left_slope = slope(hull[0], hull[1]);
    let right_slope = slope(hull[k - 2], hull[k - 1]);
    let intercept = hull[0][1] - left_slope * hull[0][0];
    let shift = if intercept <= 0.0 { intercept.abs() + 1.0 } else { 0.0 };
    let pl = PiecewiseLinear {
        knots: hull.clone(),
        left_slope,
        right_slope,
        shift: 0.0,
    };
    let envelope = ParamExpr::PiecewiseLinear(PiecewiseLinear { shift, ..pl.clone() });
    Ok(ConcaveMajorant {
        hull,
        majorant: ParamExpr::PiecewiseLinear(pl),
        intercept,
        shift,
        envelope,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PseudoconcavityConfig {
    pub density: f64,
    pub cap: f64,
    /// Additional `log t` points merged into the grid.
    pub extra_log_points: Vec<f64>,
}

impl Default for PseudoconcavityConfig {
    fn default() -> Self {
        Self {
            density: DEFAULT_DENSITY,
            cap: 1e6,
            extra_log_points: Vec::new(),
        }
    }
}

/// Result of [`pseudoconcavity_test`]. Pairs are reported in `log t`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PseudoconcavityReport {
    pub r: f64,
    pub log_t_max: f64,
    pub points: usize,
    pub c_best: f64,
    pub log_c_best: f64,
    /// `(log t, log tau)` attaining `c_best`.
    pub worst_pair: [f64; 2],
    pub passes: bool,
    pub cap: f64,
    /// Largest grid point `log b` such that the test restricted to
    /// `(r, b]` passes. `None` when the whole grid passes.
    pub passes_below: Option<f64>,
}

struct PeetreScan {
    log_c: f64,
    pair: [f64; 2],
    first_violation: Option<usize>,
}

/// Linear-time scan over sorted `xs`: for `t <= tau` the worst ratio uses
/// the running max of `log psi`, for `t > tau` the running min of
/// `log psi - log tau`.
fn peetre_scan(xs: &[f64], ys: &[f64], log_cap: f64) -> PeetreScan {
    let mut best = 0.0;
    let mut pair = [xs[0], xs[0]];
    let mut first_violation = None;
    let (mut hi, mut lo) = (0usize, 0usize);
    for j in 0..xs.len() {
        if ys[j] > ys[hi] {
            hi = j;
        }
        let a = ys[hi] - ys[j];
        if a > best {
            best = a;
            pair = [xs[hi], xs[j]];
        }
        let b = (ys[j] - xs[j]) - (ys[lo] - xs[lo]);
        if b > best {
            best = b;
            pair = [xs[j], xs[lo]];
        }
        if ys[j] - xs[j] < ys[lo] - xs[lo] {
            lo = j;
        }
        if first_violation.is_none() && best > log_cap {
            first_violation = Some(j);
        }
    }
    PeetreScan {
        log_c: best,
        pair,
        first_violation,
    }
}

/// `log c_best` of the Peetre inequality over all ordered pairs of the
/// given `log t` points, with the worst pair.
pub fn peetre_log_constant(psi: &ParamExpr, log_points: &[f64]) -> Result<(f64, [f64; 2])> {
    if log_points.is_empty() {
        return Err(Error::invalid("need at least one point"));
    }
    let mut xs = log_points.to_vec();
    xs.sort_by(f64::total_cmp);
    let ys = psi.log_eval_many(&xs)?;
    let scan = peetre_scan(&xs, &ys, f64::INFINITY);
    Ok((scan.log_c, scan.pair))
}

/// Smallest `c` with `psi(t)/psi(tau) <= c max{1, t/tau}` over all ordered
/// pairs of a geometric grid on `(r, t_max]` (from `1/t_max` when `r = 0`),
/// evaluated in log domain in linear time.
pub fn pseudoconcavity_test(
    psi: &ParamExpr,
    r: f64,
    log_t_max: f64,
    cfg: &PseudoconcavityConfig,
) -> Result<PseudoconcavityReport> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid("r must be finite and >= 0"));
    }
    if !log_t_max.is_finite() || !(log_t_max > r.max(1.0).ln()) || !(log_t_max > 0.0) {
        return Err(Error::invalid("need t_max > max(r, 1)"));
    }
    if !(cfg.density >= 8.0) || !(cfg.cap >= 1.0) {
        return Err(Error::invalid("need density >= 8 and cap >= 1"));
    }
    let x_lo = if r > 0.0 { r.ln() } else { -log_t_max };
    let mut xs = LogGrid::with_density(x_lo, log_t_max, cfg.density).nodes();
    xs.remove(0);
    for &x in &cfg.extra_log_points {
        if !(x > x_lo && x <= log_t_max) {
            return Err(Error::invalid(format!(
                "extra point log t = {x} outside (log r, log t_max]"
            )));
        }
        xs.push(x);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys = psi.log_eval_many(&xs)?;
    let log_cap = cfg.cap.ln();
    let scan = peetre_scan(&xs, &ys, log_cap);
    let passes_below = scan.first_violation.map(|j| if j > 0 { xs[j - 1] } else { x_lo });
    let best = scan.log_c;
    let pair = scan.pair;
    Ok(PseudoconcavityReport {
        r,
        log_t_max,
        points: xs.len(),
        c_best: best.exp(),
        log_c_best: best,
        worst_pair: pair,
        passes: best <= log_cap,
        cap: cfg.cap,
        passes_below,
    })
}
