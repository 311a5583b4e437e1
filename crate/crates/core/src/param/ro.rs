//! RO membership certificates, Matuszewska index estimates and the weight
//! condition for the radial symbol `phi(<xi>)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ParamExpr;
use crate::error::{Error, Result};
use crate::logdomain::{LogGrid, DEFAULT_DENSITY};

/// Largest rise `max_{i <= j} (v[j] - v[i])` with its argmax `(i, j)`.
/// The value is never negative (`i == j` is allowed).
pub(crate) fn max_rise(values: impl IntoIterator<Item = f64>) -> (f64, usize, usize) {
    let mut best = (0.0, 0, 0);
    let mut low = f64::INFINITY;
    let mut low_at = 0;
    for (j, v) in values.into_iter().enumerate() {
        if v < low {
            low = v;
            low_at = j;
        }
        let rise = v - low;
        if rise > best.0 {
            best = (rise, low_at, j);
        }
    }
    best
}

/// `log c` needed for the upper bound of the two-sided power estimate at
/// exponent `s`, with the worst pair.
fn upper_log_c(xs: &[f64], ys: &[f64], s: f64) -> (f64, usize, usize) {
    max_rise(xs.iter().zip(ys).map(|(x, y)| y - s * x))
}

fn lower_log_c(xs: &[f64], ys: &[f64], s: f64) -> (f64, usize, usize) {
    max_rise(xs.iter().zip(ys).map(|(x, y)| s * x - y))
}

/// Settings for index estimation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IndexConfig {
    /// Smallest ratio `lambda` used in slope quotients.
    pub lambda_min: f64,
    /// Grid density in points per decade of `t`.
    pub density: f64,
    /// Number of nested windows used for extrapolation.
    pub windows: usize,
    /// Window width relative to `1 + log t` at the window top.
    pub window_fraction: f64,
    /// Cap on `c` when flagging attainment of the inf/sup.
    pub cap: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            lambda_min: 2.0,
            density: DEFAULT_DENSITY,
            windows: 3,
            window_fraction: 0.25,
            cap: 1e6,
        }
    }
}

/// Lower and upper slope estimates inside one window of `x = log t`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WindowSlopes {
    pub x_lo: f64,
    pub x_hi: f64,
    pub inf: f64,
    pub sup: f64,
}

/// Estimated lower/upper Matuszewska indices.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IndexEstimate {
    pub sigma0: f64,
    pub sigma1: f64,
    /// Half-width of the numerical uncertainty.
    pub bracket: f64,
    /// The lower power bound holds at `s0 = sigma0` with `c` below the cap
    /// on the sampled grid. Grid-resolution evidence only.
    pub lower_attained: bool,
    pub upper_attained: bool,
    pub log_t_max: f64,
    pub windows: Vec<WindowSlopes>,
    pub extrapolated: bool,
}

/// Window estimate of the lower/upper index. For a span `l`, the sup over
/// `x` of `y(x + l) - y(x)` is subadditive in `l`, so the upper index is
/// the infimum over spans of the sup slope; symmetrically for the lower one.
/// Spans run geometrically from `l_min` to the full window width.
fn window_slopes(phi: &ParamExpr, x_lo: f64, x_hi: f64, density: f64, l_min: f64) -> Result<(f64, f64)> {
    let width = x_hi - x_lo;
    let points = ((width / std::f64::consts::LN_10 * density).ceil() as usize + 1).max(64);
    let grid = LogGrid::new(x_lo, x_hi, points);
    let xs = grid.nodes();
    let ys = phi.log_eval_many(&xs)?;
    let m = ((l_min / grid.step()) - 1e-9).ceil().max(1.0) as usize;
    if m > points - 1 {
        return Err(Error::invalid("range too short for the configured lambda_min"));
    }
    let mut spans = vec![points - 1];
    let mut d = m as f64;
    while (d.round() as usize) < points - 1 {
        spans.push(d.round() as usize);
        d *= 2f64.powf(0.25);
    }
    spans.sort_unstable();
    spans.dedup();
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for d in spans {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..points - d {
            let s = (ys[i + d] - ys[i]) / (xs[i + d] - xs[i]);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        lower = lower.max(lo);
        upper = upper.min(hi);
    }
    Ok((lower, upper))
}

/// Aitken extrapolation of a sequence ordered from the largest scale down.
/// Only applied when the differences shrink geometrically toward the large
/// scale with a rate of at least `2^{1/4}`.
fn aitken(v: &[f64]) -> Option<f64> {
    if v.len() < 3 {
        return None;
    }
    let d0 = v[0] - v[1];
    let d1 = v[1] - v[2];
    if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() || d0.abs() >= d1.abs() {
        return None;
    }
    let r = d1 / d0;
    if r < 2f64.powf(0.25) {
        return None;
    }
    Some(v[0] + d0 / (r - 1.0))
}

struct RawIndices {
    sigma0: f64,
    sigma1: f64,
    crossing: f64,
    windows: Vec<WindowSlopes>,
    /// Whether Aitken was applied to the inf and sup sequences.
    extrapolated: (bool, bool),
}

/// `follow` replays the extrapolation choices of another run, so that a
/// density comparison does not switch estimator branches.
fn raw_indices(
    phi: &ParamExpr,
    log_t_max: f64,
    cfg: &IndexConfig,
    density: f64,
    follow: Option<(bool, bool)>,
) -> Result<RawIndices> {
    let l_min = cfg.lambda_min.ln();
    let mut windows = Vec::new();
    for k in 0..cfg.windows.max(1) {
        // windows nest geometrically in 1 + log t
        let top = (1.0 + log_t_max) / 2f64.powi(k as i32) - 1.0;
        let bottom = top - cfg.window_fraction * (1.0 + top);
        if bottom < 0.0 || top - bottom < 1.01 * l_min {
            break;
        }
        let (inf, sup) = window_slopes(phi, bottom, top, density, l_min)?;
        windows.push(WindowSlopes {
            x_lo: bottom,
            x_hi: top,
            inf,
            sup,
        });
    }
    if windows.is_empty() {
        if log_t_max < 1.01 * l_min {
            return Err(Error::invalid(format!(
                "log t_max = {log_t_max} is shorter than log lambda_min = {l_min}"
            )));
        }
        let (inf, sup) = window_slopes(phi, 0.0, log_t_max, density, l_min)?;
        windows.push(WindowSlopes {
            x_lo: 0.0,
            x_hi: log_t_max,
            inf,
            sup,
        });
    }
    let infs: Vec<f64> = windows.iter().map(|w| w.inf).collect();
    let sups: Vec<f64> = windows.iter().map(|w| w.sup).collect();
    let (mut lo, mut hi) = (aitken(&infs), aitken(&sups));
    if let Some((use_lo, use_hi)) = follow {
        lo = lo.filter(|_| use_lo);
        hi = hi.filter(|_| use_hi);
    }
    let extrapolated = (lo.is_some(), hi.is_some());
    let mut sigma0 = lo.unwrap_or(infs[0]);
    let mut sigma1 = hi.unwrap_or(sups[0]);
    let mut crossing = 0.0;
    if sigma0 > sigma1 {
        crossing = 0.5 * (sigma0 - sigma1);
        let mid = 0.5 * (sigma0 + sigma1);
        sigma0 = mid;
        sigma1 = mid;
    }
    Ok(RawIndices {
        sigma0,
        sigma1,
        crossing,
        windows,
        extrapolated,
    })
}

/// Estimates the Matuszewska indices of `phi` from ratio slopes
/// `[log phi(lambda t) - log phi(t)] / log lambda`, `lambda >= lambda_min`.
///
/// Slopes are taken inside nested windows near `t_max` and, when the
/// window sequence converges geometrically, extrapolated by Aitken's delta
/// squared. `bracket` combines the sensitivity to halving the grid density
/// with any disagreement between the extrapolated inf and sup.
pub fn matuszewska_indices(phi: &ParamExpr, log_t_max: f64, cfg: &IndexConfig) -> Result<IndexEstimate> {
    if !(log_t_max.is_finite() && log_t_max > 0.0) {
        return Err(Error::invalid("log t_max must be positive and finite"));
    }
    if !(cfg.lambda_min > 1.0) || !(cfg.density >= 8.0) {
        return Err(Error::invalid("need lambda_min > 1 and density >= 8"));
    }
    let fine = raw_indices(phi, log_t_max, cfg, cfg.density, None)?;
    let coarse = raw_indices(phi, log_t_max, cfg, cfg.density / 2.0, Some(fine.extrapolated))?;
    let sensitivity = (fine.sigma0 - coarse.sigma0)
        .abs()
        .max((fine.sigma1 - coarse.sigma1).abs());
    let bracket = sensitivity.max(fine.crossing);

    let grid = LogGrid::with_density(0.0, log_t_max, cfg.density);
    let xs = grid.nodes();
    let ys = phi.log_eval_many(&xs)?;
    let log_cap = cfg.cap.ln();
    Ok(IndexEstimate {
        sigma0: fine.sigma0,
        sigma1: fine.sigma1,
        bracket,
        lower_attained: lower_log_c(&xs, &ys, fine.sigma0).0 <= log_cap,
        upper_attained: upper_log_c(&xs, &ys, fine.sigma1).0 <= log_cap,
        log_t_max,
        windows: fine.windows,
        extrapolated: fine.extrapolated.0 || fine.extrapolated.1,
    })
}

/// Smallest `log c` for which the two-sided power estimate with exponents
/// `(s0, s1)` holds at all pairs `(t, lambda t)`, `lambda >= 1`, of the given
/// sorted `log t` points.
pub fn ro_log_constant(phi: &ParamExpr, log_points: &[f64], s0: f64, s1: f64) -> Result<f64> {
    if log_points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("points must be sorted"));
    }
    let ys = phi.log_eval_many(log_points)?;
    Ok(upper_log_c(log_points, &ys, s1)
        .0
        .max(lower_log_c(log_points, &ys, s0).0))
}

/// Settings for [`ro_membership`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RoConfig {
    /// Largest admissible constant `c`.
    pub cap: f64,
    /// Exponents beyond this magnitude are treated as "no power bound".
    pub max_exponent: f64,
    pub index: IndexConfig,
}

impl Default for RoConfig {
    fn default() -> Self {
        Self {
            cap: 1e6,
            max_exponent: 1e3,
            index: IndexConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// A sampled pair `(t, lambda t)` at which no admissible constant exists.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RoWitness {
    pub log_t: f64,
    pub log_lambda: f64,
    pub side: BoundSide,
    /// `log phi(lambda t) - log phi(t)`
    pub log_ratio: f64,
}

/// Certificate (or counterwitness) for the two-sided power estimate
/// `c^{-1} lambda^{s0} <= phi(lambda t)/phi(t) <= c lambda^{s1}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RoReport {
    pub is_member: bool,
    pub s0: f64,
    pub s1: f64,
    pub c: f64,
    pub log_c: f64,
    pub witness: Option<RoWitness>,
    pub grid: LogGrid,
    pub cap: f64,
    pub indices: IndexEstimate,
}

impl RoReport {
    /// Re-checks the certificate at every sampled pair.
    pub fn holds_on_grid(&self, phi: &ParamExpr, slack: f64) -> Result<bool> {
        let xs = self.grid.nodes();
        let ys = phi.log_eval_many(&xs)?;
        let up = upper_log_c(&xs, &ys, self.s1).0;
        let lo = lower_log_c(&xs, &ys, self.s0).0;
        Ok(up <= self.log_c + slack && lo <= self.log_c + slack)
    }
}

/// Smallest `s` in `[-bound, bound]` with `f(s) <= target`, `f` nonincreasing.
fn bisect_down(f: impl Fn(f64) -> f64, bound: f64, target: f64) -> Option<f64> {
    let (mut lo, mut hi) = (-bound, bound);
    if f(hi) > target {
        return None;
    }
    if f(lo) <= target {
        return Some(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    Some(hi)
}

/// Searches for exponents `s0 <= s1` and a constant `c` satisfying the
/// two-sided power estimate at all pairs `(t, lambda t)` of a geometric grid
/// with `samples` points in `[1, t_max]`.
///
/// Exponents start from the index estimate widened by its bracket; they are
/// widened further only as far as needed to keep `c` below the cap. The
/// check runs in log domain via running extrema, so every pair of the grid
/// is covered in linear time.
pub fn ro_membership(phi: &ParamExpr, log_t_max: f64, samples: usize, cfg: &RoConfig) -> Result<RoReport> {
    if !(log_t_max >= std::f64::consts::LN_10) || !log_t_max.is_finite() {
        return Err(Error::invalid("t_max must be at least 10"));
    }
    if samples < 64 {
        return Err(Error::invalid("need at least 64 samples"));
    }
    if !(cfg.cap >= 1.0) {
        return Err(Error::invalid("cap must be at least 1"));
    }
    let grid = LogGrid::new(0.0, log_t_max, samples);
    let xs = grid.nodes();
    let ys = phi.log_eval_many(&xs)?;

    let decades = log_t_max / std::f64::consts::LN_10;
    let index_cfg = IndexConfig {
        density: (samples as f64 / decades).max(8.0),
        cap: cfg.cap,
        ..cfg.index.clone()
    };
    let indices = matuszewska_indices(phi, log_t_max, &index_cfg)?;
    let log_cap = cfg.cap.ln();

    let s1_min = bisect_down(|s| upper_log_c(&xs, &ys, s).0, cfg.max_exponent, log_cap);
    let s0_max = bisect_down(|s| lower_log_c(&xs, &ys, -s).0, cfg.max_exponent, log_cap).map(|s| -s);

    let witness_at = |side: BoundSide| {
        let (_, i, j) = match side {
            BoundSide::Upper => upper_log_c(&xs, &ys, cfg.max_exponent),
            BoundSide::Lower => lower_log_c(&xs, &ys, -cfg.max_exponent),
        };
        RoWitness {
            log_t: xs[i],
            log_lambda: xs[j] - xs[i],
            side,
            log_ratio: ys[j] - ys[i],
        }
    };

    match (s0_max, s1_min) {
        (Some(s0_max), Some(s1_min)) => {
            let s1 = (indices.sigma1 + indices.bracket).max(s1_min);
            let s0 = (indices.sigma0 - indices.bracket).min(s0_max);
            let (s0, s1) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
            let log_c = upper_log_c(&xs, &ys, s1).0.max(lower_log_c(&xs, &ys, s0).0);
            Ok(RoReport {
                is_member: log_c <= log_cap,
                s0,
                s1,
                c: log_c.exp(),
                log_c,
                witness: None,
                grid,
                cap: cfg.cap,
                indices,
            })
        }
        (lo, hi) => {
            let side = if hi.is_none() {
                BoundSide::Upper
            } else {
                BoundSide::Lower
            };
            let s0 = lo.unwrap_or(-cfg.max_exponent);
            let s1 = hi.unwrap_or(cfg.max_exponent);
            let log_c = upper_log_c(&xs, &ys, s1).0.max(lower_log_c(&xs, &ys, s0).0);
            Ok(RoReport {
                is_member: false,
                s0,
                s1,
                c: log_c.exp(),
                log_c,
                witness: Some(witness_at(side)),
                grid,
                cap: cfg.cap,
                indices,
            })
        }
    }
}

/// Sampling settings for [`check_weight_condition`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WeightConfig {
    pub dim: usize,
    pub radial_points: usize,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            radial_points: 160,
            random_pairs: 4000,
            seed: 7,
        }
    }
}

/// Constants of `phi(<xi>)/phi(<eta>) <= c (1 + |xi - eta|)^l`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WeightCondition {
    pub l: f64,
    pub c: f64,
    pub log_c: f64,
    pub pairs_checked: usize,
    /// `(|xi|, |eta|, |xi - eta|)` at the largest observed ratio.
    pub worst: [f64; 3],
}

fn log_bracket(r: f64) -> f64 {
    // log <xi> = log sqrt(1 + r^2)
    0.5 * (r * r).ln_1p()
}

/// Checks that `mu(xi) = phi(<xi>)` is a weight function with exponent
/// `l = max{0, -s0, s1}` taken from an RO certificate. Returns the largest
/// observed ratio over a sampled set of pairs in `R^dim` (the diagonal
/// included, so `c >= 1`).
pub fn check_weight_condition(phi: &ParamExpr, report: &RoReport, cfg: &WeightConfig) -> Result<WeightCondition> {
    if !report.is_member {
        return Err(Error::Precondition("parameter has no RO certificate".into()));
    }
    if cfg.dim == 0 || cfg.radial_points < 2 {
        return Err(Error::invalid("need dim >= 1 and at least two radial points"));
    }
    let l = 0f64.max(-report.s0).max(report.s1);
    let log_t_max = report.grid.x_max;
    // |xi| such that <xi> = t_max
    let r_max = if log_t_max > 300.0 {
        log_t_max.exp()
    } else {
        ((2.0 * log_t_max).exp() - 1.0).sqrt()
    };
    if !r_max.is_finite() {
        return Err(Error::invalid("t_max too large for sampling frequency pairs"));
    }

    let mut radii = vec![0.0];
    let lg = LogGrid::new(-3.0, r_max.ln(), cfg.radial_points);
    radii.extend(lg.nodes().into_iter().map(f64::exp));
    let logs: Vec<f64> = radii
        .iter()
        .map(|&r| phi.log_eval(log_bracket(r)))
        .collect::<Result<_>>()?;

    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    let mut count = 0usize;
    let mut consider = |lr: f64, a: f64, b: f64, dist: f64| {
        let v = lr - l * dist.ln_1p();
        count += 1;
        if v > best.0 {
            best = (v, [a, b, dist]);
        }
    };

    // collinear, same direction: |xi - eta| = ||xi| - |eta||
    for (i, &a) in radii.iter().enumerate() {
        for (j, &b) in radii.iter().enumerate() {
            consider(logs[i] - logs[j], a, b, (a - b).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = radii.len();
    for _ in 0..cfg.random_pairs {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let u = random_unit(&mut rng, cfg.dim);
        let v = random_unit(&mut rng, cfg.dim);
        let dist = u
            .iter()
            .zip(&v)
            .map(|(p, q)| (radii[i] * p - radii[j] * q).powi(2))
            .sum::<f64>()
            .sqrt();
        consider(logs[i] - logs[j], radii[i], radii[j], dist);
    }

    Ok(WeightCondition {
        l,
        c: best.0.exp(),
        log_c: best.0,
        pairs_checked: count,
        worst: best.1,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}
