//! The oscillating slowly varying parameter
//! `phi(t) = t^{h(t)} + log t` (`t >= 3`, `1` below) with
//! `h(t) = (log t)^{-1/2} sin((log t)^{1/4})`, and the sequences
//! `t_k = exp((2 pi k + pi/2)^4)`, `s_k = exp((2 pi k + pi)^4)` on which its
//! ratios blow up. Everything is evaluated at `x = log t`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::log_add_exp;
use crate::param::{
    self, matuszewska_indices, pseudoconcavity_test, IndexConfig, IndexEstimate, ParamExpr, PseudoconcavityConfig,
    PseudoconcavityReport,
};
use crate::spectral::rank_one_witness;

/// `log phi(e^x)`; `0` on `x < log 3`, including negative `x`.
pub(crate) fn appendix_log_phi_unchecked(x: f64) -> f64 {
    if x < 3f64.ln() {
        0.0
    } else {
        // h(t) log t = x^{1/2} sin(x^{1/4})
        log_add_exp(x.sqrt() * x.powf(0.25).sin(), x.ln())
    }
}

/// `log phi(e^x)` for `x >= 0`.
pub fn appendix_log_phi(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log t = {x} is outside [0, inf)")));
    }
    Ok(appendix_log_phi_unchecked(x))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SequencePair {
    pub k: u32,
    pub log_t_k: f64,
    pub log_s_k: f64,
}

pub fn sequence_pair(k: u32) -> Result<SequencePair> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let base = 2.0 * PI * k as f64;
    Ok(SequencePair {
        k,
        log_t_k: (base + PI / 2.0).powi(4),
        log_s_k: (base + PI).powi(4),
    })
}

/// All `log t_k`, `log s_k` for `k = 1..=k_max`, increasing.
pub fn sequence_log_points(k_max: u32) -> Result<Vec<f64>> {
    let mut pts = Vec::new();
    for k in 1..=k_max {
        let p = sequence_pair(k)?;
        pts.push(p.log_t_k);
        pts.push(p.log_s_k);
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RatioBound {
    pub k: u32,
    /// `(2 pi k + pi/2)^2 - log(1 + (2 pi k + pi)^4)`
    pub bound: f64,
    /// `log phi(t_k) - log phi(s_k)`
    pub observed: f64,
    pub holds: bool,
}

/// Lower bound for `log(phi(t_k)/phi(s_k))` from the closed forms, checked
/// against direct evaluation.
pub fn ratio_log_lower_bound(k: u32) -> Result<RatioBound> {
    let p = sequence_pair(k)?;
    let a = 2.0 * PI * k as f64 + PI / 2.0;
    let b = 2.0 * PI * k as f64 + PI;
    let bound = a * a - b.powi(4).ln_1p();
    let observed = appendix_log_phi(p.log_t_k)? - appendix_log_phi(p.log_s_k)?;
    Ok(RatioBound {
        k,
        bound,
        observed,
        holds: observed >= bound - 1e-9,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DeviationRow {
    pub x: f64,
    /// `max |phi(lambda t)/phi(t) - 1|` over the lambda set
    pub deviation: f64,
    pub worst_lambda: f64,
}

/// Largest `|phi(lambda t)/phi(t) - 1|` over `lambdas` at each `x = log t`.
pub fn slow_variation_profile(lambdas: &[f64], xs: &[f64]) -> Result<Vec<DeviationRow>> {
    if lambdas.is_empty() {
        return Err(Error::invalid("need at least one lambda"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 1.0 && **l <= 2.0)) {
        return Err(Error::invalid(format!("lambda = {l} outside [1, 2]")));
    }
    xs.iter()
        .map(|&x| {
            if !(x >= 3f64.ln()) || !x.is_finite() {
                return Err(Error::invalid(format!("log t = {x} is below log 3")));
            }
            let base = appendix_log_phi(x)?;
            let mut row = DeviationRow {
                x,
                deviation: 0.0,
                worst_lambda: lambdas[0],
            };
            for &l in lambdas {
                let d = (appendix_log_phi(x + l.ln())? - base).exp_m1().abs();
                if d > row.deviation {
                    row.deviation = d;
                    row.worst_lambda = l;
                }
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct WitnessRow {
    pub k: u32,
    pub bound: f64,
    pub witness: f64,
}

/// Rank-one witnesses `e_{s_k} -> e_{t_k}` for the couple
/// `[H^{(0)}, H^{(1)}]` with `psi = phi`, `k = 1..=k_max`.
pub fn non_interpolation_demo(k_max: u32) -> Result<Vec<WitnessRow>> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let psi = param::psi_from_phi(&ParamExpr::Appendix, 0.0, 1.0)?;
    (1..=k_max)
        .map(|k| {
            let p = sequence_pair(k)?;
            Ok(WitnessRow {
                k,
                bound: ratio_log_lower_bound(k)?.bound,
                witness: rank_one_witness(&psi, p.log_s_k, p.log_t_k)?,
            })
        })
        .collect()
}

/// Evidence that `H^phi` is an interpolation space for
/// `[H^{(-eps)}, H^{(1)}]`: both indices strictly inside `(-eps, 1)` and the
/// derived `psi` pseudoconcave on `[1, tau_max)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PositiveSide {
    pub eps: f64,
    pub indices: IndexEstimate,
    pub pseudoconcavity: PseudoconcavityReport,
    pub holds: bool,
}

pub fn positive_side_check(eps: f64, log_t_max: f64, cfg: &PseudoconcavityConfig) -> Result<PositiveSide> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid("eps must be positive"));
    }
    let indices = matuszewska_indices(&ParamExpr::Appendix, log_t_max, &IndexConfig::default())?;
    let psi = param::psi_from_phi(&ParamExpr::Appendix, -eps, 1.0)?;
    // tau = t^{1 + eps}
    let pc = pseudoconcavity_test(&psi, 1.0, (1.0 + eps) * log_t_max, cfg)?;
    let inside = indices.sigma0 - indices.bracket > -eps && indices.sigma1 + indices.bracket < 1.0;
    Ok(PositiveSide {
        eps,
        holds: inside && pc.passes,
        indices,
        pseudoconcavity: pc,
    })
}

pub fn witness_csv(rows: &[WitnessRow]) -> String {
    let mut s = String::from("k,bound,witness\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.k, r.bound, r.witness);
    }
    s
}

pub fn profile_csv(rows: &[DeviationRow]) -> String {
    let mut s = String::from("x,lambda,deviation\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.x, r.worst_lambda, r.deviation);
    }
    s
}
