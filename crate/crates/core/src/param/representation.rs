//! Parameters built from the representation
//! `phi(t) = exp(beta(t) + int_1^t eps(s)/s ds)`.

use super::expr::Representation;
use super::ParamExpr;
use crate::error::{Error, Result};
use crate::logdomain::LogGrid;

/// Builds `phi` from `beta` and `eps` sampled at `log_nodes` (`x = log t`,
/// starting at `0`). The integral is the trapezoid rule in `x`.
pub fn build_from_representation(log_nodes: Vec<f64>, beta: Vec<f64>, eps: Vec<f64>) -> Result<ParamExpr> {
    if let (Some(a), Some(b)) = (log_nodes.first(), log_nodes.last()) {
        if !(b > a) {
            return Err(Error::invalid("sample range has non-positive length"));
        }
    }
    Ok(ParamExpr::Representation(Representation::new(log_nodes, beta, eps)?))
}

/// Samples `beta` and `eps` (functions of `t`, given here as functions of
/// `x = log t`) at `nodes` geometrically spaced points of `[1, t_max]` and
/// builds the representation.
pub fn sample_representation(
    beta: impl Fn(f64) -> f64,
    eps: impl Fn(f64) -> f64,
    log_t_max: f64,
    nodes: usize,
) -> Result<ParamExpr> {
    if !(log_t_max > 0.0) || !log_t_max.is_finite() || nodes < 2 {
        return Err(Error::invalid("need log t_max > 0 and at least two nodes"));
    }
    let xs = LogGrid::new(0.0, log_t_max, nodes).nodes();
    let b = xs.iter().map(|&x| beta(x)).collect();
    let e = xs.iter().map(|&x| eps(x)).collect();
    build_from_representation(xs, b, e)
}
