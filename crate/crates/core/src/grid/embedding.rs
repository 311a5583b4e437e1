//! Power-sandwich constants `c0 t^{s0} <= phi(t) <= c1 t^{s1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::LogGrid;
use crate::param::{BoundSide, ParamExpr};

/// First `log t` where a constant outside `[1/cap, cap]` becomes necessary.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbeddingWitness {
    pub log_t: f64,
    pub side: BoundSide,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbeddingScan {
    pub s0: f64,
    pub s1: f64,
    pub log_t_max: f64,
    /// `min log(phi(t) / t^{s0})`
    pub log_c0: f64,
    /// `max log(phi(t) / t^{s1})`
    pub log_c1: f64,
    pub c0: f64,
    pub c1: f64,
    pub finite: bool,
    pub counterwitness: Option<EmbeddingWitness>,
}

/// Scans a geometric grid of `[1, t_max]` in log domain for the extremal
/// constants of `c0 t^{s0} <= phi(t) <= c1 t^{s1}`. The constants count as
/// finite when `1/cap <= c0` and `c1 <= cap`.
pub fn embedding_scan(
    phi: &ParamExpr,
    s0: f64,
    s1: f64,
    log_t_max: f64,
    density: f64,
    cap: f64,
) -> Result<EmbeddingScan> {
    if !(s0.is_finite() && s1.is_finite()) || s0 >= s1 {
        return Err(Error::invalid(format!("need s0 < s1, got s0 = {s0}, s1 = {s1}")));
    }
    if !(log_t_max > 0.0 && log_t_max.is_finite()) || !(density >= 8.0) || !(cap >= 1.0) {
        return Err(Error::invalid("need t_max > 1, density >= 8 and cap >= 1"));
    }
    let log_cap = cap.ln();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut witness = None;
    for x in LogGrid::with_density(0.0, log_t_max, density).nodes() {
        let y = phi.log_eval(x)?;
        lo = lo.min(y - s0 * x);
        hi = hi.max(y - s1 * x);
        if witness.is_none() {
            if hi > log_cap {
                witness = Some(EmbeddingWitness {
                    log_t: x,
                    side: BoundSide::Upper,
                });
            } else if -lo > log_cap {
                witness = Some(EmbeddingWitness {
                    log_t: x,
                    side: BoundSide::Lower,
                });
            }
        }
    }
    Ok(EmbeddingScan {
        s0,
        s1,
        log_t_max,
        log_c0: lo,
        log_c1: hi,
        c0: lo.exp(),
        c1: hi.exp(),
        finite: witness.is_none(),
        counterwitness: witness,
    })
}
