//! Transforms between parameters `phi` and interpolation parameters `psi`,
//! and reiteration composition.

use serde::{Deserialize, Serialize};

use super::expr::check_exponents;
use super::ParamExpr;
use crate::error::{Error, Result};
use crate::logdomain::{LogGrid, DEFAULT_DENSITY};

/// `psi(tau) = tau^{-s0/(s1-s0)} phi(tau^{1/(s1-s0)})` for `tau >= 1` and
/// `phi(1)` on `(0, 1)`.
pub fn psi_from_phi(phi: &ParamExpr, s0: f64, s1: f64) -> Result<ParamExpr> {
    check_exponents(s0, s1)?;
    Ok(ParamExpr::PsiFromPhi {
        phi: Box::new(phi.clone()),
        s0,
        s1,
    })
}

/// `phi(t) = t^{s0} psi(t^{s1-s0})`.
pub fn phi_from_psi(psi: &ParamExpr, s0: f64, s1: f64) -> Result<ParamExpr> {
    check_exponents(s0, s1)?;
    Ok(ParamExpr::PhiFromPsi {
        psi: Box::new(psi.clone()),
        s0,
        s1,
    })
}

/// Sampling range for checks done by sampling `log t` in `[x_min, x_max]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SampleRange {
    pub x_min: f64,
    pub x_max: f64,
    pub density: f64,
    pub cap: f64,
}

impl Default for SampleRange {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 8.0 * std::f64::consts::LN_10,
            density: DEFAULT_DENSITY,
            cap: 1e6,
        }
    }
}

impl SampleRange {
    pub(crate) fn grid(&self) -> Result<LogGrid> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::invalid("sample range must be a finite, nonempty interval"));
        }
        if !(self.density >= 8.0) || !(self.cap >= 1.0) {
            return Err(Error::invalid("need density >= 8 and cap >= 1"));
        }
        Ok(LogGrid::with_density(self.x_min, self.x_max, self.density))
    }
}

/// Output of [`reiteration_compose`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Reiteration {
    pub omega: ParamExpr,
    /// Largest sampled `log(f/g)`.
    pub max_log_f_over_g: f64,
    pub ratio_bounded: bool,
    pub warning: Option<String>,
}

/// `omega(t) = f(t) psi(g(t)/f(t))`. Boundedness of `f/g` is checked on the
/// sample range; an unbounded ratio is recorded as a warning and the
/// composition is still returned.
pub fn reiteration_compose(f: &ParamExpr, g: &ParamExpr, psi: &ParamExpr, range: &SampleRange) -> Result<Reiteration> {
    let xs = range.grid()?.nodes();
    let mut worst = f64::NEG_INFINITY;
    for &x in &xs {
        worst = worst.max(f.log_eval(x)? - g.log_eval(x)?);
    }
    let ratio_bounded = worst <= range.cap.ln();
    let warning = (!ratio_bounded).then(|| {
        format!(
            "f/g reaches exp({worst:.6}) on log t in [{}, {}], above the cap {}",
            range.x_min, range.x_max, range.cap
        )
    });
    Ok(Reiteration {
        omega: ParamExpr::Reiteration {
            f: Box::new(f.clone()),
            g: Box::new(g.clone()),
            psi: Box::new(psi.clone()),
        },
        max_log_f_over_g: worst,
        ratio_bounded,
        warning,
    })
}

/// Sampled class-B evidence: `psi` is positive and finite on the range and
/// `1/psi` stays below the cap from `x_min` on.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassBCheck {
    pub min_log: f64,
    pub max_log: f64,
    pub valid: bool,
}

pub fn class_b_check(psi: &ParamExpr, range: &SampleRange) -> Result<ClassBCheck> {
    let ys = psi.log_eval_many(&range.grid()?.nodes())?;
    let min_log = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let max_log = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ClassBCheck {
        min_log,
        max_log,
        valid: -min_log <= range.cap.ln(),
    })
}
