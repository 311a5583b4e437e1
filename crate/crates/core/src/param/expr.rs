//! Expression trees for positive function parameters.
//!
//! A [`ParamExpr`] is evaluable both in the linear domain ([`ParamExpr::eval`])
//! and in log-log coordinates ([`ParamExpr::log_eval`], taking `x = log t` and
//! returning `log value`). The two routes are implemented independently so
//! they can be checked against each other; everything asymptotic in this
//! crate goes through the log route.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::{log_add_exp, log_sum_exp};
use crate::xlab;

/// A positive function of `t`, normally on `[1, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ParamExpr {
    /// `t^exponent`
    Power {
        exponent: f64,
    },
    /// `1 + log t`
    LogShift,
    /// A positive constant.
    Constant {
        value: f64,
    },
    Sum {
        children: Vec<ParamExpr>,
    },
    Product {
        children: Vec<ParamExpr>,
    },
    /// `base(t)^exponent`
    PowerOf {
        base: Box<ParamExpr>,
        exponent: f64,
    },
    /// `outer(inner(t))`
    Compose {
        outer: Box<ParamExpr>,
        inner: Box<ParamExpr>,
    },
    /// The oscillating slowly varying counterexample
    /// `t^{h(t)} + log t` for `t >= 3`, `1` below, with
    /// `h(t) = (log t)^{-1/2} sin((log t)^{1/4})`.
    Appendix,
    /// `exp(beta(t) + int_1^t eps(s)/s ds)` from sampled `beta`, `eps`.
    Representation(Representation),
    /// Sorted `(t, value)` pairs, interpolated linearly in log-log
    /// coordinates and extrapolated with the end slopes.
    Table(Table),
    /// Piecewise-linear function in linear coordinates (concave envelopes).
    PiecewiseLinear(PiecewiseLinear),
    /// `tau^{-s0/(s1-s0)} phi(tau^{1/(s1-s0)})` for `tau >= 1`, `phi(1)` below.
    PsiFromPhi {
        phi: Box<ParamExpr>,
        s0: f64,
        s1: f64,
    },
    /// `t^{s0} psi(t^{s1-s0})`
    PhiFromPsi {
        psi: Box<ParamExpr>,
        s0: f64,
        s1: f64,
    },
    /// `f(t) psi(g(t)/f(t))`
    Reiteration {
        f: Box<ParamExpr>,
        g: Box<ParamExpr>,
        psi: Box<ParamExpr>,
    },
}

impl ParamExpr {
    pub fn power(exponent: f64) -> Self {
        ParamExpr::Power { exponent }
    }

    pub fn log_shift() -> Self {
        ParamExpr::LogShift
    }

    pub fn constant(value: f64) -> Self {
        ParamExpr::Constant { value }
    }

    pub fn appendix() -> Self {
        ParamExpr::Appendix
    }

    pub fn sum(children: Vec<ParamExpr>) -> Self {
        ParamExpr::Sum { children }
    }

    pub fn product(children: Vec<ParamExpr>) -> Self {
        ParamExpr::Product { children }
    }

    pub fn times(self, other: ParamExpr) -> Self {
        ParamExpr::product(vec![self, other])
    }

    pub fn pow(self, exponent: f64) -> Self {
        ParamExpr::PowerOf {
            base: Box::new(self),
            exponent,
        }
    }

    pub fn compose(outer: ParamExpr, inner: ParamExpr) -> Self {
        ParamExpr::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self> {
        Ok(ParamExpr::Table(Table::new(points)?))
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let expr: ParamExpr = serde_json::from_str(src)?;
        expr.validate()?;
        Ok(expr)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expression trees always serialize")
    }

    /// Structural validation of numeric fields.
    pub fn validate(&self) -> Result<()> {
        match self {
            ParamExpr::Power { exponent } => finite(*exponent, "power exponent"),
            ParamExpr::LogShift | ParamExpr::Appendix => Ok(()),
            ParamExpr::Constant { value } => {
                if value.is_finite() && *value > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("constant must be positive, got {value}")))
                }
            }
            ParamExpr::Sum { children } | ParamExpr::Product { children } => {
                if children.is_empty() {
                    return Err(Error::invalid("sum/product needs at least one child"));
                }
                children.iter().try_for_each(ParamExpr::validate)
            }
            ParamExpr::PowerOf { base, exponent } => {
                finite(*exponent, "power exponent")?;
                base.validate()
            }
            ParamExpr::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()
            }
            ParamExpr::Representation(r) => r.check(),
            ParamExpr::Table(t) => t.check(),
            ParamExpr::PiecewiseLinear(p) => p.check(),
            ParamExpr::PsiFromPhi { phi: inner, s0, s1 } | ParamExpr::PhiFromPsi { psi: inner, s0, s1 } => {
                check_exponents(*s0, *s1)?;
                inner.validate()
            }
            ParamExpr::Reiteration { f, g, psi } => {
                f.validate()?;
                g.validate()?;
                psi.validate()
            }
        }
    }

    /// Linear-domain evaluation at `t > 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::eval(t.ln(), format!("argument t = {t} outside (0, inf)")));
        }
        let v = self.eval_raw(t)?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::eval(t.ln(), format!("value {v} is not finite and positive")))
        }
    }

    fn eval_raw(&self, t: f64) -> Result<f64> {
        Ok(match self {
            ParamExpr::Power { exponent } => t.powf(*exponent),
            ParamExpr::LogShift => 1.0 + t.ln(),
            ParamExpr::Constant { value } => *value,
            ParamExpr::Sum { children } => {
                let mut s = 0.0;
                for c in children {
                    s += c.eval(t)?;
                }
                s
            }
            ParamExpr::Product { children } => {
                let mut p = 1.0;
                for c in children {
                    p *= c.eval(t)?;
                }
                p
            }
            ParamExpr::PowerOf { base, exponent } => base.eval(t)?.powf(*exponent),
            ParamExpr::Compose { outer, inner } => outer.eval(inner.eval(t)?)?,
            ParamExpr::Appendix => {
                if t < 3.0 {
                    1.0
                } else {
                    let x = t.ln();
                    let h = x.powf(-0.5) * x.powf(0.25).sin();
                    t.powf(h) + x
                }
            }
            ParamExpr::Representation(r) => r.log_value(t.ln()).exp(),
            ParamExpr::Table(tab) => tab.log_value(t.ln()).exp(),
            ParamExpr::PiecewiseLinear(p) => p.value(t),
            ParamExpr::PsiFromPhi { phi, s0, s1 } => {
                let d = s1 - s0;
                if t >= 1.0 {
                    t.powf(-s0 / d) * phi.eval(t.powf(1.0 / d))?
                } else {
                    phi.eval(1.0)?
                }
            }
            ParamExpr::PhiFromPsi { psi, s0, s1 } => t.powf(*s0) * psi.eval(t.powf(s1 - s0))?,
            ParamExpr::Reiteration { f, g, psi } => {
                let fv = f.eval(t)?;
                fv * psi.eval(g.eval(t)? / fv)?
            }
        })
    }

    /// Log-domain evaluation: returns `log phi(e^x)`.
    pub fn log_eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::eval(x, "log-argument is not finite"));
        }
        let y = self.log_eval_raw(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::eval(x, format!("log-value {y} is not finite")))
        }
    }

    fn log_eval_raw(&self, x: f64) -> Result<f64> {
        Ok(match self {
            ParamExpr::Power { exponent } => exponent * x,
            ParamExpr::LogShift => {
                if x <= -1.0 {
                    return Err(Error::eval(x, "1 + log t is not positive"));
                }
                x.ln_1p()
            }
            ParamExpr::Constant { value } => value.ln(),
            ParamExpr::Sum { children } => {
                if let [a, b] = children.as_slice() {
                    log_add_exp(a.log_eval(x)?, b.log_eval(x)?)
                } else {
                    let logs = children.iter().map(|c| c.log_eval(x)).collect::<Result<Vec<_>>>()?;
                    log_sum_exp(&logs)
                }
            }
            ParamExpr::Product { children } => {
                let mut s = 0.0;
                for c in children {
                    s += c.log_eval(x)?;
                }
                s
            }
            ParamExpr::PowerOf { base, exponent } => exponent * base.log_eval(x)?,
            ParamExpr::Compose { outer, inner } => outer.log_eval(inner.log_eval(x)?)?,
            ParamExpr::Appendix => xlab::appendix_log_phi_unchecked(x),
            ParamExpr::Representation(r) => r.log_value(x),
            ParamExpr::Table(t) => t.log_value(x),
            ParamExpr::PiecewiseLinear(p) => {
                let v = p.value(x.exp());
                if !(v > 0.0) {
                    return Err(Error::eval(x, format!("piecewise-linear value {v} is not positive")));
                }
                v.ln()
            }
            ParamExpr::PsiFromPhi { phi, s0, s1 } => {
                let d = s1 - s0;
                if x >= 0.0 {
                    -s0 / d * x + phi.log_eval(x / d)?
                } else {
                    phi.log_eval(0.0)?
                }
            }
            ParamExpr::PhiFromPsi { psi, s0, s1 } => s0 * x + psi.log_eval((s1 - s0) * x)?,
            ParamExpr::Reiteration { f, g, psi } => {
                let lf = f.log_eval(x)?;
                lf + psi.log_eval(g.log_eval(x)? - lf)?
            }
        })
    }

    /// Evaluates `log_eval` on every node of a grid.
    pub fn log_eval_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.log_eval(x)).collect()
    }
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {v}")))
    }
}

pub(crate) fn check_exponents(s0: f64, s1: f64) -> Result<()> {
    if !(s0.is_finite() && s1.is_finite()) {
        return Err(Error::invalid("exponents must be finite"));
    }
    if s0 >= s1 {
        return Err(Error::invalid(format!("need s0 < s1, got s0 = {s0}, s1 = {s1}")));
    }
    Ok(())
}

/// Linear interpolation on sorted abscissae, constant beyond the ends.
fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Sampled `(beta, eps)` pair of the representation
/// `phi(t) = exp(beta(t) + int_1^t eps(s)/s ds)`.
///
/// Samples live at `log_nodes` (`x = log t`, first node `0`). In `x`
/// coordinates the integral is `int_0^x eps(e^y) dy`; it is accumulated with
/// the trapezoid rule at the nodes and integrates the linear interpolant of
/// `eps` exactly in between. Beyond the sampled range both functions are
/// continued as constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepresentationSamples", into = "RepresentationSamples")]
pub struct Representation {
    log_nodes: Vec<f64>,
    beta: Vec<f64>,
    eps: Vec<f64>,
    integral: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RepresentationSamples {
    log_nodes: Vec<f64>,
    beta: Vec<f64>,
    eps: Vec<f64>,
}

impl TryFrom<RepresentationSamples> for Representation {
    type Error = Error;

    fn try_from(s: RepresentationSamples) -> Result<Self> {
        Representation::new(s.log_nodes, s.beta, s.eps)
    }
}

impl From<Representation> for RepresentationSamples {
    fn from(r: Representation) -> Self {
        RepresentationSamples {
            log_nodes: r.log_nodes,
            beta: r.beta,
            eps: r.eps,
        }
    }
}

impl Representation {
    pub fn new(log_nodes: Vec<f64>, beta: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        if log_nodes.len() < 2 {
            return Err(Error::invalid("representation needs at least two sample nodes"));
        }
        if log_nodes.len() != beta.len() || log_nodes.len() != eps.len() {
            return Err(Error::invalid("beta and eps must be sampled at every node"));
        }
        if log_nodes[0].abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "first node must be t = 1 (log t = 0), got log t = {}",
                log_nodes[0]
            )));
        }
        if log_nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("sample nodes must be strictly increasing"));
        }
        if let Some(v) = beta.iter().chain(&eps).chain(&log_nodes).find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("unbounded sample value {v}")));
        }
        let mut integral = Vec::with_capacity(log_nodes.len());
        integral.push(0.0);
        let mut acc = 0.0;
        for i in 1..log_nodes.len() {
            acc += 0.5 * (eps[i] + eps[i - 1]) * (log_nodes[i] - log_nodes[i - 1]);
            integral.push(acc);
        }
        Ok(Self {
            log_nodes,
            beta,
            eps,
            integral,
        })
    }

    pub fn log_nodes(&self) -> &[f64] {
        &self.log_nodes
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    fn check(&self) -> Result<()> {
        Representation::new(self.log_nodes.clone(), self.beta.clone(), self.eps.clone()).map(|_| ())
    }

    fn integral_at(&self, x: f64) -> f64 {
        let xs = &self.log_nodes;
        let n = xs.len();
        if x <= xs[0] {
            return self.eps[0] * (x - xs[0]);
        }
        if x >= xs[n - 1] {
            return self.integral[n - 1] + self.eps[n - 1] * (x - xs[n - 1]);
        }
        let i = xs.partition_point(|&v| v <= x) - 1;
        let dx = x - xs[i];
        let e_mid = interp_clamped(xs, &self.eps, x);
        self.integral[i] + 0.5 * (self.eps[i] + e_mid) * dx
    }

    pub fn log_value(&self, x: f64) -> f64 {
        interp_clamped(&self.log_nodes, &self.beta, x) + self.integral_at(x)
    }
}

/// Sorted `(t, value)` table with log-log linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TablePoints", into = "TablePoints")]
pub struct Table {
    log_t: Vec<f64>,
    log_v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TablePoints {
    points: Vec<[f64; 2]>,
}

impl TryFrom<TablePoints> for Table {
    type Error = Error;

    fn try_from(p: TablePoints) -> Result<Self> {
        Table::new(p.points)
    }
}

impl From<Table> for TablePoints {
    fn from(t: Table) -> Self {
        TablePoints { points: t.points() }
    }
}

impl Table {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("table needs at least two points"));
        }
        for [t, v] in &points {
            if !(t.is_finite() && *t > 0.0) {
                return Err(Error::invalid(format!("table abscissa {t} must be positive")));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::invalid(format!("table value {v} at t = {t} must be positive")));
            }
        }
        if points.windows(2).any(|w| !(w[1][0] > w[0][0])) {
            return Err(Error::invalid("table abscissae must be strictly increasing"));
        }
        Ok(Self {
            log_t: points.iter().map(|p| p[0].ln()).collect(),
            log_v: points.iter().map(|p| p[1].ln()).collect(),
        })
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.log_t
            .iter()
            .zip(&self.log_v)
            .map(|(x, y)| [x.exp(), y.exp()])
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.log_t.windows(2).any(|w| !(w[1] > w[0])) || self.log_v.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("malformed table"));
        }
        Ok(())
    }

    pub fn log_value(&self, x: f64) -> f64 {
        let (xs, ys) = (&self.log_t, &self.log_v);
        let n = xs.len();
        let i = if x <= xs[0] {
            0
        } else if x >= xs[n - 1] {
            n - 2
        } else {
            xs.partition_point(|&v| v <= x) - 1
        };
        let slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        ys[i] + slope * (x - xs[i])
    }
}

/// Piecewise-linear function `shift + p(t)` where `p` interpolates `knots`
/// and continues with `left_slope` / `right_slope` beyond the end knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub knots: Vec<[f64; 2]>,
    pub left_slope: f64,
    pub right_slope: f64,
    #[serde(default)]
    pub shift: f64,
}

impl PiecewiseLinear {
    fn check(&self) -> Result<()> {
        if self.knots.is_empty() {
            return Err(Error::invalid("piecewise-linear function needs knots"));
        }
        if self.knots.windows(2).any(|w| !(w[1][0] > w[0][0])) {
            return Err(Error::invalid("knots must be strictly increasing"));
        }
        let all = self
            .knots
            .iter()
            .flatten()
            .chain([&self.left_slope, &self.right_slope, &self.shift]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("piecewise-linear fields must be finite"));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        let n = k.len();
        let base = if t <= k[0][0] {
            k[0][1] + self.left_slope * (t - k[0][0])
        } else if t >= k[n - 1][0] {
            k[n - 1][1] + self.right_slope * (t - k[n - 1][0])
        } else {
            let i = k.partition_point(|p| p[0] <= t) - 1;
            let w = (t - k[i][0]) / (k[i + 1][0] - k[i][0]);
            k[i][1] + w * (k[i + 1][1] - k[i][1])
        };
        base + self.shift
    }
}
