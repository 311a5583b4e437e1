//! Diagonal models of Hilbert couples `[X0, X1]` with generating operator
//! `J = diag(lambda_j)`; interpolation norms `||psi(J) u||_{X0}` and
//! operator norms in the weighted geometries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, GridDistribution};
use crate::logdomain::CompensatedSum;
use crate::param::{self, ParamExpr, SampleRange};

/// `X0` norm `sum w_j^2 |u_j|^2`, `X1` norm `sum w_j^2 lambda_j^2 |u_j|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoupleFields", into = "CoupleFields")]
pub struct DiagonalCouple {
    weights: Vec<f64>,
    spectrum: Vec<f64>,
    m: f64,
}

#[derive(Serialize, Deserialize)]
struct CoupleFields {
    base_weights: Vec<f64>,
    spectrum: Vec<f64>,
    m: f64,
}

impl TryFrom<CoupleFields> for DiagonalCouple {
    type Error = Error;

    fn try_from(c: CoupleFields) -> Result<Self> {
        DiagonalCouple::new(c.base_weights, c.spectrum, c.m)
    }
}

impl From<DiagonalCouple> for CoupleFields {
    fn from(c: DiagonalCouple) -> Self {
        CoupleFields {
            base_weights: c.weights,
            spectrum: c.spectrum,
            m: c.m,
        }
    }
}

impl DiagonalCouple {
    pub fn new(weights: Vec<f64>, spectrum: Vec<f64>, m: f64) -> Result<Self> {
        if weights.is_empty() || weights.len() != spectrum.len() {
            return Err(Error::invalid(
                "couple needs equally many weights and spectral points (at least one)",
            ));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::invalid(format!(
                "invalid couple: lower spectral bound m = {m} must be positive"
            )));
        }
        if let Some((j, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!(
                "invalid couple: weight w_{j} = {w} is not positive"
            )));
        }
        if let Some((j, l)) = spectrum.iter().enumerate().find(|(_, l)| !(**l >= m && l.is_finite())) {
            return Err(Error::invalid(format!(
                "invalid couple: spectral point lambda_{j} = {l} is below m = {m}"
            )));
        }
        Ok(Self { weights, spectrum, m })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `w_j psi(lambda_j)`, the diagonal of the `X_psi` geometry.
    pub fn psi_weights(&self, psi: &ParamExpr) -> Result<Vec<f64>> {
        self.weights
            .iter()
            .zip(&self.spectrum)
            .enumerate()
            .map(|(j, (w, &l))| {
                psi.eval(l).map(|p| w * p).map_err(|e| {
                    Error::eval(
                        l.ln(),
                        format!("psi fails at spectral point j = {j}, lambda = {l}: {e}"),
                    )
                })
            })
            .collect()
    }
}

/// `<xi> = (1 + |xi|^2)^{1/2}`.
pub fn japanese_bracket(xi: &[f64]) -> f64 {
    xi.iter().fold(1.0, |acc, v| acc + v * v).sqrt()
}

/// Couple of `H^{(s0)}`, `H^{(s1)}` on a frequency grid:
/// `w = <xi>^{s0}`, `lambda = <xi>^{s1-s0}`, `m = 1`.
pub fn make_sobolev_couple(freqs: &[Vec<f64>], s0: f64, s1: f64) -> Result<DiagonalCouple> {
    if !(s0.is_finite() && s1.is_finite()) || s0 >= s1 {
        return Err(Error::invalid(format!("need s0 < s1, got s0 = {s0}, s1 = {s1}")));
    }
    let brackets: Vec<f64> = freqs.iter().map(|xi| japanese_bracket(xi)).collect();
    let w = brackets.iter().map(|b| b.powf(s0)).collect();
    let l = brackets.iter().map(|b| b.powf(s1 - s0)).collect();
    DiagonalCouple::new(w, l, 1.0)
}

fn weighted_norm(u: &[Complex64], d: &[f64]) -> f64 {
    u.iter()
        .zip(d)
        .map(|(c, w)| (w * w) * c.norm_sqr())
        .collect::<CompensatedSum>()
        .value()
        .sqrt()
}

/// `||psi(J) u||_{X0} = (sum w_j^2 psi(lambda_j)^2 |u_j|^2)^{1/2}`.
pub fn interp_norm(u: &[Complex64], couple: &DiagonalCouple, psi: &ParamExpr) -> Result<f64> {
    if u.len() != couple.dim() {
        return Err(Error::invalid(format!(
            "vector has {} entries, couple has dimension {}",
            u.len(),
            couple.dim()
        )));
    }
    Ok(weighted_norm(u, &couple.psi_weights(psi)?))
}

/// Relative discrepancy `|a - b| / max(a, b)`, zero when both vanish.
pub fn relative_discrepancy(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Norm of `u` computed as the interpolation norm on the Sobolev couple with
/// `psi = psi_from_phi(phi, s0, s1)` and as the grid Hörmander norm with
/// `phi`. Returns the relative discrepancy.
pub fn norm_identity_check(u: &GridDistribution, phi: &ParamExpr, s0: f64, s1: f64) -> Result<f64> {
    let psi = param::psi_from_phi(phi, s0, s1)?;
    let couple = make_sobolev_couple(&u.frequencies(), s0, s1)?;
    let coeffs = grid::fourier_coefficients(u);
    let a = interp_norm(&coeffs, &couple, &psi)?;
    let b = grid::hormander_norm(u, phi)?;
    Ok(relative_discrepancy(a, b))
}

/// Constants of `||u||_{X0} <= C0 ||u||_{X_psi}` and
/// `||u||_{X_psi} <= C1 ||u||_{X1}`, from per-point weight comparison.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct EmbeddingConstants {
    pub c0: f64,
    pub c1: f64,
}

pub fn embedding_constants(couple: &DiagonalCouple, psi: &ParamExpr) -> Result<EmbeddingConstants> {
    let (mut c0, mut c1) = (0f64, 0f64);
    for &l in couple.spectrum() {
        let p = psi.eval(l)?;
        c0 = c0.max(1.0 / p);
        c1 = c1.max(p / l);
    }
    Ok(EmbeddingConstants { c0, c1 })
}

/// A linear map on the couple's space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearMap {
    /// Row-major `n x n` complex matrix.
    Dense {
        n: usize,
        entries: Vec<Complex64>,
    },
    Diagonal {
        entries: Vec<Complex64>,
    },
    /// `e_src -> alpha e_dst`, zero on the other basis vectors.
    RankOne {
        src: usize,
        dst: usize,
        alpha: Complex64,
    },
    /// Circular convolution `(Tu)_i = sum_j kernel[(i - j) mod n] u_j`.
    Convolution {
        kernel: Vec<Complex64>,
    },
}

impl LinearMap {
    pub fn dim(&self) -> Option<usize> {
        match self {
            LinearMap::Dense { n, .. } => Some(*n),
            LinearMap::Diagonal { entries } => Some(entries.len()),
            LinearMap::RankOne { .. } => None,
            LinearMap::Convolution { kernel } => Some(kernel.len()),
        }
    }

    /// Dense matrix of the map on an `n`-dimensional space.
    pub fn to_dense(&self, n: usize) -> Result<DMatrix<Complex64>> {
        if let Some(d) = self.dim() {
            if d != n {
                return Err(Error::invalid(format!("map has dimension {d}, couple has {n}")));
            }
        }
        Ok(match self {
            LinearMap::Dense { entries, .. } => {
                if entries.len() != n * n {
                    return Err(Error::invalid(format!(
                        "dense map needs {} entries, got {}",
                        n * n,
                        entries.len()
                    )));
                }
                DMatrix::from_row_slice(n, n, entries)
            }
            LinearMap::Diagonal { entries } => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)),
            LinearMap::RankOne { src, dst, alpha } => {
                if *src >= n || *dst >= n {
                    return Err(Error::invalid("rank-one indices out of range"));
                }
                let mut m = DMatrix::zeros(n, n);
                m[(*dst, *src)] = *alpha;
                m
            }
            LinearMap::Convolution { kernel } => DMatrix::from_fn(n, n, |i, j| kernel[(i + n - j) % n]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactClosedForm,
    SingularValue,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormConfig {
    /// Largest dimension handled by a full singular value decomposition.
    pub dense_limit: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            dense_limit: 512,
            tol: 1e-10,
            max_iterations: 100_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormTriple {
    pub n0: f64,
    pub n1: f64,
    pub npsi: f64,
    pub method: NormMethod,
    /// Relative tolerance of the power iteration; `0` for direct methods.
    pub tol: f64,
    pub seed: Option<u64>,
}

/// `||D T D^{-1}||_2` for a diagonal `D`.
fn conjugated_norm(t: &DMatrix<Complex64>, d: &[f64], cfg: &NormConfig) -> Result<f64> {
    let n = d.len();
    let a = DMatrix::from_fn(n, n, |i, j| t[(i, j)] * (d[i] / d[j]));
    if n <= cfg.dense_limit {
        Ok(a.singular_values().max())
    } else {
        power_iteration(&a, cfg)
    }
}

/// Largest singular value by power iteration on `A^H A`.
pub fn power_iteration(a: &DMatrix<Complex64>, cfg: &NormConfig) -> Result<f64> {
    let n = a.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = nalgebra::DVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let ah = a.adjoint();
    let mut sigma = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let nx = x.norm();
        if nx == 0.0 {
            return Ok(0.0);
        }
        x /= Complex64::new(nx, 0.0);
        let y = a * &x;
        let next = y.norm();
        residual = (next - sigma).abs() / next.max(f64::MIN_POSITIVE);
        sigma = next;
        if next == 0.0 || residual <= cfg.tol {
            return Ok(sigma);
        }
        x = &ah * y;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        residual,
    })
}

/// Operator norms of `T` on `X0`, `X1` and `X_psi`.
pub fn operator_norms(
    t: &LinearMap,
    couple: &DiagonalCouple,
    psi: &ParamExpr,
    cfg: &NormConfig,
) -> Result<OperatorNormTriple> {
    let n = couple.dim();
    let d0 = couple.weights().to_vec();
    let d1: Vec<f64> = couple
        .weights()
        .iter()
        .zip(couple.spectrum())
        .map(|(w, l)| w * l)
        .collect();
    let dp = couple.psi_weights(psi)?;
    match t {
        LinearMap::Diagonal { entries } => {
            if entries.len() != n {
                return Err(Error::invalid(format!(
                    "map has dimension {}, couple has {n}",
                    entries.len()
                )));
            }
            let m = entries.iter().map(|c| c.norm()).fold(0.0, f64::max);
            Ok(OperatorNormTriple {
                n0: m,
                n1: m,
                npsi: m,
                method: NormMethod::ExactClosedForm,
                tol: 0.0,
                seed: None,
            })
        }
        LinearMap::RankOne { src, dst, alpha } => {
            let (s, r) = (*src, *dst);
            if s >= n || r >= n {
                return Err(Error::invalid("rank-one indices out of range"));
            }
            let a = alpha.norm();
            Ok(OperatorNormTriple {
                n0: a * d0[r] / d0[s],
                n1: a * d1[r] / d1[s],
                npsi: a * dp[r] / dp[s],
                method: NormMethod::ExactClosedForm,
                tol: 0.0,
                seed: None,
            })
        }
        _ => {
            let m = t.to_dense(n)?;
            let direct = n <= cfg.dense_limit;
            Ok(OperatorNormTriple {
                n0: conjugated_norm(&m, &d0, cfg)?,
                n1: conjugated_norm(&m, &d1, cfg)?,
                npsi: conjugated_norm(&m, &dp, cfg)?,
                method: if direct {
                    NormMethod::SingularValue
                } else {
                    NormMethod::PowerIteration
                },
                tol: if direct { 0.0 } else { cfg.tol },
                seed: (!direct).then_some(cfg.seed),
            })
        }
    }
}

/// `npsi / max(n0, n1)`; `0` for the zero operator.
pub fn interpolation_bound_check(
    t: &LinearMap,
    couple: &DiagonalCouple,
    psi: &ParamExpr,
    cfg: &NormConfig,
) -> Result<f64> {
    let norms = operator_norms(t, couple, psi, cfg)?;
    let m = norms.n0.max(norms.n1);
    Ok(if m == 0.0 { 0.0 } else { norms.npsi / m })
}

/// Log of `npsi / max(n0, n1)` for `T: e_src -> alpha e_dst` with
/// `alpha = min{1, lambda_src/lambda_dst}` and unit base weights, where
/// spectral points are given as `log lambda`. Never forms `lambda`.
pub fn rank_one_witness(psi: &ParamExpr, log_src: f64, log_dst: f64) -> Result<f64> {
    Ok(psi.log_eval(log_dst)? - psi.log_eval(log_src)? - (log_dst - log_src).max(0.0))
}

/// Norm of `u` computed in `[X_f, X_g]_psi` (derived couple with weights
/// `w f(lambda)` and spectrum `g(lambda)/f(lambda)`) and in `X_omega` with
/// `omega = f psi(g/f)`. Returns the relative discrepancy.
pub fn reiteration_norm_check(
    couple: &DiagonalCouple,
    f: &ParamExpr,
    g: &ParamExpr,
    psi: &ParamExpr,
    u: &[Complex64],
) -> Result<f64> {
    let mut weights = Vec::with_capacity(couple.dim());
    let mut spectrum = Vec::with_capacity(couple.dim());
    for (&w, &l) in couple.weights().iter().zip(couple.spectrum()) {
        let fv = f.eval(l)?;
        weights.push(w * fv);
        spectrum.push(g.eval(l)? / fv);
    }
    let m = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let derived = DiagonalCouple::new(weights, spectrum, m)?;
    let a = interp_norm(u, &derived, psi)?;

    let (lo, hi) = couple
        .spectrum()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| {
            (a.min(l.ln()), b.max(l.ln()))
        });
    let range = SampleRange {
        x_min: lo,
        x_max: hi.max(lo + 1.0),
        ..SampleRange::default()
    };
    let omega = param::reiteration_compose(f, g, psi, &range)?.omega;
    let b = interp_norm(u, couple, &omega)?;
    Ok(relative_discrepancy(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_couple(rng: &mut ChaCha8Rng, n: usize) -> DiagonalCouple {
        let w = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
        let l = (0..n).map(|_| (rng.random_range(0.0..8.0f64)).exp()).collect();
        DiagonalCouple::new(w, l, 1.0).unwrap()
    }

    #[test]
    fn sobolev_couple_examples() {
        let c0 = make_sobolev_couple(&[vec![0.0]], -1.0, 3.0).unwrap();
        assert_eq!((c0.weights()[0], c0.spectrum()[0]), (1.0, 1.0));
        let c1 = make_sobolev_couple(&[vec![1.0, 1.0, 1.0]], 0.0, 2.0).unwrap();
        assert!((c1.weights()[0] - 1.0).abs() < 1e-15 && (c1.spectrum()[0] - 4.0).abs() < 1e-14);
        let l = 3.0;
        let freqs: Vec<Vec<f64>> = (0..20)
            .map(|k| vec![2.0 * std::f64::consts::PI * k as f64 / l])
            .collect();
        let c2 = make_sobolev_couple(&freqs, 0.5, 1.5).unwrap();
        assert!(c2.spectrum().windows(2).all(|w| w[1] > w[0]));
        assert!(make_sobolev_couple(&freqs, 1.0, 1.0).is_err());
    }

    #[test]
    fn couple_validation() {
        assert!(DiagonalCouple::new(vec![1.0], vec![0.5], 1.0).is_err());
        assert!(DiagonalCouple::new(vec![0.0], vec![1.0], 1.0).is_err());
        assert!(DiagonalCouple::new(vec![], vec![], 1.0).is_err());
        assert!(DiagonalCouple::new(vec![1.0], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn interp_norm_examples() {
        let couple = DiagonalCouple::new(vec![2.0, 3.0, 0.5], vec![1.0, 4.0, 9.0], 1.0).unwrap();
        let psi = ParamExpr::power(0.5);
        let e1 = vec![c(0.0), c(1.0), c(0.0)];
        assert!((interp_norm(&e1, &couple, &psi).unwrap() - 6.0).abs() < 1e-15);

        let u = vec![Complex64::new(1.0, -2.0), c(0.5), Complex64::new(0.0, 3.0)];
        let x0 = (4.0 * 5.0 + 9.0 * 0.25 + 0.25 * 9.0f64).sqrt();
        assert!((interp_norm(&u, &couple, &ParamExpr::constant(1.0)).unwrap() - x0).abs() < 1e-14);
        let x1 = (4.0 * 5.0 + 9.0 * 16.0 * 0.25 + 0.25 * 81.0 * 9.0f64).sqrt();
        assert!((interp_norm(&u, &couple, &ParamExpr::power(1.0)).unwrap() - x1).abs() < 1e-13);
        assert!(interp_norm(&u[..2], &couple, &psi).is_err());
    }

    #[test]
    fn interp_norm_names_failing_point() {
        let couple = DiagonalCouple::new(vec![1.0, 1.0], vec![1.0, 2.0], 1.0).unwrap();
        // vanishes at the second spectral point
        let bad = ParamExpr::PiecewiseLinear(crate::param::PiecewiseLinear {
            knots: vec![[1.0, 1.0], [2.0, 0.0]],
            left_slope: -1.0,
            right_slope: -1.0,
            shift: 0.0,
        });
        let err = interp_norm(&[c(1.0), c(1.0)], &couple, &bad).unwrap_err().to_string();
        assert!(err.contains("j = 1"), "{err}");
    }

    #[test]
    fn diagonal_and_identity_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let couple = random_couple(&mut rng, 6);
        let psi = ParamExpr::log_shift();
        let entries = vec![c(1.0), c(-3.0), Complex64::new(0.0, 2.0), c(0.5), c(0.0), c(1.5)];
        let t = LinearMap::Diagonal {
            entries: entries.clone(),
        };
        let norms = operator_norms(&t, &couple, &psi, &NormConfig::default()).unwrap();
        assert_eq!((norms.n0, norms.n1, norms.npsi), (3.0, 3.0, 3.0));
        assert_eq!(
            interpolation_bound_check(&t, &couple, &psi, &NormConfig::default()).unwrap(),
            1.0
        );

        // same map materialized: the singular value route agrees
        let dense = LinearMap::Dense {
            n: 6,
            entries: t.to_dense(6).unwrap().transpose().iter().copied().collect(),
        };
        let nd = operator_norms(&dense, &couple, &psi, &NormConfig::default()).unwrap();
        assert!((nd.n0 - 3.0).abs() < 1e-12 && (nd.npsi - 3.0).abs() < 1e-12);

        let id = LinearMap::Diagonal {
            entries: vec![c(1.0); 6],
        };
        let n = operator_norms(&id, &couple, &psi, &NormConfig::default()).unwrap();
        assert_eq!((n.n0, n.n1, n.npsi), (1.0, 1.0, 1.0));
    }

    #[test]
    fn rank_one_closed_form() {
        let couple = DiagonalCouple::new(vec![2.0, 0.5, 1.0], vec![1.0, 3.0, 10.0], 1.0).unwrap();
        let psi = ParamExpr::power(0.3);
        let t = LinearMap::RankOne {
            src: 0,
            dst: 2,
            alpha: Complex64::new(0.0, -2.0),
        };
        let n = operator_norms(&t, &couple, &psi, &NormConfig::default()).unwrap();
        assert!((n.n0 - 2.0 * 1.0 / 2.0).abs() < 1e-15);
        assert!((n.n1 - 2.0 * 10.0 / 2.0).abs() < 1e-14);
        assert!((n.npsi - 2.0 * 10f64.powf(0.3) / 2.0).abs() < 1e-14);
        let dense = operator_norms(
            &LinearMap::Dense {
                n: 3,
                entries: t.to_dense(3).unwrap().transpose().iter().copied().collect(),
            },
            &couple,
            &psi,
            &NormConfig::default(),
        )
        .unwrap();
        assert!((dense.n1 - n.n1).abs() < 1e-12 && (dense.npsi - n.npsi).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 24;
        let entries: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a = DMatrix::from_row_slice(n, n, &entries);
        let svd = a.singular_values().max();
        let pi = power_iteration(&a, &NormConfig::default()).unwrap();
        assert!((svd - pi).abs() / svd < 1e-8);

        let forced = NormConfig {
            dense_limit: 4,
            ..Default::default()
        };
        let couple = random_couple(&mut rng, n);
        let t = LinearMap::Dense { n, entries };
        let by_svd = operator_norms(&t, &couple, &ParamExpr::power(0.5), &NormConfig::default()).unwrap();
        let by_pi = operator_norms(&t, &couple, &ParamExpr::power(0.5), &forced).unwrap();
        assert_eq!(by_pi.method, NormMethod::PowerIteration);
        assert!((by_svd.npsi - by_pi.npsi).abs() / by_svd.npsi < 1e-6);
    }

    #[test]
    fn power_iteration_reports_non_convergence() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.999999)]);
        let cfg = NormConfig {
            max_iterations: 3,
            tol: 1e-15,
            ..Default::default()
        };
        assert!(matches!(
            power_iteration(&a, &cfg),
            Err(Error::NonConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn convolution_is_circulant() {
        let t = LinearMap::Convolution {
            kernel: vec![c(1.0), c(2.0), c(3.0)],
        };
        let m = t.to_dense(3).unwrap();
        assert_eq!(m[(0, 1)], c(3.0));
        assert_eq!(m[(2, 0)], c(3.0));
        assert_eq!(m[(1, 0)], c(2.0));
        assert!(t.to_dense(4).is_err());
    }

    #[test]
    fn witness_examples() {
        let psi = ParamExpr::power(0.4);
        for (a, b) in [(0.0, 5.0), (7.0, 2.0), (3.0, 3.0)] {
            let w = rank_one_witness(&psi, a, b).unwrap();
            assert!(w <= 1e-15);
            let sum = w + rank_one_witness(&psi, b, a).unwrap();
            assert!((sum + (a - b).abs()).abs() < 1e-12);
        }
        assert_eq!(rank_one_witness(&ParamExpr::Appendix, 12.0, 12.0).unwrap(), 0.0);
    }

    #[test]
    fn reiteration_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let couple = random_couple(&mut rng, 64);
        let u: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let (a, b, th) = (0.5, 2.0, 0.3);
        let d = reiteration_norm_check(
            &couple,
            &ParamExpr::power(a),
            &ParamExpr::power(b),
            &ParamExpr::power(th),
            &u,
        )
        .unwrap();
        assert!(d <= 1e-12);
        let direct = interp_norm(&u, &couple, &ParamExpr::power(a + th * (b - a))).unwrap();
        let via = interp_norm(
            &u,
            &couple,
            &param::reiteration_compose(
                &ParamExpr::power(a),
                &ParamExpr::power(b),
                &ParamExpr::power(th),
                &SampleRange::default(),
            )
            .unwrap()
            .omega,
        )
        .unwrap();
        assert!(relative_discrepancy(direct, via) < 1e-12);

        let d = reiteration_norm_check(
            &couple,
            &ParamExpr::log_shift(),
            &ParamExpr::power(3.0),
            &ParamExpr::constant(1.0),
            &u,
        )
        .unwrap();
        assert!(d <= 1e-12);
    }

    #[test]
    fn embedding_chain_constants() {
        let couple = DiagonalCouple::new(vec![1.0; 3], vec![1.0, 10.0, 100.0], 1.0).unwrap();
        let e = embedding_constants(&couple, &ParamExpr::power(0.5)).unwrap();
        assert!((e.c0 - 1.0).abs() < 1e-15 && (e.c1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn couple_json_round_trip() {
        let couple = DiagonalCouple::new(vec![1.0, 2.0], vec![1.5, 3.0], 1.0).unwrap();
        let s = serde_json::to_string(&couple).unwrap();
        assert!(s.contains("base_weights"));
        assert_eq!(serde_json::from_str::<DiagonalCouple>(&s).unwrap(), couple);
        assert!(serde_json::from_str::<DiagonalCouple>(r#"{"base_weights":[1],"spectrum":[0.5],"m":1}"#).is_err());
        let t = LinearMap::RankOne {
            src: 0,
            dst: 1,
            alpha: Complex64::new(1.0, 0.0),
        };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<LinearMap>(&s).unwrap(), t);
    }
}
