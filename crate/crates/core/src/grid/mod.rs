//! Discrete Hörmander spaces on uniform periodic grids in up to three
//! dimensions.

mod embedding;
pub mod io;
mod quotient;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::CompensatedSum;
use crate::param::ParamExpr;
use crate::spectral::japanese_bracket;

pub use embedding::{embedding_scan, EmbeddingScan, EmbeddingWitness};
pub use quotient::{quotient_norm, quotient_solve, QuotientSolution, MAX_QUOTIENT_POINTS};

/// Grid geometry: `n` axes with `shape[a]` points (even) on a periodic box
/// of side `box_length[a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub shape: Vec<usize>,
    pub box_length: Vec<f64>,
}

impl GridShape {
    pub fn new(shape: Vec<usize>, box_length: Vec<f64>) -> Result<Self> {
        let g = Self { shape, box_length };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.shape.len();
        if !(1..=3).contains(&n) {
            return Err(Error::invalid(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if self.box_length.len() != n {
            return Err(Error::invalid("need one box length per axis"));
        }
        if let Some(&s) = self.shape.iter().find(|&&s| s == 0 || s % 2 == 1) {
            return Err(Error::invalid(format!(
                "points per axis must be even and positive, got {s}"
            )));
        }
        if let Some(l) = self.box_length.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::invalid(format!("box length must be positive, got {l}")));
        }
        self.shape
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| Error::invalid("grid size overflows"))?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell volume `prod L/N`.
    pub fn cell_volume(&self) -> f64 {
        self.shape
            .iter()
            .zip(&self.box_length)
            .map(|(&n, l)| l / n as f64)
            .product()
    }

    /// Row-major multi-index of a flat index.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    /// Physical frequencies `2 pi k / L`, `k` in `[-N/2, N/2)`, in FFT
    /// order, row-major.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|flat| {
                self.unravel(flat)
                    .into_iter()
                    .enumerate()
                    .map(|(a, i)| {
                        let n = self.shape[a];
                        let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
                        2.0 * std::f64::consts::PI * k / self.box_length[a]
                    })
                    .collect()
            })
            .collect()
    }

    /// `<xi>` at every frequency, FFT order.
    pub fn brackets(&self) -> Vec<f64> {
        self.frequencies().iter().map(|xi| japanese_bracket(xi)).collect()
    }
}

/// Complex samples at grid points `x = (L/N) k`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFields", into = "GridFields")]
pub struct GridDistribution {
    grid: GridShape,
    samples: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct GridFields {
    n: usize,
    shape: Vec<usize>,
    box_length: Vec<f64>,
    samples: Vec<Complex64>,
}

impl TryFrom<GridFields> for GridDistribution {
    type Error = Error;

    fn try_from(f: GridFields) -> Result<Self> {
        if f.n != f.shape.len() {
            return Err(Error::invalid(format!(
                "n = {} but shape has {} axes",
                f.n,
                f.shape.len()
            )));
        }
        GridDistribution::new(GridShape::new(f.shape, f.box_length)?, f.samples)
    }
}

impl From<GridDistribution> for GridFields {
    fn from(g: GridDistribution) -> Self {
        GridFields {
            n: g.grid.dim(),
            shape: g.grid.shape,
            box_length: g.grid.box_length,
            samples: g.samples,
        }
    }
}

impl GridDistribution {
    pub fn new(grid: GridShape, samples: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.len() {
            return Err(Error::invalid(format!(
                "grid has {} points, got {} samples",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid("samples must be finite"));
        }
        Ok(Self { grid, samples })
    }

    /// Builds samples from a function of the physical position.
    pub fn from_fn(grid: GridShape, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        grid.validate()?;
        let samples = (0..grid.len())
            .map(|flat| {
                let x: Vec<f64> = grid
                    .unravel(flat)
                    .into_iter()
                    .enumerate()
                    .map(|(a, i)| grid.box_length[a] / grid.shape[a] as f64 * i as f64)
                    .collect();
                f(&x)
            })
            .collect();
        Self::new(grid, samples)
    }

    /// Samples with real and imaginary parts uniform in `[-1, 1)`.
    pub fn random(grid: GridShape, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridShape {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.grid.frequencies()
    }

    /// Spatial Riemann-sum norm `((L/N)^n sum |u|^2)^{1/2}`.
    pub fn l2_box_norm(&self) -> f64 {
        let s: CompensatedSum = self.samples.iter().map(|c| c.norm_sqr()).collect();
        (self.grid.cell_volume() * s.value()).sqrt()
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|c| c * alpha).collect(),
        }
    }
}

/// In-place n-dimensional FFT over a row-major array (unnormalized).
pub(crate) fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let total: usize = shape.iter().product();
    let mut stride = 1;
    for a in (0..shape.len()).rev() {
        let n = shape[a];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let block = n * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for k in 0..n {
                    line[k] = data[base + k * stride];
                }
                fft.process(&mut line);
                for k in 0..n {
                    data[base + k * stride] = line[k];
                }
            }
        }
        stride *= n;
    }
}

/// Fourier coefficients `c_k` (FFT order) scaled so that
/// `sum |c_k|^2 = (L/N)^n sum |u(x)|^2`; a single mode `e^{i xi x}` has
/// coefficient `L^{n/2}`.
pub fn fourier_coefficients(u: &GridDistribution) -> Vec<Complex64> {
    let mut data = u.samples.clone();
    fft_nd(&mut data, &u.grid.shape, false);
    let scale = (u.grid.cell_volume() / u.grid.len() as f64).sqrt();
    data.iter_mut().for_each(|c| *c *= scale);
    data
}

/// `phi(<xi>)` at every frequency, with the failing frequency named.
pub(crate) fn symbol(grid: &GridShape, phi: &ParamExpr) -> Result<Vec<f64>> {
    grid.brackets()
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            phi.eval(b)
                .map_err(|e| Error::eval(b.ln(), format!("phi fails at frequency index {k}, <xi> = {b}: {e}")))
        })
        .collect()
}

/// `((L/N)^n sum_xi phi(<xi>)^2 |u^(xi)|^2)^{1/2}` with the unitary
/// transform normalized as in [`fourier_coefficients`].
pub fn hormander_norm(u: &GridDistribution, phi: &ParamExpr) -> Result<f64> {
    let coeffs = fourier_coefficients(u);
    let weights = symbol(&u.grid, phi)?;
    let s: CompensatedSum = coeffs
        .iter()
        .zip(&weights)
        .map(|(c, w)| (w * w) * c.norm_sqr())
        .collect();
    Ok(s.value().sqrt())
}

/// Points of `Omega` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMask {
    pub grid: GridShape,
    pub inside: Vec<bool>,
}

impl DomainMask {
    pub fn new(grid: GridShape, inside: Vec<bool>) -> Result<Self> {
        grid.validate()?;
        if inside.len() != grid.len() {
            return Err(Error::invalid(format!(
                "mask has {} entries, grid has {}",
                inside.len(),
                grid.len()
            )));
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::invalid("mask must contain at least one point"));
        }
        Ok(Self { grid, inside })
    }

    pub fn full(grid: GridShape) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![true; n])
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_full(&self) -> bool {
        self.inside.iter().all(|&b| b)
    }

    /// Flat indices of masked points, increasing.
    pub fn indices(&self) -> Vec<usize> {
        self.inside
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }

    /// Values of `u` on the masked points.
    pub fn restrict(&self, u: &GridDistribution) -> Result<Vec<Complex64>> {
        if u.grid.shape != self.grid.shape {
            return Err(Error::invalid("mask and distribution live on different grids"));
        }
        Ok(self.indices().into_iter().map(|i| u.samples[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> GridShape {
        GridShape::new(vec![n], vec![l]).unwrap()
    }

    #[test]
    fn parseval() {
        for shape in [vec![16], vec![8, 6], vec![4, 6, 8]] {
            let n = shape.len();
            let g = GridShape::new(shape, vec![1.7; n]).unwrap();
            let u = GridDistribution::random(g, 3).unwrap();
            let h = hormander_norm(&u, &ParamExpr::constant(1.0)).unwrap();
            assert!((h - u.l2_box_norm()).abs() <= 1e-12 * h);
        }
    }

    #[test]
    fn single_mode() {
        let l = 3.0;
        let g = GridShape::new(vec![8, 8], vec![l, l]).unwrap();
        let xi0 = [2.0 * PI * 2.0 / l, -2.0 * PI * 3.0 / l];
        let u = GridDistribution::from_fn(g, |x| Complex64::from_polar(1.0, xi0[0] * x[0] + xi0[1] * x[1])).unwrap();
        let phi = ParamExpr::power(1.5);
        let expect = phi.eval(japanese_bracket(&xi0)).unwrap() * l;
        let got = hormander_norm(&u, &phi).unwrap();
        assert!((got - expect).abs() <= 1e-12 * expect, "{got} vs {expect}");
    }

    #[test]
    fn sine_h1_norm() {
        let g = grid1(64, 2.0 * PI);
        let u = GridDistribution::from_fn(g, |x| Complex64::new(x[0].sin(), 0.0)).unwrap();
        let got = hormander_norm(&u, &ParamExpr::power(1.0)).unwrap();
        assert!((got - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn frequencies_cover_symmetric_range() {
        let g = grid1(6, 2.0 * PI);
        let ks: Vec<f64> = g.frequencies().into_iter().map(|v| v[0]).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridShape::new(vec![7], vec![1.0]).is_err());
        assert!(GridShape::new(vec![8], vec![0.0]).is_err());
        assert!(GridShape::new(vec![2, 2, 2, 2], vec![1.0; 4]).is_err());
        assert!(GridShape::new(vec![8, 8], vec![1.0]).is_err());
        let g = grid1(4, 1.0);
        assert!(GridDistribution::new(g.clone(), vec![Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(GridDistribution::new(g.clone(), vec![Complex64::new(f64::NAN, 0.0); 4]).is_err());
        assert!(DomainMask::new(g, vec![false; 4]).is_err());
    }

    #[test]
    fn scaling_and_parallelogram() {
        let g = GridShape::new(vec![8, 4], vec![1.0, 2.0]).unwrap();
        let u = GridDistribution::random(g.clone(), 1).unwrap();
        let v = GridDistribution::random(g.clone(), 2).unwrap();
        let phi = ParamExpr::power(0.7).times(ParamExpr::log_shift());
        let alpha = Complex64::new(-1.5, 2.0);
        let nu = hormander_norm(&u, &phi).unwrap();
        assert!((hormander_norm(&u.scaled(alpha), &phi).unwrap() - alpha.norm() * nu).abs() <= 1e-12 * nu);

        let add = |s: f64| {
            let samples = u.samples().iter().zip(v.samples()).map(|(a, b)| a + b * s).collect();
            GridDistribution::new(g.clone(), samples).unwrap()
        };
        let lhs = hormander_norm(&add(1.0), &phi).unwrap().powi(2) + hormander_norm(&add(-1.0), &phi).unwrap().powi(2);
        let rhs = 2.0 * (nu * nu + hormander_norm(&v, &phi).unwrap().powi(2));
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn json_round_trip() {
        let u = GridDistribution::random(grid1(4, 1.0), 5).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(serde_json::from_str::<GridDistribution>(&s).unwrap(), u);
        let bad = s.replace("\"n\":1", "\"n\":2");
        assert!(serde_json::from_str::<GridDistribution>(&bad).is_err());
    }
}
