//! Quotient norms over grid masks: the smallest Hörmander norm among all
//! extensions of data given on the masked points.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fft_nd, hormander_norm, symbol, DomainMask, GridDistribution};
use crate::error::{Error, Result};
use crate::param::ParamExpr;

/// Largest grid handled by the dense solve.
pub const MAX_QUOTIENT_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSolution {
    pub norm: f64,
    /// The minimizing extension.
    pub minimizer: GridDistribution,
    /// Squared ratio of the extreme Cholesky pivots, a lower bound for the
    /// condition number of the constraint system.
    pub condition_estimate: f64,
}

/// Minimizes `||u||_{H^phi}` subject to `u = v` on the mask.
///
/// With `B` the Hermitian form of the norm, the minimizer is
/// `u = B^{-1} M^T mu` where `(M B^{-1} M^T) mu = v`. `B^{-1}` is the
/// circular convolution with the inverse transform of `phi(<xi>)^{-2}`, so
/// the constraint matrix is real symmetric positive definite and factored
/// by Cholesky; `u` is then recovered by FFT.
pub fn quotient_solve(v: &[Complex64], mask: &DomainMask, phi: &ParamExpr) -> Result<QuotientSolution> {
    let grid = &mask.grid;
    let total = grid.len();
    if total > MAX_QUOTIENT_POINTS {
        return Err(Error::invalid(format!(
            "grid has {total} points, the dense solve is capped at {MAX_QUOTIENT_POINTS}"
        )));
    }
    let idx = mask.indices();
    if v.len() != idx.len() {
        return Err(Error::invalid(format!(
            "mask has {} points, got {} values",
            idx.len(),
            v.len()
        )));
    }
    if v.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::invalid("values must be finite"));
    }
    let weights = symbol(grid, phi)?;
    let h = grid.cell_volume();

    if mask.is_full() {
        let u = GridDistribution::new(grid.clone(), v.to_vec())?;
        return Ok(QuotientSolution {
            norm: hormander_norm(&u, phi)?,
            minimizer: u,
            condition_estimate: 1.0,
        });
    }

    // kernel of B^{-1}: ifft(phi^{-2}) / h, real and even
    let inv_sq: Vec<Complex64> = weights.iter().map(|w| Complex64::new(1.0 / (w * w), 0.0)).collect();
    let mut kernel = inv_sq.clone();
    fft_nd(&mut kernel, &grid.shape, true);
    let kscale = 1.0 / (total as f64 * h);
    let kernel: Vec<f64> = kernel.iter().map(|c| c.re * kscale).collect();

    let multi: Vec<Vec<usize>> = idx.iter().map(|&i| grid.unravel(i)).collect();
    let offset = |a: &[usize], b: &[usize]| {
        let mut flat = 0;
        for ax in 0..grid.dim() {
            let n = grid.shape[ax];
            flat = flat * n + (a[ax] + n - b[ax]) % n;
        }
        flat
    };
    let m = idx.len();
    let g = DMatrix::from_fn(m, m, |a, b| kernel[offset(&multi[a], &multi[b])]);
    let chol = match g.clone().cholesky() {
        Some(c) => c,
        None => {
            let eig = g.symmetric_eigenvalues();
            let (lo, hi) = eig
                .iter()
                .fold((f64::INFINITY, 0f64), |(lo, hi), e| (lo.min(*e), hi.max(e.abs())));
            return Err(Error::Numerical {
                reason: "constraint system is not positive definite".into(),
                condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            });
        }
    };
    let l = chol.l_dirty();
    let (dmin, dmax) = (0..m).fold((f64::INFINITY, 0f64), |(a, b), i| (a.min(l[(i, i)]), b.max(l[(i, i)])));
    let condition_estimate = (dmax / dmin).powi(2);

    let re = nalgebra::DVector::from_iterator(m, v.iter().map(|c| c.re));
    let im = nalgebra::DVector::from_iterator(m, v.iter().map(|c| c.im));
    let mu_re = chol.solve(&re);
    let mu_im = chol.solve(&im);
    let norm_sq = re.dot(&mu_re) + im.dot(&mu_im);

    // u = B^{-1} M^T mu by FFT
    let mut z = vec![Complex64::new(0.0, 0.0); total];
    for (a, &i) in idx.iter().enumerate() {
        z[i] = Complex64::new(mu_re[a], mu_im[a]);
    }
    fft_nd(&mut z, &grid.shape, false);
    for (c, w) in z.iter_mut().zip(&inv_sq) {
        *c *= w.re;
    }
    fft_nd(&mut z, &grid.shape, true);
    z.iter_mut().for_each(|c| *c *= kscale);
    // pin the constraint exactly; the FFT round trip leaves rounding noise
    for (a, &i) in idx.iter().enumerate() {
        z[i] = v[a];
    }
    Ok(QuotientSolution {
        norm: norm_sq.max(0.0).sqrt(),
        minimizer: GridDistribution::new(grid.clone(), z)?,
        condition_estimate,
    })
}

/// `inf { ||u||_{H^phi} : u = v on the mask }`.
pub fn quotient_norm(v: &[Complex64], mask: &DomainMask, phi: &ParamExpr) -> Result<f64> {
    Ok(quotient_solve(v, mask, phi)?.norm)
}
