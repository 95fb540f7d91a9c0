//! Implicit Hankel trajectory matrices with FFT matrix-vector products.
//!
//! For a series `f_1..f_N` and window `L` the trajectory matrix is the
//! `L x K` Hankel matrix `X[i][j] = f_{i+j-1}`, `K = N - L + 1`. Reversing the
//! columns of `X` gives a Toeplitz matrix, which sits in the top-left corner of
//! an `N x N` circulant with first column
//! `c = (f_{K}, .., f_N, f_1, .., f_{K-1})`. Both `Xv` and `X^T v` are then one
//! circular convolution against the precomputed spectrum of `c`.

use num_complex::Complex64;

use crate::dft::{real_part, FftPlan};
use crate::error::{invalid, Error, Result};
use crate::linalg::{norm, DenseMatrix};
use crate::svd::LinearOperator;

/// Default cap on `L * K` for [`HankelOperator::dense_materialize`].
pub const DEFAULT_DENSE_CAP: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct HankelOperator {
    series: Vec<f64>,
    window: usize,
    plan: FftPlan,
    circulant_spectrum: Vec<Complex64>,
}

fn check_window(n: usize, window: usize) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!(
            "series length must be at least 3, got {n}"
        )));
    }
    if window < 2 || window > n - 1 {
        return Err(invalid(format!(
            "window must lie in 2..={}, got {window}",
            n - 1
        )));
    }
    Ok(())
}

impl HankelOperator {
    pub fn new(series: &[f64], window: usize) -> Result<Self> {
        let n = series.len();
        check_window(n, window)?;
        if let Some(pos) = series.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite series value at index {pos}")));
        }
        let k = n - window + 1;
        let plan = FftPlan::new(n)?;
        let mut spectrum: Vec<Complex64> = series[k - 1..]
            .iter()
            .chain(&series[..k - 1])
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        plan.forward_in_place(&mut spectrum);
        Ok(Self {
            series: series.to_vec(),
            window,
            plan,
            circulant_spectrum: spectrum,
        })
    }

    pub fn series(&self) -> &[f64] {
        &self.series
    }

    pub fn series_len(&self) -> usize {
        self.series.len()
    }

    /// Window length `L` (number of rows).
    pub fn window(&self) -> usize {
        self.window
    }

    /// `K = N - L + 1` (number of columns).
    pub fn k(&self) -> usize {
        self.series.len() - self.window + 1
    }

    pub fn circulant_spectrum(&self) -> &[Complex64] {
        &self.circulant_spectrum
    }

    /// `X v` for `v` of length `K`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let (n, l, k) = (self.series_len(), self.window, self.k());
        if v.len() != k {
            return Err(invalid(format!(
                "matvec expects length {k}, got {}",
                v.len()
            )));
        }
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for (slot, &x) in w.iter_mut().zip(v.iter().rev()) {
            slot.re = x;
        }
        self.plan
            .convolve_with_spectrum(&mut w, &self.circulant_spectrum);
        Ok(real_part(&w[..l], norm(&self.series) * norm(v)))
    }

    /// `X^T v` for `v` of length `L`.
    pub fn tmatvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let (n, l) = (self.series_len(), self.window);
        if v.len() != l {
            return Err(invalid(format!(
                "tmatvec expects length {l}, got {}",
                v.len()
            )));
        }
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for (slot, &x) in w[n - l..].iter_mut().zip(v.iter().rev()) {
            slot.re = x;
        }
        self.plan
            .convolve_with_spectrum(&mut w, &self.circulant_spectrum);
        // Entries L..=N (1-based) of the circular product hold X^T v.
        Ok(real_part(&w[l - 1..], norm(&self.series) * norm(v)))
    }

    pub fn dense_materialize(&self) -> Result<DenseMatrix> {
        self.dense_materialize_capped(DEFAULT_DENSE_CAP)
    }

    pub fn dense_materialize_capped(&self, cap: usize) -> Result<DenseMatrix> {
        let (l, k) = (self.window, self.k());
        let requested = l.saturating_mul(k);
        if requested > cap {
            return Err(Error::ResourceLimit { requested, cap });
        }
        let mut m = DenseMatrix::zeros(l, k);
        for i in 0..l {
            for j in 0..k {
                m.set(i, j, self.series[i + j]);
            }
        }
        Ok(m)
    }

    /// `||X||_F^2`, i.e. each `f_k^2` weighted by the length of its antidiagonal.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let (n, l, k) = (self.series_len(), self.window, self.k());
        self.series
            .iter()
            .enumerate()
            .map(|(idx, f)| antidiagonal_len(idx, n, l, k) as f64 * f * f)
            .sum()
    }
}

impl LinearOperator for HankelOperator {
    fn nrows(&self) -> usize {
        self.window
    }

    fn ncols(&self) -> usize {
        self.k()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matvec(x)
    }

    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.tmatvec(x)
    }
}

/// Number of entries on antidiagonal `idx` (0-based) of an `L x K` matrix with
/// `N = L + K - 1` antidiagonals.
pub(crate) fn antidiagonal_len(idx: usize, n: usize, l: usize, k: usize) -> usize {
    (idx + 1).min(n - idx).min(l.min(k))
}

/// Direct `O(LK)` product `X v`, with `X[i][j] = series[i + j]`.
pub fn naive_matvec(series: &[f64], window: usize, v: &[f64]) -> Result<Vec<f64>> {
    check_window(series.len(), window)?;
    let k = series.len() - window + 1;
    if v.len() != k {
        return Err(invalid(format!(
            "matvec expects length {k}, got {}",
            v.len()
        )));
    }
    Ok((0..window)
        .map(|i| series[i..i + k].iter().zip(v).map(|(a, b)| a * b).sum())
        .collect())
}

/// Direct `O(LK)` product `X^T v`.
pub fn naive_tmatvec(series: &[f64], window: usize, v: &[f64]) -> Result<Vec<f64>> {
    check_window(series.len(), window)?;
    let k = series.len() - window + 1;
    if v.len() != window {
        return Err(invalid(format!(
            "tmatvec expects length {window}, got {}",
            v.len()
        )));
    }
    Ok((0..k)
        .map(|j| {
            series[j..j + window]
                .iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect())
}
