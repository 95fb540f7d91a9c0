//! Discrete Fourier transforms and the convolution kernels built on them.
//!
//! Conventions: the forward transform is unnormalized,
//! `X[l] = sum_k x[k] exp(-2 pi i k l / n)`, and the inverse carries the
//! `1/n` factor so that `inverse(forward(x)) == x`.
//!
//! Arbitrary lengths are handled in O(n log n) by `rustfft`, which picks
//! mixed-radix, Rader or Bluestein algorithms as needed.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

/// Relative size of the imaginary residue tolerated after a real convolution.
const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// A pair of precomputed forward/inverse transforms of one fixed length.
///
/// Plans are immutable and `Send + Sync`, so one plan can serve many threads.
#[derive(Clone)]
pub struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftPlan").field("len", &self.len).finish()
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("transform length must be at least 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place unnormalized forward transform. `buf.len()` must equal `self.len()`.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        self.forward.process(buf);
    }

    /// In-place inverse transform including the `1/n` normalization.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    /// Multiplies the spectrum of `buf` by `spectrum` and transforms back:
    /// the circular convolution of `buf` with the signal whose spectrum is given.
    pub(crate) fn convolve_with_spectrum(&self, buf: &mut [Complex64], spectrum: &[Complex64]) {
        debug_assert_eq!(spectrum.len(), self.len);
        self.forward_in_place(buf);
        for (z, s) in buf.iter_mut().zip(spectrum) {
            *z *= s;
        }
        self.inverse_in_place(buf);
    }
}

pub fn dft_forward(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(x.len())?;
    let mut buf = x.to_vec();
    plan.forward_in_place(&mut buf);
    Ok(buf)
}

pub fn dft_inverse(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(x.len())?;
    let mut buf = x.to_vec();
    plan.inverse_in_place(&mut buf);
    Ok(buf)
}

/// Circular convolution `r[k] = sum_j u[j] v[(k - j) mod n]`, via FFT.
pub fn circular_convolve(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(invalid(format!(
            "circular convolution needs equal lengths, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let plan = FftPlan::new(u.len())?;
    let mut a = to_complex(u);
    let mut b = to_complex(v);
    plan.forward_in_place(&mut a);
    plan.forward_in_place(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    plan.inverse_in_place(&mut a);
    Ok(real_part(&a, l2_norm(u) * l2_norm(v)))
}

/// Full linear convolution of lengths `L` and `K`, producing `L + K - 1` values.
pub fn linear_convolve(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if u.is_empty() || v.is_empty() {
        return Err(invalid("linear convolution of an empty vector"));
    }
    let n = u.len() + v.len() - 1;
    let mut up = vec![0.0; n];
    let mut vp = vec![0.0; n];
    up[..u.len()].copy_from_slice(u);
    vp[..v.len()].copy_from_slice(v);
    circular_convolve(&up, &vp)
}

pub(crate) fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&re| Complex64::new(re, 0.0)).collect()
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Drops the imaginary parts of a transform that is real up to rounding.
///
/// `scale` bounds the magnitude of the exact result (product of input norms);
/// the residue is checked against it rather than the output, which may cancel.
pub(crate) fn real_part(z: &[Complex64], scale: f64) -> Vec<f64> {
    if cfg!(debug_assertions) {
        let re_norm = z.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
        let im_norm = z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        debug_assert!(
            im_norm <= IMAG_RESIDUE_TOL * re_norm.max(scale) || im_norm == 0.0,
            "imaginary residue {im_norm:e} too large relative to {re_norm:e}"
        );
    }
    z.iter().map(|c| c.re).collect()
}
