//! Basic SSA: embed, decompose, group and diagonally average.
//!
//! The trajectory matrix is never formed. Decomposition goes through
//! [`HankelOperator`] and [`trunc_svd`]; reconstruction hankelizes one
//! elementary matrix `sigma u v^T` at a time as a linear convolution of `u`
//! and `v` divided by antidiagonal lengths.

use crate::dft::linear_convolve;
use crate::error::{invalid, Result};
use crate::hankel::{antidiagonal_len, HankelOperator};
use crate::linalg::DenseMatrix;
use crate::svd::{trunc_svd, SingularTriple, SvdOptions, SvdReport};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    name: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(invalid(format!(
                "series needs at least 3 values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at index {pos}")));
        }
        Ok(Self { values, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values `start..start + len` (0-based) as a new series.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(invalid("subseries out of range"));
        }
        Self::new(self.values[start..start + len].to_vec())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub series_len: usize,
    pub window: usize,
    /// Descending by `sigma`; `u` has length `L`, `v` length `K`.
    pub triples: Vec<SingularTriple>,
    pub converged: usize,
    /// Sum of `sigma_i^2` over the computed triples.
    pub frobenius_captured: f64,
    pub report: SvdReport,
}

impl Decomposition {
    pub fn k(&self) -> usize {
        self.series_len - self.window + 1
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.triples.iter().map(|t| t.sigma).collect()
    }
}

pub fn decompose(
    series: &TimeSeries,
    window: usize,
    nev: usize,
    opts: &SvdOptions,
) -> Result<Decomposition> {
    let op = HankelOperator::new(series.values(), window)?;
    let svd = trunc_svd(&op, nev, opts)?;
    let frobenius_captured = svd.triples.iter().map(|t| t.sigma * t.sigma).sum();
    Ok(Decomposition {
        series_len: series.len(),
        window,
        converged: svd.triples.len(),
        triples: svd.triples,
        frobenius_captured,
        report: svd.report,
    })
}

/// Diagonal averaging of `sigma u v^T` in `O(N log N)`.
pub fn hankelize_rank1(sigma: f64, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if !sigma.is_finite() || u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(invalid("non-finite input to hankelization"));
    }
    let (l, k) = (u.len(), v.len());
    let mut g = linear_convolve(u, v)?;
    let n = g.len();
    for (idx, x) in g.iter_mut().enumerate() {
        *x *= sigma / antidiagonal_len(idx, n, l, k) as f64;
    }
    Ok(g)
}

/// Direct `O(LK)` diagonal averaging of `sigma u v^T` without forming the matrix.
pub fn naive_hankelize_rank1(sigma: f64, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if u.is_empty() || v.is_empty() {
        return Err(invalid("hankelization of an empty vector"));
    }
    let (l, k) = (u.len(), v.len());
    let n = l + k - 1;
    let mut g = vec![0.0; n];
    for (i, a) in u.iter().enumerate() {
        for (slot, b) in g[i..i + k].iter_mut().zip(v) {
            *slot += a * b;
        }
    }
    for (idx, x) in g.iter_mut().enumerate() {
        *x *= sigma / antidiagonal_len(idx, n, l, k) as f64;
    }
    Ok(g)
}

/// Direct diagonal averaging of an explicit `L x K` matrix.
pub fn naive_diag_avg(y: &DenseMatrix) -> Result<Vec<f64>> {
    if !y.is_finite() {
        return Err(invalid("non-finite matrix entry"));
    }
    let (l, k) = (y.rows(), y.cols());
    let n = l + k - 1;
    let mut sums = vec![0.0; n];
    for i in 0..l {
        for (j, value) in y.row(i).iter().enumerate() {
            sums[i + j] += value;
        }
    }
    for (idx, s) in sums.iter_mut().enumerate() {
        *s /= antidiagonal_len(idx, n, l, k) as f64;
    }
    Ok(sums)
}

/// Series for the grouped matrix `X_I`, with `group` holding 1-based triple indices.
pub fn reconstruct(d: &Decomposition, group: &[usize]) -> Result<TimeSeries> {
    if group.is_empty() {
        return Err(invalid("empty group"));
    }
    if let Some(&bad) = group.iter().find(|&&i| i == 0 || i > d.triples.len()) {
        return Err(invalid(format!(
            "group index {bad} outside 1..={}",
            d.triples.len()
        )));
    }
    let mut out = vec![0.0; d.series_len];
    for &i in group {
        let t = &d.triples[i - 1];
        let part = hankelize_rank1(t.sigma, &t.u, &t.v)?;
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    TimeSeries::new(out)
}
