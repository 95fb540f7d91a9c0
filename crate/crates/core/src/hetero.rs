//! Heterogeneity index and H-matrix for structural change detection.
//!
//! `g(base, test)` is the share of the energy of `test`'s lagged vectors that
//! falls outside the span of the chosen left singular vectors of `base`:
//! `g = 1 - sum_j sum_i (U_i^T X_j)^2 / sum_j ||X_j||^2`, so `0 <= g <= 1`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hankel::HankelOperator;
use crate::linalg::{dot, DenseMatrix};
use crate::ssa::{decompose, TimeSeries};
use crate::svd::SvdOptions;

/// Singular values at or below this fraction of `sigma_1` are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeteroParams {
    /// Base subseries length `B`.
    pub base_len: usize,
    /// Test subseries length `T`.
    pub test_len: usize,
    pub window: usize,
    /// 1-based eigentriple indices spanning the base subspace.
    pub indices: Vec<usize>,
}

impl HeteroParams {
    pub fn validate(&self, series_len: usize) -> Result<()> {
        let (b, t, l) = (self.base_len, self.test_len, self.window);
        if l < 2 {
            return Err(invalid(format!("window must be at least 2, got {l}")));
        }
        if b <= l {
            return Err(invalid(format!("base length {b} must exceed window {l}")));
        }
        if t < l {
            return Err(invalid(format!(
                "test length {t} must be at least window {l}"
            )));
        }
        if b > series_len || t > series_len {
            return Err(invalid(format!(
                "base ({b}) and test ({t}) lengths must not exceed series length {series_len}"
            )));
        }
        check_indices(&self.indices, l.min(b - l + 1))
    }
}

fn check_indices(indices: &[usize], limit: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(invalid("empty eigentriple index set"));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > limit) {
        return Err(invalid(format!(
            "eigentriple index {bad} outside 1..={limit}"
        )));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != indices.len() {
        return Err(invalid("duplicate eigentriple index"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct HeterogeneityMatrix {
    /// `(N - B + 1) x (N - T + 1)`; row `i` is the base window starting at `i`.
    pub values: DenseMatrix,
    pub params: HeteroParams,
    pub series_len: usize,
}

/// Orthonormal basis `U_i, i in I` of a base series' trajectory space.
struct BaseSubspace {
    vectors: Vec<Vec<f64>>,
}

impl BaseSubspace {
    fn new(base: &TimeSeries, window: usize, indices: &[usize], opts: &SvdOptions) -> Result<Self> {
        let needed = *indices.iter().max().expect("indices validated nonempty");
        let d = decompose(base, window, needed, opts)?;
        let top = d.triples[0].sigma;
        let available = d
            .triples
            .iter()
            .filter(|t| t.sigma > RANK_TOL * top)
            .count();
        if available < needed {
            return Err(Error::RankDeficient {
                needed,
                available,
                window: None,
            });
        }
        let vectors = indices
            .iter()
            .map(|&i| d.triples[i - 1].u.clone())
            .collect();
        Ok(Self { vectors })
    }
}

/// Lagged vectors of a test series, kept implicitly.
struct TestSeries {
    values: Vec<f64>,
    op: Option<HankelOperator>,
    energy: f64,
}

impl TestSeries {
    fn new(test: &[f64], window: usize) -> Result<Self> {
        if test.len() < window {
            return Err(invalid(format!(
                "test series length {} shorter than window {window}",
                test.len()
            )));
        }
        if test.len() == window {
            let energy = dot(test, test);
            return Ok(Self {
                values: test.to_vec(),
                op: None,
                energy,
            });
        }
        let op = HankelOperator::new(test, window)?;
        let energy = op.frobenius_norm_sq();
        Ok(Self {
            values: test.to_vec(),
            op: Some(op),
            energy,
        })
    }

    /// `sum_j (u^T X_j)^2`, one transpose product.
    fn captured(&self, u: &[f64]) -> Result<f64> {
        match &self.op {
            Some(op) => {
                let p = op.tmatvec(u)?;
                Ok(dot(&p, &p))
            }
            None => Ok(dot(&self.values, u).powi(2)),
        }
    }

    fn index_against(&self, base: &BaseSubspace) -> Result<f64> {
        if self.energy == 0.0 {
            return Err(Error::UndefinedIndex("test series has zero energy".into()));
        }
        let mut captured = 0.0;
        for u in &base.vectors {
            captured += self.captured(u)?;
        }
        Ok((1.0 - captured / self.energy).clamp(0.0, 1.0))
    }
}

pub fn hetero_index(
    base: &TimeSeries,
    test: &TimeSeries,
    window: usize,
    indices: &[usize],
    opts: &SvdOptions,
) -> Result<f64> {
    if window < 2 || window >= base.len() {
        return Err(invalid(format!(
            "window must lie in 2..={}, got {window}",
            base.len() - 1
        )));
    }
    check_indices(indices, window.min(base.len() - window + 1))?;
    let test = TestSeries::new(test.values(), window)?;
    if test.energy == 0.0 {
        return Err(Error::UndefinedIndex("test series has zero energy".into()));
    }
    let subspace = BaseSubspace::new(base, window, indices, opts)?;
    test.index_against(&subspace)
}

/// H-matrix `g_ij = g(F[i..i+B), F[j..j+T))` over all base/test window starts.
///
/// Each base decomposition is computed once and reused across its row; rows
/// are evaluated in parallel.
pub fn h_matrix(
    series: &TimeSeries,
    params: &HeteroParams,
    opts: &SvdOptions,
) -> Result<HeterogeneityMatrix> {
    let n = series.len();
    params.validate(n)?;
    let (b, t, l) = (params.base_len, params.test_len, params.window);
    let rows = n - b + 1;
    let cols = n - t + 1;
    let values = series.values();

    let tests: Vec<TestSeries> = (0..cols)
        .into_par_iter()
        .map(|j| TestSeries::new(&values[j..j + t], l))
        .collect::<Result<_>>()?;

    let grid: Vec<Result<Vec<f64>>> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let base = series.slice(i, b)?;
            let subspace =
                BaseSubspace::new(&base, l, &params.indices, opts).map_err(|e| match e {
                    Error::RankDeficient {
                        needed, available, ..
                    } => Error::RankDeficient {
                        needed,
                        available,
                        window: Some(i + 1),
                    },
                    other => other,
                })?;
            tests
                .iter()
                .map(|test| test.index_against(&subspace))
                .collect::<Result<Vec<f64>>>()
        })
        .collect();
    // first failing row wins, independent of scheduling
    let grid = grid.into_iter().collect::<Result<Vec<_>>>()?;

    Ok(HeterogeneityMatrix {
        values: DenseMatrix::from_rows(&grid)?,
        params: params.clone(),
        series_len: n,
    })
}
