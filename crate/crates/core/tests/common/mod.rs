//! Dense oracles built on nalgebra, independent of the crate's fast paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn trajectory(series: &[f64], l: usize) -> DMatrix<f64> {
    let k = series.len() - l + 1;
    DMatrix::from_fn(l, k, |i, j| series[i + j])
}

/// Singular values of `X` as square roots of the eigenvalues of `X X^T`, descending.
pub fn cross_product_sigmas(x: &DMatrix<f64>) -> Vec<f64> {
    let gram = x * x.transpose();
    let eig = SymmetricEigen::new(gram);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Leading left singular vectors of `X` (columns), from the eigenvectors of `X X^T`.
pub fn leading_left_vectors(x: &DMatrix<f64>, count: usize) -> Vec<DVector<f64>> {
    let eig = SymmetricEigen::new(x * x.transpose());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order
        .iter()
        .take(count)
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

/// Heterogeneity index in its distance form: explicit lagged vectors and
/// explicit projections onto the span of the chosen eigenvectors.
pub fn dense_hetero(base: &[f64], test: &[f64], l: usize, indices: &[usize]) -> f64 {
    let xb = trajectory(base, l);
    let top = *indices.iter().max().unwrap();
    let all = leading_left_vectors(&xb, top);
    let basis: Vec<&DVector<f64>> = indices.iter().map(|&i| &all[i - 1]).collect();
    let xt = trajectory(test, l);
    let mut dist = 0.0;
    let mut energy = 0.0;
    for j in 0..xt.ncols() {
        let col = xt.column(j).into_owned();
        let mut proj = DVector::zeros(l);
        for u in &basis {
            proj += *u * u.dot(&col);
        }
        dist += (&col - proj).norm_squared();
        energy += col.norm_squared();
    }
    dist / energy
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Change-point test series: period 10 before `q`, period 10.5 from `q` on
/// (1-based `n`), plus `0.01` times standard-normal-ish noise.
pub fn change_point_series(n: usize, q: usize, seed: u64) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut r = rng(seed);
    (1..=n)
        .map(|k| {
            let period = if k < q { 10.0 } else { 10.5 };
            // sum of 12 uniforms minus 6: unit variance, adequate for a test fixture
            let eps: f64 = (0..12).map(|_| r.random_range(0.0..1.0)).sum::<f64>() - 6.0;
            (2.0 * PI * k as f64 / period).sin() + 0.01 * eps
        })
        .collect()
}

/// Noise-free finite-rank test series used for the rank-5 checks.
pub fn rank5_series(n: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (1..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            10.0 * (-5.0 * t).exp()
                + (2.0 * PI / 13.0 * t).sin()
                + 2.5 * (2.0 * PI / 37.0 * t).sin()
        })
        .collect()
}
