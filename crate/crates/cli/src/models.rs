//! Built-in test series and the noise generator shared by the experiments.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Name of the noise generator, recorded in output metadata.
pub const NOISE_GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), one stream per replicate; StandardNormal (rand_distr 0.5, ziggurat)";

/// Rank-5 model: `10 exp(-5n/N) + sin(2pi/13 n/N) + 2.5 sin(2pi/37 n/N)`, `n = 1..N`.
pub fn rank5_series(n: usize) -> Vec<f64> {
    let len = n as f64;
    (1..=n)
        .map(|k| {
            let t = k as f64 / len;
            10.0 * (-5.0 * t).exp()
                + (2.0 * PI / 13.0 * t).sin()
                + 2.5 * (2.0 * PI / 37.0 * t).sin()
        })
        .collect()
}

/// Sine of period 10 for `n < q` and period 10.5 from `n = q` on (1-based),
/// plus `0.01` white Gaussian noise.
pub fn change_point_series(n: usize, q: usize, seed: u64) -> Vec<f64> {
    let noise = gaussian_noise(n, seed, 0);
    (1..=n)
        .zip(noise)
        .map(|(k, e)| {
            let period = if k < q { 10.0 } else { 10.5 };
            (2.0 * PI * k as f64 / period).sin() + 0.01 * e
        })
        .collect()
}

/// `n` standard normal deviates from stream `stream` of the ChaCha8 generator keyed by `seed`.
pub fn gaussian_noise(n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        assert_eq!(gaussian_noise(16, 7, 3), gaussian_noise(16, 7, 3));
        assert_ne!(gaussian_noise(16, 7, 3), gaussian_noise(16, 7, 4));
        assert_ne!(gaussian_noise(16, 7, 3), gaussian_noise(16, 8, 3));
    }

    #[test]
    fn noise_moments() {
        let e = gaussian_noise(20_000, 1, 0);
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / e.len() as f64;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn change_point_switches_period() {
        let f = change_point_series(40, 21, 0);
        let clean = |k: usize, p: f64| (2.0 * PI * k as f64 / p).sin();
        assert!((f[19] - clean(20, 10.0)).abs() < 0.1);
        assert!((f[20] - clean(21, 10.5)).abs() < 0.1);
    }

    #[test]
    fn rank5_first_value() {
        let f = rank5_series(1000);
        let t: f64 = 0.001;
        let want = 10.0 * (-5.0 * t).exp()
            + (2.0 * PI / 13.0 * t).sin()
            + 2.5 * (2.0 * PI / 37.0 * t).sin();
        assert_eq!(f[0], want);
    }
}
