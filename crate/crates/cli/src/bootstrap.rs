//! Bootstrap bands for the rank-`r` reconstruction of a noisy model series.

use std::fs;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use ssa_core::svd::SvdOptions;
use ssa_core::{decompose, reconstruct, TimeSeries};

use crate::models::{gaussian_noise, rank5_series, NOISE_GENERATOR};
use crate::output::{with_suffix, write_json};
use crate::{CliError, CliResult, RunConfig, SCHEMA_VERSION};

#[derive(Debug, Clone)]
pub struct Bands {
    pub truth: Vec<f64>,
    pub mean: Vec<f64>,
    pub quantiles: Vec<f64>,
    /// `bands[q][n]`: pointwise quantile `quantiles[q]` across replicates.
    pub bands: Vec<Vec<f64>>,
    /// Fraction of interior points where the outermost bands contain `truth`.
    pub coverage: f64,
    /// Half-open interior range `[N/10, N - N/10)`, 0-based.
    pub interior: (usize, usize),
    pub seconds_per_replicate: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data (type 7: `h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn interior_range(n: usize) -> (usize, usize) {
    (n / 10, n - n / 10)
}

/// Runs `replicates` reconstructions of `rank5_series(n) + sigma * noise`.
///
/// Replicate `r` draws its noise from stream `r` of the generator keyed by
/// `seed`, so results do not depend on the thread count.
pub fn run_bootstrap(
    n: usize,
    window: usize,
    sigma: f64,
    replicates: usize,
    rank: usize,
    quantiles: &[f64],
    opts: &SvdOptions,
) -> CliResult<Bands> {
    if replicates < 2 {
        return Err(CliError::usage("at least 2 replicates are needed"));
    }
    if rank == 0 {
        return Err(CliError::usage("--rank must be at least 1"));
    }
    if quantiles.is_empty() {
        return Err(CliError::usage("at least one quantile is needed"));
    }
    let truth = rank5_series(n);
    let group: Vec<usize> = (1..=rank).collect();
    let runs: Vec<CliResult<(Vec<f64>, f64)>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let start = Instant::now();
            let noise = gaussian_noise(n, opts.seed, r as u64);
            let noisy: Vec<f64> = truth
                .iter()
                .zip(&noise)
                .map(|(f, e)| f + sigma * e)
                .collect();
            let series = TimeSeries::new(noisy)?;
            let d = decompose(&series, window, rank, opts)?;
            let g = reconstruct(&d, &group)?.into_values();
            Ok((g, start.elapsed().as_secs_f64()))
        })
        .collect();
    let mut recs = Vec::with_capacity(replicates);
    let mut seconds_per_replicate = Vec::with_capacity(replicates);
    for run in runs {
        let (g, s) = run?;
        recs.push(g);
        seconds_per_replicate.push(s);
    }

    let mut mean = vec![0.0; n];
    let mut bands = vec![vec![0.0; n]; quantiles.len()];
    let mut column = vec![0.0; replicates];
    for t in 0..n {
        for (c, g) in column.iter_mut().zip(&recs) {
            *c = g[t];
        }
        // summed in replicate order so the mean is reproducible
        mean[t] = column.iter().sum::<f64>() / replicates as f64;
        column.sort_by(f64::total_cmp);
        for (b, &p) in bands.iter_mut().zip(quantiles) {
            b[t] = quantile_sorted(&column, p);
        }
    }

    let interior = interior_range(n);
    let (lower, upper) = (&bands[0], &bands[bands.len() - 1]);
    let covered = (interior.0..interior.1)
        .filter(|&t| lower[t] <= truth[t] && truth[t] <= upper[t])
        .count();
    let coverage = covered as f64 / (interior.1 - interior.0).max(1) as f64;

    Ok(Bands {
        truth,
        mean,
        quantiles: quantiles.to_vec(),
        bands,
        coverage,
        interior,
        seconds_per_replicate,
    })
}

#[derive(Serialize)]
struct BootstrapJson<'a> {
    schema: u32,
    config: &'a RunConfig,
    seed: u64,
    model: &'static str,
    noise_generator: &'static str,
    quantile_method: &'static str,
    interior: (usize, usize),
    coverage: f64,
    max_band_width: f64,
}

#[derive(Serialize)]
struct TimingJson<'a> {
    schema: u32,
    command: &'a str,
    seed: u64,
    seconds: f64,
    seconds_per_replicate: &'a [f64],
}

pub fn cmd_bootstrap_ci(config: &RunConfig) -> CliResult<Bands> {
    let out = config.require(&config.output, "--output")?;
    let n = config.require(&config.series_len, "--series-len")?;
    let window = config.require(&config.window, "--window")?;
    let sigma = config.require(&config.noise_sigma, "--noise-sigma")?;
    let replicates = config.require(&config.replicates, "--replicates")?;
    let rank = config.require(&config.rank, "--rank")?;
    let quantiles = config.require(&config.quantiles, "--quantiles")?;

    let start = Instant::now();
    let b = run_bootstrap(
        n,
        window,
        sigma,
        replicates,
        rank,
        &quantiles,
        &config.svd_options(),
    )?;
    let seconds = start.elapsed().as_secs_f64();

    let mut csv = String::from("n,truth,mean");
    for q in &quantiles {
        csv.push_str(&format!(",q{q}"));
    }
    csv.push('\n');
    for t in 0..n {
        csv.push_str(&format!("{},{},{}", t + 1, b.truth[t], b.mean[t]));
        for band in &b.bands {
            csv.push_str(&format!(",{}", band[t]));
        }
        csv.push('\n');
    }
    fs::write(with_suffix(&out, ".bands.csv"), csv)?;

    let (lo, hi) = (&b.bands[0], &b.bands[b.bands.len() - 1]);
    let max_band_width = lo.iter().zip(hi).fold(0.0f64, |m, (a, c)| m.max(c - a));
    write_json(
        &with_suffix(&out, ".json"),
        &BootstrapJson {
            schema: SCHEMA_VERSION,
            config,
            seed: config.seed,
            model: "f_n = 10 exp(-5n/N) + sin(2pi/13 n/N) + 2.5 sin(2pi/37 n/N), n = 1..N",
            noise_generator: NOISE_GENERATOR,
            quantile_method: "linear interpolation, h = (R - 1) p",
            interior: b.interior,
            coverage: b.coverage,
            max_band_width,
        },
    )?;
    write_json(
        &with_suffix(&out, ".timing.json"),
        &TimingJson {
            schema: SCHEMA_VERSION,
            command: &config.command,
            seed: config.seed,
            seconds,
            seconds_per_replicate: &b.seconds_per_replicate,
        },
    )?;
    Ok(b)
}
