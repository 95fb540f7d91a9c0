//! Fast versus direct kernel timings.

use std::fs;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use ssa_core::hankel::{naive_matvec, DEFAULT_DENSE_CAP};
use ssa_core::linalg::DenseMatrix;
use ssa_core::{hankelize_rank1, naive_diag_avg, naive_hankelize_rank1, HankelOperator};

use crate::config::BenchTarget;
use crate::output::{with_suffix, write_json};
use crate::{CliError, CliResult, RunConfig, SCHEMA_VERSION};

/// Default cap on `L * K` for the direct kernels (multiply-adds per call).
pub const DEFAULT_NAIVE_CAP: usize = 1 << 32;
/// Fast and direct outputs must agree to this, relative to the largest direct entry.
pub const AGREEMENT_TOL: f64 = 1e-8;
/// Rank-one terms summed by the `reconstruct` target.
pub const RECONSTRUCT_TERMS: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub target: &'static str,
    pub n: usize,
    pub window: usize,
    pub reps: usize,
    /// Median wall time of one fast call, seconds.
    pub fast_s: f64,
    /// `None` when the direct path was skipped.
    pub naive_s: Option<f64>,
    pub max_rel_diff: Option<f64>,
}

impl BenchRow {
    pub fn speedup(&self) -> Option<f64> {
        self.naive_s.map(|n| n / self.fast_s)
    }

    fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| {
            v.map(|x| format!("{x:.6e}"))
                .unwrap_or_else(|| "skipped".into())
        };
        format!(
            "{},{},{},{},{:.6e},{},{},{}",
            self.target,
            self.n,
            self.window,
            self.reps,
            self.fast_s,
            opt(self.naive_s),
            opt(self.speedup()),
            opt(self.max_rel_diff)
        )
    }
}

pub const CSV_HEADER: &str =
    "target,n,window,reps,fast_median_s,naive_median_s,speedup,max_rel_diff";

/// Median wall time of `reps` calls after one untimed warmup call.
pub fn median_time<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    std::hint::black_box(f());
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let m = times.len() / 2;
    if times.len() % 2 == 1 {
        times[m]
    } else {
        0.5 * (times[m - 1] + times[m])
    }
}

fn max_rel_diff(fast: &[f64], naive: &[f64]) -> f64 {
    let scale = naive
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    fast.iter()
        .zip(naive)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

fn check_agreement(target: BenchTarget, n: usize, fast: &[f64], naive: &[f64]) -> CliResult<f64> {
    let d = max_rel_diff(fast, naive);
    if d.is_nan() || d > AGREEMENT_TOL {
        return Err(CliError::numerical(format!(
            "{} at n={n}: fast and direct outputs differ by {d:e} (tolerance {AGREEMENT_TOL:e})",
            target.name()
        )));
    }
    Ok(d)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Times one target at one size with `L = N / 2`.
pub fn bench_one(
    target: BenchTarget,
    n: usize,
    reps: usize,
    naive_cap: usize,
    seed: u64,
) -> CliResult<BenchRow> {
    let l = n / 2;
    let k = n - l + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    let mut row = BenchRow {
        target: target.name(),
        n,
        window: l,
        reps,
        fast_s: 0.0,
        naive_s: None,
        max_rel_diff: None,
    };
    match target {
        BenchTarget::Matvec => {
            let series = uniform(&mut rng, n);
            let v = uniform(&mut rng, k);
            let op = HankelOperator::new(&series, l)?;
            let fast = op.matvec(&v)?;
            if l * k <= naive_cap {
                let naive = naive_matvec(&series, l, &v)?;
                row.max_rel_diff = Some(check_agreement(target, n, &fast, &naive)?);
                row.naive_s = Some(median_time(reps, || naive_matvec(&series, l, &v)));
            }
            row.fast_s = median_time(reps, || op.matvec(&v));
        }
        BenchTarget::Hankelize => {
            let u = uniform(&mut rng, l);
            let v = uniform(&mut rng, k);
            let fast = hankelize_rank1(1.5, &u, &v)?;
            if l * k <= naive_cap {
                let naive = naive_hankelize_rank1(1.5, &u, &v)?;
                row.max_rel_diff = Some(check_agreement(target, n, &fast, &naive)?);
                row.naive_s = Some(median_time(reps, || naive_hankelize_rank1(1.5, &u, &v)));
            }
            row.fast_s = median_time(reps, || hankelize_rank1(1.5, &u, &v));
        }
        BenchTarget::Reconstruct => {
            let terms: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..RECONSTRUCT_TERMS)
                .map(|i| {
                    (
                        (RECONSTRUCT_TERMS - i) as f64,
                        uniform(&mut rng, l),
                        uniform(&mut rng, k),
                    )
                })
                .collect();
            let fast_path = || -> ssa_core::Result<Vec<f64>> {
                let mut out = vec![0.0; n];
                for (s, u, v) in &terms {
                    for (o, p) in out.iter_mut().zip(hankelize_rank1(*s, u, v)?) {
                        *o += p;
                    }
                }
                Ok(out)
            };
            // The direct path builds the grouped matrix, so it is bound by memory as well.
            let naive_path = || -> ssa_core::Result<Vec<f64>> {
                let mut y = DenseMatrix::zeros(l, k);
                for (s, u, v) in &terms {
                    for (i, ui) in u.iter().enumerate() {
                        for (j, vj) in v.iter().enumerate() {
                            y.set(i, j, y.get(i, j) + s * ui * vj);
                        }
                    }
                }
                naive_diag_avg(&y)
            };
            let fast = fast_path()?;
            if l * k <= naive_cap.min(DEFAULT_DENSE_CAP) {
                let naive = naive_path()?;
                row.max_rel_diff = Some(check_agreement(target, n, &fast, &naive)?);
                row.naive_s = Some(median_time(reps, naive_path));
            }
            row.fast_s = median_time(reps, fast_path);
        }
    }
    Ok(row)
}

pub fn run_bench(
    target: BenchTarget,
    sizes: &[usize],
    reps: usize,
    naive_cap: usize,
    seed: u64,
) -> CliResult<Vec<BenchRow>> {
    if reps == 0 {
        return Err(CliError::usage("--reps must be at least 1"));
    }
    sizes
        .iter()
        .map(|&n| bench_one(target, n, reps, naive_cap, seed))
        .collect()
}

#[derive(Serialize)]
struct BenchJson<'a> {
    schema: u32,
    config: &'a RunConfig,
    seed: u64,
    agreement_tol: f64,
    timing: &'static str,
    rows: &'a [BenchRow],
}

pub fn cmd_bench(config: &RunConfig) -> CliResult<Vec<BenchRow>> {
    let target = config.require(&config.target, "--target")?;
    let sizes = config.require(&config.sizes, "--sizes")?;
    let reps = config.require(&config.reps, "--reps")?;
    let cap = config.naive_cap.unwrap_or(DEFAULT_NAIVE_CAP);
    let rows = run_bench(target, &sizes, reps, cap, config.seed)?;

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    match &config.output {
        Some(path) => {
            fs::write(path, csv)?;
            let json = BenchJson {
                schema: SCHEMA_VERSION,
                config,
                seed: config.seed,
                agreement_tol: AGREEMENT_TOL,
                timing: "monotonic clock, one warmup call, median of reps",
                rows: &rows,
            };
            write_json(&with_suffix(path, ".json"), &json)?;
        }
        None => print!("{csv}"),
    }
    Ok(rows)
}
