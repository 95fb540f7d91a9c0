//! `decompose`, `reconstruct` and `hmatrix`.

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use serde::Serialize;
use ssa_core::svd::{SingularTriple, SvdReport};
use ssa_core::{decompose, h_matrix, reconstruct, Error, HeteroParams, TimeSeries};

use crate::output::{
    read_series, with_suffix, write_column, write_columns, write_grid, write_json,
};
use crate::{CliError, CliResult, RunConfig, SCHEMA_VERSION};

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub steps: usize,
    pub matvecs: usize,
    pub tmatvecs: usize,
    pub restarts: usize,
    pub ortho_level: f64,
}

impl From<&SvdReport> for ReportJson {
    fn from(r: &SvdReport) -> Self {
        Self {
            steps: r.steps,
            matvecs: r.matvecs,
            tmatvecs: r.tmatvecs,
            restarts: r.restarts,
            ortho_level: r.ortho_level,
        }
    }
}

#[derive(Debug, Serialize)]
struct TriplesJson<'a> {
    schema: u32,
    config: &'a RunConfig,
    seed: u64,
    series_len: usize,
    window: usize,
    k: usize,
    requested: usize,
    converged: bool,
    sigmas: Vec<f64>,
    residuals: Vec<f64>,
    report: ReportJson,
}

#[derive(Debug, Serialize)]
struct TimingJson<'a> {
    schema: u32,
    command: &'a str,
    seed: u64,
    seconds: f64,
}

#[derive(Debug, Serialize)]
struct SidecarJson<'a, T: Serialize> {
    schema: u32,
    config: &'a RunConfig,
    seed: u64,
    #[serde(flatten)]
    extra: T,
}

fn write_timing(config: &RunConfig, seconds: f64) -> CliResult<()> {
    let out = config.require(&config.output, "--output")?;
    write_json(
        &with_suffix(&out, ".timing.json"),
        &TimingJson {
            schema: SCHEMA_VERSION,
            command: &config.command,
            seed: config.seed,
            seconds,
        },
    )
}

fn load(config: &RunConfig) -> CliResult<TimeSeries> {
    let path = config.require(&config.input, "--input")?;
    let values = read_series(&path)?;
    TimeSeries::new(values).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write_triples(
    config: &RunConfig,
    series_len: usize,
    window: usize,
    triples: &[SingularTriple],
    report: &SvdReport,
    converged: bool,
) -> CliResult<()> {
    let out = config.require(&config.output, "--output")?;
    let requested = config.require(&config.nev, "--nev")?;
    let json = TriplesJson {
        schema: SCHEMA_VERSION,
        config,
        seed: config.seed,
        series_len,
        window,
        k: series_len + 1 - window,
        requested,
        converged,
        sigmas: triples.iter().map(|t| t.sigma).collect(),
        residuals: triples.iter().map(|t| t.residual).collect(),
        report: report.into(),
    };
    write_json(&with_suffix(&out, ".triples.json"), &json)?;

    let mut header: Vec<String> = (1..=triples.len()).map(|i| format!("u{i}")).collect();
    header.extend((1..=triples.len()).map(|i| format!("v{i}")));
    let mut columns: Vec<&[f64]> = triples.iter().map(|t| t.u.as_slice()).collect();
    columns.extend(triples.iter().map(|t| t.v.as_slice()));
    write_columns(&with_suffix(&out, ".vectors.csv"), &header, &columns)
}

pub fn cmd_decompose(config: &RunConfig) -> CliResult<()> {
    let series = load(config)?;
    let window = config.require(&config.window, "--window")?;
    let nev = config.require(&config.nev, "--nev")?;
    let start = Instant::now();
    let result = decompose(&series, window, nev, &config.svd_options());
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(d) => {
            write_triples(config, d.series_len, window, &d.triples, &d.report, true)?;
            write_timing(config, seconds)
        }
        Err(Error::NotConverged(partial)) => {
            write_triples(
                config,
                series.len(),
                window,
                &partial.converged,
                &partial.report,
                false,
            )?;
            write_timing(config, seconds)?;
            Err(CliError::numerical(
                Error::NotConverged(partial).to_string(),
            ))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Serialize)]
struct ReconstructExtra {
    series_len: usize,
    sigmas: Vec<f64>,
    report: ReportJson,
}

pub fn cmd_reconstruct(config: &RunConfig) -> CliResult<()> {
    let series = load(config)?;
    let window = config.require(&config.window, "--window")?;
    let nev = config.require(&config.nev, "--nev")?;
    let group = config.require(&config.group, "--group")?;
    let out = config.require(&config.output, "--output")?;
    if let Some(&bad) = group.iter().find(|&&g| g > nev) {
        return Err(CliError::usage(format!(
            "group index {bad} exceeds --nev {nev}"
        )));
    }
    let start = Instant::now();
    let d = decompose(&series, window, nev, &config.svd_options())?;
    let rec = reconstruct(&d, &group)?;
    let seconds = start.elapsed().as_secs_f64();

    write_column(&out, rec.values())?;
    let extra = ReconstructExtra {
        series_len: d.series_len,
        sigmas: d.sigmas(),
        report: (&d.report).into(),
    };
    write_json(
        &with_suffix(&out, ".json"),
        &SidecarJson {
            schema: SCHEMA_VERSION,
            config,
            seed: config.seed,
            extra,
        },
    )?;
    write_timing(config, seconds)
}

#[derive(Debug, Serialize)]
struct HmatrixExtra {
    series_len: usize,
    rows: usize,
    cols: usize,
    /// Row `i` (1-based) is the base window starting at `i`; column `j` the test window.
    layout: &'static str,
}

pub fn cmd_hmatrix(config: &RunConfig) -> CliResult<()> {
    let series = load(config)?;
    let out = config.require(&config.output, "--output")?;
    let params = HeteroParams {
        base_len: config.require(&config.base_len, "--base-len")?,
        test_len: config.require(&config.test_len, "--test-len")?,
        window: config.require(&config.window, "--window")?,
        indices: config.require(&config.indices, "--indices")?,
    };
    // Precondition failures are usage errors; everything after is numerical.
    params
        .validate(series.len())
        .map_err(|e| CliError::usage(e.to_string()))?;
    let start = Instant::now();
    let h = h_matrix(&series, &params, &config.svd_options())
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let seconds = start.elapsed().as_secs_f64();

    let (rows, cols) = (h.values.rows(), h.values.cols());
    let mut w = BufWriter::new(File::create(&out)?);
    write_grid(&mut w, rows, cols, h.values.as_slice())?;
    drop(w);
    let extra = HmatrixExtra {
        series_len: series.len(),
        rows,
        cols,
        layout: "row = base window start, column = test window start",
    };
    write_json(
        &with_suffix(&out, ".json"),
        &SidecarJson {
            schema: SCHEMA_VERSION,
            config,
            seed: config.seed,
            extra,
        },
    )?;
    write_timing(config, seconds)
}
