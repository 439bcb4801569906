use std::io::Write;
use std::path::Path;
use std::time::Instant;

use purent_core::bounds::{
    eg_lower_three_sys, eg_lower_two_sys, eg_pure_exact, f_arrow_upper, f_twoway_upper,
    fmax_sandwich, BoundOptions, BoundReport,
};
use purent_core::sdp::SdpStatus;
use purent_core::states::{haar_pure_from, horodecki_state, rng_for};
use purent_core::variational::eg_upper_convex_roof;
use purent_core::DimList;
use rayon::prelude::*;
use serde::Serialize;

use crate::state_file::{State, StateFile};
use crate::CliError;

/// Runs `f` on a pool of `jobs` threads (0 picks the rayon default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(pool.install(f))
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub grid: usize,
    pub restarts: usize,
    pub seed: u64,
    pub jobs: usize,
    pub bound: BoundOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: 101,
            restarts: 20,
            seed: 0,
            jobs: 0,
            bound: BoundOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub eg_lower_two_sys: f64,
    pub eg_lower_three_sys: f64,
    pub eg_upper_convex_roof: f64,
    pub gap: f64,
    pub delta: f64,
}

fn sweep_point(n: usize, cfg: &SweepConfig) -> Result<SweepRow, CliError> {
    let a = if cfg.grid == 1 {
        0.0
    } else {
        n as f64 / (cfg.grid - 1) as f64
    };
    let rho = horodecki_state(a)?;
    let two = eg_lower_two_sys(&rho, &cfg.bound)?;
    let three = eg_lower_three_sys(&rho, &cfg.bound)?;
    let roof = eg_upper_convex_roof(&rho, None, cfg.restarts, cfg.seed.wrapping_add(n as u64))?;
    Ok(SweepRow {
        a,
        eg_lower_two_sys: two.lower,
        eg_lower_three_sys: three.lower,
        eg_upper_convex_roof: roof.value,
        gap: roof.value - three.lower,
        delta: two.delta.max(three.delta),
    })
}

/// Geometric-entanglement bounds on the Horodecki family at `a = n/(grid-1)`.
pub fn horodecki_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    if cfg.grid == 0 {
        return Err(CliError::Input("grid must be positive".into()));
    }
    with_jobs(cfg.jobs, || {
        (0..cfg.grid)
            .into_par_iter()
            .map(|n| sweep_point(n, cfg))
            .collect()
    })?
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record([
        "a",
        "eg_lower_two_sys",
        "eg_lower_three_sys",
        "eg_upper_convex_roof",
        "gap",
        "delta",
    ])
    .map_err(io_err)?;
    for r in rows {
        w.write_record(
            [
                r.a,
                r.eg_lower_two_sys,
                r.eg_lower_three_sys,
                r.eg_upper_convex_roof,
                r.gap,
                r.delta,
            ]
            .map(fmt17),
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Quantity {
    Fmax,
    FArrow,
    FTwoway,
    EgLower,
    EgUpper,
    EgPure,
}

#[derive(Clone, Debug)]
pub struct BoundConfig {
    pub bound: BoundOptions,
    pub restarts: usize,
    pub seed: u64,
    /// Use the two-system program for `eg-lower`.
    pub two_sys: bool,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            bound: BoundOptions::default(),
            restarts: 20,
            seed: 0,
            two_sys: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportJson {
    pub quantity: String,
    pub dims: Vec<usize>,
    pub method: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub exact: bool,
    pub status: String,
    pub wall_time_s: f64,
    pub maximizer: StateFile,
}

impl ReportJson {
    fn new(quantity: Quantity, dims: &DimList, r: BoundReport, wall: f64) -> Self {
        let quantity = clap::ValueEnum::to_possible_value(&quantity).expect("no skipped variants");
        Self {
            quantity: quantity.get_name().to_string(),
            dims: dims.as_slice().to_vec(),
            method: r.method,
            lower: r.lower,
            upper: r.upper,
            objective: r.objective,
            epsilon: r.epsilon,
            delta: r.delta,
            exact: r.exact,
            status: format!("{:?}", r.status),
            wall_time_s: wall,
            maximizer: StateFile::from_op(&r.maximizer),
        }
    }
}

pub fn bound(state: &State, quantity: Quantity, cfg: &BoundConfig) -> Result<ReportJson, CliError> {
    let start = Instant::now();
    let rho = state.density();
    let dims = state.dims();
    let opts = &cfg.bound;
    let report = match quantity {
        Quantity::Fmax => fmax_sandwich(&rho, dims, opts)?,
        Quantity::FArrow => f_arrow_upper(&rho, opts)?,
        Quantity::FTwoway => f_twoway_upper(&rho, opts)?,
        Quantity::EgLower if cfg.two_sys => eg_lower_two_sys(&rho, opts)?,
        Quantity::EgLower => eg_lower_three_sys(&rho, opts)?,
        Quantity::EgUpper => {
            let lower = eg_lower_three_sys(&rho, opts)?;
            let roof = eg_upper_convex_roof(&rho, None, cfg.restarts, cfg.seed)?;
            BoundReport {
                upper: roof.value,
                objective: roof.value,
                maximizer: roof.ensemble.average(),
                method: "convex-roof".into(),
                exact: false,
                ..lower
            }
        }
        Quantity::EgPure => match state {
            State::Pure(psi) => eg_pure_exact(psi, dims, opts)?,
            State::Mixed(_) => {
                return Err(CliError::Input("eg-pure needs a pure state file".into()))
            }
        },
    };
    Ok(ReportJson::new(
        quantity,
        dims,
        report,
        start.elapsed().as_secs_f64(),
    ))
}

#[derive(Clone, Debug)]
pub struct EpsConfig {
    pub n: usize,
    pub dims: DimList,
    pub seed: u64,
    pub jobs: usize,
    pub bound: BoundOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsRow {
    pub sample: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    /// `c sqrt(ε) + 2δ`.
    pub allowed_width: f64,
}

/// PPT sandwich on Haar-random pure states.
pub fn random_eps_benchmark(cfg: &EpsConfig) -> Result<Vec<EpsRow>, CliError> {
    let n = cfg.dims.len();
    if !(2..=3).contains(&n) {
        return Err(CliError::Input(format!(
            "sandwich bound needs 2 or 3 parties, got {}",
            cfg.dims
        )));
    }
    let c = if n == 2 { 4.0 } else { 8.0 };
    let run = |i: usize| -> Result<EpsRow, CliError> {
        let psi = haar_pure_from(cfg.dims.clone(), &mut rng_for(cfg.seed, i as u64));
        let r = fmax_sandwich(&psi.projector(), &cfg.dims, &cfg.bound)?;
        Ok(EpsRow {
            sample: i,
            epsilon: r.epsilon,
            delta: r.delta,
            lower: r.lower,
            upper: r.upper,
            width: r.upper - r.lower,
            allowed_width: c * r.epsilon.sqrt() + 2.0 * r.delta,
        })
    };
    with_jobs(cfg.jobs, || (0..cfg.n).into_par_iter().map(run).collect())?
}

pub fn write_eps_csv<W: Write>(rows: &[EpsRow], out: W) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    w.write_record([
        "sample",
        "epsilon",
        "delta",
        "lower",
        "upper",
        "width",
        "allowed_width",
    ])
    .map_err(io_err)?;
    for r in rows {
        let mut rec = vec![r.sample.to_string()];
        rec.extend(
            [
                r.epsilon,
                r.delta,
                r.lower,
                r.upper,
                r.width,
                r.allowed_width,
            ]
            .map(fmt17),
        );
        w.write_record(&rec).map_err(io_err)?;
    }
    let max = |f: fn(&EpsRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let mut summary = vec!["max".to_string()];
    summary.extend(
        [
            max(|r| r.epsilon),
            max(|r| r.delta),
            f64::NAN,
            f64::NAN,
            max(|r| r.width),
            f64::NAN,
        ]
        .map(|x| if x.is_nan() { String::new() } else { fmt17(x) }),
    );
    w.write_record(&summary).map_err(io_err)?;
    w.flush().map_err(io_err)
}

#[derive(Clone, Debug)]
pub struct ComplementarityConfig {
    pub n: usize,
    pub dims: DimList,
    pub seed: u64,
    pub jobs: usize,
    pub bound: BoundOptions,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplementaritySample {
    pub f_arrow: f64,
    pub eg_lower_two_sys: f64,
    pub residual: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplementarityReport {
    pub dims: Vec<usize>,
    pub n: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub samples: Vec<ComplementaritySample>,
}

/// `F→(ρ^AB) + E_g(ρ^BC) = 1` on Haar-random pure `ψ^ABC`, both sides
/// evaluated by their SDPs.
pub fn complementarity_check(
    cfg: &ComplementarityConfig,
) -> Result<ComplementarityReport, CliError> {
    let d = cfg.dims.as_slice();
    if d.len() != 3 {
        return Err(CliError::Input(format!(
            "need three parties, got {}",
            cfg.dims
        )));
    }
    if d[0] * d[1] > 6 {
        return Err(CliError::Input(format!(
            "d_A d_B = {} exceeds 6; the one-way program is not exact",
            d[0] * d[1]
        )));
    }
    let run = |i: usize| -> Result<ComplementaritySample, CliError> {
        let psi = haar_pure_from(cfg.dims.clone(), &mut rng_for(cfg.seed, i as u64));
        let fa = f_arrow_upper(&psi.reduced(&[0, 1])?, &cfg.bound)?;
        let eg = eg_lower_two_sys(&psi.reduced(&[1, 2])?, &cfg.bound)?;
        ensure_optimal(&[fa.status, eg.status])?;
        Ok(ComplementaritySample {
            f_arrow: fa.objective,
            eg_lower_two_sys: eg.objective,
            residual: (fa.objective + eg.objective - 1.0).abs(),
            delta: fa.delta.max(eg.delta),
        })
    };
    let samples: Vec<_> = with_jobs(cfg.jobs, || {
        (0..cfg.n)
            .into_par_iter()
            .map(run)
            .collect::<Result<_, _>>()
    })??;
    Ok(ComplementarityReport {
        dims: d.to_vec(),
        n: cfg.n,
        seed: cfg.seed,
        max_residual: samples.iter().map(|s| s.residual).fold(0.0, f64::max),
        samples,
    })
}

fn ensure_optimal(statuses: &[SdpStatus]) -> Result<(), CliError> {
    match statuses.iter().find(|s| **s == SdpStatus::Infeasible) {
        Some(s) => Err(CliError::Solver(format!("{s:?}"))),
        None => Ok(()),
    }
}

pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(io_err)? + "\n";
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io_err),
    }
}
