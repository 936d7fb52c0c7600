//! Seeded Monte Carlo experiments on boxes `Λ_n = [-n, n]^d`, summary
//! statistics, and the deterministic check suites behind `verify`.
//!
//! Every trial samples its potential from `(seed, trial)` alone, so results
//! do not depend on how trials are scheduled across worker threads.

pub mod instances;
pub mod verify;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremes::largest_clear_ball;
use crate::landscape::compute_landscape;
use crate::lattice::{make_box, Domain, LatticePoint};
use crate::operator::{SchrodingerOperator, DEFAULT_EIG_TOL, DEFAULT_SOLVE_TOL, DEFAULT_SPECTRUM_CAP};
use crate::output::{fmt_f64, to_json_string};
use crate::potential::{classify, sample_potential, DistributionSpec};
use crate::scales::{conjecture_constant, eig_normalizer, epsilon_n, mu, y_n};

pub const DEFAULT_BINS: usize = 60;
/// Site caps for iterative work: tridiagonal boxes and general boxes.
pub const MAX_SITES_1D: usize = 4_000_001;
pub const MAX_SITES_ND: usize = 250_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig1,
    Fig2,
    Ids,
    Yratio,
    EvlfScan,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Ids => "ids",
            ExperimentKind::Yratio => "yratio",
            ExperimentKind::EvlfScan => "evlf_scan",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(ExperimentKind::Fig1),
            "fig2" => Ok(ExperimentKind::Fig2),
            "ids" => Ok(ExperimentKind::Ids),
            "yratio" => Ok(ExperimentKind::Yratio),
            "evlf_scan" | "evlf-scan" => Ok(ExperimentKind::EvlfScan),
            other => Err(Error::ParseSpec(format!("unknown experiment kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub spec: DistributionSpec,
    pub d: usize,
    pub n_list: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub bins: usize,
    /// Eigen-residual tolerance relative to `λ`.
    pub tol: f64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Evaluation points for `ids`; empty selects an even grid over the
    /// Gershgorin interval.
    pub t_grid: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(
        kind: ExperimentKind,
        spec: DistributionSpec,
        d: usize,
        n_list: Vec<u64>,
        trials: u64,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            kind,
            spec,
            d,
            n_list,
            trials,
            seed,
            bins: DEFAULT_BINS,
            tol: DEFAULT_EIG_TOL,
            workers: 0,
            t_grid: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::ZeroDimension);
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(Error::InvalidArgument("bins must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidArgument("empty n list".into()));
        }
        let cap = match self.kind {
            ExperimentKind::Ids => DEFAULT_SPECTRUM_CAP,
            _ if self.d == 1 => MAX_SITES_1D,
            _ => MAX_SITES_ND,
        };
        for &n in &self.n_list {
            let size = box_size(n, self.d).filter(|&s| s <= cap).ok_or(Error::SizeCap {
                size: box_size(n, self.d).unwrap_or(usize::MAX),
                cap,
            })?;
            debug_assert!(size <= cap);
            match self.kind {
                ExperimentKind::Fig1 => {
                    eig_normalizer(classify(self.spec)?, n, self.d)?;
                }
                ExperimentKind::Yratio => {
                    y_n(self.spec, n, self.d)?;
                }
                _ => {}
            }
        }
        if self.kind == ExperimentKind::Ids && self.t_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("t grid must be finite".into()));
        }
        Ok(())
    }

    fn expect_kind(&self, kind: ExperimentKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "config kind is {}, expected {kind}",
                self.kind
            )));
        }
        Ok(())
    }
}

fn box_size(n: u64, d: usize) -> Option<usize> {
    let side = usize::try_from(n).ok()?.checked_mul(2)?.checked_add(1)?;
    side.checked_pow(d as u32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub n: u64,
    /// Absent for kinds that do not solve the eigenproblem.
    pub lambda: Option<f64>,
    pub sup_l: Option<f64>,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased; zero for a single sample.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

/// Mean, unbiased standard deviation and an equal-width histogram over
/// `[min, max]`. Sums run in input order.
pub fn summarize(samples: &[f64], bins: usize) -> Result<SummaryStats> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to summarize".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite sample {x}")));
    }
    let count = samples.len();
    let mean = samples.iter().sum::<f64>() / count as f64;
    let std = if count > 1 {
        (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let edges = (0..=bins)
        .map(|k| if k == bins { max } else { min + k as f64 * width })
        .collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let k = if width > 0.0 {
            (((x - min) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    Ok(SummaryStats {
        count,
        mean,
        std,
        min,
        max,
        histogram: Histogram { edges, counts },
    })
}

/// Results for one box size.
#[derive(Debug, Clone, Serialize)]
pub struct SizeReport {
    pub n: u64,
    #[serde(flatten)]
    pub summary: SummaryStats,
    pub failed: usize,
    pub failed_trials: Vec<u64>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Principal eigenvalue and, when asked, `‖L‖∞` for one sampled potential.
fn eig_and_landscape(
    dom: &Arc<Domain>,
    spec: DistributionSpec,
    seed: u64,
    trial: u64,
    tol: f64,
    with_landscape: bool,
) -> Result<(f64, Option<f64>)> {
    let field = sample_potential(spec, dom, seed, trial);
    let op = SchrodingerOperator::from_field(&field);
    let lambda = op.principal_eigpair(tol, 10 * op.size().max(10))?.lambda;
    let sup = if with_landscape {
        Some(compute_landscape(&op, DEFAULT_SOLVE_TOL)?.sup_norm)
    } else {
        None
    };
    Ok((lambda, sup))
}

fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<SizeReport>> {
    cfg.validate()?;
    let d = cfg.d;
    let mut reports = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let dom = Arc::new(make_box(n as usize, d)?);
        let trial_fn = |trial: u64| -> Result<TrialRecord> {
            let (lambda, sup_l, statistic) = match cfg.kind {
                ExperimentKind::Fig1 => {
                    let norm = eig_normalizer(classify(cfg.spec)?, n, d)?;
                    let (l, _) = eig_and_landscape(&dom, cfg.spec, cfg.seed, trial, cfg.tol, false)?;
                    (Some(l), None, l / norm - mu(d)?)
                }
                ExperimentKind::Fig2 | ExperimentKind::EvlfScan => {
                    let (l, s) = eig_and_landscape(&dom, cfg.spec, cfg.seed, trial, cfg.tol, true)?;
                    let s = s.expect("landscape requested");
                    let shift = if cfg.kind == ExperimentKind::Fig2 {
                        conjecture_constant(d)?
                    } else {
                        0.0
                    };
                    (Some(l), Some(s), l * s - shift)
                }
                ExperimentKind::Yratio => {
                    let field = sample_potential(cfg.spec, &dom, cfg.seed, trial);
                    let eps = epsilon_n(classify(cfg.spec)?, n, d)?;
                    let ball = largest_clear_ball(&field, eps)?;
                    (None, None, ball.radius as f64 / y_n(cfg.spec, n, d)?)
                }
                ExperimentKind::Ids => unreachable!("ids has its own driver"),
            };
            Ok(TrialRecord {
                trial,
                n,
                lambda,
                sup_l,
                statistic,
            })
        };
        let outcomes: Vec<(u64, Result<TrialRecord>)> = in_pool(cfg.workers, || {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| (t, trial_fn(t)))
                .collect()
        })?;
        let mut records = Vec::with_capacity(outcomes.len());
        let mut failed_trials = Vec::new();
        let mut last_error = None;
        for (t, r) in outcomes {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    failed_trials.push(t);
                    last_error = Some(e);
                }
            }
        }
        if records.is_empty() {
            return Err(last_error.unwrap_or(Error::Degenerate("no trials".into())));
        }
        let stats: Vec<f64> = records.iter().map(|r| r.statistic).collect();
        reports.push(SizeReport {
            n,
            summary: summarize(&stats, cfg.bins)?,
            failed: failed_trials.len(),
            failed_trials,
            records,
        });
    }
    Ok(reports)
}

/// Distribution of `λ_{n,V} / eig_normalizer(n) - μ_d` per box size.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Vec<SizeReport>> {
    cfg.expect_kind(ExperimentKind::Fig1)?;
    run_trials(cfg)
}

/// Distribution of `λ_{n,V} ‖L_{n,V}‖∞ - μ_d / 2d` per box size.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Vec<SizeReport>> {
    cfg.expect_kind(ExperimentKind::Fig2)?;
    run_trials(cfg)
}

/// Distribution of `Y_n / y_n` per box size.
pub fn run_yratio(cfg: &ExperimentConfig) -> Result<Vec<SizeReport>> {
    cfg.expect_kind(ExperimentKind::Yratio)?;
    run_trials(cfg)
}

/// Distribution of the raw product `λ_{n,V} ‖L_{n,V}‖∞` per box size.
pub fn run_evlf_scan(cfg: &ExperimentConfig) -> Result<Vec<SizeReport>> {
    cfg.expect_kind(ExperimentKind::EvlfScan)?;
    run_trials(cfg)
}

/// Trial-averaged integrated density of states on one box size.
#[derive(Debug, Clone, Serialize)]
pub struct IdsCurve {
    pub n: u64,
    pub sites: usize,
    pub trials: u64,
    pub t: Vec<f64>,
    pub ids: Vec<f64>,
}

/// Even grid of `bins + 1` points over `[0, 4d + sup V]`.
pub fn default_t_grid(spec: DistributionSpec, d: usize, bins: usize) -> Vec<f64> {
    let top = 4.0 * d as f64 + spec.sup();
    (0..=bins).map(|k| top * k as f64 / bins as f64).collect()
}

/// `(1/#Λ_n) #{λ ∈ σ(-Δ_n + V) : λ <= t}` averaged over trials, from the
/// full spectrum of each sample.
pub fn estimate_ids(cfg: &ExperimentConfig, t_grid: &[f64]) -> Result<Vec<IdsCurve>> {
    cfg.expect_kind(ExperimentKind::Ids)?;
    cfg.validate()?;
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    let mut curves = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let dom = Arc::new(make_box(n as usize, cfg.d)?);
        let sites = dom.len();
        let per_trial: Vec<Result<Vec<usize>>> = in_pool(cfg.workers, || {
            (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let field = sample_potential(cfg.spec, &dom, cfg.seed, trial);
                    let spectrum = SchrodingerOperator::from_field(&field)
                        .full_spectrum(DEFAULT_SPECTRUM_CAP)?;
                    Ok(t_grid
                        .iter()
                        .map(|&t| spectrum.partition_point(|&l| l <= t))
                        .collect())
                })
                .collect()
        })?;
        let mut ids = vec![0.0; t_grid.len()];
        for counts in per_trial {
            for (acc, c) in ids.iter_mut().zip(counts?) {
                *acc += c as f64 / sites as f64;
            }
        }
        ids.iter_mut().for_each(|v| *v /= cfg.trials as f64);
        curves.push(IdsCurve {
            n,
            sites,
            trials: cfg.trials,
            t: t_grid.to_vec(),
            ids,
        });
    }
    Ok(curves)
}

pub enum ExperimentOutput {
    Trials(Vec<SizeReport>),
    Ids(Vec<IdsCurve>),
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.kind {
        ExperimentKind::Ids => {
            let grid = if cfg.t_grid.is_empty() {
                default_t_grid(cfg.spec, cfg.d, cfg.bins)
            } else {
                cfg.t_grid.clone()
            };
            estimate_ids(cfg, &grid).map(ExperimentOutput::Ids)
        }
        _ => run_trials(cfg).map(ExperimentOutput::Trials),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `trial,n,lambda,sup_l,statistic`; absent values are empty fields.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    writeln!(out, "trial,n,lambda,sup_l,statistic")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.trial,
            r.n,
            opt(r.lambda),
            opt(r.sup_l),
            fmt_f64(r.statistic)
        )?;
    }
    Ok(())
}

pub fn write_ids_csv<W: Write>(curve: &IdsCurve, mut out: W) -> Result<()> {
    writeln!(out, "t,ids")?;
    for (t, v) in curve.t.iter().zip(&curve.ids) {
        writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes per-size CSV and summary JSON files into `dir` and returns their
/// paths. File names are `{kind}_n{n}.csv` and `{kind}_n{n}_summary.json`.
pub fn write_outputs(dir: &Path, kind: ExperimentKind, output: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    match output {
        ExperimentOutput::Trials(reports) => {
            for r in reports {
                let csv = dir.join(format!("{kind}_n{}.csv", r.n));
                write_file(&csv, |w| write_trials_csv(&r.records, w))?;
                let json = dir.join(format!("{kind}_n{}_summary.json", r.n));
                write_file(&json, |w| Ok(writeln!(w, "{}", to_json_string(r))?))?;
                paths.push(csv);
                paths.push(json);
            }
        }
        ExperimentOutput::Ids(curves) => {
            for c in curves {
                let csv = dir.join(format!("{kind}_n{}.csv", c.n));
                write_file(&csv, |w| write_ids_csv(c, w))?;
                paths.push(csv);
            }
        }
    }
    Ok(paths)
}

/// Largest clear ball for one sampled box, with its deterministic scale.
#[derive(Debug, Clone, Serialize)]
pub struct YnRecord {
    pub n: u64,
    pub epsilon: f64,
    #[serde(rename = "Y")]
    pub y: u64,
    pub center: LatticePoint,
    pub y_n: f64,
    pub ratio: f64,
}

pub fn yn_record(spec: DistributionSpec, d: usize, n: u64, seed: u64, trial: u64) -> Result<YnRecord> {
    let size = box_size(n, d).unwrap_or(usize::MAX);
    let cap = if d == 1 { MAX_SITES_1D } else { MAX_SITES_ND };
    if size > cap {
        return Err(Error::SizeCap { size, cap });
    }
    let tag = classify(spec)?;
    let epsilon = epsilon_n(tag, n, d)?;
    let scale = y_n(spec, n, d)?;
    let dom = Arc::new(make_box(n as usize, d)?);
    let field = sample_potential(spec, &dom, seed, trial);
    let ball = largest_clear_ball(&field, epsilon)?;
    Ok(YnRecord {
        n,
        epsilon,
        y: ball.radius,
        center: ball.center,
        y_n: scale,
        ratio: ball.radius as f64 / scale,
    })
}
