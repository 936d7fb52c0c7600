//! Randomized checks of the deterministic identities and inequalities.
//! Each suite records its extreme values alongside the pass flag.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::instances::{instance_rng, random_connected_subdomain, random_instance, random_spec};
use crate::error::{Error, Result};
use crate::landscape::{compute_landscape, gri_defect, green_bounds_d1_all};
use crate::lattice::{make_ball, make_interval, Domain, LatticePoint};
use crate::operator::{
    det_path, sup_norm, PathDeterminant, SchrodingerOperator, Semigroup, DEFAULT_DENSE_CAP,
    DEFAULT_SOLVE_TOL,
};
use crate::potential::{sample_potential, DistributionSpec, PotentialField};
use crate::scales::mu;

pub const EVLF_INSTANCES: usize = 1000;
pub const GRI_INSTANCES: usize = 100;
pub const GREEN_BOUND_INSTANCES: usize = 1000;
pub const SEMIGROUP_INSTANCES: usize = 100;
pub const DETPATH_INSTANCES: usize = 100;
/// Calibrated bound on `‖e^{-tH} 1‖∞ / ((1 + (λt)^{d/2}) e^{-λt})`.
pub const SEMIGROUP_RATIO_BOUND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Gri,
    GreenBound,
    Evlf,
    Semigroup,
    Detpath,
    BallLimits,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Gri,
        Suite::GreenBound,
        Suite::Evlf,
        Suite::Semigroup,
        Suite::Detpath,
        Suite::BallLimits,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Gri => "gri",
            Suite::GreenBound => "green-bound",
            Suite::Evlf => "evlf",
            Suite::Semigroup => "semigroup",
            Suite::Detpath => "detpath",
            Suite::BallLimits => "ball-limits",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::ParseSpec(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub instances: usize,
    pub extremes: BTreeMap<String, f64>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, instances: usize) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            pass: false,
            instances,
            extremes: BTreeMap::new(),
        }
    }

    fn record(&mut self, key: &str, value: f64) {
        self.extremes.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> f64 {
        self.extremes[key]
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Gri => gri(seed),
        Suite::GreenBound => green_bound(seed),
        Suite::Evlf => evlf(seed),
        Suite::Semigroup => semigroup(seed),
        Suite::Detpath => detpath(seed),
        Suite::BallLimits => ball_limits(seed),
    }
}

/// `λ ‖L‖∞` for one field.
pub fn product(field: &PotentialField) -> Result<f64> {
    let op = SchrodingerOperator::from_field(field);
    let lambda = op.principal()?.lambda;
    Ok(lambda * compute_landscape(&op, DEFAULT_SOLVE_TOL)?.sup_norm)
}

fn evlf(seed: u64) -> Result<SuiteReport> {
    let mut rng = instance_rng(seed, 1);
    let mut rep = SuiteReport::new(Suite::Evlf, seed, EVLF_INSTANCES);
    let mut min = f64::INFINITY;
    let mut max_by_dim = [f64::NEG_INFINITY; 2];
    for _ in 0..EVLF_INSTANCES {
        let field = random_instance(&mut rng, 400);
        let p = product(&field)?;
        min = min.min(p);
        let k = field.domain().dim() - 1;
        max_by_dim[k] = max_by_dim[k].max(p);
    }
    let single = Arc::new(make_interval(0, 0)?);
    let w = rng.random_range(0.0..5.0);
    let single_product = product(&PotentialField::from_values(single, vec![w])?)?;
    rep.record("min_product", min);
    rep.record("max_product_d1", max_by_dim[0]);
    rep.record("max_product_d2", max_by_dim[1]);
    rep.record("single_point_product", single_product);
    rep.pass = min >= 1.0 - 1e-9 && (single_product - 1.0).abs() <= 1e-12;
    Ok(rep)
}

fn gri(seed: u64) -> Result<SuiteReport> {
    let mut rng = instance_rng(seed, 2);
    let mut rep = SuiteReport::new(Suite::Gri, seed, GRI_INSTANCES);
    let mut worst_rel: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    for _ in 0..GRI_INSTANCES {
        let d = rng.random_range(1..=2);
        let ambient = Arc::new(random_connected_subdomain(&mut rng, d, 300));
        let keep = rng.random_range(0.3..=1.0);
        let mut pts: Vec<LatticePoint> = ambient
            .points()
            .iter()
            .filter(|_| rng.random::<f64>() < keep)
            .cloned()
            .collect();
        if pts.is_empty() {
            pts.push(ambient.point(0).clone());
        }
        let sub = Arc::new(Domain::new(d, pts)?);
        let spec = random_spec(&mut rng);
        let w = sample_potential(spec, &ambient, rng.random(), 0);
        let defect = gri_defect(&sub, &ambient, &w)?;
        let op = SchrodingerOperator::from_field(&w);
        let scale = compute_landscape(&op, DEFAULT_SOLVE_TOL)?.sup_norm;
        worst_abs = worst_abs.max(defect);
        worst_rel = worst_rel.max(defect / scale);
    }
    rep.record("max_defect", worst_abs);
    rep.record("max_relative_defect", worst_rel);
    rep.pass = worst_rel <= 1e-9;
    Ok(rep)
}

fn green_bound(seed: u64) -> Result<SuiteReport> {
    let mut rng = instance_rng(seed, 3);
    let mut rep = SuiteReport::new(Suite::GreenBound, seed, GREEN_BOUND_INSTANCES);
    let dom = Arc::new(make_interval(1, 50)?);
    let mut min_slack = f64::INFINITY;
    for _ in 0..GREEN_BOUND_INSTANCES {
        let w = sample_potential(DistributionSpec::Uniform01, &dom, rng.random(), 0);
        for r in green_bounds_d1_all(w.values())? {
            min_slack = min_slack.min(r.slack());
        }
    }
    rep.record("min_slack", min_slack);
    rep.pass = min_slack >= -1e-12;
    Ok(rep)
}

fn semigroup(seed: u64) -> Result<SuiteReport> {
    let mut rng = instance_rng(seed, 4);
    let mut rep = SuiteReport::new(Suite::Semigroup, seed, SEMIGROUP_INSTANCES);
    let mut max_ratio = f64::NEG_INFINITY;
    let mut max_sup = f64::NEG_INFINITY;
    let mut max_increase = f64::NEG_INFINITY;
    for _ in 0..SEMIGROUP_INSTANCES {
        let field = random_instance(&mut rng, 400);
        let op = SchrodingerOperator::from_field(&field);
        let lambda = op.principal()?.lambda;
        let sg = Semigroup::new(&op, DEFAULT_DENSE_CAP)?;
        let ones = vec![1.0; op.size()];
        let half_d = field.domain().dim() as f64 / 2.0;
        let mut prev = f64::INFINITY;
        for k in 0..=40 {
            let t = 10.0 / lambda * k as f64 / 40.0;
            let k_t = sup_norm(&sg.apply(t, &ones)?);
            let lt = lambda * t;
            max_ratio = max_ratio.max(k_t / ((1.0 + lt.powf(half_d)) * (-lt).exp()));
            max_sup = max_sup.max(k_t);
            max_increase = max_increase.max(k_t - prev);
            prev = k_t;
        }
    }
    rep.record("max_ratio", max_ratio);
    rep.record("max_sup_norm", max_sup);
    rep.record("max_increase", max_increase);
    rep.pass = max_ratio <= SEMIGROUP_RATIO_BOUND && max_sup <= 1.0 + 1e-12;
    Ok(rep)
}

fn detpath(seed: u64) -> Result<SuiteReport> {
    let mut rng = instance_rng(seed, 5);
    let mut rep = SuiteReport::new(Suite::Detpath, seed, DETPATH_INSTANCES);
    let mut free_mismatches = 0usize;
    for k in 1..=30usize {
        if det_path(k, None)? != PathDeterminant::Exact(k as i128 + 1) {
            free_mismatches += 1;
        }
    }
    let mut min_excess = f64::INFINITY;
    let mut inexact = 0usize;
    for _ in 0..DETPATH_INSTANCES {
        let k = rng.random_range(1..=30usize);
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0..=3u32) as f64).collect();
        match det_path(k, Some(&w))? {
            PathDeterminant::Exact(v) => {
                min_excess = min_excess.min((v - (k as i128 + 1)) as f64);
            }
            PathDeterminant::Approx(v) => {
                inexact += 1;
                min_excess = min_excess.min(v - (k as f64 + 1.0));
            }
        }
    }
    rep.record("free_mismatches", free_mismatches as f64);
    rep.record("min_excess", min_excess);
    rep.record("inexact", inexact as f64);
    rep.pass = free_mismatches == 0 && min_excess >= 0.0;
    Ok(rep)
}

/// Free balls: `r² λ / μ_d` for `d = 1, r = 500` and `d = 2, r = 40`, and
/// `‖L‖∞` against `r²/2` on the `2r - 1` site interval.
fn ball_limits(seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(Suite::BallLimits, seed, 2);
    let r1 = 500.0;
    let ball1 = Arc::new(make_ball(&LatticePoint::origin(1)?, r1, None)?);
    let op1 = SchrodingerOperator::laplacian(&ball1);
    let ratio1 = r1 * r1 * op1.principal()?.lambda / mu(1)?;
    let sup1 = compute_landscape(&op1, DEFAULT_SOLVE_TOL)?.sup_norm;
    let target = r1 * r1 / 2.0;

    let r2 = 40.0;
    let ball2 = Arc::new(make_ball(&LatticePoint::origin(2)?, r2, None)?);
    let op2 = SchrodingerOperator::laplacian(&ball2);
    let ratio2 = r2 * r2 * op2.principal()?.lambda / mu(2)?;

    rep.record("d1_sites", ball1.len() as f64);
    rep.record("d1_eig_ratio", ratio1);
    rep.record("d1_landscape_sup", sup1);
    rep.record("d1_landscape_rel_error", (sup1 - target).abs() / target);
    rep.record("d2_sites", ball2.len() as f64);
    rep.record("d2_eig_ratio", ratio2);
    rep.pass = (ratio1 - 1.0).abs() <= 0.01
        && (sup1 - target).abs() / target <= 1e-9
        && (ratio2 - 1.0).abs() <= 0.05;
    Ok(rep)
}
