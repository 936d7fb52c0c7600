//! Landscape function `L = H⁻¹ 1`, Green function columns, and the
//! deterministic identities relating them.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{boundary_edges, make_interval, Domain, LatticePoint};
use crate::operator::SchrodingerOperator;
use crate::output::fmt_f64;
use crate::potential::PotentialField;

/// Solve tolerance used inside [`gri_defect`].
pub const GRI_SOLVE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Serialize)]
pub struct LandscapeResult {
    pub values: Vec<f64>,
    pub sup_norm: f64,
    /// Lexicographically smallest maximizer.
    pub argmax: LatticePoint,
    /// Smallest solver value before negative noise was clamped to zero.
    pub min_before_clamp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenColumn {
    pub source: LatticePoint,
    pub values: Vec<f64>,
}

fn clamp_nonnegative(values: &mut [f64]) -> f64 {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    min
}

/// Solves `H L = 1` and reports the sup-norm and its first maximizer.
pub fn compute_landscape(op: &SchrodingerOperator, tol: f64) -> Result<LandscapeResult> {
    let mut values = op.solve_spd(&vec![1.0; op.size()], tol)?;
    let min_before_clamp = clamp_nonnegative(&mut values);
    let (imax, sup_norm) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    Ok(LandscapeResult {
        argmax: op.domain().point(imax).clone(),
        values,
        sup_norm,
        min_before_clamp,
    })
}

/// `G(·, y)`, the solution of `H g = δ_y`.
pub fn green_column(op: &SchrodingerOperator, y: &LatticePoint, tol: f64) -> Result<GreenColumn> {
    let iy = op
        .domain()
        .index_of(y)
        .ok_or_else(|| Error::PointNotInDomain(y.coords().to_vec()))?;
    let mut rhs = vec![0.0; op.size()];
    rhs[iy] = 1.0;
    let mut values = op.solve_spd(&rhs, tol)?;
    clamp_nonnegative(&mut values);
    Ok(GreenColumn {
        source: y.clone(),
        values,
    })
}

/// Largest violation over `x ∈ sub` of
/// `L_A(x) = L_{A'}(x) + Σ_{(i,j) ∈ ∂A'} G_{A'}(x, i) L_A(j)`,
/// with `L_A` extended by zero outside `ambient`. `w` lives on `ambient`.
pub fn gri_defect(sub: &Arc<Domain>, ambient: &Arc<Domain>, w: &PotentialField) -> Result<f64> {
    if !sub.is_subset_of(ambient) {
        return Err(Error::NotSubdomain);
    }
    let op_a = SchrodingerOperator::assemble(ambient, w)?;
    let l_a = compute_landscape(&op_a, GRI_SOLVE_TOL)?.values;
    let w_sub = w.restrict(sub)?;
    let op_s = SchrodingerOperator::from_field(&w_sub);
    let l_s = compute_landscape(&op_s, GRI_SOLVE_TOL)?.values;

    // Σ over boundary pairs grouped by inner site: G(x, i) Σ_j L_A(j)
    let mut weight_by_inner: BTreeMap<LatticePoint, f64> = BTreeMap::new();
    for e in boundary_edges(sub, sub.dim())? {
        let outer = ambient.index_of(&e.outer).map_or(0.0, |j| l_a[j]);
        *weight_by_inner.entry(e.inner).or_insert(0.0) += outer;
    }
    let mut rhs_side = l_s;
    for (inner, weight) in weight_by_inner {
        if weight == 0.0 {
            continue;
        }
        let g = green_column(&op_s, &inner, GRI_SOLVE_TOL)?;
        for (acc, gx) in rhs_side.iter_mut().zip(&g.values) {
            *acc += gx * weight;
        }
    }
    let defect = sub
        .points()
        .iter()
        .zip(&rhs_side)
        .map(|(p, r)| {
            let la = l_a[ambient.index_of(p).expect("sub is inside ambient")];
            (la - r).abs()
        })
        .fold(0.0, f64::max);
    Ok(defect)
}

/// Green function values at the ends of `⟦1, n⟧` and their upper bounds in
/// terms of the potential. A zero denominator gives an infinite bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GreenBoundRecord {
    pub g1y: f64,
    pub bound1: f64,
    pub gyn: f64,
    pub bound2: f64,
}

impl GreenBoundRecord {
    /// `min(bound1 - g1y, bound2 - gyn)`; negative means a violation.
    pub fn slack(&self) -> f64 {
        (self.bound1 - self.g1y).min(self.bound2 - self.gyn)
    }
}

fn reciprocal_or_inf(s: f64) -> f64 {
    if s > 0.0 {
        1.0 / s
    } else {
        f64::INFINITY
    }
}

/// Bounds for a potential given as `w[k] = W(k + 1)` on `⟦1, n⟧`, at the
/// one-based site `y`.
pub fn green_bound_d1(w: &[f64], y: usize) -> Result<GreenBoundRecord> {
    let records = green_bounds_d1_all(w)?;
    if y == 0 || y > w.len() {
        return Err(Error::InvalidArgument(format!(
            "site {y} outside [1, {}]",
            w.len()
        )));
    }
    Ok(records[y - 1])
}

/// [`green_bound_d1`] for every `y ∈ ⟦1, n⟧`, sharing two solves.
pub fn green_bounds_d1_all(w: &[f64]) -> Result<Vec<GreenBoundRecord>> {
    let n = w.len();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let dom = Arc::new(make_interval(1, n as i64)?);
    let field = PotentialField::from_values(Arc::clone(&dom), w.to_vec())?;
    let op = SchrodingerOperator::from_field(&field);
    // symmetry: G(1, y) = G(y, 1), G(y, n) = column n at y
    let col_first = green_column(&op, &LatticePoint::from(1), 1e-14)?.values;
    let col_last = green_column(&op, &LatticePoint::from(n as i64), 1e-14)?.values;
    // W is 1-based: W(i) = w[i - 1]
    let nf = n as f64;
    let mut left = 0.0; // Σ_{i=1}^{y} i W(i)
    let mut out = Vec::with_capacity(n);
    let mut right_sums = vec![0.0; n + 1]; // Σ_{i=y}^{n} (n + 1 - i) W(i)
    for i in (1..=n).rev() {
        right_sums[i - 1] = right_sums[i] + (nf + 1.0 - i as f64) * w[i - 1];
    }
    for y in 1..=n {
        left += y as f64 * w[y - 1];
        out.push(GreenBoundRecord {
            g1y: col_first[y - 1],
            bound1: reciprocal_or_inf(left),
            gyn: col_last[y - 1],
            bound2: reciprocal_or_inf(right_sums[y - 1]),
        });
    }
    Ok(out)
}

/// Writes `x_1,…,x_d,value` rows in stored site order, with a header.
pub fn write_csv<W: Write>(dom: &Domain, values: &[f64], mut out: W) -> Result<()> {
    if values.len() != dom.len() {
        return Err(Error::LengthMismatch {
            expected: dom.len(),
            got: values.len(),
        });
    }
    let header: Vec<String> = (1..=dom.dim()).map(|k| format!("x_{k}")).collect();
    writeln!(out, "{},value", header.join(","))?;
    for (p, v) in dom.points().iter().zip(values) {
        let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        writeln!(out, "{},{}", coords.join(","), fmt_f64(*v))?;
    }
    Ok(())
}
