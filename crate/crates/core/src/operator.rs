//! The Dirichlet Schrödinger operator `-Δ_A + W` on a finite domain.
//!
//! The diagonal is always `2d + W(x)`; an off-diagonal `-1` appears exactly
//! for pairs of in-domain nearest neighbors. One-dimensional domains are
//! tridiagonal in stored order and use exact elimination and Sturm
//! bisection; everything else goes through preconditioned conjugate
//! gradients.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Domain;
use crate::potential::PotentialField;

pub const DEFAULT_SOLVE_TOL: f64 = 1e-10;
pub const DEFAULT_EIG_TOL: f64 = 1e-9;
pub const DEFAULT_SPECTRUM_CAP: usize = 3000;
pub const DEFAULT_DENSE_CAP: usize = 2000;
const SUBSPACE_DIM: usize = 8;

/// Sparse symmetric positive-definite `-Δ_A + W`.
#[derive(Debug, Clone)]
pub struct SchrodingerOperator {
    domain: Arc<Domain>,
    diag: Vec<f64>,
}

/// Principal eigenpair with its eigen-residual `‖(H - λ)v‖₂`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

impl SchrodingerOperator {
    pub fn assemble(dom: &Arc<Domain>, w: &PotentialField) -> Result<Self> {
        if !Arc::ptr_eq(dom, w.domain()) && **dom != **w.domain() {
            return Err(Error::DomainMismatch);
        }
        Ok(Self::from_field(w))
    }

    /// Operator on the field's own domain.
    pub fn from_field(w: &PotentialField) -> Self {
        let two_d = 2.0 * w.domain().dim() as f64;
        SchrodingerOperator {
            domain: Arc::clone(w.domain()),
            diag: w.values().iter().map(|v| two_d + v).collect(),
        }
    }

    /// Free Laplacian `-Δ_A`.
    pub fn laplacian(dom: &Arc<Domain>) -> Self {
        Self::from_field(&PotentialField::zero(Arc::clone(dom)))
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries `(i, j, -1)` with `i != j`, row-major.
    pub fn offdiag_entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size()).flat_map(move |i| {
            self.domain
                .neighbor_indices(i)
                .iter()
                .map(move |&j| (i, j))
        })
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let s: f64 = self.domain.neighbor_indices(i).iter().map(|&j| v[j]).sum();
            *o = self.diag[i] * v[i] - s;
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                got: len,
            });
        }
        Ok(())
    }

    /// Sub/super-diagonal of the tridiagonal form of a one-dimensional
    /// operator: `-1` between consecutive integers, `0` across gaps.
    fn tridiagonal_off(&self) -> Vec<f64> {
        (0..self.size().saturating_sub(1))
            .map(|i| if self.domain.consecutive_1d(i) { -1.0 } else { 0.0 })
            .collect()
    }

    fn is_tridiagonal(&self) -> bool {
        self.domain.dim() == 1
    }

    /// Solves `H x = rhs` with `‖H x - rhs‖₂ <= tol ‖rhs‖₂`.
    pub fn solve_spd(&self, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        self.check_len(rhs.len())?;
        if rhs.iter().all(|&b| b == 0.0) {
            return Ok(vec![0.0; rhs.len()]);
        }
        if self.is_tridiagonal() {
            let off = self.tridiagonal_off();
            return Ok(tridiagonal_solve(&self.diag, &off, 0.0, rhs));
        }
        self.conjugate_gradient(rhs, tol, 10 * self.size().max(10))
    }

    /// Jacobi-preconditioned conjugate gradients.
    fn conjugate_gradient(&self, rhs: &[f64], tol: f64, maxiter: usize) -> Result<Vec<f64>> {
        let n = rhs.len();
        let bnorm = norm2(rhs);
        let target = tol * bnorm;
        let inv_diag: Vec<f64> = self.diag.iter().map(|d| 1.0 / d).collect();
        let mut x = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        let mut p = z.clone();
        let mut hp = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut rnorm = bnorm;
        for _ in 0..maxiter {
            self.apply_into(&p, &mut hp);
            let alpha = rz / dot(&p, &hp);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * hp[i];
            }
            rnorm = norm2(&r);
            if rnorm <= target {
                // the recurrence residual drifts; confirm against the true one
                self.apply_into(&x, &mut hp);
                r.iter_mut()
                    .zip(rhs.iter().zip(&hp))
                    .for_each(|(ri, (b, h))| *ri = b - h);
                rnorm = norm2(&r);
                if rnorm <= target {
                    return Ok(x);
                }
                z.iter_mut()
                    .zip(r.iter().zip(&inv_diag))
                    .for_each(|(zi, (a, b))| *zi = a * b);
                p.copy_from_slice(&z);
                rz = dot(&r, &z);
                continue;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::SolverIterationCap {
            iterations: maxiter,
            residual: rnorm / bnorm,
        })
    }

    fn eigen_residual(&self, v: &[f64], lambda: f64, work: &mut [f64]) -> f64 {
        self.apply_into(v, work);
        work.iter()
            .zip(v)
            .map(|(h, x)| (h - lambda * x).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest eigenvalue and a nonnegative unit eigenvector, converged when
    /// the eigen-residual is at most `tol · λ`.
    ///
    /// Non-convergence is reported as [`Error::EigenNonConvergence`]; use
    /// [`Self::principal_eigpair_best`] to also get the last iterate.
    pub fn principal_eigpair(&self, tol: f64, maxiter: usize) -> Result<SpectralResult> {
        self.principal_eigpair_best(tol, maxiter).map_err(|(e, _)| e)
    }

    pub fn principal_eigpair_best(
        &self,
        tol: f64,
        maxiter: usize,
    ) -> std::result::Result<SpectralResult, (Error, Option<SpectralResult>)> {
        if !(tol > 0.0) {
            return Err((
                Error::InvalidArgument(format!("tolerance must be positive, got {tol}")),
                None,
            ));
        }
        let best = if self.is_tridiagonal() {
            self.eigpair_tridiagonal(tol, maxiter)
        } else {
            self.eigpair_inverse_iteration(tol, maxiter)
        }
        .map_err(|e| (e, None))?;
        if best.residual <= tol * best.lambda {
            Ok(best)
        } else {
            Err((
                Error::EigenNonConvergence {
                    iterations: best.iterations,
                    residual: best.residual,
                    lambda: best.lambda,
                },
                Some(best),
            ))
        }
    }

    /// Smallest eigenvalue and eigenvector with default tolerances.
    pub fn principal(&self) -> Result<SpectralResult> {
        self.principal_eigpair(DEFAULT_EIG_TOL, 10 * self.size().max(10))
    }

    /// Block inverse iteration with Rayleigh-Ritz on a subspace of
    /// dimension `SUBSPACE_DIM`. Clustered low eigenvalues, common for
    /// random potentials, are resolved inside the block instead of slowing
    /// down a single-vector iteration.
    fn eigpair_inverse_iteration(&self, tol: f64, maxiter: usize) -> Result<SpectralResult> {
        let n = self.size();
        let p = n.min(SUBSPACE_DIM);
        let solve_tol = (tol * 1e-3).clamp(1e-14, 1e-10);
        // first column is constant; the others are fixed pseudo-random
        let mut x = DMatrix::<f64>::from_fn(n, p, |i, j| {
            if j == 0 {
                1.0
            } else {
                let h = (i as u64 + 1)
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add((j as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9));
                ((h ^ (h >> 29)).wrapping_mul(0x94d0_49bb_1331_11eb) >> 11) as f64
                    / (1u64 << 53) as f64
                    - 0.5
            }
        });
        let mut work = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut it = 0;
        loop {
            let q = x.clone().qr().q();
            let mut hq = DMatrix::<f64>::zeros(n, p);
            for j in 0..p {
                col.copy_from_slice(q.column(j).as_slice());
                self.apply_into(&col, &mut work);
                hq.column_mut(j).copy_from_slice(&work);
            }
            let t = q.transpose() * &hq;
            let t = (&t + t.transpose()) * 0.5;
            let eig = SymmetricEigen::new(t);
            let k = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .expect("nonempty block");
            let lambda = eig.eigenvalues[k];
            let mut v: Vec<f64> = (&q * eig.eigenvectors.column(k)).iter().cloned().collect();
            let nv = norm2(&v);
            scale(&mut v, 1.0 / nv);
            let residual = self.eigen_residual(&v, lambda, &mut work);
            if residual <= tol * lambda || it >= maxiter || p == n {
                orient_nonnegative(&mut v);
                return Ok(SpectralResult {
                    lambda,
                    vector: v,
                    residual,
                    iterations: it,
                });
            }
            // Ritz vectors as the next block
            let ritz = &q * &eig.eigenvectors;
            for j in 0..p {
                col.copy_from_slice(ritz.column(j).as_slice());
                let y = self.solve_spd(&col, solve_tol)?;
                x.column_mut(j).copy_from_slice(&y);
            }
            it += 1;
        }
    }

    /// Number of eigenvalues strictly below `x` (one-dimensional only).
    pub fn sturm_count(&self, x: f64) -> usize {
        debug_assert!(self.is_tridiagonal());
        let mut count = 0;
        let mut q = 1.0f64;
        for i in 0..self.size() {
            let b2 = if i > 0 && self.domain.consecutive_1d(i - 1) {
                1.0
            } else {
                0.0
            };
            q = (self.diag[i] - x) - b2 / q;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Number of eigenvalues `<= t`, counted with multiplicity.
    pub fn count_eigenvalues_le(&self, t: f64, cap: usize) -> Result<usize> {
        if self.is_tridiagonal() {
            // eigenvalues <= t are those < next float above t
            return Ok(self.sturm_count(t.next_up()));
        }
        let spec = self.full_spectrum(cap)?;
        Ok(spec.partition_point(|&l| l <= t))
    }

    fn eigpair_tridiagonal(&self, tol: f64, maxiter: usize) -> Result<SpectralResult> {
        let n = self.size();
        let off = self.tridiagonal_off();
        // 0 < λ1 <= min diagonal
        let mut lo = 0.0f64;
        let mut hi = self.diag.iter().cloned().fold(f64::INFINITY, f64::min);
        hi = hi.next_up();
        let mut steps = 0;
        while steps < 2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            steps += 1;
        }
        let lambda = lo;
        // shift strictly below λ1 keeps H - σ positive definite
        let sigma = lambda - (lambda * 1e-10).max(f64::MIN_POSITIVE);
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut work = vec![0.0; n];
        let mut residual = self.eigen_residual(&v, lambda, &mut work);
        let mut it = 0;
        while it < maxiter.max(1) && residual > tol * lambda {
            let mut y = tridiagonal_solve(&self.diag, &off, sigma, &v);
            let ny = norm2(&y);
            scale(&mut y, 1.0 / ny);
            v = y;
            residual = self.eigen_residual(&v, lambda, &mut work);
            it += 1;
        }
        orient_nonnegative(&mut v);
        Ok(SpectralResult {
            lambda,
            vector: v,
            residual,
            iterations: steps + it,
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, j) in self.offdiag_entries() {
            m[(i, j)] = -1.0;
        }
        m
    }

    /// All eigenvalues in ascending order, by dense diagonalization.
    pub fn full_spectrum(&self, size_cap: usize) -> Result<Vec<f64>> {
        if self.size() > size_cap {
            return Err(Error::SizeCap {
                size: self.size(),
                cap: size_cap,
            });
        }
        let mut ev: Vec<f64> = self.to_dense().symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    /// Writes `i j value` lines (0-based stored order), diagonal included.
    pub fn write_coo<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.size() {
            writeln!(out, "{} {} {:.17e}", i, i, self.diag[i])?;
            for &j in self.domain.neighbor_indices(i) {
                writeln!(out, "{} {} {:.17e}", i, j, -1.0)?;
            }
        }
        Ok(())
    }
}

fn orient_nonnegative(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s < 0.0 {
        scale(v, -1.0);
    }
    // entries of a principal vector share one sign; flush roundoff
    for x in v.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
}

/// Solves `(T - shift) x = rhs` for symmetric tridiagonal `T` with diagonal
/// `diag` and off-diagonal `off`, by LDLᵀ elimination (no pivoting; the
/// shifted matrix must be positive definite).
pub(crate) fn tridiagonal_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = vec![0.0; n];
    let mut y = vec![0.0; n];
    d[0] = diag[0] - shift;
    y[0] = rhs[0];
    for i in 1..n {
        let l = off[i - 1] / d[i - 1];
        d[i] = diag[i] - shift - l * off[i - 1];
        y[i] = rhs[i] - l * y[i - 1];
    }
    let mut x = vec![0.0; n];
    x[n - 1] = y[n - 1] / d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (y[i] - off[i] * x[i + 1]) / d[i];
    }
    x
}

/// Determinant of the one-dimensional operator on `⟦1, k⟧`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathDeterminant {
    /// All potential values were integers and no overflow occurred.
    Exact(i128),
    Approx(f64),
}

impl PathDeterminant {
    pub fn as_f64(&self) -> f64 {
        match *self {
            PathDeterminant::Exact(v) => v as f64,
            PathDeterminant::Approx(v) => v,
        }
    }
}

/// `det(-Δ_⟦1,k⟧ + W)` via `D_j = (2 + W_j) D_{j-1} - D_{j-2}`.
pub fn det_path(k: usize, w: Option<&[f64]>) -> Result<PathDeterminant> {
    if k == 0 {
        return Err(Error::InvalidArgument("path length must be at least 1".into()));
    }
    if let Some(w) = w {
        if w.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: w.len(),
            });
        }
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativePotential { index, value });
        }
    }
    let weight = |j: usize| w.map_or(0.0, |w| w[j]);
    let integral = (0..k).all(|j| {
        let v = weight(j);
        v.fract() == 0.0 && v < 9.0e15
    });
    if integral {
        let mut prev: i128 = 1;
        let mut cur: i128 = 2 + weight(0) as i128;
        let mut ok = true;
        for j in 1..k {
            let a = 2 + weight(j) as i128;
            match a.checked_mul(cur).and_then(|x| x.checked_sub(prev)) {
                Some(next) => {
                    prev = cur;
                    cur = next;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(PathDeterminant::Exact(cur));
        }
    }
    let mut prev = 1.0f64;
    let mut cur = 2.0 + weight(0);
    for j in 1..k {
        let next = (2.0 + weight(j)) * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(PathDeterminant::Approx(cur))
}

/// Cached eigendecomposition for evaluating `exp(-tH) v` on a grid of times.
pub struct Semigroup {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl Semigroup {
    pub fn new(op: &SchrodingerOperator, dense_cap: usize) -> Result<Self> {
        if op.size() > dense_cap {
            return Err(Error::SizeCap {
                size: op.size(),
                cap: dense_cap,
            });
        }
        let eig = SymmetricEigen::new(op.to_dense());
        Ok(Semigroup {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn apply(&self, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
        }
        if v.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                got: v.len(),
            });
        }
        if t == 0.0 {
            return Ok(v.to_vec());
        }
        let x = DVector::from_column_slice(v);
        let mut coeffs = self.vectors.tr_mul(&x);
        for (c, l) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= (-t * l).exp();
        }
        Ok((&self.vectors * coeffs).iter().cloned().collect())
    }
}

/// `exp(-t H) v` by dense eigendecomposition.
pub fn semigroup_apply(
    op: &SchrodingerOperator,
    t: f64,
    v: &[f64],
    dense_cap: usize,
) -> Result<Vec<f64>> {
    op.check_len(v.len())?;
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    Semigroup::new(op, dense_cap)?.apply(t, v)
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest ratio over `t_grid` of `‖exp(-tH) 1‖∞` to
/// `(1 + (λt)^{d/2}) exp(-λt)`, with `λ` the principal eigenvalue.
pub fn semigroup_bound_ratio(
    op: &SchrodingerOperator,
    t_grid: &[f64],
    dense_cap: usize,
) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    let lambda = op.principal()?.lambda;
    let sg = Semigroup::new(op, dense_cap)?;
    let ones = vec![1.0; op.size()];
    let half_d = op.domain().dim() as f64 / 2.0;
    let mut best = f64::NEG_INFINITY;
    for &t in t_grid {
        let k = sup_norm(&sg.apply(t, &ones)?);
        let lt = lambda * t;
        let shape = (1.0 + lt.powf(half_d)) * (-lt).exp();
        best = best.max(k / shape);
    }
    Ok(best)
}
