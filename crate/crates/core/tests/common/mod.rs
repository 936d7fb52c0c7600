//! Dense reference computations built directly from site coordinates,
//! sharing no code with the library's sparse assembly.

#![allow(dead_code)]

use anderson_landscape::PotentialField;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn dense_operator(field: &PotentialField) -> DMatrix<f64> {
    let pts = field.domain().points();
    let d = field.domain().dim();
    let n = pts.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 2.0 * d as f64 + field.values()[i];
        for j in 0..n {
            let l1: i64 = pts[i]
                .coords()
                .iter()
                .zip(pts[j].coords())
                .map(|(a, b)| (a - b).abs())
                .sum();
            if l1 == 1 {
                h[(i, j)] = -1.0;
            }
        }
    }
    h
}

pub fn dense_min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h.clone()).eigenvalues.min()
}

pub fn dense_landscape(h: &DMatrix<f64>) -> DVector<f64> {
    h.clone()
        .lu()
        .solve(&DVector::from_element(h.nrows(), 1.0))
        .expect("operator is positive definite")
}

/// `exp(-tH) 1` by scaling and squaring with a degree-20 Taylor polynomial.
pub fn dense_semigroup_ones(h: &DMatrix<f64>, t: f64) -> DVector<f64> {
    let n = h.nrows();
    let norm = h.iter().map(|x| x.abs()).fold(0.0, f64::max) * n as f64;
    let mut s = 0;
    while t * norm / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let a = h * (-t / 2f64.powi(s));
    let mut term = DMatrix::identity(n, n);
    let mut e = DMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &a / k as f64;
        e += &term;
    }
    for _ in 0..s {
        e = &e * &e;
    }
    e * DVector::from_element(n, 1.0)
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
