#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ridgepca::{DMatrix, DVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `(1/n) sum_i X_ij X_ik` by explicit loops.
pub fn brute_second_moment(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let mut out = DMatrix::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            let mut acc = 0.0;
            for i in 0..n {
                acc += x[(i, j)] * x[(i, k)];
            }
            out[(j, k)] = acc / n as f64;
        }
    }
    out
}

/// `sum_jk v_j S_jk v_k` by explicit loops.
pub fn brute_quadratic_form(v: &DVector<f64>, s: &DMatrix<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..v.len() {
        for k in 0..v.len() {
            acc += v[j] * s[(j, k)] * v[k];
        }
    }
    acc
}

/// Eigenvalues of a PSD matrix by power iteration with Hotelling deflation,
/// largest first.
pub fn power_iteration_eigenvalues(s: &DMatrix<f64>, iterations: usize) -> Vec<f64> {
    let p = s.nrows();
    let mut work = s.clone();
    let mut out = Vec::with_capacity(p);
    for k in 0..p {
        let mut v = DVector::from_fn(p, |i, _| 1.0 + ((i * 7 + k * 3) % 5) as f64 * 0.1);
        v /= v.norm();
        let mut value = 0.0;
        for _ in 0..iterations {
            let w = &work * &v;
            let norm = w.norm();
            if norm == 0.0 {
                value = 0.0;
                break;
            }
            v = w / norm;
            value = v.dot(&(&work * &v));
        }
        out.push(value);
        work -= &v * v.transpose() * value;
    }
    out
}

/// Ridge risk evaluated straight from the closed form with the
/// `lambda_j / (1 + lambda_j / lambda)^2` bias, valid for `lambda > 0`.
pub fn textbook_ridge_risk(eig: &[f64], beta: &[f64], noise: f64, n: usize, lambda: f64) -> f64 {
    let mut variance = 0.0;
    let mut bias = 0.0;
    for (&l, &b) in eig.iter().zip(beta) {
        variance += (l / (l + lambda)).powi(2);
        bias += b * b * l / (1.0 + l / lambda).powi(2);
    }
    noise / n as f64 * variance + bias
}

/// PCA-OLS risk from the indicator form.
pub fn textbook_pca_risk(eig: &[f64], beta: &[f64], noise: f64, n: usize, lambda: f64) -> f64 {
    let mut kept = 0.0;
    let mut bias = 0.0;
    for (&l, &b) in eig.iter().zip(beta) {
        if l >= lambda {
            kept += 1.0;
        } else {
            bias += l * b * b;
        }
    }
    noise / n as f64 * kept + bias
}
