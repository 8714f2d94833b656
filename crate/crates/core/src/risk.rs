//! Exact fixed-design risks of ridge and PCA-OLS, their bias/variance split,
//! and the factor-4 inflation certificate comparing the two.
//!
//! Everything here works on a [`RotatedProblem`], where `Sigma` is diagonal
//! and each risk separates into one term per eigen-coordinate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{retained, Method};
use crate::model::RotatedProblem;

/// Upper bound on PCA-OLS risk relative to ridge risk at the same lambda.
pub const INFLATION_BOUND: f64 = 4.0;
/// Absolute slack allowed on ratios when certifying the bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Relative agreement required between the two risk derivations.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub method: Method,
    pub lambda: f64,
    pub variance_terms: Vec<f64>,
    pub bias_terms: Vec<f64>,
    pub total_variance: f64,
    pub total_bias: f64,
    pub total_risk: f64,
}

impl RiskReport {
    /// Variance plus bias for coordinate `j`.
    pub fn term(&self, j: usize) -> f64 {
        self.variance_terms[j] + self.bias_terms[j]
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )))
    }
}

/// Assembles a report. Variance terms are `noise_per_sample * weight_j`, and
/// the total is formed as `noise_per_sample * sum(weights)` so that the
/// all-kept case gives exactly `sigma^2 / n * p`.
fn assemble(
    method: Method,
    lambda: f64,
    noise_per_sample: f64,
    variance_weights: Vec<f64>,
    bias_terms: Vec<f64>,
) -> RiskReport {
    let total_variance = noise_per_sample * variance_weights.iter().sum::<f64>();
    let variance_terms: Vec<f64> = variance_weights.iter().map(|w| noise_per_sample * w).collect();
    let total_bias = bias_terms.iter().sum::<f64>();
    RiskReport {
        method,
        lambda,
        variance_terms,
        bias_terms,
        total_variance,
        total_bias,
        total_risk: total_variance + total_bias,
    }
}

/// Ridge risk, one term per coordinate:
/// variance `sigma^2/n * lambda_j^2 / (lambda_j + lambda)^2`,
/// bias `beta_j^2 lambda_j lambda^2 / (lambda_j + lambda)^2`.
pub fn ridge_risk(problem: &RotatedProblem, lambda: f64) -> Result<RiskReport> {
    check_lambda(lambda)?;
    let eig = problem.eigenvalues();
    let beta = problem.beta_rotated();
    let mut weights = Vec::with_capacity(problem.p());
    let mut bias = Vec::with_capacity(problem.p());
    for (&l, &b) in eig.iter().zip(beta.iter()) {
        let denom = l + lambda;
        if denom == 0.0 {
            weights.push(0.0);
            bias.push(0.0);
            continue;
        }
        let shrink = l / denom;
        let pull = lambda / denom;
        weights.push(shrink * shrink);
        bias.push(b * b * l * pull * pull);
    }
    Ok(assemble(
        Method::Ridge,
        lambda,
        problem.noise_per_sample(),
        weights,
        bias,
    ))
}

/// PCA-OLS risk: `sigma^2/n` for each kept coordinate, `lambda_j beta_j^2`
/// for each coordinate with `lambda_j < lambda`.
pub fn pca_risk(problem: &RotatedProblem, lambda: f64) -> Result<RiskReport> {
    check_lambda(lambda)?;
    let kept = retained(problem.spectrum(), lambda);
    let eig = problem.eigenvalues();
    let beta = problem.beta_rotated();
    let weights = kept.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
    let bias = eig
        .iter()
        .zip(beta.iter())
        .map(|(&l, &b)| if l < lambda { l * b * b } else { 0.0 })
        .collect();
    Ok(assemble(
        Method::PcaOls,
        lambda,
        problem.noise_per_sample(),
        weights,
        bias,
    ))
}

/// Per-coordinate risk built from the mean estimator and the coordinate
/// variance of the fitted coefficient:
/// `variance_j = lambda_j * Var([beta_hat]_j)`, `bias_j = lambda_j ([beta_bar]_j - beta_j)^2`.
fn decompose_terms(problem: &RotatedProblem, method: Method, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let noise = problem.noise_per_sample();
    let spectrum = problem.spectrum();
    let kept = retained(spectrum, lambda);
    let mut variance = Vec::with_capacity(problem.p());
    let mut bias = Vec::with_capacity(problem.p());
    for (j, (&l, &b)) in spectrum
        .eigenvalues()
        .iter()
        .zip(problem.beta_rotated().iter())
        .enumerate()
    {
        // [X^T Y / n]_j has variance sigma^2 lambda_j / n in the eigenbasis.
        let cross_var = noise * l;
        let (coef_var, mean_gap) = match method {
            Method::Ridge => {
                let denom = l + lambda;
                if denom == 0.0 {
                    (0.0, 0.0)
                } else {
                    // beta_hat_j = [X^T Y/n]_j / (lambda_j + lambda)
                    // beta_bar_j - beta_j = -lambda / (lambda_j + lambda) * beta_j
                    (cross_var / (denom * denom), -lambda / denom * b)
                }
            }
            _ => {
                if kept[j] {
                    (cross_var / (l * l), 0.0)
                } else if l < lambda {
                    (0.0, -b)
                } else {
                    (0.0, 0.0)
                }
            }
        };
        variance.push(l * coef_var);
        bias.push(l * mean_gap * mean_gap);
    }
    (variance, bias)
}

fn agrees(a: f64, b: f64) -> bool {
    (a - b).abs() <= CONSISTENCY_TOLERANCE * a.abs().max(b.abs())
}

/// Bias/variance decomposition derived independently from the mean
/// estimator, checked against [`ridge_risk`] / [`pca_risk`]. A disagreement
/// beyond `1e-12` relative is reported as [`Error::Inconsistent`].
pub fn decompose_risk(method: Method, problem: &RotatedProblem, lambda: f64) -> Result<RiskReport> {
    let closed_form = match method {
        Method::Ridge => ridge_risk(problem, lambda)?,
        Method::PcaOls => pca_risk(problem, lambda)?,
        Method::Ols => {
            return Err(Error::Validation(
                "risk decomposition is defined for ridge and pca_ols".into(),
            ))
        }
    };
    let (variance, bias) = decompose_terms(problem, method, lambda);
    for j in 0..problem.p() {
        if !agrees(variance[j], closed_form.variance_terms[j]) {
            return Err(Error::Inconsistent(format!(
                "{method} variance term {j} at lambda {lambda}: {} vs {}",
                variance[j], closed_form.variance_terms[j]
            )));
        }
        if !agrees(bias[j], closed_form.bias_terms[j]) {
            return Err(Error::Inconsistent(format!(
                "{method} bias term {j} at lambda {lambda}: {} vs {}",
                bias[j], closed_form.bias_terms[j]
            )));
        }
    }
    let total_variance: f64 = variance.iter().sum();
    let total_bias: f64 = bias.iter().sum();
    if !agrees(total_variance, closed_form.total_variance)
        || !agrees(total_bias, closed_form.total_bias)
    {
        return Err(Error::Inconsistent(format!(
            "{method} totals at lambda {lambda}: ({total_variance}, {total_bias}) vs ({}, {})",
            closed_form.total_variance, closed_form.total_bias
        )));
    }
    Ok(closed_form)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationCertificate {
    pub lambda: f64,
    pub per_term_ratios: Vec<f64>,
    pub overall_ratio: f64,
    pub max_term_ratio: f64,
    pub bound_holds: bool,
}

/// `numerator / denominator` with `0/0 = 1`.
fn ratio(numerator: f64, denominator: f64) -> f64 {
    if numerator == 0.0 && denominator == 0.0 {
        1.0
    } else {
        numerator / denominator
    }
}

fn certify(lambda: f64, ridge: &RiskReport, pca: &RiskReport) -> InflationCertificate {
    let per_term_ratios: Vec<f64> = (0..ridge.variance_terms.len())
        .map(|j| ratio(pca.term(j), ridge.term(j)))
        .collect();
    let max_term_ratio = per_term_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overall_ratio = ratio(pca.total_risk, ridge.total_risk);
    let limit = INFLATION_BOUND + BOUND_TOLERANCE;
    InflationCertificate {
        lambda,
        bound_holds: overall_ratio <= limit && max_term_ratio <= limit,
        per_term_ratios,
        overall_ratio,
        max_term_ratio,
    }
}

/// Ratio of PCA-OLS risk to ridge risk, overall and per coordinate.
pub fn inflation_certificate(problem: &RotatedProblem, lambda: f64) -> Result<InflationCertificate> {
    let ridge = ridge_risk(problem, lambda)?;
    let pca = pca_risk(problem, lambda)?;
    Ok(certify(lambda, &ridge, &pca))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub ridge_variance: f64,
    pub ridge_bias: f64,
    pub ridge_risk: f64,
    pub pca_variance: f64,
    pub pca_bias: f64,
    pub pca_risk: f64,
    pub ratio: f64,
    pub max_term_ratio: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn all_bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| r.bound_holds)
    }
}

/// Checks a lambda grid is nonempty, finite, nonnegative and strictly ascending.
pub fn validate_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Validation("lambda grid is empty".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::Validation(format!(
            "lambda grid contains invalid value {bad}"
        )));
    }
    if let Some(w) = lambdas.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "lambda grid must be strictly ascending ({} followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Risks and certificate at every lambda, rows in grid order.
pub fn lambda_sweep(problem: &RotatedProblem, lambdas: &[f64]) -> Result<SweepResult> {
    validate_grid(lambdas)?;
    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let ridge = ridge_risk(problem, lambda)?;
            let pca = pca_risk(problem, lambda)?;
            let cert = certify(lambda, &ridge, &pca);
            Ok(SweepRow {
                lambda,
                ridge_variance: ridge.total_variance,
                ridge_bias: ridge.total_bias,
                ridge_risk: ridge.total_risk,
                pca_variance: pca.total_variance,
                pca_bias: pca.total_bias,
                pca_risk: pca.total_risk,
                ratio: cert.overall_ratio,
                max_term_ratio: cert.max_term_ratio,
                bound_holds: cert.bound_holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// `n` log-spaced values from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) || count == 0 {
        return Err(Error::Validation(format!(
            "log-spaced grid needs 0 < min <= max and count >= 1 (got {min}, {max}, {count})"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    if min == max {
        return Err(Error::Validation(
            "log-spaced grid with count > 1 needs min < max".into(),
        ));
    }
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| match i {
            0 => min,
            i if i == count - 1 => max,
            i => (lo + step * i as f64).exp(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fixture() -> RotatedProblem {
        RotatedProblem::diagonal(&[2.0, 0.5], &[1.0, 1.0], 1.0, 4).unwrap()
    }

    #[test]
    fn ridge_fixture_values() {
        let r = ridge_risk(&fixture(), 1.0).unwrap();
        assert_relative_eq!(r.total_variance, 5.0 / 36.0, max_relative = 1e-14);
        assert_relative_eq!(r.total_bias, 4.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(r.total_risk, 7.0 / 12.0, max_relative = 1e-14);
    }

    #[test]
    fn pca_fixture_values() {
        let r = pca_risk(&fixture(), 1.0).unwrap();
        assert_eq!(r.total_variance, 0.25);
        assert_eq!(r.total_bias, 0.5);
        assert_eq!(r.total_risk, 0.75);
    }

    #[test]
    fn certificate_fixture() {
        let c = inflation_certificate(&fixture(), 1.0).unwrap();
        assert_relative_eq!(c.overall_ratio, 9.0 / 7.0, max_relative = 1e-14);
        assert!(c.bound_holds);
    }

    #[test]
    fn tight_case_is_four() {
        let p = RotatedProblem::diagonal(&[1.0], &[0.0], 1.0, 1).unwrap();
        let c = inflation_certificate(&p, 1.0).unwrap();
        assert_eq!(c.per_term_ratios, vec![4.0]);
        assert_eq!(c.overall_ratio, 4.0);
        assert!(c.bound_holds);
    }

    #[test]
    fn lambda_zero_all_ratios_one() {
        let c = inflation_certificate(&fixture(), 0.0).unwrap();
        assert_eq!(c.overall_ratio, 1.0);
        assert!(c.per_term_ratios.iter().all(|&r| r == 1.0));
        let r = ridge_risk(&fixture(), 0.0).unwrap();
        assert_eq!(r.total_bias, 0.0);
        assert_eq!(r.total_risk, 1.0 / 4.0 * 2.0);
    }

    #[test]
    fn zero_terms_give_unit_ratio() {
        // beta = 0 and sigma = 0: every term vanishes for both estimators
        let p = RotatedProblem::diagonal(&[3.0, 1.0], &[0.0, 0.0], 0.0, 5).unwrap();
        let c = inflation_certificate(&p, 2.0).unwrap();
        assert_eq!(c.per_term_ratios, vec![1.0, 1.0]);
        assert_eq!(c.overall_ratio, 1.0);
    }

    #[test]
    fn zero_eigenvalue_contributes_nothing() {
        let p = RotatedProblem::diagonal(&[1.0, 0.0], &[1.0, 5.0], 1.0, 2).unwrap();
        let pca = pca_risk(&p, 0.0).unwrap();
        assert_eq!(pca.variance_terms, vec![0.5, 0.0]);
        assert_eq!(pca.bias_terms, vec![0.0, 0.0]);
        let ridge = ridge_risk(&p, 0.0).unwrap();
        assert_eq!(ridge.variance_terms, vec![0.5, 0.0]);
        let c = inflation_certificate(&p, 0.0).unwrap();
        assert_eq!(c.overall_ratio, 1.0);
    }

    #[test]
    fn decompose_matches_closed_form() {
        for lambda in [0.0, 0.25, 0.5, 1.0, 2.0, 3.0] {
            for method in [Method::Ridge, Method::PcaOls] {
                let d = decompose_risk(method, &fixture(), lambda).unwrap();
                let direct = match method {
                    Method::Ridge => ridge_risk(&fixture(), lambda).unwrap(),
                    _ => pca_risk(&fixture(), lambda).unwrap(),
                };
                assert_eq!(d, direct);
            }
        }
        assert!(decompose_risk(Method::Ols, &fixture(), 1.0).is_err());
    }

    #[test]
    fn decompose_degenerate_inputs() {
        let no_signal = RotatedProblem::diagonal(&[2.0, 0.5], &[0.0, 0.0], 1.0, 4).unwrap();
        let no_noise = RotatedProblem::diagonal(&[2.0, 0.5], &[1.0, 1.0], 0.0, 4).unwrap();
        for method in [Method::Ridge, Method::PcaOls] {
            for lambda in [0.0, 0.7, 5.0] {
                assert_eq!(decompose_risk(method, &no_signal, lambda).unwrap().total_bias, 0.0);
                assert_eq!(decompose_risk(method, &no_noise, lambda).unwrap().total_variance, 0.0);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(lambda_sweep(&fixture(), &[]).is_err());
        assert!(lambda_sweep(&fixture(), &[1.0, 0.5]).is_err());
        assert!(lambda_sweep(&fixture(), &[1.0, 1.0]).is_err());
        assert!(lambda_sweep(&fixture(), &[-1.0, 1.0]).is_err());
        let s = lambda_sweep(&fixture(), &[0.0]).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].ratio, 1.0);
    }

    #[test]
    fn sweep_rows_follow_grid_and_pca_is_piecewise_constant() {
        let grid = [0.1, 0.3, 0.5, 0.6, 1.0, 1.9, 2.0, 2.1, 5.0];
        let s = lambda_sweep(&fixture(), &grid).unwrap();
        let lambdas: Vec<f64> = s.rows.iter().map(|r| r.lambda).collect();
        assert_eq!(lambdas, grid);
        // (0.5, 2] keeps coordinate 1 only, so pca risk is constant there
        assert_eq!(s.rows[3].pca_risk, s.rows[4].pca_risk);
        assert_eq!(s.rows[4].pca_risk, s.rows[5].pca_risk);
        assert_eq!(s.rows[5].pca_risk, s.rows[6].pca_risk);
        assert_eq!(s.rows[0].pca_risk, s.rows[1].pca_risk);
        assert_eq!(s.rows[1].pca_risk, s.rows[2].pca_risk);
        assert_eq!(s.rows[7].pca_risk, s.rows[8].pca_risk);
        assert!(s.all_bounds_hold());
    }

    #[test]
    fn log_spaced_endpoints() {
        let g = log_spaced(1e-3, 1e3, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1e3);
        assert_relative_eq!(g[3], 1.0, max_relative = 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_spaced(2.0, 2.0, 1).unwrap(), vec![2.0]);
        assert!(log_spaced(0.0, 1.0, 3).is_err());
        assert!(log_spaced(1.0, 1.0, 3).is_err());
        assert!(log_spaced(1.0, 2.0, 0).is_err());
    }
}
