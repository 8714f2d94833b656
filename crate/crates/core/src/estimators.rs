//! Ridge, ordinary least squares, and PCA-truncated least squares.
//!
//! All estimators return coefficients in the original coordinates. OLS and
//! PCA-OLS work in the eigenbasis of `Sigma`; ridge solves
//! `(Sigma + lambda I) w = X^T y / n` directly.

use nalgebra::{Cholesky, DVector};

use crate::error::{Error, Result};
use crate::model::{ProblemInstance, RotatedProblem, SecondMoment, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ridge,
    Ols,
    PcaOls,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ridge => "ridge",
            Method::Ols => "ols",
            Method::PcaOls => "pca_ols",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One realization of the response vector `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    y: DVector<f64>,
}

impl Observation {
    pub fn new(y: DVector<f64>) -> Self {
        Self { y }
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

impl From<DVector<f64>> for Observation {
    fn from(y: DVector<f64>) -> Self {
        Self::new(y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    coefficients: DVector<f64>,
    method: Method,
    lambda: f64,
    kept_mask: Option<Vec<bool>>,
}

impl Estimate {
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> DVector<f64> {
        self.coefficients
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Which eigen-coordinates PCA-OLS retained; `None` for other methods.
    pub fn kept_mask(&self) -> Option<&[bool]> {
        self.kept_mask.as_deref()
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

/// `lambda_j / (lambda_j + lambda)` per eigen-coordinate; `0/0` is taken as 0.
pub fn shrinkage_factors(spectrum: &Spectrum, lambda: f64) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    Ok(spectrum.eigenvalues().map(|l| shrinkage(l, lambda)))
}

pub(crate) fn shrinkage(eigenvalue: f64, lambda: f64) -> f64 {
    let denom = eigenvalue + lambda;
    if denom == 0.0 {
        0.0
    } else {
        eigenvalue / denom
    }
}

/// PCA-OLS retention rule: keep coordinate `j` iff `lambda_j >= lambda`
/// and the coordinate is not numerically null.
pub fn retained(spectrum: &Spectrum, lambda: f64) -> Vec<bool> {
    (0..spectrum.dim())
        .map(|j| spectrum.is_active(j) && spectrum.eigenvalues()[j] >= lambda)
        .collect()
}

/// A design with its second moment and eigendecomposition computed once,
/// for fitting many observations against the same `X`.
#[derive(Debug, Clone)]
pub struct PreparedDesign {
    instance: ProblemInstance,
    sigma: SecondMoment,
    spectrum: Spectrum,
}

impl PreparedDesign {
    pub fn new(instance: ProblemInstance) -> Result<Self> {
        let sigma = instance.second_moment();
        let spectrum = sigma.eigendecompose()?;
        Ok(Self {
            instance,
            sigma,
            spectrum,
        })
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    pub fn second_moment(&self) -> &SecondMoment {
        &self.sigma
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn rotated_problem(&self) -> Result<RotatedProblem> {
        crate::model::rotate_problem(&self.instance, self.spectrum.clone())
    }

    /// `X^T y / n` expressed in the eigenbasis.
    fn rotated_cross_moment(&self, y: &Observation) -> Result<DVector<f64>> {
        let b = self.instance.cross_moment(y.y())?;
        self.spectrum.to_rotated(&b)
    }

    /// Minimum-norm OLS in the eigenbasis.
    fn rotated_ols(&self, y: &Observation) -> Result<DVector<f64>> {
        let mut b = self.rotated_cross_moment(y)?;
        for (j, v) in b.iter_mut().enumerate() {
            *v = if self.spectrum.is_active(j) {
                *v / self.spectrum.eigenvalues()[j]
            } else {
                0.0
            };
        }
        Ok(b)
    }

    pub fn ridge(&self, y: &Observation, lambda: f64) -> Result<Estimate> {
        check_lambda(lambda)?;
        if lambda == 0.0 && !self.spectrum.is_full_rank() {
            return Err(Error::Singular {
                smallest: self.spectrum.eigenvalues()[self.spectrum.dim() - 1],
                largest: self.spectrum.largest(),
            });
        }
        let rhs = self.instance.cross_moment(y.y())?;
        let p = self.instance.p();
        let mut system = self.sigma.matrix().clone();
        for i in 0..p {
            system[(i, i)] += lambda;
        }
        let coefficients = match Cholesky::new(system) {
            Some(chol) => chol.solve(&rhs),
            None => {
                // Numerically indefinite at this lambda; solve in the eigenbasis.
                let mut r = self.spectrum.to_rotated(&rhs)?;
                for (v, l) in r.iter_mut().zip(self.spectrum.eigenvalues().iter()) {
                    let d = l + lambda;
                    if d <= 0.0 {
                        return Err(Error::Singular {
                            smallest: d,
                            largest: self.spectrum.largest() + lambda,
                        });
                    }
                    *v /= d;
                }
                self.spectrum.from_rotated(&r)?
            }
        };
        Ok(Estimate {
            coefficients,
            method: Method::Ridge,
            lambda,
            kept_mask: None,
        })
    }

    pub fn ols(&self, y: &Observation) -> Result<Estimate> {
        let rotated = self.rotated_ols(y)?;
        Ok(Estimate {
            coefficients: self.spectrum.from_rotated(&rotated)?,
            method: Method::Ols,
            lambda: 0.0,
            kept_mask: None,
        })
    }

    pub fn pca_ols(&self, y: &Observation, lambda: f64) -> Result<Estimate> {
        check_lambda(lambda)?;
        let mut rotated = self.rotated_ols(y)?;
        let kept = retained(&self.spectrum, lambda);
        for (v, &keep) in rotated.iter_mut().zip(&kept) {
            if !keep {
                *v = 0.0;
            }
        }
        Ok(Estimate {
            coefficients: self.spectrum.from_rotated(&rotated)?,
            method: Method::PcaOls,
            lambda,
            kept_mask: Some(kept),
        })
    }

    /// Dispatches on `method`; `lambda` is ignored for OLS.
    pub fn fit(&self, method: Method, y: &Observation, lambda: f64) -> Result<Estimate> {
        match method {
            Method::Ridge => self.ridge(y, lambda),
            Method::Ols => self.ols(y),
            Method::PcaOls => self.pca_ols(y, lambda),
        }
    }
}

/// `(Sigma + lambda I)^{-1} X^T y / n`.
pub fn ridge_fit(instance: &ProblemInstance, y: &Observation, lambda: f64) -> Result<Estimate> {
    PreparedDesign::new(instance.clone())?.ridge(y, lambda)
}

/// Minimum-norm least squares: null directions of `Sigma` get coefficient 0.
pub fn ols_fit(instance: &ProblemInstance, y: &Observation) -> Result<Estimate> {
    PreparedDesign::new(instance.clone())?.ols(y)
}

/// OLS restricted to eigen-coordinates with `lambda_j >= lambda`.
pub fn pca_ols_fit(instance: &ProblemInstance, y: &Observation, lambda: f64) -> Result<Estimate> {
    PreparedDesign::new(instance.clone())?.pca_ols(y, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector, DMatrix};

    fn identity_instance() -> ProblemInstance {
        ProblemInstance::new(DMatrix::identity(2, 2), dvector![1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn ridge_hand_example() {
        // Sigma = I/2, X^T y / n = (1/2, 1/2) => w = (1/2) / (3/2) = 1/3
        let est = ridge_fit(&identity_instance(), &dvector![1.0, 1.0].into(), 1.0).unwrap();
        assert_relative_eq!(est.coefficients()[0], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(est.coefficients()[1], 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(est.method(), Method::Ridge);
        assert!(est.kept_mask().is_none());
    }

    #[test]
    fn ridge_zero_lambda_on_singular_is_an_error() {
        let x = dmatrix![1.0, 1.0; 2.0, 2.0; 3.0, 3.0];
        let inst = ProblemInstance::new(x, dvector![1.0, 0.0], 1.0).unwrap();
        let y: Observation = dvector![1.0, 2.0, 3.0].into();
        assert!(matches!(ridge_fit(&inst, &y, 0.0), Err(Error::Singular { .. })));
        assert!(ridge_fit(&inst, &y, 0.1).is_ok());
    }

    #[test]
    fn negative_lambda_rejected() {
        let y: Observation = dvector![1.0, 1.0].into();
        assert!(ridge_fit(&identity_instance(), &y, -1.0).is_err());
        assert!(pca_ols_fit(&identity_instance(), &y, f64::NAN).is_err());
    }

    #[test]
    fn observation_length_checked() {
        let y: Observation = dvector![1.0, 1.0, 1.0].into();
        assert!(matches!(
            ols_fit(&identity_instance(), &y),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ols_square_invertible() {
        let x = dmatrix![2.0, 1.0; 1.0, 3.0];
        let inst = ProblemInstance::new(x.clone(), dvector![0.0, 0.0], 1.0).unwrap();
        let y = dvector![1.0, -2.0];
        let est = ols_fit(&inst, &y.clone().into()).unwrap();
        let expected = x.try_inverse().unwrap() * y;
        assert_relative_eq!(est.coefficients().clone(), expected, epsilon = 1e-12);
    }

    #[test]
    fn ols_rank_deficient_projects_onto_column_space() {
        // Both columns equal: column space is span(1, 2, 3).
        let x = dmatrix![1.0, 1.0; 2.0, 2.0; 3.0, 3.0];
        let inst = ProblemInstance::new(x.clone(), dvector![1.0, 0.0], 1.0).unwrap();
        let y = dvector![2.0, 4.0, 6.0];
        let est = ols_fit(&inst, &y.clone().into()).unwrap();
        assert_relative_eq!(&x * est.coefficients(), y, epsilon = 1e-12);
        // null direction (1, -1) carries no weight
        let c = est.coefficients();
        assert!((c[0] - c[1]).abs() < 1e-12);
    }

    #[test]
    fn pca_keeps_tie_and_drops_below() {
        let x = dmatrix![2.0, 0.0; 2.0, 0.0; 0.0, 1.0; 0.0, 1.0];
        let inst = ProblemInstance::new(x, dvector![1.0, 1.0], 1.0).unwrap();
        let y: Observation = dvector![1.0, 3.0, 2.0, -1.0].into();
        let ols = ols_fit(&inst, &y).unwrap();

        let half = pca_ols_fit(&inst, &y, 1.0).unwrap();
        assert_eq!(half.kept_mask(), Some(&[true, false][..]));
        assert_eq!(half.coefficients()[0], ols.coefficients()[0]);
        assert_eq!(half.coefficients()[1], 0.0);

        // lambda equal to an eigenvalue keeps that coordinate
        let tie = pca_ols_fit(&inst, &y, 0.5).unwrap();
        assert_eq!(tie.kept_mask(), Some(&[true, true][..]));

        let none = pca_ols_fit(&inst, &y, 2.5).unwrap();
        assert_eq!(none.coefficients(), &DVector::zeros(2));
    }

    #[test]
    fn shrinkage_conventions() {
        let s = Spectrum::diagonal(&[2.0, 1.0, 0.0]).unwrap();
        assert_eq!(shrinkage_factors(&s, 0.0).unwrap(), dvector![1.0, 1.0, 0.0]);
        let f = shrinkage_factors(&s, 1.0).unwrap();
        assert_relative_eq!(f[0], 2.0 / 3.0);
        assert_eq!(f[1], 0.5);
        assert_eq!(f[2], 0.0);
        let g = shrinkage_factors(&Spectrum::diagonal(&[2.0, 0.5]).unwrap(), 1.0).unwrap();
        assert_relative_eq!(g[1], 1.0 / 3.0);
    }
}
