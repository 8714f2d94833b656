//! Ridge regression versus PCA-truncated least squares in the fixed-design
//! linear model.
//!
//! The crate computes both estimators, their exact risks
//! `E ||beta_hat - beta||_Sigma^2` split into variance and bias, the ratio
//! of PCA-OLS risk to ridge risk (which never exceeds 4), and Monte Carlo
//! estimates of the same quantities for cross-checking.
//!
//! ```
//! use ridgepca::{inflation_certificate, RotatedProblem};
//!
//! let problem = RotatedProblem::diagonal(&[2.0, 0.5], &[1.0, 1.0], 1.0, 4).unwrap();
//! let cert = inflation_certificate(&problem, 1.0).unwrap();
//! assert!(cert.bound_holds);
//! assert!((cert.overall_ratio - 9.0 / 7.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod estimators;
pub mod model;
pub mod monte_carlo;
pub mod risk;
pub mod scenarios;

pub use error::{Error, Result};
pub use estimators::{
    ols_fit, pca_ols_fit, ridge_fit, shrinkage_factors, Estimate, Method, Observation,
    PreparedDesign,
};
pub use model::{expected_loss, rotate_problem, ProblemInstance, RotatedProblem, SecondMoment, Spectrum};
pub use monte_carlo::{
    empirical_decomposition, empirical_risk, sample_observation, EmpiricalDecomposition,
    EmpiricalRisk, NoiseKind, NoiseModel,
};
pub use risk::{
    decompose_risk, inflation_certificate, lambda_sweep, pca_risk, ridge_risk,
    InflationCertificate, RiskReport, SweepResult, SweepRow,
};
pub use scenarios::{
    build_instance, scenario_grid, Scenario, SignalKind, SignalSpec, SpectrumKind, SpectrumSpec,
};

pub use nalgebra::{DMatrix, DVector};
