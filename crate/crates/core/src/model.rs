//! Fixed-design linear model `Y = X beta + eps`, its second-moment matrix
//! `Sigma = X^T X / n`, the PCA rotation diagonalizing `Sigma`, and the
//! Sigma-norm loss primitives shared by the estimators and risk formulas.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_len, Error, Result};

/// Entry-pair tolerance when checking `Sigma` for symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOLERANCE * scale` are treated as rounding and clamped to 0.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Eigenvalues at or below `RANK_TOLERANCE * lambda_1` count as zero directions.
pub const RANK_TOLERANCE: f64 = 1e-12;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Ground truth of an experiment: design `X` (n x p), coefficients `beta`
/// and the per-coordinate noise variance `sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    design: DMatrix<f64>,
    beta: DVector<f64>,
    noise_variance: f64,
}

impl ProblemInstance {
    pub fn new(design: DMatrix<f64>, beta: DVector<f64>, noise_variance: f64) -> Result<Self> {
        let (n, p) = design.shape();
        if n == 0 || p == 0 {
            return Err(Error::Validation(format!(
                "design must have at least one row and one column, got {n}x{p}"
            )));
        }
        check_len("beta", p, beta.len())?;
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::Validation(format!(
                "noise variance must be finite and nonnegative, got {noise_variance}"
            )));
        }
        if design.iter().chain(beta.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "design and beta must contain only finite values".into(),
            ));
        }
        Ok(Self {
            design,
            beta,
            noise_variance,
        })
    }

    /// Like [`ProblemInstance::new`], but also checks the matrix against
    /// separately declared sample count and dimension.
    pub fn with_declared_dims(
        n: usize,
        p: usize,
        design: DMatrix<f64>,
        beta: DVector<f64>,
        noise_variance: f64,
    ) -> Result<Self> {
        check_len("design rows", n, design.nrows())?;
        check_len("design columns", p, design.ncols())?;
        Self::new(design, beta, noise_variance)
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }

    /// The noiseless response `X beta`.
    pub fn mean_response(&self) -> DVector<f64> {
        &self.design * &self.beta
    }

    pub fn second_moment(&self) -> SecondMoment {
        let n = self.n() as f64;
        let mut matrix = self.design.tr_mul(&self.design) / n;
        // tr_mul is symmetric up to rounding; mirror the upper triangle so the
        // stored matrix is exactly symmetric.
        matrix.fill_lower_triangle_with_upper_triangle();
        SecondMoment { matrix }
    }

    /// `X^T y / n`, the right-hand side shared by every estimator.
    pub fn cross_moment(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("observation", self.n(), y.len())?;
        Ok(self.design.tr_mul(y) / self.n() as f64)
    }
}

/// `Sigma = X^T X / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondMoment {
    matrix: DMatrix<f64>,
}

impl SecondMoment {
    /// Wraps an explicit matrix after checking it is square and symmetric.
    /// Positive semidefiniteness is enforced by [`SecondMoment::eigendecompose`].
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        check_len("second moment columns", rows, cols)?;
        if rows == 0 {
            return Err(Error::Validation("second moment must be at least 1x1".into()));
        }
        for i in 0..rows {
            for j in (i + 1)..rows {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Validation(format!(
                        "second moment not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `v^T Sigma v`, clamped at zero.
    pub fn sigma_norm_sq(&self, v: &DVector<f64>) -> Result<f64> {
        check_len("sigma_norm_sq vector", self.dim(), v.len())?;
        Ok(v.dot(&(&self.matrix * v)).max(0.0))
    }

    /// Eigendecomposition in PCA order: eigenvalues descending, ties kept in
    /// solver order, each eigenvector signed so its largest-magnitude entry
    /// is positive.
    pub fn eigendecompose(&self) -> Result<Spectrum> {
        let p = self.dim();
        let eigen = SymmetricEigen::try_new(self.matrix.clone(), f64::EPSILON, EIGEN_MAX_ITERATIONS)
            .ok_or_else(|| Error::EigenFailure {
                dim: p,
                frobenius: self.matrix.norm(),
                trace: self.matrix.trace(),
                max_abs: self.matrix.amax(),
            })?;

        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));

        let scale = eigen.eigenvalues.amax();
        let floor = -PSD_TOLERANCE * scale;
        let mut eigenvalues = DVector::zeros(p);
        let mut rotation = DMatrix::zeros(p, p);
        for (dst, &src) in order.iter().enumerate() {
            let value = eigen.eigenvalues[src];
            if value < floor {
                return Err(Error::NotPositiveSemidefinite {
                    eigenvalue: value,
                    tolerance: floor,
                });
            }
            eigenvalues[dst] = value.max(0.0);

            let mut column = eigen.eigenvectors.column(src).into_owned();
            let pivot = column.iamax();
            if column[pivot] < 0.0 {
                column.neg_mut();
            }
            rotation.set_column(dst, &column);
        }
        Ok(Spectrum {
            eigenvalues,
            rotation,
        })
    }
}

/// Eigenvalues of `Sigma` in descending order together with the orthogonal
/// matrix whose columns are the matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    rotation: DMatrix<f64>,
}

impl Spectrum {
    /// A spectrum that is already diagonal in the original coordinates.
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        validate_eigenvalues(eigenvalues)?;
        let p = eigenvalues.len();
        Ok(Self {
            eigenvalues: DVector::from_column_slice(eigenvalues),
            rotation: DMatrix::identity(p, p),
        })
    }

    /// Builds a spectrum from explicit parts. The rotation must be
    /// orthogonal to within `1e-10` per entry.
    pub fn from_parts(eigenvalues: &[f64], rotation: DMatrix<f64>) -> Result<Self> {
        validate_eigenvalues(eigenvalues)?;
        let p = eigenvalues.len();
        check_len("rotation rows", p, rotation.nrows())?;
        check_len("rotation columns", p, rotation.ncols())?;
        let gram = rotation.tr_mul(&rotation);
        let off = (gram - DMatrix::<f64>::identity(p, p)).amax();
        if off > 1e-10 {
            return Err(Error::Validation(format!(
                "rotation is not orthogonal (max deviation {off:e})"
            )));
        }
        Ok(Self {
            eigenvalues: DVector::from_column_slice(eigenvalues),
            rotation,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Threshold below which an eigenvalue is treated as zero.
    pub fn rank_threshold(&self) -> f64 {
        RANK_TOLERANCE * self.largest()
    }

    /// Whether coordinate `j` carries signal (`lambda_j > 1e-12 * lambda_1`).
    pub fn is_active(&self, j: usize) -> bool {
        self.eigenvalues[j] > self.rank_threshold()
    }

    pub fn is_full_rank(&self) -> bool {
        (0..self.dim()).all(|j| self.is_active(j))
    }

    /// `U^T v`: original coordinates to the eigenbasis.
    pub fn to_rotated(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("vector to rotate", self.dim(), v.len())?;
        Ok(self.rotation.tr_mul(v))
    }

    /// `U v`: eigenbasis back to original coordinates.
    pub fn from_rotated(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("rotated vector", self.dim(), v.len())?;
        Ok(&self.rotation * v)
    }

    /// `U diag(lambda) U^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.rotation * DMatrix::from_diagonal(&self.eigenvalues);
        scaled * self.rotation.transpose()
    }

    /// `sum_j lambda_j v_j^2` for a vector already in the eigenbasis.
    pub fn rotated_norm_sq(&self, v_rotated: &DVector<f64>) -> Result<f64> {
        check_len("rotated vector", self.dim(), v_rotated.len())?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(v_rotated.iter())
            .map(|(l, v)| l * v * v)
            .sum())
    }
}

fn validate_eigenvalues(eigenvalues: &[f64]) -> Result<()> {
    if eigenvalues.is_empty() {
        return Err(Error::Validation("spectrum must be nonempty".into()));
    }
    if eigenvalues.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::Validation(
            "eigenvalues must be finite and nonnegative".into(),
        ));
    }
    if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Validation("eigenvalues must be sorted descending".into()));
    }
    Ok(())
}

/// The model expressed in the PCA coordinate system, where `Sigma` is diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedProblem {
    spectrum: Spectrum,
    beta_rotated: DVector<f64>,
    noise_variance: f64,
    n: usize,
}

impl RotatedProblem {
    pub fn new(
        spectrum: Spectrum,
        beta_rotated: DVector<f64>,
        noise_variance: f64,
        n: usize,
    ) -> Result<Self> {
        check_len("rotated beta", spectrum.dim(), beta_rotated.len())?;
        if n == 0 {
            return Err(Error::Validation("sample count must be positive".into()));
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::Validation(format!(
                "noise variance must be finite and nonnegative, got {noise_variance}"
            )));
        }
        if beta_rotated.iter().any(|b| !b.is_finite()) {
            return Err(Error::Validation("beta must be finite".into()));
        }
        Ok(Self {
            spectrum,
            beta_rotated,
            noise_variance,
            n,
        })
    }

    /// Diagonal fixture: `Sigma = diag(eigenvalues)` with `beta` given in
    /// the same coordinates.
    pub fn diagonal(eigenvalues: &[f64], beta: &[f64], noise_variance: f64, n: usize) -> Result<Self> {
        Self::new(
            Spectrum::diagonal(eigenvalues)?,
            DVector::from_column_slice(beta),
            noise_variance,
            n,
        )
    }

    /// Second moment, eigendecomposition and rotation in one step.
    pub fn from_instance(instance: &ProblemInstance) -> Result<Self> {
        let spectrum = instance.second_moment().eigendecompose()?;
        rotate_problem(instance, spectrum)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        self.spectrum.eigenvalues()
    }

    pub fn beta_rotated(&self) -> &DVector<f64> {
        &self.beta_rotated
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.spectrum.dim()
    }

    /// `sigma^2 / n`, the variance contributed by one fully estimated coordinate.
    pub fn noise_per_sample(&self) -> f64 {
        self.noise_variance / self.n as f64
    }

    /// `||beta||_Sigma^2 = sum_j lambda_j beta_j^2`.
    pub fn signal_norm_sq(&self) -> f64 {
        self.spectrum
            .rotated_norm_sq(&self.beta_rotated)
            .expect("beta_rotated length checked at construction")
    }
}

/// Expresses `beta` in the eigenbasis of `spectrum`.
pub fn rotate_problem(instance: &ProblemInstance, spectrum: Spectrum) -> Result<RotatedProblem> {
    check_len("spectrum", instance.p(), spectrum.dim())?;
    let beta_rotated = spectrum.to_rotated(instance.beta())?;
    RotatedProblem::new(spectrum, beta_rotated, instance.noise_variance(), instance.n())
}

/// `L(w) = E ||Y - X w||^2 / n = sigma^2 + ||w - beta||_Sigma^2`, evaluated analytically.
pub fn expected_loss(w: &DVector<f64>, instance: &ProblemInstance) -> Result<f64> {
    check_len("expected_loss vector", instance.p(), w.len())?;
    let excess = instance.second_moment().sigma_norm_sq(&(w - instance.beta()))?;
    Ok(instance.noise_variance() + excess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn identity_design_scaled_by_n() {
        let x = DMatrix::identity(2, 2);
        let inst = ProblemInstance::new(x, dvector![1.0, 2.0], 1.0).unwrap();
        assert_eq!(inst.second_moment().matrix(), &dmatrix![0.5, 0.0; 0.0, 0.5]);
    }

    #[test]
    fn orthonormal_columns() {
        let x = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
        let inst = ProblemInstance::new(x, dvector![0.0, 0.0], 0.0).unwrap();
        let s = inst.second_moment();
        assert_relative_eq!(s.matrix()[(0, 0)], 1.0 / 3.0);
        assert_relative_eq!(s.matrix()[(1, 1)], 1.0 / 3.0);
        assert_eq!(s.matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let x = DMatrix::<f64>::zeros(3, 2);
        assert!(matches!(
            ProblemInstance::new(x.clone(), dvector![1.0], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ProblemInstance::with_declared_dims(4, 2, x.clone(), dvector![1.0, 1.0], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ProblemInstance::new(x.clone(), dvector![1.0, 1.0], -1.0).is_err());
        assert!(ProblemInstance::new(DMatrix::zeros(0, 2), dvector![1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn diagonal_is_already_decomposed() {
        let s = SecondMoment::from_matrix(dmatrix![2.0, 0.0; 0.0, 0.5]).unwrap();
        let spec = s.eigendecompose().unwrap();
        assert_relative_eq!(spec.eigenvalues()[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(spec.eigenvalues()[1], 0.5, epsilon = 1e-14);
        assert_relative_eq!(spec.rotation().clone(), DMatrix::identity(2, 2), epsilon = 1e-14);
    }

    #[test]
    fn rank_one() {
        let s = SecondMoment::from_matrix(dmatrix![0.5, 0.5; 0.5, 0.5]).unwrap();
        let spec = s.eigendecompose().unwrap();
        assert_relative_eq!(spec.eigenvalues()[0], 1.0, epsilon = 1e-14);
        assert!(spec.eigenvalues()[1] >= 0.0);
        assert!(spec.eigenvalues()[1] < 1e-15);
        assert!(!spec.is_full_rank());
        // signs normalized: largest-magnitude entry positive
        for c in spec.rotation().column_iter() {
            assert!(c[c.iamax()] > 0.0);
        }
    }

    #[test]
    fn zero_matrix_decomposes() {
        let s = SecondMoment::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        let spec = s.eigendecompose().unwrap();
        assert!(spec.eigenvalues().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let s = SecondMoment::from_matrix(dmatrix![1.0, 0.0; 0.0, -0.5]).unwrap();
        assert!(matches!(
            s.eigendecompose(),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        assert!(SecondMoment::from_matrix(dmatrix![1.0, 0.1; 0.0, 1.0]).is_err());
        assert!(SecondMoment::from_matrix(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn sigma_norm_diagonal() {
        let s = SecondMoment::from_matrix(dmatrix![2.0, 0.0; 0.0, 0.5]).unwrap();
        assert_eq!(s.sigma_norm_sq(&dvector![0.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(s.sigma_norm_sq(&dvector![1.0, 1.0]).unwrap(), 2.5);
        assert!(s.sigma_norm_sq(&dvector![1.0]).is_err());
    }

    #[test]
    fn planar_rotation_preserves_norm() {
        // Sigma with eigenvectors rotated 90 degrees from the axes.
        let s = SecondMoment::from_matrix(dmatrix![0.5, 0.0; 0.0, 2.0]).unwrap();
        let spec = s.eigendecompose().unwrap();
        let x = dmatrix![1.0, 0.0; 0.0, 2.0];
        let inst = ProblemInstance::new(x, dvector![1.0, 0.0], 1.0).unwrap();
        assert_eq!(inst.second_moment().matrix(), s.matrix());
        let rotated = rotate_problem(&inst, spec).unwrap();
        assert_eq!(rotated.beta_rotated()[0].abs(), 0.0);
        assert_relative_eq!(rotated.beta_rotated()[1].abs(), 1.0);
        assert_relative_eq!(
            rotated.signal_norm_sq(),
            s.sigma_norm_sq(inst.beta()).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn expected_loss_at_truth_is_noise() {
        let x = dmatrix![1.0, 2.0; 3.0, 4.0; 5.0, 7.0];
        let inst = ProblemInstance::new(x, dvector![1.0, -1.0], 0.7).unwrap();
        assert_eq!(expected_loss(inst.beta(), &inst).unwrap(), 0.7);
        let w = dvector![1.0, -1.0] + dvector![1.0, 0.0];
        let sigma11 = inst.second_moment().matrix()[(0, 0)];
        assert_relative_eq!(expected_loss(&w, &inst).unwrap(), 0.7 + sigma11, max_relative = 1e-14);
    }

    #[test]
    fn spectrum_constructors_validate() {
        assert!(Spectrum::diagonal(&[]).is_err());
        assert!(Spectrum::diagonal(&[1.0, 2.0]).is_err());
        assert!(Spectrum::diagonal(&[1.0, -0.1]).is_err());
        assert!(Spectrum::from_parts(&[1.0, 0.5], dmatrix![1.0, 1.0; 0.0, 1.0]).is_err());
        assert!(RotatedProblem::diagonal(&[1.0], &[1.0, 2.0], 1.0, 1).is_err());
        assert!(RotatedProblem::diagonal(&[1.0], &[1.0], 1.0, 0).is_err());
    }
}
