//! Monte Carlo estimates of estimator risk against a fixed design.
//!
//! Trial `t` draws its noise from a ChaCha stream selected by `(seed, t)`, so
//! results do not depend on how trials are scheduled across threads. Per-trial
//! values are collected in trial order and reduced sequentially.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{Method, Observation, PreparedDesign};
use crate::model::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NoiseKind {
    #[default]
    Gaussian,
    /// `+sigma` or `-sigma` with equal probability.
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub variance: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::Validation(format!(
                "noise variance must be finite and nonnegative, got {variance}"
            )));
        }
        Ok(Self { kind, variance })
    }

    pub fn gaussian(variance: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, variance)
    }

    /// Noise model matching the instance's variance.
    pub fn for_instance(kind: NoiseKind, instance: &ProblemInstance) -> Self {
        Self {
            kind,
            variance: instance.noise_variance(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sd = self.variance.sqrt();
        match self.kind {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            NoiseKind::Rademacher => {
                if rng.random::<bool>() {
                    sd
                } else {
                    -sd
                }
            }
        }
    }
}

/// The random stream used by trial `trial` of a run seeded with `seed`.
pub fn trial_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `y = X beta + eps` with i.i.d. noise per coordinate.
pub fn sample_observation<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Observation> {
    if noise.variance != instance.noise_variance() {
        return Err(Error::Validation(format!(
            "noise model variance {} does not match instance variance {}",
            noise.variance,
            instance.noise_variance()
        )));
    }
    let mut y = instance.mean_response();
    if noise.variance > 0.0 {
        for v in y.iter_mut() {
            *v += noise.draw(rng);
        }
    }
    Ok(Observation::new(y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRisk {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalDecomposition {
    pub variance: f64,
    pub variance_std_error: f64,
    pub bias: f64,
    /// Delta-method standard error of the plug-in bias.
    pub bias_std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Welford running mean and variance. Identical inputs give an exact mean
/// and zero variance.
#[derive(Debug, Default, Clone, Copy)]
struct Running {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Sample standard deviation over `sqrt(count)`.
    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        (var / self.count as f64).sqrt()
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::Validation(format!(
            "at least 2 trials are required, got {trials}"
        )));
    }
    Ok(())
}

/// Fits `method` on every trial and returns the coefficient vectors in trial order.
fn fit_trials(
    design: &PreparedDesign,
    method: Method,
    lambda: f64,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, t as u64);
            let y = sample_observation(design.instance(), noise, &mut rng)?;
            Ok(design.fit(method, &y, lambda)?.into_coefficients())
        })
        .collect()
}

/// Monte Carlo estimate of `E ||beta_hat - beta||_Sigma^2`.
pub fn empirical_risk(
    instance: &ProblemInstance,
    method: Method,
    lambda: f64,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalRisk> {
    let design = PreparedDesign::new(instance.clone())?;
    empirical_risk_prepared(&design, method, lambda, noise, trials, seed)
}

/// [`empirical_risk`] against an already decomposed design.
pub fn empirical_risk_prepared(
    design: &PreparedDesign,
    method: Method,
    lambda: f64,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalRisk> {
    check_trials(trials)?;
    let beta = design.instance().beta();
    let sigma = design.second_moment();
    let losses = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, t as u64);
            let y = sample_observation(design.instance(), noise, &mut rng)?;
            let est = design.fit(method, &y, lambda)?;
            sigma.sigma_norm_sq(&(est.coefficients() - beta))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut acc = Running::default();
    losses.iter().for_each(|&l| acc.push(l));
    Ok(EmpiricalRisk {
        mean: acc.mean.max(0.0),
        std_error: acc.std_error(),
        trials,
        seed,
    })
}

/// Splits the empirical risk into a variance part, `mean ||beta_hat - m||_Sigma^2`,
/// and a bias part, `||m - beta||_Sigma^2`, where `m` is the across-trial
/// mean of the fitted coefficients. With the `1/trials` normalization used
/// here the two parts add up to the empirical risk.
pub fn empirical_decomposition(
    instance: &ProblemInstance,
    method: Method,
    lambda: f64,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalDecomposition> {
    check_trials(trials)?;
    let design = PreparedDesign::new(instance.clone())?;
    let fits = fit_trials(&design, method, lambda, noise, trials, seed)?;
    let sigma = design.second_moment();
    let p = instance.p();

    let mut mean = DVector::zeros(p);
    for (k, fit) in fits.iter().enumerate() {
        let step = 1.0 / (k + 1) as f64;
        mean.zip_apply(fit, |m, x| *m += (x - *m) * step);
    }

    let gap = &mean - instance.beta();
    let bias = sigma.sigma_norm_sq(&gap)?;
    // d bias / d mean = 2 Sigma gap
    let gradient = sigma.matrix() * &gap * 2.0;

    let mut spread = Running::default();
    let mut linear = Running::default();
    for fit in &fits {
        let centered = fit - &mean;
        spread.push(sigma.sigma_norm_sq(&centered)?);
        linear.push(gradient.dot(&centered));
    }
    Ok(EmpiricalDecomposition {
        variance: spread.mean,
        variance_std_error: spread.std_error(),
        bias,
        bias_std_error: linear.std_error(),
        trials,
        seed,
    })
}
