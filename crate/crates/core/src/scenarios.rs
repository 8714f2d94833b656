//! Seeded synthesis of problem instances with a prescribed spectrum.
//!
//! The design is `X = sqrt(n) * U * diag(sqrt(lambda))` where `U` has
//! orthonormal columns, so `X^T X / n = diag(lambda)` and the signal
//! coordinates coincide with the PCA coordinates.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind {
    Flat,
    /// `lambda_j = scale * j^(-exponent)`, `j = 1..=p`.
    PolyDecay { exponent: f64 },
    /// `lambda_j = scale * exp(-rate * (j - 1))`.
    ExpDecay { rate: f64 },
    /// `spike_count` eigenvalues at `scale * spike_value`, the rest at `scale * bulk_value`.
    Spiked {
        spike_count: usize,
        spike_value: f64,
        bulk_value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub p: usize,
    pub scale: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be positive, got {v}")))
    }
}

impl SpectrumSpec {
    pub fn new(kind: SpectrumKind, p: usize, scale: f64) -> Self {
        Self { kind, p, scale }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Validation("spectrum dimension must be positive".into()));
        }
        positive("spectrum scale", self.scale)?;
        match self.kind {
            SpectrumKind::Flat => {}
            SpectrumKind::PolyDecay { exponent } => positive("decay exponent", exponent)?,
            SpectrumKind::ExpDecay { rate } => positive("decay rate", rate)?,
            SpectrumKind::Spiked {
                spike_count,
                spike_value,
                bulk_value,
            } => {
                positive("spike value", spike_value)?;
                positive("bulk value", bulk_value)?;
                if spike_count == 0 || spike_count > self.p {
                    return Err(Error::Validation(format!(
                        "spike count must be in 1..={}, got {spike_count}",
                        self.p
                    )));
                }
                if spike_value < bulk_value {
                    return Err(Error::Validation(
                        "spike value must be at least the bulk value".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let values: Vec<f64> = (0..self.p)
            .map(|j| {
                let unit = match self.kind {
                    SpectrumKind::Flat => 1.0,
                    SpectrumKind::PolyDecay { exponent } => ((j + 1) as f64).powf(-exponent),
                    SpectrumKind::ExpDecay { rate } => (-rate * j as f64).exp(),
                    SpectrumKind::Spiked {
                        spike_count,
                        spike_value,
                        bulk_value,
                    } => {
                        if j < spike_count {
                            spike_value
                        } else {
                            bulk_value
                        }
                    }
                };
                self.scale * unit
            })
            .collect();
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Validation(
                "spectrum underflows to zero; use a smaller decay or dimension".into(),
            ));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// Equal weight on the `k` leading eigen-coordinates.
    TopAligned(usize),
    /// Equal weight on the `k` trailing eigen-coordinates.
    BottomAligned(usize),
    Uniform,
    /// Gaussian direction drawn from its own seed.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    /// Target Euclidean norm of beta.
    pub norm: f64,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, norm: f64) -> Self {
        Self { kind, norm }
    }

    /// Signal vector of length `p`, in eigen-coordinates.
    pub fn beta(&self, p: usize) -> Result<DVector<f64>> {
        positive("signal norm", self.norm)?;
        let check_k = |k: usize| {
            if k == 0 || k > p {
                Err(Error::Validation(format!(
                    "aligned signal needs 1 <= k <= {p}, got {k}"
                )))
            } else {
                Ok(k)
            }
        };
        let direction = match self.kind {
            SignalKind::TopAligned(k) => {
                let k = check_k(k)?;
                DVector::from_fn(p, |j, _| if j < k { 1.0 } else { 0.0 })
            }
            SignalKind::BottomAligned(k) => {
                let k = check_k(k)?;
                DVector::from_fn(p, |j, _| if j >= p - k { 1.0 } else { 0.0 })
            }
            SignalKind::Uniform => DVector::from_element(p, 1.0),
            SignalKind::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                loop {
                    let v = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
                    if v.norm() > 1e-8 {
                        break v;
                    }
                }
            }
        };
        Ok(direction.normalize() * self.norm)
    }
}

/// Builds `X = sqrt(n) U diag(sqrt(lambda))` from a seeded Gaussian matrix
/// orthogonalized by QR.
pub fn build_instance(
    spectrum: &SpectrumSpec,
    signal: &SignalSpec,
    n: usize,
    noise_variance: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    let eigenvalues = spectrum.eigenvalues()?;
    let p = spectrum.p;
    if n < p {
        return Err(Error::Validation(format!(
            "synthesis requires n >= p (got n = {n}, p = {p})"
        )));
    }
    let beta = signal.beta(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = gaussian.qr().q();
    let root_n = (n as f64).sqrt();
    let mut design = q;
    for (j, mut col) in design.column_iter_mut().enumerate() {
        col *= root_n * eigenvalues[j].sqrt();
    }
    ProblemInstance::new(design, beta, noise_variance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spectrum: SpectrumSpec,
    pub signal: SignalSpec,
    pub instance: ProblemInstance,
    pub lambdas: Vec<f64>,
}

/// Grid of lambdas around a spectrum: zero, every eigenvalue exactly, the
/// midpoints between distinct neighbours, and points below and above the
/// whole spectrum.
pub fn straddling_grid(eigenvalues: &[f64]) -> Vec<f64> {
    let mut grid = vec![0.0];
    let smallest = eigenvalues[eigenvalues.len() - 1];
    let largest = eigenvalues[0];
    grid.push(smallest * 0.5);
    grid.push(largest * 2.0);
    grid.push(largest * 1e3);
    grid.extend_from_slice(eigenvalues);
    for w in eigenvalues.windows(2) {
        if w[0] > w[1] {
            grid.push(0.5 * (w[0] + w[1]));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Deterministic battery: every spectrum kind x signal kind x
/// `p in {1, 2, 5, 20}`, each with a [`straddling_grid`].
pub fn scenario_grid(seed: u64) -> Result<Vec<Scenario>> {
    let spectra = [
        SpectrumKind::Flat,
        SpectrumKind::PolyDecay { exponent: 1.0 },
        SpectrumKind::ExpDecay { rate: 0.5 },
        SpectrumKind::Spiked {
            spike_count: 2,
            spike_value: 10.0,
            bulk_value: 0.5,
        },
    ];
    let dims = [1usize, 2, 5, 20];
    let mut out = Vec::new();
    let mut index = 0u64;
    for (si, kind) in spectra.iter().enumerate() {
        for &p in &dims {
            let kind = match *kind {
                SpectrumKind::Spiked {
                    spike_count,
                    spike_value,
                    bulk_value,
                } => SpectrumKind::Spiked {
                    spike_count: spike_count.min(p),
                    spike_value,
                    bulk_value,
                },
                other => other,
            };
            let spectrum = SpectrumSpec::new(kind, p, 1.0 + si as f64);
            let k = (p / 2).max(1);
            let signals = [
                SignalKind::TopAligned(k),
                SignalKind::BottomAligned(k),
                SignalKind::Uniform,
                SignalKind::Random(seed.wrapping_add(1000 + index)),
            ];
            for (gi, signal_kind) in signals.into_iter().enumerate() {
                let signal = SignalSpec::new(signal_kind, 1.0 + gi as f64);
                let n = 2 * p + 3;
                let noise = 0.25 * (1 + (index % 4)) as f64;
                let instance = build_instance(
                    &spectrum,
                    &signal,
                    n,
                    noise,
                    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index),
                )?;
                let lambdas = straddling_grid(&spectrum.eigenvalues()?);
                out.push(Scenario {
                    name: format!("{kind:?}/p={p}/{signal_kind:?}"),
                    spectrum,
                    signal,
                    instance,
                    lambdas,
                });
                index += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_square_is_identity() {
        let spec = SpectrumSpec::new(SpectrumKind::Flat, 3, 1.0);
        let inst = build_instance(&spec, &SignalSpec::new(SignalKind::Uniform, 1.0), 3, 1.0, 9).unwrap();
        let sigma = inst.second_moment();
        assert_relative_eq!(sigma.matrix().clone(), DMatrix::identity(3, 3), epsilon = 1e-8);
    }

    #[test]
    fn poly_decay_values() {
        let spec = SpectrumSpec::new(SpectrumKind::PolyDecay { exponent: 1.0 }, 4, 1.0);
        let e = spec.eigenvalues().unwrap();
        for (got, want) in e.iter().zip([1.0, 0.5, 1.0 / 3.0, 0.25]) {
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_wide_design() {
        let spec = SpectrumSpec::new(SpectrumKind::Flat, 4, 1.0);
        let sig = SignalSpec::new(SignalKind::Uniform, 1.0);
        assert!(build_instance(&spec, &sig, 3, 1.0, 0).is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SpectrumSpec::new(SpectrumKind::Flat, 0, 1.0).eigenvalues().is_err());
        assert!(SpectrumSpec::new(SpectrumKind::Flat, 2, 0.0).eigenvalues().is_err());
        let inverted = SpectrumKind::Spiked {
            spike_count: 1,
            spike_value: 1.0,
            bulk_value: 2.0,
        };
        assert!(SpectrumSpec::new(inverted, 3, 1.0).eigenvalues().is_err());
        assert!(SignalSpec::new(SignalKind::TopAligned(0), 1.0).beta(3).is_err());
        assert!(SignalSpec::new(SignalKind::BottomAligned(4), 1.0).beta(3).is_err());
        assert!(SignalSpec::new(SignalKind::Uniform, -1.0).beta(3).is_err());
    }

    #[test]
    fn aligned_signals() {
        let top = SignalSpec::new(SignalKind::TopAligned(2), 3.0).beta(5).unwrap();
        assert_eq!(top.iter().filter(|b| **b != 0.0).count(), 2);
        assert!(top[0] != 0.0 && top[1] != 0.0);
        assert_relative_eq!(top.norm(), 3.0, epsilon = 1e-10);
        let bottom = SignalSpec::new(SignalKind::BottomAligned(1), 2.0).beta(5).unwrap();
        assert_eq!(bottom[4], 2.0);
        assert_eq!(bottom.rows(0, 4).amax(), 0.0);
    }

    #[test]
    fn grid_is_deterministic_and_has_ties() {
        let a = scenario_grid(3).unwrap();
        let b = scenario_grid(3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        let pairs: usize = a.iter().map(|s| s.lambdas.len()).sum();
        assert!(pairs >= 200, "only {pairs} pairs");
        for s in &a {
            let eig = s.spectrum.eigenvalues().unwrap();
            assert!(s.lambdas.contains(&0.0));
            assert!(eig.iter().all(|e| s.lambdas.contains(e)));
            assert!(s.lambdas.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
