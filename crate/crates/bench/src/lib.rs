//! Deterministic inputs shared by the benchmarks.

use ridgepca::{
    build_instance, DVector, Observation, ProblemInstance, SignalKind, SignalSpec, SpectrumKind,
    SpectrumSpec,
};

/// Polynomially decaying spectrum with a top-aligned signal, `n = 4p`.
pub fn instance(p: usize) -> ProblemInstance {
    let spectrum = SpectrumSpec::new(SpectrumKind::PolyDecay { exponent: 1.0 }, p, 1.0);
    let signal = SignalSpec::new(SignalKind::TopAligned(p.div_ceil(4)), 1.0);
    build_instance(&spectrum, &signal, 4 * p, 1.0, 42).expect("valid bench fixture")
}

/// Noise-free response `X beta`; benchmark cost does not depend on the noise.
pub fn response(instance: &ProblemInstance) -> Observation {
    let y: DVector<f64> = instance.design() * instance.beta();
    y.into()
}

pub fn log_grid(count: usize) -> Vec<f64> {
    ridgepca::risk::log_spaced(1e-4, 10.0, count).expect("valid grid")
}
