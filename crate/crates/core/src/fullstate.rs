//! Independent `N`-dimensional state-vector simulator.
//!
//! Builds the oracle and diffusion directly as generalized Householder
//! reflections `I − (1 − e^{iφ})|u⟩⟨u|` on the full register and applies
//! them as rank-1 updates. Used to cross-check [`crate::grover`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grover::{Kernel, PhaseSchedule, ProblemSpec};

const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Sorted, distinct indices of the marked elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    indices: Vec<usize>,
}

impl SolutionSet {
    pub fn new(mut indices: Vec<usize>, register_size: usize) -> Result<Self> {
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::InvalidArgument(
                "solution indices must be distinct".into(),
            ));
        }
        if indices.is_empty() || indices.len() >= register_size {
            return Err(Error::InvalidArgument(format!(
                "need between 1 and {} solutions, got {}",
                register_size - 1,
                indices.len()
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= register_size) {
            return Err(Error::InvalidArgument(format!(
                "solution index {bad} outside register of size {register_size}"
            )));
        }
        Ok(Self { indices })
    }

    /// The first `m` indices.
    pub fn leading(m: usize, register_size: usize) -> Result<Self> {
        Self::new((0..m).collect(), register_size)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Equal superposition of the solutions, `|β⟩`.
    pub fn superposition(&self, register_size: usize) -> StateVector {
        let amp = Complex64::new(1.0 / (self.indices.len() as f64).sqrt(), 0.0);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); register_size];
        for &i in &self.indices {
            amplitudes[i] = amp;
        }
        StateVector::new(amplitudes)
    }
}

/// `F|0⟩`: every amplitude `1/√n`.
pub fn equal_superposition(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "register size must be at least 2, got {n}"
        )));
    }
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    Ok(StateVector::new(vec![amp; n]))
}

fn householder_in_place(state: &mut [Complex64], axis: &[Complex64], phase: f64) {
    let overlap: Complex64 = axis
        .iter()
        .zip(state.iter())
        .map(|(u, s)| u.conj() * s)
        .sum();
    let coeff = (1.0 - Complex64::cis(phase)) * overlap;
    for (s, u) in state.iter_mut().zip(axis) {
        *s -= coeff * u;
    }
}

fn check_axis(state: &StateVector, axis: &StateVector) -> Result<()> {
    if axis.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            actual: axis.dim(),
        });
    }
    let norm = axis.norm_sqr().sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(())
}

/// `state − (1 − e^{i·phase})·⟨axis|state⟩·axis`
pub fn apply_generalized_householder(
    state: &StateVector,
    axis: &StateVector,
    phase: f64,
) -> Result<StateVector> {
    check_axis(state, axis)?;
    let mut out = state.clone();
    householder_in_place(&mut out.amplitudes, &axis.amplitudes, phase);
    Ok(out)
}

/// Total probability on the solution indices after the scheduled iterations.
///
/// Each iteration applies the oracle reflection about `|β⟩` with `φ_j`, then
/// the diffusion reflection about `|ψ⟩` with `ω_j` (`G⁺`) or `−ω_j` (`G⁻`).
pub fn run_full(
    spec: &ProblemSpec,
    solutions: &SolutionSet,
    schedule: &PhaseSchedule,
    iters: Option<usize>,
) -> Result<f64> {
    let n = spec.register_size();
    if solutions.len() != spec.num_solutions() {
        return Err(Error::DimensionMismatch {
            expected: spec.num_solutions(),
            actual: solutions.len(),
        });
    }
    if let Some(&bad) = solutions.indices().iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "solution index {bad} outside register of size {n}"
        )));
    }
    let psi = equal_superposition(n)?;
    let beta = solutions.superposition(n);
    let k_iter = iters.unwrap_or_else(|| spec.optimal_iterations());
    let mut state = psi.clone();
    for j in 0..k_iter {
        let (phi, omega) = schedule.phases(j, k_iter)?;
        let diffusion = match schedule.kernel {
            Kernel::Plus => omega,
            Kernel::Minus => -omega,
        };
        householder_in_place(&mut state.amplitudes, &beta.amplitudes, phi);
        householder_in_place(&mut state.amplitudes, &psi.amplitudes, diffusion);
    }
    Ok(solutions
        .indices()
        .iter()
        .map(|&i| state.amplitudes[i].norm_sqr())
        .sum())
}
