//! Grover dynamics restricted to the plane spanned by |α⟩ (non-solutions)
//! and |β⟩ (solutions).
//!
//! Every operator used here, the phase oracle `I − (1 − e^{iφ})|β⟩⟨β|` and
//! the diffusion `I − (1 − e^{iω})|ψ⟩⟨ψ|`, maps that plane onto itself, so
//! two complex amplitudes describe the register exactly for any `N` and `M`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Register size `N` and number of marked elements `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSpec {
    register_size: usize,
    num_solutions: usize,
}

impl ProblemSpec {
    /// Requires `N ≥ 2`, `1 ≤ M < N` and `M/N ≤ 1/2`.
    pub fn new(register_size: usize, num_solutions: usize) -> Result<Self> {
        if register_size < 2 {
            return Err(Error::InvalidProblem(format!(
                "register size must be at least 2, got {register_size}"
            )));
        }
        if num_solutions == 0 || num_solutions >= register_size {
            return Err(Error::InvalidProblem(format!(
                "number of solutions must satisfy 1 <= M < N, got M={num_solutions}, N={register_size}"
            )));
        }
        if 2 * num_solutions > register_size {
            return Err(Error::InvalidProblem(format!(
                "M/N must not exceed 1/2, got M={num_solutions}, N={register_size}"
            )));
        }
        Ok(Self {
            register_size,
            num_solutions,
        })
    }

    pub fn register_size(&self) -> usize {
        self.register_size
    }

    pub fn num_solutions(&self) -> usize {
        self.num_solutions
    }

    /// Rotation angle of one standard Grover iteration, `2·arcsin(√(M/N))`.
    pub fn theta(&self) -> f64 {
        2.0 * (self.num_solutions as f64 / self.register_size as f64)
            .sqrt()
            .asin()
    }

    /// Number of iterations used when a run does not specify one:
    /// `⌊(π/4)·√(N/M)⌋`, at least 1.
    pub fn optimal_iterations(&self) -> usize {
        let ratio = self.register_size as f64 / self.num_solutions as f64;
        ((FRAC_PI_4 * ratio.sqrt()).floor() as usize).max(1)
    }

    /// Equal superposition expressed in the (|α⟩, |β⟩) basis.
    pub fn initial_state(&self) -> ReducedState {
        let half = 0.5 * self.theta();
        ReducedState::new(
            Complex64::new(half.cos(), 0.0),
            Complex64::new(half.sin(), 0.0),
        )
    }
}

pub fn theta(spec: &ProblemSpec) -> f64 {
    spec.theta()
}

pub fn optimal_iterations(spec: &ProblemSpec) -> usize {
    spec.optimal_iterations()
}

pub fn initial_reduced_state(spec: &ProblemSpec) -> ReducedState {
    spec.initial_state()
}

/// Amplitudes on |α⟩ and |β⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub amp_alpha: Complex64,
    pub amp_beta: Complex64,
}

impl ReducedState {
    pub fn new(amp_alpha: Complex64, amp_beta: Complex64) -> Self {
        Self {
            amp_alpha,
            amp_beta,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_alpha.norm_sqr() + self.amp_beta.norm_sqr()
    }

    /// Probability of measuring any one of the `M` solutions.
    pub fn success_probability(&self) -> f64 {
        self.amp_beta.norm_sqr()
    }
}

/// Sign convention of the diffusion phase inside one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `G⁺ = P(ω)·O(φ)`.
    Plus,
    /// `G⁻ = P(−ω)·O(φ)`, the global phase `e^{iω}` of `P′` dropped.
    Minus,
}

/// One iteration `P(±ω)·O(φ)` applied to a reduced state.
///
/// With `E = (e^{±iω} − 1)/2` the iteration matrix has columns
/// `G|α⟩ = (1 + E(1+cosθ), E·sinθ)` and `G|β⟩ = e^{iφ}(E·sinθ, 1 + E(1−cosθ))`.
pub fn apply_iteration(
    state: ReducedState,
    theta: f64,
    phi: f64,
    omega: f64,
    kernel: Kernel,
) -> ReducedState {
    let signed_omega = match kernel {
        Kernel::Plus => omega,
        Kernel::Minus => -omega,
    };
    let e = 0.5 * (Complex64::cis(signed_omega) - 1.0);
    let (sin_t, cos_t) = theta.sin_cos();
    let beta = Complex64::cis(phi) * state.amp_beta;
    let alpha = state.amp_alpha;
    ReducedState {
        amp_alpha: (1.0 + e * (1.0 + cos_t)) * alpha + e * sin_t * beta,
        amp_beta: e * sin_t * alpha + (1.0 + e * (1.0 - cos_t)) * beta,
    }
}

/// Negation modulo 2π, mapped back into `[0, 2π)` for inputs in `[0, 2π]`.
pub fn negate_phase(x: f64) -> f64 {
    let y = TAU - x;
    if y >= TAU {
        y - TAU
    } else {
        y
    }
}

/// Per-iteration sign applied to one of the base phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignRule {
    /// Always `+1`.
    Fixed,
    /// Always `−1`.
    Negated,
    /// `(−1)^j`, or `(−1)^{j+1}` when shifted.
    Alternating { shifted: bool },
    /// `(−1)^{⌊j/j_max⌋}` with `j_max = ⌈k_iter/2⌉`, or the same exponent plus one when shifted.
    Halves { shifted: bool },
}

impl SignRule {
    /// Whether iteration `j` (zero-based) of `k_iter` uses the negated phase.
    pub fn negates(self, j: usize, k_iter: usize) -> bool {
        match self {
            SignRule::Fixed => false,
            SignRule::Negated => true,
            SignRule::Alternating { shifted } => (j % 2 == 1) != shifted,
            SignRule::Halves { shifted } => {
                let half = k_iter.div_ceil(2).max(1);
                ((j / half) % 2 == 1) != shifted
            }
        }
    }

    fn apply(self, phase: f64, j: usize, k_iter: usize) -> f64 {
        if self.negates(j, k_iter) {
            negate_phase(phase)
        } else {
            phase
        }
    }
}

/// Sign rules for the oracle phase `φ` and diffusion phase `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern {
    pub phi: SignRule,
    pub omega: SignRule,
}

impl SignPattern {
    pub const CONSTANT: SignPattern = SignPattern {
        phi: SignRule::Fixed,
        omega: SignRule::Fixed,
    };
    /// `{φ, (−1)^j ω}`
    pub const ACSP: SignPattern = SignPattern {
        phi: SignRule::Fixed,
        omega: SignRule::Alternating { shifted: false },
    };
    /// `{(−1)^{j+1} φ, (−1)^j ω}`
    pub const ACBP: SignPattern = SignPattern {
        phi: SignRule::Alternating { shifted: true },
        omega: SignRule::Alternating { shifted: false },
    };
    /// `{(−1)^{⌊j/j_max⌋} φ, (−1)^{⌊j/j_max⌋} ω}`
    pub const HIDP: SignPattern = SignPattern {
        phi: SignRule::Halves { shifted: false },
        omega: SignRule::Halves { shifted: false },
    };

    pub const fn new(phi: SignRule, omega: SignRule) -> Self {
        Self { phi, omega }
    }

    pub fn phases(&self, phi: f64, omega: f64, j: usize, k_iter: usize) -> (f64, f64) {
        (
            self.phi.apply(phi, j, k_iter),
            self.omega.apply(omega, j, k_iter),
        )
    }
}

/// The schedule families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// Phase matching with `G⁺`.
    Oph,
    /// Second phase matching, `G⁻`.
    Spm,
    /// Alternate changing of the second phase.
    Acsp,
    /// Alternate changing of both phases.
    Acbp,
    /// Each half of the iterations with opposite signs.
    Hidp,
    Custom,
}

impl ScheduleKind {
    pub const NAMED: [ScheduleKind; 5] = [
        ScheduleKind::Oph,
        ScheduleKind::Spm,
        ScheduleKind::Acsp,
        ScheduleKind::Acbp,
        ScheduleKind::Hidp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Oph => "oph",
            ScheduleKind::Spm => "spm",
            ScheduleKind::Acsp => "acsp",
            ScheduleKind::Acbp => "acbp",
            ScheduleKind::Hidp => "hidp",
            ScheduleKind::Custom => "custom",
        }
    }

    /// Default kernel. The multiphase families are built from `P′(ω_j)·O(φ_j)`.
    pub fn default_kernel(self) -> Kernel {
        match self {
            ScheduleKind::Oph => Kernel::Plus,
            _ => Kernel::Minus,
        }
    }

    fn pattern(self) -> Option<SignPattern> {
        match self {
            ScheduleKind::Oph | ScheduleKind::Spm => Some(SignPattern::CONSTANT),
            ScheduleKind::Acsp => Some(SignPattern::ACSP),
            ScheduleKind::Acbp => Some(SignPattern::ACBP),
            ScheduleKind::Hidp => Some(SignPattern::HIDP),
            ScheduleKind::Custom => None,
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oph" => Ok(ScheduleKind::Oph),
            "spm" => Ok(ScheduleKind::Spm),
            "acsp" => Ok(ScheduleKind::Acsp),
            "acbp" => Ok(ScheduleKind::Acbp),
            "hidp" => Ok(ScheduleKind::Hidp),
            "custom" => Ok(ScheduleKind::Custom),
            other => Err(Error::InvalidArgument(format!(
                "unknown schedule {other:?}"
            ))),
        }
    }
}

/// Phases of a CUSTOM schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum CustomPhases {
    /// Explicit `(φ_j, ω_j)` per iteration; the base phases are ignored.
    Pairs(Vec<(f64, f64)>),
    /// A sign pattern applied to the base phases.
    Signs(SignPattern),
}

/// A schedule family together with its base phases `(φ, ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    pub kind: ScheduleKind,
    pub phi: f64,
    pub omega: f64,
    pub kernel: Kernel,
    pub custom: Option<CustomPhases>,
}

impl PhaseSchedule {
    pub fn new(kind: ScheduleKind, phi: f64, omega: f64) -> Self {
        Self {
            kind,
            phi,
            omega,
            kernel: kind.default_kernel(),
            custom: None,
        }
    }

    pub fn custom_pairs(pairs: Vec<(f64, f64)>) -> Self {
        Self {
            custom: Some(CustomPhases::Pairs(pairs)),
            ..Self::new(ScheduleKind::Custom, 0.0, 0.0)
        }
    }

    pub fn custom_signs(pattern: SignPattern, phi: f64, omega: f64) -> Self {
        Self {
            custom: Some(CustomPhases::Signs(pattern)),
            ..Self::new(ScheduleKind::Custom, phi, omega)
        }
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    /// Same schedule with different base phases.
    pub fn at(&self, phi: f64, omega: f64) -> Self {
        Self {
            phi,
            omega,
            ..self.clone()
        }
    }

    /// `(φ_j, ω_j)` for zero-based iteration `j` out of `k_iter`.
    pub fn phases(&self, j: usize, k_iter: usize) -> Result<(f64, f64)> {
        if j >= k_iter {
            return Err(Error::IterationOutOfRange {
                index: j,
                iterations: k_iter,
            });
        }
        if let Some(pattern) = self.kind.pattern() {
            return Ok(pattern.phases(self.phi, self.omega, j, k_iter));
        }
        match &self.custom {
            Some(CustomPhases::Signs(pattern)) => {
                Ok(pattern.phases(self.phi, self.omega, j, k_iter))
            }
            Some(CustomPhases::Pairs(pairs)) => {
                if pairs.len() != k_iter {
                    return Err(Error::MissingCustomPairs {
                        available: pairs.len(),
                        required: k_iter,
                    });
                }
                Ok(pairs[j])
            }
            None => Err(Error::MissingCustomPairs {
                available: 0,
                required: k_iter,
            }),
        }
    }

    /// Whether the schedule can be re-evaluated at arbitrary base phases.
    pub fn is_sweepable(&self) -> bool {
        self.kind.pattern().is_some() || matches!(self.custom, Some(CustomPhases::Signs(_)))
    }
}

pub fn schedule_phases(schedule: &PhaseSchedule, j: usize, k_iter: usize) -> Result<(f64, f64)> {
    schedule.phases(j, k_iter)
}

/// Signature of [`apply_iteration`]; lets checks run against a substitute step.
pub type IterationStep = fn(ReducedState, f64, f64, f64, Kernel) -> ReducedState;

/// Final reduced state after the scheduled iterations.
pub fn evolve(
    spec: &ProblemSpec,
    schedule: &PhaseSchedule,
    iters: Option<usize>,
) -> Result<ReducedState> {
    evolve_with(spec, schedule, iters, apply_iteration)
}

pub fn evolve_with(
    spec: &ProblemSpec,
    schedule: &PhaseSchedule,
    iters: Option<usize>,
    step: IterationStep,
) -> Result<ReducedState> {
    let k_iter = iters.unwrap_or_else(|| spec.optimal_iterations());
    let theta = spec.theta();
    let mut state = spec.initial_state();
    for j in 0..k_iter {
        let (phi, omega) = schedule.phases(j, k_iter)?;
        state = step(state, theta, phi, omega, schedule.kernel);
    }
    Ok(state)
}

/// Success probability after the scheduled iterations (default: the optimal count).
pub fn run(spec: &ProblemSpec, schedule: &PhaseSchedule, iters: Option<usize>) -> Result<f64> {
    Ok(evolve(spec, schedule, iters)?.success_probability())
}

/// Which route produced a phase-matching angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMatchBranch {
    Formula,
    NumericFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatch {
    /// Common oracle/diffusion phase for OPH.
    pub phi: f64,
    /// Diffusion phase for SPM, `2π − φ`.
    pub omega_spm: f64,
    /// `J` of the closed form; the run uses `J + 1` iterations.
    pub j: usize,
    pub iterations: usize,
    /// OPH success probability at `(φ, φ)` after `iterations`.
    pub probability: f64,
    pub branch: PhaseMatchBranch,
}

const PHASE_MATCH_THRESHOLD: f64 = 0.999;

/// Phase that makes OPH (and SPM with `ω = 2π − φ`) succeed with certainty.
///
/// `J` is the smallest integer with `(2J + 3)·θ/2 ≥ π/2`; the closed form
/// `2·arcsin(sin(π/(4J+6))·√(N/M))` is then checked by simulation, and a
/// grid search over `φ = ω` replaces it if the check fails.
pub fn phase_matching_angle(spec: &ProblemSpec) -> Result<PhaseMatch> {
    let theta = spec.theta();
    let ratio = spec.register_size() as f64 / spec.num_solutions() as f64;
    let needed = (FRAC_PI_2 - 0.5 * theta) / theta;
    let mut j = ((needed - 1e-9).ceil() as i64 - 1).max(0) as usize;
    let mut arg = (PI / (4.0 * j as f64 + 6.0)).sin() * ratio.sqrt();
    while arg > 1.0 + 1e-12 {
        j += 1;
        arg = (PI / (4.0 * j as f64 + 6.0)).sin() * ratio.sqrt();
    }
    let iterations = j + 1;
    let phi = 2.0 * arg.min(1.0).asin();
    let oph = |x: f64| {
        run(
            spec,
            &PhaseSchedule::new(ScheduleKind::Oph, x, x),
            Some(iterations),
        )
    };
    let probability = oph(phi)?;
    if probability >= PHASE_MATCH_THRESHOLD {
        return Ok(PhaseMatch {
            phi,
            omega_spm: negate_phase(phi),
            j,
            iterations,
            probability,
            branch: PhaseMatchBranch::Formula,
        });
    }

    // Grid search over φ = ω, then golden-section refinement around the best node.
    const GRID: usize = 2000;
    let step = TAU / GRID as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=GRID {
        let x = i as f64 * step;
        let p = oph(x)?;
        if p > best.1 {
            best = (x, p);
        }
    }
    let (mut lo, mut hi) = ((best.0 - step).max(0.0), (best.0 + step).min(TAU));
    let ratio_g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let a = hi - ratio_g * (hi - lo);
        let b = lo + ratio_g * (hi - lo);
        if oph(a)? >= oph(b)? {
            hi = b;
        } else {
            lo = a;
        }
    }
    let refined = 0.5 * (lo + hi);
    let refined_p = oph(refined)?;
    let (phi, probability) = if refined_p >= best.1 {
        (refined, refined_p)
    } else {
        best
    };
    Ok(PhaseMatch {
        phi,
        omega_spm: negate_phase(phi),
        j,
        iterations,
        probability,
        branch: PhaseMatchBranch::NumericFallback,
    })
}
