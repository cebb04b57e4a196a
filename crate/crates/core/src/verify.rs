//! Self-checks of the simulator: closed forms, the full state-vector oracle,
//! kernel duality, the register-9 polynomials, schedule equivalences and
//! phase matching.
//!
//! Every suite takes the iteration step to test, so a deliberately broken
//! step can be run through the same checks.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{one_iteration, register_nine, two_iterations};
use crate::error::{Error, Result};
use crate::fullstate::{run_full, SolutionSet};
use crate::grover::{
    evolve_with, negate_phase, phase_matching_angle, IterationStep, Kernel, PhaseMatchBranch,
    PhaseSchedule, ProblemSpec, ScheduleKind, SignPattern, SignRule,
};
use crate::sweep::Dependence;

const ORACLE_SEED: u64 = 0x05ee_d0f9_c0de;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClosedForm,
    Oracle,
    Duality,
    AnalyticN9,
    Equivalences,
    PhaseMatch,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::ClosedForm,
        Suite::Oracle,
        Suite::Duality,
        Suite::AnalyticN9,
        Suite::Equivalences,
        Suite::PhaseMatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClosedForm => "closed-form",
            Suite::Oracle => "oracle",
            Suite::Duality => "duality",
            Suite::AnalyticN9 => "analytic-n9",
            Suite::Equivalences => "equivalences",
            Suite::PhaseMatch => "phase-match",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: usize,
    /// Largest deviation seen (for phase matching, the largest shortfall below 1).
    pub max_error: f64,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

/// Running tally of one suite.
struct Tally {
    suite: Suite,
    checks: usize,
    failures: usize,
    max_error: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new(suite: Suite) -> Self {
        Self {
            suite,
            checks: 0,
            failures: 0,
            max_error: 0.0,
            notes: Vec::new(),
        }
    }

    fn close(&mut self, a: f64, b: f64, tol: f64) {
        let err = (a - b).abs();
        self.checks += 1;
        if err.is_nan() || err > tol {
            self.failures += 1;
        }
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            checks: self.checks,
            failures: self.failures,
            max_error: self.max_error,
            notes: self.notes,
        }
    }
}

fn prob(
    spec: &ProblemSpec,
    schedule: &PhaseSchedule,
    iters: Option<usize>,
    step: IterationStep,
) -> Result<f64> {
    Ok(evolve_with(spec, schedule, iters, step)?.success_probability())
}

fn node(i: usize, count: usize) -> f64 {
    TAU * (i as f64 / (count - 1) as f64)
}

/// `p(π, π) = sin²((2k+1)θ/2)` for `N` in 2..=110, plus the one- and
/// two-iteration closed forms where they apply.
pub fn closed_form(step: IterationStep) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::ClosedForm);
    for n in 2..=110 {
        let spec = ProblemSpec::new(n, 1)?;
        let theta = spec.theta();
        let k = spec.optimal_iterations();
        let p = prob(
            &spec,
            &PhaseSchedule::new(ScheduleKind::Oph, PI, PI),
            None,
            step,
        )?;
        t.close(p, ((2 * k + 1) as f64 * theta / 2.0).sin().powi(2), 1e-12);
        for (phi, omega) in [(0.4, 2.2), (1.9, 5.1), (5.5, 0.7)] {
            let sched = PhaseSchedule::new(ScheduleKind::Oph, phi, omega);
            t.close(
                prob(&spec, &sched, Some(1), step)?,
                one_iteration(theta, phi, omega),
                1e-12,
            );
            t.close(
                prob(&spec, &sched, Some(2), step)?,
                two_iterations(theta, phi, omega, Kernel::Plus),
                1e-12,
            );
            let minus = sched.clone().with_kernel(Kernel::Minus);
            t.close(
                prob(&spec, &minus, Some(2), step)?,
                two_iterations(theta, phi, omega, Kernel::Minus),
                1e-12,
            );
        }
    }
    Ok(t.finish())
}

/// Reduced simulator against the full state vector: `N` in 2..=64,
/// `M ∈ {1, 2, ⌊N/4⌋}`, every named schedule, 20 random phase pairs each.
pub fn oracle(step: IterationStep) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Oracle);
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    for n in 2..=64 {
        let mut ms = vec![1, 2, n / 4];
        ms.sort_unstable();
        ms.dedup();
        for m in ms.into_iter().filter(|&m| m >= 1 && 2 * m <= n) {
            let spec = ProblemSpec::new(n, m)?;
            // Spread the solutions so the full simulator does not rely on them being leading.
            let indices: Vec<usize> = (0..m).map(|i| (i * n) / m + (n / m) / 2).collect();
            let solutions = SolutionSet::new(indices, n)?;
            for kind in ScheduleKind::NAMED {
                for _ in 0..20 {
                    let phi = rng.gen_range(0.0..TAU);
                    let omega = rng.gen_range(0.0..TAU);
                    let sched = PhaseSchedule::new(kind, phi, omega);
                    let reduced = prob(&spec, &sched, None, step)?;
                    let full = run_full(&spec, &solutions, &sched, None)?;
                    t.close(reduced, full, 1e-10);
                }
            }
        }
    }
    Ok(t.finish())
}

/// `p_MINUS(φ, ω) = p_PLUS(φ, 2π − ω)` on a 50×50 grid for `N ∈ {9, 36, 72}`.
pub fn duality(step: IterationStep) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Duality);
    for n in [9, 36, 72] {
        let spec = ProblemSpec::new(n, 1)?;
        for i in 0..50 {
            for j in 0..50 {
                let (phi, omega) = (node(i, 50), node(j, 50));
                let minus = PhaseSchedule::new(ScheduleKind::Spm, phi, omega);
                let plus = PhaseSchedule::new(ScheduleKind::Oph, phi, TAU - omega);
                t.close(
                    prob(&spec, &minus, None, step)?,
                    prob(&spec, &plus, None, step)?,
                    1e-12,
                );
            }
        }
    }
    Ok(t.finish())
}

/// OPH at `N = 9` against the five-decimal register-9 polynomials, 64 points
/// per dependence.
pub fn analytic_n9(step: IterationStep) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::AnalyticN9);
    let spec = ProblemSpec::new(9, 1)?;
    for dep in Dependence::ALL {
        for i in 0..64 {
            let x = TAU * i as f64 / 64.0;
            let (phi, omega) = dep.phases(x);
            let p = prob(
                &spec,
                &PhaseSchedule::new(ScheduleKind::Oph, phi, omega),
                None,
                step,
            )?;
            t.close(p, register_nine(dep, x), 5e-4);
        }
    }
    Ok(t.finish())
}

/// A schedule evaluated at transformed base phases.
type Side = (SignPattern, fn(f64, f64) -> (f64, f64));

/// The nine sign-variant identities of the alternating and halving families.
fn identities() -> [(&'static str, Side, Side); 9] {
    use SignRule::*;
    let alt = Alternating { shifted: false };
    let alt1 = Alternating { shifted: true };
    let half = Halves { shifted: false };
    let half1 = Halves { shifted: true };
    let r2 = SignPattern::new(alt, alt);
    let same: fn(f64, f64) -> (f64, f64) = |p, w| (p, w);
    [
        (
            "{φ, (−1)^{j+1}ω} = ACSP(φ, 2π−ω)",
            (SignPattern::new(Fixed, alt1), same),
            (SignPattern::ACSP, |p, w| (p, negate_phase(w))),
        ),
        (
            "{(−1)^j φ, ω} = ACSP(ω, 2π−φ)",
            (SignPattern::new(alt, Fixed), same),
            (SignPattern::ACSP, |p, w| (w, negate_phase(p))),
        ),
        (
            "{(−1)^{j+1}φ, ω} = ACSP(ω, φ)",
            (SignPattern::new(alt1, Fixed), same),
            (SignPattern::ACSP, |p, w| (w, p)),
        ),
        (
            "{(−1)^{j+1}φ, (−1)^{j+1}ω} = {(−1)^j φ, (−1)^j ω}",
            (SignPattern::new(alt1, alt1), same),
            (r2, same),
        ),
        (
            "ACBP(φ, ω) = {(−1)^j φ, (−1)^j ω}(2π−φ, ω)",
            (SignPattern::ACBP, same),
            (r2, |p, w| (negate_phase(p), w)),
        ),
        (
            "{(−1)^j φ, (−1)^{j+1}ω} = {(−1)^j φ, (−1)^j ω}(2π−φ, ω)",
            (SignPattern::new(alt, alt1), same),
            (r2, |p, w| (negate_phase(p), w)),
        ),
        (
            "HIDP shifted on both = HIDP(2π−φ, 2π−ω)",
            (SignPattern::new(half1, half1), same),
            (SignPattern::HIDP, |p, w| (negate_phase(p), negate_phase(w))),
        ),
        (
            "HIDP shifted on φ = HIDP(ω, 2π−φ)",
            (SignPattern::new(half1, half), same),
            (SignPattern::HIDP, |p, w| (w, negate_phase(p))),
        ),
        (
            "HIDP shifted on ω = HIDP shifted on φ",
            (SignPattern::new(half, half1), same),
            (SignPattern::new(half1, half), same),
        ),
    ]
}

/// Each identity on a 25×25 grid at `N ∈ {9, 36}`.
pub fn equivalences(step: IterationStep) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Equivalences);
    for (label, (lhs, lhs_map), (rhs, rhs_map)) in identities() {
        let before = t.failures;
        for n in [9, 36] {
            let spec = ProblemSpec::new(n, 1)?;
            for i in 0..25 {
                for j in 0..25 {
                    let (phi, omega) = (node(i, 25), node(j, 25));
                    let (a_phi, a_omega) = lhs_map(phi, omega);
                    let (b_phi, b_omega) = rhs_map(phi, omega);
                    let a = prob(
                        &spec,
                        &PhaseSchedule::custom_signs(lhs, a_phi, a_omega),
                        None,
                        step,
                    )?;
                    let b = prob(
                        &spec,
                        &PhaseSchedule::custom_signs(rhs, b_phi, b_omega),
                        None,
                        step,
                    )?;
                    t.close(a, b, 1e-12);
                }
            }
        }
        if t.failures > before {
            t.notes.push(format!("failed: {label}"));
        }
    }
    Ok(t.finish())
}

/// The phase-matching angle reaches `p ≥ 0.999` under OPH and under SPM with
/// `ω = 2π − φ` for `N` in 7..=110.
pub fn phase_match(step: IterationStep) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::PhaseMatch);
    let mut fallbacks = Vec::new();
    for n in 7..=110 {
        let spec = ProblemSpec::new(n, 1)?;
        let pm = phase_matching_angle(&spec)?;
        if pm.branch == PhaseMatchBranch::NumericFallback {
            fallbacks.push(n);
        }
        let oph = PhaseSchedule::new(ScheduleKind::Oph, pm.phi, pm.phi);
        let spm = PhaseSchedule::new(ScheduleKind::Spm, pm.phi, pm.omega_spm);
        for sched in [oph, spm] {
            let p = prob(&spec, &sched, Some(pm.iterations), step)?;
            t.checks += 1;
            if p.is_nan() || p < 0.999 {
                t.failures += 1;
            }
            t.max_error = t.max_error.max(1.0 - p);
        }
    }
    t.notes.push(if fallbacks.is_empty() {
        "formula branch for every N".into()
    } else {
        format!("numeric fallback at N = {fallbacks:?}")
    });
    Ok(t.finish())
}

pub fn run_suite(suite: Suite, step: IterationStep) -> Result<SuiteReport> {
    match suite {
        Suite::ClosedForm => closed_form(step),
        Suite::Oracle => oracle(step),
        Suite::Duality => duality(step),
        Suite::AnalyticN9 => analytic_n9(step),
        Suite::Equivalences => equivalences(step),
        Suite::PhaseMatch => phase_match(step),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grover::{apply_iteration, ReducedState};

    /// Ignores the kernel: `G⁻` silently behaves like `G⁺`.
    fn sign_dropped(s: ReducedState, theta: f64, phi: f64, omega: f64, _: Kernel) -> ReducedState {
        apply_iteration(s, theta, phi, omega, Kernel::Plus)
    }

    #[test]
    fn fast_suites_pass() {
        for suite in [
            Suite::ClosedForm,
            Suite::Duality,
            Suite::AnalyticN9,
            Suite::PhaseMatch,
        ] {
            let r = run_suite(suite, apply_iteration).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn corrupted_kernel_fails_duality() {
        let r = duality(sign_dropped).unwrap();
        assert!(!r.passed());
        assert!(r.failures > 0);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
