//! Closed-form success amplitudes for one and two iterations, and the
//! register-size-9 polynomials along the four cross-section directions.
//!
//! All formulas return `|amplitude|²` on a single solution state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grover::{Kernel, ProblemSpec};
use crate::sweep::Dependence;

fn cis(x: f64) -> Complex64 {
    Complex64::cis(x)
}

fn half_angles(theta: f64) -> (f64, f64) {
    let (s, c) = (0.5 * theta).sin_cos();
    (s, c)
}

/// One iteration of `G⁺` with phases `(φ, ω)`.
pub fn one_iteration(theta: f64, phi: f64, omega: f64) -> f64 {
    let (s, c) = half_angles(theta);
    let eo = cis(omega) - 1.0;
    let amp = cis(phi) * s * (1.0 + eo * s * s) + 0.5 * eo * c * theta.sin();
    amp.norm_sqr()
}

/// Two identical iterations, `G⁺G⁺` or `G⁻G⁻`.
pub fn two_iterations(theta: f64, phi: f64, omega: f64, kernel: Kernel) -> f64 {
    let w = match kernel {
        Kernel::Plus => cis(omega),
        Kernel::Minus => cis(-omega),
    };
    let f = cis(phi);
    let (s, c) = half_angles(theta);
    let s2 = s * s;
    let ew = w - 1.0;
    let ef = f - 1.0;
    let amp = f * s * (1.0 + ew * s2) * (f + w - 1.0 + ef * ew * s2)
        + 0.5 * ew * c * (w + ef * ew * s2) * theta.sin();
    amp.norm_sqr()
}

/// Two `G⁺` iterations with independent phases, `G(φ₂, ω₂)·G(φ₁, ω₁)`.
pub fn two_iterations_multiphase(theta: f64, first: (f64, f64), second: (f64, f64)) -> f64 {
    let (phi1, omega1) = first;
    let (phi2, omega2) = second;
    let (s, c) = half_angles(theta);
    let s2 = s * s;
    let ef1 = cis(phi1) - 1.0;
    let ew1 = cis(omega1) - 1.0;
    let ew2 = cis(omega2) - 1.0;
    let amp = cis(phi2) * s * (-1.0 + cis(phi1) + cis(omega1) + ef1 * ew1 * s2) * (1.0 + ew2 * s2)
        + 0.5 * ew2 * c * (cis(omega1) + ef1 * ew1 * s2) * theta.sin();
    amp.norm_sqr()
}

/// Register size 9, one solution, two `G⁺` iterations, along `dep`.
/// `x` is `φ`, or `ω` for [`Dependence::PhiEqPi`]. Coefficients carry five decimals.
pub fn register_nine(dep: Dependence, x: f64) -> f64 {
    let amp = match dep {
        Dependence::OmegaEqPhi => {
            0.03292 + 0.46090 * cis(x)
                - 0.69135 * cis(2.0 * x)
                - 0.13168 * cis(3.0 * x)
                - 0.00411 * cis(4.0 * x)
        }
        Dependence::OmegaEq2PiMinusPhi => {
            Complex64::new(0.13580 - 0.32921 * x.cos() + 0.52674 * (2.0 * x).cos(), 0.0)
        }
        Dependence::OmegaEqPi | Dependence::PhiEqPi => {
            0.46090 - 0.32921 * cis(x) + 0.20164 * cis(2.0 * x)
        }
    };
    amp.norm_sqr()
}

/// Closed-form probability for `spec` along `dep` at sweep coordinate `x`.
///
/// Uses the register-9 polynomials for `(N, M) = (9, 1)`, otherwise the one-
/// or two-iteration `G⁺` formulas when the optimal count is 1 or 2 and `M = 1`.
pub fn analytic_reference(spec: &ProblemSpec, dep: Dependence, x: f64) -> Result<f64> {
    if spec.num_solutions() != 1 {
        return Err(Error::Unsupported(format!(
            "closed forms are single-solution only (M={})",
            spec.num_solutions()
        )));
    }
    if spec.register_size() == 9 {
        return Ok(register_nine(dep, x));
    }
    let (phi, omega) = dep.phases(x);
    let theta = spec.theta();
    match spec.optimal_iterations() {
        1 => Ok(one_iteration(theta, phi, omega)),
        2 => Ok(two_iterations(theta, phi, omega, Kernel::Plus)),
        k => Err(Error::Unsupported(format!(
            "no closed form for {k} iterations (N={})",
            spec.register_size()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grover::{run, PhaseSchedule, ScheduleKind};
    use std::f64::consts::PI;

    #[test]
    fn register_nine_anchor_values() {
        let p0 = register_nine(Dependence::OmegaEqPhi, 0.0);
        assert!((p0 - 0.1111).abs() < 1e-4, "{p0}");
        let expected = (0.46090f64 + 0.32921 + 0.20164).powi(2);
        let p = register_nine(Dependence::OmegaEqPi, PI);
        assert!((p - expected).abs() < 1e-12);
        assert!((p - 0.98357).abs() < 1e-5, "{p}");
    }

    #[test]
    fn multiphase_reduces_to_constant_phases() {
        let theta = ProblemSpec::new(13, 1).unwrap().theta();
        let mut x: f64 = 0.1234;
        for _ in 0..100 {
            x = (x * 7.31 + 0.917).rem_euclid(std::f64::consts::TAU);
            let y = (x * 3.17 + 2.2).rem_euclid(std::f64::consts::TAU);
            let a = two_iterations_multiphase(theta, (x, y), (x, y));
            let b = two_iterations(theta, x, y, Kernel::Plus);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_recursion() {
        for n in [2, 5, 7, 11, 14] {
            let spec = ProblemSpec::new(n, 1).unwrap();
            let theta = spec.theta();
            for (phi, omega) in [(0.3, 2.9), (PI, 1.0), (4.0, 5.5)] {
                let k = spec.optimal_iterations();
                let oph = PhaseSchedule::new(ScheduleKind::Oph, phi, omega);
                let sim = run(&spec, &oph, None).unwrap();
                let closed = if k == 1 {
                    one_iteration(theta, phi, omega)
                } else {
                    two_iterations(theta, phi, omega, Kernel::Plus)
                };
                assert!((sim - closed).abs() < 1e-12, "N={n}");
                let spm = PhaseSchedule::new(ScheduleKind::Spm, phi, omega);
                let sim = run(&spec, &spm, Some(2)).unwrap();
                let closed = two_iterations(theta, phi, omega, Kernel::Minus);
                assert!((sim - closed).abs() < 1e-12, "N={n}");
            }
        }
    }

    #[test]
    fn unsupported_combinations() {
        let spec = ProblemSpec::new(36, 1).unwrap();
        assert!(analytic_reference(&spec, Dependence::OmegaEqPhi, 1.0).is_err());
        let spec = ProblemSpec::new(12, 2).unwrap();
        assert!(analytic_reference(&spec, Dependence::OmegaEqPhi, 1.0).is_err());
        let spec = ProblemSpec::new(5, 1).unwrap();
        assert!(analytic_reference(&spec, Dependence::OmegaEqPi, 1.0).is_ok());
    }
}
