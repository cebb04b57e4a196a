//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

pub const MAX_ITERATIONS: usize = 500;
const RELATIVE_SSE_TOLERANCE: f64 = 1e-12;
const INITIAL_DAMPING: f64 = 1e-3;
const DAMPING_FACTOR: f64 = 10.0;
const MAX_DAMPING: f64 = 1e16;

/// Residuals `r_i(q) = model_i(q) − y_i` with an analytic Jacobian.
pub(crate) trait LeastSquares {
    fn num_residuals(&self) -> usize;

    fn num_params(&self) -> usize;

    /// Fills `residuals` and, if given, the row-major `m × n` Jacobian.
    fn evaluate(&self, params: &[f64], residuals: &mut [f64], jacobian: Option<&mut [f64]>);
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub params: Vec<f64>,
    pub sse: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(b));
    }
    a.lu().solve(b)
}

/// Minimizes `Σ r_i²` from `start`.
///
/// Marquardt scaling by `diag(JᵀJ)`; the damping is divided by 10 after an
/// accepted step and multiplied by 10 after a rejected one. Stops when an
/// accepted step changes the SSE by less than `1e-12` relative, when the SSE
/// reaches zero, or when no damping level yields a decrease.
pub(crate) fn minimize<P: LeastSquares>(problem: &P, start: &[f64]) -> Outcome {
    let m = problem.num_residuals();
    let n = problem.num_params();
    let mut params = start.to_vec();
    let mut residuals = vec![0.0; m];
    let mut jacobian = vec![0.0; m * n];
    problem.evaluate(&params, &mut residuals, Some(&mut jacobian));
    let mut sse = sum_sq(&residuals);
    if !sse.is_finite() {
        return Outcome {
            params,
            sse,
            converged: false,
            iterations: 0,
        };
    }

    let mut damping = INITIAL_DAMPING;
    let mut trial = vec![0.0; n];
    let mut trial_residuals = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        if sse == 0.0 {
            converged = true;
            break;
        }
        let jac = DMatrix::from_row_slice(m, n, &jacobian);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&residuals);
        let diag_floor = 1e-12 * jtj.diagonal().max().max(f64::MIN_POSITIVE);

        let mut accepted = false;
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            let mut lhs = jtj.clone();
            for i in 0..n {
                lhs[(i, i)] += damping * jtj[(i, i)].max(diag_floor);
            }
            let step = solve(lhs, &(-&grad));
            let improved = step.and_then(|step| {
                for i in 0..n {
                    trial[i] = params[i] + step[i];
                }
                problem.evaluate(&trial, &mut trial_residuals, None);
                let trial_sse = sum_sq(&trial_residuals);
                (trial_sse.is_finite() && trial_sse < sse).then_some(trial_sse)
            });
            match improved {
                Some(trial_sse) => {
                    let relative = (sse - trial_sse) / sse;
                    params.copy_from_slice(&trial);
                    sse = trial_sse;
                    damping = (damping / DAMPING_FACTOR).max(1e-12);
                    problem.evaluate(&params, &mut residuals, Some(&mut jacobian));
                    accepted = true;
                    if relative < RELATIVE_SSE_TOLERANCE {
                        converged = true;
                    }
                    break;
                }
                None => {
                    damping *= DAMPING_FACTOR;
                    if damping > MAX_DAMPING {
                        converged = true;
                        break;
                    }
                }
            }
        }
        if converged || !accepted {
            break;
        }
    }

    Outcome {
        params,
        sse,
        converged,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y = a·x + b`
    struct Line {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquares for Line {
        fn num_residuals(&self) -> usize {
            self.x.len()
        }
        fn num_params(&self) -> usize {
            2
        }
        fn evaluate(&self, q: &[f64], r: &mut [f64], jac: Option<&mut [f64]>) {
            for (i, (&x, &y)) in self.x.iter().zip(&self.y).enumerate() {
                r[i] = q[0] * x + q[1] - y;
            }
            if let Some(j) = jac {
                for (i, &x) in self.x.iter().enumerate() {
                    j[2 * i] = x;
                    j[2 * i + 1] = 1.0;
                }
            }
        }
    }

    #[test]
    fn solves_linear_problem() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let out = minimize(&Line { x, y }, &[0.0, 0.0]);
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-9);
        assert!((out.params[1] + 1.0).abs() < 1e-9);
        assert!(out.sse < 1e-18);
    }

    /// Rosenbrock as residuals `(1 − a, 10(b − a²))`.
    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        fn num_residuals(&self) -> usize {
            2
        }
        fn num_params(&self) -> usize {
            2
        }
        fn evaluate(&self, q: &[f64], r: &mut [f64], jac: Option<&mut [f64]>) {
            r[0] = 1.0 - q[0];
            r[1] = 10.0 * (q[1] - q[0] * q[0]);
            if let Some(j) = jac {
                j.copy_from_slice(&[-1.0, 0.0, -20.0 * q[0], 10.0]);
            }
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let out = minimize(&Rosenbrock, &[-1.2, 1.0]);
        assert!(out.converged);
        assert!((out.params[0] - 1.0).abs() < 1e-8);
        assert!((out.params[1] - 1.0).abs() < 1e-8);
    }
}
