//! Modified Hill function `W(φ) = b·kⁿ / (|φ − c|ⁿ + kⁿ)`, its least-squares
//! fit to probability curves, and the two secondary models used to describe
//! how fitted parameters depend on the register size.

mod solver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::sweep::SampleSet;
use solver::{minimize, LeastSquares};

pub use solver::MAX_ITERATIONS;

/// Starting steepness values tried by [`fit_hill`].
pub const HILL_STARTS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
pub const MIN_HILL_SAMPLES: usize = 16;
pub const MIN_SECONDARY_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillParams {
    /// Height.
    pub b: f64,
    /// Half-width at half maximum.
    pub k: f64,
    /// Steepness.
    pub n: f64,
    /// Center.
    pub c: f64,
}

impl HillParams {
    pub fn new(b: f64, k: f64, n: f64, c: f64) -> Result<Self> {
        if !(b > 0.0 && k > 0.0 && n > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Hill parameters need b, k, n > 0 and finite c, got b={b}, k={k}, n={n}, c={c}"
            )));
        }
        Ok(Self { b, k, n, c })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.b, self.k, self.n, self.c]
    }
}

/// `(|φ − c| / k)ⁿ`, the only place the power is taken.
fn tail_ratio(phi: f64, p: &HillParams) -> (f64, f64) {
    let d = (phi - p.c).abs();
    if d == 0.0 {
        return (0.0, 0.0);
    }
    let log_ratio = (d / p.k).ln();
    ((p.n * log_ratio).exp(), log_ratio)
}

pub fn hill_eval(phi: f64, params: &HillParams) -> f64 {
    let (r, _) = tail_ratio(phi, params);
    params.b / (1.0 + r)
}

/// Partial derivatives `(∂W/∂b, ∂W/∂k, ∂W/∂n, ∂W/∂c)`.
///
/// At `φ = c` the `n` and `c` partials are 0.
pub fn hill_gradient(phi: f64, params: &HillParams) -> [f64; 4] {
    let HillParams { b, k, n, c } = *params;
    let d = (phi - c).abs();
    if d == 0.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let (r, log_ratio) = tail_ratio(phi, params);
    let s = 1.0 / (1.0 + r);
    // r/(1+r)², written so that r = ∞ gives 0.
    let t = s * (1.0 - s);
    let sign = (phi - c).signum();
    [s, b * n * t / k, -b * t * log_ratio, b * n * t * sign / d]
}

/// Which model a [`FitResult`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    /// `b, k, n, c`
    Hill,
    /// `A + B·e^{−N/τ}`
    SatExp,
    /// `e^{(N+u)/v} / (1 + e^{(N+u)/v}) + d`
    LogisticOffset,
}

impl ModelId {
    pub fn name(self) -> &'static str {
        match self {
            ModelId::Hill => "hill",
            ModelId::SatExp => "sat-exp",
            ModelId::LogisticOffset => "logistic-offset",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::Hill => &["b", "k", "n", "c"],
            ModelId::SatExp => &["a", "b", "tau"],
            ModelId::LogisticOffset => &["u", "v", "d"],
        }
    }

    /// Model value at `x` (a phase for Hill, a register size otherwise).
    pub fn evaluate(self, params: &[f64], x: f64) -> f64 {
        match self {
            ModelId::Hill => hill_eval(
                x,
                &HillParams {
                    b: params[0],
                    k: params[1],
                    n: params[2],
                    c: params[3],
                },
            ),
            ModelId::SatExp => params[0] + params[1] * (-x / params[2]).exp(),
            ModelId::LogisticOffset => logistic((x + params[0]) / params[1]) + params[2],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ModelId::Hill, ModelId::SatExp, ModelId::LogisticOffset]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}")))
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_id: ModelId,
    /// In the order of [`ModelId::param_names`].
    pub params: Vec<f64>,
    /// `√(SSE / (samples − params))`.
    pub sigma: f64,
    pub sse: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    fn from_outcome(
        model_id: ModelId,
        params: Vec<f64>,
        sse: f64,
        samples: usize,
        converged: bool,
        iterations: usize,
    ) -> Self {
        let dof = samples - params.len();
        Self {
            model_id,
            sigma: (sse / dof as f64).sqrt(),
            params,
            sse,
            converged,
            iterations,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.model_id
            .param_names()
            .iter()
            .position(|&p| p == name)
            .map(|i| self.params[i])
    }

    pub fn hill(&self) -> Option<HillParams> {
        (self.model_id == ModelId::Hill).then(|| HillParams {
            b: self.params[0],
            k: self.params[1],
            n: self.params[2],
            c: self.params[3],
        })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.model_id.evaluate(&self.params, x)
    }

    /// Flat key-value document: model id, named parameters, then diagnostics.
    pub fn to_document(&self) -> Map<String, Value> {
        let mut doc = Map::new();
        doc.insert("model_id".into(), Value::from(self.model_id.name()));
        for (name, value) in self.model_id.param_names().iter().zip(&self.params) {
            doc.insert((*name).into(), Value::from(*value));
        }
        doc.insert("sigma".into(), Value::from(self.sigma));
        doc.insert("sse".into(), Value::from(self.sse));
        doc.insert("converged".into(), Value::from(self.converged));
        doc.insert("iterations".into(), Value::from(self.iterations));
        doc
    }

    pub fn from_document(doc: &Map<String, Value>) -> Result<Self> {
        let field = |key: &str| {
            doc.get(key)
                .ok_or_else(|| Error::InvalidArgument(format!("fit document lacks {key:?}")))
        };
        let number = |key: &str| {
            field(key)?
                .as_f64()
                .ok_or_else(|| Error::InvalidArgument(format!("{key:?} is not a number")))
        };
        let model_id: ModelId = field("model_id")?
            .as_str()
            .ok_or_else(|| Error::InvalidArgument("model_id is not a string".into()))?
            .parse()?;
        let params = model_id
            .param_names()
            .iter()
            .map(|name| number(name))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model_id,
            params,
            sigma: number("sigma")?,
            sse: number("sse")?,
            converged: field("converged")?
                .as_bool()
                .ok_or_else(|| Error::InvalidArgument("converged is not a boolean".into()))?,
            iterations: field("iterations")?
                .as_u64()
                .ok_or_else(|| Error::InvalidArgument("iterations is not an integer".into()))?
                as usize,
        })
    }
}

/// Hill residuals in `(ln b, ln k, ln n, c)`.
struct HillProblem<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

fn hill_from_internal(q: &[f64]) -> HillParams {
    HillParams {
        b: q[0].exp(),
        k: q[1].exp(),
        n: q[2].exp(),
        c: q[3],
    }
}

impl LeastSquares for HillProblem<'_> {
    fn num_residuals(&self) -> usize {
        self.x.len()
    }

    fn num_params(&self) -> usize {
        4
    }

    fn evaluate(&self, q: &[f64], residuals: &mut [f64], jacobian: Option<&mut [f64]>) {
        let p = hill_from_internal(q);
        for (r, (&x, &y)) in residuals.iter_mut().zip(self.x.iter().zip(self.y)) {
            *r = hill_eval(x, &p) - y;
        }
        if let Some(jac) = jacobian {
            for (row, &x) in jac.chunks_exact_mut(4).zip(self.x) {
                let g = hill_gradient(x, &p);
                row[0] = g[0] * p.b;
                row[1] = g[1] * p.k;
                row[2] = g[2] * p.n;
                row[3] = g[3];
            }
        }
    }
}

fn validate_xy(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < min {
        return Err(Error::InsufficientData(format!(
            "need at least {min} samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    Ok(())
}

/// Starting point `(b₀, k₀, c₀)`: the maximum, the half width at half
/// maximum, and the middle of the first run of maximal samples.
fn hill_start(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = y.iter().position(|&v| v == y_max).unwrap_or(0);
    let last = first
        + y[first..]
            .iter()
            .take_while(|&&v| v == y_max)
            .count()
            .max(1)
        - 1;
    let c0 = 0.5 * (x[first] + x[last]);
    let half = 0.5 * y_max;
    let left = (0..first)
        .rev()
        .find(|&i| y[i] < half)
        .map(|i| x[i])
        .unwrap_or(x[0]);
    let right = (last + 1..x.len())
        .find(|&i| y[i] < half)
        .map(|i| x[i])
        .unwrap_or(x[x.len() - 1]);
    let min_step = x
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let k0 = (0.5 * ((c0 - left).abs() + (right - c0).abs())).max(min_step);
    (y_max.max(1e-12), k0, c0)
}

/// Hill fit of `y(x)` with a fixed multi-start over the steepness.
pub fn fit_hill_xy(x: &[f64], y: &[f64]) -> Result<FitResult> {
    validate_xy(x, y, MIN_HILL_SAMPLES)?;
    let (b0, k0, c0) = hill_start(x, y);
    let problem = HillProblem { x, y };
    let mut best: Option<solver::Outcome> = None;
    for n0 in HILL_STARTS {
        let out = minimize(&problem, &[b0.ln(), k0.ln(), n0.ln(), c0]);
        let better = match &best {
            None => true,
            Some(b) => out.sse < b.sse || (b.sse.is_nan() && !out.sse.is_nan()),
        };
        if better {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    let p = hill_from_internal(&best.params);
    Ok(FitResult::from_outcome(
        ModelId::Hill,
        p.as_array().to_vec(),
        best.sse,
        x.len(),
        best.converged,
        best.iterations,
    ))
}

pub fn fit_hill(samples: &SampleSet) -> Result<FitResult> {
    let x = samples.sweep_coordinates()?;
    fit_hill_xy(&x, &samples.probabilities())
}

/// `A + B·e^{−N/τ}` in `(A, B, ln τ)`.
struct SatExpProblem<'a> {
    n: &'a [f64],
    y: &'a [f64],
}

impl LeastSquares for SatExpProblem<'_> {
    fn num_residuals(&self) -> usize {
        self.n.len()
    }

    fn num_params(&self) -> usize {
        3
    }

    fn evaluate(&self, q: &[f64], residuals: &mut [f64], jacobian: Option<&mut [f64]>) {
        let (a, b, tau) = (q[0], q[1], q[2].exp());
        for (r, (&n, &y)) in residuals.iter_mut().zip(self.n.iter().zip(self.y)) {
            *r = a + b * (-n / tau).exp() - y;
        }
        if let Some(jac) = jacobian {
            for (row, &n) in jac.chunks_exact_mut(3).zip(self.n) {
                let e = (-n / tau).exp();
                row[0] = 1.0;
                row[1] = e;
                row[2] = b * e * n / tau;
            }
        }
    }
}

/// Shifted logistic in `(u, v, d)`.
struct LogisticProblem<'a> {
    n: &'a [f64],
    y: &'a [f64],
}

impl LeastSquares for LogisticProblem<'_> {
    fn num_residuals(&self) -> usize {
        self.n.len()
    }

    fn num_params(&self) -> usize {
        3
    }

    fn evaluate(&self, q: &[f64], residuals: &mut [f64], jacobian: Option<&mut [f64]>) {
        let (u, v, d) = (q[0], q[1], q[2]);
        for (r, (&n, &y)) in residuals.iter_mut().zip(self.n.iter().zip(self.y)) {
            *r = logistic((n + u) / v) + d - y;
        }
        if let Some(jac) = jacobian {
            for (row, &n) in jac.chunks_exact_mut(3).zip(self.n) {
                let s = logistic((n + u) / v);
                let t = s * (1.0 - s);
                row[0] = t / v;
                row[1] = -t * (n + u) / (v * v);
                row[2] = 1.0;
            }
        }
    }
}

/// Fit of a parameter's dependence on the register size.
pub fn fit_secondary(data: &[(usize, f64)], model_id: ModelId) -> Result<FitResult> {
    if data.len() < MIN_SECONDARY_POINTS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_SECONDARY_POINTS} points, got {}",
            data.len()
        )));
    }
    if data.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument(
            "register sizes must be strictly increasing".into(),
        ));
    }
    let n: Vec<f64> = data.iter().map(|&(n, _)| n as f64).collect();
    let y: Vec<f64> = data.iter().map(|&(_, y)| y).collect();
    validate_xy(&n, &y, MIN_SECONDARY_POINTS)?;
    let (n_first, n_last) = (n[0], n[n.len() - 1]);
    let (y_first, y_last) = (y[0], y[y.len() - 1]);
    let range = n_last - n_first;

    let (params, out) = match model_id {
        ModelId::SatExp => {
            let start = [y_last, y_first - y_last, (range / 3.0).ln()];
            let out = minimize(&SatExpProblem { n: &n, y: &y }, &start);
            let q = &out.params;
            (vec![q[0], q[1], q[2].exp()], out)
        }
        ModelId::LogisticOffset => {
            let d0 = 0.0;
            let v0 = range / 5.0;
            let target = (0.5 * (y_first + y_last) - d0).clamp(0.01, 0.99);
            let u0 = v0 * (target / (1.0 - target)).ln() - 0.5 * (n_first + n_last);
            let out = minimize(&LogisticProblem { n: &n, y: &y }, &[u0, v0, d0]);
            (out.params.clone(), out)
        }
        ModelId::Hill => {
            return Err(Error::Unsupported(
                "the Hill model is not a register-size model".into(),
            ))
        }
    };
    Ok(FitResult::from_outcome(
        model_id,
        params,
        out.sse,
        data.len(),
        out.converged,
        out.iterations,
    ))
}

/// Fitted model evaluated at register size `n`.
pub fn extrapolate(fit: &FitResult, n: usize) -> f64 {
    fit.evaluate(n as f64)
}
