//! Cross-sections and phase-plane maps of the success probability.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{run, PhaseSchedule, ProblemSpec, ScheduleKind};

pub const DEFAULT_CROSS_SECTION_SAMPLES: usize = 1001;
pub const DEFAULT_GRID_SIZE: usize = 201;
pub const DEFAULT_DELTA: f64 = 0.02;

/// Straight line through `(π, π)` along which the phase plane is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dependence {
    #[serde(rename = "omega-eq-phi")]
    OmegaEqPhi,
    #[serde(rename = "omega-eq-2pi-minus-phi")]
    OmegaEq2PiMinusPhi,
    #[serde(rename = "omega-eq-pi")]
    OmegaEqPi,
    /// The only direction that sweeps `ω` instead of `φ`.
    #[serde(rename = "phi-eq-pi")]
    PhiEqPi,
}

impl Dependence {
    pub const ALL: [Dependence; 4] = [
        Dependence::OmegaEqPhi,
        Dependence::OmegaEq2PiMinusPhi,
        Dependence::OmegaEqPi,
        Dependence::PhiEqPi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dependence::OmegaEqPhi => "omega-eq-phi",
            Dependence::OmegaEq2PiMinusPhi => "omega-eq-2pi-minus-phi",
            Dependence::OmegaEqPi => "omega-eq-pi",
            Dependence::PhiEqPi => "phi-eq-pi",
        }
    }

    pub fn sweeps_omega(self) -> bool {
        self == Dependence::PhiEqPi
    }

    /// `(φ, ω)` at sweep coordinate `x`.
    pub fn phases(self, x: f64) -> (f64, f64) {
        match self {
            Dependence::OmegaEqPhi => (x, x),
            Dependence::OmegaEq2PiMinusPhi => (x, TAU - x),
            Dependence::OmegaEqPi => (x, PI),
            Dependence::PhiEqPi => (PI, x),
        }
    }
}

impl fmt::Display for Dependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dependence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dependence::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown dependence {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub phi: f64,
    pub omega: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Line(Dependence),
    Grid {
        rows: usize,
        cols: usize,
    },
    /// Loaded from a file without metadata.
    Unspecified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<SamplePoint>,
    pub spec: Option<ProblemSpec>,
    pub schedule: Option<ScheduleKind>,
    pub shape: Shape,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.points.iter().map(|s| s.p).collect()
    }

    /// Sweep variable of a one-dimensional set: `φ`, or `ω` when `φ` is held fixed.
    pub fn sweep_coordinates(&self) -> Result<Vec<f64>> {
        let sweeps_omega = match self.shape {
            Shape::Grid { .. } => {
                return Err(Error::InvalidArgument(
                    "a two-dimensional grid has no single sweep coordinate".into(),
                ))
            }
            Shape::Line(dep) => dep.sweeps_omega(),
            Shape::Unspecified => {
                let first = self.points.first().map(|s| s.phi);
                self.points.len() > 1 && self.points.iter().all(|s| Some(s.phi) == first)
            }
        };
        Ok(self
            .points
            .iter()
            .map(|s| if sweeps_omega { s.omega } else { s.phi })
            .collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"phi,omega,p\n")?;
        for s in &self.points {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", s.phi, s.omega, s.p)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_csv(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a `phi,omega,p` table. Metadata is not stored in the file.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["phi", "omega", "p"] {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                message: format!("expected header phi,omega,p, found {headers:?}"),
            });
        }
        let mut points = Vec::new();
        for row in reader.deserialize::<SamplePoint>() {
            points.push(row.map_err(|e| csv_error(path, e))?);
        }
        Ok(SampleSet {
            points,
            spec: None,
            schedule: None,
            shape: Shape::Unspecified,
        })
    }
}

pub(crate) fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        kind => Error::Parse {
            path: path.into(),
            line,
            message: csv_kind_message(kind),
        },
    }
}

fn csv_kind_message(kind: csv::ErrorKind) -> String {
    match kind {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        csv::ErrorKind::Utf8 { err, .. } => err.to_string(),
        other => format!("{other:?}"),
    }
}

/// Node `i` of an inclusive uniform grid over `[0, 2π]`.
fn node(i: usize, count: usize) -> f64 {
    TAU * (i as f64 / (count - 1) as f64)
}

fn require_sweepable(schedule: &PhaseSchedule) -> Result<()> {
    if schedule.is_sweepable() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "a schedule with explicit per-iteration pairs cannot be swept over base phases".into(),
        ))
    }
}

/// `p` along `dep` on `samples` equally spaced points of `[0, 2π]`, endpoints included.
pub fn cross_section(
    spec: &ProblemSpec,
    schedule: &PhaseSchedule,
    dep: Dependence,
    samples: usize,
) -> Result<SampleSet> {
    if samples < 3 {
        return Err(Error::InvalidArgument(format!(
            "cross-section needs at least 3 samples, got {samples}"
        )));
    }
    require_sweepable(schedule)?;
    let points = (0..samples)
        .into_par_iter()
        .map(|i| {
            let (phi, omega) = dep.phases(node(i, samples));
            let p = run(spec, &schedule.at(phi, omega), None)?;
            Ok(SamplePoint { phi, omega, p })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet {
        points,
        spec: Some(*spec),
        schedule: Some(schedule.kind),
        shape: Shape::Line(dep),
    })
}

/// Row-major `rows × cols` map over `[0, 2π]²`; rows index `φ`, columns `ω`.
pub fn grid(
    spec: &ProblemSpec,
    schedule: &PhaseSchedule,
    rows: usize,
    cols: usize,
) -> Result<SampleSet> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2x2 nodes, got {rows}x{cols}"
        )));
    }
    require_sweepable(schedule)?;
    let points = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let phi = node(idx / cols, rows);
            let omega = node(idx % cols, cols);
            let p = run(spec, &schedule.at(phi, omega), None)?;
            Ok(SamplePoint { phi, omega, p })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet {
        points,
        spec: Some(*spec),
        schedule: Some(schedule.kind),
        shape: Shape::Grid { rows, cols },
    })
}

/// Half-width `ε` of the widest symmetric window around the peak in which
/// every sample keeps `p ≥ (1 − delta)·max p`.
///
/// The peak is the midpoint of the first run of samples attaining the maximum.
/// Constant data yields half the sampled range.
pub fn robustness_interval(samples: &SampleSet, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let x = samples.sweep_coordinates()?;
    let p = samples.probabilities();
    if x.len() < 2 {
        return Err(Error::InsufficientData(
            "robustness interval needs at least 2 samples".into(),
        ));
    }
    let half_range = 0.5 * (x[x.len() - 1] - x[0]);
    let p_max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    if p_max - p_min <= 1e-15 * p_max.abs().max(1.0) {
        return Ok(half_range);
    }

    let first = p.iter().position(|&v| v == p_max).expect("maximum exists");
    let last = first + p[first..].iter().take_while(|&&v| v == p_max).count() - 1;
    let center = 0.5 * (x[first] + x[last]);
    let threshold = (1.0 - delta) * p_max;

    let edge = (center - x[0]).min(x[x.len() - 1] - center);
    let limit = x
        .iter()
        .zip(&p)
        .filter(|(_, &v)| v < threshold)
        .map(|(&xi, _)| (xi - center).abs())
        .fold(f64::INFINITY, f64::min);
    if limit.is_infinite() {
        return Ok(edge);
    }
    let eps = x
        .iter()
        .map(|&xi| (xi - center).abs())
        .filter(|&d| d < limit)
        .fold(0.0, f64::max);
    Ok(eps.min(edge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::hillfit::{hill_eval, HillParams};

    fn line(xs: &[f64], ps: &[f64]) -> SampleSet {
        SampleSet {
            points: xs
                .iter()
                .zip(ps)
                .map(|(&x, &p)| SamplePoint {
                    phi: x,
                    omega: PI,
                    p,
                })
                .collect(),
            spec: None,
            schedule: None,
            shape: Shape::Line(Dependence::OmegaEqPi),
        }
    }

    #[test]
    fn cross_section_matches_register_nine_polynomial() {
        let spec = ProblemSpec::new(9, 1).unwrap();
        let oph = PhaseSchedule::new(ScheduleKind::Oph, PI, PI);
        let cs = cross_section(&spec, &oph, Dependence::OmegaEqPhi, 1001).unwrap();
        assert_eq!(cs.len(), 1001);
        for s in &cs.points {
            let reference = analytic::register_nine(Dependence::OmegaEqPhi, s.phi);
            assert!((s.p - reference).abs() < 5e-4);
        }
    }

    #[test]
    fn omega_pi_and_phi_pi_coincide_for_oph() {
        let spec = ProblemSpec::new(9, 1).unwrap();
        let oph = PhaseSchedule::new(ScheduleKind::Oph, PI, PI);
        let a = cross_section(&spec, &oph, Dependence::OmegaEqPi, 257).unwrap();
        let b = cross_section(&spec, &oph, Dependence::PhiEqPi, 257).unwrap();
        for (u, v) in a.points.iter().zip(&b.points) {
            assert!((u.p - v.p).abs() < 1e-12);
        }
    }

    #[test]
    fn three_samples_are_periodic() {
        let spec = ProblemSpec::new(23, 2).unwrap();
        let sched = PhaseSchedule::new(ScheduleKind::Hidp, 0.0, 0.0);
        for dep in Dependence::ALL {
            let cs = cross_section(&spec, &sched, dep, 3).unwrap();
            assert!((cs.points[0].p - cs.points[2].p).abs() < 1e-12);
        }
        assert!(cross_section(&spec, &sched, Dependence::OmegaEqPhi, 2).is_err());
    }

    #[test]
    fn grid_shape_and_range() {
        let spec = ProblemSpec::new(36, 1).unwrap();
        let oph = PhaseSchedule::new(ScheduleKind::Oph, PI, PI);
        let g = grid(&spec, &oph, 201, 201).unwrap();
        assert_eq!(g.len(), 40401);
        assert!(g.points.iter().all(|s| (0.0..=1.0 + 1e-12).contains(&s.p)));
        assert!(g.sweep_coordinates().is_err());
        assert!(grid(&spec, &oph, 1, 5).is_err());
    }

    #[test]
    fn rejects_explicit_pair_schedules() {
        let spec = ProblemSpec::new(9, 1).unwrap();
        let custom = PhaseSchedule::custom_pairs(vec![(1.0, 1.0), (2.0, 2.0)]);
        assert!(cross_section(&spec, &custom, Dependence::OmegaEqPhi, 11).is_err());
    }

    #[test]
    fn rectangle_interval() {
        let n = 2001;
        let xs: Vec<f64> = (0..n).map(|i| node(i, n)).collect();
        let ps: Vec<f64> = xs
            .iter()
            .map(|&x| if (x - PI).abs() <= 1.0 { 1.0 } else { 0.0 })
            .collect();
        let eps = robustness_interval(&line(&xs, &ps), 0.5).unwrap();
        let step = TAU / (n - 1) as f64;
        assert!((eps - 1.0).abs() <= step, "{eps}");
    }

    #[test]
    fn steep_hill_behaves_as_plateau() {
        let n = 4001;
        let params = HillParams::new(0.9, 1.3, 200.0, PI).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| node(i, n)).collect();
        let ps: Vec<f64> = xs.iter().map(|&x| hill_eval(x, &params)).collect();
        let eps = robustness_interval(&line(&xs, &ps), DEFAULT_DELTA).unwrap();
        assert!((eps - 1.3).abs() < 0.03 * 1.3, "{eps}");
    }

    #[test]
    fn constant_data_gives_half_range() {
        let n = 101;
        let xs: Vec<f64> = (0..n).map(|i| node(i, n)).collect();
        let ps = vec![0.4; n];
        let eps = robustness_interval(&line(&xs, &ps), 0.1).unwrap();
        assert!((eps - PI).abs() < 1e-15);
        assert!(robustness_interval(&line(&xs, &ps), 0.0).is_err());
        assert!(robustness_interval(&line(&xs, &ps), 1.0).is_err());
    }

    #[test]
    fn dependence_names_round_trip() {
        for d in Dependence::ALL {
            assert_eq!(d.name().parse::<Dependence>().unwrap(), d);
        }
        assert!("omega".parse::<Dependence>().is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ProblemSpec::new(9, 1).unwrap();
        let sched = PhaseSchedule::new(ScheduleKind::Acsp, 0.0, 0.0);
        let cs = cross_section(&spec, &sched, Dependence::PhiEqPi, 17).unwrap();
        let path = dir.path().join("cs.csv");
        cs.save_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("phi,omega,p\n"));
        assert!(!text.contains('\r'));
        let loaded = SampleSet::load_csv(&path).unwrap();
        assert_eq!(loaded.points, cs.points);
        assert_eq!(
            loaded.sweep_coordinates().unwrap(),
            cs.sweep_coordinates().unwrap()
        );

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "phi,omega,p\n0,0,0.5\n1,x,0.2\n").unwrap();
        match SampleSet::load_csv(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
