//! Multi-size scans, per-size Hill fits, secondary fits of the Hill parameters
//! against the register size, and the cross-schedule comparison.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{PhaseSchedule, ProblemSpec, ScheduleKind};
use crate::hillfit::{extrapolate, fit_hill, fit_secondary, FitResult, ModelId, MIN_HILL_SAMPLES};
use crate::sweep::{cross_section, csv_error, Dependence};

pub const DEFAULT_N_MIN: usize = 2;
pub const DEFAULT_N_MAX: usize = 110;
/// First register size used by the secondary fits (first two-iteration size).
pub const SECONDARY_N_MIN: usize = 7;
/// Largest register size considered when choosing a worst dependence.
pub const SELECTION_N_MAX: usize = 110;
pub const DEFAULT_TARGET_N: usize = 1000;

pub const RECORD_HEADER: &str = "N,M,schedule,dependence,k_iter,b,k,n,c,sigma,converged";

/// Hill fit of one cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRecord {
    #[serde(rename = "N")]
    pub register_size: usize,
    #[serde(rename = "M")]
    pub num_solutions: usize,
    pub schedule: ScheduleKind,
    pub dependence: Dependence,
    pub k_iter: usize,
    pub b: f64,
    pub k: f64,
    /// Hill steepness.
    #[serde(rename = "n")]
    pub n_exp: f64,
    pub c: f64,
    pub sigma: f64,
    /// False when the fit failed (parameters are NaN) or hit the iteration cap.
    pub converged: bool,
}

impl RobustnessRecord {
    fn usable(&self) -> bool {
        self.converged && [self.b, self.k, self.n_exp].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    /// Sorted by `(N, schedule, dependence)`.
    pub records: Vec<RobustnessRecord>,
    /// Register sizes at which the iteration count grows.
    pub iteration_steps: Vec<usize>,
}

/// Sweeps every dependence at every `N` in `range` and fits each cross-section.
///
/// `template` supplies the schedule kind and kernel; its base phases are
/// replaced along each sweep. A failing fit yields a record with NaN
/// parameters and `converged = false`.
pub fn scan(
    range: RangeInclusive<usize>,
    m: usize,
    template: &PhaseSchedule,
    dependences: &[Dependence],
    samples: usize,
) -> Result<ScanOutput> {
    let (n_min, n_max) = (*range.start(), *range.end());
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "empty scan range {n_min}..={n_max}"
        )));
    }
    ProblemSpec::new(n_min, m)?;
    if dependences.is_empty() {
        return Err(Error::InvalidArgument("no dependences to scan".into()));
    }
    if samples < MIN_HILL_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_HILL_SAMPLES} samples per cross-section, got {samples}"
        )));
    }
    if !template.is_sweepable() {
        return Err(Error::InvalidArgument(
            "explicit per-iteration phases cannot be scanned".into(),
        ));
    }
    let mut deps = dependences.to_vec();
    deps.sort_unstable();
    deps.dedup();

    let jobs: Vec<(usize, Dependence)> = range
        .clone()
        .flat_map(|n| deps.iter().map(move |&d| (n, d)))
        .collect();
    let mut records = jobs
        .into_par_iter()
        .map(|(n, dep)| {
            let spec = ProblemSpec::new(n, m)?;
            let cs = cross_section(&spec, template, dep, samples)?;
            let fit = fit_hill(&cs).ok();
            let params = fit.as_ref().and_then(FitResult::hill);
            Ok(RobustnessRecord {
                register_size: n,
                num_solutions: m,
                schedule: template.kind,
                dependence: dep,
                k_iter: spec.optimal_iterations(),
                b: params.map_or(f64::NAN, |p| p.b),
                k: params.map_or(f64::NAN, |p| p.k),
                n_exp: params.map_or(f64::NAN, |p| p.n),
                c: params.map_or(f64::NAN, |p| p.c),
                sigma: fit.as_ref().map_or(f64::NAN, |f| f.sigma),
                converged: fit.as_ref().is_some_and(|f| f.converged),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);

    let mut iteration_steps = Vec::new();
    let mut previous = ProblemSpec::new(n_min, m)?.optimal_iterations();
    for n in n_min + 1..=n_max {
        let k = ProblemSpec::new(n, m)?.optimal_iterations();
        if k > previous {
            iteration_steps.push(n);
        }
        previous = k;
    }
    Ok(ScanOutput {
        records,
        iteration_steps,
    })
}

fn sort_records(records: &mut [RobustnessRecord]) {
    records.sort_by(|a, b| {
        (a.register_size, a.schedule, a.dependence, a.num_solutions).cmp(&(
            b.register_size,
            b.schedule,
            b.dependence,
            b.num_solutions,
        ))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Best,
    Worst,
}

/// How a schedule's best and worst dependences are designated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Designation {
    Fixed(Dependence),
    /// The candidate with the smallest fitted `k` at the largest scanned size
    /// not above [`SELECTION_N_MAX`].
    MinK(Vec<Dependence>),
}

pub fn designation(schedule: ScheduleKind, case: Case) -> Result<Designation> {
    use Dependence::*;
    use Designation::*;
    Ok(match (schedule, case) {
        (ScheduleKind::Oph, Case::Best) => Fixed(OmegaEqPhi),
        (ScheduleKind::Oph, Case::Worst) => Fixed(OmegaEq2PiMinusPhi),
        (ScheduleKind::Spm, Case::Best) => Fixed(OmegaEq2PiMinusPhi),
        (ScheduleKind::Spm, Case::Worst) => Fixed(OmegaEqPhi),
        (ScheduleKind::Acsp, Case::Best) => Fixed(PhiEqPi),
        (ScheduleKind::Acsp, Case::Worst) => Fixed(OmegaEqPi),
        (ScheduleKind::Acbp, Case::Best) => Fixed(PhiEqPi),
        (ScheduleKind::Acbp, Case::Worst) => MinK(vec![OmegaEqPhi, OmegaEq2PiMinusPhi]),
        (ScheduleKind::Hidp, Case::Best) => Fixed(OmegaEq2PiMinusPhi),
        (ScheduleKind::Hidp, Case::Worst) => MinK(vec![OmegaEqPhi, OmegaEqPi, PhiEqPi]),
        (ScheduleKind::Custom, _) => {
            return Err(Error::Unsupported(
                "custom schedules have no best/worst designation".into(),
            ))
        }
    })
}

/// Secondary-fit SSE of one candidate model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub model_id: ModelId,
    pub sse: f64,
}

/// One Hill parameter as a function of `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFit {
    /// Lower-SSE model.
    pub fit: FitResult,
    pub candidates: Vec<Candidate>,
    pub extrapolated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub schedule: ScheduleKind,
    pub case: Case,
    pub dependence: Dependence,
    /// How `dependence` was chosen.
    pub selection: String,
    pub points: usize,
    pub k: SeriesFit,
    pub b: SeriesFit,
    pub n: SeriesFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub schedule: ScheduleKind,
    pub dependence: Dependence,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub target_n: usize,
    pub fit_n_min: usize,
    pub cases: Vec<CaseSummary>,
    /// Schedules ordered by extrapolated `k`, most robust first.
    pub ranking_best: Vec<RankEntry>,
    pub ranking_worst: Vec<RankEntry>,
}

impl ComparisonReport {
    pub fn case(&self, schedule: ScheduleKind, case: Case) -> Option<&CaseSummary> {
        self.cases
            .iter()
            .find(|c| c.schedule == schedule && c.case == case)
    }
}

fn fit_series(data: &[(usize, f64)], target_n: usize) -> Result<SeriesFit> {
    let mut candidates = Vec::new();
    let mut best: Option<FitResult> = None;
    let mut last_error = None;
    for model_id in [ModelId::SatExp, ModelId::LogisticOffset] {
        match fit_secondary(data, model_id) {
            Ok(fit) if fit.sse.is_finite() => {
                candidates.push(Candidate {
                    model_id,
                    sse: fit.sse,
                });
                if best.as_ref().is_none_or(|b| fit.sse < b.sse) {
                    best = Some(fit);
                }
            }
            Ok(_) => {}
            Err(e) => last_error = Some(e),
        }
    }
    let fit = best.ok_or_else(|| {
        last_error.unwrap_or_else(|| Error::InsufficientData("no secondary model converged".into()))
    })?;
    Ok(SeriesFit {
        extrapolated: extrapolate(&fit, target_n),
        fit,
        candidates,
    })
}

fn series<'a>(
    records: &'a [RobustnessRecord],
    dep: Dependence,
) -> impl Iterator<Item = &'a RobustnessRecord> + 'a {
    records
        .iter()
        .filter(move |r| r.dependence == dep && r.register_size >= SECONDARY_N_MIN && r.usable())
}

fn select(records: &[RobustnessRecord], designation: &Designation) -> Result<(Dependence, String)> {
    match designation {
        Designation::Fixed(dep) => Ok((*dep, "fixed".into())),
        Designation::MinK(candidates) => {
            let mut best: Option<(Dependence, f64, usize)> = None;
            for &dep in candidates {
                let rec = records
                    .iter()
                    .filter(|r| {
                        r.dependence == dep && r.register_size <= SELECTION_N_MAX && r.usable()
                    })
                    .max_by_key(|r| r.register_size)
                    .ok_or_else(|| {
                        Error::InsufficientData(format!("no usable records for {dep}"))
                    })?;
                if best.is_none_or(|(_, k, _)| rec.k < k) {
                    best = Some((dep, rec.k, rec.register_size));
                }
            }
            let (dep, _, n) = best.expect("candidates are non-empty");
            let names: Vec<&str> = candidates.iter().map(|d| d.name()).collect();
            Ok((dep, format!("min k over {{{}}} at N={n}", names.join(", "))))
        }
    }
}

/// Secondary fits and extrapolation for one schedule's best or worst case.
pub fn summarize_case(
    records: &[RobustnessRecord],
    schedule: ScheduleKind,
    case: Case,
    target_n: usize,
) -> Result<CaseSummary> {
    let own: Vec<RobustnessRecord> = records
        .iter()
        .filter(|r| r.schedule == schedule)
        .cloned()
        .collect();
    if let Some(first) = own.first() {
        if own.iter().any(|r| r.num_solutions != first.num_solutions) {
            return Err(Error::InvalidArgument(format!(
                "{schedule} records mix solution counts"
            )));
        }
    }
    let (dependence, selection) = select(&own, &designation(schedule, case)?)?;
    let mut rows: Vec<&RobustnessRecord> = series(&own, dependence).collect();
    rows.sort_by_key(|r| r.register_size);
    rows.dedup_by_key(|r| r.register_size);
    let column = |get: fn(&RobustnessRecord) -> f64| -> Vec<(usize, f64)> {
        rows.iter().map(|r| (r.register_size, get(r))).collect()
    };
    let fit = |get| {
        fit_series(&column(get), target_n).map_err(|e| match e {
            Error::InsufficientData(msg) => {
                Error::InsufficientData(format!("{schedule} {case:?} ({dependence}): {msg}"))
            }
            other => other,
        })
    };
    Ok(CaseSummary {
        schedule,
        case,
        dependence,
        selection,
        points: rows.len(),
        k: fit(|r| r.k)?,
        b: fit(|r| r.b)?,
        n: fit(|r| r.n_exp)?,
    })
}

fn ranking(cases: &[CaseSummary], case: Case) -> Vec<RankEntry> {
    let mut entries: Vec<RankEntry> = cases
        .iter()
        .filter(|c| c.case == case)
        .map(|c| RankEntry {
            schedule: c.schedule,
            dependence: c.dependence,
            k: c.k.extrapolated,
        })
        .collect();
    entries.sort_by(|a, b| b.k.total_cmp(&a.k).then(a.schedule.cmp(&b.schedule)));
    entries
}

/// Best and worst cases of every named schedule present in `records`.
pub fn compare(records: &[RobustnessRecord], target_n: usize) -> Result<ComparisonReport> {
    let mut schedules: Vec<ScheduleKind> = records
        .iter()
        .map(|r| r.schedule)
        .filter(|&s| s != ScheduleKind::Custom)
        .collect();
    schedules.sort_unstable();
    schedules.dedup();
    if schedules.is_empty() {
        return Err(Error::InsufficientData(
            "no records of a named schedule".into(),
        ));
    }
    let cases = schedules
        .iter()
        .flat_map(|&s| [(s, Case::Best), (s, Case::Worst)])
        .map(|(s, c)| summarize_case(records, s, c, target_n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        target_n,
        fit_n_min: SECONDARY_N_MIN,
        ranking_best: ranking(&cases, Case::Best),
        ranking_worst: ranking(&cases, Case::Worst),
        cases,
    })
}

pub fn write_records<W: Write>(records: &[RobustnessRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.register_size,
            r.num_solutions,
            r.schedule,
            r.dependence,
            r.k_iter,
            r.b,
            r.k,
            r.n_exp,
            r.c,
            r.sigma,
            r.converged
        )?;
    }
    Ok(())
}

pub fn save_records(records: &[RobustnessRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records(records, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_records(path: &Path) -> Result<Vec<RobustnessRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != RECORD_HEADER {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("expected header {RECORD_HEADER}"),
        });
    }
    reader
        .deserialize::<RobustnessRecord>()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

pub fn save_report(report: &ComparisonReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, report).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_report(path: &Path) -> Result<ComparisonReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}
