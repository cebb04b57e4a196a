//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;

use phaselab::grover::apply_iteration;
use phaselab::hillfit::{fit_hill_xy, hill_eval, hill_gradient};
use phaselab::pipeline::{compare, scan, Case, RobustnessRecord};
use phaselab::verify::{self, SuiteReport};
use phaselab::{run, Dependence, HillParams, PhaseSchedule, ProblemSpec, ScheduleKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite(report: SuiteReport, min_checks: usize) -> Outcome {
    let mut detail = format!(
        "{} checks, {} failures, max error {:.3e}",
        report.checks, report.failures, report.max_error
    );
    for note in &report.notes {
        detail.push_str("; ");
        detail.push_str(note);
    }
    Outcome {
        pass: report.passed() && report.checks >= min_checks,
        detail,
    }
}

fn analytic_vectors() -> Outcome {
    suite(verify::analytic_n9(apply_iteration).unwrap(), 256)
}

fn closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=110 {
        let spec = ProblemSpec::new(n, 1).unwrap();
        let k = spec.optimal_iterations() as f64;
        let p = run(&spec, &PhaseSchedule::new(ScheduleKind::Oph, PI, PI), None).unwrap();
        let expected = ((2.0 * k + 1.0) * spec.theta() / 2.0).sin().powi(2);
        worst = worst.max((p - expected).abs());
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("N = 2..110, max error {worst:.3e}"),
    }
}

fn oracle() -> Outcome {
    suite(verify::oracle(apply_iteration).unwrap(), 6000)
}

fn duality() -> Outcome {
    suite(verify::duality(apply_iteration).unwrap(), 7500)
}

/// `(N, dependence, b, k, n, σ)`
const REFERENCE: [(usize, Dependence, f64, f64, f64, f64); 12] = [
    (
        9,
        Dependence::OmegaEqPhi,
        0.99162,
        2.21657,
        6.08517,
        0.00927713,
    ),
    (
        9,
        Dependence::OmegaEq2PiMinusPhi,
        0.988603,
        0.475057,
        2.72101,
        0.0733959,
    ),
    (
        9,
        Dependence::OmegaEqPi,
        0.957434,
        1.02292,
        3.16995,
        0.0347275,
    ),
    (
        36,
        Dependence::OmegaEqPhi,
        0.970608,
        2.03089,
        5.81106,
        0.0275356,
    ),
    (
        36,
        Dependence::OmegaEq2PiMinusPhi,
        0.970676,
        0.275992,
        3.27181,
        0.0379211,
    ),
    (
        36,
        Dependence::OmegaEqPi,
        0.963316,
        0.557972,
        3.4133,
        0.0406315,
    ),
    (
        72,
        Dependence::OmegaEqPhi,
        0.974974,
        2.04358,
        6.1420,
        0.0292556,
    ),
    (
        72,
        Dependence::OmegaEq2PiMinusPhi,
        0.972984,
        0.189477,
        3.2802,
        0.0310133,
    ),
    (
        72,
        Dependence::OmegaEqPi,
        0.968527,
        0.381387,
        3.3689,
        0.0380029,
    ),
    (
        104,
        Dependence::OmegaEqPhi,
        0.985716,
        2.1367,
        7.15433,
        0.0251211,
    ),
    (
        104,
        Dependence::OmegaEq2PiMinusPhi,
        0.975118,
        0.140599,
        3.12711,
        0.0303656,
    ),
    (
        104,
        Dependence::OmegaEqPi,
        0.969398,
        0.28186,
        3.18194,
        0.0399776,
    ),
];

fn find(records: &[RobustnessRecord], n: usize, dep: Dependence) -> &RobustnessRecord {
    records
        .iter()
        .find(|r| r.register_size == n && r.dependence == dep)
        .expect("record present")
}

fn reference_fits(oph: &[RobustnessRecord]) -> Outcome {
    let mut bad = Vec::new();
    let mut worst_k: f64 = 0.0;
    for (n, dep, b, k, nn, sigma) in REFERENCE {
        let r = find(oph, n, dep);
        let dk = (r.k - k).abs() / k;
        worst_k = worst_k.max(dk);
        let ok = r.converged
            && (r.b - b).abs() <= 0.03
            && dk <= 0.15
            && (r.n_exp - nn).abs() / nn <= 0.20
            && r.sigma <= 2.0 * sigma
            && r.sigma >= 0.5 * sigma;
        if !ok {
            bad.push(format!(
                "N={n} {dep}: b={:.5} k={:.5} n={:.4} sigma={:.5}",
                r.b, r.k, r.n_exp, r.sigma
            ));
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("12 rows, max relative k error {worst_k:.3}")
        } else {
            bad.join("; ")
        },
    }
}

fn extrapolations(records: &[RobustnessRecord]) -> Outcome {
    let report = compare(records, 1000).unwrap();
    let expected = [
        (ScheduleKind::Oph, Case::Best, 2.08, 0.976),
        (ScheduleKind::Oph, Case::Worst, 0.18, 0.976),
        (ScheduleKind::Acsp, Case::Best, 2.05, 0.976),
        (ScheduleKind::Acsp, Case::Worst, 0.28, 0.953),
        (ScheduleKind::Acbp, Case::Best, 2.05, 0.977),
        (ScheduleKind::Acbp, Case::Worst, 1.46, 0.972),
        (ScheduleKind::Hidp, Case::Best, 1.54, 0.954),
        (ScheduleKind::Hidp, Case::Worst, 0.37, 0.976),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (schedule, case, k, b) in expected {
        let s = report.case(schedule, case).expect("case summarized");
        let (gk, gb) = (s.k.extrapolated, s.b.extrapolated);
        let ok = (gk - k).abs() <= 0.15 && (gb - b).abs() <= 0.03;
        pass &= ok;
        parts.push(format!(
            "{schedule} {case:?} ({}): k={gk:.3} b={gb:.3}{}",
            s.dependence,
            if ok { "" } else { " FAIL" }
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn orderings(records: &[RobustnessRecord]) -> Outcome {
    let k = |schedule: ScheduleKind, dep: Dependence| {
        records
            .iter()
            .find(|r| r.register_size == 100 && r.schedule == schedule && r.dependence == dep)
            .expect("record present")
            .k
    };
    use Dependence::*;
    let oph = k(ScheduleKind::Oph, OmegaEqPhi) > k(ScheduleKind::Oph, OmegaEqPi)
        && k(ScheduleKind::Oph, OmegaEqPi) > k(ScheduleKind::Oph, OmegaEq2PiMinusPhi);
    let spm = k(ScheduleKind::Spm, OmegaEq2PiMinusPhi) > k(ScheduleKind::Spm, OmegaEqPi)
        && k(ScheduleKind::Spm, OmegaEqPi) > k(ScheduleKind::Spm, OmegaEqPhi);
    let argmax = |schedule| {
        Dependence::ALL
            .into_iter()
            .max_by(|&a, &b| k(schedule, a).total_cmp(&k(schedule, b)))
            .unwrap()
    };
    let acsp = argmax(ScheduleKind::Acsp) == PhiEqPi;
    let hidp = argmax(ScheduleKind::Hidp) == OmegaEq2PiMinusPhi;
    Outcome {
        pass: oph && spm && acsp && hidp,
        detail: format!(
            "OPH {oph}, SPM {spm}, ACSP max at {}, HIDP max at {}",
            argmax(ScheduleKind::Acsp),
            argmax(ScheduleKind::Hidp)
        ),
    }
}

fn fit_machinery() -> Outcome {
    let x: Vec<f64> = (0..1001).map(|i| TAU * i as f64 / 1000.0).collect();
    let truth = HillParams::new(0.93, 1.7, 5.5, 3.3).unwrap();
    let y: Vec<f64> = x.iter().map(|&v| hill_eval(v, &truth)).collect();
    let fit = fit_hill_xy(&x, &y).unwrap();
    let got = fit.hill().unwrap();
    let recovery = got
        .as_array()
        .iter()
        .zip(truth.as_array())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut jac: f64 = 0.0;
    for i in 0..100 {
        let phi = 0.05 + 6.2 * i as f64 / 99.0;
        if (phi - truth.c).abs() <= 0.01 {
            continue;
        }
        let g = hill_gradient(phi, &truth);
        let base = truth.as_array();
        for (p, &gp) in g.iter().enumerate() {
            let h = 1e-6 * base[p].abs().max(1.0);
            let mut plus = base;
            let mut minus = base;
            plus[p] += h;
            minus[p] -= h;
            let make = |a: [f64; 4]| HillParams {
                b: a[0],
                k: a[1],
                n: a[2],
                c: a[3],
            };
            let fd = (hill_eval(phi, &make(plus)) - hill_eval(phi, &make(minus))) / (2.0 * h);
            jac = jac.max((fd - gp).abs() / gp.abs().max(1.0));
        }
    }

    let again = fit_hill_xy(&x, &y).unwrap();
    let deterministic = again
        .params
        .iter()
        .zip(&fit.params)
        .all(|(a, b)| a.to_bits() == b.to_bits())
        && again.sigma.to_bits() == fit.sigma.to_bits();
    Outcome {
        pass: recovery <= 1e-6 && jac <= 1e-6 && deterministic,
        detail: format!(
            "recovery error {recovery:.2e}, Jacobian error {jac:.2e}, deterministic {deterministic}"
        ),
    }
}

fn equivalences() -> Outcome {
    suite(verify::equivalences(apply_iteration).unwrap(), 9 * 2 * 625)
}

fn phase_matching() -> Outcome {
    suite(verify::phase_match(apply_iteration).unwrap(), 208)
}

fn main() -> ExitCode {
    let all: Vec<Dependence> = Dependence::ALL.to_vec();
    let mut records = Vec::new();
    for kind in ScheduleKind::NAMED {
        let template = PhaseSchedule::new(kind, 0.0, 0.0);
        records.extend(scan(2..=110, 1, &template, &all, 1001).unwrap().records);
    }
    let oph: Vec<RobustnessRecord> = records
        .iter()
        .filter(|r| r.schedule == ScheduleKind::Oph)
        .cloned()
        .collect();

    let results = [
        ("analytic N=9 vectors", analytic_vectors()),
        ("closed-form Grover", closed_form()),
        ("oracle equivalence", oracle()),
        ("kernel duality", duality()),
        (
            "reference Hill fits at N = 9, 36, 72, 104",
            reference_fits(&oph),
        ),
        ("N=1000 extrapolations", extrapolations(&records)),
        ("orderings at N=100", orderings(&records)),
        ("fit machinery", fit_machinery()),
        ("schedule equivalences", equivalences()),
        ("phase-matching angle", phase_matching()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", i + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
