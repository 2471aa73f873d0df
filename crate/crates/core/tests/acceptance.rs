//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

use std::collections::HashMap;
use std::process::{Command, ExitCode};

use holoform::harness::{run_suite, Suite, SuiteConfig, SuiteReport};

const SEED: u64 = 20261014;

struct Runs(HashMap<(Suite, usize), SuiteReport>);

impl Runs {
    fn get(&mut self, suite: Suite, samples: usize) -> &SuiteReport {
        self.0.entry((suite, samples)).or_insert_with(|| {
            run_suite(&SuiteConfig::new(suite, SEED, samples)).unwrap_or_else(|e| panic!("{suite} did not run: {e}"))
        })
    }
}

/// `(suite, samples, check, pinned tolerance)`.
type Requirement = (Suite, usize, &'static str, f64);

fn evaluate(runs: &mut Runs, reqs: &[Requirement]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for &(suite, samples, name, pinned) in reqs {
        let report = runs.get(suite, samples);
        let Some(c) = report.checks.iter().find(|c| c.name == name) else {
            ok = false;
            parts.push(format!("{name}: missing"));
            continue;
        };
        let pass = c.error.is_none() && c.tolerance <= pinned && c.max_residual < pinned;
        ok &= pass;
        let detail = match &c.error {
            Some(e) => format!("error {e}"),
            None => format!("{:.3e} < {:.0e}", c.max_residual, pinned),
        };
        parts.push(format!("{name} [{samples}] {detail}{}", if pass { "" } else { " FAILED" }));
    }
    (ok, parts.join("; "))
}

fn determinism() -> (bool, String) {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_holoform"))
            .args(["check", "all", "--seed", "1", "--samples", "50"])
            .env_remove("HOLOFORM_SEED")
            .output()
            .expect("holoform binary runs")
    };
    let (a, b) = (run(), run());
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    let exit_ok = a.status.success() && b.status.success();
    let checks = holoform::harness::parse_report(&a.stdout).map(|r| r.checks.len()).unwrap_or(0);
    (
        identical && exit_ok && checks >= 25,
        format!("identical bytes: {identical}; exit 0: {exit_ok}; {checks} checks"),
    )
}

fn main() -> ExitCode {
    use Suite::*;
    let mut runs = Runs(HashMap::new());
    let criteria: Vec<(&str, Vec<Requirement>)> = vec![
        (
            "constant curvature -1 on PSL",
            vec![(PslCurvature, 500, "algebraic-sectional", 1e-9), (PslCurvature, 500, "chart-sectional", 1e-5)],
        ),
        ("bracket-norm identity", vec![(LieIdentities, 500, "bracket-norm", 1e-10)]),
        (
            "metric of the space of geodesics",
            vec![
                (GSpace, 200, "g-curvature", 1e-6),
                (GSpace, 100, "g-invariance", 1e-9),
                (GSpace, 200, "g-holomorphy", 1e-8),
            ],
        ),
        (
            "quadric space forms",
            vec![
                (Quadrics, 1000, "x2-curvature", 1e-5),
                (Quadrics, 1000, "x3-curvature", 1e-5),
                (Quadrics, 1000, "quadric-scaled-curvature", 1e-5),
            ],
        ),
        (
            "F-isometry",
            vec![
                (LieIdentities, 1000, "f-map-quadratic", 1e-13),
                (Quadrics, 1000, "f-image-unimodular", 1e-10),
                (Quadrics, 1000, "f-slice-trace-free", 1e-12),
            ],
        ),
        (
            "Rot_pi",
            vec![
                (RotpiCover, 500, "rotpi-membership", 1e-10),
                (RotpiCover, 500, "rotpi-equivariance", 1e-9),
                (RotpiCover, 500, "rotpi-reversal", 1e-12),
                (RotpiCover, 500, "rotpi-local-isometry", 1e-7),
            ],
        ),
        (
            "symmetric-space scaling and curvature",
            vec![
                (SymmetricScaling, 50, "scaling-h3", 1e-6),
                (SymmetricScaling, 50, "scaling-g", 1e-6),
                (SymmetricCurvature, 50, "curvature-formula-h3", 1e-6),
                (SymmetricCurvature, 50, "curvature-formula-g", 1e-6),
                (SymmetricCurvature, 50, "g2-curvature-minus-four", 1e-5),
            ],
        ),
        (
            "kernel self-consistency",
            vec![
                (PslCurvature, 500, "curvature-symmetries", 1e-8),
                (PslCurvature, 500, "energy-conservation", 1e-8),
                (PslCurvature, 500, "one-parameter-geodesic", 1e-6),
            ],
        ),
    ];

    let mut all = true;
    for (i, (title, reqs)) in criteria.iter().enumerate() {
        let (ok, detail) = evaluate(&mut runs, reqs);
        all &= ok;
        println!("criterion {} {}: {title}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    let (ok, detail) = determinism();
    all &= ok;
    println!("criterion 9 {}: determinism: {detail}", if ok { "PASS" } else { "FAIL" });

    if all {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
