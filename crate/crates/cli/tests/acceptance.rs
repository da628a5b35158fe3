//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinberry_cli::{run_sweep, Mode, Settings};
use spinberry_core::linalg::circular_distance;
use spinberry_core::model::{mixing_angle, spectrum};
use spinberry_core::phase::{
    berry_connection_integral, connection_via_operator, extract_phases,
    gauge_transform_and_reextract, predicted_berry_phase, propagate, simulate,
};
use spinberry_core::verify::{random_gauge, run_checks, VerifyOptions};
use spinberry_core::{FieldConfig, GeneratorSet, LevelParams, SimulationConfig, StateLabel};

const SLOW_OMEGA: f64 = 2.0 * PI / 1000.0;
const STEPS: u32 = 20_000;

fn params() -> LevelParams {
    LevelParams::new(1.0, 1.0).unwrap()
}

fn field(theta: f64, omega: f64) -> FieldConfig {
    FieldConfig::new(0.5, theta, omega, 0.0).unwrap()
}

fn gap() -> f64 {
    spectrum(&params(), 0.5).unwrap().gap()
}

fn geometric(theta: f64, omega: f64, label: StateLabel, steps: u32) -> f64 {
    let cfg = SimulationConfig::new(1, steps, 1, label).unwrap();
    simulate(&params(), &field(theta, omega), &cfg)
        .unwrap()
        .1
        .geometric_phase
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn berry_phase_reproduction() -> Outcome {
    let tol = 2e-2;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for label in StateLabel::ALL {
        let target = predicted_berry_phase(label, PI / 3.0, 1).unwrap();
        let got = geometric(PI / 3.0, SLOW_OMEGA, label, STEPS);
        let err = circular_distance(got, target);
        worst = worst.max(err);
        parts.push(format!(
            "n={label}: {got:.6} vs {target:.6} (err {err:.3e})"
        ));
    }
    Outcome {
        passed: worst <= tol,
        detail: format!("{}; tol {tol:e}", parts.join(", ")),
    }
}

fn solid_angle_law() -> Outcome {
    let tol = 2e-2;
    let mut settings = Settings::new();
    for (flag, value) in [("--axis", "theta"), ("--grid", "0:pi:9:lin")] {
        settings.merge_flag(flag, value).unwrap();
    }
    let cfg = settings.build(Mode::Sweep).unwrap();
    let result = run_sweep(&cfg).unwrap();
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for (theta, entry) in result.axis_values.iter().zip(&result.reports) {
        let err = match &entry.report {
            Some(r) => circular_distance(r.geometric_phase, r.predicted_geometric),
            None => f64::INFINITY,
        };
        let target = predicted_berry_phase(StateLabel::Plus1, *theta, 1).unwrap();
        assert_eq!(entry.report.map(|r| r.predicted_geometric), Some(target));
        worst = worst.max(err);
        errors.push(format!("{err:.2e}"));
    }
    let anchors = [0usize, 4]
        .iter()
        .map(|&k| {
            let g = result.reports[k].report.unwrap().geometric_phase;
            format!(
                "theta={:.4}: {:.3e}",
                result.axis_values[k],
                circular_distance(g, 0.0)
            )
        })
        .collect::<Vec<_>>();
    Outcome {
        passed: worst <= tol,
        detail: format!(
            "pointwise errors [{}]; anchors {}; tol {tol:e}",
            errors.join(", "),
            anchors.join(", ")
        ),
    }
}

fn three_routes() -> (Outcome, Outcome) {
    let tol = 1e-6;
    let p = params();
    let alpha = mixing_angle(&p, 0.5).unwrap();
    let gens = GeneratorSet::spin_one();
    let mut worst_b: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for k in 0..=8 {
        let theta = PI * f64::from(k) / 8.0;
        let f = field(theta, SLOW_OMEGA);
        let period = f.period().unwrap();
        for label in StateLabel::ALL {
            let b = berry_connection_integral(&p, &f, label, 100_000).unwrap();
            let exact = 2.0 * PI * f64::from(label.projection()) * theta.cos();
            worst_b = worst_b.max((b - exact).abs());
            let c = connection_via_operator(label, alpha, theta, SLOW_OMEGA, &gens);
            let c_total = (num_complex::Complex64::i() * c * period).re;
            worst_c = worst_c.max((c_total - b).abs());
        }
    }
    let routes = Outcome {
        passed: worst_b <= tol && worst_c <= tol,
        detail: format!(
            "max |B - 2 pi n cos theta| = {worst_b:.3e}, max |i C T - B| = {worst_c:.3e} over 9 tilts x 4 states; tol {tol:e}"
        ),
    };

    // route A approaches route B as omega falls
    let ladder: Vec<f64> = [100.0, 200.0, 400.0, 800.0]
        .iter()
        .map(|k| {
            let f = field(PI / 3.0, gap() / k);
            let b = berry_connection_integral(&p, &f, StateLabel::Plus1, 100_000).unwrap();
            circular_distance(geometric(PI / 3.0, gap() / k, StateLabel::Plus1, STEPS), b)
        })
        .collect();
    let ratios: Vec<f64> = ladder.windows(2).map(|w| w[0] / w[1]).collect();
    let monotone = ladder.windows(2).all(|w| w[1] < w[0]);
    let in_band = ratios.iter().all(|r| (1.5..=4.0).contains(r));
    let scaling = Outcome {
        passed: monotone && in_band,
        detail: format!(
            "errors at omega = g/100..g/800: [{}]; halving ratios [{}]; band [1.5, 4]",
            ladder
                .iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
                .join(", "),
            ratios
                .iter()
                .map(|r| format!("{r:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    (routes, scaling)
}

fn identity_suite() -> Outcome {
    let summary = run_checks(&VerifyOptions::default());
    let named = [
        "class-angle relation",
        "wigner construction",
        "bch conjugation",
        "degenerate cross terms",
        "lab eigen relation",
    ];
    let listed = summary
        .checks
        .iter()
        .filter(|c| named.contains(&c.name))
        .map(|c| format!("{} {:.2e} <= {:.0e}", c.name, c.defect, c.tolerance))
        .collect::<Vec<_>>();
    assert_eq!(listed.len(), named.len());
    Outcome {
        passed: summary.all_passed(),
        detail: format!(
            "{}; {} of {} checks pass",
            listed.join(", "),
            summary.checks.iter().filter(|c| c.passed).count(),
            summary.checks.len()
        ),
    }
}

fn gauge_invariance() -> Outcome {
    let tol = 1e-8;
    let p = params();
    let f = field(PI / 3.0, SLOW_OMEGA);
    let cfg = SimulationConfig::new(1, STEPS, 1, StateLabel::Plus1).unwrap();
    let traj = propagate(&p, &f, &cfg).unwrap();
    let energies = spectrum(&p, 0.5).unwrap();
    let base = extract_phases(&traj, &energies, &cfg, &f)
        .unwrap()
        .geometric_phase;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let period = f.period().unwrap();
    let worst = (0..100)
        .map(|_| {
            let lambda = random_gauge(&mut rng, period);
            let r = gauge_transform_and_reextract(&traj, &lambda, &energies, &cfg, &f).unwrap();
            circular_distance(r.geometric_phase, base)
        })
        .fold(0.0, f64::max);
    Outcome {
        passed: worst <= tol,
        detail: format!("max shift over 100 random gauges {worst:.3e}; tol {tol:e}"),
    }
}

fn numerical_hygiene() -> Outcome {
    let p = params();
    let f = field(PI / 3.0, SLOW_OMEGA);
    let long = SimulationConfig::new(1, 100_000, 100, StateLabel::Plus1).unwrap();
    let norm_defect = propagate(&p, &f, &long).unwrap().final_norm_defect();

    let phase = |steps| {
        let cfg = SimulationConfig::new(1, steps, 1, StateLabel::Plus1).unwrap();
        let r = simulate(&p, &f, &cfg).unwrap().1;
        r.total_phase - r.dynamic_phase
    };
    let reference = phase(64_000);
    let coarse = (phase(4000) - reference).abs();
    let fine = (phase(8000) - reference).abs();
    let ratio = coarse / fine;
    Outcome {
        passed: norm_defect <= 1e-10 && (3.0..=5.0).contains(&ratio),
        detail: format!(
            "norm defect over 1e5 steps {norm_defect:.3e} (tol 1e-10); phase error 4000 steps {coarse:.3e}, 8000 steps {fine:.3e}, ratio {ratio:.3} (band [3, 5])"
        ),
    }
}

fn cli_contract() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_spinberry");
    let status = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .output()
            .expect("spawn spinberry")
            .status
            .code()
    };
    let clean = status(&["verify"]);
    let faulty = status(&["verify", "--inject-j1-flip"]);

    let sweep = |format: &str| {
        let out = Command::new(bin)
            .env("SOURCE_DATE_EPOCH", "0")
            .args([
                "sweep",
                "--axis",
                "theta",
                "--grid",
                "0:pi:5:lin",
                "--steps",
                "2000",
            ])
            .args(["--seed", "0", "--format", format])
            .output()
            .expect("spawn spinberry");
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let csv_same = sweep("csv") == sweep("csv");
    let json_same = sweep("json") == sweep("json");
    Outcome {
        passed: clean == Some(0) && faulty == Some(3) && csv_same && json_same,
        detail: format!(
            "verify exit {clean:?} (want 0), with J1 flip {faulty:?} (want 3); repeated sweep identical: csv {csv_same}, json {json_same}"
        ),
    }
}

fn main() {
    let (routes, scaling) = three_routes();
    let results = [
        ("1 berry phase reproduction", berry_phase_reproduction()),
        ("2 solid-angle law across theta", solid_angle_law()),
        ("3 three-route agreement", routes),
        ("4 adiabatic scaling", scaling),
        ("5 identity suite", identity_suite()),
        ("6 gauge invariance", gauge_invariance()),
        ("7 numerical hygiene", numerical_hygiene()),
        ("8 cli contract", cli_contract()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict}: {}", outcome.detail);
        failed += usize::from(!outcome.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
