//! Self-check suite: matrix identities, eigen-consistency, connection
//! identities and gauge invariance, each reduced to one measured defect.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{adjoint, circular_distance, mat_mul, OperatorMatrix};
use crate::model::{
    lab_frame_eigenstates, lab_frame_eigenstates_by_rotation, lab_hamiltonian, mixing_angle,
    rotating_frame_eigenstates, rotating_frame_hamiltonian, spectrum, FieldConfig, LevelParams,
    MixingAngle, StateLabel,
};
use crate::phase::{
    berry_connection_integral, connection_rate, connection_via_operator, degenerate_cross_terms,
    extract_phases, gauge_transform_and_reextract, propagate, SimulationConfig,
};
use crate::rotations::{
    axis_rotation, cartesian_r, cartesian_r2, cartesian_r3, class_angle_defect,
    composite_rotation_defect, conjugated_j3, conjugated_j3_by_exponential, extended_r_dagger,
    spherical_basis_change, spherical_r, spherical_r2, spherical_r3, wigner_d1, EulerPair,
    GeneratorSet,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub defect: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
    pub generators: GeneratorSet,
    pub params: LevelParams,
    pub e_mag: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance_scale: 1.0,
            generators: GeneratorSet::spin_one(),
            params: LevelParams { e1: 1.0, d: 1.0 },
            e_mag: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub checks: Vec<CheckOutcome>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type CheckFn = fn(&VerifyOptions, &mut ChaCha8Rng) -> Result<f64>;

const CHECKS: &[(&str, f64, CheckFn)] = &[
    ("generator commutators", 1e-14, generator_algebra),
    ("class-angle relation", 1e-13, class_angle),
    ("composite rotation", 1e-14, composite_rotation),
    ("cartesian closed form", 1e-14, cartesian_closed_form),
    ("spherical basis change", 1e-13, spherical_change),
    ("spherical closed form", 1e-14, spherical_closed_form),
    ("wigner construction", 1e-14, wigner_construction),
    ("extended rotation unitarity", 1e-13, extended_unitarity),
    ("bch conjugation", 1e-12, bch_conjugation),
    ("rotating-frame eigenstates", 1e-12, rotating_eigen_relation),
    ("lab eigenstates closed form", 1e-14, lab_closed_form),
    ("lab eigen relation", 1e-12, lab_eigen_relation),
    ("connection integral", 1e-6, connection_integral),
    ("operator connection", 1e-8, operator_connection),
    ("degenerate cross terms", 1e-8, cross_terms),
    ("propagation norm", 1e-10, propagation_norm),
    ("gauge invariance", 1e-8, gauge_invariance),
];

/// Runs every check. A check whose evaluation itself errors is reported
/// as failed with an infinite defect.
pub fn run_checks(opts: &VerifyOptions) -> VerifySummary {
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(k, &(name, tolerance, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
            let defect = check(opts, &mut rng).unwrap_or(f64::INFINITY);
            let tolerance = tolerance * opts.tolerance_scale;
            CheckOutcome {
                name,
                tolerance,
                defect,
                passed: defect <= tolerance,
            }
        })
        .collect();
    VerifySummary { checks }
}

fn random_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.random_range(0.0..=PI), rng.random_range(-PI..PI))
}

fn random_alpha(rng: &mut ChaCha8Rng) -> MixingAngle {
    MixingAngle::new(rng.random_range(-0.78..0.78)).expect("inside (-pi/4, pi/4]")
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values
        .into_iter()
        .try_fold(0.0, |acc: f64, v| Ok(acc.max(v?)))
}

fn generator_algebra(o: &VerifyOptions, _: &mut ChaCha8Rng) -> Result<f64> {
    Ok(o.generators.commutation_defect())
}

fn class_angle(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let mut unit = || {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.map(|x| x / n)
        };
        let (g_axis, axis) = (unit(), unit());
        let g = axis_rotation(g_axis, rng.random_range(-PI..PI));
        class_angle_defect(&g, axis, rng.random_range(-PI..PI))
    }))
}

fn composite_rotation(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi) = random_pair(rng);
        Ok(composite_rotation_defect(theta, phi, 1))
    }))
}

fn cartesian_closed_form(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi) = random_pair(rng);
        let product = mat_mul(&cartesian_r2(theta), &cartesian_r3(phi))?;
        cartesian_r(theta, phi).max_abs_diff(&product)
    }))
}

fn spherical_change(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let s = spherical_basis_change();
    let conjugate = |m: &OperatorMatrix| mat_mul(&mat_mul(&s, m)?, &adjoint(&s));
    max_of((0..50).map(|_| {
        let angle = rng.random_range(-PI..PI);
        let d2 = conjugate(&cartesian_r2(angle))?.max_abs_diff(&spherical_r2(angle))?;
        let d3 = conjugate(&cartesian_r3(angle))?.max_abs_diff(&spherical_r3(angle))?;
        Ok(d2.max(d3))
    }))
}

fn spherical_closed_form(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi) = random_pair(rng);
        // the spherical composite carries the conjugated azimuthal factor
        let product = mat_mul(&spherical_r2(theta), &spherical_r3(-phi))?;
        spherical_r(theta, phi).max_abs_diff(&product)
    }))
}

fn wigner_construction(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi) = random_pair(rng);
        let d = wigner_d1(-theta);
        let built = OperatorMatrix::general(nalgebra::DMatrix::from_fn(3, 3, |m, n| {
            let projection = 1.0 - n as f64;
            d.get(m, n) * C64::from_polar(1.0, projection * phi)
        }))?;
        spherical_r(theta, phi).max_abs_diff(&built)
    }))
}

fn extended_unitarity(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi) = random_pair(rng);
        Ok(extended_r_dagger(theta, phi).unitarity_defect())
    }))
}

fn bch_conjugation(o: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..20).map(|_| {
        let theta = rng.random_range(0.0..=PI);
        let series = conjugated_j3(theta, &o.generators);
        series.max_abs_diff(&conjugated_j3_by_exponential(theta, &o.generators)?)
    }))
}

fn rotating_eigen_relation(o: &VerifyOptions, _: &mut ChaCha8Rng) -> Result<f64> {
    let h = rotating_frame_hamiltonian(&o.params, o.e_mag);
    let alpha = mixing_angle(&o.params, o.e_mag)?;
    let energies = spectrum(&o.params, o.e_mag)?;
    max_of(StateLabel::ALL.map(|label| {
        let phi = rotating_frame_eigenstates(alpha)[label.index()];
        let expected = phi.scaled(C64::new(energies.energy(label), 0.0));
        Ok(h.apply(&phi)?.max_abs_diff(&expected))
    }))
}

fn lab_closed_form(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi) = random_pair(rng);
        let alpha = random_alpha(rng);
        let orientation = EulerPair::new(theta, phi)?;
        let closed = lab_frame_eigenstates(alpha, orientation);
        let rotated = lab_frame_eigenstates_by_rotation(alpha, orientation);
        Ok(closed
            .iter()
            .zip(&rotated)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max))
    }))
}

fn lab_eigen_relation(o: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let alpha = mixing_angle(&o.params, o.e_mag)?;
    let energies = spectrum(&o.params, o.e_mag)?;
    max_of((0..20).map(|_| {
        let (theta, phi0) = random_pair(rng);
        let f = FieldConfig::new(o.e_mag, theta, rng.random_range(-1.0..1.0), phi0)?;
        let t = rng.random_range(0.0..100.0);
        let h = lab_hamiltonian(&o.params, &f, t);
        let states = lab_frame_eigenstates(alpha, f.orientation_at(t));
        max_of(StateLabel::ALL.map(|label| {
            let psi = states[label.index()];
            let expected = psi.scaled(C64::new(energies.energy(label), 0.0));
            Ok(h.apply(&psi)?.max_abs_diff(&expected))
        }))
    }))
}

fn connection_integral(o: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..4).map(|_| {
        let theta = rng.random_range(0.0..=PI);
        let f = FieldConfig::new(o.e_mag, theta, 2.0 * PI / 1000.0, 0.0)?;
        max_of(StateLabel::ALL.map(|label| {
            let b = berry_connection_integral(&o.params, &f, label, 20_000)?;
            Ok((b - 2.0 * PI * f64::from(label.projection()) * theta.cos()).abs())
        }))
    }))
}

fn operator_connection(o: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi0) = random_pair(rng);
        let omega = rng.random_range(-0.5..0.5);
        let alpha = random_alpha(rng);
        let f = FieldConfig::new(o.e_mag, theta, omega, phi0)?;
        let t = rng.random_range(0.0..50.0);
        Ok(StateLabel::ALL
            .map(|label| {
                let c = connection_via_operator(label, alpha, theta, omega, &o.generators);
                (c - connection_rate(alpha, &f, label, t, 1e-4)).norm()
            })
            .into_iter()
            .fold(0.0, f64::max))
    }))
}

fn cross_terms(_: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    max_of((0..50).map(|_| {
        let (theta, phi) = random_pair(rng);
        Ok(degenerate_cross_terms(theta, phi, rng.random_range(-0.1..0.1))?.max_norm())
    }))
}

fn short_run(
    o: &VerifyOptions,
    label: StateLabel,
    steps: u32,
) -> Result<(FieldConfig, SimulationConfig)> {
    let f = FieldConfig::new(o.e_mag, PI / 3.0, 2.0 * PI / 200.0, 0.0)?;
    Ok((f, SimulationConfig::new(1, steps, 1, label)?))
}

fn propagation_norm(o: &VerifyOptions, _: &mut ChaCha8Rng) -> Result<f64> {
    let (f, cfg) = short_run(o, StateLabel::Plus1, 20_000)?;
    Ok(propagate(&o.params, &f, &cfg)?.final_norm_defect())
}

fn gauge_invariance(o: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (f, cfg) = short_run(o, StateLabel::Plus1, 4000)?;
    let traj = propagate(&o.params, &f, &cfg)?;
    let energies = spectrum(&o.params, o.e_mag)?;
    let base = extract_phases(&traj, &energies, &cfg, &f)?.geometric_phase;
    let period = f.period().expect("rotating field");
    max_of((0..10).map(|_| {
        let lambda = random_gauge(rng, period);
        let moved = gauge_transform_and_reextract(&traj, &lambda, &energies, &cfg, &f)?;
        Ok(circular_distance(moved.geometric_phase, base))
    }))
}

/// Random periodic gauge: five harmonics of the period with total
/// amplitude at most `pi`.
pub fn random_gauge(rng: &mut impl Rng, period: f64) -> impl Fn(f64) -> f64 {
    let terms: Vec<(f64, f64, f64)> = (1..=5)
        .map(|k| {
            (
                f64::from(k),
                rng.random_range(-PI / 5.0..PI / 5.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    move |t: f64| {
        terms
            .iter()
            .map(|&(k, amp, shift)| amp * (2.0 * PI * k * t / period + shift).sin())
            .sum()
    }
}
