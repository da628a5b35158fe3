//! Time evolution and Berry-phase extraction.
//!
//! Three independent routes lead to the geometric phase:
//!
//! * **propagation**: integrate the Schrödinger equation with the
//!   laboratory Hamiltonian and split the accumulated overlap phase into
//!   dynamic and geometric parts ([`propagate`], [`extract_phases`]);
//! * **connection integral**: integrate `i psi_n^dagger dpsi_n/dt` over one
//!   revolution using the closed-form eigenstates and finite differences
//!   ([`berry_connection_integral`]);
//! * **operator formula**: evaluate `phi_n^dagger R dR^dagger/dt phi_n`
//!   through the conjugated generator ([`connection_via_operator`]).
//!
//! The integrator is the exponential midpoint rule: each step applies the
//! exact exponential of the Hamiltonian sampled at the step midpoint, which
//! is unitary and second-order accurate.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{accumulate_phase, expm_minus_i, overlap, wrap_phase, StateVector, I, ZERO};
use crate::model::{
    lab_frame_eigenstates, lab_hamiltonian, mixing_angle, spectrum, FieldConfig, LevelParams,
    MixingAngle, Spectrum, StateLabel,
};
use crate::rotations::{conjugated_j3, EulerPair, GeneratorSet};

/// Final norm defect beyond which a propagation is rejected.
pub const NORM_GUARD: f64 = 1e-8;
/// Imaginary residue of the connection integral beyond which the finite
/// differences are considered broken.
pub const DERIVATIVE_GUARD: f64 = 1e-6;
/// Default centered-difference step, as a fraction of one period.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-6;
pub const MIN_STEPS_PER_PERIOD: u32 = 100;
pub const MIN_CONNECTION_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub periods: u32,
    pub steps_per_period: u32,
    pub record_stride: u32,
    pub state: StateLabel,
}

impl SimulationConfig {
    pub fn new(
        periods: u32,
        steps_per_period: u32,
        record_stride: u32,
        state: StateLabel,
    ) -> Result<Self> {
        let cfg = Self {
            periods,
            steps_per_period,
            record_stride,
            state,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.periods == 0 {
            return Err(Error::Usage("periods must be at least 1".into()));
        }
        if self.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::Usage(format!(
                "steps per period must be at least {MIN_STEPS_PER_PERIOD}, got {}",
                self.steps_per_period
            )));
        }
        if self.record_stride == 0 || !self.steps_per_period.is_multiple_of(self.record_stride) {
            return Err(Error::Usage(format!(
                "record stride {} must be positive and divide steps per period {}",
                self.record_stride, self.steps_per_period
            )));
        }
        Ok(())
    }
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            periods: 1,
            steps_per_period: 20_000,
            record_stride: 1,
            state: StateLabel::Plus1,
        }
    }
}

/// Recorded evolution of one initial eigenstate.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `<psi_n(t)|Psi(t)>` against the instantaneous eigenstate.
    pub reference_overlaps: Vec<C64>,
    pub label: StateLabel,
    pub alpha: MixingAngle,
    pub field: FieldConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn final_norm_defect(&self) -> f64 {
        (self.final_state().norm() - 1.0).abs()
    }

    /// Instantaneous eigenstate `psi_n(t)` for this trajectory's label.
    pub fn reference_state(&self, t: f64) -> StateVector {
        lab_frame_eigenstates(self.alpha, self.field.orientation_at(t))[self.label.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    /// Continuously tracked phase of the state relative to its start.
    pub total_phase: f64,
    pub dynamic_phase: f64,
    /// `total - dynamic`, wrapped into `(-pi, pi]`.
    pub geometric_phase: f64,
    pub predicted_geometric: f64,
    pub solid_angle: f64,
    pub leakage: f64,
    pub final_norm_defect: f64,
}

/// Propagates `psi_n(0)` over `cfg.periods` revolutions of the field.
pub fn propagate(p: &LevelParams, f: &FieldConfig, cfg: &SimulationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let period = f
        .period()
        .ok_or_else(|| Error::Usage("a static field (omega = 0) has no rotation period".into()))?;
    let steps = u64::from(cfg.periods) * u64::from(cfg.steps_per_period);
    propagate_span(
        p,
        f,
        cfg.state,
        period * f64::from(cfg.periods),
        steps,
        cfg.record_stride,
    )
}

/// Propagates `psi_n(0)` over `[0, duration]` in `steps` midpoint steps,
/// recording every `record_stride`-th step (plus the initial state).
pub fn propagate_span(
    p: &LevelParams,
    f: &FieldConfig,
    label: StateLabel,
    duration: f64,
    steps: u64,
    record_stride: u32,
) -> Result<Trajectory> {
    p.validate()?;
    f.validate()?;
    if !(duration > 0.0 && duration.is_finite()) || steps == 0 || record_stride == 0 {
        return Err(Error::Usage(format!(
            "invalid propagation span: duration {duration}, {steps} steps, stride {record_stride}"
        )));
    }
    let alpha = mixing_angle(p, f.e_mag)?;
    let energies = spectrum(p, f.e_mag)?;
    let dt = duration / steps as f64;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        reference_overlaps: Vec::new(),
        label,
        alpha,
        field: *f,
    };
    let mut psi = traj.reference_state(0.0);
    record(&mut traj, 0.0, psi);

    for k in 0..steps {
        let midpoint = (k as f64 + 0.5) * dt;
        let u = expm_minus_i(&lab_hamiltonian(p, f, midpoint), dt)?;
        psi = u.apply(&psi)?;
        if (k + 1) % u64::from(record_stride) == 0 || k + 1 == steps {
            record(&mut traj, (k + 1) as f64 * dt, psi);
        }
    }

    let defect = traj.final_norm_defect();
    if !(defect <= NORM_GUARD) {
        return Err(Error::IntegrationFailure {
            defect,
            limit: NORM_GUARD,
        });
    }
    // surfaces undersampled trajectories here rather than at extraction
    accumulate_phase(&demodulated(&traj, energies.energy(label)))?;
    Ok(traj)
}

fn record(traj: &mut Trajectory, t: f64, psi: StateVector) {
    let reference = traj.reference_state(t);
    traj.times.push(t);
    traj.states.push(psi);
    traj.reference_overlaps.push(overlap(&reference, &psi));
}

/// Overlaps with the known dynamic factor `exp(-i E_n t)` divided out, so
/// only the slowly varying geometric part is left to unwrap.
fn demodulated(traj: &Trajectory, energy: f64) -> Vec<C64> {
    traj.times
        .iter()
        .zip(&traj.reference_overlaps)
        .map(|(&t, &z)| z * C64::from_polar(1.0, energy * t))
        .collect()
}

/// Number of completed revolutions covered by `traj`, if it is integral.
fn covered_cycles(traj: &Trajectory, f: &FieldConfig) -> Result<u32> {
    let period = f
        .period()
        .ok_or_else(|| Error::Usage("a static field (omega = 0) has no rotation period".into()))?;
    let (first, last) = match (traj.times.first(), traj.times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Usage("empty trajectory".into())),
    };
    let cycles = (last - first) / period;
    let rounded = cycles.round();
    if rounded < 1.0 || (cycles - rounded).abs() > 1e-9 * rounded {
        return Err(Error::Usage(format!(
            "trajectory covers {cycles} periods; an integer number of at least one is required"
        )));
    }
    Ok(rounded as u32)
}

pub fn extract_phases(
    traj: &Trajectory,
    energies: &Spectrum,
    cfg: &SimulationConfig,
    f: &FieldConfig,
) -> Result<PhaseReport> {
    let cycles = covered_cycles(traj, f)?;
    if cycles != cfg.periods {
        return Err(Error::Usage(format!(
            "trajectory covers {cycles} periods but the configuration asks for {}",
            cfg.periods
        )));
    }
    let energy = energies.energy(traj.label);
    let span = traj.times[traj.len() - 1] - traj.times[0];
    let geometric_unwrapped = accumulate_phase(&demodulated(traj, energy))?;
    let dynamic_phase = -energy * span;
    let total_phase = geometric_unwrapped + dynamic_phase;
    let signed_cycles = if f.omega < 0.0 {
        -i64::from(cycles)
    } else {
        i64::from(cycles)
    };
    Ok(PhaseReport {
        total_phase,
        dynamic_phase,
        geometric_phase: wrap_phase(total_phase - dynamic_phase),
        predicted_geometric: predicted_berry_phase(traj.label, f.theta, signed_cycles)?,
        solid_angle: solid_angle(f.theta)?,
        leakage: leakage(traj, &traj.field, traj.alpha),
        final_norm_defect: traj.final_norm_defect(),
    })
}

/// Propagates and extracts in one go.
pub fn simulate(
    p: &LevelParams,
    f: &FieldConfig,
    cfg: &SimulationConfig,
) -> Result<(Trajectory, PhaseReport)> {
    let traj = propagate(p, f, cfg)?;
    let report = extract_phases(&traj, &spectrum(p, f.e_mag)?, cfg, f)?;
    Ok((traj, report))
}

/// Largest population found outside the tracked eigenstate along `traj`.
pub fn leakage(traj: &Trajectory, f: &FieldConfig, alpha: MixingAngle) -> f64 {
    let n = traj.label.index();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, psi)| {
            lab_frame_eigenstates(alpha, f.orientation_at(t))
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != n)
                .map(|(_, basis)| overlap(basis, psi).norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// Re-represents every state by `exp(i lambda(t)) Psi(t)` and extracts
/// again. `lambda` must return to its initial value modulo `2 pi`.
pub fn gauge_transform_and_reextract(
    traj: &Trajectory,
    lambda: &dyn Fn(f64) -> f64,
    energies: &Spectrum,
    cfg: &SimulationConfig,
    f: &FieldConfig,
) -> Result<PhaseReport> {
    let (t0, t1) = (traj.times[0], traj.times[traj.len() - 1]);
    let mismatch = wrap_phase(lambda(t1) - lambda(t0));
    if !(mismatch.abs() <= 1e-9) {
        return Err(Error::Usage(format!(
            "gauge function is not periodic over the trajectory: lambda(T) - lambda(0) = {mismatch} mod 2pi"
        )));
    }
    let mut transformed = traj.clone();
    transformed.states.clear();
    transformed.reference_overlaps.clear();
    for (&t, psi) in traj.times.iter().zip(&traj.states) {
        let moved = psi.scaled(C64::from_polar(1.0, lambda(t)));
        transformed.states.push(moved);
        transformed
            .reference_overlaps
            .push(overlap(&traj.reference_state(t), &moved));
    }
    extract_phases(&transformed, energies, cfg, f)
}

/// `psi_n^dagger dpsi_n/dt` at time `t` by centered differences of the
/// closed-form eigenstates with time step `h`.
pub fn connection_rate(
    alpha: MixingAngle,
    f: &FieldConfig,
    label: StateLabel,
    t: f64,
    h: f64,
) -> C64 {
    let n = label.index();
    let at = |time: f64| lab_frame_eigenstates(alpha, f.orientation_at(time))[n];
    let derivative = at(t + h).sub(&at(t - h)).scaled(C64::new(0.5 / h, 0.0));
    overlap(&at(t), &derivative)
}

/// `i * integral_0^T psi_n^dagger dpsi_n/dt dt` over one revolution, with
/// the default difference step.
pub fn berry_connection_integral(
    p: &LevelParams,
    f: &FieldConfig,
    label: StateLabel,
    samples: usize,
) -> Result<f64> {
    let period = f
        .period()
        .ok_or_else(|| Error::Usage("a static field (omega = 0) has no rotation period".into()))?;
    berry_connection_integral_with_step(p, f, label, samples, period * DEFAULT_STEP_FRACTION)
}

pub fn berry_connection_integral_with_step(
    p: &LevelParams,
    f: &FieldConfig,
    label: StateLabel,
    samples: usize,
    h: f64,
) -> Result<f64> {
    if samples < MIN_CONNECTION_SAMPLES {
        return Err(Error::Usage(format!(
            "connection integral needs at least {MIN_CONNECTION_SAMPLES} samples, got {samples}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "difference step must be positive",
        });
    }
    f.validate()?;
    let period = f
        .period()
        .ok_or_else(|| Error::Usage("a static field (omega = 0) has no rotation period".into()))?;
    let alpha = mixing_angle(p, f.e_mag)?;
    let dt = period / samples as f64;
    let integral = (0..samples)
        .map(|k| connection_rate(alpha, f, label, (k as f64 + 0.5) * dt, h))
        .fold(ZERO, |acc, z| acc + z)
        * (I * dt);
    if integral.im.abs() > DERIVATIVE_GUARD {
        return Err(Error::DerivativeFailure {
            residue: integral.im.abs(),
            limit: DERIVATIVE_GUARD,
        });
    }
    Ok(integral.re)
}

/// `phi_n^dagger R dR^dagger/dt phi_n = -i omega phi_n^dagger K phi_n` with
/// `K = J_3 cos(theta) - J_1 sin(theta)` acting on the spin-one block.
pub fn connection_via_operator(
    label: StateLabel,
    alpha: MixingAngle,
    theta: f64,
    omega: f64,
    gens: &GeneratorSet,
) -> C64 {
    let k = conjugated_j3(theta, gens)
        .embed_spin_block(ZERO)
        .expect("3x3 generators");
    let phi = crate::model::rotating_frame_eigenstates(alpha)[label.index()];
    -I * omega * k.expectation(&phi, &phi).expect("4x4")
}

/// Couplings between the degenerate `+1`/`-1` eigenstates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossTerms {
    /// `psi_1^dagger dpsi_-1/dt`
    pub plus_minus: C64,
    /// `psi_-1^dagger dpsi_1/dt`
    pub minus_plus: C64,
}

impl CrossTerms {
    pub fn max_norm(&self) -> f64 {
        self.plus_minus.norm().max(self.minus_plus.norm())
    }
}

/// Azimuthal difference step used for the degenerate cross terms.
const AZIMUTH_STEP: f64 = 1e-5;

pub fn degenerate_cross_terms(theta: f64, phi: f64, omega: f64) -> Result<CrossTerms> {
    let alpha = MixingAngle::new(0.0)?;
    let at = |azimuth: f64| -> Result<[StateVector; 4]> {
        Ok(lab_frame_eigenstates(
            alpha,
            EulerPair::new(theta, azimuth)?,
        ))
    };
    let (center, ahead, behind) = (at(phi)?, at(phi + AZIMUTH_STEP)?, at(phi - AZIMUTH_STEP)?);
    let scale = C64::new(omega * 0.5 / AZIMUTH_STEP, 0.0);
    let rate = |target: usize| ahead[target].sub(&behind[target]).scaled(scale);
    let (plus, minus) = (StateLabel::Plus1.index(), StateLabel::Minus1.index());
    Ok(CrossTerms {
        plus_minus: overlap(&center[plus], &rate(minus)),
        minus_plus: overlap(&center[minus], &rate(plus)),
    })
}

/// Solid angle `2 pi (1 - cos theta)` swept by the field per revolution.
pub fn solid_angle(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
            reason: "must lie in [0, pi]",
        });
    }
    Ok(2.0 * PI * (1.0 - theta.cos()))
}

/// `-n * Omega * cycles` wrapped into `(-pi, pi]`. Negative `cycles` stand
/// for revolutions in the opposite sense. Values within rounding of the
/// branch cut are reported as `pi`.
pub fn predicted_berry_phase(label: StateLabel, theta: f64, cycles: i64) -> Result<f64> {
    let raw = -f64::from(label.projection()) * solid_angle(theta)? * cycles as f64;
    let wrapped = wrap_phase(raw);
    Ok(if PI - wrapped.abs() < 1e-12 {
        PI
    } else {
        wrapped
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::circular_distance;
    use crate::model::rotating_frame_eigenstates;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_params() -> LevelParams {
        LevelParams::new(1.0, 1.0).unwrap()
    }

    fn gap() -> f64 {
        1.25f64.sqrt() - 1.0
    }

    fn cfg(label: StateLabel, steps: u32) -> SimulationConfig {
        SimulationConfig::new(1, steps, 1, label).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimulationConfig::new(0, 1000, 1, StateLabel::Plus1).is_err());
        assert!(SimulationConfig::new(1, 99, 1, StateLabel::Plus1).is_err());
        assert!(SimulationConfig::new(1, 1000, 3, StateLabel::Plus1).is_err());
        assert!(SimulationConfig::new(1, 1000, 8, StateLabel::Plus1).is_ok());
    }

    #[test]
    fn static_tilt_follows_exact_exponential() {
        let p = default_params();
        let f = FieldConfig::new(0.5, 0.0, 2.0 * PI / 100.0, 0.3).unwrap();
        let energies = spectrum(&p, 0.5).unwrap();
        for label in StateLabel::ALL {
            let traj = propagate(&p, &f, &cfg(label, 1000)).unwrap();
            let t = *traj.times.last().unwrap();
            let expected = traj.states[0].scaled(C64::from_polar(1.0, -energies.energy(label) * t));
            assert!(traj.final_state().max_abs_diff(&expected) <= 1e-10);
        }
    }

    #[test]
    fn static_field_follows_exact_exponential() {
        let p = default_params();
        let f = FieldConfig::new(0.5, 1.1, 0.0, 0.4).unwrap();
        let energies = spectrum(&p, 0.5).unwrap();
        for label in StateLabel::ALL {
            let traj = propagate_span(&p, &f, label, 250.0, 2000, 10).unwrap();
            let expected =
                traj.states[0].scaled(C64::from_polar(1.0, -energies.energy(label) * 250.0));
            assert!(traj.final_state().max_abs_diff(&expected) <= 1e-10);
        }
        assert!(matches!(
            propagate(&p, &f, &cfg(StateLabel::Plus1, 1000)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn each_step_preserves_norm() {
        let p = default_params();
        let f = FieldConfig::new(0.5, PI / 3.0, 2.0 * PI / 50.0, 0.0).unwrap();
        let traj = propagate(&p, &f, &cfg(StateLabel::Zero, 500)).unwrap();
        for w in traj.states.windows(2) {
            assert!((w[1].norm() - w[0].norm()).abs() <= 1e-12);
        }
        assert_eq!(traj.len(), 501);
    }

    #[test]
    fn recording_stride() {
        let p = default_params();
        let f = FieldConfig::new(0.5, 0.8, 2.0 * PI / 50.0, 0.0).unwrap();
        let c = SimulationConfig::new(2, 400, 8, StateLabel::Plus1).unwrap();
        let traj = propagate(&p, &f, &c).unwrap();
        assert_eq!(traj.len(), 2 * 400 / 8 + 1);
        assert!((traj.times[traj.len() - 1] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn midpoint_stepping_is_second_order() {
        let p = default_params();
        let f = FieldConfig::new(0.5, PI / 3.0, 2.0 * PI / 1000.0, 0.0).unwrap();
        let phase = |steps| {
            let (_, r) = simulate(&p, &f, &cfg(StateLabel::Plus1, steps)).unwrap();
            r.total_phase - r.dynamic_phase
        };
        let (a, b, c) = (phase(4000), phase(8000), phase(16000));
        let ratio = (a - b) / (b - c);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn slow_rotation_reproduces_berry_phase() {
        let p = default_params();
        let omega = gap() / 400.0;
        let f = FieldConfig::new(0.5, PI / 3.0, omega, 0.0).unwrap();
        let expectations = [
            (StateLabel::Plus1, PI),
            (StateLabel::Minus1, -PI),
            (StateLabel::Zero, 0.0),
            (StateLabel::Singlet, 0.0),
        ];
        for (label, expected) in expectations {
            let (_, r) = simulate(&p, &f, &cfg(label, 80_000)).unwrap();
            assert!(
                circular_distance(r.geometric_phase, expected) < 2e-2,
                "{label}: {}",
                r.geometric_phase
            );
            assert!(circular_distance(r.geometric_phase, r.predicted_geometric) < 2e-2);
            let defect = wrap_phase(r.total_phase - (r.dynamic_phase + r.geometric_phase));
            assert!(defect.abs() <= 1e-12);
        }
    }

    #[test]
    fn perpendicular_field_has_trivial_phase() {
        let p = default_params();
        let f = FieldConfig::new(0.5, PI / 2.0, gap() / 400.0, 0.0).unwrap();
        for label in [StateLabel::Plus1, StateLabel::Minus1] {
            let (_, r) = simulate(&p, &f, &cfg(label, 80_000)).unwrap();
            assert!(
                circular_distance(r.geometric_phase, 0.0) < 2e-2,
                "{}",
                r.geometric_phase
            );
        }
    }

    #[test]
    fn extraction_requires_whole_periods() {
        let p = default_params();
        let f = FieldConfig::new(0.5, 1.0, 2.0 * PI / 100.0, 0.0).unwrap();
        let c = cfg(StateLabel::Plus1, 1000);
        let mut traj = propagate(&p, &f, &c).unwrap();
        let energies = spectrum(&p, 0.5).unwrap();
        traj.times.truncate(700);
        traj.states.truncate(700);
        traj.reference_overlaps.truncate(700);
        assert!(matches!(
            extract_phases(&traj, &energies, &c, &f),
            Err(Error::Usage(_))
        ));
        let two = SimulationConfig { periods: 2, ..c };
        let traj = propagate(&p, &f, &c).unwrap();
        assert!(extract_phases(&traj, &energies, &two, &f).is_err());
    }

    #[test]
    fn connection_integral_routes() {
        let p = default_params();
        let f = FieldConfig::new(0.5, PI / 3.0, 2.0 * PI / 1000.0, 0.0).unwrap();
        let plus = berry_connection_integral(&p, &f, StateLabel::Plus1, 100_000).unwrap();
        assert!((plus - PI).abs() <= 1e-6, "{plus}");
        let minus = berry_connection_integral(&p, &f, StateLabel::Minus1, 100_000).unwrap();
        assert!((minus + PI).abs() <= 1e-6);
        for label in [StateLabel::Zero, StateLabel::Singlet] {
            let zero = berry_connection_integral(&p, &f, label, 10_000).unwrap();
            assert!(zero.abs() <= 1e-9);
        }
        assert!(berry_connection_integral(&p, &f, StateLabel::Plus1, 999).is_err());
    }

    #[test]
    fn connection_integral_across_tilts() {
        let p = default_params();
        for k in 0..9 {
            let theta = PI * k as f64 / 8.0;
            let f = FieldConfig::new(0.5, theta, 0.02, 0.7).unwrap();
            for label in StateLabel::ALL {
                let b = berry_connection_integral(&p, &f, label, 2000).unwrap();
                let expected = 2.0 * PI * f64::from(label.projection()) * theta.cos();
                assert!((b - expected).abs() <= 1e-6);
                let predicted = predicted_berry_phase(label, theta, 1).unwrap();
                assert!(circular_distance(b, predicted) <= 1e-6);
            }
        }
    }

    #[test]
    fn operator_route_matches_finite_differences() {
        let gens = GeneratorSet::spin_one();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let theta = rng.random_range(0.0..PI);
            let omega = rng.random_range(-0.5..0.5);
            let alpha = MixingAngle::new(rng.random_range(-0.7..0.7)).unwrap();
            let f = FieldConfig::new(1.0, theta, omega, 0.0).unwrap();
            let t = rng.random_range(0.0..50.0);
            for label in StateLabel::ALL {
                let c = connection_via_operator(label, alpha, theta, omega, &gens);
                let fd = connection_rate(alpha, &f, label, t, 1e-4);
                assert!((c - fd).norm() < 1e-8, "{label} {c} {fd}");
                let expected = -I * f64::from(label.projection()) * omega * theta.cos();
                assert!((c - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn operator_route_cancels_cross_terms() {
        let gens = GeneratorSet::spin_one();
        for &a in &[-0.7, -0.2, 0.0, 0.5] {
            let alpha = MixingAngle::new(a).unwrap();
            assert_eq!(
                connection_via_operator(StateLabel::Zero, alpha, 1.3, 0.1, &gens),
                ZERO
            );
        }
        let c = connection_via_operator(
            StateLabel::Plus1,
            MixingAngle::new(-0.2).unwrap(),
            PI / 2.0,
            0.1,
            &gens,
        );
        assert!(c.norm() < 1e-17);
        let phi = rotating_frame_eigenstates(MixingAngle::new(0.3).unwrap());
        assert_eq!(overlap(&phi[0], &phi[2]), ZERO);
    }

    #[test]
    fn degenerate_pair_does_not_couple() {
        let zero = degenerate_cross_terms(0.0, 0.4, 0.3).unwrap();
        assert_eq!(zero.max_norm(), 0.0);
        let omega = 0.01;
        let terms = degenerate_cross_terms(PI / 3.0, 1.0, omega).unwrap();
        assert!(terms.max_norm() <= 1e-8);
        // control: the diagonal connection does not vanish
        let f = FieldConfig::new(0.0, PI / 3.0, omega, 1.0).unwrap();
        let diag = connection_rate(
            MixingAngle::new(0.0).unwrap(),
            &f,
            StateLabel::Plus1,
            0.0,
            1e-3,
        );
        assert!((diag - (-I * omega * 0.5)).norm() < 1e-10);
    }

    fn gauge_fixture() -> (
        LevelParams,
        FieldConfig,
        SimulationConfig,
        Trajectory,
        Spectrum,
    ) {
        let p = default_params();
        let f = FieldConfig::new(0.5, PI / 3.0, 2.0 * PI / 200.0, 0.0).unwrap();
        let c = cfg(StateLabel::Plus1, 4000);
        let traj = propagate(&p, &f, &c).unwrap();
        let s = spectrum(&p, 0.5).unwrap();
        (p, f, c, traj, s)
    }

    #[test]
    fn gauge_changes_leave_geometric_phase() {
        let (_, f, c, traj, s) = gauge_fixture();
        let base = extract_phases(&traj, &s, &c, &f).unwrap();
        let same = gauge_transform_and_reextract(&traj, &|_| 0.0, &s, &c, &f).unwrap();
        assert_eq!(same, base);

        let period = f.period().unwrap();
        let wobble = move |t: f64| 0.7 * (2.0 * PI * t / period).sin();
        let r = gauge_transform_and_reextract(&traj, &wobble, &s, &c, &f).unwrap();
        assert!(circular_distance(r.geometric_phase, base.geometric_phase) <= 1e-8);
        assert!((r.total_phase - base.total_phase).abs() <= 1e-8);

        let winding = move |t: f64| 2.0 * PI * t / period;
        let r = gauge_transform_and_reextract(&traj, &winding, &s, &c, &f).unwrap();
        assert!(circular_distance(r.geometric_phase, base.geometric_phase) <= 1e-8);
        assert!((r.total_phase - base.total_phase - 2.0 * PI).abs() <= 1e-8);

        let drift = move |t: f64| 0.3 * t / period;
        assert!(matches!(
            gauge_transform_and_reextract(&traj, &drift, &s, &c, &f),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn leakage_diagnostics() {
        let p = default_params();
        let energies = spectrum(&p, 0.5).unwrap();
        let g = energies.gap();

        let flat = FieldConfig::new(0.5, 0.0, g / 20.0, 0.0).unwrap();
        let traj = propagate(&p, &flat, &cfg(StateLabel::Zero, 2000)).unwrap();
        assert!(leakage(&traj, &flat, traj.alpha) <= 1e-10);

        let mut previous = f64::INFINITY;
        for k in [10.0, 20.0, 40.0, 80.0] {
            let f = FieldConfig::new(0.5, PI / 3.0, g / k, 0.0).unwrap();
            let traj = propagate(&p, &f, &cfg(StateLabel::Plus1, 4000)).unwrap();
            let l = leakage(&traj, &f, traj.alpha);
            assert!(l < previous, "omega = g/{k}: {l} !< {previous}");
            previous = l;
        }

        let fast = FieldConfig::new(0.5, PI / 3.0, g, 0.0).unwrap();
        let traj = propagate(&p, &fast, &cfg(StateLabel::Plus1, 2000)).unwrap();
        assert!(leakage(&traj, &fast, traj.alpha) > 1e-2);
    }

    #[test]
    fn solid_angle_and_prediction() {
        assert_eq!(solid_angle(0.0).unwrap(), 0.0);
        assert_eq!(
            predicted_berry_phase(StateLabel::Plus1, 0.0, 1).unwrap(),
            0.0
        );
        assert!((solid_angle(PI / 2.0).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!(
            predicted_berry_phase(StateLabel::Plus1, PI / 2.0, 1)
                .unwrap()
                .abs()
                < 1e-15
        );
        assert!((solid_angle(PI / 3.0).unwrap() - PI).abs() < 1e-15);
        assert_eq!(
            predicted_berry_phase(StateLabel::Plus1, PI / 3.0, 1).unwrap(),
            PI
        );
        assert_eq!(
            predicted_berry_phase(StateLabel::Minus1, PI / 3.0, 1).unwrap(),
            PI
        );
        assert_eq!(
            predicted_berry_phase(StateLabel::Singlet, 1.0, 3).unwrap(),
            0.0
        );
        assert!(solid_angle(-0.1).is_err());
        assert!(solid_angle(3.2).is_err());
    }
}
