//! Shared fixtures for the criterion benchmarks.

use std::f64::consts::PI;

use spinberry_core::{FieldConfig, LevelParams, SimulationConfig, StateLabel};

pub fn levels() -> LevelParams {
    LevelParams::new(1.0, 1.0).expect("valid levels")
}

/// The reference geometry: tilt pi/3, one revolution per 1000 time units.
pub fn field() -> FieldConfig {
    FieldConfig::new(0.5, PI / 3.0, 2.0 * PI / 1000.0, 0.0).expect("valid field")
}

pub fn one_period(steps: u32) -> SimulationConfig {
    SimulationConfig::new(1, steps, 1, StateLabel::Plus1).expect("valid simulation config")
}
