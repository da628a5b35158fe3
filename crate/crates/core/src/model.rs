//! The four-state model: `|1,1>, |1,0>, |1,-1>` plus the singlet `|0,0>`,
//! with the field coupling only `|1,0>` and `|0,0>`.
//!
//! Energies are measured from the midpoint between the unperturbed `|1,0>`
//! (at `+E1`) and `|0,0>` (at `-E1`) levels; `|1,+-1>` sit at `+E1` as well.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adjoint, mat_mul, OperatorMatrix, Role, StateVector};
use crate::rotations::{extended_r_dagger, EulerPair};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub e1: f64,
    pub d: f64,
}

impl LevelParams {
    pub fn new(e1: f64, d: f64) -> Result<Self> {
        let p = Self { e1, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e1 > 0.0 && self.e1.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "e1",
                value: self.e1,
                reason: "must be positive and finite",
            });
        }
        if !self.d.is_finite() {
            return Err(Error::InvalidParameter {
                name: "d",
                value: self.d,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    /// Field coupling `d * E`.
    pub fn coupling(&self, e_mag: f64) -> f64 {
        self.d * e_mag
    }
}

/// Uniformly rotating field: magnitude `e_mag`, fixed tilt `theta`, azimuth
/// `phi(t) = phi0 + omega t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub e_mag: f64,
    pub theta: f64,
    pub omega: f64,
    pub phi0: f64,
}

impl FieldConfig {
    pub fn new(e_mag: f64, theta: f64, omega: f64, phi0: f64) -> Result<Self> {
        let f = Self {
            e_mag,
            theta,
            omega,
            phi0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_mag >= 0.0 && self.e_mag.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "efield",
                value: self.e_mag,
                reason: "must be non-negative and finite",
            });
        }
        EulerPair::new(self.theta, self.phi0)?;
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    pub fn phi_at(&self, t: f64) -> f64 {
        self.phi0 + self.omega * t
    }

    pub fn orientation_at(&self, t: f64) -> EulerPair {
        EulerPair::new(self.theta, self.phi_at(t)).expect("validated field config")
    }

    /// One revolution, `2 pi / |omega|`; `None` for a static field.
    pub fn period(&self) -> Option<f64> {
        (self.omega != 0.0).then(|| 2.0 * PI / self.omega.abs())
    }
}

/// Mixing angle of the `|1,0>`/`|0,0>` block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingAngle(f64);

impl MixingAngle {
    /// Accepts any angle in `(-pi/4, pi/4]`.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > -PI / 4.0 && alpha <= PI / 4.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must lie in (-pi/4, pi/4]",
            });
        }
        Ok(Self(alpha))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub e_plus1: f64,
    pub e_0: f64,
    pub e_minus1: f64,
    pub e_00: f64,
}

impl Spectrum {
    pub fn energy(&self, label: StateLabel) -> f64 {
        match label {
            StateLabel::Plus1 => self.e_plus1,
            StateLabel::Zero => self.e_0,
            StateLabel::Minus1 => self.e_minus1,
            StateLabel::Singlet => self.e_00,
        }
    }

    /// Gap `E_0 - E_1` that sets the adiabatic time scale.
    pub fn gap(&self) -> f64 {
        self.e_0 - self.e_plus1
    }
}

/// Eigenstate label `n`: `+1`, `0`, `-1` or the singlet-like `00`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    #[serde(rename = "+1")]
    Plus1,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-1")]
    Minus1,
    #[serde(rename = "00")]
    Singlet,
}

impl StateLabel {
    pub const ALL: [StateLabel; 4] = [Self::Plus1, Self::Zero, Self::Minus1, Self::Singlet];

    /// Position in the eigenstate arrays returned by this module.
    pub fn index(self) -> usize {
        match self {
            Self::Plus1 => 0,
            Self::Zero => 1,
            Self::Minus1 => 2,
            Self::Singlet => 3,
        }
    }

    /// Field-axis projection; `00` counts as zero.
    pub fn projection(self) -> i32 {
        match self {
            Self::Plus1 => 1,
            Self::Minus1 => -1,
            Self::Zero | Self::Singlet => 0,
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus1 => "+1",
            Self::Zero => "0",
            Self::Minus1 => "-1",
            Self::Singlet => "00",
        })
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" => Ok(Self::Plus1),
            "0" => Ok(Self::Zero),
            "-1" => Ok(Self::Minus1),
            "00" => Ok(Self::Singlet),
            other => Err(Error::Usage(format!(
                "unknown state label '{other}' (expected +1, 0, -1 or 00)"
            ))),
        }
    }
}

/// `tan 2a = -dE/E1` on the branch with `cos 2a > 0`.
pub fn mixing_angle(p: &LevelParams, e_mag: f64) -> Result<MixingAngle> {
    p.validate()?;
    let alpha = 0.5 * (-p.coupling(e_mag)).atan2(p.e1);
    MixingAngle::new(alpha)
}

pub fn spectrum(p: &LevelParams, e_mag: f64) -> Result<Spectrum> {
    p.validate()?;
    let e0 = p.e1.hypot(p.coupling(e_mag));
    Ok(Spectrum {
        e_plus1: p.e1,
        e_0: e0,
        e_minus1: p.e1,
        e_00: -e0,
    })
}

/// Field-aligned eigenstates `(phi_1, phi_0, phi_-1, phi_00)`.
pub fn rotating_frame_eigenstates(alpha: MixingAngle) -> [StateVector; 4] {
    let (s, c) = alpha.value().sin_cos();
    [
        StateVector::from_real([1.0, 0.0, 0.0, 0.0]),
        StateVector::from_real([0.0, c, 0.0, s]),
        StateVector::from_real([0.0, 0.0, 1.0, 0.0]),
        StateVector::from_real([0.0, -s, 0.0, c]),
    ]
}

/// Laboratory-frame eigenstates `(psi_1, psi_0, psi_-1, psi_00)` in closed
/// form for field direction `(theta, phi)`.
pub fn lab_frame_eigenstates(alpha: MixingAngle, orientation: EulerPair) -> [StateVector; 4] {
    let (sa, ca) = alpha.value().sin_cos();
    let (st, ct) = orientation.theta().sin_cos();
    let em = C64::from_polar(1.0, -orientation.phi());
    let ep = em.conj();
    let h = st * FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    [
        StateVector::new([
            em * (0.5 * (1.0 + ct)),
            r(h),
            ep * (0.5 * (1.0 - ct)),
            r(0.0),
        ]),
        StateVector::new([em * (-h * ca), r(ct * ca), ep * (h * ca), r(sa)]),
        StateVector::new([
            em * (0.5 * (1.0 - ct)),
            r(-h),
            ep * (0.5 * (1.0 + ct)),
            r(0.0),
        ]),
        StateVector::new([em * (h * sa), r(-ct * sa), ep * (-h * sa), r(ca)]),
    ]
}

/// The same states built as `R^dagger phi_n`.
pub fn lab_frame_eigenstates_by_rotation(
    alpha: MixingAngle,
    orientation: EulerPair,
) -> [StateVector; 4] {
    let r_dag = extended_r_dagger(orientation.theta(), orientation.phi());
    rotating_frame_eigenstates(alpha).map(|phi| r_dag.apply(&phi).expect("4x4"))
}

/// Field-aligned Hamiltonian in the four-state basis.
pub fn rotating_frame_hamiltonian(p: &LevelParams, e_mag: f64) -> OperatorMatrix {
    let e1 = p.e1;
    let v = -p.coupling(e_mag);
    let rows = [
        [e1, 0.0, 0.0, 0.0],
        [0.0, e1, 0.0, v],
        [0.0, 0.0, e1, 0.0],
        [0.0, v, 0.0, -e1],
    ];
    OperatorMatrix::trusted(
        DMatrix::from_fn(4, 4, |i, j| C64::new(rows[i][j], 0.0)),
        Role::Hermitian,
    )
}

/// Laboratory Hamiltonian `R^dagger(t) H_rot R(t)` for the field direction
/// at time `t`.
pub fn lab_hamiltonian(p: &LevelParams, f: &FieldConfig, t: f64) -> OperatorMatrix {
    let r_dag = extended_r_dagger(f.theta, f.phi_at(t));
    let h_rot = rotating_frame_hamiltonian(p, f.e_mag);
    let h = mat_mul(&mat_mul(&r_dag, &h_rot).expect("4x4"), &adjoint(&r_dag)).expect("4x4");
    // symmetrize away rounding so the Hermitian role is exact
    let data = h.matrix();
    let sym = (data + data.adjoint()) * C64::new(0.5, 0.0);
    OperatorMatrix::trusted(sym, Role::Hermitian)
}

/// Cartesian field components at time `t`.
pub fn field_vector(f: &FieldConfig, t: f64) -> [f64; 3] {
    let (st, ct) = f.theta.sin_cos();
    let (sp, cp) = f.phi_at(t).sin_cos();
    [f.e_mag * st * cp, f.e_mag * st * sp, f.e_mag * ct]
}
