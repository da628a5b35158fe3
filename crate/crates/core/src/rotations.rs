//! Rotation algebra for the spin-one sector.
//!
//! Cartesian matrices follow the passive convention: `cartesian_r3(phi)`
//! maps the coordinates of a fixed vector into a frame rotated by `phi`
//! about the third axis. Active matrices are always obtained from these by
//! transposition (or adjoint), never rebuilt independently. The spherical
//! basis is ordered `(m = +1, 0, -1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, commutator, expm_minus_i, mat_mul, OperatorMatrix, Role, I, ONE, ZERO,
};

/// Constant tilt `theta` and azimuth `phi` of the field direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerPair {
    theta: f64,
    phi: f64,
}

impl EulerPair {
    /// Rejects `theta` outside `[0, pi]`; `phi` is unconstrained.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must lie in [0, pi]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                reason: "must be finite",
            });
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Spin-one rotation generators in the spherical basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    pub j1: OperatorMatrix,
    pub j2: OperatorMatrix,
    pub j3: OperatorMatrix,
}

impl GeneratorSet {
    /// `j3 = diag(1, 0, -1)`, `j1`/`j2` from the ladder operators.
    pub fn spin_one() -> Self {
        let s = FRAC_1_SQRT_2;
        let r = |x: f64| C64::new(x, 0.0);
        let im = |x: f64| C64::new(0.0, x);
        let j1 = [[ZERO, r(s), ZERO], [r(s), ZERO, r(s)], [ZERO, r(s), ZERO]];
        let j2 = [
            [ZERO, im(-s), ZERO],
            [im(s), ZERO, im(-s)],
            [ZERO, im(s), ZERO],
        ];
        let j3 = [[ONE, ZERO, ZERO], [ZERO, ZERO, ZERO], [ZERO, ZERO, -ONE]];
        Self {
            j1: from3(j1, Role::Hermitian),
            j2: from3(j2, Role::Hermitian),
            j3: from3(j3, Role::Hermitian),
        }
    }

    /// Fault-injection fixture: the same set with the sign of `j1` flipped.
    /// The result is still Hermitian but violates the commutation relations.
    pub fn with_flipped_j1(mut self) -> Self {
        self.j1 = self.j1.scaled(-ONE);
        self
    }

    pub fn get(&self, axis: usize) -> &OperatorMatrix {
        match axis {
            0 => &self.j1,
            1 => &self.j2,
            2 => &self.j3,
            _ => panic!("generator axis {axis} out of range"),
        }
    }

    /// Largest entry of `[J_i, J_j] - i eps_ijk J_k` over all ordered pairs.
    pub fn commutation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let lhs = commutator(self.get(a), self.get(b)).expect("3x3 generators");
                let mut rhs = OperatorMatrix::zeros(3);
                for c in 0..3 {
                    let eps = levi_civita(a, b, c);
                    if eps != 0.0 {
                        rhs = rhs.add(&self.get(c).scaled(I * eps)).expect("3x3");
                    }
                }
                worst = worst.max(lhs.max_abs_diff(&rhs).expect("3x3"));
            }
        }
        worst
    }
}

fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn from3(rows: [[C64; 3]; 3], role: Role) -> OperatorMatrix {
    OperatorMatrix::trusted(DMatrix::from_fn(3, 3, |i, j| rows[i][j]), role)
}

fn real3(rows: [[f64; 3]; 3]) -> OperatorMatrix {
    OperatorMatrix::trusted(
        DMatrix::from_fn(3, 3, |i, j| C64::new(rows[i][j], 0.0)),
        Role::Unitary,
    )
}

/// Cartesian generators, `(J_k)_ij = -i eps_kij`.
pub fn cartesian_generators() -> GeneratorSet {
    let make = |k: usize| {
        OperatorMatrix::trusted(
            DMatrix::from_fn(3, 3, |i, j| C64::new(0.0, -levi_civita(k, i, j))),
            Role::Hermitian,
        )
    };
    GeneratorSet {
        j1: make(0),
        j2: make(1),
        j3: make(2),
    }
}

/// Passive rotation about the first axis, obtained from `cartesian_r3` by
/// cyclic relabelling of the axes.
pub fn cartesian_r1(angle: f64) -> OperatorMatrix {
    let (s, c) = angle.sin_cos();
    real3([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])
}

pub fn cartesian_r2(angle: f64) -> OperatorMatrix {
    let (s, c) = angle.sin_cos();
    real3([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
}

pub fn cartesian_r3(angle: f64) -> OperatorMatrix {
    let (s, c) = angle.sin_cos();
    real3([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Passive map into the frame where the field lies along the third axis:
/// first `phi` about the third axis, then `theta` about the new second axis.
pub fn cartesian_r(theta: f64, phi: f64) -> OperatorMatrix {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    real3([
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0],
        [st * cp, st * sp, ct],
    ])
}

/// Active rotation by `angle` about the unit vector along `axis`
/// (right-handed, consistent with the transpose of the passive matrices).
pub fn axis_rotation(axis: [f64; 3], angle: f64) -> OperatorMatrix {
    let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let n = axis.map(|x| x / len);
    let (s, c) = angle.sin_cos();
    let cross = [[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]];
    let mut rows = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            rows[i][j] = c * delta + s * cross[i][j] + (1.0 - c) * n[i] * n[j];
        }
    }
    real3(rows)
}

/// Defect of the class-angle relation `R_{g n}(angle) = g R_n(angle) g^-1`
/// for a real orthogonal `g`.
pub fn class_angle_defect(g: &OperatorMatrix, axis: [f64; 3], angle: f64) -> Result<f64> {
    if g.dim() != 3 {
        return Err(Error::DimensionMismatch {
            left: g.dim(),
            right: 3,
        });
    }
    let mut rotated = [0.0; 3];
    for (i, r) in rotated.iter_mut().enumerate() {
        *r = (0..3).map(|j| g.get(i, j).re * axis[j]).sum();
    }
    let lhs = axis_rotation(rotated, angle);
    let rhs = mat_mul(&mat_mul(g, &axis_rotation(axis, angle))?, &adjoint(g))?;
    lhs.max_abs_diff(&rhs)
}

/// Defect between the composite active rotation about the rotated second
/// axis followed by `phi` about the third axis, `R_2'(theta) R_3(phi)`, and
/// the fixed-axis product `R_3(phi) R_2(theta)`.
///
/// `second` selects which fixed axis stands in for the second one on the
/// right-hand side; only `1` is a true identity.
pub fn composite_rotation_defect(theta: f64, phi: f64, second: usize) -> f64 {
    let g = cartesian_r3(phi).transpose();
    let mut rotated_axis = [0.0; 3];
    for (i, r) in rotated_axis.iter_mut().enumerate() {
        *r = g.get(i, 1).re;
    }
    let lhs = mat_mul(&axis_rotation(rotated_axis, theta), &g).expect("3x3");
    let fixed = match second {
        0 => cartesian_r1(theta),
        1 => cartesian_r2(theta),
        2 => cartesian_r3(theta),
        _ => panic!("axis {second} out of range"),
    }
    .transpose();
    let rhs = mat_mul(&g, &fixed).expect("3x3");
    lhs.max_abs_diff(&rhs).expect("3x3")
}

/// Cartesian components of `(eps_+1, eps_0, eps_-1)`.
pub fn spherical_basis_vectors() -> [[C64; 3]; 3] {
    let s = FRAC_1_SQRT_2;
    [
        [C64::new(-s, 0.0), C64::new(0.0, -s), ZERO],
        [ZERO, ZERO, ONE],
        [C64::new(s, 0.0), C64::new(0.0, -s), ZERO],
    ]
}

/// Maps Cartesian coordinates `x` to spherical components `r_m = eps_m . x`.
pub fn spherical_basis_change() -> OperatorMatrix {
    from3(spherical_basis_vectors(), Role::Unitary)
}

pub fn spherical_r3(angle: f64) -> OperatorMatrix {
    from3(
        [
            [C64::from_polar(1.0, -angle), ZERO, ZERO],
            [ZERO, ONE, ZERO],
            [ZERO, ZERO, C64::from_polar(1.0, angle)],
        ],
        Role::Unitary,
    )
}

pub fn spherical_r2(angle: f64) -> OperatorMatrix {
    let (s, c) = angle.sin_cos();
    let a = s * FRAC_1_SQRT_2;
    real3([
        [0.5 * (1.0 + c), a, 0.5 * (1.0 - c)],
        [-a, c, a],
        [0.5 * (1.0 - c), -a, 0.5 * (1.0 + c)],
    ])
}

/// `R_2(theta) R_3*(phi)` in the conjugated spherical representation.
pub fn spherical_r(theta: f64, phi: f64) -> OperatorMatrix {
    let (s, c) = theta.sin_cos();
    let a = s * FRAC_1_SQRT_2;
    let ep = C64::from_polar(1.0, phi);
    let em = ep.conj();
    from3(
        [
            [
                ep * (0.5 * (1.0 + c)),
                C64::new(a, 0.0),
                em * (0.5 * (1.0 - c)),
            ],
            [ep * (-a), C64::new(c, 0.0), em * a],
            [
                ep * (0.5 * (1.0 - c)),
                C64::new(-a, 0.0),
                em * (0.5 * (1.0 + c)),
            ],
        ],
        Role::Unitary,
    )
}

/// Wigner `d^1(theta)`, matrix elements of `exp(-i theta J_2)`.
pub fn wigner_d1(theta: f64) -> OperatorMatrix {
    let (s, c) = theta.sin_cos();
    let a = s * FRAC_1_SQRT_2;
    real3([
        [0.5 * (1.0 + c), -a, 0.5 * (1.0 - c)],
        [a, c, -a],
        [0.5 * (1.0 - c), a, 0.5 * (1.0 + c)],
    ])
}

/// The adjoint of [`spherical_r`] extended to the four-state basis, with
/// `|0,0>` left invariant.
pub fn extended_r_dagger(theta: f64, phi: f64) -> OperatorMatrix {
    adjoint(&spherical_r(theta, phi))
        .embed_spin_block(ONE)
        .expect("3x3 block")
}

/// `J_3 cos(theta) - J_1 sin(theta)`, the closed form of
/// `exp(i theta J_2) J_3 exp(-i theta J_2)`.
pub fn conjugated_j3(theta: f64, gens: &GeneratorSet) -> OperatorMatrix {
    let (s, c) = theta.sin_cos();
    gens.j3
        .scaled(C64::new(c, 0.0))
        .sub(&gens.j1.scaled(C64::new(s, 0.0)))
        .expect("3x3 generators")
}

/// `exp(i theta J_2) J_3 exp(-i theta J_2)` evaluated with matrix
/// exponentials.
pub fn conjugated_j3_by_exponential(theta: f64, gens: &GeneratorSet) -> Result<OperatorMatrix> {
    let forward = expm_minus_i(&gens.j2, -theta)?;
    let back = expm_minus_i(&gens.j2, theta)?;
    mat_mul(&mat_mul(&forward, &gens.j3)?, &back)
}
