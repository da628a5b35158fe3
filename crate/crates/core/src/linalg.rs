//! Small dense complex linear algebra for the three- and four-level
//! operators of the model.
//!
//! Everything here is a pure function of its inputs. Matrices are stored in
//! `nalgebra` dynamic matrices with a role tag recording whether the value is
//! known to be Hermitian, unitary or neither; constructors that claim a role
//! validate it against the absolute tolerances below.

use std::f64::consts::PI;
use std::ops::Index;

use nalgebra::{DMatrix, SymmetricEigen, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A single complex wave-function component.
pub type ComplexAmplitude = C64;

/// Maximum `|M - M^dagger|` entry accepted for a Hermitian operator.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum `|U^dagger U - I|` entry accepted for a unitary operator.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest argument jump between consecutive samples that
/// [`accumulate_phase`] will follow without reporting aliasing.
pub const DEFAULT_PHASE_GUARD: f64 = 0.75 * PI;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Four-component state over the basis `(|1,1>, |1,0>, |1,-1>, |0,0>)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector(Vector4<C64>);

impl StateVector {
    pub fn new(amplitudes: [C64; 4]) -> Self {
        Self(Vector4::from(amplitudes))
    }

    pub fn from_real(amplitudes: [f64; 4]) -> Self {
        Self::new(amplitudes.map(|x| C64::new(x, 0.0)))
    }

    /// The `index`-th basis vector.
    pub fn basis(index: usize) -> Self {
        let mut v = Vector4::zeros();
        v[index] = ONE;
        Self(v)
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self(self.0 * factor)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0 - other.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn as_vector(&self) -> &Vector4<C64> {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for StateVector {
    type Output = C64;

    fn index(&self, index: usize) -> &C64 {
        &self.0[index]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Hermitian,
    Unitary,
    General,
}

/// A 3x3 or 4x4 complex operator.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    data: DMatrix<C64>,
    role: Role,
}

impl OperatorMatrix {
    /// Wraps `data`, validating the dimension and the claimed role.
    pub fn new(data: DMatrix<C64>, role: Role) -> Result<Self> {
        check_dim(&data)?;
        let m = Self { data, role };
        match role {
            Role::Hermitian => {
                let defect = m.hermiticity_defect();
                if !(defect <= HERMITIAN_TOL) {
                    return Err(Error::NotHermitian { defect });
                }
            }
            Role::Unitary => {
                let defect = m.unitarity_defect();
                if !(defect <= UNITARY_TOL) {
                    return Err(Error::NotUnitary { defect });
                }
            }
            Role::General => {}
        }
        Ok(m)
    }

    pub fn general(data: DMatrix<C64>) -> Result<Self> {
        Self::new(data, Role::General)
    }

    pub fn hermitian(data: DMatrix<C64>) -> Result<Self> {
        Self::new(data, Role::Hermitian)
    }

    pub fn unitary(data: DMatrix<C64>) -> Result<Self> {
        Self::new(data, Role::Unitary)
    }

    /// Builds from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]], role: Role) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::UnsupportedDimension {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::new(
            DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)),
            role,
        )
    }

    /// Builds from complex row-major entries.
    pub fn from_rows(rows: &[&[C64]], role: Role) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::UnsupportedDimension {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]), role)
    }

    /// Trusted constructor for matrices whose role holds by construction.
    pub(crate) fn trusted(data: DMatrix<C64>, role: Role) -> Self {
        debug_assert!(check_dim(&data).is_ok());
        Self { data, role }
    }

    pub fn identity(n: usize) -> Self {
        Self::trusted(DMatrix::identity(n, n), Role::Unitary)
    }

    pub fn zeros(n: usize) -> Self {
        Self::trusted(DMatrix::zeros(n, n), Role::Hermitian)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(self, role: Role) -> Result<Self> {
        Self::new(self.data, role)
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(max_abs(&(&self.data - &other.data)))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.data - self.data.adjoint()))
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.data.adjoint() * &self.data - DMatrix::<C64>::identity(n, n)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let role = if factor.im == 0.0 && self.role == Role::Hermitian {
            Role::Hermitian
        } else {
            Role::General
        };
        Self::trusted(&self.data * factor, role)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let data = self.data.zip_map(&other.data, f);
        let role = if self.role == Role::Hermitian && other.role == Role::Hermitian {
            Role::Hermitian
        } else {
            Role::General
        };
        Ok(Self::trusted(data, role))
    }

    /// Applies a 4x4 operator to a state.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.dim() != 4 {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: 4,
            });
        }
        let out = self.data.fixed_view::<4, 4>(0, 0) * v.as_vector();
        Ok(StateVector(out))
    }

    /// Matrix element `<bra| self |ket>` of a 4x4 operator.
    pub fn expectation(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        Ok(overlap(bra, &self.apply(ket)?))
    }

    /// Embeds a 3x3 spin-one block in the upper-left corner of a 4x4
    /// operator whose `|0,0>` diagonal entry is `corner`.
    pub fn embed_spin_block(&self, corner: C64) -> Result<Self> {
        if self.dim() != 3 {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: 3,
            });
        }
        let mut data = DMatrix::zeros(4, 4);
        data.view_mut((0, 0), (3, 3)).copy_from(&self.data);
        data[(3, 3)] = corner;
        let role = match self.role {
            Role::Hermitian if corner.im == 0.0 => Role::Hermitian,
            Role::Unitary if (corner.norm() - 1.0).abs() < 1e-15 => Role::Unitary,
            _ => Role::General,
        };
        Ok(Self::trusted(data, role))
    }

    /// Upper-left 3x3 block.
    pub fn spin_block(&self) -> Self {
        Self::trusted(self.data.view((0, 0), (3, 3)).into_owned(), Role::General)
    }

    pub fn transpose(&self) -> Self {
        Self::trusted(self.data.transpose(), self.role)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn check_dim(data: &DMatrix<C64>) -> Result<()> {
    let (rows, cols) = data.shape();
    if rows != cols || !(rows == 3 || rows == 4) {
        return Err(Error::UnsupportedDimension { rows, cols });
    }
    Ok(())
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn mat_mul(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let role = if a.role == Role::Unitary && b.role == Role::Unitary {
        Role::Unitary
    } else {
        Role::General
    };
    Ok(OperatorMatrix::trusted(&a.data * &b.data, role))
}

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    mat_mul(a, b)?.sub(&mat_mul(b, a)?)
}

pub fn adjoint(m: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix::trusted(m.data.adjoint(), m.role)
}

/// Eigenvalues (ascending) and matching orthonormal eigenvector columns of
/// a Hermitian operator.
pub fn eigh(h: &OperatorMatrix) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let defect = h.hermiticity_defect();
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { defect });
    }
    let sym = (&h.data + h.data.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// `exp(-i h dt)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_minus_i(h: &OperatorMatrix, dt: f64) -> Result<OperatorMatrix> {
    if !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be finite",
        });
    }
    let (values, vectors) = eigh(h)?;
    let n = h.dim();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, -values[i] * dt)
        } else {
            ZERO
        }
    });
    let u = &vectors * phases * vectors.adjoint();
    Ok(OperatorMatrix::trusted(u, Role::Unitary))
}

/// `<bra|ket>`.
pub fn overlap(bra: &StateVector, ket: &StateVector) -> C64 {
    bra.0
        .iter()
        .zip(ket.0.iter())
        .fold(ZERO, |acc, (b, k)| acc + b.conj() * k)
}

/// Unwrapped cumulative argument of `samples`, measured from the first one.
///
/// Each step follows the nearest branch. A step larger than
/// [`DEFAULT_PHASE_GUARD`] is reported as aliasing.
pub fn accumulate_phase(samples: &[C64]) -> Result<f64> {
    accumulate_phase_guarded(samples, DEFAULT_PHASE_GUARD)
}

pub fn accumulate_phase_guarded(samples: &[C64], guard: f64) -> Result<f64> {
    let mut total = 0.0;
    for (index, z) in samples.iter().enumerate() {
        if !(z.norm() > 0.0) {
            return Err(Error::ZeroSample { index });
        }
        if index == 0 {
            continue;
        }
        let jump = (z * samples[index - 1].conj()).arg();
        if jump.abs() >= guard {
            return Err(Error::Aliasing { index, jump, guard });
        }
        total += jump;
    }
    Ok(total)
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = angle.rem_euclid(two_pi);
    if w > PI {
        w -= two_pi;
    }
    w
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}
