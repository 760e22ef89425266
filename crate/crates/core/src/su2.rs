//! SU(2) arithmetic in the Pauli basis.
//!
//! Exponentials use the closed form
//!
//! ```text
//!     exp(-i a·σ) = cos|a| I - i sin|a| (a·σ)/|a|
//! ```
//!
//! so every propagator built here is unitary to round-off regardless of the
//! step size.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Coefficients of `ax σx + ay σy + az σz`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PauliVector {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl PauliVector {
    pub const fn new(ax: f64, ay: f64, az: f64) -> Self {
        Self { ax, ay, az }
    }

    pub const fn x(a: f64) -> Self {
        Self::new(a, 0.0, 0.0)
    }

    pub const fn y(a: f64) -> Self {
        Self::new(0.0, a, 0.0)
    }

    pub const fn z(a: f64) -> Self {
        Self::new(0.0, 0.0, a)
    }

    pub fn norm(&self) -> f64 {
        (self.ax * self.ax + self.ay * self.ay + self.az * self.az).sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.ax * s, self.ay * s, self.az * s)
    }

    pub fn is_finite(&self) -> bool {
        self.ax.is_finite() && self.ay.is_finite() && self.az.is_finite()
    }
}

impl std::ops::Neg for PauliVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.ax, -self.ay, -self.az)
    }
}

/// A 2×2 complex matrix, row-major. Constructors in this module only ever
/// produce elements of SU(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub m: [[C64; 2]; 2],
}

impl Default for Unitary2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Unitary2 {
    pub const fn from_rows(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub const fn identity() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    pub fn sigma_x() -> Self {
        Self::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Self {
        Self::from_rows([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]])
    }

    pub fn sigma_z() -> Self {
        Self::from_rows([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// `exp(-i a·σ)`, rejecting non-finite generators.
    pub fn try_pauli_exp(a: PauliVector) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFiniteGenerator(a.ax, a.ay, a.az));
        }
        Ok(Self::pauli_exp(a))
    }

    /// `exp(-i a·σ)` for a finite generator. Hot path of the integrators, so
    /// finiteness is only debug-asserted here.
    #[inline]
    pub fn pauli_exp(a: PauliVector) -> Self {
        debug_assert!(a.is_finite());
        let r = a.norm();
        if r == 0.0 {
            return Self::identity();
        }
        let (s, c) = r.sin_cos();
        let k = s / r;
        // c I - i k (a·σ)
        let (x, y, z) = (a.ax * k, a.ay * k, a.az * k);
        Self::from_rows([
            [C64::new(c, -z), C64::new(-y, -x)],
            [C64::new(y, -x), C64::new(c, z)],
        ])
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Self::from_rows([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖A − B‖_F`.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += (self.m[i][j] - other.m[i][j]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `|tr(A†B)| / 2`, insensitive to global phase.
    pub fn trace_fidelity(&self, other: &Self) -> f64 {
        let tr = (self.dagger() * *other).trace();
        (tr.norm() / 2.0).min(1.0)
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).frobenius_distance(&Self::identity())
    }

    /// Entry `⟨e_{row+1}, U e_{col+1}⟩`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    /// The SU(2) representative `±U` whose (0,0) entry has argument in
    /// (−π/2, π/2]. Entries are scaled by `det^{-1/2}` first so inputs that
    /// drifted off det = 1 are pulled back.
    pub fn canonical(&self) -> Self {
        let d = self.det();
        let mut u = if (d - ONE).norm() > 0.0 {
            self.scale(d.sqrt().inv())
        } else {
            *self
        };
        let a = u.m[0][0];
        if a.norm() > 0.0 {
            let arg = a.arg();
            if arg <= -PI / 2.0 || arg > PI / 2.0 {
                u = u.scale(-ONE);
            }
        } else {
            // fall back to the (0,1) entry for the sign choice
            let b = u.m[0][1];
            let arg = b.arg();
            if b.norm() > 0.0 && (arg <= -PI / 2.0 || arg > PI / 2.0) {
                u = u.scale(-ONE);
            }
        }
        u
    }

    /// Quaternion coordinates `(q0, q1, q2, q3)` with
    /// `U = q0 I − i (q1 σx + q2 σy + q3 σz)`. Exact for SU(2).
    pub fn quaternion(&self) -> [f64; 4] {
        let m = &self.m;
        [
            0.5 * (m[0][0].re + m[1][1].re),
            -0.5 * (m[0][1].im + m[1][0].im),
            0.5 * (m[1][0].re - m[0][1].re),
            -0.5 * (m[0][0].im - m[1][1].im),
        ]
    }

    pub fn from_quaternion(q: [f64; 4]) -> Self {
        Self::from_rows([
            [C64::new(q[0], -q[3]), C64::new(-q[2], -q[1])],
            [C64::new(q[2], -q[1]), C64::new(q[0], q[3])],
        ])
    }

    /// X–Y–X Euler angles with `U = exp(−iασx) exp(−iβσy) exp(−iγσx)`.
    ///
    /// `β` is returned in `[0, π/2]`; the remaining freedom is absorbed in
    /// `α, γ ∈ [0, 2π)`. When `|sin β| < 1e-9` the decomposition degenerates
    /// to a single x rotation and `γ = 0`; when `|cos β| < 1e-9` likewise
    /// `γ = 0` and `α` carries the difference angle.
    pub fn euler_xyx(&self) -> EulerXYX {
        let [q0, q1, q2, q3] = self.quaternion();
        // q0 = cosβ cos(α+γ), q1 = cosβ sin(α+γ)
        // q2 = sinβ cos(α−γ), q3 = sinβ sin(α−γ)
        let cb = q0.hypot(q1);
        let sb = q2.hypot(q3);
        let beta = sb.atan2(cb);
        let (alpha, gamma) = if sb < 1e-9 {
            (q1.atan2(q0), 0.0)
        } else if cb < 1e-9 {
            (q3.atan2(q2), 0.0)
        } else {
            let sum = q1.atan2(q0);
            let diff = q3.atan2(q2);
            ((sum + diff) / 2.0, (sum - diff) / 2.0)
        };
        EulerXYX {
            alpha: wrap_angle(alpha),
            beta: wrap_angle(beta),
            gamma: wrap_angle(gamma),
        }
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    #[inline]
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &rhs.m;
        Unitary2::from_rows([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul for &Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: &Unitary2) -> Unitary2 {
        *self * *rhs
    }
}

/// Angles of `exp(−iασx) exp(−iβσy) exp(−iγσx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerXYX {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerXYX {
    pub fn recompose(&self) -> Unitary2 {
        Unitary2::pauli_exp(PauliVector::x(self.alpha))
            * Unitary2::pauli_exp(PauliVector::y(self.beta))
            * Unitary2::pauli_exp(PauliVector::x(self.gamma))
    }
}

pub fn pauli_exp(a: PauliVector) -> Result<Unitary2> {
    Unitary2::try_pauli_exp(a)
}

pub fn multiply(a: &Unitary2, b: &Unitary2) -> Unitary2 {
    a * b
}

pub fn dagger(u: &Unitary2) -> Unitary2 {
    u.dagger()
}

pub fn frobenius_distance(a: &Unitary2, b: &Unitary2) -> f64 {
    a.frobenius_distance(b)
}

pub fn trace_fidelity(a: &Unitary2, b: &Unitary2) -> f64 {
    a.trace_fidelity(b)
}

pub fn euler_xyx(u: &Unitary2) -> EulerXYX {
    u.euler_xyx()
}
