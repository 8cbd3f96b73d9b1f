//! Exact single-qubit linear algebra.
//!
//! States, 2x2 unitaries and density matrices are small `Copy` values; every
//! operation is a pure function. Rotation angles that are exact multiples of
//! `pi/4` (in the half-angle) are evaluated from an exact table so that the
//! noiseless protocol produces exact zero amplitudes.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{invalid, Result};

pub type C64 = Complex64;

/// Tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for normalisation after accumulated gate chains.
pub const CHAIN_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `(sin a, cos a)`, exact when `a` is a multiple of `pi/4`.
pub(crate) fn exact_sin_cos(a: f64) -> (f64, f64) {
    let k = a / FRAC_PI_4;
    let rounded = k.round();
    if (k - rounded).abs() < 1e-12 {
        let s = FRAC_1_SQRT_2;
        return match (rounded as i64).rem_euclid(8) {
            0 => (0.0, 1.0),
            1 => (s, s),
            2 => (1.0, 0.0),
            3 => (s, -s),
            4 => (0.0, -1.0),
            5 => (-s, -s),
            6 => (-1.0, 0.0),
            _ => (-s, s),
        };
    }
    a.sin_cos()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    amp0: C64,
    amp1: C64,
}

impl QubitState {
    pub const ZERO: QubitState = QubitState { amp0: ONE, amp1: ZERO };
    pub const ONE: QubitState = QubitState { amp0: ZERO, amp1: ONE };
    /// `(|0> + |1>)/sqrt(2)`.
    pub const PLUS: QubitState = QubitState {
        amp0: C64::new(FRAC_1_SQRT_2, 0.0),
        amp1: C64::new(FRAC_1_SQRT_2, 0.0),
    };

    /// Builds a state from amplitudes, rejecting anything whose norm is more
    /// than [`CHAIN_TOL`] away from one.
    pub fn new(amp0: C64, amp1: C64) -> Result<Self> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > CHAIN_TOL {
            return Err(invalid(format!("state norm {norm} is not 1")));
        }
        Ok(QubitState { amp0, amp1 })
    }

    /// Computational basis state for `bit`.
    pub fn basis(bit: bool) -> Self {
        if bit {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn amp0(&self) -> C64 {
        self.amp0
    }

    pub fn amp1(&self) -> C64 {
        self.amp1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    /// Probability of outcome 1 in the computational basis.
    pub fn prob_one(&self) -> f64 {
        let p1 = self.amp1.norm_sqr();
        p1 / (self.amp0.norm_sqr() + p1)
    }

    pub fn scale(&self, phase: C64) -> Self {
        QubitState { amp0: self.amp0 * phase, amp1: self.amp1 * phase }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QubitState) -> C64 {
        self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1
    }

    /// Bloch vector `(x, y, z)`.
    pub fn bloch(&self) -> [f64; 3] {
        DensityMatrix::from_pure(self).bloch()
    }
}

/// A 2x2 unitary, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[C64; 2]; 2],
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 { m: [[ONE, ZERO], [ZERO, ONE]] };

    /// Builds an operator from its entries; fails unless `U^dagger U = I`
    /// within [`ALGEBRA_TOL`].
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let u = Unitary2 { m };
        if !u.is_unitary(ALGEBRA_TOL) {
            return Err(invalid("matrix is not unitary"));
        }
        Ok(u)
    }

    pub(crate) fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Unitary2 { m: [[C64::new(a, 0.0), C64::new(b, 0.0)], [C64::new(c, 0.0), C64::new(d, 0.0)]] }
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn dagger(&self) -> Self {
        let m = self.m;
        Unitary2 { m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]] }
    }

    /// `self^k`; `k = 0` is the identity.
    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::IDENTITY, |acc, _| *self * acc)
    }

    /// `self^bit`.
    pub fn pow_bit(&self, bit: bool) -> Self {
        if bit {
            *self
        } else {
            Self::IDENTITY
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.dagger() * *self).approx_eq(&Self::IDENTITY, tol)
    }

    pub fn approx_eq(&self, other: &Unitary2, tol: f64) -> bool {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Equality up to a global phase, entrywise within `tol`.
    pub fn phase_equiv(&self, other: &Unitary2, tol: f64) -> bool {
        // Hilbert-Schmidt overlap |tr(A^dagger B)| = 2 iff B = e^{i phi} A.
        let overlap = (self.dagger() * *other).trace();
        (overlap.norm() - 2.0).abs() <= tol
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn apply(&self, s: &QubitState) -> QubitState {
        let m = self.m;
        QubitState {
            amp0: m[0][0] * s.amp0 + m[0][1] * s.amp1,
            amp1: m[1][0] * s.amp0 + m[1][1] * s.amp1,
        }
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2 { m: mat_mul(&self.m, &rhs.m) }
    }
}

fn mat_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `R_y(theta) = exp(-i theta sigma_y / 2)`.
pub fn ry(theta: f64) -> Result<Unitary2> {
    if !theta.is_finite() {
        return Err(invalid(format!("rotation angle {theta} is not finite")));
    }
    let (s, c) = exact_sin_cos(theta / 2.0);
    Ok(Unitary2::from_real(c, -s, s, c))
}

/// `U = R_y(pi/2)`.
pub fn gate_u() -> Unitary2 {
    ry(std::f64::consts::FRAC_PI_2).expect("finite angle")
}

/// `V = R_y(pi) = [[0, -1], [1, 0]]`.
pub fn gate_v() -> Unitary2 {
    ry(std::f64::consts::PI).expect("finite angle")
}

pub fn apply(u: &Unitary2, s: &QubitState) -> QubitState {
    u.apply(s)
}

/// Projective measurement in the computational basis. Outcome 1 iff
/// `sample < |amp1|^2`, so the result is a pure function of its inputs.
pub fn measure_z(s: &QubitState, sample: f64) -> Result<(bool, QubitState)> {
    if !(0.0..1.0).contains(&sample) {
        return Err(invalid(format!("measurement sample {sample} outside [0, 1)")));
    }
    let outcome = sample < s.prob_one();
    Ok((outcome, QubitState::basis(outcome)))
}

/// `|<a|b>| >= 1 - tol`.
pub fn global_phase_equiv(a: &QubitState, b: &QubitState, tol: f64) -> bool {
    a.inner(b).norm() >= 1.0 - tol
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: [[C64; 2]; 2],
}

impl DensityMatrix {
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let rho = DensityMatrix { m };
        if !rho.is_valid(ALGEBRA_TOL) {
            return Err(invalid("not a density matrix"));
        }
        Ok(rho)
    }

    pub fn diag(p0: f64, p1: f64) -> Result<Self> {
        Self::new([[C64::new(p0, 0.0), ZERO], [ZERO, C64::new(p1, 0.0)]])
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix { m: [[C64::new(0.5, 0.0), ZERO], [ZERO, C64::new(0.5, 0.0)]] }
    }

    pub fn from_pure(s: &QubitState) -> Self {
        let v = [s.amp0, s.amp1];
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = v[i] * v[j].conj();
            }
        }
        DensityMatrix { m }
    }

    /// Convex combination of `terms`; the weights must be non-negative and
    /// sum to one within [`ALGEBRA_TOL`].
    pub fn mix(terms: &[(f64, DensityMatrix)]) -> Result<Self> {
        if terms.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("mixture weights must be finite and non-negative"));
        }
        let total: f64 = terms.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > ALGEBRA_TOL {
            return Err(invalid(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self::weighted_sum(terms))
    }

    /// Unnormalised `sum w_k rho_k`, used for sub-normalised accumulators.
    pub(crate) fn weighted_sum(terms: &[(f64, DensityMatrix)]) -> Self {
        let mut m = [[ZERO; 2]; 2];
        for (w, rho) in terms {
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += rho.m[i][j] * *w;
                }
            }
        }
        DensityMatrix { m }
    }

    pub(crate) fn zero() -> Self {
        DensityMatrix { m: [[ZERO; 2]; 2] }
    }

    pub(crate) fn add_scaled(&mut self, w: f64, rho: &DensityMatrix) {
        for i in 0..2 {
            for j in 0..2 {
                self.m[i][j] += rho.m[i][j] * w;
            }
        }
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (self.m[0][0] + self.m[1][1]).re
    }

    /// `U rho U^dagger`.
    pub fn conjugate(&self, u: &Unitary2) -> Self {
        let um = u.entries();
        let ud = u.dagger().entries();
        DensityMatrix { m: mat_mul(&mat_mul(&um, &self.m), &ud) }
    }

    /// Erases the off-diagonal coherences.
    pub fn dephased(&self) -> Self {
        DensityMatrix { m: [[self.m[0][0], ZERO], [ZERO, self.m[1][1]]] }
    }

    /// Population of `|1>`.
    pub fn prob_one(&self) -> f64 {
        self.m[1][1].re
    }

    /// Eigenvalues in ascending order (the matrix is Hermitian).
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.m)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let m = self.m;
        let hermitian = (m[0][1] - m[1][0].conj()).norm() <= tol
            && m[0][0].im.abs() <= tol
            && m[1][1].im.abs() <= tol;
        hermitian && (self.trace() - 1.0).abs() <= tol && self.eigenvalues()[0] >= -tol
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// `(x, y, z)` with `rho = (I + x X + y Y + z Z) / 2`.
    pub fn bloch(&self) -> [f64; 3] {
        let m = self.m;
        [2.0 * m[1][0].re, 2.0 * m[1][0].im, (m[0][0] - m[1][1]).re]
    }

    /// Von Neumann entropy in bits of the normalised state `rho / tr(rho)`.
    pub fn entropy_bits(&self) -> f64 {
        let tr = self.trace();
        if tr <= 0.0 {
            return 0.0;
        }
        self.eigenvalues()
            .iter()
            .map(|&l| l / tr)
            .filter(|&p| p > 1e-15)
            .map(|p| -p * p.log2())
            .sum()
    }
}

fn hermitian_eigenvalues(m: &[[C64; 2]; 2]) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let mean = (a + d) / 2.0;
    let half_gap = ((a - d) / 2.0).hypot(m[0][1].norm());
    [mean - half_gap, mean + half_gap]
}

/// Half the sum of singular values of `a - b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let mut diff = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            diff[i][j] = a.m[i][j] - b.m[i][j];
        }
    }
    // The difference is Hermitian, so its singular values are |eigenvalues|.
    hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>() / 2.0
}
