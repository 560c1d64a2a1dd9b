//! 2×2 complex matrices, the Pauli basis, and closed-form exponentials of
//! real Pauli combinations.
//!
//! Every 2×2 object in the two-mode problem (the propagator pair, the
//! stationary residue matrices, the blocks of the correlation matrix) lives
//! in [`Mat2`]. Decomposition into the Pauli basis turns the matrix equations
//! for the stationary state into small linear systems, and lets the
//! exponential of a real generator be written down directly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Norms of the traceless part below this use the series limit in [`pauli_exp`].
pub const PAULI_LIMIT_THRESHOLD: f64 = 1e-12;

/// A 2×2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 {
            m: [[a, b], [c, d]],
        }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2::from_real(a, 0.0, 0.0, b)
    }

    /// σ₀ (identity), σ₁, σ₂ or σ₃.
    pub fn sigma(i: usize) -> Self {
        match i {
            0 => Mat2::identity(),
            1 => Mat2::new(ZERO, ONE, ONE, ZERO),
            2 => Mat2::new(ZERO, -I, I, ZERO),
            3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
            _ => panic!("Pauli index {i} out of range 0..=3"),
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Mat2::new(
            f(self.m[0][0]),
            f(self.m[0][1]),
            f(self.m[1][0]),
            f(self.m[1][1]),
        )
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..2)
            .map(|c| self.m[0][c].norm() + self.m[1][c].norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.m.iter().flatten().all(|z| z.im.abs() <= tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.m[0][1] - self.m[1][0]).norm() <= tol
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + rhs.m[0][0],
            self.m[0][1] + rhs.m[0][1],
            self.m[1][0] + rhs.m[1][0],
            self.m[1][1] + rhs.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.map(|z| -z)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: f64) -> Mat2 {
        self.scale_re(rhs)
    }
}

/// Coefficients over (σ₀, σ₁, σ₂, σ₃).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliCoeffs {
    pub c: [Complex64; 4],
}

impl PauliCoeffs {
    pub fn new(c0: Complex64, c1: Complex64, c2: Complex64, c3: Complex64) -> Self {
        PauliCoeffs {
            c: [c0, c1, c2, c3],
        }
    }

    pub fn real(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        PauliCoeffs::new(c0.into(), c1.into(), c2.into(), c3.into())
    }
}

/// Expands `a` as c0σ₀ + c1σ₁ + c2σ₂ + c3σ₃, using cᵢ = tr(σᵢ a)/2.
pub fn decompose(a: &Mat2) -> PauliCoeffs {
    let m = &a.m;
    PauliCoeffs::new(
        (m[0][0] + m[1][1]) * 0.5,
        (m[0][1] + m[1][0]) * 0.5,
        (m[0][1] - m[1][0]) * I * 0.5,
        (m[0][0] - m[1][1]) * 0.5,
    )
}

pub fn compose(c: &PauliCoeffs) -> Mat2 {
    let [c0, c1, c2, c3] = c.c;
    Mat2::new(c0 + c3, c1 - I * c2, c1 + I * c2, c0 - c3)
}

/// exp(−(a0·σ₀ + v·σ)·t) for real `a0` and real 3-vector `v`:
///
/// e^{−a0 t} [cosh(|v|t) σ₀ − sinh(|v|t) v̂·σ]
///
/// When |v| is below [`PAULI_LIMIT_THRESHOLD`] the direction is undefined and
/// the first-order limit e^{−a0 t}[σ₀ − t v·σ] is used instead.
pub fn pauli_exp(a0: f64, v: [f64; 3], t: f64) -> Mat2 {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let pref = (-a0 * t).exp();
    let (c, s_over_norm) = if norm < PAULI_LIMIT_THRESHOLD {
        (1.0, t)
    } else {
        ((norm * t).cosh(), (norm * t).sinh() / norm)
    };
    let coeffs = PauliCoeffs::new(
        (pref * c).into(),
        (-pref * s_over_norm * v[0]).into(),
        (-pref * s_over_norm * v[1]).into(),
        (-pref * s_over_norm * v[2]).into(),
    );
    compose(&coeffs)
}

/// exp(a) by scaling and squaring over a truncated Taylor series.
///
/// The matrix is halved until its 1-norm is at most ½, the series is summed
/// until the next term falls below `tol`·2⁻ˢ (the tail is then bounded by twice
/// that), and the result is squared back `s` times. Independent of
/// [`pauli_exp`]; it serves as a reference for it.
pub fn mat_exp_oracle(a: &Mat2, tol: f64) -> Mat2 {
    assert!(tol > 0.0, "tolerance must be positive");
    let norm = a.norm1();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a.scale_re(0.5f64.powi(squarings as i32));
    let term_tol = tol * 0.5f64.powi(squarings as i32);

    let mut sum = Mat2::identity();
    let mut term = Mat2::identity();
    for n in 1..=60u32 {
        term = (term * scaled).scale_re(1.0 / n as f64);
        sum = sum + term;
        if term.norm1() <= term_tol.max(f64::EPSILON * 1e-3) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn generator(a0: f64, v: [f64; 3], t: f64) -> Mat2 {
        let mut g = Mat2::identity().scale_re(a0);
        for (i, vi) in v.iter().enumerate() {
            g = g + Mat2::sigma(i + 1).scale_re(*vi);
        }
        g.scale_re(-t)
    }

    #[test]
    fn decompose_basis_elements() {
        assert_eq!(
            decompose(&Mat2::identity()),
            PauliCoeffs::real(1.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(
            decompose(&Mat2::sigma(1)),
            PauliCoeffs::real(0.0, 1.0, 0.0, 0.0)
        );
        let s2 = decompose(&Mat2::sigma(2));
        assert_eq!(s2, PauliCoeffs::real(0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn decompose_real_symmetric() {
        let a = Mat2::from_real(2.0, 3.0, 3.0, -2.0);
        assert_eq!(decompose(&a), PauliCoeffs::real(0.0, 3.0, 0.0, 2.0));
    }

    #[test]
    fn compose_sigma2() {
        let s2 = compose(&PauliCoeffs::real(0.0, 0.0, 1.0, 0.0));
        assert_eq!(
            s2,
            Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
        );
        assert_eq!(
            compose(&PauliCoeffs::real(1.0, 0.0, 0.0, 0.0)),
            Mat2::identity()
        );
    }

    #[test]
    fn pauli_exp_trivial_cases() {
        assert_eq!(pauli_exp(0.0, [0.0; 3], 3.7), Mat2::identity());
        let e = pauli_exp(1.0, [0.0; 3], 1.0);
        assert!(e.max_abs_diff(&Mat2::identity().scale_re((-1.0f64).exp())) < 1e-15);
    }

    #[test]
    fn pauli_exp_matches_oracle_reference_point() {
        let (a0, v, t) = (0.3, [0.5, 0.0, 0.2], 1.7);
        let closed = pauli_exp(a0, v, t);
        let series = mat_exp_oracle(&generator(a0, v, t), 1e-15);
        assert!(
            closed.max_abs_diff(&series) <= 1e-12,
            "{closed:?} vs {series:?}"
        );
    }

    #[test]
    fn pauli_exp_limit_branch_is_first_order() {
        let v = [1e-13, 0.0, -2e-13];
        let e = pauli_exp(0.0, v, 2.0);
        let expect = Mat2::identity()
            - (Mat2::sigma(1).scale_re(v[0]) + Mat2::sigma(3).scale_re(v[2])).scale_re(2.0);
        assert!(e.max_abs_diff(&expect) < 1e-24);
    }

    #[test]
    fn oracle_trivial_cases() {
        assert_eq!(mat_exp_oracle(&Mat2::zero(), 1e-14), Mat2::identity());
        let d = mat_exp_oracle(&Mat2::diag(1.0, -1.0), 1e-15);
        assert!(d.max_abs_diff(&Mat2::diag(1f64.exp(), (-1f64).exp())) < 1e-14);
        let n = mat_exp_oracle(&Mat2::from_real(0.0, 1.0, 0.0, 0.0), 1e-15);
        assert!(n.max_abs_diff(&Mat2::from_real(1.0, 1.0, 0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn round_trip_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let mut m = [[ZERO; 2]; 2];
            for z in m.iter_mut().flatten() {
                *z = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            }
            let a = Mat2 { m };
            worst = worst.max(compose(&decompose(&a)).max_abs_diff(&a));
        }
        assert!(worst <= 1e-14, "round-trip error {worst}");
    }

    fn small() -> impl Strategy<Value = f64> {
        -5.0f64..5.0
    }

    proptest! {
        #[test]
        fn compose_inverts_decompose(re in proptest::array::uniform4(-10.0f64..10.0),
                                     im in proptest::array::uniform4(-10.0f64..10.0)) {
            let a = Mat2::new(c(re[0], im[0]), c(re[1], im[1]), c(re[2], im[2]), c(re[3], im[3]));
            prop_assert!(compose(&decompose(&a)).max_abs_diff(&a) <= 1e-14);
        }

        #[test]
        fn one_parameter_group(a0 in -1.0f64..1.0, v in proptest::array::uniform3(-1.0f64..1.0),
                               t in -1.5f64..1.5, s in -1.5f64..1.5) {
            let lhs = pauli_exp(a0, v, t) * pauli_exp(a0, v, s);
            let rhs = pauli_exp(a0, v, t + s);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.max_abs().max(1.0));
        }

        #[test]
        fn agrees_with_series(a0 in small(), v in proptest::array::uniform3(small()), t in small()) {
            let closed = pauli_exp(a0, v, t);
            let series = mat_exp_oracle(&generator(a0, v, t), 1e-16);
            let scale = closed.max_abs().max(1.0);
            prop_assert!(closed.max_abs_diff(&series) <= 1e-12 * scale,
                "diff {} scale {}", closed.max_abs_diff(&series), scale);
        }

        #[test]
        fn determinant_is_scalar_part(a0 in -1.0f64..1.0, v in proptest::array::uniform3(-1.0f64..1.0), t in -2.0f64..2.0) {
            let d = pauli_exp(a0, v, t).det();
            let expect = (-2.0 * a0 * t).exp();
            prop_assert!((d - expect).norm() <= 1e-12 * expect.max(1.0));
        }
    }
}
