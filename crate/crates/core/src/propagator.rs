//! Closed-form time evolution of the complex correlation matrix.
//!
//! The drift pair (M, N) solves dM/dt = −ηN − (Γ/2)M, dN/dt = −ηM − (Γ/2)N
//! with M(0) = I, N(0) = 0. Writing P = M + N and Q = M − N decouples it into
//! P = exp(−(η+Γ/2)t) and Q = exp((η−Γ/2)t), each the exponential of a real
//! Pauli combination. The stationary pair (α, β) solves the algebraic
//! balance equations, and the correlation matrix evolves as
//!
//! γ(t) = S (γ(0) − γ∞) S + γ∞,  S = [[M, −N], [−N, M]],  γ∞ = [[α, β*], [β, α*]].

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::channel::{ChannelParams, ComplexCM, GaussianState};
use crate::error::{Error, Result};
use crate::pauli::{compose, mat_exp_oracle, pauli_exp, Mat2, PauliCoeffs};

/// Relative singularity threshold for the stationary systems.
pub const SINGULAR_TOL: f64 = 1e-12;

/// The drift pair (M, N) at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagator {
    pub m: Mat2,
    pub n: Mat2,
    pub t: f64,
}

impl Propagator {
    /// P = M + N.
    pub fn p(&self) -> Mat2 {
        self.m + self.n
    }

    /// Q = M − N.
    pub fn q(&self) -> Mat2 {
        self.m - self.n
    }

    pub fn from_pq(p: Mat2, q: Mat2, t: f64) -> Self {
        Propagator {
            m: (p + q).scale_re(0.5),
            n: (p - q).scale_re(0.5),
            t,
        }
    }

    pub fn max_abs_diff(&self, other: &Propagator) -> f64 {
        self.m
            .max_abs_diff(&other.m)
            .max(self.n.max_abs_diff(&other.n))
    }

    pub fn max_abs(&self) -> f64 {
        self.m.max_abs().max(self.n.max_abs())
    }
}

/// (M, N) from the Pauli closed form with the C₁,₂, B₁,₂, b⃗₁,₂ constants.
pub fn compute_mn(params: &ChannelParams, t: f64) -> Propagator {
    let (c1, c2) = params.c12();
    let (v1, v2) = params.b12_vectors();
    let p = pauli_exp(c1, v1, t);
    let q = pauli_exp(c2, v2, t);
    Propagator::from_pq(p, q, t)
}

/// (M, N) from series exponentials of the summed generators −(η+Γ/2)t and
/// (η−Γ/2)t. Cross-check for [`compute_mn`].
pub fn compute_mn_exp(params: &ChannelParams, t: f64) -> Propagator {
    let eta = params.eta_matrix();
    let half_gamma = params.gamma_matrix().scale_re(0.5);
    let p = mat_exp_oracle(&(-(eta + half_gamma)).scale_re(t), 1e-16);
    let q = mat_exp_oracle(&(eta - half_gamma).scale_re(t), 1e-16);
    Propagator::from_pq(p, q, t)
}

/// Stationary matrices (α, β).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResiduePair {
    pub alpha: Mat2,
    pub beta: Mat2,
}

impl ResiduePair {
    pub fn thermal(nbar0: f64) -> Self {
        ResiduePair {
            alpha: Mat2::identity().scale_re(nbar0 + 0.5),
            beta: Mat2::zero(),
        }
    }

    /// γ∞ = [[α, β*], [β, α*]] as a correlation matrix.
    pub fn to_cm(&self) -> ComplexCM {
        ComplexCM::new(self.alpha, self.beta)
    }

    pub fn max_abs_diff(&self, other: &ResiduePair) -> f64 {
        self.alpha
            .max_abs_diff(&other.alpha)
            .max(self.beta.max_abs_diff(&other.beta))
    }

    fn from_coeffs(alpha: [f64; 3], beta: [f64; 3]) -> Self {
        ResiduePair {
            alpha: compose(&PauliCoeffs::real(alpha[0], alpha[1], 0.0, alpha[2])),
            beta: compose(&PauliCoeffs::real(beta[0], beta[1], 0.0, beta[2])),
        }
    }
}

/// General stationary solution.
///
/// Over the (σ₀, σ₁, σ₃) components the balance equations become
/// Gα − Eβ = n̄₀′(Γ₀, 0, Γ₃)ᵀ and Eα − Gβ = 0, so
/// α = n̄₀′(G − EG⁻¹E)⁻¹(Γ₀, 0, Γ₃)ᵀ and β = G⁻¹Eα. The σ₂ part of α and the
/// imaginary parts of β vanish identically for real η.
pub fn residue_general(params: &ChannelParams) -> Result<ResiduePair> {
    let (g0, g3) = (params.gamma0(), params.gamma3());
    let (e0, e1, e3) = (params.eta0(), params.eta1(), params.eta3());
    let scale3 = g0.powi(3);

    let g = Matrix3::new(g0, 0.0, g3, 0.0, g0, 0.0, g3, 0.0, g0);
    let e = Matrix3::new(e0, e1, e3, e1, e0, 0.0, e3, 0.0, e0) * 2.0;

    let det_g = g.determinant();
    if det_g.abs() < SINGULAR_TOL * scale3 {
        return Err(Error::SingularSystem { det: det_g.abs() });
    }
    let g_inv = g
        .try_inverse()
        .ok_or(Error::SingularSystem { det: det_g.abs() })?;
    let schur = g - e * g_inv * e;
    let det_s = schur.determinant();
    if !det_s.is_finite() || det_s.abs() < SINGULAR_TOL * scale3 {
        return Err(Error::SingularSystem { det: det_s.abs() });
    }
    let rhs = Vector3::new(g0, 0.0, g3) * params.nbar0p();
    let alpha = schur
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem { det: det_s.abs() })?;
    let beta = g_inv * e * alpha;
    Ok(ResiduePair::from_coeffs(
        [alpha[0], alpha[1], alpha[2]],
        [beta[0], beta[1], beta[2]],
    ))
}

/// Closed form of the stationary pair for η₃ = 0.
pub fn residue_eta3_zero(params: &ChannelParams) -> Result<ResiduePair> {
    if params.eta3() != 0.0 {
        return Err(Error::RegimeViolation(format!(
            "eta3 = {} but this closed form requires eta3 = 0",
            params.eta3()
        )));
    }
    let (g0, g3) = (params.gamma0(), params.gamma3());
    let (e0, e1) = (params.eta0(), params.eta1());
    let (g02, g32, e02, e12) = (g0 * g0, g3 * g3, e0 * e0, e1 * e1);
    let r = g32 + 4.0 * e12;

    let delta = (g02 - 4.0 * e02) * ((g0 + 2.0 * e0).powi(2) - r) * ((g0 - 2.0 * e0).powi(2) - r);
    if delta.abs() < SINGULAR_TOL * g0.powi(6) {
        return Err(Error::SingularSystem { det: delta.abs() });
    }
    let pre = params.nbar0p() / delta;

    let a0 = (g02 - 4.0 * e02)
        * ((g02 - g32).powi(2) + 4.0 * g32 * (e12 - e02) - 4.0 * g02 * (e12 + e02));
    let a1 = 4.0
        * e0
        * e1
        * ((2.0 * g02 - g32) * (g02 - g32) + 4.0 * g32 * (e12 - e02) - 8.0 * g02 * e02);
    let a3 = g0
        * g3
        * (16.0 * (2.0 * e02 - e12) * (e02 - e12) + 4.0 * e12 * (g32 - g02) - 8.0 * g02 * e02);

    let b0 = 2.0 * g0 * e0 * (g02 - 4.0 * e02) * (g02 - g32 + 4.0 * (e12 - e02));
    let b1 = 2.0
        * g0
        * e1
        * ((g02 - g32).powi(2)
            + 8.0 * e02 * (2.0 * e12 - 2.0 * e02 - g32)
            + 4.0 * e12 * (g32 - g02));
    let b3 = 2.0
        * e0
        * g3
        * (16.0 * (e02 - e12).powi(2) + g02 * (g32 - g02 - 8.0 * e12) + 4.0 * g32 * (e12 - e02));

    Ok(ResiduePair::from_coeffs(
        [pre * a0, pre * a1, pre * a3],
        [pre * b0, pre * b1, pre * b3],
    ))
}

fn require_intermode(params: &ChannelParams) -> Result<()> {
    if !params.is_intermode_only() {
        return Err(Error::RegimeViolation(format!(
            "eta0 = {}, eta3 = {} but inter-mode amplification alone requires eta0 = eta3 = 0",
            params.eta0(),
            params.eta3()
        )));
    }
    Ok(())
}

/// Stationary pair for inter-mode amplification alone, in normalized form:
/// α = n̄₀′/(1−k²)·[(1−Γ₃′²)σ₀ − Γ₃′η₁′²σ₃], β = n̄₀′η₁′(1−Γ₃′²)/(1−k²)·σ₁.
///
/// The σ₃ term carries a minus sign: the more strongly damped mode holds
/// fewer excitations. This is the sign that solves the balance equations.
pub fn residue_intermode(params: &ChannelParams) -> Result<ResiduePair> {
    require_intermode(params)?;
    let (g3p, e1p) = (params.gamma3p(), params.eta1p());
    let denom = 1.0 - g3p * g3p - e1p * e1p;
    if denom.abs() < SINGULAR_TOL {
        return Err(Error::SingularSystem { det: denom.abs() });
    }
    let pre = params.nbar0p() / denom;
    Ok(ResiduePair::from_coeffs(
        [pre * (1.0 - g3p * g3p), 0.0, -pre * g3p * e1p * e1p],
        [0.0, pre * e1p * (1.0 - g3p * g3p), 0.0],
    ))
}

/// Same pair as [`residue_intermode`], written in raw rates:
/// α = n̄₀′[Γ₀(Γ₀²−Γ₃²)σ₀ − 4Γ₃η₁²σ₃]/(Γ₀(Γ₀²−Γ₃²−4η₁²)),
/// β = 2n̄₀′η₁(Γ₀²−Γ₃²)/(Γ₀(Γ₀²−Γ₃²−4η₁²))·σ₁.
pub fn residue_intermode_raw(params: &ChannelParams) -> Result<ResiduePair> {
    require_intermode(params)?;
    let (g0, g3, e1) = (params.gamma0(), params.gamma3(), params.eta1());
    let denom = g0 * (g0 * g0 - g3 * g3 - 4.0 * e1 * e1);
    if denom.abs() < SINGULAR_TOL * g0.powi(3) {
        return Err(Error::SingularSystem { det: denom.abs() });
    }
    let n = params.nbar0p();
    Ok(ResiduePair::from_coeffs(
        [
            n * g0 * (g0 * g0 - g3 * g3) / denom,
            0.0,
            -n * 4.0 * g3 * e1 * e1 / denom,
        ],
        [0.0, 2.0 * n * e1 * (g0 * g0 - g3 * g3) / denom, 0.0],
    ))
}

/// γ∞ from [`residue_general`]. Only the t → ∞ limit when the drift decays.
pub fn stationary_cm(params: &ChannelParams) -> Result<ComplexCM> {
    residue_general(params).map(|r| r.to_cm())
}

/// Applies γ ↦ S(γ − γ∞)S + γ∞ blockwise for a given drift pair.
pub fn apply_channel(cm: &ComplexCM, prop: &Propagator, stationary: &ComplexCM) -> ComplexCM {
    let (m, n) = (prop.m, prop.n);
    let dx = cm.x - stationary.x;
    let dy = cm.y - stationary.y;
    let (dxc, dyc) = (dx.conj(), dy.conj());
    let x = m * dx * m - n * dy * m - m * dyc * n + n * dxc * n + stationary.x;
    let y = -(n * dx * m) + m * dy * m + n * dyc * n - m * dxc * n + stationary.y;
    ComplexCM::new(x, y)
}

/// Evolves a state for time `t` (raw units).
///
/// First moments follow the homogeneous flow m(t) = M m(0) − N m(0)*.
pub fn evolve(state: &GaussianState, params: &ChannelParams, t: f64) -> Result<GaussianState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "evolution time must be finite and >= 0, got {t}"
        )));
    }
    let stationary = stationary_cm(params)?;
    let prop = compute_mn(params, t);
    let cm = apply_channel(&state.cm, &prop, &stationary);
    let m0 = state.m;
    let mut m = [Complex64::new(0.0, 0.0); 2];
    for (i, mi) in m.iter_mut().enumerate() {
        for (j, m0j) in m0.iter().enumerate() {
            *mi += prop.m.get(i, j) * m0j - prop.n.get(i, j) * m0j.conj();
        }
    }
    Ok(GaussianState { m, cm })
}

/// Evolves the vacuum to normalized time t′.
pub fn evolve_vacuum_tprime(params: &ChannelParams, tprime: f64) -> Result<GaussianState> {
    evolve(
        &GaussianState::vacuum(),
        params,
        params.time_from_tprime(tprime),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol * b.max_abs().max(1.0)
    }

    #[test]
    fn mn_at_time_zero() {
        let p = ChannelParams::new(0.2, 0.4, 0.1, 1.3, 0.7, 0.0).unwrap();
        let prop = compute_mn(&p, 0.0);
        assert_eq!(prop.m, Mat2::identity());
        assert_eq!(prop.n, Mat2::zero());
        let prop = compute_mn_exp(&p, 0.0);
        assert_eq!(prop.m, Mat2::identity());
        assert_eq!(prop.n, Mat2::zero());
    }

    #[test]
    fn pure_damping_decouples() {
        let p = ChannelParams::new(0.0, 0.0, 0.0, 1.3, 0.4, 0.2).unwrap();
        for &t in &[0.3, 1.0, 4.5] {
            let expect = Mat2::diag((-1.3 * t / 2.0f64).exp(), (-0.4 * t / 2.0f64).exp());
            let prop = compute_mn(&p, t);
            assert!(close(&prop.m, &expect, 1e-15));
            assert_eq!(prop.n.max_abs(), 0.0);
            let prop = compute_mn_exp(&p, t);
            assert!(close(&prop.m, &expect, 1e-14));
            assert!(prop.n.max_abs() < 1e-15);
        }
    }

    #[test]
    fn commuting_generators_reduce_to_diagonal() {
        // η₁ = 0 leaves every generator diagonal.
        let p = ChannelParams::new(0.3, 0.0, -0.2, 1.1, 0.5, 0.0).unwrap();
        let t = 1.7;
        let (d1, d2): (f64, f64) = (0.3 - 0.2, 0.3 + 0.2);
        let p1 = (-(d1 + 0.55) * t).exp();
        let p2 = (-(d2 + 0.25) * t).exp();
        let q1 = ((d1 - 0.55) * t).exp();
        let q2 = ((d2 - 0.25) * t).exp();
        let m = Mat2::diag(0.5 * (p1 + q1), 0.5 * (p2 + q2));
        let n = Mat2::diag(0.5 * (p1 - q1), 0.5 * (p2 - q2));
        for prop in [compute_mn(&p, t), compute_mn_exp(&p, t)] {
            assert!(close(&prop.m, &m, 1e-14));
            assert!(close(&prop.n, &n, 1e-14));
        }
    }

    #[test]
    fn closed_and_series_forms_agree() {
        let p = ChannelParams::new(0.2, 0.4, 0.1, 1.3, 0.7, 0.0).unwrap();
        let a = compute_mn(&p, 2.0);
        let b = compute_mn_exp(&p, 2.0);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn thermal_equilibrium_without_amplification() {
        let p = ChannelParams::new(0.0, 0.0, 0.0, 1.4, 0.6, 0.35).unwrap();
        let r = residue_general(&p).unwrap();
        assert!(r.max_abs_diff(&ResiduePair::thermal(0.35)) < 1e-15);
        let r = residue_eta3_zero(&p).unwrap();
        assert!(r.max_abs_diff(&ResiduePair::thermal(0.35)) < 1e-15);
        let r = residue_intermode(&p).unwrap();
        assert!(r.max_abs_diff(&ResiduePair::thermal(0.35)) < 1e-15);
    }

    #[test]
    fn intermode_residue_reference_value() {
        let p = ChannelParams::intermode(0.0, 0.5, 0.0).unwrap();
        let r = residue_intermode(&p).unwrap();
        let expect = ResiduePair {
            alpha: Mat2::identity().scale_re(2.0 / 3.0),
            beta: Mat2::sigma(1).scale_re(1.0 / 3.0),
        };
        assert!(r.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn intermode_forms_agree_on_grid() {
        let mut worst = 0.0f64;
        for i in 0..19 {
            for j in 0..25 {
                for &n in &[0.0, 0.1, 0.7, 2.0] {
                    let g3p = -0.9 + 0.1 * i as f64;
                    let e1p = 0.013 + 0.08 * j as f64;
                    let p = ChannelParams::intermode(g3p, e1p, n).unwrap();
                    let (Ok(a), Ok(b)) = (residue_intermode(&p), residue_intermode_raw(&p)) else {
                        continue;
                    };
                    worst = worst.max(a.max_abs_diff(&b) / a.alpha.max_abs().max(1.0));
                }
            }
        }
        assert!(worst <= 1e-14, "worst {worst}");
    }

    #[test]
    fn eta3_zero_form_reference_point() {
        let p = ChannelParams::new(0.25, 0.3, 0.0, 1.4, 0.6, 0.1).unwrap();
        let a = residue_eta3_zero(&p).unwrap();
        let b = residue_general(&p).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12, "{a:?}\n{b:?}");
    }

    #[test]
    fn eta3_zero_reduces_to_intermode() {
        let p = ChannelParams::intermode(0.3, 0.6, 0.2).unwrap();
        let a = residue_eta3_zero(&p).unwrap();
        let b = residue_intermode(&p).unwrap();
        let c = residue_general(&p).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14, "{}", a.max_abs_diff(&b));
        assert!(c.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn intermode_singular_at_boundary() {
        let p = ChannelParams::intermode(0.6, 0.8, 0.0).unwrap();
        assert!(matches!(
            residue_intermode(&p),
            Err(Error::SingularSystem { .. })
        ));
        assert!(matches!(
            residue_general(&p),
            Err(Error::SingularSystem { .. })
        ));
        assert!(matches!(
            residue_eta3_zero(&p),
            Err(Error::SingularSystem { .. })
        ));
        let with_eta0 = ChannelParams::normalized(0.5, 0.8, 0.0, 0.6, 0.0).unwrap();
        assert!(matches!(
            residue_intermode(&with_eta0),
            Err(Error::RegimeViolation(_))
        ));
    }

    #[test]
    fn evolve_at_time_zero_is_identity() {
        let p = ChannelParams::new(0.2, 0.4, 0.1, 1.3, 0.7, 0.3).unwrap();
        let s = GaussianState {
            m: [Complex64::new(0.3, -0.1), Complex64::new(0.0, 0.7)],
            cm: ComplexCM::xp_symmetric(0.9, 0.7, 0.2),
        };
        let out = evolve(&s, &p, 0.0).unwrap();
        assert!(out.cm.max_abs_diff(&s.cm) < 1e-15);
        assert_eq!(out.m, s.m);
    }

    #[test]
    fn stationary_state_is_fixed() {
        let p = ChannelParams::new(0.2, 0.25, 0.1, 1.3, 0.7, 0.3).unwrap();
        let st = GaussianState::centred(stationary_cm(&p).unwrap());
        for &t in &[0.5, 3.0, 10.0] {
            let out = evolve(&st, &p, t).unwrap();
            assert!(out.cm.max_abs_diff(&st.cm) < 1e-13);
        }
    }

    #[test]
    fn weak_intermode_vacuum_relaxes_to_residue() {
        // k ≈ 0.42, so transients scale as e^{−2(1−k)t′} ≈ 1e-15.
        let p = ChannelParams::intermode(0.3, 0.3, 0.1).unwrap();
        let out = evolve_vacuum_tprime(&p, 30.0).unwrap();
        let target = residue_intermode(&p).unwrap().to_cm();
        assert!(out.cm.max_abs_diff(&target) < 1e-10);
    }

    #[test]
    fn first_moments_follow_classical_drift() {
        // d m/dt = η m* − (Γ/2) m, checked by central differences.
        let p = ChannelParams::new(0.2, 0.4, 0.1, 1.3, 0.7, 0.0).unwrap();
        let s = GaussianState {
            m: [Complex64::new(0.3, -0.1), Complex64::new(-0.5, 0.7)],
            cm: ComplexCM::vacuum(),
        };
        let (t, h) = (0.8, 1e-5);
        let at = |t| evolve(&s, &p, t).unwrap().m;
        let (lo, mid, hi) = (at(t - h), at(t), at(t + h));
        let eta = p.eta_matrix();
        let g = p.gamma_matrix();
        for i in 0..2 {
            let deriv = (hi[i] - lo[i]) / (2.0 * h);
            let rhs = (0..2).fold(Complex64::new(0.0, 0.0), |acc, j| {
                acc + eta.get(i, j) * mid[j].conj() - 0.5 * g.get(i, j) * mid[j]
            });
            assert!((deriv - rhs).norm() < 1e-8, "{deriv} vs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn pq_semigroup(e in proptest::array::uniform3(-1.0f64..1.0), g1 in 0.1f64..2.0, g2 in 0.1f64..2.0,
                        t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
            let p = ChannelParams::new(e[0], e[1], e[2], g1, g2, 0.0).unwrap();
            let a = compute_mn(&p, t1);
            let b = compute_mn(&p, t2);
            let ab = compute_mn(&p, t1 + t2);
            prop_assert!(close(&(a.p() * b.p()), &ab.p(), 1e-11));
            prop_assert!(close(&(a.q() * b.q()), &ab.q(), 1e-11));
        }

        #[test]
        fn mn_solves_drift_ode(e in proptest::array::uniform3(-1.0f64..1.0), g1 in 0.1f64..2.0, g2 in 0.1f64..2.0,
                               t in 0.1f64..3.0) {
            let p = ChannelParams::new(e[0], e[1], e[2], g1, g2, 0.0).unwrap();
            let h = 1e-5;
            let lo = compute_mn(&p, t - h);
            let hi = compute_mn(&p, t + h);
            let mid = compute_mn(&p, t);
            let dm = (hi.m - lo.m).scale_re(0.5 / h);
            let dn = (hi.n - lo.n).scale_re(0.5 / h);
            let eta = p.eta_matrix();
            let hg = p.gamma_matrix().scale_re(0.5);
            let rm = -(eta * mid.n) - hg * mid.m;
            let rn = -(eta * mid.m) - hg * mid.n;
            let scale = mid.max_abs().max(1.0);
            prop_assert!(dm.max_abs_diff(&rm) <= 1e-7 * scale);
            prop_assert!(dn.max_abs_diff(&rn) <= 1e-7 * scale);
        }

        #[test]
        fn evolution_preserves_block_structure(e in proptest::array::uniform3(-0.6f64..0.6), g1 in 0.1f64..2.0,
                                               g2 in 0.1f64..2.0, n in 0.0f64..1.0, t in 0.0f64..4.0) {
            let p = ChannelParams::new(e[0], e[1], e[2], g1, g2, n).unwrap();
            prop_assume!(residue_general(&p).is_ok());
            let s = GaussianState::centred(ComplexCM::new(
                Mat2::new(0.8.into(), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), 0.9.into()),
                Mat2::new(Complex64::new(0.1, 0.05), Complex64::new(-0.2, 0.1), Complex64::new(-0.2, 0.1), 0.0.into()),
            ));
            let out = evolve(&s, &p, t).unwrap();
            let scale = out.cm.max_abs().max(1.0);
            prop_assert!(out.cm.x.is_hermitian(1e-12 * scale));
            prop_assert!(out.cm.y.is_symmetric(1e-12 * scale));
        }

        #[test]
        fn xp_symmetric_form_is_closed(g3p in -0.9f64..0.9, e1p in 0.0f64..1.8, n in 0.0f64..1.0,
                                       a in 0.5f64..2.0, b in 0.5f64..2.0, c in -0.4f64..0.4, tp in 0.0f64..3.0) {
            let p = ChannelParams::intermode(g3p, e1p, n).unwrap();
            prop_assume!(residue_general(&p).is_ok());
            let s = GaussianState::centred(ComplexCM::xp_symmetric(a, b, c));
            let out = evolve(&s, &p, p.time_from_tprime(tp)).unwrap().cm;
            let scale = out.max_abs().max(1.0);
            prop_assert!(out.x.get(0, 1).norm() <= 1e-12 * scale);
            prop_assert!(out.x.is_real(1e-12 * scale) && out.y.is_real(1e-12 * scale));
            prop_assert!(out.y.get(0, 0).norm() <= 1e-12 * scale);
            prop_assert!(out.y.get(1, 1).norm() <= 1e-12 * scale);
        }
    }
}
