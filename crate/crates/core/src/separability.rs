//! Separability criteria for two-mode Gaussian states.
//!
//! Every criterion reports a signed margin (left-hand side minus right-hand
//! side of its inequality). A non-negative margin means separable.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::channel::{classify_regime, ChannelParams, ComplexCM, Regime};
use crate::error::{Error, Result};
use crate::pauli::Mat2;
use crate::propagator::residue_intermode;

/// Tolerance for the block invariants of a correlation matrix fed to a criterion.
pub const CM_TOL: f64 = 1e-9;
/// Margins with magnitude at or below this are treated as on the border when
/// two criteria are compared.
pub const MARGIN_BAND: f64 = 1e-9;
/// Minimum symplectic eigenvalue (minus this slack) a physical state must reach.
pub const PHYSICAL_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Separable,
    Entangled,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Separable => "separable",
            Decision::Entangled => "entangled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub margin: f64,
}

impl Verdict {
    /// Zero margin counts as separable.
    pub fn from_margin(margin: f64) -> Self {
        let decision = if margin >= 0.0 {
            Decision::Separable
        } else {
            Decision::Entangled
        };
        Verdict { decision, margin }
    }

    pub fn is_separable(&self) -> bool {
        self.decision == Decision::Separable
    }
}

/// Outcome of comparing the signs of two margins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignComparison {
    Agree,
    Disagree,
    WithinBand,
}

pub fn compare_signs(a: f64, b: f64, band: f64) -> SignComparison {
    if a.abs() <= band || b.abs() <= band {
        SignComparison::WithinBand
    } else if (a > 0.0) == (b > 0.0) {
        SignComparison::Agree
    } else {
        SignComparison::Disagree
    }
}

/// x-p symmetric state: X = diag(α_a, α_b), Y = β_c σ₁.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XpSymmetricState {
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub beta_c: f64,
}

impl XpSymmetricState {
    pub fn vacuum() -> Self {
        XpSymmetricState {
            alpha_a: 0.5,
            alpha_b: 0.5,
            beta_c: 0.0,
        }
    }

    pub fn to_cm(&self) -> ComplexCM {
        ComplexCM::xp_symmetric(self.alpha_a, self.alpha_b, self.beta_c)
    }

    /// Reads the x-p symmetric entries out of a correlation matrix. Other
    /// entries must vanish to within `tol` (relative to the largest entry).
    pub fn from_cm(cm: &ComplexCM, tol: f64) -> Result<Self> {
        cm.check(tol)?;
        let scale = cm.max_abs().max(1.0);
        let off = [
            cm.x.get(0, 1).norm(),
            cm.y.get(0, 0).norm(),
            cm.y.get(1, 1).norm(),
        ];
        if off.iter().any(|v| *v > tol * scale)
            || !cm.x.is_real(tol * scale)
            || !cm.y.is_real(tol * scale)
        {
            return Err(Error::MalformedCM("not of x-p symmetric form".into()));
        }
        Ok(XpSymmetricState {
            alpha_a: cm.x.get(0, 0).re,
            alpha_b: cm.x.get(1, 1).re,
            beta_c: cm.y.get(0, 1).re,
        })
    }

    pub fn max_abs_diff(&self, other: &XpSymmetricState) -> f64 {
        (self.alpha_a - other.alpha_a)
            .abs()
            .max((self.alpha_b - other.alpha_b).abs())
            .max((self.beta_c - other.beta_c).abs())
    }
}

fn block(alpha: num_complex::Complex64, beta: num_complex::Complex64) -> Mat2 {
    Mat2::new(alpha, beta.conj(), beta, alpha.conj())
}

/// PPT criterion written on the complex blocks
/// γ_i = [[α_i, β_i*], [β_i, α_i*]], i = a, b, c:
///
/// det γ_a det γ_b + (¼ − |det γ_c|)² − tr(γ_a σ₃ γ_c σ₃ γ_b σ₃ γ_c† σ₃) ≥ ¼(det γ_a + det γ_b).
pub fn ppt_general(cm: &ComplexCM) -> Result<Verdict> {
    cm.check(CM_TOL)?;
    let ga = block(cm.x.get(0, 0), cm.y.get(0, 0));
    let gb = block(cm.x.get(1, 1), cm.y.get(1, 1));
    let gc = block(cm.x.get(0, 1), cm.y.get(0, 1));
    let s3 = Mat2::sigma(3);

    let det_a = ga.det().re;
    let det_b = gb.det().re;
    let det_c = gc.det().norm();
    let cross = (ga * s3 * gc * s3 * gb * s3 * gc.adjoint() * s3).trace().re;
    let lhs = det_a * det_b + (0.25 - det_c).powi(2) - cross;
    let rhs = 0.25 * (det_a + det_b);
    Ok(Verdict::from_margin(lhs - rhs))
}

/// Reduced criterion for x-p symmetric states: (α_a − ½)(α_b − ½) − β_c² ≥ 0.
pub fn ppt_xp_symmetric(s: &XpSymmetricState) -> Verdict {
    Verdict::from_margin((s.alpha_a - 0.5) * (s.alpha_b - 0.5) - s.beta_c * s.beta_c)
}

fn require_weak_intermode(gamma3p: f64, eta1p: f64) -> Result<()> {
    let k = gamma3p.hypot(eta1p);
    if k >= 1.0 {
        return Err(Error::RegimeViolation(format!(
            "weak inter-mode criterion needs k < 1, got k = sqrt(gamma3p^2 + eta1p^2) = {k}"
        )));
    }
    Ok(())
}

fn require_strong_intermode(gamma3p: f64, eta1p: f64) -> Result<()> {
    let k = gamma3p.hypot(eta1p);
    if k <= 1.0 {
        return Err(Error::RegimeViolation(format!(
            "strong inter-mode criterion needs k > 1, got k = sqrt(gamma3p^2 + eta1p^2) = {k}"
        )));
    }
    Ok(())
}

/// Stationary-state criterion for weak inter-mode amplification:
/// [1 − Γ₃′²(2n̄₀+1)²] η₁′² ≤ 4n̄₀²(1 − Γ₃′²).
pub fn weak_intermode_criterion(gamma3p: f64, eta1p: f64, nbar0: f64) -> Result<Verdict> {
    require_weak_intermode(gamma3p, eta1p)?;
    let g2 = gamma3p * gamma3p;
    let bracket = 1.0 - g2 * (2.0 * nbar0 + 1.0).powi(2);
    Ok(Verdict::from_margin(
        4.0 * nbar0 * nbar0 * (1.0 - g2) - bracket * eta1p * eta1p,
    ))
}

/// Diagonal entries of M and the σ₁ coefficient of N for inter-mode
/// amplification alone, at normalized time t′.
pub fn intermode_drift(gamma3p: f64, eta1p: f64, tprime: f64) -> (f64, f64, f64) {
    let k = gamma3p.hypot(eta1p);
    let decay = (-tprime).exp();
    let (c, s_over_k) = if k < crate::pauli::PAULI_LIMIT_THRESHOLD {
        (1.0, tprime)
    } else {
        ((k * tprime).cosh(), (k * tprime).sinh() / k)
    };
    let m_a = decay * (c - gamma3p * s_over_k);
    let m_b = decay * (c + gamma3p * s_over_k);
    let n_c = -decay * s_over_k * eta1p;
    (m_a, m_b, n_c)
}

/// State reached from the vacuum at normalized time t′ under inter-mode
/// amplification alone:
///
/// α_a′ = α_a + M_a²(½−α_a) + N_c²(½−α_b) + 2M_aN_cβ_c
/// α_b′ = α_b + M_b²(½−α_b) + N_c²(½−α_a) + 2M_bN_cβ_c
/// β_c′ = β_c − M_aN_c(½−α_a) − M_bN_c(½−α_b) − (M_aM_b + N_c²)β_c
///
/// where (α_a, α_b, β_c) are the stationary blocks. Valid in either regime.
pub fn strong_finite_time_state(params: &ChannelParams, tprime: f64) -> Result<XpSymmetricState> {
    if !params.is_intermode_only() {
        return Err(Error::RegimeViolation(format!(
            "finite-time x-p symmetric state needs eta0 = eta3 = 0, got eta0 = {}, eta3 = {}",
            params.eta0(),
            params.eta3()
        )));
    }
    let residue = residue_intermode(params)?;
    let a = residue.alpha.get(0, 0).re;
    let b = residue.alpha.get(1, 1).re;
    let c = residue.beta.get(0, 1).re;
    let (ma, mb, nc) = intermode_drift(params.gamma3p(), params.eta1p(), tprime);
    Ok(XpSymmetricState {
        alpha_a: a + ma * ma * (0.5 - a) + nc * nc * (0.5 - b) + 2.0 * ma * nc * c,
        alpha_b: b + mb * mb * (0.5 - b) + nc * nc * (0.5 - a) + 2.0 * mb * nc * c,
        beta_c: c - ma * nc * (0.5 - a) - mb * nc * (0.5 - b) - (ma * mb + nc * nc) * c,
    })
}

fn k_factors(gamma3p: f64, eta1p: f64, tprime: f64) -> (f64, f64) {
    let k = gamma3p.hypot(eta1p);
    (((k - 1.0) * tprime).exp(), (-(k + 1.0) * tprime).exp())
}

/// Finite-time polynomial in η₁′², K₁ = e^{(k−1)t′}, K₂ = e^{−(k+1)t′}, Γ₃′
/// and n̄₀, in the form usually quoted for this border:
///
/// η₁′⁴{(K₁²−1)(K₂²−1) − (K₁K₂−1)²(2n̄₀+1)²Γ₃′²}
/// − η₁′²{(K₁K₂−1)²(1−Γ₃′²)Γ₃′²(4n̄₀²−1) + 4n̄₀²(K₁²−1)(K₂²−1)
///        − 4n̄₀Γ₃′²[K₂² − Γ₃′² − 2K₁K₂(1−Γ₃′²) + K₁²(1−K₂²Γ₃′²)]}
/// − 4n̄₀²(K₁²−1)(K₂²−1)(1−Γ₃′²)Γ₃′².
///
/// Its (4n̄₀²−1) factor does not match the evolved state; see
/// [`strong_finite_time_polynomial_corrected`].
pub fn strong_finite_time_polynomial(gamma3p: f64, eta1p: f64, nbar0: f64, tprime: f64) -> f64 {
    let (k1, k2) = k_factors(gamma3p, eta1p, tprime);
    let e = eta1p * eta1p;
    let g = gamma3p * gamma3p;
    let n = nbar0;
    let p1 = k1 * k1 - 1.0;
    let p2 = k2 * k2 - 1.0;
    let q = (k1 * k2 - 1.0).powi(2);

    let quartic = e * e * (p1 * p2 - q * (2.0 * n + 1.0).powi(2) * g);
    let quadratic = -e
        * (q * (1.0 - g) * g * (4.0 * n * n - 1.0) + 4.0 * n * n * p1 * p2
            - 4.0
                * n
                * g
                * (k2 * k2 - g - 2.0 * k1 * k2 * (1.0 - g) + k1 * k1 * (1.0 - k2 * k2 * g)));
    let constant = -4.0 * n * n * p1 * p2 * (1.0 - g) * g;
    quartic + quadratic + constant
}

/// [`strong_finite_time_polynomial`] with the cross term's (4n̄₀²−1) replaced
/// by −(4n̄₀²+1), i.e. plus 8η₁′²Γ₃′²n̄₀²(1−Γ₃′²)(K₁K₂−1)². This equals
/// 4k²(k²−1) times the reduced margin of the evolved state, so for k > 1 it
/// has the same sign.
pub fn strong_finite_time_polynomial_corrected(
    gamma3p: f64,
    eta1p: f64,
    nbar0: f64,
    tprime: f64,
) -> f64 {
    let (k1, k2) = k_factors(gamma3p, eta1p, tprime);
    let e = eta1p * eta1p;
    let g = gamma3p * gamma3p;
    strong_finite_time_polynomial(gamma3p, eta1p, nbar0, tprime)
        + 8.0 * e * g * nbar0 * nbar0 * (1.0 - g) * (k1 * k2 - 1.0).powi(2)
}

/// Reduced margin of the state evolved from the vacuum, evaluated in the
/// eigenbasis of Q = M − N.
///
/// The x-quadrature block obeys V_xx(t) − ½ = R − QRQ with
/// R = [[α_a−½, β_c], [β_c, α_b−½]], and the reduced margin is its
/// determinant. Q has eigenvalues K₁, K₂ on fixed eigenvectors, so with
/// R̃ = UᵀRU the margin is r̃₁₁r̃₂₂(1−K₁²)(1−K₂²) − r̃₁₂²(1−K₁K₂)². Unlike the
/// entrywise route this does not cancel at large t′.
pub fn finite_time_margin_eigenbasis(params: &ChannelParams, tprime: f64) -> Result<f64> {
    if !params.is_intermode_only() {
        return Err(Error::RegimeViolation(format!(
            "finite-time margin needs eta0 = eta3 = 0, got eta0 = {}, eta3 = {}",
            params.eta0(),
            params.eta3()
        )));
    }
    let residue = residue_intermode(params)?;
    let ra = residue.alpha.get(0, 0).re - 0.5;
    let rb = residue.alpha.get(1, 1).re - 0.5;
    let rc = residue.beta.get(0, 1).re;
    let (g, e) = (params.gamma3p(), params.eta1p());
    let k = g.hypot(e);
    if k < crate::pauli::PAULI_LIMIT_THRESHOLD {
        // No drive and symmetric damping: Q is scalar, R̃ = R.
        let decay = (-2.0 * tprime).exp();
        return Ok((1.0 - decay).powi(2) * (ra * rb - rc * rc));
    }
    // Eigenvector of [[−Γ₃′, η₁′], [η₁′, Γ₃′]] for +k is (η₁′, Γ₃′ + k); the
    // one for −k is its rotation by π/2.
    let g_plus_k = if g >= 0.0 { g + k } else { e * e / (k - g) };
    let u1 = if g_plus_k == 0.0 && e == 0.0 {
        [1.0, 0.0]
    } else {
        [e, g_plus_k]
    };
    let norm = u1[0].hypot(u1[1]);
    let u1 = [u1[0] / norm, u1[1] / norm];
    let u2 = [-u1[1], u1[0]];
    let quad =
        |u: [f64; 2], v: [f64; 2]| u[0] * (ra * v[0] + rc * v[1]) + u[1] * (rc * v[0] + rb * v[1]);
    let (r11, r22, r12) = (quad(u1, u1), quad(u2, u2), quad(u1, u2));
    let (k1, k2) = k_factors(g, e, tprime);
    Ok(r11 * r22 * (1.0 - k1 * k1) * (1.0 - k2 * k2) - r12 * r12 * (1.0 - k1 * k2).powi(2))
}

/// All routes to the finite-time strong-amplification verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteTimeVerdict {
    /// Authoritative: reduced criterion on the evolved state (eigenbasis form).
    pub direct: Verdict,
    /// Reduced criterion on the entrywise evolved state. Equal to `direct` up
    /// to rounding, which grows like e^{4(k−1)t′}.
    pub direct_entrywise: Verdict,
    pub polynomial: Verdict,
    pub polynomial_corrected: Verdict,
    /// Sign comparison of `polynomial` against `direct`.
    pub comparison: SignComparison,
}

impl FiniteTimeVerdict {
    pub fn verdict(&self) -> Verdict {
        self.direct
    }
}

/// Finite-time criterion for strong inter-mode amplification (k > 1), from
/// the vacuum. The evolved-state margin decides; both polynomials are
/// reported alongside and `comparison` flags a sign mismatch of the
/// uncorrected one.
pub fn strong_finite_time_criterion(
    params: &ChannelParams,
    tprime: f64,
) -> Result<FiniteTimeVerdict> {
    require_strong_intermode(params.gamma3p(), params.eta1p())?;
    let state = strong_finite_time_state(params, tprime)?;
    let direct = Verdict::from_margin(finite_time_margin_eigenbasis(params, tprime)?);
    let (g, e, n) = (params.gamma3p(), params.eta1p(), params.nbar0());
    let polynomial = Verdict::from_margin(strong_finite_time_polynomial(g, e, n, tprime));
    Ok(FiniteTimeVerdict {
        direct,
        direct_entrywise: ppt_xp_symmetric(&state),
        polynomial,
        polynomial_corrected: Verdict::from_margin(strong_finite_time_polynomial_corrected(
            g, e, n, tprime,
        )),
        comparison: compare_signs(direct.margin, polynomial.margin, MARGIN_BAND),
    })
}

/// t′ → ∞ criterion for strong inter-mode amplification:
/// η₁′² ≤ 2n̄₀(n̄₀ + Γ₃′² + √(n̄₀² + (2n̄₀+1)Γ₃′²)).
pub fn strong_asymptotic_criterion(gamma3p: f64, eta1p: f64, nbar0: f64) -> Result<Verdict> {
    require_strong_intermode(gamma3p, eta1p)?;
    let g2 = gamma3p * gamma3p;
    let n = nbar0;
    let rhs = 2.0 * n * (n + g2 + (n * n + (2.0 * n + 1.0) * g2).sqrt());
    Ok(Verdict::from_margin(rhs - eta1p * eta1p))
}

/// Coefficients of the stationary criterion s₂η₁′⁴ + s₁η₁′² + s₀ ≥ 0 for
/// η₃ = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

impl QuarticCoeffs {
    pub fn margin(&self, eta1p: f64) -> f64 {
        let e = eta1p * eta1p;
        (self.s2 * e + self.s1) * e + self.s0
    }
}

pub fn symmetric_quartic_coeffs(eta0p: f64, gamma3p: f64, nbar0: f64) -> QuarticCoeffs {
    let h = eta0p * eta0p;
    let g = gamma3p * gamma3p;
    let n = nbar0;
    let nn1 = n * (n + 1.0);
    let w = (2.0 * n + 1.0).powi(2);

    let s0 = (1.0 - h).powi(2)
        * (h * h + 8.0 * (1.0 + g) * h * nn1 + 16.0 * (1.0 - g).powi(2) * nn1 * nn1);
    let s2 = (1.0 - h - g * w).powi(2);
    let s1 = -2.0 * h * h * h
        - 8.0 * h * h * nn1
        - 2.0 * g * h * h * (8.0 * n * n + 8.0 * n + 1.0)
        - 4.0 * (1.0 - g) * (1.0 - g * w) * (2.0 * n * n + 2.0 * n + 1.0)
        + 2.0
            * h
            * (8.0 * n * n + 8.0 * n + 3.0 - 4.0 * g * g * nn1 * w
                + g * (16.0 * n.powi(4) + 32.0 * n.powi(3) + 24.0 * n * n + 8.0 * n - 1.0));
    QuarticCoeffs { s0, s1, s2 }
}

/// Stationary criterion with single-mode and inter-mode amplification
/// (η₃ = 0) in the weak regime.
pub fn symmetric_quartic_criterion(params: &ChannelParams) -> Result<Verdict> {
    if params.eta3() != 0.0 {
        return Err(Error::RegimeViolation(format!(
            "quartic criterion needs eta3 = 0, got {}",
            params.eta3()
        )));
    }
    let regime = classify_regime(params);
    if regime.symmetric != Regime::Weak {
        let (_, c2) = params.c12();
        let (b1, _) = params.b12();
        return Err(Error::RegimeViolation(format!(
            "quartic criterion needs weak amplification C2 > B1, got C2 = {c2}, B1 = {b1}"
        )));
    }
    let coeffs = symmetric_quartic_coeffs(params.eta0p(), params.gamma3p(), params.nbar0());
    Ok(Verdict::from_margin(coeffs.margin(params.eta1p())))
}

/// Real covariance matrix in the ordering (x₁, p₁, x₂, p₂), a = (x + ip)/√2,
/// V_ij = ½⟨{ΔR_i, ΔR_j}⟩. The vacuum maps to ½·I₄.
pub fn complex_to_real_cm(cm: &ComplexCM) -> Result<Matrix4<f64>> {
    cm.check(CM_TOL)?;
    let mut v = Matrix4::zeros();
    for j in 0..2 {
        for k in 0..2 {
            let plus = cm.x.get(j, k) + cm.y.get(j, k);
            let minus = cm.x.get(j, k) - cm.y.get(j, k);
            v[(2 * j, 2 * k)] = plus.re;
            v[(2 * j, 2 * k + 1)] = plus.im;
            v[(2 * j + 1, 2 * k + 1)] = minus.re;
            v[(2 * j + 1, 2 * k)] = -minus.im;
        }
    }
    // Symmetrize away the rounding left by the hermiticity tolerance.
    Ok((v + v.transpose()) * 0.5)
}

/// Ω = ⊕ [[0, 1], [−1, 0]].
pub fn symplectic_form() -> Matrix4<f64> {
    let mut omega = Matrix4::zeros();
    for m in 0..2 {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues (ν₋ ≤ ν₊): moduli of the eigenvalues of ΩV, which
/// come in pairs ±iν.
pub fn symplectic_eigenvalues(v: &Matrix4<f64>) -> (f64, f64) {
    let ev = (symplectic_form() * v).complex_eigenvalues();
    let mut moduli: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.total_cmp(b));
    let nu_minus = 0.5 * (moduli[0] + moduli[1]);
    let nu_plus = 0.5 * (moduli[2] + moduli[3]);
    (nu_minus, nu_plus.max(nu_minus))
}

pub fn cm_symplectic_eigenvalues(cm: &ComplexCM) -> Result<(f64, f64)> {
    complex_to_real_cm(cm).map(|v| symplectic_eigenvalues(&v))
}

/// Both symplectic eigenvalues at least ½ (up to [`PHYSICAL_SLACK`]).
pub fn is_physical(cm: &ComplexCM) -> Result<bool> {
    let (nu_min, _) = cm_symplectic_eigenvalues(cm)?;
    Ok(nu_min >= 0.5 - PHYSICAL_SLACK)
}
