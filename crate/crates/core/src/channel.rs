//! Channel parameters, correlation-matrix records and regime classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Mat2;

/// Half-width of the band around the weak/strong boundary that is reported as
/// [`Regime::Boundary`].
pub const REGIME_BOUNDARY_TOL: f64 = 1e-9;

/// Physical rates of the two-mode channel.
///
/// The amplifier matrix is η = η₀σ₀ + η₁σ₁ + η₃σ₃ (real), the damping matrix
/// Γ = diag(Γ₁, Γ₂) = Γ₀σ₀ + Γ₃σ₃, and both modes see a bath with mean
/// occupancy n̄₀. Fields are private so that every instance has passed
/// validation; use [`ChannelParams::new`] or [`ChannelParams::normalized`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    eta0: f64,
    eta1: f64,
    eta3: f64,
    gamma1: f64,
    gamma2: f64,
    nbar0: f64,
}

impl ChannelParams {
    /// Validates raw rates.
    pub fn new(
        eta0: f64,
        eta1: f64,
        eta3: f64,
        gamma1: f64,
        gamma2: f64,
        nbar0: f64,
    ) -> Result<Self> {
        let fields = [
            ("eta0", eta0),
            ("eta1", eta1),
            ("eta3", eta3),
            ("gamma1", gamma1),
            ("gamma2", gamma2),
            ("nbar0", nbar0),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        let gamma0 = 0.5 * (gamma1 + gamma2);
        if gamma0 <= 0.0 {
            return Err(Error::NonPositiveGamma0(gamma0));
        }
        if gamma1 < 0.0 {
            return Err(Error::NegativeDamping {
                name: "gamma1",
                value: gamma1,
            });
        }
        if gamma2 < 0.0 {
            return Err(Error::NegativeDamping {
                name: "gamma2",
                value: gamma2,
            });
        }
        if nbar0 < 0.0 {
            return Err(Error::NegativeNoise(nbar0));
        }
        Ok(ChannelParams {
            eta0,
            eta1,
            eta3,
            gamma1,
            gamma2,
            nbar0,
        })
    }

    /// Builds parameters from normalized quantities with Γ₀ = 1:
    /// η₀′ = 2η₀/Γ₀, η₁′ = 2η₁/Γ₀, η₃′ = 2η₃/Γ₀, Γ₃′ = Γ₃/Γ₀.
    pub fn normalized(
        eta0p: f64,
        eta1p: f64,
        eta3p: f64,
        gamma3p: f64,
        nbar0: f64,
    ) -> Result<Self> {
        if !gamma3p.is_finite() {
            return Err(Error::NonFinite("gamma3p"));
        }
        ChannelParams::new(
            0.5 * eta0p,
            0.5 * eta1p,
            0.5 * eta3p,
            1.0 + gamma3p,
            1.0 - gamma3p,
            nbar0,
        )
    }

    /// Inter-mode amplification only (η₀ = η₃ = 0), normalized.
    pub fn intermode(gamma3p: f64, eta1p: f64, nbar0: f64) -> Result<Self> {
        ChannelParams::normalized(0.0, eta1p, 0.0, gamma3p, nbar0)
    }

    /// Re-validates an existing record.
    pub fn validate(self) -> Result<Self> {
        ChannelParams::new(
            self.eta0,
            self.eta1,
            self.eta3,
            self.gamma1,
            self.gamma2,
            self.nbar0,
        )
    }

    pub fn with_nbar0(self, nbar0: f64) -> Result<Self> {
        ChannelParams { nbar0, ..self }.validate()
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }
    pub fn eta1(&self) -> f64 {
        self.eta1
    }
    pub fn eta3(&self) -> f64 {
        self.eta3
    }
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }
    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
    pub fn nbar0(&self) -> f64 {
        self.nbar0
    }

    /// n̄₀′ = n̄₀ + ½.
    pub fn nbar0p(&self) -> f64 {
        self.nbar0 + 0.5
    }

    pub fn gamma0(&self) -> f64 {
        0.5 * (self.gamma1 + self.gamma2)
    }

    pub fn gamma3(&self) -> f64 {
        0.5 * (self.gamma1 - self.gamma2)
    }

    pub fn gamma3p(&self) -> f64 {
        self.gamma3() / self.gamma0()
    }

    pub fn eta0p(&self) -> f64 {
        2.0 * self.eta0 / self.gamma0()
    }

    pub fn eta1p(&self) -> f64 {
        2.0 * self.eta1 / self.gamma0()
    }

    pub fn eta3p(&self) -> f64 {
        2.0 * self.eta3 / self.gamma0()
    }

    /// k = √(Γ₃′² + η₁′²).
    pub fn k(&self) -> f64 {
        self.gamma3p().hypot(self.eta1p())
    }

    /// t′ = Γ₀t/2.
    pub fn tprime(&self, t: f64) -> f64 {
        0.5 * self.gamma0() * t
    }

    pub fn time_from_tprime(&self, tprime: f64) -> f64 {
        2.0 * tprime / self.gamma0()
    }

    /// The amplifier matrix η as a real 2×2 matrix.
    pub fn eta_matrix(&self) -> Mat2 {
        Mat2::from_real(
            self.eta0 + self.eta3,
            self.eta1,
            self.eta1,
            self.eta0 - self.eta3,
        )
    }

    pub fn gamma_matrix(&self) -> Mat2 {
        Mat2::diag(self.gamma1, self.gamma2)
    }

    /// C₁ = η₀ + Γ₀/2 and C₂ = −η₀ + Γ₀/2.
    pub fn c12(&self) -> (f64, f64) {
        let half = 0.5 * self.gamma0();
        (self.eta0 + half, -self.eta0 + half)
    }

    /// B₁,₂ = √(η₁² + (Γ₃/2 ± η₃)²).
    pub fn b12(&self) -> (f64, f64) {
        let h = 0.5 * self.gamma3();
        (
            self.eta1.hypot(h + self.eta3),
            self.eta1.hypot(h - self.eta3),
        )
    }

    /// B₁b⃗₁ = (η₁, 0, η₃ + Γ₃/2) and B₂b⃗₂ = (−η₁, 0, −η₃ + Γ₃/2), unnormalized.
    pub fn b12_vectors(&self) -> ([f64; 3], [f64; 3]) {
        let h = 0.5 * self.gamma3();
        (
            [self.eta1, 0.0, self.eta3 + h],
            [-self.eta1, 0.0, -self.eta3 + h],
        )
    }

    pub fn is_intermode_only(&self) -> bool {
        self.eta0 == 0.0 && self.eta3 == 0.0
    }

    pub fn regime(&self) -> RegimeClass {
        classify_regime(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Strong,
    Boundary,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::Strong => "strong",
            Regime::Boundary => "boundary",
        }
    }
}

/// Weak/strong classification of a parameter point.
///
/// `intermode` compares k with 1. `symmetric` compares the decay rates of the
/// two drift generators −(η+Γ/2) and (η−Γ/2), i.e. min(C₁−B₁, C₂−B₂) with 0;
/// for η₃ = 0 and η₀ ≥ 0 this is the comparison of C₂ with B₁.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub intermode: Regime,
    pub symmetric: Regime,
}

pub fn classify_regime(params: &ChannelParams) -> RegimeClass {
    let k = params.k();
    let intermode = if (k - 1.0).abs() < REGIME_BOUNDARY_TOL {
        Regime::Boundary
    } else if k < 1.0 {
        Regime::Weak
    } else {
        Regime::Strong
    };

    let decay = decay_margin(params);
    let symmetric = if decay.abs() < REGIME_BOUNDARY_TOL * params.gamma0() {
        Regime::Boundary
    } else if decay > 0.0 {
        Regime::Weak
    } else {
        Regime::Strong
    };
    RegimeClass {
        intermode,
        symmetric,
    }
}

/// min(C₁ − B₁, C₂ − B₂): positive iff both M and N decay to zero.
pub fn decay_margin(params: &ChannelParams) -> f64 {
    let (c1, c2) = params.c12();
    let (b1, b2) = params.b12();
    (c1 - b1).min(c2 - b2)
}

/// Two-mode complex correlation matrix γ = [[X, Y*], [Y, X*]].
///
/// X is hermitian and Y symmetric. With a = (x + ip)/√2 and symmetric
/// ordering, X_jk = ½⟨a_j†a_k + a_k a_j†⟩ and Y_jk = ⟨a_j a_k⟩ for a
/// centred state; the vacuum is X = ½·I, Y = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexCM {
    pub x: Mat2,
    pub y: Mat2,
}

impl ComplexCM {
    pub const BLOCK_TOL: f64 = 1e-12;

    pub fn new(x: Mat2, y: Mat2) -> Self {
        ComplexCM { x, y }
    }

    pub fn vacuum() -> Self {
        ComplexCM::thermal(0.0)
    }

    pub fn thermal(nbar: f64) -> Self {
        ComplexCM {
            x: Mat2::identity().scale_re(nbar + 0.5),
            y: Mat2::zero(),
        }
    }

    /// x-p symmetric form: X = diag(α_a, α_b), Y = β_c σ₁.
    pub fn xp_symmetric(alpha_a: f64, alpha_b: f64, beta_c: f64) -> Self {
        ComplexCM {
            x: Mat2::diag(alpha_a, alpha_b),
            y: Mat2::sigma(1).scale_re(beta_c),
        }
    }

    /// Fails with `MalformedCM` unless X† = X and Yᵀ = Y to within `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(Error::MalformedCM("non-finite entries".into()));
        }
        let scale = self.x.max_abs().max(self.y.max_abs()).max(1.0);
        if !self.x.is_hermitian(tol * scale) {
            return Err(Error::MalformedCM(format!(
                "X is not hermitian: {:?}",
                self.x
            )));
        }
        if !self.y.is_symmetric(tol * scale) {
            return Err(Error::MalformedCM(format!(
                "Y is not symmetric: {:?}",
                self.y
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &ComplexCM) -> f64 {
        self.x
            .max_abs_diff(&other.x)
            .max(self.y.max_abs_diff(&other.y))
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }
}

/// First moments plus correlation matrix. The moments never enter a
/// separability decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianState {
    pub m: [Complex64; 2],
    pub cm: ComplexCM,
}

impl GaussianState {
    pub fn vacuum() -> Self {
        GaussianState::centred(ComplexCM::vacuum())
    }

    pub fn centred(cm: ComplexCM) -> Self {
        GaussianState {
            m: [Complex64::new(0.0, 0.0); 2],
            cm,
        }
    }
}

impl Default for GaussianState {
    fn default() -> Self {
        GaussianState::vacuum()
    }
}
