//! Independent numerical oracles for the closed forms.
//!
//! Nothing in here calls the Pauli exponential or the closed-form drift pair:
//! the drift ODE is integrated with classical RK4 on plain 2×2 arithmetic,
//! the stationary pair is checked by substitution, and separability of
//! a real covariance matrix is decided from its own blocks.

use nalgebra::{Matrix2, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{classify_regime, ChannelParams, Regime};
use crate::error::{Error, Result};
use crate::pauli::Mat2;
use crate::propagator::{residue_eta3_zero, residue_intermode, Propagator, ResiduePair};
use crate::separability::{
    compare_signs, ppt_general, strong_asymptotic_criterion, strong_finite_time_criterion,
    symmetric_quartic_criterion, weak_intermode_criterion, SignComparison, MARGIN_BAND,
};

/// Classical RK4 for dM/dt = −ηN − (Γ/2)M, dN/dt = −ηM − (Γ/2)N from
/// M(0) = I, N(0) = 0.
pub fn integrate_mn_ode(params: &ChannelParams, t: f64, steps: usize) -> Propagator {
    assert!(steps >= 1, "RK4 needs at least one step");
    let eta = params.eta_matrix();
    let half_gamma = params.gamma_matrix().scale_re(0.5);
    let rhs = |m: Mat2, n: Mat2| (-(eta * n) - half_gamma * m, -(eta * m) - half_gamma * n);

    let h = t / steps as f64;
    let (mut m, mut n) = (Mat2::identity(), Mat2::zero());
    for _ in 0..steps {
        let (k1m, k1n) = rhs(m, n);
        let (k2m, k2n) = rhs(m + k1m * (0.5 * h), n + k1n * (0.5 * h));
        let (k3m, k3n) = rhs(m + k2m * (0.5 * h), n + k2n * (0.5 * h));
        let (k4m, k4n) = rhs(m + k3m * h, n + k3n * h);
        m = m + (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
        n = n + (k1n + k2n * 2.0 + k3n * 2.0 + k4n) * (h / 6.0);
    }
    Propagator { m, n, t }
}

/// Max-norm residuals of the two stationary balance equations:
/// r1 = ‖2(ηα + α*η) − Γβ − βΓ‖, r2 = ‖Γα + αΓ − 2ηβ − 2β*η − Γ(n̄+½) − (n̄+½)Γ‖.
pub fn residual_alpha_beta(params: &ChannelParams, pair: &ResiduePair) -> (f64, f64) {
    let eta = params.eta_matrix();
    let gamma = params.gamma_matrix();
    let (a, b) = (pair.alpha, pair.beta);
    let noise = Mat2::identity().scale_re(params.nbar0p());
    let r1 = (eta * a + a.conj() * eta) * 2.0 - gamma * b - b * gamma;
    let r2 = gamma * a + a * gamma
        - (eta * b) * 2.0
        - (b.conj() * eta) * 2.0
        - gamma * noise
        - noise * gamma;
    (r1.max_abs(), r2.max_abs())
}

fn sub2(v: &Matrix4<f64>, r: usize, c: usize) -> Matrix2<f64> {
    v.fixed_view::<2, 2>(r, c).into_owned()
}

/// Simon's criterion on a real covariance matrix with blocks [[A, C], [Cᵀ, B]]:
/// det A det B + (¼ − |det C|)² − tr(AJCJBJCᵀJ) − ¼(det A + det B) ≥ 0.
pub fn simon_margin(v: &Matrix4<f64>) -> f64 {
    let a = sub2(v, 0, 0);
    let b = sub2(v, 2, 2);
    let c = sub2(v, 0, 2);
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let (da, db, dc) = (a.determinant(), b.determinant(), c.determinant());
    let cross = (a * j * c * j * b * j * c.transpose() * j).trace();
    da * db + (0.25 - dc.abs()).powi(2) - cross - 0.25 * (da + db)
}

/// Smallest symplectic eigenvalue of the partial transpose (p₂ → −p₂),
/// from the invariants Δ̃ = det A + det B − 2 det C and det V.
pub fn partial_transpose_min_symplectic(v: &Matrix4<f64>) -> f64 {
    let a = sub2(v, 0, 0);
    let b = sub2(v, 2, 2);
    let c = sub2(v, 0, 2);
    let delta = a.determinant() + b.determinant() - 2.0 * c.determinant();
    let det = v.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0);
    (0.5 * (delta - disc.sqrt())).max(0.0).sqrt()
}

/// Which two criteria a report compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionPair {
    /// Weak inter-mode inequality vs general PPT on the stationary state.
    WeakVsPpt,
    /// Quartic (η₃ = 0) vs general PPT on the stationary state.
    QuarticVsPpt,
    /// Finite-time polynomial vs the reduced criterion on the evolved state.
    FinitePolynomialVsDirect,
    /// Corrected finite-time polynomial vs the evolved state.
    FiniteCorrectedVsDirect,
    /// Entrywise evolved-state margin vs the eigenbasis form of the same.
    FiniteEntrywiseVsDirect,
    /// Asymptotic strong inequality vs the finite-time direct path at t′ = 30.
    AsymptoticVsFinite,
}

/// One grid node (normalized variables).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub gamma3p: f64,
    pub eta1p: f64,
    pub eta0p: f64,
    pub nbar0: f64,
    pub tprime: f64,
}

impl GridPoint {
    pub fn params(&self) -> Result<ChannelParams> {
        ChannelParams::normalized(self.eta0p, self.eta1p, 0.0, self.gamma3p, self.nbar0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub point: GridPoint,
    pub margin_a: f64,
    pub margin_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pair: CriterionPair,
    pub total: usize,
    pub agree: usize,
    pub disagree: usize,
    pub within_band: usize,
    pub disagreements: Vec<Disagreement>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.disagree == 0
    }
}

/// Time at which the asymptotic strong inequality is compared with the
/// finite-time path.
pub const ASYMPTOTIC_TPRIME: f64 = 30.0;

fn regime_error(point: &GridPoint, what: &str) -> Error {
    Error::RegimeViolation(format!("grid point {point:?} is outside the {what} regime"))
}

/// Both margins at one point, each scaled to be comparable with the band.
fn pair_margins(pair: CriterionPair, point: &GridPoint) -> Result<(f64, f64)> {
    let params = point.params()?;
    let regime = classify_regime(&params);
    match pair {
        CriterionPair::WeakVsPpt => {
            if point.eta0p != 0.0 || regime.intermode != Regime::Weak {
                return Err(regime_error(point, "weak inter-mode"));
            }
            let a = weak_intermode_criterion(point.gamma3p, point.eta1p, point.nbar0)?;
            let b = ppt_general(&residue_intermode(&params)?.to_cm())?;
            Ok((a.margin, b.margin))
        }
        CriterionPair::QuarticVsPpt => {
            if regime.symmetric != Regime::Weak {
                return Err(regime_error(point, "weak symmetric"));
            }
            let a = symmetric_quartic_criterion(&params)?;
            let b = ppt_general(&residue_eta3_zero(&params)?.to_cm())?;
            Ok((a.margin, b.margin))
        }
        CriterionPair::FinitePolynomialVsDirect
        | CriterionPair::FiniteCorrectedVsDirect
        | CriterionPair::FiniteEntrywiseVsDirect => {
            if point.eta0p != 0.0 || regime.intermode != Regime::Strong {
                return Err(regime_error(point, "strong inter-mode"));
            }
            let v = strong_finite_time_criterion(&params, point.tprime)?;
            Ok(match pair {
                CriterionPair::FinitePolynomialVsDirect => (v.polynomial.margin, v.direct.margin),
                CriterionPair::FiniteCorrectedVsDirect => {
                    (v.polynomial_corrected.margin, v.direct.margin)
                }
                _ => (v.direct_entrywise.margin, v.direct.margin),
            })
        }
        CriterionPair::AsymptoticVsFinite => {
            if point.eta0p != 0.0 || regime.intermode != Regime::Strong {
                return Err(regime_error(point, "strong inter-mode"));
            }
            let a = strong_asymptotic_criterion(point.gamma3p, point.eta1p, point.nbar0)?;
            let b = strong_finite_time_criterion(&params, ASYMPTOTIC_TPRIME)?;
            Ok((a.margin, b.direct.margin))
        }
    }
}

/// Compares the signs of two criteria at every point. Rows are evaluated in
/// parallel but disagreements are reported in grid order.
pub fn criterion_equivalence_report(
    pair: CriterionPair,
    points: &[GridPoint],
) -> Result<EquivalenceReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("equivalence grid is empty".into()));
    }
    let margins: Vec<(f64, f64)> = points
        .par_iter()
        .map(|p| pair_margins(pair, p))
        .collect::<Result<_>>()?;

    let mut report = EquivalenceReport {
        pair,
        total: points.len(),
        agree: 0,
        disagree: 0,
        within_band: 0,
        disagreements: Vec::new(),
    };
    for (point, &(a, b)) in points.iter().zip(&margins) {
        match compare_signs(a, b, MARGIN_BAND) {
            SignComparison::Agree => report.agree += 1,
            SignComparison::WithinBand => report.within_band += 1,
            SignComparison::Disagree => {
                report.disagree += 1;
                report.disagreements.push(Disagreement {
                    point: *point,
                    margin_a: a,
                    margin_b: b,
                });
            }
        }
    }
    Ok(report)
}

fn steps(start: f64, step: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| start + step * i as f64)
}

/// `count` interior points of (0, upper): upper·(j + ½)/count.
fn interior(upper: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |j| upper * (j as f64 + 0.5) / count as f64)
}

/// Γ₃′ ∈ {0, 0.05, …, 0.9}, n̄₀ ∈ {0, 0.05, …, 1}, and 20 values of η₁′
/// strictly inside the weak range (0, √(1 − Γ₃′²)).
pub fn weak_intermode_grid() -> Vec<GridPoint> {
    let mut out = Vec::new();
    for gamma3p in steps(0.0, 0.05, 19) {
        let upper = (1.0 - gamma3p * gamma3p).sqrt();
        for nbar0 in steps(0.0, 0.05, 21) {
            for eta1p in interior(upper, 20) {
                out.push(GridPoint {
                    gamma3p,
                    eta1p,
                    eta0p: 0.0,
                    nbar0,
                    tprime: f64::INFINITY,
                });
            }
        }
    }
    out
}

/// Same layout as [`weak_intermode_grid`] at fixed η₀′, with η₁′ inside the
/// weak symmetric range √(Γ₃′² + η₁′²) < 1 − η₀′.
pub fn quartic_grid(eta0p: f64) -> Vec<GridPoint> {
    let mut out = Vec::new();
    let reach = 1.0 - eta0p;
    for gamma3p in steps(0.0, 0.05, 19) {
        if gamma3p >= reach {
            continue;
        }
        let upper = (reach * reach - gamma3p * gamma3p).sqrt();
        for nbar0 in steps(0.0, 0.05, 21) {
            for eta1p in interior(upper, 20) {
                out.push(GridPoint {
                    gamma3p,
                    eta1p,
                    eta0p,
                    nbar0,
                    tprime: f64::INFINITY,
                });
            }
        }
    }
    out
}

/// k ∈ {1.05, …, 2}, Γ₃′ ∈ {0, 0.1, …, 0.9}, n̄₀ ∈ {0, 0.1, …, 1} and the
/// given t′ values; η₁′ = √(k² − Γ₃′²).
pub fn strong_intermode_grid(tprimes: &[f64]) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for k in steps(1.05, 0.05, 20) {
        for gamma3p in steps(0.0, 0.1, 10) {
            let eta1p = (k * k - gamma3p * gamma3p).sqrt();
            for nbar0 in steps(0.0, 0.1, 11) {
                for &tprime in tprimes {
                    out.push(GridPoint {
                        gamma3p,
                        eta1p,
                        eta0p: 0.0,
                        nbar0,
                        tprime,
                    });
                }
            }
        }
    }
    out
}

/// t′ ∈ {0.25, 0.5, …, 5}.
pub fn finite_time_tprimes() -> Vec<f64> {
    steps(0.25, 0.25, 20).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ComplexCM;
    use crate::propagator::{compute_mn, evolve_vacuum_tprime, residue_general};
    use crate::separability::{complex_to_real_cm, XpSymmetricState};
    use rand::{Rng, SeedableRng};

    #[test]
    fn rk4_at_time_zero() {
        let p = ChannelParams::new(0.3, 0.2, 0.1, 1.0, 0.5, 0.0).unwrap();
        let prop = integrate_mn_ode(&p, 0.0, 10);
        assert_eq!(prop.m, Mat2::identity());
        assert_eq!(prop.n, Mat2::zero());
    }

    #[test]
    fn rk4_pure_damping() {
        let p = ChannelParams::new(0.0, 0.0, 0.0, 1.3, 0.4, 0.0).unwrap();
        let prop = integrate_mn_ode(&p, 2.0, 1000);
        let expect = Mat2::diag((-1.3f64).exp(), (-0.4f64).exp());
        assert!(prop.m.max_abs_diff(&expect) < 1e-10);
        assert!(prop.n.max_abs() == 0.0);
    }

    #[test]
    fn rk4_matches_closed_form() {
        let p = ChannelParams::new(0.2, 0.4, 0.1, 1.3, 0.7, 0.0).unwrap();
        let a = integrate_mn_ode(&p, 2.0, 2000);
        let b = compute_mn(&p, 2.0);
        assert!(a.max_abs_diff(&b) < 1e-8);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = ChannelParams::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..2.0),
                0.0,
            )
            .unwrap();
            let a = integrate_mn_ode(&p, 3.0, 3000);
            let b = compute_mn(&p, 3.0);
            assert!(a.max_abs_diff(&b) <= 1e-8 * b.max_abs().max(1.0), "{p:?}");
        }
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let p = ChannelParams::new(0.2, 0.6, -0.3, 1.3, 0.5, 0.0).unwrap();
        let exact = compute_mn(&p, 2.0);
        let mut prev = integrate_mn_ode(&p, 2.0, 10).max_abs_diff(&exact);
        for steps in [20, 40, 80, 160] {
            let err = integrate_mn_ode(&p, 2.0, steps).max_abs_diff(&exact);
            if prev > 1e-11 {
                assert!(prev / err >= 8.0, "steps {steps}: {prev} -> {err}");
            }
            prev = err;
        }
    }

    #[test]
    fn residual_of_thermal_pair_is_exactly_zero() {
        let p = ChannelParams::new(0.0, 0.0, 0.0, 1.2, 0.3, 0.25).unwrap();
        assert_eq!(
            residual_alpha_beta(&p, &ResiduePair::thermal(0.25)),
            (0.0, 0.0)
        );
    }

    #[test]
    fn residual_detects_perturbation() {
        let p = ChannelParams::new(0.1, 0.3, 0.05, 1.2, 0.7, 0.2).unwrap();
        let mut pair = residue_general(&p).unwrap();
        let (r1, r2) = residual_alpha_beta(&p, &pair);
        assert!(r1 <= 1e-10 && r2 <= 1e-10);
        pair.alpha = pair.alpha + Mat2::sigma(1).scale_re(0.01);
        let (r1, r2) = residual_alpha_beta(&p, &pair);
        assert!(r1.max(r2) > 1e-3);
    }

    #[test]
    fn simon_oracle_anchors() {
        let v = complex_to_real_cm(&ComplexCM::vacuum()).unwrap();
        assert_eq!(simon_margin(&v), 0.0);
        assert!((partial_transpose_min_symplectic(&v) - 0.5).abs() < 1e-15);
        let s = XpSymmetricState {
            alpha_a: 2.0 / 3.0,
            alpha_b: 2.0 / 3.0,
            beta_c: 1.0 / 3.0,
        };
        let v = complex_to_real_cm(&s.to_cm()).unwrap();
        assert!(simon_margin(&v) < 0.0);
        assert!((partial_transpose_min_symplectic(&v) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn general_ppt_agrees_with_real_simon() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut compared = 0;
        for _ in 0..400 {
            let p = ChannelParams::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.5..0.5),
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..2.0),
                rng.random_range(0.0..0.6),
            )
            .unwrap();
            let tp = rng.random_range(0.0..3.0);
            let Ok(state) = evolve_vacuum_tprime(&p, tp) else {
                continue;
            };
            let complex = ppt_general(&state.cm).unwrap().margin;
            let real = simon_margin(&complex_to_real_cm(&state.cm).unwrap());
            let scale = state.cm.max_abs().powi(4).max(1.0);
            if complex.abs() > 1e-9 * scale && real.abs() > 1e-9 * scale {
                assert_eq!(
                    complex > 0.0,
                    real > 0.0,
                    "{p:?} t'={tp}: {complex} vs {real}"
                );
                compared += 1;
            }
        }
        assert!(compared > 300);
    }

    #[test]
    fn report_rejects_out_of_regime_points() {
        let bad = [GridPoint {
            gamma3p: 0.0,
            eta1p: 1.5,
            eta0p: 0.0,
            nbar0: 0.1,
            tprime: 1.0,
        }];
        assert!(matches!(
            criterion_equivalence_report(CriterionPair::WeakVsPpt, &bad),
            Err(Error::RegimeViolation(_))
        ));
        assert!(criterion_equivalence_report(CriterionPair::WeakVsPpt, &[]).is_err());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(weak_intermode_grid().len(), 19 * 21 * 20);
        assert!(quartic_grid(0.5)
            .iter()
            .all(|p| p.gamma3p.hypot(p.eta1p) < 0.5));
        assert_eq!(strong_intermode_grid(&[1.0]).len(), 20 * 10 * 11);
    }
}
