//! Separability borders: critical thermal noise by bisection on the
//! stationary criteria, and grid sweeps over (Γ₃′, η₁′, η₀′).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{classify_regime, ChannelParams, Regime, RegimeClass};
use crate::error::{Error, Result};
use crate::separability::{
    strong_asymptotic_criterion, symmetric_quartic_criterion, weak_intermode_criterion,
};

pub const DEFAULT_NBAR_MAX: f64 = 5.0;
pub const BISECTION_TOL: f64 = 1e-6;
/// Coarse scan resolution used to locate sign changes before bisecting.
const SCAN_POINTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderVariable {
    Nbar0,
    Eta1p,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BorderStatus {
    Found,
    /// Separable over the whole noise interval.
    AllSeparable,
    /// Entangled over the whole noise interval.
    AllEntangled,
    /// More than one sign change on the scan; `critical_value` is the first.
    NonMonotone,
    /// Within the tolerance band of the weak/strong boundary; skipped.
    Boundary,
    /// No criterion applies (e.g. η₀′ ≠ 0 with strong amplification).
    OutOfRegime,
}

impl BorderStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            BorderStatus::Found => "found",
            BorderStatus::AllSeparable => "all-separable",
            BorderStatus::AllEntangled => "all-entangled",
            BorderStatus::NonMonotone => "non-monotone",
            BorderStatus::Boundary => "boundary",
            BorderStatus::OutOfRegime => "out-of-regime",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorderPoint {
    pub gamma3p: f64,
    pub eta1p: f64,
    pub eta0p: f64,
    pub critical_value: Option<f64>,
    pub which_variable: BorderVariable,
    pub regime: RegimeClass,
    pub status: BorderStatus,
}

impl BorderPoint {
    /// Regime of the criterion that governs this cell: inter-mode when
    /// η₀′ = 0, single-mode symmetric otherwise.
    pub fn governing_regime(&self) -> Regime {
        if self.eta0p == 0.0 {
            self.regime.intermode
        } else {
            self.regime.symmetric
        }
    }

    /// Whether the stationary state of this cell is entangled at `nbar0`.
    /// `None` for cells with no verdict.
    pub fn entangled_at(&self, nbar0: f64) -> Option<bool> {
        match self.status {
            BorderStatus::Found | BorderStatus::NonMonotone => {
                self.critical_value.map(|c| nbar0 < c)
            }
            BorderStatus::AllSeparable => Some(false),
            BorderStatus::AllEntangled => Some(true),
            BorderStatus::Boundary | BorderStatus::OutOfRegime => None,
        }
    }
}

fn params_at(gamma3p: f64, eta1p: f64, eta0p: f64, nbar0: f64) -> Result<ChannelParams> {
    ChannelParams::normalized(eta0p, eta1p, 0.0, gamma3p, nbar0)
}

/// Which stationary criterion applies to a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Criterion {
    WeakIntermode,
    StrongIntermode,
    Quartic,
}

fn select_criterion(regime: RegimeClass, eta0p: f64) -> Result<Criterion> {
    if eta0p == 0.0 {
        match regime.intermode {
            Regime::Weak => Ok(Criterion::WeakIntermode),
            Regime::Strong => Ok(Criterion::StrongIntermode),
            Regime::Boundary => Err(Error::RegimeViolation(
                "cell lies on the k = 1 boundary".into(),
            )),
        }
    } else {
        match regime.symmetric {
            Regime::Weak => Ok(Criterion::Quartic),
            Regime::Strong => Err(Error::RegimeViolation(
                "no stationary criterion for strong amplification with eta0' != 0".into(),
            )),
            Regime::Boundary => Err(Error::RegimeViolation(
                "cell lies on the C2 = B1 boundary".into(),
            )),
        }
    }
}

fn margin(criterion: Criterion, gamma3p: f64, eta1p: f64, eta0p: f64, nbar0: f64) -> Result<f64> {
    Ok(match criterion {
        Criterion::WeakIntermode => weak_intermode_criterion(gamma3p, eta1p, nbar0)?.margin,
        Criterion::StrongIntermode => strong_asymptotic_criterion(gamma3p, eta1p, nbar0)?.margin,
        Criterion::Quartic => {
            symmetric_quartic_criterion(&params_at(gamma3p, eta1p, eta0p, nbar0)?)?.margin
        }
    })
}

fn validate_inputs(gamma3p: f64, eta1p: f64, eta0p: f64, nbar_max: f64) -> Result<()> {
    if !(nbar_max.is_finite() && nbar_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "nbar_max must be positive, got {nbar_max}"
        )));
    }
    params_at(gamma3p, eta1p, eta0p, 0.0).map(|_| ())
}

fn regime_of(gamma3p: f64, eta1p: f64, eta0p: f64) -> Result<RegimeClass> {
    Ok(classify_regime(&params_at(gamma3p, eta1p, eta0p, 0.0)?))
}

/// Critical thermal occupancy n̄₀* separating entangled (below) from
/// separable (above) stationary states, by bisection to [`BISECTION_TOL`]
/// on [0, `nbar_max`].
///
/// The margin is first sampled on a uniform scan; a cell whose scan shows
/// more than one sign change is returned with [`BorderStatus::NonMonotone`]
/// and the first crossing.
pub fn critical_noise_with_max(
    gamma3p: f64,
    eta1p: f64,
    eta0p: f64,
    nbar_max: f64,
) -> Result<BorderPoint> {
    validate_inputs(gamma3p, eta1p, eta0p, nbar_max)?;
    let regime = regime_of(gamma3p, eta1p, eta0p)?;
    let criterion = select_criterion(regime, eta0p)?;
    let f = |n: f64| margin(criterion, gamma3p, eta1p, eta0p, n);

    let mut scan = Vec::with_capacity(SCAN_POINTS + 1);
    for i in 0..=SCAN_POINTS {
        let n = nbar_max * i as f64 / SCAN_POINTS as f64;
        scan.push((n, f(n)? >= 0.0));
    }
    let crossings: Vec<usize> = (0..SCAN_POINTS)
        .filter(|&i| scan[i].1 != scan[i + 1].1)
        .collect();
    let Some(&first) = crossings.first() else {
        return Err(Error::NoSignChange { nbar_max });
    };

    let (mut lo, mut hi) = (scan[first].0, scan[first + 1].0);
    let lo_separable = scan[first].1;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if (f(mid)? >= 0.0) == lo_separable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let status = if crossings.len() == 1 && !lo_separable {
        BorderStatus::Found
    } else {
        BorderStatus::NonMonotone
    };
    Ok(BorderPoint {
        gamma3p,
        eta1p,
        eta0p,
        critical_value: Some(0.5 * (lo + hi)),
        which_variable: BorderVariable::Nbar0,
        regime,
        status,
    })
}

pub fn critical_noise(gamma3p: f64, eta1p: f64, eta0p: f64) -> Result<BorderPoint> {
    critical_noise_with_max(gamma3p, eta1p, eta0p, DEFAULT_NBAR_MAX)
}

/// Inclusive range `start, start + step, …, stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        AxisRange { start, stop, step }
    }

    pub fn single(value: f64) -> Self {
        AxisRange {
            start: value,
            stop: value,
            step: 1.0,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} range must be finite"
            )));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} step must be positive, got {}",
                self.step
            )));
        }
        if self.stop < self.start {
            return Err(Error::InvalidArgument(format!(
                "{name} range is empty: stop {} < start {}",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    /// Node values, computed as start + i·step so that no rounding accumulates.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub gamma3p: AxisRange,
    pub eta1p: AxisRange,
    pub eta0p: AxisRange,
    pub nbar_max: f64,
}

impl SweepSpec {
    /// Γ₃′ ∈ [0, 0.9], η₁′ ∈ [0.05, 2], both step 0.05, η₀′ = 0.
    pub fn intermode_default() -> Self {
        SweepSpec {
            gamma3p: AxisRange::new(0.0, 0.9, 0.05),
            eta1p: AxisRange::new(0.05, 2.0, 0.05),
            eta0p: AxisRange::single(0.0),
            nbar_max: DEFAULT_NBAR_MAX,
        }
    }

    /// Same (Γ₃′, η₁′) grid at fixed single-mode drive η₀′.
    pub fn single_mode_default(eta0p: f64) -> Self {
        SweepSpec {
            eta0p: AxisRange::single(eta0p),
            ..Self::intermode_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gamma3p.validate("gamma3p")?;
        self.eta1p.validate("eta1p")?;
        self.eta0p.validate("eta0p")?;
        if !(self.nbar_max.is_finite() && self.nbar_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nbar_max must be positive, got {}",
                self.nbar_max
            )));
        }
        Ok(())
    }

    /// Grid nodes in row-major order (Γ₃′ outermost, η₀′ innermost).
    pub fn nodes(&self) -> Vec<(f64, f64, f64)> {
        let (gs, es, hs) = (
            self.gamma3p.values(),
            self.eta1p.values(),
            self.eta0p.values(),
        );
        let mut out = Vec::with_capacity(gs.len() * es.len() * hs.len());
        for &g in &gs {
            for &e in &es {
                for &h in &hs {
                    out.push((g, e, h));
                }
            }
        }
        out
    }
}

/// Border cell for one node; per-cell failures become statuses.
pub fn border_cell(gamma3p: f64, eta1p: f64, eta0p: f64, nbar_max: f64) -> Result<BorderPoint> {
    let regime = regime_of(gamma3p, eta1p, eta0p)?;
    let empty = |status| BorderPoint {
        gamma3p,
        eta1p,
        eta0p,
        critical_value: None,
        which_variable: BorderVariable::Nbar0,
        regime,
        status,
    };
    match critical_noise_with_max(gamma3p, eta1p, eta0p, nbar_max) {
        Ok(point) => Ok(point),
        Err(Error::NoSignChange { .. }) => {
            let criterion = select_criterion(regime, eta0p)?;
            let separable = margin(criterion, gamma3p, eta1p, eta0p, 0.0)? >= 0.0;
            Ok(empty(if separable {
                BorderStatus::AllSeparable
            } else {
                BorderStatus::AllEntangled
            }))
        }
        Err(Error::RegimeViolation(_)) => {
            let governing = if eta0p == 0.0 {
                regime.intermode
            } else {
                regime.symmetric
            };
            Ok(empty(if governing == Regime::Boundary {
                BorderStatus::Boundary
            } else {
                BorderStatus::OutOfRegime
            }))
        }
        Err(e) => Err(e),
    }
}

/// One border cell per grid node, row-major. Cells are evaluated in
/// parallel on the current rayon pool; output order does not depend on
/// scheduling. Invalid nodes (e.g. |Γ₃′| ≥ 1) fail the whole sweep before
/// any cell is computed.
pub fn sweep_grid(spec: &SweepSpec) -> Result<Vec<BorderPoint>> {
    spec.validate()?;
    let nodes = spec.nodes();
    for &(g, e, h) in &nodes {
        params_at(g, e, h, 0.0)?;
    }
    nodes
        .par_iter()
        .map(|&(g, e, h)| border_cell(g, e, h, spec.nbar_max))
        .collect()
}

/// Number of cells whose stationary state is entangled at `nbar0`.
pub fn entangled_cell_count(points: &[BorderPoint], nbar0: f64) -> usize {
    points
        .iter()
        .filter(|p| p.entangled_at(nbar0) == Some(true))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn critical(g: f64, e: f64, h: f64) -> f64 {
        let p = critical_noise(g, e, h).unwrap();
        assert_eq!(p.status, BorderStatus::Found, "{p:?}");
        p.critical_value.unwrap()
    }

    #[test]
    fn symmetric_damping_threshold_is_half_drive() {
        for e in [0.2, 0.6, 1.4, 1.8] {
            assert!(
                (critical(0.0, e, 0.0) - e / 2.0).abs() <= 1e-6,
                "eta1p = {e}"
            );
        }
    }

    #[test]
    fn weak_threshold_matches_quadratic_root() {
        // 4n²(1−g) − (1 − g(2n+1)²)e = 0 with g = Γ₃′², e = η₁′²:
        // 4(1 − g + ge)n² + 4ge n + (ge − e) = 0.
        let (g3p, e1p) = (0.5_f64, 0.7_f64);
        let (g, e) = (g3p * g3p, e1p * e1p);
        let (a, b, c) = (4.0 * (1.0 - g + g * e), 4.0 * g * e, g * e - e);
        let root = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        assert!((critical(g3p, e1p, 0.0) - root).abs() <= 1e-6);
    }

    #[test]
    fn bisection_brackets_sign_change() {
        for &(g, e, h) in &[(0.3, 0.5, 0.0), (0.6, 1.3, 0.0), (0.2, 0.4, 0.5)] {
            let c = critical(g, e, h);
            let params = |n| params_at(g, e, h, n).unwrap();
            let regime = classify_regime(&params(0.0));
            let crit = select_criterion(regime, h).unwrap();
            assert!(margin(crit, g, e, h, c - BISECTION_TOL).unwrap() < 0.0);
            assert!(margin(crit, g, e, h, c + BISECTION_TOL).unwrap() >= 0.0);
        }
    }

    #[test]
    fn no_sign_change_and_regime_errors() {
        // No inter-mode drive: separable at every noise level.
        assert!(matches!(
            critical_noise(0.3, 0.0, 0.5),
            Err(Error::NoSignChange { .. })
        ));
        assert!(matches!(
            critical_noise(0.0, 1.0, 0.0),
            Err(Error::RegimeViolation(_))
        ));
        assert!(matches!(
            critical_noise(0.0, 1.5, 0.5),
            Err(Error::RegimeViolation(_))
        ));
        assert!(matches!(
            critical_noise(1.2, 0.5, 0.0),
            Err(Error::NegativeDamping { .. })
        ));
        assert!(matches!(
            critical_noise_with_max(0.0, 0.5, 0.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cells_carry_statuses() {
        assert_eq!(
            border_cell(0.0, 1.0, 0.0, 5.0).unwrap().status,
            BorderStatus::Boundary
        );
        assert_eq!(
            border_cell(0.0, 1.5, 0.5, 5.0).unwrap().status,
            BorderStatus::OutOfRegime
        );
        assert_eq!(
            border_cell(0.3, 0.0, 0.5, 5.0).unwrap().status,
            BorderStatus::AllSeparable
        );
        // Strong drive beyond the search interval.
        assert_eq!(
            border_cell(0.0, 12.0, 0.0, 5.0).unwrap().status,
            BorderStatus::AllEntangled
        );
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let v = AxisRange::new(0.05, 2.0, 0.05).values();
        assert_eq!(v.len(), 40);
        assert!((v[39] - 2.0).abs() < 1e-12);
        assert_eq!(AxisRange::new(0.0, 0.9, 0.05).values().len(), 19);
        assert_eq!(AxisRange::single(0.3).values(), vec![0.3]);
        assert!(AxisRange::new(0.0, 1.0, 0.0).validate("x").is_err());
        assert!(AxisRange::new(1.0, 0.0, 0.1).validate("x").is_err());
    }

    #[test]
    fn single_cell_sweep() {
        let spec = SweepSpec {
            gamma3p: AxisRange::single(0.0),
            eta1p: AxisRange::single(0.6),
            eta0p: AxisRange::single(0.0),
            nbar_max: DEFAULT_NBAR_MAX,
        };
        let out = sweep_grid(&spec).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].critical_value.unwrap() - 0.3).abs() <= 1e-6);
    }

    #[test]
    fn sweep_is_row_major() {
        let spec = SweepSpec {
            gamma3p: AxisRange::new(0.0, 0.2, 0.1),
            eta1p: AxisRange::new(0.1, 0.3, 0.1),
            eta0p: AxisRange::new(0.0, 0.2, 0.2),
            nbar_max: DEFAULT_NBAR_MAX,
        };
        let out = sweep_grid(&spec).unwrap();
        let nodes = spec.nodes();
        assert_eq!(out.len(), 18);
        for (p, n) in out.iter().zip(&nodes) {
            assert_eq!((p.gamma3p, p.eta1p, p.eta0p), *n);
        }
    }
}
