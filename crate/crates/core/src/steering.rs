//! Entanglement and steering quantifiers: logarithmic negativity, 1+1 and
//! (n_A + n_B) directional steerabilities, the six-type classifier, and the
//! pentapartite variance criterion.
//!
//! All formulas are written in the vacuum-1/2 convention, so thresholds that
//! read ν̄ < 1 in the vacuum-1 convention become 2ν̄ < 1 here, with
//! per-eigenvalue contribution −ln(2ν̄).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    schur_complement, symplectic_eigenvalues, Bipartition, Conditioned, CovarianceMatrix,
};

/// Steering direction for a bipartition (A, B).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AToB,
    BToA,
}

/// The six steering types of a two-mode pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SteeringClass {
    #[serde(rename = "no-way")]
    NoWay,
    #[serde(rename = "one-way-ab")]
    OneWayAB,
    #[serde(rename = "one-way-ba")]
    OneWayBA,
    #[serde(rename = "two-way-symmetric")]
    TwoWaySymmetric,
    #[serde(rename = "two-way-a-dominant")]
    TwoWayADominant,
    #[serde(rename = "two-way-b-dominant")]
    TwoWayBDominant,
}

impl SteeringClass {
    pub const ALL: [SteeringClass; 6] = [
        SteeringClass::NoWay,
        SteeringClass::OneWayAB,
        SteeringClass::OneWayBA,
        SteeringClass::TwoWaySymmetric,
        SteeringClass::TwoWayADominant,
        SteeringClass::TwoWayBDominant,
    ];

    pub fn code(self) -> u8 {
        match self {
            SteeringClass::NoWay => 0,
            SteeringClass::OneWayAB => 1,
            SteeringClass::OneWayBA => 2,
            SteeringClass::TwoWaySymmetric => 3,
            SteeringClass::TwoWayADominant => 4,
            SteeringClass::TwoWayBDominant => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }

    pub fn label(self) -> &'static str {
        match self {
            SteeringClass::NoWay => "no steering",
            SteeringClass::OneWayAB => "one-way A->B",
            SteeringClass::OneWayBA => "one-way B->A",
            SteeringClass::TwoWaySymmetric => "two-way symmetric",
            SteeringClass::TwoWayADominant => "two-way A-dominant",
            SteeringClass::TwoWayBDominant => "two-way B-dominant",
        }
    }
}

/// Directional steerabilities, entanglement, and the resulting class for a
/// mode pair (A = first mode of the reduced matrix, B = second).
#[derive(Clone, Debug, Serialize)]
pub struct SteeringReport {
    pub g_a_to_b: f64,
    pub g_b_to_a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_n: Option<f64>,
    pub class: SteeringClass,
}

pub const DEFAULT_CLASS_TOL: f64 = 1e-3;

/// Steerability at or below this value counts as absent when classifying:
/// analytic zeros reach the classifier as ~1e-16 roundoff through the
/// eigensolver, and must not register as one-way steering.
pub const STEER_ZERO_THRESHOLD: f64 = 1e-9;

/// Quadrature normalization for the pentapartite criterion: `Unit` means
/// X = a + a† (vacuum variance 1), `Half` means X = (a + a†)/√2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadScale {
    Half,
    #[default]
    Unit,
}

impl QuadScale {
    /// Variance multiplier relative to the internal vacuum-1/2 convention.
    pub fn factor(self) -> f64 {
        match self {
            QuadScale::Half => 1.0,
            QuadScale::Unit => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadScale::Half => "half",
            QuadScale::Unit => "unit",
        }
    }
}

impl std::str::FromStr for QuadScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(QuadScale::Half),
            "unit" => Ok(QuadScale::Unit),
            other => Err(Error::InvalidParameter(format!(
                "unknown quadrature scale '{other}' (expected 'half' or 'unit')"
            ))),
        }
    }
}

/// The five variance products and the collective bound check.
#[derive(Clone, Debug, Serialize)]
pub struct GenuineResult {
    pub s_values: [f64; 5],
    pub total: f64,
    pub violated: bool,
    pub quad_scale: QuadScale,
}

/// X-difference pairings (i, j) of the five products: S = Δ(X_i − X_j)·Δ(ΣY).
pub const GENUINE_PAIRS: [(usize, usize); 5] = [(3, 1), (1, 5), (5, 2), (2, 4), (4, 3)];

fn two_mode(cm: &CovarianceMatrix) -> Result<&nalgebra::DMatrix<f64>> {
    if cm.n_modes() != 2 {
        return Err(Error::InvalidParameter(format!(
            "expected a 2-mode covariance matrix, got {} modes",
            cm.n_modes()
        )));
    }
    Ok(cm.matrix())
}

/// E_N = max(0, −ln 2η) with η = √((ε − √(ε² − 4R))/2), ε = R₁ + R₂ − 2R₃.
pub fn log_negativity(cm: &CovarianceMatrix) -> Result<f64> {
    let s = two_mode(cm)?;
    let det2 =
        |r0: usize, r1: usize, c0: usize, c1: usize| s[(r0, c0)] * s[(r1, c1)] - s[(r0, c1)] * s[(r1, c0)];
    let r1 = det2(0, 2, 0, 2);
    let r2 = det2(1, 3, 1, 3);
    let r3 = det2(0, 2, 1, 3);
    let r = s.determinant();
    let eps = r1 + r2 - 2.0 * r3;
    let disc = eps * eps - 4.0 * r;
    if disc < -1e-10 {
        return Err(Error::NumericalDomain(format!(
            "negative discriminant {disc:e} in log-negativity (non-physical input)"
        )));
    }
    let eta = (0.5 * (eps - disc.max(0.0).sqrt())).max(0.0).sqrt();
    if eta <= 0.0 {
        return Err(Error::NumericalDomain(
            "vanishing partial-transpose eigenvalue in log-negativity".into(),
        ));
    }
    Ok((-(2.0 * eta).ln()).max(0.0))
}

/// 1+1 steerability max(0, ½ ln(det σ_steering / (4 det σ))).
pub fn steer_1p1(cm: &CovarianceMatrix, direction: Direction) -> Result<f64> {
    let s = two_mode(cm)?;
    let det2 =
        |r0: usize, r1: usize, c0: usize, c1: usize| s[(r0, c0)] * s[(r1, c1)] - s[(r0, c1)] * s[(r1, c0)];
    let top = match direction {
        Direction::AToB => det2(0, 2, 0, 2),
        Direction::BToA => det2(1, 3, 1, 3),
    };
    let r = s.determinant();
    if top <= 0.0 || r <= 0.0 {
        return Err(Error::NumericalDomain(format!(
            "non-positive determinant in 1+1 steerability (block {top:e}, full {r:e})"
        )));
    }
    Ok((0.5 * (top / (4.0 * r)).ln()).max(0.0))
}

/// General (n_A + n_B) steerability from the Schur-complement symplectic
/// spectrum: max(0, −Σ ln 2ν̄) over eigenvalues with 2ν̄ < 1.
pub fn steer_multi(cm: &CovarianceMatrix, part: &Bipartition, direction: Direction) -> Result<f64> {
    let conditioned = match direction {
        Direction::AToB => Conditioned::OnA,
        Direction::BToA => Conditioned::OnB,
    };
    let sc = schur_complement(cm, part, conditioned)?;
    let nus = symplectic_eigenvalues(&sc)?;
    let sum: f64 = nus
        .iter()
        .filter(|&&nu| 2.0 * nu < 1.0)
        .map(|&nu| -(2.0 * nu).ln())
        .sum();
    Ok(sum.max(0.0))
}

/// Pure classification logic shared by `classify_pair` and the sweep tasks.
pub fn classify_values(g_a_to_b: f64, g_b_to_a: f64, tol: f64) -> SteeringClass {
    let zero = STEER_ZERO_THRESHOLD;
    match (g_a_to_b > zero, g_b_to_a > zero) {
        (false, false) => SteeringClass::NoWay,
        (true, false) => SteeringClass::OneWayAB,
        (false, true) => SteeringClass::OneWayBA,
        (true, true) => {
            if (g_a_to_b - g_b_to_a).abs() <= tol * g_a_to_b.max(g_b_to_a) {
                SteeringClass::TwoWaySymmetric
            } else if g_a_to_b > g_b_to_a {
                SteeringClass::TwoWayADominant
            } else {
                SteeringClass::TwoWayBDominant
            }
        }
    }
}

/// Six-way classification of a mode pair with relative tolerance `tol` for
/// the symmetric band.
pub fn classify_pair(cm: &CovarianceMatrix, tol: f64) -> Result<SteeringReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "classifier tolerance must be positive (got {tol})"
        )));
    }
    let g_a_to_b = steer_1p1(cm, Direction::AToB)?;
    let g_b_to_a = steer_1p1(cm, Direction::BToA)?;
    let e_n = log_negativity(cm)?;
    Ok(SteeringReport {
        g_a_to_b,
        g_b_to_a,
        e_n: Some(e_n),
        class: classify_values(g_a_to_b, g_b_to_a, tol),
    })
}

/// The five standard-deviation products S_i = Δ(X_i − X_j)·Δ(Y₁+..+Y₅) over
/// the mode 5-cycle, and their collective comparison against the bound 2.
pub fn genuine_pentapartite(cm: &CovarianceMatrix, quad_scale: QuadScale) -> Result<GenuineResult> {
    if cm.n_modes() != 5 {
        return Err(Error::InvalidParameter(format!(
            "pentapartite criterion needs all 5 modes, got {}",
            cm.n_modes()
        )));
    }
    let pos = |mode: usize| -> Result<usize> {
        cm.modes()
            .iter()
            .position(|&m| m == mode)
            .ok_or(Error::UnknownMode(mode))
    };
    let sigma = cm.matrix();
    let var = |u: &nalgebra::DVector<f64>| (sigma * u).dot(u);
    let mut sum_y = nalgebra::DVector::zeros(10);
    for m in 1..=5 {
        sum_y[5 + pos(m)?] = 1.0;
    }
    let var_y = var(&sum_y);
    let factor = quad_scale.factor();
    let mut s_values = [0.0; 5];
    for (k, &(i, j)) in GENUINE_PAIRS.iter().enumerate() {
        let mut u = nalgebra::DVector::zeros(10);
        u[pos(i)?] = 1.0;
        u[pos(j)?] = -1.0;
        s_values[k] = factor * (var(&u) * var_y).sqrt();
    }
    let total: f64 = s_values.iter().sum();
    Ok(GenuineResult {
        s_values,
        total,
        violated: total < 2.0,
        quad_scale,
    })
}
