//! Hermite-Gaussian mode functions and the triple-product overlap integrals
//! Λ_lmn that weight each down-conversion process.
//!
//! Overlaps are separable into x and y factors, each a polynomial times a
//! shared Gaussian, so Gauss–Hermite quadrature on the combined weight is
//! exact up to rounding once the point count exceeds the polynomial degree.
//! The absolute mode normalization behind the reference value Λ(03,01,02) =
//! 0.534 is not fixed by the model, so the full table is rescaled once to pin
//! that entry; only ratios are physical here.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Transverse mode index pair: `m` counts the x order, `n` the y order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HgLabel {
    pub m: u32,
    pub n: u32,
}

impl HgLabel {
    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    /// x↔y mirror of this label.
    pub const fn swapped(self) -> Self {
        Self {
            m: self.n,
            n: self.m,
        }
    }

    pub const fn order(self) -> u32 {
        self.m + self.n
    }
}

impl std::fmt::Display for HgLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HG{}{}", self.m, self.n)
    }
}

/// Waists of the interacting fields plus the quadrature resolution.
///
/// Equal pump and signal waists are the default: that choice reproduces the
/// reference ratio Λ(12,01,11)/Λ(03,01,02) ≈ 0.523/0.534, while the
/// phase-matched w_p = w/√2 does not. The signal waist is shared by signal
/// and idler modes.
#[derive(Clone, Copy, Debug)]
pub struct WaistConfig {
    pub signal_waist: f64,
    pub pump_waist: f64,
    pub quadrature_points: usize,
}

impl Default for WaistConfig {
    fn default() -> Self {
        Self {
            signal_waist: 1.0,
            pump_waist: 1.0,
            quadrature_points: 80,
        }
    }
}

impl WaistConfig {
    fn validate(&self) -> Result<()> {
        if !(self.signal_waist > 0.0) || !(self.pump_waist > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "waists must be positive (signal {}, pump {})",
                self.signal_waist, self.pump_waist
            )));
        }
        if self.quadrature_points < 40 {
            return Err(Error::InvalidParameter(format!(
                "quadrature_points must be >= 40 (got {})",
                self.quadrature_points
            )));
        }
        Ok(())
    }
}

/// The six down-conversion processes as (pump, signal, idler) label triples.
pub const PROCESS_LABELS: [(HgLabel, HgLabel, HgLabel); 6] = [
    (HgLabel::new(3, 0), HgLabel::new(1, 0), HgLabel::new(2, 0)),
    (HgLabel::new(0, 3), HgLabel::new(0, 1), HgLabel::new(0, 2)),
    (HgLabel::new(2, 1), HgLabel::new(0, 1), HgLabel::new(2, 0)),
    (HgLabel::new(2, 1), HgLabel::new(1, 0), HgLabel::new(1, 1)),
    (HgLabel::new(1, 2), HgLabel::new(1, 0), HgLabel::new(0, 2)),
    (HgLabel::new(1, 2), HgLabel::new(0, 1), HgLabel::new(1, 1)),
];

/// Reference value the calibrated table is pinned to: Λ(03,01,02).
pub const LAMBDA_REFERENCE: f64 = 0.534;

/// Cross-check value for the calibrated Λ(12,01,11) entry.
pub const LAMBDA_CROSS_CHECK: f64 = 0.523;

/// Physicists' Hermite polynomial H_order(x) by the three-term recurrence.
pub fn hermite_polynomial(order: u32, x: f64) -> f64 {
    assert!(order <= 6, "hermite_polynomial supports orders <= 6");
    let mut h_prev = 1.0;
    if order == 0 {
        return h_prev;
    }
    let mut h = 2.0 * x;
    for k in 1..order {
        let h_next = 2.0 * x * h - 2.0 * (k as f64) * h_prev;
        h_prev = h;
        h = h_next;
    }
    h
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// One-dimensional HG mode function, unit L² norm on the real line.
pub fn mode_1d(order: u32, x: f64, waist: f64) -> f64 {
    assert!(order <= 3, "mode_1d supports orders <= 3");
    let norm = (2.0 / std::f64::consts::PI).powf(0.25)
        / (2f64.powi(order as i32) * factorial(order) * waist).sqrt();
    norm * hermite_polynomial(order, std::f64::consts::SQRT_2 * x / waist)
        * (-x * x / (waist * waist)).exp()
}

/// Gauss–Hermite nodes and weights for ∫ f(y) e^{−y²} dy via Golub–Welsch.
fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let off = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = off;
        j[(k, k - 1)] = off;
    }
    let eig = nalgebra::SymmetricEigen::try_new(j, f64::EPSILON, 0).ok_or(Error::EigenNotConverged)?;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let q0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * q0 * q0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// One axis of the raw overlap: ∫ u_l(x; w_p) u_m(x; w) u_n(x; w) dx.
fn overlap_1d(l: u32, m: u32, n: u32, cfg: &WaistConfig, points: usize) -> Result<f64> {
    let wp = cfg.pump_waist;
    let w = cfg.signal_waist;
    let a = 1.0 / (wp * wp) + 2.0 / (w * w);
    let scale = a.sqrt();
    let norm = (2.0 / std::f64::consts::PI).powf(0.75)
        / ((2f64.powi(l as i32) * factorial(l) * wp).sqrt()
            * (2f64.powi(m as i32) * factorial(m) * w).sqrt()
            * (2f64.powi(n as i32) * factorial(n) * w).sqrt());
    let (nodes, weights) = gauss_hermite(points)?;
    let mut sum = 0.0;
    for (y, wt) in nodes.iter().zip(&weights) {
        let x = y / scale;
        sum += wt
            * hermite_polynomial(l, std::f64::consts::SQRT_2 * x / wp)
            * hermite_polynomial(m, std::f64::consts::SQRT_2 * x / w)
            * hermite_polynomial(n, std::f64::consts::SQRT_2 * x / w);
    }
    Ok(norm * sum / scale)
}

/// Raw (uncalibrated) spatial overlap Λ_lmn = ∫ d²r u_pump u_signal u_idler.
///
/// Separable product of two 1D Gauss–Hermite integrals. Vanishes whenever the
/// x-order or y-order sum across the three labels is odd (parity selection
/// rule). The result is checked against a doubled point count and
/// `QuadratureUnconverged` is returned if the two disagree beyond 1e-9.
pub fn overlap(pump: HgLabel, signal: HgLabel, idler: HgLabel, cfg: &WaistConfig) -> Result<f64> {
    cfg.validate()?;
    let eval = |points: usize| -> Result<f64> {
        let ix = overlap_1d(pump.m, signal.m, idler.m, cfg, points)?;
        let iy = overlap_1d(pump.n, signal.n, idler.n, cfg, points)?;
        Ok(ix * iy)
    };
    let coarse = eval(cfg.quadrature_points)?;
    let fine = eval(2 * cfg.quadrature_points)?;
    let delta = (fine - coarse).abs();
    if delta > 1e-9 {
        return Err(Error::QuadratureUnconverged {
            points: cfg.quadrature_points,
            points2: 2 * cfg.quadrature_points,
            delta,
        });
    }
    Ok(fine)
}

/// The calibrated overlap values for the six down-conversion processes.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    entries: [(HgLabel, HgLabel, HgLabel, f64); 6],
    calibration_factor: f64,
}

impl OverlapTable {
    pub fn get(&self, pump: HgLabel, signal: HgLabel, idler: HgLabel) -> Option<f64> {
        self.entries
            .iter()
            .find(|(p, s, i, _)| *p == pump && *s == signal && *i == idler)
            .map(|(_, _, _, v)| *v)
    }

    pub fn entries(&self) -> &[(HgLabel, HgLabel, HgLabel, f64); 6] {
        &self.entries
    }

    pub fn calibration_factor(&self) -> f64 {
        self.calibration_factor
    }
}

/// Computes raw overlaps for all six processes, then rescales the whole table
/// so that the (03,01,02) entry equals 0.534 exactly. A global Λ scale is
/// equivalent to rescaling the interaction time, so this pins the time unit
/// used everywhere else. Fails with `CalibrationMismatch` if the calibrated
/// (12,01,11) entry strays more than 0.005 from 0.523.
pub fn calibrated_overlap_table(cfg: &WaistConfig) -> Result<OverlapTable> {
    cfg.validate()?;
    let reference = overlap(HgLabel::new(0, 3), HgLabel::new(0, 1), HgLabel::new(0, 2), cfg)?;
    if reference.abs() < 1e-14 {
        return Err(Error::NumericalDomain(
            "reference overlap (03,01,02) vanished; cannot calibrate".into(),
        ));
    }
    let calibration_factor = LAMBDA_REFERENCE / reference;
    let mut entries = [(HgLabel::new(0, 0), HgLabel::new(0, 0), HgLabel::new(0, 0), 0.0); 6];
    for (slot, &(p, s, i)) in entries.iter_mut().zip(&PROCESS_LABELS) {
        let raw = overlap(p, s, i, cfg)?;
        *slot = (p, s, i, calibration_factor * raw);
    }
    let table = OverlapTable {
        entries,
        calibration_factor,
    };
    let cross = table
        .get(HgLabel::new(1, 2), HgLabel::new(0, 1), HgLabel::new(1, 1))
        .expect("(12,01,11) is a bundled process");
    if (cross - LAMBDA_CROSS_CHECK).abs() > 0.005 {
        return Err(Error::CalibrationMismatch {
            got: cross,
            expected: LAMBDA_CROSS_CHECK,
            tol: 0.005,
        });
    }
    Ok(table)
}
