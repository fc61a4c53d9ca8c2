//! Pump settings (b, c, θ) → the symmetric 5×5 coupling matrix G, plus the
//! involved-pump strength integrals used to compare signal and idler modes.
//!
//! Mode naming is fixed: a1 = HG10, a2 = HG01 (signals), a3 = HG20,
//! a4 = HG02, a5 = HG11 (idlers). The coupling graph is bipartite between
//! {1,2} and {3,4,5}; the diagonal and all signal-signal / idler-idler
//! entries vanish identically.

use nalgebra::Matrix5;

use crate::error::{Error, Result};
use crate::hg::{HgLabel, OverlapTable};

/// Pump control knobs. `chi` is the global nonlinearity scale; the default 1
/// makes `t` the dimensionless interaction parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpSetting {
    pub b: f64,
    pub c: f64,
    pub theta: f64,
    pub chi: f64,
}

impl PumpSetting {
    pub fn new(b: f64, c: f64, theta: f64) -> Result<Self> {
        Self::with_chi(b, c, theta, 1.0)
    }

    pub fn with_chi(b: f64, c: f64, theta: f64, chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) || !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!(
                "b and c must lie in [0,1] (got b={b}, c={c})"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite (got {theta})")));
        }
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::InvalidParameter(format!("chi must be positive (got {chi})")));
        }
        Ok(Self { b, c, theta, chi })
    }

    /// θ outside the nominal [0, π/2] domain is accepted (weights go
    /// negative), but callers may want to warn.
    pub fn theta_in_domain(&self) -> bool {
        (0.0..=std::f64::consts::FRAC_PI_2).contains(&self.theta)
    }
}

/// Which of the four pump weights multiplies a process.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightSel {
    /// b·cosθ (HG30)
    BCos,
    /// √(1−b²)·cosθ (HG03)
    BbarCos,
    /// c·sinθ (HG21)
    CSin,
    /// √(1−c²)·sinθ (HG12)
    CbarSin,
}

impl WeightSel {
    pub fn eval(self, p: &PumpSetting) -> f64 {
        let [w30, w03, w21, w12] = pump_weights(p);
        match self {
            WeightSel::BCos => w30,
            WeightSel::BbarCos => w03,
            WeightSel::CSin => w21,
            WeightSel::CbarSin => w12,
        }
    }

    fn angular(self) -> fn(f64) -> f64 {
        match self {
            WeightSel::BCos | WeightSel::BbarCos => f64::cos,
            WeightSel::CSin | WeightSel::CbarSin => f64::sin,
        }
    }

    fn radial(self) -> fn(f64) -> f64 {
        match self {
            WeightSel::BCos | WeightSel::CSin => |u| u,
            WeightSel::BbarCos | WeightSel::CbarSin => |u| (1.0 - u * u).sqrt(),
        }
    }
}

/// Pump weights (w30, w03, w21, w12); their squares always sum to 1.
pub fn pump_weights(p: &PumpSetting) -> [f64; 4] {
    let (s, co) = p.theta.sin_cos();
    [
        p.b * co,
        (1.0 - p.b * p.b).sqrt() * co,
        p.c * s,
        (1.0 - p.c * p.c).sqrt() * s,
    ]
}

/// One down-conversion process: pump label, coupled mode pair, pump weight
/// selector, and the calibrated overlap Λ.
#[derive(Clone, Copy, Debug)]
pub struct Process {
    pub pump: HgLabel,
    pub signal: usize,
    pub idler: usize,
    pub weight: WeightSel,
    pub lambda: f64,
}

const PROCESS_MODES: [(usize, usize, WeightSel); 6] = [
    (1, 3, WeightSel::BCos),
    (2, 4, WeightSel::BbarCos),
    (2, 3, WeightSel::CSin),
    (1, 5, WeightSel::CSin),
    (1, 4, WeightSel::CbarSin),
    (2, 5, WeightSel::CbarSin),
];

/// The six processes with their mode pairs, weight selectors and Λ values.
pub fn process_table(table: &OverlapTable) -> [Process; 6] {
    let mut out = [Process {
        pump: HgLabel::new(0, 0),
        signal: 0,
        idler: 0,
        weight: WeightSel::BCos,
        lambda: 0.0,
    }; 6];
    for (slot, (&(pump, sig, idl, lambda), &(s, i, weight))) in out
        .iter_mut()
        .zip(table.entries().iter().zip(&PROCESS_MODES))
    {
        debug_assert_eq!((sig, idl), (mode_label(s), mode_label(i)));
        *slot = Process {
            pump,
            signal: s,
            idler: i,
            weight,
            lambda,
        };
    }
    out
}

/// HG label of the down-converted mode with the given index.
pub fn mode_label(index: usize) -> HgLabel {
    match index {
        1 => HgLabel::new(1, 0),
        2 => HgLabel::new(0, 1),
        3 => HgLabel::new(2, 0),
        4 => HgLabel::new(0, 2),
        5 => HgLabel::new(1, 1),
        _ => panic!("mode index {index} out of range 1..=5"),
    }
}

/// Real symmetric 5×5 down-conversion adjacency matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    g: Matrix5<f64>,
}

impl CouplingMatrix {
    pub fn matrix(&self) -> &Matrix5<f64> {
        &self.g
    }

    /// Entry g[m,n] with 1-based mode indices.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.g[(m - 1, n - 1)]
    }
}

/// G[m,n] = χ · Σ over processes coupling (m,n) of weight·Λ.
pub fn coupling_matrix(p: &PumpSetting, table: &OverlapTable) -> CouplingMatrix {
    let mut g = Matrix5::zeros();
    for proc in process_table(table) {
        let v = p.chi * proc.weight.eval(p) * proc.lambda;
        g[(proc.signal - 1, proc.idler - 1)] += v;
        g[(proc.idler - 1, proc.signal - 1)] += v;
    }
    CouplingMatrix { g }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

fn integral_lambda(pump: HgLabel, table: &OverlapTable) -> Result<f64> {
    let (signal, idler) = match (pump.m, pump.n) {
        (3, 0) => (HgLabel::new(1, 0), HgLabel::new(2, 0)),
        (0, 3) => (HgLabel::new(0, 1), HgLabel::new(0, 2)),
        (2, 1) => (HgLabel::new(1, 0), HgLabel::new(1, 1)),
        (1, 2) => (HgLabel::new(0, 1), HgLabel::new(1, 1)),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{pump} is not one of the four pump modes"
            )))
        }
    };
    table
        .get(pump, signal, idler)
        .ok_or_else(|| Error::InvalidParameter(format!("no overlap entry for pump {pump}")))
}

fn weight_integral(lambda: f64, weight: WeightSel, power: u32) -> f64 {
    let p = power as i32;
    let ang = weight.angular();
    let rad = weight.radial();
    let a = adaptive_simpson(
        &|th: f64| ang(th).powi(p),
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-8,
    );
    let r = adaptive_simpson(&|u: f64| rad(u).powi(p), 0.0, 1.0, 1e-8);
    // The third pump knob does not appear in the integrand; its unit range
    // contributes a factor 1.
    lambda.powi(p) * a * r
}

/// ∫₀^{π/2}dθ ∫₀¹db ∫₀¹dc (Λ · weight)^power for the given pump's weight
/// selector, to 1e-6 absolute.
pub fn involved_pump_integral(pump: HgLabel, power: u32, table: &OverlapTable) -> Result<f64> {
    if !(1..=2).contains(&power) {
        return Err(Error::InvalidParameter(format!("power must be 1 or 2 (got {power})")));
    }
    let weight = match (pump.m, pump.n) {
        (3, 0) => WeightSel::BCos,
        (0, 3) => WeightSel::BbarCos,
        (2, 1) => WeightSel::CSin,
        (1, 2) => WeightSel::CbarSin,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{pump} is not one of the four pump modes"
            )))
        }
    };
    Ok(weight_integral(integral_lambda(pump, table)?, weight, power))
}

/// Both readings of the HG12 integral: the declared √(1−c²) weight, and the
/// weight-c variant that matches the printed reference value 0.262. The
/// discrepancy is reported, not resolved.
pub fn i12_candidates(power: u32, table: &OverlapTable) -> Result<[f64; 2]> {
    let lambda = integral_lambda(HgLabel::new(1, 2), table)?;
    Ok([
        weight_integral(lambda, WeightSel::CbarSin, power),
        weight_integral(lambda, WeightSel::CSin, power),
    ])
}
