//! wasm-bindgen surface for the browser demo: RGBA region maps plus a
//! point-classification probe, sharing one calibrated overlap table.

use std::sync::OnceLock;

use wasm_bindgen::prelude::*;

use opo_steering::coupling::{coupling_matrix, PumpSetting};
use opo_steering::gaussian::{covariance, propagate};
use opo_steering::hg::{calibrated_overlap_table, OverlapTable, WaistConfig};
use opo_steering::scan::{sweep, Axis, AxisSpec, SweepPlan, Task};
use opo_steering::steering::{classify_pair, genuine_pentapartite, QuadScale, DEFAULT_CLASS_TOL};

fn table() -> Result<&'static OverlapTable, JsError> {
    static TABLE: OnceLock<OverlapTable> = OnceLock::new();
    if TABLE.get().is_none() {
        let t = calibrated_overlap_table(&WaistConfig::default())
            .map_err(|e| JsError::new(&e.to_string()))?;
        let _ = TABLE.set(t);
    }
    Ok(TABLE.get().expect("set above"))
}

fn grid_plan(theta: f64, t: f64, n: usize, task: Task) -> Result<SweepPlan, JsError> {
    let err = |e: opo_steering::Error| JsError::new(&e.to_string());
    Ok(SweepPlan {
        x: AxisSpec::new(Axis::B, 0.0, 1.0, n).map_err(err)?,
        y: AxisSpec::new(Axis::C, 0.0, 1.0, n).map_err(err)?,
        base: PumpSetting::new(0.5, 0.5, theta).map_err(err)?,
        t,
        task,
    })
}

/// Row-major RGBA pixels (top row = c max), ready for `ImageData`.
fn rgba(plan: &SweepPlan) -> Result<Vec<u8>, JsError> {
    let grid = sweep(plan, table()?).map_err(|e| JsError::new(&e.to_string()))?;
    let (nx, ny) = (plan.x.points, plan.y.points);
    let mut px = Vec::with_capacity(nx * ny * 4);
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let [r, g, b] = grid.color_of(grid.cell(ix, iy).code);
            px.extend([r, g, b, 255]);
        }
    }
    Ok(px)
}

/// Pair-class map over (b, c) at fixed theta and t; n pixels per side.
#[wasm_bindgen]
pub fn region_map(mode_a: usize, mode_b: usize, theta: f64, t: f64, n: usize) -> Result<Vec<u8>, JsError> {
    let task = Task::PairClass {
        mode_a,
        mode_b,
        tol: DEFAULT_CLASS_TOL,
    };
    rgba(&grid_plan(theta, t, n, task)?)
}

/// Genuine-pentapartite violation map over (b, c); `scale` is "unit" or "half".
#[wasm_bindgen]
pub fn genuine_map(theta: f64, t: f64, n: usize, scale: &str) -> Result<Vec<u8>, JsError> {
    let scale: QuadScale = scale.parse().map_err(|e: opo_steering::Error| JsError::new(&e.to_string()))?;
    rgba(&grid_plan(theta, t, n, Task::GenuineMap { scale })?)
}

/// Legend for the current map as JSON `[{code, label, color}, ...]`.
#[wasm_bindgen]
pub fn map_legend(mode_a: usize, mode_b: usize, theta: f64, t: f64, genuine: bool, scale: &str) -> Result<String, JsError> {
    let err = |e: opo_steering::Error| JsError::new(&e.to_string());
    let task = if genuine {
        Task::GenuineMap {
            scale: scale.parse().map_err(err)?,
        }
    } else {
        Task::PairClass {
            mode_a,
            mode_b,
            tol: DEFAULT_CLASS_TOL,
        }
    };
    let grid = sweep(&grid_plan(theta, t, 2, task)?, table()?).map_err(err)?;
    serde_json::to_string(grid.legend()).map_err(|e| JsError::new(&e.to_string()))
}

/// Full probe of one pump setting: pair report plus the genuine total.
#[wasm_bindgen]
pub fn classify_point(b: f64, c: f64, theta: f64, t: f64, mode_a: usize, mode_b: usize) -> Result<String, JsError> {
    let err = |e: opo_steering::Error| JsError::new(&e.to_string());
    let setting = PumpSetting::new(b, c, theta).map_err(err)?;
    let g = coupling_matrix(&setting, table()?);
    let cm = covariance(&propagate(&g, t).map_err(err)?);
    let genuine = genuine_pentapartite(&cm, QuadScale::default()).map_err(err)?;
    let pair = cm.reduce(&[mode_a, mode_b]).map_err(err)?;
    let report = classify_pair(&pair, DEFAULT_CLASS_TOL).map_err(err)?;
    let value = serde_json::json!({
        "b": b,
        "c": c,
        "theta": theta,
        "t": t,
        "pair": [mode_a, mode_b],
        "report": report,
        "genuine_total": genuine.total,
        "genuine_violated": genuine.violated,
    });
    Ok(value.to_string())
}
