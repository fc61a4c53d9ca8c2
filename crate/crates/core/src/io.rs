//! Deterministic serialization: metadata blocks, CSV tables, grid CSV with
//! legend JSON sidecar, and binary P6 pixmaps.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! emitted number reparses to the exact bit pattern; JSON object keys are
//! sorted, making all output byte-stable across runs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::coupling::{i12_candidates, involved_pump_integral, mode_label, CouplingMatrix};
use crate::error::Result;
use crate::gaussian::CovarianceMatrix;
use crate::hg::{HgLabel, OverlapTable};
use crate::scan::RegionGrid;
use crate::steering::QuadScale;

pub const TOOL_NAME: &str = "opo-steering";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed conventions recorded with every output.
#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub vacuum_variance: &'static str,
    pub quad_scale: &'static str,
    pub calibration_factor: f64,
}

/// Run-identity block: tool identity, the resolved parameters of the run, and
/// the conventions the numbers were produced under.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub conventions: Conventions,
}

impl Metadata {
    pub fn new(command: &str, quad_scale: QuadScale, calibration_factor: f64) -> Self {
        Self {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            command: command.to_string(),
            params: BTreeMap::new(),
            conventions: Conventions {
                vacuum_variance: "1/2",
                quad_scale: quad_scale.name(),
                calibration_factor,
            },
        }
    }

    pub fn with_param(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// `key=value` lines for CSV comment headers, in a fixed order.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("tool={}", self.tool),
            format!("version={}", self.version),
            format!("command={}", self.command),
        ];
        for (k, v) in &self.params {
            lines.push(format!("{k}={v}"));
        }
        lines.push("vacuum_variance=1/2".to_string());
        lines.push(format!("quad_scale={}", self.conventions.quad_scale));
        lines.push(format!(
            "calibration_factor={}",
            self.conventions.calibration_factor
        ));
        lines
    }
}

fn comment_header(meta: &Metadata) -> String {
    let mut out = String::new();
    for line in meta.header_lines() {
        out.push_str("# ");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// One involved-pump integral with the weight reading it was computed under.
#[derive(Clone, Debug, Serialize)]
pub struct PumpIntegralRow {
    pub name: String,
    pub weight: String,
    pub power: u32,
    pub value: f64,
}

/// The four pump integrals at the given power. HG12 appears twice: once with
/// its declared √(1−c²) weight and once with the weight-c reading that
/// matches the printed reference value; both are emitted side by side.
pub fn pump_integral_rows(table: &OverlapTable, power: u32) -> Result<Vec<PumpIntegralRow>> {
    let mut rows = Vec::new();
    for (label, name, weight) in [
        (HgLabel::new(3, 0), "I30", "b*cos(theta)"),
        (HgLabel::new(0, 3), "I03", "sqrt(1-b^2)*cos(theta)"),
        (HgLabel::new(2, 1), "I21", "c*sin(theta)"),
    ] {
        rows.push(PumpIntegralRow {
            name: name.to_string(),
            weight: weight.to_string(),
            power,
            value: involved_pump_integral(label, power, table)?,
        });
    }
    let [declared, printed] = i12_candidates(power, table)?;
    rows.push(PumpIntegralRow {
        name: "I12".to_string(),
        weight: "sqrt(1-c^2)*sin(theta)".to_string(),
        power,
        value: declared,
    });
    rows.push(PumpIntegralRow {
        name: "I12".to_string(),
        weight: "c*sin(theta)".to_string(),
        power,
        value: printed,
    });
    Ok(rows)
}

pub fn overlaps_csv(
    table: &OverlapTable,
    integrals: Option<&[PumpIntegralRow]>,
    meta: &Metadata,
) -> String {
    let mut out = comment_header(meta);
    out.push_str("pump,signal,idler,lambda\n");
    for &(pump, signal, idler, lambda) in table.entries() {
        out.push_str(&format!("{pump},{signal},{idler},{lambda}\n"));
    }
    if let Some(rows) = integrals {
        out.push('\n');
        out.push_str("integral,weight,power,value\n");
        for row in rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.name, row.weight, row.power, row.value
            ));
        }
    }
    out
}

pub fn overlaps_json(
    table: &OverlapTable,
    integrals: Option<&[PumpIntegralRow]>,
    meta: &Metadata,
) -> String {
    let overlaps: Vec<serde_json::Value> = table
        .entries()
        .iter()
        .map(|&(pump, signal, idler, lambda)| {
            serde_json::json!({
                "pump": pump.to_string(),
                "signal": signal.to_string(),
                "idler": idler.to_string(),
                "lambda": lambda,
            })
        })
        .collect();
    let mut value = serde_json::json!({
        "metadata": meta,
        "calibration_factor": table.calibration_factor(),
        "overlaps": overlaps,
    });
    if let Some(rows) = integrals {
        value["integrals"] = serde_json::to_value(rows).expect("serializable rows");
    }
    pretty(&value)
}

pub fn coupling_csv(g: &CouplingMatrix, meta: &Metadata) -> String {
    let mut out = comment_header(meta);
    out.push_str("mode,a1,a2,a3,a4,a5\n");
    for m in 1..=5 {
        out.push_str(&format!("a{m}"));
        for n in 1..=5 {
            out.push_str(&format!(",{}", g.get(m, n)));
        }
        out.push('\n');
    }
    out
}

pub fn coupling_json(g: &CouplingMatrix, weights: [f64; 4], meta: &Metadata) -> String {
    let matrix: Vec<Vec<f64>> = (1..=5)
        .map(|m| (1..=5).map(|n| g.get(m, n)).collect())
        .collect();
    pretty(&serde_json::json!({
        "metadata": meta,
        "weights": {
            "w30": weights[0],
            "w03": weights[1],
            "w21": weights[2],
            "w12": weights[3],
        },
        "matrix": matrix,
    }))
}

fn quad_labels(cm: &CovarianceMatrix) -> Vec<String> {
    let xs = cm.modes().iter().map(|m| format!("X{m}"));
    let ys = cm.modes().iter().map(|m| format!("Y{m}"));
    xs.chain(ys).collect()
}

pub fn cm_csv(cm: &CovarianceMatrix, meta: &Metadata) -> String {
    let labels = quad_labels(cm);
    let mut out = comment_header(meta);
    out.push_str(&format!("quad,{}\n", labels.join(",")));
    let s = cm.matrix();
    for (i, label) in labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..s.ncols() {
            out.push_str(&format!(",{}", s[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn cm_json(cm: &CovarianceMatrix, meta: &Metadata) -> String {
    let s = cm.matrix();
    let matrix: Vec<Vec<f64>> = (0..s.nrows())
        .map(|i| (0..s.ncols()).map(|j| s[(i, j)]).collect())
        .collect();
    pretty(&serde_json::json!({
        "metadata": meta,
        "modes": cm.modes(),
        "ordering": quad_labels(cm),
        "matrix": matrix,
    }))
}

pub fn photons_csv(cm: &CovarianceMatrix, meta: &Metadata) -> String {
    let mut out = comment_header(meta);
    out.push_str("mode,hg,n\n");
    for (&m, n) in cm.modes().iter().zip(cm.mean_photons()) {
        out.push_str(&format!("a{m},{},{n}\n", mode_label(m)));
    }
    out
}

pub fn photons_json(cm: &CovarianceMatrix, meta: &Metadata) -> String {
    let photons: Vec<serde_json::Value> = cm
        .modes()
        .iter()
        .zip(cm.mean_photons())
        .map(|(&m, n)| {
            serde_json::json!({
                "mode": m,
                "hg": mode_label(m).to_string(),
                "n": n,
            })
        })
        .collect();
    pretty(&serde_json::json!({
        "metadata": meta,
        "photons": photons,
    }))
}

pub fn grid_csv(grid: &RegionGrid, meta: &Metadata) -> String {
    let mut out = comment_header(meta);
    out.push_str(&format!("# task={}\n", grid.task_label()));
    for (tag, ax) in [("x", grid.x()), ("y", grid.y())] {
        out.push_str(&format!(
            "# {tag}_axis={} {tag}_min={} {tag}_max={} {tag}_points={}\n",
            ax.axis.name(),
            ax.min,
            ax.max,
            ax.points
        ));
    }
    out.push_str(&format!(
        "{},{},code,value\n",
        grid.x().axis.name(),
        grid.y().axis.name()
    ));
    let xs = grid.x().values();
    let ys = grid.y().values();
    for (iy, yv) in ys.iter().enumerate() {
        for (ix, xv) in xs.iter().enumerate() {
            let cell = grid.cell(ix, iy);
            out.push_str(&format!("{xv},{yv},{},{}\n", cell.code, cell.value));
        }
    }
    out
}

pub fn grid_legend_json(grid: &RegionGrid, meta: &Metadata) -> String {
    pretty(&serde_json::json!({
        "metadata": meta,
        "task": grid.task_label(),
        "x": grid.x(),
        "y": grid.y(),
        "legend": grid.legend(),
    }))
}

/// Binary P6 raster of the grid, one pixel per cell, colored per legend.
/// The top pixel row is the maximal y value, matching plot orientation.
pub fn grid_ppm(grid: &RegionGrid) -> Vec<u8> {
    let (w, h) = (grid.x().points, grid.y().points);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    for iy in (0..h).rev() {
        for ix in 0..w {
            out.extend_from_slice(&grid.color_of(grid.cell(ix, iy).code));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{coupling_matrix, pump_weights, PumpSetting};
    use crate::gaussian::{covariance, propagate};
    use crate::hg::{calibrated_overlap_table, WaistConfig};
    use crate::scan::{sweep, Axis, AxisSpec, SweepPlan, Task};

    fn table() -> OverlapTable {
        calibrated_overlap_table(&WaistConfig::default()).unwrap()
    }

    fn meta() -> Metadata {
        Metadata::new("test", QuadScale::Unit, 3.13).with_param("b", 0.5)
    }

    fn grid() -> RegionGrid {
        let plan = SweepPlan {
            x: AxisSpec::new(Axis::B, 0.0, 1.0, 4).unwrap(),
            y: AxisSpec::new(Axis::C, 0.0, 1.0, 3).unwrap(),
            base: PumpSetting::new(0.5, 0.5, 0.9).unwrap(),
            t: 0.5,
            task: Task::PairClass {
                mode_a: 2,
                mode_b: 3,
                tol: 1e-3,
            },
        };
        sweep(&plan, &table()).unwrap()
    }

    #[test]
    fn header_lines_are_ordered() {
        let lines = meta().header_lines();
        assert_eq!(lines[0], "tool=opo-steering");
        assert!(lines[1].starts_with("version="));
        assert_eq!(lines[2], "command=test");
        assert_eq!(lines[3], "b=0.5");
        assert!(lines.contains(&"vacuum_variance=1/2".to_string()));
    }

    #[test]
    fn overlaps_csv_shape() {
        let t = table();
        let rows = pump_integral_rows(&t, 1).unwrap();
        let csv = overlaps_csv(&t, Some(&rows), &meta());
        let data_rows: Vec<&str> = csv
            .lines()
            .filter(|l| l.starts_with("HG"))
            .collect();
        assert_eq!(data_rows.len(), 6);
        assert!(csv.contains("pump,signal,idler,lambda"));
        let i12_rows: Vec<&str> = csv.lines().filter(|l| l.starts_with("I12")).collect();
        assert_eq!(i12_rows.len(), 2, "both I12 readings must be present");
    }

    #[test]
    fn integral_rows_cover_reference_values() {
        let rows = pump_integral_rows(&table(), 1).unwrap();
        let by_name = |n: &str| -> Vec<f64> {
            rows.iter().filter(|r| r.name == n).map(|r| r.value).collect()
        };
        assert!((by_name("I30")[0] - 0.267).abs() < 0.005);
        assert!((by_name("I03")[0] - 0.419).abs() < 0.005);
        let i12 = by_name("I12");
        assert!((i12[0] - 0.411).abs() < 0.005);
        assert!((i12[1] - 0.262).abs() < 0.005);
    }

    #[test]
    fn grid_csv_shape() {
        let g = grid();
        let csv = grid_csv(&g, &meta());
        assert!(csv.starts_with("# tool=opo-steering\n"));
        assert!(csv.contains("# task=pair-class a2,a3\n"));
        assert!(csv.contains("b,c,code,value\n"));
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 1 + 12);
        let first = data[1];
        assert!(first.starts_with("0,0,"), "got {first}");
    }

    #[test]
    fn legend_json_parses() {
        let g = grid();
        let json = grid_legend_json(&g, &meta());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["legend"].as_array().unwrap().len(), g.legend().len());
        assert_eq!(v["x"]["points"], 4);
        assert_eq!(v["metadata"]["tool"], "opo-steering");
    }

    #[test]
    fn ppm_shape_and_orientation() {
        let g = grid();
        let ppm = grid_ppm(&g);
        let header = b"P6\n4 3\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        assert_eq!(ppm.len(), header.len() + 3 * 4 * 3);
        // First emitted pixel is cell (0, ny-1).
        let expect = g.color_of(g.cell(0, 2).code);
        assert_eq!(&ppm[header.len()..header.len() + 3], &expect);
    }

    #[test]
    fn floats_round_trip_through_display() {
        for v in [0.1 + 0.2, 1.0 / 3.0, 2f64.powi(-10), 0.069126105396152077] {
            let s = format!("{v}");
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn json_emission_is_deterministic() {
        let t = table();
        let p = PumpSetting::new(0.6, 0.7, 1.0).unwrap();
        let g = coupling_matrix(&p, &t);
        let cm = covariance(&propagate(&g, 0.4).unwrap());
        let a = cm_json(&cm, &meta());
        let b = cm_json(&cm, &meta());
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        let j = coupling_json(&g, pump_weights(&p), &meta());
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["matrix"].as_array().unwrap().len(), 5);
        let back = v["matrix"][0][2].as_f64().unwrap();
        assert_eq!(back.to_bits(), g.get(1, 3).to_bits());
    }

    #[test]
    fn photons_output_names_modes() {
        let t = table();
        let g = coupling_matrix(&PumpSetting::new(1.0, 0.0, 0.0).unwrap(), &t);
        let cm = covariance(&propagate(&g, 0.5).unwrap());
        let csv = photons_csv(&cm, &meta());
        assert!(csv.contains("a1,HG10,"));
        assert!(csv.contains("a5,HG11,"));
        let json = photons_json(&cm, &meta());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["photons"].as_array().unwrap().len(), 5);
    }
}
