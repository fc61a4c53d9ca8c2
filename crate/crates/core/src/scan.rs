//! Parameter-grid sweeps: classify every cell of a (b, c, θ) plane slice by
//! bipartite steering type, multipartite presence pattern, or the genuine
//! pentapartite total, with per-cell error isolation and a color legend.

use serde::Serialize;

use crate::coupling::{coupling_matrix, PumpSetting};
use crate::error::{Error, Result};
use crate::gaussian::{covariance, propagate, Bipartition, CovarianceMatrix};
use crate::hg::OverlapTable;
use crate::steering::{
    classify_pair, genuine_pentapartite, steer_multi, Direction, QuadScale, SteeringClass,
};

/// Steerability below this threshold counts as absent in presence bitmasks.
pub const PRESENCE_THRESHOLD: f64 = 1e-9;

/// Cell code reserved for per-cell numeric failures.
pub const ERROR_CODE: u8 = 255;

pub const ERROR_COLOR: [u8; 3] = [0, 0, 0];

/// A sweepable pump knob.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    B,
    C,
    Theta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::B => "b",
            Axis::C => "c",
            Axis::Theta => "theta",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b" => Ok(Axis::B),
            "c" => Ok(Axis::C),
            "theta" => Ok(Axis::Theta),
            other => Err(Error::InvalidParameter(format!(
                "unknown axis '{other}' (expected b, c, or theta)"
            ))),
        }
    }
}

/// An inclusive, evenly spaced range of axis values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn new(axis: Axis, min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!(
                "axis {} needs at least 2 points (got {points})",
                axis.name()
            )));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParameter(format!(
                "axis {} range [{min}, {max}] is not an increasing finite interval",
                axis.name()
            )));
        }
        if matches!(axis, Axis::B | Axis::C)
            && (!(0.0..=1.0).contains(&min) || !(0.0..=1.0).contains(&max))
        {
            return Err(Error::InvalidParameter(format!(
                "axis {} range [{min}, {max}] leaves [0, 1]",
                axis.name()
            )));
        }
        Ok(Self {
            axis,
            min,
            max,
            points,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.min + (self.max - self.min) * (i as f64 / (n - 1) as f64))
            .collect()
    }
}

/// What to evaluate at each grid cell.
#[derive(Clone, Debug)]
pub enum Task {
    /// Six-way classification of the pair (mode_a, mode_b); cell value is
    /// g_a→b − g_b→a.
    PairClass {
        mode_a: usize,
        mode_b: usize,
        tol: f64,
    },
    /// Presence bitmask over a list of directed bipartitions (bit j set iff
    /// the j-th steerability exceeds the presence threshold).
    MultiPresence { bipartitions: Vec<Bipartition> },
    /// Violation flag (code 1) and total of the pentapartite criterion.
    GenuineMap { scale: QuadScale },
}

impl Task {
    fn validate(&self) -> Result<()> {
        match self {
            Task::PairClass { mode_a, mode_b, tol } => {
                for &m in [mode_a, mode_b] {
                    if !(1..=5).contains(&m) {
                        return Err(Error::UnknownMode(m));
                    }
                }
                if mode_a == mode_b {
                    return Err(Error::InvalidParameter(format!(
                        "pair modes must differ (got a{mode_a}, a{mode_b})"
                    )));
                }
                if !(*tol > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "classifier tolerance must be positive (got {tol})"
                    )));
                }
            }
            Task::MultiPresence { bipartitions } => {
                if bipartitions.is_empty() || bipartitions.len() > 8 {
                    return Err(Error::InvalidParameter(format!(
                        "presence task needs 1..=8 bipartitions (got {})",
                        bipartitions.len()
                    )));
                }
            }
            Task::GenuineMap { .. } => {}
        }
        Ok(())
    }

    fn label(&self) -> String {
        match self {
            Task::PairClass { mode_a, mode_b, .. } => format!("pair-class a{mode_a},a{mode_b}"),
            Task::MultiPresence { bipartitions } => {
                let names: Vec<String> = bipartitions.iter().map(|p| p.name()).collect();
                format!("multi-presence {}", names.join(","))
            }
            Task::GenuineMap { scale } => format!("genuine-map {}", scale.name()),
        }
    }
}

/// A full grid job: two swept axes over a fixed base setting and time.
#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub base: PumpSetting,
    pub t: f64,
    pub task: Task,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.x.axis == self.y.axis {
            return Err(Error::InvalidParameter(format!(
                "sweep axes must be distinct (both {})",
                self.x.axis.name()
            )));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interaction time must be non-negative and finite (got {})",
                self.t
            )));
        }
        self.task.validate()
    }
}

/// One evaluated grid node: a small integer code plus a scalar payload whose
/// meaning depends on the task.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cell {
    pub code: u8,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LegendEntry {
    pub code: u8,
    pub label: String,
    pub color: [u8; 3],
}

/// The evaluated grid, row-major with x fastest (cell (ix, iy) at
/// iy·nx + ix).
#[derive(Clone, Debug)]
pub struct RegionGrid {
    x: AxisSpec,
    y: AxisSpec,
    task_label: String,
    cells: Vec<Cell>,
    legend: Vec<LegendEntry>,
}

impl RegionGrid {
    pub fn x(&self) -> &AxisSpec {
        &self.x
    }

    pub fn y(&self) -> &AxisSpec {
        &self.y
    }

    pub fn task_label(&self) -> &str {
        &self.task_label
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, ix: usize, iy: usize) -> &Cell {
        &self.cells[iy * self.x.points + ix]
    }

    pub fn legend(&self) -> &[LegendEntry] {
        &self.legend
    }

    pub fn color_of(&self, code: u8) -> [u8; 3] {
        self.legend
            .iter()
            .find(|e| e.code == code)
            .map(|e| e.color)
            .unwrap_or(ERROR_COLOR)
    }
}

pub fn class_color(class: SteeringClass) -> [u8; 3] {
    match class {
        SteeringClass::NoWay => [128, 128, 128],
        SteeringClass::OneWayAB => [255, 221, 0],
        SteeringClass::OneWayBA => [0, 102, 255],
        SteeringClass::TwoWaySymmetric => [0, 170, 0],
        SteeringClass::TwoWayADominant => [255, 182, 193],
        SteeringClass::TwoWayBDominant => [255, 64, 160],
    }
}

/// Distinct colors for presence bitmasks; masks beyond 15 wrap around.
const PRESENCE_PALETTE: [[u8; 3]; 16] = [
    [128, 128, 128],
    [255, 221, 0],
    [0, 102, 255],
    [0, 170, 0],
    [255, 64, 160],
    [255, 128, 0],
    [128, 0, 255],
    [0, 200, 200],
    [139, 69, 19],
    [255, 182, 193],
    [0, 96, 0],
    [96, 0, 128],
    [200, 200, 0],
    [0, 0, 128],
    [220, 20, 60],
    [120, 255, 120],
];

/// Bit j of the result reports whether the j-th bipartition's A→B
/// steerability (on the reduced state of A∪B) exceeds the presence
/// threshold.
pub fn presence_pattern(cm: &CovarianceMatrix, bipartitions: &[Bipartition]) -> Result<u8> {
    if bipartitions.is_empty() || bipartitions.len() > 8 {
        return Err(Error::InvalidParameter(format!(
            "presence pattern needs 1..=8 bipartitions (got {})",
            bipartitions.len()
        )));
    }
    let mut mask = 0u8;
    for (j, part) in bipartitions.iter().enumerate() {
        let union: Vec<usize> = part.a().iter().chain(part.b()).copied().collect();
        let red = cm.reduce(&union)?;
        let g = steer_multi(&red, part, Direction::AToB)?;
        if g > PRESENCE_THRESHOLD {
            mask |= 1 << j;
        }
    }
    Ok(mask)
}

fn eval_cell(plan: &SweepPlan, table: &OverlapTable, xv: f64, yv: f64) -> Result<Cell> {
    let mut b = plan.base.b;
    let mut c = plan.base.c;
    let mut theta = plan.base.theta;
    for (spec, v) in [(&plan.x, xv), (&plan.y, yv)] {
        match spec.axis {
            Axis::B => b = v,
            Axis::C => c = v,
            Axis::Theta => theta = v,
        }
    }
    let setting = PumpSetting::with_chi(b, c, theta, plan.base.chi)?;
    let g = coupling_matrix(&setting, table);
    let cm = covariance(&propagate(&g, plan.t)?);
    match &plan.task {
        Task::PairClass { mode_a, mode_b, tol } => {
            let red = cm.reduce(&[*mode_a, *mode_b])?;
            let report = classify_pair(&red, *tol)?;
            Ok(Cell {
                code: report.class.code(),
                value: report.g_a_to_b - report.g_b_to_a,
            })
        }
        Task::MultiPresence { bipartitions } => {
            let mask = presence_pattern(&cm, bipartitions)?;
            Ok(Cell {
                code: mask,
                value: mask as f64,
            })
        }
        Task::GenuineMap { scale } => {
            let result = genuine_pentapartite(&cm, *scale)?;
            Ok(Cell {
                code: result.violated as u8,
                value: result.total,
            })
        }
    }
}

fn build_legend(task: &Task, cells: &[Cell]) -> Vec<LegendEntry> {
    let mut present: Vec<u8> = cells.iter().map(|c| c.code).collect();
    present.sort_unstable();
    present.dedup();
    let mut legend = Vec::new();
    match task {
        Task::PairClass { mode_a, mode_b, .. } => {
            for class in SteeringClass::ALL {
                let label = match class {
                    SteeringClass::NoWay => "no steering".to_string(),
                    SteeringClass::OneWayAB => format!("one-way a{mode_a}->a{mode_b}"),
                    SteeringClass::OneWayBA => format!("one-way a{mode_b}->a{mode_a}"),
                    SteeringClass::TwoWaySymmetric => "two-way symmetric".to_string(),
                    SteeringClass::TwoWayADominant => format!("two-way a{mode_a}-dominant"),
                    SteeringClass::TwoWayBDominant => format!("two-way a{mode_b}-dominant"),
                };
                legend.push(LegendEntry {
                    code: class.code(),
                    label,
                    color: class_color(class),
                });
            }
        }
        Task::MultiPresence { bipartitions } => {
            for &mask in &present {
                if mask == ERROR_CODE {
                    continue;
                }
                let mut names: Vec<String> = Vec::new();
                for (j, part) in bipartitions.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        names.push(part.name());
                    }
                }
                let label = if names.is_empty() {
                    "none".to_string()
                } else {
                    names.join(" & ")
                };
                legend.push(LegendEntry {
                    code: mask,
                    label,
                    color: PRESENCE_PALETTE[(mask as usize) % PRESENCE_PALETTE.len()],
                });
            }
        }
        Task::GenuineMap { .. } => {
            legend.push(LegendEntry {
                code: 0,
                label: "not violated".to_string(),
                color: [235, 235, 235],
            });
            legend.push(LegendEntry {
                code: 1,
                label: "violated".to_string(),
                color: [0, 170, 0],
            });
        }
    }
    if present.contains(&ERROR_CODE) {
        legend.push(LegendEntry {
            code: ERROR_CODE,
            label: "error".to_string(),
            color: ERROR_COLOR,
        });
    }
    legend
}

/// Evaluates the plan at every grid node. Per-cell numeric failures become
/// `ERROR_CODE` cells with NaN values; the grid itself always completes.
/// Output is deterministic and independent of evaluation order.
pub fn sweep(plan: &SweepPlan, table: &OverlapTable) -> Result<RegionGrid> {
    plan.validate()?;
    let xs = plan.x.values();
    let ys = plan.y.values();
    let nx = xs.len();
    let n_cells = nx * ys.len();
    let eval = |idx: usize| -> Cell {
        let (ix, iy) = (idx % nx, idx / nx);
        eval_cell(plan, table, xs[ix], ys[iy]).unwrap_or(Cell {
            code: ERROR_CODE,
            value: f64::NAN,
        })
    };
    #[cfg(feature = "parallel")]
    let cells: Vec<Cell> = {
        use rayon::prelude::*;
        (0..n_cells).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cells: Vec<Cell> = (0..n_cells).map(eval).collect();
    let legend = build_legend(&plan.task, &cells);
    Ok(RegionGrid {
        x: plan.x.clone(),
        y: plan.y.clone(),
        task_label: plan.task.label(),
        cells,
        legend,
    })
}

/// Fraction of cells whose code lies in `codes`.
pub fn region_area(grid: &RegionGrid, codes: &[u8]) -> f64 {
    if grid.cells.is_empty() {
        return 0.0;
    }
    let hits = grid.cells.iter().filter(|c| codes.contains(&c.code)).count();
    hits as f64 / grid.cells.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hg::{calibrated_overlap_table, WaistConfig};

    fn table() -> OverlapTable {
        calibrated_overlap_table(&WaistConfig::default()).unwrap()
    }

    fn pair_plan(points: usize) -> SweepPlan {
        SweepPlan {
            x: AxisSpec::new(Axis::B, 0.0, 1.0, points).unwrap(),
            y: AxisSpec::new(Axis::C, 0.0, 1.0, points).unwrap(),
            base: PumpSetting::new(0.5, 0.5, 11.0 * std::f64::consts::PI / 32.0).unwrap(),
            t: 0.5,
            task: Task::PairClass {
                mode_a: 2,
                mode_b: 3,
                tol: 1e-3,
            },
        }
    }

    #[test]
    fn axis_values_hit_both_endpoints() {
        let spec = AxisSpec::new(Axis::B, 0.2, 0.8, 4).unwrap();
        let v = spec.values();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.2);
        assert_eq!(v[3], 0.8);
        assert!((v[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn plans_are_validated() {
        assert!(AxisSpec::new(Axis::B, 0.0, 1.2, 10).is_err());
        assert!(AxisSpec::new(Axis::B, 0.0, 1.0, 1).is_err());
        assert!(AxisSpec::new(Axis::Theta, 0.5, 0.5, 10).is_err());
        let mut plan = pair_plan(5);
        plan.y = AxisSpec::new(Axis::B, 0.0, 1.0, 5).unwrap();
        assert!(plan.validate().is_err());
        let mut plan = pair_plan(5);
        plan.task = Task::PairClass {
            mode_a: 2,
            mode_b: 2,
            tol: 1e-3,
        };
        assert!(plan.validate().is_err());
        let mut plan = pair_plan(5);
        plan.task = Task::MultiPresence {
            bipartitions: vec![],
        };
        assert!(plan.validate().is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let plan = pair_plan(7);
        let g1 = sweep(&plan, &table()).unwrap();
        let g2 = sweep(&plan, &table()).unwrap();
        assert_eq!(g1.cells.len(), 49);
        for (a, b) in g1.cells.iter().zip(g2.cells.iter()) {
            assert_eq!(a.code, b.code);
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }

    #[test]
    fn pair_grid_codes_and_legend_are_consistent() {
        let grid = sweep(&pair_plan(9), &table()).unwrap();
        for cell in grid.cells() {
            assert!(cell.code <= 5, "unexpected code {}", cell.code);
            let entry = grid.legend().iter().find(|e| e.code == cell.code);
            assert!(entry.is_some(), "legend misses code {}", cell.code);
            match SteeringClass::from_code(cell.code).unwrap() {
                SteeringClass::OneWayAB | SteeringClass::TwoWayADominant => {
                    assert!(cell.value > 0.0)
                }
                SteeringClass::OneWayBA | SteeringClass::TwoWayBDominant => {
                    assert!(cell.value < 0.0)
                }
                SteeringClass::NoWay => assert!(cell.value.abs() <= 2e-9),
                SteeringClass::TwoWaySymmetric => {}
            }
        }
    }

    #[test]
    fn decoupled_presence_bit_stays_clear() {
        let parts = vec![
            Bipartition::new(vec![3], vec![1, 2]).unwrap(),
            Bipartition::new(vec![4], vec![1, 2]).unwrap(),
            Bipartition::new(vec![5], vec![1, 2]).unwrap(),
        ];
        let plan = SweepPlan {
            x: AxisSpec::new(Axis::B, 0.0, 1.0, 6).unwrap(),
            y: AxisSpec::new(Axis::C, 0.0, 1.0, 6).unwrap(),
            base: PumpSetting::new(0.5, 0.5, 0.0).unwrap(),
            t: 0.5,
            task: Task::MultiPresence {
                bipartitions: parts,
            },
        };
        let grid = sweep(&plan, &table()).unwrap();
        for cell in grid.cells() {
            assert_ne!(cell.code, ERROR_CODE);
            assert_eq!(cell.code & 0b100, 0, "mode-5 bit set at θ=0");
        }
    }

    #[test]
    fn genuine_map_smoke() {
        let plan = SweepPlan {
            x: AxisSpec::new(Axis::B, 0.3, 0.9, 5).unwrap(),
            y: AxisSpec::new(Axis::C, 0.3, 0.9, 5).unwrap(),
            base: PumpSetting::new(0.5, 0.5, std::f64::consts::FRAC_PI_4).unwrap(),
            t: 0.2,
            task: Task::GenuineMap {
                scale: QuadScale::Unit,
            },
        };
        let grid = sweep(&plan, &table()).unwrap();
        for cell in grid.cells() {
            assert!(cell.code == 0 || cell.code == 1);
            assert!(cell.value.is_finite());
            assert_eq!(cell.code == 1, cell.value < 2.0);
        }
        assert!(grid.legend().iter().any(|e| e.label == "not violated"));
    }

    #[test]
    fn region_area_fractions() {
        let grid = sweep(&pair_plan(6), &table()).unwrap();
        let all: Vec<u8> = (0..=5).collect();
        assert!((region_area(&grid, &all) - 1.0).abs() < 1e-15);
        assert_eq!(region_area(&grid, &[]), 0.0);
        let sum: f64 = (0..=5).map(|c| region_area(&grid, &[c])).sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cell_indexing_is_row_major() {
        let plan = SweepPlan {
            x: AxisSpec::new(Axis::B, 0.0, 1.0, 3).unwrap(),
            y: AxisSpec::new(Axis::C, 0.0, 1.0, 2).unwrap(),
            ..pair_plan(5)
        };
        let grid = sweep(&plan, &table()).unwrap();
        assert_eq!(grid.cells().len(), 6);
        assert_eq!(grid.cell(2, 1).code, grid.cells()[5].code);
    }
}
