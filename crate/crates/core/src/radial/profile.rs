use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Frame, Grading, RadialGrid};
use crate::error::{Error, Result};

/// Relative size below which a sampled endpoint counts as zero.
pub const DIRICHLET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    DirichletZero,
    Free,
}

/// Samples of a radial function on a grid, with an endpoint tag at each end.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    lower: Boundary,
    upper: Boundary,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    coordinate: f64,
    value: f64,
}

/// Conventional endpoint tags: the ball vanishes on `r = 1`, the half-lines
/// and the exterior on their inner end.
pub fn default_boundary(frame: &Frame) -> (Boundary, Boundary) {
    match frame {
        Frame::RBall { .. } => (Boundary::Free, Boundary::DirichletZero),
        _ => (Boundary::DirichletZero, Boundary::Free),
    }
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, lower: Boundary, upper: Boundary) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "profile value {} at coordinate {} is not finite",
                values[i],
                grid.nodes()[i]
            )));
        }
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let check = |tag: Boundary, v: f64, x: f64| {
            if tag == Boundary::DirichletZero && v.abs() > DIRICHLET_TOL * scale {
                Err(Error::Domain(format!(
                    "endpoint {x} is tagged dirichlet_zero but the profile is {v} there"
                )))
            } else {
                Ok(())
            }
        };
        check(lower, values[0], grid.first())?;
        check(upper, values[values.len() - 1], grid.last())?;
        Ok(Self { grid, values, lower, upper })
    }

    /// Profile with the frame's conventional endpoint tags.
    pub fn with_default_boundary(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        let (lo, hi) = default_boundary(&grid.frame());
        Self::new(grid, values, lo, hi)
    }

    /// Sample `f` at every node, with the conventional tags.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::with_default_boundary(grid, values)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<RadialGrid> {
        Arc::clone(&self.grid)
    }

    pub fn frame(&self) -> Frame {
        self.grid.frame()
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower(&self) -> Boundary {
        self.lower
    }

    pub fn upper(&self) -> Boundary {
        self.upper
    }

    pub fn last_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn derivative(&self) -> Vec<f64> {
        self.grid.derivative(&self.values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// `c · self` on the same grid.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| c * v).collect();
        Self::new(Arc::clone(&self.grid), values, self.lower, self.upper)
    }

    /// Same samples on another grid with the same node count.
    pub fn with_grid(&self, grid: Arc<RadialGrid>) -> Result<Self> {
        Self::new(grid, self.values.clone(), self.lower, self.upper)
    }

    /// Write `coordinate,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (&coordinate, &value) in self.nodes().iter().zip(&self.values) {
            out.serialize(CsvRow { coordinate, value })?;
        }
        out.flush()?;
        Ok(())
    }

    /// Read `coordinate,value` rows. The first and last coordinates must
    /// match the frame bounds.
    pub fn read_csv<R: Read>(r: R, frame: Frame, lower: Boundary, upper: Boundary) -> Result<Self> {
        let mut input = csv::Reader::from_reader(r);
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for row in input.deserialize() {
            let row: CsvRow = row?;
            nodes.push(row.coordinate);
            values.push(row.value);
        }
        let grid = RadialGrid::from_nodes(frame, nodes, Grading::Mapped)?;
        Self::new(Arc::new(grid), values, lower, upper)
    }
}
