//! Graded one-dimensional meshes with composite quadrature weights.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Innermost radius kept on ball frames; the origin itself is singular for
/// the logarithmic weights.
pub const R_MIN: f64 = 1e-8;

/// Largest ratio between the widest and the narrowest cell of a graded grid.
pub const MAX_CELL_RATIO: f64 = 1e4;

/// Smallest node count accepted by [`make_grid`].
pub const MIN_NODES: usize = 16;

/// Coordinate frame of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Frame {
    /// `r = |x|` on the ball `(0, radius)`, sampled from `r_min`.
    RBall { r_min: f64, radius: f64 },
    /// `τ = 1/X_{k+1}(a, r)` on `(start, end)`; `start = a` when `k = 0`.
    TauHalfline { start: f64, end: f64 },
    /// `t = |x|^{-(n-2)}` on `(start, end)`.
    THalfline { start: f64, end: f64 },
    /// `ρ = |x|` on the exterior annulus `(1, end)`.
    RhoExterior { end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    RBall,
    TauHalfline,
    THalfline,
    RhoExterior,
}

impl std::fmt::Display for FrameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FrameKind::RBall => "r_ball",
            FrameKind::TauHalfline => "tau_halfline",
            FrameKind::THalfline => "t_halfline",
            FrameKind::RhoExterior => "rho_exterior",
        };
        f.write_str(s)
    }
}

impl Frame {
    pub fn unit_ball() -> Self {
        Frame::RBall { r_min: R_MIN, radius: 1.0 }
    }

    pub fn ball(radius: f64) -> Self {
        Frame::RBall { r_min: R_MIN * radius, radius }
    }

    pub fn kind(&self) -> FrameKind {
        match self {
            Frame::RBall { .. } => FrameKind::RBall,
            Frame::TauHalfline { .. } => FrameKind::TauHalfline,
            Frame::THalfline { .. } => FrameKind::THalfline,
            Frame::RhoExterior { .. } => FrameKind::RhoExterior,
        }
    }

    /// Sampled interval `[lo, hi]`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Frame::RBall { r_min, radius } => (r_min, radius),
            Frame::TauHalfline { start, end } | Frame::THalfline { start, end } => (start, end),
            Frame::RhoExterior { end } => (1.0, end),
        }
    }

    /// Radial frames measure `|x|` directly and carry the `r^{n-1}` Jacobian.
    pub fn is_radial(&self) -> bool {
        matches!(self, Frame::RBall { .. } | Frame::RhoExterior { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain(format!("invalid frame bounds [{lo}, {hi}] for {}", self.kind()));
        }
        let ok = match *self {
            Frame::RBall { r_min, .. } => r_min > 0.0,
            Frame::TauHalfline { start, .. } | Frame::THalfline { start, .. } => start > 0.0,
            Frame::RhoExterior { .. } => true,
        };
        if !ok {
            return domain(format!("frame {} must start at a positive coordinate", self.kind()));
        }
        Ok(())
    }
}

/// How the nodes were placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    /// Cell widths grow by `ratio` away from both endpoints, capped at
    /// [`MAX_CELL_RATIO`].
    Geometric { ratio: f64 },
    /// Constant ratio between consecutive nodes.
    Logarithmic,
    /// Image of another grid under a change of variables.
    Mapped,
}

/// Summary of a grid for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub nodes: usize,
    pub lower: f64,
    pub upper: f64,
    pub grading: Grading,
}

/// Strictly increasing nodes with positive quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    frame: Frame,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    grading: Grading,
}

impl RadialGrid {
    /// Build a grid from explicit nodes; the first and last node must be the
    /// frame bounds.
    pub fn from_nodes(frame: Frame, nodes: Vec<f64>, grading: Grading) -> Result<Self> {
        frame.validate()?;
        if nodes.len() < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes, got {}", nodes.len())));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Grid("non-finite node".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Grid("nodes must be strictly increasing".into()));
        }
        let (lo, hi) = frame.bounds();
        let tol = 1e-12 * hi.abs().max(1.0);
        if (nodes[0] - lo).abs() > tol * lo.abs().max(1.0) || (nodes[nodes.len() - 1] - hi).abs() > tol {
            return Err(Error::Grid(format!(
                "nodes span [{}, {}] but frame bounds are [{lo}, {hi}]",
                nodes[0],
                nodes[nodes.len() - 1]
            )));
        }
        let weights = composite_weights(&nodes);
        Ok(Self { frame, nodes, weights, grading })
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Sum of the weights; the length of the sampled interval.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta { nodes: self.len(), lower: self.first(), upper: self.last(), grading: self.grading }
    }

    /// `Σ w_i f(i, x_i)`.
    pub fn integrate_with(&self, mut f: impl FnMut(usize, f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(i, (x, w))| w * f(i, *x))
            .sum()
    }

    /// Same nodes with every coordinate multiplied by `factor`.
    pub fn rescaled(&self, factor: f64, frame: Frame) -> Result<Self> {
        let nodes = self.nodes.iter().map(|x| x * factor).collect();
        Self::from_nodes(frame, nodes, self.grading)
    }

    /// Five-point finite-difference derivative on the nonuniform mesh:
    /// centred stencils in the interior, shifted ones near the ends.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let x = &self.nodes;
        let n = x.len();
        let width = STENCIL.min(n);
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(width / 2).min(n - width);
                let idx = lo..lo + width;
                lagrange_slope(&x[idx.clone()], i - lo)
                    .iter()
                    .zip(&values[idx])
                    .map(|(w, v)| w * v)
                    .sum()
            })
            .collect()
    }
}

const STENCIL: usize = 5;

/// Weights `L_j'(x_i)` of the Lagrange basis on `x`, evaluated at node `i`.
fn lagrange_slope(x: &[f64], i: usize) -> [f64; STENCIL] {
    let mut w = [0.0; STENCIL];
    let xi = x[i];
    for j in 0..x.len() {
        if j == i {
            w[j] = (0..x.len()).filter(|&k| k != i).map(|k| 1.0 / (xi - x[k])).sum();
        } else {
            let mut num = 1.0;
            let mut den = x[j] - xi;
            for k in 0..x.len() {
                if k != i && k != j {
                    num *= xi - x[k];
                    den *= x[j] - x[k];
                }
            }
            w[j] = num / den;
        }
    }
    w
}

/// Composite Simpson weights on consecutive cell pairs. A pair whose width
/// ratio leaves `(1/2, 2)` falls back to the trapezoid rule, and so does a
/// leftover final cell, so every weight stays positive.
fn composite_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    let mut i = 0;
    while i + 2 < n {
        let h1 = x[i + 1] - x[i];
        let h2 = x[i + 2] - x[i + 1];
        let ratio = h2 / h1;
        if ratio > 0.5 && ratio < 2.0 {
            let s = h1 + h2;
            w[i] += s / 6.0 * (2.0 - ratio);
            w[i + 1] += s * s * s / (6.0 * h1 * h2);
            w[i + 2] += s / 6.0 * (2.0 - 1.0 / ratio);
        } else {
            w[i] += 0.5 * h1;
            w[i + 1] += 0.5 * (h1 + h2);
            w[i + 2] += 0.5 * h2;
        }
        i += 2;
    }
    if i + 1 < n {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Geometrically graded mesh on `frame`, clustered at both endpoints.
///
/// Cell `j` has width proportional to `ratio^{min(d_j, D)}`, where `d_j` is
/// its distance in cells from the nearer endpoint and `D` caps the growth at
/// [`MAX_CELL_RATIO`]. `ratio = 1` gives a uniform mesh.
pub fn make_grid(frame: Frame, count: usize, ratio: f64) -> Result<RadialGrid> {
    frame.validate()?;
    if count < MIN_NODES {
        return domain(format!("grid needs at least {MIN_NODES} nodes, got {count}"));
    }
    if !(1.0..=1.2).contains(&ratio) {
        return domain(format!("grading ratio must lie in [1, 1.2], got {ratio}"));
    }
    let cells = count - 1;
    let cap = if ratio > 1.0 { (MAX_CELL_RATIO.ln() / ratio.ln()).floor() as usize } else { 0 };
    let widths: Vec<f64> = (0..cells)
        .map(|j| {
            let d = j.min(cells - 1 - j).min(cap);
            ratio.powi(d as i32)
        })
        .collect();
    let (lo, hi) = frame.bounds();
    let scale = (hi - lo) / widths.iter().sum::<f64>();
    let mut nodes = Vec::with_capacity(count);
    let mut acc = lo;
    nodes.push(lo);
    for w in &widths[..cells - 1] {
        acc += w * scale;
        nodes.push(acc);
    }
    nodes.push(hi);
    RadialGrid::from_nodes(frame, nodes, Grading::Geometric { ratio })
}

/// Nodes in geometric progression from the lower to the upper bound.
pub fn log_grid(frame: Frame, count: usize) -> Result<RadialGrid> {
    frame.validate()?;
    if count < MIN_NODES {
        return domain(format!("grid needs at least {MIN_NODES} nodes, got {count}"));
    }
    let (lo, hi) = frame.bounds();
    let span = (hi / lo).ln();
    let mut nodes: Vec<f64> = (0..count)
        .map(|i| lo * (span * i as f64 / (count - 1) as f64).exp())
        .collect();
    nodes[0] = lo;
    nodes[count - 1] = hi;
    RadialGrid::from_nodes(frame, nodes, Grading::Logarithmic)
}
