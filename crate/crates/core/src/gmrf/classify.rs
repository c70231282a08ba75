use serde::Serialize;

use super::{solve, CorrelationSpec, GmrfSolution};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeClass {
    /// `0 ≤ y ≤ x/(1−x²)`
    I,
    /// `y < 0`
    II,
    /// `y > x/(1−x²)`
    III,
    /// within the resolution band of a class boundary
    Boundary,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeClassification {
    pub edges: Vec<Edge>,
    pub labels: Vec<EdgeClass>,
    /// distance of `y_e` to the nearer of `0` and `x/(1−x²)`
    pub margins: Vec<f64>,
    pub band: f64,
}

impl EdgeClassification {
    pub fn count(&self, class: EdgeClass) -> usize {
        self.labels.iter().filter(|&&c| c == class).count()
    }

    pub fn label_of(&self, u: usize, v: usize) -> Option<EdgeClass> {
        let e = crate::graph::edge(u, v);
        self.edges.iter().position(|&f| f == e).map(|i| self.labels[i])
    }
}

/// Label every edge of a uniform-`x` solution.
///
/// Labels within `√tol · max(1, x/(1−x²))` of a boundary are reported as
/// [`EdgeClass::Boundary`].
pub fn classify_edges(sol: &GmrfSolution, tol: f64) -> Result<EdgeClassification> {
    let x = sol
        .spec
        .uniform_x()
        .ok_or_else(|| Error::Parameter("edge classes need a uniform-x solution".into()))?;
    let upper = x / (1.0 - x * x);
    let band = tol.sqrt() * upper.abs().max(1.0);
    let mut labels = Vec::with_capacity(sol.y.len());
    let mut margins = Vec::with_capacity(sol.y.len());
    for &y in &sol.y {
        let margin = y.abs().min((y - upper).abs());
        margins.push(margin);
        labels.push(if margin < band {
            EdgeClass::Boundary
        } else if y < 0.0 {
            EdgeClass::II
        } else if y > upper {
            EdgeClass::III
        } else {
            EdgeClass::I
        });
    }
    Ok(EdgeClassification {
        edges: sol.graph().edges().to_vec(),
        labels,
        margins,
        band,
    })
}

const GRID: usize = 100;

fn min_y(g: &Graph, x: f64) -> Result<f64> {
    let sol: GmrfSolution = solve(&CorrelationSpec::uniform(g.clone(), x)?)?;
    Ok(sol.y.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Threshold below which `B_G(x)` is an M-matrix: the first `x` on the grid
/// `k/100` where some `y_e` turns negative, refined by bisection, minus
/// `tol`. Returns 1 when no sign change is seen on the grid.
pub fn m_threshold(g: &Graph, tol: f64) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::Parameter("graph has no edges".into()));
    }
    let mut lo = 0.0;
    for k in 1..GRID {
        let x = k as f64 / GRID as f64;
        if min_y(g, x)? < 0.0 {
            let mut hi = x;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if min_y(g, mid)? < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi) - tol);
        }
        lo = x;
    }
    Ok(1.0)
}
