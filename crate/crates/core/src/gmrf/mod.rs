//! Determinant-maximizing completion of graph-constrained correlation matrices.
//!
//! For a graph `G` and edge correlations `x_e ∈ (-1, 1)` the feasible set
//! consists of positive definite matrices with unit diagonal and entry `x_e`
//! on every edge. Its unique determinant maximizer `A` is the covariance of
//! the maximum-entropy Gaussian Markov random field on `G`; its inverse `B`
//! vanishes off the edge pattern. Two independent solvers are provided:
//!
//! * [`solve_recoupling`] repeatedly replaces the current matrix by the
//!   conditionally independent coupling of two principal submatrices, one
//!   non-edge at a time;
//! * [`solve_dual_ascent`] maximizes `ln det B(t)` over the edge-supported
//!   precision matrices by damped Newton steps.

mod classify;
mod dual;
mod kkt;
mod recoupling;

pub use classify::{classify_edges, m_threshold, EdgeClass, EdgeClassification};
pub use dual::solve_dual_ascent;
pub use kkt::{verify_kkt, KktReport};
pub use recoupling::{solve_recoupling, Recoupler};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::symmat::SymMatrix;

/// Default KKT tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default sweep cap for the recoupling iteration.
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;
/// Default Newton iteration cap for dual ascent.
pub const DEFAULT_MAX_ITERS: usize = 500;
/// Solvers refuse weights with `1 - |x|` below this.
pub const MIN_BOUNDARY_GAP: f64 = 1e-6;

/// A graph together with the prescribed edge correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    graph: Graph,
    /// aligned with `graph.edges()`
    weights: Vec<f64>,
    uniform: Option<f64>,
}

fn check_weight(x: f64) -> Result<()> {
    if x.is_finite() && x > -1.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("correlation {x} not in (-1, 1)")))
    }
}

impl CorrelationSpec {
    pub fn uniform(graph: Graph, x: f64) -> Result<Self> {
        check_weight(x)?;
        let weights = vec![x; graph.edge_count()];
        Ok(CorrelationSpec {
            graph,
            weights,
            uniform: Some(x),
        })
    }

    /// Per-edge correlations; the keys must be exactly the edges of `graph`.
    pub fn per_edge(graph: Graph, weights: impl IntoIterator<Item = (Edge, f64)>) -> Result<Self> {
        let mut aligned = vec![f64::NAN; graph.edge_count()];
        for ((u, v), x) in weights {
            check_weight(x)?;
            let idx = graph
                .edge_index(u, v)
                .ok_or_else(|| Error::Parameter(format!("({u}, {v}) is not an edge")))?;
            if !aligned[idx].is_nan() {
                return Err(Error::Parameter(format!("edge ({u}, {v}) given twice")));
            }
            aligned[idx] = x;
        }
        if let Some(i) = aligned.iter().position(|x| x.is_nan()) {
            return Err(Error::Parameter(format!(
                "missing weight for edge {:?}",
                graph.edges()[i]
            )));
        }
        Ok(CorrelationSpec {
            graph,
            weights: aligned,
            uniform: None,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The common correlation when the spec was built with [`Self::uniform`].
    pub fn uniform_x(&self) -> Option<f64> {
        self.uniform
    }

    pub fn weight_between(&self, u: usize, v: usize) -> Option<f64> {
        self.graph.edge_index(u, v).map(|i| self.weights[i])
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Same graph with every weight negated.
    pub fn negated(&self) -> CorrelationSpec {
        CorrelationSpec {
            graph: self.graph.clone(),
            weights: self.weights.iter().map(|x| -x).collect(),
            uniform: self.uniform.map(|x| -x),
        }
    }

    pub(crate) fn check_conditioning(&self) -> Result<()> {
        match self
            .weights
            .iter()
            .find(|x| 1.0 - x.abs() < MIN_BOUNDARY_GAP)
        {
            Some(x) => Err(Error::Refused(format!(
                "correlation {x} is within {MIN_BOUNDARY_GAP} of the boundary"
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Recoupling,
    DualAscent,
    ChordalExact,
    CliqueSum,
}

/// The maximizer `A`, its inverse `B` and derived quantities.
#[derive(Debug, Clone)]
pub struct GmrfSolution {
    pub spec: CorrelationSpec,
    /// Covariance: unit diagonal, exact edge entries.
    pub a: SymMatrix,
    /// Precision `A⁻¹`.
    pub b: SymMatrix,
    pub tau: f64,
    pub log_tau: f64,
    /// `-B[u][v]` per edge, aligned with `spec.graph().edges()`.
    pub y: Vec<f64>,
    pub iterations: usize,
    /// Largest KKT violation found by [`verify_kkt`].
    pub residual: f64,
    pub method: Method,
}

impl GmrfSolution {
    /// Assemble a solution from a candidate maximizer: the constrained
    /// entries are reset to their exact values and `B` is recomputed.
    pub(crate) fn from_covariance(
        spec: CorrelationSpec,
        mut a: SymMatrix,
        iterations: usize,
        method: Method,
    ) -> Result<Self> {
        for u in 0..a.dim() {
            a.set(u, u, 1.0);
        }
        for (&(u, v), &x) in spec.graph().edges().iter().zip(spec.weights()) {
            a.set(u, v, x);
        }
        let factor = a.cholesky()?;
        let log_tau = factor.logdet();
        let b = factor.inverse();
        let y = spec.graph().edges().iter().map(|&(u, v)| -b.get(u, v)).collect();
        let mut sol = GmrfSolution {
            spec,
            a,
            b,
            tau: log_tau.exp(),
            log_tau,
            y,
            iterations,
            residual: 0.0,
            method,
        };
        sol.residual = verify_kkt(&sol, &sol.spec, f64::INFINITY).max_residual();
        Ok(sol)
    }

    pub fn graph(&self) -> &Graph {
        self.spec.graph()
    }

    /// Covariance entry `z(u, v) = A[u][v]`.
    pub fn z(&self, u: usize, v: usize) -> f64 {
        self.a.get(u, v)
    }

    /// `y(u, v)` for an edge, `None` otherwise.
    pub fn y_between(&self, u: usize, v: usize) -> Option<f64> {
        self.graph().edge_index(u, v).map(|i| self.y[i])
    }

    /// `Y_u`: sum of `y` over the edges at `u`.
    pub fn vertex_load(&self, u: usize) -> f64 {
        self.graph()
            .neighbors(u)
            .iter()
            .map(|&v| self.y_between(u, v).unwrap())
            .sum()
    }

    pub fn y_sum(&self) -> f64 {
        self.y.iter().sum()
    }

    pub fn to_json(&self) -> SolutionJson {
        let g = self.graph();
        let triple = |&(u, v): &Edge, value: f64| (u, v, value);
        SolutionJson {
            n: g.vertex_count(),
            x: self.spec.uniform_x(),
            weights: match self.spec.uniform_x() {
                Some(_) => None,
                None => Some(
                    g.edges()
                        .iter()
                        .zip(self.spec.weights())
                        .map(|(e, &x)| triple(e, x))
                        .collect(),
                ),
            },
            tau: self.tau,
            log_tau: self.log_tau,
            y: g.edges().iter().zip(&self.y).map(|(e, &y)| triple(e, y)).collect(),
            z_nonedges: g
                .non_edges()
                .iter()
                .map(|e| triple(e, self.a.get(e.0, e.1)))
                .collect(),
            residual: self.residual,
            iterations: self.iterations,
            method: self.method,
        }
    }
}

/// Serialized form of a [`GmrfSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<Vec<(usize, usize, f64)>>,
    pub tau: f64,
    pub log_tau: f64,
    pub y: Vec<(usize, usize, f64)>,
    pub z_nonedges: Vec<(usize, usize, f64)>,
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
}

/// Solve with the default method (dual ascent) and tolerances.
pub fn solve(spec: &CorrelationSpec) -> Result<GmrfSolution> {
    solve_dual_ascent(spec, DEFAULT_TOL, DEFAULT_MAX_ITERS)
}

/// `ln τ(G, x)` for uniform `x`, solved by dual ascent.
pub fn log_tau(graph: &Graph, x: f64) -> Result<f64> {
    Ok(solve(&CorrelationSpec::uniform(graph.clone(), x)?)?.log_tau)
}

/// Closed forms for the complete graph `K_r` with uniform `x`.
pub mod complete {
    /// `τ(K_r, x) = (1-x)^{r-1} (1+(r-1)x)`.
    pub fn tau(r: usize, x: f64) -> f64 {
        log_tau(r, x).exp()
    }

    pub fn log_tau(r: usize, x: f64) -> f64 {
        if r <= 1 {
            return 0.0;
        }
        let k = (r - 1) as f64;
        k * (1.0 - x).ln() + (1.0 + k * x).ln()
    }

    /// `y` on every edge of `K_r`: `x / ((1-x)(1+(r-1)x))`.
    pub fn y(r: usize, x: f64) -> f64 {
        x / ((1.0 - x) * (1.0 + (r as f64 - 1.0) * x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};

    #[test]
    fn spec_validation() {
        let g = generate(&GraphFamily::Path(3), None).unwrap();
        assert!(CorrelationSpec::uniform(g.clone(), 1.0).is_err());
        assert!(CorrelationSpec::uniform(g.clone(), f64::NAN).is_err());
        assert!(CorrelationSpec::per_edge(g.clone(), [((0, 1), 0.2)]).is_err());
        assert!(CorrelationSpec::per_edge(g.clone(), [((0, 1), 0.2), ((0, 2), 0.1)]).is_err());
        let s = CorrelationSpec::per_edge(g, [((1, 2), -0.3), ((0, 1), 0.2)]).unwrap();
        assert_eq!(s.weights(), &[0.2, -0.3]);
        assert_eq!(s.uniform_x(), None);
    }

    #[test]
    fn complete_closed_forms() {
        assert!((complete::tau(2, 0.3) - 0.91).abs() < 1e-15);
        assert!((complete::tau(3, 0.5) - 0.5).abs() < 1e-15);
        assert!((complete::tau(4, 0.5) - 0.3125).abs() < 1e-15);
        assert!((complete::y(2, 0.5) - 2.0 / 3.0).abs() < 1e-15);
    }
}
