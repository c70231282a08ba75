//! Recoupling iteration: starting from the constant-correlation matrix, each
//! step picks a non-edge `(v, w)` and replaces the current matrix by the
//! coupling of its principal submatrices on `V∖{v}` and `V∖{w}`. Every step
//! leaves all other entries in place and does not decrease the determinant.

use super::{CorrelationSpec, GmrfSolution, Method};
use crate::coupling::{couple, CouplingLayout};
use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::symmat::SymMatrix;

/// Stateful recoupling iteration over a fixed lexicographic non-edge order.
#[derive(Debug, Clone)]
pub struct Recoupler {
    matrix: SymMatrix,
    non_edges: Vec<Edge>,
    log_det: f64,
    steps: usize,
}

impl Recoupler {
    /// Initial matrix: unit diagonal and `x` everywhere else for uniform
    /// specs; edge weights and zeros on non-edges otherwise.
    pub fn new(spec: &CorrelationSpec) -> Result<Self> {
        spec.check_conditioning()?;
        let g = spec.graph();
        let n = g.vertex_count();
        let fill = spec.uniform_x().unwrap_or(0.0);
        let matrix = SymMatrix::from_fn(n.max(1), |i, j| {
            if i == j {
                1.0
            } else {
                spec.weight_between(i, j).unwrap_or(fill)
            }
        });
        let log_det = matrix.logdet()?;
        Ok(Recoupler {
            matrix,
            non_edges: g.non_edges(),
            log_det,
            steps: 0,
        })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Recouple across one non-edge and return the new log-determinant.
    pub fn step(&mut self, (v, w): Edge) -> Result<f64> {
        let n = self.matrix.dim();
        let without_v: Vec<usize> = (0..n).filter(|&i| i != v).collect();
        let without_w: Vec<usize> = (0..n).filter(|&i| i != w).collect();
        let layout = CouplingLayout::new(without_v.clone(), without_w.clone())?;
        let coupled = couple(
            &self.matrix.principal(&without_v),
            &self.matrix.principal(&without_w),
            &layout,
        )?;
        // only the (v, w) entry changes; the rest would just pick up roundoff
        self.matrix.set(v, w, coupled.matrix.get(v, w));
        self.log_det = coupled.log_det;
        self.steps += 1;
        Ok(self.log_det)
    }

    /// One pass over all non-edges; returns the log-determinant after each step.
    pub fn sweep(&mut self) -> Result<Vec<f64>> {
        let order = self.non_edges.clone();
        order.into_iter().map(|e| self.step(e)).collect()
    }

    /// max |(M⁻¹)[v][w]| over non-edges.
    pub fn residual(&self) -> Result<f64> {
        let inv = self.matrix.inverse()?;
        Ok(self
            .non_edges
            .iter()
            .map(|&(v, w)| inv.get(v, w).abs())
            .fold(0.0, f64::max))
    }
}

pub fn solve_recoupling(spec: &CorrelationSpec, tol: f64, max_sweeps: usize) -> Result<GmrfSolution> {
    let mut state = Recoupler::new(spec)?;
    let mut sweeps = 0;
    let mut residual = state.residual()?;
    while residual >= tol {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual,
            });
        }
        state.sweep()?;
        sweeps += 1;
        residual = state.residual()?;
    }
    GmrfSolution::from_covariance(spec.clone(), state.matrix, sweeps, Method::Recoupling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};

    fn spec(family: GraphFamily, x: f64) -> CorrelationSpec {
        CorrelationSpec::uniform(generate(&family, None).unwrap(), x).unwrap()
    }

    #[test]
    fn zero_needs_no_sweeps() {
        let sol = solve_recoupling(&spec(GraphFamily::Cycle(6), 0.0), 1e-10, 10).unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.tau, 1.0);
    }

    #[test]
    fn complete_graph_returns_initial_matrix() {
        let sol = solve_recoupling(&spec(GraphFamily::Complete(4), 0.5), 1e-10, 10).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!((sol.tau - 0.3125).abs() < 1e-14);
    }

    #[test]
    fn path_of_three() {
        let sol = solve_recoupling(&spec(GraphFamily::Path(3), 0.5), 1e-12, 100).unwrap();
        assert!((sol.tau - 0.5625).abs() < 1e-12);
        assert!((sol.z(0, 2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn infeasible_start_is_refused() {
        let s = spec(GraphFamily::Cycle(5), -0.3);
        assert!(matches!(Recoupler::new(&s), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn sweep_cap_reports_residual() {
        let err = solve_recoupling(&spec(GraphFamily::Cycle(6), 0.8), 1e-14, 1).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 1, .. }));
    }
}
