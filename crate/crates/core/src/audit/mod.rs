//! Numerical audits of the inequalities satisfied by `τ(G, x)` and by the
//! maximizer `A_G(x)`, each producing a report with measured margins.
//!
//! Audits never fail on a violated inequality; they record it. Solver errors
//! and inputs outside an inequality's range are returned as errors.

mod battery;
mod bounds;
mod structure;

pub use battery::{run_battery, BatteryEntry, BatteryOptions};
pub use bounds::{
    alpha_integral, convexity_suite, deletion_contraction_audit, entropy_report, log_derivative_check,
    multiplicative_inequality_check, regular_comparison, sidorenko_check, tightness_bounds,
};
pub use structure::{first_interval_checks, precision_identities, structural_bounds, vertex_transitive_check};

use serde::Serialize;

use crate::graph::{Edge, Graph};

/// Default audit tolerance.
pub const AUDIT_TOL: f64 = 1e-8;
/// Central-difference step for derivative checks.
pub const FD_STEP: f64 = 1e-4;
/// Accepted residual of derivative identities at [`FD_STEP`].
pub const DERIVATIVE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≥ rhs`
    Ge,
    /// `lhs ≤ rhs`
    Le,
    /// `|lhs − rhs| ≤ tol`
    Eq,
}

/// One inequality instance. `margin ≥ −tol` means the check passed; the
/// margin is oriented so that positive values are slack.
#[derive(Debug, Clone, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub claim: String,
    pub n: usize,
    pub edges: Vec<Edge>,
    pub x: Vec<f64>,
    pub tol: f64,
    pub checks: Vec<AuditCheck>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl AuditReport {
    pub fn new(claim: &str, g: &Graph, x: &[f64], tol: f64) -> Self {
        AuditReport {
            claim: claim.to_string(),
            n: g.vertex_count(),
            edges: g.edges().to_vec(),
            x: x.to_vec(),
            tol,
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    fn push(&mut self, name: &str, relation: Relation, lhs: f64, rhs: f64, tol: f64, at: Option<String>) {
        let margin = match relation {
            Relation::Ge => lhs - rhs,
            Relation::Le => rhs - lhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        // NaN margins fail
        let pass = margin >= -tol;
        self.pass &= pass;
        self.checks.push(AuditCheck {
            name: name.to_string(),
            relation,
            lhs,
            rhs,
            margin,
            tol,
            pass,
            at,
        });
    }

    pub fn ge(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.push(name, Relation::Ge, lhs, rhs, self.tol, None);
    }

    pub fn le(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.push(name, Relation::Le, lhs, rhs, self.tol, None);
    }

    pub fn close(&mut self, name: &str, lhs: f64, rhs: f64, tol: f64) {
        self.push(name, Relation::Eq, lhs, rhs, tol, None);
    }

    /// Record only the tightest of a family of instances of one inequality.
    pub fn worst(&mut self, name: &str, relation: Relation, instances: impl IntoIterator<Item = (String, f64, f64)>) {
        let orient = |lhs: f64, rhs: f64| match relation {
            Relation::Ge => lhs - rhs,
            Relation::Le => rhs - lhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        let worst = instances.into_iter().min_by(|a, b| {
            orient(a.1, a.2)
                .partial_cmp(&orient(b.1, b.2))
                .unwrap_or(std::cmp::Ordering::Less)
        });
        match worst {
            Some((at, lhs, rhs)) => self.push(name, relation, lhs, rhs, self.tol, Some(at)),
            None => self.note(&format!("{name}: no instances")),
        }
    }

    /// Append the checks of `other`, tagging untagged ones with `at`.
    pub fn absorb(&mut self, other: AuditReport, at: &str) {
        for mut c in other.checks {
            c.at.get_or_insert_with(|| at.to_string());
            self.pass &= c.pass;
            self.checks.push(c);
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("{at}: {n}")));
    }

    pub fn note(&mut self, text: &str) {
        self.notes.push(text.to_string());
    }

    /// Smallest margin over all checks (`+∞` when there are none).
    pub fn margin(&self) -> f64 {
        self.checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_are_oriented() {
        let g = Graph::empty(1);
        let mut r = AuditReport::new("test", &g, &[], 1e-8);
        r.ge("a", 2.0, 1.0);
        r.le("b", 2.0, 1.0);
        assert_eq!(r.checks[0].margin, 1.0);
        assert_eq!(r.checks[1].margin, -1.0);
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn nan_fails() {
        let mut r = AuditReport::new("test", &Graph::empty(1), &[], 1e-8);
        r.ge("nan", f64::NAN, 0.0);
        assert!(!r.pass);
    }

    #[test]
    fn worst_instance_kept() {
        let mut r = AuditReport::new("test", &Graph::empty(1), &[], 1e-8);
        r.worst(
            "w",
            Relation::Ge,
            [("u0".to_string(), 3.0, 1.0), ("u1".to_string(), 1.5, 1.0)],
        );
        assert_eq!(r.checks[0].at.as_deref(), Some("u1"));
    }
}
