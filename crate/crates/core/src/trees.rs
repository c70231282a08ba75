//! Spanning-tree counts by the Matrix-Tree theorem and the certificate chain
//! behind the upper bound for regular graphs.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::gmrf::{solve, CorrelationSpec};
use crate::graph::Graph;
use crate::symmat::SymMatrix;

/// Largest vertex count for exact counting.
pub const EXACT_LIMIT: usize = 64;

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1;
    let mut previous = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let value = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &previous;
                m[i][j] = value;
            }
        }
        previous = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

fn reduced_laplacian(g: &Graph) -> Vec<Vec<BigInt>> {
    let n = g.vertex_count();
    (1..n)
        .map(|i| {
            (1..n)
                .map(|j| {
                    BigInt::from(if i == j {
                        g.degree(i) as i64
                    } else if g.has_edge(i, j) {
                        -1
                    } else {
                        0
                    })
                })
                .collect()
        })
        .collect()
}

/// Exact number of spanning trees; zero for disconnected graphs.
pub fn count_spanning_trees(g: &Graph) -> Result<BigUint> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::Parameter("graph has no vertices".into()));
    }
    if n > EXACT_LIMIT {
        return Err(Error::Refused(format!(
            "exact counting limited to {EXACT_LIMIT} vertices; use log_spanning_tree_count"
        )));
    }
    let det = bareiss_determinant(reduced_laplacian(g));
    match det.sign() {
        Sign::Minus => Err(Error::Integrity("negative Laplacian minor".into())),
        _ => Ok(det.magnitude().clone()),
    }
}

/// Natural log of the spanning-tree count in floating point; `-∞` when
/// disconnected.
pub fn log_spanning_tree_count(g: &Graph) -> f64 {
    let n = g.vertex_count();
    if n <= 1 {
        return 0.0;
    }
    if !g.is_connected() {
        return f64::NEG_INFINITY;
    }
    let minor = SymMatrix::from_fn(n - 1, |i, j| {
        let (i, j) = (i + 1, j + 1);
        if i == j {
            g.degree(i) as f64
        } else if g.has_edge(i, j) {
            -1.0
        } else {
            0.0
        }
    });
    minor.logdet().unwrap_or(f64::NEG_INFINITY)
}

/// `ln` of the upper bound `e(d−1)/(d(d−2)) · ((d−1)^{d−1}/(d²−2d)^{d/2−1})^n`.
pub fn log_mckay_bound(n: usize, d: usize) -> f64 {
    let d = d as f64;
    let lead = 1.0 + (d - 1.0).ln() - (d * (d - 2.0)).ln();
    lead + n as f64 * ((d - 1.0) * (d - 1.0).ln() - (d / 2.0 - 1.0) * (d * d - 2.0 * d).ln())
}

fn as_decimal<S: Serializer>(value: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_str_radix(10))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpanningTreeReport {
    pub n: usize,
    pub d: usize,
    #[serde(serialize_with = "as_decimal")]
    pub count: BigUint,
    pub log_count: f64,
    pub log_bound: f64,
    pub bound: f64,
    /// count / bound
    pub ratio: f64,
    pub certificate: AuditReport,
}

fn biguint_ln(v: &BigUint) -> f64 {
    match v.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            let bits = v.bits();
            let shift = bits.saturating_sub(60);
            (v >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// Certificate chain for the spanning-tree bound of a connected `d`-regular
/// graph, `d ≥ 3`, at `x = 1/(d−1)` and `t = (n−1)/(nd(1−x))`:
/// `B = I/n + tL` is positive definite and of the dual form, `det B ≥ t^{n−1}
/// count`, `det B ≤ 1/τ(G, x)`, and finally `count ≤` the closed-form bound.
pub fn mckay_audit(g: &Graph, d: usize, tol: f64) -> Result<SpanningTreeReport> {
    if d < 3 || g.regular_degree() != Some(d) || !g.is_connected() {
        return Err(Error::NotApplicable(format!("need a connected {d}-regular graph with d >= 3")));
    }
    let n = g.vertex_count();
    let nf = n as f64;
    let x = 1.0 / (d as f64 - 1.0);
    let t = (nf - 1.0) / (nf * d as f64 * (1.0 - x));
    let mut r = AuditReport::new("spanning_tree_bound", g, &[x, t], tol);

    let b = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            1.0 / nf + t * d as f64
        } else if g.has_edge(i, j) {
            -t
        } else {
            0.0
        }
    });
    let mut member = SymMatrix::identity(n);
    for &(u, v) in g.edges() {
        member.set(u, u, member.get(u, u) + t * x);
        member.set(v, v, member.get(v, v) + t * x);
        member.set(u, v, -t);
    }
    r.close("B = I + sum t E_e(x)", b.max_abs_diff(&member), 0.0, tol);
    let factor = b.cholesky()?;
    r.ge(
        "B positive definite (min pivot)",
        factor.pivots().into_iter().fold(f64::INFINITY, f64::min),
        0.0,
    );

    let (count, log_count) = if n <= EXACT_LIMIT {
        let c = count_spanning_trees(g)?;
        let l = biguint_ln(&c);
        (c, l)
    } else {
        let l = log_spanning_tree_count(g);
        r.note("count evaluated in floating point");
        (BigUint::zero(), l)
    };
    let ln_det_b = factor.logdet();
    r.ge("ln det B >= (n-1) ln t + ln count", ln_det_b, (nf - 1.0) * t.ln() + log_count);
    let tau = solve(&CorrelationSpec::uniform(g.clone(), x)?)?;
    r.le("ln det B <= -ln tau(G, x)", ln_det_b, -tau.log_tau);
    let log_bound = log_mckay_bound(n, d);
    r.le("ln count <= ln bound", log_count, log_bound);

    Ok(SpanningTreeReport {
        n,
        d,
        count,
        log_count,
        log_bound,
        bound: log_bound.exp(),
        ratio: (log_count - log_bound).exp(),
        certificate: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::AUDIT_TOL;
    use crate::graph::{generate, GraphFamily};

    fn family(f: GraphFamily) -> Graph {
        generate(&f, None).unwrap()
    }

    /// Edge subsets of size n−1 that connect the graph.
    fn brute_force(g: &Graph) -> u64 {
        let n = g.vertex_count();
        let m = g.edge_count();
        let mut count = 0;
        for mask in 0u64..(1 << m) {
            if mask.count_ones() as usize != n - 1 {
                continue;
            }
            let edges = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| g.edges()[i]);
            if Graph::new(n, edges).unwrap().is_connected() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn cayley_and_brute_force() {
        for n in 2..=6 {
            let k = family(GraphFamily::Complete(n));
            assert_eq!(count_spanning_trees(&k).unwrap(), BigUint::from((n as u64).pow(n as u32 - 2)));
        }
        for seed in 0..5 {
            let g = generate(&GraphFamily::ErdosRenyi(7, 0.5), Some(seed)).unwrap();
            if g.edge_count() <= 16 {
                assert_eq!(count_spanning_trees(&g).unwrap(), BigUint::from(brute_force(&g)));
            }
        }
    }

    #[test]
    fn trees_and_disconnected() {
        let t = generate(&GraphFamily::RandomTree(10), Some(1)).unwrap();
        assert_eq!(count_spanning_trees(&t).unwrap(), BigUint::from(1u32));
        assert!(count_spanning_trees(&Graph::empty(3)).unwrap().is_zero());
        assert_eq!(log_spanning_tree_count(&Graph::empty(3)), f64::NEG_INFINITY);
    }

    #[test]
    fn float_count_agrees() {
        let g = family(GraphFamily::MobiusLadder);
        let exact = biguint_ln(&count_spanning_trees(&g).unwrap());
        assert!((exact - log_spanning_tree_count(&g)).abs() < 1e-10);
    }

    #[test]
    fn complete_four_report() {
        let r = mckay_audit(&family(GraphFamily::Complete(4)), 3, AUDIT_TOL).unwrap();
        assert_eq!(r.count, BigUint::from(16u32));
        let bound = 512.0 * std::f64::consts::E / 27.0;
        assert!((r.bound - bound).abs() < 1e-10);
        assert!((r.ratio - 16.0 / bound).abs() < 1e-12);
        assert!(r.certificate.pass, "{:?}", r.certificate);
    }

    #[test]
    fn large_counts_do_not_overflow() {
        let k = family(GraphFamily::Complete(30));
        let c = count_spanning_trees(&k).unwrap();
        assert_eq!(c, BigUint::from(30u32).pow(28));
        assert!((biguint_ln(&c) - 28.0 * 30f64.ln()).abs() < 1e-10);
    }
}
