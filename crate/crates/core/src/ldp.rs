//! Gram matrices of independent uniform vectors on the sphere `S_{n−1}`: the
//! exact density of the Gram matrix, elliptope volumes, Monte-Carlo estimates
//! of edge-interval regions and their large-deviation rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gmrf;
use crate::graph::Graph;
use crate::symmat::SymMatrix;

/// Samples drawn per RNG stream; streams are indexed by chunk so estimates
/// depend on the seed only, not on the thread count.
pub const CHUNK: u64 = 1 << 16;
/// Fewer hits than this flags an estimate as unreliable.
pub const MIN_HITS: u64 = 50;
/// Grid size of the uniform-profile search for `sup det`.
pub const RATE_GRID: usize = 64;

/// Scalar products of `k` independent uniform unit vectors in `R^n`.
#[derive(Debug, Clone)]
pub struct GramSample {
    pub n: usize,
    pub matrix: SymMatrix,
}

impl GramSample {
    pub fn k(&self) -> usize {
        self.matrix.dim()
    }
}

fn check_dims(k: usize, n: usize) -> Result<()> {
    if k < 2 || n < k {
        return Err(Error::Parameter(format!("need n >= k >= 2, got k = {k}, n = {n}")));
    }
    Ok(())
}

fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Gram matrix of `k` normalized standard Gaussian vectors in `R^n`.
pub fn sample_gram<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<GramSample> {
    check_dims(k, n)?;
    let vs: Vec<Vec<f64>> = (0..k).map(|_| unit_vector(n, rng)).collect();
    let matrix = SymMatrix::from_fn(k, |i, j| {
        if i == j {
            1.0
        } else {
            vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum()
        }
    });
    Ok(GramSample { n, matrix })
}

/// Same distribution as [`sample_gram`] in `O(k²)` draws: the Gram matrix of
/// `k` Gaussian vectors is Wishart, generated from its Bartlett factor `L`
/// (`L_ii² ~ χ²(n−i)`, `L_ij ~ N(0,1)` below the diagonal) and then scaled to
/// unit diagonal.
pub fn sample_gram_bartlett<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<GramSample> {
    check_dims(k, n)?;
    let mut l = vec![vec![0.0; k]; k];
    for (i, row) in l.iter_mut().enumerate() {
        let chi = ChiSquared::new((n - i) as f64).map_err(|e| Error::Parameter(e.to_string()))?;
        row[i] = chi.sample(rng).sqrt();
        for entry in row.iter_mut().take(i) {
            *entry = rng.sample(StandardNormal);
        }
    }
    let w = |i: usize, j: usize| -> f64 { (0..=i.min(j)).map(|p| l[i][p] * l[j][p]).sum() };
    let diag: Vec<f64> = (0..k).map(|i| w(i, i).sqrt()).collect();
    let matrix = SymMatrix::from_fn(k, |i, j| if i == j { 1.0 } else { w(i, j) / (diag[i] * diag[j]) });
    Ok(GramSample { n, matrix })
}

/// `ln Γ_k(a) = k(k−1)/4 ln π + Σ_{j=1..k} ln Γ(a + (1−j)/2)`.
pub fn mv_gamma_log(k: usize, a: f64) -> Result<f64> {
    if k == 0 || a <= (k as f64 - 1.0) / 2.0 {
        return Err(Error::Parameter(format!("need a > (k-1)/2, got k = {k}, a = {a}")));
    }
    let kf = k as f64;
    Ok(kf * (kf - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + (1..=k).map(|j| ln_gamma(a + (1.0 - j as f64) / 2.0)).sum::<f64>())
}

/// `ln(Γ(n/2)^k / Γ_k(n/2))`, the log normalizing constant of the density.
pub fn log_normalizer(k: usize, n: usize) -> Result<f64> {
    check_dims(k, n)?;
    let a = n as f64 / 2.0;
    Ok(k as f64 * ln_gamma(a) - mv_gamma_log(k, a)?)
}

fn is_correlation_matrix(m: &SymMatrix) -> bool {
    (0..m.dim()).all(|i| (m.get(i, i) - 1.0).abs() < 1e-12)
}

/// Density of the Gram matrix with respect to Lebesgue measure on its
/// off-diagonal entries: `det(M)^{(n−k−1)/2} Γ(n/2)^k / Γ_k(n/2)` on the
/// elliptope, zero outside.
pub fn density_f(k: usize, n: usize, m: &SymMatrix) -> Result<f64> {
    if m.dim() != k {
        return Err(Error::Parameter(format!("matrix is {}x{}, expected k = {k}", m.dim(), m.dim())));
    }
    let log_c = log_normalizer(k, n)?;
    if !is_correlation_matrix(m) {
        return Ok(0.0);
    }
    let power = (n as f64 - k as f64 - 1.0) / 2.0;
    // zero on the singular boundary and outside the elliptope
    Ok(m.logdet().map_or(0.0, |ld| (power * ld + log_c).exp()))
}

/// Volume of the elliptope of `k × k` correlation matrices,
/// `Γ((k+1)/2)^{−k} Γ_k((k+1)/2)`.
pub fn elliptope_volume(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Parameter("elliptope needs k >= 2".into()));
    }
    Ok((-log_normalizer(k, k + 1)?).exp())
}

/// A Monte-Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub samples: u64,
    pub hits: u64,
    pub value: f64,
    pub std_err: f64,
}

impl McEstimate {
    /// `scale · hits/samples`.
    pub fn from_hits(samples: u64, hits: u64, scale: f64) -> Self {
        let p = hits as f64 / samples as f64;
        McEstimate {
            samples,
            hits,
            value: scale * p,
            std_err: scale * (p * (1.0 - p) / samples as f64).sqrt(),
        }
    }

    pub fn low_hits(&self) -> bool {
        self.hits < MIN_HITS
    }
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(pool.install(f))
}

/// Parallel fold over `samples` draws. Chunk `c` uses stream `(tag << 32) + c`
/// of the generator seeded by `seed`; `jobs = 0` uses the global pool.
pub fn parallel_fold<T, I, S, M>(samples: u64, seed: u64, tag: u64, jobs: usize, init: I, step: S, merge: M) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    S: Fn(&mut T, &mut ChaCha8Rng) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    with_jobs(jobs, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((tag << 32).wrapping_add(c));
                let mut acc = init();
                let len = CHUNK.min(samples - c * CHUNK);
                for _ in 0..len {
                    step(&mut acc, &mut rng);
                }
                acc
            })
            .reduce(&init, &merge)
    })
}

fn count_hits<F>(samples: u64, seed: u64, tag: u64, jobs: usize, hit: F) -> Result<u64>
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync + Send,
{
    parallel_fold(
        samples,
        seed,
        tag,
        jobs,
        || 0u64,
        |acc, rng| *acc += hit(rng) as u64,
        |a, b| a + b,
    )
}

/// Rejection estimate of the elliptope volume: uniform points of
/// `[−1,1]^{k(k−1)/2}` accepted when the unit-diagonal matrix is PSD.
pub fn mc_elliptope_volume(k: usize, samples: u64, seed: u64, jobs: usize) -> Result<McEstimate> {
    if !(2..=6).contains(&k) || samples == 0 {
        return Err(Error::Parameter(format!("need 2 <= k <= 6 and samples > 0, got k = {k}")));
    }
    let hits = count_hits(samples, seed, k as u64, jobs, |rng| {
        let m = SymMatrix::from_fn(k, |i, j| if i == j { 1.0 } else { rng.gen_range(-1.0..=1.0) });
        m.is_positive_definite()
    })?;
    let cube = 2f64.powi((k * (k - 1) / 2) as i32);
    Ok(McEstimate::from_hits(samples, hits, cube))
}

/// Histogram of the off-diagonal entry of 2×2 Gram samples over `bins`
/// equal bins of `[−1, 1]`.
pub fn gram_histogram(n: usize, bins: usize, samples: u64, seed: u64, jobs: usize) -> Result<Vec<u64>> {
    check_dims(2, n)?;
    if bins == 0 {
        return Err(Error::Parameter("need at least one bin".into()));
    }
    parallel_fold(
        samples,
        seed,
        n as u64,
        jobs,
        || vec![0u64; bins],
        |acc, rng| {
            let g = sample_gram(2, n, rng).expect("dimensions checked");
            let t = g.matrix.get(0, 1);
            let b = (((t + 1.0) / 2.0) * bins as f64).floor() as usize;
            acc[b.min(bins - 1)] += 1;
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    )
}

/// Correlation matrices whose entries on the edges of `graph` lie in
/// `[lo, hi]`; the matrix size is the vertex count.
#[derive(Debug, Clone)]
pub struct EdgeIntervalRegion {
    pub graph: Graph,
    pub lo: f64,
    pub hi: f64,
}

impl EdgeIntervalRegion {
    pub fn new(graph: Graph, lo: f64, hi: f64) -> Result<Self> {
        if !(-1.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::Parameter(format!("[{lo}, {hi}] is not a subinterval of [-1, 1]")));
        }
        if graph.vertex_count() < 2 {
            return Err(Error::Parameter("region needs at least two vertices".into()));
        }
        Ok(EdgeIntervalRegion { graph, lo, hi })
    }

    pub fn k(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn contains(&self, m: &SymMatrix) -> bool {
        self.graph.edges().iter().all(|&(u, v)| {
            let t = m.get(u, v);
            self.lo <= t && t <= self.hi
        })
    }

    /// Whether the uniform-x profile is known to attain `sup det` over the
    /// region: forests, cycles, complete and complete bipartite graphs.
    pub fn uniform_profile_exact(&self) -> bool {
        let g = &self.graph;
        let n = g.vertex_count();
        let m = g.edge_count();
        let forest = m + g.components().len() == n;
        let cycle = g.is_connected() && g.regular_degree() == Some(2);
        let complete_bipartite = g.is_connected()
            && g.bipartition().is_some_and(|side| {
                let a = side.iter().filter(|&&s| s).count();
                a * (n - a) == m
            });
        forest || cycle || g.is_complete() || complete_bipartite
    }

    /// `ln max_{x ∈ [lo, hi]} τ(G, x)` by a grid followed by golden-section
    /// refinement; returns the maximizer too.
    pub fn log_sup_det(&self) -> Result<(f64, f64)> {
        let lo = self.lo.max(-1.0 + 1e-9);
        let hi = self.hi.min(1.0 - 1e-9);
        if lo > hi {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        let f = |x: f64| gmrf::log_tau(&self.graph, x).unwrap_or(f64::NEG_INFINITY);
        if lo <= 0.0 && 0.0 <= hi {
            return Ok((0.0, 0.0));
        }
        let points: Vec<f64> = (0..=RATE_GRID)
            .map(|i| lo + (hi - lo) * i as f64 / RATE_GRID as f64)
            .collect();
        let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
        let best = (0..points.len())
            .max_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("grid is nonempty");
        if values[best] == f64::NEG_INFINITY {
            return Ok((points[best], f64::NEG_INFINITY));
        }
        let mut a = points[best.saturating_sub(1)];
        let mut b = points[(best + 1).min(points.len() - 1)];
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > 1e-10 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = f(d);
            }
        }
        let mut top = (points[best], values[best]);
        for x in [a, b, (a + b) / 2.0] {
            let v = f(x);
            if v > top.1 {
                top = (x, v);
            }
        }
        Ok(top)
    }
}

/// One row of [`ldp_estimate`].
#[derive(Debug, Clone, Serialize)]
pub struct LdpEstimate {
    pub k: usize,
    pub n: usize,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub se: f64,
    /// `(1/n) ln p̂`; absent without hits
    pub emp_rate: Option<f64>,
    /// standard error of `emp_rate` by the delta method
    pub rate_se: Option<f64>,
    /// `(1/2) ln sup det` over the region
    pub theo_rate: f64,
    pub gap: Option<f64>,
    pub low_hits: bool,
    /// the uniform-x profile may fall short of `sup det`
    pub lower_bound_rate: bool,
}

impl LdpEstimate {
    pub const CSV_HEADER: &'static str = "k,n,samples,hits,p_hat,se,emp_rate,theo_rate,gap";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.8}")).unwrap_or_else(|| "nan".into());
        format!(
            "{},{},{},{},{:.8e},{:.8e},{},{:.8},{}",
            self.k,
            self.n,
            self.samples,
            self.hits,
            self.p_hat,
            self.se,
            opt(self.emp_rate),
            self.theo_rate,
            opt(self.gap)
        )
    }
}

/// Probability that a Gram sample lands in the region, with the empirical
/// rate `(1/n) ln p̂` compared against `(1/2) ln sup det` for every `n`.
pub fn ldp_estimate(
    region: &EdgeIntervalRegion,
    n_list: &[usize],
    samples: u64,
    seed: u64,
    jobs: usize,
) -> Result<Vec<LdpEstimate>> {
    if samples == 0 {
        return Err(Error::Parameter("need samples > 0".into()));
    }
    let k = region.k();
    let theo_rate = region.log_sup_det()?.1 / 2.0;
    let lower_bound_rate = !region.uniform_profile_exact();
    n_list
        .iter()
        .map(|&n| {
            check_dims(k, n)?;
            let hits = count_hits(samples, seed, n as u64, jobs, |rng| {
                region.contains(&sample_gram_bartlett(k, n, rng).expect("dimensions checked").matrix)
            })?;
            let est = McEstimate::from_hits(samples, hits, 1.0);
            let nf = n as f64;
            let emp_rate = (hits > 0).then(|| est.value.ln() / nf);
            let rate_se = (hits > 0).then(|| est.std_err / (est.value * nf));
            Ok(LdpEstimate {
                k,
                n,
                samples,
                hits,
                p_hat: est.value,
                se: est.std_err,
                emp_rate,
                rate_se,
                theo_rate,
                gap: emp_rate.map(|r| r - theo_rate),
                low_hits: est.low_hits(),
                lower_bound_rate,
            })
        })
        .collect()
}

/// Homomorphism density of `g` into the spherical graphon joining points of
/// `S_{n−1}` whose scalar product lies in `[lo, hi]`.
pub fn spherical_graphon_density(
    g: &Graph,
    lo: f64,
    hi: f64,
    n: usize,
    samples: u64,
    seed: u64,
    jobs: usize,
) -> Result<McEstimate> {
    let region = EdgeIntervalRegion::new(g.clone(), lo, hi)?;
    let row = ldp_estimate(&region, &[n], samples, seed, jobs)?.remove(0);
    Ok(McEstimate {
        samples: row.samples,
        hits: row.hits,
        value: row.p_hat,
        std_err: row.se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};
    use std::f64::consts::PI;

    #[test]
    fn gram_samples_are_correlation_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (k, n) in [(2, 2), (3, 3), (4, 9), (5, 5)] {
            for _ in 0..50 {
                for g in [sample_gram(k, n, &mut rng).unwrap(), sample_gram_bartlett(k, n, &mut rng).unwrap()] {
                    assert!(is_correlation_matrix(&g.matrix));
                    assert!(g.matrix.is_positive_definite());
                }
            }
        }
        assert!(sample_gram(3, 2, &mut rng).is_err());
    }

    #[test]
    fn samplers_share_moments() {
        // unit vectors in R^5: E ρ² = 1/n, E ρ₁₂ρ₂₃ρ₃₁ = 1/n²
        let n = 5;
        let draws = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for bartlett in [false, true] {
            let (mut sq, mut tri) = (0.0, 0.0);
            for _ in 0..draws {
                let g = if bartlett {
                    sample_gram_bartlett(3, n, &mut rng).unwrap()
                } else {
                    sample_gram(3, n, &mut rng).unwrap()
                };
                let m = &g.matrix;
                sq += m.get(0, 1).powi(2);
                tri += m.get(0, 1) * m.get(1, 2) * m.get(2, 0);
            }
            assert!((sq / draws as f64 - 0.2).abs() < 2e-3, "bartlett = {bartlett}");
            assert!((tri / draws as f64 - 0.04).abs() < 1e-3, "bartlett = {bartlett}");
        }
    }

    #[test]
    fn volumes_in_closed_form() {
        assert!((elliptope_volume(2).unwrap() - 2.0).abs() < 1e-12);
        assert!((elliptope_volume(3).unwrap() - PI * PI / 2.0).abs() < 1e-12);
        // Γ_1 is the ordinary gamma function
        assert!((mv_gamma_log(1, 4.5).unwrap() - ln_gamma(4.5)).abs() < 1e-14);
        assert!(mv_gamma_log(3, 1.0).is_err());
    }

    #[test]
    fn density_two_integrates_to_one() {
        for n in [3, 4, 10, 31] {
            let steps = 20_000;
            let h = 2.0 / steps as f64;
            let total: f64 = (0..steps)
                .map(|i| {
                    let t = -1.0 + (i as f64 + 0.5) * h;
                    let m = SymMatrix::from_rows(&[vec![1.0, t], vec![t, 1.0]]).unwrap();
                    density_f(2, n, &m).unwrap() * h
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-4, "n = {n}: {total}");
        }
    }

    #[test]
    fn uniform_density_at_n_equals_k_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 2..=5 {
            let vol = elliptope_volume(k).unwrap();
            for _ in 0..20 {
                let g = sample_gram(k, k + 1, &mut rng).unwrap();
                assert!((density_f(k, k + 1, &g.matrix).unwrap() * vol - 1.0).abs() < 1e-10);
            }
        }
        let outside = SymMatrix::from_rows(&[vec![1.0, 1.5], vec![1.5, 1.0]]).unwrap();
        assert_eq!(density_f(2, 5, &outside).unwrap(), 0.0);
    }

    #[test]
    fn normalizer_asymptotics() {
        let (k, n) = (3, 10_000);
        let log_ratio = log_normalizer(k, n).unwrap() - (k * (k - 1)) as f64 / 4.0 * (n as f64 / (2.0 * PI)).ln();
        assert!((log_ratio.exp() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn estimates_do_not_depend_on_thread_count() {
        let a = mc_elliptope_volume(3, 200_000, 11, 1).unwrap();
        let b = mc_elliptope_volume(3, 200_000, 11, 3).unwrap();
        assert_eq!(a, b);
        assert!((a.value - PI * PI / 2.0).abs() < 4.0 * a.std_err);
    }

    #[test]
    fn whole_interval_and_hemisphere() {
        let k2 = generate(&GraphFamily::Path(2), None).unwrap();
        let full = spherical_graphon_density(&k2, -1.0, 1.0, 7, 10_000, 1, 0).unwrap();
        assert_eq!(full.value, 1.0);
        let half = spherical_graphon_density(&k2, 0.0, 1.0, 7, 100_000, 1, 0).unwrap();
        assert!((half.value - 0.5).abs() < 3.0 * half.std_err);
        let region = EdgeIntervalRegion::new(k2, -1.0, 1.0).unwrap();
        assert_eq!(region.log_sup_det().unwrap(), (0.0, 0.0));
    }

    #[test]
    fn sup_det_on_a_path() {
        let p3 = generate(&GraphFamily::Path(3), None).unwrap();
        let region = EdgeIntervalRegion::new(p3, 0.45, 0.55).unwrap();
        let (x, ld) = region.log_sup_det().unwrap();
        assert!((x - 0.45).abs() < 1e-8);
        assert!((ld - 2.0 * (1.0 - 0.45f64 * 0.45).ln()).abs() < 1e-8);
        assert!(region.uniform_profile_exact());
        let book = generate(&GraphFamily::Book(3), None).unwrap();
        assert!(!EdgeIntervalRegion::new(book, 0.1, 0.2).unwrap().uniform_profile_exact());
    }
}
