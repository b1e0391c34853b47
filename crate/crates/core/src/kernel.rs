//! Heat kernel of the degree-normalised walk: Poisson series, a dense
//! matrix-exponential oracle, and the two-sided bounds.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{GraphConstants, WeightedGraph};
use crate::paths::{ball_volume_with, distance_matrix};

pub const DEFAULT_EPS: f64 = 1e-10;
pub const DEFAULT_ORACLE_CAP: usize = 500;
/// Relative tolerance for the `ϑ = deg` precondition.
pub const MEASURE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub t: f64,
    /// `values[(x, y)] = p(t, x, y)`
    pub values: DMatrix<f64>,
    /// Last series term kept; `None` for the oracle.
    pub order: Option<usize>,
    /// Certified entrywise truncation bound.
    pub eps: f64,
}

impl KernelMatrix {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[(x, y)]
    }

    pub fn max_abs_diff(&self, other: &KernelMatrix) -> f64 {
        (&self.values - &other.values).amax()
    }
}

fn require_degree_measure(g: &WeightedGraph) -> Result<()> {
    for x in 0..g.len() {
        let (theta, deg) = (g.theta(x), g.degree(x));
        if (theta - deg).abs() > MEASURE_RTOL * deg.max(theta) {
            return Err(Error::MeasureNotDegree { label: g.label(x).into(), theta, deg });
        }
    }
    Ok(())
}

fn require_positive_degrees(g: &WeightedGraph) -> Result<()> {
    match (0..g.len()).find(|&x| g.degree(x) <= 0.0) {
        Some(x) => Err(Error::InvalidParameter(format!("vertex `{}` is isolated", g.label(x)))),
        None => Ok(()),
    }
}

/// One-step walk `P(x, y) = ω_xy / deg(x)`.
pub fn transition_matrix(g: &WeightedGraph) -> Result<DMatrix<f64>> {
    require_positive_degrees(g)?;
    let n = g.len();
    let mut p = DMatrix::zeros(n, n);
    for x in 0..n {
        let d = g.degree(x);
        for &(y, w) in g.neighbors(x) {
            p[(x, y)] = w / d;
        }
    }
    Ok(p)
}

/// `p_k = P^k`, with `p_0` the identity.
pub fn walk_kernel(g: &WeightedGraph, k: usize) -> Result<DMatrix<f64>> {
    let p = transition_matrix(g)?;
    let mut out = DMatrix::identity(g.len(), g.len());
    for _ in 0..k {
        out = &p * out;
    }
    Ok(out)
}

/// `tails[k] = e^{−t} Σ_{j>k} t^j/j!`, up to where the terms vanish in
/// double precision. Weights are formed in log space and the suffix sums
/// are compensated.
fn poisson_tails(t: f64) -> Vec<f64> {
    let mut logs = vec![-t];
    let lt = t.ln();
    loop {
        let k = logs.len();
        let next = logs[k - 1] + lt - (k as f64).ln();
        logs.push(next);
        // past the mode the terms decay at least geometrically
        if (k as f64) > 2.0 * t + 1.0 && next < -745.0 {
            break;
        }
    }
    let mut tails = vec![0.0; logs.len()];
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in (0..logs.len()).rev() {
        tails[k] = sum + comp;
        let w = logs[k].exp();
        let s = sum + w;
        comp += if sum.abs() >= w.abs() { (sum - s) + w } else { (w - s) + sum };
        sum = s;
    }
    tails
}

/// Smallest `K` with `e^{−t} Σ_{k>K} t^k/k! ≤ bound`, and that tail.
pub fn poisson_truncation(t: f64, bound: f64) -> (usize, f64) {
    let tails = poisson_tails(t);
    let k = tails.iter().position(|&tail| tail <= bound).unwrap_or(tails.len() - 1);
    (k, tails[k])
}

/// `p(t,x,y) = e^{−t} Σ_k t^k/k! p_k(x,y)/deg(y)`, truncated so that every
/// entry is within `eps` of the full series.
pub fn heat_kernel_series(g: &WeightedGraph, t: f64, eps: f64) -> Result<KernelMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("kernel time must be positive, got {t}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    require_degree_measure(g)?;
    let degrees = g.degrees();
    let min_deg = degrees.iter().cloned().fold(f64::INFINITY, f64::min);
    let (order, _) = poisson_truncation(t, eps * min_deg);
    series_with_order(g, t, order, eps, &degrees)
}

/// The series summed through `order` terms regardless of the tail.
pub fn heat_kernel_series_order(g: &WeightedGraph, t: f64, order: usize) -> Result<KernelMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("kernel time must be positive, got {t}")));
    }
    require_degree_measure(g)?;
    let degrees = g.degrees();
    let min_deg = degrees.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail = poisson_tails(t).get(order).copied().unwrap_or(0.0);
    series_with_order(g, t, order, tail / min_deg, &degrees)
}

fn series_with_order(g: &WeightedGraph, t: f64, order: usize, eps: f64, degrees: &[f64]) -> Result<KernelMatrix> {
    let p = transition_matrix(g)?;
    let n = g.len();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    let mut log_w = -t;
    let lt = t.ln();
    for k in 0..=order {
        if k > 0 {
            power = &p * power;
            log_w += lt - (k as f64).ln();
        }
        acc += log_w.exp() * &power;
    }
    for (y, mut col) in acc.column_iter_mut().enumerate() {
        col /= degrees[y];
    }
    Ok(KernelMatrix { t, values: acc, order: Some(order), eps })
}

/// Dense `exp(tΔ)` with `Δ` the ϑ-Laplacian matrix, columns divided by
/// `ϑ(y)`. Independent of the series; for graphs up to `cap` vertices.
pub fn heat_kernel_oracle(g: &WeightedGraph, t: f64) -> Result<KernelMatrix> {
    heat_kernel_oracle_capped(g, t, DEFAULT_ORACLE_CAP)
}

pub fn heat_kernel_oracle_capped(g: &WeightedGraph, t: f64, cap: usize) -> Result<KernelMatrix> {
    let n = g.len();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("kernel time must be non-negative, got {t}")));
    }
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        let theta = g.theta(x);
        for &(y, w) in g.neighbors(x) {
            lap[(x, y)] = w / theta;
        }
        lap[(x, x)] = -g.degree(x) / theta;
    }
    let mut values = (lap * t).exp();
    for (y, mut col) in values.column_iter_mut().enumerate() {
        col /= g.theta(y);
    }
    Ok(KernelMatrix { t, values, order: None, eps: 0.0 })
}

/// Two-sided bounds for one graph, with distances and constants cached.
#[derive(Debug, Clone)]
pub struct KernelBounds<'a> {
    graph: &'a WeightedGraph,
    consts: GraphConstants,
    dist: Vec<Vec<Option<usize>>>,
}

fn check_tm(t: f64, m: f64, c0: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("bound time must be positive, got {t}")));
    }
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("bounds need m > 1, got {m}")));
    }
    if !(c0 >= 0.0) || !c0.is_finite() {
        return Err(Error::InvalidParameter(format!("C0 must be non-negative, got {c0}")));
    }
    Ok(())
}

impl<'a> KernelBounds<'a> {
    pub fn new(graph: &'a WeightedGraph) -> Self {
        KernelBounds { consts: GraphConstants::of(graph), dist: distance_matrix(graph), graph }
    }

    /// `exp{4√((6D_ϑ + 5C0)ϑ_max t/(6m²ω_min))} / Vol B(x, √t)`
    pub fn upper(&self, t: f64, x: usize, c0: f64, m: f64) -> Result<f64> {
        check_tm(t, m, c0)?;
        let c = &self.consts;
        let exponent = 4.0 * ((6.0 * c.d_theta + 5.0 * c0) * c.theta_max * t / (6.0 * m * m * c.omega_min)).sqrt();
        Ok(exponent.exp() / ball_volume_with(self.graph, &self.dist[x], t.sqrt()))
    }

    /// `exp{−(1 + 5C0/6)t − 4ϑ_max dist(x,y)²/(m²ω_min t)} / deg(y)`; needs
    /// `ϑ = deg`.
    pub fn lower(&self, t: f64, x: usize, y: usize, c0: f64, m: f64) -> Result<f64> {
        check_tm(t, m, c0)?;
        require_degree_measure(self.graph)?;
        let g = self.graph;
        let d = self.dist[x][y].ok_or_else(|| Error::Disconnected { a: g.label(x).into(), b: g.label(y).into() })?;
        let c = &self.consts;
        let exponent = -(1.0 + 5.0 * c0 / 6.0) * t - 4.0 * c.theta_max * (d * d) as f64 / (m * m * c.omega_min * t);
        Ok(exponent.exp() / g.degree(y))
    }
}

pub fn upper_bound_t4i(g: &WeightedGraph, t: f64, x: usize, c0: f64, m: f64) -> Result<f64> {
    KernelBounds::new(g).upper(t, x, c0, m)
}

pub fn lower_bound_t4ii(g: &WeightedGraph, t: f64, x: usize, y: usize, c0: f64, m: f64) -> Result<f64> {
    KernelBounds::new(g).lower(t, x, y, c0, m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    /// `Σ_z ϑ(z) p(t, x, z)` per row.
    pub masses: Vec<f64>,
    pub max_deviation: f64,
}

impl MassReport {
    pub fn within(&self, eps: f64) -> bool {
        self.max_deviation <= eps
    }
}

pub fn mass_check(kern: &KernelMatrix, g: &WeightedGraph) -> MassReport {
    let masses: Vec<f64> = (0..kern.len()).map(|x| (0..kern.len()).map(|z| g.theta(z) * kern.get(x, z)).sum()).collect();
    let max_deviation = masses.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    MassReport { masses, max_deviation }
}

/// Largest `|w(x)p(t,x,y) − w(y)p(t,y,x)|` over pairs.
pub fn weighted_asymmetry(kern: &KernelMatrix, w: &[f64]) -> f64 {
    let n = kern.len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            worst = worst.max((w[x] * kern.get(x, y) - w[y] * kern.get(y, x)).abs());
        }
    }
    worst
}

/// Largest `|p(t,x,y) − p(t,y,x)|`.
pub fn asymmetry(kern: &KernelMatrix) -> f64 {
    weighted_asymmetry(kern, &vec![1.0; kern.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_graph, GraphSpec, MeasureMode, WeightMode};
    use crate::testutil::{k2, random_graph, star3};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn closed_k2(t: f64) -> (f64, f64) {
        let off = (1.0 - (-2.0 * t).exp()) / 2.0;
        (1.0 - off, off)
    }

    #[test]
    fn walk_kernel_k2_alternates() {
        let g = k2();
        assert_eq!(walk_kernel(&g, 0).unwrap(), DMatrix::identity(2, 2));
        for k in 1..8 {
            let p = walk_kernel(&g, k).unwrap();
            let odd = (k % 2) as f64;
            assert_eq!(p[(0, 1)], odd);
            assert_eq!(p[(0, 0)], 1.0 - odd);
        }
    }

    #[test]
    fn walk_rows_stay_stochastic() {
        let g = random_graph(20, 5, true);
        for k in [1, 7, 50] {
            let p = walk_kernel(&g, k).unwrap();
            for row in p.row_iter() {
                assert!((row.sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k2_closed_form() {
        let g = k2();
        let (diag, off) = closed_k2(1.0);
        assert!((off - 0.432332).abs() < 1e-6);
        let coarse = heat_kernel_series(&g, 1.0, DEFAULT_EPS).unwrap();
        assert!((coarse.get(0, 1) - off).abs() <= DEFAULT_EPS);
        let s = heat_kernel_series(&g, 1.0, 1e-14).unwrap();
        let o = heat_kernel_oracle(&g, 1.0).unwrap();
        for k in [&s, &o] {
            assert!((k.get(0, 1) - off).abs() <= 1e-12, "{:e}", k.get(0, 1) - off);
            assert!((k.get(0, 0) - diag).abs() <= 1e-12);
        }
        assert!(mass_check(&s, &g).within(1e-10));
    }

    #[test]
    fn oracle_at_zero_is_identity_over_measure() {
        let g = random_graph(8, 2, false);
        let o = heat_kernel_oracle(&g, 0.0).unwrap();
        for x in 0..g.len() {
            for y in 0..g.len() {
                let want = if x == y { 1.0 / g.theta(y) } else { 0.0 };
                assert_eq!(o.get(x, y), want);
            }
        }
    }

    #[test]
    fn small_time_limit() {
        let g = star3();
        let g = g.with_degree_measure().unwrap();
        let s = heat_kernel_series(&g, 1e-8, 1e-14).unwrap();
        for x in 0..g.len() {
            assert_relative_eq!(s.get(x, x), 1.0 / g.degree(x), max_relative = 1e-7);
        }
        assert!(s.get(0, 1) < 1e-7);
    }

    #[test]
    fn series_needs_degree_measure_and_positive_time() {
        let g = random_graph(6, 1, false);
        let weighted = g.degrees().iter().any(|&d| (d - 1.0).abs() > 1e-9);
        if weighted {
            assert!(matches!(heat_kernel_series(&g, 1.0, 1e-10), Err(Error::MeasureNotDegree { .. })));
        }
        assert!(heat_kernel_series(&k2(), 0.0, 1e-10).is_err());
        assert!(matches!(
            heat_kernel_oracle_capped(&random_graph(10, 1, true), 1.0, 5),
            Err(Error::TooLarge { n: 10, cap: 5 })
        ));
    }

    #[test]
    fn poisson_tail_is_certified() {
        for t in [0.1, 1.0, 5.0, 40.0] {
            let (k, tail) = poisson_truncation(t, 1e-10);
            assert!(tail <= 1e-10);
            // brute-force check of the tail and of minimality
            let mut w = (-t).exp();
            let mut partial = 0.0;
            let mut terms = vec![];
            for j in 0..(k + 200) {
                if j > 0 {
                    w *= t / j as f64;
                }
                terms.push(w);
            }
            for &v in &terms[..=k] {
                partial += v;
            }
            assert!((1.0 - partial - tail).abs() < 1e-12, "t={t}");
            if k > 0 {
                assert!(tail + terms[k] > 1e-10);
            }
        }
    }

    #[test]
    fn extra_terms_stay_within_eps() {
        let g = random_graph(15, 9, true);
        for t in [0.1, 1.0, 5.0] {
            let s = heat_kernel_series(&g, t, 1e-10).unwrap();
            let more = heat_kernel_series_order(&g, t, s.order.unwrap() + 10).unwrap();
            assert!(s.max_abs_diff(&more) <= 1e-10);
        }
    }

    #[test]
    fn series_matches_oracle_and_semigroup() {
        let g = random_graph(25, 13, true);
        for t in [0.1, 1.0, 5.0] {
            let s = heat_kernel_series(&g, t, 1e-12).unwrap();
            let o = heat_kernel_oracle(&g, t).unwrap();
            assert!(s.max_abs_diff(&o) <= 1e-10, "t={t}: {}", s.max_abs_diff(&o));
            assert!(s.values.iter().all(|&v| v >= 0.0));
            assert!(asymmetry(&s) <= 1e-12);
        }
        let a = heat_kernel_oracle(&g, 0.4).unwrap();
        let b = heat_kernel_oracle(&g, 0.7).unwrap();
        let ab = heat_kernel_oracle(&g, 1.1).unwrap();
        let theta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(g.thetas().to_vec()));
        let composed = &a.values * theta * &b.values;
        assert!((composed - &ab.values).amax() <= 1e-10);
    }

    #[test]
    fn kernel_is_symmetric_not_degree_weighted_symmetric() {
        // star: centre degree 3, leaves degree 1
        let g = star3().with_degree_measure().unwrap();
        let s = heat_kernel_series(&g, 1.0, 1e-12).unwrap();
        assert!(asymmetry(&s) <= 1e-12);
        let w = weighted_asymmetry(&s, &g.degrees());
        assert_relative_eq!(w, 2.0 * s.get(0, 1), max_relative = 1e-10);
        assert!(w > 0.1);
    }

    #[test]
    fn k2_bounds() {
        let g = k2();
        let b = KernelBounds::new(&g);
        assert_relative_eq!(b.upper(1.0, 0, 0.0, 2.0).unwrap(), 2f64.exp() / 2.0, max_relative = 1e-14);
        assert_relative_eq!(b.lower(1.0, 0, 1, 0.0, 2.0).unwrap(), (-2f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(b.lower(1.0, 0, 0, 0.0, 2.0).unwrap(), (-1f64).exp(), max_relative = 1e-14);
        assert!(b.upper(1.0, 0, 0.0, 1.0).is_err());
        assert!(b.lower(0.0, 0, 0, 0.0, 2.0).is_err());
        // decreasing in m
        let mut last = f64::INFINITY;
        for m in [1.5, 2.0, 3.0, 8.0] {
            let v = b.upper(0.7, 1, 0.3, m).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    fn worst_lower_margin(g: &WeightedGraph, t: f64, m: f64) -> f64 {
        let s = heat_kernel_series(g, t, 1e-12).unwrap();
        let b = KernelBounds::new(g);
        let mut worst = f64::INFINITY;
        for x in 0..g.len() {
            for y in 0..g.len() {
                worst = worst.min(s.get(x, y) - b.lower(t, x, y, 0.0, m).unwrap());
            }
        }
        worst
    }

    #[test]
    fn lower_bound_exceeds_kernel_for_large_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for spec in [GraphSpec::Path(4), GraphSpec::Cycle(5), GraphSpec::Complete(4), GraphSpec::Star(3)] {
            let g = generate_graph(spec, WeightMode::Unit, MeasureMode::Degree, &mut rng).unwrap();
            assert!(worst_lower_margin(&g, 0.5, 4.0) < -1e-3, "{spec}");
            assert!(worst_lower_margin(&g, 0.5, 2.0) > 0.0, "{spec}");
        }
    }

    #[test]
    fn lower_bound_needs_degree_measure() {
        let g = generate_graph(GraphSpec::Path(3), WeightMode::Unit, MeasureMode::Unit, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert!(matches!(lower_bound_t4ii(&g, 1.0, 0, 2, 0.0, 2.0), Err(Error::MeasureNotDegree { .. })));
        assert!(upper_bound_t4i(&g, 1.0, 0, 0.0, 2.0).is_ok());
    }
}
