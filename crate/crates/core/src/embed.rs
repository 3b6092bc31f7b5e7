//! Euclidean embeddability of finite metrics.
//!
//! The decision procedure is the classical base-point Gram criterion: with
//! base x_0, G[i][j] = (d(x0,xi)^2 + d(x0,xj)^2 - d(xi,xj)^2) / 2 is
//! positive semidefinite iff the metric embeds isometrically in Euclidean
//! space, and the minimal dimension is its rank. Coordinates come from the
//! eigen-factorization.
//!
//! The Gauss-Newton solver realizes prescribed pairwise distances near 1 by
//! iterating on F(q) = (||q_i - q_j||^2)_{i<j} from the rescaled simplex
//! base point p_j = e_j / sqrt(2), where the differential is a bijection
//! onto the upper-triangular matrix units (each free coordinate q_l^k with
//! k < l maps to -sqrt(2) E_{kl}).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::snowflake::SnowflakeFunction;

/// Relative PSD tolerance: eigenvalues above -tol_psd * |lambda|_max count
/// as nonnegative.
pub const TOL_PSD: f64 = 1e-10;
/// Relative rank tolerance: eigenvalues above tol_rank * lambda_max are
/// retained as dimensions.
pub const TOL_RANK: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GramDecomposition {
    pub base_index: usize,
    pub gram: DMatrix<f64>,
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// None when the Gram matrix is not PSD at tolerance.
    pub min_dim: Option<usize>,
    /// Coordinates (one per metric point, base at the origin) when
    /// embeddable.
    pub coords: Option<Vec<DVector<f64>>>,
    /// max |  ||q_i - q_j|| - d(i,j)  | over pairs when embeddable.
    pub residual: f64,
    pub tol_psd: f64,
    pub tol_rank: f64,
}

impl GramDecomposition {
    pub fn embeddable(&self) -> bool {
        self.min_dim.is_some()
    }
}

/// Base-point Gram test with eigen-factorization coordinates.
pub fn euclidean_embed(m: &FiniteMetric, tol_psd: f64, tol_rank: f64) -> GramDecomposition {
    euclidean_embed_from(m, 0, tol_psd, tol_rank)
}

pub fn euclidean_embed_from(
    m: &FiniteMetric,
    base_index: usize,
    tol_psd: f64,
    tol_rank: f64,
) -> GramDecomposition {
    let n = m.len();
    assert!(base_index < n, "base index out of range");
    let others: Vec<usize> = (0..n).filter(|&i| i != base_index).collect();
    let k = others.len();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        let (a, b) = (others[i], others[j]);
        let d0a = m.dist(base_index, a);
        let d0b = m.dist(base_index, b);
        let dab = m.dist(a, b);
        0.5 * (d0a * d0a + d0b * d0b - dab * dab)
    });
    if k == 0 {
        return GramDecomposition {
            base_index,
            gram,
            eigenvalues: vec![],
            min_dim: Some(0),
            coords: Some(vec![DVector::zeros(0)]),
            residual: 0.0,
            tol_psd,
            tol_rank,
        };
    }
    let eig = gram.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lambda_abs_max = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let psd_floor = -tol_psd * lambda_abs_max;
    let embeddable = *eigenvalues.last().unwrap() >= psd_floor;
    if !embeddable {
        return GramDecomposition {
            base_index,
            gram,
            eigenvalues,
            min_dim: None,
            coords: None,
            residual: f64::INFINITY,
            tol_psd,
            tol_rank,
        };
    }
    let lambda_max = eigenvalues[0].max(0.0);
    let rank = eigenvalues
        .iter()
        .filter(|&&l| l > tol_rank * lambda_max)
        .count();
    // coords[local i] = (sqrt(lambda_c) * V[i, c]) for retained columns c.
    let mut coords = vec![DVector::zeros(rank); n];
    for (local, &global) in others.iter().enumerate() {
        let mut q = DVector::zeros(rank);
        for (c, &col) in order.iter().take(rank).enumerate() {
            q[c] = eigenvalues[c].max(0.0).sqrt() * eig.eigenvectors[(local, col)];
        }
        coords[global] = q;
    }
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (&coords[i] - &coords[j]).norm();
            residual = residual.max((d - m.dist(i, j)).abs());
        }
    }
    GramDecomposition {
        base_index,
        gram,
        eigenvalues,
        min_dim: Some(rank),
        coords: Some(coords),
        residual,
        tol_psd,
        tol_rank,
    }
}

/// Minimal Euclidean embedding dimension, or None when no Euclidean space
/// works.
pub fn min_embedding_dimension(m: &FiniteMetric) -> Option<usize> {
    euclidean_embed(m, TOL_PSD, TOL_RANK).min_dim
}

/// The rescaled simplex base point: p_j = e_j / sqrt(2) in R^n, so all
/// pairwise distances are exactly 1.
pub fn simplex_base_point(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|j| {
            let mut v = DVector::zeros(n);
            v[j] = 1.0 / 2f64.sqrt();
            v
        })
        .collect()
}

/// F(q) = (||q_i - q_j||^2) on the strict upper triangle.
pub fn squared_distance_map(points: &[DVector<f64>]) -> DMatrix<f64> {
    let n = points.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            out[(i, j)] = (&points[i] - &points[j]).norm_squared();
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct NewtonState {
    pub points: Vec<DVector<f64>>,
    /// Symmetric target distance matrix rho.
    pub target: DMatrix<f64>,
    /// max | ||q_i - q_j||^2 - rho_ij^2 |.
    pub residual_sq: f64,
    pub iterations: usize,
    /// residual_sq after each iteration (index 0 = initial state).
    pub residual_history: Vec<f64>,
}

/// Gauss-Newton iteration solving ||q_i - q_j|| = rho_ij from the simplex
/// base point. Gauge freedom (rigid motions) is fixed by pinning q_0 = p_0
/// and, for each later point q_l, pinning coordinates k >= l at their
/// simplex values; the free coordinates {q_l^k : k < l} biject onto the
/// residual entries, so the Jacobian is square and equals a signed
/// permutation (-sqrt(2) per entry) at the base point.
pub fn newton_embed(
    rho: &DMatrix<f64>,
    max_iter: usize,
    tol: f64,
    rho_box: f64,
) -> Result<NewtonState> {
    let n = rho.nrows();
    if rho.ncols() != n || n < 2 {
        return Err(Error::Structural("rho must be square with n >= 2".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let r = rho[(i, j)];
            if !r.is_finite() || (r - 1.0).abs() >= rho_box {
                return Err(Error::Domain(format!(
                    "rho[{i}][{j}] = {r} outside the box |rho - 1| < {rho_box}"
                )));
            }
        }
    }
    let target = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if i < j {
            rho[(i, j)]
        } else {
            rho[(j, i)]
        }
    });

    // Free variables: (l, k) with k < l, one per point/coordinate.
    let free: Vec<(usize, usize)> = (1..n).flat_map(|l| (0..l).map(move |k| (l, k))).collect();
    // Residual slots: (i, j) with i < j.
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    debug_assert_eq!(free.len(), m);

    let mut points = simplex_base_point(n);
    let residual_of = |points: &[DVector<f64>]| -> (DVector<f64>, f64) {
        let mut r = DVector::zeros(m);
        let mut worst = 0.0f64;
        for (s, &(i, j)) in pairs.iter().enumerate() {
            let v = (&points[i] - &points[j]).norm_squared() - target[(i, j)] * target[(i, j)];
            r[s] = v;
            worst = worst.max(v.abs());
        }
        (r, worst)
    };

    let (mut r, mut worst) = residual_of(&points);
    let mut history = vec![worst];
    let mut iterations = 0;
    while worst >= tol {
        if iterations >= max_iter {
            return Err(Error::IterationLimit {
                iterations,
                residual: worst,
            });
        }
        let mut jac = DMatrix::zeros(m, m);
        for (s, &(i, j)) in pairs.iter().enumerate() {
            for (v, &(l, k)) in free.iter().enumerate() {
                if l == i {
                    jac[(s, v)] = 2.0 * (points[i][k] - points[j][k]);
                } else if l == j {
                    jac[(s, v)] = -2.0 * (points[i][k] - points[j][k]);
                }
            }
        }
        let delta = jac.lu().solve(&(-&r)).ok_or(Error::IterationLimit {
            iterations,
            residual: worst,
        })?;
        for (v, &(l, k)) in free.iter().enumerate() {
            points[l][k] += delta[v];
        }
        iterations += 1;
        let (nr, nw) = residual_of(&points);
        r = nr;
        worst = nw;
        history.push(worst);
        // Stalled: no progress and above tolerance.
        if history.len() >= 3 {
            let prev = history[history.len() - 2];
            if worst >= prev * (1.0 - 1e-12) && worst >= tol && iterations >= 8 {
                return Err(Error::IterationLimit {
                    iterations,
                    residual: worst,
                });
            }
        }
    }
    Ok(NewtonState {
        points,
        target,
        residual_sq: worst,
        iterations,
        residual_history: history,
    })
}

#[derive(Clone, Debug)]
pub struct AlphaSample {
    pub alpha: f64,
    pub embeddable: bool,
    pub min_eigenvalue: f64,
    pub min_dim: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct AlphaBoundary {
    /// Embeddable side of the refined bracket.
    pub alpha_embeddable: f64,
    /// Non-embeddable side of the refined bracket.
    pub alpha_not_embeddable: f64,
    /// Midpoint of the final bracket.
    pub boundary: f64,
}

/// Embeddability of (X, d^alpha) across an alpha grid. No monotonicity in
/// alpha is assumed: every verdict change between consecutive grid points
/// is refined by bisection and reported.
///
/// Small exponents push every snowflaked distance toward 1 — the
/// near-simplex regime where realization is guaranteed — so embeddability
/// near alpha = 0 is expected for any metric; behavior near alpha = 1
/// depends on the metric itself.
#[derive(Clone, Debug)]
pub struct AlphaStarProfile {
    pub samples: Vec<AlphaSample>,
    pub boundaries: Vec<AlphaBoundary>,
    /// Largest alpha found embeddable (grid point or refined boundary).
    pub largest_embeddable: Option<f64>,
}

fn embed_sample(m: &FiniteMetric, alpha: f64) -> Result<AlphaSample> {
    let h = SnowflakeFunction::power(alpha)?;
    let snow = crate::metric::apply_snowflake(m, &h)?;
    let g = euclidean_embed(&snow, TOL_PSD, TOL_RANK);
    Ok(AlphaSample {
        alpha,
        embeddable: g.embeddable(),
        min_eigenvalue: *g.eigenvalues.last().unwrap_or(&0.0),
        min_dim: g.min_dim,
    })
}

pub fn alpha_star(m: &FiniteMetric, grid: &[f64], tol_alpha: f64) -> Result<AlphaStarProfile> {
    if m.len() < 3 {
        return Err(Error::DegenerateInput(
            "alpha_star needs at least 3 points".into(),
        ));
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.retain(|a| *a > 0.0 && *a <= 1.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    if grid.len() < 2 {
        return Err(Error::Structural(
            "alpha grid needs at least 2 points in (0,1]".into(),
        ));
    }
    let samples: Vec<AlphaSample> = grid
        .iter()
        .map(|&a| embed_sample(m, a))
        .collect::<Result<_>>()?;
    let mut boundaries = Vec::new();
    for w in samples.windows(2) {
        if w[0].embeddable != w[1].embeddable {
            let (mut lo, mut hi) = (w[0].alpha, w[1].alpha);
            let lo_embeddable = w[0].embeddable;
            while hi - lo > tol_alpha {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if embed_sample(m, mid)?.embeddable == lo_embeddable {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (alpha_embeddable, alpha_not_embeddable) =
                if lo_embeddable { (lo, hi) } else { (hi, lo) };
            boundaries.push(AlphaBoundary {
                alpha_embeddable,
                alpha_not_embeddable,
                boundary: 0.5 * (lo + hi),
            });
        }
    }
    let mut largest: Option<f64> = samples
        .iter()
        .filter(|s| s.embeddable)
        .map(|s| s.alpha)
        .fold(None, |acc, a| Some(acc.map_or(a, |b: f64| b.max(a))));
    for b in &boundaries {
        largest = Some(largest.map_or(b.alpha_embeddable, |l| l.max(b.alpha_embeddable)));
    }
    Ok(AlphaStarProfile {
        samples,
        boundaries,
        largest_embeddable: largest,
    })
}

pub fn default_alpha_grid() -> Vec<f64> {
    (1..=64).map(|i| i as f64 / 64.0).collect()
}

#[derive(Clone, Debug)]
pub struct DistortionProbe {
    /// Best (max ratio) * (max inverse ratio) found; >= 1, an upper bound on
    /// the optimal bilipschitz distortion into the target dimension.
    pub distortion: f64,
    pub coords: Vec<DVector<f64>>,
    /// Which start produced the best value: usize::MAX marks the certified
    /// start from euclidean_embed coordinates.
    pub best_start: usize,
    pub restarts: usize,
}

fn config_distortion(m: &FiniteMetric, pts: &[DVector<f64>]) -> f64 {
    let n = m.len();
    let mut max_ratio = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (&pts[i] - &pts[j]).norm();
            if d <= 0.0 {
                return f64::INFINITY;
            }
            let r = d / m.dist(i, j);
            max_ratio = max_ratio.max(r);
            min_ratio = min_ratio.min(r);
        }
    }
    max_ratio / min_ratio
}

fn stress_descent(m: &FiniteMetric, pts: &mut [DVector<f64>], iters: usize) {
    let n = m.len();
    let dim = pts[0].len();
    let mut step = 0.1;
    let mut energy = f64::INFINITY;
    for _ in 0..iters {
        // Multiplicative-error objective: sum (log ratio)^2.
        let mut grads = vec![DVector::zeros(dim); n];
        let mut e = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = &pts[i] - &pts[j];
                let d = diff.norm().max(1e-12);
                let logr = (d / m.dist(i, j)).ln();
                e += logr * logr;
                let g = diff * (2.0 * logr / (d * d));
                grads[i] += &g;
                grads[j] -= &g;
            }
        }
        if e > energy {
            step *= 0.5;
            if step < 1e-9 {
                break;
            }
        } else {
            step *= 1.05;
        }
        energy = e;
        for i in 0..n {
            pts[i] -= &grads[i] * step;
        }
    }
}

/// Stress minimization over seeded restarts; reports the best distortion
/// found. When the metric already embeds in the target dimension, the
/// certified eigen-coordinates are used as an additional start, giving
/// distortion 1 up to roundoff. Always an upper-bound tool.
pub fn distortion_probe(
    m: &FiniteMetric,
    target_dim: usize,
    restarts: usize,
    seed: u64,
) -> Result<DistortionProbe> {
    if target_dim == 0 {
        return Err(Error::Domain("target dimension must be positive".into()));
    }
    let n = m.len();
    if n < 2 {
        return Err(Error::DegenerateInput("need at least 2 points".into()));
    }
    let mut best: Option<(f64, Vec<DVector<f64>>, usize)> = None;
    fn consider(
        cand: (f64, Vec<DVector<f64>>, usize),
        best: &mut Option<(f64, Vec<DVector<f64>>, usize)>,
    ) {
        let replace = match best {
            None => true,
            Some((d, _, s)) => cand.0 < *d || (cand.0 == *d && cand.2 < *s),
        };
        if replace {
            *best = Some(cand);
        }
    }

    let g = euclidean_embed(m, TOL_PSD, TOL_RANK);
    if let (Some(dim), Some(coords)) = (g.min_dim, g.coords.as_ref()) {
        if dim <= target_dim {
            let padded: Vec<DVector<f64>> = coords
                .iter()
                .map(|q| {
                    let mut v = DVector::zeros(target_dim);
                    for k in 0..dim {
                        v[k] = q[k];
                    }
                    v
                })
                .collect();
            let d = config_distortion(m, &padded);
            consider((d, padded, usize::MAX), &mut best);
        }
    }

    let mean_dist = {
        let mut s = 0.0;
        let mut c = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m.dist(i, j);
                c += 1;
            }
        }
        s / c as f64
    };
    for k in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(k as u64 + 1)),
        );
        let mut pts: Vec<DVector<f64>> = (0..n)
            .map(|_| {
                DVector::from_fn(target_dim, |_, _| rng.random::<f64>() - 0.5) * (2.0 * mean_dist)
            })
            .collect();
        stress_descent(m, &mut pts, 600);
        let d = config_distortion(m, &pts);
        consider((d, pts, k), &mut best);
    }
    let (distortion, coords, best_start) = best.ok_or_else(|| {
        Error::DegenerateInput("no restarts requested and no certified start available".into())
    })?;
    Ok(DistortionProbe {
        distortion,
        coords,
        best_start,
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{apply_snowflake, metric_from_points, FiniteMetric, PointConfig};

    pub(crate) fn equilateral(n: usize) -> FiniteMetric {
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        FiniteMetric::from_matrix(d).unwrap()
    }

    fn k13() -> FiniteMetric {
        let mut d = DMatrix::zeros(4, 4);
        for i in 1..4 {
            d[(0, i)] = 1.0;
            d[(i, 0)] = 1.0;
            for j in 1..4 {
                if i != j {
                    d[(i, j)] = 2.0;
                }
            }
        }
        FiniteMetric::from_matrix(d).unwrap()
    }

    fn collinear_unit(n: usize, alpha: f64) -> FiniteMetric {
        // n equally spaced points on [0,1], snowflaked by alpha.
        let d = DMatrix::from_fn(n, n, |i, j| {
            ((i as f64 - j as f64).abs() / (n as f64 - 1.0)).powf(alpha)
        });
        FiniteMetric::from_matrix(d).unwrap()
    }

    #[test]
    fn equilateral_embeds_in_n_minus_1() {
        for n in 3..=8 {
            let g = euclidean_embed(&equilateral(n), TOL_PSD, TOL_RANK);
            assert_eq!(g.min_dim, Some(n - 1));
            assert!(g.residual < 1e-9, "residual {}", g.residual);
        }
    }

    #[test]
    fn two_point_metric() {
        let m = FiniteMetric::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]))
            .unwrap();
        let g = euclidean_embed(&m, TOL_PSD, TOL_RANK);
        assert_eq!(g.min_dim, Some(1));
    }

    #[test]
    fn k13_snowflake_09_not_embeddable() {
        let h = SnowflakeFunction::power(0.9).unwrap();
        let s = apply_snowflake(&k13(), &h).unwrap();
        let g = euclidean_embed(&s, TOL_PSD, TOL_RANK);
        assert!(!g.embeddable());
        // Oracle: off-diagonal Gram entry a = 1 - 2^{2*0.9-1}; smallest
        // eigenvalue 1 + 2a.
        let a = 1.0 - 2f64.powf(2.0 * 0.9 - 1.0);
        assert!((a + 0.74110).abs() < 1e-4);
        let min_eig = *g.eigenvalues.last().unwrap();
        assert!((min_eig - (1.0 + 2.0 * a)).abs() < 1e-12);
        assert!((min_eig + 0.48221).abs() < 1e-4);
    }

    #[test]
    fn collinear_three_points_min_dim_1() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
        let m = FiniteMetric::from_matrix(d).unwrap();
        assert_eq!(min_embedding_dimension(&m), Some(1));
    }

    #[test]
    fn snowflaked_segment_full_rank() {
        let m = collinear_unit(20, 0.5);
        assert_eq!(min_embedding_dimension(&m), Some(19));
    }

    #[test]
    fn gram_verdict_base_invariant() {
        let metrics = [k13(), equilateral(5), collinear_unit(6, 0.5)];
        for m in &metrics {
            let verdict = euclidean_embed(m, TOL_PSD, TOL_RANK).embeddable();
            for b in 0..m.len() {
                let g = euclidean_embed_from(m, b, TOL_PSD, TOL_RANK);
                assert_eq!(g.embeddable(), verdict);
            }
        }
    }

    #[test]
    fn newton_identity_target() {
        let n = 5;
        let rho = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        let st = newton_embed(&rho, 50, 1e-12, 0.05).unwrap();
        assert_eq!(st.iterations, 0);
        let p = simplex_base_point(n);
        for (a, b) in st.points.iter().zip(&p) {
            assert!((a - b).amax() < 1e-15);
        }
    }

    #[test]
    fn newton_recovers_jittered_targets() {
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let mut rho = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = 1.0 + (rng.random::<f64>() - 0.5) * 0.02;
                    rho[(i, j)] = v;
                    rho[(j, i)] = v;
                }
            }
            let st = newton_embed(&rho, 50, 1e-12, 0.05).unwrap();
            assert!(st.residual_sq < 1e-12);
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = (&st.points[i] - &st.points[j]).norm();
                    assert!((d - rho[(i, j)]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn newton_stalls_on_unreachable_target() {
        // K_{1,3} snowflaked at 0.9 is not embeddable in any Euclidean
        // space; its distances deviate too far from 1 for the default box,
        // so widen the box and watch Gauss-Newton fail to reach tolerance.
        let h = SnowflakeFunction::power(0.9).unwrap();
        let s = apply_snowflake(&k13(), &h).unwrap();
        let rho = s.matrix().clone();
        match newton_embed(&rho, 60, 1e-12, 0.95) {
            Err(Error::IterationLimit { residual, .. }) => {
                assert!(residual > 1e-6, "stall residual {residual}");
            }
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }

    #[test]
    fn jacobian_matches_analytic_pattern() {
        // Central differences of F at the simplex base point against
        // dF/dq_l^k = -sqrt(2) E_{lk} for l < k (and symmetrically
        // -sqrt(2) E_{kl} for the coordinates below the diagonal).
        let step = 1e-6;
        for n in 3..=6 {
            let p = simplex_base_point(n);
            for l in 0..n {
                for k in 0..n {
                    if k == l {
                        continue;
                    }
                    let mut plus = p.clone();
                    plus[l][k] += step;
                    let mut minus = p.clone();
                    minus[l][k] -= step;
                    let diff = (squared_distance_map(&plus) - squared_distance_map(&minus))
                        / (2.0 * step);
                    let (a, b) = (l.min(k), l.max(k));
                    for i in 0..n {
                        for j in (i + 1)..n {
                            let expect = if (i, j) == (a, b) { -2f64.sqrt() } else { 0.0 };
                            assert!(
                                (diff[(i, j)] - expect).abs() < 1e-6,
                                "n={n} l={l} k={k} entry ({i},{j}): {} vs {expect}",
                                diff[(i, j)]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_star_k13_boundary() {
        let profile = alpha_star(&k13(), &default_alpha_grid(), 1e-8).unwrap();
        let expect = 0.5 * (1.0 + (1.5f64).log2());
        assert_eq!(profile.boundaries.len(), 1);
        let b = &profile.boundaries[0];
        assert!(
            (b.boundary - expect).abs() < 1e-6,
            "boundary {} vs {}",
            b.boundary,
            expect
        );
        assert!((profile.largest_embeddable.unwrap() - expect).abs() < 1e-6);
        // Embeddable below, not above.
        for s in &profile.samples {
            assert_eq!(s.embeddable, s.alpha <= expect + 1e-9, "alpha {}", s.alpha);
        }
    }

    #[test]
    fn alpha_star_equilateral_all_embeddable() {
        let profile = alpha_star(&equilateral(4), &default_alpha_grid(), 1e-8).unwrap();
        assert!(profile.boundaries.is_empty());
        assert!(profile.samples.iter().all(|s| s.embeddable));
        assert_eq!(profile.largest_embeddable, Some(1.0));
    }

    #[test]
    fn alpha_star_collinear_every_alpha_embeds() {
        // |x - y|^alpha on the line is of negative type for every
        // alpha <= 1 (the fractional-Brownian-motion kernel), so all grid
        // points embed and there is no PSD boundary; the rank jumps from
        // n-1 to 1 exactly at alpha = 1.
        let d = DMatrix::from_fn(4, 4, |i, j| (i as f64 - j as f64).abs());
        let m = FiniteMetric::from_matrix(d).unwrap();
        let profile = alpha_star(&m, &default_alpha_grid(), 1e-8).unwrap();
        assert!(profile.samples.iter().all(|s| s.embeddable));
        assert!(profile.boundaries.is_empty());
        assert_eq!(profile.largest_embeddable, Some(1.0));
        for s in &profile.samples {
            let expect_dim = if s.alpha < 1.0 { 3 } else { 1 };
            assert_eq!(s.min_dim, Some(expect_dim), "alpha {}", s.alpha);
        }
    }

    #[test]
    fn distortion_trivial_cases() {
        let m = FiniteMetric::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 2.5, 2.5, 0.0]))
            .unwrap();
        let p = distortion_probe(&m, 1, 2, 0).unwrap();
        assert!((p.distortion - 1.0).abs() < 1e-6);

        let m = equilateral(4);
        let p = distortion_probe(&m, 3, 2, 0).unwrap();
        assert!((p.distortion - 1.0).abs() < 1e-6);

        // With zero restarts the certified eigen-coordinate start alone
        // already reaches distortion 1.
        let p = distortion_probe(&m, 3, 0, 0).unwrap();
        assert_eq!(p.best_start, usize::MAX);
        assert!((p.distortion - 1.0).abs() < 1e-6);
    }

    #[test]
    fn distortion_k13_09_above_one() {
        let h = SnowflakeFunction::power(0.9).unwrap();
        let s = apply_snowflake(&k13(), &h).unwrap();
        let p = distortion_probe(&s, 3, 4, 7).unwrap();
        assert!(p.distortion > 1.0 + 1e-4, "distortion {}", p.distortion);
        assert!(p.distortion < 1.5, "optimizer should get close: {}", p.distortion);
    }

    #[test]
    fn distortion_restart_determinism() {
        let h = SnowflakeFunction::power(0.9).unwrap();
        let s = apply_snowflake(&k13(), &h).unwrap();
        let a = distortion_probe(&s, 2, 3, 123).unwrap();
        let b = distortion_probe(&s, 2, 3, 123).unwrap();
        assert_eq!(a.distortion, b.distortion);
        assert_eq!(a.best_start, b.best_start);
    }

    #[test]
    fn simplex_points_metric_roundtrip() {
        let pts = simplex_base_point(4);
        let m = metric_from_points(&PointConfig::euclidean(pts).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((m.dist(i, j) - 1.0).abs() < 1e-15);
                }
            }
        }
    }
}

#[cfg(test)]
mod convergence_tests {
    use super::*;

    #[test]
    fn newton_residual_decreases_after_first_step() {
        // Gauss-Newton contract: warn, don't fail, on non-monotone steps.
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for run in 0..10 {
            let mut rho = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = 1.0 + (rng.random::<f64>() - 0.5) * 0.02;
                    rho[(i, j)] = v;
                    rho[(j, i)] = v;
                }
            }
            let st = newton_embed(&rho, 50, 1e-12, 0.05).unwrap();
            for w in st.residual_history.windows(2).skip(1) {
                if w[1] > w[0] {
                    eprintln!(
                        "warning: run {run}: non-monotone residual step {} -> {}",
                        w[0], w[1]
                    );
                }
            }
            assert!(st.residual_sq < 1e-12);
        }
    }
}
