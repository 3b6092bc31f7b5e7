//! Finite metric spaces as labeled dense distance matrices, with axiom
//! validation, snowflake/de-snowflake transforms, and construction from
//! point configurations.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::norms::Norm;
use crate::snowflake::{HFunction, SnowflakeFunction};

/// Default absolute tolerance for metric-axiom validation. Distances are
/// assumed O(1)..O(1e3); all slack checks are absolute.
pub const TOL_METRIC: f64 = 1e-9;

/// A finite metric space: labels plus a symmetric distance matrix with zero
/// diagonal and positive off-diagonal entries.
#[derive(Clone, Debug)]
pub struct FiniteMetric {
    labels: Vec<String>,
    dist: DMatrix<f64>,
}

/// Outcome of a full axiom scan over a candidate distance matrix.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub is_metric: bool,
    /// Global minimizer of d(i,j) + d(j,k) - d(i,k) over ordered triples of
    /// distinct indices, with its slack. None for fewer than 3 points.
    pub worst_triangle: Option<(usize, usize, usize, f64)>,
    /// max |d(i,j) - d(j,i)|.
    pub worst_symmetry_gap: f64,
    /// max |d(i,i)|.
    pub worst_diagonal: f64,
    /// min off-diagonal entry (f64::INFINITY for a single point).
    pub min_off_diagonal: f64,
}

/// A violated triangle: d(i,k) > d(i,j) + d(j,k) with the three distances.
#[derive(Clone, Debug)]
pub struct TriangleViolation {
    pub via: usize,
    pub i: usize,
    pub k: usize,
    pub d_ik: f64,
    pub d_ij: f64,
    pub d_jk: f64,
    /// d(i,j) + d(j,k) - d(i,k), negative.
    pub slack: f64,
}

/// Result of de-snowflaking with `require_metric`: either the pulled-back
/// metric or the triple witnessing that the pullback is not a metric.
#[derive(Clone, Debug)]
pub enum Desnowflaked {
    Metric(FiniteMetric),
    Violation(TriangleViolation),
}

/// A finite point set paired with the norm measuring it.
#[derive(Clone, Debug)]
pub struct PointConfig {
    pub points: Vec<DVector<f64>>,
    pub norm: Norm,
}

impl PointConfig {
    pub fn new(points: Vec<DVector<f64>>, norm: Norm) -> Result<Self> {
        let dim = norm.dim();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Structural(format!(
                "point dimension does not match norm dimension {dim}"
            )));
        }
        if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Structural("points must have finite coordinates".into()));
        }
        Ok(PointConfig { points, norm })
    }

    pub fn euclidean(points: Vec<DVector<f64>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        Self::new(points, Norm::l2(dim))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl FiniteMetric {
    /// Build from labels and a distance matrix, enforcing the structural
    /// invariants (shape, finiteness, zero diagonal, symmetry, positivity)
    /// at `TOL_METRIC`. Triangle validity is not enforced here; use
    /// [`validate_metric`] or [`FiniteMetric::validate`].
    pub fn new(labels: Vec<String>, dist: DMatrix<f64>) -> Result<Self> {
        if dist.nrows() != dist.ncols() {
            return Err(Error::Structural(format!(
                "distance matrix is {}x{}, not square",
                dist.nrows(),
                dist.ncols()
            )));
        }
        if labels.len() != dist.nrows() {
            return Err(Error::Structural(format!(
                "{} labels for {} rows",
                labels.len(),
                dist.nrows()
            )));
        }
        if dist.iter().any(|x| !x.is_finite()) {
            return Err(Error::Structural("distance matrix has non-finite entries".into()));
        }
        let n = dist.nrows();
        for i in 0..n {
            if dist[(i, i)].abs() > TOL_METRIC {
                return Err(Error::Structural(format!(
                    "diagonal entry d({i},{i}) = {} is not zero",
                    dist[(i, i)]
                )));
            }
            for j in 0..n {
                if i != j && dist[(i, j)] <= 0.0 {
                    return Err(Error::Structural(format!(
                        "off-diagonal entry d({i},{j}) = {} is not positive",
                        dist[(i, j)]
                    )));
                }
                if (dist[(i, j)] - dist[(j, i)]).abs() > TOL_METRIC {
                    return Err(Error::Structural(format!(
                        "asymmetry at ({i},{j}): {} vs {}",
                        dist[(i, j)],
                        dist[(j, i)]
                    )));
                }
            }
        }
        Ok(FiniteMetric { labels, dist })
    }

    /// Convenience constructor with labels p0, p1, ...
    pub fn from_matrix(dist: DMatrix<f64>) -> Result<Self> {
        let labels = (0..dist.nrows()).map(|i| format!("p{i}")).collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.nrows() == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        validate_metric(&self.dist, tol).expect("constructed metric is structurally valid")
    }

    /// Relabel by a permutation (used by the relabeling-invariance tests).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        if perm.len() != n {
            return Err(Error::Structural("permutation length mismatch".into()));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Structural("not a permutation".into()));
            }
            seen[p] = true;
        }
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let dist = DMatrix::from_fn(n, n, |i, j| self.dist[(perm[i], perm[j])]);
        FiniteMetric::new(labels, dist)
    }
}

/// Scan a candidate distance matrix for the metric axioms. The worst
/// triangle is the global minimizer of d(i,j) + d(j,k) - d(i,k) over ordered
/// distinct triples (ties broken by lexicographic (i, j, k)).
pub fn validate_metric(dist: &DMatrix<f64>, tol_metric: f64) -> Result<ValidationReport> {
    if dist.nrows() != dist.ncols() {
        return Err(Error::Structural(format!(
            "matrix is {}x{}, not square",
            dist.nrows(),
            dist.ncols()
        )));
    }
    if dist.iter().any(|x| !x.is_finite()) {
        return Err(Error::Structural("matrix has non-finite entries".into()));
    }
    let n = dist.nrows();
    let mut worst_symmetry_gap = 0.0f64;
    let mut worst_diagonal = 0.0f64;
    let mut min_off_diagonal = f64::INFINITY;
    for i in 0..n {
        worst_diagonal = worst_diagonal.max(dist[(i, i)].abs());
        for j in 0..n {
            if i != j {
                worst_symmetry_gap = worst_symmetry_gap.max((dist[(i, j)] - dist[(j, i)]).abs());
                min_off_diagonal = min_off_diagonal.min(dist[(i, j)]);
            }
        }
    }

    // Triangle scan parallelized over the "via" vertex j; the reduction is
    // a min with lexicographic tie-break, so the result is schedule
    // independent.
    let worst_triangle = if n >= 3 {
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut best: Option<(f64, (usize, usize, usize))> = None;
                for i in 0..n {
                    if i == j {
                        continue;
                    }
                    for k in 0..n {
                        if k == i || k == j {
                            continue;
                        }
                        let slack = dist[(i, j)] + dist[(j, k)] - dist[(i, k)];
                        let cand = (slack, (i, j, k));
                        best = Some(match best {
                            None => cand,
                            Some(b) => {
                                if cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1) {
                                    cand
                                } else {
                                    b
                                }
                            }
                        });
                    }
                }
                best
            })
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (None, x) | (x, None) => x,
                    (Some(a), Some(b)) => {
                        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                            Some(b)
                        } else {
                            Some(a)
                        }
                    }
                },
            )
            .map(|(slack, (i, j, k))| (i, j, k, slack))
    } else {
        None
    };

    let triangles_ok = worst_triangle.map(|t| t.3 >= -tol_metric).unwrap_or(true);
    let is_metric = triangles_ok
        && worst_symmetry_gap <= tol_metric
        && worst_diagonal <= tol_metric
        && (n < 2 || min_off_diagonal > 0.0);

    Ok(ValidationReport {
        is_metric,
        worst_triangle,
        worst_symmetry_gap,
        worst_diagonal,
        min_off_diagonal,
    })
}

/// Apply h entrywise to the off-diagonal distances. h must satisfy S1 and S2
/// (concavity is enough to keep the triangle inequality).
pub fn apply_snowflake(m: &FiniteMetric, h: &SnowflakeFunction) -> Result<FiniteMetric> {
    if h.eval(0.0) != 0.0 {
        return Err(Error::RejectedInput("h(0) != 0 (S1 fails)".into()));
    }
    let n = m.len();
    let dist = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { h.eval(m.dist(i, j)) });
    FiniteMetric::new(m.labels().to_vec(), dist)
}

/// Apply h^{-1} entrywise. With `require_metric`, the result is validated
/// and a violated triple is returned as the refutation witness instead of a
/// metric.
pub fn desnowflake(
    m: &FiniteMetric,
    h: &SnowflakeFunction,
    require_metric: bool,
) -> Result<Desnowflaked> {
    let n = m.len();
    let mut dist = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[(i, j)] = h.inverse(m.dist(i, j))?;
            }
        }
    }
    if require_metric {
        let report = validate_metric(&dist, TOL_METRIC)?;
        if let Some((i, j, k, slack)) = report.worst_triangle {
            if slack < -TOL_METRIC {
                return Ok(Desnowflaked::Violation(TriangleViolation {
                    via: j,
                    i,
                    k,
                    d_ik: dist[(i, k)],
                    d_ij: dist[(i, j)],
                    d_jk: dist[(j, k)],
                    slack,
                }));
            }
        }
    }
    Ok(Desnowflaked::Metric(FiniteMetric::new(
        m.labels().to_vec(),
        dist,
    )?))
}

/// Pairwise-distance metric of a point configuration under its norm.
pub fn metric_from_points(p: &PointConfig) -> Result<FiniteMetric> {
    let n = p.len();
    let mut dist = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = p.norm.eval(&(&p.points[i] - &p.points[j]))?;
            if d <= 0.0 {
                return Err(Error::DegenerateInput(format!(
                    "points {i} and {j} coincide"
                )));
            }
            dist[(i, j)] = d;
            dist[(j, i)] = d;
        }
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    FiniteMetric::new(labels, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    pub(crate) fn k13_path_metric() -> FiniteMetric {
        // Star K_{1,3}: center c at index 0, leaves at 1..3. Path metric:
        // center-leaf 1, leaf-leaf 2.
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
        FiniteMetric::new(
            vec!["c".into(), "a".into(), "b".into(), "d".into()],
            d,
        )
        .unwrap()
    }

    #[test]
    fn single_point_is_metric() {
        let r = validate_metric(&DMatrix::from_row_slice(1, 1, &[0.0]), TOL_METRIC).unwrap();
        assert!(r.is_metric);
        assert!(r.worst_triangle.is_none());
    }

    #[test]
    fn k13_is_metric() {
        let m = k13_path_metric();
        let r = m.validate(TOL_METRIC);
        assert!(r.is_metric);
        // Tight triangles: 1 + 1 - 2 = 0.
        assert_eq!(r.worst_triangle.unwrap().3, 0.0);
    }

    #[test]
    fn forced_violation() {
        let d = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0],
        );
        let r = validate_metric(&d, TOL_METRIC).unwrap();
        assert!(!r.is_metric);
        let (_, _, _, slack) = r.worst_triangle.unwrap();
        assert_eq!(slack, -3.0);
    }

    #[test]
    fn structural_rejections() {
        let nonsquare = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        assert!(validate_metric(&nonsquare, TOL_METRIC).is_err());
        let nan = DMatrix::from_row_slice(2, 2, &[0.0, f64::NAN, f64::NAN, 0.0]);
        assert!(validate_metric(&nan, TOL_METRIC).is_err());
    }

    #[test]
    fn snowflake_examples() {
        let two = FiniteMetric::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 4.0, 4.0, 0.0]))
            .unwrap();
        let h = SnowflakeFunction::power(0.5).unwrap();
        let s = apply_snowflake(&two, &h).unwrap();
        assert_eq!(s.dist(0, 1), 2.0);

        let ident = SnowflakeFunction::power(1.0).unwrap();
        let same = apply_snowflake(&two, &ident).unwrap();
        assert_eq!(same.dist(0, 1), 4.0);

        let k13 = k13_path_metric();
        let h9 = SnowflakeFunction::power(0.9).unwrap();
        let s = apply_snowflake(&k13, &h9).unwrap();
        assert_eq!(s.dist(0, 1), 1.0);
        assert!((s.dist(1, 2) - 2f64.powf(0.9)).abs() < 1e-15);
        assert!((s.dist(1, 2) - 1.866065983073615).abs() < 1e-12);
        assert!(s.validate(TOL_METRIC).is_metric);
    }

    #[test]
    fn desnowflake_examples() {
        let h = SnowflakeFunction::power(0.5).unwrap();
        // Collinear 0, 1, 2 on a line: Euclidean entries {1, 1, 2}.
        let d =
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
        let m = FiniteMetric::from_matrix(d).unwrap();
        match desnowflake(&m, &h, false).unwrap() {
            Desnowflaked::Metric(pulled) => {
                assert_eq!(pulled.dist(0, 2), 4.0);
                assert_eq!(pulled.dist(0, 1), 1.0);
            }
            _ => panic!("no validation requested"),
        }
        match desnowflake(&m, &h, true).unwrap() {
            Desnowflaked::Violation(v) => {
                assert!(v.slack < -1.9 && v.slack > -2.1);
                assert_eq!(v.d_ik, 4.0);
            }
            _ => panic!("collinear triple must violate after pullback"),
        }
    }

    #[test]
    fn points_to_metric() {
        let p = PointConfig::euclidean(vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.0, 1.0],
        ])
        .unwrap();
        let m = metric_from_points(&p).unwrap();
        assert_eq!(m.dist(0, 1), 1.0);
        assert_eq!(m.dist(0, 2), 1.0);
        assert!((m.dist(1, 2) - 2f64.sqrt()).abs() < 1e-15);

        let p = PointConfig::new(
            vec![
                dvector![0.0, 0.0],
                dvector![1.0, 0.0],
                dvector![0.0, 1.0],
            ],
            Norm::linf(2),
        )
        .unwrap();
        let m = metric_from_points(&p).unwrap();
        assert_eq!(m.dist(0, 1), 1.0);
        assert_eq!(m.dist(0, 2), 1.0);
        assert_eq!(m.dist(1, 2), 1.0);

        // Simplex q_j = e_j / sqrt(2): all pairwise distances 1.
        let n = 5;
        let pts: Vec<_> = (0..n)
            .map(|j| {
                let mut v = DVector::zeros(n);
                v[j] = 1.0 / 2f64.sqrt();
                v
            })
            .collect();
        let m = metric_from_points(&PointConfig::euclidean(pts).unwrap()).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert!((m.dist(i, j) - 1.0).abs() < 1e-15);
                }
            }
        }

        // Duplicates rejected.
        let dup = PointConfig::euclidean(vec![dvector![1.0, 2.0], dvector![1.0, 2.0]]).unwrap();
        assert!(matches!(
            metric_from_points(&dup),
            Err(Error::DegenerateInput(_))
        ));
    }
}
