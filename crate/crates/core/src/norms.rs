//! Finite-dimensional norms, John ellipsoids, inner-product angles, and the
//! dimension-only constants used by the geometric lemmas.
//!
//! Every norm here gets an inner product <u,v> = u^T A v whose unit ball B
//! satisfies the sandwich B ⊂ B_V ⊂ sqrt(n) B, where B_V is the norm ball.
//! For l_p balls the maximal inscribed ellipsoid is a round ball by signed
//! permutation symmetry and is written down in closed form; for polytopal
//! balls it is computed from the facet representation by the multiplicative
//! weights iteration for the D-optimal design problem (the dual of the
//! maximal inscribed ellipsoid for a symmetric polytope).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Point = DVector<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    /// Canonical facet functionals, one per +/- pair: ball = {x : |<f,x>| <= 1}.
    facets: Vec<DVector<f64>>,
    /// Original vertices when constructed from a vertex list (kept for
    /// serialization).
    vertices: Option<Vec<DVector<f64>>>,
}

impl Polytope {
    pub fn facets(&self) -> &[DVector<f64>] {
        &self.facets
    }
    pub fn vertices(&self) -> Option<&[DVector<f64>]> {
        self.vertices.as_deref()
    }
}

#[derive(Clone, Debug)]
pub enum Norm {
    Lp { p: LpExponent, dim: usize },
    Polytopal(Polytope),
    Ellipsoidal { a: DMatrix<f64> },
}

impl Norm {
    pub fn lp(p: f64, dim: usize) -> Result<Norm> {
        if !(p >= 1.0) {
            return Err(Error::UnsupportedNorm(format!("p = {p} < 1 is not a norm")));
        }
        if dim == 0 {
            return Err(Error::UnsupportedNorm("dimension 0".into()));
        }
        Ok(Norm::Lp {
            p: if p.is_infinite() {
                LpExponent::Infinity
            } else {
                LpExponent::Finite(p)
            },
            dim,
        })
    }

    pub fn l1(dim: usize) -> Norm {
        Norm::lp(1.0, dim).unwrap()
    }
    pub fn l2(dim: usize) -> Norm {
        Norm::lp(2.0, dim).unwrap()
    }
    pub fn linf(dim: usize) -> Norm {
        Norm::Lp {
            p: LpExponent::Infinity,
            dim,
        }
    }

    /// Polytopal norm from a symmetric facet-functional list. The list is
    /// closed under negation automatically and deduplicated; facets must
    /// span R^n so the ball is bounded.
    pub fn from_facets(dim: usize, facets: Vec<DVector<f64>>) -> Result<Norm> {
        if facets.is_empty() {
            return Err(Error::UnsupportedNorm("empty facet list".into()));
        }
        if facets.iter().any(|f| f.len() != dim) {
            return Err(Error::Structural("facet dimension mismatch".into()));
        }
        let mut canon: Vec<DVector<f64>> = Vec::new();
        for f in facets {
            if f.iter().all(|x| *x == 0.0) {
                return Err(Error::Structural("zero facet functional".into()));
            }
            if f.iter().any(|x| !x.is_finite()) {
                return Err(Error::Structural("non-finite facet functional".into()));
            }
            let g = canonical_sign(&f);
            if !canon.iter().any(|c| (c - &g).amax() <= 1e-12 * g.amax()) {
                canon.push(g);
            }
        }
        let mut span = DMatrix::zeros(canon.len(), dim);
        for (i, f) in canon.iter().enumerate() {
            span.row_mut(i).copy_from(&f.transpose());
        }
        if span.rank(1e-12) < dim {
            return Err(Error::UnsupportedNorm(
                "facets do not span; ball is unbounded (non-full-dimensional dual)".into(),
            ));
        }
        Ok(Norm::Polytopal(Polytope {
            dim,
            facets: canon,
            vertices: None,
        }))
    }

    /// Polytopal norm from a symmetric vertex list in the plane. Vertices
    /// are closed under negation, hull-reduced, and converted to facets by
    /// polarity.
    pub fn from_vertices(dim: usize, vertices: Vec<DVector<f64>>) -> Result<Norm> {
        if dim != 2 {
            return Err(Error::UnsupportedNorm(
                "vertex-form polytopal norms are supported in dimension 2 only; \
                 supply facets for higher dimensions"
                    .into(),
            ));
        }
        if vertices.iter().any(|v| v.len() != 2) {
            return Err(Error::Structural("vertex dimension mismatch".into()));
        }
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for v in &vertices {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Structural("non-finite vertex".into()));
            }
            pts.push((v[0], v[1]));
            pts.push((-v[0], -v[1]));
        }
        let hull = convex_hull_2d(&mut pts);
        if hull.len() < 3 {
            return Err(Error::UnsupportedNorm(
                "vertex set is not full-dimensional in the plane".into(),
            ));
        }
        // Polarity: the facet through consecutive hull vertices a, b is the
        // functional f with <f,a> = <f,b> = 1.
        let mut facets = Vec::new();
        for i in 0..hull.len() {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            let det = a.0 * b.1 - a.1 * b.0;
            if det.abs() < 1e-14 {
                return Err(Error::UnsupportedNorm(
                    "origin lies on a facet line; vertex set is not symmetric around 0".into(),
                ));
            }
            let f = DVector::from_vec(vec![(b.1 - a.1) / det, (a.0 - b.0) / det]);
            facets.push(f);
        }
        let norm = Norm::from_facets(2, facets)?;
        if let Norm::Polytopal(mut p) = norm {
            p.vertices = Some(vertices);
            Ok(Norm::Polytopal(p))
        } else {
            unreachable!()
        }
    }

    /// Norm whose unit ball is {x : x^T A x <= 1} for symmetric
    /// positive-definite A.
    pub fn ellipsoidal(a: DMatrix<f64>) -> Result<Norm> {
        Ellipsoid::new(a.clone())?;
        Ok(Norm::Ellipsoidal { a })
    }

    pub fn dim(&self) -> usize {
        match self {
            Norm::Lp { dim, .. } => *dim,
            Norm::Polytopal(p) => p.dim,
            Norm::Ellipsoidal { a } => a.nrows(),
        }
    }

    /// Minkowski functional of the unit ball.
    pub fn eval(&self, v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::Structural(format!(
                "vector dimension {} does not match norm dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(match self {
            Norm::Lp { p, .. } => match p {
                LpExponent::Infinity => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                LpExponent::Finite(p) => {
                    if *p == 1.0 {
                        v.iter().map(|x| x.abs()).sum()
                    } else if *p == 2.0 {
                        v.norm()
                    } else {
                        v.iter().map(|x| x.abs().powf(*p)).sum::<f64>().powf(1.0 / p)
                    }
                }
            },
            Norm::Polytopal(poly) => poly
                .facets
                .iter()
                .fold(0.0f64, |m, f| m.max(f.dot(v).abs())),
            Norm::Ellipsoidal { a } => (v.transpose() * a * v)[(0, 0)].max(0.0).sqrt(),
        })
    }
}

fn canonical_sign(f: &DVector<f64>) -> DVector<f64> {
    for x in f.iter() {
        if *x > 0.0 {
            return f.clone();
        }
        if *x < 0.0 {
            return -f.clone();
        }
    }
    f.clone()
}

/// Andrew monotone chain; returns hull in counterclockwise order.
fn convex_hull_2d(pts: &mut Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
    let n = pts.len();
    if n < 3 {
        return pts.clone();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-14 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-14
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Inner-product structure {x : x^T A x <= 1} with A symmetric positive
/// definite. Supplies the angles and projections used everywhere.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    a: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(a: DMatrix<f64>) -> Result<Ellipsoid> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::Structural("ellipsoid matrix must be square".into()));
        }
        let scale = a.amax().max(1.0);
        if (&a - a.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Structural("ellipsoid matrix is not symmetric".into()));
        }
        let sym = (a.clone() + a.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|l| *l <= 0.0) {
            return Err(Error::Structural(
                "ellipsoid matrix is not positive definite".into(),
            ));
        }
        Ok(Ellipsoid { a: sym })
    }

    pub fn identity(dim: usize) -> Ellipsoid {
        Ellipsoid {
            a: DMatrix::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.a * v)[(0, 0)]
    }

    pub fn length(&self, v: &DVector<f64>) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Angle between two vectors in [0, pi], computed as
    /// atan2(sqrt(<u,u><v,v> - <u,v>^2), <u,v>) so that exactly collinear
    /// opposite vectors report exactly pi.
    pub fn angle(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        let uu = self.inner(u, u);
        let vv = self.inner(v, v);
        if uu <= 0.0 || vv <= 0.0 {
            return Err(Error::Domain("angle of a zero vector".into()));
        }
        let uv = self.inner(u, v);
        let gram = (uu * vv - uv * uv).max(0.0);
        Ok(gram.sqrt().atan2(uv))
    }

    /// Angle at apex y between x and z.
    pub fn angle_at(&self, apex: &Point, x: &Point, z: &Point) -> Result<f64> {
        self.angle(&(x - apex), &(z - apex))
    }

    /// Orthogonal (in this inner product) projection of z onto the line
    /// through x and y.
    pub fn project_to_line(&self, x: &Point, y: &Point, z: &Point) -> Result<Point> {
        let d = y - x;
        let dd = self.inner(&d, &d);
        if dd <= 0.0 {
            return Err(Error::Domain("projection needs x != y".into()));
        }
        let t = self.inner(&(z - x), &d) / dd;
        Ok(x + d * t)
    }
}

/// John ellipsoid of a supported norm, scaled so B ⊂ B_V ⊂ sqrt(n) B.
pub fn john_ellipsoid(norm: &Norm) -> Result<Ellipsoid> {
    let n = norm.dim();
    match norm {
        Norm::Lp { p, .. } => {
            // Signed-permutation symmetry forces a round ball; its radius is
            // the in-radius min(1, n^{1/2 - 1/p}).
            let inv_p = match p {
                LpExponent::Infinity => 0.0,
                LpExponent::Finite(p) => 1.0 / p,
            };
            let r = 1f64.min((n as f64).powf(0.5 - inv_p));
            Ok(Ellipsoid {
                a: DMatrix::identity(n, n) / (r * r),
            })
        }
        Norm::Ellipsoidal { a } => Ellipsoid::new(a.clone()),
        Norm::Polytopal(poly) => {
            if n > 8 {
                return Err(Error::UnsupportedNorm(
                    "polytopal John ellipsoids supported up to dimension 8".into(),
                ));
            }
            john_of_facets(n, &poly.facets)
        }
    }
}

/// D-optimal design weights on the facet functionals: maximize
/// log det sum_i u_i f_i f_i^T over the simplex. At the optimum the maximal
/// inscribed ellipsoid is {x : x^T (n M) x <= 1} with M the weighted moment
/// matrix; the result is rescaled so the inner inclusion holds exactly.
fn john_of_facets(n: usize, facets: &[DVector<f64>]) -> Result<Ellipsoid> {
    let m = facets.len();
    let mut u = vec![1.0 / m as f64; m];
    let nf = n as f64;
    let tol = 1e-13;
    let mut g = vec![0.0f64; m];
    for _ in 0..200_000 {
        let mut moment = DMatrix::zeros(n, n);
        for (w, f) in u.iter().zip(facets) {
            moment += f * f.transpose() * *w;
        }
        let minv = moment.clone().try_inverse().ok_or_else(|| {
            Error::UnsupportedNorm("singular moment matrix; degenerate facet set".into())
        })?;
        let mut k = 0;
        let mut gmax = f64::MIN;
        for (i, f) in facets.iter().enumerate() {
            g[i] = (f.transpose() * &minv * f)[(0, 0)];
            if g[i] > gmax {
                gmax = g[i];
                k = i;
            }
        }
        if gmax <= nf * (1.0 + tol) {
            break;
        }
        let lambda = (gmax - nf) / (nf * (gmax - 1.0));
        for w in u.iter_mut() {
            *w *= 1.0 - lambda;
        }
        u[k] += lambda;
    }
    let mut moment = DMatrix::zeros(n, n);
    for (w, f) in u.iter().zip(facets) {
        moment += f * f.transpose() * *w;
    }
    let mut a = moment * nf;
    // Exact inner inclusion: shrink until max_i f^T A^{-1} f <= 1.
    let ainv = a.clone().try_inverse().ok_or_else(|| {
        Error::UnsupportedNorm("singular John matrix; degenerate facet set".into())
    })?;
    let kappa = facets
        .iter()
        .map(|f| (f.transpose() * &ainv * f)[(0, 0)])
        .fold(f64::MIN, f64::max);
    if kappa > 1.0 {
        a *= kappa;
    }
    Ellipsoid::new(a)
}

/// Constants depending only on the dimension, used by the two geometric
/// lemmas: K = 2 sqrt(n); cone opening theta = arcsin(1/(2 sqrt(n))) and
/// height ell = 1/(2 sqrt(n)) read off the John sandwich; C = C_theta =
/// (4 cos theta + 2)/sin theta; epsilon = the largest grid angle <= pi/4
/// with sin(theta) cos(eps) - 2 cos(theta) sin(eps) > sin(theta)/2.
#[derive(Clone, Copy, Debug)]
pub struct LemmaConstants {
    pub n: usize,
    pub theta_cone: f64,
    pub ell_cone: f64,
    pub epsilon: f64,
    pub c_bound: f64,
    pub k_bound: f64,
}

pub fn lemma_constants(n: usize) -> LemmaConstants {
    assert!(n >= 1, "dimension must be positive");
    let sqrt_n = (n as f64).sqrt();
    let k_bound = 2.0 * sqrt_n;
    let sin_theta = 1.0 / (2.0 * sqrt_n);
    let theta = sin_theta.asin();
    let (sin_t, cos_t) = theta.sin_cos();
    let c_bound = (4.0 * cos_t + 2.0) / sin_t;
    // Largest grid epsilon <= pi/4 keeping the cone margin above half.
    let steps = 4096;
    let mut epsilon = 0.0;
    for i in (1..=steps).rev() {
        let eps = std::f64::consts::FRAC_PI_4 * i as f64 / steps as f64;
        if sin_t * eps.cos() - 2.0 * cos_t * eps.sin() > 0.5 * sin_t {
            epsilon = eps;
            break;
        }
    }
    LemmaConstants {
        n,
        theta_cone: theta,
        ell_cone: sin_theta,
        epsilon,
        c_bound,
        k_bound,
    }
}

/// Outcome of a single lemma check on a concrete triple.
#[derive(Clone, Debug)]
pub enum CheckOutcome {
    Applicable {
        lhs: f64,
        rhs: f64,
        /// rhs - lhs; the lemma asserts this is nonnegative.
        slack: f64,
    },
    /// Precondition violated; not an error, just out of the lemma's scope.
    Inapplicable { reason: String },
}

impl CheckOutcome {
    pub fn violated(&self, tol: f64) -> bool {
        matches!(self, CheckOutcome::Applicable { slack, .. } if *slack < -tol)
    }
}

#[derive(Clone, Debug)]
pub enum AngleComparisonOutcome {
    Applicable {
        ratio: f64,
        norm_ratio: f64,
        /// ratio - norm_ratio / K >= 0 expected.
        slack_lower: f64,
        /// K * norm_ratio - ratio >= 0 expected.
        slack_upper: f64,
    },
    Inapplicable { reason: String },
}

impl AngleComparisonOutcome {
    pub fn violated(&self, tol: f64) -> bool {
        matches!(self, AngleComparisonOutcome::Applicable { slack_lower, slack_upper, .. }
            if *slack_lower < -tol || *slack_upper < -tol)
    }
}

/// A norm bundled with its John inner product and lemma constants; the
/// working context for angle searches and refutations.
#[derive(Clone, Debug)]
pub struct JohnSpace {
    pub norm: Norm,
    pub john: Ellipsoid,
    pub constants: LemmaConstants,
}

impl JohnSpace {
    /// Build and numerically validate the sandwich and the cone containment
    /// on 10^4 sampled directions, per the lemma constants' contract.
    pub fn new(norm: Norm) -> Result<JohnSpace> {
        let space = Self::new_unvalidated(norm)?;
        let sandwich = validate_sandwich(&space.norm, &space.john, 10_000, 0x5eed)?;
        if sandwich.max_inner_violation > 1e-8 || sandwich.max_outer_violation > 1e-8 {
            return Err(Error::UnsupportedNorm(format!(
                "John sandwich violated: inner {:.3e}, outer {:.3e}",
                sandwich.max_inner_violation, sandwich.max_outer_violation
            )));
        }
        let cones = validate_cones(&space.norm, &space.john, &space.constants, 10_000, 0xc0e)?;
        if cones.max_inner_violation > 1e-8 || cones.max_outer_violation > 1e-8 {
            return Err(Error::UnsupportedNorm(format!(
                "cone containment violated: inner {:.3e}, outer {:.3e}",
                cones.max_inner_violation, cones.max_outer_violation
            )));
        }
        Ok(space)
    }

    pub fn new_unvalidated(norm: Norm) -> Result<JohnSpace> {
        let john = john_ellipsoid(&norm)?;
        let constants = lemma_constants(norm.dim());
        Ok(JohnSpace {
            norm,
            john,
            constants,
        })
    }

    /// |  ||x-z|| - ||x-z'||  |  <=  C ||x-z'|| * angle_x(y, z), applicable
    /// when the angle at x is below epsilon.
    pub fn check_close_to_euclidean(&self, x: &Point, y: &Point, z: &Point) -> Result<CheckOutcome> {
        let angle = self.john.angle_at(x, y, z)?;
        if angle >= self.constants.epsilon {
            return Ok(CheckOutcome::Inapplicable {
                reason: format!(
                    "angle at x is {angle:.6}, not below epsilon = {:.6}",
                    self.constants.epsilon
                ),
            });
        }
        let zp = self.john.project_to_line(x, y, z)?;
        let xz = self.norm.eval(&(z - x))?;
        let xzp = self.norm.eval(&(&zp - x))?;
        let lhs = (xz - xzp).abs();
        let rhs = self.constants.c_bound * xzp * angle;
        Ok(CheckOutcome::Applicable {
            lhs,
            rhs,
            slack: rhs - lhs,
        })
    }

    /// K^{-1} ||z'-y||/||z'-x||  <=  angle_x(y,z)/angle_y(x,z)  <=
    /// K ||z'-y||/||z'-x||, applicable when both angles lie in (0, pi/4).
    pub fn check_angle_comparison(
        &self,
        x: &Point,
        y: &Point,
        z: &Point,
    ) -> Result<AngleComparisonOutcome> {
        let ax = self.john.angle_at(x, y, z)?;
        let ay = self.john.angle_at(y, x, z)?;
        let quarter = std::f64::consts::FRAC_PI_4;
        if !(ax > 0.0 && ax < quarter && ay > 0.0 && ay < quarter) {
            return Ok(AngleComparisonOutcome::Inapplicable {
                reason: format!("angles ({ax:.6}, {ay:.6}) not both in (0, pi/4)"),
            });
        }
        let zp = self.john.project_to_line(x, y, z)?;
        let num = self.norm.eval(&(&zp - y))?;
        let den = self.norm.eval(&(&zp - x))?;
        if den == 0.0 {
            return Ok(AngleComparisonOutcome::Inapplicable {
                reason: "projection coincides with x".into(),
            });
        }
        let norm_ratio = num / den;
        let ratio = ax / ay;
        let k = self.constants.k_bound;
        Ok(AngleComparisonOutcome::Applicable {
            ratio,
            norm_ratio,
            slack_lower: ratio - norm_ratio / k,
            slack_upper: k * norm_ratio - ratio,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SandwichReport {
    /// max over samples of ||v|| - ||v||_e (inner inclusion B ⊂ B_V).
    pub max_inner_violation: f64,
    /// max over samples of ||v||_e - sqrt(n) ||v|| (outer inclusion).
    pub max_outer_violation: f64,
    pub samples: usize,
}

/// Sample random directions and check the John sandwich in both directions.
pub fn validate_sandwich(
    norm: &Norm,
    e: &Ellipsoid,
    samples: usize,
    seed: u64,
) -> Result<SandwichReport> {
    let n = norm.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_n = (n as f64).sqrt();
    let mut max_inner = f64::MIN;
    let mut max_outer = f64::MIN;
    for _ in 0..samples {
        let v = random_direction(n, &mut rng);
        let nv = norm.eval(&v)?;
        let ev = e.length(&v);
        max_inner = max_inner.max(nv - ev);
        max_outer = max_outer.max(ev - sqrt_n * nv);
    }
    Ok(SandwichReport {
        max_inner_violation: max_inner,
        max_outer_violation: max_outer,
        samples,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ConeReport {
    /// max over samples of ||q|| - 1 for q in the inward cone (should stay
    /// inside the ball).
    pub max_inner_violation: f64,
    /// max over samples of 1 - ||q|| for q in the outward cone (should stay
    /// outside).
    pub max_outer_violation: f64,
    pub samples: usize,
}

/// At sampled boundary points p of the norm ball, the inward cone of opening
/// theta and height ell stays inside the ball and the outward cone stays
/// outside. Cones are measured in the John inner product.
pub fn validate_cones(
    norm: &Norm,
    e: &Ellipsoid,
    lc: &LemmaConstants,
    samples: usize,
    seed: u64,
) -> Result<ConeReport> {
    let n = norm.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_inner = f64::MIN;
    let mut max_outer = f64::MIN;
    use rand::Rng;
    for _ in 0..samples {
        let d = random_direction(n, &mut rng);
        let p = &d / norm.eval(&d)?;
        // A-unit axis toward the origin.
        let axis = -&p / e.length(&p);
        let perp = if n == 1 {
            DVector::zeros(1)
        } else {
            // A-orthonormalize a random vector against the axis.
            let mut w = random_direction(n, &mut rng);
            let proj = e.inner(&w, &axis);
            w -= &axis * proj;
            let len = e.length(&w);
            if len < 1e-12 {
                continue;
            }
            w / len
        };
        let phi = lc.theta_cone * rng.random::<f64>();
        let s = lc.ell_cone * rng.random::<f64>();
        let dir_in = &axis * phi.cos() + &perp * phi.sin();
        let q_in = &p + dir_in * s;
        max_inner = max_inner.max(norm.eval(&q_in)? - 1.0);
        let dir_out = -&axis * phi.cos() + &perp * phi.sin();
        let q_out = &p + dir_out * s;
        max_outer = max_outer.max(1.0 - norm.eval(&q_out)?);
    }
    Ok(ConeReport {
        max_inner_violation: max_inner,
        max_outer_violation: max_outer,
        samples,
    })
}

pub(crate) fn random_direction(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    use rand::Rng;
    loop {
        let v = DVector::from_fn(n, |_, _| {
            // Box-Muller pair; only the first half is used.
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random::<f64>();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        });
        let norm = v.norm();
        if norm > 1e-9 {
            return v / norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn norm_eval_closed_forms() {
        let linf = Norm::linf(2);
        assert_eq!(linf.eval(&dvector![1.0, -0.5]).unwrap(), 1.0);
        let l1 = Norm::l1(2);
        assert_eq!(l1.eval(&dvector![1.0, 1.0]).unwrap(), 2.0);
        let l2 = Norm::l2(3);
        assert!((l2.eval(&dvector![1.0, 2.0, 2.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!(l2.eval(&dvector![1.0, 2.0]).is_err());
    }

    #[test]
    fn square_vertices_match_linf() {
        let square = Norm::from_vertices(
            2,
            vec![
                dvector![1.0, 1.0],
                dvector![1.0, -1.0],
                dvector![-1.0, 1.0],
                dvector![-1.0, -1.0],
            ],
        )
        .unwrap();
        let linf = Norm::linf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let v = random_direction(2, &mut rng) * 3.0;
            let a = square.eval(&v).unwrap();
            let b = linf.eval(&v).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{a} vs {b}");
        }
        assert!((square.eval(&dvector![1.0, -0.5]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn john_analytic_cases() {
        let e = john_ellipsoid(&Norm::l2(4)).unwrap();
        assert!((e.matrix() - DMatrix::identity(4, 4)).amax() < 1e-12);

        let e = john_ellipsoid(&Norm::linf(2)).unwrap();
        assert!((e.matrix() - DMatrix::identity(2, 2)).amax() < 1e-12);

        let e = john_ellipsoid(&Norm::l1(2)).unwrap();
        assert!((e.matrix() - DMatrix::identity(2, 2) * 2.0).amax() < 1e-12);
    }

    #[test]
    fn john_polytopal_square_and_hexagon() {
        // Square via facets = unit facet functionals e1, e2: John = disc.
        let square = Norm::from_facets(2, vec![dvector![1.0, 0.0], dvector![0.0, 1.0]]).unwrap();
        let e = john_ellipsoid(&square).unwrap();
        assert!((e.matrix() - DMatrix::identity(2, 2)).amax() < 1e-9);

        // Regular hexagon with circumradius 1: John disc of radius
        // sqrt(3)/2, i.e. A = (4/3) I.
        let verts: Vec<_> = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI / 3.0 * k as f64;
                dvector![t.cos(), t.sin()]
            })
            .collect();
        let hexagon = Norm::from_vertices(2, verts).unwrap();
        let e = john_ellipsoid(&hexagon).unwrap();
        assert!(
            (e.matrix() - DMatrix::identity(2, 2) * (4.0 / 3.0)).amax() < 1e-7,
            "hexagon John matrix {:?}",
            e.matrix()
        );
        let r = validate_sandwich(&hexagon, &e, 2000, 3).unwrap();
        assert!(r.max_inner_violation <= 1e-8 && r.max_outer_violation <= 1e-8);
    }

    #[test]
    fn angles_and_projection() {
        let e = Ellipsoid::identity(2);
        let ang = e
            .angle(&dvector![1.0, 0.0], &dvector![0.0, 1.0])
            .unwrap();
        assert!((ang - std::f64::consts::FRAC_PI_2).abs() < 1e-15);

        // Exactly pi for opposite collinear vectors, no tolerance.
        let apex = dvector![0.0, 0.0];
        let ang = e
            .angle_at(&apex, &dvector![1.0, 0.0], &dvector![-1.0, 0.0])
            .unwrap();
        assert_eq!(ang, std::f64::consts::PI);

        let a = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let e = Ellipsoid::new(a).unwrap();
        let ang = e.angle(&dvector![1.0, 0.0], &dvector![1.0, 1.0]).unwrap();
        let expect = (4.0f64 / (2.0 * 5.0f64.sqrt())).acos();
        assert!((ang - expect).abs() < 1e-12);
        assert!((ang - 0.46365).abs() < 1e-4);

        assert!(e.angle(&dvector![0.0, 0.0], &dvector![1.0, 0.0]).is_err());

        let e = Ellipsoid::identity(2);
        let zp = e
            .project_to_line(&dvector![0.0, 0.0], &dvector![2.0, 0.0], &dvector![1.0, 5.0])
            .unwrap();
        assert!((zp - dvector![1.0, 0.0]).amax() < 1e-15);

        // z on the line projects to itself.
        let z = dvector![3.5, 0.0];
        let zp = e
            .project_to_line(&dvector![0.0, 0.0], &dvector![2.0, 0.0], &z)
            .unwrap();
        assert!((&zp - &z).amax() < 1e-12);

        // Diagonal A preserves the first coordinate here.
        let e = Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
        let zp = e
            .project_to_line(&dvector![0.0, 0.0], &dvector![1.0, 0.0], &dvector![1.0, 1.0])
            .unwrap();
        assert!((zp - dvector![1.0, 0.0]).amax() < 1e-12);

        // Idempotence and orthogonality of the projection.
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let e = Ellipsoid::new(a).unwrap();
        let (x, y, z) = (dvector![0.3, -1.0], dvector![2.0, 0.7], dvector![-1.0, 4.0]);
        let zp = e.project_to_line(&x, &y, &z).unwrap();
        let zpp = e.project_to_line(&x, &y, &zp).unwrap();
        assert!((&zpp - &zp).amax() < 1e-12);
        assert!(e.inner(&(&z - &zp), &(&y - &x)).abs() < 1e-12);
    }

    #[test]
    fn lemma_constants_values() {
        let lc = lemma_constants(2);
        assert!((lc.k_bound - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((lc.theta_cone - 0.36137).abs() < 1e-4);
        let expect_c = (4.0 * lc.theta_cone.cos() + 2.0) / lc.theta_cone.sin();
        assert!((lc.c_bound - expect_c).abs() < 1e-12);
        assert!((lc.c_bound - 16.24).abs() < 0.01);
        assert!(lc.epsilon > 0.0 && lc.epsilon <= std::f64::consts::FRAC_PI_4);
        // The defining margin holds at epsilon.
        let (st, ct) = lc.theta_cone.sin_cos();
        assert!(st * lc.epsilon.cos() - 2.0 * ct * lc.epsilon.sin() > 0.5 * st);

        let lc1 = lemma_constants(1);
        assert!((lc1.k_bound - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lemma_checks_basic() {
        let space = JohnSpace::new_unvalidated(Norm::l2(2)).unwrap();
        // z exactly on the line: both sides zero.
        let x = dvector![0.0, 0.0];
        let y = dvector![1.0, 0.0];
        let z = dvector![2.0, 0.0];
        match space.check_close_to_euclidean(&x, &y, &z).unwrap() {
            CheckOutcome::Applicable { lhs, rhs, slack } => {
                assert_eq!(lhs, 0.0);
                assert_eq!(rhs, 0.0);
                assert_eq!(slack, 0.0);
            }
            _ => panic!("collinear triple is applicable"),
        }
        // Above epsilon: inapplicable, not an error.
        let z = dvector![0.0, 5.0];
        assert!(matches!(
            space.check_close_to_euclidean(&x, &y, &z).unwrap(),
            CheckOutcome::Inapplicable { .. }
        ));

        // Isoceles: ratio 1, norm ratio 1.
        let x = dvector![0.0, 0.0];
        let y = dvector![2.0, 0.0];
        let z = dvector![1.0, 0.3];
        match space.check_angle_comparison(&x, &y, &z).unwrap() {
            AngleComparisonOutcome::Applicable {
                ratio, norm_ratio, slack_lower, slack_upper, ..
            } => {
                assert!((ratio - 1.0).abs() < 1e-12);
                assert!((norm_ratio - 1.0).abs() < 1e-12);
                assert!(slack_lower > 0.0 && slack_upper > 0.0);
            }
            _ => panic!("isoceles triple is applicable"),
        }

        // Worked flat triple.
        let x = dvector![0.0, 0.0];
        let y = dvector![4.0, 0.0];
        let z = dvector![1.0, 0.2];
        match space.check_angle_comparison(&x, &y, &z).unwrap() {
            AngleComparisonOutcome::Applicable { slack_lower, slack_upper, .. } => {
                assert!(slack_lower >= 0.0 && slack_upper >= 0.0);
            }
            _ => panic!("flat triple is applicable"),
        }
    }

    #[test]
    fn validated_spaces_for_standard_norms() {
        for norm in [Norm::l1(2), Norm::l2(2), Norm::linf(2), Norm::lp(1.5, 3).unwrap()] {
            JohnSpace::new(norm).unwrap();
        }
    }

    #[test]
    fn angle_invariances() {
        let e = Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let apex = dvector![0.4, -0.2];
        let x = dvector![2.0, 1.0];
        let z = dvector![-1.0, 0.7];
        let a1 = e.angle_at(&apex, &x, &z).unwrap();
        let a2 = e.angle_at(&apex, &z, &x).unwrap();
        assert_eq!(a1, a2);
        // Translation invariance.
        let t = dvector![10.0, -3.0];
        let a3 = e
            .angle_at(&(&apex + &t), &(&x + &t), &(&z + &t))
            .unwrap();
        assert!((a1 - a3).abs() < 1e-12);
        // Scaling about the apex.
        let scale = |p: &DVector<f64>| &apex + (p - &apex) * 3.7;
        let a4 = e.angle_at(&apex, &scale(&x), &scale(&z)).unwrap();
        assert!((a1 - a4).abs() < 1e-12);
    }
}
