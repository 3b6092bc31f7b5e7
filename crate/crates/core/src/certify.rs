//! Non-embeddability certificates.
//!
//! A point set claimed to be an isometric image of a snowflaked metric space
//! pulls back to a candidate metric: d = ||.||^{1/alpha} for power
//! snowflakes, d = h^{-1}(||.||) in general. Geometry forbids large angles
//! in genuine snowflake images, so a triple with apex angle close enough to
//! pi forces the pulled-back triangle inequality to fail — a concrete,
//! independently checkable contradiction.
//!
//! Ground truth for every certificate is the direct pulled-back triangle
//! inequality; the inequality chain that explains *why* the angle threshold
//! works is attached as diagnostics, eliminating any dependence of
//! soundness on the conservative constants epsilon, C, K.

use std::collections::BTreeMap;

use crate::angles;
use crate::error::{Error, Result};
use crate::metric::PointConfig;
use crate::norms::{lemma_constants, JohnSpace, LemmaConstants, Point};
use crate::snowflake::{
    check_axioms, threshold_t, threshold_t_tilde, AxiomStatus, HFunction, ProbeGrid,
    SnowflakeFunction,
};

/// Strictness margin on all strict inequalities.
pub const STRICT_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefutationMode {
    /// Power snowflake d^alpha.
    Alpha,
    /// General h, witness spacing via T (unbounded images).
    GeneralUnbounded,
    /// General h, witness spacing via T~ (accumulating images).
    GeneralAccumulation,
}

#[derive(Clone, Debug)]
pub struct ChainStep {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs - lhs for "<=" steps, lhs - rhs for ">" steps; nonnegative when
    /// the step holds as required.
    pub slack: f64,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Thresholds {
    /// theta (alpha mode) or delta (general mode).
    pub angle_threshold: f64,
    pub epsilon: f64,
    pub c_bound: f64,
    pub k_bound: f64,
}

/// The conclusion: three pulled-back distances violating the triangle
/// inequality through the apex.
#[derive(Clone, Copy, Debug)]
pub struct PulledBackViolation {
    /// d(x, y): the long side, between the two non-apex points.
    pub d_xy: f64,
    /// d(z, x).
    pub d_zx: f64,
    /// d(z, y).
    pub d_zy: f64,
    /// d_zx + d_zy - d_xy, strictly below -STRICT_MARGIN.
    pub slack: f64,
}

#[derive(Clone, Debug)]
pub struct ViolationCertificate {
    /// Original indices: z is the apex carrying the large angle.
    pub apex: usize,
    pub x: usize,
    pub y: usize,
    pub apex_angle: f64,
    pub chain: Vec<ChainStep>,
    pub conclusion: PulledBackViolation,
    pub thresholds: Thresholds,
    pub mode: RefutationMode,
}

#[derive(Clone, Debug)]
pub enum RefutationOutcome {
    Refuted(Box<ViolationCertificate>),
    /// Explicitly not a proof of embeddability.
    NoRefutation { reason: String },
    /// The finite input cannot support the witness spacing the mode needs.
    WitnessUnavailable { reason: String },
}

impl RefutationOutcome {
    pub fn certificate(&self) -> Option<&ViolationCertificate> {
        match self {
            RefutationOutcome::Refuted(c) => Some(c),
            _ => None,
        }
    }
}

/// theta < min(epsilon, pi/4, (2 - 2^alpha) / (3 C (2K + 2^alpha))); the
/// 0.99 factor keeps the inequality strict.
pub fn theta_threshold(n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(theta_from_constants(&lemma_constants(n), alpha))
}

pub fn theta_from_constants(lc: &LemmaConstants, alpha: f64) -> f64 {
    let third = (2.0 - 2f64.powf(alpha))
        / (3.0 * lc.c_bound * (2.0 * lc.k_bound + 2f64.powf(alpha)));
    0.99 * lc
        .epsilon
        .min(std::f64::consts::FRAC_PI_4)
        .min(third)
}

/// delta = min(epsilon, pi/4, 1 / (2 C (1 + K))).
pub fn delta_threshold(n: usize) -> f64 {
    delta_from_constants(&lemma_constants(n))
}

pub fn delta_from_constants(lc: &LemmaConstants) -> f64 {
    lc.epsilon
        .min(std::f64::consts::FRAC_PI_4)
        .min(1.0 / (2.0 * lc.c_bound * (1.0 + lc.k_bound)))
}

/// A cardinality bound from a Ramsey-number provider.
#[derive(Clone, Debug)]
pub struct RamseyBound {
    pub count: usize,
    /// False for empirical/heuristic sources.
    pub certified: bool,
    pub source: String,
}

/// Supplier of angle-Ramsey numbers N(n, beta). The underlying quantities
/// are purely existential here; concrete values must come from a user table
/// or an empirical search, and uncertified sources are labeled as such.
pub trait RamseyProvider {
    fn bound(&self, dim: usize, beta: f64) -> Option<RamseyBound>;
}

/// Exact user-supplied values, keyed by dimension. An entry (beta_e, N)
/// answers every request with beta <= beta_e (an angle >= beta_e is also
/// >= beta).
#[derive(Clone, Debug, Default)]
pub struct UserTable {
    entries: BTreeMap<usize, Vec<(f64, usize)>>,
}

impl UserTable {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn insert(&mut self, dim: usize, beta: f64, count: usize) {
        self.entries.entry(dim).or_default().push((beta, count));
    }
}

impl RamseyProvider for UserTable {
    fn bound(&self, dim: usize, beta: f64) -> Option<RamseyBound> {
        let rows = self.entries.get(&dim)?;
        rows.iter()
            .filter(|(b, _)| *b >= beta)
            .map(|(_, n)| *n)
            .min()
            .map(|count| RamseyBound {
                count,
                certified: true,
                source: "user table".into(),
            })
    }
}

/// Adversarial-search lower bounds; never a certificate.
#[derive(Clone, Copy, Debug)]
pub struct EmpiricalFloorProvider {
    pub budget: usize,
    pub seed: u64,
}

impl RamseyProvider for EmpiricalFloorProvider {
    fn bound(&self, dim: usize, beta: f64) -> Option<RamseyBound> {
        let floor = angles::empirical_ramsey_floor(dim, beta, self.budget, self.seed).ok()?;
        Some(RamseyBound {
            count: floor.achieved + 1,
            certified: false,
            source: format!(
                "empirical lower bound ({} points with all angles < beta); not a certificate",
                floor.achieved
            ),
        })
    }
}

/// The N beyond which any isometric power-snowflake image must contain the
/// refuting triple: the provider's N(n, pi - theta(n, alpha)).
pub fn cardinality_bound(
    n: usize,
    alpha: f64,
    provider: Option<&dyn RamseyProvider>,
) -> Result<RamseyBound> {
    let theta = theta_threshold(n, alpha)?;
    let beta = std::f64::consts::PI - theta;
    let provider = provider.ok_or_else(|| {
        Error::BoundUnavailable(
            "no Ramsey-N provider configured; refutation degrades to search-only".into(),
        )
    })?;
    provider.bound(n, beta).ok_or_else(|| {
        Error::BoundUnavailable(format!(
            "provider has no bound for dimension {n}, beta = {beta}"
        ))
    })
}

fn step_le(label: &str, lhs: f64, rhs: f64) -> ChainStep {
    ChainStep {
        label: label.into(),
        lhs,
        rhs,
        slack: rhs - lhs,
        holds: lhs <= rhs,
    }
}

fn step_gt(label: &str, lhs: f64, rhs: f64) -> ChainStep {
    ChainStep {
        label: label.into(),
        lhs,
        rhs,
        slack: lhs - rhs,
        holds: lhs > rhs,
    }
}

struct TripleGeometry {
    apex_angle: f64,
    /// Norm lengths of the apex sides and the long side.
    xz: f64,
    yz: f64,
    xy: f64,
    /// Projection z' of z onto the line through x and y, norm distances.
    xzp: f64,
    yzp: f64,
    /// Angles at the endpoints.
    angle_x: f64,
    angle_y: f64,
}

fn triple_geometry(space: &JohnSpace, x: &Point, y: &Point, z: &Point) -> Result<TripleGeometry> {
    let e = &space.john;
    let apex_angle = e.angle_at(z, x, y)?;
    let zp = e.project_to_line(x, y, z)?;
    Ok(TripleGeometry {
        apex_angle,
        xz: space.norm.eval(&(z - x))?,
        yz: space.norm.eval(&(z - y))?,
        xy: space.norm.eval(&(y - x))?,
        xzp: space.norm.eval(&(&zp - x))?,
        yzp: space.norm.eval(&(&zp - y))?,
        angle_x: e.angle_at(x, y, z)?,
        angle_y: e.angle_at(y, x, z)?,
    })
}

/// Search a claimed isometric image of an alpha-snowflake for a refuting
/// triple: an apex angle above pi - theta whose pulled-back distances
/// d = ||.||^{1/alpha} violate the triangle inequality. The direct triangle
/// test is the ground truth; the chain is attached as explanation.
pub fn refute_alpha_embedding(cfg: &PointConfig, alpha: f64) -> Result<RefutationOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
    }
    let space = JohnSpace::new(cfg.norm.clone())?;
    let lc = &space.constants;
    let theta = theta_from_constants(lc, alpha);
    let beta = std::f64::consts::PI - theta;
    let thresholds = Thresholds {
        angle_threshold: theta,
        epsilon: lc.epsilon,
        c_bound: lc.c_bound,
        k_bound: lc.k_bound,
    };
    let pts = &cfg.points;
    let n = pts.len();
    if n < 3 {
        return Ok(RefutationOutcome::NoRefutation {
            reason: "fewer than 3 points".into(),
        });
    }
    let pull = |a: &Point, b: &Point| -> Result<f64> {
        Ok(space.norm.eval(&(a - b))?.powf(1.0 / alpha))
    };
    let mut qualifying = 0usize;
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            for k in (i + 1)..n {
                if k == j {
                    continue;
                }
                let angle = space.john.angle_at(&pts[j], &pts[i], &pts[k])?;
                if angle <= beta {
                    continue;
                }
                qualifying += 1;
                // Direct ground truth: triangle through the apex.
                let d_xy = pull(&pts[i], &pts[k])?;
                let d_zx = pull(&pts[j], &pts[i])?;
                let d_zy = pull(&pts[j], &pts[k])?;
                let slack = d_zx + d_zy - d_xy;
                if slack < -STRICT_MARGIN {
                    let chain =
                        alpha_chain(&space, alpha, theta, &pts[i], &pts[k], &pts[j])?;
                    return Ok(RefutationOutcome::Refuted(Box::new(ViolationCertificate {
                        apex: j,
                        x: i,
                        y: k,
                        apex_angle: angle,
                        chain,
                        conclusion: PulledBackViolation {
                            d_xy,
                            d_zx,
                            d_zy,
                            slack,
                        },
                        thresholds,
                        mode: RefutationMode::Alpha,
                    })));
                }
            }
        }
    }
    Ok(RefutationOutcome::NoRefutation {
        reason: if qualifying == 0 {
            format!("no apex angle exceeds pi - theta (theta = {theta:.6e}); this does NOT prove embeddability")
        } else {
            format!("{qualifying} qualifying triples, none with a direct triangle violation")
        },
    })
}

/// Diagnostic chain for the power-snowflake contradiction at a concrete
/// triple with apex z.
fn alpha_chain(
    space: &JohnSpace,
    alpha: f64,
    theta: f64,
    x: &Point,
    y: &Point,
    z: &Point,
) -> Result<Vec<ChainStep>> {
    let lc = &space.constants;
    let g = triple_geometry(space, x, y, z)?;
    let (c, k) = (lc.c_bound, lc.k_bound);
    let mut chain = vec![step_gt(
        "apex angle exceeds pi - theta",
        g.apex_angle,
        std::f64::consts::PI - theta,
    )];
    chain.push(step_le(
        "endpoint angles below theta",
        g.angle_x.max(g.angle_y),
        theta,
    ));
    chain.push(step_le(
        "close-to-line bound at x: | ||x-z|| - ||x-z'|| | <= C ||x-z'|| angle_x",
        (g.xz - g.xzp).abs(),
        c * g.xzp * g.angle_x,
    ));
    chain.push(step_le(
        "close-to-line bound at y: | ||y-z|| - ||y-z'|| | <= C ||y-z'|| angle_y",
        (g.yz - g.yzp).abs(),
        c * g.yzp * g.angle_y,
    ));
    let lhs_sub = (g.yz.powf(1.0 / alpha) + g.xz.powf(1.0 / alpha)).powf(2.0 * alpha);
    chain.push(step_le(
        "subadditivity: (||y-z||^(1/a) + ||z-x||^(1/a))^(2a) <= ||y-z||^2 + ||z-x||^2 + 2^a ||y-z|| ||z-x||",
        lhs_sub,
        g.yz * g.yz + g.xz * g.xz + 2f64.powf(alpha) * g.yz * g.xz,
    ));
    let constant = 6.0 * c * k * theta + 2f64.powf(alpha) * (1.0 + 3.0 * c * theta);
    chain.push(step_le(
        "constant bound: 6CK theta + 2^a (1 + 3C theta) < 2",
        constant,
        2.0,
    ));
    let collected =
        g.yzp * g.yzp + g.xzp * g.xzp + constant * g.yzp * g.xzp;
    chain.push(step_le(
        "collected estimate below the squared split",
        collected,
        (g.xzp + g.yzp) * (g.xzp + g.yzp),
    ));
    chain.push(step_le(
        "projection splits the long side: ||x-z'|| + ||z'-y|| = ||x-y||",
        (g.xzp + g.yzp - g.xy).abs(),
        1e-9 * g.xy.max(1.0),
    ));
    chain.push(step_gt(
        "strict pullback: ||x-y||^(1/a) > ||y-z||^(1/a) + ||z-x||^(1/a)",
        g.xy.powf(1.0 / alpha),
        g.yz.powf(1.0 / alpha) + g.xz.powf(1.0 / alpha),
    ));
    Ok(chain)
}

/// Mode selector for the general-h refutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMode {
    /// Spacing by T: suited to images spreading out to infinity.
    Unbounded,
    /// Spacing by T~: suited to images accumulating at a point.
    Accumulation,
}

/// Search a claimed isometric image of an h-snowflake for a refuting
/// triple. The witness subsequence is selected greedily to satisfy the
/// mode's spacing condition (the halving bound needs T or T~); an apex
/// angle above pi - delta inside the witness set then forces the
/// pulled-back triangle inequality to fail.
pub fn refute_h_embedding(
    cfg: &PointConfig,
    h: &SnowflakeFunction,
    mode: WitnessMode,
) -> Result<RefutationOutcome> {
    let space = JohnSpace::new(cfg.norm.clone())?;
    let lc = &space.constants;
    let delta = delta_from_constants(lc);
    let thresholds = Thresholds {
        angle_threshold: delta,
        epsilon: lc.epsilon,
        c_bound: lc.c_bound,
        k_bound: lc.k_bound,
    };
    let flags = check_axioms(h, &ProbeGrid::default())?;
    match mode {
        WitnessMode::Unbounded => {
            if flags.s4 != AxiomStatus::Holds {
                return Ok(RefutationOutcome::WitnessUnavailable {
                    reason: "h fails S4, so no finite halving threshold T exists; \
                             unbounded-mode spacing cannot be satisfied"
                        .into(),
                });
            }
        }
        WitnessMode::Accumulation => {
            if flags.s3 != AxiomStatus::Holds {
                return Ok(RefutationOutcome::WitnessUnavailable {
                    reason: "h fails S3, so no positive threshold T~ exists; \
                             accumulation-mode spacing cannot be satisfied"
                        .into(),
                });
            }
        }
    }
    let pts = &cfg.points;
    let n = pts.len();
    if n < 3 {
        return Ok(RefutationOutcome::NoRefutation {
            reason: "fewer than 3 points".into(),
        });
    }
    // Pulled-back candidate metric.
    let mut d = vec![vec![0.0f64; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let v = h.inverse(space.norm.eval(&(&pts[a] - &pts[b]))?)?;
            d[a][b] = v;
            d[b][a] = v;
        }
    }
    let quarter = std::f64::consts::FRAC_PI_4;

    // Greedy witness selection in input order.
    let witness: Vec<usize> = match mode {
        WitnessMode::Unbounded => {
            let mut w = vec![0usize, 1];
            for cand in 2..n {
                let mut ok = true;
                'check: for (wi, &a) in w.iter().enumerate() {
                    for &b in w.iter().skip(wi + 1) {
                        let spacing = threshold_t(h, d[a][b])?;
                        if !(d[a][cand] > spacing && d[b][cand] > spacing) {
                            ok = false;
                            break 'check;
                        }
                        if space.john.angle_at(&pts[cand], &pts[a], &pts[b])? > quarter {
                            ok = false;
                            break 'check;
                        }
                    }
                }
                if ok {
                    w.push(cand);
                }
            }
            w
        }
        WitnessMode::Accumulation => {
            let mut w = vec![0usize];
            for cand in 1..n {
                let mut ok = true;
                'check2: for (ei, &e) in w.iter().enumerate() {
                    for &f in w.iter().skip(ei + 1) {
                        if space.john.angle_at(&pts[e], &pts[f], &pts[cand])? > quarter {
                            ok = false;
                            break 'check2;
                        }
                        let lim = threshold_t_tilde(h, d[e][f])?
                            .min(threshold_t_tilde(h, d[e][cand])?);
                        if !(d[f][cand] < lim) {
                            ok = false;
                            break 'check2;
                        }
                    }
                }
                if ok {
                    w.push(cand);
                }
            }
            w
        }
    };
    if witness.len() < 3 {
        return Ok(RefutationOutcome::WitnessUnavailable {
            reason: format!(
                "greedy spacing selection kept only {} of {} points; the finite input \
                 cannot satisfy the witness conditions",
                witness.len(),
                n
            ),
        });
    }

    // Large-angle triples within the witness set, by descending angle.
    let mut candidates: Vec<(f64, usize, usize, usize)> = Vec::new();
    for (pj, &j) in witness.iter().enumerate() {
        for (pi, &i) in witness.iter().enumerate() {
            if pi == pj {
                continue;
            }
            for &k in witness.iter().skip(pi + 1) {
                if k == j {
                    continue;
                }
                let angle = space.john.angle_at(&pts[j], &pts[i], &pts[k])?;
                if angle > std::f64::consts::PI - delta {
                    candidates.push((angle, j, i, k));
                }
            }
        }
    }
    if candidates.is_empty() {
        return Ok(RefutationOutcome::NoRefutation {
            reason: format!(
                "no apex angle above pi - delta (delta = {delta:.6e}) within the {}-point \
                 witness set; this does NOT prove embeddability",
                witness.len()
            ),
        });
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (angle, apex, a, b) in candidates {
        // Role assignment: y is the endpoint farther from the apex in the
        // pullback (the latest witness in unbounded mode, the oldest in
        // accumulation mode); x is the nearer one.
        let (i, k) = if d[apex][b] >= d[apex][a] {
            (a, b)
        } else {
            (b, a)
        };
        let slack = d[apex][i] + d[apex][k] - d[i][k];
        if slack < -STRICT_MARGIN {
            let chain = h_chain(&space, h, delta, mode, &d, apex, i, k, pts)?;
            return Ok(RefutationOutcome::Refuted(Box::new(ViolationCertificate {
                apex,
                x: i,
                y: k,
                apex_angle: angle,
                chain,
                conclusion: PulledBackViolation {
                    d_xy: d[i][k],
                    d_zx: d[apex][i],
                    d_zy: d[apex][k],
                    slack,
                },
                thresholds,
                mode: match mode {
                    WitnessMode::Unbounded => RefutationMode::GeneralUnbounded,
                    WitnessMode::Accumulation => RefutationMode::GeneralAccumulation,
                },
            })));
        }
    }
    Ok(RefutationOutcome::NoRefutation {
        reason: "qualifying triples exist but none violates the pulled-back triangle \
                 inequality directly"
            .into(),
    })
}

/// Diagnostic chain for the general-h contradiction: the geometric strict
/// bound against the halving bound.
#[allow(clippy::too_many_arguments)]
fn h_chain(
    space: &JohnSpace,
    h: &SnowflakeFunction,
    delta: f64,
    mode: WitnessMode,
    d: &[Vec<f64>],
    apex: usize,
    i: usize,
    k: usize,
    pts: &[Point],
) -> Result<Vec<ChainStep>> {
    let lc = &space.constants;
    let (c, kk) = (lc.c_bound, lc.k_bound);
    let g = triple_geometry(space, &pts[i], &pts[k], &pts[apex])?;
    let mut chain = vec![step_gt(
        "apex angle exceeds pi - delta",
        g.apex_angle,
        std::f64::consts::PI - delta,
    )];
    chain.push(step_le(
        "projection splits the long side: ||x-z'|| + ||z'-y|| = ||x-y||",
        (g.xzp + g.yzp - g.xy).abs(),
        1e-9 * g.xy.max(1.0),
    ));
    chain.push(step_le(
        "close-to-line bound at x",
        (g.xz - g.xzp).abs(),
        c * g.xzp * g.angle_x,
    ));
    chain.push(step_le(
        "angle comparison transfers the bound at y",
        g.yzp * g.angle_y,
        kk * g.xzp * g.angle_x * (1.0 + 1e-9),
    ));
    let geometric = g.xz + g.yz - c * (1.0 + kk) * g.xz * g.angle_x;
    chain.push(step_le(
        "geometric lower bound: ||x-y|| >= ||x-z|| + ||z-y|| - C(1+K)||x-z|| angle_x",
        geometric,
        g.xy + 1e-9 * g.xy.max(1.0),
    ));
    chain.push(step_gt(
        "small angle keeps half the short side: 1 - C(1+K) angle_x > 1/2",
        1.0 - c * (1.0 + kk) * g.angle_x,
        0.5,
    ));
    // Strict side: h(d_jk) = ||x-y|| > h(d_ik) + h(d_ij)/2 = ||z-y|| + ||z-x||/2.
    chain.push(step_gt(
        "strict chain: h(d(x_j,x_k)) > h(d(x_i,x_k)) + h(d(x_i,x_j))/2",
        g.xy,
        g.yz + 0.5 * g.xz,
    ));
    // Halving side needs the witness spacing.
    let (s_big, t_small) = (d[apex][k], d[apex][i]);
    match mode {
        WitnessMode::Unbounded => {
            let spacing = threshold_t(h, t_small)?;
            chain.push(step_gt(
                "witness spacing: d(x_i, x_k) > T(d(x_i, x_j))",
                s_big,
                spacing,
            ));
        }
        WitnessMode::Accumulation => {
            let spacing = threshold_t_tilde(h, s_big)?;
            chain.push(step_le(
                "witness spacing: d(x_i, x_j) < T~(d(x_i, x_k))",
                t_small,
                spacing,
            ));
        }
    }
    chain.push(step_le(
        "halving bound: h(d_ik + d_ij) <= h(d_ik) + h(d_ij)/2",
        h.eval(s_big + t_small),
        h.eval(s_big) + 0.5 * h.eval(t_small),
    ));
    chain.push(step_gt(
        "contradiction: d(x_j,x_k) > d(x_i,x_k) + d(x_i,x_j)",
        d[i][k],
        s_big + t_small,
    ));
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{metric_from_points, validate_metric, PointConfig};
    use crate::norms::Norm;
    use nalgebra::{dvector, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn theta_reference_value() {
        let theta = theta_threshold(2, 0.5).unwrap();
        assert!(
            (theta - 1.68e-3).abs() < 0.01 * 1.68e-3,
            "theta(2, 1/2) = {theta}"
        );
    }

    #[test]
    fn theta_limits_in_alpha() {
        // alpha -> 1: numerator 2 - 2^alpha -> 0.
        let t = theta_threshold(2, 0.999999).unwrap();
        assert!(t < 1e-6);
        // alpha -> 0: third term -> 1/(3C(2K+1)), theta capped by the
        // epsilon/pi/4 terms only if smaller.
        let lc = lemma_constants(2);
        let t = theta_threshold(2, 1e-9).unwrap();
        let expect = 0.99
            * lc.epsilon
                .min(std::f64::consts::FRAC_PI_4)
                .min(1.0 / (3.0 * lc.c_bound * (2.0 * lc.k_bound + 1.0)));
        assert!((t - expect).abs() < 1e-9);
        assert!(theta_threshold(2, 1.0).is_err());
    }

    #[test]
    fn thresholds_monotone_in_constants() {
        let base = lemma_constants(2);
        let mut bigger_c = base;
        bigger_c.c_bound *= 2.0;
        let mut bigger_k = base;
        bigger_k.k_bound *= 2.0;
        for alpha in [0.3, 0.5, 0.7] {
            let t0 = theta_from_constants(&base, alpha);
            assert!(theta_from_constants(&bigger_c, alpha) <= t0);
            assert!(theta_from_constants(&bigger_k, alpha) <= t0);
        }
        let d0 = delta_from_constants(&base);
        assert!(delta_from_constants(&bigger_c) <= d0);
        assert!(delta_from_constants(&bigger_k) <= d0);
    }

    #[test]
    fn cardinality_bound_paths() {
        let mut table = UserTable::new();
        let theta = theta_threshold(2, 0.5).unwrap();
        table.insert(2, std::f64::consts::PI - theta, 10);
        let b = cardinality_bound(2, 0.5, Some(&table)).unwrap();
        assert_eq!(b.count, 10);
        assert!(b.certified);

        assert!(matches!(
            cardinality_bound(2, 0.5, None),
            Err(Error::BoundUnavailable(_))
        ));

        // beta here is close to pi, so nearly every insertion is admissible
        // and the witness set grows with the budget; keep it small.
        let emp = EmpiricalFloorProvider {
            budget: 120,
            seed: 1,
        };
        let b = cardinality_bound(2, 0.5, Some(&emp)).unwrap();
        assert!(!b.certified);
        assert!(b.source.contains("not a certificate"));
        assert!(b.count >= 3);
    }

    fn near_collinear() -> PointConfig {
        PointConfig::euclidean(vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![2.0, 1e-6],
        ])
        .unwrap()
    }

    #[test]
    fn near_collinear_triple_refuted() {
        let out = refute_alpha_embedding(&near_collinear(), 0.5).unwrap();
        let cert = out.certificate().expect("must refute");
        assert_eq!(cert.apex, 1);
        // Pulled-back distances approximately {1, 1, 4}: slack ~ -2.
        assert!((cert.conclusion.d_xy - 4.0).abs() < 1e-4);
        assert!(cert.conclusion.slack < -1.9);
        assert!(cert.apex_angle > std::f64::consts::PI - 1e-5);
        // Every chain step carries the sign the argument requires.
        for step in &cert.chain {
            assert!(step.holds, "chain step failed: {step:?}");
        }
        // Standalone re-verification from raw coordinates.
        let p = &near_collinear();
        let d = |a: usize, b: usize| {
            (&p.points[a] - &p.points[b]).norm().powf(2.0)
        };
        let slack = d(cert.apex, cert.x) + d(cert.apex, cert.y) - d(cert.x, cert.y);
        assert!(slack < -1e-9);
    }

    #[test]
    fn equilateral_not_refuted() {
        let cfg = PointConfig::euclidean(vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.5, 3f64.sqrt() / 2.0],
        ])
        .unwrap();
        for alpha in [0.3, 0.5, 0.9] {
            match refute_alpha_embedding(&cfg, alpha).unwrap() {
                RefutationOutcome::NoRefutation { .. } => {}
                other => panic!("equilateral wrongly refuted: {other:?}"),
            }
        }
    }

    #[test]
    fn soundness_on_embeddable_instances() {
        // Pullbacks that validate as metrics never produce certificates.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            // Random points, distances snowflaked to alpha = 0.5, then
            // embedded; refuting the embedding coordinates at the same alpha
            // pulls back to the original (valid) metric.
            let pts: Vec<DVector<f64>> = (0..6)
                .map(|_| dvector![rng.random::<f64>() * 3.0, rng.random::<f64>() * 3.0])
                .collect();
            let base = metric_from_points(&PointConfig::euclidean(pts).unwrap()).unwrap();
            let h = SnowflakeFunction::power(0.5).unwrap();
            let snow = crate::metric::apply_snowflake(&base, &h).unwrap();
            let g = crate::embed::euclidean_embed(&snow, crate::embed::TOL_PSD, crate::embed::TOL_RANK);
            if let Some(coords) = g.coords {
                let cfg = PointConfig::euclidean(coords).unwrap();
                let pulled = metric_from_points(&cfg).unwrap();
                // Sanity: pullback by alpha=0.5 reproduces `base`, a metric.
                let mut pulled_sq = pulled.matrix().clone();
                pulled_sq.apply(|v| *v = *v * *v);
                assert!(validate_metric(&pulled_sq, 1e-6).unwrap().is_metric);
                if let RefutationOutcome::Refuted(c) = refute_alpha_embedding(&cfg, 0.5).unwrap() {
                    panic!("soundness violated on embeddable instance: {c:?}")
                }
            }
        }
    }

    fn geometric_ray(n: usize) -> PointConfig {
        PointConfig::euclidean(
            (0..n).map(|i| dvector![4f64.powi(i as i32), 0.0]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn ray_refuted_in_unbounded_mode() {
        let h = SnowflakeFunction::power(0.5).unwrap();
        let out = refute_h_embedding(&geometric_ray(6), &h, WitnessMode::Unbounded).unwrap();
        let cert = out.certificate().expect("ray must refute");
        assert_eq!(cert.apex_angle, std::f64::consts::PI);
        assert!(cert.conclusion.slack < -1e-9);
        for step in &cert.chain {
            assert!(step.holds, "chain step failed: {step:?}");
        }
        assert_eq!(cert.mode, RefutationMode::GeneralUnbounded);
    }

    #[test]
    fn mode_symmetry_with_alpha_refuter() {
        // Power(1/2) + unbounded mode agree in verdict with the alpha
        // refuter on shared inputs where spacing is satisfiable.
        let h = SnowflakeFunction::power(0.5).unwrap();
        let cfg = geometric_ray(5);
        let a = refute_alpha_embedding(&cfg, 0.5).unwrap();
        let b = refute_h_embedding(&cfg, &h, WitnessMode::Unbounded).unwrap();
        assert!(a.certificate().is_some());
        assert!(b.certificate().is_some());

        let equilateral = PointConfig::euclidean(vec![
            dvector![0.0, 0.0],
            dvector![10.0, 0.0],
            dvector![5.0, 5.0 * 3f64.sqrt()],
        ])
        .unwrap();
        let a = refute_alpha_embedding(&equilateral, 0.5).unwrap();
        let b = refute_h_embedding(&equilateral, &h, WitnessMode::Unbounded).unwrap();
        assert!(a.certificate().is_none());
        assert!(b.certificate().is_none());
    }

    #[test]
    fn accumulating_sequence_refuted() {
        // Points marching to an accumulation point on a line.
        let pts: Vec<DVector<f64>> = (0..7)
            .map(|i| dvector![1.0 - 4f64.powi(-i), 0.0])
            .collect();
        let cfg = PointConfig::euclidean(pts).unwrap();
        let h = SnowflakeFunction::power(0.5).unwrap();
        let out = refute_h_embedding(&cfg, &h, WitnessMode::Accumulation).unwrap();
        let cert = out.certificate().expect("accumulating line must refute");
        assert!(cert.conclusion.slack < -1e-9);
        for step in &cert.chain {
            assert!(step.holds, "chain step failed: {step:?}");
        }
    }

    #[test]
    fn spiral_with_own_gauge_not_refuted() {
        use crate::counterexample::{build_spiral, AngleSequence, ConstructionParams, TSearch};
        let h = SnowflakeFunction::linear_plus_sqrt(1.0, 1.0).unwrap();
        let params = ConstructionParams {
            h: h.clone(),
            angles: AngleSequence::Geometric,
            count: 9,
            search: TSearch::default(),
        };
        let spiral = build_spiral(&params).unwrap();
        match refute_h_embedding(&spiral.config, &h, WitnessMode::Unbounded).unwrap() {
            RefutationOutcome::WitnessUnavailable { reason } => {
                assert!(reason.contains("S4"));
            }
            other => panic!("spiral must be witness-unavailable, got {other:?}"),
        }
    }

    #[test]
    fn small_angles_no_refutation() {
        let cfg = PointConfig::euclidean(vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.5, 0.4],
        ])
        .unwrap();
        let h = SnowflakeFunction::power(0.5).unwrap();
        if let RefutationOutcome::Refuted(_) = refute_h_embedding(&cfg, &h, WitnessMode::Unbounded).unwrap() { panic!("no large angle exists") }
    }

    #[test]
    fn linf_points_refuted_with_john_angles() {
        // Near-collinear in the sup norm; the John inner product of l_inf in
        // the plane is Euclidean, so angles behave as usual but pulled-back
        // distances use the sup norm.
        let cfg = PointConfig::new(
            vec![
                dvector![0.0, 0.0],
                dvector![1.0, 0.0],
                dvector![2.0, 1e-7],
            ],
            Norm::linf(2),
        )
        .unwrap();
        let out = refute_alpha_embedding(&cfg, 0.5).unwrap();
        let cert = out.certificate().expect("must refute");
        // Sup-norm pullbacks: {1, 1, 4}.
        assert!((cert.conclusion.d_xy - 4.0).abs() < 1e-5);
    }
}
