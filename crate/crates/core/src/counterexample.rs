//! Planar spiral constructions: for a concave gauge h whose modulus
//! c(t) = h(t)/t decreases to a positive limit c (so the decay axiom S4
//! fails), arbitrarily many points x_0, x_1, ... can be placed in the plane
//! so that h^{-1} composed with the Euclidean distance is a metric — the
//! sequence is an h-snowflake sitting isometrically in R^2.
//!
//! Each Euclidean step length t_i is chosen so that the step inequality
//!
//!   (c(s) + c(t)) (c(s+t) - c)  <=  2 (c(s) c(t) cos(pi - a_i) + c(s+t)^2)
//!
//! holds for every s, t in a certified quadrant. The certificate combines a
//! monotone tail bound (c nonincreasing with exact limit, so testing the
//! quadrant corner dominates the whole quadrant) with a spot grid check;
//! the inequality itself is always evaluated in a deficit form, with
//! c(x) - c and 1 - cos(a) expanded so no catastrophic cancellation occurs.
//!
//! The builder inflates the step lengths by the worst-case chord factor
//! cos(sigma) (sigma = total turning) so that the h-preimages of *all*
//! pairwise distances — not only the consecutive ones — land inside the
//! certified quadrants. Final verification of every triangle inequality
//! runs in arbitrary-precision arithmetic: at large indices the true
//! slacks sit scores of decimal digits below the coordinates, far out of
//! f64's reach.

use astro_float::BigFloat;
use nalgebra::{dvector, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bigfloat::{BigCtx, DEFAULT_PRECISION_BITS};
use crate::error::{Error, Result};
use crate::metric::PointConfig;
use crate::snowflake::{
    check_axioms, AxiomFlags, HFunction, LeadingSegment, PiecewiseLinear, ProbeGrid,
    SnowflakeFunction, Tail,
};

/// Affine view h(t) = slope * t + intercept of one linear segment of a
/// piecewise gauge. Used as the construction surrogate for the per-n
/// constructions: on the active segment it coincides with the real h, its
/// modulus (slope + intercept/t) decreases to `slope` > 0, and every
/// operation has an exact closed form.
#[derive(Clone, Copy, Debug)]
pub struct SegmentModel {
    pub slope: f64,
    pub intercept: f64,
}

impl HFunction for SegmentModel {
    fn eval(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        if y < self.intercept {
            return Err(Error::Domain(format!(
                "value {y} below the segment intercept {}",
                self.intercept
            )));
        }
        Ok((y - self.intercept) / self.slope)
    }
    fn eval_big(&self, t: &BigFloat, ctx: &BigCtx) -> BigFloat {
        ctx.add(
            &ctx.mul(&ctx.from_f64(self.slope), t),
            &ctx.from_f64(self.intercept),
        )
    }
    fn inverse_big(&self, y: &BigFloat, ctx: &BigCtx) -> BigFloat {
        ctx.div(
            &ctx.sub(y, &ctx.from_f64(self.intercept)),
            &ctx.from_f64(self.slope),
        )
    }
    fn modulus_limit(&self) -> f64 {
        self.slope
    }
    fn modulus_deficit(&self, t: f64) -> f64 {
        self.intercept / t
    }
}

/// Turning-angle schedule; partial sums must stay strictly below pi/2.
#[derive(Clone, Debug)]
pub enum AngleSequence {
    /// a_i = pi / 2^{i+2}; total pi/4.
    Geometric,
    /// a_i = pi / (4 i^2); total pi^3 / 24.
    InverseSquare,
    Explicit(Vec<f64>),
}

impl AngleSequence {
    /// i is 1-based.
    pub fn alpha(&self, i: usize) -> f64 {
        match self {
            AngleSequence::Geometric => std::f64::consts::PI / 2f64.powi(i as i32 + 2),
            AngleSequence::InverseSquare => std::f64::consts::PI / (4.0 * (i * i) as f64),
            AngleSequence::Explicit(v) => v[i - 1],
        }
    }

    /// Upper bound for the total turn over any number of steps.
    pub fn total_turn_bound(&self) -> f64 {
        match self {
            AngleSequence::Geometric => std::f64::consts::FRAC_PI_4,
            AngleSequence::InverseSquare => std::f64::consts::PI.powi(3) / 24.0,
            AngleSequence::Explicit(v) => v.iter().sum(),
        }
    }

    fn validate(&self, turns: usize) -> Result<()> {
        if let AngleSequence::Explicit(v) = self {
            if v.len() < turns {
                return Err(Error::Structural(format!(
                    "{} explicit angles for {} turns",
                    v.len(),
                    turns
                )));
            }
        }
        for i in 1..=turns {
            let a = self.alpha(i);
            if !(a > 0.0 && a < std::f64::consts::FRAC_PI_2) {
                return Err(Error::Structural(format!(
                    "angle a_{i} = {a} outside (0, pi/2)"
                )));
            }
        }
        let total = self.total_turn_bound();
        if !(total < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Structural(format!(
                "total turning {total} does not stay below pi/2"
            )));
        }
        Ok(())
    }
}

/// Geometric search grid for the step thresholds.
#[derive(Clone, Copy, Debug)]
pub struct TSearch {
    pub t_min: f64,
    pub t_max: f64,
    /// Ratio between consecutive grid values (> 1).
    pub grid_ratio: f64,
}

impl Default for TSearch {
    fn default() -> Self {
        TSearch {
            t_min: 1.0,
            t_max: 1e200,
            grid_ratio: 1.05,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstructionParams {
    pub h: SnowflakeFunction,
    pub angles: AngleSequence,
    /// Number of steps; the spiral has count + 1 points.
    pub count: usize,
    pub search: TSearch,
}

/// Certificate for one step threshold: the step inequality holds for all
/// s, t >= quadrant_start.
#[derive(Clone, Debug)]
pub struct TiCertificate {
    /// 1-based turn index.
    pub index: usize,
    pub alpha: f64,
    /// Certified quadrant corner tau_i.
    pub quadrant_start: f64,
    /// Euclidean step length chosen for this turn (after chord-factor
    /// inflation); h^{-1}(cos(sigma) * step) >= quadrant_start.
    pub step: f64,
    /// Tail-domination margin at the corner (>= 0).
    pub sufficient_margin: f64,
    /// Spot-check grid points evaluated, all nonnegative.
    pub grid_checked: usize,
    pub modulus_limit: f64,
}

/// RHS - LHS of the step inequality in deficit form; negative = violation.
/// With d(x) = c(x) - c and vers(a) = 1 - cos(a):
///   RHS/2 - LHS/2 = c^2 vers(a) - cos(a)(c (d_s + d_t) + d_s d_t)
///                   + 2 c d_{s+t} + d_{s+t}^2 - (c + (d_s + d_t)/2) ... )
/// evaluated without forming c(x) - c by subtraction.
pub fn tichoice_slack<H: HFunction + ?Sized>(h: &H, alpha: f64, s: f64, t: f64) -> f64 {
    let c = h.modulus_limit();
    let ds = h.modulus_deficit(s);
    let dt = h.modulus_deficit(t);
    let dst = h.modulus_deficit(s + t);
    let cos_a = alpha.cos();
    let vers_a = 2.0 * (0.5 * alpha).sin().powi(2);
    let lhs_half = (c + 0.5 * (ds + dt)) * dst;
    let rhs_half = c * c * vers_a - cos_a * (c * (ds + dt) + ds * dt) + 2.0 * c * dst + dst * dst;
    2.0 * (rhs_half - lhs_half)
}

/// Tail-domination margin at quadrant corner tau: for all s, t >= tau,
/// LHS <= 2 c(tau) (c(2 tau) - c) and RHS >= 2 (c^2 vers(a) -
/// cos(a) (2 c d(tau) + d(tau)^2)); nonnegative margin certifies the whole
/// quadrant (c is nonincreasing with exact limit c).
pub fn sufficient_margin<H: HFunction + ?Sized>(h: &H, alpha: f64, tau: f64) -> f64 {
    let c = h.modulus_limit();
    let d_tau = h.modulus_deficit(tau);
    let d_2tau = h.modulus_deficit(2.0 * tau);
    let cos_a = alpha.cos();
    let vers_a = 2.0 * (0.5 * alpha).sin().powi(2);
    let lhs_max_half = (c + d_tau) * d_2tau;
    let rhs_min_half = c * c * vers_a - cos_a * (2.0 * c * d_tau + d_tau * d_tau);
    2.0 * (rhs_min_half - lhs_max_half)
}

/// Smallest grid value tau >= prev_t whose quadrant [tau, inf)^2 satisfies
/// the step inequality for angle alpha, certified by the tail bound and
/// spot-checked on a coarse grid.
pub fn solve_ti<H: HFunction + ?Sized>(
    h: &H,
    alpha: f64,
    prev_t: f64,
    search: &TSearch,
) -> Result<TiCertificate> {
    if h.modulus_limit() <= 0.0 {
        return Err(Error::RejectedInput(
            "step construction needs a positive modulus limit (h must fail S4)".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("angle {alpha} outside (0, pi/2)")));
    }
    if !(search.grid_ratio > 1.0) {
        return Err(Error::Structural("grid ratio must exceed 1".into()));
    }
    let mut tau = prev_t.max(search.t_min);
    while tau <= search.t_max {
        let margin = sufficient_margin(h, alpha, tau);
        if margin >= 0.0 {
            // Spot check: the tail bound is rigorous, the grid corroborates.
            let mut grid_checked = 0;
            for a in 0..12 {
                for b in 0..12 {
                    let s = tau * 10f64.powf(a as f64);
                    let t = tau * 10f64.powf(b as f64);
                    if tichoice_slack(h, alpha, s, t) < 0.0 {
                        return Err(Error::SearchRange(format!(
                            "tail certificate at tau = {tau} contradicted on the spot grid \
                             at (s, t) = ({s}, {t}); modulus model inconsistent"
                        )));
                    }
                    grid_checked += 1;
                }
            }
            return Ok(TiCertificate {
                index: 0,
                alpha,
                quadrant_start: tau,
                step: f64::NAN,
                sufficient_margin: margin,
                grid_checked,
                modulus_limit: h.modulus_limit(),
            });
        }
        tau *= search.grid_ratio;
    }
    Err(Error::SearchRange(format!(
        "no certified step threshold for angle {alpha} within [{}, {}]",
        search.t_min, search.t_max
    )))
}

/// Monte-Carlo recheck of a certificate: random (s, t) log-uniform over
/// `decades` decades above the quadrant corner.
pub fn monte_carlo_recheck<H: HFunction + ?Sized>(
    h: &H,
    cert: &TiCertificate,
    samples: usize,
    decades: f64,
    seed: u64,
) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..samples {
        let s = cert.quadrant_start * 10f64.powf(rng.random::<f64>() * decades);
        let t = cert.quadrant_start * 10f64.powf(rng.random::<f64>() * decades);
        let slack = tichoice_slack(h, cert.alpha, s, t);
        if slack < 0.0 {
            violations += 1;
        }
        min_slack = min_slack.min(slack);
    }
    (violations, min_slack)
}

#[derive(Clone, Debug)]
pub struct SpiralConstruction {
    /// Euclidean step lengths t_1..t_N (strictly increasing).
    pub t_seq: Vec<f64>,
    /// Turning angles a_1..a_{N-1}.
    pub turn_angles: Vec<f64>,
    /// One certificate per turn (N - 1 of them).
    pub certificates: Vec<TiCertificate>,
    /// Total turning bound sigma used for the chord inflation.
    pub total_turn: f64,
    /// f64 view with the Euclidean norm.
    pub config: PointConfig,
}

/// Build the spiral: x_0 = (0,0), x_1 = (t_1, 0), then each step turns by
/// a_i and stretches to the certified t_{i+1}.
pub fn build_spiral(params: &ConstructionParams) -> Result<SpiralConstruction> {
    build_spiral_with(&params.h, &params.angles, params.count, &params.search)
}

#[derive(Clone, Debug)]
pub struct PreimageReport {
    /// Unordered triples checked (all three via-roles each).
    pub triples_checked: usize,
    /// Triples with at least one violated role.
    pub violations: usize,
    /// Minimal slack h(s + t) - d_E(x_i, x_k) over all roles.
    pub min_slack: f64,
    /// Triple and via-role attaining the minimal slack: (i, via, k).
    pub worst_triple: (usize, usize, usize),
}

impl PreimageReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Check `d_E(x_i, x_k) <= h(h^{-1}(d_E(x_i, x_j)) + h^{-1}(d_E(x_j, x_k))) + tol`
/// for every triple and every via-role j — exactly the statement that the
/// h-preimage of the Euclidean metric satisfies all triangle inequalities.
/// Plain f64; for the large spirals use [`SpiralConstruction::verify`].
pub fn verify_snowflake_preimage(
    points: &[DVector<f64>],
    h: &SnowflakeFunction,
    tol: f64,
) -> Result<PreimageReport> {
    let n = points.len();
    if n < 3 {
        return Ok(PreimageReport {
            triples_checked: 0,
            violations: 0,
            min_slack: f64::INFINITY,
            worst_triple: (0, 0, 0),
        });
    }
    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = (&points[i] - &points[j]).norm();
            d[i][j] = dist;
            d[j][i] = dist;
        }
    }
    let mut pre = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = h.inverse(d[i][j])?;
            pre[i][j] = v;
            pre[j][i] = v;
        }
    }
    let mut report = PreimageReport {
        triples_checked: 0,
        violations: 0,
        min_slack: f64::INFINITY,
        worst_triple: (0, 0, 0),
    };
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                report.triples_checked += 1;
                let mut bad = false;
                for (a, via, b) in [(i, j, k), (j, i, k), (i, k, j)] {
                    let slack = h.eval(pre[a][via] + pre[via][b]) - d[a][b];
                    if slack < report.min_slack {
                        report.min_slack = slack;
                        report.worst_triple = (a, via, b);
                    }
                    if slack < -tol {
                        bad = true;
                    }
                }
                if bad {
                    report.violations += 1;
                }
            }
        }
    }
    Ok(report)
}

impl SpiralConstruction {
    /// Full triangle verification in arbitrary-precision arithmetic against
    /// the gauge (or surrogate) used to build the spiral, rebuilding the
    /// coordinates at `precision_bits`.
    pub fn verify_big<H: HFunction + ?Sized>(
        &self,
        h: &H,
        tol: f64,
        precision_bits: usize,
    ) -> PreimageReport {
        let mut ctx = BigCtx::new(precision_bits);
        let pts = spiral_coordinates(&self.t_seq, &self.turn_angles, &mut ctx);
        let n = pts.len();
        let mut d: Vec<Vec<BigFloat>> = vec![vec![ctx.zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = ctx.sub(&pts[i][0], &pts[j][0]);
                let dy = ctx.sub(&pts[i][1], &pts[j][1]);
                let dist = ctx.sqrt(&ctx.add(&ctx.mul(&dx, &dx), &ctx.mul(&dy, &dy)));
                d[i][j] = dist.clone();
                d[j][i] = dist;
            }
        }
        let mut pre: Vec<Vec<BigFloat>> = vec![vec![ctx.zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = h.inverse_big(&d[i][j], &ctx);
                pre[i][j] = v.clone();
                pre[j][i] = v;
            }
        }
        let mut report = PreimageReport {
            triples_checked: 0,
            violations: 0,
            min_slack: f64::INFINITY,
            worst_triple: (0, 0, 0),
        };
        let mut min_slack_big: Option<BigFloat> = None;
        let neg_tol = ctx.from_f64(-tol);
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    report.triples_checked += 1;
                    let mut bad = false;
                    for (a, via, b) in [(i, j, k), (j, i, k), (i, k, j)] {
                        let arg = ctx.add(&pre[a][via], &pre[via][b]);
                        let slack = ctx.sub(&h.eval_big(&arg, &ctx), &d[a][b]);
                        if min_slack_big.as_ref().is_none_or(|m| slack < *m) {
                            min_slack_big = Some(slack.clone());
                            report.worst_triple = (a, via, b);
                        }
                        if slack < neg_tol {
                            bad = true;
                        }
                    }
                    if bad {
                        report.violations += 1;
                    }
                }
            }
        }
        if let Some(m) = min_slack_big {
            report.min_slack = ctx.to_f64(&m);
        }
        report
    }

    /// Verification at the default precision.
    pub fn verify<H: HFunction + ?Sized>(&self, h: &H, tol: f64) -> PreimageReport {
        self.verify_big(h, tol, DEFAULT_PRECISION_BITS)
    }
}

#[derive(Clone, Debug)]
pub struct RemarkConstruction {
    pub h: SnowflakeFunction,
    pub config: PointConfig,
    pub axiom_flags: AxiomFlags,
    pub verification: PreimageReport,
    /// Active linear segment [start, end) hosting the construction.
    pub segment: (f64, f64),
    pub certificates: Vec<TiCertificate>,
}

/// Per-n construction: a full snowflaking function h (all of S1-S4) together
/// with n points in the plane whose pairwise distances live deep inside one
/// long linear segment of h, where the spiral machinery applies with the
/// segment slope as the effective modulus limit. The returned h carries a
/// strictly concave leading piece (for S3) and continues past the active
/// segment with geometrically decaying slopes (for S4).
pub fn remark_construction(
    n: usize,
    base_slopes: &[f64],
    seg_lengths: Option<&[f64]>,
) -> Result<RemarkConstruction> {
    if n < 2 {
        return Err(Error::Structural("need at least 2 points".into()));
    }
    if base_slopes.is_empty() {
        return Err(Error::Structural("need at least one slope".into()));
    }
    if base_slopes
        .windows(2)
        .any(|w| w[0] <= w[1])
        || base_slopes.iter().any(|c| *c <= 0.0)
    {
        return Err(Error::RejectedInput(
            "slopes must be positive and strictly decreasing".into(),
        ));
    }
    let m = base_slopes.len();
    let default_lengths = vec![1.0; m];
    let lengths = seg_lengths.unwrap_or(&default_lengths);
    if lengths.len() != m {
        return Err(Error::Structural(format!(
            "{} segment lengths for {} slopes",
            lengths.len(),
            m
        )));
    }
    if lengths.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Structural("segment lengths must be positive".into()));
    }

    // Leading concave piece a sqrt(t) on [0, 1), slope-continuous at 1.
    let t1 = 1.0f64;
    let c1 = base_slopes[0];
    let leading = LeadingSegment {
        coeff: 2.0 * c1 * t1.sqrt(),
        exponent: 0.5,
    };
    // Knots T_1..T_m; the active segment starts at T_m with slope c_m.
    let mut knots = vec![t1];
    for len in &lengths[..m - 1] {
        knots.push(knots.last().unwrap() + len);
    }
    let t_active = *knots.last().unwrap();
    // Segment value at the active start.
    let mut v_active = leading.coeff * t1.sqrt();
    for k in 1..m {
        v_active += base_slopes[k - 1] * (knots[k] - knots[k - 1]);
    }
    let c_active = base_slopes[m - 1];
    let surrogate = SegmentModel {
        slope: c_active,
        intercept: v_active - c_active * t_active,
    };

    // Spiral against the surrogate, searching from the active start so the
    // surrogate agrees with the real h on everything it touches.
    let angles = AngleSequence::Geometric;
    let search = TSearch {
        t_min: t_active,
        ..TSearch::default()
    };
    let spiral = build_spiral_with(&surrogate, &angles, n - 1, &search)?;

    // Required active length: every h-preimage argument (up to s + t for the
    // farthest pair) must stay inside [t_active, t_active + L).
    let total_len: f64 = spiral.t_seq.iter().sum();
    let arg_max = 2.0 * surrogate.inverse(total_len)?;
    let required = (arg_max - t_active) * 1.01;
    let available = lengths[m - 1];
    let active_len = if seg_lengths.is_none() {
        required
    } else if available < required {
        return Err(Error::SegmentTooShort {
            required,
            available,
        });
    } else {
        available
    };

    // Assemble the full gauge: explicit active segment, then a halving tail.
    let mut full_knots = knots.clone();
    full_knots.push(t_active + active_len);
    let mut full_slopes = base_slopes.to_vec();
    full_slopes.push(c_active * 0.5);
    let pl = PiecewiseLinear::new(Some(leading), full_knots, full_slopes, Tail::GeometricHalving)?;
    let h = SnowflakeFunction::piecewise(pl);

    let axiom_flags = check_axioms(&h, &ProbeGrid::default())?;
    // Verify against the real h in double-double; all evaluation points lie
    // in the active segment where h and the surrogate coincide exactly.
    let verification = spiral.verify(&h, 1e-9);
    Ok(RemarkConstruction {
        h,
        config: spiral.config.clone(),
        axiom_flags,
        verification,
        segment: (t_active, t_active + active_len),
        certificates: spiral.certificates,
    })
}

/// build_spiral generalized over the gauge implementation (the public
/// entry point fixes H = SnowflakeFunction through ConstructionParams).
pub fn build_spiral_with<H: HFunction + ?Sized>(
    h: &H,
    angles: &AngleSequence,
    count: usize,
    search: &TSearch,
) -> Result<SpiralConstruction> {
    if count < 1 {
        return Err(Error::Structural("need at least one step".into()));
    }
    if h.modulus_limit() <= 0.0 {
        return Err(Error::RejectedInput(
            "spiral construction needs h failing S4 (positive modulus limit)".into(),
        ));
    }
    angles.validate(count.saturating_sub(1))?;
    let sigma = angles.total_turn_bound();
    let cos_sigma = sigma.cos();

    let mut certificates = Vec::with_capacity(count.saturating_sub(1));
    let mut prev_tau = search.t_min;
    for i in 1..count {
        let mut cert = solve_ti(h, angles.alpha(i), prev_tau, search)?;
        cert.index = i;
        prev_tau = cert.quadrant_start;
        certificates.push(cert);
    }

    let mut t_seq = Vec::with_capacity(count);
    let mut prev_step = 0.0f64;
    for i in 1..=count {
        let need = if i < count {
            h.eval(certificates[i - 1].quadrant_start) / cos_sigma
        } else {
            0.0
        };
        let step = need.max(if prev_step == 0.0 {
            search.t_min
        } else {
            prev_step * search.grid_ratio
        });
        if step > search.t_max {
            return Err(Error::SearchRange(format!(
                "step {i} needs length {step}, beyond the search cap {}",
                search.t_max
            )));
        }
        if i < count {
            certificates[i - 1].step = step;
        }
        t_seq.push(step);
        prev_step = step;
    }

    let turn_angles: Vec<f64> = (1..count).map(|i| angles.alpha(i)).collect();
    let mut ctx = BigCtx::new(DEFAULT_PRECISION_BITS);
    let big_points = spiral_coordinates(&t_seq, &turn_angles, &mut ctx);
    let points: Vec<DVector<f64>> = big_points
        .iter()
        .map(|p| dvector![ctx.to_f64(&p[0]), ctx.to_f64(&p[1])])
        .collect();
    let config = PointConfig::euclidean(points)?;
    Ok(SpiralConstruction {
        t_seq,
        turn_angles,
        certificates,
        total_turn: sigma,
        config,
    })
}

/// x_0 = (0,0); step n goes in the direction turned by a_1 + ... + a_{n-1}
/// from the x-axis with length t_n.
fn spiral_coordinates(
    t_seq: &[f64],
    turn_angles: &[f64],
    ctx: &mut BigCtx,
) -> Vec<[BigFloat; 2]> {
    let mut pts: Vec<[BigFloat; 2]> = vec![[ctx.zero(), ctx.zero()]];
    let mut heading = ctx.zero();
    for (i, &step) in t_seq.iter().enumerate() {
        if i >= 1 {
            heading = ctx.add(&heading, &ctx.from_f64(turn_angles[i - 1]));
        }
        let (c, s) = (ctx.cos(&heading), ctx.sin(&heading));
        let st = ctx.from_f64(step);
        let last = pts.last().unwrap();
        let x = ctx.add(&last[0], &ctx.mul(&st, &c));
        let y = ctx.add(&last[1], &ctx.mul(&st, &s));
        pts.push([x, y]);
    }
    pts
}
