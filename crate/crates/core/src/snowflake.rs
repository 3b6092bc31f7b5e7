//! Snowflaking functions: concave moduli `h` with `h(0) = 0` used to deform
//! metrics as `h ∘ d`.
//!
//! Axioms, checked per function:
//!   S1: h(0) = 0
//!   S2: h concave
//!   S3: h(t)/t -> infinity as t -> 0
//!   S4: h(t)/t -> 0 as t -> infinity
//!
//! A function satisfying all four is a full snowflaking function; dropping S3
//! or S4 gives a degenerate one (those are exactly the moduli the spiral
//! constructions need). The ratio c(t) = h(t)/t is nonincreasing for any
//! concave h with h(0) = 0; its limits at 0 and infinity decide S3/S4, and
//! the thresholds T and T~ below are defined by bisection on c.

use astro_float::BigFloat;

use crate::bigfloat::BigCtx;
use crate::error::{Error, Result};

/// Relative tolerance for threshold bisections.
const THRESHOLD_REL_TOL: f64 = 1e-12;

/// Evaluation-side view of a concave gauge. Implemented by
/// [`SnowflakeFunction`] and by the internal affine segment surrogate used by
/// the per-n constructions.
pub trait HFunction {
    fn eval(&self, t: f64) -> f64;
    fn inverse(&self, y: f64) -> Result<f64>;
    /// Extended-precision evaluation (exact formulas for the
    /// piecewise-linear and linear-plus-sqrt families; used by construction
    /// verification where f64 cannot resolve the slacks).
    fn eval_big(&self, t: &BigFloat, ctx: &BigCtx) -> BigFloat;
    fn inverse_big(&self, y: &BigFloat, ctx: &BigCtx) -> BigFloat;
    /// c = lim_{t -> inf} h(t)/t, exact for every supported family.
    fn modulus_limit(&self) -> f64;
    /// c(t) - c, computed without cancellation.
    fn modulus_deficit(&self, t: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// Keep the last slope forever; c(t) -> last slope > 0, so S4 fails.
    ExtendLast,
    /// After the last knot T, implicit segments [T 2^{k-1}, T 2^k) carry
    /// slope halved per doubling; slopes -> 0, so S4 holds.
    GeometricHalving,
}

/// Strictly concave leading piece `coeff * t^exponent` on `[0, first knot)`,
/// installed so a piecewise-linear function can satisfy S3.
#[derive(Clone, Copy, Debug)]
pub struct LeadingSegment {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug)]
pub struct PiecewiseLinear {
    leading: Option<LeadingSegment>,
    knots: Vec<f64>,
    slopes: Vec<f64>,
    /// h(knots[k]), cached at construction.
    values: Vec<f64>,
    tail: Tail,
}

impl PiecewiseLinear {
    pub fn new(
        leading: Option<LeadingSegment>,
        knots: Vec<f64>,
        slopes: Vec<f64>,
        tail: Tail,
    ) -> Result<Self> {
        if knots.is_empty() || knots.len() != slopes.len() {
            return Err(Error::Structural(
                "piecewise function needs equally many knots and slopes, at least one".into(),
            ));
        }
        if knots.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Structural("knots must be finite and nonnegative".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Structural("knots must be strictly increasing".into()));
        }
        if slopes.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(Error::RejectedInput("slopes must be positive".into()));
        }
        if slopes.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::RejectedInput(
                "slopes must be strictly decreasing (concavity)".into(),
            ));
        }
        match &leading {
            None => {
                if knots[0] != 0.0 {
                    return Err(Error::Structural(
                        "without a leading segment the first knot must be 0".into(),
                    ));
                }
            }
            Some(seg) => {
                if knots[0] <= 0.0 {
                    return Err(Error::Structural(
                        "leading segment needs a positive first knot".into(),
                    ));
                }
                if !(seg.exponent > 0.0 && seg.exponent < 1.0) || seg.coeff <= 0.0 {
                    return Err(Error::RejectedInput(
                        "leading segment needs coeff > 0 and exponent in (0,1)".into(),
                    ));
                }
                // Concavity across the junction: left derivative >= first slope.
                let left_slope = seg.coeff * seg.exponent * knots[0].powf(seg.exponent - 1.0);
                if left_slope < slopes[0] * (1.0 - 1e-12) {
                    return Err(Error::RejectedInput(format!(
                        "leading segment breaks concavity at t={}: slope {left_slope} < {}",
                        knots[0], slopes[0]
                    )));
                }
            }
        }
        let mut values = Vec::with_capacity(knots.len());
        values.push(match &leading {
            Some(seg) => seg.coeff * knots[0].powf(seg.exponent),
            None => 0.0,
        });
        for k in 1..knots.len() {
            let v = values[k - 1] + slopes[k - 1] * (knots[k] - knots[k - 1]);
            values.push(v);
        }
        Ok(PiecewiseLinear {
            leading,
            knots,
            slopes,
            values,
            tail,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }
    pub fn leading(&self) -> Option<LeadingSegment> {
        self.leading
    }
    pub fn tail(&self) -> Tail {
        self.tail
    }
    pub fn value_at_knot(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Index of the explicit segment containing t, or None when t is in the
    /// leading piece.
    fn segment_of(&self, t: f64) -> Option<usize> {
        if t < self.knots[0] {
            return None;
        }
        // Knot lists are short; linear scan from the top.
        let mut k = self.knots.len() - 1;
        while k > 0 && t < self.knots[k] {
            k -= 1;
        }
        Some(k)
    }

    /// Tail segment index (>= 1) and its start/slope for t beyond the last
    /// knot under GeometricHalving.
    fn tail_segment(&self, t: f64) -> (f64, f64, f64) {
        let t_last = *self.knots.last().unwrap();
        let c_last = *self.slopes.last().unwrap();
        let mut start = t_last;
        let mut slope = c_last;
        let mut base = *self.values.last().unwrap();
        while t >= start * 2.0 {
            base += slope * start; // slope * (2*start - start)
            start *= 2.0;
            slope *= 0.5;
        }
        (start, slope, base)
    }

    fn eval_f64(&self, t: f64) -> f64 {
        match self.segment_of(t) {
            None => {
                let seg = self.leading.as_ref().unwrap();
                seg.coeff * t.powf(seg.exponent)
            }
            Some(k) => {
                let last = self.knots.len() - 1;
                if k == last && self.tail == Tail::GeometricHalving && t >= self.knots[last] {
                    let (start, slope, base) = self.tail_segment(t);
                    base + slope * (t - start)
                } else {
                    self.values[k] + self.slopes[k] * (t - self.knots[k])
                }
            }
        }
    }

    fn inverse_f64(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::Domain(format!("inverse argument {y} is negative")));
        }
        if y <= self.values[0] {
            return Ok(match &self.leading {
                Some(seg) => (y / seg.coeff).powf(1.0 / seg.exponent),
                None => 0.0,
            });
        }
        let last = self.knots.len() - 1;
        for k in 0..last {
            if y <= self.values[k + 1] {
                return Ok(self.knots[k] + (y - self.values[k]) / self.slopes[k]);
            }
        }
        match self.tail {
            Tail::ExtendLast => {
                Ok(self.knots[last] + (y - self.values[last]) / self.slopes[last])
            }
            Tail::GeometricHalving => {
                let mut start = self.knots[last];
                let mut slope = self.slopes[last];
                let mut base = self.values[last];
                while y > base + slope * start {
                    base += slope * start;
                    start *= 2.0;
                    slope *= 0.5;
                }
                Ok(start + (y - base) / slope)
            }
        }
    }
}

/// A snowflaking function (possibly degenerate). All variants are strictly
/// increasing, concave, and vanish at zero by construction.
#[derive(Clone, Debug)]
pub enum SnowflakeFunction {
    /// t^alpha with alpha in (0, 1].
    Power { alpha: f64 },
    /// linear * t + sqrt_coeff * sqrt(t). Satisfies S3 when sqrt_coeff > 0;
    /// fails S4 when linear > 0 (c(t) -> linear).
    LinearPlusSqrt { linear: f64, sqrt: f64 },
    PiecewiseLinear(PiecewiseLinear),
}

impl SnowflakeFunction {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
            return Err(Error::RejectedInput(format!(
                "power exponent {alpha} outside (0, 1]"
            )));
        }
        Ok(SnowflakeFunction::Power { alpha })
    }

    pub fn linear_plus_sqrt(linear: f64, sqrt: f64) -> Result<Self> {
        if linear < 0.0 || sqrt < 0.0 || linear + sqrt <= 0.0 {
            return Err(Error::RejectedInput(
                "linear-plus-sqrt needs nonnegative coefficients, not both zero".into(),
            ));
        }
        Ok(SnowflakeFunction::LinearPlusSqrt { linear, sqrt })
    }

    pub fn piecewise(pl: PiecewiseLinear) -> Self {
        SnowflakeFunction::PiecewiseLinear(pl)
    }

    /// Parse CLI expressions: `t^0.5`, `sqrt(t)`, `t`, `t+sqrt(t)`,
    /// `0.5*t+2*sqrt(t)`, `0.25*t`.
    pub fn parse(expr: &str) -> Result<Self> {
        let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Structural("empty snowflake expression".into()));
        }
        // Single power form.
        if let Some(rest) = s.strip_prefix("t^") {
            let alpha: f64 = rest
                .parse()
                .map_err(|_| Error::Structural(format!("bad exponent in `{expr}`")))?;
            return SnowflakeFunction::power(alpha);
        }
        let mut linear = 0.0;
        let mut sqrt = 0.0;
        for term in s.split('+') {
            let (coeff, base) = match term.find('*') {
                Some(i) => {
                    let c: f64 = term[..i]
                        .parse()
                        .map_err(|_| Error::Structural(format!("bad coefficient in `{term}`")))?;
                    (c, &term[i + 1..])
                }
                None => {
                    // Allow juxtaposed numeric prefix like `0.5t`.
                    let split = term
                        .find(|c: char| c.is_alphabetic())
                        .ok_or_else(|| Error::Structural(format!("no variable in `{term}`")))?;
                    if split == 0 {
                        (1.0, term)
                    } else {
                        let c: f64 = term[..split].parse().map_err(|_| {
                            Error::Structural(format!("bad coefficient in `{term}`"))
                        })?;
                        (c, &term[split..])
                    }
                }
            };
            match base {
                "t" => linear += coeff,
                "sqrt(t)" => sqrt += coeff,
                other => {
                    return Err(Error::Structural(format!(
                        "unsupported term `{other}` in `{expr}` (use t, sqrt(t), or t^a)"
                    )))
                }
            }
        }
        if sqrt == 0.0 && linear == 1.0 {
            return SnowflakeFunction::power(1.0);
        }
        if linear == 0.0 && sqrt == 1.0 {
            return SnowflakeFunction::power(0.5);
        }
        SnowflakeFunction::linear_plus_sqrt(linear, sqrt)
    }

    /// True when the function is strictly increasing (always, for supported
    /// variants).
    pub fn strictly_increasing(&self) -> bool {
        true
    }
}

impl HFunction for SnowflakeFunction {
    fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "h evaluated at negative {t}");
        match self {
            SnowflakeFunction::Power { alpha } => t.powf(*alpha),
            SnowflakeFunction::LinearPlusSqrt { linear, sqrt } => linear * t + sqrt * t.sqrt(),
            SnowflakeFunction::PiecewiseLinear(pl) => pl.eval_f64(t),
        }
    }

    fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::Domain(format!("inverse argument {y} is negative")));
        }
        match self {
            SnowflakeFunction::Power { alpha } => Ok(y.powf(1.0 / alpha)),
            // Catalog entries invert by monotone bisection.
            SnowflakeFunction::LinearPlusSqrt { .. } => Ok(bisect_inverse(self, y)),
            SnowflakeFunction::PiecewiseLinear(pl) => pl.inverse_f64(y),
        }
    }

    fn eval_big(&self, t: &BigFloat, ctx: &BigCtx) -> BigFloat {
        match self {
            SnowflakeFunction::Power { alpha } => {
                // Not needed by the construction pipeline (power laws satisfy
                // S4); f64 precision serves generic callers.
                ctx.from_f64(ctx.to_f64(t).powf(*alpha))
            }
            SnowflakeFunction::LinearPlusSqrt { linear, sqrt } => ctx.add(
                &ctx.mul(&ctx.from_f64(*linear), t),
                &ctx.mul(&ctx.from_f64(*sqrt), &ctx.sqrt(t)),
            ),
            SnowflakeFunction::PiecewiseLinear(pl) => {
                // Segment selection by the f64 shadow is safe: the function
                // is continuous, so boundary misselection changes nothing.
                let tf = ctx.to_f64(t);
                match pl.segment_of(tf) {
                    None => ctx.from_f64(pl.eval_f64(tf)),
                    Some(k) => {
                        let last = pl.knots.len() - 1;
                        if k == last && pl.tail == Tail::GeometricHalving && tf >= pl.knots[last] {
                            let (start, slope, base) = pl.tail_segment(tf);
                            ctx.add(
                                &ctx.from_f64(base),
                                &ctx.mul(
                                    &ctx.from_f64(slope),
                                    &ctx.sub(t, &ctx.from_f64(start)),
                                ),
                            )
                        } else {
                            ctx.add(
                                &ctx.from_f64(pl.values[k]),
                                &ctx.mul(
                                    &ctx.from_f64(pl.slopes[k]),
                                    &ctx.sub(t, &ctx.from_f64(pl.knots[k])),
                                ),
                            )
                        }
                    }
                }
            }
        }
    }

    fn inverse_big(&self, y: &BigFloat, ctx: &BigCtx) -> BigFloat {
        match self {
            SnowflakeFunction::Power { alpha } => {
                ctx.from_f64(ctx.to_f64(y).powf(1.0 / alpha))
            }
            SnowflakeFunction::LinearPlusSqrt { linear, sqrt } => {
                let a = ctx.from_f64(*linear);
                let b = ctx.from_f64(*sqrt);
                if *linear == 0.0 {
                    let w = ctx.div(y, &b);
                    return ctx.mul(&w, &w);
                }
                if *sqrt == 0.0 {
                    return ctx.div(y, &a);
                }
                // a u + b sqrt(u) = y; with w = sqrt(u):
                // w = 2y / (b + sqrt(b^2 + 4 a y)), cancellation-free.
                let disc = ctx.sqrt(&ctx.add(
                    &ctx.mul(&b, &b),
                    &ctx.mul(&ctx.from_f64(4.0), &ctx.mul(&a, y)),
                ));
                let w = ctx.div(&ctx.mul(&ctx.from_f64(2.0), y), &ctx.add(&b, &disc));
                ctx.mul(&w, &w)
            }
            SnowflakeFunction::PiecewiseLinear(pl) => {
                let yf = ctx.to_f64(y);
                if yf <= pl.values[0] {
                    return ctx.from_f64(pl.inverse_f64(yf).unwrap_or(0.0));
                }
                let last = pl.knots.len() - 1;
                for k in 0..last {
                    if yf <= pl.values[k + 1] {
                        return ctx.add(
                            &ctx.from_f64(pl.knots[k]),
                            &ctx.div(
                                &ctx.sub(y, &ctx.from_f64(pl.values[k])),
                                &ctx.from_f64(pl.slopes[k]),
                            ),
                        );
                    }
                }
                let (start, slope, base) = match pl.tail {
                    Tail::ExtendLast => (pl.knots[last], pl.slopes[last], pl.values[last]),
                    Tail::GeometricHalving => {
                        let mut start = pl.knots[last];
                        let mut slope = pl.slopes[last];
                        let mut base = pl.values[last];
                        while yf > base + slope * start {
                            base += slope * start;
                            start *= 2.0;
                            slope *= 0.5;
                        }
                        (start, slope, base)
                    }
                };
                ctx.add(
                    &ctx.from_f64(start),
                    &ctx.div(&ctx.sub(y, &ctx.from_f64(base)), &ctx.from_f64(slope)),
                )
            }
        }
    }

    fn modulus_limit(&self) -> f64 {
        match self {
            SnowflakeFunction::Power { alpha } => {
                if *alpha < 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
            SnowflakeFunction::LinearPlusSqrt { linear, .. } => *linear,
            SnowflakeFunction::PiecewiseLinear(pl) => match pl.tail {
                Tail::ExtendLast => *pl.slopes.last().unwrap(),
                Tail::GeometricHalving => 0.0,
            },
        }
    }

    fn modulus_deficit(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        match self {
            SnowflakeFunction::Power { alpha } => {
                if *alpha < 1.0 {
                    t.powf(alpha - 1.0)
                } else {
                    0.0
                }
            }
            SnowflakeFunction::LinearPlusSqrt { sqrt, .. } => sqrt / t.sqrt(),
            SnowflakeFunction::PiecewiseLinear(pl) => {
                let c = self.modulus_limit();
                match pl.segment_of(t) {
                    None => self.eval(t) / t - c,
                    Some(k) => {
                        let last = pl.knots.len() - 1;
                        if k == last && pl.tail == Tail::GeometricHalving {
                            self.eval(t) / t
                        } else {
                            // (v_k - c T_k + (c_k - c)(t - T_k)) / t, all terms >= 0.
                            let head = pl.values[k] - c * pl.knots[k];
                            (head + (pl.slopes[k] - c) * (t - pl.knots[k])) / t
                        }
                    }
                }
            }
        }
    }

}

fn bisect_inverse(h: &SnowflakeFunction, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let mut hi = 1.0f64;
    while h.eval(hi) < y {
        hi *= 2.0;
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if h.eval(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// h(t)/t; the paper-side quantity c(t), nonincreasing for every valid h.
pub fn modulus(h: &SnowflakeFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("modulus needs t > 0, got {t}")));
    }
    Ok(h.eval(t) / t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomStatus {
    Holds,
    Fails,
    /// Reserved for probe-only decisions where a finite grid cannot settle a
    /// limit statement. The shipped variants all decide symbolically.
    Undetermined,
}

#[derive(Clone, Copy, Debug)]
pub struct AxiomFlags {
    pub s1: AxiomStatus,
    pub s2: AxiomStatus,
    pub s3: AxiomStatus,
    pub s4: AxiomStatus,
}

impl AxiomFlags {
    pub fn all_hold(&self) -> bool {
        [self.s1, self.s2, self.s3, self.s4]
            .iter()
            .all(|s| *s == AxiomStatus::Holds)
    }
}

/// Logarithmic probe grid for axiom checks. Required to span at least
/// [1e-8, 1e8].
#[derive(Clone, Copy, Debug)]
pub struct ProbeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid {
            t_min: 1e-8,
            t_max: 1e8,
            points: 321,
        }
    }
}

impl ProbeGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

/// Decide the axioms. S1/S2 are checked directly (plus the constructors'
/// structural guarantees); S3/S4 are limit statements decided from the exact
/// modulus limits of the closed-form families, corroborated on the grid.
pub fn check_axioms(h: &SnowflakeFunction, probe: &ProbeGrid) -> Result<AxiomFlags> {
    if probe.t_min > 1e-8 || probe.t_max < 1e8 {
        return Err(Error::Structural(
            "probe grid must span at least [1e-8, 1e8]".into(),
        ));
    }
    let s1 = if h.eval(0.0) == 0.0 {
        AxiomStatus::Holds
    } else {
        AxiomStatus::Fails
    };
    // Concavity on the grid: midpoint value >= chord midpoint.
    let grid = probe.values();
    let mut s2 = AxiomStatus::Holds;
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let chord = 0.5 * (h.eval(a) + h.eval(b));
        let val = h.eval(mid);
        if val < chord - 1e-12 * chord.abs().max(1.0) {
            s2 = AxiomStatus::Fails;
            break;
        }
    }
    let s4 = if h.modulus_limit() == 0.0 {
        AxiomStatus::Holds
    } else {
        AxiomStatus::Fails
    };
    let s3 = match h {
        SnowflakeFunction::Power { alpha } => {
            if *alpha < 1.0 {
                AxiomStatus::Holds
            } else {
                AxiomStatus::Fails
            }
        }
        SnowflakeFunction::LinearPlusSqrt { sqrt, .. } => {
            if *sqrt > 0.0 {
                AxiomStatus::Holds
            } else {
                AxiomStatus::Fails
            }
        }
        SnowflakeFunction::PiecewiseLinear(pl) => {
            if pl.leading().is_some() {
                AxiomStatus::Holds
            } else {
                AxiomStatus::Fails
            }
        }
    };
    Ok(AxiomFlags { s1, s2, s3, s4 })
}

/// Least S0 (to 1e-12 relative) such that (t/h(t)) * (h(S)/S) <= 1/2 for all
/// S >= S0; equivalently c(S) <= c(t)/2. Consequently
/// h(S + t) <= h(S) + h(t)/2 for all S >= S0.
pub fn threshold_t(h: &SnowflakeFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("threshold_T needs t > 0, got {t}")));
    }
    let target = h.eval(t) / (2.0 * t);
    if h.modulus_limit() >= target {
        return Err(Error::UnboundedThreshold(format!(
            "c(S) -> {} never drops to c({t})/2 = {target}; h fails S4 hard enough",
            h.modulus_limit()
        )));
    }
    let c_of = |s: f64| h.eval(s) / s;
    let mut hi = t;
    let mut grow = 0;
    while c_of(hi) > target {
        hi *= 2.0;
        grow += 1;
        if grow > 2000 {
            return Err(Error::UnboundedThreshold(
                "no S with c(S) <= c(t)/2 found within f64 range".into(),
            ));
        }
    }
    let mut lo = hi / 2.0;
    if grow == 0 {
        // Already satisfied at S = t; the least such S0 could be below t, but
        // T(t) >= t is the natural clamp (the halving bound is only ever used
        // with S >= T(t) >= t).
        return Ok(t);
    }
    while hi - lo > THRESHOLD_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if c_of(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Greatest t0 <= S (to 1e-12 relative) such that (tapio-style halving)
/// holds for all 0 < t <= t0; equivalently c(t) >= 2 c(S).
pub fn threshold_t_tilde(h: &SnowflakeFunction, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("threshold_T~ needs S > 0, got {s}")));
    }
    let probe = ProbeGrid::default();
    let flags = check_axioms(h, &probe)?;
    if flags.s3 != AxiomStatus::Holds {
        return Err(Error::ZeroThreshold(
            "h(t)/t does not blow up near 0 (S3 fails); no positive threshold exists".into(),
        ));
    }
    let target = 2.0 * h.eval(s) / s;
    let c_of = |t: f64| h.eval(t) / t;
    // c(S) < 2 c(S) always, so the predicate is false at S; find a true point.
    let mut lo = s;
    let mut shrink = 0;
    while c_of(lo) < target {
        lo *= 0.5;
        shrink += 1;
        if shrink > 2000 {
            return Err(Error::ZeroThreshold(
                "no t with c(t) >= 2 c(S) found within f64 range".into(),
            ));
        }
    }
    let mut hi = (lo * 2.0).min(s);
    while hi - lo > THRESHOLD_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if c_of(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.min(s))
}

#[derive(Clone, Copy, Debug)]
pub struct HalvingCheck {
    pub holds: bool,
    /// h(S) + h(t)/2 - h(S+t); guaranteed nonnegative when S >= T(t).
    pub slack: f64,
}

pub fn check_halving(h: &SnowflakeFunction, s: f64, t: f64) -> Result<HalvingCheck> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Domain("check_halving needs S, t > 0".into()));
    }
    let slack = h.eval(s) + 0.5 * h.eval(t) - h.eval(s + t);
    Ok(HalvingCheck {
        holds: slack >= 0.0,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_h() -> SnowflakeFunction {
        SnowflakeFunction::power(0.5).unwrap()
    }

    fn t_plus_sqrt() -> SnowflakeFunction {
        SnowflakeFunction::linear_plus_sqrt(1.0, 1.0).unwrap()
    }

    #[test]
    fn power_eval_inverse() {
        let h = sqrt_h();
        assert_eq!(h.eval(9.0), 3.0);
        assert_eq!(h.inverse(3.0).unwrap(), 9.0);
    }

    #[test]
    fn catalog_eval_inverse() {
        let h = t_plus_sqrt();
        assert_eq!(h.eval(4.0), 6.0);
        // Bisection oracle, 1e-12 relative.
        let inv = h.inverse(6.0).unwrap();
        assert!((inv - 4.0).abs() <= 4.0 * 1e-12, "inverse(6) = {inv}");
        // Extended-precision closed form agrees.
        let ctx = BigCtx::new(crate::bigfloat::DEFAULT_PRECISION_BITS);
        let inv_big = ctx.to_f64(&h.inverse_big(&ctx.from_f64(6.0), &ctx));
        assert!((inv_big - 4.0).abs() < 1e-14);
    }

    #[test]
    fn modulus_values() {
        let h = sqrt_h();
        assert_eq!(modulus(&h, 4.0).unwrap(), 0.5);
        let g = t_plus_sqrt();
        assert_eq!(modulus(&g, 4.0).unwrap(), 1.5);
        assert_eq!(g.modulus_limit(), 1.0);
        assert!(modulus(&g, 0.0).is_err());
        // Deficit form is exact: c(t) - 1 = t^{-1/2}.
        assert!((g.modulus_deficit(1e30) - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn axioms_per_family() {
        let probe = ProbeGrid::default();
        let f = check_axioms(&sqrt_h(), &probe).unwrap();
        assert!(f.all_hold());
        let f = check_axioms(&t_plus_sqrt(), &probe).unwrap();
        assert_eq!(f.s1, AxiomStatus::Holds);
        assert_eq!(f.s2, AxiomStatus::Holds);
        assert_eq!(f.s3, AxiomStatus::Holds);
        assert_eq!(f.s4, AxiomStatus::Fails);
        // Piecewise with concave leading segment and halving tail: all hold.
        let pl = PiecewiseLinear::new(
            Some(LeadingSegment {
                coeff: 2.0,
                exponent: 0.5,
            }),
            vec![1.0, 3.0],
            vec![1.0, 0.5],
            Tail::GeometricHalving,
        )
        .unwrap();
        let f = check_axioms(&SnowflakeFunction::piecewise(pl), &probe).unwrap();
        assert!(f.all_hold());
    }

    #[test]
    fn piecewise_eval_inverse_roundtrip() {
        let pl = PiecewiseLinear::new(
            Some(LeadingSegment {
                coeff: 2.0,
                exponent: 0.5,
            }),
            vec![1.0, 4.0, 10.0],
            vec![1.0, 0.5, 0.25],
            Tail::GeometricHalving,
        )
        .unwrap();
        let h = SnowflakeFunction::piecewise(pl);
        // Continuity at knots and tail.
        for &t in &[0.5, 1.0, 2.0, 4.0, 7.0, 10.0, 15.0, 25.0, 1e4, 1e9] {
            let y = h.eval(t);
            let back = h.inverse(y).unwrap();
            assert!(
                (back - t).abs() <= 1e-10 * t,
                "roundtrip failed at {t}: {back}"
            );
        }
        // Weakly increasing across a fine grid.
        let mut prev = 0.0;
        let mut t = 1e-6;
        while t < 1e10 {
            let v = h.eval(t);
            assert!(v >= prev);
            prev = v;
            t *= 1.31;
        }
    }

    #[test]
    fn rejects_bad_constructions() {
        assert!(SnowflakeFunction::power(1.5).is_err());
        assert!(SnowflakeFunction::power(0.0).is_err());
        assert!(SnowflakeFunction::linear_plus_sqrt(0.0, 0.0).is_err());
        // Increasing slopes break concavity.
        assert!(PiecewiseLinear::new(None, vec![0.0, 1.0], vec![0.5, 1.0], Tail::ExtendLast)
            .is_err());
        // Leading segment flatter than the first slope breaks concavity:
        // slope of 0.1 sqrt(t) at 1 is 0.05 < 1.
        assert!(PiecewiseLinear::new(
            Some(LeadingSegment {
                coeff: 0.1,
                exponent: 0.5
            }),
            vec![1.0, 2.0],
            vec![1.0, 0.5],
            Tail::ExtendLast,
        )
        .is_err());
    }

    #[test]
    fn threshold_t_power() {
        let h = sqrt_h();
        let t1 = threshold_t(&h, 1.0).unwrap();
        assert!((t1 - 4.0).abs() < 1e-8 * 4.0, "T(1) = {t1}");
        let t4 = threshold_t(&h, 4.0).unwrap();
        assert!((t4 - 16.0).abs() < 1e-8 * 16.0, "T(4) = {t4}");
        // Scaling law T(t)/t = 2^{1/(1-alpha)} across an alpha grid.
        for &alpha in &[0.2, 0.3, 0.5, 0.6, 0.7, 0.9] {
            let h = SnowflakeFunction::power(alpha).unwrap();
            let expect = 2f64.powf(1.0 / (1.0 - alpha));
            for &t in &[0.1, 1.0, 17.0] {
                let ratio = threshold_t(&h, t).unwrap() / t;
                assert!(
                    (ratio - expect).abs() <= 1e-9 * expect,
                    "alpha={alpha} t={t}: ratio {ratio} vs {expect}"
                );
            }
        }
        // t + sqrt(t) fails S4, so no finite threshold exists.
        assert!(matches!(
            threshold_t(&t_plus_sqrt(), 1.0),
            Err(Error::UnboundedThreshold(_))
        ));
    }

    #[test]
    fn threshold_t_tilde_power() {
        let h = sqrt_h();
        let v = threshold_t_tilde(&h, 4.0).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "T~(4) = {v}");
        let v = threshold_t_tilde(&h, 16.0).unwrap();
        assert!((v - 4.0).abs() < 1e-8 * 4.0, "T~(16) = {v}");
        assert!(threshold_t_tilde(&h, 100.0).unwrap() <= 100.0);
        // Pure linear fails S3.
        let lin = SnowflakeFunction::linear_plus_sqrt(1.0, 0.0).unwrap();
        assert!(matches!(
            threshold_t_tilde(&lin, 4.0),
            Err(Error::ZeroThreshold(_))
        ));
    }

    #[test]
    fn halving_examples() {
        let h = sqrt_h();
        let c = check_halving(&h, 4.0, 1.0).unwrap();
        assert!(c.holds);
        assert!((c.slack - (2.5 - 5f64.sqrt())).abs() < 1e-12);
        let c = check_halving(&h, 1.0, 1.0).unwrap();
        assert!(c.holds);
        assert!((c.slack - (1.5 - 2f64.sqrt())).abs() < 1e-12);
        // For t + sqrt(t) the slack approaches (sqrt(t) - t)/2: positive for
        // t < 1, zero in the limit at t = 1.
        let g = t_plus_sqrt();
        let t: f64 = 0.25;
        let s = 1e6;
        let limit = (t.sqrt() - t) / 2.0;
        let c = check_halving(&g, s, t).unwrap();
        assert!(c.holds);
        assert!((c.slack - limit).abs() < 1e-3, "slack {} vs {}", c.slack, limit);
        // At t = 1 the limit is 0, approached from below.
        let c = check_halving(&g, 1e6, 1.0).unwrap();
        assert!(c.slack < 0.0 && c.slack > -1e-3);
    }

    #[test]
    fn parser_forms() {
        assert!(matches!(
            SnowflakeFunction::parse("t^0.5").unwrap(),
            SnowflakeFunction::Power { alpha } if alpha == 0.5
        ));
        assert!(matches!(
            SnowflakeFunction::parse("sqrt(t)").unwrap(),
            SnowflakeFunction::Power { alpha } if alpha == 0.5
        ));
        assert!(matches!(
            SnowflakeFunction::parse("t").unwrap(),
            SnowflakeFunction::Power { alpha } if alpha == 1.0
        ));
        let h = SnowflakeFunction::parse("t+sqrt(t)").unwrap();
        assert_eq!(h.eval(4.0), 6.0);
        let h = SnowflakeFunction::parse("0.5*t + sqrt(t)").unwrap();
        assert_eq!(h.eval(4.0), 4.0);
        let h = SnowflakeFunction::parse("0.5t+2*sqrt(t)").unwrap();
        assert_eq!(h.eval(4.0), 6.0);
        assert!(SnowflakeFunction::parse("exp(t)").is_err());
    }
}
