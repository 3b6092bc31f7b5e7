//! Interchange formats: metrics as JSON (labels + row-major matrix) or CSV
//! (header row of labels), point sets as CSV, norms and snowflaking
//! functions as tagged JSON unions, certificates and reports as JSON.
//!
//! JSON files carry a top-level `"schema": "snowflake-lab/1"` field. Decimal
//! output uses 17 significant digits, enough to round-trip every f64
//! exactly; bit-exactness of the text itself is not promised, value
//! round-trips are.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certify::{RefutationMode, ViolationCertificate};
use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::norms::{LpExponent, Norm};
use crate::snowflake::{LeadingSegment, PiecewiseLinear, SnowflakeFunction, Tail};

pub const SCHEMA: &str = "snowflake-lab/1";

/// 17 significant digits: unique decimal representation of any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_schema(schema: &str) -> Result<()> {
    if schema != SCHEMA {
        return Err(Error::Structural(format!(
            "unsupported schema `{schema}` (expected `{SCHEMA}`)"
        )));
    }
    Ok(())
}

fn bad_json(err: serde_json::Error) -> Error {
    Error::Structural(format!("malformed JSON: {err}"))
}

// ---------------------------------------------------------------------------
// Metrics

#[derive(Serialize, Deserialize)]
struct MetricFile {
    schema: String,
    labels: Vec<String>,
    /// Row-major distance matrix.
    dist: Vec<Vec<f64>>,
}

pub fn metric_to_json(m: &FiniteMetric) -> String {
    let n = m.len();
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.dist(i, j)).collect())
        .collect();
    let file = MetricFile {
        schema: SCHEMA.into(),
        labels: m.labels().to_vec(),
        dist,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("serializable");
    s.push('\n');
    s
}

pub fn metric_from_json(text: &str) -> Result<FiniteMetric> {
    let file: MetricFile = serde_json::from_str(text).map_err(bad_json)?;
    check_schema(&file.schema)?;
    let n = file.labels.len();
    if file.dist.len() != n || file.dist.iter().any(|r| r.len() != n) {
        return Err(Error::Structural(
            "distance matrix shape does not match the label count".into(),
        ));
    }
    let dist = DMatrix::from_fn(n, n, |i, j| file.dist[i][j]);
    FiniteMetric::new(file.labels, dist)
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains([',', '"', '\n', '\r']) {
        return Err(Error::Structural(format!(
            "label `{label}` must be nonempty and free of commas, quotes, and newlines"
        )));
    }
    Ok(())
}

/// CSV form: header row of labels, then the n x n matrix.
pub fn metric_to_csv(m: &FiniteMetric) -> Result<String> {
    for l in m.labels() {
        check_label(l)?;
    }
    let mut out = m.labels().join(",");
    out.push('\n');
    let n = m.len();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| fmt_f64(m.dist(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn metric_from_csv(text: &str) -> Result<FiniteMetric> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Structural("empty CSV".into()))?;
    let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    for l in &labels {
        check_label(l)?;
    }
    let n = labels.len();
    let mut dist = DMatrix::zeros(n, n);
    let mut row = 0;
    for line in lines {
        if row >= n {
            return Err(Error::Structural("too many matrix rows".into()));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(Error::Structural(format!(
                "row {row} has {} cells, expected {n}",
                cells.len()
            )));
        }
        for (j, c) in cells.iter().enumerate() {
            dist[(row, j)] = c
                .trim()
                .parse()
                .map_err(|_| Error::Structural(format!("bad number `{c}` in row {row}")))?;
        }
        row += 1;
    }
    if row != n {
        return Err(Error::Structural(format!("{row} matrix rows, expected {n}")));
    }
    FiniteMetric::new(labels, dist)
}

// ---------------------------------------------------------------------------
// Point sets

/// CSV form: header `label,x1,...,xd`, one point per row.
pub fn points_to_csv(labels: &[String], points: &[DVector<f64>]) -> Result<String> {
    if labels.len() != points.len() {
        return Err(Error::Structural("label/point count mismatch".into()));
    }
    let dim = points.first().map(|p| p.len()).unwrap_or(0);
    let mut out = String::from("label");
    for k in 0..dim {
        out.push_str(&format!(",x{}", k + 1));
    }
    out.push('\n');
    for (l, p) in labels.iter().zip(points) {
        check_label(l)?;
        if p.len() != dim {
            return Err(Error::Structural("inconsistent point dimensions".into()));
        }
        out.push_str(l);
        for v in p.iter() {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn points_from_csv(text: &str) -> Result<(Vec<String>, Vec<DVector<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Structural("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.is_empty() || cols[0].trim() != "label" {
        return Err(Error::Structural(
            "points CSV must start with a `label,x1,...` header".into(),
        ));
    }
    let dim = cols.len() - 1;
    if dim == 0 {
        return Err(Error::Structural("points CSV has no coordinate columns".into()));
    }
    let mut labels = Vec::new();
    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != dim + 1 {
            return Err(Error::Structural(format!(
                "row {lineno} has {} cells, expected {}",
                cells.len(),
                dim + 1
            )));
        }
        labels.push(cells[0].trim().to_string());
        let mut v = DVector::zeros(dim);
        for k in 0..dim {
            v[k] = cells[k + 1].trim().parse().map_err(|_| {
                Error::Structural(format!("bad number `{}` in row {lineno}", cells[k + 1]))
            })?;
        }
        points.push(v);
    }
    Ok((labels, points))
}

// ---------------------------------------------------------------------------
// Norms

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum NormBody {
    Lp {
        /// A number, or the string "inf".
        p: serde_json::Value,
        dim: usize,
    },
    PolytopalVertices {
        vertices: Vec<Vec<f64>>,
    },
    PolytopalFacets {
        dim: usize,
        facets: Vec<Vec<f64>>,
    },
    Ellipsoidal {
        matrix: Vec<Vec<f64>>,
    },
}

#[derive(Serialize, Deserialize)]
struct NormFile {
    schema: String,
    #[serde(flatten)]
    body: NormBody,
}

pub fn norm_to_json(norm: &Norm) -> String {
    let body = match norm {
        Norm::Lp { p, dim } => NormBody::Lp {
            p: match p {
                LpExponent::Infinity => serde_json::Value::String("inf".into()),
                LpExponent::Finite(v) => serde_json::json!(v),
            },
            dim: *dim,
        },
        Norm::Polytopal(poly) => match poly.vertices() {
            Some(v) => NormBody::PolytopalVertices {
                vertices: v.iter().map(|x| x.iter().copied().collect()).collect(),
            },
            None => NormBody::PolytopalFacets {
                dim: norm.dim(),
                facets: poly
                    .facets()
                    .iter()
                    .map(|f| f.iter().copied().collect())
                    .collect(),
            },
        },
        Norm::Ellipsoidal { a } => NormBody::Ellipsoidal {
            matrix: (0..a.nrows())
                .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
                .collect(),
        },
    };
    let mut s = serde_json::to_string_pretty(&NormFile {
        schema: SCHEMA.into(),
        body,
    })
    .expect("serializable");
    s.push('\n');
    s
}

pub fn norm_from_json(text: &str) -> Result<Norm> {
    let file: NormFile = serde_json::from_str(text).map_err(bad_json)?;
    check_schema(&file.schema)?;
    match file.body {
        NormBody::Lp { p, dim } => {
            let p = match &p {
                serde_json::Value::String(s) if s == "inf" || s == "infinity" => f64::INFINITY,
                serde_json::Value::Number(n) => n
                    .as_f64()
                    .ok_or_else(|| Error::Structural("bad p value".into()))?,
                other => {
                    return Err(Error::Structural(format!(
                        "p must be a number or \"inf\", got {other}"
                    )))
                }
            };
            Norm::lp(p, dim)
        }
        NormBody::PolytopalVertices { vertices } => {
            let dim = vertices
                .first()
                .map(|v| v.len())
                .ok_or_else(|| Error::Structural("empty vertex list".into()))?;
            Norm::from_vertices(dim, vertices.into_iter().map(DVector::from_vec).collect())
        }
        NormBody::PolytopalFacets { dim, facets } => {
            Norm::from_facets(dim, facets.into_iter().map(DVector::from_vec).collect())
        }
        NormBody::Ellipsoidal { matrix } => {
            let n = matrix.len();
            if matrix.iter().any(|r| r.len() != n) {
                return Err(Error::Structural("matrix is not square".into()));
            }
            Norm::ellipsoidal(DMatrix::from_fn(n, n, |i, j| matrix[i][j]))
        }
    }
}

/// Shorthand accepted on the command line: `l1`, `l2`, `linf`, `lp:1.5`, or
/// inline/at-file JSON.
pub fn norm_from_spec(spec: &str, dim: usize) -> Result<Norm> {
    match spec {
        "l1" => Ok(Norm::l1(dim)),
        "l2" => Ok(Norm::l2(dim)),
        "linf" | "loo" => Ok(Norm::linf(dim)),
        other => {
            if let Some(p) = other.strip_prefix("lp:") {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::Structural(format!("bad p in `{other}`")))?;
                return Norm::lp(p, dim);
            }
            if other.trim_start().starts_with('{') {
                return norm_from_json(other);
            }
            Err(Error::Structural(format!(
                "unknown norm spec `{other}` (use l1, l2, linf, lp:<p>, or JSON)"
            )))
        }
    }
}

// ---------------------------------------------------------------------------
// Snowflaking functions

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum SnowflakeBody {
    Power {
        alpha: f64,
    },
    LinearPlusSqrt {
        linear: f64,
        sqrt: f64,
    },
    PiecewiseLinear {
        knots: Vec<f64>,
        slopes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        leading: Option<LeadingBody>,
        tail: String,
    },
}

#[derive(Serialize, Deserialize)]
struct LeadingBody {
    coeff: f64,
    exponent: f64,
}

#[derive(Serialize, Deserialize)]
struct SnowflakeFile {
    schema: String,
    #[serde(flatten)]
    body: SnowflakeBody,
}

pub fn snowflake_to_json(h: &SnowflakeFunction) -> String {
    let body = match h {
        SnowflakeFunction::Power { alpha } => SnowflakeBody::Power { alpha: *alpha },
        SnowflakeFunction::LinearPlusSqrt { linear, sqrt } => SnowflakeBody::LinearPlusSqrt {
            linear: *linear,
            sqrt: *sqrt,
        },
        SnowflakeFunction::PiecewiseLinear(pl) => SnowflakeBody::PiecewiseLinear {
            knots: pl.knots().to_vec(),
            slopes: pl.slopes().to_vec(),
            leading: pl.leading().map(|l| LeadingBody {
                coeff: l.coeff,
                exponent: l.exponent,
            }),
            tail: match pl.tail() {
                Tail::ExtendLast => "extend-last".into(),
                Tail::GeometricHalving => "geometric-halving".into(),
            },
        },
    };
    let mut s = serde_json::to_string_pretty(&SnowflakeFile {
        schema: SCHEMA.into(),
        body,
    })
    .expect("serializable");
    s.push('\n');
    s
}

pub fn snowflake_from_json(text: &str) -> Result<SnowflakeFunction> {
    let file: SnowflakeFile = serde_json::from_str(text).map_err(bad_json)?;
    check_schema(&file.schema)?;
    match file.body {
        SnowflakeBody::Power { alpha } => SnowflakeFunction::power(alpha),
        SnowflakeBody::LinearPlusSqrt { linear, sqrt } => {
            SnowflakeFunction::linear_plus_sqrt(linear, sqrt)
        }
        SnowflakeBody::PiecewiseLinear {
            knots,
            slopes,
            leading,
            tail,
        } => {
            let tail = match tail.as_str() {
                "extend-last" => Tail::ExtendLast,
                "geometric-halving" => Tail::GeometricHalving,
                other => {
                    return Err(Error::Structural(format!(
                        "unknown tail `{other}` (extend-last or geometric-halving)"
                    )))
                }
            };
            let leading = leading.map(|l| LeadingSegment {
                coeff: l.coeff,
                exponent: l.exponent,
            });
            Ok(SnowflakeFunction::piecewise(PiecewiseLinear::new(
                leading, knots, slopes, tail,
            )?))
        }
    }
}

/// Command-line form: an expression (`t^0.5`, `t+sqrt(t)`, ...) or inline
/// JSON.
pub fn snowflake_from_spec(spec: &str) -> Result<SnowflakeFunction> {
    if spec.trim_start().starts_with('{') {
        snowflake_from_json(spec)
    } else {
        SnowflakeFunction::parse(spec)
    }
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Serialize)]
struct ChainStepOut<'a> {
    label: &'a str,
    lhs: f64,
    rhs: f64,
    slack: f64,
    holds: bool,
}

#[derive(Serialize)]
struct CertificateFile<'a> {
    schema: &'a str,
    mode: &'a str,
    apex: usize,
    x: usize,
    y: usize,
    apex_angle: f64,
    thresholds: serde_json::Value,
    chain: Vec<ChainStepOut<'a>>,
    conclusion: serde_json::Value,
}

pub fn certificate_to_json(cert: &ViolationCertificate) -> String {
    let mode = match cert.mode {
        RefutationMode::Alpha => "alpha",
        RefutationMode::GeneralUnbounded => "general-h (unbounded)",
        RefutationMode::GeneralAccumulation => "general-h (accumulation)",
    };
    let file = CertificateFile {
        schema: SCHEMA,
        mode,
        apex: cert.apex,
        x: cert.x,
        y: cert.y,
        apex_angle: cert.apex_angle,
        thresholds: serde_json::json!({
            "angle_threshold": cert.thresholds.angle_threshold,
            "epsilon": cert.thresholds.epsilon,
            "C": cert.thresholds.c_bound,
            "K": cert.thresholds.k_bound,
        }),
        chain: cert
            .chain
            .iter()
            .map(|s| ChainStepOut {
                label: &s.label,
                lhs: s.lhs,
                rhs: s.rhs,
                slack: s.slack,
                holds: s.holds,
            })
            .collect(),
        conclusion: serde_json::json!({
            "statement": "pulled-back triangle inequality violated",
            "d_xy": cert.conclusion.d_xy,
            "d_zx": cert.conclusion.d_zx,
            "d_zy": cert.conclusion.d_zy,
            "slack": cert.conclusion.slack,
        }),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("serializable");
    s.push('\n');
    s
}

/// Human-readable proof transcript for a certificate.
pub fn certificate_transcript(cert: &ViolationCertificate) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "refutation certificate (mode: {:?})\n",
        cert.mode
    ));
    out.push_str(&format!(
        "  apex z = point {}, endpoints x = point {}, y = point {}\n",
        cert.apex, cert.x, cert.y
    ));
    out.push_str(&format!(
        "  apex angle = {} (threshold pi - {})\n",
        fmt_f64(cert.apex_angle),
        fmt_f64(cert.thresholds.angle_threshold)
    ));
    out.push_str(&format!(
        "  constants: epsilon = {}, C = {}, K = {}\n",
        fmt_f64(cert.thresholds.epsilon),
        fmt_f64(cert.thresholds.c_bound),
        fmt_f64(cert.thresholds.k_bound)
    ));
    out.push_str("  chain:\n");
    for step in &cert.chain {
        out.push_str(&format!(
            "    [{}] {}: lhs = {}, rhs = {}, slack = {}\n",
            if step.holds { "ok" } else { "!!" },
            step.label,
            fmt_f64(step.lhs),
            fmt_f64(step.rhs),
            fmt_f64(step.slack)
        ));
    }
    out.push_str(&format!(
        "  conclusion: pulled-back triangle inequality violated\n    d(x,y) = {} > d(z,x) + d(z,y) = {} + {}  (slack {})\n",
        fmt_f64(cert.conclusion.d_xy),
        fmt_f64(cert.conclusion.d_zx),
        fmt_f64(cert.conclusion.d_zy),
        fmt_f64(cert.conclusion.slack)
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

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
        FiniteMetric::new(
            vec!["c".into(), "a".into(), "b".into(), "d".into()],
            d,
        )
        .unwrap()
    }

    #[test]
    fn metric_json_roundtrip() {
        let m = k13();
        let text = metric_to_json(&m);
        assert!(text.contains("snowflake-lab/1"));
        let back = metric_from_json(&text).unwrap();
        assert_eq!(back.labels(), m.labels());
        assert_eq!(back.matrix(), m.matrix());
        assert!(metric_from_json("{\"schema\":\"other/1\",\"labels\":[],\"dist\":[]}").is_err());
    }

    #[test]
    fn metric_csv_roundtrip() {
        let m = k13();
        let text = metric_to_csv(&m).unwrap();
        let back = metric_from_csv(&text).unwrap();
        assert_eq!(back.labels(), m.labels());
        assert_eq!(back.matrix(), m.matrix());
    }

    #[test]
    fn points_csv_roundtrip() {
        let labels = vec!["p0".to_string(), "p1".to_string()];
        let pts = vec![dvector![0.1, -2.0], dvector![3.0, 4.5]];
        let text = points_to_csv(&labels, &pts).unwrap();
        let (back_labels, back_pts) = points_from_csv(&text).unwrap();
        assert_eq!(back_labels, labels);
        assert_eq!(back_pts, pts);
    }

    #[test]
    fn norm_json_roundtrip() {
        for norm in [
            Norm::l1(3),
            Norm::linf(2),
            Norm::lp(1.5, 2).unwrap(),
            Norm::from_vertices(
                2,
                vec![dvector![1.0, 1.0], dvector![1.0, -1.0]],
            )
            .unwrap(),
        ] {
            let text = norm_to_json(&norm);
            let back = norm_from_json(&text).unwrap();
            assert_eq!(back.dim(), norm.dim());
            // Functional equality on a few vectors.
            for v in [dvector![0.3, 0.7], dvector![-1.0, 0.2]] {
                if v.len() == norm.dim() {
                    let a = norm.eval(&v).unwrap();
                    let b = back.eval(&v).unwrap();
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
        let n = norm_from_spec("lp:1.5", 3).unwrap();
        assert_eq!(n.dim(), 3);
        assert!(norm_from_spec("bogus", 2).is_err());
    }

    #[test]
    fn snowflake_json_roundtrip() {
        use crate::snowflake::HFunction;
        let hs = vec![
            SnowflakeFunction::power(0.5).unwrap(),
            SnowflakeFunction::linear_plus_sqrt(0.5, 1.0).unwrap(),
            SnowflakeFunction::piecewise(
                PiecewiseLinear::new(
                    Some(LeadingSegment {
                        coeff: 2.0,
                        exponent: 0.5,
                    }),
                    vec![1.0, 4.0],
                    vec![1.0, 0.25],
                    Tail::GeometricHalving,
                )
                .unwrap(),
            ),
        ];
        for h in hs {
            let text = snowflake_to_json(&h);
            let back = snowflake_from_json(&text).unwrap();
            for t in [0.2, 1.0, 3.7, 50.0] {
                assert!((h.eval(t) - back.eval(t)).abs() < 1e-15);
            }
        }
        let h = snowflake_from_spec("t+sqrt(t)").unwrap();
        assert_eq!(h.eval(4.0), 6.0);
    }

    #[test]
    fn fmt_f64_roundtrips() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e300, -7.25e-300] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
