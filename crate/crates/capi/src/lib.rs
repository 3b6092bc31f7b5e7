//! C ABI for snowflake-lab.
//!
//! Conventions:
//! - Opaque handles (`SnowlabMetric`, `SnowlabFunction`, `SnowlabNorm`) are
//!   created and destroyed by the paired `_new`/`_free` functions; a handle
//!   must not be used after `free`.
//! - Functions return [`SnowlabStatus`]; `SNOWLAB_STATUS_OK` is 0. On any
//!   other status the thread-local message from
//!   [`snowlab_last_error_message`] describes the failure.
//! - Strings returned through `char**` out-parameters are heap-allocated
//!   and must be released with [`snowlab_string_free`]. Structured results
//!   (embedding reports, certificates, constructions) come back as JSON in
//!   the `snowflake-lab/1` schema, the same documents the CLI emits.
//! - All entry points catch panics; a panic is reported as
//!   `SNOWLAB_STATUS_INTERNAL` instead of unwinding across the boundary.

// `!(t >= 0.0)` is a deliberate NaN guard, not a style slip.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use snowflake_lab::certify;
use snowflake_lab::counterexample as cx;
use snowflake_lab::embed;
use snowflake_lab::error::Error;
use snowflake_lab::io;
use snowflake_lab::metric::{self, FiniteMetric, PointConfig};
use snowflake_lab::norms::Norm;
use snowflake_lab::snowflake::{self, AxiomStatus, HFunction, SnowflakeFunction};

use nalgebra::{DMatrix, DVector};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SnowlabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Malformed or rejected input (shape, axioms, parse failures).
    InvalidInput = 2,
    /// Argument outside an operation's mathematical domain.
    Domain = 3,
    /// A threshold does not exist for the supplied function.
    Threshold = 4,
    /// A search range was exhausted or a segment was too short.
    Search = 5,
    /// An iterative solver hit its iteration cap.
    IterationLimit = 6,
    /// The norm or dimension is outside the supported family.
    Unsupported = 7,
    /// Internal failure (a panic was caught).
    Internal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> SnowlabStatus {
    match err {
        Error::Structural(_) | Error::DegenerateInput(_) | Error::RejectedInput(_) => {
            SnowlabStatus::InvalidInput
        }
        Error::Domain(_) => SnowlabStatus::Domain,
        Error::UnboundedThreshold(_) | Error::ZeroThreshold(_) => SnowlabStatus::Threshold,
        Error::SearchRange(_) | Error::SegmentTooShort { .. } => SnowlabStatus::Search,
        Error::IterationLimit { .. } => SnowlabStatus::IterationLimit,
        Error::UnsupportedNorm(_) | Error::BoundUnavailable(_) => SnowlabStatus::Unsupported,
    }
}

fn guard<F: FnOnce() -> SnowlabStatus>(f: F) -> SnowlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SnowlabStatus::Internal
        }
    }
}

fn fail(err: Error) -> SnowlabStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, SnowlabStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(SnowlabStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        SnowlabStatus::InvalidInput
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> SnowlabStatus {
    let c = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("result contained an interior NUL byte");
            return SnowlabStatus::Internal;
        }
    };
    unsafe { *out = c.into_raw() };
    SnowlabStatus::Ok
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn snowlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn snowlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned through a `char**` out-parameter.
///
/// # Safety
/// `s` must have been produced by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn snowlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Metrics

/// Opaque finite metric space handle.
pub struct SnowlabMetric(FiniteMetric);

/// Build a metric from an n x n row-major distance matrix. Returns null and
/// sets the thread-local error on structural problems.
///
/// # Safety
/// `dist` must point to `n * n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_new(n: usize, dist: *const f64) -> *mut SnowlabMetric {
    if dist.is_null() || n == 0 {
        set_error("null matrix or zero size");
        return std::ptr::null_mut();
    }
    let slice = std::slice::from_raw_parts(dist, n * n);
    let matrix = DMatrix::from_row_slice(n, n, slice);
    match catch_unwind(AssertUnwindSafe(|| FiniteMetric::from_matrix(matrix))) {
        Ok(Ok(m)) => Box::into_raw(Box::new(SnowlabMetric(m))),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Parse a metric from JSON in the `snowflake-lab/1` schema.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_from_json(text: *const c_char) -> *mut SnowlabMetric {
    let text = match read_str(text) {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    match io::metric_from_json(text) {
        Ok(m) => Box::into_raw(Box::new(SnowlabMetric(m))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `m` must be a live handle from this library (or null, a no-op).
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_free(m: *mut SnowlabMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_size(m: *const SnowlabMetric) -> usize {
    if m.is_null() {
        return 0;
    }
    (*m).0.len()
}

/// Read one distance.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_distance(
    m: *const SnowlabMetric,
    i: usize,
    j: usize,
    out: *mut f64,
) -> SnowlabStatus {
    if m.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    let metric = &(*m).0;
    if i >= metric.len() || j >= metric.len() {
        set_error("index out of range");
        return SnowlabStatus::Domain;
    }
    *out = metric.dist(i, j);
    SnowlabStatus::Ok
}

/// Serialize a metric to JSON (`snowflake-lab/1`).
///
/// # Safety
/// `m` must be a live handle; `out` must be writable. Free the result with
/// [`snowlab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_to_json(
    m: *const SnowlabMetric,
    out: *mut *mut c_char,
) -> SnowlabStatus {
    if m.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| give_string(out, io::metric_to_json(&(*m).0)))
}

/// Flat validation result for C callers.
#[repr(C)]
pub struct SnowlabValidation {
    /// 1 when all metric axioms hold at the tolerance.
    pub is_metric: i32,
    /// 1 when a worst triangle exists (3 or more points).
    pub has_worst_triangle: i32,
    pub worst_i: usize,
    pub worst_j: usize,
    pub worst_k: usize,
    /// d(i,j) + d(j,k) - d(i,k) at the global minimizer.
    pub worst_slack: f64,
    pub worst_symmetry_gap: f64,
}

/// Validate the metric axioms at an absolute tolerance.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_validate(
    m: *const SnowlabMetric,
    tol: f64,
    out: *mut SnowlabValidation,
) -> SnowlabStatus {
    if m.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| {
        let report = (*m).0.validate(tol);
        let (has, i, j, k, slack) = match report.worst_triangle {
            Some((i, j, k, slack)) => (1, i, j, k, slack),
            None => (0, 0, 0, 0, 0.0),
        };
        *out = SnowlabValidation {
            is_metric: report.is_metric as i32,
            has_worst_triangle: has,
            worst_i: i,
            worst_j: j,
            worst_k: k,
            worst_slack: slack,
            worst_symmetry_gap: report.worst_symmetry_gap,
        };
        SnowlabStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Snowflaking functions

/// Opaque snowflaking-function handle.
pub struct SnowlabFunction(SnowflakeFunction);

/// t^alpha for alpha in (0, 1].
#[no_mangle]
pub extern "C" fn snowlab_h_power(alpha: f64) -> *mut SnowlabFunction {
    match SnowflakeFunction::power(alpha) {
        Ok(h) => Box::into_raw(Box::new(SnowlabFunction(h))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// linear * t + sqrt_coeff * sqrt(t).
#[no_mangle]
pub extern "C" fn snowlab_h_linear_plus_sqrt(linear: f64, sqrt_coeff: f64) -> *mut SnowlabFunction {
    match SnowflakeFunction::linear_plus_sqrt(linear, sqrt_coeff) {
        Ok(h) => Box::into_raw(Box::new(SnowlabFunction(h))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Parse an expression (`t^0.5`, `t+sqrt(t)`, ...) or JSON document.
///
/// # Safety
/// `spec` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_parse(spec: *const c_char) -> *mut SnowlabFunction {
    let spec = match read_str(spec) {
        Ok(s) => s,
        Err(_) => return std::ptr::null_mut(),
    };
    match io::snowflake_from_spec(spec) {
        Ok(h) => Box::into_raw(Box::new(SnowlabFunction(h))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `h` must be a live handle from this library (or null, a no-op).
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_free(h: *mut SnowlabFunction) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_eval(
    h: *const SnowlabFunction,
    t: f64,
    out: *mut f64,
) -> SnowlabStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    if !(t >= 0.0) {
        set_error("evaluation point must be nonnegative");
        return SnowlabStatus::Domain;
    }
    guard(|| {
        *out = (*h).0.eval(t);
        SnowlabStatus::Ok
    })
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_inverse(
    h: *const SnowlabFunction,
    y: f64,
    out: *mut f64,
) -> SnowlabStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| match (*h).0.inverse(y) {
        Ok(v) => {
            *out = v;
            SnowlabStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// The limit of h(t)/t at infinity (0 exactly when the decay axiom holds).
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_modulus_limit(
    h: *const SnowlabFunction,
    out: *mut f64,
) -> SnowlabStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    *out = (*h).0.modulus_limit();
    SnowlabStatus::Ok
}

/// Least S such that h(S + t) <= h(S) + h(t)/2 for all larger S.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_threshold_t(
    h: *const SnowlabFunction,
    t: f64,
    out: *mut f64,
) -> SnowlabStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| match snowflake::threshold_t(&(*h).0, t) {
        Ok(v) => {
            *out = v;
            SnowlabStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Greatest t0 <= S such that the halving bound holds for all 0 < t <= t0.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_threshold_t_tilde(
    h: *const SnowlabFunction,
    s: f64,
    out: *mut f64,
) -> SnowlabStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| match snowflake::threshold_t_tilde(&(*h).0, s) {
        Ok(v) => {
            *out = v;
            SnowlabStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Axiom flags; each field is 1 (holds), 0 (fails), or -1 (undetermined at
/// probe resolution).
#[repr(C)]
pub struct SnowlabAxioms {
    pub s1: i32,
    pub s2: i32,
    pub s3: i32,
    pub s4: i32,
}

fn axiom_code(s: AxiomStatus) -> i32 {
    match s {
        AxiomStatus::Holds => 1,
        AxiomStatus::Fails => 0,
        AxiomStatus::Undetermined => -1,
    }
}

/// Decide the snowflaking axioms S1-S4.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_h_check_axioms(
    h: *const SnowlabFunction,
    out: *mut SnowlabAxioms,
) -> SnowlabStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(
        || match snowflake::check_axioms(&(*h).0, &snowflake::ProbeGrid::default()) {
            Ok(flags) => {
                *out = SnowlabAxioms {
                    s1: axiom_code(flags.s1),
                    s2: axiom_code(flags.s2),
                    s3: axiom_code(flags.s3),
                    s4: axiom_code(flags.s4),
                };
                SnowlabStatus::Ok
            }
            Err(e) => fail(e),
        },
    )
}

/// Entrywise h on the off-diagonal distances; returns a new metric handle.
///
/// # Safety
/// `m` and `h` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_snowflake(
    m: *const SnowlabMetric,
    h: *const SnowlabFunction,
) -> *mut SnowlabMetric {
    if m.is_null() || h.is_null() {
        set_error("null argument");
        return std::ptr::null_mut();
    }
    match catch_unwind(AssertUnwindSafe(|| {
        metric::apply_snowflake(&(*m).0, &(*h).0)
    })) {
        Ok(Ok(result)) => Box::into_raw(Box::new(SnowlabMetric(result))),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// A violated triangle after pulling a metric back through h^{-1}.
#[repr(C)]
pub struct SnowlabViolation {
    /// 1 when the pullback violated the triangle inequality (then the
    /// remaining fields are meaningful and no metric handle is produced).
    pub violated: i32,
    pub via: usize,
    pub i: usize,
    pub k: usize,
    pub d_ik: f64,
    pub d_ij: f64,
    pub d_jk: f64,
    pub slack: f64,
}

/// Entrywise h^{-1}. With `require_metric` nonzero the result is validated:
/// either `*out_metric` receives a handle, or `out_violation.violated` is
/// set with the witnessing triple.
///
/// # Safety
/// `m` and `h` must be live handles; `out_metric` and `out_violation` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_desnowflake(
    m: *const SnowlabMetric,
    h: *const SnowlabFunction,
    require_metric: i32,
    out_metric: *mut *mut SnowlabMetric,
    out_violation: *mut SnowlabViolation,
) -> SnowlabStatus {
    if m.is_null() || h.is_null() || out_metric.is_null() || out_violation.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    *out_metric = std::ptr::null_mut();
    (*out_violation).violated = 0;
    guard(
        || match metric::desnowflake(&(*m).0, &(*h).0, require_metric != 0) {
            Ok(metric::Desnowflaked::Metric(result)) => {
                *out_metric = Box::into_raw(Box::new(SnowlabMetric(result)));
                SnowlabStatus::Ok
            }
            Ok(metric::Desnowflaked::Violation(v)) => {
                *out_violation = SnowlabViolation {
                    violated: 1,
                    via: v.via,
                    i: v.i,
                    k: v.k,
                    d_ik: v.d_ik,
                    d_ij: v.d_ij,
                    d_jk: v.d_jk,
                    slack: v.slack,
                };
                SnowlabStatus::Ok
            }
            Err(e) => fail(e),
        },
    )
}

// ---------------------------------------------------------------------------
// Embedding

/// Minimal Euclidean embedding dimension; -1 when the metric does not embed
/// isometrically in any Euclidean space.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_min_dim(
    m: *const SnowlabMetric,
    out: *mut i64,
) -> SnowlabStatus {
    if m.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| {
        *out = match embed::min_embedding_dimension(&(*m).0) {
            Some(d) => d as i64,
            None => -1,
        };
        SnowlabStatus::Ok
    })
}

/// Full embedding report (eigenvalues, minimal dimension, residual,
/// coordinates) as JSON.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable. Free the result with
/// [`snowlab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn snowlab_metric_embed_json(
    m: *const SnowlabMetric,
    out: *mut *mut c_char,
) -> SnowlabStatus {
    if m.is_null() || out.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| {
        let g = embed::euclidean_embed(&(*m).0, embed::TOL_PSD, embed::TOL_RANK);
        let coords: Option<Vec<Vec<f64>>> = g
            .coords
            .as_ref()
            .map(|cs| cs.iter().map(|c| c.iter().copied().collect()).collect());
        give_string(out, embed_report_json(&g, coords))
    })
}

fn embed_report_json(g: &embed::GramDecomposition, coords: Option<Vec<Vec<f64>>>) -> String {
    // Assembled by hand to keep this crate free of a serde dependency.
    let eigen: Vec<String> = g.eigenvalues.iter().map(|x| format!("{x:e}")).collect();
    let min_dim = match g.min_dim {
        Some(d) => d.to_string(),
        None => "null".into(),
    };
    let coords = match coords {
        None => "null".into(),
        Some(cs) => {
            let rows: Vec<String> = cs
                .iter()
                .map(|r| {
                    let cells: Vec<String> = r.iter().map(|x| format!("{x:e}")).collect();
                    format!("[{}]", cells.join(","))
                })
                .collect();
            format!("[{}]", rows.join(","))
        }
    };
    let residual = if g.residual.is_finite() {
        format!("{:e}", g.residual)
    } else {
        "null".into()
    };
    format!(
        "{{\"schema\":\"snowflake-lab/1\",\"embeddable\":{},\"min_dim\":{},\"eigenvalues\":[{}],\"residual\":{},\"coords\":{}}}",
        g.embeddable(),
        min_dim,
        eigen.join(","),
        residual,
        coords
    )
}

// ---------------------------------------------------------------------------
// Norms and refutation

/// Opaque norm handle.
pub struct SnowlabNorm(Norm);

/// l_p norm; pass INFINITY for the sup norm.
#[no_mangle]
pub extern "C" fn snowlab_norm_lp(p: f64, dim: usize) -> *mut SnowlabNorm {
    match Norm::lp(p, dim) {
        Ok(n) => Box::into_raw(Box::new(SnowlabNorm(n))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Parse a norm from JSON (`snowflake-lab/1` tagged union).
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn snowlab_norm_from_json(text: *const c_char) -> *mut SnowlabNorm {
    let text = match read_str(text) {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    match io::norm_from_json(text) {
        Ok(n) => Box::into_raw(Box::new(SnowlabNorm(n))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `n` must be a live handle from this library (or null, a no-op).
#[no_mangle]
pub unsafe extern "C" fn snowlab_norm_free(n: *mut SnowlabNorm) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

unsafe fn build_config(
    points: *const f64,
    n_points: usize,
    dim: usize,
    norm: *const SnowlabNorm,
) -> Result<PointConfig, SnowlabStatus> {
    if points.is_null() || n_points == 0 || dim == 0 {
        set_error("null or empty point buffer");
        return Err(SnowlabStatus::NullArgument);
    }
    let slice = std::slice::from_raw_parts(points, n_points * dim);
    let pts: Vec<DVector<f64>> = (0..n_points)
        .map(|i| DVector::from_row_slice(&slice[i * dim..(i + 1) * dim]))
        .collect();
    let norm = if norm.is_null() {
        Norm::l2(dim)
    } else {
        (*norm).0.clone()
    };
    PointConfig::new(pts, norm).map_err(|e| {
        let s = status_of(&e);
        set_error(&e.to_string());
        s
    })
}

/// Search a claimed isometric image of a power snowflake for a refuting
/// triple. `points` is row-major `n_points x dim`; `norm` may be null for
/// the Euclidean norm. On success `*out_refuted` is 1 when a certificate
/// was found, and `*out_json` carries the certificate (or the
/// no-refutation outcome) in the `snowflake-lab/1` schema.
///
/// # Safety
/// `points` must hold `n_points * dim` doubles; `out_refuted` and
/// `out_json` must be writable; `norm` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn snowlab_refute_alpha(
    points: *const f64,
    n_points: usize,
    dim: usize,
    alpha: f64,
    norm: *const SnowlabNorm,
    out_refuted: *mut i32,
    out_json: *mut *mut c_char,
) -> SnowlabStatus {
    if out_refuted.is_null() || out_json.is_null() {
        set_error("null output argument");
        return SnowlabStatus::NullArgument;
    }
    let cfg = match build_config(points, n_points, dim, norm) {
        Ok(c) => c,
        Err(s) => return s,
    };
    guard(|| match certify::refute_alpha_embedding(&cfg, alpha) {
        Ok(outcome) => emit_outcome(outcome, out_refuted, out_json),
        Err(e) => fail(e),
    })
}

/// General-h counterpart of [`snowlab_refute_alpha`]; `mode` is 0 for the
/// unbounded witness spacing, 1 for the accumulation spacing.
///
/// # Safety
/// As for [`snowlab_refute_alpha`]; `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn snowlab_refute_h(
    points: *const f64,
    n_points: usize,
    dim: usize,
    h: *const SnowlabFunction,
    mode: i32,
    norm: *const SnowlabNorm,
    out_refuted: *mut i32,
    out_json: *mut *mut c_char,
) -> SnowlabStatus {
    if h.is_null() || out_refuted.is_null() || out_json.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    let cfg = match build_config(points, n_points, dim, norm) {
        Ok(c) => c,
        Err(s) => return s,
    };
    let mode = match mode {
        0 => certify::WitnessMode::Unbounded,
        1 => certify::WitnessMode::Accumulation,
        _ => {
            set_error("mode must be 0 (unbounded) or 1 (accumulation)");
            return SnowlabStatus::InvalidInput;
        }
    };
    guard(|| match certify::refute_h_embedding(&cfg, &(*h).0, mode) {
        Ok(outcome) => emit_outcome(outcome, out_refuted, out_json),
        Err(e) => fail(e),
    })
}

unsafe fn emit_outcome(
    outcome: certify::RefutationOutcome,
    out_refuted: *mut i32,
    out_json: *mut *mut c_char,
) -> SnowlabStatus {
    match outcome {
        certify::RefutationOutcome::Refuted(cert) => {
            *out_refuted = 1;
            give_string(out_json, io::certificate_to_json(&cert))
        }
        certify::RefutationOutcome::NoRefutation { reason } => {
            *out_refuted = 0;
            give_string(
                out_json,
                format!(
                    "{{\"schema\":\"snowflake-lab/1\",\"verdict\":\"no-refutation\",\"reason\":{}}}",
                    json_escape(&reason)
                ),
            )
        }
        certify::RefutationOutcome::WitnessUnavailable { reason } => {
            *out_refuted = 0;
            give_string(
                out_json,
                format!(
                    "{{\"schema\":\"snowflake-lab/1\",\"verdict\":\"witness-unavailable\",\"reason\":{}}}",
                    json_escape(&reason)
                ),
            )
        }
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

// ---------------------------------------------------------------------------
// Constructions

/// Build and verify the planar spiral for a gauge failing the decay axiom;
/// the verified construction (steps, points, verification summary) is
/// returned as JSON.
///
/// # Safety
/// `h` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snowlab_spiral_build(
    h: *const SnowlabFunction,
    count: usize,
    out_json: *mut *mut c_char,
) -> SnowlabStatus {
    if h.is_null() || out_json.is_null() {
        set_error("null argument");
        return SnowlabStatus::NullArgument;
    }
    guard(|| {
        let params = cx::ConstructionParams {
            h: (*h).0.clone(),
            angles: cx::AngleSequence::Geometric,
            count,
            search: cx::TSearch::default(),
        };
        let spiral = match cx::build_spiral(&params) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let report = spiral.verify(&(*h).0, 1e-9);
        let steps: Vec<String> = spiral.t_seq.iter().map(|t| format!("{t:e}")).collect();
        let pts: Vec<String> = spiral
            .config
            .points
            .iter()
            .map(|p| format!("[{:e},{:e}]", p[0], p[1]))
            .collect();
        let doc = format!(
            "{{\"schema\":\"snowflake-lab/1\",\"steps\":[{}],\"points\":[{}],\"verification\":{{\"triples_checked\":{},\"violations\":{},\"min_slack\":{:e}}}}}",
            steps.join(","),
            pts.join(","),
            report.triples_checked,
            report.violations,
            report.min_slack
        );
        give_string(out_json, doc)
    })
}
