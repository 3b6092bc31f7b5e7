//! snowflake-lab: construct, certify, and refute isometric embeddings of
//! snowflaked metric spaces into finite-dimensional normed spaces.
//!
//! A snowflake of a metric space (X, d) is (X, h ∘ d) for a concave modulus
//! h with h(0) = 0. The library provides:
//!
//! - finite metric spaces with axiom validation ([`metric`]);
//! - snowflaking functions, their axioms S1-S4, and the halving thresholds
//!   T and T~ ([`snowflake`]);
//! - norms, John ellipsoids, inner-product angles, and the dimension-only
//!   lemma constants ([`norms`]);
//! - Euclidean embeddability via the base-point Gram criterion, a
//!   Gauss-Newton coordinate solver started at the rescaled simplex, the
//!   alpha-star embeddability profile, and a bilipschitz distortion probe
//!   ([`embed`]);
//! - exhaustive and sampled large-angle triple searches plus an adversarial
//!   lower-bound search for angle-Ramsey numbers ([`angles`]);
//! - the planar spiral constructions showing degenerate snowflakes embed
//!   arbitrarily many points, with certified step choices and full
//!   verification ([`counterexample`]);
//! - machine-checkable non-embeddability certificates for power and general
//!   snowflakes ([`certify`]);
//! - JSON/CSV/SVG interchange ([`io`], [`plot`]).

// Comparisons written as `!(x > 0.0)` throughout are deliberate: unlike
// `x <= 0.0` they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
pub mod bigfloat;
pub mod certify;
pub mod counterexample;
pub mod embed;
pub mod error;
pub mod io;
pub mod metric;
pub mod norms;
pub mod plot;
pub mod snowflake;

pub use error::{Error, Result};
