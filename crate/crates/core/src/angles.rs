//! Large-angle triples in finite point sets.
//!
//! Any sufficiently large set in R^n contains a triple forming an angle as
//! close to pi as demanded; these searches realize that existential fact on
//! concrete sets. Angles are measured in a supplied inner product (the John
//! inner product of an ambient norm, or the Euclidean identity).
//!
//! The exhaustive scan is O(N^3) and is meant for desk-scale sets; the
//! sampled variant trades certainty for speed and reports the assumption
//! its miss bound rests on.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::norms::{Ellipsoid, Point};

/// A triple of point indices with the angle at its apex.
#[derive(Clone, Debug)]
pub struct AngleTriple {
    /// Endpoint index.
    pub i: usize,
    /// Apex index.
    pub j: usize,
    /// Endpoint index (i < k).
    pub k: usize,
    /// angle at x_j between x_i and x_k, in [0, pi].
    pub angle: f64,
}

fn check_points(points: &[Point], e: &Ellipsoid) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "angle search needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| p.len() != e.dim()) {
        return Err(Error::Structural(
            "point dimension does not match the inner product".into(),
        ));
    }
    Ok(())
}

/// Exhaustive scan for the maximal apex angle. Ties break lexicographically
/// on (i, j, k), so the result is schedule independent under the parallel
/// apex partition.
pub fn max_angle_triple(points: &[Point], e: &Ellipsoid) -> Result<AngleTriple> {
    check_points(points, e)?;
    let n = points.len();
    let best = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut local: Option<(f64, (usize, usize, usize))> = None;
            for i in 0..n {
                if i == j {
                    continue;
                }
                for k in (i + 1)..n {
                    if k == j {
                        continue;
                    }
                    let angle = e
                        .angle_at(&points[j], &points[i], &points[k])
                        .expect("points distinct from apex");
                    let cand = (angle, (i, j, k));
                    local = Some(match local {
                        None => cand,
                        Some(b) => {
                            if cand.0 > b.0 || (cand.0 == b.0 && cand.1 < b.1) {
                                cand
                            } else {
                                b
                            }
                        }
                    });
                }
            }
            local
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => {
                    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                        Some(b)
                    } else {
                        Some(a)
                    }
                }
            },
        )
        .expect("n >= 3");
    Ok(AngleTriple {
        i: best.1 .0,
        j: best.1 .1,
        k: best.1 .2,
        angle: best.0,
    })
}

/// Early-exit scan for the first triple (apex-major order) with angle >= beta.
pub fn find_angle_above(points: &[Point], e: &Ellipsoid, beta: f64) -> Result<Option<AngleTriple>> {
    check_points(points, e)?;
    let n = points.len();
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            for k in (i + 1)..n {
                if k == j {
                    continue;
                }
                let angle = e.angle_at(&points[j], &points[i], &points[k])?;
                if angle >= beta {
                    return Ok(Some(AngleTriple { i, j, k, angle }));
                }
            }
        }
    }
    Ok(None)
}

/// Sampled search for sets too large for the cubic scan. Draws `samples`
/// random triples; if none reaches beta, reports the probability of having
/// missed under the stated assumption that at least `assumed_fraction` of
/// all triples qualify.
#[derive(Clone, Debug)]
pub struct SampledSearch {
    pub found: Option<AngleTriple>,
    pub samples: usize,
    /// (1 - assumed_fraction)^samples: chance of seeing no hit if at least
    /// an `assumed_fraction` share of triples qualifies.
    pub miss_probability: f64,
    pub assumed_fraction: f64,
}

pub fn find_angle_above_sampled(
    points: &[Point],
    e: &Ellipsoid,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<SampledSearch> {
    check_points(points, e)?;
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assumed_fraction = 1e-5;
    for _ in 0..samples {
        let j = rng.random_range(0..n);
        let mut i = rng.random_range(0..n);
        while i == j {
            i = rng.random_range(0..n);
        }
        let mut k = rng.random_range(0..n);
        while k == j || k == i {
            k = rng.random_range(0..n);
        }
        let (i, k) = (i.min(k), i.max(k));
        let angle = e.angle_at(&points[j], &points[i], &points[k])?;
        if angle >= beta {
            return Ok(SampledSearch {
                found: Some(AngleTriple { i, j, k, angle }),
                samples,
                miss_probability: 0.0,
                assumed_fraction,
            });
        }
    }
    Ok(SampledSearch {
        found: None,
        samples,
        miss_probability: (1.0 - assumed_fraction).powi(samples as i32),
        assumed_fraction,
    })
}

/// Result of the adversarial search for large all-angles-below-beta sets.
/// `achieved` points with every angle < beta witness N(n, beta) > achieved;
/// this is a lower bound, never the Ramsey number itself.
#[derive(Clone, Debug)]
pub struct RamseyFloor {
    pub dim: usize,
    pub beta: f64,
    pub achieved: usize,
    pub points: Vec<Point>,
    /// Largest angle in the witness set, re-checked exhaustively.
    pub max_angle: f64,
}

/// Adversarial local search: random insertions plus jitter moves, rejecting
/// any state with an angle >= beta. Dimension capped at 4 (cost).
pub fn empirical_ramsey_floor(
    dim: usize,
    beta: f64,
    budget: usize,
    seed: u64,
) -> Result<RamseyFloor> {
    if dim == 0 || dim > 4 {
        return Err(Error::Domain(format!(
            "ramsey floor search supports dimensions 1..=4, got {dim}"
        )));
    }
    if !(beta > 0.0 && beta < std::f64::consts::PI) {
        return Err(Error::Domain("beta must lie in (0, pi)".into()));
    }
    let e = Ellipsoid::identity(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // The working set always stays admissible (every apex angle strictly
    // below beta), so a proposal only needs the triples involving the
    // changed point rechecked: O(N^2) instead of O(N^3).
    let point_admissible = |pts: &[Point], idx: usize| -> bool {
        let n = pts.len();
        for a in 0..n {
            if a == idx {
                continue;
            }
            if pts[a] == pts[idx] {
                return false;
            }
            // idx as apex: pairs (a, b) around it.
            for b in (a + 1)..n {
                if b == idx {
                    continue;
                }
                if e.angle_at(&pts[idx], &pts[a], &pts[b]).unwrap() >= beta {
                    return false;
                }
            }
            // idx as endpoint with apex a.
            for b in 0..n {
                if b == idx || b == a {
                    continue;
                }
                if e.angle_at(&pts[a], &pts[idx], &pts[b]).unwrap() >= beta {
                    return false;
                }
            }
        }
        true
    };

    // Start from two points; insertion proposals grow the set, jitter
    // proposals make room.
    let mut pts: Vec<Point> = vec![DVector::zeros(dim), {
        let mut v = DVector::zeros(dim);
        v[0] = 1.0;
        v
    }];
    let mut best = pts.clone();
    for _ in 0..budget {
        let insert = rng.random_bool(0.5) || pts.len() < 3;
        if insert {
            let cand = DVector::from_fn(dim, |_, _| rng.random::<f64>() * 3.0 - 1.0);
            pts.push(cand);
            if point_admissible(&pts, pts.len() - 1) {
                if pts.len() > best.len() {
                    best = pts.clone();
                }
            } else {
                pts.pop();
            }
        } else {
            let idx = rng.random_range(0..pts.len());
            let old = pts[idx].clone();
            let jitter = DVector::from_fn(dim, |_, _| (rng.random::<f64>() - 0.5) * 0.4);
            pts[idx] += jitter;
            if !point_admissible(&pts, idx) {
                pts[idx] = old;
            }
        }
    }
    let max_angle = if best.len() >= 3 {
        max_angle_triple(&best, &e)?.angle
    } else {
        0.0
    };
    Ok(RamseyFloor {
        dim,
        beta,
        achieved: best.len(),
        points: best,
        max_angle,
    })
}
