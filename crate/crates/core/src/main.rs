//! snowflake-lab command-line interface.
//!
//! Exit codes: 0 = success (including "no refutation found"); 1 = usage or
//! input errors and failed computations; 2 = a refutation certificate was
//! found (certify-* subcommands only), so scripts can branch on the verdict
//! without parsing output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use snowflake_lab::angles as ang;
use snowflake_lab::certify;
use snowflake_lab::counterexample as cx;
use snowflake_lab::embed;
use snowflake_lab::error::Error;
use snowflake_lab::io;
use snowflake_lab::metric::{self, FiniteMetric, PointConfig};
use snowflake_lab::norms::{self, Norm};
use snowflake_lab::plot;
use snowflake_lab::snowflake::{HFunction, SnowflakeFunction};

#[derive(Parser)]
#[command(
    name = "snowflake-lab",
    version,
    about = "Construct, certify, and refute isometric embeddings of snowflaked metrics"
)]
struct Cli {
    /// Seed for every randomized operation (byte-identical outputs for a
    /// fixed config and seed).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for internal parallelism (env fallback:
    /// SNOWFLAKE_LAB_THREADS). Results are thread-count independent.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory; result files are written here in addition to the
    /// report on standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated output formats to write under --out (json, csv, svg).
    #[arg(long, global = true, default_value = "json,csv,svg")]
    formats: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a distance matrix (JSON or CSV).
    Validate {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Absolute slack tolerance.
        #[arg(long, default_value_t = metric::TOL_METRIC)]
        tol: f64,
        /// Run the built-in example table instead of reading input.
        #[arg(long)]
        selftest: bool,
    },
    /// Apply a snowflaking function to a metric (or invert it with --inverse).
    Snowflake {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Expression (t^0.5, t+sqrt(t), ...) or inline JSON.
        #[arg(long)]
        h: Option<String>,
        /// Read the function from a JSON file instead.
        #[arg(long)]
        h_file: Option<PathBuf>,
        /// Apply h^{-1} instead of h.
        #[arg(long)]
        inverse: bool,
        /// With --inverse: validate the result and emit the violated triple
        /// as a certificate if it is not a metric.
        #[arg(long)]
        require_metric: bool,
        #[arg(long)]
        selftest: bool,
    },
    /// Euclidean embeddability: Gram spectrum, minimal dimension, coordinates.
    Embed {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = embed::TOL_PSD)]
        tol_psd: f64,
        #[arg(long, default_value_t = embed::TOL_RANK)]
        tol_rank: f64,
        #[arg(long)]
        selftest: bool,
    },
    /// Minimal Euclidean embedding dimension only.
    MinDim {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        selftest: bool,
    },
    /// Embeddability of (X, d^alpha) across an alpha grid with refined
    /// boundaries.
    AlphaStar {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Number of grid points on (0, 1].
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        selftest: bool,
    },
    /// Gauss-Newton realization of near-unit pairwise distances from the
    /// rescaled simplex.
    Newton {
        #[arg(long)]
        n: Option<usize>,
        /// Target rho as a metric JSON file; otherwise jittered around 1.
        #[arg(long)]
        rho_file: Option<PathBuf>,
        /// Uniform jitter half-width for generated targets.
        #[arg(long, default_value_t = 0.01)]
        jitter: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Pre-check box |rho - 1| < rho_box.
        #[arg(long, default_value_t = 0.05)]
        rho_box: f64,
        #[arg(long)]
        selftest: bool,
    },
    /// John ellipsoid, sandwich validation, and lemma constants of a norm.
    John {
        /// l1 | l2 | linf | lp:<p> | inline JSON.
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        selftest: bool,
    },
    /// Large-angle triples in a point set (exhaustive or sampled).
    Angles {
        #[arg(long)]
        points: Option<PathBuf>,
        /// Measure angles in the John inner product of this norm.
        #[arg(long)]
        norm: Option<String>,
        /// Find the first triple with angle >= beta instead of the maximum.
        #[arg(long)]
        beta: Option<f64>,
        /// Exhaustive-scan cap; larger sets need --sample.
        #[arg(long, default_value_t = 600)]
        cap: usize,
        /// Sample this many random triples instead of scanning.
        #[arg(long)]
        sample: Option<usize>,
        /// Also write a 64-bin histogram of apex angles (exhaustive mode).
        #[arg(long)]
        histogram: bool,
        #[arg(long)]
        selftest: bool,
    },
    /// Adversarial lower bounds for the angle Ramsey numbers N(n, beta).
    RamseyFloor {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long)]
        selftest: bool,
    },
    /// Build and verify the planar spiral for a gauge failing the decay
    /// axiom S4.
    Spiral {
        #[arg(long, default_value = "t+sqrt(t)")]
        h: String,
        /// Number of steps (points = n + 1).
        #[arg(long, default_value_t = 40)]
        n: usize,
        /// geometric | inverse-square | comma-separated list.
        #[arg(long, default_value = "geometric")]
        angles: String,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1e200)]
        t_max: f64,
        /// Monte-Carlo recheck samples per step certificate.
        #[arg(long, default_value_t = 10_000)]
        recheck: usize,
        #[arg(long)]
        selftest: bool,
    },
    /// Per-n construction: a full snowflaking function plus n points whose
    /// preimage metric verifies.
    Remark {
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated strictly decreasing slopes.
        #[arg(long, default_value = "0.5,0.25")]
        slopes: String,
        /// Comma-separated segment lengths (last = active segment); omit to
        /// auto-size.
        #[arg(long)]
        seg_lengths: Option<String>,
        #[arg(long)]
        selftest: bool,
    },
    /// Refute a claimed isometric embedding of a power snowflake.
    CertifyAlpha {
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long)]
        selftest: bool,
    },
    /// Refute a claimed isometric embedding of a general h-snowflake.
    CertifyH {
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        h: Option<String>,
        /// unbounded | accumulation.
        #[arg(long, default_value = "unbounded")]
        mode: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long)]
        selftest: bool,
    },
    /// Upper-bound the bilipschitz distortion into a fixed dimension.
    Distortion {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long)]
        selftest: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version paths exit 0; everything else is a usage
            // error (exit 1 per the interface contract).
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::from(0);
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("SNOWFLAKE_LAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let body = || match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    };
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(body),
        _ => body(),
    }
}

type CliResult = std::result::Result<u8, Box<dyn std::error::Error>>;

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Validate { input, tol, selftest } => {
            if *selftest {
                return selftest_validate();
            }
            let m = read_metric(required(input, "--in")?)?;
            let report = m.validate(*tol);
            let out = json!({
                "schema": io::SCHEMA,
                "command": "validate",
                "tol": tol,
                "is_metric": report.is_metric,
                "worst_triangle": report.worst_triangle.map(|(i, j, k, slack)| json!({
                    "i": i, "j": j, "k": k, "slack": slack,
                })),
                "worst_symmetry_gap": report.worst_symmetry_gap,
                "worst_diagonal": report.worst_diagonal,
                "min_off_diagonal": if report.min_off_diagonal.is_finite() {
                    json!(report.min_off_diagonal)
                } else { json!(null) },
            });
            emit(cli, &out, &[])?;
            Ok(0)
        }
        Command::Snowflake {
            input,
            h,
            h_file,
            inverse,
            require_metric,
            selftest,
        } => {
            if *selftest {
                return selftest_snowflake();
            }
            let m = read_metric(required(input, "--in")?)?;
            let hfun = read_h(h.as_deref(), h_file.as_deref())?;
            if !inverse {
                let result = metric::apply_snowflake(&m, &hfun)?;
                let out = json!({
                    "schema": io::SCHEMA,
                    "command": "snowflake",
                    "direction": "forward",
                    "h": serde_json::from_str::<serde_json::Value>(&io::snowflake_to_json(&hfun))?,
                    "result_is_metric": result.validate(metric::TOL_METRIC).is_metric,
                });
                emit(cli, &out, &[("metric.json", io::metric_to_json(&result))])?;
            } else {
                match metric::desnowflake(&m, &hfun, *require_metric)? {
                    metric::Desnowflaked::Metric(result) => {
                        let out = json!({
                            "schema": io::SCHEMA,
                            "command": "snowflake",
                            "direction": "inverse",
                            "violation": null,
                        });
                        emit(cli, &out, &[("metric.json", io::metric_to_json(&result))])?;
                    }
                    metric::Desnowflaked::Violation(v) => {
                        let out = json!({
                            "schema": io::SCHEMA,
                            "command": "snowflake",
                            "direction": "inverse",
                            "violation": {
                                "via": v.via, "i": v.i, "k": v.k,
                                "d_ik": v.d_ik, "d_ij": v.d_ij, "d_jk": v.d_jk,
                                "slack": v.slack,
                            },
                        });
                        emit(cli, &out, &[])?;
                    }
                }
            }
            Ok(0)
        }
        Command::Embed {
            input,
            tol_psd,
            tol_rank,
            selftest,
        } => {
            if *selftest {
                return selftest_embed();
            }
            let m = read_metric(required(input, "--in")?)?;
            let g = embed::euclidean_embed(&m, *tol_psd, *tol_rank);
            let mut files = Vec::new();
            if let Some(coords) = &g.coords {
                files.push(("points.csv", io::points_to_csv(m.labels(), coords)?));
            }
            let out = json!({
                "schema": io::SCHEMA,
                "command": "embed",
                "embeddable": g.embeddable(),
                "min_dim": g.min_dim,
                "eigenvalues": g.eigenvalues,
                "residual": if g.residual.is_finite() { json!(g.residual) } else { json!(null) },
                "tol_psd": g.tol_psd,
                "tol_rank": g.tol_rank,
            });
            emit(cli, &out, &files)?;
            Ok(0)
        }
        Command::MinDim { input, selftest } => {
            if *selftest {
                return selftest_min_dim();
            }
            let m = read_metric(required(input, "--in")?)?;
            let dim = embed::min_embedding_dimension(&m);
            let out = json!({
                "schema": io::SCHEMA,
                "command": "min-dim",
                "min_dim": dim,
            });
            emit(cli, &out, &[])?;
            Ok(0)
        }
        Command::AlphaStar {
            input,
            grid,
            tol,
            selftest,
        } => {
            if *selftest {
                return selftest_alpha_star();
            }
            let m = read_metric(required(input, "--in")?)?;
            let grid_vals: Vec<f64> = (1..=*grid).map(|i| i as f64 / *grid as f64).collect();
            let profile = embed::alpha_star(&m, &grid_vals, *tol)?;
            let out = json!({
                "schema": io::SCHEMA,
                "command": "alpha-star",
                "samples": profile.samples.iter().map(|s| json!({
                    "alpha": s.alpha,
                    "embeddable": s.embeddable,
                    "min_eigenvalue": s.min_eigenvalue,
                    "min_dim": s.min_dim,
                })).collect::<Vec<_>>(),
                "boundaries": profile.boundaries.iter().map(|b| json!({
                    "alpha_embeddable": b.alpha_embeddable,
                    "alpha_not_embeddable": b.alpha_not_embeddable,
                    "boundary": b.boundary,
                })).collect::<Vec<_>>(),
                "largest_embeddable": profile.largest_embeddable,
            });
            emit(cli, &out, &[])?;
            Ok(0)
        }
        Command::Newton {
            n,
            rho_file,
            jitter,
            max_iter,
            tol,
            rho_box,
            selftest,
        } => {
            if *selftest {
                return selftest_newton();
            }
            let rho = match rho_file {
                Some(path) => read_metric(path)?.matrix().clone(),
                None => {
                    let n = required(n, "--n")?;
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    let mut rho = DMatrix::zeros(*n, *n);
                    for i in 0..*n {
                        for j in (i + 1)..*n {
                            let v = 1.0 + (rng.random::<f64>() - 0.5) * 2.0 * jitter;
                            rho[(i, j)] = v;
                            rho[(j, i)] = v;
                        }
                    }
                    rho
                }
            };
            match embed::newton_embed(&rho, *max_iter, *tol, *rho_box) {
                Ok(state) => {
                    let labels: Vec<String> =
                        (0..state.points.len()).map(|i| format!("q{i}")).collect();
                    let out = json!({
                        "schema": io::SCHEMA,
                        "command": "newton",
                        "status": "converged",
                        "iterations": state.iterations,
                        "residual_sq": state.residual_sq,
                        "residual_history": state.residual_history,
                    });
                    emit(
                        cli,
                        &out,
                        &[("points.csv", io::points_to_csv(&labels, &state.points)?)],
                    )?;
                    Ok(0)
                }
                Err(Error::IterationLimit { iterations, residual }) => {
                    let out = json!({
                        "schema": io::SCHEMA,
                        "command": "newton",
                        "status": "iteration-limit",
                        "iterations": iterations,
                        "residual_sq": residual,
                    });
                    emit(cli, &out, &[])?;
                    eprintln!(
                        "newton: no convergence after {iterations} iterations \
                         (residual_sq {residual:.3e})"
                    );
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::John {
            norm,
            dim,
            samples,
            selftest,
        } => {
            if *selftest {
                return selftest_john();
            }
            let norm = io::norm_from_spec(norm, *dim)?;
            let e = norms::john_ellipsoid(&norm)?;
            let lc = norms::lemma_constants(norm.dim());
            let sandwich = norms::validate_sandwich(&norm, &e, *samples, cli.seed)?;
            let cones = norms::validate_cones(&norm, &e, &lc, *samples, cli.seed)?;
            let a = e.matrix();
            let out = json!({
                "schema": io::SCHEMA,
                "command": "john",
                "dim": norm.dim(),
                "matrix": (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "sandwich": {
                    "samples": sandwich.samples,
                    "max_inner_violation": sandwich.max_inner_violation,
                    "max_outer_violation": sandwich.max_outer_violation,
                },
                "cones": {
                    "samples": cones.samples,
                    "max_inner_violation": cones.max_inner_violation,
                    "max_outer_violation": cones.max_outer_violation,
                },
                "constants": {
                    "theta_cone": lc.theta_cone,
                    "ell_cone": lc.ell_cone,
                    "epsilon": lc.epsilon,
                    "C": lc.c_bound,
                    "K": lc.k_bound,
                },
            });
            emit(cli, &out, &[])?;
            Ok(0)
        }
        Command::Angles {
            points,
            norm,
            beta,
            cap,
            sample,
            histogram,
            selftest,
        } => {
            if *selftest {
                return selftest_angles();
            }
            let (_, pts) = read_points(required(points, "--points")?)?;
            let dim = pts.first().map(|p| p.len()).unwrap_or(0);
            let e = match norm {
                Some(spec) => norms::john_ellipsoid(&io::norm_from_spec(spec, dim)?)?,
                None => norms::Ellipsoid::identity(dim),
            };
            let mut files: Vec<(&str, String)> = Vec::new();
            let result = match (beta, sample) {
                (Some(beta), None) => {
                    ensure_cap(pts.len(), *cap)?;
                    let hit = ang::find_angle_above(&pts, &e, *beta)?;
                    json!({
                        "mode": "exhaustive-first-above",
                        "beta": beta,
                        "found": hit.map(|t| triple_json(&t)),
                    })
                }
                (Some(beta), Some(samples)) => {
                    let s = ang::find_angle_above_sampled(&pts, &e, *beta, *samples, cli.seed)?;
                    json!({
                        "mode": "sampled-first-above",
                        "beta": beta,
                        "samples": s.samples,
                        "found": s.found.map(|t| triple_json(&t)),
                        "miss_probability": s.miss_probability,
                        "assumed_qualifying_fraction": s.assumed_fraction,
                    })
                }
                (None, _) => {
                    ensure_cap(pts.len(), *cap)?;
                    let best = ang::max_angle_triple(&pts, &e)?;
                    if *histogram {
                        files.push(("histogram.csv", angle_histogram(&pts, &e)?));
                    }
                    json!({
                        "mode": "exhaustive-max",
                        "max": triple_json(&best),
                    })
                }
            };
            let out = json!({
                "schema": io::SCHEMA,
                "command": "angles",
                "points": pts.len(),
                "result": result,
            });
            emit(cli, &out, &files)?;
            Ok(0)
        }
        Command::RamseyFloor {
            dim,
            beta,
            budget,
            selftest,
        } => {
            if *selftest {
                return selftest_ramsey_floor();
            }
            let beta = required(beta, "--beta")?;
            let floor = ang::empirical_ramsey_floor(*dim, *beta, *budget, cli.seed)?;
            let labels: Vec<String> = (0..floor.points.len()).map(|i| format!("w{i}")).collect();
            let out = json!({
                "schema": io::SCHEMA,
                "command": "ramsey-floor",
                "dim": dim,
                "beta": beta,
                "achieved": floor.achieved,
                "max_angle": floor.max_angle,
                "interpretation": "lower bound: N(dim, beta) > achieved; not a certificate for N itself",
            });
            emit(
                cli,
                &out,
                &[("points.csv", io::points_to_csv(&labels, &floor.points)?)],
            )?;
            Ok(0)
        }
        Command::Spiral {
            h,
            n,
            angles,
            t_min,
            t_max,
            recheck,
            selftest,
        } => {
            if *selftest {
                return selftest_spiral();
            }
            let hfun = io::snowflake_from_spec(h)?;
            let schedule = parse_angles(angles)?;
            let params = cx::ConstructionParams {
                h: hfun.clone(),
                angles: schedule,
                count: *n,
                search: cx::TSearch {
                    t_min: *t_min,
                    t_max: *t_max,
                    ..cx::TSearch::default()
                },
            };
            let spiral = cx::build_spiral(&params)?;
            let verification = spiral.verify(&hfun, 1e-9);
            let mut recheck_violations = 0usize;
            for (idx, cert) in spiral.certificates.iter().enumerate() {
                let (v, _) =
                    cx::monte_carlo_recheck(&hfun, cert, *recheck, 8.0, cli.seed ^ (idx as u64));
                recheck_violations += v;
            }
            let labels: Vec<String> = (0..spiral.config.points.len())
                .map(|i| format!("x{i}"))
                .collect();
            let out = json!({
                "schema": io::SCHEMA,
                "command": "spiral",
                "steps": spiral.t_seq,
                "total_turn": spiral.total_turn,
                "certificates": spiral.certificates.iter().map(|c| json!({
                    "index": c.index,
                    "alpha": c.alpha,
                    "quadrant_start": c.quadrant_start,
                    "step": c.step,
                    "sufficient_margin": c.sufficient_margin,
                    "modulus_limit": c.modulus_limit,
                })).collect::<Vec<_>>(),
                "verification": {
                    "triples_checked": verification.triples_checked,
                    "violations": verification.violations,
                    "min_slack": verification.min_slack,
                },
                "step_inequality_recheck": {
                    "samples_per_certificate": recheck,
                    "violations": recheck_violations,
                },
            });
            emit(
                cli,
                &out,
                &[
                    ("points.csv", io::points_to_csv(&labels, &spiral.config.points)?),
                    ("spiral.svg", plot::points_svg(&spiral.config.points, "spiral construction")?),
                    ("h.json", io::snowflake_to_json(&hfun)),
                ],
            )?;
            if verification.violations > 0 || recheck_violations > 0 {
                eprintln!("spiral: verification failed");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Remark {
            n,
            slopes,
            seg_lengths,
            selftest,
        } => {
            if *selftest {
                return selftest_remark();
            }
            let n = required(n, "--n")?;
            let slopes = parse_f64_list(slopes)?;
            let seg: Option<Vec<f64>> = match seg_lengths {
                Some(s) => Some(parse_f64_list(s)?),
                None => None,
            };
            let r = cx::remark_construction(*n, &slopes, seg.as_deref())?;
            let labels: Vec<String> =
                (0..r.config.points.len()).map(|i| format!("x{i}")).collect();
            let out = json!({
                "schema": io::SCHEMA,
                "command": "remark",
                "n": n,
                "axioms": {
                    "s1": format!("{:?}", r.axiom_flags.s1),
                    "s2": format!("{:?}", r.axiom_flags.s2),
                    "s3": format!("{:?}", r.axiom_flags.s3),
                    "s4": format!("{:?}", r.axiom_flags.s4),
                },
                "active_segment": { "start": r.segment.0, "end": r.segment.1 },
                "verification": {
                    "triples_checked": r.verification.triples_checked,
                    "violations": r.verification.violations,
                    "min_slack": r.verification.min_slack,
                },
            });
            emit(
                cli,
                &out,
                &[
                    ("h.json", io::snowflake_to_json(&r.h)),
                    ("points.csv", io::points_to_csv(&labels, &r.config.points)?),
                    ("points.svg", plot::points_svg(&r.config.points, "per-n construction")?),
                ],
            )?;
            if r.verification.violations > 0 {
                eprintln!("remark: verification failed");
                return Ok(1);
            }
            Ok(0)
        }
        Command::CertifyAlpha {
            points,
            alpha,
            norm,
            selftest,
        } => {
            if *selftest {
                return selftest_certify_alpha();
            }
            let (_, pts) = read_points(required(points, "--points")?)?;
            let alpha = required(alpha, "--alpha")?;
            let dim = pts.first().map(|p| p.len()).unwrap_or(0);
            let cfg = PointConfig::new(pts, io::norm_from_spec(norm, dim)?)?;
            let outcome = certify::refute_alpha_embedding(&cfg, *alpha)?;
            finish_certify(cli, "certify-alpha", outcome)
        }
        Command::CertifyH {
            points,
            h,
            mode,
            norm,
            selftest,
        } => {
            if *selftest {
                return selftest_certify_h();
            }
            let (_, pts) = read_points(required(points, "--points")?)?;
            let hfun = read_h(h.as_deref(), None)?;
            let mode = match mode.as_str() {
                "unbounded" => certify::WitnessMode::Unbounded,
                "accumulation" => certify::WitnessMode::Accumulation,
                other => {
                    return Err(Error::Structural(format!(
                        "unknown mode `{other}` (unbounded or accumulation)"
                    ))
                    .into())
                }
            };
            let dim = pts.first().map(|p| p.len()).unwrap_or(0);
            let cfg = PointConfig::new(pts, io::norm_from_spec(norm, dim)?)?;
            let outcome = certify::refute_h_embedding(&cfg, &hfun, mode)?;
            finish_certify(cli, "certify-h", outcome)
        }
        Command::Distortion {
            input,
            dim,
            restarts,
            selftest,
        } => {
            if *selftest {
                return selftest_distortion();
            }
            let m = read_metric(required(input, "--in")?)?;
            let dim = required(dim, "--dim")?;
            let probe = embed::distortion_probe(&m, *dim, *restarts, cli.seed)?;
            let labels: Vec<String> = (0..probe.coords.len()).map(|i| format!("q{i}")).collect();
            let out = json!({
                "schema": io::SCHEMA,
                "command": "distortion",
                "target_dim": dim,
                "restarts": probe.restarts,
                "distortion_upper_bound": probe.distortion,
                "best_start": if probe.best_start == usize::MAX {
                    json!("certified-eigen-coordinates")
                } else {
                    json!(probe.best_start)
                },
                "note": "upper bound from stress minimization; optimality is never claimed",
            });
            emit(
                cli,
                &out,
                &[("points.csv", io::points_to_csv(&labels, &probe.coords)?)],
            )?;
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing

fn required<'a, T>(opt: &'a Option<T>, flag: &str) -> std::result::Result<&'a T, Error> {
    opt.as_ref()
        .ok_or_else(|| Error::Structural(format!("{flag} is required (or use --selftest)")))
}

fn read_metric(path: &Path) -> std::result::Result<FiniteMetric, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Structural(format!("cannot read {}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .map(|x| x.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    Ok(if is_csv {
        io::metric_from_csv(&text)?
    } else {
        io::metric_from_json(&text)?
    })
}

type LabeledPoints = (Vec<String>, Vec<DVector<f64>>);

fn read_points(path: &Path) -> std::result::Result<LabeledPoints, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Structural(format!("cannot read {}: {e}", path.display())))?;
    Ok(io::points_from_csv(&text)?)
}

fn read_h(
    expr: Option<&str>,
    file: Option<&Path>,
) -> std::result::Result<SnowflakeFunction, Box<dyn std::error::Error>> {
    match (expr, file) {
        (Some(e), None) => Ok(io::snowflake_from_spec(e)?),
        (None, Some(f)) => {
            let text = std::fs::read_to_string(f)
                .map_err(|e| Error::Structural(format!("cannot read {}: {e}", f.display())))?;
            Ok(io::snowflake_from_json(&text)?)
        }
        (Some(_), Some(_)) => {
            Err(Error::Structural("give --h or --h-file, not both".into()).into())
        }
        (None, None) => Err(Error::Structural("--h (or --h-file) is required".into()).into()),
    }
}

fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, Error> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Structural(format!("bad number `{x}` in list")))
        })
        .collect()
}

fn parse_angles(spec: &str) -> std::result::Result<cx::AngleSequence, Error> {
    match spec {
        "geometric" => Ok(cx::AngleSequence::Geometric),
        "inverse-square" => Ok(cx::AngleSequence::InverseSquare),
        list => Ok(cx::AngleSequence::Explicit(parse_f64_list(list)?)),
    }
}

fn ensure_cap(n: usize, cap: usize) -> std::result::Result<(), Error> {
    if n > cap {
        return Err(Error::Structural(format!(
            "{n} points exceed the exhaustive-scan cap {cap}; pass --sample M for a \
             sampled search (miss probability is reported) or raise --cap"
        )));
    }
    Ok(())
}

fn triple_json(t: &ang::AngleTriple) -> serde_json::Value {
    json!({ "i": t.i, "j": t.j, "k": t.k, "angle": t.angle })
}

fn angle_histogram(
    pts: &[DVector<f64>],
    e: &norms::Ellipsoid,
) -> std::result::Result<String, Box<dyn std::error::Error>> {
    const BINS: usize = 64;
    let mut counts = [0u64; BINS];
    let n = pts.len();
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            for k in (i + 1)..n {
                if k == j {
                    continue;
                }
                let a = e.angle_at(&pts[j], &pts[i], &pts[k])?;
                let bin = ((a / std::f64::consts::PI) * BINS as f64)
                    .floor()
                    .min(BINS as f64 - 1.0) as usize;
                counts[bin] += 1;
            }
        }
    }
    let mut out = String::from("bin_start_rad,bin_end_rad,count\n");
    for (b, c) in counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{c}\n",
            io::fmt_f64(std::f64::consts::PI * b as f64 / BINS as f64),
            io::fmt_f64(std::f64::consts::PI * (b + 1) as f64 / BINS as f64),
        ));
    }
    Ok(out)
}

fn finish_certify(cli: &Cli, command: &str, outcome: certify::RefutationOutcome) -> CliResult {
    match outcome {
        certify::RefutationOutcome::Refuted(cert) => {
            let transcript = io::certificate_transcript(&cert);
            let out = json!({
                "schema": io::SCHEMA,
                "command": command,
                "verdict": "refuted",
                "certificate": serde_json::from_str::<serde_json::Value>(
                    &io::certificate_to_json(&cert)
                )?,
            });
            emit(
                cli,
                &out,
                &[
                    ("certificate.json", io::certificate_to_json(&cert)),
                    ("transcript.txt", transcript.clone()),
                ],
            )?;
            eprint!("{transcript}");
            Ok(2)
        }
        certify::RefutationOutcome::NoRefutation { reason } => {
            let out = json!({
                "schema": io::SCHEMA,
                "command": command,
                "verdict": "no-refutation",
                "reason": reason,
            });
            emit(cli, &out, &[])?;
            Ok(0)
        }
        certify::RefutationOutcome::WitnessUnavailable { reason } => {
            let out = json!({
                "schema": io::SCHEMA,
                "command": command,
                "verdict": "witness-unavailable",
                "reason": reason,
            });
            emit(cli, &out, &[])?;
            eprintln!("{command}: search-based refutation only; {reason}");
            Ok(0)
        }
    }
}

/// Print the report to stdout and write result files under --out when
/// given, filtered by the --formats selection.
fn emit(
    cli: &Cli,
    report: &serde_json::Value,
    files: &[(&str, String)],
) -> std::result::Result<(), Box<dyn std::error::Error>> {
    println!("{}", serde_json::to_string_pretty(report)?);
    if let Some(dir) = &cli.out {
        let formats: Vec<&str> = cli.formats.split(',').map(|s| s.trim()).collect();
        let wanted = |name: &str| {
            let ext = name.rsplit('.').next().unwrap_or("");
            let ext = if ext == "txt" { "json" } else { ext };
            formats.contains(&ext)
        };
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Structural(format!("cannot create {}: {e}", dir.display())))?;
        if wanted("report.json") {
            let mut report_text = serde_json::to_string_pretty(report)?;
            report_text.push('\n');
            std::fs::write(dir.join("report.json"), report_text)?;
        }
        for (name, content) in files {
            if wanted(name) {
                std::fs::write(dir.join(name), content)?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Selftests: each subcommand replays its module's example table.

struct Checker {
    passed: usize,
    failed: usize,
}

impl Checker {
    fn new() -> Self {
        Checker { passed: 0, failed: 0 }
    }
    fn check(&mut self, name: &str, ok: bool) {
        if ok {
            self.passed += 1;
            println!("ok - {name}");
        } else {
            self.failed += 1;
            println!("FAIL - {name}");
        }
    }
    fn finish(self, what: &str) -> CliResult {
        println!(
            "selftest {what}: {} passed, {} failed",
            self.passed, self.failed
        );
        Ok(if self.failed == 0 { 0 } else { 1 })
    }
}

fn k13_metric() -> FiniteMetric {
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

fn selftest_validate() -> CliResult {
    let mut c = Checker::new();
    let single = metric::validate_metric(&DMatrix::from_row_slice(1, 1, &[0.0]), 1e-9)?;
    c.check("single point is a metric", single.is_metric);
    c.check("star path metric validates", k13_metric().validate(1e-9).is_metric);
    let bad = metric::validate_metric(
        &DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]),
        1e-9,
    )?;
    c.check(
        "forced violation has slack -3",
        !bad.is_metric && bad.worst_triangle.map(|t| t.3) == Some(-3.0),
    );
    c.finish("validate")
}

fn selftest_snowflake() -> CliResult {
    let mut c = Checker::new();
    let h = SnowflakeFunction::power(0.5)?;
    c.check("sqrt snowflake of 4 is 2", h.eval(4.0) == 2.0);
    let ident = SnowflakeFunction::power(1.0)?;
    c.check("alpha = 1 is the identity", ident.eval(4.0) == 4.0);
    let h9 = SnowflakeFunction::power(0.9)?;
    let s = metric::apply_snowflake(&k13_metric(), &h9)?;
    c.check(
        "star leaf-leaf at alpha 0.9",
        (s.dist(1, 2) - 1.866065983073615).abs() < 1e-12,
    );
    let line = FiniteMetric::from_matrix(DMatrix::from_row_slice(
        3,
        3,
        &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0],
    ))?;
    let out = metric::desnowflake(&line, &h, true)?;
    c.check(
        "collinear pullback yields a violation certificate",
        matches!(out, metric::Desnowflaked::Violation(_)),
    );
    c.finish("snowflake")
}

fn selftest_embed() -> CliResult {
    let mut c = Checker::new();
    for n in 3..=8 {
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        let m = FiniteMetric::from_matrix(d)?;
        let g = embed::euclidean_embed(&m, embed::TOL_PSD, embed::TOL_RANK);
        c.check(
            &format!("equilateral {n} embeds in dim {}", n - 1),
            g.min_dim == Some(n - 1) && g.residual < 1e-9,
        );
    }
    let h9 = SnowflakeFunction::power(0.9)?;
    let s = metric::apply_snowflake(&k13_metric(), &h9)?;
    let g = embed::euclidean_embed(&s, embed::TOL_PSD, embed::TOL_RANK);
    c.check(
        "star at alpha 0.9 rejected with eigenvalue near -0.48221",
        !g.embeddable() && (g.eigenvalues.last().unwrap() + 0.48221).abs() < 1e-4,
    );
    c.finish("embed")
}

fn selftest_min_dim() -> CliResult {
    let mut c = Checker::new();
    let d = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
    c.check(
        "equilateral 4 needs dim 3",
        embed::min_embedding_dimension(&FiniteMetric::from_matrix(d)?) == Some(3),
    );
    let seg = DMatrix::from_fn(20, 20, |i, j| ((i as f64 - j as f64).abs() / 19.0).sqrt());
    c.check(
        "20-point sqrt segment is full rank",
        embed::min_embedding_dimension(&FiniteMetric::from_matrix(seg)?) == Some(19),
    );
    let line = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
    c.check(
        "collinear triple lives on a line",
        embed::min_embedding_dimension(&FiniteMetric::from_matrix(line)?) == Some(1),
    );
    c.finish("min-dim")
}

fn selftest_alpha_star() -> CliResult {
    let mut c = Checker::new();
    let profile = embed::alpha_star(&k13_metric(), &embed::default_alpha_grid(), 1e-8)?;
    let expect = 0.5 * (1.0 + 1.5f64.log2());
    c.check(
        "star boundary matches closed form",
        profile
            .boundaries
            .first()
            .map(|b| (b.boundary - expect).abs() < 1e-6)
            .unwrap_or(false),
    );
    let d = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
    let profile = embed::alpha_star(
        &FiniteMetric::from_matrix(d)?,
        &embed::default_alpha_grid(),
        1e-8,
    )?;
    c.check(
        "equilateral embeds for every alpha",
        profile.samples.iter().all(|s| s.embeddable),
    );
    c.finish("alpha-star")
}

fn selftest_newton() -> CliResult {
    let mut c = Checker::new();
    let n = 5;
    let ones = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
    let st = embed::newton_embed(&ones, 50, 1e-12, 0.05)?;
    c.check("unit targets return the simplex unchanged", st.iterations == 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 6;
    let mut rho = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 1.0 + (rng.random::<f64>() - 0.5) * 0.02;
            rho[(i, j)] = v;
            rho[(j, i)] = v;
        }
    }
    let st = embed::newton_embed(&rho, 50, 1e-12, 0.05)?;
    c.check(
        "jittered targets converge below 1e-12",
        st.residual_sq < 1e-12 && st.iterations < 50,
    );
    // Central-difference Jacobian against the signed-unit pattern.
    let mut ok = true;
    for n in 3..=6 {
        let p = embed::simplex_base_point(n);
        let step = 1e-6;
        for l in 0..n {
            for k in 0..n {
                if k == l {
                    continue;
                }
                let mut plus = p.clone();
                plus[l][k] += step;
                let mut minus = p.clone();
                minus[l][k] -= step;
                let diff = (embed::squared_distance_map(&plus)
                    - embed::squared_distance_map(&minus))
                    / (2.0 * step);
                let (a, b) = (l.min(k), l.max(k));
                for i in 0..n {
                    for j in (i + 1)..n {
                        let expect = if (i, j) == (a, b) { -2f64.sqrt() } else { 0.0 };
                        if (diff[(i, j)] - expect).abs() >= 1e-6 {
                            ok = false;
                        }
                    }
                }
            }
        }
    }
    c.check("numerical Jacobian matches the -sqrt(2) unit pattern", ok);
    c.finish("newton")
}

fn selftest_john() -> CliResult {
    let mut c = Checker::new();
    let e = norms::john_ellipsoid(&Norm::l2(3))?;
    c.check(
        "euclidean ball is its own John ellipsoid",
        (e.matrix() - DMatrix::identity(3, 3)).amax() < 1e-12,
    );
    let e = norms::john_ellipsoid(&Norm::linf(2))?;
    c.check(
        "square has the unit disc",
        (e.matrix() - DMatrix::identity(2, 2)).amax() < 1e-12,
    );
    let e = norms::john_ellipsoid(&Norm::l1(2))?;
    c.check(
        "cross-polytope has the disc of radius 1/sqrt(2)",
        (e.matrix() - DMatrix::identity(2, 2) * 2.0).amax() < 1e-12,
    );
    let lc = norms::lemma_constants(2);
    c.check(
        "K = 2 sqrt(2) in the plane",
        (lc.k_bound - 2.0 * 2f64.sqrt()).abs() < 1e-12,
    );
    c.check("C matches its formula", {
        let expect = (4.0 * lc.theta_cone.cos() + 2.0) / lc.theta_cone.sin();
        (lc.c_bound - expect).abs() < 1e-12 && (lc.c_bound - 16.24).abs() < 0.01
    });
    c.check(
        "dimension 1 degenerates to K = 2",
        norms::lemma_constants(1).k_bound == 2.0,
    );
    c.finish("john")
}

fn selftest_angles() -> CliResult {
    let mut c = Checker::new();
    let e2 = norms::Ellipsoid::identity(2);
    let collinear = vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![2.0, 0.0]),
    ];
    let t = ang::max_angle_triple(&collinear, &e2)?;
    c.check("collinear set attains exactly pi", t.angle == std::f64::consts::PI);
    let square = vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![1.0, 1.0]),
        DVector::from_vec(vec![0.0, 1.0]),
    ];
    let t = ang::max_angle_triple(&square, &e2)?;
    c.check(
        "unit square attains pi/2",
        (t.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-15,
    );
    let gon: Vec<DVector<f64>> = (0..12)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
            DVector::from_vec(vec![th.cos(), th.sin()])
        })
        .collect();
    let t = ang::max_angle_triple(&gon, &e2)?;
    c.check(
        "regular 12-gon attains pi (n-2)/n",
        (t.angle - std::f64::consts::PI * 10.0 / 12.0).abs() < 1e-12,
    );
    let equilateral = vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.5, 3f64.sqrt() / 2.0]),
    ];
    c.check(
        "equilateral has nothing above pi/2",
        ang::find_angle_above(&equilateral, &e2, std::f64::consts::FRAC_PI_2)?.is_none(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cloud: Vec<DVector<f64>> = (0..200)
        .map(|_| DVector::from_vec(vec![rng.random(), rng.random()]))
        .collect();
    c.check(
        "200 uniform points contain an angle above 3 rad",
        ang::find_angle_above(&cloud, &e2, 3.0)?.is_some(),
    );
    c.finish("angles")
}

fn selftest_ramsey_floor() -> CliResult {
    let mut c = Checker::new();
    let f = ang::empirical_ramsey_floor(1, 3.0, 2000, 0)?;
    c.check("a line supports only 2 points", f.achieved == 2);
    let beta = 2.0 * std::f64::consts::FRAC_PI_3;
    let square = vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![1.0, 1.0]),
        DVector::from_vec(vec![0.0, 1.0]),
    ];
    let cert = ang::max_angle_triple(&square, &norms::Ellipsoid::identity(2))?;
    c.check("square certificate stays below 2 pi/3", cert.angle < beta);
    let f = ang::empirical_ramsey_floor(2, beta, 25_000, 2)?;
    c.check(
        &format!("search reaches at least 4 points (got {})", f.achieved),
        f.achieved >= 4 && f.max_angle < beta,
    );
    c.finish("ramsey-floor")
}

fn selftest_spiral() -> CliResult {
    let mut c = Checker::new();
    let h = SnowflakeFunction::linear_plus_sqrt(1.0, 1.0)?;
    let one = cx::build_spiral(&cx::ConstructionParams {
        h: h.clone(),
        angles: cx::AngleSequence::Geometric,
        count: 1,
        search: cx::TSearch::default(),
    })?;
    c.check(
        "single step yields (0,0) and (t1, 0)",
        one.config.points.len() == 2 && one.config.points[1][1] == 0.0,
    );
    let lin = SnowflakeFunction::linear_plus_sqrt(1.0, 0.0)?;
    let cert = cx::solve_ti(&lin, std::f64::consts::FRAC_PI_4, 7.0, &cx::TSearch::default())?;
    c.check("linear gauge certifies at prev_t", cert.quadrant_start == 7.0);
    let spiral = cx::build_spiral(&cx::ConstructionParams {
        h: h.clone(),
        angles: cx::AngleSequence::Geometric,
        count: 10,
        search: cx::TSearch::default(),
    })?;
    let rep = spiral.verify(&h, 1e-9);
    c.check(
        "10-step spiral verifies with zero violations",
        rep.violations == 0 && rep.min_slack > 0.0,
    );
    c.finish("spiral")
}

fn selftest_remark() -> CliResult {
    let mut c = Checker::new();
    let r = cx::remark_construction(2, &[0.5, 0.25], None)?;
    c.check("two points always succeed", r.config.points.len() == 2);
    let r = cx::remark_construction(3, &[0.5, 0.25], None)?;
    c.check(
        "triangle deep in a linear segment verifies",
        r.verification.violations == 0,
    );
    let slopes: Vec<f64> = (1..=4).map(|k| 2f64.powi(-k)).collect();
    let r = cx::remark_construction(10, &slopes, None)?;
    c.check(
        "ten points with halving slopes verify and satisfy all axioms",
        r.verification.violations == 0 && r.axiom_flags.all_hold(),
    );
    c.finish("remark")
}

fn selftest_certify_alpha() -> CliResult {
    let mut c = Checker::new();
    let near = PointConfig::euclidean(vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![2.0, 1e-6]),
    ])?;
    match certify::refute_alpha_embedding(&near, 0.5)? {
        certify::RefutationOutcome::Refuted(cert) => {
            c.check(
                "near-collinear triple refuted with slack below -1e-9",
                cert.conclusion.slack < -1e-9,
            );
            c.check(
                "pulled-back distances near {1, 1, 4}",
                (cert.conclusion.d_xy - 4.0).abs() < 1e-4,
            );
        }
        _ => c.check("near-collinear triple refuted", false),
    }
    let equilateral = PointConfig::euclidean(vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.5, 3f64.sqrt() / 2.0]),
    ])?;
    c.check(
        "equilateral triangle yields no certificate",
        certify::refute_alpha_embedding(&equilateral, 0.5)?
            .certificate()
            .is_none(),
    );
    c.finish("certify-alpha")
}

fn selftest_certify_h() -> CliResult {
    let mut c = Checker::new();
    let h = SnowflakeFunction::power(0.5)?;
    let ray = PointConfig::euclidean(
        (0..6)
            .map(|i| DVector::from_vec(vec![4f64.powi(i), 0.0]))
            .collect(),
    )?;
    match certify::refute_h_embedding(&ray, &h, certify::WitnessMode::Unbounded)? {
        certify::RefutationOutcome::Refuted(cert) => c.check(
            "geometric ray refuted at apex angle pi",
            cert.apex_angle == std::f64::consts::PI && cert.conclusion.slack < -1e-9,
        ),
        _ => c.check("geometric ray refuted", false),
    }
    let degenerate = SnowflakeFunction::linear_plus_sqrt(1.0, 1.0)?;
    let spiral = cx::build_spiral(&cx::ConstructionParams {
        h: degenerate.clone(),
        angles: cx::AngleSequence::Geometric,
        count: 8,
        search: cx::TSearch::default(),
    })?;
    c.check(
        "spiral with its own gauge is witness-unavailable",
        matches!(
            certify::refute_h_embedding(
                &spiral.config,
                &degenerate,
                certify::WitnessMode::Unbounded
            )?,
            certify::RefutationOutcome::WitnessUnavailable { .. }
        ),
    );
    let blunt = PointConfig::euclidean(vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.5, 0.4]),
    ])?;
    c.check(
        "no large angle, no certificate",
        certify::refute_h_embedding(&blunt, &h, certify::WitnessMode::Unbounded)?
            .certificate()
            .is_none(),
    );
    c.finish("certify-h")
}

fn selftest_distortion() -> CliResult {
    let mut c = Checker::new();
    let two = FiniteMetric::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))?;
    let p = embed::distortion_probe(&two, 1, 2, 0)?;
    c.check(
        "two points embed in the line exactly",
        (p.distortion - 1.0).abs() < 1e-6,
    );
    let d = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
    let p = embed::distortion_probe(&FiniteMetric::from_matrix(d)?, 3, 2, 0)?;
    c.check(
        "equilateral 4 reaches distortion 1",
        (p.distortion - 1.0).abs() < 1e-6,
    );
    let h9 = SnowflakeFunction::power(0.9)?;
    let s = metric::apply_snowflake(&k13_metric(), &h9)?;
    let p = embed::distortion_probe(&s, 3, 4, 7)?;
    c.check(
        "snowflaked star stays strictly above 1",
        p.distortion > 1.0 + 1e-4,
    );
    c.finish("distortion")
}
