//! The built-in experiments. Each one runs from a resolved
//! [`ExperimentConfig`], appends tidy statistic rows to a [`Report`], and
//! records pass/fail assertions against the constants in
//! [`crate::cli::thresholds`].
//!
//! Determinism: every parallel work unit (seed replica or Monte Carlo
//! chunk) owns a fixed substream id derived from the master seed, and
//! results are merged in unit order, so a report depends only on the
//! configuration — never on the worker count. Set the environment
//! variable [`WORKERS_ENV`] to cap parallelism.

use itertools::iproduct;
use rayon::prelude::*;

use crate::cli::config::ExperimentConfig;
use crate::cli::report::{required_passes, Report};
use crate::cli::thresholds::{
    unit_grid_19, CHAIN_TV_TOL, DENSITY_SIGMA, DENSITY_SLACK, EXACT_IDENTITY_TOL, GOF_P_FLOOR,
    KS_MEDIAN_MAX, SPAG_TOL, UI_DECAY_FRACTION, UI_THRESHOLDS,
};
use crate::densities::{degree_sample, graphon_density_mc, hom_density_mc};
use crate::generators::{configuration_model, pag, DegreeConvention, RngStream};
use crate::graph::AdjacencyMatrix;
use crate::multigraphon::{Multigraphon, PoissonGamma};
use crate::oracle::{
    ball_replacement_stationary, edge_reconnect_stationary, edge_stationary_probability,
    exact_pag_distribution, polya_degree_marginal, polya_word_table, stationary_probability,
};
use crate::stats::{chi_square_poisson_gof, gamma_cdf, ks_distance, median, truncated_mean};
use crate::{Error, Result};

/// Environment variable capping the rayon worker count for experiments.
/// Unset means the rayon default.
pub const WORKERS_ENV: &str = "MGL_WORKERS";

/// Run `f` on a worker pool sized by [`WORKERS_ENV`] (or on the default
/// pool when the variable is unset).
fn install_pool<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let raw = match std::env::var(WORKERS_ENV) {
        Err(std::env::VarError::NotPresent) => return f(),
        Err(e) => {
            return Err(Error::InvalidParameter(format!("{WORKERS_ENV} is not unicode: {e}")));
        }
        Ok(raw) => raw,
    };
    let workers: usize = raw.trim().parse().ok().filter(|&w| w > 0).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "{WORKERS_ENV} must be a positive integer, got '{raw}'"
        ))
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    pool.install(f)
}

/// Run the experiment named in the configuration and return its report.
/// Configuration problems surface as `Err`; statistical failures surface
/// as a report with `passed() == false`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    match cfg.experiment.as_str() {
        "exact-small" => exact_small(cfg, &mut report)?,
        "degree-gamma" => degree_gamma(cfg, &mut report)?,
        "edge-poisson" => edge_poisson(cfg, &mut report)?,
        "density-convergence" => density_convergence(cfg, &mut report)?,
        "spag-check" => spag_check(cfg, &mut report)?,
        "ui-diagnostic" => ui_diagnostic(cfg, &mut report)?,
        other => {
            return Err(Error::InvalidParameter(format!("unknown experiment '{other}'")));
        }
    }
    Ok(report)
}

fn edges_as_usize(cfg: &ExperimentConfig, n: usize) -> Result<usize> {
    usize::try_from(cfg.edges_at(n))
        .map_err(|_| Error::InvalidParameter("edge count overflows usize".into()))
}

/// Sizes swept by the convergence experiments: quarter, half, and full n
/// (floored at 2, deduplicated).
fn size_sweep(n: usize) -> Vec<usize> {
    let mut sizes = vec![(n / 4).max(2), (n / 2).max(2), n.max(2)];
    sizes.dedup();
    sizes
}

// ===========================================================================
// exact-small
// ===========================================================================

/// Exhaustive identities on a small instance, no sampling involved:
/// the enumerated attachment law equals its closed form, the degree
/// marginal factorizes it, and both Markov chains' solved stationary
/// laws match their targets in total variation.
fn exact_small(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let n = cfg.n;
    let n64 = n as u64;
    let m = edges_as_usize(cfg, n)?;
    let kappa = cfg.kappa;

    let graph_law = exact_pag_distribution(n, m, kappa)?;

    let mut closed_diff = 0.0f64;
    for (b, p) in graph_law.iter() {
        closed_diff = closed_diff.max((stationary_probability(b, kappa)? - p).abs());
    }
    report.push_row(n64, "pag_vs_closed_form_max_abs_diff", closed_diff);
    report.check(
        closed_diff < EXACT_IDENTITY_TOL,
        format!(
            "closed-form graph law differs from exhaustive enumeration by {closed_diff:.3e} \
             (tol {EXACT_IDENTITY_TOL:.0e})"
        ),
    );

    let marginal = polya_degree_marginal(n, m, kappa)?;
    let mut fact_diff = 0.0f64;
    for (b, p) in graph_law.iter() {
        fact_diff = fact_diff.max((edge_stationary_probability(b, &marginal)? - p).abs());
    }
    report.push_row(n64, "degree_factorization_max_abs_diff", fact_diff);
    report.check(
        fact_diff < EXACT_IDENTITY_TOL,
        format!(
            "degree-marginal factorization differs from the graph law by {fact_diff:.3e} \
             (tol {EXACT_IDENTITY_TOL:.0e})"
        ),
    );

    let ball = ball_replacement_stationary(n, m, kappa)?;
    let words = polya_word_table(n, m, kappa)?;
    let ball_tv = ball.tv_distance(&words);
    report.push_row(n64, "ball_replacement_tv", ball_tv);
    report.check(
        ball_tv < CHAIN_TV_TOL,
        format!(
            "ball-replacement stationary law is {ball_tv:.3e} from the urn word law in total \
             variation (tol {CHAIN_TV_TOL:.0e})"
        ),
    );

    let edge = edge_reconnect_stationary(
        n,
        m as u64,
        kappa,
        DegreeConvention::BeforeDetachment,
    )?;
    let edge_tv = edge.tv_distance(&graph_law);
    report.push_row(n64, "edge_reconnect_tv", edge_tv);
    report.check(
        edge_tv < CHAIN_TV_TOL,
        format!(
            "edge-reconnecting stationary law is {edge_tv:.3e} from the attachment graph law \
             in total variation (tol {CHAIN_TV_TOL:.0e})"
        ),
    );

    Ok(())
}

// ===========================================================================
// degree-gamma
// ===========================================================================

/// Kolmogorov–Smirnov distance between rescaled degrees d_i/n of sampled
/// attachment graphs and the Gamma(κ, κ/ρ) limit, swept over sizes
/// n/4, n/2, n with `replicas` independent seeds each. Passes when the
/// per-size medians strictly decrease and the largest-size median is
/// below [`KS_MEDIAN_MAX`].
fn degree_gamma(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sizes = size_sweep(cfg.n);
    let replicas = cfg.replicas;
    let kappa = cfg.kappa;
    let beta = kappa / cfg.rho();
    let stream = RngStream::new(cfg.seed);

    let jobs: Vec<(usize, usize)> = iproduct!(0..sizes.len(), 0..replicas).collect();
    let ks: Vec<f64> = install_pool(|| {
        jobs.par_iter()
            .map(|&(si, r)| -> Result<f64> {
                let ns = sizes[si];
                let m = edges_as_usize(cfg, ns)?;
                let mut rng = stream.substream((si * replicas + r) as u64);
                let b = pag(ns, m, kappa, &mut rng)?;
                let mut degrees = degree_sample(&b);
                degrees.sort_by(|a, b| a.partial_cmp(b).expect("degrees are finite"));
                Ok(ks_distance(&degrees, &|z| gamma_cdf(z, kappa, beta)))
            })
            .collect()
    })?;

    let mut medians = Vec::with_capacity(sizes.len());
    for (si, &ns) in sizes.iter().enumerate() {
        let chunk = &ks[si * replicas..(si + 1) * replicas];
        for &v in chunk {
            report.push_row(ns as u64, "ks", v);
        }
        let med = median(chunk);
        report.push_row(ns as u64, "ks_median", med);
        medians.push(med);
    }

    report.check(
        medians.windows(2).all(|w| w[1] < w[0]),
        format!("median KS distances do not strictly decrease along the size sweep: {medians:?}"),
    );
    let last = *medians.last().expect("at least one size");
    report.check(
        last < KS_MEDIAN_MAX,
        format!(
            "median KS distance {last:.4} at n = {} is not below {KS_MEDIAN_MAX}",
            sizes.last().expect("at least one size")
        ),
    );
    Ok(())
}

// ===========================================================================
// edge-poisson
// ===========================================================================

/// Pairwise multiplicities of the configuration model on a degree
/// sequence drawn once from the attachment graph: for `replicas`
/// disjoint vertex pairs (i, j), the multiplicity histogram over
/// `samples` independent resamples is tested against Poisson with mean
/// d_i d_j / (2m). Passes when at least [`required_passes`] pairs clear
/// the p-value floor.
fn edge_poisson(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let n = cfg.n;
    let pair_count = cfg.replicas;
    if n < 2 * pair_count {
        return Err(Error::InvalidParameter(format!(
            "edge-poisson needs n ≥ {} for {pair_count} disjoint vertex pairs, got n = {n}",
            2 * pair_count
        )));
    }
    let m = edges_as_usize(cfg, n)?;
    let stream = RngStream::new(cfg.seed);

    // One degree sequence, fixed for the whole experiment.
    let degrees = pag(n, m, cfg.kappa, &mut stream.substream(0))?.degrees();
    let two_m = degrees.sum() as f64;
    let pairs: Vec<(usize, usize)> = (0..pair_count).map(|i| (2 * i, 2 * i + 1)).collect();

    // Resample the pairing in fixed chunks (one substream per chunk) so
    // the merged histograms are identical for any worker count.
    let chunk_count = 10usize.min(cfg.samples as usize).max(1);
    let base = cfg.samples / chunk_count as u64;
    let remainder = cfg.samples % chunk_count as u64;
    let chunk_sizes: Vec<u64> =
        (0..chunk_count as u64).map(|c| base + u64::from(c < remainder)).collect();

    let chunked: Vec<Vec<Vec<u64>>> = install_pool(|| {
        chunk_sizes
            .par_iter()
            .enumerate()
            .map(|(c, &draws)| -> Result<Vec<Vec<u64>>> {
                let mut rng = stream.substream(1 + c as u64);
                let mut hist: Vec<Vec<u64>> = vec![Vec::new(); pairs.len()];
                for _ in 0..draws {
                    let b = configuration_model(&degrees, &mut rng);
                    for (pi, &(i, j)) in pairs.iter().enumerate() {
                        let x = b.get(i, j) as usize;
                        if hist[pi].len() <= x {
                            hist[pi].resize(x + 1, 0);
                        }
                        hist[pi][x] += 1;
                    }
                }
                Ok(hist)
            })
            .collect()
    })?;

    let mut merged: Vec<Vec<u64>> = vec![Vec::new(); pairs.len()];
    for hist in chunked {
        for (pi, cell) in hist.into_iter().enumerate() {
            if merged[pi].len() < cell.len() {
                merged[pi].resize(cell.len(), 0);
            }
            for (k, count) in cell.into_iter().enumerate() {
                merged[pi][k] += count;
            }
        }
    }

    let mut passing = 0usize;
    for (pi, &(i, j)) in pairs.iter().enumerate() {
        let d_i = degrees.as_slice()[i] as f64;
        let d_j = degrees.as_slice()[j] as f64;
        let lambda = d_i * d_j / two_m;
        let gof = chi_square_poisson_gof(&merged[pi], lambda)?;
        report.push_row(n as u64, format!("lambda_pair_{i}_{j}"), lambda);
        report.push_row(n as u64, format!("gof_p_pair_{i}_{j}"), gof.p_value);
        if gof.p_value > GOF_P_FLOOR {
            passing += 1;
        }
    }
    report.push_row(n as u64, "gof_passing_pairs", passing as f64);
    let need = required_passes(pairs.len());
    report.check(
        passing >= need,
        format!(
            "only {passing} of {} vertex pairs clear the goodness-of-fit floor p > {GOF_P_FLOOR} \
             (need {need})",
            pairs.len()
        ),
    );
    Ok(())
}

// ===========================================================================
// density-convergence
// ===========================================================================

/// All two-vertex patterns with loop counts in {0, 2, 4} and edge
/// multiplicity in {0, 1, 2, 3}, labeled `<loops at 0>_<edges>_<loops at 1>`.
fn pattern_battery() -> Vec<(AdjacencyMatrix, String)> {
    let mut battery = Vec::with_capacity(36);
    for d00 in [0u32, 2, 4] {
        for off in [0u32, 1, 2, 3] {
            for d11 in [0u32, 2, 4] {
                let a = AdjacencyMatrix::from_rows(&[vec![d00, off], vec![off, d11]], true)
                    .expect("battery patterns are valid");
                battery.push((a, format!("{d00}_{off}_{d11}")));
            }
        }
    }
    battery
}

/// Induced two-vertex pattern densities of one large sampled attachment
/// graph against the Poisson-Gamma kernel's predictions, for the whole
/// pattern battery. Each comparison must land within
/// [`DENSITY_SIGMA`] combined standard errors plus [`DENSITY_SLACK`]
/// (the finite-size allowance).
fn density_convergence(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let n = cfg.n;
    let m = edges_as_usize(cfg, n)?;
    let kappa = cfg.kappa;
    let kernel = PoissonGamma::new(kappa, cfg.rho())?;
    let stream = RngStream::new(cfg.seed);
    let host = pag(n, m, kappa, &mut stream.substream(0))?;
    let battery = pattern_battery();

    let estimates: Vec<_> = install_pool(|| {
        battery
            .par_iter()
            .enumerate()
            .map(|(i, (pattern, _))| -> Result<_> {
                let mut host_rng = stream.substream(100 + 2 * i as u64);
                let mut kernel_rng = stream.substream(101 + 2 * i as u64);
                let host_est = hom_density_mc(pattern, &host, cfg.samples, &mut host_rng)?;
                let kernel_est =
                    graphon_density_mc(pattern, &kernel, cfg.samples, &mut kernel_rng)?;
                Ok((host_est, kernel_est))
            })
            .collect()
    })?;

    let mut battery_mass = 0.0f64;
    for ((_, label), (host_est, kernel_est)) in battery.iter().zip(&estimates) {
        let diff = (host_est.mean - kernel_est.mean).abs();
        let bound = DENSITY_SIGMA * host_est.combined_stderr(kernel_est) + DENSITY_SLACK;
        report.push_row(n as u64, format!("host_density_{label}"), host_est.mean);
        report.push_row(n as u64, format!("kernel_density_{label}"), kernel_est.mean);
        report.push_row(n as u64, format!("abs_diff_{label}"), diff);
        report.push_row(n as u64, format!("bound_{label}"), bound);
        report.check(
            diff <= bound,
            format!(
                "pattern {label}: |{:.5} − {:.5}| = {diff:.5} exceeds the allowance {bound:.5}",
                host_est.mean, kernel_est.mean
            ),
        );
        battery_mass += kernel_est.mean;
    }
    // Diagnostic: the battery covers multiplicities 0..3 and loop counts
    // 0/2/4, so its kernel mass should be close to (but below) 1.
    report.push_row(n as u64, "kernel_density_battery_total", battery_mass);
    Ok(())
}

// ===========================================================================
// spag-check
// ===========================================================================

/// Pointwise check of the strength-1 closed form for the probability of
/// at least one edge: 1 − exp(−ρ ln(1−x) ln(1−y)) on a 19 × 19 grid.
/// Requires κ = 1; any other strength is a configuration error.
fn spag_check(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    if cfg.kappa != 1.0 {
        return Err(Error::InvalidParameter(format!(
            "spag-check requires strength 1 (the closed form holds only there), got κ = {}",
            cfg.kappa
        )));
    }
    let rho = cfg.rho();
    let w = PoissonGamma::new(1.0, rho)?;
    let grid = unit_grid_19();
    let mut worst = 0.0f64;
    let mut worst_at = (0.0f64, 0.0f64);
    for &x in &grid {
        for &y in &grid {
            let got = w.simple_edge_probability(x, y);
            let want = 1.0 - (-rho * (1.0 - x).ln() * (1.0 - y).ln()).exp();
            let err = (got - want).abs();
            if err > worst {
                worst = err;
                worst_at = (x, y);
            }
        }
    }
    report.push_row(0, "spag_max_abs_err", worst);
    report.check(
        worst < SPAG_TOL,
        format!(
            "strength-1 simple-edge closed form is off by {worst:.3e} at ({}, {}) \
             (tol {SPAG_TOL:.0e})",
            worst_at.0, worst_at.1
        ),
    );
    Ok(())
}

// ===========================================================================
// ui-diagnostic
// ===========================================================================

/// Truncated-mean tables for the two uniform-integrability conditions
/// that kernel convergence rests on: E[X 1{X ≥ t}] of pair multiplicities
/// averaged over all off-diagonal pairs, and of diagonal entries averaged
/// over vertices, pooled across seed replicas, for each threshold in
/// [`UI_THRESHOLDS`] and each size in the sweep. Passes when each table
/// is nonincreasing in the threshold and the top-threshold tail has
/// decayed below [`UI_DECAY_FRACTION`] of the untruncated mean.
fn ui_diagnostic(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sizes = size_sweep(cfg.n);
    let replicas = cfg.replicas;
    let stream = RngStream::new(cfg.seed);

    let jobs: Vec<(usize, usize)> = iproduct!(0..sizes.len(), 0..replicas).collect();
    let draws: Vec<(usize, Vec<f64>, Vec<f64>)> = install_pool(|| {
        jobs.par_iter()
            .map(|&(si, r)| -> Result<(usize, Vec<f64>, Vec<f64>)> {
                let ns = sizes[si];
                let m = edges_as_usize(cfg, ns)?;
                let mut rng = stream.substream((si * replicas + r) as u64);
                let b = pag(ns, m, cfg.kappa, &mut rng)?;
                let mut off = Vec::with_capacity(ns * (ns - 1) / 2);
                let mut diag = Vec::with_capacity(ns);
                for i in 0..ns {
                    diag.push(b.get(i, i) as f64);
                    for j in (i + 1)..ns {
                        off.push(b.get(i, j) as f64);
                    }
                }
                Ok((si, off, diag))
            })
            .collect()
    })?;

    let mut off_pools: Vec<Vec<f64>> = vec![Vec::new(); sizes.len()];
    let mut diag_pools: Vec<Vec<f64>> = vec![Vec::new(); sizes.len()];
    for (si, off, diag) in draws {
        off_pools[si].extend(off);
        diag_pools[si].extend(diag);
    }

    let top = *UI_THRESHOLDS.last().expect("thresholds are nonempty");
    for (si, &ns) in sizes.iter().enumerate() {
        for (label, pool) in [("offdiag", &off_pools[si]), ("diag", &diag_pools[si])] {
            let table: Vec<f64> =
                UI_THRESHOLDS.iter().map(|&t| truncated_mean(pool, t)).collect();
            for (&t, &v) in UI_THRESHOLDS.iter().zip(&table) {
                report.push_row(ns as u64, format!("{label}_truncated_mean_{t}"), v);
            }
            let slack = 1e-9 * (1.0 + table[0].abs());
            report.check(
                table.windows(2).all(|w| w[1] <= w[0] + slack),
                format!("{label} truncated means at n = {ns} are not nonincreasing: {table:?}"),
            );
            let tail = *table.last().expect("thresholds are nonempty");
            report.check(
                tail <= UI_DECAY_FRACTION * table[0] + slack,
                format!(
                    "{label} tail mass at n = {ns}: truncated mean {tail:.4} at threshold {top} \
                     has not decayed below {UI_DECAY_FRACTION} of the full mean {:.4}",
                    table[0]
                ),
            );
        }
    }
    Ok(())
}

// ===========================================================================
// Tests
// ===========================================================================
