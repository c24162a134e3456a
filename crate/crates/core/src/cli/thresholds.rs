//! The single table of pass/fail constants used by experiments and by the
//! acceptance test suite.
//!
//! Every gate in the toolkit reads its tolerance from here, so the full
//! set of numerical claims is auditable in one place. Exact identities
//! get float-roundoff budgets; Monte Carlo checks get σ multipliers and
//! explicit slack for finite-size bias.

/// Entrywise tolerance for exact enumeration identities (closed-form
/// graph law vs exhaustive word enumeration; degree factorization).
/// Gates: `exact-small`, acceptance 1 and 7.
pub const EXACT_IDENTITY_TOL: f64 = 1e-12;

/// Total-variation tolerance between a solved chain stationary law and
/// its closed-form target. Gates: `exact-small`, acceptance 2.
pub const CHAIN_TV_TOL: f64 = 1e-10;

/// Upper bound on the median Kolmogorov–Smirnov distance between
/// rescaled degrees and the Gamma law at the largest swept size
/// (n = 400, κ = 1.5, ρ = 2 ⇒ KS ≈ 0.83/√n ≈ 0.042 typically).
/// Gates: `degree-gamma`, acceptance 4.
pub const KS_MEDIAN_MAX: f64 = 0.06;

/// Three-sigma band for the empirical double-edge frequency of the
/// configuration model on degrees (2,2) at 10⁵ samples. Gates:
/// acceptance 3.
pub const CONFIG_DOUBLE_EDGE_TOL: f64 = 0.0045;

/// p-value floor below which a chi-square goodness-of-fit test counts as
/// a failure. Gates: `edge-poisson`, acceptance 5.
pub const GOF_P_FLOOR: f64 = 0.001;

/// Fraction of tested vertex pairs that must clear [`GOF_P_FLOOR`]
/// (8 of 10 at the default replication). Gates: `edge-poisson`,
/// acceptance 5.
pub const GOF_PASS_FRACTION: f64 = 0.8;

/// σ multiplier for comparing the two Monte Carlo density routes.
/// Gates: `density-convergence`, acceptance 6.
pub const DENSITY_SIGMA: f64 = 3.0;

/// Additive slack for finite-size bias in density comparisons: the
/// finite-host law deviates from its limit by O(k²/n) = 0.01 at
/// k = 2, n = 400. Gates: `density-convergence`, acceptance 6.
pub const DENSITY_SLACK: f64 = 0.01;

/// σ multiplier for empirical moment checks against the Gamma moment
/// formula. Gates: acceptance 7.
pub const MOMENT_SIGMA: f64 = 4.0;

/// Tolerance for the kernel edge-density identity ρ(W) = ρ. Gates:
/// acceptance 8.
pub const EDGE_DENSITY_TOL: f64 = 1e-6;

/// Tolerance for average_degree(W, x) = degree_quantile(W, x) on the
/// evaluation grid. Gates: acceptance 8.
pub const AVG_DEGREE_QUANTILE_TOL: f64 = 1e-8;

/// Bound on the residual multiplicity mass after series truncation.
/// Gates: acceptance 8.
pub const KERNEL_TAIL_DEFECT: f64 = 1e-10;

/// Pointwise tolerance for the strength-1 simple-edge closed form.
/// Gates: `spag-check`, acceptance 9.
pub const SPAG_TOL: f64 = 1e-12;

/// Tolerance for Gamma cdf/quantile round-trips and for incomplete-gamma
/// agreement with the quadrature oracle. Gates: acceptance 10.
pub const ROUND_TRIP_TOL: f64 = 1e-10;

/// Tolerance for the ln-gamma recurrence sweep. Gates: acceptance 10.
pub const LN_GAMMA_RECURRENCE_TOL: f64 = 1e-12;

/// Truncation thresholds for the uniform-integrability diagnostic
/// tables. Gates: `ui-diagnostic`.
pub const UI_THRESHOLDS: [f64; 7] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// The truncated mean at the top threshold must have decayed to at most
/// this fraction of the untruncated mean (the observed decay is ~100×
/// stronger; this is a lenient structural gate). Gates: `ui-diagnostic`.
pub const UI_DECAY_FRACTION: f64 = 0.25;

/// Number of seed replicas statistical experiments run by default;
/// medians over replicas insulate pass/fail from single-seed flukes.
pub const DEFAULT_REPLICAS: usize = 10;

/// Default master seed when none is given.
pub const DEFAULT_SEED: u64 = 7;

/// Grid used for pointwise kernel identities: {0.05, 0.10, …, 0.95}.
pub fn unit_grid_19() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}
