//! Monte Carlo estimators for induced homomorphism densities, on finite
//! multigraphs and on limit kernels.
//!
//! The induced density `t(A, B)` of a `k`-vertex pattern `A` in a host
//! `B` is the probability that `k` uniformly chosen host vertices (with
//! replacement, ordered) induce exactly `A` — multiplicities and loop
//! counts included. Its kernel analogue replaces vertices by latent
//! positions `U_i ~ Uniform[0,1]` and the exact indicator by the product
//! `∏_{i≤j} W(U_i, U_j, A(i,j))`, which is the conditional pattern
//! probability given the positions; averaging the conditional probability
//! rather than a sampled indicator spends the same draws for strictly
//! smaller variance.
//!
//! Every estimator returns a [`DensityEstimate`] carrying the plug-in
//! standard error, so estimates from the two routes can be compared on a
//! combined-error scale. The exact enumeration oracles live in `oracle`;
//! tests pit each estimator against them.

use rand::prelude::*;

use crate::graph::AdjacencyMatrix;
use crate::multigraphon::Multigraphon;
use crate::oracle::DistributionTable;
use crate::{Error, Result};

/// A Monte Carlo mean with its plug-in standard error
/// `sqrt((X̄² − X̄²)/S)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl DensityEstimate {
    /// Exact value: zero spread, conventionally one sample.
    pub fn exact(value: f64) -> Self {
        DensityEstimate { mean: value, stderr: 0.0, samples: 1 }
    }

    fn from_sums(sum: f64, sum_sq: f64, samples: u64) -> Self {
        let s = samples as f64;
        let mean = sum / s;
        let variance = (sum_sq / s - mean * mean).max(0.0);
        DensityEstimate { mean, stderr: (variance / s).sqrt(), samples }
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &Self) -> f64 {
        (self.stderr * self.stderr + other.stderr * other.stderr).sqrt()
    }
}

fn validate_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("zero Monte Carlo samples".into()));
    }
    Ok(())
}

/// Does the ordered vertex map `phi` induce exactly the pattern in the
/// host (all pairs `i ≤ j`, diagonal loop counts included)?
fn induces(pattern: &AdjacencyMatrix, host: &AdjacencyMatrix, phi: &[usize]) -> bool {
    let k = pattern.n();
    for i in 0..k {
        for j in i..k {
            if host.get(phi[i], phi[j]) != pattern.get(i, j) {
                return false;
            }
        }
    }
    true
}

/// Monte Carlo induced density of `pattern` in `host`: sample uniform
/// ordered maps `[k] → [n]` with replacement and average the match
/// indicator.
///
/// A zero-vertex pattern has density exactly 1; a nonempty pattern needs
/// a nonempty host.
pub fn hom_density_mc(
    pattern: &AdjacencyMatrix,
    host: &AdjacencyMatrix,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<DensityEstimate> {
    validate_samples(samples)?;
    let k = pattern.n();
    if k == 0 {
        return Ok(DensityEstimate::exact(1.0));
    }
    let n = host.n();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "induced density into an empty host is undefined".into(),
        ));
    }
    let mut phi = vec![0usize; k];
    let mut hits = 0u64;
    for _ in 0..samples {
        for slot in phi.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        hits += induces(pattern, host, &phi) as u64;
    }
    let sum = hits as f64;
    // Indicator samples: sum of squares equals the sum.
    Ok(DensityEstimate::from_sums(sum, sum, samples))
}

/// Monte Carlo induced density of `pattern` in a limit kernel: sample
/// latent positions `U_1..U_k` i.i.d. uniform and average the conditional
/// pattern probability `∏_{i≤j} W(U_i, U_j, pattern(i,j))`.
pub fn graphon_density_mc(
    pattern: &AdjacencyMatrix,
    w: &dyn Multigraphon,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<DensityEstimate> {
    validate_samples(samples)?;
    let k = pattern.n();
    if k == 0 {
        return Ok(DensityEstimate::exact(1.0));
    }
    let mut us = vec![0.0f64; k];
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        for u in us.iter_mut() {
            *u = rng.random();
        }
        let mut x = 1.0f64;
        'pairs: for i in 0..k {
            for j in i..k {
                x *= w.eval(us[i], us[j], pattern.get(i, j));
                if x == 0.0 {
                    break 'pairs;
                }
            }
        }
        sum += x;
        sum_sq += x * x;
    }
    Ok(DensityEstimate::from_sums(sum, sum_sq, samples))
}

/// Empirical law of the pattern induced by `k` distinct host vertices in
/// uniform random order, over `samples` draws (each draw adds mass
/// `1/samples`). Injections are drawn by a partial Fisher–Yates shuffle.
pub fn sampled_pattern_distribution(
    host: &AdjacencyMatrix,
    k: usize,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<DistributionTable<AdjacencyMatrix>> {
    validate_samples(samples)?;
    let n = host.n();
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "no injections of {k} vertices into {n}"
        )));
    }
    let weight = 1.0 / samples as f64;
    let mut pool: Vec<usize> = (0..n).collect();
    let mut table = DistributionTable::new();
    for _ in 0..samples {
        for i in 0..k {
            let j = rng.random_range(i..n);
            pool.swap(i, j);
        }
        let mut a = AdjacencyMatrix::zero(k);
        for i in 0..k {
            for j in i..k {
                a.set(i, j, host.get(pool[i], pool[j]));
            }
        }
        table.add(a, weight);
    }
    Ok(table)
}

/// Rescaled degree sample `d_i / n` of a finite multigraph — the input to
/// empirical degree CDFs and Kolmogorov–Smirnov comparisons.
pub fn degree_sample(b: &AdjacencyMatrix) -> Vec<f64> {
    let n = b.n() as f64;
    (0..b.n()).map(|i| b.degree(i) as f64 / n).collect()
}

// ===========================================================================
// Tests
// ===========================================================================
