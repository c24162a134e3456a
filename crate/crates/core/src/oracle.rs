//! Exact probability oracles: closed-form laws, brute-force enumeration,
//! and stationary-distribution solves on small state spaces.
//!
//! Everything here is deliberately independent of the samplers in
//! `generators`: enumeration walks state spaces exhaustively, word
//! probabilities are computed by sequential products or Gamma-function
//! closed forms, and chain stationarity is obtained by solving the
//! balance equations of the explicitly built transition kernel. Monte
//! Carlo output is always checked against one of these routes, never
//! against itself.
//!
//! All enumerations carry explicit budgets and refuse oversized inputs
//! with [`Error::BudgetExceeded`] rather than grinding silently.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::generators::DegreeConvention;
use crate::graph::{AdjacencyMatrix, DegreeSequence, UrnConfiguration};
use crate::stats::ln_gamma;
use crate::{Error, Result};

/// Largest number of words enumerated exhaustively (`n^{2m}`).
const WORD_ENUMERATION_BUDGET: u128 = 10_000_000;
/// Largest number of maps enumerated for exact induced densities (`n^k`).
const MAP_ENUMERATION_BUDGET: u128 = 100_000_000;
/// Largest number of degree compositions enumerated.
const COMPOSITION_BUDGET: f64 = 1_000_000.0;
/// Largest chain state space passed to the stationary solver.
const CHAIN_STATE_BUDGET: u128 = 100_000;
/// State count up to which the stationary solve uses a dense LU
/// factorization; larger spaces fall back to power iteration.
const DENSE_SOLVE_LIMIT: usize = 512;
/// Row-stochasticity tolerance for explicitly built kernels.
const KERNEL_ROW_TOL: f64 = 1e-12;
/// Power-iteration convergence tolerance (L¹ change per sweep).
const POWER_ITERATION_TOL: f64 = 1e-13;

// ===========================================================================
// DistributionTable
// ===========================================================================

/// A finitely supported probability distribution with ordered keys.
///
/// Keys are ordered so that iteration, serialization, and comparisons are
/// deterministic. Sums are accumulated with Neumaier compensation to keep
/// totals trustworthy at the `1e−12` scale the exact tests work at.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistributionTable<K: Ord> {
    map: BTreeMap<K, f64>,
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

impl<K: Ord> DistributionTable<K> {
    pub fn new() -> Self {
        DistributionTable { map: BTreeMap::new() }
    }

    /// Add mass to a key (creating it at zero first). Negative mass is a
    /// caller bug.
    pub fn add(&mut self, key: K, p: f64) {
        debug_assert!(p >= -1e-15, "negative probability mass {p}");
        *self.map.entry(key).or_insert(0.0) += p;
    }

    /// Mass at a key; zero when absent.
    pub fn get(&self, key: &K) -> f64 {
        self.map.get(key).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.map.iter().map(|(k, &p)| (k, p))
    }

    /// Compensated total mass.
    pub fn total(&self) -> f64 {
        neumaier_sum(self.map.values().copied())
    }

    /// Errors unless the total lies within `tol` of 1.
    pub fn validate_total(&self, tol: f64) -> Result<()> {
        let total = self.total();
        if (total - 1.0).abs() > tol {
            return Err(Error::InconsistentDistribution(format!(
                "total mass {total} differs from 1 by more than {tol}"
            )));
        }
        Ok(())
    }

    /// Rescale to total mass 1. Errors on zero or non-finite total.
    pub fn normalize(&mut self) -> Result<()> {
        let total = self.total();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateData(format!(
                "cannot normalize a table with total mass {total}"
            )));
        }
        for p in self.map.values_mut() {
            *p /= total;
        }
        Ok(())
    }

    /// Total-variation distance `½·Σ|p − q|` over the union of supports.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let mut diffs: Vec<f64> = Vec::with_capacity(self.len() + other.len());
        for (k, p) in self.iter() {
            diffs.push((p - other.get(k)).abs());
        }
        for (k, q) in other.iter() {
            if !self.map.contains_key(k) {
                diffs.push(q.abs());
            }
        }
        0.5 * neumaier_sum(diffs.into_iter())
    }

    /// Largest pointwise probability difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (k, p) in self.iter() {
            worst = worst.max((p - other.get(k)).abs());
        }
        for (k, q) in other.iter() {
            if !self.map.contains_key(k) {
                worst = worst.max(q.abs());
            }
        }
        worst
    }

    /// Push the distribution forward through a key map, merging collisions.
    pub fn map_keys<L: Ord>(&self, f: impl Fn(&K) -> L) -> DistributionTable<L> {
        let mut out = DistributionTable::new();
        for (k, p) in self.iter() {
            out.add(f(k), p);
        }
        out
    }
}

impl DistributionTable<String> {
    /// Deterministic JSON object `{key: probability, …}` (keys sorted).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.map).expect("string-keyed maps always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<String, f64> = serde_json::from_str(text)?;
        Ok(DistributionTable { map })
    }
}

// ===========================================================================
// Closed-form laws
// ===========================================================================

fn validate_strength(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "urn strength must be finite and positive, got {kappa}"
        )));
    }
    Ok(())
}

/// Pólya word probability from color counts alone (the law is
/// exchangeable):
/// `P = ∏_i ∏_{j=1}^{d_i}(κ+j−1) / ∏_{j=1}^{Σd}(nκ+j−1)`,
/// evaluated in log space through the Gamma function.
pub fn polya_word_probability_from_counts(counts: &[u64], kappa: f64) -> Result<f64> {
    validate_strength(kappa)?;
    if counts.is_empty() {
        return Err(Error::InvalidParameter("no colors".into()));
    }
    let n = counts.len() as f64;
    let total: u64 = counts.iter().sum();
    let mut ln = ln_gamma(n * kappa) - ln_gamma(n * kappa + total as f64);
    for &d in counts {
        ln += ln_gamma(kappa + d as f64) - ln_gamma(kappa);
    }
    Ok(ln.exp())
}

/// Probability of one specific urn word under the sequential Pólya law.
pub fn polya_probability(psi: &UrnConfiguration, kappa: f64) -> Result<f64> {
    polya_word_probability_from_counts(&psi.color_counts(), kappa)
}

/// Number of urn words mapping onto a given multigraph, in log space:
/// `m!·2^{m′} / (∏_{i<j} B(i,j)! · ∏_i (B(i,i)/2)!)` — edge sequences
/// times per-edge orientations, divided by multi-edge symmetry.
fn ln_word_count(b: &AdjacencyMatrix) -> f64 {
    let (m, m_prime) = b.edge_counts();
    let mut ln = ln_gamma(m as f64 + 1.0) + m_prime as f64 * std::f64::consts::LN_2;
    for i in 0..b.n() {
        ln -= ln_gamma(b.get(i, i) as f64 / 2.0 + 1.0);
        for j in (i + 1)..b.n() {
            ln -= ln_gamma(b.get(i, j) as f64 + 1.0);
        }
    }
    ln
}

/// Closed-form stationary probability of a multigraph under the
/// preferential-attachment law with strength `κ`: the Pólya word
/// probability of its degree counts times the number of words realizing
/// the graph.
pub fn stationary_probability(b: &AdjacencyMatrix, kappa: f64) -> Result<f64> {
    let counts = b.degrees();
    let word_prob = polya_word_probability_from_counts(counts.as_slice(), kappa)?;
    Ok((ln_word_count(b) + word_prob.ln()).exp())
}

/// Conditional configuration-model probability of a multigraph given its
/// own degrees: `(∏ d_i! / (2m)!) · m!·2^{m′} / (∏ B(i,j)!·∏(B(i,i)/2)!)`
/// — the fraction of stub arrangements that produce exactly `B`.
pub fn configuration_probability(b: &AdjacencyMatrix) -> f64 {
    let d = b.degrees();
    let two_m = d.sum();
    let mut ln = ln_word_count(b) - ln_gamma(two_m as f64 + 1.0);
    for &di in d.as_slice() {
        ln += ln_gamma(di as f64 + 1.0);
    }
    ln.exp()
}

/// Probability of a multigraph under the edge-stationary law built from a
/// degree-sequence distribution: `μ(d(B)) × P_config(B | d(B))`.
///
/// Errors if the degree law mixes different vertex counts or edge totals
/// (such a mixture is not one graph law).
pub fn edge_stationary_probability(
    b: &AdjacencyMatrix,
    degree_law: &DistributionTable<DegreeSequence>,
) -> Result<f64> {
    let mut shape: Option<(usize, u64)> = None;
    for (d, _) in degree_law.iter() {
        let here = (d.len(), d.sum());
        match shape {
            None => shape = Some(here),
            Some(s) if s == here => {}
            Some(s) => {
                return Err(Error::InconsistentDistribution(format!(
                    "degree law mixes shapes {s:?} and {here:?}"
                )));
            }
        }
    }
    Ok(degree_law.get(&b.degrees()) * configuration_probability(b))
}

// ===========================================================================
// Exhaustive enumeration
// ===========================================================================

/// Visit every word in `{0..n−1}^len` in lexicographic order.
fn for_each_word(n: usize, len: usize, mut f: impl FnMut(&[u32])) {
    let mut w = vec![0u32; len];
    'outer: loop {
        f(&w);
        let mut i = len;
        while i > 0 {
            i -= 1;
            w[i] += 1;
            if (w[i] as usize) < n {
                continue 'outer;
            }
            w[i] = 0;
        }
        return;
    }
}

fn word_budget(n: usize, len: usize, budget: u128) -> Result<()> {
    let count = (n as u128)
        .checked_pow(len as u32)
        .ok_or_else(|| Error::BudgetExceeded(format!("{n}^{len} overflows")))?;
    if count > budget {
        return Err(Error::BudgetExceeded(format!(
            "{n}^{len} = {count} states exceed the enumeration budget {budget}"
        )));
    }
    Ok(())
}

/// Probability of a word under the sequential urn products — the
/// enumeration route, independent of the Gamma closed form.
fn sequential_word_probability(n: usize, word: &[u32], kappa: f64) -> f64 {
    let mut counts = vec![0u64; n];
    let mut p = 1.0f64;
    for (l, &c) in word.iter().enumerate() {
        p *= (counts[c as usize] as f64 + kappa) / (l as f64 + n as f64 * kappa);
        counts[c as usize] += 1;
    }
    p
}

/// Exact law of the length-`2m` urn word over `n` colors, by exhaustive
/// enumeration with sequential products (no closed form involved).
pub fn polya_word_table(
    n: usize,
    m: usize,
    kappa: f64,
) -> Result<DistributionTable<UrnConfiguration>> {
    validate_strength(kappa)?;
    if n == 0 {
        return Err(Error::InvalidParameter("no colors".into()));
    }
    word_budget(n, 2 * m, WORD_ENUMERATION_BUDGET)?;
    let mut table = DistributionTable::new();
    for_each_word(n, 2 * m, |w| {
        let p = sequential_word_probability(n, w, kappa);
        table.add(
            UrnConfiguration::new(n, w.to_vec()).expect("enumerated words are valid"),
            p,
        );
    });
    table.validate_total(1e-12)?;
    Ok(table)
}

/// Exact preferential-attachment graph law: the word law pushed through
/// edge pairing.
pub fn exact_pag_distribution(
    n: usize,
    m: usize,
    kappa: f64,
) -> Result<DistributionTable<AdjacencyMatrix>> {
    let words = polya_word_table(n, m, kappa)?;
    Ok(words.map_keys(|w| w.urn_to_adjacency()))
}

/// Exact degree-sequence marginal of the preferential-attachment law:
/// compositions of `2m` into `n` parts, each weighted by its multinomial
/// coefficient times the exchangeable word probability.
pub fn polya_degree_marginal(
    n: usize,
    m: usize,
    kappa: f64,
) -> Result<DistributionTable<DegreeSequence>> {
    validate_strength(kappa)?;
    if n == 0 {
        return Err(Error::InvalidParameter("no colors".into()));
    }
    let two_m = 2 * m as u64;
    // C(2m + n − 1, n − 1) compositions.
    let ln_count = ln_gamma((two_m + n as u64) as f64)
        - ln_gamma(two_m as f64 + 1.0)
        - ln_gamma(n as f64);
    if ln_count > COMPOSITION_BUDGET.ln() {
        return Err(Error::BudgetExceeded(format!(
            "≈{:.3e} degree compositions exceed the budget {COMPOSITION_BUDGET:.0}",
            ln_count.exp()
        )));
    }

    let ln_fact_two_m = ln_gamma(two_m as f64 + 1.0);
    let mut table = DistributionTable::new();
    let mut parts = vec![0u64; n];
    fn recurse(
        parts: &mut Vec<u64>,
        at: usize,
        rem: u64,
        kappa: f64,
        ln_fact_total: f64,
        table: &mut DistributionTable<DegreeSequence>,
    ) -> Result<()> {
        if at + 1 == parts.len() {
            parts[at] = rem;
            let mut ln_multinomial = ln_fact_total;
            for &d in parts.iter() {
                ln_multinomial -= ln_gamma(d as f64 + 1.0);
            }
            let word_p = polya_word_probability_from_counts(parts, kappa)?;
            table.add(
                DegreeSequence::new(parts.clone()).expect("composition of an even total"),
                (ln_multinomial + word_p.ln()).exp(),
            );
            parts[at] = 0;
            return Ok(());
        }
        for d in 0..=rem {
            parts[at] = d;
            recurse(parts, at + 1, rem - d, kappa, ln_fact_total, table)?;
        }
        parts[at] = 0;
        Ok(())
    }
    recurse(&mut parts, 0, two_m, kappa, ln_fact_two_m, &mut table)?;
    table.validate_total(1e-12)?;
    Ok(table)
}

/// Exact configuration-model law for one degree sequence: enumerate the
/// distinct stub words with those color counts, all equally likely, and
/// pair them into graphs.
pub fn configuration_table(
    degrees: &DegreeSequence,
) -> Result<DistributionTable<AdjacencyMatrix>> {
    let n = degrees.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no vertices".into()));
    }
    let two_m = degrees.sum();
    // Distinct words: (2m)! / ∏ d_i!.
    let mut ln_words = ln_gamma(two_m as f64 + 1.0);
    for &d in degrees.as_slice() {
        ln_words -= ln_gamma(d as f64 + 1.0);
    }
    if ln_words > (WORD_ENUMERATION_BUDGET as f64).ln() {
        return Err(Error::BudgetExceeded(format!(
            "≈{:.3e} stub arrangements exceed the enumeration budget",
            ln_words.exp()
        )));
    }
    let per_word = (-ln_words).exp();

    let mut table = DistributionTable::new();
    let mut remaining: Vec<u64> = degrees.as_slice().to_vec();
    let mut word: Vec<u32> = Vec::with_capacity(two_m as usize);
    fn recurse(
        remaining: &mut Vec<u64>,
        word: &mut Vec<u32>,
        len: u64,
        per_word: f64,
        table: &mut DistributionTable<AdjacencyMatrix>,
    ) {
        if word.len() as u64 == len {
            let psi = UrnConfiguration::new(remaining.len(), word.clone())
                .expect("stub words have even length");
            table.add(psi.urn_to_adjacency(), per_word);
            return;
        }
        for c in 0..remaining.len() {
            if remaining[c] > 0 {
                remaining[c] -= 1;
                word.push(c as u32);
                recurse(remaining, word, len, per_word, table);
                word.pop();
                remaining[c] += 1;
            }
        }
    }
    recurse(&mut remaining, &mut word, two_m, per_word, &mut table);
    table.validate_total(1e-12)?;
    Ok(table)
}

/// All multigraphs on `n ≥ 1` vertices with exactly `m` edges (loops and
/// multi-edges included), in the canonical upper-triangle order.
pub fn enumerate_multigraphs(n: usize, m: u64) -> Result<Vec<AdjacencyMatrix>> {
    if n == 0 {
        return Err(Error::InvalidParameter("no vertices".into()));
    }
    let t = n * (n + 1) / 2;
    // C(m + T − 1, T − 1) multisets of m edges over T cells.
    let ln_count =
        ln_gamma((m + t as u64) as f64) - ln_gamma(m as f64 + 1.0) - ln_gamma(t as f64);
    if ln_count > (CHAIN_STATE_BUDGET as f64).ln() {
        return Err(Error::BudgetExceeded(format!(
            "≈{:.3e} multigraphs exceed the state budget {CHAIN_STATE_BUDGET}",
            ln_count.exp()
        )));
    }

    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let mut b = AdjacencyMatrix::zero(n);
    fn recurse(
        cells: &[(usize, usize)],
        at: usize,
        rem: u64,
        b: &mut AdjacencyMatrix,
        out: &mut Vec<AdjacencyMatrix>,
    ) {
        if at == cells.len() {
            if rem == 0 {
                out.push(b.clone());
            }
            return;
        }
        let (i, j) = cells[at];
        for w in 0..=rem {
            b.set(i, j, if i == j { 2 * w as u32 } else { w as u32 });
            recurse(cells, at + 1, rem - w, b, out);
        }
        b.set(i, j, 0);
    }
    recurse(&cells, 0, m, &mut b, &mut out);
    Ok(out)
}

// ===========================================================================
// Exact induced densities
// ===========================================================================

/// Exact induced homomorphism density `t(A, B) = |{φ: [k]→[n] with
/// B(φ(i), φ(j)) = A(i, j) for all i ≤ j}| / n^k`, by exhaustive
/// enumeration of all maps. Diagonal entries participate, so loop counts
/// must match too.
pub fn exact_homdensity(pattern: &AdjacencyMatrix, host: &AdjacencyMatrix) -> Result<f64> {
    let k = pattern.n();
    let n = host.n();
    if k == 0 {
        return Ok(1.0);
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "induced density into an empty host is undefined".into(),
        ));
    }
    word_budget(n, k, MAP_ENUMERATION_BUDGET)?;
    let mut matches = 0u64;
    for_each_word(n, k, |phi| {
        for i in 0..k {
            for j in i..k {
                if host.get(phi[i] as usize, phi[j] as usize) != pattern.get(i, j) {
                    return;
                }
            }
        }
        matches += 1;
    });
    Ok(matches as f64 / (n as f64).powi(k as i32))
}

/// Exact law of the pattern induced by an ordered uniform *injection*
/// `[k] → [n]`: every `k`-tuple of distinct vertices, each with
/// probability `1/(n)_k`.
pub fn exact_injection_pattern_table(
    host: &AdjacencyMatrix,
    k: usize,
) -> Result<DistributionTable<AdjacencyMatrix>> {
    let n = host.n();
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "no injections of {k} vertices into {n}"
        )));
    }
    let mut falling = 1u128;
    for i in 0..k {
        falling *= (n - i) as u128;
        if falling > WORD_ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "({n})_{k} injections exceed the enumeration budget"
            )));
        }
    }
    let per_map = 1.0 / falling as f64;

    let mut table = DistributionTable::new();
    let mut phi: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn recurse(
        host: &AdjacencyMatrix,
        k: usize,
        phi: &mut Vec<usize>,
        used: &mut Vec<bool>,
        per_map: f64,
        table: &mut DistributionTable<AdjacencyMatrix>,
    ) {
        if phi.len() == k {
            let mut a = AdjacencyMatrix::zero(k);
            for i in 0..k {
                for j in i..k {
                    a.set(i, j, host.get(phi[i], phi[j]));
                }
            }
            table.add(a, per_map);
            return;
        }
        for v in 0..host.n() {
            if !used[v] {
                used[v] = true;
                phi.push(v);
                recurse(host, k, phi, used, per_map, table);
                phi.pop();
                used[v] = false;
            }
        }
    }
    recurse(host, k, &mut phi, &mut used, per_map, &mut table);
    if k > 0 {
        table.validate_total(1e-12)?;
    }
    Ok(table)
}

// ===========================================================================
// Stationary solves
// ===========================================================================

/// Solve `π = πP` for an explicitly listed row-stochastic kernel given as
/// sparse rows. Dense LU up to [`DENSE_SOLVE_LIMIT`] states; power
/// iteration beyond. Kernels must be row-stochastic within `1e−12`.
fn solve_stationary(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>> {
    let s = rows.len();
    if s == 0 {
        return Err(Error::InvalidParameter("empty state space".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        let total = neumaier_sum(row.iter().map(|&(_, p)| p));
        if (total - 1.0).abs() > KERNEL_ROW_TOL {
            return Err(Error::InconsistentDistribution(format!(
                "kernel row {i} sums to {total}"
            )));
        }
    }

    let pi = if s <= DENSE_SOLVE_LIMIT {
        // (Pᵀ − I)π = 0 with the last balance equation replaced by Σπ = 1.
        let mut a = DMatrix::<f64>::zeros(s, s);
        for (from, row) in rows.iter().enumerate() {
            for &(to, p) in row {
                a[(to, from)] += p;
            }
        }
        for i in 0..s {
            a[(i, i)] -= 1.0;
        }
        for j in 0..s {
            a[(s - 1, j)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(s);
        rhs[s - 1] = 1.0;
        a.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolveFailed("singular balance system".into()))?
            .iter()
            .copied()
            .collect::<Vec<f64>>()
    } else {
        let mut pi = vec![1.0 / s as f64; s];
        let mut next = vec![0.0f64; s];
        let mut converged = false;
        for _ in 0..1_000_000u32 {
            next.iter_mut().for_each(|x| *x = 0.0);
            for (from, row) in rows.iter().enumerate() {
                for &(to, p) in row {
                    next[to] += pi[from] * p;
                }
            }
            let l1: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut pi, &mut next);
            if l1 < POWER_ITERATION_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::SolveFailed(
                "power iteration did not converge".into(),
            ));
        }
        pi
    };

    if pi.iter().any(|&p| !p.is_finite() || p <= -1e-9) {
        return Err(Error::SolveFailed(
            "stationary solve produced negative or non-finite mass".into(),
        ));
    }
    let mut pi: Vec<f64> = pi.into_iter().map(|p| p.max(0.0)).collect();
    let total = neumaier_sum(pi.iter().copied());
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(pi)
}

/// Exact stationary distribution of the ball-replacement chain on
/// `{1..n}^{2m}`, by building its full transition kernel and solving the
/// balance equations.
pub fn ball_replacement_stationary(
    n: usize,
    m: usize,
    kappa: f64,
) -> Result<DistributionTable<UrnConfiguration>> {
    validate_strength(kappa)?;
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "the chain needs at least one color and one edge".into(),
        ));
    }
    let len = 2 * m;
    word_budget(n, len, CHAIN_STATE_BUDGET)?;

    // Enumerate states.
    let mut states: Vec<Vec<u32>> = Vec::new();
    for_each_word(n, len, |w| states.push(w.to_vec()));
    let index: BTreeMap<&[u32], usize> =
        states.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();

    // Kernel: uniform position ξ, color resampled with probability
    // (d(Ψ, c) + κ) / (2m + nκ) where d counts the current word, ξ
    // included.
    let denom = len as f64 + n as f64 * kappa;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(states.len());
    let mut scratch = vec![0u32; len];
    for w in &states {
        let mut counts = vec![0u64; n];
        for &c in w {
            counts[c as usize] += 1;
        }
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        for pos in 0..len {
            for (c, &count) in counts.iter().enumerate() {
                let p = (1.0 / len as f64) * (count as f64 + kappa) / denom;
                scratch.copy_from_slice(w);
                scratch[pos] = c as u32;
                let to = index[scratch.as_slice()];
                *row.entry(to).or_insert(0.0) += p;
            }
        }
        rows.push(row.into_iter().collect());
    }

    let pi = solve_stationary(&rows)?;
    let mut table = DistributionTable::new();
    for (w, p) in states.into_iter().zip(pi) {
        table.add(
            UrnConfiguration::new(n, w).expect("enumerated words are valid"),
            p,
        );
    }
    Ok(table)
}

/// Exact stationary distribution of the edge-reconnecting chain on the
/// multigraphs with `n` vertices and `m` edges, under either degree
/// convention, by building its full transition kernel and solving the
/// balance equations.
pub fn edge_reconnect_stationary(
    n: usize,
    m: u64,
    kappa: f64,
    convention: DegreeConvention,
) -> Result<DistributionTable<AdjacencyMatrix>> {
    validate_strength(kappa)?;
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "the chain needs at least one vertex and one edge".into(),
        ));
    }
    let states = enumerate_multigraphs(n, m)?;
    let index: BTreeMap<&AdjacencyMatrix, usize> =
        states.iter().enumerate().map(|(i, b)| (b, i)).collect();

    let two_m = 2 * m;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(states.len());
    for b in &states {
        let degrees = b.degrees();
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        for i in 0..n {
            for j in i..n {
                let weight = if i == j {
                    b.get(i, i) as u64 / 2
                } else {
                    b.get(i, j) as u64
                };
                if weight == 0 {
                    continue;
                }
                let p_edge = weight as f64 / m as f64;
                for (kept, moved) in [(i, j), (j, i)] {
                    for target in 0..n {
                        let p_target = match convention {
                            DegreeConvention::BeforeDetachment => {
                                (degrees.as_slice()[target] as f64 + kappa)
                                    / (two_m as f64 + n as f64 * kappa)
                            }
                            DegreeConvention::AfterDetachment => {
                                let d = degrees.as_slice()[target]
                                    - u64::from(target == moved);
                                (d as f64 + kappa)
                                    / (two_m as f64 - 1.0 + n as f64 * kappa)
                            }
                        };
                        let mut next = b.clone();
                        next.remove_edge(i, j);
                        next.add_edge(kept, target);
                        let to = index[&next];
                        *row.entry(to).or_insert(0.0) += p_edge * 0.5 * p_target;
                    }
                }
            }
        }
        rows.push(row.into_iter().collect());
    }

    let pi = solve_stationary(&rows)?;
    let mut table = DistributionTable::new();
    for (b, p) in states.into_iter().zip(pi) {
        table.add(b, p);
    }
    Ok(table)
}

// ===========================================================================
// Tests
// ===========================================================================
