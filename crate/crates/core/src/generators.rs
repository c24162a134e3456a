//! Random multigraph generators and the Markov chains that preserve their
//! laws.
//!
//! Everything here draws from a caller-supplied RNG; [`RngStream`] wraps
//! the seeding discipline (one master seed, numbered independent
//! substreams) so that every experiment is reproducible bit-for-bit and
//! replicas can run in parallel without sharing generator state.
//!
//! The samplers:
//!
//! * [`configuration_model`] — uniform stub pairing of a fixed degree
//!   sequence.
//! * [`polya_urn`] / [`pag`] — the sequential Pólya urn with strength `κ`
//!   per color, and the multigraph it induces by pairing consecutive
//!   balls (preferential attachment with loops and multi-edges kept).
//! * [`w_random`] — the `W`-random multigraph of an evaluable kernel.
//!
//! The chains:
//!
//! * [`ball_replacement_step`] — pick a uniform ball, resample its color
//!   from the urn law of the current word.
//! * [`edge_reconnect_step`] — pick a uniform edge and a fair-coin stub,
//!   reattach that stub to a vertex drawn preferentially.
//!
//! Both chains hold their respective stationary laws (the urn word law
//! and the induced multigraph law) invariant; the exact-distribution
//! oracles verify this on small state spaces.
//!
//! Every preferential draw `P(v) ∝ d(v) + κ` is realized by the same O(1)
//! two-part mixture: with probability `Σd / (Σd + nκ)` copy the color of
//! a uniformly chosen existing stub, otherwise pick a uniform color. No
//! weighted index structure is needed at any `n`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{AdjacencyMatrix, DegreeSequence, UrnConfiguration};
use crate::multigraphon::Multigraphon;
use crate::{Error, Result};

// ===========================================================================
// Seeding
// ===========================================================================

/// Master seed plus numbered independent substreams.
///
/// Substream `i` is the ChaCha8 stream `i` of the master seed: replicas
/// get `substream(0), substream(1), …` and may run in any order or in
/// parallel with identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The default stream (substream 0).
    pub fn rng(&self) -> ChaCha8Rng {
        self.substream(0)
    }

    /// Independent stream `id` under the same master seed.
    pub fn substream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

// ===========================================================================
// Preferential draws
// ===========================================================================

fn validate_strength(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "urn strength must be finite and positive, got {kappa}"
        )));
    }
    Ok(())
}

/// Draw the next color of a Pólya urn over `n` colors with strength `κ`:
/// `P(c) = (d(word, c) + κ) / (|word| + nκ)`, via the uniform-stub /
/// uniform-color mixture.
#[inline]
fn polya_next(n: usize, word: &[u32], kappa: f64, rng: &mut impl Rng) -> u32 {
    let len = word.len() as f64;
    let total = len + n as f64 * kappa;
    if !word.is_empty() && rng.random::<f64>() * total < len {
        word[rng.random_range(0..word.len())]
    } else {
        rng.random_range(0..n as u32)
    }
}

/// Draw a vertex with `P(v) = (d_v + κ) / (Σd + nκ)` from an explicit
/// degree table, via the same mixture (uniform stub with probability
/// `Σd / (Σd + nκ)`, else uniform vertex).
fn polya_target(degrees: &[u64], total_stubs: u64, kappa: f64, rng: &mut impl Rng) -> usize {
    debug_assert_eq!(degrees.iter().sum::<u64>(), total_stubs);
    let n = degrees.len();
    let total = total_stubs as f64 + n as f64 * kappa;
    if total_stubs > 0 && rng.random::<f64>() * total < total_stubs as f64 {
        let mut t = rng.random_range(0..total_stubs);
        for (v, &d) in degrees.iter().enumerate() {
            if t < d {
                return v;
            }
            t -= d;
        }
        unreachable!("stub index exceeds total degree");
    } else {
        rng.random_range(0..n)
    }
}

// ===========================================================================
// Samplers
// ===========================================================================

/// Uniform configuration-model multigraph: shuffle the stub word of the
/// degree sequence and pair consecutive stubs. Loops and multi-edges are
/// kept; the result has exactly the prescribed degrees.
pub fn configuration_model(degrees: &DegreeSequence, rng: &mut impl Rng) -> AdjacencyMatrix {
    let mut word = degrees.stub_word();
    word.shuffle(rng);
    UrnConfiguration::new(degrees.len(), word)
        .expect("stub word of an even-total degree sequence is a valid urn word")
        .urn_to_adjacency()
}

/// Sequential Pólya urn word: `length` balls over `n` colors, each drawn
/// with probability proportional to its current count plus `κ`.
///
/// Errors unless `n ≥ 1`, `κ > 0`, and `length` is even (words pair into
/// edges).
pub fn polya_urn(n: usize, length: usize, kappa: f64, rng: &mut impl Rng) -> Result<UrnConfiguration> {
    validate_strength(kappa)?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "urn needs at least one color".into(),
        ));
    }
    if !length.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "urn word length must be even, got {length}"
        )));
    }
    let mut word: Vec<u32> = Vec::with_capacity(length);
    for _ in 0..length {
        let c = polya_next(n, &word, kappa, rng);
        word.push(c);
    }
    UrnConfiguration::new(n, word)
}

/// Preferential-attachment multigraph on `n` vertices with `m` edges:
/// draw a Pólya urn word of length `2m` and pair consecutive balls.
pub fn pag(n: usize, m: usize, kappa: f64, rng: &mut impl Rng) -> Result<AdjacencyMatrix> {
    let word = polya_urn(n, 2 * m, kappa, rng)?;
    Ok(word.urn_to_adjacency())
}

/// `W`-random multigraph of order `k`: latent positions `U_1..U_k` are
/// i.i.d. uniform, entry `(i, j)` is drawn from the multiplicity law
/// `W(U_i, U_j, ·)` independently for `i ≤ j` (diagonal entries from the
/// even diagonal law). Returns the graph together with the latent
/// positions.
pub fn w_random(
    w: &dyn Multigraphon,
    k: usize,
    rng: &mut impl Rng,
) -> (AdjacencyMatrix, Vec<f64>) {
    let us: Vec<f64> = (0..k).map(|_| rng.random()).collect();
    let mut b = AdjacencyMatrix::zero(k);
    for i in 0..k {
        for j in i..k {
            let c = w.entry_sample(us[i], us[j], rng);
            b.set(i, j, c);
        }
    }
    (b, us)
}

// ===========================================================================
// Ball replacement chain
// ===========================================================================

/// One ball-replacement move: choose a uniform position `ξ` of the word
/// and resample its color with probability `(d(Ψ, c) + κ) / (2m + nκ)`,
/// where `d` counts the *current* word, position `ξ` included.
///
/// Errors on an invalid strength or an empty word (no position to pick).
pub fn ball_replacement_step(
    psi: &UrnConfiguration,
    kappa: f64,
    rng: &mut impl Rng,
) -> Result<UrnConfiguration> {
    let mut next = psi.clone();
    ball_replacement_step_in_place(&mut next, kappa, rng)?;
    Ok(next)
}

/// In-place variant of [`ball_replacement_step`] for long runs.
pub fn ball_replacement_step_in_place(
    psi: &mut UrnConfiguration,
    kappa: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    validate_strength(kappa)?;
    if psi.is_empty() {
        return Err(Error::InvalidParameter(
            "ball replacement needs a nonempty word".into(),
        ));
    }
    let pos = rng.random_range(0..psi.len());
    let new_color = polya_next(psi.n(), psi.word(), kappa, rng);
    psi.word_mut()[pos] = new_color;
    Ok(())
}

// ===========================================================================
// Edge reconnecting chain
// ===========================================================================

/// Which degree table the reconnect target is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeConvention {
    /// Target `w` with probability `(d(B, w) + κ) / (2m + nκ)`, degrees of
    /// the graph *before* the chosen stub is detached. The default; holds
    /// the preferential-attachment law exactly invariant.
    #[default]
    BeforeDetachment,
    /// Target `w` with probability `(d'(w) + κ) / (2m − 1 + nκ)`, where
    /// `d'` counts the intermediate graph with the chosen stub detached.
    /// A different kernel with the same stationary law: this variant is
    /// the exact conditional resampling of one uniform stub given the
    /// other `2m − 1`, so it too preserves the attachment law.
    AfterDetachment,
}

/// One edge-reconnecting move with the default
/// [`DegreeConvention::BeforeDetachment`].
pub fn edge_reconnect_step(
    b: &AdjacencyMatrix,
    kappa: f64,
    rng: &mut impl Rng,
) -> Result<AdjacencyMatrix> {
    edge_reconnect_step_with(b, kappa, DegreeConvention::BeforeDetachment, rng)
}

/// One edge-reconnecting move: choose a uniform edge (loops have weight
/// `B(i,i)/2`, non-loops `B(i,j)`), keep one endpoint by a fair coin,
/// and reattach the other stub to a preferentially drawn vertex.
pub fn edge_reconnect_step_with(
    b: &AdjacencyMatrix,
    kappa: f64,
    convention: DegreeConvention,
    rng: &mut impl Rng,
) -> Result<AdjacencyMatrix> {
    let mut next = b.clone();
    edge_reconnect_step_in_place(&mut next, kappa, convention, rng)?;
    Ok(next)
}

/// In-place variant of [`edge_reconnect_step_with`] for long runs.
pub fn edge_reconnect_step_in_place(
    b: &mut AdjacencyMatrix,
    kappa: f64,
    convention: DegreeConvention,
    rng: &mut impl Rng,
) -> Result<()> {
    validate_strength(kappa)?;
    let n = b.n();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "edge reconnection needs at least one vertex".into(),
        ));
    }
    let (m, _) = b.edge_counts();
    if m == 0 {
        return Err(Error::InvalidParameter(
            "edge reconnection needs at least one edge".into(),
        ));
    }

    // Uniform edge.
    let (i, j) = pick_uniform_edge(b, m, rng);
    // Fair coin: which endpoint keeps the edge.
    let (kept, moved) = if rng.random::<bool>() { (i, j) } else { (j, i) };

    let target = match convention {
        DegreeConvention::BeforeDetachment => {
            let degrees = b.degrees();
            polya_target(degrees.as_slice(), 2 * m, kappa, rng)
        }
        DegreeConvention::AfterDetachment => {
            let mut degrees = b.degrees().as_slice().to_vec();
            degrees[moved] -= 1;
            polya_target(&degrees, 2 * m - 1, kappa, rng)
        }
    };
    b.remove_edge(i, j);
    b.add_edge(kept, target);
    debug_assert!(b.is_valid());
    debug_assert_eq!(b.edge_counts().0, m);
    Ok(())
}

/// Pick edge number `e ∈ {0..m−1}` in the upper-triangle order, weighting
/// loops by `B(i,i)/2` and non-loops by `B(i,j)`.
fn pick_uniform_edge(b: &AdjacencyMatrix, m: u64, rng: &mut impl Rng) -> (usize, usize) {
    let mut e = rng.random_range(0..m);
    for i in 0..b.n() {
        for j in i..b.n() {
            let weight = if i == j {
                b.get(i, i) as u64 / 2
            } else {
                b.get(i, j) as u64
            };
            if e < weight {
                return (i, j);
            }
            e -= weight;
        }
    }
    unreachable!("edge index exceeds edge count");
}

// ===========================================================================
// Tests
// ===========================================================================
