//! Core value types for labeled multigraphs and urn words.
//!
//! A multigraph on `n` vertices is stored as a symmetric count matrix `B`
//! with `B[i][j]` = number of parallel edges between `i` and `j` for
//! `i ≠ j`, and `B[i][i]` = *twice* the number of loops at `i`, so that the
//! degree `d(B,i)` (number of stubs at `i`, loops counting twice) is always
//! the plain row sum. Storage is the dense upper triangle — in the dense
//! regime `m ≈ ρn²/2` a sparse representation buys nothing — which makes
//! symmetry structural rather than checked.
//!
//! An [`UrnConfiguration`] is a word `ψ ∈ [n]^{2m}` of ball colors; mapping
//! consecutive pairs `(ψ(2e−1), ψ(2e))` to edges is the bridge between urn
//! processes and multigraphs ([`UrnConfiguration::urn_to_adjacency`]).
//!
//! Vertex/color indices are 1-based in text I/O and documentation, 0-based
//! in every API; conversion happens only at the I/O boundary.

use crate::{Error, Result};

// ===========================================================================
// AdjacencyMatrix
// ===========================================================================

/// Labeled multigraph as a symmetric count matrix with even diagonal.
///
/// Invariants (checked in debug builds after mutating operations, and by
/// validating constructors):
/// * `counts[i][j] == counts[j][i]` — structural, via triangular storage;
/// * `counts[i][i]` is even (it counts loop *stubs*);
/// * consequently `m(B) = ½·Σ_{ij} counts[i][j]` is an integer.
///
/// The derived order is lexicographic on `(n, upper triangle)`, which is the
/// enumeration order used for deterministic tables and golden files.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdjacencyMatrix {
    n: usize,
    /// Upper triangle, row-major: entry `(i, j)` with `i ≤ j` lives at
    /// `i·n − i(i−1)/2 + (j − i)`.
    tri: Vec<u32>,
}

impl AdjacencyMatrix {
    /// The empty multigraph on `n` vertices.
    pub fn zero(n: usize) -> Self {
        AdjacencyMatrix {
            n,
            tri: vec![0; n * (n + 1) / 2],
        }
    }

    /// Build from full rows. With `validate` set, checks squareness,
    /// symmetry, and diagonal evenness in O(n²); without it only the shape
    /// is checked, for hot paths that construct known-good data.
    pub fn from_rows(rows: &[Vec<u32>], validate: bool) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGraph(format!(
                    "row {} has length {}, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
        }
        if validate {
            for (i, row) in rows.iter().enumerate() {
                if !row[i].is_multiple_of(2) {
                    return Err(Error::InvalidGraph(format!(
                        "odd diagonal entry {} at vertex {}",
                        row[i],
                        i + 1
                    )));
                }
                for j in (i + 1)..n {
                    if row[j] != rows[j][i] {
                        return Err(Error::InvalidGraph(format!(
                            "asymmetric entries at ({}, {}): {} vs {}",
                            i + 1,
                            j + 1,
                            row[j],
                            rows[j][i]
                        )));
                    }
                }
            }
        }
        let mut b = AdjacencyMatrix::zero(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &count) in row.iter().enumerate().skip(i) {
                let slot = b.idx(i, j);
                b.tri[slot] = count;
            }
        }
        Ok(b)
    }

    /// Build from an upper triangle in row-major order
    /// (`(0,0), (0,1), …, (0,n−1), (1,1), …`). Always checks length and
    /// diagonal evenness — both are O(n) or cheaper.
    pub fn from_upper_triangle(n: usize, tri: Vec<u32>) -> Result<Self> {
        if tri.len() != n * (n + 1) / 2 {
            return Err(Error::InvalidGraph(format!(
                "upper triangle for n={} needs {} entries, got {}",
                n,
                n * (n + 1) / 2,
                tri.len()
            )));
        }
        let b = AdjacencyMatrix { n, tri };
        for i in 0..n {
            if !b.get(i, i).is_multiple_of(2) {
                return Err(Error::InvalidGraph(format!(
                    "odd diagonal entry {} at vertex {}",
                    b.get(i, i),
                    i + 1
                )));
            }
        }
        Ok(b)
    }

    #[inline(always)]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        // Row r holds n − r entries, so row i starts at Σ_{r<i}(n − r)
        // = i(2n − i + 1)/2; no subtraction can underflow since i ≤ n.
        i * (2 * self.n - i + 1) / 2 + (j - i)
    }

    /// Number of vertices.
    #[inline(always)]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Upper triangle in enumeration order (row-major, `i ≤ j`).
    pub fn upper_triangle(&self) -> &[u32] {
        &self.tri
    }

    /// Count for the vertex pair `(i, j)` (symmetric; the diagonal holds the
    /// doubled loop count). Panics if an index is out of range.
    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        assert!(i < self.n && j < self.n, "vertex index out of range");
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.tri[self.idx(a, b)]
    }

    /// Set the count for `(i, j)` and `(j, i)`. Panics on out-of-range
    /// indices or an odd diagonal value.
    pub fn set(&mut self, i: usize, j: usize, c: u32) {
        assert!(i < self.n && j < self.n, "vertex index out of range");
        assert!(i != j || c.is_multiple_of(2), "diagonal entries must be even");
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let at = self.idx(a, b);
        self.tri[at] = c;
    }

    /// Add one edge between `i` and `j` (a loop if `i == j`, contributing 2
    /// to the diagonal).
    #[inline(always)]
    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i < self.n && j < self.n, "vertex index out of range");
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let at = self.idx(a, b);
        self.tri[at] += if i == j { 2 } else { 1 };
    }

    /// Remove one edge between `i` and `j`. Panics if no such edge exists.
    pub fn remove_edge(&mut self, i: usize, j: usize) {
        assert!(i < self.n && j < self.n, "vertex index out of range");
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let at = self.idx(a, b);
        let dec = if i == j { 2 } else { 1 };
        assert!(self.tri[at] >= dec, "removing an absent edge");
        self.tri[at] -= dec;
    }

    /// Degree `d(B,i)`: the number of stubs at `i` (row sum; loops count
    /// twice because the diagonal stores doubled loop counts). Panics if
    /// `i` is out of range.
    pub fn degree(&self, i: usize) -> u64 {
        assert!(i < self.n, "vertex index out of range");
        (0..self.n).map(|j| self.get(i, j) as u64).sum()
    }

    /// All degrees. The sum is `2m`, hence always even.
    pub fn degrees(&self) -> DegreeSequence {
        let d: Vec<u64> = (0..self.n).map(|i| self.degree(i)).collect();
        DegreeSequence::new(d).expect("row sums of a valid matrix have even total")
    }

    /// `(m, m′)`: total edge count `m = ½·Σ_{ij} counts[i][j]` and non-loop
    /// edge count `m′ = Σ_{i<j} counts[i][j]`.
    pub fn edge_counts(&self) -> (u64, u64) {
        let mut twice_m = 0u64;
        let mut non_loop = 0u64;
        for i in 0..self.n {
            twice_m += self.get(i, i) as u64;
            for j in (i + 1)..self.n {
                let c = self.get(i, j) as u64;
                twice_m += 2 * c;
                non_loop += c;
            }
        }
        debug_assert!(twice_m.is_multiple_of(2));
        (twice_m / 2, non_loop)
    }

    /// Relabeled copy: `result[i][j] = counts[τ(i)][τ(j)]`. Errors unless
    /// `tau` is a permutation of `0..n`.
    pub fn relabel(&self, tau: &[usize]) -> Result<Self> {
        if tau.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "permutation length {} does not match n={}",
                tau.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &t in tau {
            if t >= self.n || seen[t] {
                return Err(Error::InvalidParameter(
                    "not a permutation of the vertex set".into(),
                ));
            }
            seen[t] = true;
        }
        let mut out = AdjacencyMatrix::zero(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let at = out.idx(i, j);
                out.tri[at] = self.get(tau[i], tau[j]);
            }
        }
        debug_assert!(out.is_valid());
        Ok(out)
    }

    /// Top-left `k×k` block. Errors if `k > n`.
    pub fn principal_submatrix(&self, k: usize) -> Result<Self> {
        if k > self.n {
            return Err(Error::InvalidParameter(format!(
                "submatrix size {} exceeds n={}",
                k, self.n
            )));
        }
        let mut out = AdjacencyMatrix::zero(k);
        for i in 0..k {
            for j in i..k {
                let at = out.idx(i, j);
                out.tri[at] = self.get(i, j);
            }
        }
        debug_assert!(out.is_valid());
        Ok(out)
    }

    /// Structural invariant check (diagonal evenness; symmetry holds by
    /// construction). Mutating operations `debug_assert!` this.
    pub fn is_valid(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i).is_multiple_of(2))
    }

    // -----------------------------------------------------------------------
    // Edge-list text format
    // -----------------------------------------------------------------------

    /// Render the bit-exact edge-list format: first line `"n m"`, then one
    /// line `"i j c"` per present vertex pair with `i < j` (1-based), or
    /// `"i i c"` for `c` loop edges at `i` (the stored diagonal is `2c`).
    /// Lines are sorted lexicographically as byte strings; LF endings,
    /// trailing newline included.
    pub fn to_edge_list(&self) -> String {
        let (m, _) = self.edge_counts();
        let mut lines: Vec<String> = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                let c = self.get(i, j);
                if c == 0 {
                    continue;
                }
                let edges = if i == j { c / 2 } else { c };
                lines.push(format!("{} {} {}", i + 1, j + 1, edges));
            }
        }
        lines.sort();
        let mut out = format!("{} {}\n", self.n, m);
        for line in &lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    /// Parse the edge-list format produced by [`Self::to_edge_list`]. The
    /// parse is strict: 1-based indices in range, `i ≤ j`, positive counts,
    /// no duplicate pairs, and the header edge count must match the body.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge-list input".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing vertex count in header".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad vertex count: {e}")))?;
        let m: u64 = it
            .next()
            .ok_or_else(|| Error::Parse("missing edge count in header".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad edge count: {e}")))?;
        if it.next().is_some() {
            return Err(Error::Parse("trailing tokens in header".into()));
        }

        let mut b = AdjacencyMatrix::zero(n);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut next_num = |what: &str| -> Result<u64> {
                it.next()
                    .ok_or_else(|| {
                        Error::Parse(format!("line {}: missing {what}", lineno + 2))
                    })?
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: bad {what}: {e}", lineno + 2)))
            };
            let i = next_num("first endpoint")? as usize;
            let j = next_num("second endpoint")? as usize;
            let c = next_num("edge count")?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 2)));
            }
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::Parse(format!(
                    "line {}: endpoint out of range 1..{}",
                    lineno + 2,
                    n
                )));
            }
            if i > j {
                return Err(Error::Parse(format!(
                    "line {}: endpoints must satisfy i ≤ j",
                    lineno + 2
                )));
            }
            if c == 0 {
                return Err(Error::Parse(format!(
                    "line {}: zero-count line not allowed",
                    lineno + 2
                )));
            }
            let (i0, j0) = (i - 1, j - 1);
            if b.get(i0, j0) != 0 {
                return Err(Error::Parse(format!(
                    "line {}: duplicate pair ({i}, {j})",
                    lineno + 2
                )));
            }
            let stored = if i0 == j0 { 2 * c } else { c };
            let stored: u32 = stored
                .try_into()
                .map_err(|_| Error::Parse(format!("line {}: count too large", lineno + 2)))?;
            b.set(i0, j0, stored);
        }
        let (parsed_m, _) = b.edge_counts();
        if parsed_m != m {
            return Err(Error::Parse(format!(
                "header declares m={m} but edges sum to {parsed_m}"
            )));
        }
        Ok(b)
    }
}

// ===========================================================================
// UrnConfiguration
// ===========================================================================

/// Word `ψ ∈ [n]^{2m}` of ball colors; positions pair up into edges.
///
/// Colors are 0-based internally (`0..n`); the canonical text rendering is
/// 1-based. The derived order is lexicographic on `(n, word)` — the word
/// enumeration order used by exact tables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UrnConfiguration {
    n: usize,
    word: Vec<u32>,
}

impl UrnConfiguration {
    /// Build from a 0-based color word. Errors on odd length or a color
    /// outside `0..n`.
    pub fn new(n: usize, word: Vec<u32>) -> Result<Self> {
        if !word.len().is_multiple_of(2) {
            return Err(Error::InvalidGraph(format!(
                "urn word must have even length, got {}",
                word.len()
            )));
        }
        if let Some(&c) = word.iter().find(|&&c| c as usize >= n) {
            return Err(Error::InvalidGraph(format!(
                "color {} outside 1..{}",
                c + 1,
                n
            )));
        }
        Ok(UrnConfiguration { n, word })
    }

    /// Number of colors.
    #[inline(always)]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Word length `2m`.
    #[inline(always)]
    pub fn len(&self) -> usize {
        self.word.len()
    }

    /// True when the word is empty (`m = 0`).
    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// The 0-based color word.
    #[inline(always)]
    pub fn word(&self) -> &[u32] {
        &self.word
    }

    /// Mutable access for in-place chain steps; callers must keep colors in
    /// range (debug-checked by the chain operations).
    pub(crate) fn word_mut(&mut self) -> &mut [u32] {
        &mut self.word
    }

    /// Color multiplicities `d(ψ, i)` for every color.
    pub fn color_counts(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n];
        for &c in &self.word {
            d[c as usize] += 1;
        }
        d
    }

    /// Color multiplicities as a [`DegreeSequence`] (their sum `2m` is even).
    pub fn degrees(&self) -> DegreeSequence {
        DegreeSequence::new(self.color_counts()).expect("word length is even")
    }

    /// The multigraph with one edge per consecutive pair
    /// `(ψ(2e−1), ψ(2e))`, `e = 1..m`; loops contribute 2 to the diagonal.
    /// Degrees of the result equal the color multiplicities exactly.
    pub fn urn_to_adjacency(&self) -> AdjacencyMatrix {
        let mut b = AdjacencyMatrix::zero(self.n);
        for pair in self.word.chunks_exact(2) {
            b.add_edge(pair[0] as usize, pair[1] as usize);
        }
        debug_assert!(b.is_valid());
        b
    }

    /// Canonical text form: 1-based colors, space-separated.
    pub fn canonical_string(&self) -> String {
        self.word
            .iter()
            .map(|c| (c + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parse the canonical 1-based text form.
    pub fn from_canonical_string(n: usize, text: &str) -> Result<Self> {
        let mut word = Vec::new();
        for tok in text.split_whitespace() {
            let c: u32 = tok
                .parse()
                .map_err(|e| Error::Parse(format!("bad color token {tok:?}: {e}")))?;
            if c == 0 || c as usize > n {
                return Err(Error::Parse(format!("color {c} outside 1..{n}")));
            }
            word.push(c - 1);
        }
        UrnConfiguration::new(n, word)
    }
}

// ===========================================================================
// DegreeSequence
// ===========================================================================

/// Nonnegative degrees with even total (every graph has `Σd_i = 2m`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeSequence(Vec<u64>);

impl DegreeSequence {
    /// Errors if the total is odd — such a sequence bounds no multigraph.
    pub fn new(degrees: Vec<u64>) -> Result<Self> {
        let sum: u64 = degrees.iter().sum();
        if !sum.is_multiple_of(2) {
            return Err(Error::InvalidGraph(format!(
                "degree sum {sum} is odd"
            )));
        }
        Ok(DegreeSequence(degrees))
    }

    /// Number of vertices/colors.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True for the empty sequence.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total `2m`.
    pub fn sum(&self) -> u64 {
        self.0.iter().sum()
    }

    /// The degrees themselves.
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// The stub word `(0 repeated d_0, 1 repeated d_1, …)` — the unshuffled
    /// input of the configuration model.
    pub fn stub_word(&self) -> Vec<u32> {
        let mut w = Vec::with_capacity(self.sum() as usize);
        for (i, &d) in self.0.iter().enumerate() {
            for _ in 0..d {
                w.push(i as u32);
            }
        }
        w
    }
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[u32]]) -> AdjacencyMatrix {
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
        AdjacencyMatrix::from_rows(&rows, true).unwrap()
    }

    #[test]
    fn degree_is_row_sum() {
        let b = mat(&[&[2, 1], &[1, 0]]);
        assert_eq!(b.degree(0), 3);
        assert_eq!(b.degree(1), 1);
        let z = AdjacencyMatrix::zero(1);
        assert_eq!(z.degree(0), 0);
        let loops = mat(&[&[2, 0], &[0, 2]]);
        assert_eq!(loops.degree(1), 2);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn degree_index_out_of_range_panics() {
        mat(&[&[0]]).degree(1);
    }

    #[test]
    fn edge_counts_split_loops_from_non_loops() {
        assert_eq!(mat(&[&[2, 1], &[1, 0]]).edge_counts(), (2, 1));
        assert_eq!(AdjacencyMatrix::zero(3).edge_counts(), (0, 0));
        assert_eq!(mat(&[&[0, 3], &[3, 0]]).edge_counts(), (3, 3));
    }

    #[test]
    fn from_rows_validation_catches_bad_input() {
        assert!(AdjacencyMatrix::from_rows(&[vec![1]], true).is_err()); // odd diagonal
        assert!(AdjacencyMatrix::from_rows(&[vec![0, 1], vec![2, 0]], true).is_err()); // asymmetric
        assert!(AdjacencyMatrix::from_rows(&[vec![0, 1]], true).is_err()); // not square
        // The same asymmetric input passes with validation off (upper wins).
        let b = AdjacencyMatrix::from_rows(&[vec![0, 1], vec![2, 0]], false).unwrap();
        assert_eq!(b.get(1, 0), 1);
    }

    #[test]
    fn urn_to_adjacency_examples() {
        let psi = UrnConfiguration::new(1, vec![0, 0]).unwrap();
        assert_eq!(psi.urn_to_adjacency(), mat(&[&[2]]));

        let psi = UrnConfiguration::new(2, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(psi.urn_to_adjacency(), mat(&[&[0, 2], &[2, 0]]));

        let psi = UrnConfiguration::new(3, vec![0, 1, 2, 2]).unwrap();
        let b = psi.urn_to_adjacency();
        assert_eq!(b.get(0, 1), 1);
        assert_eq!(b.get(2, 2), 2);
        assert_eq!(b.edge_counts(), (2, 1));
    }

    #[test]
    fn urn_word_must_have_even_length_and_valid_colors() {
        assert!(UrnConfiguration::new(2, vec![0]).is_err());
        assert!(UrnConfiguration::new(2, vec![0, 2]).is_err());
    }

    #[test]
    fn relabel_examples() {
        let b = mat(&[&[2, 1], &[1, 0]]);
        let id = b.relabel(&[0, 1]).unwrap();
        assert_eq!(id, b);
        let swapped = b.relabel(&[1, 0]).unwrap();
        assert_eq!(swapped, mat(&[&[0, 1], &[1, 2]]));
        assert!(b.relabel(&[0, 0]).is_err());
        assert!(b.relabel(&[0]).is_err());
    }

    #[test]
    fn principal_submatrix_examples() {
        let b = mat(&[&[2, 1], &[1, 0]]);
        assert_eq!(b.principal_submatrix(2).unwrap(), b);
        assert_eq!(b.principal_submatrix(1).unwrap(), mat(&[&[2]]));
        assert!(b.principal_submatrix(3).is_err());
        let (m_sub, _) = b.principal_submatrix(1).unwrap().edge_counts();
        let (m, _) = b.edge_counts();
        assert!(m_sub <= m);
    }

    #[test]
    fn edge_list_round_trip_and_exact_bytes() {
        let b = mat(&[&[2, 1], &[1, 0]]);
        let text = b.to_edge_list();
        assert_eq!(text, "2 2\n1 1 1\n1 2 1\n");
        assert_eq!(AdjacencyMatrix::from_edge_list(&text).unwrap(), b);

        assert_eq!(AdjacencyMatrix::zero(3).to_edge_list(), "3 0\n");

        // Byte-lexicographic line order: with n ≥ 10, "10 …" sorts before "2 …".
        let mut wide = AdjacencyMatrix::zero(10);
        wide.add_edge(1, 2);
        wide.add_edge(9, 9);
        assert_eq!(wide.to_edge_list(), "10 2\n10 10 1\n2 3 1\n");
        assert_eq!(
            AdjacencyMatrix::from_edge_list(&wide.to_edge_list()).unwrap(),
            wide
        );
    }

    #[test]
    fn edge_list_parser_is_strict() {
        assert!(AdjacencyMatrix::from_edge_list("").is_err());
        assert!(AdjacencyMatrix::from_edge_list("2 1\n2 1 1\n").is_err()); // i > j
        assert!(AdjacencyMatrix::from_edge_list("2 1\n1 3 1\n").is_err()); // out of range
        assert!(AdjacencyMatrix::from_edge_list("2 2\n1 2 1\n").is_err()); // m mismatch
        assert!(AdjacencyMatrix::from_edge_list("2 2\n1 2 1\n1 2 1\n").is_err()); // duplicate
        assert!(AdjacencyMatrix::from_edge_list("2 1\n1 2 0\n").is_err()); // zero count
    }

    #[test]
    fn degree_sequence_rejects_odd_sum() {
        assert!(DegreeSequence::new(vec![1, 2]).is_err());
        let d = DegreeSequence::new(vec![2, 2]).unwrap();
        assert_eq!(d.sum(), 4);
        assert_eq!(d.stub_word(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn urn_canonical_string_round_trips() {
        let psi = UrnConfiguration::new(3, vec![0, 2, 1, 1]).unwrap();
        assert_eq!(psi.canonical_string(), "1 3 2 2");
        assert_eq!(
            UrnConfiguration::from_canonical_string(3, "1 3 2 2").unwrap(),
            psi
        );
    }

    // -- property tests ----------------------------------------------------

    /// Random valid upper triangle for a small matrix.
    fn arb_matrix(max_n: usize, max_c: u32) -> impl Strategy<Value = AdjacencyMatrix> {
        (1..=max_n)
            .prop_flat_map(move |n| {
                proptest::collection::vec(0..=max_c, n * (n + 1) / 2)
                    .prop_map(move |mut tri| {
                        // Force even diagonal entries in place.
                        let mut b = AdjacencyMatrix { n, tri: vec![0; n * (n + 1) / 2] };
                        let diag_idx: Vec<usize> = (0..n).map(|i| b.idx(i, i)).collect();
                        for at in diag_idx {
                            tri[at] &= !1;
                        }
                        b.tri = tri;
                        b
                    })
            })
            .prop_filter("valid", |b| b.is_valid())
    }

    proptest! {
        #[test]
        fn urn_to_adjacency_preserves_degrees(
            word in proptest::collection::vec(0u32..4, 0..20usize).prop_map(|mut w| {
                if w.len() % 2 == 1 { w.pop(); }
                w
            })
        ) {
            let psi = UrnConfiguration::new(4, word).unwrap();
            let b = psi.urn_to_adjacency();
            let counts = psi.color_counts();
            for (i, &c) in counts.iter().enumerate() {
                prop_assert_eq!(b.degree(i), c);
            }
        }

        #[test]
        fn swapping_edge_endpoints_leaves_graph_unchanged(
            word in proptest::collection::vec(0u32..3, 0..10usize).prop_map(|mut w| {
                if w.len() % 2 == 1 { w.pop(); }
                w
            }),
            e in 0usize..5
        ) {
            let psi = UrnConfiguration::new(3, word.clone()).unwrap();
            if !word.is_empty() {
                let e = e % (word.len() / 2);
                let mut swapped = word.clone();
                swapped.swap(2 * e, 2 * e + 1);
                let psi2 = UrnConfiguration::new(3, swapped).unwrap();
                prop_assert_eq!(psi.urn_to_adjacency(), psi2.urn_to_adjacency());
            }
        }

        #[test]
        fn relabel_round_trips_through_inverse(b in arb_matrix(5, 4), seed in 0u64..1000) {
            // Derive a permutation from the seed by repeated swaps.
            let n = b.n();
            let mut tau: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                tau.swap(i, (s >> 33) as usize % (i + 1));
            }
            let mut inv = vec![0usize; n];
            for (i, &t) in tau.iter().enumerate() {
                inv[t] = i;
            }
            let there = b.relabel(&tau).unwrap();
            let back = there.relabel(&inv).unwrap();
            prop_assert_eq!(back, b.clone());

            // Degree multiset is preserved.
            let mut d1: Vec<u64> = b.degrees().as_slice().to_vec();
            let mut d2: Vec<u64> = there.degrees().as_slice().to_vec();
            d1.sort_unstable();
            d2.sort_unstable();
            prop_assert_eq!(d1, d2);
        }

        #[test]
        fn edge_list_round_trips(b in arb_matrix(6, 3)) {
            let text = b.to_edge_list();
            let parsed = AdjacencyMatrix::from_edge_list(&text).unwrap();
            prop_assert_eq!(parsed, b);
        }
    }
}
