//! Set partitions, non-flat diagrams, diagram pairs and restricted words.
//!
//! Partitions of `[K]` are stored with 0-based elements; `Display` prints the
//! usual 1-based notation, e.g. `{{1},{2,3,6},{4,5}}`. Enumeration order is
//! the lexicographic order of restricted-growth strings, so every listing is
//! deterministic.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::measure::Shape;

/// Largest ground set [`enumerate_partitions`] accepts.
pub const PARTITION_CAP: usize = 10;
/// Longest word [`enumerate_words`] accepts.
pub const WORD_LENGTH_CAP: usize = 10;

/// `n!` (panics on overflow, i.e. for `n > 20`).
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Falling factorial `k (k-1) ... (k-i+1)`, with `k_(0) = 1`.
pub fn falling_factorial(k: usize, i: usize) -> Result<u64> {
    if i > k {
        return Err(Error::OutOfRange {
            what: "falling factorial length",
            value: i,
            min: 0,
            max: k,
        });
    }
    Ok(((k - i + 1)..=k).map(|x| x as u64).product())
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..k).collect();
    let mut out = vec![current.clone()];
    loop {
        // next lexicographic permutation
        let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// All `r`-subsets of `0..n` as ascending index lists, lexicographically.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..r).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..r).rev().find(|&i| c[i] < n - r + i) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..r {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// A partition of `{0, ..., K-1}` with blocks ordered by their minimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    ground: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds and canonicalizes a partition; rejects overlaps, gaps and
    /// empty blocks.
    pub fn from_blocks(ground: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; ground];
        let mut blocks = blocks;
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block"));
            }
            b.sort_unstable();
            for &e in b.iter() {
                if e >= ground {
                    return Err(Error::InvalidPartition("element outside the ground set"));
                }
                if seen[e] {
                    return Err(Error::InvalidPartition("blocks overlap"));
                }
                seen[e] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition("blocks do not cover the ground set"));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { ground, blocks })
    }

    /// Same as [`SetPartition::from_blocks`] with 1-based element labels.
    pub fn from_one_based(ground: usize, blocks: &[&[usize]]) -> Result<Self> {
        let mut shifted = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut v = Vec::with_capacity(b.len());
            for &e in b.iter() {
                if e == 0 {
                    return Err(Error::InvalidPartition("1-based labels start at 1"));
                }
                v.push(e - 1);
            }
            shifted.push(v);
        }
        Self::from_blocks(ground, shifted)
    }

    /// Partition encoded by a restricted-growth string.
    pub fn from_rgs(rgs: &[usize]) -> Self {
        let count = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (e, &b) in rgs.iter().enumerate() {
            blocks[b].push(e);
        }
        Self {
            ground: rgs.len(),
            blocks,
        }
    }

    /// The all-singletons partition of `[K]`.
    pub fn minimal(ground: usize) -> Self {
        Self {
            ground,
            blocks: (0..ground).map(|e| vec![e]).collect(),
        }
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks `|σ|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.ground];
        for (b, block) in self.blocks.iter().enumerate() {
            for &e in block {
                out[e] = b;
            }
        }
        out
    }

    /// Every block meets each factor's positions at most once.
    pub fn is_nonflat(&self, shape: &Shape) -> bool {
        if self.ground != shape.total() {
            return false;
        }
        let owners = shape.owners();
        self.blocks.iter().all(|b| {
            let mut used = 0u64;
            b.iter().all(|&e| {
                let bit = 1u64 << owners[e];
                let fresh = used & bit == 0;
                used |= bit;
                fresh
            })
        })
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, e) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", e + 1)?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

fn check_partition_cap(k: usize) -> Result<()> {
    if k > PARTITION_CAP {
        return Err(Error::ResourceLimit {
            what: "partition ground size",
            requested: k,
            cap: PARTITION_CAP,
        });
    }
    Ok(())
}

/// All `B(K)` partitions of `[K]`, `1 <= K <= PARTITION_CAP`.
pub fn enumerate_partitions(k: usize) -> Result<Vec<SetPartition>> {
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "partition ground size",
            value: 0,
            min: 1,
            max: PARTITION_CAP,
        });
    }
    check_partition_cap(k)?;
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    // prefix maxima: max_before[i] = max(rgs[..i])
    loop {
        out.push(SetPartition::from_rgs(&rgs));
        let mut i = k;
        loop {
            if i <= 1 {
                return Ok(out);
            }
            i -= 1;
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// The class `Π(k_1, ..., k_m)`: partitions of `[K]` whose blocks meet each
/// factor's positions at most once. Zero orders own no positions; an
/// all-zero shape gives the empty class.
pub fn enumerate_nonflat(shape: &Shape) -> Result<Vec<SetPartition>> {
    let k = shape.total();
    if k == 0 {
        return Ok(Vec::new());
    }
    check_partition_cap(k)?;
    if shape.factors() > 64 {
        return Err(Error::ResourceLimit {
            what: "factor count",
            requested: shape.factors(),
            cap: 64,
        });
    }
    let owners = shape.owners();
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    let mut masks: Vec<u64> = Vec::with_capacity(k);
    grow_nonflat(0, &owners, &mut rgs, &mut masks, &mut out);
    Ok(out)
}

fn grow_nonflat(
    e: usize,
    owners: &[usize],
    rgs: &mut [usize],
    masks: &mut Vec<u64>,
    out: &mut Vec<SetPartition>,
) {
    if e == owners.len() {
        out.push(SetPartition::from_rgs(rgs));
        return;
    }
    let bit = 1u64 << owners[e];
    for b in 0..masks.len() {
        if masks[b] & bit == 0 {
            masks[b] |= bit;
            rgs[e] = b;
            grow_nonflat(e + 1, owners, rgs, masks, out);
            masks[b] &= !bit;
        }
    }
    masks.push(bit);
    rgs[e] = masks.len() - 1;
    grow_nonflat(e + 1, owners, rgs, masks, out);
    masks.pop();
}

/// Keeps the partitions whose blocks all have size at least two (`Π≥2`).
pub fn filter_geq2(partitions: &[SetPartition]) -> Vec<SetPartition> {
    partitions
        .iter()
        .filter(|p| p.blocks.iter().all(|b| b.len() >= 2))
        .cloned()
        .collect()
}

/// `(σ_1, σ≥2)`: singleton blocks and blocks of size at least two.
pub fn split_sigma(sigma: &SetPartition) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    sigma.blocks.iter().cloned().partition(|b| b.len() == 1)
}

/// A non-flat partition together with a chosen subset `A ⊆ σ≥2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramPair {
    shape: Shape,
    sigma: SetPartition,
    chosen: Vec<usize>,
}

impl DiagramPair {
    /// `chosen` holds indices into `sigma.blocks()`.
    pub fn new(shape: Shape, sigma: SetPartition, mut chosen: Vec<usize>) -> Result<Self> {
        if !sigma.is_nonflat(&shape) {
            return Err(Error::FlatPartition);
        }
        chosen.sort_unstable();
        chosen.dedup();
        for &c in &chosen {
            if c >= sigma.len() || sigma.blocks[c].len() < 2 {
                return Err(Error::InvalidPartition("chosen blocks must be blocks of size >= 2"));
            }
        }
        Ok(Self {
            shape,
            sigma,
            chosen,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn sigma(&self) -> &SetPartition {
        &self.sigma
    }

    /// Indices of the blocks in `A`.
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    /// Block indices of `A ∪ σ_1` in canonical (minimum-element) order.
    pub fn free_blocks(&self) -> Vec<usize> {
        (0..self.sigma.len())
            .filter(|b| self.sigma.blocks[*b].len() == 1 || self.chosen.contains(b))
            .collect()
    }

    /// Block indices of `σ≥2 \ A`.
    pub fn integrated_blocks(&self) -> Vec<usize> {
        (0..self.sigma.len())
            .filter(|b| self.sigma.blocks[*b].len() >= 2 && !self.chosen.contains(b))
            .collect()
    }

    /// `|A| + |σ_1|`, the order of the kernel built from the pair.
    pub fn order(&self) -> usize {
        self.free_blocks().len()
    }
}

impl fmt::Display for DiagramPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, A={{", self.sigma)?;
        for (i, &c) in self.chosen.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, e) in self.sigma.blocks[c].iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", e + 1)?;
            }
            f.write_str("}")?;
        }
        f.write_str("})")
    }
}

/// All pairs `(σ, A)` with `σ ∈ Π(shape)`, `A ⊆ σ≥2` and `|A| + |σ_1| = q`.
pub fn enumerate_diagram_pairs(shape: &Shape, q: usize) -> Result<Vec<DiagramPair>> {
    let k = shape.total();
    if q > k {
        return Err(Error::OutOfRange {
            what: "chaos order q",
            value: q,
            min: 0,
            max: k,
        });
    }
    let mut out = Vec::new();
    for sigma in enumerate_nonflat(shape)? {
        let singles = sigma.blocks.iter().filter(|b| b.len() == 1).count();
        let big: Vec<usize> = (0..sigma.len()).filter(|&b| sigma.blocks[b].len() >= 2).collect();
        if q < singles || q - singles > big.len() {
            continue;
        }
        for pick in combinations(big.len(), q - singles) {
            out.push(DiagramPair {
                shape: shape.clone(),
                sigma: sigma.clone(),
                chosen: pick.iter().map(|&i| big[i]).collect(),
            });
        }
    }
    Ok(out)
}

/// A nonempty subset of the factor indices `0..m`, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorSet(u32);

impl FactorSet {
    pub fn new(mask: u32) -> Result<Self> {
        if mask == 0 {
            return Err(Error::InvalidArgument("word letters must be nonempty"));
        }
        Ok(Self(mask))
    }

    /// From 0-based factor indices.
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &i in indices {
            if i >= 32 {
                return Err(Error::OutOfRange {
                    what: "factor index",
                    value: i,
                    min: 0,
                    max: 31,
                });
            }
            mask |= 1 << i;
        }
        Self::new(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }
}

/// A word `(A_1, ..., A_q)` of nonempty factor subsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<FactorSet>,
}

impl Word {
    pub fn new(letters: Vec<FactorSet>) -> Self {
        Self { letters }
    }

    pub fn letters(&self) -> &[FactorSet] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `d_i`: number of letters containing factor `i`, for `i < m`.
    pub fn multiplicities(&self, m: usize) -> Vec<usize> {
        (0..m)
            .map(|i| self.letters.iter().filter(|a| a.contains(i)).count())
            .collect()
    }

    /// `q(i)`: positions of the letters containing factor `i`, ascending.
    pub fn positions(&self, i: usize) -> Vec<usize> {
        (0..self.letters.len())
            .filter(|&l| self.letters[l].contains(i))
            .collect()
    }

    /// `d_i <= k_i` for every factor, and no letter names a missing factor.
    pub fn is_restricted(&self, shape: &Shape) -> bool {
        let m = shape.factors();
        let outside = !((1u64 << m) - 1) as u32;
        self.letters.iter().all(|a| a.0 & outside == 0)
            && self
                .multiplicities(m)
                .iter()
                .zip(shape.orders())
                .all(|(d, k)| d <= k)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (l, a) in self.letters.iter().enumerate() {
            if l > 0 {
                f.write_str(",")?;
            }
            let mut s = String::from("{");
            for (j, i) in a.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&alloc::format!("{}", i + 1));
            }
            s.push('}');
            f.write_str(&s)?;
        }
        f.write_str(")")
    }
}

/// The restricted words `W(q; k_1, ..., k_m)`; empty when `q > K`.
pub fn enumerate_words(shape: &Shape, q: usize) -> Result<Vec<Word>> {
    if q == 0 {
        return Err(Error::OutOfRange {
            what: "word length",
            value: 0,
            min: 1,
            max: WORD_LENGTH_CAP,
        });
    }
    if q > WORD_LENGTH_CAP {
        return Err(Error::ResourceLimit {
            what: "word length",
            requested: q,
            cap: WORD_LENGTH_CAP,
        });
    }
    let m = shape.factors();
    if m > 31 {
        return Err(Error::ResourceLimit {
            what: "factor count",
            requested: m,
            cap: 31,
        });
    }
    let mut out = Vec::new();
    if q > shape.total() {
        return Ok(out);
    }
    let mut remaining: Vec<usize> = shape.orders().to_vec();
    let mut letters = Vec::with_capacity(q);
    grow_words(q, m, &mut remaining, &mut letters, &mut out);
    Ok(out)
}

fn grow_words(
    q: usize,
    m: usize,
    remaining: &mut [usize],
    letters: &mut Vec<FactorSet>,
    out: &mut Vec<Word>,
) {
    if letters.len() == q {
        out.push(Word::new(letters.clone()));
        return;
    }
    // prune: each further letter consumes at least one unit of budget
    let budget: usize = remaining.iter().sum();
    if budget < q - letters.len() {
        return;
    }
    for mask in 1u32..(1u32 << m) {
        if (0..m).any(|i| mask & (1 << i) != 0 && remaining[i] == 0) {
            continue;
        }
        (0..m).filter(|i| mask & (1 << i) != 0).for_each(|i| remaining[i] -= 1);
        letters.push(FactorSet(mask));
        grow_words(q, m, remaining, letters, out);
        letters.pop();
        (0..m).filter(|i| mask & (1 << i) != 0).for_each(|i| remaining[i] += 1);
    }
}
