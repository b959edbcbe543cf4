//! Single-category association test.
//!
//! For a target vector `w` and two equal-sized attribute sets `A` and `B`,
//! the effect size is
//!
//! ```text
//! d = (mean_{a in A} cos(w, a) - mean_{b in B} cos(w, b)) / std_{x in A u B} cos(w, x)
//! ```
//!
//! with the population standard deviation over all `2n` cosines. A
//! positive `d` means `w` sits closer to `A`.
//!
//! Significance comes from a one-sided permutation test on the unnormalized
//! mean difference over equal-size re-partitions of `A u B`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use crate::embedding::{cosine, normalized, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::seed;

/// Smallest attribute set accepted outside of oracle tests.
pub const MIN_ATTRIBUTE_WORDS: usize = 8;

/// Largest partition count exact enumeration will attempt.
pub const EXACT_PARTITION_CAP: u64 = 1_000_000;

/// Default significance threshold used downstream.
pub const DEFAULT_P_MAX: f64 = 0.05;

/// Standard deviations at or below this are treated as zero.
const DEGENERATE_STD: f64 = 1e-12;

pub const FEMALE_WORDS: [&str; 8] = [
    "female", "she", "her", "hers", "woman", "girl", "daughter", "sister",
];
pub const MALE_WORDS: [&str; 8] = ["male", "he", "him", "his", "man", "boy", "son", "brother"];

/// A named list of words standing for one concept pole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSet {
    name: String,
    words: Vec<String>,
}

impl AttributeSet {
    pub fn new<S: AsRef<str>>(name: impl Into<String>, words: &[S]) -> Result<Self> {
        Self::with_min(name.into(), words, MIN_ATTRIBUTE_WORDS)
    }

    /// Oracle-test form accepting sets as small as two words.
    #[cfg(test)]
    pub(crate) fn relaxed<S: AsRef<str>>(name: &str, words: &[S]) -> Result<Self> {
        Self::with_min(name.into(), words, 2)
    }

    fn with_min<S: AsRef<str>>(name: String, words: &[S], min: usize) -> Result<Self> {
        if words.len() < min {
            return Err(Error::AttributeTooSmall {
                name,
                len: words.len(),
                min,
            });
        }
        Ok(Self {
            name,
            words: words.iter().map(|w| w.as_ref().to_string()).collect(),
        })
    }

    pub fn gender_female() -> Self {
        Self::new("gender-female", &FEMALE_WORDS).expect("eight words")
    }

    pub fn gender_male() -> Self {
        Self::new("gender-male", &MALE_WORDS).expect("eight words")
    }

    /// Looks up one of the built-in sets by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "gender-female" => Some(Self::gender_female()),
            "gender-male" => Some(Self::gender_male()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Result of evaluating one word.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationRecord {
    pub word: String,
    /// One-based frequency rank in the space the word came from.
    pub rank: usize,
    pub effect_size: f64,
    /// `None` when the batch ran without a permutation test.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Magnitude {
    Null,
    Small,
    Medium,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    A,
    B,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectClass {
    pub magnitude: Magnitude,
    pub direction: Direction,
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Magnitude::Null => "null",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        })
    }
}

/// Cohen's bands: small from 0.20, medium from 0.50, large from 0.80.
pub fn classify_effect(d: f64) -> EffectClass {
    let m = d.abs();
    let magnitude = if m >= 0.80 {
        Magnitude::Large
    } else if m >= 0.50 {
        Magnitude::Medium
    } else if m >= 0.20 {
        Magnitude::Small
    } else {
        Magnitude::Null
    };
    let direction = if d > 0.0 {
        Direction::A
    } else if d < 0.0 {
        Direction::B
    } else {
        Direction::None
    };
    EffectClass {
        magnitude,
        direction,
    }
}

/// How p-values are obtained in a batch run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PConfig {
    /// `None` skips the permutation test entirely.
    pub mode: Option<PermutationMode>,
    pub seed: u64,
}

impl Default for PConfig {
    fn default() -> Self {
        Self {
            mode: Some(PermutationMode::Exact),
            seed: 0,
        }
    }
}

/// Tallies from one permutation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationOutcome {
    /// Partitions whose statistic strictly exceeds the observed one.
    pub exceeding: u64,
    /// Partitions whose statistic equals the observed one (includes the
    /// identity partition under exact enumeration).
    pub ties: u64,
    /// Partitions examined.
    pub total: u64,
    pub p_value: f64,
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Attribute vectors resolved and normalized once, ready to score words.
#[derive(Debug, Clone)]
pub struct AssociationTest {
    dim: usize,
    n: usize,
    /// `2n` unit vectors, `A` first.
    attributes: Vec<f64>,
    /// Bit masks of every size-`n` subset of the `2n` attributes, in
    /// lexicographic order. Empty when the count exceeds the exact cap.
    partitions: Vec<u32>,
}

impl AssociationTest {
    pub fn new(space: &EmbeddingSpace, a: &AttributeSet, b: &AttributeSet) -> Result<Self> {
        let missing: Vec<String> = a
            .words()
            .iter()
            .chain(b.words())
            .filter(|w| !space.contains(w))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingWords(missing));
        }
        let rows: Vec<&[f64]> = a
            .words()
            .iter()
            .chain(b.words())
            .map(|w| space.get(w).expect("checked").components)
            .collect();
        let (ra, rb) = rows.split_at(a.len());
        Self::from_vectors(ra, rb)
    }

    pub fn from_vectors(a: &[&[f64]], b: &[&[f64]]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::UnequalAttributes {
                a: a.len(),
                b: b.len(),
            });
        }
        let n = a.len();
        if n == 0 {
            return Err(Error::Empty("attribute sets"));
        }
        let dim = a[0].len();
        let mut attributes = Vec::with_capacity(2 * n * dim);
        for v in a.iter().chain(b) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            attributes.extend(normalized(v)?);
        }
        let partitions = if 2 * n <= 32 && binomial(2 * n as u64, n as u64) <= EXACT_PARTITION_CAP
        {
            enumerate_partitions(2 * n, n)
        } else {
            Vec::new()
        };
        Ok(Self {
            dim,
            n,
            attributes,
            partitions,
        })
    }

    /// Size of each attribute set.
    pub fn set_size(&self) -> usize {
        self.n
    }

    /// The same test with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> Self {
        let half = self.n * self.dim;
        let mut attributes = Vec::with_capacity(self.attributes.len());
        attributes.extend_from_slice(&self.attributes[half..]);
        attributes.extend_from_slice(&self.attributes[..half]);
        Self {
            attributes,
            ..self.clone()
        }
    }

    /// Cosines of `w` with the `2n` attributes, `A` first.
    pub fn cosines(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: w.len(),
            });
        }
        let unit = normalized(w)?;
        Ok(self
            .attributes
            .chunks_exact(self.dim)
            .map(|x| crate::embedding::dot(&unit, x).clamp(-1.0, 1.0))
            .collect())
    }

    pub fn effect_size(&self, w: &[f64]) -> Result<f64> {
        effect_size_from_cosines(&self.cosines(w)?, self.n)
    }

    /// Number of equal-size partitions of `A u B`.
    pub fn partition_count(&self) -> u64 {
        binomial(2 * self.n as u64, self.n as u64)
    }

    pub fn permutation(&self, w: &[f64], mode: PermutationMode, seed: u64) -> Result<PermutationOutcome> {
        let cos = self.cosines(w)?;
        match mode {
            PermutationMode::Exact => self.exact(&cos),
            PermutationMode::MonteCarlo { samples } => self.monte_carlo(&cos, samples, seed),
        }
    }

    fn exact(&self, cos: &[f64]) -> Result<PermutationOutcome> {
        if self.partitions.is_empty() {
            return Err(Error::Capacity(alloc::format!(
                "exact permutation test needs {} partitions (cap {}); use monte-carlo",
                self.partition_count(),
                EXACT_PARTITION_CAP
            )));
        }
        let observed = subset_sum(cos, self.partitions[0]);
        let mut exceeding = 0;
        let mut ties = 0;
        for &mask in &self.partitions {
            let s = subset_sum(cos, mask);
            if s > observed {
                exceeding += 1;
            } else if s == observed {
                ties += 1;
            }
        }
        let total = self.partitions.len() as u64;
        Ok(PermutationOutcome {
            exceeding,
            ties,
            total,
            p_value: exceeding as f64 / total as f64,
        })
    }

    fn monte_carlo(&self, cos: &[f64], samples: usize, seed: u64) -> Result<PermutationOutcome> {
        if samples == 0 {
            return Err(Error::InvalidParameter("monte-carlo needs at least one sample".into()));
        }
        let n = self.n;
        let observed = sorted_sum(cos, &mut (0..n).collect::<Vec<_>>());
        let mut rng = seed::rng(seed);
        let mut order: Vec<usize> = (0..2 * n).collect();
        let mut pick = Vec::with_capacity(n);
        let mut exceeding = 0u64;
        let mut ties = 0u64;
        for _ in 0..samples {
            order.shuffle(&mut rng);
            pick.clear();
            pick.extend_from_slice(&order[..n]);
            let s = sorted_sum(cos, &mut pick);
            if s > observed {
                exceeding += 1;
            } else if s == observed {
                ties += 1;
            }
        }
        Ok(PermutationOutcome {
            exceeding,
            ties,
            total: samples as u64,
            p_value: (1 + exceeding) as f64 / (1 + samples) as f64,
        })
    }
}

/// Sum of the selected cosines, added in ascending index order. The first
/// half-set sum is a monotone stand-in for the mean difference, since the
/// complement sum is the fixed total minus it.
fn subset_sum(cos: &[f64], mask: u32) -> f64 {
    let mut s = 0.0;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        s += cos[i];
        m &= m - 1;
    }
    s
}

fn sorted_sum(cos: &[f64], idx: &mut [usize]) -> f64 {
    idx.sort_unstable();
    idx.iter().map(|&i| cos[i]).sum()
}

fn enumerate_partitions(total: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.iter().fold(0u32, |m, &i| m | (1 << i)));
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && c[i - 1] == i - 1 + total - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Effect size from `2n` cosines laid out `A` first. Written so that
/// exchanging the halves negates the result exactly.
pub fn effect_size_from_cosines(cos: &[f64], n: usize) -> Result<f64> {
    let (ca, cb) = cos.split_at(n);
    let sum_a: f64 = ca.iter().sum();
    let sum_b: f64 = cb.iter().sum();
    let nf = n as f64;
    let mean = (sum_a + sum_b) / (2.0 * nf);
    let ss_a: f64 = ca.iter().map(|c| (c - mean) * (c - mean)).sum();
    let ss_b: f64 = cb.iter().map(|c| (c - mean) * (c - mean)).sum();
    let std = libm::sqrt((ss_a + ss_b) / (2.0 * nf));
    if std <= DEGENERATE_STD {
        return Err(Error::Degenerate("zero standard deviation across attribute cosines"));
    }
    Ok((sum_a / nf - sum_b / nf) / std)
}

/// Effect size of `word` against `a` and `b`. Requires `|A| = |B|`.
pub fn sc_weat(space: &EmbeddingSpace, word: &str, a: &AttributeSet, b: &AttributeSet) -> Result<f64> {
    let w = space.vector(word)?;
    AssociationTest::new(space, a, b)?.effect_size(w.components)
}

/// One-sided permutation p-value for `word`.
pub fn permutation_p(
    space: &EmbeddingSpace,
    word: &str,
    a: &AttributeSet,
    b: &AttributeSet,
    mode: PermutationMode,
    seed: u64,
) -> Result<f64> {
    let w = space.vector(word)?;
    Ok(AssociationTest::new(space, a, b)?
        .permutation(w.components, mode, seed)?
        .p_value)
}

/// Why a word produced no record.
#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    NotInVocabulary,
    Failed(Error),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::NotInVocabulary => f.write_str("not in vocabulary"),
            SkipReason::Failed(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedWord {
    pub word: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutput {
    pub records: Vec<AssociationRecord>,
    pub skipped: Vec<SkippedWord>,
}

/// Scores a single word. Per-word Monte-Carlo streams are keyed on the
/// word's rank, so results do not depend on how a batch is split.
pub fn evaluate_word(
    test: &AssociationTest,
    space: &EmbeddingSpace,
    word: &str,
    config: &PConfig,
) -> core::result::Result<AssociationRecord, SkipReason> {
    let index = space.index_of(word).ok_or(SkipReason::NotInVocabulary)?;
    let w = space.row(index);
    let effect_size = test.effect_size(w).map_err(SkipReason::Failed)?;
    let p_value = match config.mode {
        None => None,
        Some(mode) => {
            let s = seed::derive_seed(config.seed, &[index as u64]);
            Some(
                test.permutation(w, mode, s)
                    .map_err(SkipReason::Failed)?
                    .p_value,
            )
        }
    };
    Ok(AssociationRecord {
        word: word.to_string(),
        rank: index + 1,
        effect_size,
        p_value,
    })
}

/// Scores every word in order. Unresolvable words go to `skipped`.
pub fn batch_associations<S: AsRef<str>>(
    space: &EmbeddingSpace,
    words: &[S],
    a: &AttributeSet,
    b: &AttributeSet,
    config: &PConfig,
) -> Result<BatchOutput> {
    let test = AssociationTest::new(space, a, b)?;
    let mut out = BatchOutput::default();
    for w in words {
        match evaluate_word(&test, space, w.as_ref(), config) {
            Ok(r) => out.records.push(r),
            Err(reason) => out.skipped.push(SkippedWord {
                word: w.as_ref().to_string(),
                reason,
            }),
        }
    }
    if out.records.is_empty() {
        return Err(Error::Empty("no resolvable words in batch"));
    }
    Ok(out)
}

/// Plain cosine of two words, for callers that do not need a prepared test.
pub fn word_cosine(space: &EmbeddingSpace, u: &str, v: &str) -> Result<f64> {
    cosine(space.vector(u)?.components, space.vector(v)?.components)
}
