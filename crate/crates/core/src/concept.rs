//! Concept probes: rank the vocabulary by mean cosine similarity to a set of
//! seed words, intersect the rankings from several spaces, and summarize the
//! association of the resulting word list.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::association::{AssociationTest, Direction};
use crate::embedding::{dot, normalized, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::frequency::{band_counts, pct, BandCounts};

pub const DEFAULT_TOP_N: usize = 10_000;

/// Company names used to probe the big-tech region of a vocabulary.
pub const BIG_TECH_SEEDS: [&str; 12] = [
    "Alibaba",
    "Amazon",
    "Apple",
    "Facebook",
    "Google",
    "Huawei",
    "IBM",
    "Intel",
    "Microsoft",
    "Nvidia",
    "Samsung",
    "Uber",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSeed {
    pub name: String,
    pub words: Vec<String>,
}

impl ConceptSeed {
    pub fn new<S: AsRef<str>>(name: impl Into<String>, words: &[S]) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Empty("concept seed list"));
        }
        Ok(Self {
            name: name.into(),
            words: words.iter().map(|w| String::from(w.as_ref())).collect(),
        })
    }

    pub fn big_tech() -> Self {
        Self::new("big-tech", &BIG_TECH_SEEDS).expect("non-empty")
    }

    /// Seeds present in `space`. With `drop_missing` unset, any absent seed
    /// is an error listing all of them.
    pub fn resolve(&self, space: &EmbeddingSpace, drop_missing: bool) -> Result<Self> {
        let (present, missing): (Vec<&String>, Vec<&String>) =
            self.words.iter().partition(|w| space.contains(w));
        if !missing.is_empty() && !drop_missing {
            return Err(Error::MissingWords(missing.into_iter().cloned().collect()));
        }
        Self::new(self.name.clone(), &present)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredWord {
    pub word: String,
    pub rank: usize,
    pub score: f64,
}

/// Words sorted by descending score, ties by ascending vocabulary rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptWordList {
    pub seed: String,
    pub words: Vec<ScoredWord>,
}

/// Scorer holding unit-length seed vectors.
#[derive(Debug, Clone)]
pub struct ConceptScorer {
    dim: usize,
    seeds: Vec<f64>,
}

impl ConceptScorer {
    pub fn new(space: &EmbeddingSpace, seed: &ConceptSeed) -> Result<Self> {
        let mut seeds = Vec::with_capacity(seed.words.len() * space.dim());
        let missing: Vec<String> = seed.words.iter().filter(|w| !space.contains(w)).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::MissingWords(missing));
        }
        for w in &seed.words {
            seeds.extend(normalized(space.vector(w)?.components)?);
        }
        Ok(Self {
            dim: space.dim(),
            seeds,
        })
    }

    /// Mean cosine of `v` to the seeds; `None` for a zero vector.
    pub fn score(&self, v: &[f64]) -> Option<f64> {
        let unit = normalized(v).ok()?;
        let n = self.seeds.len() / self.dim;
        let total: f64 = self
            .seeds
            .chunks_exact(self.dim)
            .map(|s| dot(&unit, s).clamp(-1.0, 1.0))
            .sum();
        Some(total / n as f64)
    }

    /// Scores rows `range` of `space`, skipping zero vectors.
    pub fn score_rows(&self, space: &EmbeddingSpace, range: core::ops::Range<usize>) -> Vec<ScoredWord> {
        range
            .filter_map(|i| {
                self.score(space.row(i)).map(|score| ScoredWord {
                    word: String::from(space.word(i)),
                    rank: i + 1,
                    score,
                })
            })
            .collect()
    }
}

/// Keeps the `top_n` best of `scored` in list order.
pub fn top_scored(seed: &str, mut scored: Vec<ScoredWord>, top_n: usize) -> ConceptWordList {
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.rank.cmp(&b.rank)));
    scored.truncate(top_n);
    ConceptWordList {
        seed: String::from(seed),
        words: scored,
    }
}

pub fn concept_neighbors(space: &EmbeddingSpace, seed: &ConceptSeed, top_n: usize) -> Result<ConceptWordList> {
    if top_n == 0 {
        return Err(Error::InvalidParameter("top_n must be at least 1".into()));
    }
    let scorer = ConceptScorer::new(space, seed)?;
    let scored = scorer.score_rows(space, 0..space.len());
    Ok(top_scored(&seed.name, scored, top_n))
}

/// Tokens present in every list, in the order of the first list. An empty
/// result is returned as-is; callers decide how to warn.
pub fn intersect_lists(lists: &[ConceptWordList]) -> Result<Vec<String>> {
    if lists.len() < 2 {
        return Err(Error::InvalidParameter("intersection needs at least two lists".into()));
    }
    let others: Vec<HashSet<&str>> = lists[1..]
        .iter()
        .map(|l| l.words.iter().map(|w| w.word.as_str()).collect())
        .collect();
    Ok(lists[0]
        .words
        .iter()
        .filter(|w| others.iter().all(|s| s.contains(w.word.as_str())))
        .map(|w| w.word.clone())
        .collect())
}

/// Direction counts per threshold for a concept word list. Percentages are
/// taken over the whole list.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptDistribution {
    pub total: usize,
    pub bands: Vec<BandCounts>,
}

impl ConceptDistribution {
    pub fn pct(&self, threshold_index: usize, direction: Direction) -> f64 {
        pct(self.bands[threshold_index].count(direction), self.total)
    }
}

/// Effect sizes for `words` must all be defined; unresolvable words are an
/// error.
pub fn concept_bias_distribution<S: AsRef<str>>(
    words: &[S],
    space: &EmbeddingSpace,
    test: &AssociationTest,
    thresholds: &[f64],
) -> Result<ConceptDistribution> {
    let mut effects = Vec::with_capacity(words.len());
    for w in words {
        effects.push(test.effect_size(space.vector(w.as_ref())?.components)?);
    }
    Ok(distribution_from_effects(&effects, thresholds))
}

pub fn distribution_from_effects(effects: &[f64], thresholds: &[f64]) -> ConceptDistribution {
    ConceptDistribution {
        total: effects.len(),
        bands: band_counts(effects.iter().copied(), thresholds),
    }
}
