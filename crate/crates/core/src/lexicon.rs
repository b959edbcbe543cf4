//! Valence/arousal/dominance ratings, word-frequency scores and the rank
//! correlations between ratings and effect sizes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::association::AssociationTest;
use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};

pub const DEFAULT_FREQUENCY_RANGES: [usize; 3] = [100, 1_000, 10_000];
pub const DEFAULT_EFFECT_THRESHOLDS: [f64; 4] = [0.0, 0.2, 0.5, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VadDim {
    Valence,
    Arousal,
    Dominance,
}

impl VadDim {
    pub const ALL: [VadDim; 3] = [VadDim::Valence, VadDim::Arousal, VadDim::Dominance];

    pub fn name(self) -> &'static str {
        match self {
            VadDim::Valence => "valence",
            VadDim::Arousal => "arousal",
            VadDim::Dominance => "dominance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vad {
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
}

impl Vad {
    pub fn new(valence: f64, arousal: f64, dominance: f64) -> Result<Self> {
        for (name, v) in [("valence", valence), ("arousal", arousal), ("dominance", dominance)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{name} rating {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            valence,
            arousal,
            dominance,
        })
    }

    pub fn get(&self, dim: VadDim) -> f64 {
        match dim {
            VadDim::Valence => self.valence,
            VadDim::Arousal => self.arousal,
            VadDim::Dominance => self.dominance,
        }
    }
}

/// Word→ratings map that iterates in insertion order.
#[derive(Debug, Clone, Default)]
pub struct VadLexicon {
    entries: Vec<(String, Vad)>,
    index: HashMap<String, usize>,
    duplicates: usize,
}

impl VadLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// A repeated word keeps its original position and takes the new ratings.
    pub fn insert(&mut self, word: &str, vad: Vad) {
        match self.index.get(word) {
            Some(&i) => {
                self.entries[i].1 = vad;
                self.duplicates += 1;
            }
            None => {
                self.index.insert(word.to_string(), self.entries.len());
                self.entries.push((word.to_string(), vad));
            }
        }
    }

    pub fn get(&self, word: &str) -> Option<Vad> {
        self.index.get(word).map(|&i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Vad)> + '_ {
        self.entries.iter().map(|(w, v)| (w.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    /// Spearman correlation between two rating dimensions over the whole
    /// lexicon.
    pub fn dimension_correlation(&self, x: VadDim, y: VadDim) -> Result<f64> {
        let xs: Vec<f64> = self.entries.iter().map(|(_, v)| v.get(x)).collect();
        let ys: Vec<f64> = self.entries.iter().map(|(_, v)| v.get(y)).collect();
        spearman(&xs, &ys)
    }
}

/// Word→frequency score (higher is more frequent).
#[derive(Debug, Clone, Default)]
pub struct FrequencyLexicon {
    pub source: String,
    scores: HashMap<String, f64>,
}

impl FrequencyLexicon {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            scores: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: &str, score: f64) -> Result<()> {
        if !score.is_finite() || score < 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "frequency score for `{word}` must be finite and non-negative, got {score}"
            )));
        }
        self.scores.insert(word.to_string(), score);
        Ok(())
    }

    /// Score of `word`; words the lexicon does not know score zero.
    pub fn score(&self, word: &str) -> f64 {
        self.scores.get(word).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// One-based fractional ranks: tied values share the mean of the ranks
/// they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = alloc::vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let r = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of the average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::InvalidParameter("spearman needs at least 3 pairs".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("spearman input must be finite".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    // average ranks always sum to n(n+1)/2
    let mean = (xs.len() + 1) as f64 / 2.0;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        let dx = a - mean;
        let dy = b - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("constant input has no rank correlation"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// A lexicon word found in the embedding vocabulary, with its effect size.
#[derive(Debug, Clone, PartialEq)]
pub struct RatedWord {
    pub word: String,
    pub rank: usize,
    pub effect_size: f64,
    pub vad: Vad,
}

/// Effect size for every lexicon word present in `space`, in lexicon order.
/// Returns the rated words and the number of in-vocabulary words whose
/// effect size was undefined.
pub fn rate_lexicon(
    space: &EmbeddingSpace,
    vad: &VadLexicon,
    test: &AssociationTest,
) -> (Vec<RatedWord>, usize) {
    let mut out = Vec::new();
    let mut failed = 0;
    for (word, v) in vad.iter() {
        if let Some(r) = rate_word(space, test, word, v) {
            match r {
                Ok(rw) => out.push(rw),
                Err(_) => failed += 1,
            }
        }
    }
    (out, failed)
}

/// `None` when the word is out of vocabulary.
pub fn rate_word(
    space: &EmbeddingSpace,
    test: &AssociationTest,
    word: &str,
    vad: Vad,
) -> Option<Result<RatedWord>> {
    let i = space.index_of(word)?;
    Some(test.effect_size(space.row(i)).map(|d| RatedWord {
        word: word.to_string(),
        rank: i + 1,
        effect_size: d,
        vad,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StratumKind {
    /// The `N` most frequent rated words by frequency score.
    TopFrequency(usize),
    /// Every rated word.
    All,
    /// Rated words with `|d| >= t`, both signs.
    MinEffect(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub kind: StratumKind,
    pub n: usize,
    /// Indexed like [`VadDim::ALL`]; `None` when undefined (fewer than three
    /// words or a constant column).
    pub rho: [Option<f64>; 3],
}

impl Stratum {
    pub fn rho(&self, dim: VadDim) -> Option<f64> {
        self.rho[dim as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrataConfig {
    pub frequency_ranges: Vec<usize>,
    pub effect_thresholds: Vec<f64>,
}

impl Default for StrataConfig {
    fn default() -> Self {
        Self {
            frequency_ranges: DEFAULT_FREQUENCY_RANGES.to_vec(),
            effect_thresholds: DEFAULT_EFFECT_THRESHOLDS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    /// Frequency prefixes followed by the full set.
    pub by_frequency: Vec<Stratum>,
    pub by_effect: Vec<Stratum>,
    /// Lexicon words with a defined effect size in this space.
    pub intersection: usize,
}

fn stratum(kind: StratumKind, words: &[&RatedWord]) -> Stratum {
    let ds: Vec<f64> = words.iter().map(|w| w.effect_size).collect();
    let mut rho = [None; 3];
    for dim in VadDim::ALL {
        let rs: Vec<f64> = words.iter().map(|w| w.vad.get(dim)).collect();
        rho[dim as usize] = spearman(&ds, &rs).ok();
    }
    Stratum {
        kind,
        n: words.len(),
        rho,
    }
}

/// Correlation strata over already-rated words.
pub fn correlation_table(
    rated: &[RatedWord],
    freq: &FrequencyLexicon,
    strata: &StrataConfig,
) -> CorrelationTable {
    let mut by_score: Vec<&RatedWord> = rated.iter().collect();
    by_score.sort_by(|a, b| {
        freq.score(&b.word)
            .total_cmp(&freq.score(&a.word))
            .then(a.rank.cmp(&b.rank))
    });
    let mut by_frequency: Vec<Stratum> = strata
        .frequency_ranges
        .iter()
        .map(|&n| stratum(StratumKind::TopFrequency(n), &by_score[..n.min(by_score.len())]))
        .collect();
    by_frequency.push(stratum(StratumKind::All, &by_score));
    let by_effect = strata
        .effect_thresholds
        .iter()
        .map(|&t| {
            let kept: Vec<&RatedWord> = rated.iter().filter(|w| w.effect_size.abs() >= t).collect();
            stratum(StratumKind::MinEffect(t), &kept)
        })
        .collect();
    CorrelationTable {
        by_frequency,
        by_effect,
        intersection: rated.len(),
    }
}

/// Rates every lexicon word in `space` and builds the correlation strata.
pub fn vad_correlations(
    space: &EmbeddingSpace,
    vad: &VadLexicon,
    freq: &FrequencyLexicon,
    test: &AssociationTest,
    strata: &StrataConfig,
) -> CorrelationTable {
    let (rated, _) = rate_lexicon(space, vad, test);
    correlation_table(&rated, freq, strata)
}
