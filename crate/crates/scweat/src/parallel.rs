//! Worker-pool fan-out over words. Every per-word computation is a pure
//! function of the word (Monte-Carlo streams are keyed on its rank), and
//! results are collected in input order, so output never depends on the
//! worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use scweat_core::association::{evaluate_word, AssociationTest, BatchOutput, SkippedWord};
use scweat_core::concept::{ConceptScorer, ScoredWord};
use scweat_core::lexicon::{rate_word, RatedWord, VadLexicon};
use scweat_core::{AssociationRecord, EmbeddingSpace, Error, PConfig};

use crate::error::{AppError, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SCWEAT_WORKERS";

const CHUNK: usize = 4096;

pub fn pool(workers: Option<usize>) -> Result<ThreadPool> {
    let n = match workers {
        Some(0) => return Err(AppError::config("worker count must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| AppError::config(format!("cannot start {n} workers: {e}")))
}

pub fn batch_associations<S: AsRef<str> + Sync>(
    pool: &ThreadPool,
    space: &EmbeddingSpace,
    test: &AssociationTest,
    words: &[S],
    config: &PConfig,
) -> Result<BatchOutput> {
    let results: Vec<_> = pool.install(|| {
        words
            .par_iter()
            .map(|w| evaluate_word(test, space, w.as_ref(), config))
            .collect()
    });
    let mut out = BatchOutput::default();
    for (w, r) in words.iter().zip(results) {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.skipped.push(SkippedWord {
                word: w.as_ref().to_string(),
                reason,
            }),
        }
    }
    if out.records.is_empty() {
        return Err(Error::Empty("no resolvable words in batch").into());
    }
    Ok(out)
}

/// Mean-cosine scores for every row of `space`, in rank order.
pub fn concept_scores(pool: &ThreadPool, scorer: &ConceptScorer, space: &EmbeddingSpace) -> Vec<ScoredWord> {
    let starts: Vec<usize> = (0..space.len()).step_by(CHUNK).collect();
    let parts: Vec<Vec<ScoredWord>> = pool.install(|| {
        starts
            .par_iter()
            .map(|&s| scorer.score_rows(space, s..(s + CHUNK).min(space.len())))
            .collect()
    });
    parts.concat()
}

/// Rated lexicon words in lexicon order, plus the count whose effect size
/// was undefined.
pub fn rate_lexicon(
    pool: &ThreadPool,
    space: &EmbeddingSpace,
    vad: &VadLexicon,
    test: &AssociationTest,
) -> (Vec<RatedWord>, usize) {
    let entries: Vec<_> = vad.iter().collect();
    let rated: Vec<_> = pool.install(|| {
        entries
            .par_iter()
            .filter_map(|&(w, v)| rate_word(space, test, w, v))
            .collect()
    });
    let mut out = Vec::with_capacity(rated.len());
    let mut failed = 0;
    for r in rated {
        match r {
            Ok(rw) => out.push(rw),
            Err(_) => failed += 1,
        }
    }
    (out, failed)
}

/// Criteria for the most frequent strongly associated words.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub count: usize,
    pub d_min: f64,
    /// Ignored when the permutation test is off.
    pub p_max: f64,
}

/// Scans the vocabulary in rank order and returns, per direction, the
/// first `count` words with the right sign, `|d| >= d_min` and (when the
/// test is on) `p < p_max`. p-values are only computed for words that pass
/// the effect-size filter, and for B-side words they test association with
/// B, so the kept records carry the p-value of their own direction.
pub fn scan_biased(
    pool: &ThreadPool,
    space: &EmbeddingSpace,
    test: &AssociationTest,
    config: &PConfig,
    sel: Selection,
) -> (Vec<AssociationRecord>, Vec<AssociationRecord>) {
    let d_only = PConfig { mode: None, ..*config };
    let swapped = test.swapped();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut start = 0;
    while start < space.len() && (a.len() < sel.count || b.len() < sel.count) {
        let end = (start + CHUNK).min(space.len());
        let found: Vec<Option<AssociationRecord>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let word = space.word(i);
                    let r = evaluate_word(test, space, word, &d_only).ok()?;
                    if r.effect_size.abs() < sel.d_min || r.effect_size == 0.0 {
                        return None;
                    }
                    if config.mode.is_none() {
                        return Some(r);
                    }
                    // one-sided toward the side the word leans to
                    let toward = if r.effect_size > 0.0 { test } else { &swapped };
                    let p = evaluate_word(toward, space, word, config).ok()?.p_value;
                    p.is_some_and(|p| p < sel.p_max)
                        .then_some(AssociationRecord { p_value: p, ..r })
                })
                .collect()
        });
        for r in found.into_iter().flatten() {
            let side = if r.effect_size > 0.0 { &mut a } else { &mut b };
            if side.len() < sel.count {
                side.push(r);
            }
        }
        start = end;
    }
    (a, b)
}
