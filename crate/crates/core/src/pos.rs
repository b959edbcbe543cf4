//! Part-of-speech breakdown of the most frequent associated words.
//!
//! Tags come from an externally produced word→tag lexicon (Penn Treebank
//! inventory). Tag families are matched by prefix, so `NNPS` counts as a
//! noun and as a plural proper noun.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

pub const DEFAULT_CUTOFFS: [usize; 4] = [1_000, 2_500, 5_000, 10_000];

/// Case-sensitive word→tag map, one tag per word.
#[derive(Debug, Clone, Default)]
pub struct PosLexicon {
    tags: HashMap<String, String>,
    duplicates: usize,
}

impl PosLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Later entries replace earlier ones; replacements are counted.
    pub fn insert(&mut self, word: &str, tag: &str) {
        if self.tags.insert(word.to_string(), tag.to_string()).is_some() {
            self.duplicates += 1;
        }
    }

    pub fn tag(&self, word: &str) -> Option<&str> {
        self.tags.get(word).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }
}

impl<'a> FromIterator<(&'a str, &'a str)> for PosLexicon {
    fn from_iter<I: IntoIterator<Item = (&'a str, &'a str)>>(iter: I) -> Self {
        let mut lex = Self::new();
        for (w, t) in iter {
            lex.insert(w, t);
        }
        lex
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coarse {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NounKind {
    SingularCommon,
    SingularProper,
    PluralCommon,
    PluralProper,
}

pub fn coarse_tag(tag: &str) -> Coarse {
    if tag.starts_with("NN") {
        Coarse::Noun
    } else if tag.starts_with("VB") {
        Coarse::Verb
    } else if tag.starts_with("JJ") {
        Coarse::Adjective
    } else if tag.starts_with("RB") {
        Coarse::Adverb
    } else {
        Coarse::Other
    }
}

/// Noun subtype; any `NN*` tag outside the four standard ones counts as
/// singular common so the subtypes always add up to the noun total.
pub fn noun_kind(tag: &str) -> Option<NounKind> {
    match tag {
        "NNPS" => Some(NounKind::PluralProper),
        "NNP" => Some(NounKind::SingularProper),
        "NNS" => Some(NounKind::PluralCommon),
        t if t.starts_with("NN") => Some(NounKind::SingularCommon),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PosCounts {
    pub total: usize,
    pub nouns: usize,
    pub verbs: usize,
    pub adjectives: usize,
    pub adverbs: usize,
    pub other: usize,
    pub singular_common: usize,
    pub singular_proper: usize,
    pub plural_common: usize,
    pub plural_proper: usize,
}

impl PosCounts {
    fn add(&mut self, tag: Option<&str>) {
        self.total += 1;
        let Some(tag) = tag else {
            self.other += 1;
            return;
        };
        match coarse_tag(tag) {
            Coarse::Noun => self.nouns += 1,
            Coarse::Verb => self.verbs += 1,
            Coarse::Adjective => self.adjectives += 1,
            Coarse::Adverb => self.adverbs += 1,
            Coarse::Other => self.other += 1,
        }
        match noun_kind(tag) {
            Some(NounKind::SingularCommon) => self.singular_common += 1,
            Some(NounKind::SingularProper) => self.singular_proper += 1,
            Some(NounKind::PluralCommon) => self.plural_common += 1,
            Some(NounKind::PluralProper) => self.plural_proper += 1,
            None => {}
        }
    }

    pub fn coarse(&self, c: Coarse) -> usize {
        match c {
            Coarse::Noun => self.nouns,
            Coarse::Verb => self.verbs,
            Coarse::Adjective => self.adjectives,
            Coarse::Adverb => self.adverbs,
            Coarse::Other => self.other,
        }
    }

    pub fn noun(&self, k: NounKind) -> usize {
        match k {
            NounKind::SingularCommon => self.singular_common,
            NounKind::SingularProper => self.singular_proper,
            NounKind::PluralCommon => self.plural_common,
            NounKind::PluralProper => self.plural_proper,
        }
    }
}

/// Counts at each cutoff for the A- and B-associated lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosTable {
    pub cutoffs: Vec<usize>,
    pub a: Vec<PosCounts>,
    pub b: Vec<PosCounts>,
}

/// Tallies the first `N` words of each list for every cutoff `N`.
/// Words missing from the lexicon count as `Other`.
pub fn pos_distribution<S: AsRef<str>>(
    a_words: &[S],
    b_words: &[S],
    lexicon: &PosLexicon,
    cutoffs: &[usize],
) -> PosTable {
    let tally = |words: &[S]| -> Vec<PosCounts> {
        cutoffs
            .iter()
            .map(|&n| {
                let mut c = PosCounts::default();
                for w in words.iter().take(n) {
                    c.add(lexicon.tag(w.as_ref()));
                }
                c
            })
            .collect()
    };
    PosTable {
        cutoffs: cutoffs.to_vec(),
        a: tally(a_words),
        b: tally(b_words),
    }
}
