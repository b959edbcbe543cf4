//! Single-category word embedding association tests over static word
//! embeddings, with the analyses built on top of them: frequency tables,
//! clustering of strongly associated words, part-of-speech and
//! valence/arousal/dominance breakdowns, concept probes and t-SNE.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, parallel
//! fan-out and the command-line front end live in the `scweat` crate.

#![no_std]

extern crate alloc;

pub mod association;
pub mod clustering;
pub mod concept;
pub mod embedding;
pub mod error;
pub mod frequency;
pub mod lexicon;
pub mod pos;
pub mod projection;
pub mod seed;

pub use association::{
    batch_associations, classify_effect, permutation_p, sc_weat, AssociationRecord,
    AssociationTest, AttributeSet, Direction, EffectClass, Magnitude, PConfig, PermutationMode,
};
pub use embedding::{cosine, EmbeddingSpace, WordVector};
pub use error::{Error, Result};
