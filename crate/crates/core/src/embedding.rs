//! Dense static word embeddings kept in frequency-rank order.
//!
//! Row order is the order of the source file, which for the published
//! GloVe and fastText releases is descending corpus frequency. Rank 1 is
//! the first row.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};

/// Vocabulary plus a row-major `len × dim` matrix of `f64` components.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    name: String,
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Vec<f64>,
    duplicates: usize,
}

/// Borrowed view of one row of an [`EmbeddingSpace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordVector<'a> {
    pub word: &'a str,
    pub components: &'a [f64],
}

impl EmbeddingSpace {
    pub fn new(name: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            matrix: Vec::new(),
            duplicates: 0,
        })
    }

    /// Builds a space from `(word, components)` rows. Duplicate tokens keep
    /// their first occurrence.
    pub fn from_rows<I, S, V>(name: impl Into<String>, dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, V)>,
        S: AsRef<str>,
        V: AsRef<[f64]>,
    {
        let mut space = Self::new(name, dim)?;
        for (word, components) in rows {
            space.push(word.as_ref(), components.as_ref())?;
        }
        Ok(space)
    }

    /// Appends a row at the next rank. Returns `Ok(false)` and leaves the
    /// space untouched when `word` is already present.
    pub fn push(&mut self, word: &str, components: &[f64]) -> Result<bool> {
        if components.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                row: self.words.len() + 1,
            });
        }
        if self.index.contains_key(word) {
            self.duplicates += 1;
            return Ok(false);
        }
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.matrix.extend_from_slice(components);
        Ok(true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of rows rejected by [`push`](Self::push) as duplicate tokens.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Zero-based row index of `word`.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// One-based frequency rank of `word`.
    pub fn rank(&self, word: &str) -> Option<usize> {
        self.index_of(word).map(|i| i + 1)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.matrix[index * self.dim..(index + 1) * self.dim]
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn get(&self, word: &str) -> Option<WordVector<'_>> {
        self.index_of(word).map(|i| WordVector {
            word: &self.words[i],
            components: self.row(i),
        })
    }

    pub fn vector(&self, word: &str) -> Result<WordVector<'_>> {
        self.get(word)
            .ok_or_else(|| Error::MissingWord(word.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = WordVector<'_>> + '_ {
        self.words
            .iter()
            .zip(self.matrix.chunks_exact(self.dim))
            .map(|(word, components)| WordVector { word, components })
    }

    /// The `n` most frequent tokens, clamped to the vocabulary size.
    pub fn top_n(&self, n: usize) -> &[String] {
        &self.words[..n.min(self.words.len())]
    }

    /// Copy with every component multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.matrix.iter_mut().for_each(|c| *c *= factor);
        out
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    libm::sqrt(dot(u, u))
}

/// Cosine of the angle between `u` and `v`, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Unit-length copy of `u`.
pub fn normalized(u: &[f64]) -> Result<Vec<f64>> {
    let n = norm(u);
    if n == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(u.iter().map(|c| c / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn abc() -> EmbeddingSpace {
        EmbeddingSpace::from_rows(
            "t",
            2,
            [("a", [1.0, 0.0]), ("b", [0.0, 1.0]), ("c", [1.0, 1.0])],
        )
        .unwrap()
    }

    #[test]
    fn cosine_trivial_cases() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm));
    }

    #[test]
    fn cosine_clamps_overshoot() {
        let u = [0.1, 0.2, 0.3];
        let c = cosine(&u, &u).unwrap();
        assert!(c <= 1.0);
    }

    #[test]
    fn top_n_prefix_and_clamp() {
        let s = abc();
        assert_eq!(s.top_n(2), &["a".to_string(), "b".to_string()]);
        assert_eq!(s.top_n(10).len(), 3);
    }

    #[test]
    fn duplicate_keeps_first() {
        let mut s = abc();
        assert!(!s.push("a", &[5.0, 5.0]).unwrap());
        assert_eq!(s.duplicates(), 1);
        assert_eq!(s.row(0), &[1.0, 0.0]);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn push_rejects_bad_rows() {
        let mut s = abc();
        assert!(matches!(
            s.push("d", &[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            s.push("d", &[f64::NAN, 1.0]),
            Err(Error::NonFinite { row: 4 })
        ));
    }

    #[test]
    fn rank_is_one_based() {
        let s = abc();
        assert_eq!(s.rank("a"), Some(1));
        assert_eq!(s.rank("c"), Some(3));
        assert_eq!(s.rank("z"), None);
        assert_eq!(s.vector("b").unwrap().components, &vec![0.0, 1.0][..]);
    }
}
