//! Bag-of-words, tf-idf and averaged word-embedding document vectors built from
//! participant turns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{is_annotation, Session};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TextMode {
    /// 1 when the term occurs, regardless of count.
    Bool,
    /// Raw count times `ln(n_docs / df) + 1`.
    Tfidf,
}

/// All participant tokens of a session in order, lowercased, annotations kept.
pub fn build_document<T: Real>(session: &Session<T>) -> Vec<String> {
    session
        .participant_turns()
        .flat_map(|t| t.tokens.iter().map(|s| s.to_lowercase()))
        .collect()
}

/// Training vocabulary with document frequencies.
///
/// Terms are indexed in sorted order. Only training documents feed it, so
/// vectorizing held-out documents never changes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_parts(r.terms, r.doc_freq, r.n_docs)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            doc_freq: v.doc_freq,
            n_docs: v.n_docs,
        }
    }
}

impl Vocabulary {
    pub fn fit(docs: &[Vec<String>]) -> Result<Self> {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let unique: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
            for term in unique {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(Error::EmptyInput("vocabulary would be empty".into()));
        }
        let terms: Vec<String> = df.keys().map(|s| s.to_string()).collect();
        let doc_freq = df.values().copied().collect();
        Ok(Self::from_parts(terms, doc_freq, docs.len()))
    }

    fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, n_docs: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            terms,
            index,
            doc_freq,
            n_docs,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// `ln(n_docs / df(t)) + 1`.
    pub fn idf<T: Real>(&self, term_index: usize) -> T {
        let ratio = self.n_docs as f64 / self.doc_freq[term_index] as f64;
        T::lit(ratio.ln() + 1.0)
    }
}

/// One dense row per document; out-of-vocabulary tokens are ignored.
pub fn vectorize<T: Real>(docs: &[Vec<String>], vocab: &Vocabulary, mode: TextMode) -> Result<Vec<Vec<T>>> {
    if vocab.is_empty() {
        return Err(Error::EmptyInput("empty vocabulary".into()));
    }
    let idf: Vec<T> = (0..vocab.len()).map(|i| vocab.idf(i)).collect();
    Ok(docs
        .iter()
        .map(|doc| {
            let mut counts = vec![0usize; vocab.len()];
            for tok in doc {
                if let Some(i) = vocab.index_of(tok) {
                    counts[i] += 1;
                }
            }
            counts
                .iter()
                .zip(&idf)
                .map(|(&c, &w)| match mode {
                    TextMode::Bool => {
                        if c > 0 {
                            T::one()
                        } else {
                            T::zero()
                        }
                    }
                    TextMode::Tfidf => T::from_usize_lossy(c) * w,
                })
                .collect()
        })
        .collect())
}

/// Pre-trained word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    vectors: HashMap<String, Vec<T>>,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn new(dim: usize, vectors: HashMap<String, Vec<T>>) -> Result<Self> {
        if let Some((tok, v)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::InvalidArgument(format!(
                "embedding for {tok:?} has dimension {}, expected {dim}",
                v.len()
            )));
        }
        Ok(EmbeddingTable { dim, vectors })
    }

    /// Parses `token v1 ... vd` lines. The dimension comes from the first
    /// vector line; a leading `count dim` header line, as word2vec writes, is skipped.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if idx == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
                continue;
            }
            let values = fields[1..]
                .iter()
                .map(|f| f.parse::<T>())
                .collect::<std::result::Result<Vec<T>, _>>()
                .map_err(|_| Error::parse(origin, idx + 1, "non-numeric embedding value"))?;
            let d = *dim.get_or_insert(values.len());
            if d == 0 || values.len() != d {
                return Err(Error::parse(
                    origin,
                    idx + 1,
                    format!("expected {d} values, found {}", values.len()),
                ));
            }
            vectors.insert(fields[0].to_lowercase(), values);
        }
        let dim = dim.ok_or_else(|| Error::EmptyInput("embedding file has no vectors".into()))?;
        Ok(EmbeddingTable { dim, vectors })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[T]> {
        self.vectors.get(token).map(Vec::as_slice)
    }
}

/// Mean of the vectors of tokens found in the table. Annotations have no
/// pre-trained vectors and are skipped; a document with no hits maps to zeros.
pub fn embed_average<T: Real>(doc: &[String], table: &EmbeddingTable<T>) -> Result<Vec<T>> {
    if table.is_empty() {
        return Err(Error::EmptyInput("empty embedding table".into()));
    }
    let mut acc = vec![T::zero(); table.dim()];
    let mut hits = 0usize;
    for tok in doc.iter().filter(|t| !is_annotation(t)) {
        if let Some(v) = table.get(tok) {
            for (a, &x) in acc.iter_mut().zip(v) {
                *a += x;
            }
            hits += 1;
        }
    }
    if hits > 0 {
        let n = T::from_usize_lossy(hits);
        acc.iter_mut().for_each(|a| *a /= n);
    }
    Ok(acc)
}
