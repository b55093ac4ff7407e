//! Documents, keywords and bag-of-words vectors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::Label;
use crate::error::{Error, Result};

/// Lowercase the text and split it on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    TrainUnlabeled,
    ValidationUnlabeled,
    TestLabeled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub text: String,
    /// Ground truth. Only test documents are required to carry it, and the
    /// pipeline reads it for evaluation and purity accounting only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::invalid(format!("duplicate document id `{}`", d.id)));
            }
            if d.split == Split::TestLabeled && d.label.is_none() {
                return Err(Error::invalid(format!("test document `{}` has no label", d.id)));
            }
        }
        Ok(Corpus { documents })
    }

    /// One JSON object per line: `id`, `text`, optional `label` (+1/-1), `split`.
    pub fn from_jsonl(text: &str, origin: &Path) -> Result<Self> {
        let mut docs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                message: format!("line {}: {e}", i + 1),
            })?;
            docs.push(doc);
        }
        Self::new(docs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text, path)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for d in &self.documents {
            out.push_str(&serde_json::to_string(d)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn split(&self, split: Split) -> Vec<&Document> {
        self.documents.iter().filter(|d| d.split == split).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }
}

/// Relevant keywords for the positive class: lowercase, trimmed, deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    words: Vec<String>,
}

impl KeywordSet {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for w in words {
            let w = w.as_ref().trim().to_lowercase();
            if !w.is_empty() && seen.insert(w.clone()) {
                out.push(w);
            }
        }
        if out.is_empty() {
            return Err(Error::config("keyword set is empty"));
        }
        Ok(KeywordSet { words: out })
    }

    /// One keyword per line; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Tokens of all keywords, through the same tokenizer as documents.
    pub fn tokens(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.words
            .iter()
            .flat_map(|w| tokenize(w))
            .filter(|t| seen.insert(t.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Tf,
    TfIdf,
}

/// Vocabulary ordered by (document frequency desc, token asc).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vectorizer {
    vocabulary: Vec<String>,
    document_frequency: Vec<usize>,
    n_documents: usize,
    scheme: Scheme,
    min_doc_freq: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vectorizer {
    pub fn build(corpus: &Corpus, scheme: Scheme, min_doc_freq: usize) -> Result<Self> {
        let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
        Self::from_texts(&texts, scheme, min_doc_freq)
    }

    pub fn from_texts(texts: &[&str], scheme: Scheme, min_doc_freq: usize) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::invalid("cannot build a vocabulary from an empty corpus"));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for t in texts {
            let unique: HashSet<String> = tokenize(t).into_iter().collect();
            for tok in unique {
                *df.entry(tok).or_default() += 1;
            }
        }
        let mut entries: Vec<(String, usize)> = df.into_iter().filter(|(_, c)| *c >= min_doc_freq).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if entries.is_empty() {
            return Err(Error::config(format!("no token reaches min_doc_freq = {min_doc_freq}")));
        }
        let (vocabulary, document_frequency): (Vec<String>, Vec<usize>) = entries.into_iter().unzip();
        let index = vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vectorizer {
            vocabulary,
            document_frequency,
            n_documents: texts.len(),
            scheme,
            min_doc_freq,
            index,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn document_frequency(&self) -> &[usize] {
        &self.document_frequency
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    fn idf(&self, i: usize) -> f64 {
        ((1.0 + self.n_documents as f64) / (1.0 + self.document_frequency[i] as f64)).ln() + 1.0
    }

    /// Dense term vector; out-of-vocabulary tokens are dropped.
    pub fn transform(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.vocabulary.len()];
        for tok in tokenize(text) {
            if let Some(i) = self.index_of(&tok) {
                v[i] += 1.0;
            }
        }
        if self.scheme == Scheme::TfIdf {
            for (i, x) in v.iter_mut().enumerate() {
                if *x > 0.0 {
                    *x *= self.idf(i);
                }
            }
        }
        v
    }

    /// Binary indicator over the vocabulary of the keyword tokens.
    pub fn keyword_vector(&self, keywords: &KeywordSet) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.vocabulary.len()];
        let mut hits = 0;
        for tok in keywords.tokens() {
            if let Some(i) = self.index_of(&tok) {
                v[i] = 1.0;
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(Error::config(format!(
                "none of the keywords {:?} is in the vocabulary",
                keywords.words()
            )));
        }
        Ok(v)
    }
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Scale to unit Euclidean norm; zero vectors are left alone.
pub fn l2_normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
