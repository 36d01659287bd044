//! Word-type frequency tables.
//!
//! A [`Corpus`] is the lexical projection of a text: each distinct normalized
//! whitespace-delimited token with the number of times it occurred. Counts are
//! exact integers; nothing downstream (BPE training in particular) ever works
//! with float frequencies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Token normalization applied before counting.
///
/// Tokens are always split on Unicode whitespace. Both transforms are
/// idempotent, so normalizing an already-normalized token is a no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NormConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl NormConfig {
    pub fn lowercase() -> Self {
        NormConfig {
            lowercase: true,
            strip_punctuation: false,
        }
    }

    /// Normalizes a single token. May return an empty string when the token
    /// consisted only of punctuation.
    pub fn normalize(&self, token: &str) -> String {
        let mut out: String = if self.strip_punctuation {
            token.chars().filter(|&c| !is_punctuation(c)).collect()
        } else {
            token.to_owned()
        };
        if self.lowercase {
            out = out.to_lowercase();
        }
        out
    }
}

// ASCII punctuation plus the General Punctuation block and the common
// Latin-1 quotation/inversion marks.
fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || ('\u{2010}'..='\u{205E}').contains(&c)
        || matches!(c, '¡' | '¿' | '«' | '»' | '§' | '¶')
}

/// Normalized word types with occurrence counts.
///
/// Invariants: every count is positive, no word is empty, and word types are
/// unique. Iteration order is lexicographic by word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    types: BTreeMap<String, u64>,
    total: u64,
    source_id: String,
    normalization: NormConfig,
}

impl Corpus {
    /// Counts whitespace-delimited tokens in `bytes`, which must be UTF-8.
    pub fn load(bytes: &[u8], cfg: &NormConfig) -> Result<Corpus> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Decode {
            offset: e.valid_up_to(),
        })?;
        Corpus::from_text(text, cfg)
    }

    pub fn from_text(text: &str, cfg: &NormConfig) -> Result<Corpus> {
        let mut types = BTreeMap::new();
        for token in text.split_whitespace() {
            let word = cfg.normalize(token);
            if word.is_empty() {
                continue;
            }
            *types.entry(word).or_insert(0u64) += 1;
        }
        let total = types.values().sum();
        Ok(Corpus {
            types,
            total,
            source_id: String::new(),
            normalization: *cfg,
        })
    }

    /// Builds a corpus from explicit `(word, count)` pairs.
    ///
    /// Fails on empty words, zero counts, words containing whitespace, or a
    /// word listed twice.
    pub fn from_counts<I, S>(counts: I) -> Result<Corpus>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut types = BTreeMap::new();
        for (word, count) in counts {
            let word = word.into();
            validate_type(&word, count)?;
            if types.insert(word.clone(), count).is_some() {
                return Err(Error::Integrity(format!("duplicate word type {word:?}")));
            }
        }
        let total = types.values().sum();
        Ok(Corpus {
            types,
            total,
            source_id: String::new(),
            normalization: NormConfig::default(),
        })
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn normalization(&self) -> NormConfig {
        self.normalization
    }

    /// Word types in lexicographic order.
    pub fn word_types(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.types.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn count(&self, word: &str) -> u64 {
        self.types.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.types.contains_key(word)
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Parses the `word<TAB>count` frequency-table format.
    pub fn read_frequency_table(text: &str) -> Result<Corpus> {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "expected word<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad count {count:?}")))?;
            validate_type(word, count).map_err(|e| Error::parse(lineno, e.to_string()))?;
            pairs.push((word.to_owned(), count));
        }
        let mut seen = BTreeMap::new();
        for (lineno, (word, _)) in pairs.iter().enumerate() {
            if let Some(prev) = seen.insert(word.as_str(), lineno) {
                return Err(Error::parse(
                    lineno + 1,
                    format!(
                        "duplicate word type {word:?} (first seen as entry {})",
                        prev + 1
                    ),
                ));
            }
        }
        Corpus::from_counts(pairs)
    }

    pub fn write_frequency_table(&self) -> String {
        let mut out = String::new();
        for (word, count) in self.word_types() {
            let _ = writeln!(out, "{word}\t{count}");
        }
        out
    }
}

fn validate_type(word: &str, count: u64) -> Result<()> {
    if word.is_empty() {
        return Err(Error::Integrity("empty word type".into()));
    }
    if word.chars().any(char::is_whitespace) {
        return Err(Error::Integrity(format!(
            "word {word:?} contains whitespace"
        )));
    }
    if count == 0 {
        return Err(Error::Integrity(format!("word {word:?} has zero count")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankEntry {
    pub rank: usize,
    pub word: String,
    pub count: u64,
}

/// Exact rank/frequency profile of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZipfStats {
    ranks: Vec<RankEntry>,
    // cumulative[k] = tokens covered by the top k types
    cumulative: Vec<u64>,
}

impl ZipfStats {
    /// Ranks are 1-based. Ties in count fall back to lexicographic word order.
    pub fn rank_frequency(&self) -> &[RankEntry] {
        &self.ranks
    }

    pub fn total_tokens(&self) -> u64 {
        *self.cumulative.last().unwrap_or(&0)
    }

    /// Tokens covered by the `k` most frequent types; `k` saturates at the
    /// number of types.
    pub fn head_tokens(&self, k: usize) -> u64 {
        self.cumulative[k.min(self.ranks.len())]
    }

    /// Fraction of all tokens covered by the `k` most frequent types.
    pub fn head_mass(&self, k: usize) -> f64 {
        self.head_tokens(k) as f64 / self.total_tokens() as f64
    }

    /// Number of types occurring at most `threshold` times.
    pub fn tail_count(&self, threshold: u64) -> usize {
        self.ranks.iter().filter(|e| e.count <= threshold).count()
    }
}

pub fn zipf_profile(corpus: &Corpus) -> Result<ZipfStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus has no word types"));
    }
    let mut entries: Vec<(&str, u64)> = corpus.word_types().collect();
    // stable sort keeps the lexicographic order of the BTreeMap among ties
    entries.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
    let mut cumulative = Vec::with_capacity(entries.len() + 1);
    cumulative.push(0);
    let ranks = entries
        .into_iter()
        .enumerate()
        .map(|(i, (word, count))| {
            cumulative.push(cumulative[i] + count);
            RankEntry {
                rank: i + 1,
                word: word.to_owned(),
                count,
            }
        })
        .collect();
    Ok(ZipfStats { ranks, cumulative })
}
