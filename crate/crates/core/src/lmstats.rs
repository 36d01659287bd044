//! Open-vocabulary statistics and a small n-gram scorer.
//!
//! The n-gram model is a desk-scale stand-in for the chain-rule probability
//! of a target sequence: it conditions only on the previous `n - 1` target
//! tokens (no source sentence), pads with begin delimiters and closes every
//! sequence with an end delimiter.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::corpus::Corpus;
use crate::segcore::Segmenter;
use crate::{Error, Result};

/// Embedding-matrix sizes above this many parameters are flagged.
pub const EMBEDDING_PARAM_BOUND: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabBudget {
    pub vocab_size: u64,
    pub embedding_dim: u64,
    pub param_count: u64,
}

impl VocabBudget {
    pub fn exceeds_bound(&self) -> bool {
        self.param_count > EMBEDDING_PARAM_BOUND
    }
}

/// Parameters in a `vocab_size × embedding_dim` embedding matrix.
pub fn embedding_param_count(vocab_size: u64, embedding_dim: u64) -> Result<VocabBudget> {
    if vocab_size == 0 || embedding_dim == 0 {
        return Err(Error::Domain(
            "vocabulary size and embedding dimension must be positive".into(),
        ));
    }
    let param_count = vocab_size
        .checked_mul(embedding_dim)
        .ok_or_else(|| Error::Domain("parameter count overflows u64".into()))?;
    Ok(VocabBudget {
        vocab_size,
        embedding_dim,
        param_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OovRate {
    pub oov_types: usize,
    pub types: usize,
    pub oov_tokens: u64,
    pub tokens: u64,
}

impl OovRate {
    pub fn type_rate(&self) -> f64 {
        self.oov_types as f64 / self.types as f64
    }

    pub fn token_rate(&self) -> f64 {
        self.oov_tokens as f64 / self.tokens as f64
    }
}

/// Fraction of `eval` types (and tokens) missing from `vocab`.
pub fn oov_rate<S>(vocab: &HashSet<S>, eval: &Corpus) -> Result<OovRate>
where
    S: AsRef<str> + std::hash::Hash + Eq + std::borrow::Borrow<str>,
{
    if vocab.is_empty() {
        return Err(Error::EmptyInput("vocabulary is empty"));
    }
    if eval.is_empty() {
        return Err(Error::EmptyInput("evaluation corpus is empty"));
    }
    let mut rate = OovRate {
        oov_types: 0,
        types: eval.type_count(),
        oov_tokens: 0,
        tokens: eval.total_tokens(),
    };
    for (word, count) in eval.word_types() {
        if !vocab.contains(word) {
            rate.oov_types += 1;
            rate.oov_tokens += count;
        }
    }
    Ok(rate)
}

/// Re-expresses a corpus as counts of the segments `segmenter` produces.
pub fn segment_corpus(corpus: &Corpus, segmenter: &dyn Segmenter) -> Result<Corpus> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (word, count) in corpus.word_types() {
        for seg in segmenter.segment(word)?.segments() {
            *counts.entry(seg.clone()).or_insert(0) += count;
        }
    }
    Corpus::from_counts(counts)
}

pub const BEGIN: &str = "<s>";
pub const END: &str = "</s>";
pub const UNKNOWN: &str = "<unk>";

const MODEL_MAGIC: &str = "#segmenta-ngram v1";

/// Add-k smoothed n-gram model.
///
/// Next-token distributions range over the observed tokens plus the end
/// delimiter and an unknown-token slot; with `k > 0` they sum to one for every
/// context, seen or not. `k == 0` disables smoothing, in which case unknown
/// tokens and unseen contexts are scoring errors.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramLM {
    order: usize,
    k: f64,
    unit: String,
    outcomes: BTreeSet<String>,
    contexts: BTreeMap<Vec<String>, ContextCounts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct ContextCounts {
    next: BTreeMap<String, u64>,
    total: u64,
}

fn check_order_and_k(n: usize, k: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n-gram order must be at least 1".into()));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Domain(format!(
            "smoothing constant {k} must be finite and >= 0"
        )));
    }
    Ok(())
}

pub fn train_ngram<S: AsRef<str>>(sequences: &[Vec<S>], n: usize, k: f64) -> Result<NGramLM> {
    check_order_and_k(n, k)?;
    if !sequences.iter().any(|s| !s.is_empty()) {
        return Err(Error::EmptyInput("no nonempty training sequence"));
    }
    let mut lm = NGramLM {
        order: n,
        k,
        unit: String::new(),
        outcomes: [END, UNKNOWN].map(String::from).into(),
        contexts: BTreeMap::new(),
    };
    for seq in sequences.iter().filter(|s| !s.is_empty()) {
        for tok in seq {
            let tok = tok.as_ref();
            if [BEGIN, END, UNKNOWN].contains(&tok) {
                return Err(Error::Domain(format!(
                    "{tok:?} is a reserved delimiter token"
                )));
            }
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(Error::Domain(format!(
                    "token {tok:?} is empty or has whitespace"
                )));
            }
            lm.outcomes.insert(tok.to_owned());
        }
        let padded = pad(seq.iter().map(AsRef::as_ref), n);
        for window in padded.windows(n) {
            let (ctx, next) = window.split_at(n - 1);
            let entry = lm.contexts.entry(ctx.to_vec()).or_default();
            *entry.next.entry(next[0].clone()).or_insert(0) += 1;
            entry.total += 1;
        }
    }
    Ok(lm)
}

fn pad<'a>(tokens: impl Iterator<Item = &'a str>, n: usize) -> Vec<String> {
    let mut out: Vec<String> = std::iter::repeat_n(BEGIN.to_owned(), n - 1).collect();
    out.extend(tokens.map(str::to_owned));
    out.push(END.to_owned());
    out
}

impl NGramLM {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Free-form label of the token unit (`chars`, `words`, `bpe:<table>`).
    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }

    /// The outcome set: observed tokens, the end delimiter and `<unk>`.
    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.outcomes
    }

    pub fn contains(&self, token: &str) -> bool {
        self.outcomes.contains(token) && token != UNKNOWN
    }

    pub fn contexts(&self) -> impl Iterator<Item = &[String]> + '_ {
        self.contexts.keys().map(Vec::as_slice)
    }

    /// Raw count of `next` after `context`.
    pub fn count(&self, context: &[String], next: &str) -> u64 {
        self.contexts
            .get(context)
            .and_then(|c| c.next.get(next))
            .copied()
            .unwrap_or(0)
    }

    /// p(next | context). `next` must be an outcome (map unknown tokens to `<unk>` first).
    pub fn prob(&self, context: &[String], next: &str) -> Result<f64> {
        if !self.outcomes.contains(next) {
            return Err(Error::OovScoring {
                token: next.to_owned(),
            });
        }
        let v = self.outcomes.len() as f64;
        let (c, total) = match self.contexts.get(context) {
            Some(cc) => (cc.next.get(next).copied().unwrap_or(0), cc.total),
            None => (0, 0),
        };
        let denom = total as f64 + self.k * v;
        if denom == 0.0 {
            return Err(Error::UnseenContext {
                context: context.to_vec(),
            });
        }
        Ok((c as f64 + self.k) / denom)
    }

    /// Full next-token distribution for a context, in outcome order.
    pub fn distribution(&self, context: &[String]) -> Result<Vec<(&str, f64)>> {
        self.outcomes
            .iter()
            .map(|t| Ok((t.as_str(), self.prob(context, t)?)))
            .collect()
    }

    /// Largest |Σ p − 1| over all stored contexts.
    pub fn max_normalization_error(&self) -> f64 {
        self.contexts
            .keys()
            .map(|ctx| {
                let sum: f64 = self
                    .distribution(ctx)
                    .map(|d| d.iter().map(|(_, p)| p).sum())
                    .unwrap_or(f64::NAN);
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Natural-log probability of `tokens` followed by the end delimiter.
    ///
    /// Tokens outside the vocabulary score as `<unk>` when smoothing is on and
    /// raise [`Error::OovScoring`] when it is off. An observed context with a
    /// zero count under `k = 0` gives negative infinity.
    pub fn sequence_log_prob<S: AsRef<str>>(&self, tokens: &[S]) -> Result<f64> {
        if tokens.is_empty() {
            return Err(Error::EmptyInput("cannot score an empty sequence"));
        }
        let mapped: Vec<&str> = tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                if self.contains(t) && t != END {
                    Ok(t)
                } else if self.k > 0.0 {
                    Ok(UNKNOWN)
                } else {
                    Err(Error::OovScoring {
                        token: t.to_owned(),
                    })
                }
            })
            .collect::<Result<_>>()?;
        let padded = pad(mapped.into_iter(), self.order);
        let mut total = 0.0;
        for window in padded.windows(self.order) {
            let (ctx, next) = window.split_at(self.order - 1);
            total += self.prob(ctx, &next[0])?.ln();
        }
        Ok(total)
    }

    /// Versioned text format: a header line, then `context<TAB>token<TAB>count`
    /// with context tokens separated by single spaces.
    pub fn to_file_string(&self) -> String {
        let mut out = format!(
            "{MODEL_MAGIC} n={} k={} unit={}\n",
            self.order, self.k, self.unit
        );
        for (ctx, counts) in &self.contexts {
            let ctx = ctx.join(" ");
            for (tok, c) in &counts.next {
                let _ = writeln!(out, "{ctx}\t{tok}\t{c}");
            }
        }
        out
    }

    pub fn from_file_str(text: &str) -> Result<NGramLM> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?;
        let rest = header
            .strip_prefix(MODEL_MAGIC)
            .ok_or_else(|| Error::parse(1, format!("expected `{MODEL_MAGIC}` header")))?;
        let (mut n, mut k, mut unit) = (None, None, String::new());
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("k", v)) => k = v.parse::<f64>().ok(),
                Some(("unit", v)) => unit = v.to_owned(),
                _ => return Err(Error::parse(1, format!("unknown header field {field:?}"))),
            }
        }
        let (Some(n), Some(k)) = (n, k) else {
            return Err(Error::parse(1, "header needs numeric n= and k="));
        };
        check_order_and_k(n, k).map_err(|e| Error::parse(1, e.to_string()))?;
        let mut lm = NGramLM {
            order: n,
            k,
            unit,
            outcomes: [END, UNKNOWN].map(String::from).into(),
            contexts: BTreeMap::new(),
        };
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [ctx, tok, count] = fields[..] else {
                return Err(Error::parse(lineno, "expected context<TAB>token<TAB>count"));
            };
            let ctx: Vec<String> = if ctx.is_empty() {
                Vec::new()
            } else {
                ctx.split(' ').map(str::to_owned).collect()
            };
            if ctx.len() != n - 1 {
                return Err(Error::parse(
                    lineno,
                    format!("context has {} tokens, expected {}", ctx.len(), n - 1),
                ));
            }
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| Error::parse(lineno, format!("bad count {count:?}")))?;
            if tok == BEGIN || tok == UNKNOWN || tok.is_empty() {
                return Err(Error::parse(lineno, format!("{tok:?} cannot be predicted")));
            }
            lm.outcomes.insert(tok.to_owned());
            let entry = lm.contexts.entry(ctx).or_default();
            if entry.next.insert(tok.to_owned(), count).is_some() {
                return Err(Error::parse(lineno, "duplicate context/token row"));
            }
            entry.total += count;
        }
        Ok(lm)
    }
}
