//! Byte-pair-encoding merge tables.
//!
//! Training starts from a character split of every word type (with the
//! end-of-word marker appended as an ordinary trailing symbol) and repeatedly
//! merges the adjacent pair with the largest count, weighted by word
//! frequency. Inference replays the learned merges in the order they were
//! learned; it never looks at corpus counts.
//!
//! Ties between equally frequent pairs are resolved by scanning word types
//! in (descending count, lexicographic word) order, each word left to right,
//! and taking the first tied pair encountered. On the classic 18-token
//! `low/lowest/newer/wider/new` corpus this picks `(n,e)` over `(e,w)` and
//! `(l,o)` over `(o,w)`, reproducing the usual eight-merge table.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::segcore::{MarkerPolicy, MarkerPosition, Origin, Segmentation, Segmenter};
use crate::{Error, Result};

pub const TABLE_MAGIC: &str = "#segmenta-bpe v1";

/// How many merges to learn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Merges(usize),
    /// Final vocabulary size; converted to `target - |seed alphabet|` merges
    /// (zero when the seed alphabet is already that large).
    VocabSize(usize),
}

impl Budget {
    pub fn merge_count(self, seed_size: usize) -> usize {
        match self {
            Budget::Merges(n) => n,
            Budget::VocabSize(v) => v.saturating_sub(seed_size),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Merge {
    pub left: String,
    pub right: String,
}

impl Merge {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Self {
        Merge {
            left: left.into(),
            right: right.into(),
        }
    }

    pub fn merged(&self) -> String {
        format!("{}{}", self.left, self.right)
    }
}

/// An ordered list of merges over a seed alphabet.
///
/// Every merge introduces exactly one new vocabulary symbol, so
/// `vocab().len() == seed_alphabet().len() + merges().len()`, and both sides
/// of merge `i` are seed symbols or products of merges before `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTable {
    merges: Vec<Merge>,
    seed: BTreeSet<String>,
    marker: MarkerPolicy,
    // vocabulary in learned order: seed (sorted) then one symbol per merge
    vocab: IndexMap<String, ()>,
}

impl MergeTable {
    /// Validates and assembles a table.
    pub fn new(
        seed: BTreeSet<String>,
        merges: Vec<Merge>,
        marker: MarkerPolicy,
    ) -> Result<MergeTable> {
        let mut vocab: IndexMap<String, ()> = IndexMap::new();
        for sym in &seed {
            if sym.chars().count() != 1 {
                return Err(Error::Integrity(format!(
                    "seed symbol {sym:?} is not a single character"
                )));
            }
            vocab.insert(sym.clone(), ());
        }
        if marker.is_enabled() && !seed.contains(&marker.symbol.to_string()) {
            return Err(Error::Integrity(format!(
                "seed alphabet lacks the end-of-word marker {:?}",
                marker.symbol
            )));
        }
        for (i, m) in merges.iter().enumerate() {
            for side in [&m.left, &m.right] {
                if !vocab.contains_key(side.as_str()) {
                    return Err(Error::Integrity(format!(
                        "merge {} ({} {}) uses {side:?} before it is defined",
                        i + 1,
                        m.left,
                        m.right
                    )));
                }
            }
            if marker.is_enabled() && m.left.contains(marker.symbol) {
                return Err(Error::Integrity(format!(
                    "merge {} puts the end-of-word marker on the left",
                    i + 1
                )));
            }
            if vocab.insert(m.merged(), ()).is_some() {
                return Err(Error::Integrity(format!(
                    "merge {} ({} {}) produces existing symbol {:?}",
                    i + 1,
                    m.left,
                    m.right,
                    m.merged()
                )));
            }
        }
        Ok(MergeTable {
            merges,
            seed,
            marker,
            vocab,
        })
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn seed_alphabet(&self) -> &BTreeSet<String> {
        &self.seed
    }

    pub fn marker(&self) -> MarkerPolicy {
        self.marker
    }

    /// Vocabulary in learned order: sorted seed alphabet, then merge products.
    pub fn vocab(&self) -> impl Iterator<Item = &str> + '_ {
        self.vocab.keys().map(String::as_str)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.vocab.contains_key(symbol)
    }

    /// The table restricted to its first `k` merges.
    pub fn truncated(&self, k: usize) -> MergeTable {
        let k = k.min(self.merges.len());
        let mut vocab = self.vocab.clone();
        vocab.truncate(self.seed.len() + k);
        MergeTable {
            merges: self.merges[..k].to_vec(),
            seed: self.seed.clone(),
            marker: self.marker,
            vocab,
        }
    }

    /// Segments `word`: character split plus marker, then each merge in
    /// learned order. Characters outside the seed alphabet pass through as
    /// singleton segments.
    pub fn apply(&self, word: &str) -> Result<Segmentation> {
        if word.is_empty() {
            return Err(Error::EmptyInput("cannot segment the empty word"));
        }
        self.marker.check_word(word)?;
        let mut symbols = initial_symbols(word, self.marker);
        for m in &self.merges {
            merge_in_place(&mut symbols, &m.left, &m.right);
        }
        Segmentation::new(symbols, self.marker, Origin::Bpe)
    }

    /// Serializes to the text table format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let position = match self.marker.position {
            MarkerPosition::EndOfWord => "end",
            MarkerPosition::None => "none",
        };
        let _ = writeln!(
            out,
            "{TABLE_MAGIC} marker={} position={position}",
            self.marker.symbol
        );
        let alphabet: Vec<&str> = self.seed.iter().map(String::as_str).collect();
        let _ = writeln!(out, "#alphabet {}", alphabet.join(" "));
        for m in &self.merges {
            let _ = writeln!(out, "{} {}", m.left, m.right);
        }
        out
    }

    /// Parses the text table format.
    ///
    /// ```text
    /// #segmenta-bpe v1 marker=· position=end
    /// #alphabet · d e i l n o r s t w
    /// e r
    /// er ·
    /// ```
    pub fn from_file_str(text: &str) -> Result<MergeTable> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing table header"))?;
        let marker = parse_header(header)?;
        let (_, alphabet) = lines
            .next()
            .ok_or_else(|| Error::parse(2, "missing #alphabet line"))?;
        let alphabet = alphabet
            .strip_prefix("#alphabet")
            .ok_or_else(|| Error::parse(2, "expected #alphabet line"))?;
        let seed: BTreeSet<String> = alphabet.split_whitespace().map(str::to_owned).collect();

        let mut merges: Vec<Merge> = Vec::new();
        let mut known: HashSet<String> = seed.iter().cloned().collect();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let (Some(left), Some(right), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(
                    lineno,
                    format!("expected `left right`, got {line:?}"),
                ));
            };
            if left.is_empty() || right.is_empty() {
                return Err(Error::parse(lineno, "empty merge constituent"));
            }
            for side in [left, right] {
                if !known.contains(side) {
                    return Err(Error::Integrity(format!(
                        "line {lineno}: {side:?} is used before any merge produces it"
                    )));
                }
            }
            let m = Merge::new(left, right);
            known.insert(m.merged());
            merges.push(m);
        }
        MergeTable::new(seed, merges, marker)
    }
}

impl Segmenter for MergeTable {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        self.apply(word)
    }
}

fn parse_header(line: &str) -> Result<MarkerPolicy> {
    let rest = line
        .strip_prefix(TABLE_MAGIC)
        .ok_or_else(|| Error::parse(1, format!("expected `{TABLE_MAGIC}` header")))?;
    let mut symbol = None;
    let mut position = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("marker", v)) => {
                let mut cs = v.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => symbol = Some(c),
                    _ => return Err(Error::parse(1, "marker must be a single character")),
                }
            }
            Some(("position", "end")) => position = Some(MarkerPosition::EndOfWord),
            Some(("position", "none")) => position = Some(MarkerPosition::None),
            _ => return Err(Error::parse(1, format!("unknown header field {field:?}"))),
        }
    }
    match (symbol, position) {
        (Some(symbol), Some(position)) => Ok(MarkerPolicy { symbol, position }),
        _ => Err(Error::parse(1, "header needs marker= and position=")),
    }
}

fn initial_symbols(word: &str, marker: MarkerPolicy) -> Vec<String> {
    let mut symbols: Vec<String> = word.chars().map(String::from).collect();
    if marker.is_enabled() {
        symbols.push(marker.symbol.to_string());
    }
    symbols
}

/// Replaces every adjacent (left, right) occurrence, leftmost first and
/// without overlap: `a a a` under (a, a) becomes `aa a`.
fn merge_in_place(symbols: &mut Vec<String>, left: &str, right: &str) -> bool {
    if symbols.len() < 2 {
        return false;
    }
    let mut changed = false;
    let mut out: Vec<String> = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == left && symbols[i + 1] == right {
            out.push(format!("{left}{right}"));
            i += 2;
            changed = true;
        } else {
            out.push(std::mem::take(&mut symbols[i]));
            i += 1;
        }
    }
    *symbols = out;
    changed
}

/// One training step: the pair merged, its count at merge time, and a
/// fingerprint of the segmented corpus after the merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub merge: Merge,
    pub frequency: u64,
    pub snapshot: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrainTrace {
    pub steps: Vec<TraceStep>,
}

impl TrainTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Tab-separated merge log: `step  left right  merged  frequency  snapshot`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("step\tpair\tmerged\tfrequency\tsnapshot\n");
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}\t{} {}\t{}\t{}\t{:016x}",
                i + 1,
                s.merge.left,
                s.merge.right,
                s.merge.merged(),
                s.frequency,
                s.snapshot
            );
        }
        out
    }
}

/// Training options beyond the budget and marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrainOptions {
    /// Count pairs on the rayon pool. The result is identical either way.
    pub parallel: bool,
}

/// Word types in tie-break order, each as its current symbol sequence.
#[derive(Debug, Clone)]
struct WorkingCorpus {
    words: Vec<(Vec<String>, u64)>,
}

fn word_pairs((syms, count): &(Vec<String>, u64)) -> Vec<((&str, &str), u64)> {
    syms.windows(2)
        .map(|w| ((w[0].as_str(), w[1].as_str()), *count))
        .collect()
}

impl WorkingCorpus {
    fn new(corpus: &Corpus, marker: MarkerPolicy) -> Result<Self> {
        let mut types: Vec<(&str, u64)> = corpus.word_types().collect();
        for (w, _) in &types {
            marker.check_word(w)?;
        }
        // word_types is lexicographic; a stable sort by descending count
        // gives (descending count, lexicographic word)
        types.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
        let words = types
            .into_iter()
            .map(|(w, c)| (initial_symbols(w, marker), c))
            .collect();
        Ok(WorkingCorpus { words })
    }

    fn seed_alphabet(&self) -> BTreeSet<String> {
        self.words
            .iter()
            .flat_map(|(syms, _)| syms.iter().cloned())
            .collect()
    }

    /// Pair counts in first-encounter order.
    fn pair_counts(&self, parallel: bool) -> IndexMap<(&str, &str), u64> {
        let mut counts: IndexMap<(&str, &str), u64> = IndexMap::new();
        if parallel {
            let local: Vec<Vec<((&str, &str), u64)>> =
                self.words.par_iter().map(word_pairs).collect();
            for pairs in local {
                for (p, c) in pairs {
                    *counts.entry(p).or_insert(0) += c;
                }
            }
        } else {
            for word in &self.words {
                for (p, c) in word_pairs(word) {
                    *counts.entry(p).or_insert(0) += c;
                }
            }
        }
        counts
    }

    fn apply_merge(&mut self, left: &str, right: &str, parallel: bool) {
        if parallel {
            self.words.par_iter_mut().for_each(|(syms, _)| {
                merge_in_place(syms, left, right);
            });
        } else {
            for (syms, _) in &mut self.words {
                merge_in_place(syms, left, right);
            }
        }
    }

    fn fingerprint(&self) -> u64 {
        // FNV-1a over "sym sym ...\tcount\n" lines
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for (syms, count) in &self.words {
            for (i, s) in syms.iter().enumerate() {
                if i > 0 {
                    feed(b" ");
                }
                feed(s.as_bytes());
            }
            feed(b"\t");
            feed(count.to_string().as_bytes());
            feed(b"\n");
        }
        h
    }
}

/// Learns a merge table from word-type counts.
pub fn train(
    corpus: &Corpus,
    budget: Budget,
    marker: MarkerPolicy,
) -> Result<(MergeTable, TrainTrace)> {
    train_with(corpus, budget, marker, TrainOptions::default())
}

pub fn train_with(
    corpus: &Corpus,
    budget: Budget,
    marker: MarkerPolicy,
    opts: TrainOptions,
) -> Result<(MergeTable, TrainTrace)> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("cannot train on an empty corpus"));
    }
    let mut work = WorkingCorpus::new(corpus, marker)?;
    let seed = work.seed_alphabet();
    let target = budget.merge_count(seed.len());

    let mut vocab: HashSet<String> = seed.iter().cloned().collect();
    let mut merges = Vec::with_capacity(target);
    let mut trace = TrainTrace::default();

    while merges.len() < target {
        let best = {
            let counts = work.pair_counts(opts.parallel);
            let mut best: Option<((&str, &str), u64)> = None;
            for (&(l, r), &c) in &counts {
                // a pair whose product is already a symbol would add no new
                // vocabulary item; it is never selected
                if vocab.contains(&format!("{l}{r}")) {
                    continue;
                }
                if best.is_none_or(|(_, bc)| c > bc) {
                    best = Some(((l, r), c));
                }
            }
            best.map(|((l, r), c)| (Merge::new(l, r), c))
        };
        let Some((merge, frequency)) = best else {
            break;
        };
        work.apply_merge(&merge.left, &merge.right, opts.parallel);
        vocab.insert(merge.merged());
        trace.steps.push(TraceStep {
            merge: merge.clone(),
            frequency,
            snapshot: work.fingerprint(),
        });
        merges.push(merge);
    }

    let table = MergeTable::new(seed, merges, marker)?;
    Ok((table, trace))
}

/// Recomputes the training trace of `table` on `corpus`: for each merge, the
/// count of its pair just before it was applied.
pub fn replay_trace(table: &MergeTable, corpus: &Corpus) -> Result<TrainTrace> {
    let mut work = WorkingCorpus::new(corpus, table.marker())?;
    let mut trace = TrainTrace::default();
    for m in table.merges() {
        let frequency = {
            let counts = work.pair_counts(false);
            counts
                .get(&(m.left.as_str(), m.right.as_str()))
                .copied()
                .unwrap_or(0)
        };
        work.apply_merge(&m.left, &m.right, false);
        trace.steps.push(TraceStep {
            merge: m.clone(),
            frequency,
            snapshot: work.fingerprint(),
        });
    }
    Ok(trace)
}

/// The segmented corpus after replaying `table`: `(count, segmentation)` in
/// tie-break order (descending count, then word).
pub fn segmented_corpus(table: &MergeTable, corpus: &Corpus) -> Result<Vec<(u64, Segmentation)>> {
    let mut types: Vec<(&str, u64)> = corpus.word_types().collect();
    types.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
    types
        .into_iter()
        .map(|(w, c)| Ok((c, table.apply(w)?)))
        .collect()
}

/// Counts of each segment across a corpus, weighted by word counts.
pub fn segment_counts(table: &MergeTable, corpus: &Corpus) -> Result<HashMap<String, u64>> {
    let mut out = HashMap::new();
    for (word, count) in corpus.word_types() {
        for seg in table.apply(word)?.segments() {
            *out.entry(seg.clone()).or_insert(0) += count;
        }
    }
    Ok(out)
}

/// Renders the corpus/merge/vocabulary state as a step table in the layout
/// of the classic textbook illustration.
pub fn state_table(table: &MergeTable, corpus: &Corpus) -> Result<String> {
    let rows = segmented_corpus(table, corpus)?;
    let merges: Vec<String> = table
        .merges()
        .iter()
        .map(|m| format!("({}, {}) -> {}", m.left, m.right, m.merged()))
        .collect();
    let vocab: Vec<&str> = table.vocab().collect();
    let height = rows.len().max(merges.len()).max(1);
    let corpus_col: Vec<String> = rows.iter().map(|(_, s)| s.segments().join(" ")).collect();
    let freq_col: Vec<String> = rows.iter().map(|(c, _)| c.to_string()).collect();

    let w_freq = freq_col
        .iter()
        .map(|s| s.chars().count())
        .chain([9])
        .max()
        .unwrap_or(9);
    let w_corpus = corpus_col
        .iter()
        .map(|s| s.chars().count())
        .chain([6])
        .max()
        .unwrap_or(6);
    let w_merge = merges
        .iter()
        .map(|s| s.chars().count())
        .chain([5])
        .max()
        .unwrap_or(5);

    let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} | {} | {} | {} | Vocabulary",
        pad("Step", 4),
        pad("Frequency", w_freq),
        pad("Corpus", w_corpus),
        pad("Merge", w_merge)
    );
    for i in 0..height {
        let step = if i == 0 {
            table.merges().len().to_string()
        } else {
            String::new()
        };
        let vocab_line = if i == 0 {
            vocab.join(", ")
        } else {
            String::new()
        };
        let line = format!(
            "{} | {} | {} | {} | {}",
            pad(&step, 4),
            pad(freq_col.get(i).map_or("", String::as_str), w_freq),
            pad(corpus_col.get(i).map_or("", String::as_str), w_corpus),
            pad(merges.get(i).map_or("", String::as_str), w_merge),
            vocab_line
        );
        let _ = writeln!(out, "{}", line.trim_end());
    }
    Ok(out)
}
