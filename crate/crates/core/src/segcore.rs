//! Segmentations and the segmenters that produce them.
//!
//! A [`Segmentation`] is a word together with an ordered list of nonempty
//! segments. Whatever produced it, concatenating the segments and removing
//! the end-of-word marker gives back the word; [`join`] performs that
//! inversion and is the round-trip check used throughout the test suite.
//!
//! The marker is carried inside the final segment (`er·` is a single
//! segment), the way BPE merges see it during training.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;

use crate::{Error, Result};

pub const DEFAULT_MARKER: char = '·';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkerPosition {
    EndOfWord,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarkerPolicy {
    pub symbol: char,
    pub position: MarkerPosition,
}

impl Default for MarkerPolicy {
    /// `·` appended at the end of every word.
    fn default() -> Self {
        MarkerPolicy {
            symbol: DEFAULT_MARKER,
            position: MarkerPosition::EndOfWord,
        }
    }
}

impl MarkerPolicy {
    pub fn end_of_word(symbol: char) -> Self {
        MarkerPolicy {
            symbol,
            position: MarkerPosition::EndOfWord,
        }
    }

    pub fn none() -> Self {
        MarkerPolicy {
            symbol: DEFAULT_MARKER,
            position: MarkerPosition::None,
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.position == MarkerPosition::EndOfWord
    }

    /// Fails if the policy is enabled and `word` contains the marker symbol.
    pub fn check_word(&self, word: &str) -> Result<()> {
        if self.is_enabled() && word.contains(self.symbol) {
            return Err(Error::MarkerCollision {
                marker: self.symbol,
                word: word.to_owned(),
            });
        }
        Ok(())
    }
}

/// Which segmenter produced a segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Chars,
    /// Segments are two-digit lowercase hex renderings of UTF-8 bytes.
    Bytes,
    Bpe,
    Reference,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segmentation {
    word: String,
    segments: Vec<String>,
    marker: MarkerPolicy,
    origin: Origin,
}

impl Segmentation {
    /// Builds a segmentation and derives its word with [`join`].
    pub fn new(segments: Vec<String>, marker: MarkerPolicy, origin: Origin) -> Result<Self> {
        let word = surface(&segments, marker, origin)?;
        Ok(Segmentation {
            word,
            segments,
            marker,
            origin,
        })
    }

    /// Like [`Segmentation::new`], but also checks that the segments spell `word`.
    pub fn for_word(
        word: &str,
        segments: Vec<String>,
        marker: MarkerPolicy,
        origin: Origin,
    ) -> Result<Self> {
        let seg = Segmentation::new(segments, marker, origin)?;
        if seg.word != word {
            return Err(Error::Integrity(format!(
                "segments {:?} spell {:?}, not {word:?}",
                seg.segments, seg.word
            )));
        }
        Ok(seg)
    }

    /// Reference segmentation from whitespace-separated segments, e.g. `perio dont ist s`.
    pub fn reference(text: &str) -> Result<Self> {
        let segments = text.split_whitespace().map(str::to_owned).collect();
        Segmentation::new(segments, MarkerPolicy::none(), Origin::Reference)
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn marker(&self) -> MarkerPolicy {
        self.marker
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Segments with the marker removed; a segment that was only the marker
    /// disappears. `low er·` gives `low er`, `w o r s t ·` gives `w o r s t`.
    pub fn unmarked_segments(&self) -> Vec<String> {
        let mut out = self.segments.clone();
        if self.marker.is_enabled() {
            if let Some(last) = out.last_mut() {
                last.pop();
            }
            if out.last().is_some_and(String::is_empty) {
                out.pop();
            }
        }
        out
    }

    /// Internal cut positions, as UTF-8 byte offsets into the word.
    ///
    /// Byte offsets are the one unit in which character, byte and subword
    /// cuts are all expressible.
    pub fn boundaries(&self) -> BTreeSet<usize> {
        let lengths = piece_lengths(&self.segments, self.marker, self.origin);
        let total: usize = lengths.iter().sum();
        let mut cuts = BTreeSet::new();
        let mut pos = 0;
        for len in lengths {
            pos += len;
            if pos > 0 && pos < total {
                cuts.insert(pos);
            }
        }
        cuts
    }

    /// `word<TAB>seg1 seg2 ...`
    pub fn to_line(&self) -> String {
        format!("{}\t{}", self.word, self.segments.join(" "))
    }
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("|"))
    }
}

/// Recovers the word a segmentation spells.
pub fn join(seg: &Segmentation) -> Result<String> {
    surface(&seg.segments, seg.marker, seg.origin)
}

fn surface(segments: &[String], marker: MarkerPolicy, origin: Origin) -> Result<String> {
    if segments.is_empty() {
        return Err(Error::Integrity("segmentation has no segments".into()));
    }
    if let Some(i) = segments.iter().position(String::is_empty) {
        return Err(Error::Integrity(format!("segment {i} is empty")));
    }
    let last = segments.len() - 1;
    let mut bytes: Vec<u8> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let mut text = seg.as_str();
        if marker.is_enabled() {
            let body = if i == last {
                text.strip_suffix(marker.symbol).ok_or_else(|| {
                    Error::Integrity(format!(
                        "final segment {seg:?} lacks end-of-word marker {:?}",
                        marker.symbol
                    ))
                })?
            } else {
                text
            };
            if body.contains(marker.symbol) {
                return Err(Error::Integrity(format!(
                    "marker {:?} inside segment {i} ({seg:?})",
                    marker.symbol
                )));
            }
            text = body;
        }
        match origin {
            Origin::Bytes => {
                if text.is_empty() {
                    continue;
                }
                bytes.push(parse_hex_byte(text).ok_or_else(|| {
                    Error::Integrity(format!("segment {seg:?} is not a hex byte"))
                })?);
            }
            _ => bytes.extend_from_slice(text.as_bytes()),
        }
    }
    if bytes.is_empty() {
        return Err(Error::Integrity(
            "segmentation spells the empty word".into(),
        ));
    }
    String::from_utf8(bytes)
        .map_err(|e| Error::Integrity(format!("byte segments are not UTF-8: {e}")))
}

fn piece_lengths(segments: &[String], marker: MarkerPolicy, origin: Origin) -> Vec<usize> {
    let last = segments.len().saturating_sub(1);
    segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let text = if marker.is_enabled() && i == last {
                seg.strip_suffix(marker.symbol).unwrap_or(seg)
            } else {
                seg.as_str()
            };
            match origin {
                Origin::Bytes => usize::from(!text.is_empty()),
                _ => text.len(),
            }
        })
        .collect()
}

fn parse_hex_byte(s: &str) -> Option<u8> {
    if s.len() != 2 || !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
        return None;
    }
    u8::from_str_radix(s, 16).ok()
}

/// A segmentation function: word in, segments out.
///
/// Implemented by [`CharSegmenter`], [`ByteSegmenter`], [`ReferenceSegmenter`]
/// and [`crate::bpe::MergeTable`].
pub trait Segmenter {
    fn segment(&self, word: &str) -> Result<Segmentation>;
}

impl<S: Segmenter + ?Sized> Segmenter for &S {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        (**self).segment(word)
    }
}

/// One segment per Unicode scalar value.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharSegmenter {
    pub marker: MarkerPolicy,
}

impl CharSegmenter {
    pub fn new(marker: MarkerPolicy) -> Self {
        CharSegmenter { marker }
    }
}

impl Segmenter for CharSegmenter {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        segment_chars(word, self.marker)
    }
}

pub fn segment_chars(word: &str, marker: MarkerPolicy) -> Result<Segmentation> {
    if word.is_empty() {
        return Err(Error::EmptyInput("cannot segment the empty word"));
    }
    marker.check_word(word)?;
    let mut segments: Vec<String> = word.chars().map(String::from).collect();
    if marker.is_enabled() {
        segments.push(marker.symbol.to_string());
    }
    Ok(Segmentation {
        word: word.to_owned(),
        segments,
        marker,
        origin: Origin::Chars,
    })
}

/// One segment per UTF-8 byte, rendered as two lowercase hex digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct ByteSegmenter;

impl Segmenter for ByteSegmenter {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        segment_bytes(word)
    }
}

pub fn segment_bytes(word: &str) -> Result<Segmentation> {
    if word.is_empty() {
        return Err(Error::EmptyInput("cannot segment the empty word"));
    }
    let segments = word.bytes().map(|b| format!("{b:02x}")).collect();
    Ok(Segmentation {
        word: word.to_owned(),
        segments,
        marker: MarkerPolicy::none(),
        origin: Origin::Bytes,
    })
}

/// Looks words up in a fixed set of segmentations, e.g. hand-written
/// morphological references.
#[derive(Debug, Clone, Default)]
pub struct ReferenceSegmenter {
    entries: BTreeMap<String, Segmentation>,
}

impl ReferenceSegmenter {
    pub fn new(segs: impl IntoIterator<Item = Segmentation>) -> Self {
        ReferenceSegmenter {
            entries: segs.into_iter().map(|s| (s.word.clone(), s)).collect(),
        }
    }

    pub fn get(&self, word: &str) -> Option<&Segmentation> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Segmenter for ReferenceSegmenter {
    fn segment(&self, word: &str) -> Result<Segmentation> {
        self.entries
            .get(word)
            .cloned()
            .ok_or_else(|| Error::Lookup(format!("no reference segmentation for {word:?}")))
    }
}

/// Parses `word<TAB>seg1 seg2 ...` lines.
///
/// A line whose last segment ends in `·` is read under the default
/// end-of-word policy, so BPE output files can be compared directly against
/// marker-free references.
pub fn read_segmentations(text: &str, origin: Origin) -> Result<Vec<Segmentation>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (word, segs) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno, "expected word<TAB>segments"))?;
        let segments: Vec<String> = segs.split_whitespace().map(str::to_owned).collect();
        let marker = if segments.last().is_some_and(|s| s.ends_with(DEFAULT_MARKER)) {
            MarkerPolicy::default()
        } else {
            MarkerPolicy::none()
        };
        let seg = Segmentation::for_word(word, segments, marker, origin)
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        out.push(seg);
    }
    Ok(out)
}

pub type Fraction = Ratio<u64>;

/// Boundary precision/recall of a candidate against a reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryScore {
    pub precision: Fraction,
    pub recall: Fraction,
    pub f1: Fraction,
    pub candidate_boundaries: BTreeSet<usize>,
    pub reference_boundaries: BTreeSet<usize>,
}

/// Scores internal cut positions of `candidate` against `reference`.
///
/// Two unsplit words agree perfectly (all scores 1). An empty candidate set
/// against a nonempty reference scores precision 0, and symmetrically for
/// recall, so swapping the arguments always swaps precision and recall.
pub fn compare_segmentations(
    candidate: &Segmentation,
    reference: &Segmentation,
) -> Result<BoundaryScore> {
    if candidate.word != reference.word {
        return Err(Error::WordMismatch {
            candidate: candidate.word.clone(),
            reference: reference.word.clone(),
        });
    }
    let cand = candidate.boundaries();
    let refr = reference.boundaries();
    let hits = cand.intersection(&refr).count() as u64;
    let ratio = |n: u64, d: usize| -> Fraction {
        match (d, refr.is_empty() && cand.is_empty()) {
            (_, true) => Fraction::from_integer(1),
            (0, false) => Fraction::from_integer(0),
            (d, false) => Fraction::new(n, d as u64),
        }
    };
    let precision = ratio(hits, cand.len());
    let recall = ratio(hits, refr.len());
    let sum = precision + recall;
    let f1 = if sum == Fraction::from_integer(0) {
        sum
    } else {
        Fraction::from_integer(2) * precision * recall / sum
    };
    Ok(BoundaryScore {
        precision,
        recall,
        f1,
        candidate_boundaries: cand,
        reference_boundaries: refr,
    })
}

/// Macro-averaged precision, recall and F1 over a set of scores.
pub fn mean_score(scores: &[BoundaryScore]) -> Option<(Fraction, Fraction, Fraction)> {
    if scores.is_empty() {
        return None;
    }
    let n = Fraction::from_integer(scores.len() as u64);
    let zero = Fraction::from_integer(0);
    let (p, r, f) = scores.iter().fold((zero, zero, zero), |(p, r, f), s| {
        (p + s.precision, r + s.recall, f + s.f1)
    });
    Some((p / n, r / n, f / n))
}
