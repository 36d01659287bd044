//! Executable models of two subword-semantics constructions.
//!
//! * [`build_mu`] turns any finite string→meaning map `m` into Zadrozny's
//!   function `μ` with `μ(s·t) = μ(s)(μ(t))` and `μ(s)(s) = m(s)`, and
//!   [`mu_check`] verifies both equations exhaustively along with
//!   injectivity of `μ`.
//! * [`decompose`], [`focus_alternatives`] and [`coordinate_expand`] model
//!   Artstein's phonological decomposition: the unfocused remainder of a
//!   word denotes a partial function from segment sounds to word meanings.
//!
//! Function-values of `μ` are named by the string that defines them, and
//! `μ` is only built over concatenations that land inside the finite string
//! set. Sounds are orthographic strings unless a lexicon entry carries a
//! phonetic key.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use crate::{Error, Result};

/// Opaque meaning identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeaningId(pub String);

impl MeaningId {
    pub fn new(id: impl Into<String>) -> Self {
        MeaningId(id.into())
    }
}

impl fmt::Display for MeaningId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// How two strings concatenate: directly, or with a separator between them
/// (a single space for phrase-level examples such as `chases mice`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concat {
    pub separator: String,
}

impl Concat {
    pub fn plain() -> Self {
        Concat {
            separator: String::new(),
        }
    }

    pub fn spaced() -> Self {
        Concat {
            separator: " ".into(),
        }
    }

    pub fn apply(&self, s: &str, t: &str) -> String {
        format!("{s}{}{t}", self.separator)
    }
}

/// A finite map from strings to meanings. Synonyms are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeaningFunction {
    entries: BTreeMap<String, MeaningId>,
}

impl MeaningFunction {
    pub fn new<I, S, M>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, M)>,
        S: Into<String>,
        M: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (s, m) in entries {
            let s = s.into();
            if s.is_empty() {
                return Err(Error::Integrity(
                    "meaning function over the empty string".into(),
                ));
            }
            if map.insert(s.clone(), MeaningId(m.into())).is_some() {
                return Err(Error::Integrity(format!("{s:?} listed twice")));
            }
        }
        Ok(MeaningFunction { entries: map })
    }

    pub fn get(&self, s: &str) -> Option<&MeaningId> {
        self.entries.get(s)
    }

    pub fn strings(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl From<&Lexicon> for MeaningFunction {
    fn from(lex: &Lexicon) -> Self {
        MeaningFunction {
            entries: lex
                .entries
                .iter()
                .map(|(w, e)| (w.clone(), e.meaning.clone()))
                .collect(),
        }
    }
}

/// Argument of a μ-value: either a raw string or the function-value μ(t).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MuArg {
    Str(String),
    Fn(String),
}

/// Result of applying a μ-value: an ordinary meaning or the function-value μ(u).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MuValue {
    Meaning(MeaningId),
    Fn(String),
}

impl fmt::Display for MuValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuValue::Meaning(m) => write!(f, "{m}"),
            MuValue::Fn(s) => write!(f, "μ({s:?})"),
        }
    }
}

/// Zadrozny's μ over a finite string set.
///
/// `μ(s)` maps the string `s` to `m(s)` and, for every `t` with `s·t` in the
/// set, the function-value `μ(t)` to the function-value `μ(s·t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuFunction {
    concat: Concat,
    carrier: BTreeMap<String, BTreeMap<MuArg, MuValue>>,
}

impl MuFunction {
    pub fn concat(&self) -> &Concat {
        &self.concat
    }

    pub fn strings(&self) -> impl Iterator<Item = &str> + '_ {
        self.carrier.keys().map(String::as_str)
    }

    /// The graph of μ(s), if `s` is in the carrier.
    pub fn value(&self, s: &str) -> Option<&BTreeMap<MuArg, MuValue>> {
        self.carrier.get(s)
    }

    /// μ(s)(arg); `None` where the function-value is undefined.
    pub fn apply(&self, s: &str, arg: &MuArg) -> Option<&MuValue> {
        self.carrier.get(s)?.get(arg)
    }

    /// Overwrites one entry of μ(s). Meant for fault-injection tests of
    /// [`mu_check`].
    pub fn set_entry(&mut self, s: &str, arg: MuArg, value: MuValue) {
        self.carrier
            .entry(s.to_owned())
            .or_default()
            .insert(arg, value);
    }
}

pub fn build_mu(m: &MeaningFunction, concat: Concat) -> MuFunction {
    let mut carrier: BTreeMap<String, BTreeMap<MuArg, MuValue>> = BTreeMap::new();
    for (s, meaning) in &m.entries {
        let mut graph = BTreeMap::new();
        graph.insert(MuArg::Str(s.clone()), MuValue::Meaning(meaning.clone()));
        for t in m.entries.keys() {
            let st = concat.apply(s, t);
            if m.entries.contains_key(&st) {
                graph.insert(MuArg::Fn(t.clone()), MuValue::Fn(st));
            }
        }
        carrier.insert(s.clone(), graph);
    }
    MuFunction { concat, carrier }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionViolation {
    pub s: String,
    pub t: String,
    pub expected: String,
    pub got: Option<MuValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryViolation {
    pub s: String,
    pub expected: MeaningId,
    pub got: Option<MuValue>,
}

/// Outcome of [`mu_check`]. Failures are data, never errors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MuReport {
    /// Pairs `(s, t)` with `s·t` in the set, each checked for `μ(s·t) = μ(s)(μ(t))`.
    pub composition_checked: usize,
    pub composition_violations: Vec<CompositionViolation>,
    /// Strings checked for `μ(s)(s) = m(s)`.
    pub recovery_checked: usize,
    pub recovery_violations: Vec<RecoveryViolation>,
    /// Pairs `s ≠ t` whose μ-values have the same graph.
    pub injectivity_collisions: Vec<(String, String)>,
}

impl MuReport {
    pub fn composition_holds(&self) -> bool {
        self.composition_violations.is_empty()
    }

    pub fn recovery_holds(&self) -> bool {
        self.recovery_violations.is_empty()
    }

    pub fn injective(&self) -> bool {
        self.injectivity_collisions.is_empty()
    }

    pub fn all_pass(&self) -> bool {
        self.composition_holds() && self.recovery_holds() && self.injective()
    }

    pub fn to_tsv(&self) -> String {
        let status = |ok: bool| if ok { "pass" } else { "FAIL" };
        let mut out = format!(
            "composition\t{}\t{} checked\t{} violations\nrecovery\t{}\t{} checked\t{} violations\ninjective\t{}\t{} collisions\n",
            status(self.composition_holds()),
            self.composition_checked,
            self.composition_violations.len(),
            status(self.recovery_holds()),
            self.recovery_checked,
            self.recovery_violations.len(),
            status(self.injective()),
            self.injectivity_collisions.len(),
        );
        for v in &self.composition_violations {
            let got = v
                .got
                .as_ref()
                .map_or("undefined".to_owned(), |g| g.to_string());
            out.push_str(&format!(
                "counterexample\tcomposition\t{:?}\t{:?}\texpected μ({:?})\tgot {got}\n",
                v.s, v.t, v.expected
            ));
        }
        for v in &self.recovery_violations {
            let got = v
                .got
                .as_ref()
                .map_or("undefined".to_owned(), |g| g.to_string());
            out.push_str(&format!(
                "counterexample\trecovery\t{:?}\texpected {}\tgot {got}\n",
                v.s, v.expected
            ));
        }
        for (a, b) in &self.injectivity_collisions {
            out.push_str(&format!("counterexample\tinjective\t{a:?}\t{b:?}\n"));
        }
        out
    }
}

/// Exhaustively checks both μ equations on every string of `m` and that μ
/// is one-one.
///
/// Function-values are compared extensionally: `μ(s)(μ(t))` must be a
/// function-value whose graph equals the graph of `μ(s·t)`.
pub fn mu_check(mu: &MuFunction, m: &MeaningFunction) -> MuReport {
    let mut report = MuReport::default();

    for (s, meaning) in &m.entries {
        report.recovery_checked += 1;
        let got = mu.apply(s, &MuArg::Str(s.clone()));
        if got != Some(&MuValue::Meaning(meaning.clone())) {
            report.recovery_violations.push(RecoveryViolation {
                s: s.clone(),
                expected: meaning.clone(),
                got: got.cloned(),
            });
        }
    }

    for s in m.entries.keys() {
        for t in m.entries.keys() {
            let st = mu.concat.apply(s, t);
            if !m.entries.contains_key(&st) {
                continue;
            }
            report.composition_checked += 1;
            let got = mu.apply(s, &MuArg::Fn(t.clone()));
            let ok = match got {
                Some(MuValue::Fn(u)) => match (mu.value(u), mu.value(&st)) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                },
                _ => false,
            };
            if !ok {
                report.composition_violations.push(CompositionViolation {
                    s: s.clone(),
                    t: t.clone(),
                    expected: st,
                    got: got.cloned(),
                });
            }
        }
    }

    let graphs: Vec<(&String, &BTreeMap<MuArg, MuValue>)> = m
        .entries
        .keys()
        .filter_map(|s| mu.carrier.get_key_value(s))
        .collect();
    for (i, (a, ga)) in graphs.iter().enumerate() {
        for (b, gb) in &graphs[i + 1..] {
            if ga == gb {
                report
                    .injectivity_collisions
                    .push(((*a).clone(), (*b).clone()));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub meaning: MeaningId,
    pub syllables: Option<u32>,
    /// Optional sound form (e.g. a broad IPA transcription) used instead of
    /// spelling when decomposing by sound.
    pub phonetic: Option<String>,
}

/// Word → meaning, with optional syllable counts and phonetic keys.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
}

impl Lexicon {
    pub fn new<I, S, M>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, M)>,
        S: Into<String>,
        M: Into<String>,
    {
        let mut lex = Lexicon::default();
        for (w, m) in entries {
            lex.insert(
                w.into(),
                LexEntry {
                    meaning: MeaningId(m.into()),
                    syllables: None,
                    phonetic: None,
                },
            )?;
        }
        Ok(lex)
    }

    pub fn insert(&mut self, word: String, entry: LexEntry) -> Result<()> {
        if word.is_empty() {
            return Err(Error::Integrity("lexicon word is empty".into()));
        }
        if self.entries.insert(word.clone(), entry).is_some() {
            return Err(Error::Integrity(format!("{word:?} listed twice")));
        }
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&LexEntry> {
        self.entries.get(word)
    }

    pub fn meaning(&self, word: &str) -> Option<&MeaningId> {
        self.entries.get(word).map(|e| &e.meaning)
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, &LexEntry)> + '_ {
        self.entries.iter().map(|(w, e)| (w.as_str(), e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `word<TAB>meaning[<TAB>syllables[<TAB>phonetic]]` lines.
    pub fn from_file_str(text: &str) -> Result<Lexicon> {
        let mut lex = Lexicon::default();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || fields.len() > 4 || fields[1].is_empty() {
                return Err(Error::parse(
                    lineno,
                    "expected word<TAB>meaning[<TAB>syllables[<TAB>phonetic]]",
                ));
            }
            let syllables = match fields.get(2).filter(|f| !f.is_empty()) {
                Some(f) => Some(
                    f.parse::<u32>()
                        .map_err(|_| Error::parse(lineno, format!("bad syllable count {f:?}")))?,
                ),
                None => None,
            };
            let phonetic = fields
                .get(3)
                .filter(|f| !f.is_empty())
                .map(|f| f.to_string());
            lex.insert(
                fields[0].to_owned(),
                LexEntry {
                    meaning: MeaningId(fields[1].to_owned()),
                    syllables,
                    phonetic,
                },
            )
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        }
        Ok(lex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The residue comes first: `stalag` + α.
    Prefix,
    /// The residue comes last: β + `dontists`.
    Suffix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeyMode {
    #[default]
    Spelling,
    /// Match against each entry's phonetic key; entries without one are skipped.
    Phonetic,
}

/// The partial function denoted by a fixed word part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueFunction {
    pub residue: String,
    pub side: Side,
    table: BTreeMap<String, (String, MeaningId)>,
}

impl ResidueFunction {
    /// Meaning of the word formed with sound `alpha`, or `None` where undefined.
    pub fn apply(&self, alpha: &str) -> Option<&MeaningId> {
        self.table.get(alpha).map(|(_, m)| m)
    }

    /// The word `alpha` completes, if any.
    pub fn word_for(&self, alpha: &str) -> Option<&str> {
        self.table.get(alpha).map(|(w, _)| w.as_str())
    }

    /// `(alpha, meaning)` pairs where the function is defined.
    pub fn domain(&self) -> impl Iterator<Item = (&str, &MeaningId)> + '_ {
        self.table.iter().map(|(a, (_, m))| (a.as_str(), m))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

pub fn decompose(lex: &Lexicon, residue: &str, side: Side) -> Result<ResidueFunction> {
    decompose_by(lex, residue, side, KeyMode::Spelling)
}

/// Builds the residue function over spellings or phonetic keys.
///
/// The complement α is always nonempty, so a residue equal to a whole word
/// does not define a value for the empty sound.
pub fn decompose_by(
    lex: &Lexicon,
    residue: &str,
    side: Side,
    mode: KeyMode,
) -> Result<ResidueFunction> {
    if residue.is_empty() {
        return Err(Error::EmptyInput("residue must be nonempty"));
    }
    let mut table = BTreeMap::new();
    for (word, entry) in lex.words() {
        let key = match mode {
            KeyMode::Spelling => word,
            KeyMode::Phonetic => match &entry.phonetic {
                Some(p) => p.as_str(),
                None => continue,
            },
        };
        let alpha = match side {
            Side::Prefix => key.strip_prefix(residue),
            Side::Suffix => key.strip_suffix(residue),
        };
        if let Some(alpha) = alpha.filter(|a| !a.is_empty()) {
            table.insert(alpha.to_owned(), (word.to_owned(), entry.meaning.clone()));
        }
    }
    Ok(ResidueFunction {
        residue: residue.to_owned(),
        side,
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FocusOptions {
    /// Allow focusing the whole word, which makes every lexicon word an alternative.
    pub allow_empty_residue: bool,
    /// Require the focused part to pass [`prosodic_gate`] with this minimum.
    pub prosodic_min: Option<usize>,
}

/// Alternatives to `word` obtained by replacing the characters in
/// `focus_span` (char indices) with any nonempty string that yields a
/// lexicon word. The input word is always included.
pub fn focus_alternatives(
    lex: &Lexicon,
    word: &str,
    focus_span: Range<usize>,
    opts: FocusOptions,
) -> Result<BTreeSet<(String, MeaningId)>> {
    let entry = lex
        .get(word)
        .ok_or_else(|| Error::Lookup(format!("{word:?} is not in the lexicon")))?;
    let chars: Vec<char> = word.chars().collect();
    if focus_span.start >= focus_span.end || focus_span.end > chars.len() {
        return Err(Error::Domain(format!(
            "focus span {}..{} is not a nonempty range within {word:?} ({} chars)",
            focus_span.start,
            focus_span.end,
            chars.len()
        )));
    }
    let before: String = chars[..focus_span.start].iter().collect();
    let focused: String = chars[focus_span.clone()].iter().collect();
    let after: String = chars[focus_span.end..].iter().collect();
    if before.is_empty() && after.is_empty() && !opts.allow_empty_residue {
        return Err(Error::Domain(
            "focus covers the whole word; enable allow_empty_residue to take the whole lexicon"
                .into(),
        ));
    }
    if let Some(min) = opts.prosodic_min {
        if !prosodic_gate(&focused, min) {
            return Err(Error::Domain(format!(
                "{focused:?} is too small to carry focus (minimum {min} syllables)"
            )));
        }
    }

    let mut out = BTreeSet::new();
    out.insert((word.to_owned(), entry.meaning.clone()));
    for (w, e) in lex.words() {
        let fits = w.len() > before.len() + after.len()
            && w.starts_with(before.as_str())
            && w.ends_with(after.as_str());
        if fits {
            out.insert((w.to_owned(), e.meaning.clone()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Resolved(MeaningId),
    Unresolved,
    /// The part failed the optional prosodic gate.
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub part: String,
    pub word: String,
    pub resolution: Resolution,
}

impl Expansion {
    pub fn meaning(&self) -> Option<&MeaningId> {
        match &self.resolution {
            Resolution::Resolved(m) => Some(m),
            _ => None,
        }
    }
}

/// Expands a subword coordination such as `ortho- and periodontists`.
///
/// Output order follows `parts`; words missing from the lexicon are
/// reported as [`Resolution::Unresolved`] rather than failing the call.
pub fn coordinate_expand<S: AsRef<str>>(
    parts: &[S],
    shared: &str,
    side: Side,
    lex: &Lexicon,
    prosodic_min: Option<usize>,
) -> Result<Vec<Expansion>> {
    if parts.is_empty() {
        return Err(Error::EmptyInput("coordination needs at least one part"));
    }
    if shared.is_empty() {
        return Err(Error::EmptyInput("shared word part must be nonempty"));
    }
    Ok(parts
        .iter()
        .map(|p| {
            let part = p.as_ref();
            let word = match side {
                Side::Suffix => format!("{part}{shared}"),
                Side::Prefix => format!("{shared}{part}"),
            };
            let resolution = if prosodic_min.is_some_and(|min| !prosodic_gate(part, min)) {
                Resolution::Blocked
            } else {
                lex.meaning(&word)
                    .map_or(Resolution::Unresolved, |m| Resolution::Resolved(m.clone()))
            };
            Expansion {
                part: part.to_owned(),
                word,
                resolution,
            }
        })
        .collect())
}

pub const DEFAULT_MIN_SYLLABLES: usize = 2;

/// Number of maximal runs of `a e i o u y` (case-insensitive), a rough
/// syllable count.
pub fn vowel_clusters(segment: &str) -> usize {
    let mut count = 0;
    let mut in_run = false;
    for c in segment.chars().flat_map(char::to_lowercase) {
        let vowel = matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
        if vowel && !in_run {
            count += 1;
        }
        in_run = vowel;
    }
    count
}

/// Heuristic stand-in for a minimum prosodic size: true iff the segment has
/// at least `min_syllables` vowel clusters. Not a model of metrical feet.
pub fn prosodic_gate(segment: &str, min_syllables: usize) -> bool {
    vowel_clusters(segment) >= min_syllables
}
