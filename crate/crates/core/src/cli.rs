//! The `segmenta` command line.
//!
//! [`run`] takes the argument vector and two output streams and returns the
//! process exit code: 0 on success, 1 on domain or I/O errors, 2 on usage
//! errors. Data goes to `out` as line-oriented tab-separated text;
//! diagnostics go to `err`.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::align::{self, AttentionMatrix, RenderFormat};
use crate::bpe::{self, Budget, MergeTable, TrainOptions};
use crate::corpus::{self, Corpus, NormConfig};
use crate::lmstats::{self, NGramLM};
use crate::segcore::{self, ByteSegmenter, CharSegmenter, MarkerPolicy, Origin, Segmenter};
use crate::semlab::{self, Concat, FocusOptions, Lexicon, MeaningFunction, Resolution, Side};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "segmenta",
    version,
    about = "Subword segmentation laboratory",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Word-type frequency tables and rank/frequency statistics
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Segment words into characters or UTF-8 bytes
    Segment {
        #[arg(long, value_enum)]
        mode: SegMode,
        /// Append the end-of-word marker `·` (character mode only)
        #[arg(long)]
        marker: bool,
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Boundary precision/recall of candidate segmentations against references
    Compare {
        candidate: PathBuf,
        reference: PathBuf,
    },
    /// Train, apply and inspect BPE merge tables
    #[command(subcommand)]
    Bpe(BpeCmd),
    /// Train and score add-k n-gram models
    #[command(subcommand)]
    Lm(LmCmd),
    /// Embedding-matrix parameter count for a vocabulary size and dimension
    Budget { vocab: u64, dim: u64 },
    /// Out-of-vocabulary rates of a corpus against a vocabulary
    Oov {
        /// One symbol per line, or a BPE table file
        vocab: PathBuf,
        corpus: PathBuf,
        /// Segment the corpus before lookup: words, chars, or bpe:<table>
        #[arg(long, default_value = "words", value_parser = parse_unit)]
        unit: Unit,
        #[command(flatten)]
        input: CorpusInput,
    },
    /// Hard alignments and diagrams from attention-weight matrices
    #[command(subcommand)]
    Align(AlignCmd),
    /// Zadrozny μ checks and Artstein-style subword decomposition
    #[command(subcommand)]
    Sem(SemCmd),
}

#[derive(Debug, Args)]
struct CorpusInput {
    /// Read a `word<TAB>count` frequency table instead of raw text
    #[arg(long)]
    freq: bool,
    #[arg(long)]
    lowercase: bool,
    #[arg(long)]
    strip_punctuation: bool,
}

impl CorpusInput {
    fn norm(&self) -> NormConfig {
        NormConfig {
            lowercase: self.lowercase,
            strip_punctuation: self.strip_punctuation,
        }
    }

    fn load(&self, path: &Path) -> Result<Corpus> {
        let bytes = read_bytes(path)?;
        let corpus = if self.freq {
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::Decode {
                offset: e.valid_up_to(),
            })?;
            Corpus::read_frequency_table(text)?
        } else {
            Corpus::load(&bytes, &self.norm())?
        };
        Ok(corpus.with_source_id(path.display().to_string()))
    }
}

#[derive(Debug, Subcommand)]
enum CorpusCmd {
    /// Type/token counts and the head-mass table
    Stats {
        file: PathBuf,
        #[command(flatten)]
        input: CorpusInput,
        /// Rows of the rank table to print
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Write the `word<TAB>count` frequency table of a text
    Freq {
        file: PathBuf,
        #[command(flatten)]
        input: CorpusInput,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SegMode {
    Chars,
    Bytes,
}

#[derive(Debug, Subcommand)]
enum BpeCmd {
    /// Learn a merge table; writes the table, and the merge log when -o is given
    Train {
        corpus: PathBuf,
        #[arg(
            long,
            conflicts_with = "vocab_size",
            required_unless_present = "vocab_size"
        )]
        merges: Option<usize>,
        #[arg(long)]
        vocab_size: Option<usize>,
        /// Train without the end-of-word marker
        #[arg(long)]
        no_marker: bool,
        /// Count pairs in parallel (same result)
        #[arg(long)]
        parallel: bool,
        /// Write the table here and print the merge log instead
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        input: CorpusInput,
    },
    /// Segment words with a merge table
    Apply {
        table: PathBuf,
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Print the merge log of a table, with pair counts when a corpus is given
    Trace {
        table: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        input: CorpusInput,
    },
}

#[derive(Debug, Clone)]
enum Unit {
    Chars,
    Words,
    Bpe(PathBuf),
}

impl Unit {
    fn label(&self) -> String {
        match self {
            Unit::Chars => "chars".into(),
            Unit::Words => "words".into(),
            Unit::Bpe(p) => format!("bpe:{}", p.display()),
        }
    }
}

fn parse_unit(s: &str) -> std::result::Result<Unit, String> {
    match s {
        "chars" => Ok(Unit::Chars),
        "words" => Ok(Unit::Words),
        _ => match s.strip_prefix("bpe:") {
            Some(path) if !path.is_empty() => Ok(Unit::Bpe(PathBuf::from(path))),
            _ => Err(format!("expected chars, words or bpe:<table>, got {s:?}")),
        },
    }
}

#[derive(Debug, Subcommand)]
enum LmCmd {
    /// Train an n-gram model on a text file
    Train {
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Add-k smoothing constant; 0 disables smoothing
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value = "chars", value_parser = parse_unit)]
        unit: Unit,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        lowercase: bool,
    },
    /// Natural-log probability of a text under a model
    Score {
        model: PathBuf,
        #[arg(required = true)]
        text: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
enum AlignCmd {
    /// Print the row-argmax alignment of a weight matrix
    Extract { matrix: PathBuf },
    /// Draw the alignment as text or SVG
    Render {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Svg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Prefix,
    Suffix,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Prefix => Side::Prefix,
            SideArg::Suffix => Side::Suffix,
        }
    }
}

#[derive(Debug, Subcommand)]
enum SemCmd {
    /// Build μ from a meaning file and check both equations and injectivity
    MuCheck {
        meanings: PathBuf,
        /// String inserted between concatenated strings
        #[arg(long, default_value = " ")]
        separator: String,
    },
    /// Focus alternatives for a character span of a word (start:end, 0-based, end exclusive)
    Focus {
        lexicon: PathBuf,
        word: String,
        span: String,
        #[arg(long)]
        allow_empty_residue: bool,
        /// Require the focused part to have this many vowel clusters
        #[arg(long)]
        prosodic_min: Option<usize>,
    },
    /// Expand a subword coordination like `ortho and periodontists`
    Coord {
        lexicon: PathBuf,
        #[arg(long)]
        shared: String,
        #[arg(long, value_enum, default_value_t = SideArg::Suffix)]
        side: SideArg,
        #[arg(long)]
        prosodic_min: Option<usize>,
        #[arg(required = true)]
        parts: Vec<String>,
    },
    /// Table of the partial function denoted by a word part
    Decompose {
        lexicon: PathBuf,
        residue: String,
        #[arg(long, value_enum, default_value_t = SideArg::Prefix)]
        side: SideArg,
        /// Sounds to look up in the table
        lookups: Vec<String>,
    },
    /// Vowel-cluster size heuristic for focusable parts
    Gate {
        segment: String,
        #[arg(long, default_value_t = semlab::DEFAULT_MIN_SYLLABLES)]
        min: usize,
    },
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|e| Error::Decode {
        offset: e.utf8_error().valid_up_to(),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

fn load_table(path: &Path) -> Result<MergeTable> {
    MergeTable::from_file_str(&read_text(path)?)
}

fn ratio(f: segcore::Fraction) -> String {
    format!(
        "{}/{}\t{:.4}",
        f.numer(),
        f.denom(),
        *f.numer() as f64 / *f.denom() as f64
    )
}

fn dispatch(cmd: Command, out: &mut dyn Write, _err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Corpus(CorpusCmd::Stats { file, input, top }) => {
            let c = input.load(&file)?;
            let z = corpus::zipf_profile(&c)?;
            writeln!(out, "types\t{}", c.type_count())?;
            writeln!(out, "tokens\t{}", c.total_tokens())?;
            writeln!(out, "hapax\t{}", z.tail_count(1))?;
            writeln!(out, "rank\tword\tcount\thead_mass")?;
            for e in z.rank_frequency().iter().take(top) {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{:.6}",
                    e.rank,
                    e.word,
                    e.count,
                    z.head_mass(e.rank)
                )?;
            }
        }
        Command::Corpus(CorpusCmd::Freq { file, input }) => {
            let c = input.load(&file)?;
            out.write_all(c.write_frequency_table().as_bytes())?;
        }
        Command::Segment {
            mode,
            marker,
            words,
        } => {
            let policy = if marker {
                MarkerPolicy::default()
            } else {
                MarkerPolicy::none()
            };
            let segmenter: Box<dyn Segmenter> = match mode {
                SegMode::Chars => Box::new(CharSegmenter::new(policy)),
                SegMode::Bytes => Box::new(ByteSegmenter),
            };
            for w in &words {
                let seg = segmenter.segment(w)?;
                debug_assert_eq!(segcore::join(&seg)?, *w);
                writeln!(out, "{}", seg.to_line())?;
            }
        }
        Command::Compare {
            candidate,
            reference,
        } => {
            let cands = segcore::read_segmentations(&read_text(&candidate)?, Origin::External)?;
            let refs = segcore::ReferenceSegmenter::new(segcore::read_segmentations(
                &read_text(&reference)?,
                Origin::Reference,
            )?);
            writeln!(out, "word\tprecision\tp\trecall\tr\tf1\tf")?;
            let mut scores = Vec::new();
            for cand in &cands {
                let r = refs.segment(cand.word())?;
                let s = segcore::compare_segmentations(cand, &r)?;
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    cand.word(),
                    ratio(s.precision),
                    ratio(s.recall),
                    ratio(s.f1)
                )?;
                scores.push(s);
            }
            if let Some((p, r, f)) = segcore::mean_score(&scores) {
                writeln!(out, "mean\t{}\t{}\t{}", ratio(p), ratio(r), ratio(f))?;
            }
        }
        Command::Bpe(cmd) => bpe_cmd(cmd, out)?,
        Command::Lm(cmd) => lm_cmd(cmd, out)?,
        Command::Budget { vocab, dim } => {
            let b = lmstats::embedding_param_count(vocab, dim)?;
            writeln!(out, "vocab_size\t{}", b.vocab_size)?;
            writeln!(out, "embedding_dim\t{}", b.embedding_dim)?;
            writeln!(out, "param_count\t{}", b.param_count)?;
            writeln!(out, "exceeds_bound\t{}", b.exceeds_bound())?;
        }
        Command::Oov {
            vocab,
            corpus,
            unit,
            input,
        } => {
            let vocab_text = read_text(&vocab)?;
            let symbols: HashSet<String> = if vocab_text.starts_with(bpe::TABLE_MAGIC) {
                MergeTable::from_file_str(&vocab_text)?
                    .vocab()
                    .map(str::to_owned)
                    .collect()
            } else {
                vocab_text
                    .lines()
                    .filter_map(|l| l.split('\t').next())
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_owned)
                    .collect()
            };
            let eval = input.load(&corpus)?;
            let eval = match &unit {
                Unit::Words => eval,
                Unit::Chars => {
                    lmstats::segment_corpus(&eval, &CharSegmenter::new(MarkerPolicy::none()))?
                }
                Unit::Bpe(path) => lmstats::segment_corpus(&eval, &load_table(path)?)?,
            };
            let r = lmstats::oov_rate(&symbols, &eval)?;
            writeln!(out, "unit\t{}", unit.label())?;
            writeln!(out, "oov_types\t{}\t{}", r.oov_types, r.types)?;
            writeln!(out, "oov_tokens\t{}\t{}", r.oov_tokens, r.tokens)?;
            writeln!(out, "type_rate\t{:.6}", r.type_rate())?;
            writeln!(out, "token_rate\t{:.6}", r.token_rate())?;
        }
        Command::Align(AlignCmd::Extract { matrix }) => {
            let am = AttentionMatrix::from_file_str(&read_text(&matrix)?)?;
            let al = align::hard_align(&am)?;
            writeln!(out, "target_index\ttarget\tsource_index\tsource\tweight")?;
            for &(t, s) in &al.links {
                writeln!(
                    out,
                    "{t}\t{}\t{s}\t{}\t{}",
                    am.target().segments()[t],
                    am.source().segments()[s],
                    am.weights()[t][s]
                )?;
            }
        }
        Command::Align(AlignCmd::Render { matrix, format }) => {
            let am = AttentionMatrix::from_file_str(&read_text(&matrix)?)?;
            let al = align::hard_align(&am)?;
            let format = match format {
                Format::Text => RenderFormat::Text,
                Format::Svg => RenderFormat::Svg,
            };
            out.write_all(align::render(&am, &al, format)?.as_bytes())?;
        }
        Command::Sem(cmd) => sem_cmd(cmd, out)?,
    }
    Ok(())
}

fn bpe_cmd(cmd: BpeCmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        BpeCmd::Train {
            corpus,
            merges,
            vocab_size,
            no_marker,
            parallel,
            output,
            input,
        } => {
            let c = input.load(&corpus)?;
            let budget = match (merges, vocab_size) {
                (Some(m), _) => Budget::Merges(m),
                (None, Some(v)) => Budget::VocabSize(v),
                (None, None) => unreachable!("clap requires one budget"),
            };
            let marker = if no_marker {
                MarkerPolicy::none()
            } else {
                MarkerPolicy::default()
            };
            let (table, trace) = bpe::train_with(&c, budget, marker, TrainOptions { parallel })?;
            match output {
                Some(path) => {
                    write_file(&path, &table.to_file_string())?;
                    out.write_all(trace.to_tsv().as_bytes())?;
                }
                None => out.write_all(table.to_file_string().as_bytes())?,
            }
        }
        BpeCmd::Apply { table, words } => {
            let t = load_table(&table)?;
            writeln!(out, "word\tsegments\tunmarked")?;
            for w in &words {
                let seg = t.apply(w)?;
                writeln!(
                    out,
                    "{}\t{}\t{}",
                    seg.word(),
                    seg.segments().join(" "),
                    seg.unmarked_segments().join("|")
                )?;
            }
        }
        BpeCmd::Trace {
            table,
            corpus,
            input,
        } => {
            let t = load_table(&table)?;
            match corpus {
                Some(path) => {
                    let c = input.load(&path)?;
                    let trace = bpe::replay_trace(&t, &c)?;
                    out.write_all(trace.to_tsv().as_bytes())?;
                    writeln!(out)?;
                    out.write_all(bpe::state_table(&t, &c)?.as_bytes())?;
                }
                None => {
                    writeln!(out, "step\tpair\tmerged")?;
                    for (i, m) in t.merges().iter().enumerate() {
                        writeln!(out, "{}\t{} {}\t{}", i + 1, m.left, m.right, m.merged())?;
                    }
                }
            }
            let vocab: Vec<&str> = t.vocab().collect();
            writeln!(out, "vocabulary\t{}\t{}", vocab.len(), vocab.join(" "))?;
        }
    }
    Ok(())
}

/// Token sequences of a text for a given unit. Word units give one sequence
/// per line; character and BPE units give one sequence per word token.
fn sequences(text: &str, unit: &Unit, norm: &NormConfig) -> Result<Vec<Vec<String>>> {
    let words = |line: &str| -> Vec<String> {
        line.split_whitespace()
            .map(|t| norm.normalize(t))
            .filter(|t| !t.is_empty())
            .collect()
    };
    Ok(match unit {
        Unit::Words => text.lines().map(words).filter(|s| !s.is_empty()).collect(),
        Unit::Chars => words(text)
            .iter()
            .map(|w| w.chars().map(String::from).collect())
            .collect(),
        Unit::Bpe(path) => {
            let table = load_table(path)?;
            words(text)
                .iter()
                .map(|w| Ok(table.apply(w)?.segments().to_vec()))
                .collect::<Result<_>>()?
        }
    })
}

fn lm_cmd(cmd: LmCmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        LmCmd::Train {
            corpus,
            n,
            k,
            unit,
            output,
            lowercase,
        } => {
            let norm = if lowercase {
                NormConfig::lowercase()
            } else {
                NormConfig::default()
            };
            let seqs = sequences(&read_text(&corpus)?, &unit, &norm)?;
            let lm = lmstats::train_ngram(&seqs, n, k)?.with_unit(unit.label());
            match output {
                Some(path) => {
                    write_file(&path, &lm.to_file_string())?;
                    writeln!(out, "contexts\t{}", lm.contexts().count())?;
                    writeln!(out, "vocab\t{}", lm.vocab().len())?;
                    writeln!(
                        out,
                        "max_normalization_error\t{:e}",
                        lm.max_normalization_error()
                    )?;
                }
                None => out.write_all(lm.to_file_string().as_bytes())?,
            }
        }
        LmCmd::Score { model, text } => {
            let lm = NGramLM::from_file_str(&read_text(&model)?)?;
            let unit = parse_unit(lm.unit()).map_err(Error::Domain)?;
            let text = text.join(" ");
            let seqs = match unit {
                Unit::Words => vec![text.split_whitespace().map(str::to_owned).collect()],
                _ => sequences(&text, &unit, &NormConfig::default())?,
            };
            let mut total = 0.0;
            for seq in &seqs {
                let lp = lm.sequence_log_prob(seq)?;
                writeln!(out, "{}\t{lp:.6}", seq.join(" "))?;
                total += lp;
            }
            writeln!(out, "total\t{total:.6}")?;
        }
    }
    Ok(())
}

fn parse_span(s: &str) -> Result<std::ops::Range<usize>> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Domain(format!("span {s:?} is not start:end")))?;
    let parse = |v: &str| {
        v.parse::<usize>()
            .map_err(|_| Error::Domain(format!("span bound {v:?} is not a number")))
    };
    Ok(parse(a)?..parse(b)?)
}

fn sem_cmd(cmd: SemCmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        SemCmd::MuCheck {
            meanings,
            separator,
        } => {
            let lex = Lexicon::from_file_str(&read_text(&meanings)?)?;
            let m = MeaningFunction::from(&lex);
            let mu = semlab::build_mu(&m, Concat { separator });
            let report = semlab::mu_check(&mu, &m);
            out.write_all(report.to_tsv().as_bytes())?;
            if !report.all_pass() {
                return Err(Error::Integrity("μ check failed".into()));
            }
        }
        SemCmd::Focus {
            lexicon,
            word,
            span,
            allow_empty_residue,
            prosodic_min,
        } => {
            let lex = Lexicon::from_file_str(&read_text(&lexicon)?)?;
            let alts = semlab::focus_alternatives(
                &lex,
                &word,
                parse_span(&span)?,
                FocusOptions {
                    allow_empty_residue,
                    prosodic_min,
                },
            )?;
            for (w, m) in alts {
                writeln!(out, "{w}\t{m}")?;
            }
        }
        SemCmd::Coord {
            lexicon,
            shared,
            side,
            prosodic_min,
            parts,
        } => {
            let lex = Lexicon::from_file_str(&read_text(&lexicon)?)?;
            for e in semlab::coordinate_expand(&parts, &shared, side.into(), &lex, prosodic_min)? {
                let status = match &e.resolution {
                    Resolution::Resolved(m) => m.to_string(),
                    Resolution::Unresolved => "UNRESOLVED".into(),
                    Resolution::Blocked => "BLOCKED".into(),
                };
                writeln!(out, "{}\t{}\t{status}", e.part, e.word)?;
            }
        }
        SemCmd::Decompose {
            lexicon,
            residue,
            side,
            lookups,
        } => {
            let lex = Lexicon::from_file_str(&read_text(&lexicon)?)?;
            let f = semlab::decompose(&lex, &residue, side.into())?;
            for (alpha, m) in f.domain() {
                writeln!(out, "{alpha}\t{m}")?;
            }
            for q in &lookups {
                match f.apply(q) {
                    Some(m) => writeln!(out, "lookup\t{q}\t{m}")?,
                    None => writeln!(out, "lookup\t{q}\tundefined")?,
                }
            }
        }
        SemCmd::Gate { segment, min } => {
            writeln!(
                out,
                "{segment}\t{}\t{}",
                semlab::vowel_clusters(&segment),
                semlab::prosodic_gate(&segment, min)
            )?;
        }
    }
    Ok(())
}
