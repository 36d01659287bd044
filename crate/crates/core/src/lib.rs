//! Subword segmentation laboratory.
//!
//! Every segmenter in this crate (characters, UTF-8 bytes, learned BPE merges,
//! user-supplied reference segmentations) produces a [`Segmentation`] through the
//! [`Segmenter`] trait, so the scoring, language-model and alignment code never
//! needs to know which one was used.
//!
//! | module | what it does |
//! |---|---|
//! | [`corpus`] | word-type frequency tables and rank/frequency statistics |
//! | [`segcore`] | the `Segmentation` type, char/byte segmenters, boundary scoring |
//! | [`bpe`] | merge-table training, ordered replay, table files |
//! | [`lmstats`] | OOV rates, embedding budgets, add-k n-gram scoring |
//! | [`align`] | hard alignments from attention weights, text/SVG diagrams |
//! | [`semlab`] | Zadrozny's μ construction and Artstein-style residue functions |
//! | [`cli`] | the `segmenta` command line |
//!
//! ```
//! use segmenta::bpe::{self, Budget};
//! use segmenta::corpus::{Corpus, NormConfig};
//! use segmenta::segcore::MarkerPolicy;
//!
//! let corpus = Corpus::from_text(
//!     "low low low low low lowest lowest newer newer newer newer newer newer \
//!      wider wider wider new new",
//!     &NormConfig::default(),
//! ).unwrap();
//! let (table, _trace) = bpe::train(&corpus, Budget::Merges(8), MarkerPolicy::default()).unwrap();
//! let lower = table.apply("lower").unwrap();
//! assert_eq!(lower.segments(), ["low", "er·"]);
//! ```

pub mod align;
pub mod bpe;
pub mod cli;
pub mod corpus;
mod error;
pub mod lmstats;
pub mod segcore;
pub mod semlab;

pub use error::{Error, Result};
pub use segcore::{Segmentation, Segmenter};
