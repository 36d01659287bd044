//! Why subwords: a word vocabulary misses unseen forms, an embedding matrix
//! grows with vocabulary size, and a character model still scores anything.
//!
//!     cargo run --example open_vocabulary

use std::collections::HashSet;

use segmenta::bpe::{self, Budget};
use segmenta::corpus::{Corpus, NormConfig};
use segmenta::lmstats::{self, train_ngram};
use segmenta::segcore::MarkerPolicy;

fn main() -> segmenta::Result<()> {
    let cfg = NormConfig::default();
    let train = Corpus::from_text("low low low lowest newer newer newer wider new", &cfg)?;
    let eval = Corpus::from_text("lower newest widest low", &cfg)?;

    let words: HashSet<&str> = train.word_types().map(|(w, _)| w).collect();
    let r = lmstats::oov_rate(&words, &eval)?;
    println!(
        "word vocabulary: {:.0}% of eval tokens are OOV",
        100.0 * r.token_rate()
    );

    let (table, _) = bpe::train(&train, Budget::Merges(10), MarkerPolicy::default())?;
    let subwords: HashSet<String> = table.vocab().map(str::to_owned).collect();
    let segmented = lmstats::segment_corpus(&eval, &table)?;
    let r = lmstats::oov_rate(&subwords, &segmented)?;
    println!(
        "BPE vocabulary:  {:.0}% of eval segments are OOV",
        100.0 * r.token_rate()
    );

    for (v, d) in [(20_000, 512), (50_000, 512), (8_000, 256)] {
        let b = lmstats::embedding_param_count(v, d)?;
        println!(
            "{v:>6} x {d} = {:>10} parameters (over 10M: {})",
            b.param_count,
            b.exceeds_bound()
        );
    }

    let mut char_seqs = Vec::new();
    let mut word_seqs = Vec::new();
    for (w, c) in train.word_types() {
        for _ in 0..c {
            char_seqs.push(w.chars().map(String::from).collect::<Vec<_>>());
            word_seqs.push(vec![w.to_owned()]);
        }
    }
    let chars = train_ngram(&char_seqs, 2, 0.0)?;
    let words = train_ngram(&word_seqs, 1, 0.0)?;
    match words.sequence_log_prob(&["lower"]) {
        Ok(lp) => println!("word model: log p(lower) = {lp:.3}"),
        Err(e) => println!("word model: {e}"),
    }
    let lp = chars.sequence_log_prob(&["l", "o", "w", "e", "r"])?;
    println!("char bigram model: log p(l o w e r) = {lp:.3}");
    Ok(())
}
