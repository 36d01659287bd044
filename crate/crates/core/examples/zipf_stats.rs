//! Rank/frequency profile of a text: how much of it the head covers and how
//! long the tail is.
//!
//!     cargo run --example zipf_stats -- some.txt

use segmenta::corpus::{self, Corpus, NormConfig};

const FALLBACK: &str = "It was the best of times, it was the worst of times, it was the age of \
    wisdom, it was the age of foolishness, it was the epoch of belief, it was the epoch of \
    incredulity, it was the season of Light, it was the season of Darkness.";

fn main() -> segmenta::Result<()> {
    let cfg = NormConfig {
        lowercase: true,
        strip_punctuation: true,
    };
    let corpus = match std::env::args().nth(1) {
        Some(path) => Corpus::load(&std::fs::read(&path)?, &cfg)?.with_source_id(path),
        None => Corpus::from_text(FALLBACK, &cfg)?,
    };
    let z = corpus::zipf_profile(&corpus)?;
    println!("{} types, {} tokens", corpus.type_count(), z.total_tokens());
    for e in z.rank_frequency().iter().take(10) {
        println!("{:>4} {:<14} {:>6}", e.rank, e.word, e.count);
    }
    for k in [1, 5, 10] {
        println!(
            "top {k:>2} types cover {:.1}% of tokens",
            100.0 * z.head_mass(k)
        );
    }
    println!("{} types occur once", z.tail_count(1));
    Ok(())
}
