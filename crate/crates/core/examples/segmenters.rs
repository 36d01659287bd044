//! Character, byte and BPE segmentations of the same words, and the
//! boundaries each one implies.
//!
//!     cargo run --example segmenters -- naïve 東京 periodontists

use segmenta::bpe::{self, Budget};
use segmenta::corpus::{Corpus, NormConfig};
use segmenta::segcore::{self, ByteSegmenter, CharSegmenter, MarkerPolicy, Segmenter};

const TEXT: &str = "the orthodontists and the periodontists met the dentists \
    at the dental school where periodontal research is done";

fn main() -> segmenta::Result<()> {
    let mut words: Vec<String> = std::env::args().skip(1).collect();
    if words.is_empty() {
        words = ["naïve", "東京", "periodontists"]
            .map(String::from)
            .to_vec();
    }

    let corpus = Corpus::from_text(TEXT, &NormConfig::default())?;
    let (table, _) = bpe::train(&corpus, Budget::Merges(40), MarkerPolicy::default())?;
    let chars = CharSegmenter::new(MarkerPolicy::none());
    let segmenters: [(&str, &dyn Segmenter); 3] = [
        ("chars", &chars),
        ("bytes", &ByteSegmenter),
        ("bpe", &table),
    ];

    for word in &words {
        println!("{word}");
        for (name, s) in segmenters {
            let seg = s.segment(word)?;
            assert_eq!(&segcore::join(&seg)?, word);
            println!(
                "  {name:<6}{:<40}cuts {:?}",
                seg.to_string(),
                seg.boundaries()
            );
        }
    }
    Ok(())
}
