//! Train a merge table on a five-word corpus, watch the merges happen, and
//! segment words the corpus never saw.
//!
//!     cargo run --example toy_bpe

use segmenta::bpe::{self, Budget};
use segmenta::corpus::Corpus;
use segmenta::segcore::MarkerPolicy;

fn main() -> segmenta::Result<()> {
    let corpus = Corpus::from_counts([
        ("low", 5),
        ("lowest", 2),
        ("newer", 6),
        ("wider", 3),
        ("new", 2),
    ])?;
    let (table, trace) = bpe::train(&corpus, Budget::Merges(8), MarkerPolicy::default())?;

    print!("{}", trace.to_tsv());
    println!();
    print!("{}", bpe::state_table(&table, &corpus)?);
    println!();

    for word in ["lower", "worst", "deer", "newest"] {
        let seg = table.apply(word)?;
        println!("{word:>8}  {seg}");
    }

    // the same table round-trips through its text form
    let reloaded = bpe::MergeTable::from_file_str(&table.to_file_string())?;
    assert_eq!(reloaded, table);
    Ok(())
}
