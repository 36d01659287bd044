//! Word parts that carry no meaning of their own can still be focused and
//! coordinated, as in "ortho- and periodontists".
//!
//!     cargo run --example artstein

use segmenta::semlab::{self, FocusOptions, Lexicon, Side};

fn main() -> segmenta::Result<()> {
    let lex = Lexicon::from_file_str(
        "orthodontists\tORTHODONTIST\t4\n\
         periodontists\tPERIODONTIST\t5\n\
         stalagmite\tSTALAGMITE\t3\n\
         stalactite\tSTALACTITE\t3\n",
    )?;

    let f = semlab::decompose(&lex, "dontists", Side::Suffix)?;
    for (alpha, m) in f.domain() {
        println!("[[dontists]]({alpha}) = {m}");
    }
    println!("[[dontists]](endo) = {:?}", f.apply("endo"));

    for e in semlab::coordinate_expand(&["ortho", "perio"], "dontists", Side::Suffix, &lex, None)? {
        println!("{} -> {} {:?}", e.part, e.word, e.resolution);
    }

    // focus "gm" (chars 5..7); "ct" in the same slot gives stalactite
    let alts = semlab::focus_alternatives(&lex, "stalagmite", 5..7, FocusOptions::default())?;
    println!(
        "focus alternatives: {:?}",
        alts.iter().map(|(w, _)| w).collect::<Vec<_>>()
    );

    for part in ["ortho", "s", "perio"] {
        println!(
            "{part:>6}: {} vowel clusters, gate {}",
            semlab::vowel_clusters(part),
            semlab::prosodic_gate(part, 2)
        );
    }
    Ok(())
}
