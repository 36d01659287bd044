//! Score a statistical segmentation against a morphological one with exact
//! boundary precision, recall and F1.
//!
//!     cargo run --example compare_segmentations

use segmenta::segcore::{self, Segmentation};

fn main() -> segmenta::Result<()> {
    let pairs = [
        ("period on t ist s", "peri odont ist s"),
        ("ortho don t ist s", "ortho dont ist s"),
        ("un help ful", "un help ful"),
        ("dentists", "dent ist s"),
    ];
    let mut scores = Vec::new();
    for (cand, reference) in pairs {
        let c = Segmentation::reference(cand)?;
        let r = Segmentation::reference(reference)?;
        let s = segcore::compare_segmentations(&c, &r)?;
        println!(
            "{:<16} {:<20} vs {:<20} P={:<4} R={:<4} F1={}",
            c.word(),
            cand,
            reference,
            s.precision,
            s.recall,
            s.f1
        );
        scores.push(s);
    }
    if let Some((p, r, f)) = segcore::mean_score(&scores) {
        println!("mean P={p} R={r} F1={f}");
    }
    Ok(())
}
