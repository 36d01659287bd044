//! Hard alignment from an attention matrix, drawn as text and as SVG.
//!
//!     cargo run --example alignment > /dev/null   # writes alignment.svg

use segmenta::align::{self, AttentionMatrix, RenderFormat};

fn main() -> segmenta::Result<()> {
    let am = AttentionMatrix::from_segments(
        &["period", "on", "t", "ist"],
        &["par", "od", "ont", "iste"],
        vec![
            vec![0.62, 0.20, 0.08, 0.10],
            vec![0.55, 0.30, 0.05, 0.10],
            vec![0.10, 0.70, 0.15, 0.05],
            vec![0.05, 0.10, 0.15, 0.70],
        ],
    )?;
    let al = align::hard_align(&am)?;
    print!("{}", align::render(&am, &al, RenderFormat::Text)?);
    std::fs::write("alignment.svg", align::render(&am, &al, RenderFormat::Svg)?)?;
    eprintln!("wrote alignment.svg");
    Ok(())
}
