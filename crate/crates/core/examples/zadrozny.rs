//! Any meaning assignment can be made compositional by letting each string
//! denote a function. Build that function and check it.
//!
//!     cargo run --example zadrozny

use segmenta::semlab::{self, Concat, MeaningFunction, MuArg};

fn main() -> segmenta::Result<()> {
    let m = MeaningFunction::new([
        ("chases", "CHASE"),
        ("mice", "MICE"),
        ("rainbows", "RAINBOWS"),
        ("chases mice", "CHASE(MICE)"),
        // an idiom: nothing about its parts predicts this
        ("chases rainbows", "PURSUE-THE-UNATTAINABLE"),
    ])?;
    let mu = semlab::build_mu(&m, Concat::spaced());

    for s in mu.strings() {
        for (arg, value) in mu.value(s).into_iter().flatten() {
            println!("mu({s:?}) : {arg:?} -> {value:?}");
        }
    }
    let idiom = mu.apply("chases", &MuArg::Fn("rainbows".into()));
    println!("mu(chases)(mu(rainbows)) = {idiom:?}");

    let report = semlab::mu_check(&mu, &m);
    print!("{}", report.to_tsv());
    assert!(report.all_pass());
    Ok(())
}
