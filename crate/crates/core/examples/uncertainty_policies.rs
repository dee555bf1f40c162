//! The five ways to treat uncertain (-1) annotations.
//!
//!     cargo run --example uncertainty_policies

use hierlabel::data::Label;
use hierlabel::policy::{apply_policy, PolicyKind};
use hierlabel::{Grid, Result, UncertaintyPolicy};

fn main() -> Result<()> {
    use Label::*;
    let labels = Grid::from_rows(
        4,
        vec![
            vec![Pos, Unc, Neg, Missing],
            vec![Unc, Unc, Pos, Neg],
            vec![Neg, Missing, Unc, Pos],
        ],
    )?;

    for kind in [
        PolicyKind::Ignore,
        PolicyKind::Ones,
        PolicyKind::Zeros,
        PolicyKind::OnesLsr,
        PolicyKind::ZerosLsr,
    ] {
        let policy = UncertaintyPolicy::with_defaults(kind);
        let (targets, mask) = apply_policy(&labels, &policy, 42)?;
        println!("{policy}");
        for i in 0..labels.rows() {
            let cells: Vec<String> = (0..labels.cols())
                .map(|k| {
                    if *mask.get(i, k) {
                        format!("{:>5.3}", targets.get(i, k))
                    } else {
                        "    -".to_string()
                    }
                })
                .collect();
            println!("  {}", cells.join(" "));
        }
    }

    // Draws are keyed by (seed, row, column): same seed, same targets.
    let lsr = UncertaintyPolicy::ones_lsr(0.55, 0.85)?;
    let a = apply_policy(&labels, &lsr, 7)?;
    let b = apply_policy(&labels, &lsr, 7)?;
    assert_eq!(a, b);
    println!("bounds are validated: {}", UncertaintyPolicy::ones_lsr(0.9, 0.2).unwrap_err());
    Ok(())
}
