//! Numeric dimension oracle: whole sets, and the sup over η of fiber dimensions.

use qmanifold::algebra::parse_poly;
use qmanifold::semialg::{slice_sup_dim, variety_dim_estimate, DimConfig, SemiAlgebraicSet, SliceConfig, SliceProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = DimConfig {
        radius: 1.0,
        ..DimConfig::default()
    };
    for (text, n) in [
        ("x1^2 + x2^2 - 1 = 0", 2),
        ("x1^2 + x2^2 - x3^2 = 0", 3),
        ("x1 = 0 && x2 = 0", 2),
        ("x1^2 + x2^2 + 1 = 0", 2),
        ("x1 - x2 = 0 && x1 > 0", 2),
    ] {
        let set = SemiAlgebraicSet::parse(text, n)?;
        let r = variety_dim_estimate(&set, &cfg, 1);
        println!("dim {{{text}}} = {} ({})", r.value, r.confidence.as_str());
    }

    // η = x1; the fiber {ξ₁² + ξ₂² = η} is a circle for η > 0.
    let problem = SliceProblem::new(&[parse_poly("x2^2 + x3^2 - x1", 3)?], &[], 1);
    let r = slice_sup_dim(&problem, &[], &SliceConfig::default(), 3);
    println!("sup fiber dim = {} at η = {:?}", r.value, r.witness_eta);
    Ok(())
}
