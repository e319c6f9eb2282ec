//! Sublevel-set covering of the circle of radius ½ at K = 1000, written as
//! SVG and audit CSV, then a one-level lift onto an ellipse on a cylinder.
//!
//! `cargo run --release --example covering -- [out_dir]`

use std::path::PathBuf;

use qmanifold::algebra::parse_poly;
use qmanifold::covering::{cover_intersection, cover_sublevel, CoveringConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let cfg = CoveringConfig::default();

    let circle = parse_poly("x1^2 + x2^2 - 1/4", 2)?;
    let c = cover_sublevel(&circle, 1000.0, 2.0, 100_000, 7, &cfg)?;
    let r = &c.report;
    println!("ladder {:?}, chain {:?}", r.ladder.levels, r.chain.alphas());
    for l in &r.levels {
        println!("  level {} K_j={} graphs={} hits={}", l.j, l.k_j, l.graphs, l.hits);
    }
    println!(
        "covered {} of {}, audits pass: {}",
        r.coverage.covered,
        r.coverage.samples,
        r.audit.all_pass()
    );
    if let Some(svg) = c.svg(3000) {
        std::fs::write(out.join("circle.svg"), svg)?;
    }
    std::fs::write(out.join("circle_audit.csv"), c.audit_csv())?;

    let cylinder = parse_poly("x1^2 + x2^2 - 1/4", 3)?;
    let plane = parse_poly("x3 - x1", 3)?;
    let lift = cover_intersection(&cylinder, &plane, 1000.0, 2.0, 2000, 7, &cfg)?;
    println!(
        "intersection: {} lifted graphs over {} boxes, covered fraction {}",
        lift.lifted_graphs, lift.boxes_used, lift.fraction
    );
    Ok(())
}
