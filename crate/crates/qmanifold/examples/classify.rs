//! Good-manifold and well-curvedness predicates on the shipped fixtures.

use qmanifold::cli::{fixtures, load_tuple};
use qmanifold::invariants::{good_weak_condition, is_good, is_well_curved, GoodManifoldSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in fixtures::names().filter(|n| n.ends_with(".qt")) {
        let t = load_tuple(name)?;
        let mut line = format!("{name:<22} d={} n={}", t.d(), t.n());
        if let Some(spec) = GoodManifoldSpec::from_tuple(&t) {
            let weak = good_weak_condition(&spec);
            line += &format!(" good={} weak={}", is_good(&spec), weak.holds);
            if let Some(w) = weak.witness {
                line += &format!(" witness=({})", w.join(", "));
            }
        }
        if let [p, q] = t.forms() {
            let wc = is_well_curved(p, q)?;
            line += &format!(" well_curved={} multiplicities={:?}", wc.value, wc.multiplicities);
        }
        println!("{line}");
    }
    Ok(())
}
