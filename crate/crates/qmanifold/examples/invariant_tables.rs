//! 𝔡 and X tables of the good fixture, and X tables of the paraboloid next
//! to their closed form.

use qmanifold::algebra::QuadTuple;
use qmanifold::invariants::{
    d_table, d_table_csv, x_paraboloid_closed, x_table_csv, GoodManifoldSpec, XConfig, XSolver,
};
use qmanifold::pencil::RankConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 7;
    let good = GoodManifoldSpec::from_i64(&[1, 1, 1, 1], &[1, 2, 3, 4])?.tuple();
    println!("{good}");
    print!("{}", d_table_csv(&d_table(&good, &RankConfig::default(), seed)?));

    // One solver shares bad-set dimensions across k.
    let solver = XSolver::new(&good, &XConfig::default(), seed);
    for k in 3..=5 {
        print!("{}", x_table_csv(&solver.x_table(k)?));
    }

    let d = 3;
    let solver = XSolver::new(&QuadTuple::paraboloid(d), &XConfig::default(), seed);
    for k in 2..=d + 1 {
        let table = solver.x_table(k)?;
        let closed: Vec<usize> = (0..=d + 1)
            .map(|m| x_paraboloid_closed(d, k, m))
            .collect::<Result<_, _>>()?;
        println!(
            "paraboloid d={d} k={k}: computed {:?}, closed form {closed:?}",
            table.values()
        );
    }
    Ok(())
}
