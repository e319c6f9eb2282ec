//! Row-rank over a polynomial ring, pencil ranks and echelon families.

use qmanifold::algebra::{parse_poly, QuadTuple};
use qmanifold::pencil::{echelon_types, family_rank, PolyMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = |s: &str| parse_poly(s, 2);
    // The determinant vanishes identically, yet the rows are independent over ℝ.
    let b = PolyMatrix::from_rows(vec![vec![x("x1")?, x("x1")?], vec![x("x2")?, x("x2")?]])?;
    println!("det = {}, row_rank = {}", b.det()?, b.row_rank());
    println!("minor-sum poly at order 2: {}", b.minor_sum_poly(2)?);

    for d in 1..=4 {
        let t = QuadTuple::paraboloid(d);
        println!("paraboloid d={d}: family rank {}", family_rank(&t.matrices())?);
    }
    let mc = QuadTuple::maximal_codim(3);
    println!("maximal codim d=3: family rank {}", family_rank(&mc.matrices())?);

    for fam in echelon_types(2, 4, 2)? {
        println!("{fam:?}");
    }
    Ok(())
}
