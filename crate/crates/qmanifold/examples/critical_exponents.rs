//! Critical exponents per family, and the two exponent conditions checked
//! against computed X tables.

use qmanifold::algebra::{parse_tuple, rat};
use qmanifold::exponents::{
    critical_p_good, critical_p_maxcodim, critical_p_paraboloid, dec_exp_codim2_slice, dec_exp_paraboloid_slice,
    paraboloid_threshold_by_bisection, verify_with_table,
};
use qmanifold::invariants::{x_table, GoodManifoldSpec, XConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for d in [2, 3, 4, 10, 50] {
        let par = critical_p_paraboloid(d)?;
        let good = critical_p_good(d)?;
        println!(
            "d={d:<3} paraboloid {} (k*={})  good {} (k*={})  maxcodim {}",
            rat::format(&par.value),
            par.argmin_k,
            rat::format(&good.value),
            good.argmin_k,
            rat::format(&critical_p_maxcodim(d)),
        );
    }
    let (lo, hi) = paraboloid_threshold_by_bisection(3, &rat::r(1, 1000))?;
    println!("bisection d=3: [{}, {}]", rat::format(&lo), rat::format(&hi));

    let cfg = XConfig::default();
    let mock = parse_tuple("d=2; x1^2; x1*x2; x2^2")?;
    let table = x_table(&mock, 3, &cfg, 7)?;
    for p in [rat::int(6), rat::int(6) + rat::r(1, 100)] {
        let r = verify_with_table(dec_exp_paraboloid_slice, &table, 2, 3, &p)?;
        println!("mockenhaupt p={}: {r:?}", rat::format(&p));
    }

    let good = GoodManifoldSpec::from_i64(&[1, 1, 1, 1], &[1, 2, 3, 4])?.tuple();
    let table = x_table(&good, 4, &cfg, 7)?;
    let p = rat::r(10, 3) + rat::r(1, 100);
    let r = verify_with_table(dec_exp_codim2_slice, &table, 4, 2, &p)?;
    println!("good d=4 k=4 p={}: holds={}", rat::format(&p), r.holds);
    Ok(())
}
