//! Shared radicals count once in the degree bound.

use std::error::Error;

use exactdag::eval;
use exactdag::Real;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let s2 = Real::new(2.0).sqrt();
    let s3 = Real::new(3.0).sqrt();
    let c = Real::new(5.0).root(3)?;
    // s2 and s3 appear twice each
    let e = (&s2 + &s3) * (&s2 - &s3) + &c * &s2;
    eval::init_node_data(e.node())?;
    eval::guarantee_bound_two_to(e.node(), -200)?;
    let d = e.node().algebraic_degree();
    println!("degree bound {d} (2 * 2 * 3)");
    assert_eq!(d, 12);
    let sb = e.node().sep_bound_state().unwrap();
    println!("separation state u={} l={}, nonzero values exceed 2^{}", sb.u, sb.l, sb.bound(d));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
