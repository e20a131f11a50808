//! Directed rounding brackets the true result.

use std::error::Error;

use exactdag::{BigFloat, RoundingMode::*};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let one = BigFloat::one();
    let three = BigFloat::from_i64(3);
    for p in [8, 24, 53] {
        let (lo, _) = one.div(&three, p, Down);
        let (mid, _) = one.div(&three, p, Nearest);
        let (hi, exact) = one.div(&three, p, Up);
        println!("1/3 at {p:>2} bits: {lo} <= {mid} <= {hi}");
        assert!(lo <= mid && mid <= hi && lo < hi && !exact);
    }
    let (r, exact) = BigFloat::from_i64(2).root(2, 64, Up);
    println!("sqrt 2 rounded up: {r} (exact: {exact}), as double {}", r.to_f64(Up));
    let back: BigFloat = r.to_string().parse()?;
    assert_eq!(back, r);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
