//! Absolute and relative error requests.

use std::error::Error;

use exactdag::{BigFloat, Real};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let x = Real::new(2.0).sqrt();
    for q in [-10, -100, -1000] {
        x.guarantee_absolute_error_two_to(q)?;
        let (a, e) = x.approx_and_error()?;
        println!("q={q:>5}: error {e}, {} mantissa bits", a.get_prec());
        assert!(e <= BigFloat::pow2(q));
    }

    // tiny value: relative accuracy needs far more absolute accuracy
    let tiny = Real::new(3.0).sqrt() * Real::from_bigfloat(BigFloat::pow2(-3000));
    tiny.guarantee_relative_error_two_to(-60)?;
    let (a, e) = tiny.approx_and_error()?;
    println!("relative 2^-60 on sqrt3 * 2^-3000: approx ~2^{}, error ~2^{}", a.floor_log2(), e.ceil_log2());
    assert!(e.ceil_log2() <= a.floor_log2() - 59);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
