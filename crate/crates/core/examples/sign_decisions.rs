//! Exact comparisons that doubles get wrong.

use std::error::Error;

use exactdag::Real;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // sqrt(2) + sqrt(3) vs sqrt(5 + 2 sqrt(6)): equal
    let lhs = Real::new(2.0).sqrt() + Real::new(3.0).sqrt();
    let rhs = (Real::new(5.0) + Real::new(2.0) * Real::new(6.0).sqrt()).sqrt();
    let c = lhs.compare(&rhs)?;
    println!("sqrt2 + sqrt3 vs sqrt(5 + 2 sqrt6): {c:?}");
    assert_eq!(c, std::cmp::Ordering::Equal);

    // sqrt(n+1) - sqrt(n) == 1/(sqrt(n+1) + sqrt(n)); cancellation fools doubles
    let n = Real::new(1e15);
    let n1 = &n + Real::new(1.0);
    let d = (n1.sqrt() - n.sqrt()) - Real::new(1.0) / (n1.sqrt() + n.sqrt());
    let s = d.sign()?;
    let f = 1e15f64;
    let f64_diff = ((f + 1.0).sqrt() - f.sqrt()) - 1.0 / ((f + 1.0).sqrt() + f.sqrt());
    println!("sqrt(n+1) - sqrt(n) - 1/(sqrt(n+1) + sqrt(n)), n = 1e15: exact sign {s}, double says {f64_diff:e}");
    assert_eq!(s, 0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
