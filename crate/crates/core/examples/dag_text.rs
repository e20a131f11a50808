//! Dump a DAG to text and read it back.

use std::error::Error;

use exactdag::{text, Real};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let x = Real::new(0.1);
    let r = (&x * &x + Real::new(1.0)).sqrt() - &x;
    let s = text::serialize(&r);
    print!("{s}");
    let back = text::parse(&s)?;
    assert_eq!(text::serialize(&back), s);
    assert_eq!(back.sign()?, r.sign()?);
    match text::parse("exactdag-dag 1\n0 ROOT 2 7\nroot 0\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => return Err("bad child accepted".into()),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
