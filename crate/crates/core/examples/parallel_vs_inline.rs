//! The same DAG evaluated inline and on the pool gives bit-identical results.

use std::error::Error;

use exactdag::gen::{ExprSpec, Generator};
use exactdag::harness::{self, TABLE_HEADER};
use exactdag::Executor;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = ExprSpec::new(Generator::RandomDag).nodes(300).depth(9).seed(42);
    println!("{TABLE_HEADER}");
    let reps = harness::verify(&spec, 4, Executor::Pooled, -300);
    for r in &reps {
        println!("{r}");
    }
    if let Some(bad) = reps.iter().find(|r| !r.pass()) {
        return Err(format!("mismatch: {}", bad.machine_line()).into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
