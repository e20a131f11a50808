//! Zero is only provable through the separation bound; watch the flag.

use std::error::Error;

use exactdag::gen::{zero_identity, ZeroFamily};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for fam in ZeroFamily::ALL {
        let z = zero_identity(fam, 7.0, 11.5);
        let s = z.sign()?;
        println!("{fam:?}: sign {s}, zeroed by separation: {}", z.node().zeroed_by_separation());
        assert_eq!(s, 0);
        assert!(z.node().zeroed_by_separation());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
