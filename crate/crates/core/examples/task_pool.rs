//! The pool on its own: workers appear on demand and exit when idle.

use std::error::Error;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use exactdag::{PoolConfig, TaskPool};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let pool = TaskPool::new(PoolConfig { max_threads: 3, task_threshold: 2, ..PoolConfig::default() });
    let sum = Arc::new(AtomicUsize::new(0));
    for i in 1..=1000 {
        let sum = sum.clone();
        pool.add_task(move || {
            sum.fetch_add(i, Ordering::SeqCst);
        });
    }
    let t = Instant::now();
    while pool.stats().thread_count > 0 || pool.stats().executed < 1000 {
        if t.elapsed() > Duration::from_secs(10) {
            return Err("pool did not drain".into());
        }
        std::thread::sleep(Duration::from_millis(1));
    }
    let st = pool.stats();
    println!("sum {} ({st:?})", sum.load(Ordering::SeqCst));
    assert_eq!(sum.load(Ordering::SeqCst), 500_500);
    assert!(st.peak_threads <= 3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
