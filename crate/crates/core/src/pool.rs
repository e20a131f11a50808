//! On-demand task pool over a lock-free queue.
//!
//! Workers are started only when there is work, drain the queue and exit.
//! A worker that leaves the pool empty while tasks are still counted starts
//! a replacement, so a submitted task is never stranded.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering::SeqCst};
use std::sync::{Arc, OnceLock};

use crossbeam::queue::SegQueue;

pub type Task = Box<dyn FnOnce() + Send + 'static>;

pub const MAX_THREADS: usize = 4;
pub const TASK_THRESHOLD: usize = 5;
pub const INITIAL_CAPACITY: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PoolConfig {
    pub max_threads: usize,
    pub task_threshold: usize,
    /// Nominal; the segmented queue grows on demand.
    pub initial_capacity: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig { max_threads: MAX_THREADS, task_threshold: TASK_THRESHOLD, initial_capacity: INITIAL_CAPACITY }
    }
}

impl PoolConfig {
    /// `max_threads` set to the machine's available parallelism.
    pub fn hardware() -> Self {
        let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(MAX_THREADS);
        PoolConfig { max_threads: n, ..Self::default() }
    }

    fn from_env() -> Self {
        let mut c = Self::default();
        let get = |k: &str| std::env::var(k).ok().and_then(|v| v.parse::<usize>().ok());
        if let Some(n) = get("EXACTDAG_MAX_THREADS") {
            c.max_threads = n.max(1);
        }
        if let Some(n) = get("EXACTDAG_TASK_THRESHOLD") {
            c.task_threshold = n;
        }
        c
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PoolStats {
    pub thread_count: usize,
    pub task_count: usize,
    pub spawned: usize,
    pub executed: usize,
    pub peak_threads: usize,
}

pub struct TaskPool {
    tasks: SegQueue<Task>,
    thread_count: AtomicUsize,
    task_count: AtomicUsize,
    max_threads: AtomicUsize,
    task_threshold: AtomicUsize,
    capacity: usize,
    spawned: AtomicUsize,
    executed: AtomicUsize,
    peak: AtomicUsize,
}

static SHARED: OnceLock<Arc<TaskPool>> = OnceLock::new();

impl TaskPool {
    pub fn new(config: PoolConfig) -> Arc<Self> {
        if !Self::is_lock_free() {
            log::warn!("task pool atomics are not lock-free on this target");
        }
        Arc::new(TaskPool {
            tasks: SegQueue::new(),
            thread_count: AtomicUsize::new(0),
            task_count: AtomicUsize::new(0),
            max_threads: AtomicUsize::new(config.max_threads.max(1)),
            task_threshold: AtomicUsize::new(config.task_threshold),
            capacity: config.initial_capacity,
            spawned: AtomicUsize::new(0),
            executed: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        })
    }

    /// Process-wide pool, created on first use and never torn down.
    /// Reads `EXACTDAG_MAX_THREADS` / `EXACTDAG_TASK_THRESHOLD` once.
    pub fn shared() -> &'static Arc<TaskPool> {
        SHARED.get_or_init(|| TaskPool::new(PoolConfig::from_env()))
    }

    pub fn is_lock_free() -> bool {
        cfg!(target_has_atomic = "ptr")
    }

    pub fn config(&self) -> PoolConfig {
        PoolConfig {
            max_threads: self.max_threads.load(SeqCst),
            task_threshold: self.task_threshold.load(SeqCst),
            initial_capacity: self.capacity,
        }
    }

    pub fn set_max_threads(&self, n: usize) {
        self.max_threads.store(n.max(1), SeqCst);
    }

    pub fn set_task_threshold(&self, n: usize) {
        self.task_threshold.store(n, SeqCst);
    }

    pub fn stats(&self) -> PoolStats {
        PoolStats {
            thread_count: self.thread_count.load(SeqCst),
            task_count: self.task_count.load(SeqCst),
            spawned: self.spawned.load(SeqCst),
            executed: self.executed.load(SeqCst),
            peak_threads: self.peak.load(SeqCst),
        }
    }

    pub fn reset_peak(&self) {
        self.peak.store(self.thread_count.load(SeqCst), SeqCst);
    }

    pub fn add_task<F: FnOnce() + Send + 'static>(self: &Arc<Self>, f: F) {
        let tasks = self.task_count.fetch_add(1, SeqCst) + 1;
        self.tasks.push(Box::new(f));
        let threads = self.thread_count.load(SeqCst);
        let max = self.max_threads.load(SeqCst);
        if (threads == 0 || tasks > self.task_threshold.load(SeqCst)) && threads < max {
            self.launch_thread();
        }
    }

    fn launch_thread(self: &Arc<Self>) {
        let n = self.thread_count.fetch_add(1, SeqCst) + 1;
        self.peak.fetch_max(n, SeqCst);
        self.spawned.fetch_add(1, SeqCst);
        let pool = Arc::clone(self);
        std::thread::Builder::new()
            .name("exactdag-worker".into())
            .spawn(move || pool.work())
            .expect("failed to spawn pool worker");
    }

    fn work(self: Arc<Self>) {
        while let Some(task) = self.tasks.pop() {
            self.task_count.fetch_sub(1, SeqCst);
            if catch_unwind(AssertUnwindSafe(task)).is_err() {
                log::error!("pool task panicked");
            }
            self.executed.fetch_add(1, SeqCst);
        }
        self.dec_thread_count();
    }

    fn dec_thread_count(self: &Arc<Self>) {
        // A task pushed between our last pop and this point would otherwise be stranded.
        if self.thread_count.fetch_sub(1, SeqCst) == 1 && self.task_count.load(SeqCst) > 0 {
            self.launch_thread();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::{Duration, Instant};

    fn wait_idle(pool: &TaskPool, executed: usize) {
        let t = Instant::now();
        while pool.stats().executed < executed || pool.stats().thread_count > 0 {
            assert!(t.elapsed() < Duration::from_secs(20), "pool did not drain: {:?}", pool.stats());
            std::thread::sleep(Duration::from_millis(1));
        }
    }

    #[test]
    fn single_task_starts_one_worker() {
        let pool = TaskPool::new(PoolConfig::default());
        let hits = Arc::new(AtomicUsize::new(0));
        let h = hits.clone();
        pool.add_task(move || {
            h.fetch_add(1, SeqCst);
        });
        wait_idle(&pool, 1);
        assert_eq!(hits.load(SeqCst), 1);
        assert_eq!(pool.stats().spawned, 1);
        assert_eq!(pool.stats().task_count, 0);
    }

    #[test]
    fn respects_max_threads() {
        let pool = TaskPool::new(PoolConfig { max_threads: 2, task_threshold: 0, initial_capacity: 20 });
        for _ in 0..200 {
            pool.add_task(move || std::thread::sleep(Duration::from_micros(50)));
        }
        wait_idle(&pool, 200);
        assert!(pool.stats().peak_threads <= 2);
    }

    #[test]
    fn max_one_still_finishes() {
        let pool = TaskPool::new(PoolConfig { max_threads: 1, ..Default::default() });
        let hits = Arc::new(AtomicUsize::new(0));
        for _ in 0..1000 {
            let h = hits.clone();
            pool.add_task(move || {
                h.fetch_add(1, SeqCst);
            });
        }
        wait_idle(&pool, 1000);
        assert_eq!(hits.load(SeqCst), 1000);
        assert_eq!(pool.stats().peak_threads, 1);
    }

    #[test]
    fn panicking_task_keeps_counts() {
        let pool = TaskPool::new(PoolConfig::default());
        pool.add_task(|| panic!("boom"));
        pool.add_task(|| {});
        wait_idle(&pool, 2);
        assert_eq!(pool.stats().task_count, 0);
    }
}
