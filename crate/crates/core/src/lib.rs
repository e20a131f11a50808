//! Exact sign decisions for real numbers built as lazy expression DAGs.
//!
//! Arithmetic on [`Real`] only records the operation. A sign query first
//! tries a double interval filter; if that cannot decide, the DAG is
//! evaluated with bigfloats to increasing accuracy until the value is
//! separated from zero or a separation bound proves it is zero. Recomputation
//! of independent nodes runs on a small on-demand thread pool.
//!
//! ```
//! use exactdag::Real;
//! let two = Real::new(2.0);
//! let s = two.sqrt();
//! assert_eq!((&s * &s - &two).sign().unwrap(), 0);
//! assert_eq!((s - Real::new(1.5)).sign().unwrap(), -1);
//! ```

pub mod bigfloat;
pub mod dag;
pub mod eval;
pub mod gen;
pub mod harness;
pub mod interval;
pub mod pool;
mod real;
pub mod sep_bound;
pub mod text;

pub use bigfloat::{BigFloat, RoundingMode};
pub use dag::{Node, NodeKind};
pub use eval::{with_executor, EvalError, Executor};
pub use interval::Interval;
pub use pool::{PoolConfig, TaskPool};
pub use real::Real;
