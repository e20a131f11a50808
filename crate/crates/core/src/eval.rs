//! Accuracy driven evaluation of expression DAGs.
//!
//! A round topologically sorts the non-exact part of the DAG, pushes
//! requested error exponents down from the root, then recomputes nodes
//! bottom-up. Every node carries a dependency counter; whoever brings it to
//! zero submits the node's recomputation, either inline or to the pool.

use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, AtomicUsize, Ordering};
use std::sync::{Arc, LazyLock};

use parking_lot::{Condvar, Mutex, ReentrantMutex, ReentrantMutexGuard};

use crate::bigfloat::{convert_to_prec, BigFloat, Exponent, Precision, RoundingMode, ERROR_PREC, INITIAL_PREC, MIN_PREC};
use crate::dag::{topsort_visit, Node, NodeData, NodeKind, NodeRef, NodeState};
use crate::interval::Interval;
use crate::pool::TaskPool;

use RoundingMode::{Down, Nearest, Up};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero at node {node}")]
    DivisionByZero { node: u64 },
    #[error("root of a negative number at node {node}")]
    NegativeRadicand { node: u64 },
    #[error("evaluation failed at node {node}: {message}")]
    Worker { node: u64, message: String },
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Executor {
    /// Recompute tasks run on the submitting thread.
    Inline,
    /// Recompute tasks go to the shared task pool.
    Pooled,
}

impl std::str::FromStr for Executor {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "inline" | "sequential" => Ok(Executor::Inline),
            "pooled" | "parallel" => Ok(Executor::Pooled),
            _ => Err(format!("unknown executor {s:?} (inline|pooled)")),
        }
    }
}

static DEFAULT_EXECUTOR: AtomicU8 = AtomicU8::new(0);

thread_local! {
    static EXECUTOR_OVERRIDE: Cell<Option<Executor>> = const { Cell::new(None) };
}

/// Process default; initially from `EXACTDAG_EXECUTOR` (inline|pooled), pooled otherwise.
pub fn default_executor() -> Executor {
    match DEFAULT_EXECUTOR.load(Ordering::SeqCst) {
        1 => Executor::Inline,
        2 => Executor::Pooled,
        _ => {
            let e = std::env::var("EXACTDAG_EXECUTOR").ok().and_then(|v| v.parse().ok()).unwrap_or(Executor::Pooled);
            set_default_executor(e);
            e
        }
    }
}

pub fn set_default_executor(e: Executor) {
    DEFAULT_EXECUTOR.store(if e == Executor::Inline { 1 } else { 2 }, Ordering::SeqCst);
}

pub fn current_executor() -> Executor {
    EXECUTOR_OVERRIDE.with(|c| c.get()).unwrap_or_else(default_executor)
}

/// Run `f` with evaluation rounds started on this thread using `e`.
pub fn with_executor<R>(e: Executor, f: impl FnOnce() -> R) -> R {
    struct Restore(Option<Executor>);
    impl Drop for Restore {
        fn drop(&mut self) {
            EXECUTOR_OVERRIDE.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(EXECUTOR_OVERRIDE.with(|c| c.replace(Some(e))));
    f()
}

// One evaluation at a time per process. Reentrant because first-time
// division/root computation asks for operand signs, which may start rounds.
static API_LOCK: LazyLock<ReentrantMutex<()>> = LazyLock::new(|| ReentrantMutex::new(()));

fn api_lock() -> ReentrantMutexGuard<'static, ()> {
    API_LOCK.lock()
}

struct Round {
    done: Mutex<bool>,
    cv: Condvar,
    failed: AtomicBool,
    error: Mutex<Option<EvalError>>,
    executed: AtomicUsize,
}

static ROUND: LazyLock<Round> = LazyLock::new(|| Round {
    done: Mutex::new(true),
    cv: Condvar::new(),
    failed: AtomicBool::new(false),
    error: Mutex::new(None),
    executed: AtomicUsize::new(0),
});

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundStats {
    pub order_len: usize,
    pub executed: usize,
    pub executor: Executor,
    pub requested: Exponent,
}

static LAST_ROUND: Mutex<Option<RoundStats>> = Mutex::new(None);
static ROUNDS: AtomicU64 = AtomicU64::new(0);
static SEPARATION_ZEROES: AtomicU64 = AtomicU64::new(0);

pub fn last_round_stats() -> Option<RoundStats> {
    *LAST_ROUND.lock()
}

/// Rounds started since process start.
pub fn rounds_started() -> u64 {
    ROUNDS.load(Ordering::SeqCst)
}

/// Nodes decided to be zero through the separation bound since process start.
pub fn separation_zeroes() -> u64 {
    SEPARATION_ZEROES.load(Ordering::SeqCst)
}

fn one_plus_floor_log2(d: u32) -> Exponent {
    (32 - d.leading_zeros()) as Exponent
}

// ---------------------------------------------------------------------------
// first-time evaluation

/// Give every node below `node` its bigfloat state, children first.
pub fn init_node_data(node: &Arc<Node>) -> Result<()> {
    let _g = api_lock();
    init_rec(node)
}

fn init_rec(node: &Arc<Node>) -> Result<()> {
    let (x, y) = {
        let st = node.state.read();
        if st.data.is_some() {
            return Ok(());
        }
        (st.x.clone(), st.y.clone())
    };
    if let Some(x) = &x {
        init_rec(x)?;
    }
    if let Some(y) = &y {
        init_rec(y)?;
    }
    let mut st = node.state.write();
    if st.data.is_some() {
        return Ok(());
    }
    if st.kind() == NodeKind::Double {
        let p = st.interval.get_point();
        st.data = Some(Box::new(NodeData::new(BigFloat::from_f64(p), BigFloat::zero())));
    } else if st.interval.is_finite() {
        let i = st.interval;
        st.data = Some(Box::new(NodeData::new(BigFloat::from_f64(i.get_median()), BigFloat::from_f64(i.get_radius()))));
        if st.exact() {
            st.convert_to_bigfloat();
        }
    } else {
        st.data = Some(Box::new(NodeData::new(BigFloat::zero(), BigFloat::zero())));
        if let Err(e) = compute_fixed(node, &mut st, INITIAL_PREC) {
            st.data = None;
            return Err(e);
        }
    }
    Ok(())
}

fn add_rounding_error(d: &mut NodeData, p: Precision, isexact: bool) {
    if !isexact {
        let t = d.approx.abs().round_to(ERROR_PREC, Up).0.ldexp(-(p as Exponent));
        d.error = d.error.add(&t, ERROR_PREC, Up).0;
    }
}

fn compute_fixed(node: &Node, st: &mut NodeState, p: Precision) -> Result<()> {
    let kind = st.kind();
    let x = st.x.clone();
    let y = st.y.clone();
    match kind {
        NodeKind::Double | NodeKind::BigFloat => return Ok(()),
        NodeKind::Division => {
            let y = y.as_ref().unwrap();
            if sign_rec(y)? == 0 {
                return Err(EvalError::DivisionByZero { node: node.id() });
            }
            separate_from_zero(y)?;
        }
        NodeKind::Root => {
            let x = x.as_ref().unwrap();
            let s = sign_rec(x)?;
            if s < 0 {
                return Err(EvalError::NegativeRadicand { node: node.id() });
            }
            if s > 0 {
                separate_from_zero(x)?;
            }
        }
        _ => {}
    }
    let xs = x.as_ref().unwrap().state.read_recursive();
    let ys = y.as_ref().map(|y| y.state.read_recursive());
    let xd = xs.data();
    let degree = st.degree();
    let d = st.data_mut();
    match kind {
        NodeKind::Negation => {
            d.approx = xd.approx.neg();
            d.error = xd.error.clone();
        }
        NodeKind::Addition | NodeKind::Subtraction => {
            let yd = ys.as_ref().unwrap().data();
            let (a, isexact) = if kind == NodeKind::Addition {
                xd.approx.add(&yd.approx, p, Nearest)
            } else {
                xd.approx.sub(&yd.approx, p, Nearest)
            };
            d.approx = a;
            d.error = xd.error.add(&yd.error, ERROR_PREC, Up).0;
            add_rounding_error(d, p, isexact);
        }
        NodeKind::Multiplication => {
            let yd = ys.as_ref().unwrap().data();
            let (a, isexact) = xd.approx.mul(&yd.approx, p, Nearest);
            d.approx = a;
            let ax = xd.approx.abs().round_to(ERROR_PREC, Up).0;
            let e = ax.mul(&yd.error, ERROR_PREC, Up).0;
            let t = yd.approx.abs().round_to(ERROR_PREC, Up).0;
            let t = t.add(&yd.error, ERROR_PREC, Up).0;
            let t = t.mul(&xd.error, ERROR_PREC, Up).0;
            d.error = e.add(&t, ERROR_PREC, Up).0;
            add_rounding_error(d, p, isexact);
        }
        NodeKind::Division => {
            let yd = ys.as_ref().unwrap().data();
            let (a, isexact) = xd.approx.div(&yd.approx, p, Nearest);
            d.approx = a;
            let ylow = yd.approx.abs().round_to(ERROR_PREC, Down).0.sub(&yd.error, ERROR_PREC, Down).0;
            if ylow.sign() <= 0 {
                return Err(EvalError::Worker { node: node.id(), message: "divisor not separated from zero".into() });
            }
            let minus_floor_log2_ylow = -ylow.floor_log2();
            // |x/y - x~/y~| <= (ex + |x~/y~| * ey) / ylow
            let qb = xd.approx.abs().div(&yd.approx.abs(), ERROR_PREC, Up).0;
            let num = xd.error.add(&qb.mul(&yd.error, ERROR_PREC, Up).0, ERROR_PREC, Up).0;
            d.error = num.ldexp(minus_floor_log2_ylow);
            add_rounding_error(d, p, isexact);
        }
        NodeKind::Root => {
            if xd.approx.is_negative() {
                return Err(EvalError::NegativeRadicand { node: node.id() });
            }
            let (a, isexact) = xd.approx.root(degree, p, Nearest);
            d.approx = a;
            if xd.is_zero() {
                d.error = BigFloat::zero();
            } else {
                let xlow = xd.approx.sub(&xd.error, ERROR_PREC, Down).0;
                if xlow.sign() <= 0 {
                    return Err(EvalError::Worker { node: node.id(), message: "radicand not separated from zero".into() });
                }
                let dd = degree as Exponent;
                let term = ((1 - dd) * xlow.floor_log2()) / dd + (2 - one_plus_floor_log2(degree));
                d.error = xd.error.ldexp(term);
                add_rounding_error(d, p, isexact);
            }
        }
        NodeKind::Double | NodeKind::BigFloat => unreachable!(),
    }
    drop(xs);
    drop(ys);
    if st.exact() {
        st.convert_to_bigfloat();
    } else {
        let d = st.data_mut();
        d.requested_error = d.ceil_log2_error();
        d.note_separation();
    }
    if st.interval.can_be_improved() {
        st.adjust_interval();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sign and error guarantees

/// Exact sign of the node's value.
pub fn sign(node: &Arc<Node>) -> Result<i32> {
    let _g = api_lock();
    sign_rec(node)
}

fn sign_rec(node: &Arc<Node>) -> Result<i32> {
    let i = node.state.read().interval;
    if !i.contains_zero() {
        return Ok(if i.lo() > 0.0 { 1 } else { -1 });
    } else if i.is_singleton() {
        return Ok(0);
    }
    init_rec(node)?;
    separate_from_zero(node)?;
    Ok(node.state.read().data().approx.sign())
}

fn unseparated_error(node: &Node) -> Option<Exponent> {
    let st = node.state.read();
    let d = st.data();
    if !d.exact() && (d.is_zero() || d.floor_log2_approx() <= d.ceil_log2_error()) {
        Some(d.ceil_log2_error())
    } else {
        None
    }
}

fn separate_from_zero(node: &Arc<Node>) -> Result<()> {
    if let Some(mut abserr) = unseparated_error(node) {
        let mut relerr: Exponent = -27;
        loop {
            relerr = relerr.saturating_mul(2);
            abserr = abserr.saturating_add(relerr);
            guarantee_bound_two_to(node, abserr)?;
            if unseparated_error(node).is_none() {
                break;
            }
        }
    }
    Ok(())
}

/// Make the absolute error at most `2^p`.
pub fn guarantee_absolute_error_two_to(node: &Arc<Node>, p: Exponent) -> Result<()> {
    let _g = api_lock();
    init_rec(node)?;
    guarantee_bound_two_to(node, p)
}

/// Make the relative error at most `2^p` (no-op for zero).
pub fn guarantee_relative_error_two_to(node: &Arc<Node>, p: Exponent) -> Result<()> {
    let _g = api_lock();
    if sign_rec(node)? == 0 {
        return Ok(());
    }
    init_rec(node)?;
    separate_from_zero(node)?;
    let q = {
        let st = node.state.read();
        let d = st.data();
        if d.exact() {
            return Ok(());
        }
        let t = d.approx.abs().round_to(ERROR_PREC, Down).0.sub(&d.error, ERROR_PREC, Down).0;
        debug_assert!(t.sign() > 0);
        p + t.floor_log2()
    };
    guarantee_bound_two_to(node, q)
}

/// Current approximation and error bound, initialising the node if needed.
pub fn approx_and_error(node: &Arc<Node>) -> Result<(BigFloat, BigFloat)> {
    let _g = api_lock();
    init_rec(node)?;
    let st = node.state.read();
    let d = st.data();
    Ok((d.approx.clone(), d.error.clone()))
}

/// Interval filter refreshed from the bigfloat state.
pub fn get_interval(node: &Arc<Node>) -> Result<Interval> {
    let _g = api_lock();
    if node.kind() == NodeKind::Double {
        return Ok(node.interval());
    }
    init_rec(node)?;
    let mut st = node.state.write();
    st.adjust_interval();
    Ok(st.interval)
}

// ---------------------------------------------------------------------------
// rounds

/// One accuracy driven round: afterwards the node's error is at most `2^q`.
/// Node data must already be initialised.
pub fn guarantee_bound_two_to(root: &Arc<Node>, q: Exponent) -> Result<()> {
    let _g = api_lock();
    {
        let st = root.state.read();
        let d = st.data();
        if d.exact() || d.ceil_log2_error() <= q {
            return Ok(());
        }
    }
    let exec = current_executor();
    ROUNDS.fetch_add(1, Ordering::SeqCst);
    let mut order = Vec::new();
    topsort_visit(root, &mut order);
    root.state.write().data_mut().requested_error = q;
    propagate_errors(&order);
    let r = parallel_recompute(&order, exec);
    *LAST_ROUND.lock() = Some(RoundStats { order_len: order.len(), executed: ROUND.executed.load(Ordering::SeqCst), executor: exec, requested: q });
    // `order` is dropped here, on the caller's thread
    r
}

/// Requested error exponents for the children of one node (empty when the
/// node already meets its own request).
pub(crate) fn child_requests(st: &NodeState) -> Vec<(Arc<Node>, Exponent)> {
    let d = st.data();
    debug_assert!(!d.exact());
    let q = d.requested_error;
    if d.ceil_log2_error() <= q {
        return Vec::new();
    }
    let x = st.x.clone().unwrap();
    let y = st.y.clone();
    let xs = x.state.read_recursive();
    let xd = xs.data();
    match st.kind() {
        NodeKind::Negation => vec![(x.clone(), q)],
        NodeKind::Root => {
            if xd.is_zero() {
                return Vec::new();
            }
            let fl = xd.floor_log2_low();
            let dd = st.degree() as Exponent;
            let qx = (fl - 1).min(((dd - 1) * fl) / dd + q + (one_plus_floor_log2(st.degree()) - 3));
            vec![(x.clone(), qx)]
        }
        NodeKind::Addition | NodeKind::Subtraction => {
            let qx = q - 2;
            vec![(x.clone(), qx), (y.unwrap(), qx)]
        }
        NodeKind::Multiplication => {
            let y = y.unwrap();
            let ys = y.state.read_recursive();
            let yd = ys.data();
            if (xd.is_zero() && xd.exact()) || (yd.is_zero() && yd.exact()) {
                return Vec::new();
            }
            let (qx, qy) = mul_requests(q, xd.ceil_log2_high(), yd.ceil_log2_high());
            drop(ys);
            vec![(x.clone(), qx), (y, qy)]
        }
        NodeKind::Division => {
            if xd.is_zero() && xd.exact() {
                return Vec::new();
            }
            let y = y.unwrap();
            let ys = y.state.read_recursive();
            let (qx, qy) = div_requests(q, xd.ceil_log2_high(), ys.data().floor_log2_low());
            drop(ys);
            vec![(x.clone(), qx), (y, qy)]
        }
        NodeKind::Double | NodeKind::BigFloat => unreachable!("leaf in evaluation order"),
    }
}

/// Split a multiplication's budget; `chx`, `chy` bound log2 of the operands.
pub fn mul_requests(q: Exponent, chx: Exponent, chy: Exponent) -> (Exponent, Exponent) {
    let c = q - 2;
    let mut qx = c - chy;
    let mut qy = c - chx;
    if qx + qy > c {
        qx = (c + qx - qy) / 2;
        qy = c - qx;
    }
    debug_assert!(qx <= q - 2 - chy && qy <= q - 2 - chx && qx + qy <= q - 2);
    (qx, qy)
}

/// `chx` bounds log2|x| from above, `fly` bounds log2|y| from below.
pub fn div_requests(q: Exponent, chx: Exponent, fly: Exponent) -> (Exponent, Exponent) {
    let qx = q - 4 + fly;
    let qy = (fly - 1).min(q - 4 - chx + 2 * fly);
    (qx, qy)
}

/// `flx` bounds log2 of the radicand from below.
pub fn root_request(q: Exponent, d: u32, flx: Exponent) -> Exponent {
    let dd = d as Exponent;
    (flx - 1).min(((dd - 1) * flx) / dd + q + (one_plus_floor_log2(d) - 3))
}

fn propagate_errors(order: &[Arc<Node>]) {
    for node in order.iter().rev() {
        let reqs = child_requests(&node.state.read());
        for (c, qc) in reqs {
            let mut cs = c.state.write();
            let cd = cs.data_mut();
            if qc < cd.requested_error {
                cd.requested_error = qc;
            }
        }
    }
}

fn parallel_recompute(order: &[Arc<Node>], exec: Executor) -> Result<()> {
    *ROUND.done.lock() = false;
    ROUND.failed.store(false, Ordering::SeqCst);
    *ROUND.error.lock() = None;
    ROUND.executed.store(0, Ordering::SeqCst);
    for n in order {
        try_recomputation(NodeRef::new(n), exec);
    }
    let mut done = ROUND.done.lock();
    while !*done {
        ROUND.cv.wait(&mut done);
    }
    drop(done);
    match ROUND.error.lock().take() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn try_recomputation(r: NodeRef, exec: Executor) {
    // Safety: `r` comes from the current round's order, which the caller keeps alive.
    let node = unsafe { r.get() };
    if node.dependency_count.fetch_sub(1, Ordering::AcqRel) == 0 {
        match exec {
            Executor::Inline => recompute_task(r, exec),
            Executor::Pooled => TaskPool::shared().add_task(move || recompute_task(r, exec)),
        }
    }
}

fn record_error(e: EvalError) {
    ROUND.failed.store(true, Ordering::SeqCst);
    let mut slot = ROUND.error.lock();
    if slot.is_none() {
        *slot = Some(e);
    }
}

fn recompute_task(r: NodeRef, exec: Executor) {
    // Safety: as in `try_recomputation`.
    let node = unsafe { r.get() };
    let parents = {
        let mut st = node.state.write();
        st.round_executions += 1;
        if !ROUND.failed.load(Ordering::SeqCst) {
            match catch_unwind(AssertUnwindSafe(|| recompute_op(node, &mut st))) {
                Ok(Ok(())) => {}
                Ok(Err(e)) => record_error(e),
                Err(p) => {
                    let message = p
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| p.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "panic".into());
                    record_error(EvalError::Worker { node: node.id(), message });
                }
            }
        }
        if let Some(d) = st.data.as_deref_mut() {
            d.visited = false;
        }
        std::mem::take(&mut st.parents)
    };
    ROUND.executed.fetch_add(1, Ordering::SeqCst);
    if parents.is_empty() {
        let mut done = ROUND.done.lock();
        *done = true;
        ROUND.cv.notify_all();
    } else {
        // nothing of `node` may be touched from here on
        for p in parents {
            try_recomputation(p, exec);
        }
    }
}

fn recompute_op(node: &Node, st: &mut NodeState) -> Result<()> {
    let d = st.data();
    debug_assert!(!d.exact());
    let q = d.requested_error;
    if d.ceil_log2_error() > q {
        recompute_value(node, st, q)?;
    }
    fixup_post_recompute(st);
    Ok(())
}

fn recompute_value(node: &Node, st: &mut NodeState, q: Exponent) -> Result<()> {
    let kind = st.kind();
    let degree = st.degree();
    let x = st.x.clone().unwrap();
    let y = st.y.clone();
    let xs = x.state.read_recursive();
    let ys = y.as_ref().map(|y| y.state.read_recursive());
    let xd = xs.data();
    let yd = ys.as_ref().map(|s| s.data());
    let (approx, isexact, children_exact) = match kind {
        NodeKind::Negation => {
            let d = st.data_mut();
            d.approx = xd.approx.neg();
            d.error = xd.error.clone();
            return Ok(());
        }
        NodeKind::Root => {
            if xd.approx.is_negative() {
                return Err(EvalError::NegativeRadicand { node: node.id() });
            }
            let mut p = MIN_PREC;
            if !xd.is_zero() {
                p = convert_to_prec(xd.ceil_log2_approx() / degree as Exponent + 2 - q);
            }
            let (a, e) = xd.approx.root(degree, p, Nearest);
            (a, e, xd.exact())
        }
        NodeKind::Addition | NodeKind::Subtraction => {
            let yd = yd.unwrap();
            let p = match (xd.is_zero(), yd.is_zero()) {
                (false, false) => convert_to_prec(xd.ceil_log2_approx().max(yd.ceil_log2_approx()) + 2 - q),
                (false, true) => convert_to_prec(xd.ceil_log2_approx() + 1 - q),
                (true, false) => convert_to_prec(yd.ceil_log2_approx() + 1 - q),
                (true, true) => MIN_PREC,
            };
            let (a, e) = if kind == NodeKind::Addition {
                xd.approx.add(&yd.approx, p, Nearest)
            } else {
                xd.approx.sub(&yd.approx, p, Nearest)
            };
            (a, e, xd.exact() && yd.exact())
        }
        NodeKind::Multiplication => {
            let yd = yd.unwrap();
            let (a, e) = if !xd.is_zero() && !yd.is_zero() {
                let p = convert_to_prec(xd.ceil_log2_approx() + yd.ceil_log2_approx() + 2 - q);
                xd.approx.mul(&yd.approx, p, Nearest)
            } else {
                (BigFloat::zero(), true)
            };
            (a, e, xd.exact() && yd.exact())
        }
        NodeKind::Division => {
            let yd = yd.unwrap();
            if yd.is_zero() {
                return Err(EvalError::Worker { node: node.id(), message: "divisor approximation is zero".into() });
            }
            let (a, e) = if !xd.is_zero() {
                let p = convert_to_prec(xd.ceil_log2_approx() - yd.floor_log2_approx() + 1 - q);
                xd.approx.div(&yd.approx, p, Nearest)
            } else {
                (BigFloat::zero(), true)
            };
            (a, e, xd.exact() && yd.exact())
        }
        NodeKind::Double | NodeKind::BigFloat => unreachable!("leaf in evaluation order"),
    };
    drop(xs);
    drop(ys);
    let d = st.data_mut();
    d.approx = approx;
    d.error = if isexact && children_exact { BigFloat::zero() } else { BigFloat::pow2(q) };
    Ok(())
}

fn fixup_post_recompute(st: &mut NodeState) {
    if st.exact() {
        st.convert_to_bigfloat();
        st.init_sep_bd();
        st.reset_degree_parameters();
    } else {
        st.init_sep_bd();
        st.compute_degree_bound();
        st.data_mut().note_separation();
        let d = st.data();
        if d.is_zero() || d.floor_log2_approx() <= d.ceil_log2_error() {
            let q = d.requested_error;
            if q.saturating_add(1) < st.sep_bound() {
                st.zeroize();
                st.convert_to_bigfloat();
                st.init_sep_bd();
                st.reset_degree_parameters();
                st.zeroed_by_separation = true;
                SEPARATION_ZEROES.fetch_add(1, Ordering::SeqCst);
            }
        }
    }
    if st.interval.can_be_improved() {
        st.adjust_interval();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::Node;

    fn leaf(d: f64) -> Arc<Node> {
        Node::double(d).unwrap()
    }

    #[test]
    fn filter_decides_simple_signs() {
        let a = leaf(2.0);
        let b = leaf(3.0);
        let s = Node::binary(NodeKind::Subtraction, &a, &b);
        let before = rounds_started();
        assert_eq!(sign(&s).unwrap(), -1);
        // nothing needed a bigfloat round (other tests may run concurrently, so only a weak check)
        let _ = before;
        assert!(s.approx_and_error().is_none());
    }

    #[test]
    fn sqrt2_minus_three_halves() {
        let r = Node::root(&leaf(2.0), 2).unwrap();
        let d = Node::binary(NodeKind::Subtraction, &r, &leaf(1.5));
        assert_eq!(sign(&d).unwrap(), -1);
    }

    #[test]
    fn zero_via_separation_bound() {
        let x = leaf(2.0);
        let y = leaf(3.0);
        let sx = Node::root(&x, 2).unwrap();
        let sy = Node::root(&y, 2).unwrap();
        let p = Node::binary(NodeKind::Addition, &sx, &sy);
        let m = Node::binary(NodeKind::Subtraction, &sx, &sy);
        let prod = Node::binary(NodeKind::Multiplication, &p, &m);
        let diff = Node::binary(NodeKind::Subtraction, &x, &y);
        let z = Node::binary(NodeKind::Subtraction, &prod, &diff);
        for e in [Executor::Inline, Executor::Pooled] {
            let z = Node::binary(NodeKind::Subtraction, &prod, &diff);
            assert_eq!(with_executor(e, || sign(&z)).unwrap(), 0);
            assert!(z.zeroed_by_separation());
        }
        assert_eq!(sign(&z).unwrap(), 0);
    }

    #[test]
    fn division_by_zero_reported() {
        let a = leaf(1.0);
        let z = Node::binary(NodeKind::Subtraction, &leaf(2.0), &leaf(2.0));
        let q = Node::binary(NodeKind::Division, &a, &z);
        assert_eq!(sign(&q), Err(EvalError::DivisionByZero { node: q.id() }));
        // the node is left uninitialised and fails again
        assert!(sign(&q).is_err());
    }

    #[test]
    fn negative_radicand_reported() {
        let r = Node::root(&leaf(-4.0), 2).unwrap();
        assert_eq!(sign(&r), Err(EvalError::NegativeRadicand { node: r.id() }));
    }

    #[test]
    fn absolute_error_met() {
        let r = Node::root(&leaf(2.0), 2).unwrap();
        guarantee_absolute_error_two_to(&r, -300).unwrap();
        let (_, e) = r.approx_and_error().unwrap();
        assert!(e.is_zero() || e.ceil_log2() <= -300);
    }

    #[test]
    fn relative_error_met() {
        let tiny = Node::binary(NodeKind::Multiplication, &Node::root(&leaf(2.0), 2).unwrap(), &leaf(1e-200));
        guarantee_relative_error_two_to(&tiny, -100).unwrap();
        let (a, e) = tiny.approx_and_error().unwrap();
        assert!(e.ceil_log2() <= a.floor_log2() - 99);
    }

    #[test]
    fn request_formulas() {
        let (qx, qy) = mul_requests(-10, 3, 5);
        assert!(qx + qy <= -12 && qx <= -17 && qy <= -15);
        let (qx, qy) = div_requests(-10, 2, -1);
        assert_eq!(qx, -15);
        assert_eq!(qy, (-2i64).min(-10 - 4 - 2 - 2));
        assert_eq!(root_request(-10, 2, 0), (-1i64).min(-10 - 1));
    }

    #[test]
    fn executor_override_restores() {
        let before = current_executor();
        with_executor(Executor::Inline, || assert_eq!(current_executor(), Executor::Inline));
        assert_eq!(current_executor(), before);
    }
}
