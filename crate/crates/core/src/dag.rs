//! Expression DAG nodes.
//!
//! Nodes are shared through `Arc`; its strong count is the reference count.
//! Everything mutable lives behind a per-node `RwLock`. Locks are only ever
//! taken parent before child.

use std::sync::atomic::{AtomicI64, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;

use crate::bigfloat::{BigFloat, Exponent};
use crate::interval::Interval;
use crate::sep_bound::SepBound;

#[repr(u8)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Double = 0,
    BigFloat = 1,
    Negation = 2,
    Addition = 3,
    Subtraction = 4,
    Multiplication = 5,
    Division = 6,
    Root = 7,
}

impl NodeKind {
    const ALL: [NodeKind; 8] = [
        NodeKind::Double,
        NodeKind::BigFloat,
        NodeKind::Negation,
        NodeKind::Addition,
        NodeKind::Subtraction,
        NodeKind::Multiplication,
        NodeKind::Division,
        NodeKind::Root,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Double => "DOUBLE",
            NodeKind::BigFloat => "BIGFLOAT",
            NodeKind::Negation => "NEGATION",
            NodeKind::Addition => "ADDITION",
            NodeKind::Subtraction => "SUBTRACTION",
            NodeKind::Multiplication => "MULTIPLICATION",
            NodeKind::Division => "DIVISION",
            NodeKind::Root => "ROOT",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_leaf(self) -> bool {
        matches!(self, NodeKind::Double | NodeKind::BigFloat)
    }

    pub fn arity(self) -> usize {
        match self {
            NodeKind::Double | NodeKind::BigFloat => 0,
            NodeKind::Negation | NodeKind::Root => 1,
            _ => 2,
        }
    }
}

/// Kind in the low 4 bits, degree above.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeType(u32);

pub const MAX_DEGREE: u32 = u32::MAX >> 4;

impl NodeType {
    pub fn new(kind: NodeKind, degree: u32) -> Self {
        assert!(degree <= MAX_DEGREE, "degree {degree} does not fit");
        NodeType((degree << 4) | kind as u32)
    }

    pub fn kind(self) -> NodeKind {
        NodeKind::ALL[(self.0 & 0xf) as usize]
    }

    pub fn degree(self) -> u32 {
        self.0 >> 4
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl std::fmt::Debug for NodeType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.kind().name(), self.degree())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DagError {
    #[error("leaf value {0} is not finite")]
    NonFiniteLeaf(f64),
    #[error("root degree {0} must be at least 2")]
    BadDegree(u32),
}

/// Bigfloat evaluation state, present once a node has been looked at by the evaluator.
#[derive(Clone, Debug)]
pub(crate) struct NodeData {
    pub approx: BigFloat,
    pub error: BigFloat,
    pub sep_bd: SepBound,
    pub requested_error: Exponent,
    pub visited: bool,
    // best proven k with 2^k <= |value|
    pub proven_low: Option<Exponent>,
}

// stands in for log2(0) where a bound on an exact zero is asked for
pub(crate) const LOG2_ZERO: Exponent = i64::MIN / 4;

impl NodeData {
    pub fn new(approx: BigFloat, error: BigFloat) -> Self {
        let requested_error = if error.is_zero() { 0 } else { error.ceil_log2() };
        let mut d = NodeData { approx, error, sep_bd: SepBound::default(), requested_error, visited: false, proven_low: None };
        d.note_separation();
        d
    }

    pub fn exact(&self) -> bool {
        self.error.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.approx.is_zero()
    }

    pub fn ceil_log2_error(&self) -> Exponent {
        if self.exact() {
            LOG2_ZERO
        } else {
            self.error.ceil_log2()
        }
    }

    pub fn ceil_log2_approx(&self) -> Exponent {
        self.approx.ceil_log2()
    }

    pub fn floor_log2_approx(&self) -> Exponent {
        self.approx.floor_log2()
    }

    /// Upper bound on log2 |value|.
    pub fn ceil_log2_high(&self) -> Exponent {
        if self.is_zero() {
            return self.ceil_log2_error();
        }
        if self.exact() {
            return self.ceil_log2_approx();
        }
        1 + self.ceil_log2_approx().max(self.ceil_log2_error())
    }

    /// Lower bound on log2 |value|; the value must be known to be nonzero.
    pub fn floor_log2_low(&self) -> Exponent {
        if self.exact() {
            return self.floor_log2_approx();
        }
        if !self.is_zero() && self.ceil_log2_error() < self.floor_log2_approx() {
            let cur = self.floor_log2_approx() - 1;
            return cur.max(self.proven_low.unwrap_or(cur));
        }
        self.proven_low.expect("lower bound requested for a node never separated from zero")
    }

    pub fn note_separation(&mut self) {
        if !self.is_zero() && (self.exact() || self.ceil_log2_error() < self.floor_log2_approx()) {
            let k = if self.exact() { self.floor_log2_approx() } else { self.floor_log2_approx() - 1 };
            self.proven_low = Some(self.proven_low.map_or(k, |p| p.max(k)));
        }
    }
}

/// Non-owning link to a node, only dereferenced while the round that made it
/// keeps every node of its order alive.
#[derive(Clone, Copy)]
pub(crate) struct NodeRef(*const Node);

// Safety: the pointee is Sync and the round guarantees it outlives every use.
unsafe impl Send for NodeRef {}
unsafe impl Sync for NodeRef {}

impl NodeRef {
    pub fn new(n: &Arc<Node>) -> Self {
        NodeRef(Arc::as_ptr(n))
    }

    /// # Safety
    /// The node must still be owned by the running round.
    pub unsafe fn get<'a>(self) -> &'a Node {
        &*self.0
    }
}

pub(crate) struct NodeState {
    pub interval: Interval,
    pub node_type: NodeType,
    pub x: Option<Arc<Node>>,
    pub y: Option<Arc<Node>>,
    pub data: Option<Box<NodeData>>,
    pub parents: Vec<NodeRef>,
    pub unique_degree: u64,
    pub vardeg: Vec<(u64, u64)>,
    pub has_multiple_references: bool,
    pub zeroed_by_separation: bool,
    pub round_executions: u32,
}

impl NodeState {
    pub fn kind(&self) -> NodeKind {
        self.node_type.kind()
    }

    pub fn degree(&self) -> u32 {
        self.node_type.degree()
    }

    pub fn data(&self) -> &NodeData {
        self.data.as_deref().expect("node data not initialised")
    }

    pub fn data_mut(&mut self) -> &mut NodeData {
        self.data.as_deref_mut().expect("node data not initialised")
    }

    pub fn exact(&self) -> bool {
        self.data.as_ref().is_some_and(|d| d.exact())
    }

    pub fn algebraic_degree(&self) -> u64 {
        self.vardeg.iter().fold(self.unique_degree.max(1), |acc, &(_, d)| acc.saturating_mul(d))
    }

    pub fn reset_degree_parameters(&mut self) {
        self.unique_degree = self.degree().max(1) as u64;
        self.vardeg.clear();
        self.has_multiple_references = false;
    }

    fn add_vardeg(&mut self, entry: (u64, u64)) {
        if !self.vardeg.iter().any(|e| e.0 == entry.0) {
            self.vardeg.push(entry);
        }
    }

    /// Bottom-up degree bound from the (already final) children.
    pub fn compute_degree_bound(&mut self) {
        debug_assert_eq!(self.unique_degree, self.degree().max(1) as u64);
        for child in [self.x.clone(), self.y.clone()].into_iter().flatten() {
            let cs = child.state.read_recursive();
            if cs.unique_degree > 1 {
                if cs.has_multiple_references {
                    self.add_vardeg((child.id, cs.unique_degree));
                } else {
                    self.unique_degree = self.unique_degree.saturating_mul(cs.unique_degree);
                }
            }
            let entries = cs.vardeg.clone();
            drop(cs);
            for e in entries {
                self.add_vardeg(e);
            }
        }
    }

    pub fn init_sep_bd(&mut self) {
        let sb = match self.kind() {
            NodeKind::Double => SepBound::set_f64(self.interval.get_point()),
            NodeKind::BigFloat => SepBound::set(&self.data().approx),
            kind => {
                let xs = self.x.as_ref().unwrap().state.read_recursive().data().sep_bd;
                let ys = self.y.as_ref().map(|y| y.state.read_recursive().data().sep_bd);
                match kind {
                    NodeKind::Negation => SepBound::negation(&xs),
                    NodeKind::Root => SepBound::root(&xs, self.degree()),
                    NodeKind::Addition => SepBound::addition(&xs, &ys.unwrap()),
                    NodeKind::Subtraction => SepBound::subtraction(&xs, &ys.unwrap()),
                    NodeKind::Multiplication => SepBound::multiplication(&xs, &ys.unwrap()),
                    NodeKind::Division => SepBound::division(&xs, &ys.unwrap()),
                    _ => unreachable!(),
                }
            }
        };
        self.data_mut().sep_bd = sb;
    }

    pub fn sep_bound(&self) -> Exponent {
        self.data().sep_bd.bound(self.algebraic_degree())
    }

    /// Drop the children and become an exact leaf.
    pub fn convert_to_bigfloat(&mut self) {
        self.x = None;
        self.y = None;
        self.node_type = NodeType::new(NodeKind::BigFloat, 1);
        self.reset_degree_parameters();
    }

    pub fn adjust_interval(&mut self) {
        let d = self.data();
        self.interval = if d.exact() {
            let (lo, hi) = d.approx.to_interval();
            Interval::new(lo, hi)
        } else {
            Interval::from_ball(&d.approx, &d.error)
        };
    }

    pub fn zeroize(&mut self) {
        self.interval = Interval::point(0.0);
        let d = self.data_mut();
        d.approx = BigFloat::zero();
        d.error = BigFloat::zero();
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);
static LIVE_NODES: AtomicUsize = AtomicUsize::new(0);

/// Number of nodes currently alive in the process.
pub fn live_nodes() -> usize {
    LIVE_NODES.load(Ordering::SeqCst)
}

pub struct Node {
    id: u64,
    pub(crate) dependency_count: AtomicI64,
    pub(crate) state: RwLock<NodeState>,
}

impl Node {
    fn make(interval: Interval, node_type: NodeType, x: Option<Arc<Node>>, y: Option<Arc<Node>>, data: Option<NodeData>) -> Arc<Node> {
        LIVE_NODES.fetch_add(1, Ordering::SeqCst);
        let unique_degree = node_type.degree().max(1) as u64;
        Arc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            dependency_count: AtomicI64::new(0),
            state: RwLock::new(NodeState {
                interval,
                node_type,
                x,
                y,
                data: data.map(Box::new),
                parents: Vec::new(),
                unique_degree,
                vardeg: Vec::new(),
                has_multiple_references: false,
                zeroed_by_separation: false,
                round_executions: 0,
            }),
        })
    }

    pub fn double(d: f64) -> Result<Arc<Node>, DagError> {
        if !d.is_finite() {
            return Err(DagError::NonFiniteLeaf(d));
        }
        Ok(Self::make(Interval::point(d), NodeType::new(NodeKind::Double, 1), None, None, None))
    }

    pub fn bigfloat(x: BigFloat) -> Arc<Node> {
        let n = Self::make(Interval::whole(), NodeType::new(NodeKind::BigFloat, 1), None, None, Some(NodeData::new(x, BigFloat::zero())));
        n.state.write().adjust_interval();
        n
    }

    pub fn neg(a: &Arc<Node>) -> Arc<Node> {
        let i = a.interval().neg();
        Self::make(i, NodeType::new(NodeKind::Negation, 1), Some(a.clone()), None, None)
    }

    pub fn root(a: &Arc<Node>, d: u32) -> Result<Arc<Node>, DagError> {
        if !(2..=MAX_DEGREE).contains(&d) {
            return Err(DagError::BadDegree(d));
        }
        let i = a.interval().root(d);
        Ok(Self::make(i, NodeType::new(NodeKind::Root, d), Some(a.clone()), None, None))
    }

    /// Binary node; `kind` must be one of the four arithmetic kinds.
    pub fn binary(kind: NodeKind, a: &Arc<Node>, b: &Arc<Node>) -> Arc<Node> {
        let (ia, ib) = (a.interval(), b.interval());
        let i = match kind {
            NodeKind::Addition => ia.add(&ib),
            NodeKind::Subtraction => ia.sub(&ib),
            NodeKind::Multiplication => ia.mul(&ib),
            NodeKind::Division => ia.div(&ib),
            k => panic!("{} is not a binary kind", k.name()),
        };
        Self::make(i, NodeType::new(kind, 1), Some(a.clone()), Some(b.clone()), None)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn node_type(&self) -> NodeType {
        self.state.read().node_type
    }

    pub fn kind(&self) -> NodeKind {
        self.node_type().kind()
    }

    pub fn degree(&self) -> u32 {
        self.node_type().degree()
    }

    pub fn children(&self) -> (Option<Arc<Node>>, Option<Arc<Node>>) {
        let s = self.state.read();
        (s.x.clone(), s.y.clone())
    }

    pub fn interval(&self) -> Interval {
        self.state.read().interval
    }

    /// `Some((approx, error))` once the evaluator has initialised the node.
    pub fn approx_and_error(&self) -> Option<(BigFloat, BigFloat)> {
        self.state.read().data.as_ref().map(|d| (d.approx.clone(), d.error.clone()))
    }

    pub fn is_exact(&self) -> bool {
        self.state.read().exact()
    }

    pub fn requested_error(&self) -> Option<Exponent> {
        self.state.read().data.as_ref().map(|d| d.requested_error)
    }

    pub fn dependency_count(&self) -> i64 {
        self.dependency_count.load(Ordering::SeqCst)
    }

    pub fn parent_count(&self) -> usize {
        self.state.read().parents.len()
    }

    pub fn has_multiple_references(&self) -> bool {
        self.state.read().has_multiple_references
    }

    pub fn unique_degree(&self) -> u64 {
        self.state.read().unique_degree
    }

    /// Degree bound from the last evaluation round that touched this node.
    pub fn algebraic_degree(&self) -> u64 {
        self.state.read().algebraic_degree()
    }

    /// True if the node was decided to be zero by the separation bound.
    pub fn zeroed_by_separation(&self) -> bool {
        self.state.read().zeroed_by_separation
    }

    pub fn round_executions(&self) -> u32 {
        self.state.read().round_executions
    }

    pub fn sep_bound_state(&self) -> Option<SepBound> {
        self.state.read().data.as_ref().map(|d| d.sep_bd)
    }
}

impl Drop for Node {
    fn drop(&mut self) {
        LIVE_NODES.fetch_sub(1, Ordering::SeqCst);
        // iterative so long chains don't blow the stack
        let st = self.state.get_mut();
        let mut stack: Vec<Arc<Node>> = st.x.take().into_iter().chain(st.y.take()).collect();
        while let Some(n) = stack.pop() {
            if let Some(mut inner) = Arc::into_inner(n) {
                let s = inner.state.get_mut();
                stack.extend(s.x.take());
                stack.extend(s.y.take());
            }
        }
    }
}

impl std::fmt::Debug for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = self.state.read();
        f.debug_struct("Node").field("id", &self.id).field("type", &s.node_type).field("interval", &s.interval).finish()
    }
}

/// Depth-first topological sort from `node`: children before parents, only
/// non-exact nodes are collected. Resets per-round degree state and wires
/// up parent links and dependency counters. Node data must be initialised.
pub(crate) fn topsort_visit(node: &Arc<Node>, order: &mut Vec<Arc<Node>>) {
    let mut st = node.state.write();
    if st.data().visited {
        st.has_multiple_references = true;
        return;
    }
    st.reset_degree_parameters();
    st.parents.clear();
    st.round_executions = 0;
    node.dependency_count.store(0, Ordering::SeqCst);
    let children: Vec<Arc<Node>> = st.x.iter().chain(st.y.iter()).cloned().collect();
    for c in &children {
        topsort_visit(c, order);
        let mut cs = c.state.write();
        if !cs.exact() {
            cs.parents.push(NodeRef::new(node));
            node.dependency_count.fetch_add(1, Ordering::SeqCst);
        }
    }
    if st.exact() {
        st.init_sep_bd();
    } else {
        order.push(node.clone());
    }
    st.data_mut().visited = true;
}

/// Clear topsort marks in the whole DAG below `root` (test and tooling helper).
pub fn clear_marks(root: &Arc<Node>) {
    let mut stack = vec![root.clone()];
    while let Some(n) = stack.pop() {
        let mut st = n.state.write();
        if let Some(d) = st.data.as_deref_mut() {
            if !d.visited {
                continue;
            }
            d.visited = false;
        }
        st.parents.clear();
        stack.extend(st.x.clone());
        stack.extend(st.y.clone());
    }
}

/// Every node reachable from `root`, each once, children before parents.
pub fn reachable(root: &Arc<Node>) -> Vec<Arc<Node>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut stack = vec![(root.clone(), false)];
    while let Some((n, expanded)) = stack.pop() {
        if expanded {
            out.push(n);
            continue;
        }
        if !seen.insert(n.id()) {
            continue;
        }
        let (x, y) = n.children();
        stack.push((n, true));
        stack.extend(y.map(|c| (c, false)));
        stack.extend(x.map(|c| (c, false)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_type_packing() {
        let t = NodeType::new(NodeKind::Root, 3);
        assert_eq!(t.kind(), NodeKind::Root);
        assert_eq!(t.degree(), 3);
        assert_eq!(t.bits(), (3 << 4) | 7);
        assert_eq!(NodeType::new(NodeKind::Addition, 1).degree(), 1);
        for k in NodeKind::ALL {
            assert_eq!(NodeType::new(k, MAX_DEGREE).kind(), k);
            assert_eq!(NodeKind::from_name(k.name()), Some(k));
        }
    }

    #[test]
    fn refcounts() {
        let a = Node::double(1.5).unwrap();
        assert_eq!(Arc::strong_count(&a), 1);
        let s = Node::binary(NodeKind::Addition, &a, &a);
        assert_eq!(Arc::strong_count(&a), 3);
        assert_eq!(Arc::strong_count(&s), 1);
        drop(s);
        assert_eq!(Arc::strong_count(&a), 1);
    }

    #[test]
    fn bad_inputs() {
        assert!(Node::double(f64::NAN).is_err());
        let a = Node::double(2.0).unwrap();
        assert_eq!(Node::root(&a, 1).unwrap_err(), DagError::BadDegree(1));
    }

    #[test]
    fn filter_intervals_at_construction() {
        let a = Node::double(2.0).unwrap();
        let b = Node::double(3.0).unwrap();
        let s = Node::binary(NodeKind::Addition, &a, &b);
        assert_eq!(s.interval(), Interval::point(5.0));
        let r = Node::root(&a, 2).unwrap();
        assert!(r.interval().contains(std::f64::consts::SQRT_2));
    }

    #[test]
    fn long_chain_drops() {
        let mut n = Node::double(1.0).unwrap();
        for _ in 0..200_000 {
            n = Node::neg(&n);
        }
        drop(n);
    }

    #[test]
    fn reachable_is_postorder() {
        let a = Node::double(1.0).unwrap();
        let b = Node::binary(NodeKind::Multiplication, &a, &a);
        let c = Node::binary(NodeKind::Addition, &b, &a);
        let r = reachable(&c);
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].id(), a.id());
        assert_eq!(r[2].id(), c.id());
    }
}
