use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::bigfloat::{BigFloat, Exponent, RoundingMode};
use crate::dag::{DagError, Node, NodeKind};
use crate::eval::{self, Result};
use crate::interval::Interval;

/// A real number represented by an expression DAG. Cloning shares the node.
#[derive(Clone)]
pub struct Real(Arc<Node>);

impl Real {
    /// Panics on NaN/infinity; see [`Real::try_new`].
    pub fn new(d: f64) -> Real {
        Self::try_new(d).expect("finite leaf")
    }

    pub fn try_new(d: f64) -> std::result::Result<Real, DagError> {
        Node::double(d).map(Real)
    }

    pub fn from_bigfloat(x: BigFloat) -> Real {
        Real(Node::bigfloat(x))
    }

    pub fn from_node(n: Arc<Node>) -> Real {
        Real(n)
    }

    pub fn node(&self) -> &Arc<Node> {
        &self.0
    }

    pub fn into_node(self) -> Arc<Node> {
        self.0
    }

    pub fn sqrt(&self) -> Real {
        self.root(2).unwrap()
    }

    pub fn root(&self, d: u32) -> std::result::Result<Real, DagError> {
        Node::root(&self.0, d).map(Real)
    }

    pub fn sign(&self) -> Result<i32> {
        eval::sign(&self.0)
    }

    pub fn compare(&self, other: &Real) -> Result<Ordering> {
        Ok((self - other).sign()?.cmp(&0))
    }

    pub fn guarantee_absolute_error_two_to(&self, p: Exponent) -> Result<()> {
        eval::guarantee_absolute_error_two_to(&self.0, p)
    }

    pub fn guarantee_relative_error_two_to(&self, p: Exponent) -> Result<()> {
        eval::guarantee_relative_error_two_to(&self.0, p)
    }

    pub fn approx_and_error(&self) -> Result<(BigFloat, BigFloat)> {
        eval::approx_and_error(&self.0)
    }

    pub fn interval(&self) -> Result<Interval> {
        eval::get_interval(&self.0)
    }

    /// Nearest double to the current approximation (no accuracy guarantee).
    pub fn to_f64(&self) -> Result<f64> {
        Ok(self.approx_and_error()?.0.to_f64(RoundingMode::Nearest))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({:?})", self.0)
    }
}

impl From<BigFloat> for Real {
    fn from(x: BigFloat) -> Self {
        Real::from_bigfloat(x)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $kind:expr) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real(Node::binary($kind, &self.0, &rhs.0))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, NodeKind::Addition);
binop!(Sub, sub, NodeKind::Subtraction);
binop!(Mul, mul, NodeKind::Multiplication);
binop!(Div, div, NodeKind::Division);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Node::neg(&self.0))
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_build_nodes() {
        let a = Real::new(2.0);
        let b = a.sqrt();
        let c = &b * &b - &a;
        assert_eq!(c.node().kind(), NodeKind::Subtraction);
        assert_eq!(c.sign().unwrap(), 0);
        assert_eq!((-&a).sign().unwrap(), -1);
        assert_eq!(a.compare(&Real::new(1.0)).unwrap(), Ordering::Greater);
    }
}
