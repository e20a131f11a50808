mod common;

use std::process::Command;
use std::sync::Arc;

use common::oracle;
use exactdag::dag::{live_nodes, reachable};
use exactdag::eval::{self, EvalError};
use exactdag::gen::{root_tower, ExprSpec, Generator};
use exactdag::{with_executor, BigFloat, Executor, Node, NodeKind, Real};

#[test]
fn division_by_exact_zero_is_an_error() {
    let z = Real::new(2.0).sqrt() * Real::new(2.0).sqrt() - Real::new(2.0);
    let r = Real::new(1.0) / z;
    for e in [Executor::Inline, Executor::Pooled] {
        let got = with_executor(e, || r.sign());
        assert!(matches!(got, Err(EvalError::DivisionByZero { .. })), "{got:?}");
    }
}

#[test]
fn negative_radicand_is_an_error() {
    let r = (Real::new(2.0).sqrt() - Real::new(1.5)).sqrt();
    assert!(matches!(r.sign(), Err(EvalError::NegativeRadicand { .. })));
}

#[test]
fn non_finite_leaves_rejected() {
    assert!(Real::try_new(f64::NAN).is_err());
    assert!(Node::double(f64::INFINITY).is_err());
    assert!(Real::new(2.0).root(1).is_err());
}

#[test]
fn nodes_freed_after_pooled_rounds() {
    let before = live_nodes();
    {
        let r = ExprSpec::new(Generator::RandomDag).nodes(400).depth(10).seed(9).generate();
        with_executor(Executor::Pooled, || r.guarantee_absolute_error_two_to(-800)).unwrap();
    }
    // other tests run concurrently; this DAG alone has hundreds of nodes
    assert!(live_nodes() < before + 50, "{} -> {}", before, live_nodes());
}

#[test]
fn deep_chain_drops_without_overflow() {
    let mut r = Real::new(1.0);
    for i in 0..200_000 {
        r = &r + &Real::new(i as f64);
    }
    drop(r);
}

#[test]
fn repeated_rounds_keep_tightening() {
    let t = root_tower(10, 2.0);
    let mut last = None;
    for q in (1..=8).map(|k| -128 * k) {
        t.guarantee_absolute_error_two_to(q).unwrap();
        let (_, e) = t.approx_and_error().unwrap();
        assert!(e <= BigFloat::pow2(q));
        if let Some(l) = last {
            assert!(e <= l);
        }
        last = Some(e);
    }
}

#[test]
fn round_covers_every_non_exact_node() {
    let r = ExprSpec::new(Generator::RandomDag).nodes(300).depth(9).share_prob(0.5).seed(77).generate();
    eval::init_node_data(r.node()).unwrap();
    eval::guarantee_bound_two_to(r.node(), -2000).unwrap();
    for n in reachable(r.node()) {
        assert_eq!(n.algebraic_degree(), oracle::degree(&n));
        assert!(n.is_exact() || n.round_executions() == 1, "node {} ran {} times", n.id(), n.round_executions());
        if n.round_executions() == 1 {
            // one decrement per child plus the driver's initial pass
            assert_eq!(n.dependency_count(), -1);
        }
    }
}

#[test]
fn relative_error_on_shared_dag() {
    let s = Real::new(5.0).sqrt();
    let phi = (Real::new(1.0) + &s) / Real::new(2.0);
    let r = &phi * &phi - &phi; // == 1
    r.guarantee_relative_error_two_to(-300).unwrap();
    let (a, e) = r.approx_and_error().unwrap();
    assert!(e <= BigFloat::pow2(-299));
    assert!((a.add_exact(&BigFloat::one().neg())).abs() <= e);
    assert_eq!(r.sign().unwrap(), 1);
    assert_eq!(r.compare(&Real::new(1.0)).unwrap(), std::cmp::Ordering::Equal);
}

#[test]
fn leaves_share_children() {
    let a = Real::new(3.0);
    let b = &a * &a;
    assert_eq!(b.node().kind(), NodeKind::Multiplication);
    let (x, y) = b.node().children();
    assert!(Arc::ptr_eq(&x.unwrap(), &y.unwrap()));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exactdag"))
}

#[test]
fn cli_verify_emit_and_replay() {
    let dir = std::env::temp_dir().join(format!("exactdag-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dag = dir.join("case.dag");
    let out = cli()
        .args(["verify", "--seed", "3", "--depth", "6", "--nodes", "80", "--share-prob", "0.3", "--trials", "5", "--q", "-300"])
        .args(["--max-threads", "3", "--task-threshold", "2", "--executor", "pooled", "--emit-dag"])
        .arg(&dag)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.contains(" ok")).count(), 5, "{stdout}");
    assert!(stdout.contains("failed=0"));

    let out = cli().args(["replay", "--q", "-200"]).arg(&dag).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("case=replay") && l.ends_with("pass=true")), "{stdout}");

    std::fs::write(&dag, "exactdag-dag 1\n0 ROOT 2 4\nroot 0\n").unwrap();
    assert!(!cli().arg("replay").arg(&dag).output().unwrap().status.success());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cli_bench_reports_speedup() {
    let out = cli()
        .args(["bench", "--gen", "mul-tree", "--depth", "8", "--q", "-1000", "--runs", "2", "--executor", "inline", "--only"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("case=balanced-mul-tree") && l.contains("speedup=")), "{stdout}");
}
