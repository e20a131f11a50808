//! Parallel-vs-inline verification and timing.

use std::fmt;
use std::time::{Duration, Instant};

use crate::bigfloat::{BigFloat, Exponent};
use crate::eval::{self, with_executor, EvalError, Executor};
use crate::gen::ExprSpec;
use crate::pool::TaskPool;
use crate::real::Real;
use crate::text;

/// What one evaluation produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub sign: Result<i32, EvalError>,
    pub approx: Option<BigFloat>,
    pub error: Option<BigFloat>,
}

/// Sign, then an absolute error guarantee of 2^q, on the given executor.
pub fn evaluate(r: &Real, exec: Executor, q: Exponent) -> (Outcome, Duration) {
    with_executor(exec, || {
        let t = Instant::now();
        let sign = r.sign();
        let mut out = Outcome { sign, approx: None, error: None };
        if out.sign.is_ok() {
            match r.guarantee_absolute_error_two_to(q).and_then(|_| r.approx_and_error()) {
                Ok((a, e)) => {
                    out.approx = Some(a);
                    out.error = Some(e);
                }
                Err(e) => out.sign = Err(e),
            }
        }
        (out, t.elapsed())
    })
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub case: String,
    pub nodes: usize,
    pub sign_parallel: Result<i32, EvalError>,
    pub sign_sequential: Result<i32, EvalError>,
    pub time_parallel: Duration,
    pub time_sequential: Duration,
    pub peak_workers: usize,
    pub sign_match: bool,
    pub value_match: bool,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.sign_match && self.value_match
    }

    /// `key=value` line for scripts.
    pub fn machine_line(&self) -> String {
        let s = |r: &Result<i32, EvalError>| match r {
            Ok(v) => v.to_string(),
            Err(_) => "err".into(),
        };
        format!(
            "case={} nodes={} sign_par={} sign_seq={} t_par_us={} t_seq_us={} peak_workers={} sign_match={} value_match={} pass={}",
            self.case,
            self.nodes,
            s(&self.sign_parallel),
            s(&self.sign_sequential),
            self.time_parallel.as_micros(),
            self.time_sequential.as_micros(),
            self.peak_workers,
            self.sign_match,
            self.value_match,
            self.pass()
        )
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |r: &Result<i32, EvalError>| match r {
            Ok(v) => format!("{v:+}"),
            Err(e) => format!("{e}"),
        };
        write!(
            f,
            "{:<36} {:>6} {:>5} {:>5} {:>10.3} {:>10.3} {:>4} {}",
            self.case,
            self.nodes,
            s(&self.sign_parallel),
            s(&self.sign_sequential),
            self.time_parallel.as_secs_f64() * 1e3,
            self.time_sequential.as_secs_f64() * 1e3,
            self.peak_workers,
            if self.pass() { "ok" } else { "FAIL" }
        )
    }
}

pub const TABLE_HEADER: &str = "case                                  nodes   par   seq     par_ms     seq_ms peak result";

/// Build the DAG twice and evaluate one copy on `exec` and the other inline.
pub fn compare(case: &str, build: &dyn Fn() -> Real, exec: Executor, q: Exponent) -> RunReport {
    let a = build();
    let b = build();
    let nodes = crate::dag::reachable(a.node()).len();
    let pool = TaskPool::shared();
    pool.reset_peak();
    let (pa, ta) = evaluate(&a, exec, q);
    let peak = if exec == Executor::Pooled { pool.stats().peak_threads } else { 0 };
    let (sa, tb) = evaluate(&b, Executor::Inline, q);
    RunReport {
        case: case.to_string(),
        nodes,
        sign_match: pa.sign == sa.sign,
        value_match: pa == sa,
        sign_parallel: pa.sign,
        sign_sequential: sa.sign,
        time_parallel: ta,
        time_sequential: tb,
        peak_workers: peak,
    }
}

/// `trials` cases with seeds `spec.seed, spec.seed + 1, ...`.
pub fn verify(spec: &ExprSpec, trials: usize, exec: Executor, q: Exponent) -> Vec<RunReport> {
    (0..trials as u64)
        .map(|i| {
            let s = spec.clone().seed(spec.seed.wrapping_add(i));
            compare(&s.case_id(), &|| s.generate(), exec, q)
        })
        .collect()
}

/// Re-run a serialized DAG.
pub fn replay(dag_text: &str, exec: Executor, q: Exponent) -> Result<RunReport, text::ParseError> {
    text::parse(dag_text)?;
    Ok(compare("replay", &|| text::parse(dag_text).unwrap(), exec, q))
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub case: String,
    pub q: Exponent,
    pub runs: usize,
    pub median_pooled: Option<Duration>,
    pub median_inline: Option<Duration>,
    pub peak_workers: usize,
    pub max_threads: usize,
}

impl BenchReport {
    /// inline time / pooled time
    pub fn speedup(&self) -> Option<f64> {
        Some(self.median_inline?.as_secs_f64() / self.median_pooled?.as_secs_f64())
    }

    pub fn machine_line(&self) -> String {
        let ms = |d: Option<Duration>| d.map_or("na".into(), |d| format!("{:.3}", d.as_secs_f64() * 1e3));
        format!(
            "case={} q={} runs={} pooled_ms={} inline_ms={} speedup={} max_threads={} peak_workers={}",
            self.case,
            self.q,
            self.runs,
            ms(self.median_pooled),
            ms(self.median_inline),
            self.speedup().map_or("na".into(), |s| format!("{s:.3}")),
            self.max_threads,
            self.peak_workers
        )
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Time one accuracy driven round to 2^q on fresh copies of the DAG; one
/// warmup run is discarded, the median of `runs` is reported.
pub fn time_round(build: &dyn Fn() -> Real, exec: Executor, q: Exponent, runs: usize) -> Duration {
    let mut times = Vec::new();
    for i in 0..=runs.max(1) {
        let r = build();
        eval::init_node_data(r.node()).expect("bench DAG evaluates");
        let t = Instant::now();
        with_executor(exec, || eval::guarantee_bound_two_to(r.node(), q)).expect("bench DAG evaluates");
        let dt = t.elapsed();
        if i > 0 {
            times.push(dt);
        }
        drop(r);
    }
    median(times)
}

pub fn bench(spec: &ExprSpec, q: Exponent, runs: usize, only: Option<Executor>) -> BenchReport {
    let build = || spec.generate();
    let pool = TaskPool::shared();
    pool.reset_peak();
    let pooled = (only != Some(Executor::Inline)).then(|| time_round(&build, Executor::Pooled, q, runs));
    let peak = pool.stats().peak_threads;
    let inline = (only != Some(Executor::Pooled)).then(|| time_round(&build, Executor::Inline, q, runs));
    BenchReport {
        case: spec.case_id(),
        q,
        runs,
        median_pooled: pooled,
        median_inline: inline,
        peak_workers: peak,
        max_threads: pool.config().max_threads,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::Generator;

    #[test]
    fn small_verify_passes() {
        let spec = ExprSpec::new(Generator::RandomDag).nodes(40).depth(5);
        let reps = verify(&spec, 5, Executor::Pooled, -80);
        assert!(reps.iter().all(|r| r.pass()), "{:?}", reps);
        assert!(reps[0].machine_line().contains("pass=true"));
    }

    #[test]
    fn replay_round_trip() {
        let r = ExprSpec::new(Generator::ZeroIdentity).seed(3).generate();
        let rep = replay(&text::serialize(&r), Executor::Pooled, -64).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.sign_sequential, Ok(0));
    }
}
