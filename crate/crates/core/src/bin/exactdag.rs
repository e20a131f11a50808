use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exactdag::gen::{ExprSpec, Generator};
use exactdag::harness::{self, TABLE_HEADER};
use exactdag::{text, Executor, TaskPool};

#[derive(Parser)]
#[command(name = "exactdag", about = "Verify and time parallel DAG evaluation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Requested absolute error exponent (error <= 2^q)
    #[arg(long, default_value_t = -100, allow_hyphen_values = true)]
    q: i64,
    #[arg(long)]
    max_threads: Option<usize>,
    #[arg(long)]
    task_threshold: Option<usize>,
    /// Executor under test (compared against inline)
    #[arg(long, default_value = "pooled")]
    executor: Executor,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long = "gen", default_value = "random-dag")]
    generator: Generator,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    share_prob: f64,
    /// Fixed leaf value (mul tree, root tower)
    #[arg(long)]
    leaf: Option<f64>,
}

impl GenArgs {
    fn spec(&self) -> ExprSpec {
        let mut s = ExprSpec::new(self.generator).seed(self.seed).share_prob(self.share_prob);
        if let Some(d) = self.depth {
            s = s.depth(d);
        }
        if let Some(n) = self.nodes {
            s = s.nodes(n);
        }
        if let Some(v) = self.leaf {
            s = s.leaf(v);
        }
        s
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare pooled and inline evaluation over seeded DAGs
    Verify {
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Write the first failing DAG (or the first case if all pass) here
        #[arg(long)]
        emit_dag: Option<PathBuf>,
    },
    /// Time one evaluation round under both executors
    Bench {
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Time only --executor (no speedup then)
        #[arg(long)]
        only: bool,
        #[arg(long)]
        emit_dag: Option<PathBuf>,
    },
    /// Re-run a DAG written by --emit-dag
    Replay {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn setup(c: &Common) {
    let pool = TaskPool::shared();
    if let Some(n) = c.max_threads {
        pool.set_max_threads(n);
    }
    if let Some(n) = c.task_threshold {
        pool.set_task_threshold(n);
    }
}

fn emit(path: &PathBuf, spec: &ExprSpec) {
    if let Err(e) = std::fs::write(path, text::serialize(&spec.generate())) {
        eprintln!("cannot write {}: {e}", path.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Verify { gen, common, trials, emit_dag } => {
            setup(&common);
            let spec = gen.spec();
            println!("{TABLE_HEADER}");
            let mut failed = 0;
            let mut first_fail = None;
            let reps = harness::verify(&spec, trials, common.executor, common.q);
            for (i, r) in reps.iter().enumerate() {
                println!("{r}");
                if !r.pass() {
                    failed += 1;
                    first_fail.get_or_insert(i as u64);
                }
            }
            println!();
            for r in &reps {
                println!("{}", r.machine_line());
            }
            if let Some(p) = &emit_dag {
                emit(p, &spec.clone().seed(spec.seed + first_fail.unwrap_or(0)));
            }
            println!("# summary trials={trials} failed={failed}");
            if failed > 0 {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Cmd::Bench { gen, common, runs, only, emit_dag } => {
            setup(&common);
            let spec = gen.spec();
            if let Some(p) = &emit_dag {
                emit(p, &spec);
            }
            let only = only.then_some(common.executor);
            let r = harness::bench(&spec, common.q, runs, only);
            let ms = |d: Option<std::time::Duration>| d.map_or("-".into(), |d| format!("{:.3} ms", d.as_secs_f64() * 1e3));
            println!("case      {}", r.case);
            println!("pooled    {}", ms(r.median_pooled));
            println!("inline    {}", ms(r.median_inline));
            if let Some(s) = r.speedup() {
                println!("speedup   {s:.3}x (max_threads={}, peak workers={})", r.max_threads, r.peak_workers);
            }
            println!("{}", r.machine_line());
            ExitCode::SUCCESS
        }
        Cmd::Replay { file, common } => {
            setup(&common);
            let src = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", file.display());
                    return ExitCode::FAILURE;
                }
            };
            match harness::replay(&src, common.executor, common.q) {
                Ok(r) => {
                    println!("{TABLE_HEADER}");
                    println!("{r}");
                    println!("{}", r.machine_line());
                    if r.pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    ExitCode::FAILURE
                }
            }
        }
    }
}
