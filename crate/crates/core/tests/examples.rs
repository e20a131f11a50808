//! Every example under examples/ runs to completion.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    };
}

example!(sign_decisions, "../examples/sign_decisions.rs");
example!(zero_detection, "../examples/zero_detection.rs");
example!(error_guarantees, "../examples/error_guarantees.rs");
example!(parallel_vs_inline, "../examples/parallel_vs_inline.rs");
example!(task_pool, "../examples/task_pool.rs");
example!(degree_bound, "../examples/degree_bound.rs");
example!(dag_text, "../examples/dag_text.rs");
example!(bigfloat_rounding, "../examples/bigfloat_rounding.rs");
