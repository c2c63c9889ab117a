//! Criterion benchmarks of the walk estimators and certified areas; run
//! with `cargo bench -p hcap-bench`.
