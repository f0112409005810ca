//! Criterion benchmarks for the integrator, whole drags, the exact oracle
//! and simulated annealing. Run with `cargo bench -p compass-bench`.
