//! Benchmarks for the estimator and plant live under `benches/`.
