//! Criterion benchmarks for the ancred crate live under `benches/`.
