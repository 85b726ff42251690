//! Criterion benchmarks for the engines live in `benches/`.
