//! Criterion benchmarks for varmech live in `benches/`.
