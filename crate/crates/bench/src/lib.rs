//! Criterion benchmarks for roth-core; see `benches/`.
