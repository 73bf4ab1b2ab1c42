//! Criterion benchmarks for the cascade simulator live in `benches/`.
