//! Criterion benchmarks for `qlbe-core`; see `benches/`.
