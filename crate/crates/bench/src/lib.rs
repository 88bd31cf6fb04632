//! Criterion benchmarks for `mediv-core`; see `benches/`.
