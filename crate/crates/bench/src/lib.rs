//! Criterion benchmarks for `rainweave`; see `benches/`.
