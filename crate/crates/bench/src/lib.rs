//! Criterion benchmarks for `ampshare-core`; see `benches/`.
