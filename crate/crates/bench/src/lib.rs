//! Criterion benchmarks for topoflip live in `benches/`.
