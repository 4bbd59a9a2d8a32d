//! Criterion benchmarks for the som3d training loop; see `benches/`.
