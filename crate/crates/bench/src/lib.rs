//! Criterion benchmarks for enrfem live in `benches/`.
