//! Criterion benchmarks for the per-tick hot paths. Run with `cargo bench`.
