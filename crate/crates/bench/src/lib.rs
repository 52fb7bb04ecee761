//! Criterion benchmarks for the numerical kernels; see `benches/kernels.rs`.
//!
//! Run with `cargo bench -p dfchannel-bench`.
