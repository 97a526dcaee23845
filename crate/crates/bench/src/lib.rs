//! Criterion benchmarks for the `polarbp` decoders; see `benches/decoders.rs`.
