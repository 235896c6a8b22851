//! Benchmark-only crate; see benches/machine.rs.
