//! Benchmark-only crate; see `benches/`. Complexity claims are covered by
//! the deterministic op-count suite in `adc-core`, so everything here is
//! informational wall-clock timing.
