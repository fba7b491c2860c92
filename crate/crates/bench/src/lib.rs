//! Benchmark fixtures; see `benches/`.

/// Register dimensions exercised by the engine benchmarks.
pub const DENSE_DIMS: [usize; 3] = [8, 32, 128];
pub const ANALYTIC_DIMS: [usize; 3] = [1 << 10, 1 << 14, 1 << 18];
