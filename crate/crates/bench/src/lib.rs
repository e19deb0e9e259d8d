//! Benchmarks for the core library; see `benches/`.

/// Surfaces used by the benchmarks, as `(f, n)`.
pub const SURFACES: [(&str, usize); 3] = [("x1*tanh(x2)", 2), ("x3 + (x1 - 2*x2)^2", 3), ("xn", 4)];
