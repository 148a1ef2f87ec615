//! Benchmark fixtures. The benches themselves live in `benches/`.

use wsaw_core::{Ambient, Step, Walk};

/// A deterministic d=2 walk of length `n` that folds back on itself often,
/// so lace sums have work to do.
pub fn folded_walk(n: usize) -> Walk {
    let pattern = [
        Step::new(0, false),
        Step::new(1, false),
        Step::new(0, true),
        Step::new(1, true),
        Step::new(0, false),
        Step::new(0, true),
    ];
    Walk::from_steps(2, Ambient::Lattice, (0..n).map(|i| pattern[i % pattern.len()]).collect()).expect("valid steps")
}
