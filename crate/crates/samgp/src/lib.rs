//! Tree GP engine for symbolic regression with sharpness-aware selection.
//!
//! The engine evolves expression trees against R² training fitness and,
//! optionally, a second selection criterion: sharpness estimated either by
//! perturbing the terminals (inputs and constants) or by perturbing the
//! output semantics directly. A genotype-phenotype mapping strips
//! semantically ineffective code to measure redundancy per individual.

pub mod cli;
pub mod data;
pub mod eval;
pub mod evolve;
pub mod expr;
pub mod fitness;
pub mod gpm;
pub mod report;
pub mod rng;
pub mod selection;
pub mod sharpness;

/// Stack budget for threads that walk evolved trees. Evolution runs without
/// a depth limit, so recursive tree traversals need room well beyond the
/// 2 MiB thread default.
pub const TREE_STACK_BYTES: usize = 256 * 1024 * 1024;

/// Install a global rayon pool whose workers can handle arbitrarily deep
/// trees. Idempotent; call before any parallel work.
pub fn init_parallelism() {
    static INIT: std::sync::Once = std::sync::Once::new();
    INIT.call_once(|| {
        let _ = rayon::ThreadPoolBuilder::new()
            .stack_size(TREE_STACK_BYTES)
            .build_global();
    });
}
