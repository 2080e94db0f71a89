//! Data-parallel helpers for the bulk array passes.
//!
//! Only pure element-wise maps go through here, so the result is identical
//! whether a pass runs sequentially or on the rayon pool. Group comparisons
//! never happen inside these passes; instrumented comparison counts stay
//! deterministic. Compiling without the `parallel` feature removes rayon
//! entirely and every pass runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Element-wise map, parallel when requested and compiled in.
pub fn map_slice<T, U, F>(parallel: bool, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
