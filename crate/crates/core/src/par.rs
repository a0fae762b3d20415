//! Order-preserving map over a slice, parallel when the `parallel` feature
//! is on. Results are positionally indexed, so thread scheduling can never
//! change an output.

#[cfg(feature = "parallel")]
pub(crate) fn map_vec<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_vec<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    items.iter().map(f).collect()
}
