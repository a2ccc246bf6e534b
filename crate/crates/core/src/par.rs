//! Index-parallel table fills. Each entry depends only on its index, so the
//! output is identical with and without the `parallel` feature.

#[cfg(feature = "parallel")]
pub(crate) fn fill(table: &mut [f64], f: impl Fn(u64) -> f64 + Sync) {
    use rayon::prelude::*;
    const CHUNK: usize = 1 << 12;
    table
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let base = (c * CHUNK) as u64;
            for (k, v) in chunk.iter_mut().enumerate() {
                *v = f(base + k as u64);
            }
        });
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn fill(table: &mut [f64], f: impl Fn(u64) -> f64) {
    for (x, v) in table.iter_mut().enumerate() {
        *v = f(x as u64);
    }
}

/// `(0..len).map(f)`, evaluated in parallel when enabled; order is preserved.
#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T: Send>(
    len: usize,
    f: impl Fn(usize) -> T + Sync + Send,
) -> alloc::vec::Vec<T> {
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T>(len: usize, f: impl Fn(usize) -> T) -> alloc::vec::Vec<T> {
    (0..len).map(f).collect()
}
