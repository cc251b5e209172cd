//! Data-parallel map used by the sweeps. With the `parallel` feature the work is
//! spread over the rayon pool; without it everything runs on the calling
//! thread. Output order always matches input order.

/// How a sweep should be executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon when compiled in, otherwise sequential.
    #[default]
    Auto,
    Sequential,
}

pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn seq_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

pub fn map_with<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        Execution::Auto => par_map(items, f),
        Execution::Sequential => seq_map(items, f),
    }
}

/// Whether `Execution::Auto` actually fans out.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
