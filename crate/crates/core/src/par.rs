//! Data-parallel map over chain indices, with a sequential path that is
//! always available and the only one when the `parallel` feature is off.
//!
//! Results come back in index order either way, so outputs do not depend
//! on the execution mode or thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// Falls back to sequential when built without `parallel`.
    #[cfg_attr(feature = "parallel", default)]
    Parallel,
}

impl Execution {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let a = map_indexed(1000, Execution::Sequential, |i| i * i);
        let b = map_indexed(1000, Execution::Parallel, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a[31], 961);
    }
}
