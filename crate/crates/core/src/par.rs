//! Data-parallel helpers. With the `parallel` feature off everything runs
//! sequentially and [`Execution::Parallel`] degrades to a plain loop.

/// How independent work units are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `items.iter().map(f).collect()`, order preserved.
pub fn map_collect<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `f(row_index, row)` over every `width`-sized row of `data`.
pub(crate) fn for_each_row<T, F>(exec: Execution, data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            data.par_chunks_mut(width).enumerate().for_each(|(r, row)| f(r, row));
        }
        _ => data.chunks_mut(width).enumerate().for_each(|(r, row)| f(r, row)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let items: Vec<u32> = (0..1000).collect();
        let a = map_collect(Execution::Sequential, &items, |x| x * 3);
        let b = map_collect(Execution::Parallel, &items, |x| x * 3);
        assert_eq!(a, b);

        let mut d1 = vec![0usize; 60];
        let mut d2 = d1.clone();
        for_each_row(Execution::Sequential, &mut d1, 6, |r, row| {
            row.iter_mut().enumerate().for_each(|(c, v)| *v = r * 6 + c)
        });
        for_each_row(Execution::Parallel, &mut d2, 6, |r, row| {
            row.iter_mut().enumerate().for_each(|(c, v)| *v = r * 6 + c)
        });
        assert_eq!(d1, d2);
        assert_eq!(d1, (0..60).collect::<Vec<_>>());
    }
}
