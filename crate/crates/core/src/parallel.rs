//! Data-parallel helpers with a sequential fallback.
//!
//! Independent runs (seeds, step-size sweeps, oracle instances, grid points)
//! go through these helpers. Results are always collected in input order, so
//! the output does not depend on the execution strategy. Without the
//! `parallel` feature, [`Execution::Parallel`] runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Index of the smallest value of `f` over an evenly spaced grid of `n`
/// points on `(lo, hi]`, together with the grid point and value. Ties go to
/// the lowest index.
pub fn grid_argmin<F>(exec: Execution, lo: f64, hi: f64, n: usize, f: F) -> (usize, f64, f64)
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    assert!(n > 0 && hi > lo);
    let h = (hi - lo) / n as f64;
    let values = map_range(exec, n, |i| {
        let x = lo + h * (i + 1) as f64;
        (x, f(x))
    });
    let mut best = 0;
    for (i, (_, v)) in values.iter().enumerate() {
        if *v < values[best].1 {
            best = i;
        }
    }
    (best, values[best].0, values[best].1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let seq = map_range(Execution::Sequential, 100, |i| i * i);
        let par = map_range(Execution::Parallel, 100, |i| i * i);
        assert_eq!(seq, par);
        let items: Vec<u32> = (0..10).collect();
        assert_eq!(
            map_slice(Execution::Sequential, &items, |x| x + 1),
            map_slice(Execution::Parallel, &items, |x| x + 1)
        );
    }

    #[test]
    fn grid_argmin_finds_parabola_vertex() {
        let (_, x, v) = grid_argmin(Execution::Parallel, 0.0, 2.0, 2000, |x| (x - 0.7).powi(2));
        assert!((x - 0.7).abs() <= 1e-3);
        assert!(v < 1e-6);
    }
}
