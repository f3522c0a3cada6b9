//! Deterministic compensated summation.
//!
//! All reductions that feed certificates go through [`CompensatedSum`] in a
//! fixed enumeration order, so results are bit-identical across runs and
//! independent of the worker-thread count (parallel stages produce indexed
//! vectors; the reduction itself is always sequential and ordered).

use crate::real::Real;

/// Neumaier-variant compensated accumulator.
///
/// Tracks a running sum and a correction term; unlike plain Kahan summation
/// the correction also absorbs the case where the incoming term is larger in
/// magnitude than the running sum.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<T: Real> {
    sum: T,
    compensation: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), compensation: T::zero() }
    }

    pub fn add(&mut self, term: T) {
        let t = self.sum + term;
        let correction = if self.sum.abs() >= term.abs() {
            (self.sum - t) + term
        } else {
            (term - t) + self.sum
        };
        self.compensation += correction;
        self.sum = t;
    }

    /// Current total including the compensation term.
    pub fn total(&self) -> T {
        self.sum + self.compensation
    }

    /// Sums an iterator in its order.
    pub fn sum_iter<I: IntoIterator<Item = T>>(items: I) -> T {
        let mut acc = Self::new();
        for x in items {
            acc.add(x);
        }
        acc.total()
    }
}
