//! Partitions and symmetric-function utilities.

mod newton;
mod partition;
mod roots;

pub use newton::{
    dickson_eval, exterior_trace_from_powers, newton_e_from_p, newton_h_from_p, newton_p_from_e,
};
pub use partition::{partitions, Partition};
pub use roots::{delta_deform, poly_roots, refined_roots, roots_on_unit_circle};

use num_complex::Complex64;

/// Compensated summation of complex terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: Complex64,
    comp: Complex64,
    terms: u64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: Complex64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
        self.terms += 1;
    }

    /// Merges another partial sum.
    pub fn merge(&mut self, other: &KahanSum) {
        let terms = self.terms + other.terms;
        self.add(other.sum);
        self.add(-other.comp);
        self.terms = terms;
    }

    pub fn value(&self) -> Complex64 {
        self.sum - self.comp
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }
}

/// Absolute tolerance for a sum of `terms` unit-modulus terms with value v.
pub fn sum_tolerance(terms: u64, v: Complex64) -> f64 {
    1e-12 * terms as f64 + 1e-9 * v.norm()
}
