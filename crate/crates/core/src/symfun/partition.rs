use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// A partition, parts stored in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Sorts the parts; rejects zero parts and the empty list.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("empty partition".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// (k, multiplicity of k) for each distinct part, descending in k.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &k in &self.0 {
            match out.last_mut() {
                Some((v, c)) if *v == k => *c += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Z_mu = prod_k k^{mu(k)} mu(k)!.
    pub fn z(&self) -> BigUint {
        let mut acc = BigUint::one();
        for (k, c) in self.multiplicities() {
            for i in 1..=c {
                acc *= BigUint::from(k) * BigUint::from(i);
            }
        }
        acc
    }

    /// phi_mu(q) = prod_j (q^{m_j} - 1) = |Gamma_mu^|.
    pub fn phi(&self, q: u64) -> BigUint {
        self.0
            .iter()
            .map(|&m| BigUint::from(q).pow(m) - BigUint::one())
            .product()
    }

    pub fn z_f64(&self) -> f64 {
        self.z().to_f64().expect("finite")
    }

    pub fn phi_f64(&self, q: u64) -> f64 {
        self.phi(q).to_f64().expect("finite")
    }
}

/// All partitions of m, largest first part first. For m = 0 this is empty.
pub fn partitions(m: u32) -> Vec<Partition> {
    fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for k in (1..=rest.min(max)).rev() {
            cur.push(k);
            rec(rest - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        rec(m, m, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_and_phi() {
        let mu = Partition::new(vec![1, 2, 1]).unwrap();
        assert_eq!(mu.parts(), &[2, 1, 1]);
        assert_eq!(mu.z(), BigUint::from(4u32));
        assert_eq!(mu.phi(3), BigUint::from(32u32));
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(4)[0].parts(), &[4]);
        assert!(Partition::new(vec![2, 0]).is_err());
    }
}
