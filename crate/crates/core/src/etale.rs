//! The étale algebra F_{q^n} ⊗ F_{q^m} ≅ F_{q^l}^d (d = gcd, l = lcm) and
//! its λ-version F_λ ⊗ F_{q^m} = ∏_j F_{q^{n_j}} ⊗ F_{q^m}.
//!
//! Under the isomorphism, s ∈ F_{q^n} acts diagonally and r ∈ F_{q^m} acts by
//! (r, r^{1/q}, ..., r^{1/q^{d-1}}). The two norms are
//!   N1(x) = ∏_j N_{l/n}(x_j),   N2(x) = ∏_j N_{l/m}(x_j)^{q^{j-1}},
//! and the trace to F_q is Σ_j Tr_{l/1}(x_j).

use crate::arith::{gcd, inv_mod, lcm, mul_mod, pow_mod};
use crate::error::{Error, Result};
use crate::field::{AmbientField, FieldElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EtaleTensorAlgebra {
    n: u32,
    m: u32,
    d: u32,
    l: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EtaleElement {
    pub coords: Vec<FieldElement>,
}

impl EtaleTensorAlgebra {
    pub fn new(field: &AmbientField, n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidDegree("tensor factors need positive degree".into()));
        }
        let d = gcd(n as u64, m as u64) as u32;
        let l = lcm(n as u64, m as u64) as u32;
        if !field.divides_ext(l) {
            return Err(Error::DegreeNotDividing {
                inner: l,
                outer: field.ext_degree(),
            });
        }
        Ok(EtaleTensorAlgebra { n, m, d, l })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    /// Number of field factors.
    pub fn d(&self) -> u32 {
        self.d
    }
    /// Degree of each factor over F_q.
    pub fn l(&self) -> u32 {
        self.l
    }

    fn check(&self, field: &AmbientField, x: &EtaleElement) -> Result<()> {
        if x.coords.len() != self.d as usize {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coordinates, got {}",
                self.d,
                x.coords.len()
            )));
        }
        if x.coords.iter().any(|&c| !field.in_subfield(c, self.l)) {
            return Err(Error::NotInSubfield(self.l));
        }
        Ok(())
    }

    pub fn norm1(&self, field: &AmbientField, x: &EtaleElement) -> Result<FieldElement> {
        self.check(field, x)?;
        let mut acc = FieldElement::ONE;
        for &c in &x.coords {
            acc = field.mul(acc, field.norm(c, self.l, self.n)?);
        }
        Ok(acc)
    }

    pub fn norm2(&self, field: &AmbientField, x: &EtaleElement) -> Result<FieldElement> {
        self.check(field, x)?;
        let mut acc = FieldElement::ONE;
        for (j, &c) in x.coords.iter().enumerate() {
            let nm = field.norm(c, self.l, self.m)?;
            acc = field.mul(acc, field.frobenius(nm, j as u32));
        }
        Ok(acc)
    }

    pub fn abs_trace(&self, field: &AmbientField, x: &EtaleElement) -> Result<FieldElement> {
        self.check(field, x)?;
        let mut acc = FieldElement::ZERO;
        for &c in &x.coords {
            acc = field.add(acc, field.trace(c, self.l, 1)?);
        }
        Ok(acc)
    }

    /// s ⊗ 1 for s in F_{q^n}.
    pub fn from_left(&self, field: &AmbientField, s: FieldElement) -> Result<EtaleElement> {
        if !field.in_subfield(s, self.n) {
            return Err(Error::NotInSubfield(self.n));
        }
        Ok(EtaleElement {
            coords: vec![s; self.d as usize],
        })
    }

    /// 1 ⊗ r for r in F_{q^m}.
    pub fn from_right(&self, field: &AmbientField, r: FieldElement) -> Result<EtaleElement> {
        if !field.in_subfield(r, self.m) {
            return Err(Error::NotInSubfield(self.m));
        }
        // r^{1/q^j} = r^{q^{m - j}} on F_{q^m}.
        let mm = self.m;
        Ok(EtaleElement {
            coords: (0..self.d)
                .map(|j| field.frobenius(r, (mm - j % mm) % mm))
                .collect(),
        })
    }

    pub fn mul(&self, field: &AmbientField, a: &EtaleElement, b: &EtaleElement) -> EtaleElement {
        EtaleElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(&x, &y)| field.mul(x, y))
                .collect(),
        }
    }
}

/// F_λ ⊗ F_{q^m} as a list of tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LambdaTensorAlgebra {
    m: u32,
    factors: Vec<EtaleTensorAlgebra>,
}

pub type LambdaElement = Vec<EtaleElement>;

impl LambdaTensorAlgebra {
    pub fn new(field: &AmbientField, lambda: &[u32], m: u32) -> Result<Self> {
        let factors = lambda
            .iter()
            .map(|&n| EtaleTensorAlgebra::new(field, n, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(LambdaTensorAlgebra { m, factors })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn factors(&self) -> &[EtaleTensorAlgebra] {
        &self.factors
    }

    /// Number of units, ∏_j (q^{l_j} - 1)^{d_j}.
    pub fn unit_count(&self, field: &AmbientField) -> u128 {
        self.factors
            .iter()
            .map(|a| ((field.q_pow(a.l) - 1) as u128).pow(a.d))
            .product()
    }

    /// Size of each fiber of N2 on units.
    pub fn fiber_size(&self, field: &AmbientField) -> u128 {
        self.unit_count(field) / (field.q_pow(self.m) - 1) as u128
    }

    fn check(&self, x: &LambdaElement) -> Result<()> {
        if x.len() != self.factors.len() {
            return Err(Error::ShapeMismatch("wrong number of λ factors".into()));
        }
        Ok(())
    }

    /// Factor-wise N1, one value in F_{q^{n_j}} per part.
    pub fn norm1(&self, field: &AmbientField, x: &LambdaElement) -> Result<Vec<FieldElement>> {
        self.check(x)?;
        self.factors
            .iter()
            .zip(x)
            .map(|(a, xi)| a.norm1(field, xi))
            .collect()
    }

    /// Product of the factor N2 values, in F_{q^m}.
    pub fn norm2(&self, field: &AmbientField, x: &LambdaElement) -> Result<FieldElement> {
        self.check(x)?;
        let mut acc = FieldElement::ONE;
        for (a, xi) in self.factors.iter().zip(x) {
            acc = field.mul(acc, a.norm2(field, xi)?);
        }
        Ok(acc)
    }

    pub fn abs_trace(&self, field: &AmbientField, x: &LambdaElement) -> Result<FieldElement> {
        self.check(x)?;
        let mut acc = FieldElement::ZERO;
        for (a, xi) in self.factors.iter().zip(x) {
            acc = field.add(acc, a.abs_trace(field, xi)?);
        }
        Ok(acc)
    }

    /// Flattened coordinate layout used by the exponent-level walkers.
    pub(crate) fn layout(&self, field: &AmbientField) -> Vec<CoordSlot> {
        let mm = field.q_pow(self.m) - 1;
        let mut out = Vec::new();
        for (i, a) in self.factors.iter().enumerate() {
            for j in 0..a.d {
                out.push(CoordSlot {
                    factor: i,
                    l: a.l,
                    modulus: field.q_pow(a.l) - 1,
                    n2_weight: pow_mod(field.q(), j as u64, mm),
                });
            }
        }
        out
    }

    /// Calls `f` with the exponent vector (x_s = g_{l_s}^{e_s}) of every unit
    /// x with N2(x) = g_m^{target}. Returns the number of points visited.
    pub(crate) fn walk_fiber<F: FnMut(&[u64])>(
        &self,
        field: &AmbientField,
        target: u64,
        mut f: F,
    ) -> u64 {
        let slots = self.layout(field);
        let mm = field.q_pow(self.m) - 1;
        let last = slots.len() - 1;
        let inv_w = inv_mod(slots[last].n2_weight, mm).expect("q is a unit mod q^m - 1");
        let mut e = vec![0u64; slots.len()];
        let mut count = 0u64;
        loop {
            let partial = (0..last).fold(0u64, |acc, s| {
                (acc + mul_mod(e[s] % mm, slots[s].n2_weight, mm)) % mm
            });
            let base = mul_mod((target % mm + mm - partial) % mm, inv_w, mm);
            let mut t = base;
            while t < slots[last].modulus {
                e[last] = t;
                f(&e);
                count += 1;
                t += mm;
            }
            // Odometer over the free coordinates.
            let mut s = last;
            loop {
                if s == 0 {
                    return count;
                }
                s -= 1;
                e[s] += 1;
                if e[s] < slots[s].modulus {
                    break;
                }
                e[s] = 0;
            }
        }
    }

    /// Calls `f` with the exponent vector of every unit.
    pub(crate) fn walk_units<F: FnMut(&[u64])>(&self, field: &AmbientField, mut f: F) -> u64 {
        let slots = self.layout(field);
        let mut e = vec![0u64; slots.len()];
        let mut count = 0u64;
        loop {
            f(&e);
            count += 1;
            let mut s = slots.len();
            loop {
                if s == 0 {
                    return count;
                }
                s -= 1;
                e[s] += 1;
                if e[s] < slots[s].modulus {
                    break;
                }
                e[s] = 0;
            }
        }
    }

    /// Materialised N2-fiber over a ∈ F_{q^m}^x.
    pub fn norm2_fiber(&self, field: &AmbientField, a: FieldElement) -> Result<Vec<LambdaElement>> {
        let target = field.subfield_exponent(a, self.m)?;
        let slots = self.layout(field);
        let gens = self
            .factors
            .iter()
            .map(|f| field.subfield_generator(f.l))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        self.walk_fiber(field, target, |e| {
            let mut elem: LambdaElement = self
                .factors
                .iter()
                .map(|_| EtaleElement { coords: Vec::new() })
                .collect();
            for (s, slot) in slots.iter().enumerate() {
                elem[slot.factor]
                    .coords
                    .push(field.pow(gens[slot.factor], e[s]));
            }
            out.push(elem);
        });
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CoordSlot {
    pub factor: usize,
    pub l: u32,
    pub modulus: u64,
    pub n2_weight: u64,
}
