//! Gauss sums, étale-algebra τ sums and exotic Kloosterman sums.
//!
//! Conventions: τ(γ, ψ_r) = -Σ_{ξ ∈ F_{q^r}^x} γ^{-1}(ξ) ψ_r(ξ), and
//!   τ_{n,m}(α×β, ψ) = ∏_{k=1}^{d} τ(α∘N_{l/n} · β^{q^{k-1}}∘N_{l/m}, ψ_l)
//!                   = (-1)^{nm+n+m} Σ_{ξ} α^{-1}(N1 ξ) β^{-1}(N2 ξ) ψ(Tr ξ).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::arith::mul_mod;
use crate::characters::{root_of_unity, AddCharacter, MulCharacter, RootTable};
use crate::error::{Error, Result};
use crate::etale::LambdaTensorAlgebra;
use crate::field::{AmbientField, FieldElement};
use crate::symfun::KahanSum;

pub const DEFAULT_COST_CAP: u128 = 100_000_000;

/// A character sum together with the number of unit-modulus terms summed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumValue {
    pub value: Complex64,
    pub terms: u64,
}

/// Parameters of J_m(χ, ψ, a) = Σ_{N2(x) = a} χ(N1 x) ψ(Tr x) on
/// (F_λ ⊗ F_{q^m})^x.
#[derive(Clone, Debug, PartialEq)]
pub struct KloostermanSpec {
    pub chi: Vec<MulCharacter>,
    pub m: u32,
    pub a: FieldElement,
}

/// Character-sum evaluator bound to one ambient field and one additive
/// character. Trace and Gauss-sum tables are built lazily and shared.
pub struct SumEngine {
    field: AmbientField,
    psi: AddCharacter,
    add_roots: Vec<Complex64>,
    mul_roots: RootTable,
    cost_cap: u128,
    traces: Mutex<HashMap<u32, Arc<Vec<u32>>>>,
    gauss: Mutex<HashMap<u32, Arc<Vec<Complex64>>>>,
}

impl SumEngine {
    pub fn new(field: &AmbientField, psi: AddCharacter) -> Result<Self> {
        AddCharacter::new(field, psi.twist())?;
        let p = field.p();
        Ok(SumEngine {
            field: field.clone(),
            psi,
            add_roots: (0..p).map(|t| root_of_unity(t, p)).collect(),
            mul_roots: RootTable::new(field.unit_order()),
            cost_cap: DEFAULT_COST_CAP,
            traces: Mutex::new(HashMap::new()),
            gauss: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_cost_cap(mut self, cap: u128) -> Self {
        self.cost_cap = cap;
        self
    }

    pub fn field(&self) -> &AmbientField {
        &self.field
    }

    pub fn psi(&self) -> AddCharacter {
        self.psi
    }

    pub fn cost_cap(&self) -> u128 {
        self.cost_cap
    }

    fn check_cost(&self, estimate: u128) -> Result<()> {
        if estimate > self.cost_cap {
            return Err(Error::CostExceeded {
                estimate,
                cap: self.cost_cap,
            });
        }
        Ok(())
    }

    fn check_char(&self, chi: &MulCharacter) -> Result<()> {
        if chi.q() != self.field.q() {
            return Err(Error::InvalidParameter(format!(
                "character over q = {} used in a field over q = {}",
                chi.q(),
                self.field.q()
            )));
        }
        if !self.field.divides_ext(chi.degree()) {
            return Err(Error::DegreeNotDividing {
                inner: chi.degree(),
                outer: self.field.ext_degree(),
            });
        }
        Ok(())
    }

    /// t[j] = Tr_{F_{q^l}/F_p}(b g_l^j).
    pub fn trace_table(&self, l: u32) -> Result<Arc<Vec<u32>>> {
        if let Some(t) = self.traces.lock().unwrap().get(&l) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(self.field.trace_table(l, self.psi.twist())?);
        self.traces.lock().unwrap().insert(l, Arc::clone(&t));
        Ok(t)
    }

    /// Exponent weight turning a degree-d character exponent into a multiple
    /// of 1/(q^N - 1).
    fn mul_weight(&self, chi: &MulCharacter) -> u64 {
        let idx = self.field.unit_order() / chi.modulus();
        mul_mod(chi.exponent(), idx, self.field.unit_order())
    }

    /// τ(γ, ψ_r) by direct summation over F_{q^r}^x.
    pub fn gauss_sum(&self, gamma: &MulCharacter) -> Result<SumValue> {
        self.check_char(gamma)?;
        let r = gamma.degree();
        let t = self.trace_table(r)?;
        let mut acc = KahanSum::new();
        let inv = gamma.inverse();
        for (j, &tr) in t.iter().enumerate() {
            acc.add(inv.value_at_exponent(j as u64) * self.add_roots[tr as usize]);
        }
        Ok(SumValue {
            value: -acc.value(),
            terms: acc.terms(),
        })
    }

    /// All τ(γ_k, ψ_r), k mod q^r - 1, from one discrete Fourier transform.
    pub fn gauss_table(&self, r: u32) -> Result<Arc<Vec<Complex64>>> {
        if let Some(t) = self.gauss.lock().unwrap().get(&r) {
            return Ok(Arc::clone(t));
        }
        let tr = self.trace_table(r)?;
        let mut buf: Vec<Complex64> = tr.iter().map(|&t| self.add_roots[t as usize]).collect();
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(buf.len()).process(&mut buf);
        let table = Arc::new(buf.into_iter().map(|v| -v).collect::<Vec<_>>());
        self.gauss.lock().unwrap().insert(r, Arc::clone(&table));
        Ok(table)
    }

    /// τ(γ, ψ_r) read from the Fourier table.
    pub fn gauss_sum_fast(&self, gamma: &MulCharacter) -> Result<Complex64> {
        self.check_char(gamma)?;
        Ok(self.gauss_table(gamma.degree())?[gamma.exponent() as usize])
    }

    /// τ_{n,m}(α×β, ψ) as a product of Gauss sums.
    pub fn tau_nm(&self, alpha: &MulCharacter, beta: &MulCharacter) -> Result<Complex64> {
        let (n, m) = (alpha.degree(), beta.degree());
        let d = crate::arith::gcd(n as u64, m as u64) as u32;
        let l = crate::arith::lcm(n as u64, m as u64) as u32;
        let a = alpha.inflate(l)?;
        let mut acc = Complex64::new(1.0, 0.0);
        for k in 0..d {
            let gamma = a.mul(&beta.frobenius(k).inflate(l)?)?;
            acc *= self.gauss_sum_fast(&gamma)?;
        }
        Ok(acc)
    }

    /// τ_{λ,m}(α×β, ψ) = ∏_j τ_{n_j,m}(α_j×β, ψ).
    pub fn tau_lambda_m(&self, alpha: &[MulCharacter], beta: &MulCharacter) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for a in alpha {
            acc *= self.tau_nm(a, beta)?;
        }
        Ok(acc)
    }

    /// τ_{λ,m}(α×β, ψ) by summing over all units of F_λ ⊗ F_{q^m}, with sign
    /// (-1)^{nm + n + rm}.
    pub fn tau_lambda_m_direct(
        &self,
        alpha: &[MulCharacter],
        beta: &MulCharacter,
    ) -> Result<SumValue> {
        for a in alpha {
            self.check_char(a)?;
        }
        self.check_char(beta)?;
        let lambda: Vec<u32> = alpha.iter().map(|a| a.degree()).collect();
        let m = beta.degree();
        let alg = LambdaTensorAlgebra::new(&self.field, &lambda, m)?;
        self.check_cost(alg.unit_count(&self.field))?;
        let big = self.field.unit_order();
        let slots = alg.layout(&self.field);
        let tables = slots
            .iter()
            .map(|s| self.trace_table(s.l))
            .collect::<Result<Vec<_>>>()?;
        let aw: Vec<u64> = slots
            .iter()
            .map(|s| self.mul_weight(&alpha[s.factor].inverse()))
            .collect();
        let bw = self.mul_weight(&beta.inverse());
        let mm = beta.modulus();
        let p = self.field.p();
        let mut acc = KahanSum::new();
        alg.walk_units(&self.field, |e| {
            let mut mul = 0u128;
            let mut n2 = 0u64;
            let mut add = 0u64;
            for (s, &ex) in e.iter().enumerate() {
                mul += aw[s] as u128 * ex as u128;
                n2 = (n2 + mul_mod(ex % mm, slots[s].n2_weight, mm)) % mm;
                add += tables[s][ex as usize] as u64;
            }
            let phase = ((mul + bw as u128 * n2 as u128) % big as u128) as u64;
            acc.add(self.mul_roots.get(phase) * self.add_roots[(add % p) as usize]);
        });
        let n: u32 = lambda.iter().sum();
        let r = lambda.len() as u32;
        let sign = if (n * m + n + r * m).is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(SumValue {
            value: acc.value() * sign,
            terms: acc.terms(),
        })
    }

    /// J_m(χ, ψ, a) by enumerating the N2-fiber over a.
    pub fn kloosterman(&self, spec: &KloostermanSpec) -> Result<SumValue> {
        for c in &spec.chi {
            self.check_char(c)?;
        }
        if spec.chi.is_empty() {
            return Err(Error::ShapeMismatch("empty character tuple".into()));
        }
        let lambda: Vec<u32> = spec.chi.iter().map(|c| c.degree()).collect();
        let alg = LambdaTensorAlgebra::new(&self.field, &lambda, spec.m)?;
        self.check_cost(alg.fiber_size(&self.field))?;
        let target = self.field.subfield_exponent(spec.a, spec.m)?;
        let big = self.field.unit_order();
        let slots = alg.layout(&self.field);
        let tables = slots
            .iter()
            .map(|s| self.trace_table(s.l))
            .collect::<Result<Vec<_>>>()?;
        let w: Vec<u64> = slots
            .iter()
            .map(|s| self.mul_weight(&spec.chi[s.factor]))
            .collect();
        let p = self.field.p();
        let mut acc = KahanSum::new();
        alg.walk_fiber(&self.field, target, |e| {
            let mut mul = 0u128;
            let mut add = 0u64;
            for (s, &ex) in e.iter().enumerate() {
                mul += w[s] as u128 * ex as u128;
                add += tables[s][ex as usize] as u64;
            }
            let phase = (mul % big as u128) as u64;
            acc.add(self.mul_roots.get(phase) * self.add_roots[(add % p) as usize]);
        });
        Ok(SumValue {
            value: acc.value(),
            terms: acc.terms(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimePower, DEFAULT_TABLE_CAP};

    fn engine(p: u64, n: u32) -> SumEngine {
        let f = AmbientField::new(PrimePower::new(p, 1).unwrap(), n, DEFAULT_TABLE_CAP).unwrap();
        SumEngine::new(&f, AddCharacter::standard()).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn trivial_gauss_sum_is_one() {
        let e = engine(3, 2);
        for d in [1, 2] {
            let g = MulCharacter::trivial(3, d).unwrap();
            assert!(close(e.gauss_sum(&g).unwrap().value, Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn quadratic_gauss_sum_mod_three() {
        // -(psi(1) - psi(2)) with psi(1) = exp(2 pi i / 3).
        let e = engine(3, 1);
        let g = MulCharacter::new(3, 1, 1).unwrap();
        let expected = -(root_of_unity(1, 3) - root_of_unity(2, 3));
        assert!(close(e.gauss_sum(&g).unwrap().value, expected));
        assert!(close(expected, Complex64::new(0.0, -(3f64).sqrt())));
    }

    #[test]
    fn tau_11_trivial() {
        let e = engine(3, 1);
        let t = MulCharacter::trivial(3, 1).unwrap();
        assert!(close(e.tau_nm(&t, &t).unwrap(), Complex64::new(1.0, 0.0)));
        let direct = e.tau_lambda_m_direct(&[t], &t).unwrap();
        assert!(close(direct.value, Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn kloosterman_small_fibers() {
        let e = engine(3, 1);
        let t = MulCharacter::trivial(3, 1).unwrap();
        let spec = |a| KloostermanSpec {
            chi: vec![t, t],
            m: 1,
            a: FieldElement(a),
        };
        // x1 x2 = 2: (1,2), (2,1); both traces vanish.
        let j = e.kloosterman(&spec(2)).unwrap();
        assert!(close(j.value, Complex64::new(2.0, 0.0)));
        assert_eq!(j.terms, 2);
        // x1 x2 = 1: (1,1), (2,2); traces 2 and 1.
        let j = e.kloosterman(&spec(1)).unwrap();
        assert!(close(j.value, root_of_unity(2, 3) + root_of_unity(1, 3)));
    }

    #[test]
    fn cost_cap_is_enforced() {
        let e = engine(2, 12).with_cost_cap(10);
        let t = MulCharacter::trivial(2, 1).unwrap();
        let spec = KloostermanSpec {
            chi: vec![t, t],
            m: 4,
            a: FieldElement::ONE,
        };
        assert!(matches!(e.kloosterman(&spec), Err(Error::CostExceeded { .. })));
    }
}
