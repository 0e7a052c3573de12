//! ε_0 and γ factors of generic pairs, and the Bessel function of a generic
//! representation at the support points of the Bruhat decomposition.
//!
//! Two independent routes to j_m = J_π(antidiag(I_{n-m}, c I_m)):
//! * the Kloosterman route: power sums p_m = (-1)^{n-1} J_m(α^{-1}, ψ, a) with
//!   a = (-1)^{n-1} c^{-1}, turned into elementary symmetric functions;
//! * the γ route: a weighted sum of ε_0(π × Π_μ(β)^∨) over character tuples.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::characters::{enumerate_char_tuples, AddCharacter, MulCharacter};
use crate::charsum::{KloostermanSpec, SumEngine, SumValue};
use crate::error::{Error, Result};
use crate::field::{AmbientField, FieldElement};
use crate::reps::{CanonicalRepForm, GenericRepParams, SupportPoint};
use crate::symfun::{newton_e_from_p, partitions, poly_roots, KahanSum};

/// q^{k/2}, exact up to one rounding for even k.
pub fn half_power(q: u64, k: i64) -> f64 {
    let whole = (q as f64).powi((k.div_euclid(2)) as i32);
    if k.rem_euclid(2) == 1 {
        whole * (q as f64).sqrt()
    } else {
        whole
    }
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Values j_0 = 1, j_1, ..., j_n.
#[derive(Clone, Debug)]
pub struct BesselValueTable {
    pub params: GenericRepParams,
    pub c: FieldElement,
    pub values: Vec<Complex64>,
    /// Number of unit-modulus terms behind each value.
    pub terms: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct LPolynomialData {
    /// p_1..p_n.
    pub power_sums: Vec<Complex64>,
    /// e_0..e_n of the Frobenius eigenvalues.
    pub elementary: Vec<Complex64>,
    /// The eigenvalues ω_1..ω_n.
    pub roots: Vec<Complex64>,
    /// Coefficients of L*(T), constant term first.
    pub lstar: Vec<Complex64>,
    pub bessel: BesselValueTable,
}

type TauKey = (Vec<MulCharacter>, u32);

pub struct BesselEngine {
    sums: SumEngine,
    tau_cache: Mutex<HashMap<TauKey, Arc<Vec<Complex64>>>>,
    memo: Mutex<HashMap<(CanonicalRepForm, SupportPoint), Complex64>>,
}

impl BesselEngine {
    pub fn new(field: &AmbientField, psi: AddCharacter) -> Result<Self> {
        Ok(Self::from_sums(SumEngine::new(field, psi)?))
    }

    pub fn from_sums(sums: SumEngine) -> Self {
        BesselEngine {
            sums,
            tau_cache: Mutex::new(HashMap::new()),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn sums(&self) -> &SumEngine {
        &self.sums
    }

    pub fn field(&self) -> &AmbientField {
        self.sums.field()
    }

    pub fn psi(&self) -> AddCharacter {
        self.sums.psi()
    }

    fn q(&self) -> u64 {
        self.field().q()
    }

    fn check_params(&self, p: &GenericRepParams) -> Result<()> {
        if p.q() != self.q() {
            return Err(Error::InvalidParameter(format!(
                "representation over q = {} evaluated over q = {}",
                p.q(),
                self.q()
            )));
        }
        Ok(())
    }

    fn check_scalar(&self, c: FieldElement) -> Result<u64> {
        if c.is_zero() || !self.field().in_subfield(c, 1) {
            return Err(Error::InvalidParameter("c must be a nonzero element of F_q".into()));
        }
        self.field().subfield_exponent(c, 1)
    }

    /// Exponent of -1 relative to g_1.
    fn minus_one(&self) -> u64 {
        if self.q() % 2 == 1 {
            (self.q() - 1) / 2
        } else {
            0
        }
    }

    /// ε_0(Π_λ(α) × Π_μ(β)) = (-1)^{nm} q^{-nm/2} ∏_j τ_{λ,m_j}(α×β_j, ψ).
    pub fn epsilon0(&self, pi: &GenericRepParams, sigma: &GenericRepParams) -> Result<Complex64> {
        self.check_params(pi)?;
        self.check_params(sigma)?;
        let (n, m) = (pi.n() as i64, sigma.n() as i64);
        let mut acc = Complex64::new(sign(n * m) * half_power(self.q(), -n * m), 0.0);
        for b in sigma.alpha() {
            acc *= self.sums.tau_lambda_m(pi.alpha(), b)?;
        }
        Ok(acc)
    }

    /// γ(π × σ) = q^{-m(n-m-1)/2} ω_σ(-1)^{n-1} ε_0(π × σ).
    pub fn gamma(&self, pi: &GenericRepParams, sigma: &GenericRepParams) -> Result<Complex64> {
        let (n, m) = (pi.n() as i64, sigma.n() as i64);
        let w = sigma.central_character_at(self.minus_one()).powi((n - 1) as i32);
        Ok(self.epsilon0(pi, sigma)? * w * half_power(self.q(), -m * (n - m - 1)))
    }

    /// T[k] = τ_{λ,d}(α × β_k^{-1}) for every character β_k of degree d.
    fn tau_table(&self, alpha: &[MulCharacter], d: u32) -> Result<Arc<Vec<Complex64>>> {
        let key = (alpha.to_vec(), d);
        if let Some(t) = self.tau_cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(t));
        }
        let modulus = MulCharacter::trivial(self.q(), d)?.modulus();
        let table = (0..modulus)
            .map(|k| {
                let b = MulCharacter::new(self.q(), d, k)?.inverse();
                self.sums.tau_lambda_m(alpha, &b)
            })
            .collect::<Result<Vec<_>>>()?;
        let table = Arc::new(table);
        self.tau_cache
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&table));
        Ok(table)
    }

    fn tuple_count(&self, m: u32) -> u128 {
        partitions(m)
            .iter()
            .map(|mu| mu.phi(self.q()).try_into().unwrap_or(u128::MAX))
            .fold(0u128, |a, b: u128| a.saturating_add(b))
    }

    /// J_m(α^{-1}, ψ, a) with a = (-1)^{n-1} c^{-1}.
    pub fn kloosterman_at(&self, pi: &GenericRepParams, c: FieldElement, m: u32) -> Result<SumValue> {
        self.check_params(pi)?;
        self.check_scalar(c)?;
        let f = self.field();
        let mut a = f.inv(c)?;
        if pi.n().is_multiple_of(2) {
            a = f.neg(a);
        }
        self.sums.kloosterman(&KloostermanSpec {
            chi: pi.alpha().iter().map(|x| x.inverse()).collect(),
            m,
            a,
        })
    }

    /// J_1, ..., J_{m_max} as in [`Self::kloosterman_at`].
    pub fn kloosterman_family(
        &self,
        pi: &GenericRepParams,
        c: FieldElement,
        m_max: u32,
    ) -> Result<Vec<SumValue>> {
        (1..=m_max).map(|m| self.kloosterman_at(pi, c, m)).collect()
    }

    /// Frobenius data of the Kloosterman sheaf and the Bessel values it
    /// determines.
    pub fn lpolynomial(&self, pi: &GenericRepParams, c: FieldElement) -> Result<LPolynomialData> {
        let n = pi.n();
        let r = pi.r() as i64;
        let q = self.q();
        let fam = self.kloosterman_family(pi, c, n)?;
        let s = sign(n as i64 - 1);
        let power_sums: Vec<Complex64> = fam.iter().map(|v| v.value * s).collect();
        let elementary = newton_e_from_p(&power_sums);
        let mut values = Vec::with_capacity(n as usize + 1);
        let mut terms = vec![0u64];
        values.push(Complex64::new(1.0, 0.0));
        for m in 1..=n as i64 {
            let coeff = elementary[m as usize] * sign(m);
            let jm = coeff * sign(r * m) * half_power(q, -m * (2 * n as i64 - m - 1));
            values.push(jm);
            terms.push(fam[..m as usize].iter().map(|v| v.terms).sum());
        }
        if n == 1 {
            // The unipotent correction ψ(c^{-1}) only survives for GL_1.
            let f = self.field();
            values[1] /= self.psi().value(f, f.inv(c)?, 1)?;
        }
        let lstar: Vec<Complex64> = values
            .iter()
            .enumerate()
            .map(|(m, v)| {
                let m = m as i64;
                v * half_power(q, m * (n as i64 - m))
            })
            .collect();
        let monic: Vec<Complex64> = (0..=n as usize)
            .map(|j| elementary[n as usize - j] * sign((n as usize - j) as i64))
            .collect();
        let roots = poly_roots(&monic)?;
        Ok(LPolynomialData {
            power_sums,
            elementary,
            roots,
            lstar,
            bessel: BesselValueTable {
                params: pi.clone(),
                c,
                values,
                terms,
            },
        })
    }

    pub fn bessel_via_l(&self, pi: &GenericRepParams, c: FieldElement) -> Result<BesselValueTable> {
        Ok(self.lpolynomial(pi, c)?.bessel)
    }

    /// q^{-m(n-m-1)/2} Σ_{μ ⊢ m} 1/(Z_μ φ_μ) Σ_β β((-1)^{n-1} c) ε_0(π × Π_μ(β)^∨).
    /// For m <= n this is j_m; for m > n it vanishes.
    pub fn bessel_via_gamma(
        &self,
        pi: &GenericRepParams,
        c: FieldElement,
        m: u32,
    ) -> Result<SumValue> {
        self.check_params(pi)?;
        if m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        let tc = self.check_scalar(c)?;
        let estimate = self.tuple_count(m);
        if estimate > self.sums.cost_cap() {
            return Err(Error::CostExceeded {
                estimate,
                cap: self.sums.cost_cap(),
            });
        }
        let q = self.q();
        let n = pi.n() as i64;
        let qm1 = q - 1;
        let t = (tc + (n as u64 - 1) * self.minus_one()) % qm1.max(1);
        let mut total = KahanSum::new();
        let mut count = 0u64;
        for mu in partitions(m) {
            let weight = 1.0 / (mu.z_f64() * mu.phi_f64(q));
            let tables = mu
                .parts()
                .iter()
                .map(|&d| self.tau_table(pi.alpha(), d))
                .collect::<Result<Vec<_>>>()?;
            let mut acc = KahanSum::new();
            for beta in enumerate_char_tuples(q, mu.parts())? {
                let mut v = Complex64::new(1.0, 0.0);
                for (j, b) in beta.iter().enumerate() {
                    v *= b.value_on_base(t) * tables[j][b.exponent() as usize];
                }
                acc.add(v);
            }
            count += acc.terms();
            total.add(acc.value() * weight);
        }
        let m = m as i64;
        let mut value = total.value()
            * sign(n * m)
            * half_power(q, -n * m)
            * half_power(q, -m * (n - m - 1));
        if n == 1 && m == 1 {
            let f = self.field();
            value /= self.psi().value(f, f.inv(c)?, 1)?;
        }
        Ok(SumValue {
            value,
            terms: count,
        })
    }

    pub fn bessel_table_via_gamma(
        &self,
        pi: &GenericRepParams,
        c: FieldElement,
    ) -> Result<BesselValueTable> {
        let mut values = vec![Complex64::new(1.0, 0.0)];
        let mut terms = vec![0];
        for m in 1..=pi.n() {
            let v = self.bessel_via_gamma(pi, c, m)?;
            values.push(v.value);
            terms.push(v.terms);
        }
        Ok(BesselValueTable {
            params: pi.clone(),
            c,
            values,
            terms,
        })
    }

    /// J_π at an arbitrary support point, by recursion on the number of
    /// blocks through GL_m with m = n - n_1.
    pub fn bessel_full_support(&self, pi: &GenericRepParams, pt: &SupportPoint) -> Result<Complex64> {
        self.check_params(pi)?;
        if pt.n() != pi.n() {
            return Err(Error::InvalidSupportPoint(format!(
                "point of GL_{} for a representation of GL_{}",
                pt.n(),
                pi.n()
            )));
        }
        let f = self.field().clone();
        let c1 = pt.scalars()[0];
        let t1 = self.check_scalar(c1)?;
        let omega = pi.central_character_at(t1);
        if pt.composition().len() == 1 {
            return Ok(omega);
        }
        let key = (pi.canonical(), pt.clone());
        if let Some(v) = self.memo.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let q = self.q();
        let n = pi.n() as i64;
        let m = (pi.n() - pt.composition()[0]) as i64;
        let c1_inv = f.inv(c1)?;
        let rest = SupportPoint::new(
            &f,
            pt.composition()[1..].to_vec(),
            pt.scalars()[1..].iter().map(|&c| f.mul(c, c1_inv)).collect(),
        )?;
        let t_minus = self.minus_one();
        let mut total = KahanSum::new();
        for mu in partitions(m as u32) {
            let weight = 1.0 / (mu.z_f64() * mu.phi_f64(q));
            let tables = mu
                .parts()
                .iter()
                .map(|&d| self.tau_table(pi.alpha(), d))
                .collect::<Result<Vec<_>>>()?;
            let mut acc = KahanSum::new();
            for beta in enumerate_char_tuples(q, mu.parts())? {
                let mut eps = Complex64::new(1.0, 0.0);
                let mut w = Complex64::new(1.0, 0.0);
                for (j, b) in beta.iter().enumerate() {
                    eps *= tables[j][b.exponent() as usize];
                    w *= b.inverse().value_on_base(t_minus);
                }
                let sigma = GenericRepParams::new(q, beta)?;
                let inner = self.bessel_full_support(&sigma, &rest)?;
                acc.add(eps * w.powi((n - 1) as i32) * inner);
            }
            total.add(acc.value() * weight);
        }
        let value = total.value()
            * omega
            * sign(n * m)
            * half_power(q, -n * m)
            * half_power(q, -m * (n - m - 1));
        self.memo.lock().unwrap().insert(key, value);
        Ok(value)
    }
}
