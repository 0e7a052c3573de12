//! Multiplicative characters of F_{q^d}^x, additive characters of F_q and
//! Frobenius orbits.
//!
//! A multiplicative character of degree d is labelled by an exponent k modulo
//! q^d - 1 via chi(g_d^j) = exp(2 pi i k j / (q^d - 1)), where g_d is the
//! subfield generator of the ambient field.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::arith::{checked_pow, gcd, mul_mod, pow_mod};
use crate::error::{Error, Result};
use crate::field::{AmbientField, FieldElement};

/// exp(2 pi i num / den), reducing num/den mod 1 first.
pub fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let g = gcd(num, den);
    let (n, d) = (num / g, den / g);
    match d {
        2 => Complex64::new(-1.0, 0.0),
        4 if n == 1 => Complex64::new(0.0, 1.0),
        4 => Complex64::new(0.0, -1.0),
        _ => {
            let (s, c) = (TAU * n as f64 / d as f64).sin_cos();
            Complex64::new(c, s)
        }
    }
}

/// Precomputed exp(2 pi i k / m) for k mod m. Large moduli use a two-level
/// split k = a*s + b to keep the tables small.
#[derive(Clone, Debug)]
pub struct RootTable {
    m: u64,
    split: u64,
    hi: Vec<Complex64>,
    lo: Vec<Complex64>,
}

const FULL_TABLE_LIMIT: u64 = 1 << 16;

impl RootTable {
    pub fn new(m: u64) -> Self {
        assert!(m > 0);
        if m <= FULL_TABLE_LIMIT {
            let lo = (0..m).map(|k| root_of_unity(k, m)).collect();
            return RootTable {
                m,
                split: m,
                hi: vec![Complex64::new(1.0, 0.0)],
                lo,
            };
        }
        let split = (m as f64).sqrt().ceil() as u64;
        let lo = (0..split).map(|b| root_of_unity(b, m)).collect();
        let hi = (0..m.div_ceil(split))
            .map(|a| root_of_unity(a * split, m))
            .collect();
        RootTable { m, split, hi, lo }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn get(&self, k: u64) -> Complex64 {
        let k = k % self.m;
        if self.split == self.m {
            self.lo[k as usize]
        } else {
            self.hi[(k / self.split) as usize] * self.lo[(k % self.split) as usize]
        }
    }
}

/// A character of F_{q^d}^x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MulCharacter {
    q: u64,
    degree: u32,
    exponent: u64,
}

impl MulCharacter {
    pub fn new(q: u64, degree: u32, exponent: u64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidDegree("character degree must be positive".into()));
        }
        let m = checked_pow(q, degree)
            .filter(|&v| v < (1u64 << 40))
            .ok_or_else(|| Error::InvalidDegree(format!("q^{degree} too large")))?
            - 1;
        Ok(MulCharacter {
            q,
            degree,
            exponent: exponent % m,
        })
    }

    pub fn trivial(q: u64, degree: u32) -> Result<Self> {
        Self::new(q, degree, 0)
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn exponent(&self) -> u64 {
        self.exponent
    }
    /// q^d - 1.
    pub fn modulus(&self) -> u64 {
        self.q.pow(self.degree) - 1
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == 0
    }

    pub fn inverse(&self) -> Self {
        let m = self.modulus();
        MulCharacter {
            exponent: (m - self.exponent) % m,
            ..*self
        }
    }

    /// chi^{q^i}.
    pub fn frobenius(&self, i: u32) -> Self {
        let m = self.modulus();
        MulCharacter {
            exponent: mul_mod(self.exponent, pow_mod(self.q, i as u64, m), m),
            ..*self
        }
    }

    pub fn pow(&self, k: u64) -> Self {
        let m = self.modulus();
        MulCharacter {
            exponent: mul_mod(self.exponent, k % m, m),
            ..*self
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.q != other.q || self.degree != other.degree {
            return Err(Error::ShapeMismatch("characters of different groups".into()));
        }
        let m = self.modulus();
        Ok(MulCharacter {
            exponent: (self.exponent + other.exponent) % m,
            ..*self
        })
    }

    /// chi(g_d^j).
    pub fn value_at_exponent(&self, j: u64) -> Complex64 {
        let m = self.modulus();
        root_of_unity(mul_mod(self.exponent, j % m, m), m)
    }

    /// chi(g_1^t): the restriction to F_q^x, where g_1 = g_d^{(q^d-1)/(q-1)}.
    pub fn value_on_base(&self, t: u64) -> Complex64 {
        let m = self.q - 1;
        root_of_unity(mul_mod(self.exponent % m, t % m, m), m)
    }

    /// chi o N_{d'/d} as a character of F_{q^{d'}}^x.
    pub fn inflate(&self, target: u32) -> Result<Self> {
        if !target.is_multiple_of(self.degree) {
            return Err(Error::DegreeNotDividing {
                inner: self.degree,
                outer: target,
            });
        }
        let big = MulCharacter::new(self.q, target, 0)?;
        let factor = big.modulus() / self.modulus();
        Ok(MulCharacter {
            exponent: self.exponent * factor % big.modulus(),
            ..big
        })
    }

    /// Exponents of the Frobenius orbit {k q^i}, ascending.
    pub fn orbit(&self) -> Vec<u64> {
        frobenius_orbit(self.q, self.degree, self.exponent)
    }

    /// Size of the Frobenius orbit; equals the degree of the smallest field
    /// through whose norm the character factors.
    pub fn orbit_degree(&self) -> u32 {
        let m = self.modulus();
        let mut k = self.exponent;
        for i in 1..=self.degree {
            k = mul_mod(k, self.q, m);
            if k == self.exponent {
                return i;
            }
        }
        self.degree
    }

    pub fn is_regular(&self) -> bool {
        self.orbit_degree() == self.degree
    }

    /// The character of F_{q^d'}^x (d' the orbit degree) whose inflation is
    /// this one.
    pub fn deflate(&self) -> Self {
        let d = self.orbit_degree();
        let small = MulCharacter::new(self.q, d, 0).expect("smaller degree");
        let factor = self.modulus() / small.modulus();
        debug_assert_eq!(self.exponent % factor, 0);
        MulCharacter {
            exponent: self.exponent / factor,
            ..small
        }
    }

    /// Canonical label of the Frobenius orbit of the deflated character:
    /// (orbit degree, smallest exponent).
    pub fn orbit_label(&self) -> (u32, u64) {
        let c = self.deflate();
        (c.degree, c.orbit()[0])
    }

    /// chi(x) for a nonzero x of F_{q^d} inside the ambient field.
    pub fn value(&self, field: &AmbientField, x: FieldElement) -> Result<Complex64> {
        if field.q() != self.q {
            return Err(Error::InvalidParameter("character and field have different q".into()));
        }
        let j = field.subfield_exponent(x, self.degree)?;
        Ok(self.value_at_exponent(j))
    }
}

pub fn frobenius_orbit(q: u64, d: u32, k: u64) -> Vec<u64> {
    let m = q.pow(d) - 1;
    let mut out = Vec::with_capacity(d as usize);
    let mut cur = k % m;
    for _ in 0..d {
        out.push(cur);
        cur = mul_mod(cur, q, m);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// psi_b(x) = exp(2 pi i Tr_{F_q/F_p}(b x) / p) on F_q, and psi_b o Tr on
/// extensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AddCharacter {
    twist: FieldElement,
}

impl AddCharacter {
    pub fn new(field: &AmbientField, twist: FieldElement) -> Result<Self> {
        if twist.is_zero() || !field.in_subfield(twist, 1) {
            return Err(Error::TrivialAdditiveCharacter);
        }
        Ok(AddCharacter { twist })
    }

    pub fn standard() -> Self {
        AddCharacter {
            twist: FieldElement::ONE,
        }
    }

    pub fn twist(&self) -> FieldElement {
        self.twist
    }

    /// psi^{-1} = psi_{-b}.
    pub fn inverse(&self, field: &AmbientField) -> Self {
        AddCharacter {
            twist: field.neg(self.twist),
        }
    }

    /// psi(Tr_{F_{q^r}/F_q}(x)) for x in F_{q^r}.
    pub fn value(&self, field: &AmbientField, x: FieldElement, r: u32) -> Result<Complex64> {
        if !field.in_subfield(x, r) {
            return Err(Error::NotInSubfield(r));
        }
        let t = field.trace_to_prime(field.mul(self.twist, x), r)?;
        Ok(root_of_unity(t, field.p()))
    }
}

/// All tuples (beta_1, ..., beta_t) with beta_j a character of degree
/// parts[j], in odometer order (last coordinate fastest).
pub fn enumerate_char_tuples(q: u64, parts: &[u32]) -> Result<CharTupleIter> {
    let moduli = parts
        .iter()
        .map(|&d| MulCharacter::new(q, d, 0).map(|c| c.modulus()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharTupleIter {
        q,
        parts: parts.to_vec(),
        moduli,
        state: Some(vec![0; parts.len()]),
    })
}

pub struct CharTupleIter {
    q: u64,
    parts: Vec<u32>,
    moduli: Vec<u64>,
    state: Option<Vec<u64>>,
}

impl Iterator for CharTupleIter {
    type Item = Vec<MulCharacter>;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.state.as_mut()?;
        let out = cur
            .iter()
            .zip(&self.parts)
            .map(|(&k, &d)| MulCharacter {
                q: self.q,
                degree: d,
                exponent: k,
            })
            .collect();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.moduli[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}
