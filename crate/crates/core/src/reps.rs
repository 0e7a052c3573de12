//! Parameters of irreducible generic representations of GL_n(F_q).
//!
//! Π_λ(α) is the generic constituent of the parabolic induction of the
//! characters α_j of F_{q^{n_j}}^x. Its isomorphism class only depends on the
//! multiset of Frobenius orbits of the α_j, each orbit counted with
//! multiplicity n_j / (orbit degree).

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::arith::{checked_pow, gcd, lcm};
use crate::characters::{frobenius_orbit, MulCharacter};
use crate::error::{Error, Result};
use crate::field::{AmbientField, FieldElement};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenericRepParams {
    q: u64,
    alpha: Vec<MulCharacter>,
}

impl GenericRepParams {
    /// Parts are reordered so that degrees are non-increasing (stable).
    pub fn new(q: u64, mut alpha: Vec<MulCharacter>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::ShapeMismatch("no characters given".into()));
        }
        if let Some(c) = alpha.iter().find(|c| c.q() != q) {
            return Err(Error::InvalidParameter(format!(
                "character over q = {} in a representation over q = {q}",
                c.q()
            )));
        }
        alpha.sort_by(|a, b| b.degree().cmp(&a.degree()));
        Ok(GenericRepParams { q, alpha })
    }

    /// From λ and one exponent per part.
    pub fn from_exponents(q: u64, lambda: &[u32], exponents: &[u64]) -> Result<Self> {
        if lambda.len() != exponents.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parts but {} exponents",
                lambda.len(),
                exponents.len()
            )));
        }
        let alpha = lambda
            .iter()
            .zip(exponents)
            .map(|(&n, &k)| MulCharacter::new(q, n, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(q, alpha)
    }

    /// A representative with λ built from the orbit degrees.
    pub fn from_canonical(q: u64, form: &CanonicalRepForm) -> Result<Self> {
        let mut alpha = Vec::new();
        for e in &form.entries {
            let c = MulCharacter::new(q, e.degree, e.rep)?;
            for _ in 0..e.mult {
                alpha.push(c);
            }
        }
        Self::new(q, alpha)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn alpha(&self) -> &[MulCharacter] {
        &self.alpha
    }

    pub fn lambda(&self) -> Vec<u32> {
        self.alpha.iter().map(|c| c.degree()).collect()
    }

    pub fn n(&self) -> u32 {
        self.alpha.iter().map(|c| c.degree()).sum()
    }

    /// Number of parts of λ.
    pub fn r(&self) -> u32 {
        self.alpha.len() as u32
    }

    pub fn canonical(&self) -> CanonicalRepForm {
        canonicalize(self)
    }

    pub fn is_cuspidal(&self) -> bool {
        self.alpha.len() == 1 && self.alpha[0].is_regular()
    }

    /// Π_λ(α^{-1}).
    pub fn contragredient(&self) -> Self {
        GenericRepParams {
            q: self.q,
            alpha: self.alpha.iter().map(|c| c.inverse()).collect(),
        }
    }

    /// ω(g_1^t) = ∏_j α_j(g_1^t).
    pub fn central_character_at(&self, t: u64) -> num_complex::Complex64 {
        self.alpha
            .iter()
            .map(|c| c.value_on_base(t))
            .product()
    }

    pub fn central_character(
        &self,
        field: &AmbientField,
        z: FieldElement,
    ) -> Result<num_complex::Complex64> {
        Ok(self.central_character_at(field.subfield_exponent(z, 1)?))
    }

    pub fn dimension(&self) -> BigUint {
        self.canonical().dimension(self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitEntry {
    pub degree: u32,
    pub rep: u64,
    pub mult: u32,
}

/// Sorted list of (orbit degree, smallest exponent, multiplicity).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalRepForm {
    pub entries: Vec<OrbitEntry>,
}

impl CanonicalRepForm {
    pub fn n(&self) -> u32 {
        self.entries.iter().map(|e| e.degree * e.mult).sum()
    }

    /// [GL_n : U_n] ∏_i q^{d_i s_i (s_i - 1)/2} / ∏_{j ≤ s_i} (q^{d_i j} - 1).
    pub fn dimension(&self, q: u64) -> BigUint {
        let qb = BigUint::from(q);
        let mut num = gl_unipotent_index(self.n(), q);
        let mut den = BigUint::one();
        for e in &self.entries {
            let (d, s) = (e.degree, e.mult);
            num *= qb.pow(d * s * (s - 1) / 2);
            for j in 1..=s {
                den *= qb.pow(d * j) - BigUint::one();
            }
        }
        let r = BigRational::new(num.into(), den.into());
        assert!(r.is_integer(), "dimension formula must give an integer");
        r.to_integer().to_biguint().expect("positive")
    }
}

pub fn canonicalize(p: &GenericRepParams) -> CanonicalRepForm {
    let mut entries: Vec<OrbitEntry> = Vec::new();
    for c in &p.alpha {
        let (d, rep) = c.orbit_label();
        let s = c.degree() / d;
        match entries.iter_mut().find(|e| e.degree == d && e.rep == rep) {
            Some(e) => e.mult += s,
            None => entries.push(OrbitEntry {
                degree: d,
                rep,
                mult: s,
            }),
        }
    }
    entries.sort();
    CanonicalRepForm { entries }
}

pub fn is_isomorphic(a: &GenericRepParams, b: &GenericRepParams) -> bool {
    a.q == b.q && canonicalize(a) == canonicalize(b)
}

/// Smallest exponents of the Frobenius orbits of size exactly d.
pub fn regular_orbits(q: u64, d: u32) -> Vec<u64> {
    let m = q.pow(d) - 1;
    (0..m)
        .filter(|&k| {
            let orb = frobenius_orbit(q, d, k);
            orb.len() == d as usize && orb[0] == k
        })
        .collect()
}

/// Every isomorphism class of irreducible generic representations of
/// GL_n(F_q), as canonical forms in a fixed order.
pub fn enumerate_generic(n: u32, q: u64) -> Vec<CanonicalRepForm> {
    let mut orbits: Vec<(u32, u64)> = Vec::new();
    for d in 1..=n {
        for rep in regular_orbits(q, d) {
            orbits.push((d, rep));
        }
    }
    fn rec(
        orbits: &[(u32, u64)],
        start: usize,
        rest: u32,
        cur: &mut Vec<OrbitEntry>,
        out: &mut Vec<CanonicalRepForm>,
    ) {
        if rest == 0 {
            let mut entries = cur.clone();
            entries.sort();
            out.push(CanonicalRepForm { entries });
            return;
        }
        for i in start..orbits.len() {
            let (d, rep) = orbits[i];
            if d > rest {
                continue;
            }
            for s in 1..=rest / d {
                cur.push(OrbitEntry { degree: d, rep, mult: s });
                rec(orbits, i + 1, rest - d * s, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&orbits, 0, n, &mut Vec::new(), &mut out);
    out
}

/// [GL_n(F_q) : U_n] = ∏_{j=1}^n (q^j - 1).
pub fn gl_unipotent_index(n: u32, q: u64) -> BigUint {
    (1..=n)
        .map(|j| BigUint::from(q).pow(j) - BigUint::one())
        .product()
}

pub fn gl_order(n: u32, q: u64) -> BigUint {
    gl_unipotent_index(n, q) * BigUint::from(q).pow(n * (n.saturating_sub(1)) / 2)
}

/// The parameters of the Shintani lift to GL_n(F_{q^k}).
pub fn shintani_base_change(p: &GenericRepParams, k: u32) -> Result<GenericRepParams> {
    if k == 0 {
        return Err(Error::InvalidDegree("base change degree must be positive".into()));
    }
    let qk = checked_pow(p.q, k).ok_or_else(|| Error::InvalidDegree("q^k too large".into()))?;
    let mut alpha = Vec::new();
    for c in &p.alpha {
        let nj = c.degree();
        let g = gcd(nj as u64, k as u64) as u32;
        let l = lcm(nj as u64, k as u64) as u32;
        for i in 0..g {
            let lifted = c.frobenius(i).inflate(l)?;
            alpha.push(MulCharacter::new(qk, nj / g, lifted.exponent())?);
        }
    }
    GenericRepParams::new(qk, alpha)
}

/// A point g_{n_1..n_s}(c_1..c_s): block anti-diagonal with c_i I_{n_i},
/// c_1 I_{n_1} in the top-right corner.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportPoint {
    composition: Vec<u32>,
    scalars: Vec<FieldElement>,
}

impl SupportPoint {
    pub fn new(
        field: &AmbientField,
        composition: Vec<u32>,
        scalars: Vec<FieldElement>,
    ) -> Result<Self> {
        if composition.is_empty() || composition.len() != scalars.len() {
            return Err(Error::InvalidSupportPoint(
                "composition and scalars must have the same positive length".into(),
            ));
        }
        if composition.contains(&0) {
            return Err(Error::InvalidSupportPoint("zero block size".into()));
        }
        if scalars
            .iter()
            .any(|&c| c.is_zero() || !field.in_subfield(c, 1))
        {
            return Err(Error::InvalidSupportPoint(
                "scalars must be nonzero elements of F_q".into(),
            ));
        }
        Ok(SupportPoint {
            composition,
            scalars,
        })
    }

    pub fn identity(n: u32) -> Self {
        SupportPoint {
            composition: vec![n],
            scalars: vec![FieldElement::ONE],
        }
    }

    /// antidiag(I_{n-m}, c I_m) = [[0, I_{n-m}], [c I_m, 0]] for 0 <= m <= n.
    pub fn antidiag(field: &AmbientField, n: u32, m: u32, c: FieldElement) -> Result<Self> {
        if m > n || n == 0 {
            return Err(Error::InvalidSupportPoint(format!("m = {m} out of range for n = {n}")));
        }
        match m {
            0 => Ok(Self::identity(n)),
            _ if m == n => Self::new(field, vec![n], vec![c]),
            _ => Self::new(field, vec![n - m, m], vec![FieldElement::ONE, c]),
        }
    }

    pub fn composition(&self) -> &[u32] {
        &self.composition
    }

    pub fn scalars(&self) -> &[FieldElement] {
        &self.scalars
    }

    pub fn n(&self) -> u32 {
        self.composition.iter().sum()
    }

    /// Sequence (a_1..a_n), a_1 != 0: block starts carry the scalars.
    pub fn to_sequence(&self) -> Vec<FieldElement> {
        let mut out = Vec::with_capacity(self.n() as usize);
        for (&b, &c) in self.composition.iter().zip(&self.scalars) {
            out.push(c);
            out.extend(std::iter::repeat_n(FieldElement::ZERO, b as usize - 1));
        }
        out
    }

    pub fn from_sequence(field: &AmbientField, seq: &[FieldElement]) -> Result<Self> {
        if seq.first().map(|c| c.is_zero()).unwrap_or(true) {
            return Err(Error::InvalidSupportPoint("leading entry must be nonzero".into()));
        }
        let mut composition = Vec::new();
        let mut scalars = Vec::new();
        for &a in seq {
            if a.is_zero() {
                *composition.last_mut().unwrap() += 1;
            } else {
                composition.push(1);
                scalars.push(a);
            }
        }
        Self::new(field, composition, scalars)
    }

    /// All q^n - q^{n-1} support points of GL_n(F_q).
    pub fn enumerate(field: &AmbientField, n: u32) -> Vec<Self> {
        let base: Vec<FieldElement> = (0..field.q() - 1)
            .map(|t| field.pow(field.subfield_generator(1).expect("degree 1"), t))
            .collect();
        let mut choices = vec![FieldElement::ZERO];
        choices.extend(base.iter().copied());
        let mut out = Vec::new();
        let mut seq = vec![FieldElement::ZERO; n as usize];
        fn rec(
            field: &AmbientField,
            i: usize,
            seq: &mut Vec<FieldElement>,
            base: &[FieldElement],
            choices: &[FieldElement],
            out: &mut Vec<SupportPoint>,
        ) {
            if i == seq.len() {
                out.push(SupportPoint::from_sequence(field, seq).expect("valid"));
                return;
            }
            let opts = if i == 0 { base } else { choices };
            for &c in opts {
                seq[i] = c;
                rec(field, i + 1, seq, base, choices, out);
            }
        }
        rec(field, 0, &mut seq, &base, &choices, &mut out);
        out
    }
}

/// Elements of the base field with their exponents, t -> g_1^t.
pub fn base_units(field: &AmbientField) -> Vec<FieldElement> {
    let g1 = field.subfield_generator(1).expect("degree 1 divides N");
    (0..field.q() - 1).map(|t| field.pow(g1, t)).collect()
}

pub fn biguint_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
