//! Finite field tower F_q ⊂ F_{q^d} ⊂ F_{q^N} realised inside one ambient
//! field F_{q^N} = F_p[x]/(f), with dense discrete-log tables.
//!
//! Elements are encoded by the base-p little-endian integer of their
//! coefficient vector. The subfield F_{q^d} (d | N) is generated by
//! g_d = g^{(q^N-1)/(q^d-1)}, so these generators are norm-compatible:
//! N_{l/d}(g_l) = g_d.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::arith::{checked_pow, is_prime, mul_mod, pow_mod, prime_factors};
use crate::error::{Error, Result};

pub const DEFAULT_TABLE_CAP: u64 = (1 << 24) - 1;
const CACHE_MAGIC: &[u8; 4] = b"BKL1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: u64,
    pub e: u32,
    pub q: u64,
}

impl PrimePower {
    pub fn new(p: u64, e: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        if e == 0 {
            return Err(Error::InvalidDegree("base exponent must be at least 1".into()));
        }
        let q = checked_pow(p, e)
            .filter(|&q| q < u32::MAX as u64)
            .ok_or_else(|| Error::InvalidDegree(format!("{p}^{e} is too large")))?;
        Ok(PrimePower { p, e, q })
    }
}

/// An element of the ambient field, stored as its integer encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Tables {
    degree: u32,
    order: u64,
    modulus: Vec<u64>,
    generator: FieldElement,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// F_{q^N} with q = p^e. Cloning is cheap; the tables are shared.
#[derive(Clone)]
pub struct AmbientField {
    tables: Arc<Tables>,
    base: PrimePower,
    ext: u32,
}

impl std::fmt::Debug for AmbientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AmbientField")
            .field("p", &self.base.p)
            .field("e", &self.base.e)
            .field("N", &self.ext)
            .field("modulus", &self.tables.modulus)
            .field("generator", &self.tables.generator)
            .finish()
    }
}

/// Serializable identification of an ambient field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    pub p: u64,
    pub e: u32,
    pub n: u32,
    pub modulus: Vec<u64>,
    pub generator: Vec<u64>,
}

impl AmbientField {
    pub fn new(base: PrimePower, n: u32, cap: u64) -> Result<Self> {
        Self::build(base, n, cap, None)
    }

    /// Like [`AmbientField::new`], loading or storing the dlog table under
    /// `dir` when given.
    pub fn with_cache(base: PrimePower, n: u32, cap: u64, dir: Option<&Path>) -> Result<Self> {
        Self::build(base, n, cap, dir)
    }

    fn build(base: PrimePower, n: u32, cap: u64, dir: Option<&Path>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDegree("extension degree must be at least 1".into()));
        }
        let degree = base
            .e
            .checked_mul(n)
            .ok_or_else(|| Error::InvalidDegree("degree overflow".into()))?;
        let order = checked_pow(base.p, degree).map(|o| o as u128).unwrap_or(u128::MAX);
        if order - 1 > cap as u128 || order > u32::MAX as u128 {
            return Err(Error::TableCapExceeded { size: order - 1, cap });
        }
        let order = order as u64;
        let p = base.p;
        let modulus = smallest_irreducible(p, degree);
        let generator = smallest_generator(p, &modulus, order);

        let cache_path = dir.map(|d| cache_file(d, base, n));
        let loaded = match &cache_path {
            Some(path) if path.exists() => {
                Some(load_cache(path, base, n, &modulus, generator, order)?)
            }
            _ => None,
        };
        let (exp, log) = match loaded {
            Some(t) => t,
            None => {
                let t = power_tables(p, &modulus, generator, order);
                if let Some(path) = &cache_path {
                    save_cache(path, base, n, &modulus, generator, &t.1)?;
                }
                t
            }
        };
        Ok(AmbientField {
            tables: Arc::new(Tables {
                degree,
                order,
                modulus,
                generator: FieldElement(generator),
                exp,
                log,
            }),
            base,
            ext: n,
        })
    }

    /// The same field viewed as an extension of F_{q^k}. Requires k | N.
    pub fn rebase(&self, k: u32) -> Result<Self> {
        if k == 0 || !self.ext.is_multiple_of(k) {
            return Err(Error::DegreeNotDividing {
                inner: k,
                outer: self.ext,
            });
        }
        Ok(AmbientField {
            tables: Arc::clone(&self.tables),
            base: PrimePower::new(self.base.p, self.base.e * k)?,
            ext: self.ext / k,
        })
    }

    pub fn p(&self) -> u64 {
        self.base.p
    }
    pub fn q(&self) -> u64 {
        self.base.q
    }
    pub fn base(&self) -> PrimePower {
        self.base
    }
    /// Degree N over the base field F_q.
    pub fn ext_degree(&self) -> u32 {
        self.ext
    }
    /// Degree over the prime field.
    pub fn prime_degree(&self) -> u32 {
        self.tables.degree
    }
    /// q^N.
    pub fn order(&self) -> u64 {
        self.tables.order
    }
    /// q^N - 1.
    pub fn unit_order(&self) -> u64 {
        self.tables.order - 1
    }
    pub fn generator(&self) -> FieldElement {
        self.tables.generator
    }
    pub fn modulus(&self) -> &[u64] {
        &self.tables.modulus
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.base.p,
            e: self.base.e,
            n: self.ext,
            modulus: self.tables.modulus.clone(),
            generator: self.coeffs(self.generator()),
        }
    }

    /// q^d, panicking on overflow; d never exceeds N here.
    pub fn q_pow(&self, d: u32) -> u64 {
        checked_pow(self.base.q, d).expect("q^d overflow")
    }

    pub fn divides_ext(&self, d: u32) -> bool {
        d > 0 && self.ext.is_multiple_of(d)
    }

    fn check_degree(&self, d: u32) -> Result<()> {
        if self.divides_ext(d) {
            Ok(())
        } else {
            Err(Error::DegreeNotDividing {
                inner: d,
                outer: self.ext,
            })
        }
    }

    /// (q^N - 1)/(q^d - 1), the exponent taking g to g_d.
    pub fn subfield_index(&self, d: u32) -> Result<u64> {
        self.check_degree(d)?;
        Ok(self.unit_order() / (self.q_pow(d) - 1))
    }

    pub fn subfield_generator(&self, d: u32) -> Result<FieldElement> {
        Ok(self.exp(self.subfield_index(d)?))
    }

    pub fn from_int(&self, c: u64) -> Result<FieldElement> {
        if c >= self.base.p {
            return Err(Error::InvalidParameter(format!(
                "{c} is not a residue mod {}",
                self.base.p
            )));
        }
        Ok(FieldElement(c as u32))
    }

    pub fn from_code(&self, code: u64) -> Result<FieldElement> {
        if code >= self.tables.order {
            return Err(Error::InvalidParameter(format!(
                "code {code} out of range for a field of size {}",
                self.tables.order
            )));
        }
        Ok(FieldElement(code as u32))
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.tables.degree as usize || coeffs.iter().any(|&c| c >= self.base.p) {
            return Err(Error::InvalidParameter("bad coefficient vector".into()));
        }
        let mut code = 0u64;
        for &c in coeffs.iter().rev() {
            code = code * self.base.p + c;
        }
        Ok(FieldElement(code as u32))
    }

    pub fn coeffs(&self, x: FieldElement) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.tables.degree as usize);
        let mut c = x.0 as u64;
        for _ in 0..self.tables.degree {
            v.push(c % self.base.p);
            c /= self.base.p;
        }
        v
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.base.p as u32;
        if p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        let mut place = 1u32;
        while x != 0 || y != 0 {
            let d = (x % p + y % p) % p;
            out += d * place;
            x /= p;
            y /= p;
            place = place.wrapping_mul(p);
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let p = self.base.p as u32;
        if p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0u32;
        let mut place = 1u32;
        while x != 0 {
            let d = x % p;
            out += ((p - d) % p) * place;
            x /= p;
            place = place.wrapping_mul(p);
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let m = self.unit_order();
        let s = (self.tables.log[a.0 as usize] as u64 + self.tables.log[b.0 as usize] as u64) % m;
        FieldElement(self.tables.exp[s as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        let l = self.dlog(a)?;
        Ok(self.exp((self.unit_order() - l) % self.unit_order()))
    }

    pub fn pow(&self, a: FieldElement, k: u64) -> FieldElement {
        if k == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        let m = self.unit_order();
        let l = self.tables.log[a.0 as usize] as u64;
        self.exp(mul_mod(l, k % m, m))
    }

    /// x^{q^i}.
    pub fn frobenius(&self, a: FieldElement, i: u32) -> FieldElement {
        let k = pow_mod(self.base.q, i as u64, self.unit_order().max(1));
        if self.unit_order() == 1 {
            return a;
        }
        self.pow(a, k)
    }

    /// g^k.
    pub fn exp(&self, k: u64) -> FieldElement {
        FieldElement(self.tables.exp[(k % self.unit_order()) as usize])
    }

    pub fn dlog(&self, a: FieldElement) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(self.tables.log[a.0 as usize] as u64)
    }

    pub fn in_subfield(&self, x: FieldElement, d: u32) -> bool {
        self.divides_ext(d) && self.frobenius(x, d) == x
    }

    /// The exponent j with x = g_d^j, for nonzero x in F_{q^d}.
    pub fn subfield_exponent(&self, x: FieldElement, d: u32) -> Result<u64> {
        let idx = self.subfield_index(d)?;
        let l = self.dlog(x)?;
        if l % idx != 0 {
            return Err(Error::NotInSubfield(d));
        }
        Ok(l / idx)
    }

    /// Relative norm N_{l/m}(x) = prod_{i < l/m} x^{q^{m i}} for x in F_{q^l}.
    pub fn norm(&self, x: FieldElement, l: u32, m: u32) -> Result<FieldElement> {
        self.check_relative(x, l, m)?;
        let mut acc = FieldElement::ONE;
        for i in 0..l / m {
            acc = self.mul(acc, self.frobenius(x, m * i));
        }
        Ok(acc)
    }

    /// Relative trace Tr_{l/m}(x) = sum_{i < l/m} x^{q^{m i}} for x in F_{q^l}.
    pub fn trace(&self, x: FieldElement, l: u32, m: u32) -> Result<FieldElement> {
        self.check_relative(x, l, m)?;
        let mut acc = FieldElement::ZERO;
        for i in 0..l / m {
            acc = self.add(acc, self.frobenius(x, m * i));
        }
        Ok(acc)
    }

    fn check_relative(&self, x: FieldElement, l: u32, m: u32) -> Result<()> {
        self.check_degree(l)?;
        if m == 0 || !l.is_multiple_of(m) {
            return Err(Error::DegreeNotDividing { inner: m, outer: l });
        }
        if !self.in_subfield(x, l) {
            return Err(Error::NotInSubfield(l));
        }
        Ok(())
    }

    /// Tr_{F_{q^l}/F_p}(x) as a residue mod p; x must lie in F_{q^l}.
    pub fn trace_to_prime(&self, x: FieldElement, l: u32) -> Result<u64> {
        self.check_relative(x, l, l)?;
        Ok(self.abs_trace_unchecked(x, self.base.e * l))
    }

    fn abs_trace_unchecked(&self, x: FieldElement, prime_deg: u32) -> u64 {
        if x.is_zero() {
            return 0;
        }
        let m = self.unit_order();
        let mut k = self.tables.log[x.0 as usize] as u64;
        let mut acc = FieldElement::ZERO;
        for _ in 0..prime_deg {
            acc = self.add(acc, self.exp(k));
            k = mul_mod(k, self.base.p, m);
        }
        debug_assert!((acc.0 as u64) < self.base.p);
        acc.0 as u64
    }

    /// t[j] = Tr_{F_{q^l}/F_p}(b * g_l^j) for j in 0..q^l - 1.
    pub fn trace_table(&self, l: u32, b: FieldElement) -> Result<Vec<u32>> {
        let idx = self.subfield_index(l)?;
        let lb = self.dlog(b)?;
        let m = self.unit_order();
        let size = self.q_pow(l) - 1;
        let pd = self.base.e * l;
        Ok((0..size)
            .map(|j| {
                let x = self.exp((lb + mul_mod(j, idx, m)) % m);
                self.abs_trace_unchecked(x, pd) as u32
            })
            .collect())
    }

    #[cfg(test)]
    fn log_table(&self) -> &[u32] {
        &self.tables.log
    }
}

fn cache_file(dir: &Path, base: PrimePower, n: u32) -> PathBuf {
    dir.join(format!("dlog_p{}_e{}_n{}.bkl", base.p, base.e, n))
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Cache(e.to_string())
}

fn code_digits(code: u64, p: u64, degree: u32) -> Vec<u64> {
    let mut c = code;
    (0..degree)
        .map(|_| {
            let d = c % p;
            c /= p;
            d
        })
        .collect()
}

fn save_cache(
    path: &Path,
    base: PrimePower,
    n: u32,
    modulus: &[u64],
    generator: u32,
    log: &[u32],
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp).map_err(io_err)?);
        w.write_all(CACHE_MAGIC).map_err(io_err)?;
        for v in [base.p, base.e as u64, n as u64] {
            write_u64(&mut w, v).map_err(io_err)?;
        }
        for &c in modulus {
            write_u64(&mut w, c).map_err(io_err)?;
        }
        for c in code_digits(generator as u64, base.p, base.e * n) {
            write_u64(&mut w, c).map_err(io_err)?;
        }
        for &l in &log[1..] {
            write_u64(&mut w, l as u64).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)
}

fn load_cache(
    path: &Path,
    base: PrimePower,
    n: u32,
    modulus: &[u64],
    generator: u32,
    order: u64,
) -> Result<(Vec<u32>, Vec<u32>)> {
    let bad = |what: &str| Error::Cache(format!("{}: {what}", path.display()));
    let mut r = BufReader::new(File::open(path).map_err(io_err)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    let header = [
        read_u64(&mut r).map_err(io_err)?,
        read_u64(&mut r).map_err(io_err)?,
        read_u64(&mut r).map_err(io_err)?,
    ];
    if header != [base.p, base.e as u64, n as u64] {
        return Err(bad("field parameters differ"));
    }
    for &c in modulus {
        if read_u64(&mut r).map_err(io_err)? != c {
            return Err(bad("modulus differs"));
        }
    }
    for c in code_digits(generator as u64, base.p, base.e * n) {
        if read_u64(&mut r).map_err(io_err)? != c {
            return Err(bad("generator differs"));
        }
    }
    let m = order - 1;
    let mut log = vec![u32::MAX; order as usize];
    let mut exp = vec![u32::MAX; m as usize];
    for code in 1..order {
        let l = read_u64(&mut r).map_err(io_err)?;
        if l >= m || exp[l as usize] != u32::MAX {
            return Err(bad("table is not a permutation"));
        }
        log[code as usize] = l as u32;
        exp[l as usize] = code as u32;
    }
    // Spot-check consecutive powers against polynomial multiplication.
    let g = code_digits(generator as u64, base.p, base.e * n);
    let step = (m / 64).max(1);
    let mut k = 0;
    while k + 1 < m {
        let a = code_digits(exp[k as usize] as u64, base.p, base.e * n);
        let prod = poly::mul_mod(&a, &g, modulus, base.p);
        if poly::encode(&prod, base.p) != exp[(k + 1) as usize] as u64 {
            return Err(bad("table disagrees with field arithmetic"));
        }
        k += step;
    }
    Ok((exp, log))
}

fn power_tables(p: u64, modulus: &[u64], generator: u32, order: u64) -> (Vec<u32>, Vec<u32>) {
    let degree = modulus.len() as u32 - 1;
    let m = order - 1;
    let g = code_digits(generator as u64, p, degree);
    let mut exp = vec![0u32; m as usize];
    let mut log = vec![u32::MAX; order as usize];
    let mut cur = vec![0u64; degree as usize];
    cur[0] = 1;
    for k in 0..m {
        let code = poly::encode(&cur, p) as u32;
        exp[k as usize] = code;
        log[code as usize] = k as u32;
        cur = poly::mul_mod(&cur, &g, modulus, p);
    }
    (exp, log)
}

/// Lexicographically smallest monic irreducible of the given degree, ordering
/// the lower coefficients by their base-p encoding.
pub fn smallest_irreducible(p: u64, degree: u32) -> Vec<u64> {
    let count = checked_pow(p, degree).expect("degree too large");
    for tail in 0..count {
        let mut f = code_digits(tail, p, degree);
        f.push(1);
        if poly::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn smallest_generator(p: u64, modulus: &[u64], order: u64) -> u32 {
    let degree = modulus.len() as u32 - 1;
    let m = order - 1;
    let primes = prime_factors(m);
    let one = {
        let mut v = vec![0u64; degree as usize];
        v[0] = 1;
        v
    };
    for code in 1..order {
        let g = code_digits(code, p, degree);
        if primes
            .iter()
            .all(|&l| poly::pow_mod(&g, m / l, modulus, p) != one)
        {
            return code as u32;
        }
    }
    unreachable!("the unit group is cyclic")
}

/// Dense polynomial arithmetic over F_p, coefficients low to high.
pub(crate) mod poly {
    use crate::arith::inv_mod;

    pub fn trim(v: &mut Vec<u64>) {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    }

    pub fn encode(v: &[u64], p: u64) -> u64 {
        v.iter().rev().fold(0, |acc, &c| acc * p + c)
    }

    /// a*b mod f, with a and b reduced (length deg f) and the result of the
    /// same length.
    pub fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        let d = f.len() - 1;
        let mut prod = vec![0u64; 2 * d];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        for k in (d..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for t in 0..d {
                prod[k - d + t] = (prod[k - d + t] + (p - c) * f[t]) % p;
            }
        }
        prod.truncate(d);
        prod.resize(d, 0);
        prod
    }

    pub fn pow_mod(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
        let d = f.len() - 1;
        let mut acc = vec![0u64; d];
        acc[0] = 1;
        let mut base = a.to_vec();
        base.resize(d, 0);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(&acc, &base, f, p);
            }
            base = mul_mod(&base, &base, f, p);
            e >>= 1;
        }
        acc
    }

    fn is_zero(v: &[u64]) -> bool {
        v.len() == 1 && v[0] == 0
    }

    fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], p).expect("nonzero leading coefficient");
        while r.len() > db && !is_zero(&r) {
            let dr = r.len() - 1;
            let c = r[dr] * lead_inv % p;
            for t in 0..=db {
                r[dr - db + t] = (r[dr - db + t] + (p - c) * b[t] % p) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !is_zero(&y) {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Ben-Or test: gcd(x^{p^i} - x, f) = 1 for i <= deg f / 2.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let d = f.len() - 1;
        if d == 1 {
            return true;
        }
        if f[0] == 0 {
            return false;
        }
        let mut x = vec![0u64; d];
        x[1] = 1;
        let mut h = x.clone();
        for _ in 0..d / 2 {
            h = pow_mod(&h, p, f, p);
            let mut diff = h.clone();
            diff[1] = (diff[1] + p - 1) % p;
            trim(&mut diff);
            if is_zero(&diff) {
                return false;
            }
            let g = gcd(f, &diff, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}
