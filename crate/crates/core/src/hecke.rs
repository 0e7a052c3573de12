//! Brute-force oracle: the algebra of bi-(U, ψ)-equivariant functions on
//! GL_n(F_q) under convolution, whose normalized common eigenfunctions are
//! the Bessel functions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characters::{root_of_unity, AddCharacter};
use crate::error::{Error, Result};
use crate::field::{AmbientField, FieldElement};
use crate::reps::SupportPoint;

pub const GROUP_CAP: u64 = 50_000;
pub const DEFAULT_SEED: u64 = 0x42;
const MAX_DRAWS: u32 = 5;
const NONE: u32 = u32::MAX;

/// F_q by index: 0 is zero, 1 + t is g_1^t.
#[derive(Clone, Debug)]
struct SmallField {
    q: usize,
    elems: Vec<FieldElement>,
    add: Vec<u16>,
    mul: Vec<u16>,
    inv: Vec<u16>,
}

impl SmallField {
    fn new(field: &AmbientField) -> Result<Self> {
        let q = field.q() as usize;
        let g = field.subfield_generator(1)?;
        let mut elems = vec![FieldElement::ZERO];
        let mut x = FieldElement::ONE;
        for _ in 1..q {
            elems.push(x);
            x = field.mul(x, g);
        }
        let pos = |y: FieldElement| elems.iter().position(|&e| e == y).unwrap() as u16;
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for i in 0..q {
            for j in 0..q {
                add[i * q + j] = pos(field.add(elems[i], elems[j]));
                mul[i * q + j] = pos(field.mul(elems[i], elems[j]));
            }
        }
        let inv = (0..q)
            .map(|i| if i == 0 { 0 } else { pos(field.inv(elems[i]).unwrap()) })
            .collect();
        Ok(SmallField {
            q,
            elems,
            add,
            mul,
            inv,
        })
    }

    #[inline]
    fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q + b as usize]
    }

    fn neg(&self, a: u16) -> u16 {
        (0..self.q as u16).find(|&b| self.add(a, b) == 0).unwrap()
    }

    fn index_of(&self, x: FieldElement) -> Option<u16> {
        self.elems.iter().position(|&e| e == x).map(|i| i as u16)
    }
}

/// GL_n(F_q) with matrices encoded as base-q integers, row-major.
#[derive(Clone, Debug)]
pub struct GroupTable {
    n: usize,
    fq: SmallField,
    elements: Vec<u32>,
    unipotent: Vec<u32>,
}

impl GroupTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.fq.q
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn unipotent_order(&self) -> usize {
        self.unipotent.len()
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    fn decode(&self, code: u32) -> Vec<u16> {
        let q = self.fq.q as u32;
        let mut c = code;
        (0..self.n * self.n)
            .map(|_| {
                let d = (c % q) as u16;
                c /= q;
                d
            })
            .collect()
    }

    fn encode(&self, m: &[u16]) -> u32 {
        m.iter()
            .rev()
            .fold(0u32, |acc, &d| acc * self.fq.q as u32 + d as u32)
    }

    fn mul_raw(&self, a: &[u16], b: &[u16]) -> Vec<u16> {
        let n = self.n;
        let mut out = vec![0u16; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0 {
                    continue;
                }
                for j in 0..n {
                    let t = self.fq.mul(aik, b[k * n + j]);
                    out[i * n + j] = self.fq.add(out[i * n + j], t);
                }
            }
        }
        out
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.encode(&self.mul_raw(&self.decode(a), &self.decode(b)))
    }

    /// Gauss-Jordan inverse; None when singular.
    fn inverse_raw(&self, m: &[u16]) -> Option<Vec<u16>> {
        let n = self.n;
        let f = &self.fq;
        let mut a = m.to_vec();
        let mut b = vec![0u16; n * n];
        for i in 0..n {
            b[i * n + i] = 1;
        }
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r * n + col] != 0)?;
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                    b.swap(piv * n + j, col * n + j);
                }
            }
            let s = f.inv[a[col * n + col] as usize];
            for j in 0..n {
                a[col * n + j] = f.mul(a[col * n + j], s);
                b[col * n + j] = f.mul(b[col * n + j], s);
            }
            for r in 0..n {
                let t = a[r * n + col];
                if r == col || t == 0 {
                    continue;
                }
                let nt = f.neg(t);
                for j in 0..n {
                    a[r * n + j] = f.add(a[r * n + j], f.mul(nt, a[col * n + j]));
                    b[r * n + j] = f.add(b[r * n + j], f.mul(nt, b[col * n + j]));
                }
            }
        }
        Some(b)
    }

    pub fn inverse(&self, code: u32) -> u32 {
        self.encode(&self.inverse_raw(&self.decode(code)).expect("group element"))
    }

    pub fn identity(&self) -> u32 {
        let n = self.n;
        let mut m = vec![0u16; n * n];
        for i in 0..n {
            m[i * n + i] = 1;
        }
        self.encode(&m)
    }

    /// Matrix of g_{n_1,...,n_s}(c_1,...,c_s).
    pub fn support_matrix(&self, pt: &SupportPoint) -> Result<u32> {
        let n = self.n;
        let mut m = vec![0u16; n * n];
        let mut row = 0usize;
        for (&len, &c) in pt.composition().iter().zip(pt.scalars()) {
            let len = len as usize;
            let ci = self
                .fq
                .index_of(c)
                .ok_or_else(|| Error::InvalidSupportPoint("scalar outside F_q".into()))?;
            let col0 = n - row - len;
            for i in 0..len {
                m[(row + i) * n + col0 + i] = ci;
            }
            row += len;
        }
        Ok(self.encode(&m))
    }

    /// Trace to F_p of the superdiagonal sum against ψ, as an exponent mod p.
    fn unipotent_phase(&self, code: u32, field: &AmbientField, psi: &AddCharacter) -> Result<u64> {
        let m = self.decode(code);
        let n = self.n;
        let mut s = 0u16;
        for i in 0..n - 1 {
            s = self.fq.add(s, m[i * n + i + 1]);
        }
        let x = field.mul(psi.twist(), self.fq.elems[s as usize]);
        field.trace_to_prime(x, 1)
    }
}

pub fn build_group(field: &AmbientField, n: u32) -> Result<GroupTable> {
    if n == 0 {
        return Err(Error::InvalidDegree("n must be positive".into()));
    }
    let q = field.q();
    let mut order: u128 = 1;
    for j in 1..=n {
        order = order
            .saturating_mul(q.pow(j) as u128 - 1)
            .saturating_mul((q as u128).pow(j - 1));
    }
    if order > GROUP_CAP as u128 {
        return Err(Error::GroupTooLarge(order));
    }
    let fq = SmallField::new(field)?;
    let nn = n * n;
    let total = (q as u32).pow(nn);
    let mut g = GroupTable {
        n: n as usize,
        fq,
        elements: Vec::new(),
        unipotent: Vec::new(),
    };
    for code in 0..total {
        let m = g.decode(code);
        if g.inverse_raw(&m).is_some() {
            g.elements.push(code);
        }
        let n = g.n;
        let unip = (0..n).all(|i| {
            (0..n).all(|j| {
                let v = m[i * n + j];
                if i == j {
                    v == 1
                } else if i > j {
                    v == 0
                } else {
                    true
                }
            })
        });
        if unip {
            g.unipotent.push(code);
        }
    }
    debug_assert_eq!(g.elements.len() as u128, order);
    Ok(g)
}

/// The double cosets U g U carrying a consistent equivariant function.
#[derive(Clone, Debug)]
pub struct HeckeCosets {
    pub points: Vec<SupportPoint>,
    reps: Vec<u32>,
    coset_of: Vec<u32>,
    phase_of: Vec<u32>,
    members: Vec<Vec<u32>>,
    p: u64,
    /// Irrelevant double cosets met during the sweep.
    pub irrelevant: usize,
    identity_index: usize,
}

impl HeckeCosets {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coset_size(&self, a: usize) -> usize {
        self.members[a].len()
    }

    pub fn identity_index(&self) -> usize {
        self.identity_index
    }
}

/// Expands U g U, returning its members with phases, or None if the
/// equivariance condition is contradictory on it.
fn sweep_coset(
    g: &GroupTable,
    start: u32,
    unip: &[(Vec<u16>, u64)],
    p: u64,
    seen: &mut [u32],
    phase: &mut [u32],
    tag: u32,
) -> (Vec<u32>, bool) {
    let s = g.decode(start);
    let mut members = Vec::new();
    let mut consistent = true;
    for (u1, a) in unip {
        let left = g.mul_raw(u1, &s);
        for (u2, b) in unip {
            let h = g.encode(&g.mul_raw(&left, u2));
            let ph = ((a + b) % p) as u32;
            let slot = h as usize;
            if seen[slot] == tag {
                if phase[slot] != ph {
                    consistent = false;
                }
            } else {
                seen[slot] = tag;
                phase[slot] = ph;
                members.push(h);
            }
        }
    }
    (members, consistent)
}

pub fn support_cosets(g: &GroupTable, field: &AmbientField, psi: &AddCharacter) -> Result<HeckeCosets> {
    let p = field.p();
    let size = g.q().pow((g.n * g.n) as u32);
    let unip: Vec<(Vec<u16>, u64)> = g
        .unipotent
        .iter()
        .map(|&u| Ok((g.decode(u), g.unipotent_phase(u, field, psi)?)))
        .collect::<Result<_>>()?;
    let mut seen = vec![NONE; size];
    let mut phase = vec![0u32; size];
    let points = SupportPoint::enumerate(field, g.n as u32);
    let mut reps = Vec::new();
    let mut members = Vec::new();
    for (a, pt) in points.iter().enumerate() {
        let rep = g.support_matrix(pt)?;
        if seen[rep as usize] != NONE {
            return Err(Error::InconsistentSupport(format!(
                "support points {a} and {} share a double coset",
                seen[rep as usize]
            )));
        }
        let (mem, ok) = sweep_coset(g, rep, &unip, p, &mut seen, &mut phase, a as u32);
        if !ok {
            return Err(Error::InconsistentSupport(format!(
                "equivariance contradicts itself on the coset of point {a}"
            )));
        }
        reps.push(rep);
        members.push(mem);
    }
    let mut irrelevant = 0;
    let mut tag = points.len() as u32;
    for &code in &g.elements {
        if seen[code as usize] != NONE {
            continue;
        }
        let (_, ok) = sweep_coset(g, code, &unip, p, &mut seen, &mut phase, tag);
        if ok {
            return Err(Error::InconsistentSupport(format!(
                "a relevant double coset contains no support point (element {code})"
            )));
        }
        irrelevant += 1;
        tag += 1;
    }
    let nrel = points.len() as u32;
    let coset_of = seen
        .iter()
        .map(|&t| if t < nrel { t } else { NONE })
        .collect();
    let id = g.identity();
    let identity_index = reps.iter().position(|&r| r == id).unwrap();
    Ok(HeckeCosets {
        points,
        reps,
        coset_of,
        phase_of: phase,
        members,
        p,
        irrelevant,
        identity_index,
    })
}

/// Left-multiplication matrices L_a with (e_a * e_b)(w_c) = L_a[c][b],
/// convolution normalized by 1/|U|.
#[derive(Clone, Debug)]
pub struct HeckeAlgebra {
    pub mats: Vec<DMatrix<Complex64>>,
    pub identity_index: usize,
}

pub fn structure_constants(g: &GroupTable, cos: &HeckeCosets) -> HeckeAlgebra {
    let d = cos.len();
    let scale = 1.0 / g.unipotent_order() as f64;
    let zeta: Vec<Complex64> = (0..cos.p).map(|k| root_of_unity(k, cos.p)).collect();
    let reps: Vec<Vec<u16>> = cos.reps.iter().map(|&r| g.decode(r)).collect();
    let mut mats = Vec::with_capacity(d);
    for a in 0..d {
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for &x in &cos.members[a] {
            let xinv = g.inverse_raw(&g.decode(x)).unwrap();
            let px = cos.phase_of[x as usize] as u64;
            for (c, w) in reps.iter().enumerate() {
                let y = g.encode(&g.mul_raw(&xinv, w)) as usize;
                let b = cos.coset_of[y];
                if b == NONE {
                    continue;
                }
                let ph = (px + cos.phase_of[y] as u64) % cos.p;
                m[(c, b as usize)] += zeta[ph as usize] * scale;
            }
        }
        mats.push(m);
    }
    HeckeAlgebra {
        mats,
        identity_index: cos.identity_index,
    }
}

impl HeckeAlgebra {
    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    /// max |e_a * e_b - e_b * e_a| over all basis pairs.
    pub fn commutator_norm(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    worst = worst.max((self.mats[a][(c, b)] - self.mats[b][(c, a)]).norm());
                }
            }
        }
        worst
    }

    /// max deviation of the identity-coset element from the algebra unit.
    pub fn unit_defect(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.dim(), self.dim());
        (&self.mats[self.identity_index] - id)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Values of one common eigenfunction at the support points.
#[derive(Clone, Debug)]
pub struct EquivariantFunction {
    pub values: Vec<Complex64>,
    /// max residual of the eigen-equation over the basis operators.
    pub residual: f64,
}

pub fn bessel_functions_numeric(alg: &HeckeAlgebra, seed: u64) -> Result<Vec<EquivariantFunction>> {
    let d = alg.dim();
    for draw in 0..MAX_DRAWS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(draw as u64));
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for l in &alg.mats {
            let r = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m += l * r;
        }
        let t = m.clone().schur().unpack().1;
        let eig: Vec<Complex64> = (0..d).map(|i| t[(i, i)]).collect();
        let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let separated = (0..d).all(|i| (i + 1..d).all(|j| (eig[i] - eig[j]).norm() > 1e-7 * scale));
        if !separated {
            continue;
        }
        let mut out = Vec::with_capacity(d);
        let mut ok = true;
        for &lam in &eig {
            let shifted = &m - DMatrix::<Complex64>::identity(d, d) * lam;
            let svd = shifted.svd(false, true);
            let vt = svd.v_t.as_ref().unwrap();
            let k = (0..d)
                .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
                .unwrap();
            let v: Vec<Complex64> = (0..d).map(|i| vt[(k, i)].conj()).collect();
            let pivot = v[alg.identity_index];
            if pivot.norm() < 1e-8 {
                ok = false;
                break;
            }
            let values: Vec<Complex64> = v.iter().map(|z| z / pivot).collect();
            let vec = nalgebra::DVector::from_vec(values.clone());
            let mut residual = 0.0f64;
            for l in &alg.mats {
                let lv = l * &vec;
                let mu = lv[alg.identity_index];
                for i in 0..d {
                    residual = residual.max((lv[i] - mu * vec[i]).norm());
                }
            }
            out.push(EquivariantFunction { values, residual });
        }
        if ok {
            return Ok(out);
        }
    }
    Err(Error::DiagonalizationDegenerate(MAX_DRAWS))
}

#[derive(Clone, Debug)]
pub struct OracleMatch {
    pub class: usize,
    pub function: usize,
    pub distance: f64,
    pub runner_up: f64,
}

/// Nearest-vector matching of reference value vectors to oracle functions.
pub fn match_oracle(
    functions: &[EquivariantFunction],
    references: &[Vec<Complex64>],
) -> Result<Vec<OracleMatch>> {
    if functions.len() != references.len() {
        return Err(Error::MatchFailed(format!(
            "{} oracle functions for {} classes",
            functions.len(),
            references.len()
        )));
    }
    let dist = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    let mut used = vec![false; functions.len()];
    let mut out = Vec::with_capacity(references.len());
    for (class, r) in references.iter().enumerate() {
        let mut d: Vec<(f64, usize)> = functions
            .iter()
            .enumerate()
            .map(|(i, f)| (dist(&f.values, r), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (best, idx) = d[0];
        let runner_up = d.get(1).map(|x| x.0).unwrap_or(f64::INFINITY);
        if best >= 1e-6 || runner_up <= 1e-3 || used[idx] {
            return Err(Error::MatchFailed(format!(
                "class {class}: best {best:.3e}, runner-up {runner_up:.3e}"
            )));
        }
        used[idx] = true;
        out.push(OracleMatch {
            class,
            function: idx,
            distance: best,
            runner_up,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimePower, DEFAULT_TABLE_CAP};

    fn setup(p: u64, n: u32) -> (AmbientField, GroupTable, HeckeCosets, HeckeAlgebra) {
        let f = AmbientField::new(PrimePower::new(p, 1).unwrap(), 1, DEFAULT_TABLE_CAP).unwrap();
        let g = build_group(&f, n).unwrap();
        let c = support_cosets(&g, &f, &AddCharacter::standard()).unwrap();
        let a = structure_constants(&g, &c);
        (f, g, c, a)
    }

    #[test]
    fn group_orders() {
        assert_eq!(setup(2, 2).1.order(), 6);
        assert_eq!(setup(3, 2).1.order(), 48);
        assert_eq!(setup(2, 3).1.order(), 168);
    }

    #[test]
    fn support_counts_and_unit() {
        let (_, _, c, a) = setup(3, 2);
        assert_eq!(c.len(), 6);
        assert!(a.unit_defect() < 1e-12);
        assert!(a.commutator_norm() < 1e-12);
    }

    #[test]
    fn steinberg_value_appears() {
        let (f, _, c, a) = setup(3, 2);
        let funcs = bessel_functions_numeric(&a, DEFAULT_SEED).unwrap();
        assert_eq!(funcs.len(), 6);
        let pt = SupportPoint::antidiag(&f, 2, 1, FieldElement::ONE).unwrap();
        let k = c.points.iter().position(|x| *x == pt).unwrap();
        assert!(funcs
            .iter()
            .any(|h| (h.values[k] - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-9));
        for h in &funcs {
            assert!((h.values[c.identity_index()] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn too_large() {
        let f = AmbientField::new(PrimePower::new(5, 1).unwrap(), 1, DEFAULT_TABLE_CAP).unwrap();
        assert!(matches!(build_group(&f, 3), Err(Error::GroupTooLarge(_))));
    }
}
