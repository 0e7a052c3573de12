use std::collections::HashMap;
use std::sync::OnceLock;

use bkl_core::characters::{frobenius_orbit, root_of_unity, AddCharacter, MulCharacter};
use bkl_core::error::Error;
use bkl_core::etale::{EtaleElement, EtaleTensorAlgebra, LambdaElement, LambdaTensorAlgebra};
use bkl_core::field::{AmbientField, FieldElement, PrimePower, DEFAULT_TABLE_CAP};
use num_complex::Complex64;
use proptest::prelude::*;

fn field(p: u64, n: u32) -> AmbientField {
    AmbientField::new(PrimePower::new(p, 1).unwrap(), n, DEFAULT_TABLE_CAP).unwrap()
}

fn f2_6() -> &'static AmbientField {
    static F: OnceLock<AmbientField> = OnceLock::new();
    F.get_or_init(|| field(2, 6))
}

fn f3_4() -> &'static AmbientField {
    static F: OnceLock<AmbientField> = OnceLock::new();
    F.get_or_init(|| field(3, 4))
}

/// Element of F_{q^l} from an exponent, with 0 mapped to zero.
fn elem(f: &AmbientField, l: u32, k: u64) -> FieldElement {
    if k == 0 {
        return FieldElement::ZERO;
    }
    f.pow(f.subfield_generator(l).unwrap(), k - 1)
}

#[test]
fn small_field_examples() {
    let f4 = field(2, 2);
    assert_eq!(f4.modulus(), &[1, 1, 1]);
    let f3 = field(3, 1);
    assert_eq!(f3.generator(), FieldElement(2));
    assert_eq!(
        PrimePower::new(4, 1).unwrap_err(),
        Error::InvalidPrime(4)
    );

    let w = f4.generator();
    assert_eq!(f4.norm(w, 2, 1).unwrap(), FieldElement::ONE);
    assert_eq!(f4.trace(w, 2, 1).unwrap(), FieldElement::ONE);
    assert_eq!(f4.subfield_generator(1).unwrap(), FieldElement::ONE);

    let f9 = field(3, 2);
    assert_eq!(f9.norm(f9.generator(), 2, 1).unwrap(), FieldElement(2));
    assert_eq!(f9.trace(FieldElement::ONE, 2, 1).unwrap(), FieldElement(2));
    assert_eq!(f9.subfield_generator(1).unwrap(), FieldElement(2));
    assert_eq!(f9.subfield_generator(2).unwrap(), f9.generator());

    let g = f9.generator();
    assert_eq!(f9.dlog(g).unwrap(), 1);
    assert_eq!(f9.dlog(FieldElement::ONE).unwrap(), 0);
    assert_eq!(f9.dlog(f9.mul(f9.pow(g, 2), f9.pow(g, 3))).unwrap(), 5);
    assert_eq!(f9.dlog(FieldElement::ZERO).unwrap_err(), Error::ZeroElement);
}

#[test]
fn table_cap_and_divisibility_errors() {
    let base = PrimePower::new(2, 1).unwrap();
    assert!(matches!(
        AmbientField::new(base, 10, 1000),
        Err(Error::TableCapExceeded { .. })
    ));
    let f = field(2, 6);
    assert!(matches!(
        f.subfield_generator(4),
        Err(Error::DegreeNotDividing { .. })
    ));
}

#[test]
fn subfield_generators_have_full_order() {
    let f = f2_6();
    for d in [1, 2, 3, 6] {
        let g = f.subfield_generator(d).unwrap();
        let order = f.q_pow(d) - 1;
        assert_eq!(f.pow(g, order), FieldElement::ONE);
        for r in 1..order {
            if order.is_multiple_of(r) {
                assert_ne!(f.pow(g, r), FieldElement::ONE, "d = {d}, r = {r}");
            }
        }
        assert!(f.in_subfield(g, d));
    }
}

#[test]
fn subfield_sizes() {
    let f = f3_4();
    for d in [1, 2, 4] {
        let count = (0..f.order())
            .filter(|&c| f.in_subfield(FieldElement(c as u32), d))
            .count() as u64;
        assert_eq!(count, f.q_pow(d));
    }
}

#[test]
fn dlog_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let base = PrimePower::new(5, 1).unwrap();
    let a = AmbientField::with_cache(base, 2, DEFAULT_TABLE_CAP, Some(dir.path())).unwrap();
    let b = AmbientField::with_cache(base, 2, DEFAULT_TABLE_CAP, Some(dir.path())).unwrap();
    for c in 1..25u32 {
        assert_eq!(a.dlog(FieldElement(c)), b.dlog(FieldElement(c)));
    }
}

proptest! {
    #[test]
    fn norm_multiplicative_trace_additive(x in 0u64..64, y in 0u64..64, chain in 0usize..4) {
        let f = f2_6();
        let (l, m) = [(6, 1), (6, 2), (6, 3), (2, 1)][chain];
        let (x, y) = (elem(f, l, x % f.q_pow(l)), elem(f, l, y % f.q_pow(l)));
        let nx = f.norm(x, l, m).unwrap();
        prop_assert!(f.in_subfield(nx, m));
        prop_assert_eq!(f.norm(f.mul(x, y), l, m).unwrap(), f.mul(nx, f.norm(y, l, m).unwrap()));
        prop_assert_eq!(
            f.trace(f.add(x, y), l, m).unwrap(),
            f.add(f.trace(x, l, m).unwrap(), f.trace(y, l, m).unwrap())
        );
    }

    #[test]
    fn norm_and_trace_compose(x in 0u64..81) {
        let f = f3_4();
        let x = elem(f, 4, x);
        let n42 = f.norm(x, 4, 2).unwrap();
        prop_assert_eq!(f.norm(x, 4, 1).unwrap(), f.norm(n42, 2, 1).unwrap());
        let t42 = f.trace(x, 4, 2).unwrap();
        prop_assert_eq!(f.trace(x, 4, 1).unwrap(), f.trace(t42, 2, 1).unwrap());
        prop_assert_eq!(f.norm(x, 4, 4).unwrap(), x);
        prop_assert_eq!(f.trace(x, 4, 4).unwrap(), x);
    }

    #[test]
    fn dlog_is_a_homomorphism(a in 1u32..81, b in 1u32..81) {
        let f = f3_4();
        let (a, b) = (FieldElement(a), FieldElement(b));
        let lhs = f.dlog(f.mul(a, b)).unwrap();
        let rhs = (f.dlog(a).unwrap() + f.dlog(b).unwrap()) % f.unit_order();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(f.exp(f.dlog(a).unwrap()), a);
    }

    #[test]
    fn generator_norm_is_generator(pick in 0usize..3) {
        let f = f2_6();
        let (l, m) = [(6, 2), (6, 3), (3, 1)][pick];
        let gl = f.subfield_generator(l).unwrap();
        prop_assert_eq!(f.norm(gl, l, m).unwrap(), f.subfield_generator(m).unwrap());
    }
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn multiplicative_characters_are_homomorphisms() {
    for (p, d) in [(2, 2), (2, 3), (3, 2), (2, 4), (5, 2), (3, 3), (7, 2), (3, 4)] {
        let f = field(p, d);
        let units: Vec<FieldElement> = (1..f.order()).map(|c| FieldElement(c as u32)).collect();
        let k = (f.unit_order() / 3).max(1);
        for exps in [1, k, f.unit_order() - 1] {
            let chi = MulCharacter::new(p, d, exps % f.unit_order()).unwrap();
            let v: HashMap<FieldElement, Complex64> =
                units.iter().map(|&x| (x, chi.value(&f, x).unwrap())).collect();
            for &x in &units {
                assert!((v[&x].norm() - 1.0).abs() < 1e-12);
                for &y in &units {
                    assert!(close(v[&f.mul(x, y)], v[&x] * v[&y], 1e-12));
                }
            }
        }
    }
}

#[test]
fn character_orthogonality() {
    let f = field(3, 2);
    let units: Vec<FieldElement> = (1..9).map(FieldElement).collect();
    for k in 0..8 {
        let chi = MulCharacter::new(3, 2, k).unwrap();
        let s: Complex64 = units.iter().map(|&x| chi.value(&f, x).unwrap()).sum();
        let expected = if k == 0 { 8.0 } else { 0.0 };
        assert!(close(s, Complex64::new(expected, 0.0), 1e-12));
    }
    for &x in &units {
        let s: Complex64 = (0..8)
            .map(|k| MulCharacter::new(3, 2, k).unwrap().value(&f, x).unwrap())
            .sum();
        let expected = if x == FieldElement::ONE { 8.0 } else { 0.0 };
        assert!(close(s, Complex64::new(expected, 0.0), 1e-12));
    }
    for b in [1u32, 2] {
        let psi = AddCharacter::new(&f, FieldElement(b)).unwrap();
        for r in [1, 2] {
            let s: Complex64 = (0..f.order())
                .map(|c| FieldElement(c as u32))
                .filter(|&x| f.in_subfield(x, r))
                .map(|x| psi.value(&f, x, r).unwrap())
                .sum();
            assert!(s.norm() < 1e-12);
        }
    }
}

#[test]
fn character_examples() {
    let f3 = field(3, 1);
    let chi = MulCharacter::new(3, 1, 1).unwrap();
    assert!(close(chi.value(&f3, FieldElement(2)).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
    let psi = AddCharacter::standard();
    assert!(close(psi.value(&f3, FieldElement::ONE, 1).unwrap(), root_of_unity(1, 3), 1e-15));
    assert!(close(psi.value(&f3, FieldElement::ZERO, 1).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
    assert_eq!(
        AddCharacter::new(&f3, FieldElement::ZERO).unwrap_err(),
        Error::TrivialAdditiveCharacter
    );

    let f9 = field(3, 2);
    let g2 = f9.subfield_generator(2).unwrap();
    let chi = MulCharacter::new(3, 2, 3).unwrap();
    assert!(close(chi.value(&f9, g2).unwrap(), root_of_unity(3, 8), 1e-15));

    assert_eq!(frobenius_orbit(2, 2, 1), vec![1, 2]);
    assert_eq!(frobenius_orbit(2, 2, 0), vec![0]);
    assert_eq!(frobenius_orbit(3, 2, 4), vec![4]);
    assert!(MulCharacter::new(2, 2, 1).unwrap().is_regular());
    assert!(!MulCharacter::new(2, 2, 0).unwrap().is_regular());
    for k in 0..4 {
        assert!(MulCharacter::new(5, 1, k).unwrap().is_regular());
    }
}

#[test]
fn orbit_sizes_divide_degree() {
    for (q, d) in [(2u64, 4u32), (3, 3), (2, 6)] {
        let m = q.pow(d) - 1;
        for k in 0..m {
            let o = frobenius_orbit(q, d, k);
            assert_eq!(d as usize % o.len(), 0);
            assert!(o.contains(&k));
        }
    }
}

#[test]
fn inflation_commutes_with_norm() {
    let f = field(2, 6);
    for (small, big) in [(1u32, 2u32), (2, 6), (3, 6), (1, 6)] {
        let modulus = f.q_pow(small) - 1;
        for k in 0..modulus {
            let chi = MulCharacter::new(2, small, k).unwrap();
            let up = chi.inflate(big).unwrap();
            assert_eq!(up.degree(), big);
            for e in (0..f.q_pow(big) - 1).step_by(5) {
                let x = f.pow(f.subfield_generator(big).unwrap(), e);
                let lhs = up.value(&f, x).unwrap();
                let rhs = chi.value(&f, f.norm(x, big, small).unwrap()).unwrap();
                assert!(close(lhs, rhs, 1e-12));
            }
        }
    }
    let t = MulCharacter::trivial(2, 1).unwrap();
    assert!(t.inflate(2).unwrap().is_trivial());
    assert!(matches!(
        MulCharacter::trivial(2, 2).unwrap().inflate(3),
        Err(Error::DegreeNotDividing { .. })
    ));
}

#[test]
fn character_tuple_counts() {
    use bkl_core::characters::enumerate_char_tuples;
    use std::collections::HashSet;
    for (q, parts, expected) in [
        (3u64, vec![1u32], 2usize),
        (2, vec![1, 1], 1),
        (2, vec![2], 3),
        (3, vec![2, 1], 16),
        (2, vec![2, 2, 1], 9),
    ] {
        let all: Vec<_> = enumerate_char_tuples(q, &parts).unwrap().collect();
        assert_eq!(all.len(), expected);
        let distinct: HashSet<Vec<u64>> = all
            .iter()
            .map(|t| t.iter().map(|c| c.exponent()).collect())
            .collect();
        assert_eq!(distinct.len(), expected);
        for t in &all {
            let degrees: Vec<u32> = t.iter().map(|c| c.degree()).collect();
            assert_eq!(degrees, parts);
        }
    }
}

/// All units of F_λ ⊗ F_{q^m} in coordinates.
fn units(f: &AmbientField, alg: &LambdaTensorAlgebra) -> Vec<LambdaElement> {
    let mut out: Vec<LambdaElement> = vec![Vec::new()];
    for factor in alg.factors() {
        let l = factor.l();
        let g = f.subfield_generator(l).unwrap();
        let size = f.q_pow(l) - 1;
        let mut blocks: Vec<Vec<FieldElement>> = vec![Vec::new()];
        for _ in 0..factor.d() {
            blocks = blocks
                .into_iter()
                .flat_map(|b| {
                    (0..size).map(move |k| {
                        let mut b = b.clone();
                        b.push(f.pow(g, k));
                        b
                    })
                })
                .collect();
        }
        out = out
            .into_iter()
            .flat_map(|x| {
                blocks.iter().map(move |b| {
                    let mut x = x.clone();
                    x.push(EtaleElement { coords: b.clone() });
                    x
                })
            })
            .collect();
    }
    out
}

fn lambda_mul(f: &AmbientField, alg: &LambdaTensorAlgebra, x: &LambdaElement, y: &LambdaElement) -> LambdaElement {
    alg.factors()
        .iter()
        .zip(x.iter().zip(y))
        .map(|(a, (u, v))| a.mul(f, u, v))
        .collect()
}

#[test]
fn norm_fibers_partition_the_unit_group() {
    for (p, lambda, m) in [
        (2u64, vec![1u32], 1u32),
        (2, vec![2], 2),
        (3, vec![1, 1], 1),
        (3, vec![1, 1], 2),
        (2, vec![2, 1], 2),
        (2, vec![3, 2], 2),
        (3, vec![2], 2),
    ] {
        let l = lambda.iter().fold(m, |acc, &x| num_integer_lcm(acc, x));
        let f = field(p, l);
        let alg = LambdaTensorAlgebra::new(&f, &lambda, m).unwrap();
        let all = units(&f, &alg);
        assert_eq!(all.len() as u128, alg.unit_count(&f));
        let mut by_norm: HashMap<FieldElement, Vec<LambdaElement>> = HashMap::new();
        for x in &all {
            by_norm.entry(alg.norm2(&f, x).unwrap()).or_default().push(x.clone());
        }
        let expected = alg.unit_count(&f) / (f.q_pow(m) as u128 - 1);
        let gm = f.subfield_generator(m).unwrap();
        let mut total = 0;
        for k in 0..f.q_pow(m) - 1 {
            let a = f.pow(gm, k);
            let mut fiber = alg.norm2_fiber(&f, a).unwrap();
            assert_eq!(fiber.len() as u128, expected);
            assert_eq!(alg.fiber_size(&f), expected);
            let mut reference = by_norm.remove(&a).unwrap_or_default();
            fiber.sort();
            reference.sort();
            assert_eq!(fiber, reference, "λ = {lambda:?}, m = {m}, a = {a:?}");
            total += fiber.len();
        }
        assert!(by_norm.is_empty());
        assert_eq!(total, all.len());
    }
}

fn num_integer_lcm(a: u32, b: u32) -> u32 {
    let mut g = (a, b);
    while g.1 != 0 {
        g = (g.1, g.0 % g.1);
    }
    a / g.0 * b
}

#[test]
fn norm_and_trace_are_homomorphisms() {
    let f = field(3, 2);
    let alg = LambdaTensorAlgebra::new(&f, &[2, 1], 2).unwrap();
    let all = units(&f, &alg);
    for (i, x) in all.iter().enumerate().step_by(7) {
        let y = &all[(i * 31 + 5) % all.len()];
        let xy = lambda_mul(&f, &alg, x, y);
        assert_eq!(
            alg.norm2(&f, &xy).unwrap(),
            f.mul(alg.norm2(&f, x).unwrap(), alg.norm2(&f, y).unwrap())
        );
        let n1 = alg.norm1(&f, &xy).unwrap();
        let (a, b) = (alg.norm1(&f, x).unwrap(), alg.norm1(&f, y).unwrap());
        for j in 0..n1.len() {
            assert_eq!(n1[j], f.mul(a[j], b[j]));
        }
        let sum: LambdaElement = x
            .iter()
            .zip(y)
            .map(|(u, v)| EtaleElement {
                coords: u.coords.iter().zip(&v.coords).map(|(&s, &t)| f.add(s, t)).collect(),
            })
            .collect();
        assert_eq!(
            alg.abs_trace(&f, &sum).unwrap(),
            f.add(alg.abs_trace(&f, x).unwrap(), alg.abs_trace(&f, y).unwrap())
        );
    }
}

#[test]
fn etale_examples() {
    let f3 = field(3, 1);
    let alg = LambdaTensorAlgebra::new(&f3, &[1, 1], 1).unwrap();
    let pt = |a: u32, b: u32| -> LambdaElement {
        vec![
            EtaleElement { coords: vec![FieldElement(a)] },
            EtaleElement { coords: vec![FieldElement(b)] },
        ]
    };
    assert_eq!(alg.abs_trace(&f3, &pt(1, 2)).unwrap(), FieldElement::ZERO);
    assert_eq!(alg.norm2(&f3, &pt(2, 2)).unwrap(), FieldElement(1));
    let mut fiber = alg.norm2_fiber(&f3, FieldElement(2)).unwrap();
    fiber.sort();
    assert_eq!(fiber, vec![pt(1, 2), pt(2, 1)]);

    let f4 = field(2, 2);
    let w = f4.generator();
    let a22 = EtaleTensorAlgebra::new(&f4, 2, 2).unwrap();
    let x = EtaleElement { coords: vec![w, f4.mul(w, w)] };
    // x_1 x_2^2 = w * w^4 = w^2
    assert_eq!(a22.norm2(&f4, &x).unwrap(), f4.mul(w, w));
    let a21 = EtaleTensorAlgebra::new(&f4, 2, 1).unwrap();
    let y = EtaleElement { coords: vec![w] };
    assert_eq!(a21.norm1(&f4, &y).unwrap(), w);
    assert_eq!(a21.abs_trace(&f4, &y).unwrap(), FieldElement::ONE);
    assert_eq!(
        LambdaTensorAlgebra::new(&f4, &[2], 2).unwrap().fiber_size(&f4),
        3
    );
    assert!(matches!(
        EtaleTensorAlgebra::new(&f4, 3, 1),
        Err(Error::DegreeNotDividing { .. })
    ));
}

/// Determinant over the ambient field by Gaussian elimination.
fn det(f: &AmbientField, mut a: Vec<Vec<FieldElement>>) -> FieldElement {
    let n = a.len();
    let mut acc = FieldElement::ONE;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return FieldElement::ZERO;
        };
        if piv != col {
            a.swap(piv, col);
            acc = f.neg(acc);
        }
        let inv = f.inv(a[col][col]).unwrap();
        acc = f.mul(acc, a[col][col]);
        for r in col + 1..n {
            let factor = f.mul(a[r][col], inv);
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let t = f.mul(factor, a[col][c]);
                a[r][c] = f.sub(a[r][c], t);
            }
        }
    }
    acc
}

/// Coordinates of θ^t, t < 2n, in the basis 1, θ, ..., θ^{n-1}, where θ
/// generates F_{q^n}.
fn power_basis(f: &AmbientField, n: u32) -> Vec<Vec<FieldElement>> {
    let theta = f.subfield_generator(n).unwrap();
    // Minimal polynomial ∏ (X - θ^{q^i}), low to high.
    let mut minpoly = vec![FieldElement::ONE];
    for i in 0..n {
        let root = f.neg(f.frobenius(theta, i));
        let mut next = vec![FieldElement::ZERO; minpoly.len() + 1];
        for (k, &c) in minpoly.iter().enumerate() {
            next[k + 1] = f.add(next[k + 1], c);
            next[k] = f.add(next[k], f.mul(c, root));
        }
        minpoly = next;
    }
    let n = n as usize;
    let mut out = Vec::new();
    let mut cur = vec![FieldElement::ZERO; n];
    cur[0] = FieldElement::ONE;
    for _ in 0..2 * n {
        out.push(cur.clone());
        let top = cur[n - 1];
        let mut next = vec![FieldElement::ZERO; n];
        for k in (1..n).rev() {
            next[k] = cur[k - 1];
        }
        for k in 0..n {
            next[k] = f.sub(next[k], f.mul(top, minpoly[k]));
        }
        cur = next;
    }
    out
}

#[test]
fn norm_and_trace_match_the_multiplication_matrix() {
    for (p, n, m) in [(2u64, 2u32, 2u32), (2, 2, 3), (2, 3, 2), (2, 3, 3), (2, 4, 2), (2, 2, 4), (3, 2, 2), (3, 2, 3), (3, 3, 2)] {
        assert!(p.pow(n * m) <= 4096);
        let l = num_integer_lcm(n, m);
        let f = field(p, l);
        let alg = EtaleTensorAlgebra::new(&f, n, m).unwrap();
        let theta = f.subfield_generator(n).unwrap();
        let basis = power_basis(&f, n);
        let left: Vec<EtaleElement> = (0..n)
            .map(|i| alg.from_left(&f, f.pow(theta, i as u64)).unwrap())
            .collect();
        let fm: Vec<FieldElement> = (0..f.q_pow(m))
            .map(|k| elem(&f, m, k))
            .collect();
        let total = fm.len().pow(n);
        for code in 0..total {
            // x = Σ_i θ^i ⊗ s_i
            let mut rest = code;
            let s: Vec<FieldElement> = (0..n)
                .map(|_| {
                    let v = fm[rest % fm.len()];
                    rest /= fm.len();
                    v
                })
                .collect();
            let mut x = EtaleElement {
                coords: vec![FieldElement::ZERO; alg.d() as usize],
            };
            for i in 0..n as usize {
                let term = alg.mul(&f, &left[i], &alg.from_right(&f, s[i]).unwrap());
                for (a, b) in x.coords.iter_mut().zip(&term.coords) {
                    *a = f.add(*a, *b);
                }
            }
            // T_x(θ^j ⊗ 1) = Σ_k θ^k ⊗ (Σ_i [θ^{i+j}]_k s_i)
            let nn = n as usize;
            let mat: Vec<Vec<FieldElement>> = (0..nn)
                .map(|k| {
                    (0..nn)
                        .map(|j| {
                            (0..nn).fold(FieldElement::ZERO, |acc, i| {
                                f.add(acc, f.mul(basis[i + j][k], s[i]))
                            })
                        })
                        .collect()
                })
                .collect();
            let tr = (0..nn).fold(FieldElement::ZERO, |acc, j| f.add(acc, mat[j][j]));
            assert_eq!(alg.abs_trace(&f, &x).unwrap(), f.trace(tr, m, 1).unwrap());
            let d = det(&f, mat);
            if x.coords.iter().all(|c| !c.is_zero()) {
                assert_eq!(alg.norm2(&f, &x).unwrap(), d, "(q, n, m) = ({p}, {n}, {m})");
            } else {
                assert_eq!(d, FieldElement::ZERO);
            }
        }
    }
}
