use bkl_core::characters::{enumerate_char_tuples, root_of_unity, AddCharacter, MulCharacter};
use bkl_core::charsum::{KloostermanSpec, SumEngine};
use bkl_core::field::{AmbientField, FieldElement, PrimePower, DEFAULT_TABLE_CAP};
use bkl_core::symfun::{
    delta_deform, dickson_eval, exterior_trace_from_powers, newton_e_from_p, newton_h_from_p,
    newton_p_from_e, partitions, poly_roots, roots_on_unit_circle, Partition,
};
use num_bigint::BigUint;
use num_complex::Complex64;
use proptest::prelude::*;

fn field(p: u64, n: u32) -> AmbientField {
    AmbientField::new(PrimePower::new(p, 1).unwrap(), n, DEFAULT_TABLE_CAP).unwrap()
}

fn engine(p: u64, n: u32) -> SumEngine {
    SumEngine::new(&field(p, n), AddCharacter::standard()).unwrap()
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn all_chars(q: u64, d: u32) -> Vec<MulCharacter> {
    let m = MulCharacter::trivial(q, d).unwrap().modulus();
    (0..m).map(|k| MulCharacter::new(q, d, k).unwrap()).collect()
}

#[test]
fn gauss_sum_magnitudes() {
    for (p, n) in [(2u64, 4u32), (3, 2), (5, 2), (7, 1), (2, 6)] {
        let e = engine(p, n);
        for r in 1..=n {
            if n % r != 0 {
                continue;
            }
            let qr = (p as f64).powi(r as i32);
            for g in all_chars(p, r) {
                let v = e.gauss_sum(&g).unwrap();
                if g.is_trivial() {
                    assert!((v.value - c(1.0)).norm() < 1e-9);
                } else {
                    assert!((v.value.norm() - qr.sqrt()).abs() < 1e-9);
                }
                assert!((e.gauss_sum_fast(&g).unwrap() - v.value).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn gauss_sum_of_the_quadratic_character_mod_three() {
    let e = engine(3, 1);
    let v = e.gauss_sum(&MulCharacter::new(3, 1, 1).unwrap()).unwrap().value;
    let brute = -(root_of_unity(1, 3) - root_of_unity(2, 3));
    assert!((v - brute).norm() < 1e-12);
    assert!((v.norm() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn hasse_davenport_lifting() {
    for (p, big) in [(2u64, 6u32), (3, 4), (5, 2)] {
        let f = field(p, big);
        let e = SumEngine::new(&f, AddCharacter::standard()).unwrap();
        for d in 1..=big {
            for l in d..=big {
                if l % d != 0 || big % l != 0 || l == d {
                    continue;
                }
                for g in all_chars(p, d) {
                    let lifted = e.gauss_sum_fast(&g.inflate(l).unwrap()).unwrap();
                    let base = e.gauss_sum_fast(&g).unwrap().powu(l / d);
                    assert!((lifted - base).norm() < 1e-8, "p = {p}, {d} -> {l}");
                }
            }
        }
    }
}

#[test]
fn tau_11_is_a_gauss_sum() {
    for p in [3u64, 5, 7] {
        let e = engine(p, 1);
        for a in all_chars(p, 1) {
            for b in all_chars(p, 1) {
                let t = e.tau_nm(&a, &b).unwrap();
                let g = e.gauss_sum(&a.mul(&b).unwrap()).unwrap().value;
                assert!((t - g).norm() < 1e-10);
            }
        }
    }
    let e = engine(3, 1);
    let t = MulCharacter::trivial(3, 1).unwrap();
    assert!((e.tau_lambda_m(&[t, t], &t).unwrap() - c(1.0)).norm() < 1e-12);
}

#[test]
fn tau_lambda_m_direct_sum_matches_product() {
    for p in [2u64, 3] {
        let e = engine(p, 6);
        let q2 = (p as f64).powf(0.5);
        for n in 1..=3u32 {
            for lambda in partitions(n) {
                let tuples: Vec<_> = enumerate_char_tuples(p, lambda.parts()).unwrap().collect();
                let step = (tuples.len() / 12).max(1);
                for alpha in tuples.iter().step_by(step) {
                    for m in 1..=2u32 {
                        for beta in all_chars(p, m) {
                            let prod = e.tau_lambda_m(alpha, &beta).unwrap();
                            let direct = e.tau_lambda_m_direct(alpha, &beta).unwrap();
                            assert!(
                                (prod - direct.value).norm() < 1e-8,
                                "q = {p}, λ = {:?}, m = {m}: {prod} vs {}",
                                lambda.parts(),
                                direct.value
                            );
                            assert!(prod.norm() <= q2.powi((n * m) as i32) * (1.0 + 1e-9));
                        }
                    }
                }
            }
        }
    }
}

fn kloosterman_cases() -> Vec<(u64, Vec<u32>, u32)> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        for n in 1..=3u32 {
            for lambda in partitions(n) {
                for m in 1..=2u32 {
                    if p == 5 && n * m > 4 {
                        continue;
                    }
                    out.push((p, lambda.parts().to_vec(), m));
                }
            }
        }
    }
    out
}

fn lcm_all(values: &[u32]) -> u32 {
    values.iter().fold(1, |acc, &x| {
        let (mut a, mut b) = (acc, x);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        acc / a * x
    })
}

#[test]
fn kloosterman_weight_bound_and_conjugation() {
    for (p, lambda, m) in kloosterman_cases() {
        let mut degs = lambda.clone();
        degs.push(m);
        let f = field(p, lcm_all(&degs));
        let psi = AddCharacter::standard();
        let e = SumEngine::new(&f, psi).unwrap();
        let e_inv = SumEngine::new(&f, psi.inverse(&f)).unwrap();
        let n: u32 = lambda.iter().sum();
        let bound = n as f64 * (p as f64).powf(m as f64 * (n as f64 - 1.0) / 2.0);
        let tuples: Vec<_> = enumerate_char_tuples(p, &lambda).unwrap().collect();
        let step = (tuples.len() / 6).max(1);
        for chi in tuples.iter().step_by(step) {
            for a in 1..p as u32 {
                let spec = KloostermanSpec {
                    chi: chi.clone(),
                    m,
                    a: FieldElement(a),
                };
                let v = e.kloosterman(&spec).unwrap().value;
                assert!(v.norm() <= bound * (1.0 + 1e-6), "λ = {lambda:?}, m = {m}: {v}");
                let dual = KloostermanSpec {
                    chi: chi.iter().map(|x| x.inverse()).collect(),
                    ..spec
                };
                let w = e_inv.kloosterman(&dual).unwrap().value;
                assert!((v.conj() - w).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn kloosterman_examples() {
    let f = field(3, 1);
    let e = SumEngine::new(&f, AddCharacter::standard()).unwrap();
    let t = MulCharacter::trivial(3, 1).unwrap();
    let j = |chi: Vec<MulCharacter>, a: u32| {
        e.kloosterman(&KloostermanSpec {
            chi,
            m: 1,
            a: FieldElement(a),
        })
        .unwrap()
    };
    assert!((j(vec![t, t], 2).value - c(2.0)).norm() < 1e-12);
    // Fiber {(1,1), (2,2)} with traces 2 and 1.
    let v = j(vec![t, t], 1);
    assert_eq!(v.terms, 2);
    assert!((v.value - (root_of_unity(2, 3) + root_of_unity(1, 3))).norm() < 1e-12);
    for a in 1..3u32 {
        let psi_a = AddCharacter::standard().value(&f, FieldElement(a), 1).unwrap();
        assert!((j(vec![t], a).value - psi_a).norm() < 1e-12);
    }
}

#[test]
fn partition_examples() {
    assert!(partitions(0).is_empty());
    let p3: Vec<Vec<u32>> = partitions(3).iter().map(|p| p.parts().to_vec()).collect();
    assert_eq!(p3, vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
    assert_eq!(partitions(5).len(), 7);
    assert_eq!(partitions(8).len(), 22);
    let z = |v: Vec<u32>| Partition::new(v).unwrap().z();
    assert_eq!(z(vec![1, 1]), BigUint::from(2u32));
    assert_eq!(z(vec![2]), BigUint::from(2u32));
    assert_eq!(z(vec![2, 1]), BigUint::from(2u32));
    let phi = |v: Vec<u32>, q| Partition::new(v).unwrap().phi(q);
    assert_eq!(phi(vec![1, 1], 2), BigUint::from(1u32));
    assert_eq!(phi(vec![2], 2), BigUint::from(3u32));
    assert_eq!(phi(vec![2, 1], 3), BigUint::from(16u32));
    assert!(Partition::new(vec![2, 0]).is_err());
    // Σ_{μ ⊢ m} 1/Z_μ = 1 (class sizes of S_m).
    for m in 1..=7 {
        let s: f64 = partitions(m).iter().map(|mu| 1.0 / mu.z_f64()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn newton_examples() {
    assert!((newton_e_from_p(&[c(3.5)])[1] - c(3.5)).norm() < 1e-15);
    // All roots 1, n = 3: h_m = C(m + 2, 2).
    let h = newton_h_from_p(&[c(3.0); 6]);
    for (m, v) in h.iter().enumerate() {
        let expected = ((m + 1) * (m + 2) / 2) as f64;
        assert!((v - c(expected)).norm() < 1e-9);
    }
    assert!((newton_e_from_p(&[c(-2.0)])[1] - c(-2.0)).norm() < 1e-15);
    assert!((exterior_trace_from_powers(&[c(5.0), c(13.0)], 2) - c(6.0)).norm() < 1e-12);
    assert!((exterior_trace_from_powers(&[c(5.0)], 0) - c(1.0)).norm() < 1e-15);
    assert!((dickson_eval(&[c(3.0), c(2.0)], 2, 1) - c(5.0)).norm() < 1e-12);
    assert!((dickson_eval(&[c(3.0), c(2.0)], 2, 2) - c(4.0)).norm() < 1e-12);
    assert!((dickson_eval(&[c(3.0), c(2.0)], 1, 2) - c(2.0)).norm() < 1e-12);
}

#[test]
fn root_examples() {
    let mut r = poly_roots(&[c(6.0), c(-5.0), c(1.0)]).unwrap();
    r.sort_by(|a, b| a.re.total_cmp(&b.re));
    assert!((r[0] - c(2.0)).norm() < 1e-12 && (r[1] - c(3.0)).norm() < 1e-12);
    let r = poly_roots(&[c(-0.25), c(1.0)]).unwrap();
    assert!((r[0] - c(0.25)).norm() < 1e-14);
    assert!(roots_on_unit_circle(&[c(1.0), c(0.0), c(1.0)]).unwrap() < 1e-12);
    assert!(roots_on_unit_circle(&[c(-2.0), c(1.0)]).unwrap() > 0.5);
    let a = [c(1.0), c(2.0), c(1.0)];
    assert_eq!(delta_deform(&a, 1.0), a.to_vec());
    assert_eq!(delta_deform(&a, 0.0), vec![c(1.0), c(0.0), c(1.0)]);
    let half = delta_deform(&a, 0.5);
    assert_eq!(half, vec![c(1.0), c(1.0), c(1.0)]);
    assert!(roots_on_unit_circle(&half).unwrap() < 1e-9);
}

/// e_0..e_n of the given roots.
fn elementary(roots: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![c(1.0)];
    for &z in roots {
        let mut next = e.clone();
        next.push(c(0.0));
        for k in 1..next.len() {
            next[k] += e[k - 1] * z;
        }
        e = next;
    }
    e
}

/// Coefficients, low to high, of ∏ (X - z).
fn monic_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let e = elementary(roots);
    let n = roots.len();
    (0..=n)
        .map(|k| {
            let v = e[n - k];
            if (n - k).is_multiple_of(2) {
                v
            } else {
                -v
            }
        })
        .collect()
}

fn unit_roots() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(0.0..std::f64::consts::TAU, 1..=6)
        .prop_map(|t| t.into_iter().map(|x| Complex64::from_polar(1.0, x)).collect())
}

fn complex_roots() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 1..=6)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

proptest! {
    #[test]
    fn newton_round_trip(roots in unit_roots()) {
        let e = elementary(&roots);
        let p = newton_p_from_e(&e[1..], roots.len());
        for (k, pk) in p.iter().enumerate() {
            let direct: Complex64 = roots.iter().map(|z| z.powu(k as u32 + 1)).sum();
            prop_assert!((pk - direct).norm() < 1e-10);
        }
        let back = newton_e_from_p(&p);
        for (a, b) in back.iter().zip(&e) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn exterior_trace_is_elementary(p in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 6)) {
        let p: Vec<Complex64> = p.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let e = newton_e_from_p(&p);
        for m in 0..=6u32 {
            let t = exterior_trace_from_powers(&p, m);
            prop_assert!((t - e[m as usize]).norm() < 1e-9 * (1.0 + e[m as usize].norm()));
        }
    }

    #[test]
    fn dickson_matches_root_powers(roots in complex_roots(), k in 1usize..4) {
        let e = elementary(&roots);
        let powered: Vec<Complex64> = roots.iter().map(|z| z.powu(k as u32)).collect();
        let ek = elementary(&powered);
        for j in 1..=roots.len() {
            let d = dickson_eval(&e[1..], k, j);
            prop_assert!((d - ek[j]).norm() < 1e-9 * (1.0 + ek[j].norm()));
        }
    }

    #[test]
    fn root_finder_residuals(roots in complex_roots()) {
        let coeffs = monic_from_roots(&roots);
        let scale: f64 = coeffs.iter().map(|a| a.norm()).sum();
        let found = poly_roots(&coeffs).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for z in found {
            let v = coeffs.iter().rev().fold(c(0.0), |acc, a| acc * z + a);
            prop_assert!(v.norm() <= 1e-8 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn deformation_keeps_roots_on_the_circle(roots in unit_roots(), pick in 0usize..4, q in prop::sample::select(vec![2.0f64, 3.0, 5.0])) {
        let delta = [-0.9, -0.5, 0.3, 1.0 / q.sqrt()][pick];
        let coeffs = monic_from_roots(&roots);
        prop_assert!(roots_on_unit_circle(&coeffs).unwrap() < 1e-6);
        let deformed = delta_deform(&coeffs, delta);
        let dev = roots_on_unit_circle(&deformed).unwrap();
        prop_assert!(dev < 1e-6, "δ = {}, deviation {:e}", delta, dev);
    }
}
