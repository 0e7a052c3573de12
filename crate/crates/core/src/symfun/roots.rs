//! Aberth-Ehrlich simultaneous root finding. Coefficients are low to high.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const RESTARTS: usize = 4;

/// p(z) and p'(z) by Horner, plus a running bound on the rounding error of p.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let az = z.norm();
    for a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
        err = err * az + p.norm();
    }
    (p, dp, err * f64::EPSILON * 4.0)
}

/// Unique positive root of |a_n| x^n - sum_{i<n} |a_i| x^i.
fn cauchy_bound(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    let f = |x: f64| -> f64 {
        let mut acc = lead;
        for a in coeffs[..n].iter().rev() {
            acc = acc * x - a.norm();
        }
        acc
    };
    let mut hi = 1.0f64;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn aberth(coeffs: &[Complex64], radius: f64, phase: f64) -> Option<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + phase))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut moved = false;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp, err) = horner(coeffs, z[i]);
            if p.norm() <= err {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                return None;
            }
            z[i] -= w;
            if w.norm() <= 1e-16 * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            return Some(z);
        }
    }
    None
}

/// All complex roots with multiplicity.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().map(|v| v.norm() == 0.0).unwrap_or(false) {
        c.pop();
    }
    if c.len() < 2 {
        return Err(Error::InvalidParameter("polynomial of degree 0".into()));
    }
    let mut roots = Vec::new();
    while c.len() > 1 && c[0].norm() == 0.0 {
        roots.push(Complex64::new(0.0, 0.0));
        c.remove(0);
    }
    if c.len() == 1 {
        return Ok(roots);
    }
    let lead = *c.last().unwrap();
    let monic: Vec<Complex64> = c.iter().map(|a| a / lead).collect();
    let radius = cauchy_bound(&monic);
    for attempt in 0..RESTARTS {
        let phase = 0.4 + 0.7 * attempt as f64;
        let r = radius * (1.0 - 0.1 * attempt as f64).max(0.5);
        if let Some(found) = aberth(&monic, r, phase) {
            roots.extend(found);
            return Ok(roots);
        }
    }
    Err(Error::NoConvergence)
}

/// Cluster centroids refined by Newton's method on p^{(k-1)}, which has a
/// simple root at a root of multiplicity k.
pub fn refined_roots(coeffs: &[Complex64], tol: f64) -> Result<Vec<(Complex64, usize)>> {
    let roots = poly_roots(coeffs)?;
    let mut out = Vec::new();
    for (center, k) in clusters(&roots, tol) {
        let mut d: Vec<Complex64> = coeffs.to_vec();
        for _ in 1..k {
            d = d
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * i as f64)
                .collect();
        }
        let mut z = center;
        if d.len() > 1 {
            for _ in 0..8 {
                let (v, dv, _) = horner(&d, z);
                if dv.norm() == 0.0 {
                    break;
                }
                let step = v / dv;
                if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > tol {
                    break;
                }
                z -= step;
            }
        }
        out.push((z, k));
    }
    Ok(out)
}

fn clusters(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += roots[i];
                g.2 += 1;
            }
            None => groups.push((r, roots[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, s, c)| (s / c as f64, c))
        .collect()
}

/// max | |z| - 1 | over the roots, after merging near-multiple roots.
pub fn roots_on_unit_circle(coeffs: &[Complex64]) -> Result<f64> {
    Ok(refined_roots(coeffs, 1e-5)?
        .iter()
        .map(|(z, _)| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max))
}

/// a_k -> a_k delta^{k(n-k)}.
pub fn delta_deform(coeffs: &[Complex64], delta: f64) -> Vec<Complex64> {
    let n = coeffs.len() as i32 - 1;
    coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| a * delta.powi(k as i32 * (n - k as i32)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn quadratic() {
        let mut r = poly_roots(&[c(-1.0), c(0.0), c(1.0)]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - c(-1.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn double_root_on_circle() {
        // (X + 1)^2 (X - i)
        let i = Complex64::new(0.0, 1.0);
        let coeffs = [-i, c(1.0) - 2.0 * i, c(2.0) - i, c(1.0)];
        assert!(roots_on_unit_circle(&coeffs).unwrap() < 1e-10);
    }

    #[test]
    fn zero_roots_split_off() {
        let r = poly_roots(&[c(0.0), c(0.0), c(-4.0), c(1.0)]).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(r.iter().any(|z| (z - c(4.0)).norm() < 1e-12));
    }

    #[test]
    fn rejects_constant() {
        assert!(poly_roots(&[c(1.0)]).is_err());
    }
}
