//! Newton identities between power sums and elementary / complete symmetric
//! functions. Power sums are passed as `p[k - 1] = p_k`; elementary and
//! complete series are returned with index 0 holding the constant 1.

use num_complex::Complex64;

use super::partition::partitions;

/// e_0..e_M from p_1..p_M.
pub fn newton_e_from_p(p: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for m in 1..=p.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=m {
            let term = e[m - i] * p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / m as f64);
    }
    e
}

/// h_0..h_M from p_1..p_M, i.e. the coefficients of exp(sum p_m T^m / m).
pub fn newton_h_from_p(p: &[Complex64]) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(1.0, 0.0)];
    for m in 1..=p.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=m {
            acc += p[i - 1] * h[m - i];
        }
        h.push(acc / m as f64);
    }
    h
}

/// p_1..p_M from e_1..e_n (`e[k - 1] = e_k`, e_k = 0 beyond n).
pub fn newton_p_from_e(e: &[Complex64], m_max: usize) -> Vec<Complex64> {
    let e_at = |k: usize| -> Complex64 {
        if k >= 1 && k <= e.len() {
            e[k - 1]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut p: Vec<Complex64> = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let mut acc = e_at(m) * m as f64;
        if m % 2 == 0 {
            acc = -acc;
        }
        for i in 1..m {
            let term = e_at(i) * p[m - i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        p.push(acc);
    }
    p
}

/// tr(wedge^m A) from the traces p_k = tr(A^k), summed over partitions:
/// sum_{mu |- m} (1/Z_mu) (-1)^{m + len(mu)} prod_j p_{mu_j}.
pub fn exterior_trace_from_powers(p: &[Complex64], m: u32) -> Complex64 {
    if m == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for mu in partitions(m) {
        let mut term = Complex64::new(1.0 / mu.z_f64(), 0.0);
        for &k in mu.parts() {
            term *= p[k as usize - 1];
        }
        if (m as usize + mu.len()) % 2 == 1 {
            term = -term;
        }
        acc += term;
    }
    acc
}

/// D_j^{(k)}(b_1..b_n): the j-th elementary symmetric function of the k-th
/// powers of the roots whose elementary symmetric functions are b.
pub fn dickson_eval(b: &[Complex64], k: usize, j: usize) -> Complex64 {
    if j == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if j > b.len() {
        return Complex64::new(0.0, 0.0);
    }
    let p = newton_p_from_e(b, k * j);
    let sub: Vec<Complex64> = (1..=j).map(|i| p[i * k - 1]).collect();
    newton_e_from_p(&sub)[j]
}
