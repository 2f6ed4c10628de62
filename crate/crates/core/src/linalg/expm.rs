use num_traits::Zero;

use super::{ComplexMatrix, LinalgError, C64};

// Backward-error thresholds for the [m/m] Padé approximants.
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a Padé core.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let norm = a.one_norm();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    if norm <= THETA_9 {
        let b: &[f64] = if norm <= THETA_3 {
            &B3
        } else if norm <= THETA_5 {
            &B5
        } else if norm <= THETA_7 {
            &B7
        } else {
            &B9
        };
        let (u, v) = pade_low(a, b);
        return solve_pade(&u, &v);
    }

    let s = libm::ceil(libm::log2(norm / THETA_13)).max(0.0) as i32;
    let scaled = a.scale_real(libm::pow(2.0, -f64::from(s)));
    let (u, v) = pade_13(&scaled);
    let mut r = solve_pade(&u, &v)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn add_scaled_identity(m: &mut ComplexMatrix, s: f64) {
    for i in 0..m.rows() {
        m[(i, i)] += C64::new(s, 0.0);
    }
}

/// Odd (`u`) and even (`v`) parts of the Padé numerator for degree ≤ 9.
fn pade_low(a: &ComplexMatrix, b: &[f64]) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let m = b.len() - 1;
    let a2 = a.matmul(a);
    let mut u_inner = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    add_scaled_identity(&mut u_inner, b[1]);
    add_scaled_identity(&mut v, b[0]);
    let mut pow = a2.clone();
    let mut k = 2;
    while k <= m {
        v.axpy(C64::new(b[k], 0.0), &pow);
        if k < m {
            u_inner.axpy(C64::new(b[k + 1], 0.0), &pow);
        }
        k += 2;
        if k <= m {
            pow = pow.matmul(&a2);
        }
    }
    (a.matmul(&u_inner), v)
}

fn pade_13(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let b = &B13;
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let c = |x: f64| C64::new(x, 0.0);

    let mut w1 = a6.scale_real(b[13]);
    w1.axpy(c(b[11]), &a4);
    w1.axpy(c(b[9]), &a2);
    let mut u_inner = a6.matmul(&w1);
    u_inner.axpy(c(b[7]), &a6);
    u_inner.axpy(c(b[5]), &a4);
    u_inner.axpy(c(b[3]), &a2);
    add_scaled_identity(&mut u_inner, b[1]);
    let u = a.matmul(&u_inner);

    let mut z1 = a6.scale_real(b[12]);
    z1.axpy(c(b[10]), &a4);
    z1.axpy(c(b[8]), &a2);
    let mut v = a6.matmul(&z1);
    v.axpy(c(b[6]), &a6);
    v.axpy(c(b[4]), &a4);
    v.axpy(c(b[2]), &a2);
    add_scaled_identity(&mut v, b[0]);
    (u, v)
}

/// `(v - u)^{-1} (v + u)`.
fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let p = v + u;
    let q = v - u;
    lu_solve(&q, &p)
}

/// `col[k+1..] -= l * col[k]`.
fn eliminate(l: &[C64], col: &mut [C64], k: usize) {
    let t = col[k];
    if t.is_zero() {
        return;
    }
    for (c, &f) in col[k + 1..].iter_mut().zip(l) {
        *c -= f * t;
    }
}

/// Solves `a x = b` by LU decomposition with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if b.rows() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.rows(),
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs();
    let nrhs = x.cols();
    let (lu_d, x_d) = (lu.as_mut_slice(), x.as_mut_slice());
    // column-major: element (r, c) sits at c * n + r
    for k in 0..n {
        let (piv, pmag) = (k..n)
            .map(|r| (r, lu_d[k * n + r].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag <= f64::EPSILON * scale * n as f64 || pmag == 0.0 {
            return Err(LinalgError::Singular);
        }
        if piv != k {
            for c in 0..n {
                lu_d.swap(c * n + k, c * n + piv);
            }
            for c in 0..nrhs {
                x_d.swap(c * n + k, c * n + piv);
            }
        }
        let inv = C64::new(1.0, 0.0) / lu_d[k * n + k];
        for v in &mut lu_d[k * n + k + 1..(k + 1) * n] {
            *v *= inv;
        }
        let (head, tail) = lu_d.split_at_mut((k + 1) * n);
        let lcol = &head[k * n + k + 1..];
        for col in tail.chunks_exact_mut(n) {
            eliminate(lcol, col, k);
        }
        for col in x_d.chunks_exact_mut(n) {
            eliminate(lcol, col, k);
        }
    }
    for col in x_d.chunks_exact_mut(n) {
        for k in (0..n).rev() {
            let xk = col[k] / lu_d[k * n + k];
            col[k] = xk;
            if xk.is_zero() {
                continue;
            }
            for (c, &l) in col[..k].iter_mut().zip(&lu_d[k * n..k * n + k]) {
                *c -= l * xk;
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::super::pauli::sigma_z;
    use super::super::test_support::{random_hermitian, random_matrix};
    use super::*;
    use crate::linalg::c64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Truncated Taylor series with many terms after heavy scaling; slow but
    /// independent of the Padé path.
    fn taylor_expm(a: &ComplexMatrix) -> ComplexMatrix {
        let s = 12;
        let b = a.scale_real(1.0 / f64::from(1 << s));
        let n = a.rows();
        let mut sum = ComplexMatrix::identity(n);
        let mut term = ComplexMatrix::identity(n);
        for k in 1..30 {
            term = term.matmul(&b).scale_real(1.0 / k as f64);
            sum += &term;
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn zero_and_diagonal() {
        let z = ComplexMatrix::zeros(3, 3);
        assert!(expm(&z).unwrap().approx_eq(&ComplexMatrix::identity(3), 0.0));
        let theta = 0.7;
        let e = expm(&sigma_z().scale(c64(0.0, theta))).unwrap();
        let expect = ComplexMatrix::diagonal(&[c64(0.0, theta).exp(), c64(0.0, -theta).exp()]);
        assert!(e.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn inverse_check_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for target in [0.01, 0.2, 0.9, 2.0, 5.0] {
            let a = random_matrix(&mut rng, 8, 8);
            let a = a.scale_real(target / a.one_norm());
            let e = expm(&a).unwrap();
            let f = expm(&a.scale_real(-1.0)).unwrap();
            assert!(e.matmul(&f).approx_eq(&ComplexMatrix::identity(8), 1e-9), "norm {target}");
        }
    }

    #[test]
    fn matches_independent_taylor_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for target in [0.005, 0.1, 0.5, 1.5, 4.0, 20.0] {
            let a = random_matrix(&mut rng, 6, 6);
            let a = a.scale_real(target / a.one_norm());
            let e = expm(&a).unwrap();
            let t = taylor_expm(&a);
            let rel = e.max_abs_diff(&t) / t.max_abs();
            assert!(rel < 1e-10, "norm {target}: rel {rel}");
        }
    }

    #[test]
    fn anti_hermitian_gives_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h = random_hermitian(&mut rng, 10).scale_real(3.0);
        let u = expm(&h.scale(c64(0.0, -1.0))).unwrap();
        let utu = u.adjoint().matmul(&u);
        assert!(utu.approx_eq(&ComplexMatrix::identity(10), 1e-9));
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = ComplexMatrix::zeros(2, 2);
        a[(0, 1)] = c64(f64::NAN, 0.0);
        assert_eq!(expm(&a), Err(LinalgError::NonFinite));
    }

    #[test]
    fn lu_solve_recovers_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = random_matrix(&mut rng, 7, 7);
        let x = random_matrix(&mut rng, 7, 3);
        let b = a.matmul(&x);
        assert!(lu_solve(&a, &b).unwrap().approx_eq(&x, 1e-10));
        assert_eq!(lu_solve(&ComplexMatrix::zeros(2, 2), &ComplexMatrix::identity(2)), Err(LinalgError::Singular));
    }
}
