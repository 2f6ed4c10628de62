use alloc::vec::Vec;

use num_traits::Zero;

use super::{ComplexMatrix, LinalgError, C64, HERMITICITY_TOL};

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V^†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let col = v.col(k);
            for c in 0..n {
                let vc = col[c].conj() * w;
                for r in 0..n {
                    out[(r, c)] += col[r] * vc;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi eigen-solver for Hermitian matrices.
///
/// Rejects input whose largest `|a - a^†|` entry exceeds [`HERMITICITY_TOL`];
/// the Hermitian part is diagonalized otherwise.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let err = a.hermiticity_error();
    if err > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian(err));
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();

    if scale > 0.0 {
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|c| (0..n).filter(move |&r| r != c).map(move |r| (r, c)))
                .map(|(r, c)| m[(r, c)].norm_sqr())
                .sum();
            if libm::sqrt(off) <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues only, via Householder tridiagonalization and
/// implicit QL. Same input checks as [`herm_eig`].
pub fn herm_eigvals(a: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let err = a.hermiticity_error();
    if err > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian(err));
    }
    let (mut d, mut e) = tridiagonalize(a.hermitian_part());
    if !tridiagonal_ql(&mut d, &mut e) {
        return herm_eig(a).map(|e| e.values);
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Diagonal and |sub-diagonal| of a unitarily similar real tridiagonal
/// matrix. `e[n - 1] = 0`.
fn tridiagonalize(mut m: ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.rows();
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n];
    let mut v: Vec<C64> = Vec::with_capacity(n);
    let mut p: Vec<C64> = Vec::with_capacity(n);
    for k in 0..n {
        d[k] = m[(k, k)].re;
        if k + 1 >= n {
            break;
        }
        let x = &m.col(k)[k + 1..];
        let norm = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        v.clear();
        v.extend_from_slice(x);
        v[0] -= alpha;
        let vn = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        e[k] = norm;
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // trailing block B <- H B H with H = I - 2 v v†
        let off = k + 1;
        let len = n - off;
        p.clear();
        p.resize(len, C64::zero());
        for c in 0..len {
            let vc = v[c];
            let col = &m.col(off + c)[off..];
            for (pr, &b) in p.iter_mut().zip(col) {
                *pr += b * vc;
            }
        }
        let kk: C64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        for (pr, &vr) in p.iter_mut().zip(&v) {
            *pr -= vr * kk.re;
        }
        for c in 0..len {
            let (vc, pc) = (v[c].conj(), p[c].conj());
            for r in 0..len {
                let upd = v[r] * pc + p[r] * vc;
                m[(off + r, off + c)] -= upd * 2.0;
            }
        }
    }
    (d, e)
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal
/// matrix; eigenvalues left in `d`. Returns false if it fails to converge.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> bool {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return false;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    true
}

/// One Jacobi rotation zeroing the `(p, q)` entry.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    if mag < 1e-300 || mag <= 1e-18 * (app.abs() + aqq.abs()) {
        m[(p, q)] = C64::zero();
        m[(q, p)] = C64::zero();
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + libm::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    let s = t * c;
    // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
    let upp = C64::new(c, 0.0);
    let upq = C64::new(s, 0.0);
    let uqp = phase.conj() * (-s);
    let uqq = phase.conj() * c;

    let n = m.rows();
    for k in 0..n {
        let (akp, akq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = akp * upp + akq * uqp;
        m[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let (apk, aqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        m[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
    m[(p, q)] = C64::zero();
    m[(q, p)] = C64::zero();
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}
