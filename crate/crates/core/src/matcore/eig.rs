//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::cmatrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition `h = u diag(values) u*` with eigenvalues ascending.
///
/// Input asymmetry above `1e-9·(1+‖h‖)` is rejected; the Hermitian part is diagonalized.
pub fn herm_eig(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("herm_eig needs a square matrix, got {:?}", h.shape())));
    }
    let defect = h.hermitian_defect();
    if defect > 1e-9 * (1.0 + h.norm()) {
        return Err(Error::NonHermitian(defect));
    }
    Ok(jacobi(&h.hermitian_part()))
}

fn jacobi(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.rows();
    let mut a = h.as_slice().to_vec();
    let mut v = CMatrix::identity(n).into_vec();
    let scale = h.norm();
    for i in 0..n {
        a[i * n + i] = C64::new(a[i * n + i].re, 0.0);
    }
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, n, p, q, scale);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut u = CMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            u[(r, new)] = v[r * n + old];
        }
    }
    (values, u)
}

fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize, scale: f64) {
    let z = a[p * n + q];
    let r = z.norm();
    if r <= 1e-300 || r <= 1e-18 * scale {
        a[p * n + q] = ZERO;
        a[q * n + p] = ZERO;
        return;
    }
    let phase = z / r;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = 0.5 * (2.0 * r).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let gpp = C64::new(c, 0.0);
    let gpq = C64::new(s, 0.0);
    let gqp = phase.conj() * (-s);
    let gqq = phase.conj() * c;
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * gpp + akq * gqp;
        a[k * n + q] = akp * gpq + akq * gqq;
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * gpp + vkq * gqp;
        v[k * n + q] = vkp * gpq + vkq * gqq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = gpp.conj() * apk + gqp.conj() * aqk;
        a[q * n + k] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(h: &CMatrix) -> Result<f64> {
    Ok(herm_eig(h)?.0.first().copied().unwrap_or(0.0))
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    let g = if m.rows() <= m.cols() { m.mul_adj(m) } else { m.adj_mul(m) };
    let (vals, _) = jacobi(&g.hermitian_part());
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `f(h) = u f(Λ) u*` for a Hermitian `h`.
pub fn herm_apply(h: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (vals, u) = herm_eig(h)?;
    let fd = CMatrix::diag(&vals.iter().map(|&x| C64::new(f(x), 0.0)).collect::<Vec<_>>());
    Ok(u.matmul(&fd).mul_adj(&u))
}
