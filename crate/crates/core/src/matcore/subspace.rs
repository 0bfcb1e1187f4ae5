use serde::{Deserialize, Serialize};

use super::cmatrix::{dot, norm, CMatrix, C64, ZERO};
use super::Tolerance;
use crate::error::{Error, Result};

/// Incremental modified Gram–Schmidt with one re-orthogonalization pass.
#[derive(Clone, Debug)]
pub(crate) struct Orthonormalizer {
    len: usize,
    eps: f64,
    pub(crate) q: Vec<Vec<C64>>,
}

impl Orthonormalizer {
    pub(crate) fn new(len: usize, eps: f64) -> Self {
        Orthonormalizer { len, eps, q: Vec::new() }
    }

    pub(crate) fn is_full(&self) -> bool {
        self.q.len() >= self.len
    }

    /// Removes the components along the current basis; returns the accumulated coefficients.
    fn project_out(&self, w: &mut [C64]) -> Vec<C64> {
        let mut coeffs = vec![ZERO; self.q.len()];
        for _pass in 0..2 {
            for (k, q) in self.q.iter().enumerate() {
                let c = dot(w, q);
                if c != ZERO {
                    for (x, y) in w.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                    coeffs[k] += c;
                }
            }
        }
        coeffs
    }

    /// Adds `v` if its residual exceeds `eps·(1+‖v‖)`. Returns the projection coefficients,
    /// the residual norm and whether a new vector was appended.
    pub(crate) fn push(&mut self, v: &[C64]) -> (Vec<C64>, f64, bool) {
        debug_assert_eq!(v.len(), self.len);
        let scale = norm(v);
        let mut w = v.to_vec();
        let coeffs = self.project_out(&mut w);
        let r = norm(&w);
        if self.is_full() || r <= self.eps * (1.0 + scale) {
            return (coeffs, r, false);
        }
        let inv = 1.0 / r;
        self.q.push(w.into_iter().map(|x| x * inv).collect());
        (coeffs, r, true)
    }
}

/// Linear subspace of `rows × cols` complex matrices with a Hilbert–Schmidt orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MatSubspace {
    rows: usize,
    cols: usize,
    basis: Vec<CMatrix>,
    tol: Tolerance,
}

#[derive(Serialize, Deserialize)]
struct MatSubspaceJson {
    ambient: [usize; 2],
    basis: Vec<CMatrix>,
}

impl Serialize for MatSubspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatSubspaceJson { ambient: [self.rows, self.cols], basis: self.basis.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatSubspace {
    /// Input bases need not be orthonormal; they are re-orthonormalized with the default tolerance.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatSubspaceJson::deserialize(d)?;
        MatSubspace::new(raw.ambient[0], raw.ambient[1], &raw.basis, Tolerance::default())
            .map_err(serde::de::Error::custom)
    }
}

impl MatSubspace {
    /// Orthonormal basis of the span of `mats`.
    pub fn new(rows: usize, cols: usize, mats: &[CMatrix], tol: Tolerance) -> Result<Self> {
        Ok(Self::with_coefficients(rows, cols, mats, tol)?.0)
    }

    /// Like [`MatSubspace::new`], also returning `coeffs` with `basis[k] = Σ_i coeffs[k][i]·mats[i]`.
    pub fn with_coefficients(
        rows: usize,
        cols: usize,
        mats: &[CMatrix],
        tol: Tolerance,
    ) -> Result<(Self, Vec<Vec<C64>>)> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!("empty ambient {rows}x{cols}")));
        }
        if let Some(m) = mats.iter().find(|m| m.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch(format!(
                "matrix of shape {:?} in a subspace of {rows}x{cols} matrices",
                m.shape()
            )));
        }
        let vecs: Vec<&[C64]> = mats.iter().map(CMatrix::as_slice).collect();
        let (q, expr) = gram_schmidt_tracked(&vecs, rows * cols, tol.eps);
        let basis = q.into_iter().map(|v| CMatrix::from_vec_unchecked(rows, cols, v)).collect();
        Ok((MatSubspace { rows, cols, basis, tol }, expr))
    }

    pub fn zero(rows: usize, cols: usize, tol: Tolerance) -> Self {
        MatSubspace { rows, cols, basis: Vec::new(), tol }
    }

    /// All of `M_{rows,cols}`, with the matrix units as basis.
    pub fn full(rows: usize, cols: usize, tol: Tolerance) -> Self {
        let basis = (0..rows).flat_map(|i| (0..cols).map(move |j| CMatrix::unit(rows, cols, i, j))).collect();
        MatSubspace { rows, cols, basis, tol }
    }

    /// Span of the listed matrix units.
    pub fn matrix_units(rows: usize, cols: usize, pattern: &[(usize, usize)], tol: Tolerance) -> Result<Self> {
        let mats: Vec<_> = pattern.iter().map(|&(i, j)| CMatrix::unit(rows, cols, i, j)).collect();
        Self::new(rows, cols, &mats, tol)
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    fn check_shape(&self, m: &CMatrix) -> Result<()> {
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::DimensionMismatch(format!(
                "matrix of shape {:?} against a subspace of {}x{} matrices",
                m.shape(),
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }

    /// Coefficients `⟨m, b_k⟩` of `m` along the basis.
    pub fn coords(&self, m: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| m.inner(b)).collect()
    }

    pub fn combine(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out.axpy(*c, b);
        }
        out
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, m: &CMatrix) -> CMatrix {
        let mut w = m.clone();
        for _pass in 0..2 {
            for b in &self.basis {
                let c = w.inner(b);
                w.axpy(-c, b);
            }
        }
        m - &w
    }

    /// Hilbert–Schmidt distance from `m` to the subspace.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        let mut w = m.as_slice().to_vec();
        for _pass in 0..2 {
            for b in &self.basis {
                let c = dot(&w, b.as_slice());
                for (x, y) in w.iter_mut().zip(b.as_slice()) {
                    *x -= c * y;
                }
            }
        }
        norm(&w)
    }

    /// `(flag, residual)` with `flag ⇔ residual ≤ eps·(1+‖m‖)`.
    pub fn contains(&self, m: &CMatrix) -> Result<(bool, f64)> {
        self.check_shape(m)?;
        let r = self.residual(m);
        Ok((r <= self.tol.eps * (1.0 + m.norm()), r))
    }

    /// Whether every basis element of `other` lies in `self`; returns the worst residual.
    pub fn contains_space(&self, other: &MatSubspace) -> Result<(bool, f64)> {
        if other.ambient() != self.ambient() {
            return Err(Error::DimensionMismatch(format!(
                "subspaces of {:?} and {:?} matrices",
                self.ambient(),
                other.ambient()
            )));
        }
        let worst = other.basis.iter().map(|b| self.residual(b)).fold(0.0, f64::max);
        Ok((worst <= self.tol.eps * 2.0, worst))
    }

    /// Mutual containment; returns the worst residual in either direction.
    pub fn equals(&self, other: &MatSubspace) -> Result<(bool, f64)> {
        let (a, ra) = self.contains_space(other)?;
        let (b, rb) = other.contains_space(self)?;
        Ok((a && b && self.dim() == other.dim(), ra.max(rb)))
    }

    pub fn contains_identity(&self) -> (bool, f64) {
        if self.rows != self.cols {
            return (false, f64::INFINITY);
        }
        let id = CMatrix::identity(self.rows);
        let r = self.residual(&id);
        (r <= self.tol.eps * (1.0 + id.norm()), r)
    }

    pub fn adjoint_space(&self) -> MatSubspace {
        MatSubspace {
            rows: self.cols,
            cols: self.rows,
            basis: self.basis.iter().map(CMatrix::adjoint).collect(),
            tol: self.tol,
        }
    }

    /// Span of all products `xy`.
    pub fn product_span(&self, other: &MatSubspace) -> Result<MatSubspace> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {:?} and {:?} subspaces",
                self.ambient(),
                other.ambient()
            )));
        }
        let (r, c) = (self.rows, other.cols);
        let mut on = Orthonormalizer::new(r * c, self.tol.eps);
        'outer: for x in &self.basis {
            for y in &other.basis {
                if on.is_full() {
                    break 'outer;
                }
                on.push(x.matmul(y).as_slice());
            }
        }
        let basis = on.q.into_iter().map(|v| CMatrix::from_vec_unchecked(r, c, v)).collect();
        Ok(MatSubspace { rows: r, cols: c, basis, tol: self.tol })
    }

    /// Span of `{a x b : x ∈ self}`.
    pub fn conjugate_by(&self, a: &CMatrix, b: &CMatrix) -> Result<MatSubspace> {
        if a.cols() != self.rows || self.cols != b.rows() {
            return Err(Error::DimensionMismatch("conjugation shapes".into()));
        }
        let mats: Vec<_> = self.basis.iter().map(|x| a.matmul(x).matmul(b)).collect();
        MatSubspace::new(a.rows(), b.cols(), &mats, self.tol)
    }

    pub fn sum(&self, other: &MatSubspace) -> Result<MatSubspace> {
        if self.ambient() != other.ambient() {
            return Err(Error::DimensionMismatch("sum of subspaces with different ambients".into()));
        }
        let mut on = Orthonormalizer::new(self.rows * self.cols, self.tol.eps);
        on.q = self.basis.iter().map(|b| b.as_slice().to_vec()).collect();
        for b in &other.basis {
            if on.is_full() {
                break;
            }
            on.push(b.as_slice());
        }
        let basis = on.q.into_iter().map(|v| CMatrix::from_vec_unchecked(self.rows, self.cols, v)).collect();
        Ok(MatSubspace { rows: self.rows, cols: self.cols, basis, tol: self.tol })
    }

    pub fn intersect(&self, other: &MatSubspace) -> Result<MatSubspace> {
        if self.ambient() != other.ambient() {
            return Err(Error::DimensionMismatch("intersection of subspaces with different ambients".into()));
        }
        // c ↦ (I − P_self)(Σ c_k y_k) has kernel = coordinates of the intersection in `other`.
        let cols: Vec<Vec<C64>> = other.basis.iter().map(|y| (y - &self.project(y)).into_vec()).collect();
        let ker = kernel(&cols, other.dim(), self.rows * self.cols, self.tol.eps);
        let mats: Vec<_> = ker.iter().map(|c| other.combine(c)).collect();
        MatSubspace::new(self.rows, self.cols, &mats, self.tol)
    }

    /// `M_k(S)`: block matrices `E_ij ⊗ s`.
    pub fn amplify(&self, k: usize) -> Result<MatSubspace> {
        if k == 0 {
            return Err(Error::InvalidInput("amplification level must be positive".into()));
        }
        let mut basis = Vec::with_capacity(k * k * self.dim());
        for i in 0..k {
            for j in 0..k {
                let e = CMatrix::unit(k, k, i, j);
                for b in &self.basis {
                    basis.push(e.kron(b));
                }
            }
        }
        Ok(MatSubspace { rows: k * self.rows, cols: k * self.cols, basis, tol: self.tol })
    }

    /// Real-orthonormal Hermitian basis of a self-adjoint subspace; its complex span is `self`.
    pub fn hermitian_basis(&self) -> Vec<CMatrix> {
        assert_eq!(self.rows, self.cols, "hermitian basis needs a square ambient");
        let mut out: Vec<CMatrix> = Vec::new();
        let i = C64::new(0.0, 1.0);
        for b in &self.basis {
            let re = b.hermitian_part();
            let im = b.scale(-i).hermitian_part();
            for mut h in [re, im] {
                if out.len() == self.dim() {
                    return out;
                }
                let scale = h.norm();
                for _pass in 0..2 {
                    for q in &out {
                        let c = h.inner(q).re;
                        h.axpy(C64::new(-c, 0.0), q);
                    }
                }
                let r = h.norm();
                if r > self.tol.eps * (1.0 + scale) {
                    out.push(h.scale_re(1.0 / r));
                }
            }
        }
        out
    }

    /// Worst `|⟨b_i,b_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Orthonormal basis of `span(mats)`.
pub fn orthonormal_basis(mats: &[CMatrix], tol: Tolerance) -> Result<MatSubspace> {
    let (r, c) = mats
        .first()
        .map(CMatrix::shape)
        .ok_or_else(|| Error::InvalidInput("cannot infer ambient of an empty list".into()))?;
    MatSubspace::new(r, c, mats, tol)
}

pub fn contains(space: &MatSubspace, m: &CMatrix) -> Result<(bool, f64)> {
    space.contains(m)
}

pub fn product_span(x: &MatSubspace, y: &MatSubspace) -> Result<MatSubspace> {
    x.product_span(y)
}

pub fn adjoint_space(x: &MatSubspace) -> MatSubspace {
    x.adjoint_space()
}

/// Orthonormal basis of `{c ∈ ℂ^nvars : Σ_k c_k cols[k] = 0}`; each column has length `len`.
pub(crate) fn kernel(cols: &[Vec<C64>], nvars: usize, len: usize, eps: f64) -> Vec<Vec<C64>> {
    debug_assert_eq!(cols.len(), nvars);
    // Row i of the linear map, conjugated, is orthogonal to every kernel vector.
    let mut rows = Orthonormalizer::new(nvars, eps);
    for i in 0..len {
        if rows.is_full() {
            return Vec::new();
        }
        let row: Vec<C64> = cols.iter().map(|c| c[i].conj()).collect();
        if row.iter().all(|z| *z == ZERO) {
            continue;
        }
        rows.push(&row);
    }
    let rank = rows.q.len();
    for j in 0..nvars {
        if rows.is_full() {
            break;
        }
        let mut e = vec![ZERO; nvars];
        e[j] = C64::new(1.0, 0.0);
        rows.push(&e);
    }
    rows.q.split_off(rank)
}

/// Gram–Schmidt that also returns `expr` with `q[k] = Σ_i expr[k][i]·vecs[i]`.
pub(crate) fn gram_schmidt_tracked(vecs: &[&[C64]], len: usize, eps: f64) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let n = vecs.len();
    let mut on = Orthonormalizer::new(len, eps);
    let mut expr: Vec<Vec<C64>> = Vec::new();
    for (i, v) in vecs.iter().enumerate() {
        if on.is_full() {
            break;
        }
        let (c, r, added) = on.push(v);
        if added {
            let mut e = vec![ZERO; n];
            e[i] = C64::new(1.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                for (x, y) in e.iter_mut().zip(&expr[k]) {
                    *x -= ck * y;
                }
            }
            let inv = 1.0 / r;
            expr.push(e.into_iter().map(|x| x * inv).collect());
        }
    }
    (on.q, expr)
}

/// Minimum-norm solution of `Σ_k c_k cols[k] = rhs`, with the residual norm.
pub(crate) fn solve_min_norm(cols: &[Vec<C64>], rhs: &[C64], eps: f64) -> (Vec<C64>, f64) {
    let n = cols.len();
    let len = rhs.len();
    let vecs: Vec<&[C64]> = cols.iter().map(Vec::as_slice).collect();
    let (q, expr) = gram_schmidt_tracked(&vecs, len, eps);
    let mut sol = vec![ZERO; n];
    for (q, e) in q.iter().zip(&expr) {
        let beta = dot(rhs, q);
        for (x, y) in sol.iter_mut().zip(e) {
            *x += beta * y;
        }
    }
    for k in kernel(cols, n, len, eps) {
        let c = dot(&sol, &k);
        for (x, y) in sol.iter_mut().zip(&k) {
            *x -= c * y;
        }
    }
    let mut res = rhs.to_vec();
    for (c, col) in sol.iter().zip(cols) {
        for (x, y) in res.iter_mut().zip(col) {
            *x -= c * y;
        }
    }
    (sol, norm(&res))
}
