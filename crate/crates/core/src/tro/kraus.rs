//! Kraus families and cohomomorphisms `Φ(t) = Σ Aᵢ* t Aᵢ` from `T` to `S`.

use serde::{Deserialize, Serialize};

use super::{sandwich, VerificationReport};
use crate::cstar::OperatorSystem;
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, lambda_min, solve_min_norm, CMatrix, MatSubspace, C64};

/// Operators `Aᵢ ∈ M_{d_T, d_S}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CMatrix>", into = "Vec<CMatrix>")]
pub struct KrausFamily {
    ops: Vec<CMatrix>,
}

impl TryFrom<Vec<CMatrix>> for KrausFamily {
    type Error = Error;

    fn try_from(ops: Vec<CMatrix>) -> Result<Self> {
        KrausFamily::new(ops)
    }
}

impl From<KrausFamily> for Vec<CMatrix> {
    fn from(k: KrausFamily) -> Self {
        k.ops
    }
}

impl KrausFamily {
    /// Checks only that the shapes agree; unitality is part of the verification.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidInput("empty Kraus family".into()));
        };
        let shape = first.shape();
        if let Some(a) = ops.iter().find(|a| a.shape() != shape) {
            return Err(Error::DimensionMismatch(format!("Kraus operators of shapes {shape:?} and {:?}", a.shape())));
        }
        Ok(KrausFamily { ops })
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `Σ Aᵢ* t Aᵢ`.
    pub fn apply(&self, t: &CMatrix) -> CMatrix {
        let (_, c) = self.ops[0].shape();
        let mut out = CMatrix::zeros(c, c);
        for a in &self.ops {
            out = &out + &a.adj_mul(t).matmul(a);
        }
        out
    }
}

/// `Σ Aᵢ*Aᵢ = I` and `Aᵢ* T Aⱼ ⊆ S` for all pairs.
pub fn verify_cohomomorphism(k: &KrausFamily, t: &OperatorSystem, s: &OperatorSystem) -> VerificationReport {
    let mut report = VerificationReport::new();
    if k.ops[0].shape() != (t.size(), s.size()) {
        report.flag(
            "shape",
            false,
            f64::INFINITY,
            Some(serde_json::json!({"kraus": k.ops[0].shape(), "expected": [t.size(), s.size()]})),
        );
        return report;
    }
    let unit = k.apply(&CMatrix::identity(t.size())).dist(&CMatrix::identity(s.size()));
    report.check("unitality", unit, s.tol().eps * (1.0 + s.size() as f64));
    let mut worst = 0.0;
    let mut at = None;
    for (i, a) in k.ops.iter().enumerate() {
        for (j, b) in k.ops.iter().enumerate() {
            for x in t.space().basis() {
                let r = s.space().residual(&a.adj_mul(x).matmul(b)) / (1.0 + a.norm() * b.norm());
                if r > worst {
                    worst = r;
                    at = Some((i, j));
                }
            }
        }
    }
    let ok = worst <= s.tol().eps;
    report.flag("kraus_inclusion", ok, worst, at.map(|(i, j)| serde_json::json!({"pair": [i, j]})));
    report
}

/// `Σ Aᵢ*Bᵢ = I` with `Aᵢ, Bᵢ ∈ X`; `λ_min(Σ Bᵢ*Bᵢ) > 0` certifies that a cohomomorphism `T → S` exists.
#[derive(Clone, Debug, Serialize)]
pub struct KrausWitness {
    pub a: Vec<CMatrix>,
    pub b: Vec<CMatrix>,
    pub min_eig_bstar_b: f64,
    pub invertible: bool,
    pub residual: f64,
}

/// Solves `I = Σ c_pq x_p* x_q` over the basis of `X` and splits the (Hermitian) coefficient
/// matrix by its eigenvectors, so `A = B` when `c ≥ 0`.
pub fn kraus_witness_from_space(x: &MatSubspace, t: &OperatorSystem, s: &OperatorSystem) -> Result<KrausWitness> {
    if x.ambient() != (t.size(), s.size()) {
        return Err(Error::DimensionMismatch(format!(
            "space {:?} between systems of sizes {} and {}",
            x.ambient(),
            t.size(),
            s.size()
        )));
    }
    let adj = x.adjoint_space();
    let (ok, r) = adj.product_span(x)?.contains_identity();
    if !ok {
        return Err(Error::Precondition(format!("I ∉ [X*X] (residual {r:e})")));
    }
    let (ok, r) = s.space().contains_space(&sandwich(&adj, t.space(), x)?)?;
    if !ok {
        return Err(Error::Precondition(format!("X*TX ⊄ S (residual {r:e})")));
    }
    let basis = x.basis();
    let n = basis.len();
    let ds = s.size();
    let cols: Vec<Vec<C64>> =
        (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| basis[p].adj_mul(&basis[q]).into_vec()).collect();
    let (sol, _) = solve_min_norm(&cols, CMatrix::identity(ds).as_slice(), x.tol().eps);
    let c = CMatrix::from_vec_unchecked(n, n, sol).hermitian_part();
    let (vals, w) = herm_eig(&c)?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() <= x.tol().eps {
            continue;
        }
        // y_k = Σ_p conj(w_pk) x_p gives y_k* y_k = Σ w_pk conj(w_qk) x_p* x_q
        let mut y = CMatrix::zeros(t.size(), ds);
        for (p, xp) in basis.iter().enumerate() {
            y.axpy(w[(p, k)].conj(), xp);
        }
        let root = lam.abs().sqrt();
        a.push(y.scale_re(lam.signum() * root));
        b.push(y.scale_re(root));
    }
    let mut sum = CMatrix::zeros(ds, ds);
    let mut bb = CMatrix::zeros(ds, ds);
    for (ai, bi) in a.iter().zip(&b) {
        sum = &sum + &ai.adj_mul(bi);
        bb = &bb + &bi.adj_mul(bi);
    }
    let residual = sum.dist(&CMatrix::identity(ds));
    let min_eig_bstar_b = lambda_min(&bb.hermitian_part())?;
    Ok(KrausWitness { a, b, min_eig_bstar_b, invertible: min_eig_bstar_b > x.tol().eps, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::Tolerance;
    use crate::ncgraph::{graph_system, Graph};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn cohomomorphisms() {
        let m2 = OperatorSystem::full(2, tol());
        let id = KrausFamily::new(vec![CMatrix::identity(2)]).unwrap();
        assert!(verify_cohomomorphism(&id, &m2, &m2).passed());
        let v = CMatrix::from_real(3, 2, &[1., 0., 0., 1., 0., 0.]);
        let k = KrausFamily::new(vec![v]).unwrap();
        let (k3, k2) = (graph_system(&Graph::complete(3), tol()), graph_system(&Graph::complete(2), tol()));
        assert!(verify_cohomomorphism(&k, &k3, &k2).passed());
        let e11 = KrausFamily::new(vec![CMatrix::unit(2, 2, 0, 0)]).unwrap();
        assert_eq!(verify_cohomomorphism(&e11, &m2, &m2).failures(), vec!["unitality"]);
        // V*·S_{P₃}·V leaves D₂ when V picks two adjacent vertices
        let p3 = graph_system(&Graph::path(3), tol());
        let d2 = OperatorSystem::diagonal(2, tol());
        assert_eq!(verify_cohomomorphism(&k, &p3, &d2).failures(), vec!["kraus_inclusion"]);
        assert!(KrausFamily::new(vec![]).is_err());
    }

    #[test]
    fn witnesses_from_spaces() {
        let c = OperatorSystem::scalars(1, tol());
        let m2 = OperatorSystem::full(2, tol());
        let w = kraus_witness_from_space(&MatSubspace::full(2, 1, tol()), &m2, &c).unwrap();
        assert_eq!(w.a.len(), 2);
        for (a, b) in w.a.iter().zip(&w.b) {
            assert!(a.dist(b) < 1e-14);
            assert!((a.norm() - 0.5f64.sqrt()).abs() < 1e-14);
        }
        assert!((w.min_eig_bstar_b - 1.0).abs() < 1e-12 && w.residual < 1e-12);
        let d2 = OperatorSystem::diagonal(2, tol());
        let w = kraus_witness_from_space(d2.space(), &d2, &d2).unwrap();
        let mut diag: Vec<_> = w.a.iter().map(|a| (a[(0, 0)].norm(), a[(1, 1)].norm())).collect();
        diag.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(diag.len(), 2);
        assert!((diag[0].0 - 0.0).abs() < 1e-12 && (diag[0].1 - 1.0).abs() < 1e-12);
        assert!(w.invertible);
        let e12 = MatSubspace::matrix_units(2, 2, &[(0, 1)], tol()).unwrap();
        assert!(matches!(kraus_witness_from_space(&e12, &m2, &m2), Err(Error::Precondition(_))));
    }
}
