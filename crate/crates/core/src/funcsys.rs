//! Centres of operator systems, the isomorphism `ϑ(a) = Σ mₙ a mₙ*` between function systems
//! and between centres, Toeplitz systems, and the structure of systems equivalent to a rigid one.

use serde::Serialize;

use crate::cstar::{
    amplify, block_decompose, center, generated_algebra, is_rigid, multiplier_algebra, Block, OperatorSystem,
};
use crate::error::{Error, Result};
use crate::matcore::{herm_apply, herm_eig, CMatrix, MatSubspace, Tolerance, C64};
use crate::tro::{quasi_unit, verify_tro_equivalence, Side, Tro, VerificationReport};

/// `Z(S) = Z(C*(S)) ∩ S`, with `C*(S)` standing in for the C*-envelope.
#[derive(Clone, Debug, Serialize)]
pub struct CentreCertificate {
    pub centre: MatSubspace,
    /// `commutators[(i, j)] = ‖z_i a_j − a_j z_i‖` against the basis `a_j` of `C*(S)`.
    pub commutators: CMatrix,
    pub worst_commutator: f64,
    pub assumption: String,
}

pub fn centre_system(s: &OperatorSystem) -> CentreCertificate {
    let algebra = generated_algebra(s);
    let centre = center(&algebra).space().intersect(s.space()).expect("same ambient");
    let ab = algebra.space().basis();
    let mut commutators = CMatrix::zeros(centre.dim(), ab.len());
    let mut worst: f64 = 0.0;
    for (i, z) in centre.basis().iter().enumerate() {
        for (j, a) in ab.iter().enumerate() {
            let r = z.matmul(a).dist(&a.matmul(z));
            worst = worst.max(r);
            commutators.set_block(i, j, &CMatrix::diag(&[C64::new(r, 0.0)]));
        }
    }
    CentreCertificate {
        centre,
        commutators,
        worst_commutator: worst,
        assumption: "the generated C*-algebra is taken as the C*-envelope".into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    /// `C*(S)` and `C*(T)` commutative; `ϑ` between the generated algebras.
    Commutative,
    /// `ϑ` restricted to `Z(S) → Z(T)`.
    Centre,
}

/// `ϑ` as a matrix on coefficients: column `k` holds the codomain coordinates of `ϑ(domain_k)`.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaMap {
    pub mode: ThetaMode,
    pub domain: MatSubspace,
    pub codomain: MatSubspace,
    pub matrix: CMatrix,
    pub report: VerificationReport,
}

fn conj_sum(units: &[CMatrix], a: &CMatrix) -> CMatrix {
    let (r, _) = units[0].shape();
    let mut out = CMatrix::zeros(r, r);
    for m in units {
        out = &out + &m.matmul(a).mul_adj(m);
    }
    out
}

fn conj_sum_adj(units: &[CMatrix], c: &CMatrix) -> CMatrix {
    let (_, k) = units[0].shape();
    let mut out = CMatrix::zeros(k, k);
    for m in units {
        out = &out + &m.adj_mul(c).matmul(m);
    }
    out
}

/// `ϑ(a) = Σ mₙ a mₙ*` with `Σ mₙ mₙ* = 1_T`, inverse `φ(c) = Σ m̃ₙ* c m̃ₙ` with `Σ m̃ₙ* m̃ₙ = 1_S`.
pub fn theta_iso(m: &Tro, s: &OperatorSystem, t: &OperatorSystem, mode: ThetaMode) -> Result<ThetaMap> {
    let eq = verify_tro_equivalence(s, t, m.space());
    if !eq.passed() {
        return Err(Error::Precondition(format!("not a TRO-equivalence: {:?}", eq.failures())));
    }
    let eps = s.tol().eps;
    let left = quasi_unit(m, Side::Left)?;
    let right = quasi_unit(m, Side::Right)?;
    let (domain, codomain) = match mode {
        ThetaMode::Commutative => {
            let (a, b) = (generated_algebra(s), generated_algebra(t));
            let (ca, ra) = a.is_commutative();
            let (cb, rb) = b.is_commutative();
            if !(ca && cb) {
                return Err(Error::Precondition(format!(
                    "generated algebras are not commutative (commutators {ra:e}, {rb:e}); use the centre mode"
                )));
            }
            (a.space().clone(), b.space().clone())
        }
        ThetaMode::Centre => (centre_system(s).centre, centre_system(t).centre),
    };
    let images: Vec<CMatrix> = domain.basis().iter().map(|a| conj_sum(&left, a)).collect();
    let mut matrix = CMatrix::zeros(codomain.dim(), domain.dim());
    for (k, img) in images.iter().enumerate() {
        let c: Vec<C64> = codomain.coords(img);
        matrix.set_block(0, k, &CMatrix::from_columns(codomain.dim(), &[c]));
    }
    let mut report = VerificationReport::new();
    let bound = |scale: f64| 10.0 * eps * (1.0 + scale);
    let unit = conj_sum(&left, &CMatrix::identity(s.size())).dist(&CMatrix::identity(t.size()));
    report.check("unitality", unit, bound(t.size() as f64));
    let range = images.iter().map(|x| codomain.residual(x)).fold(0.0, f64::max);
    report.check("range", range, bound(1.0));
    if mode == ThetaMode::Commutative {
        let b = domain.basis();
        let mut worst: f64 = 0.0;
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                worst = worst.max(conj_sum(&left, &x.matmul(y)).dist(&images[i].matmul(&images[j])));
            }
        }
        report.check("multiplicativity", worst, bound(1.0));
    }
    let back = domain.basis().iter().zip(&images).map(|(a, x)| conj_sum_adj(&right, x).dist(a)).fold(0.0, f64::max);
    report.check("inverse_left", back, bound(1.0));
    let forth = codomain
        .basis()
        .iter()
        .map(|c| conj_sum(&left, &conj_sum_adj(&right, c)).dist(c))
        .fold(0.0, f64::max);
    report.check("inverse_right", forth, bound(1.0));
    let pre = codomain.basis().iter().map(|c| domain.residual(&conj_sum_adj(&right, c))).fold(0.0, f64::max);
    report.check("inverse_range", pre, bound(1.0));
    report.flag(
        "bijective",
        domain.dim() == codomain.dim(),
        (domain.dim() as f64 - codomain.dim() as f64).abs(),
        Some(serde_json::json!({"domain_dim": domain.dim(), "codomain_dim": codomain.dim()})),
    );
    Ok(ThetaMap { mode, domain, codomain, matrix, report })
}

/// `span{Sʲ : |j| < n}` with `(Sʲ)_{ik} = δ_{i−k, j}`.
pub fn toeplitz_system(n: usize, tol: Tolerance) -> Result<OperatorSystem> {
    if n == 0 {
        return Err(Error::InvalidInput("Toeplitz size must be positive".into()));
    }
    let shifts: Vec<CMatrix> = (-(n as isize) + 1..n as isize)
        .map(|j| {
            let mut x = CMatrix::zeros(n, n);
            for k in 0..n {
                let i = k as isize + j;
                if (0..n as isize).contains(&i) {
                    x.set_block(i as usize, k, &CMatrix::identity(1));
                }
            }
            x
        })
        .collect();
    OperatorSystem::from_matrices(n, &shifts, tol)
}

/// `T ≅ M_k(S)` for `S` rigid: an orthonormal family `{mᵢ}` of the TRO with `mᵢ*mⱼ = δᵢⱼ I` and
/// `Σ mᵢmᵢ* = I`, and `φ(t) = [mᵢ* t mⱼ]`.
#[derive(Clone, Debug, Serialize)]
pub struct RigidStructure {
    pub k: usize,
    pub family: Vec<CMatrix>,
    pub gram_spectrum: Vec<f64>,
    pub relation_residual: f64,
    /// `φ(t)` on the basis of `T`, as `k × k` block matrices over `S`.
    pub phi_images: Vec<CMatrix>,
    /// `max ‖ψ(φ(t)) − t‖` and `max ‖φ(ψ(y)) − y‖`, with the distance of `φ(T)` from `M_k(S)`.
    pub residual: f64,
    pub multiplier_blocks: Vec<Block>,
}

pub fn rigid_stable_structure(s: &OperatorSystem, t: &OperatorSystem, m: &Tro) -> Result<RigidStructure> {
    if !is_rigid(s) {
        return Err(Error::NotRigid(multiplier_algebra(s).dim()));
    }
    let eq = verify_tro_equivalence(s, t, m.space());
    if !eq.passed() {
        return Err(Error::Precondition(format!("not a TRO-equivalence: {:?}", eq.failures())));
    }
    let eps = s.tol().eps;
    let ds = s.size() as f64;
    let b = m.space().basis();
    let k = b.len();
    // x*y is scalar because [M*M] ⊆ A_S = ℂ·I
    let mut gram = CMatrix::zeros(k, k);
    for (i, x) in b.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            gram.set_block(i, j, &CMatrix::diag(&[x.adj_mul(y).trace() / ds]));
        }
    }
    let (spectrum, _) = herm_eig(&gram.hermitian_part())?;
    if spectrum[0] <= eps {
        return Err(Error::Precondition(format!("pairing is degenerate, Gram spectrum {spectrum:?}")));
    }
    let inv_sqrt = herm_apply(&gram.hermitian_part(), |x| 1.0 / x.sqrt())?;
    let family: Vec<CMatrix> = (0..k)
        .map(|i| {
            let mut acc = CMatrix::zeros(t.size(), s.size());
            for (a, x) in b.iter().enumerate() {
                acc.axpy(inv_sqrt[(a, i)], x);
            }
            acc
        })
        .collect();
    let mut relation: f64 = 0.0;
    let mut sum = CMatrix::zeros(t.size(), t.size());
    for (i, x) in family.iter().enumerate() {
        sum = &sum + &x.mul_adj(x);
        for (j, y) in family.iter().enumerate() {
            let target = if i == j { CMatrix::identity(s.size()) } else { CMatrix::zeros(s.size(), s.size()) };
            relation = relation.max(x.adj_mul(y).dist(&target));
        }
    }
    relation = relation.max(sum.dist(&CMatrix::identity(t.size())));
    if relation > 10.0 * eps * (1.0 + k as f64) {
        return Err(Error::Precondition(format!(
            "orthogonality relations fail by {relation:e}, Gram spectrum {spectrum:?}"
        )));
    }
    let dsz = s.size();
    let phi = |x: &CMatrix| {
        let mut out = CMatrix::zeros(k * dsz, k * dsz);
        for (i, mi) in family.iter().enumerate() {
            let left = mi.adj_mul(x);
            for (j, mj) in family.iter().enumerate() {
                out.set_block(i * dsz, j * dsz, &left.matmul(mj));
            }
        }
        out
    };
    let psi = |y: &CMatrix| {
        let mut out = CMatrix::zeros(t.size(), t.size());
        for (i, mi) in family.iter().enumerate() {
            for (j, mj) in family.iter().enumerate() {
                out = &out + &mi.matmul(&y.block(i * dsz, j * dsz, dsz, dsz)).mul_adj(mj);
            }
        }
        out
    };
    let mk = amplify(s, k)?;
    let phi_images: Vec<CMatrix> = t.space().basis().iter().map(&phi).collect();
    let mut residual: f64 = 0.0;
    for (x, y) in t.space().basis().iter().zip(&phi_images) {
        residual = residual.max(psi(y).dist(x)).max(mk.space().residual(y));
    }
    for y in mk.space().basis() {
        residual = residual.max(phi(&psi(y)).dist(y)).max(t.space().residual(&psi(y)));
    }
    let multiplier_blocks = block_decompose(&multiplier_algebra(t))?.blocks;
    Ok(RigidStructure { k, family, gram_spectrum: spectrum, relation_residual: relation, phi_images, residual, multiplier_blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncgraph::{decide_delta_graphs, graph_system, pattern_tro, synthesize_graph_tro, Graph, VertexMap};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn centres() {
        assert_eq!(centre_system(&OperatorSystem::full(3, tol())).centre.dim(), 1);
        let d3 = OperatorSystem::diagonal(3, tol());
        assert!(centre_system(&d3).centre.equals(d3.space()).unwrap().0);
        let g = graph_system(&Graph::complete(2).disjoint_union(&Graph::empty(1)), tol());
        let c = centre_system(&g);
        assert_eq!(c.centre.dim(), 2);
        assert!(c.worst_commutator < 1e-12);
        let p = CMatrix::from_real(3, 3, &[1., 0., 0., 0., 1., 0., 0., 0., 0.]);
        assert!(c.centre.contains(&p).unwrap().0);
    }

    #[test]
    fn theta_on_diagonal_systems() {
        let d2 = OperatorSystem::diagonal(2, tol());
        let m = Tro::new(d2.space().clone()).unwrap();
        let th = theta_iso(&m, &d2, &d2, ThetaMode::Commutative).unwrap();
        assert!(th.report.passed(), "{:?}", th.report.failures());
        let swap = VertexMap::new(2, vec![1, 0]).unwrap();
        let p = pattern_tro(&swap, &VertexMap::identity(2), tol()).unwrap();
        let th = theta_iso(&p, &d2, &d2, ThetaMode::Commutative).unwrap();
        assert!(th.report.passed());
        let e0 = CMatrix::unit(2, 2, 0, 0);
        let image = th.codomain.combine(&th.matrix.mul_vec(&th.domain.coords(&e0)));
        assert!(image.dist(&CMatrix::unit(2, 2, 1, 1)) < 1e-12);
        let m2 = OperatorSystem::full(2, tol());
        let id = Tro::new(m2.space().clone()).unwrap();
        assert!(matches!(theta_iso(&id, &m2, &m2, ThetaMode::Commutative), Err(Error::Precondition(_))));
    }

    #[test]
    fn theta_on_centres() {
        let g = Graph::complete(2).disjoint_union(&Graph::empty(1));
        let h = Graph::empty(2);
        let w = decide_delta_graphs(&g, &h).unwrap().witness().unwrap().clone();
        let m = synthesize_graph_tro(&w, tol()).unwrap();
        let (s, t) = (graph_system(&g, tol()), graph_system(&h, tol()));
        let th = theta_iso(&m, &s, &t, ThetaMode::Centre).unwrap();
        assert!(th.report.passed(), "{:?}", th.report.failures());
        assert_eq!((th.domain.dim(), th.codomain.dim()), (2, 2));
    }

    #[test]
    fn toeplitz_systems_are_rigid() {
        assert_eq!(toeplitz_system(1, tol()).unwrap().dim(), 1);
        assert_eq!(toeplitz_system(2, tol()).unwrap().dim(), 3);
        for n in 2..=6 {
            let s = toeplitz_system(n, tol()).unwrap();
            assert_eq!(s.dim(), 2 * n - 1);
            assert!(is_rigid(&s), "n = {n}");
        }
        assert!(!is_rigid(&OperatorSystem::full(2, tol())) && !is_rigid(&OperatorSystem::diagonal(2, tol())));
    }

    #[test]
    fn rigid_structures() {
        let c = OperatorSystem::scalars(1, tol());
        let m2 = OperatorSystem::full(2, tol());
        let col = Tro::new(MatSubspace::full(2, 1, tol())).unwrap();
        let r = rigid_stable_structure(&c, &m2, &col).unwrap();
        assert_eq!(r.k, 2);
        assert!(r.residual < 1e-12);
        let s = toeplitz_system(3, tol()).unwrap();
        let t = amplify(&s, 2).unwrap();
        let i3 = CMatrix::identity(3);
        let gens: Vec<CMatrix> = (0..2).map(|i| CMatrix::unit(2, 1, i, 0).kron(&i3)).collect();
        let m = Tro::new(MatSubspace::new(6, 3, &gens, tol()).unwrap()).unwrap();
        let r = rigid_stable_structure(&s, &t, &m).unwrap();
        assert_eq!(r.k, 2);
        assert!(r.residual <= 1e-10);
        assert_eq!(multiplier_algebra(&t).dim(), 4);
        assert_eq!(r.multiplier_blocks.len(), 1);
        assert_eq!(r.multiplier_blocks[0].size, 2);
        let d2 = OperatorSystem::diagonal(2, tol());
        let id = Tro::new(d2.space().clone()).unwrap();
        assert!(matches!(rigid_stable_structure(&d2, &d2, &id), Err(Error::NotRigid(2))));
    }
}
