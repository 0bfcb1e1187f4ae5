//! Ternary rings of operators, TRO-equivalence, quasi-units, cohomomorphisms and the abstract
//! Δ- and bihomomorphism contexts.

mod context;
mod kraus;
mod report;

use serde::{Deserialize, Serialize};

use crate::cstar::{generated_algebra, OperatorSystem};
use crate::error::{Error, Result};
use crate::matcore::{herm_apply, herm_eig, CMatrix, MatSubspace};

pub use context::{
    verify_bihom_context, verify_delta_context, ContextBundle, SemiUnits, Trilinear, TrilinearTable,
};
pub use kraus::{kraus_witness_from_space, verify_cohomomorphism, KrausFamily, KrausWitness};
pub use report::{AxiomCheck, VerificationReport};

/// Span of `{a·b·c}` over the three bases.
pub fn sandwich(a: &MatSubspace, b: &MatSubspace, c: &MatSubspace) -> Result<MatSubspace> {
    a.product_span(b)?.product_span(c)
}

/// Matrix subspace with `M M* M ⊆ M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tro {
    space: MatSubspace,
}

impl Serialize for Tro {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.space.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tro {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Tro::new(MatSubspace::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `MM*M` residual against `M`, with the spans `[MM*]` and `[M*M]`.
fn closure(space: &MatSubspace) -> Result<(f64, MatSubspace, MatSubspace)> {
    let adj = space.adjoint_space();
    let left = space.product_span(&adj)?;
    let right = adj.product_span(space)?;
    let (_, res) = space.contains_space(&left.product_span(space)?)?;
    Ok((res, left, right))
}

impl Tro {
    pub fn new(space: MatSubspace) -> Result<Self> {
        let (res, _, _) = closure(&space)?;
        if res > 2.0 * space.tol().eps {
            return Err(Error::NotTro(format!("MM*M leaves the span (residual {res:e})")));
        }
        Ok(Tro { space })
    }

    pub(crate) fn trusted(space: MatSubspace) -> Self {
        Tro { space }
    }

    pub fn space(&self) -> &MatSubspace {
        &self.space
    }

    pub fn into_space(self) -> MatSubspace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `[MM*]`, acting on the row side.
    pub fn left_algebra(&self) -> MatSubspace {
        self.space.product_span(&self.space.adjoint_space()).expect("compatible shapes")
    }

    /// `[M*M]`, acting on the column side.
    pub fn right_algebra(&self) -> MatSubspace {
        self.space.adjoint_space().product_span(&self.space).expect("compatible shapes")
    }

    pub fn adjoint(&self) -> Tro {
        Tro { space: self.space.adjoint_space() }
    }

    /// `I ∈ [M*M]` and `I ∈ [MM*]`.
    pub fn is_nondegenerate(&self) -> bool {
        self.left_algebra().contains_identity().0 && self.right_algebra().contains_identity().0
    }
}

/// Result of [`verify_tro`], with the two side algebras.
#[derive(Clone, Debug, Serialize)]
pub struct TroVerification {
    pub report: VerificationReport,
    pub left_algebra: MatSubspace,
    pub right_algebra: MatSubspace,
}

/// TRO closure and both nondegeneracy conditions.
pub fn verify_tro(m: &MatSubspace) -> TroVerification {
    let mut report = VerificationReport::new();
    let (res, left, right) = closure(m).expect("a subspace and its adjoint always multiply");
    report.check("tro_closure", res, 2.0 * m.tol().eps);
    let (ok, r) = right.contains_identity();
    report.flag("nondegenerate_right", ok, r, None);
    let (ok, r) = left.contains_identity();
    report.flag("nondegenerate_left", ok, r, None);
    TroVerification { report, left_algebra: left, right_algebra: right }
}

/// Nondegenerate `M ⊆ M_{d_T,d_S}` with `[M*TM] = S` and `[MSM*] = T`.
pub fn verify_tro_equivalence(s: &OperatorSystem, t: &OperatorSystem, m: &MatSubspace) -> VerificationReport {
    let mut report = VerificationReport::new();
    if m.ambient() != (t.size(), s.size()) {
        report.flag(
            "shape",
            false,
            f64::INFINITY,
            Some(serde_json::json!({"carrier": m.ambient(), "expected": [t.size(), s.size()]})),
        );
        return report;
    }
    report.extend(verify_tro(m).report);
    let adj = m.adjoint_space();
    let ms = sandwich(&adj, t.space(), m).expect("checked shapes");
    let mt = sandwich(m, s.space(), &adj).expect("checked shapes");
    let (ok, r) = s.space().contains_space(&ms).expect("same ambient");
    report.flag("inclusion_s", ok, r, None);
    let (ok, r) = t.space().contains_space(&mt).expect("same ambient");
    report.flag("inclusion_t", ok, r, None);
    let (ok, r) = s.space().equals(&ms).expect("same ambient");
    report.flag("span_s", ok, r, Some(serde_json::json!({"dim_span": ms.dim(), "dim_s": s.dim()})));
    let (ok, r) = t.space().equals(&mt).expect("same ambient");
    report.flag("span_t", ok, r, Some(serde_json::json!({"dim_span": mt.dim(), "dim_t": t.dim()})));
    report
}

/// `M = [X·C*(X*X)]` for a nondegenerate `X` with `X*TX ⊆ S` and `XSX* ⊆ T`.
pub fn promote_bihom(x: &MatSubspace, s: &OperatorSystem, t: &OperatorSystem) -> Result<Tro> {
    if x.ambient() != (t.size(), s.size()) {
        return Err(Error::DimensionMismatch(format!(
            "carrier {:?} between systems of sizes {} and {}",
            x.ambient(),
            s.size(),
            t.size()
        )));
    }
    let adj = x.adjoint_space();
    let xx = adj.product_span(x)?;
    let (ok, r) = xx.contains_identity();
    if !ok {
        return Err(Error::Precondition(format!("I ∉ [X*X] (residual {r:e})")));
    }
    let (ok, r) = x.product_span(&adj)?.contains_identity();
    if !ok {
        return Err(Error::Precondition(format!("I ∉ [XX*] (residual {r:e})")));
    }
    let (ok, r) = s.space().contains_space(&sandwich(&adj, t.space(), x)?)?;
    if !ok {
        return Err(Error::Precondition(format!("X*TX ⊄ S (residual {r:e})")));
    }
    let (ok, r) = t.space().contains_space(&sandwich(x, s.space(), &adj)?)?;
    if !ok {
        return Err(Error::Precondition(format!("XSX* ⊄ T (residual {r:e})")));
    }
    let a = generated_algebra(&OperatorSystem::new(xx)?);
    let m = x.product_span(a.space())?;
    Tro::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `Σ mᵢmᵢ* = I`.
    Left,
    /// `Σ mᵢ*mᵢ = I`.
    Right,
}

/// Finite family `mᵢ = G^{-1/2}uᵢ` (left) or `uᵢG^{-1/2}` (right) over the basis `uᵢ`.
pub fn quasi_unit(m: &Tro, side: Side) -> Result<Vec<CMatrix>> {
    let basis = m.space.basis();
    let (r, c) = m.space.ambient();
    let n = if side == Side::Left { r } else { c };
    let mut g = CMatrix::zeros(n, n);
    for u in basis {
        let term = if side == Side::Left { u.mul_adj(u) } else { u.adj_mul(u) };
        g = &g + &term;
    }
    let (vals, _) = herm_eig(&g)?;
    let floor = m.space.tol().eps * (1.0 + vals.last().copied().unwrap_or(0.0));
    if vals[0] <= floor {
        return Err(Error::NonUnital(format!("{side:?} Gram spectrum {vals:?} reaches the floor {floor:e}")));
    }
    let inv_sqrt = herm_apply(&g, |x| 1.0 / x.sqrt())?;
    Ok(basis
        .iter()
        .map(|u| if side == Side::Left { inv_sqrt.matmul(u) } else { u.matmul(&inv_sqrt) })
        .collect())
}

/// `φ(x) = [nᵢ x nⱼ*]` through `M_k(T)` and `ψ(Y) = Σ nᵢ* Yᵢⱼ nⱼ`, for a right quasi-unit `{nᵢ}`.
#[derive(Clone, Debug, Serialize)]
pub struct Factorization {
    pub phi_image: CMatrix,
    pub roundtrip: CMatrix,
    pub residual: f64,
}

pub fn factorization_maps(m: &Tro, x: &CMatrix) -> Result<Factorization> {
    let (dt, ds) = m.space.ambient();
    if x.shape() != (ds, ds) {
        return Err(Error::DimensionMismatch(format!("element of shape {:?} for a {ds}x{ds} system", x.shape())));
    }
    quasi_unit(m, Side::Left)?;
    let units = quasi_unit(m, Side::Right)?;
    let k = units.len();
    let mut phi = CMatrix::zeros(k * dt, k * dt);
    for (i, ni) in units.iter().enumerate() {
        let nix = ni.matmul(x);
        for (j, nj) in units.iter().enumerate() {
            phi.set_block(i * dt, j * dt, &nix.mul_adj(nj));
        }
    }
    let mut back = CMatrix::zeros(ds, ds);
    for (i, ni) in units.iter().enumerate() {
        for (j, nj) in units.iter().enumerate() {
            back = &back + &ni.adj_mul(&phi.block(i * dt, j * dt, dt, dt)).matmul(nj);
        }
    }
    let residual = back.dist(x);
    Ok(Factorization { phi_image: phi, roundtrip: back, residual })
}

/// `M₃ = [M₂·D·M₁]` with `D = C*(M₁M₁* ∪ M₂*M₂)`, composing `S ∼ T` via `m1` and `T ∼ R` via `m2`.
pub fn compose_equivalences(m1: &Tro, m2: &Tro) -> Result<Tro> {
    let (dt, _) = m1.space.ambient();
    if m2.space.ambient().1 != dt {
        return Err(Error::DimensionMismatch("middle systems differ in size".into()));
    }
    let gens = m1.left_algebra().sum(&m2.right_algebra())?;
    let d = generated_algebra(&OperatorSystem::new(gens)?);
    Tro::new(sandwich(m2.space(), d.space(), m1.space())?)
}
