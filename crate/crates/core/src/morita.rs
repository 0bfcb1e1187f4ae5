//! Induced representations through a TRO, the round-trip unitaries of the double induction,
//! transport of intertwiners, and transport of bimodules over the multiplier algebras.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cstar::{block_decompose, generated_algebra, multiplier_algebra, OperatorSystem, StarAlgebra};
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, op_norm, random_unitary, CMatrix, MatSubspace};
use crate::tro::{sandwich, Tro};

/// `φ: S → M_h` stored on the orthonormal basis of `S`, with its restriction to `A_S`.
#[derive(Clone, Debug)]
pub struct Representation {
    system: OperatorSystem,
    images: Vec<CMatrix>,
    multipliers: StarAlgebra,
    multiplier_images: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RepresentationJson {
    system: MatSubspace,
    dim: usize,
    images: Vec<CMatrix>,
}

impl Serialize for Representation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RepresentationJson { system: self.system.space().clone(), dim: self.dim(), images: self.images.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Representation {
    /// `images[i]` is the image of the `i`-th listed basis matrix, which need not be orthonormal.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            system: RawSpace,
            dim: usize,
            images: Vec<CMatrix>,
        }
        #[derive(Deserialize)]
        struct RawSpace {
            ambient: [usize; 2],
            basis: Vec<CMatrix>,
        }
        let raw = Raw::deserialize(d)?;
        let [r, c] = raw.system.ambient;
        if r != c {
            return Err(serde::de::Error::custom("representation of a non-square system"));
        }
        Representation::on_generators(r, &raw.system.basis, raw.dim, raw.images).map_err(serde::de::Error::custom)
    }
}

fn rel_bound(eps: f64, scale: f64) -> f64 {
    10.0 * eps * (1.0 + scale)
}

impl Representation {
    /// Images of `system.space().basis()`; checks unitality, hermiticity, multiplicativity on
    /// `A_S` and the bimodule law `φ(a·s) = π(a)φ(s)`.
    pub fn new(system: OperatorSystem, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != system.dim() {
            return Err(Error::DimensionMismatch(format!("{} images for a system of dimension {}", images.len(), system.dim())));
        }
        let Some(h) = images.first().map(|x| x.rows()) else {
            return Err(Error::InvalidInput("representation with no images".into()));
        };
        if h == 0 || images.iter().any(|x| x.shape() != (h, h)) {
            return Err(Error::DimensionMismatch("images must be square of one size".into()));
        }
        let multipliers = multiplier_algebra(&system);
        let mut rep = Representation { system, images, multipliers, multiplier_images: Vec::new() };
        rep.multiplier_images = rep.multipliers.space().basis().iter().map(|a| rep.apply(a)).collect();
        rep.validate()?;
        Ok(rep)
    }

    /// `images[i] = φ(gens[i])` for a spanning list `gens` of `S ⊆ M_d`.
    pub fn on_generators(d: usize, gens: &[CMatrix], h: usize, images: Vec<CMatrix>) -> Result<Self> {
        if gens.len() != images.len() {
            return Err(Error::DimensionMismatch(format!("{} generators but {} images", gens.len(), images.len())));
        }
        if images.iter().any(|x| x.shape() != (h, h)) {
            return Err(Error::DimensionMismatch(format!("images must be {h}x{h}")));
        }
        let tol = crate::matcore::Tolerance::default();
        let (space, coeffs) = MatSubspace::with_coefficients(d, d, gens, tol)?;
        let system = OperatorSystem::new(space)?;
        let on_basis: Vec<CMatrix> = coeffs
            .iter()
            .map(|row| {
                let mut acc = CMatrix::zeros(h, h);
                for (c, x) in row.iter().zip(&images) {
                    acc.axpy(*c, x);
                }
                acc
            })
            .collect();
        let rep = Representation::new(system, on_basis)?;
        // dependent generators must carry consistent images
        let worst = gens.iter().zip(&images).map(|(g, x)| rep.apply(g).dist(x) / (1.0 + x.norm())).fold(0.0, f64::max);
        if worst > rel_bound(tol.eps, 0.0) {
            return Err(Error::InvalidInput(format!("images are not linear in the generators (defect {worst:e})")));
        }
        Ok(rep)
    }

    /// The inclusion `S ⊆ M_d`.
    pub fn identity(system: &OperatorSystem) -> Self {
        let images = system.space().basis().to_vec();
        Representation::new(system.clone(), images).expect("the inclusion is a representation")
    }

    fn validate(&self) -> Result<()> {
        let eps = self.system.tol().eps;
        let h = self.dim();
        let unit = self.apply(&CMatrix::identity(self.system.size())).dist(&CMatrix::identity(h));
        if unit > rel_bound(eps, h as f64) {
            return Err(Error::InvalidInput(format!("φ(I) ≠ I (defect {unit:e})")));
        }
        for (s, x) in self.system.space().basis().iter().zip(&self.images) {
            let d = self.apply(&s.adjoint()).dist(&x.adjoint());
            if d > rel_bound(eps, x.norm()) {
                return Err(Error::NonHermitian(d));
            }
        }
        let mb = self.multipliers.space().basis();
        for (a, pa) in mb.iter().zip(&self.multiplier_images) {
            for (b, pb) in mb.iter().zip(&self.multiplier_images) {
                let d = self.apply(&a.matmul(b)).dist(&pa.matmul(pb));
                if d > rel_bound(eps, pa.norm() * pb.norm()) {
                    return Err(Error::InvalidInput(format!("π is not multiplicative on A_S (defect {d:e})")));
                }
            }
            for (s, ps) in self.system.space().basis().iter().zip(&self.images) {
                let d = self.apply(&a.matmul(s)).dist(&pa.matmul(ps));
                if d > rel_bound(eps, pa.norm() * ps.norm()) {
                    return Err(Error::InvalidInput(format!("φ(a·s) ≠ π(a)φ(s) (defect {d:e})")));
                }
            }
        }
        Ok(())
    }

    pub fn system(&self) -> &OperatorSystem {
        &self.system
    }

    /// Hilbert space dimension.
    pub fn dim(&self) -> usize {
        self.images[0].rows()
    }

    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    pub fn multiplier_images(&self) -> &[CMatrix] {
        &self.multiplier_images
    }

    /// `φ(x)` for `x ∈ S`; components of `x` outside `S` are dropped.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let coords = self.system.space().coords(x);
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for (c, y) in coords.iter().zip(&self.images) {
            out.axpy(*c, y);
        }
        out
    }

    /// `w φ(·) w*` for a unitary `w`.
    pub fn conjugated(&self, w: &CMatrix) -> Result<Self> {
        if w.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch("conjugating unitary has the wrong size".into()));
        }
        let images = self.images.iter().map(|x| w.matmul(x).mul_adj(w)).collect();
        Representation::new(self.system.clone(), images)
    }
}

/// Restriction to `S` of a random *-representation of `C*(S)`: each simple summand repeated
/// 0, 1 or 2 times (at least once overall), then conjugated by a random unitary.
pub fn random_representation(s: &OperatorSystem, rng: &mut impl Rng) -> Result<Representation> {
    let dec = block_decompose(&generated_algebra(s))?;
    let mut reps: Vec<usize> = dec.blocks.iter().map(|_| rng.gen_range(0..=2)).collect();
    if reps.iter().all(|&r| r == 0) {
        let j = rng.gen_range(0..reps.len());
        reps[j] = 1;
    }
    let h: usize = dec.blocks.iter().zip(&reps).map(|(b, r)| b.size * r).sum();
    let w = random_unitary(h, rng);
    let images = s
        .space()
        .basis()
        .iter()
        .map(|x| {
            let y = dec.unitary.adj_mul(x).matmul(&dec.unitary);
            let mut out: Option<CMatrix> = None;
            for (j, &r) in reps.iter().enumerate() {
                if r == 0 {
                    continue;
                }
                let cols = dec.copy_columns(j, 0);
                let part = y.select(&cols, &cols).kron(&CMatrix::identity(r));
                out = Some(match out {
                    None => part,
                    Some(acc) => acc.direct_sum(&part),
                });
            }
            w.matmul(&out.expect("some summand is kept")).mul_adj(&w)
        })
        .collect();
    Representation::new(s.clone(), images)
}

/// The Gram space of `M ⊗ H` and its quotient by the null vectors.
#[derive(Clone, Debug, Serialize)]
pub struct GramSpace {
    /// Generator `a` is `m_i ⊗ ξ_j` with `labels[a] = (i, j)`.
    pub labels: Vec<(usize, usize)>,
    /// `gram[a][b] = ⟨g_b, g_a⟩`.
    pub gram: CMatrix,
    pub quotient_rank: usize,
    /// Quotient coordinates to generator coefficients; isometric for the Gram form.
    pub isometry: CMatrix,
    /// Generator coefficients to quotient coordinates.
    pub coords: CMatrix,
}

impl GramSpace {
    fn new(labels: Vec<(usize, usize)>, gram: CMatrix, eps: f64) -> Result<Self> {
        let (vals, vecs) = herm_eig(&gram.hermitian_part())?;
        let floor = eps * (1.0 + gram.trace().re.abs());
        if vals[0] < -floor {
            return Err(Error::Numerical(format!("Gram matrix has eigenvalue {:e}", vals[0])));
        }
        let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > floor).collect();
        let n = gram.rows();
        let mut isometry = CMatrix::zeros(n, keep.len());
        let mut coords = CMatrix::zeros(keep.len(), n);
        for (c, &k) in keep.iter().enumerate() {
            let (lo, hi) = (1.0 / vals[k].sqrt(), vals[k].sqrt());
            for a in 0..n {
                isometry.set_block(a, c, &CMatrix::diag(&[vecs[(a, k)] * lo]));
                coords.set_block(c, a, &CMatrix::diag(&[vecs[(a, k)].conj() * hi]));
            }
        }
        Ok(GramSpace { labels, gram, quotient_rank: keep.len(), isometry, coords })
    }

    /// `Ψ` with `coords* Ψ coords = f`, and the defect of that identity.
    fn descend(&self, f: &CMatrix) -> (CMatrix, f64) {
        let psi = self.isometry.adj_mul(f).matmul(&self.isometry);
        let back = self.coords.adj_mul(&psi).matmul(&self.coords);
        (psi, back.dist(f))
    }
}

/// `ψ` on the Gram quotient of `M ⊗ H`, with the Gram data and the worst descent defect.
#[derive(Clone, Debug, Serialize)]
pub struct InducedRep {
    pub rep: Representation,
    pub gram: GramSpace,
    pub descent_residual: f64,
}

fn check_shapes(m: &Tro, s: &OperatorSystem, t: &OperatorSystem) -> Result<()> {
    if m.space().ambient() != (t.size(), s.size()) {
        return Err(Error::DimensionMismatch(format!(
            "TRO in M_{:?} between systems of sizes {} and {}",
            m.space().ambient(),
            s.size(),
            t.size()
        )));
    }
    Ok(())
}

/// Block matrix `[φ(m_i* x m_k)]_{ik}` over the generators `m_i ⊗ ξ_j`.
fn generator_form(m: &Tro, rep: &Representation, x: &CMatrix) -> CMatrix {
    let b = m.space().basis();
    let h = rep.dim();
    let mut out = CMatrix::zeros(b.len() * h, b.len() * h);
    for (i, mi) in b.iter().enumerate() {
        let left = mi.adj_mul(x);
        for (k, mk) in b.iter().enumerate() {
            out.set_block(i * h, k * h, &rep.apply(&left.matmul(mk)));
        }
    }
    out
}

/// Induces a representation of `T` from one of `S` through `M ⊆ M_{d_T, d_S}`, with
/// `⟨ψ(t)(x₁⊗h₁), x₂⊗h₂⟩ = ⟨φ(x₂* t x₁)h₁, h₂⟩`.
pub fn induce_rep(m: &Tro, t: &OperatorSystem, rep: &Representation) -> Result<InducedRep> {
    let s = rep.system();
    check_shapes(m, s, t)?;
    let eps = s.tol().eps;
    let h = rep.dim();
    let labels = (0..m.dim()).flat_map(|i| (0..h).map(move |j| (i, j))).collect();
    let gram = GramSpace::new(labels, generator_form(m, rep, &CMatrix::identity(t.size())), eps)?;
    if gram.quotient_rank == 0 {
        return Err(Error::Precondition("induced space is zero".into()));
    }
    let mut worst: f64 = 0.0;
    let mut images = Vec::with_capacity(t.dim());
    for tb in t.space().basis() {
        let f = generator_form(m, rep, tb);
        let (psi, defect) = gram.descend(&f);
        worst = worst.max(defect / (1.0 + f.norm()));
        images.push(psi);
    }
    if worst > rel_bound(eps, 0.0) {
        return Err(Error::Numerical(format!("form does not descend to the Gram quotient (defect {worst:e})")));
    }
    let rep = Representation::new(t.clone(), images)?;
    Ok(InducedRep { rep, gram, descent_residual: worst })
}

/// The unitary `U(x*⊗y⊗h) = φ(x*y)h` from the double induction back to `H`.
#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub u: CMatrix,
    pub unitarity_residual: f64,
    /// `max_s ‖U ζ(s) U* − φ(s)‖` over the basis of `S`.
    pub intertwining_residual: f64,
    pub residual: f64,
}

pub fn roundtrip_unitary(m: &Tro, t: &OperatorSystem, rep: &Representation) -> Result<RoundTrip> {
    let s = rep.system();
    let first = induce_rep(m, t, rep)?;
    let adj = m.adjoint();
    let second = induce_rep(&adj, s, &first.rep)?;
    let (h, r1) = (rep.dim(), first.gram.quotient_rank);
    let n = adj.space().basis();
    let mb = m.space().basis();
    // generator n_p ⊗ e_q of the second space, with e_q = Σ_{(k,l)} iso[(k,l), q] m_k ⊗ ξ_l
    let mut gens = CMatrix::zeros(h, n.len() * r1);
    for (p, np) in n.iter().enumerate() {
        let acts: Vec<CMatrix> = mb.iter().map(|mk| rep.apply(&np.matmul(mk))).collect();
        for q in 0..r1 {
            let mut col = CMatrix::zeros(h, 1);
            for (a, &(k, l)) in first.gram.labels.iter().enumerate() {
                let c = first.gram.isometry[(a, q)];
                if c.norm() != 0.0 {
                    col.axpy(c, &acts[k].block(0, l, h, 1));
                }
            }
            gens.set_block(0, p * r1 + q, &col);
        }
    }
    let u = gens.matmul(&second.gram.isometry);
    let r2 = second.gram.quotient_rank;
    let unitarity_residual = if r2 == h {
        u.adj_mul(&u).dist(&CMatrix::identity(r2)).max(u.mul_adj(&u).dist(&CMatrix::identity(h)))
    } else {
        f64::INFINITY
    };
    let intertwining_residual = s
        .space()
        .basis()
        .iter()
        .zip(second.rep.images())
        .zip(rep.images())
        .map(|((_, z), p)| u.matmul(z).mul_adj(&u).dist(p))
        .fold(0.0, f64::max);
    Ok(RoundTrip { u, unitarity_residual, intertwining_residual, residual: unitarity_residual.max(intertwining_residual) })
}

/// `T̃(m⊗ξ) = m⊗Tξ` between the spaces induced from `rep1` and `rep2`.
#[derive(Clone, Debug, Serialize)]
pub struct TransportedIntertwiner {
    pub operator: CMatrix,
    pub intertwining_residual: f64,
    pub norm: f64,
    pub norm_bound: f64,
}

pub fn transport_intertwiner(
    m: &Tro,
    t: &OperatorSystem,
    op: &CMatrix,
    rep1: &Representation,
    rep2: &Representation,
) -> Result<TransportedIntertwiner> {
    let s = rep1.system();
    if !s.space().equals(rep2.system().space())?.0 {
        return Err(Error::DimensionMismatch("representations of different systems".into()));
    }
    if op.shape() != (rep2.dim(), rep1.dim()) {
        return Err(Error::DimensionMismatch(format!("operator {:?} between spaces of dimension {} and {}", op.shape(), rep1.dim(), rep2.dim())));
    }
    let eps = s.tol().eps;
    let scale = 1.0 + op.norm();
    let pre = s
        .space()
        .basis()
        .iter()
        .map(|x| op.matmul(&rep1.apply(x)).dist(&rep2.apply(x).matmul(op)))
        .fold(0.0, f64::max);
    if pre > rel_bound(eps, scale) {
        return Err(Error::NotIntertwiner(pre));
    }
    let (i1, i2) = (induce_rep(m, t, rep1)?, induce_rep(m, t, rep2)?);
    let lifted = CMatrix::identity(m.dim()).kron(op);
    let operator = i2.gram.coords.matmul(&lifted).matmul(&i1.gram.isometry);
    let intertwining_residual = i1
        .rep
        .images()
        .iter()
        .zip(i2.rep.images())
        .map(|(a, b)| operator.matmul(a).dist(&b.matmul(&operator)))
        .fold(0.0, f64::max);
    if intertwining_residual > rel_bound(eps, scale) {
        return Err(Error::Numerical(format!("transported operator fails to intertwine ({intertwining_residual:e})")));
    }
    let norm_bound = op_norm(op);
    let norm = op_norm(&operator);
    if norm > norm_bound * (1.0 + 1e3 * eps) + eps {
        return Err(Error::Numerical(format!("transported norm {norm} exceeds {norm_bound}")));
    }
    Ok(TransportedIntertwiner { operator, intertwining_residual, norm, norm_bound })
}

/// `[M J M*]` for an `A_S`-bimodule `J ⊆ S`.
pub fn transport_bimodule(m: &Tro, s: &OperatorSystem, j: &MatSubspace) -> Result<MatSubspace> {
    if m.space().ambient().1 != s.size() || j.ambient() != (s.size(), s.size()) {
        return Err(Error::DimensionMismatch("TRO, system and subspace sizes disagree".into()));
    }
    let eps = s.tol().eps;
    let (inside, r) = s.space().contains_space(j)?;
    if !inside {
        return Err(Error::NotBimodule(r));
    }
    let a = multiplier_algebra(s);
    let both = sandwich(a.space(), j, a.space())?;
    let (closed, r) = j.contains_space(&both)?;
    if !closed {
        return Err(Error::NotBimodule(r));
    }
    let out = sandwich(m.space(), j, &m.space().adjoint_space())?;
    Ok(out.with_tol(crate::matcore::Tolerance { eps, ..s.tol() }))
}

/// Nonzero corners `p_a S p_b` for minimal central projections `p_a` of `A_S`. When every
/// simple summand of `A_S` acts with multiplicity one, as for graph systems, the
/// `A_S`-bimodules inside `S` are exactly the sums of these corners.
pub fn bimodule_atoms(s: &OperatorSystem) -> Result<Vec<MatSubspace>> {
    let z = crate::cstar::center(&multiplier_algebra(s));
    let projections = central_projections(&z)?;
    let d = s.size();
    let mut out = Vec::new();
    for p in &projections {
        for q in &projections {
            let mats: Vec<CMatrix> = s.space().basis().iter().map(|x| p.matmul(x).matmul(q)).collect();
            let corner = MatSubspace::new(d, d, &mats, s.tol())?;
            if corner.dim() > 0 {
                out.push(corner);
            }
        }
    }
    Ok(out)
}

/// Sum of the atoms selected by `mask`.
pub fn atom_sum(atoms: &[MatSubspace], mask: u64, d: usize, tol: crate::matcore::Tolerance) -> Result<MatSubspace> {
    let mats: Vec<CMatrix> =
        atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).flat_map(|(_, a)| a.basis().to_vec()).collect();
    MatSubspace::new(d, d, &mats, tol)
}

/// Minimal projections of a commutative *-algebra, from the joint spectrum of a random
/// Hermitian element.
fn central_projections(z: &StarAlgebra) -> Result<Vec<CMatrix>> {
    let mut rng = z.space().tol().rng("central-projections");
    let herm = z.space().hermitian_basis();
    let d = z.size();
    let x = crate::matcore::random_hermitian(&herm, d, &mut rng);
    let (vals, vecs) = herm_eig(&x)?;
    let gap = 1e-6;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[start] > gap {
            let cols: Vec<usize> = (start..i).collect();
            let v = vecs.select(&(0..d).collect::<Vec<_>>(), &cols);
            out.push(v.mul_adj(&v));
            start = i;
        }
    }
    if out.len() != z.dim() {
        return Err(Error::Numerical(format!("{} spectral projections for a centre of dimension {}", out.len(), z.dim())));
    }
    Ok(out)
}
