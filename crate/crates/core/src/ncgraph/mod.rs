//! Graph operator systems, twin quotients, the pullback decision for Δ-equivalence of graph
//! systems, and pattern TROs.

mod canon;
mod graph;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{MatSubspace, Tolerance};
use crate::tro::Tro;

pub use canon::{canonical_form, find_isomorphism, is_isomorphism, CanonicalForm};
pub use graph::{graph_system, system_graph, Graph, VertexMap};

const MAX_COMPONENTS: usize = 24;

/// Collapses true twins (equal closed neighbourhoods). Classes are numbered by least vertex.
pub fn twin_quotient(g: &Graph) -> (Graph, VertexMap) {
    let n = g.n();
    let rows: Vec<Vec<bool>> = (0..n).map(|i| g.closed_neighbourhood(i)).collect();
    let mut class = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        if class[i] != usize::MAX {
            continue;
        }
        class[i] = reps.len();
        for j in i + 1..n {
            if class[j] == usize::MAX && rows[j] == rows[i] {
                class[j] = reps.len();
            }
        }
        reps.push(i);
    }
    let k = reps.len();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            // twin classes are all-or-nothing, so one representative pair decides
            if g.adjacent(reps[a], reps[b]) {
                edges.push((a, b));
            }
        }
    }
    let q = Graph::new(k, &edges).expect("quotient edges");
    (q, VertexMap::new(k, class).expect("class labels"))
}

/// `x ≃ x′` in `g` exactly when `f(x) ≃ f(x′)` in `k`.
pub fn verify_pullback(g: &Graph, k: &Graph, f: &VertexMap) -> bool {
    if f.domain() != g.n() || f.codomain() != k.n() {
        return false;
    }
    (0..g.n()).all(|x| (0..g.n()).all(|y| g.similar(x, y) == k.similar(f.apply(x), f.apply(y))))
}

/// `G` and `H` are pullbacks of the isomorphic graphs `quotient_g ≅ quotient_h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullbackWitness {
    pub graph_g: Graph,
    pub graph_h: Graph,
    pub quotient_g: Graph,
    pub quotient_h: Graph,
    /// `G → quotient_g`.
    pub map_g: VertexMap,
    /// `H → quotient_h`.
    pub map_f: VertexMap,
    /// `quotient_g → quotient_h`.
    pub iso: VertexMap,
}

impl PullbackWitness {
    /// Both pullback conditions, surjectivity, and the isomorphism.
    pub fn verify(&self) -> bool {
        verify_pullback(&self.graph_g, &self.quotient_g, &self.map_g)
            && verify_pullback(&self.graph_h, &self.quotient_h, &self.map_f)
            && self.map_g.is_surjective()
            && self.map_f.is_surjective()
            && is_isomorphism(&self.quotient_g, &self.quotient_h, self.iso.values())
    }

    /// The same witness read from `H` to `G`.
    pub fn transposed(&self) -> PullbackWitness {
        PullbackWitness {
            graph_g: self.graph_h.clone(),
            graph_h: self.graph_g.clone(),
            quotient_g: self.quotient_h.clone(),
            quotient_h: self.quotient_g.clone(),
            map_g: self.map_f.clone(),
            map_f: self.map_g.clone(),
            iso: self.iso.inverse().expect("isomorphisms are bijective"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DeltaDecision {
    Equivalent { witness: PullbackWitness },
    /// Canonical forms of the two twin quotients, which differ.
    NotEquivalent { quotient_g: CanonicalForm, quotient_h: CanonicalForm },
}

impl DeltaDecision {
    pub fn witness(&self) -> Option<&PullbackWitness> {
        match self {
            DeltaDecision::Equivalent { witness } => Some(witness),
            DeltaDecision::NotEquivalent { .. } => None,
        }
    }

    pub fn is_equivalent(&self) -> bool {
        self.witness().is_some()
    }
}

/// `S_G ∼_Δ S_H` exactly when `G` and `H` are pullbacks of isomorphic graphs, decided by
/// comparing twin quotients. Only surjective pullback maps are considered.
pub fn decide_delta_graphs(g: &Graph, h: &Graph) -> Result<DeltaDecision> {
    let (qg, map_g) = twin_quotient(g);
    let (qh, map_f) = twin_quotient(h);
    let cg = canonical_form(&qg)?;
    let ch = canonical_form(&qh)?;
    if cg.graph != ch.graph {
        return Ok(DeltaDecision::NotEquivalent { quotient_g: cg, quotient_h: ch });
    }
    let mut inv_h = vec![0; qh.n()];
    for (v, &pos) in ch.labelling.iter().enumerate() {
        inv_h[pos] = v;
    }
    let iso = VertexMap::new(qh.n(), cg.labelling.iter().map(|&pos| inv_h[pos]).collect())?;
    let witness = PullbackWitness {
        graph_g: g.clone(),
        graph_h: h.clone(),
        quotient_g: qg,
        quotient_h: qh,
        map_g,
        map_f,
        iso,
    };
    if !witness.verify() {
        return Err(Error::Numerical("constructed pullback witness failed verification".into()));
    }
    Ok(DeltaDecision::Equivalent { witness })
}

/// `span{E_ij : f(i) = g(j)} ⊆ M_{ℓ,r}` for `f` on `[ℓ]`, `g` on `[r]`.
pub fn pattern_tro(f: &VertexMap, g: &VertexMap, tol: Tolerance) -> Result<Tro> {
    if f.codomain() != g.codomain() {
        return Err(Error::DimensionMismatch(format!(
            "label maps into [{}] and [{}]",
            f.codomain(),
            g.codomain()
        )));
    }
    if !f.is_surjective() || !g.is_surjective() {
        return Err(Error::Precondition("pattern TRO label maps must be surjective".into()));
    }
    let (l, r) = (f.domain(), g.domain());
    let pattern: Vec<(usize, usize)> =
        (0..l).flat_map(|i| (0..r).map(move |j| (i, j))).filter(|&(i, j)| f.apply(i) == g.apply(j)).collect();
    Ok(Tro::trusted(MatSubspace::matrix_units(l, r, &pattern, tol)?))
}

/// Pattern TRO in `M_{|V(H)|,|V(G)|}` implementing `S_G ∼_TRO S_H`.
pub fn synthesize_graph_tro(w: &PullbackWitness, tol: Tolerance) -> Result<Tro> {
    if !w.verify() {
        return Err(Error::Precondition("pullback witness does not verify".into()));
    }
    pattern_tro(&w.map_f, &w.map_g.then(&w.iso)?, tol)
}

/// Components of `h` whose union is Δ-equivalent to `g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvEmbedding {
    pub components: Vec<Vec<usize>>,
    /// Sorted union of the components; vertex `k` of the restricted graph is `vertices[k]`.
    pub vertices: Vec<usize>,
    pub witness: PullbackWitness,
}

/// Searches unions of components of `h` for one Δ-equivalent to `g`. Twin quotients of a
/// disjoint union keep the number of components, so only unions of exactly
/// `#components(g)` components are decided; the others are ruled out by that count.
pub fn graph_env_embedding(g: &Graph, h: &Graph) -> Result<Option<EnvEmbedding>> {
    let comps = h.components();
    if comps.len() > MAX_COMPONENTS {
        return Err(Error::LimitExceeded(format!("{} components exceed {MAX_COMPONENTS}", comps.len())));
    }
    let want = g.components().len();
    for mask in 1usize..1 << comps.len() {
        if mask.count_ones() as usize != want {
            continue;
        }
        let chosen: Vec<Vec<usize>> =
            comps.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, c)| c.clone()).collect();
        let mut vertices: Vec<usize> = chosen.iter().flatten().copied().collect();
        vertices.sort_unstable();
        let sub = h.induced(&vertices)?;
        if let DeltaDecision::Equivalent { witness } = decide_delta_graphs(g, &sub)? {
            return Ok(Some(EnvEmbedding { components: chosen, vertices, witness }));
        }
    }
    Ok(None)
}
