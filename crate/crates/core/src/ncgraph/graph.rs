//! Simple graphs, vertex maps and the graph operator system `S_G`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cstar::OperatorSystem;
use crate::error::{Error, Result};
use crate::matcore::{MatSubspace, Tolerance};

/// Undirected loop-free graph on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson { vertices: self.n, edges: self.edges().into_iter().map(|(i, j)| [i, j]).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        let edges: Vec<_> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(raw.vertices, &edges).map_err(serde::de::Error::custom)
    }
}

impl Graph {
    /// Rejects loops and out-of-range endpoints; repeated edges are merged.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("a graph needs at least one vertex".into()));
        }
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!("edge ({i},{j}) out of range for {n} vertices")));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("loop at vertex {i}")));
            }
            g.adj[i * n + j] = true;
            g.adj[j * n + i] = true;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, adj: vec![false; n * n] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in 0..n {
                g.adj[i * n + j] = i != j;
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges).expect("path edges")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Graph::new(n, &edges).expect("cycle edges")
    }

    /// Vertices of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let n = self.n + other.n;
        let mut edges = self.edges();
        edges.extend(other.edges().into_iter().map(|(i, j)| (i + self.n, j + self.n)));
        Graph::new(n, &edges).expect("shifted edges")
    }

    /// Graph on `0..n` whose adjacency is `bits[k]` for the k-th pair `i < j` in lexicographic order.
    pub fn from_pair_bits(n: usize, bits: u64) -> Self {
        let mut g = Graph::empty(n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bits >> k & 1 == 1 {
                    g.adj[i * n + j] = true;
                    g.adj[j * n + i] = true;
                }
                k += 1;
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    /// `i ≃ j`: adjacent or equal.
    pub fn similar(&self, i: usize, j: usize) -> bool {
        i == j || self.adjacent(i, j)
    }

    /// Edges `(i, j)` with `i < j`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adjacent(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.adjacent(i, j)).count()
    }

    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.adjacent(i, j)).collect()
    }

    /// Row of the `≃` relation.
    pub fn closed_neighbourhood(&self, i: usize) -> Vec<bool> {
        (0..self.n).map(|j| self.similar(i, j)).collect()
    }

    /// Connected components, each sorted, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                for w in self.neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Subgraph induced on `vertices`, relabelled `0..len` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Graph> {
        if let Some(&v) = vertices.iter().find(|&&v| v >= self.n) {
            return Err(Error::InvalidInput(format!("vertex {v} out of range")));
        }
        let k = vertices.len();
        let mut g = Graph::empty(k);
        for (a, &i) in vertices.iter().enumerate() {
            for (b, &j) in vertices.iter().enumerate() {
                g.adj[a * k + b] = i != j && self.adjacent(i, j);
            }
        }
        Ok(g)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let n = self.n;
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in 0..n {
                g.adj[perm[i] * n + perm[j]] = self.adjacent(i, j);
            }
        }
        g
    }
}

/// Plain edge-list text: the vertex count, then one `i j` pair per line.
impl FromStr for Graph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty edge list".into()))?
            .parse()
            .map_err(|e| Error::InvalidInput(format!("vertex count: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = parts[..] else {
                return Err(Error::InvalidInput(format!("bad edge line {line:?}")));
            };
            let parse = |x: &str| x.parse::<usize>().map_err(|e| Error::InvalidInput(format!("{line:?}: {e}")));
            edges.push((parse(a)?, parse(b)?));
        }
        Graph::new(n, &edges)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for (i, j) in self.edges() {
            writeln!(f, "{i} {j}")?;
        }
        Ok(())
    }
}

/// Total map `[domain] → [codomain]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexMap {
    codomain: usize,
    values: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct VertexMapJson {
    domain: usize,
    codomain: usize,
    values: Vec<usize>,
    #[serde(default, skip_deserializing)]
    surjective: bool,
}

impl Serialize for VertexMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VertexMapJson {
            domain: self.domain(),
            codomain: self.codomain,
            values: self.values.clone(),
            surjective: self.is_surjective(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VertexMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = VertexMapJson::deserialize(d)?;
        if raw.values.len() != raw.domain {
            return Err(serde::de::Error::custom(format!(
                "{} values for a domain of size {}",
                raw.values.len(),
                raw.domain
            )));
        }
        VertexMap::new(raw.codomain, raw.values).map_err(serde::de::Error::custom)
    }
}

impl VertexMap {
    pub fn new(codomain: usize, values: Vec<usize>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v >= codomain) {
            return Err(Error::InvalidInput(format!("value {v} outside codomain of size {codomain}")));
        }
        Ok(VertexMap { codomain, values })
    }

    pub fn identity(n: usize) -> Self {
        VertexMap { codomain: n, values: (0..n).collect() }
    }

    pub fn constant(domain: usize, codomain: usize, value: usize) -> Result<Self> {
        Self::new(codomain, vec![value; domain])
    }

    pub fn domain(&self) -> usize {
        self.values.len()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.codomain];
        self.values.iter().for_each(|&v| hit[v] = true);
        hit.into_iter().all(|b| b)
    }

    pub fn is_bijective(&self) -> bool {
        self.domain() == self.codomain && self.is_surjective()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &VertexMap) -> Result<VertexMap> {
        if self.codomain != other.domain() {
            return Err(Error::DimensionMismatch(format!(
                "composing a map into [{}] with a map from [{}]",
                self.codomain,
                other.domain()
            )));
        }
        Ok(VertexMap { codomain: other.codomain, values: self.values.iter().map(|&v| other.values[v]).collect() })
    }

    pub fn inverse(&self) -> Result<VertexMap> {
        if !self.is_bijective() {
            return Err(Error::InvalidInput("only bijections can be inverted".into()));
        }
        let mut inv = vec![0; self.codomain];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v] = i;
        }
        Ok(VertexMap { codomain: self.domain(), values: inv })
    }

    /// Preimage of each codomain point.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.codomain];
        for (i, &v) in self.values.iter().enumerate() {
            out[v].push(i);
        }
        out
    }
}

/// `S_G = span{E_ij : i ≃ j}`.
pub fn graph_system(g: &Graph, tol: Tolerance) -> OperatorSystem {
    let n = g.n();
    let pattern: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| g.similar(i, j)).collect();
    let space = MatSubspace::matrix_units(n, n, &pattern, tol).expect("square pattern");
    OperatorSystem::new(space).expect("graph systems are unital and self-adjoint")
}

/// Recovers `G` from `S_G`.
pub fn system_graph(s: &OperatorSystem) -> Result<Graph> {
    let n = s.size();
    let space = s.space();
    let eps = space.tol().eps;
    let mut support = vec![false; n * n];
    for b in space.basis() {
        for i in 0..n {
            for j in 0..n {
                if b[(i, j)].norm() > eps {
                    support[i * n + j] = true;
                }
            }
        }
    }
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if !support[i * n + j] && i != j {
                continue;
            }
            count += 1;
            let (inside, res) = space.contains(&crate::matcore::CMatrix::unit(n, n, i, j))?;
            if !inside {
                return Err(Error::NotAGraphSystem(format!("E_{i}{j} is missing (residual {res:e})")));
            }
        }
    }
    if count != space.dim() {
        return Err(Error::NotAGraphSystem(format!(
            "dimension {} differs from the {count} matrix units in its support",
            space.dim()
        )));
    }
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| support[i * n + j]).collect();
    Graph::new(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{CMatrix, C64};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn graph_systems() {
        let d3 = graph_system(&Graph::empty(3), tol());
        assert!(d3.space().equals(OperatorSystem::diagonal(3, tol()).space()).unwrap().0);
        let k2 = graph_system(&Graph::complete(2), tol());
        assert_eq!(k2.dim(), 4);
        let p3 = graph_system(&Graph::path(3), tol());
        assert_eq!(p3.dim(), 7);
        assert!(!p3.space().contains(&CMatrix::unit(3, 3, 0, 2)).unwrap().0);
        let c5 = Graph::cycle(5);
        assert_eq!(graph_system(&c5, tol()).dim(), 5 + 2 * c5.edge_count());
    }

    #[test]
    fn recovering_graphs() {
        assert_eq!(system_graph(&OperatorSystem::full(2, tol())).unwrap(), Graph::complete(2));
        assert_eq!(system_graph(&OperatorSystem::diagonal(3, tol())).unwrap(), Graph::empty(3));
        let x = CMatrix::from_real(2, 2, &[0., 1., 1., 0.]);
        let s = OperatorSystem::from_matrices(2, &[CMatrix::identity(2), x], tol()).unwrap();
        let Err(Error::NotAGraphSystem(msg)) = system_graph(&s) else { panic!("expected failure") };
        assert!(msg.contains("7.07"), "{msg}");
        let c5 = Graph::cycle(5);
        assert_eq!(system_graph(&graph_system(&c5, tol())).unwrap(), c5);
        // a scalar multiple of I alone is not a graph system
        let s = OperatorSystem::from_matrices(2, &[CMatrix::identity(2).scale(C64::new(0.0, 2.0))], tol()).unwrap();
        assert!(system_graph(&s).is_err());
    }

    #[test]
    fn graph_validation_and_formats() {
        assert!(Graph::new(2, &[(0, 0)]).is_err());
        assert!(Graph::new(2, &[(0, 2)]).is_err());
        assert!(Graph::new(0, &[]).is_err());
        let g: Graph = "4\n0 1\n2 3\n".parse().unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (2, 3)]);
        assert_eq!(g.to_string().parse::<Graph>().unwrap(), g);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"vertices":4,"edges":[[0,1],[2,3]]}"#);
        assert_eq!(serde_json::from_str::<Graph>(&json).unwrap(), g);
        assert!(serde_json::from_str::<Graph>(r#"{"vertices":2,"edges":[[1,1]]}"#).is_err());
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn vertex_maps() {
        let f = VertexMap::new(2, vec![0, 1, 1]).unwrap();
        assert!(f.is_surjective() && !f.is_bijective());
        assert_eq!(f.fibers(), vec![vec![0], vec![1, 2]]);
        assert!(VertexMap::new(2, vec![2]).is_err());
        let swap = VertexMap::new(2, vec![1, 0]).unwrap();
        assert_eq!(f.then(&swap).unwrap().values(), &[1, 0, 0]);
        assert_eq!(swap.inverse().unwrap(), swap);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"domain":3,"codomain":2,"values":[0,1,1],"surjective":true}"#);
        assert_eq!(serde_json::from_str::<VertexMap>(&json).unwrap(), f);
    }
}
