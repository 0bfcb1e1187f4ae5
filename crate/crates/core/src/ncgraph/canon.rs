//! Canonical labelling by equitable refinement, individualization and automorphism pruning.

use serde::Serialize;

use super::graph::Graph;
use crate::error::{Error, Result};

const NODE_LIMIT: usize = 1 << 20;

/// Canonical relabelling of a graph: `labelling[v]` is the canonical position of `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalForm {
    pub graph: Graph,
    pub labelling: Vec<usize>,
}

type Partition = Vec<Vec<usize>>;

/// Splits cells by neighbour counts into every cell until stable. Sub-cells are ordered by
/// their count signature, so the result does not depend on vertex names.
fn refine(g: &Graph, mut p: Partition) -> Partition {
    loop {
        let n = g.n();
        let mut cell_of = vec![0; n];
        for (c, cell) in p.iter().enumerate() {
            for &v in cell {
                cell_of[v] = c;
            }
        }
        let mut next: Partition = Vec::with_capacity(p.len());
        for cell in &p {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<usize>, usize)> = cell
                .iter()
                .map(|&v| {
                    let mut sig = vec![0; p.len()];
                    for w in g.neighbours(v) {
                        sig[cell_of[w]] += 1;
                    }
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|(_, v)| *v).collect());
                    start = i;
                }
            }
        }
        if next.len() == p.len() {
            return next;
        }
        p = next;
    }
}

fn individualize(p: &Partition, cell: usize, v: usize) -> Partition {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.extend_from_slice(&p[..cell]);
    out.push(vec![v]);
    out.push(p[cell].iter().copied().filter(|&w| w != v).collect());
    out.extend_from_slice(&p[cell + 1..]);
    out
}

/// Upper-triangle adjacency bits under a discrete partition, plus the labelling.
fn leaf(g: &Graph, p: &Partition) -> (Vec<bool>, Vec<usize>) {
    let n = g.n();
    let order: Vec<usize> = p.iter().map(|c| c[0]).collect();
    let mut lab = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        lab[v] = pos;
    }
    let mut bits = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            bits.push(g.adjacent(order[a], order[b]));
        }
    }
    (bits, lab)
}

struct Search<'a> {
    g: &'a Graph,
    best: Option<(Vec<bool>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
    nodes: usize,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

impl Search<'_> {
    fn orbits_fixing(&self, prefix: &[usize]) -> Vec<usize> {
        let n = self.g.n();
        let mut parent: Vec<usize> = (0..n).collect();
        for a in &self.automorphisms {
            if prefix.iter().any(|&v| a[v] != v) {
                continue;
            }
            for (v, &av) in a.iter().enumerate() {
                let (x, y) = (find(&mut parent, v), find(&mut parent, av));
                if x != y {
                    parent[x.max(y)] = x.min(y);
                }
            }
        }
        (0..n).map(|v| find(&mut parent, v)).collect()
    }

    fn visit(&mut self, p: Partition, prefix: &mut Vec<usize>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            return Err(Error::LimitExceeded(format!("canonical labelling exceeded {NODE_LIMIT} search nodes")));
        }
        let Some(cell) = p.iter().position(|c| c.len() > 1) else {
            let (bits, lab) = leaf(self.g, &p);
            match &self.best {
                None => self.best = Some((bits, lab)),
                Some((b, blab)) if bits == *b => {
                    // blab⁻¹ ∘ lab is an automorphism
                    let n = lab.len();
                    let mut inv = vec![0; n];
                    for (v, &pos) in blab.iter().enumerate() {
                        inv[pos] = v;
                    }
                    self.automorphisms.push((0..n).map(|v| inv[lab[v]]).collect());
                }
                Some((b, _)) if bits < *b => self.best = Some((bits, lab)),
                Some(_) => {}
            }
            return Ok(());
        };
        let mut tried: Vec<usize> = Vec::new();
        for &v in &p[cell] {
            let orbits = self.orbits_fixing(prefix);
            if tried.iter().any(|&u| orbits[u] == orbits[v]) {
                continue;
            }
            tried.push(v);
            prefix.push(v);
            let child = refine(self.g, individualize(&p, cell, v));
            self.visit(child, prefix)?;
            prefix.pop();
        }
        Ok(())
    }
}

/// Canonical form: isomorphic graphs, and only those, get equal `graph` fields.
pub fn canonical_form(g: &Graph) -> Result<CanonicalForm> {
    let mut search = Search { g, best: None, automorphisms: Vec::new(), nodes: 0 };
    let root = refine(g, vec![(0..g.n()).collect()]);
    search.visit(root, &mut Vec::new())?;
    let (_, labelling) = search.best.expect("search reaches a leaf");
    Ok(CanonicalForm { graph: g.permuted(&labelling), labelling })
}

/// A bijection `iso` with `g ≅ h` via `v ↦ iso[v]`, if one exists.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Result<Option<Vec<usize>>> {
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return Ok(None);
    }
    let cg = canonical_form(g)?;
    let ch = canonical_form(h)?;
    if cg.graph != ch.graph {
        return Ok(None);
    }
    let mut inv_h = vec![0; h.n()];
    for (v, &pos) in ch.labelling.iter().enumerate() {
        inv_h[pos] = v;
    }
    Ok(Some(cg.labelling.iter().map(|&pos| inv_h[pos]).collect()))
}

pub fn is_isomorphism(g: &Graph, h: &Graph, iso: &[usize]) -> bool {
    let n = g.n();
    if h.n() != n || iso.len() != n {
        return false;
    }
    let mut hit = vec![false; n];
    for &v in iso {
        if v >= n || hit[v] {
            return false;
        }
        hit[v] = true;
    }
    (0..n).all(|i| (0..n).all(|j| g.adjacent(i, j) == h.adjacent(iso[i], iso[j])))
}
