//! Wedderburn decomposition of a unital matrix *-algebra.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{center, StarAlgebra};
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, random_hermitian, CMatrix, MatSubspace, C64};

const ATTEMPTS: usize = 16;

/// One simple summand `M_size ⊗ I_multiplicity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub size: usize,
    pub multiplicity: usize,
}

impl Serialize for Block {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.size, self.multiplicity].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Block {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [size, multiplicity] = <[usize; 2]>::deserialize(d)?;
        Ok(Block { size, multiplicity })
    }
}

/// Unitary `u` with `u* a u = ⊕_j M_{d_j} ⊗ I_{m_j}`.
///
/// Columns of `u` are grouped by block; inside block `j` the column for matrix index `k` and
/// copy `l` sits at `offset_j + k·m_j + l`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    pub unitary: CMatrix,
}

impl BlockDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    /// `(d_j, m_j)` pairs.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.size, b.multiplicity)).collect()
    }

    pub fn offset(&self, j: usize) -> usize {
        self.blocks[..j].iter().map(|b| b.size * b.multiplicity).sum()
    }

    /// Column indices of copy `copy` of block `j`.
    pub fn copy_columns(&self, j: usize, copy: usize) -> Vec<usize> {
        let b = self.blocks[j];
        let o = self.offset(j);
        (0..b.size).map(|k| o + k * b.multiplicity + copy).collect()
    }

    /// Worst distance of `u* x u` from the declared block pattern over the given matrices.
    pub fn pattern_residual(&self, mats: &[CMatrix]) -> f64 {
        mats.iter().map(|x| self.pattern_residual_one(x)).fold(0.0, f64::max)
    }

    fn pattern_residual_one(&self, x: &CMatrix) -> f64 {
        let y = self.unitary.adj_mul(x).matmul(&self.unitary);
        let mut expected = CMatrix::zeros(y.rows(), y.cols());
        for (j, b) in self.blocks.iter().enumerate() {
            let o = self.offset(j);
            let m = b.multiplicity;
            for k in 0..b.size {
                for k2 in 0..b.size {
                    let avg: C64 =
                        (0..m).map(|l| y[(o + k * m + l, o + k2 * m + l)]).sum::<C64>() / (m as f64);
                    for l in 0..m {
                        expected[(o + k * m + l, o + k2 * m + l)] = avg;
                    }
                }
            }
        }
        y.dist(&expected)
    }
}

/// Splits ascending eigenvalues into runs separated by gaps larger than `gap`.
fn clusters(vals: &[f64], gap: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > gap {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn cluster_gap(vals: &[f64]) -> f64 {
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    1e-7 * (1.0 + scale)
}

/// Distinct increasing diagonal weights, used before falling back to random elements.
fn probe_diagonal(n: usize) -> CMatrix {
    CMatrix::diag(&(0..n).map(|i| C64::new((i + 1) as f64 + 0.1 * ((i + 2) as f64).sqrt(), 0.0)).collect::<Vec<_>>())
}

/// Eigen-split of a Hermitian element of `space` whose clusters satisfy `accept`.
fn split_element(
    space: &MatSubspace,
    first: CMatrix,
    rng: &mut impl Rng,
    accept: impl Fn(&[Range<usize>]) -> bool,
) -> Result<(Vec<Range<usize>>, CMatrix)> {
    let n = space.ambient().0;
    let herm = space.hermitian_basis();
    let mut candidate = space.project(&first).hermitian_part();
    for _ in 0..ATTEMPTS {
        let (vals, u) = herm_eig(&candidate)?;
        let cl = clusters(&vals, cluster_gap(&vals));
        if accept(&cl) {
            return Ok((cl, u));
        }
        candidate = random_hermitian(&herm, n, rng);
    }
    Err(Error::Numerical("no generic element found for the block decomposition".into()))
}

/// Unit scalar making the largest entry of `v` real and positive.
fn phase_fix(v: &[C64]) -> C64 {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        z.conj() / z.norm()
    } else {
        C64::new(1.0, 0.0)
    }
}

/// Numerical Artin–Wedderburn decomposition.
///
/// Central projections come from a generic Hermitian central element; inside each block a
/// generic Hermitian element gives the diagonal matrix units, and the off-diagonal units
/// `e_k0` are read off as `e_kk·b·e_00` for a basis element `b`.
pub fn block_decompose(a: &StarAlgebra) -> Result<BlockDecomposition> {
    if !a.is_unital() {
        return Err(Error::NotAlgebra("block decomposition needs a unital algebra".into()));
    }
    let d = a.size();
    let tol = a.space().tol();
    let mut rng = tol.rng("block_decompose");
    let z = center(a);
    let nz = z.dim();
    let w = probe_diagonal(d);

    let (cl, u) = split_element(z.space(), w.clone(), &mut rng, |cl| cl.len() == nz)?;
    let mut parts: Vec<CMatrix> =
        cl.iter().map(|r| u.select(&(0..d).collect::<Vec<_>>(), &r.clone().collect::<Vec<_>>())).collect();
    let first_row = |v: &CMatrix| {
        (0..d).find(|&i| (0..v.cols()).map(|c| v[(i, c)].norm_sqr()).sum::<f64>() > 1e-6).unwrap_or(d)
    };
    parts.sort_by_key(first_row);

    let mut blocks = Vec::new();
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(d);
    for vj in &parts {
        let nj = vj.cols();
        let comp: Vec<CMatrix> = a.space().basis().iter().map(|x| vj.adj_mul(x).matmul(vj)).collect();
        let bj = MatSubspace::new(nj, nj, &comp, tol)?;
        let dj = (bj.dim() as f64).sqrt().round() as usize;
        if dj == 0 || dj * dj != bj.dim() || nj % dj != 0 {
            return Err(Error::Numerical(format!(
                "central summand of dimension {} on a {nj}-dimensional range is not a full matrix block",
                bj.dim()
            )));
        }
        let mj = nj / dj;
        let wj = vj.adj_mul(&w).matmul(vj);
        let (cl, h) =
            split_element(&bj, wj, &mut rng, |cl| cl.len() == dj && cl.iter().all(|r| r.len() == mj))?;
        let idx: Vec<usize> = (0..nj).collect();
        let proj = |r: &Range<usize>| {
            let v = h.select(&idx, &r.clone().collect::<Vec<_>>());
            v.mul_adj(&v)
        };
        let e00 = proj(&cl[0]);
        let mut w0: Vec<Vec<C64>> = cl[0].clone().map(|c| h.column(c)).collect();
        for wl in &mut w0 {
            let ph = phase_fix(&vj.mul_vec(wl));
            wl.iter_mut().for_each(|x| *x *= ph);
        }
        let mut units = vec![CMatrix::identity(nj)];
        for r in &cl[1..] {
            let ekk = proj(r);
            let x = bj
                .basis()
                .iter()
                .map(|b| ekk.matmul(b).matmul(&e00))
                .max_by(|p, q| p.norm().total_cmp(&q.norm()))
                .ok_or_else(|| Error::Numerical("empty block algebra".into()))?;
            let uk = x.scale_re((mj as f64).sqrt() / x.norm());
            let uk = uk.scale(phase_fix(&vj.mul_vec(&uk.mul_vec(&w0[0]))));
            units.push(uk);
        }
        for uk in &units {
            for wl in &w0 {
                columns.push(vj.mul_vec(&uk.mul_vec(wl)));
            }
        }
        blocks.push(Block { size: dj, multiplicity: mj });
    }
    let dec = BlockDecomposition { blocks, unitary: CMatrix::from_columns(d, &columns) };
    let unitarity = dec.unitary.adj_mul(&dec.unitary).dist(&CMatrix::identity(d));
    let res = dec.pattern_residual(a.space().basis());
    let bound = tol.eps * (1.0 + d as f64);
    if unitarity > bound || res > bound {
        return Err(Error::Numerical(format!(
            "block decomposition residuals too large (unitarity {unitarity:e}, pattern {res:e})"
        )));
    }
    Ok(dec)
}
