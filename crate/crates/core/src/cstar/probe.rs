//! Semidecision for "s acts irreducibly": no proper union of Wedderburn blocks of `C*(s)`
//! carries a completely isometric compression of `s`.

use rand::Rng;
use serde::Serialize;

use super::{block_decompose, generated_algebra, BlockDecomposition, OperatorSystem};
use crate::matcore::{gram_schmidt_tracked, herm_eig, kernel, CMatrix, MatSubspace, Tolerance, C64, ZERO};

const RESTARTS: usize = 20;
const ASCENT_STEPS: usize = 120;
const ASCENT_RATE: f64 = 0.5;
/// Margin `λ_min(X_L) − λ_min(X_R)` that counts as a separation.
const SEPARATION: f64 = 1e-6;
const MAX_UNIT_BLOCKS: usize = 12;
const MAX_CHOI_ENTRIES: usize = 4096;
const PROJECTION_ROUNDS: usize = 4000;

/// Hermitian `X ∈ M_level(s)` with PSD compression to `kept` but a negative eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationWitness {
    pub kept: Vec<usize>,
    pub level: usize,
    pub matrix: CMatrix,
    pub min_eig: f64,
    pub compressed_min_eig: f64,
}

/// Why the compression is completely isometric.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionCertificate {
    /// Dropped columns are repeated copies of kept blocks; `residual` is the copy defect.
    Multiplicity { residual: f64 },
    /// Choi matrix of a UCP map sending the compression back to the discarded corner.
    UcpInverse { choi: CMatrix, choi_min_eig: f64, residual: f64 },
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Irreducible { level: usize, witnesses: Vec<SeparationWitness> },
    Reducible {
        /// `(block, copy)` pairs spanning the kept subspace.
        kept: Vec<(usize, usize)>,
        isometry: CMatrix,
        compressed_dim: usize,
        certificate: ReductionCertificate,
    },
    Unknown { level: usize, undecided: Vec<Vec<usize>>, reason: String },
}

impl Verdict {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Verdict::Irreducible { .. })
    }

    pub fn is_reducible(&self) -> bool {
        matches!(self, Verdict::Reducible { .. })
    }
}

/// Searches every proper union of blocks for a positivity-separation witness up to
/// `level_cap`; unions with no witness are tested for a UCP inverse of the compression.
pub fn irreducibility_probe(s: &OperatorSystem, level_cap: usize) -> Verdict {
    let level_cap = level_cap.max(1);
    let tol = s.tol();
    let bd = match block_decompose(&generated_algebra(s)) {
        Ok(bd) => bd,
        Err(e) => {
            return Verdict::Unknown { level: 0, undecided: Vec::new(), reason: e.to_string() };
        }
    };
    if bd.blocks.iter().any(|b| b.multiplicity > 1) {
        return multiplicity_reduction(s, &bd);
    }
    let nb = bd.blocks.len();
    if nb == 1 {
        return Verdict::Irreducible { level: 0, witnesses: Vec::new() };
    }
    if nb > MAX_UNIT_BLOCKS {
        return Verdict::Unknown {
            level: 0,
            undecided: Vec::new(),
            reason: format!("{nb} blocks exceed the enumeration cap of {MAX_UNIT_BLOCKS}"),
        };
    }
    let mut rng = tol.rng("irreducibility-probe");
    let amplified: Vec<Vec<CMatrix>> = (1..=level_cap)
        .map(|n| s.space().amplify(n).expect("positive level").hermitian_basis())
        .collect();
    let mut witnesses = Vec::new();
    let mut undecided = Vec::new();
    for mask in 1..(1usize << nb) - 1 {
        let kept: Vec<usize> = (0..nb).filter(|j| mask >> j & 1 == 1).collect();
        let (lcols, rcols) = split_columns(&bd, mask);
        let ul = bd.unitary.select(&all(s.size()), &lcols);
        let ur = bd.unitary.select(&all(s.size()), &rcols);
        if let Some(w) = kernel_witness(s.space(), &ul, &kept) {
            witnesses.push(w);
            continue;
        }
        let found = (1..=level_cap).find_map(|n| {
            ascent_witness(&amplified[n - 1], &ul, &ur, n, &mut rng).map(|(matrix, min_eig, cmin)| {
                SeparationWitness { kept: kept.clone(), level: n, matrix, min_eig, compressed_min_eig: cmin }
            })
        });
        if let Some(w) = found {
            witnesses.push(w);
            continue;
        }
        if let Some(certificate) = ucp_inverse(s.space(), &ul, &ur, tol) {
            return Verdict::Reducible {
                kept: kept.iter().map(|&j| (j, 0)).collect(),
                isometry: ul,
                compressed_dim: s.dim(),
                certificate,
            };
        }
        undecided.push(kept);
    }
    if undecided.is_empty() {
        let level = witnesses.iter().map(|w| w.level).max().unwrap_or(0);
        Verdict::Irreducible { level, witnesses }
    } else {
        Verdict::Unknown {
            level: level_cap,
            undecided,
            reason: "no separation witness and no UCP inverse found".into(),
        }
    }
}

fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn split_columns(bd: &BlockDecomposition, mask: usize) -> (Vec<usize>, Vec<usize>) {
    let mut l = Vec::new();
    let mut r = Vec::new();
    for j in 0..bd.blocks.len() {
        let cols = bd.copy_columns(j, 0);
        if mask >> j & 1 == 1 {
            l.extend(cols);
        } else {
            r.extend(cols);
        }
    }
    (l, r)
}

/// Keeps copy 0 of every block; `u*·s·u` repeats it on the other copies.
fn multiplicity_reduction(s: &OperatorSystem, bd: &BlockDecomposition) -> Verdict {
    let residual = bd.pattern_residual(s.space().basis());
    let kept: Vec<(usize, usize)> = (0..bd.blocks.len()).map(|j| (j, 0)).collect();
    let cols: Vec<usize> = (0..bd.blocks.len()).flat_map(|j| bd.copy_columns(j, 0)).collect();
    let isometry = bd.unitary.select(&all(s.size()), &cols);
    let compressed: Vec<CMatrix> = s.space().basis().iter().map(|b| isometry.adj_mul(b).matmul(&isometry)).collect();
    let k = cols.len();
    let compressed_dim = MatSubspace::new(k, k, &compressed, s.tol()).map(|m| m.dim()).unwrap_or(0);
    let bound = s.tol().eps * (1.0 + s.size() as f64);
    if residual > bound || compressed_dim != s.dim() {
        return Verdict::Unknown {
            level: 0,
            undecided: vec![(0..bd.blocks.len()).collect()],
            reason: format!("copy defect {residual:e}, compressed dimension {compressed_dim} of {}", s.dim()),
        };
    }
    Verdict::Reducible { kept, isometry, compressed_dim, certificate: ReductionCertificate::Multiplicity { residual } }
}

/// Level-1 witness from a Hermitian element of `s` vanishing on the kept corner.
fn kernel_witness(space: &MatSubspace, ul: &CMatrix, kept: &[usize]) -> Option<SeparationWitness> {
    let basis = space.basis();
    let k = ul.cols();
    let cols: Vec<Vec<C64>> = basis.iter().map(|b| ul.adj_mul(b).matmul(ul).into_vec()).collect();
    let ker = kernel(&cols, basis.len(), k * k, space.tol().eps);
    let x = space.combine(ker.first()?);
    // the kernel is adjoint-closed, so one of the Hermitian or skew parts is nonzero
    let skew = (&x - &x.adjoint()).scale(C64::new(0.0, -0.5));
    let mut h = x.hermitian_part();
    if skew.norm() > h.norm() {
        h = skew;
    }
    h = h.scale_re(1.0 / h.norm());
    let (vals, _) = herm_eig(&h).ok()?;
    if vals[vals.len() - 1] > -vals[0] {
        h = -&h;
    }
    let min_eig = vals[0].min(-vals[vals.len() - 1]);
    let compressed_min_eig = herm_eig(&ul.adj_mul(&h).matmul(ul)).ok()?.0[0];
    Some(SeparationWitness { kept: kept.to_vec(), level: 1, matrix: h, min_eig, compressed_min_eig })
}

fn lowest(h: &CMatrix) -> Option<(f64, Vec<C64>)> {
    let (vals, u) = herm_eig(h).ok()?;
    Some((vals[0], u.column(0)))
}

fn combine_real(mats: &[CMatrix], r: &[f64]) -> CMatrix {
    let mut out = CMatrix::zeros(mats[0].rows(), mats[0].cols());
    for (m, &c) in mats.iter().zip(r) {
        out.axpy(C64::new(c, 0.0), m);
    }
    out
}

fn quad(h: &CMatrix, v: &[C64]) -> f64 {
    let hv = h.mul_vec(v);
    v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Alternating eigenvector ascent on `λ_min(X_L) − λ_min(X_R)` over unit Hermitian `X ∈ M_n(s)`.
/// Returns the shifted witness `X − λ_min(X_L)·I`, its least eigenvalue and that of its compression.
fn ascent_witness(
    herm: &[CMatrix],
    ul: &CMatrix,
    ur: &CMatrix,
    n: usize,
    rng: &mut impl Rng,
) -> Option<(CMatrix, f64, f64)> {
    let vl = CMatrix::identity(n).kron(ul);
    let vr = CMatrix::identity(n).kron(ur);
    let hl: Vec<CMatrix> = herm.iter().map(|h| vl.adj_mul(h).matmul(&vl).hermitian_part()).collect();
    let hr: Vec<CMatrix> = herm.iter().map(|h| vr.adj_mul(h).matmul(&vr).hermitian_part()).collect();
    // restarts run in index order so the first success is reproducible
    for _restart in 0..RESTARTS {
        let mut r: Vec<f64> = (0..herm.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        normalize(&mut r);
        for _step in 0..ASCENT_STEPS {
            let (ll, v) = lowest(&combine_real(&hl, &r))?;
            let (lr, w) = lowest(&combine_real(&hr, &r))?;
            if ll - lr > SEPARATION {
                let x = combine_real(herm, &r);
                let shifted = &x - &CMatrix::identity(x.rows()).scale_re(ll);
                let min_eig = herm_eig(&shifted).ok()?.0[0];
                let cmin = herm_eig(&vl.adj_mul(&shifted).matmul(&vl).hermitian_part()).ok()?.0[0];
                if min_eig < -SEPARATION / 2.0 && cmin > -1e-9 {
                    return Some((shifted, min_eig, cmin));
                }
            }
            for (k, rk) in r.iter_mut().enumerate() {
                *rk += ASCENT_RATE * (quad(&hl[k], &v) - quad(&hr[k], &w));
            }
            normalize(&mut r);
        }
    }
    None
}

fn normalize(r: &mut [f64]) {
    let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        r.iter_mut().for_each(|x| *x /= n);
    }
}

/// Alternating projections between the PSD cone and the affine set of Choi matrices `C` of maps
/// `Φ: M_a → M_b` with `Φ(u_L* x u_L) = u_R* x u_R` for `x ∈ s`.
fn ucp_inverse(space: &MatSubspace, ul: &CMatrix, ur: &CMatrix, tol: Tolerance) -> Option<ReductionCertificate> {
    let (a, b) = (ul.cols(), ur.cols());
    let m = a * b;
    if m * m > MAX_CHOI_ENTRIES {
        return None;
    }
    let idx = |i: usize, p: usize, j: usize, q: usize| (i * b + p) * m + j * b + q;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut rhs: Vec<C64> = Vec::new();
    for x in space.basis() {
        let xl = ul.adj_mul(x).matmul(ul);
        let xr = ur.adj_mul(x).matmul(ur);
        for p in 0..b {
            for q in 0..b {
                let mut row = vec![ZERO; m * m];
                for i in 0..a {
                    for j in 0..a {
                        // stored conjugated so that dot(c, row) is the constraint value
                        row[idx(i, p, j, q)] = xl[(i, j)].conj();
                    }
                }
                rows.push(row);
                rhs.push(xr[(p, q)]);
            }
        }
    }
    let refs: Vec<&[C64]> = rows.iter().map(Vec::as_slice).collect();
    let (qs, expr) = gram_schmidt_tracked(&refs, m * m, tol.eps);
    let beta: Vec<C64> = expr.iter().map(|e| e.iter().zip(&rhs).map(|(c, y)| c.conj() * y).sum()).collect();
    let affine = |c: &CMatrix| -> (CMatrix, f64) {
        let mut v = c.as_slice().to_vec();
        let mut moved = 0.0;
        for (q, bk) in qs.iter().zip(&beta) {
            let t = crate::matcore::dot(&v, q) - bk;
            moved += t.norm_sqr();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= t * y;
            }
        }
        (CMatrix::from_vec_unchecked(m, m, v), moved.sqrt())
    };
    let constraint_residual = |c: &CMatrix| -> f64 {
        rows.iter().zip(&rhs).map(|(row, y)| (crate::matcore::dot(c.as_slice(), row) - y).norm()).fold(0.0, f64::max)
    };
    let (mut c, _) = affine(&CMatrix::zeros(m, m));
    if constraint_residual(&c) > tol.eps * (1.0 + c.norm()) * 10.0 {
        return None;
    }
    let target = tol.eps * 10.0;
    for _round in 0..PROJECTION_ROUNDS {
        let psd = crate::matcore::herm_apply(&c.hermitian_part(), |x| x.max(0.0)).ok()?;
        let res = constraint_residual(&psd);
        if res <= target * (1.0 + psd.norm()) {
            let choi_min_eig = herm_eig(&psd).ok()?.0[0];
            return Some(ReductionCertificate::UcpInverse { choi: psd, choi_min_eig, residual: res });
        }
        c = affine(&psd).0;
    }
    None
}
