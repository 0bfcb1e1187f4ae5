//! Abstract Δ-contexts and bihomomorphism contexts: two operator systems, a carrier space and
//! two trilinear maps, checked axiom by axiom.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{closure, quasi_unit, sandwich, Side, Tro, VerificationReport};
use crate::cstar::{multiplier_algebra, OperatorSystem};
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, op_norm, random_element, solve_min_norm, CMatrix, MatSubspace, C64};

const CP_SAMPLES: usize = 200;
const IDENTITY_SAMPLES: usize = 6;

/// Values of both maps on basis triples of the carrier `{m_a}`, `T` `{t_b}` and `S` `{s_c}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearTable {
    /// `bracket[a][b][c] = [m_a*, t_b, m_c]`.
    pub bracket: Vec<Vec<Vec<CMatrix>>>,
    /// `paren[a][c][b] = (m_a, s_c, m_b*)`.
    pub paren: Vec<Vec<Vec<CMatrix>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trilinear {
    /// `[m*, t, n] = m*tn` and `(m, s, n*) = msn*` in the ambient matrices.
    Conjugation,
    Table(TrilinearTable),
}

/// `(S, T, carrier, [·,·,·], (·,·,·))` with `carrier ⊆ M_{d_T, d_S}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBundle")]
pub struct ContextBundle {
    pub s: OperatorSystem,
    pub t: OperatorSystem,
    pub carrier: MatSubspace,
    pub maps: Trilinear,
    pub level_cap: usize,
}

#[derive(Deserialize)]
struct RawBundle {
    s: OperatorSystem,
    t: OperatorSystem,
    carrier: MatSubspace,
    maps: Trilinear,
    #[serde(default = "default_level_cap")]
    level_cap: usize,
}

fn default_level_cap() -> usize {
    3
}

impl TryFrom<RawBundle> for ContextBundle {
    type Error = Error;

    fn try_from(r: RawBundle) -> Result<Self> {
        ContextBundle::new(r.s, r.t, r.carrier, r.maps, r.level_cap)
    }
}

impl ContextBundle {
    pub fn new(
        s: OperatorSystem,
        t: OperatorSystem,
        carrier: MatSubspace,
        maps: Trilinear,
        level_cap: usize,
    ) -> Result<Self> {
        let (ds, dt) = (s.size(), t.size());
        if carrier.ambient() != (dt, ds) {
            return Err(Error::DimensionMismatch(format!(
                "carrier {:?} must sit in M_{{{dt},{ds}}}",
                carrier.ambient()
            )));
        }
        if level_cap == 0 {
            return Err(Error::InvalidInput("level cap must be positive".into()));
        }
        if let Trilinear::Table(tab) = &maps {
            let (nm, nt, ns) = (carrier.dim(), t.dim(), s.dim());
            let shape_ok = |v: &Vec<Vec<Vec<CMatrix>>>, mid: usize, d: usize| {
                v.len() == nm
                    && v.iter().all(|row| {
                        row.len() == mid && row.iter().all(|col| col.len() == nm && col.iter().all(|x| x.shape() == (d, d)))
                    })
            };
            if !shape_ok(&tab.bracket, nt, ds) || !shape_ok(&tab.paren, ns, dt) {
                return Err(Error::DimensionMismatch(format!(
                    "trilinear tables must be {nm}x{nt}x{nm} of {ds}x{ds} and {nm}x{ns}x{nm} of {dt}x{dt} matrices"
                )));
            }
        }
        Ok(ContextBundle { s, t, carrier, maps, level_cap })
    }

    pub fn conjugation(s: OperatorSystem, t: OperatorSystem, carrier: MatSubspace, level_cap: usize) -> Result<Self> {
        Self::new(s, t, carrier, Trilinear::Conjugation, level_cap)
    }

    /// Same maps, stored as explicit tables.
    pub fn tabulated(&self) -> ContextBundle {
        if let Trilinear::Table(_) = self.maps {
            return self.clone();
        }
        let m = self.carrier.basis();
        let bracket = m
            .iter()
            .map(|x| {
                self.t.space().basis().iter().map(|t| m.iter().map(|y| x.adj_mul(t).matmul(y)).collect()).collect()
            })
            .collect();
        let paren = m
            .iter()
            .map(|x| {
                self.s.space().basis().iter().map(|s| m.iter().map(|y| x.matmul(s).mul_adj(y)).collect()).collect()
            })
            .collect();
        ContextBundle { maps: Trilinear::Table(TrilinearTable { bracket, paren }), ..self.clone() }
    }

    /// Adds `⟨m, n⟩·offset` to `(m, 1_S, n*)`, leaving `(m, s, n*)` unchanged on `s ⊥ 1_S`.
    pub fn with_unit_offset(&self, offset: &CMatrix) -> Result<ContextBundle> {
        if offset.shape() != (self.t.size(), self.t.size()) {
            return Err(Error::DimensionMismatch("offset must live in M_{d_T}".into()));
        }
        let mut out = self.tabulated();
        let unit = CMatrix::identity(self.s.size());
        let coords = self.s.space().coords(&unit);
        let scale = unit.norm().powi(2);
        let Trilinear::Table(tab) = &mut out.maps else { unreachable!("tabulated") };
        for (a, row) in tab.paren.iter_mut().enumerate() {
            for (c, col) in row.iter_mut().enumerate() {
                col[a].axpy(coords[c].conj() / scale, offset);
            }
        }
        Ok(out)
    }

    /// Transposes every value of `[·,·,·]`: positive at level 1 on symmetric data, not completely positive.
    pub fn with_transposed_bracket(&self) -> ContextBundle {
        let mut out = self.tabulated();
        let Trilinear::Table(tab) = &mut out.maps else { unreachable!("tabulated") };
        for v in tab.bracket.iter_mut().flatten().flatten() {
            *v = v.transpose();
        }
        out
    }

    /// `[x*, t, y]`.
    pub fn bracket(&self, x: &CMatrix, t: &CMatrix, y: &CMatrix) -> CMatrix {
        match &self.maps {
            Trilinear::Conjugation => x.adj_mul(t).matmul(y),
            Trilinear::Table(tab) => {
                let (al, be, ga) = (self.carrier.coords(x), self.t.space().coords(t), self.carrier.coords(y));
                contract(&tab.bracket, &al, &be, &ga, true, self.s.size())
            }
        }
    }

    /// `(x, s, y*)`.
    pub fn paren(&self, x: &CMatrix, s: &CMatrix, y: &CMatrix) -> CMatrix {
        match &self.maps {
            Trilinear::Conjugation => x.matmul(s).mul_adj(y),
            Trilinear::Table(tab) => {
                let (al, si, ga) = (self.carrier.coords(x), self.s.space().coords(s), self.carrier.coords(y));
                contract(&tab.paren, &al, &si, &ga, false, self.t.size())
            }
        }
    }
}

/// `Σ f(α_a) β_b g(γ_c) v[a][b][c]`, conjugating `α` for the bracket and `γ` for the paren.
fn contract(v: &[Vec<Vec<CMatrix>>], al: &[C64], be: &[C64], ga: &[C64], bracket: bool, d: usize) -> CMatrix {
    let mut out = CMatrix::zeros(d, d);
    for (a, row) in v.iter().enumerate() {
        let xa = if bracket { al[a].conj() } else { al[a] };
        if xa.norm() == 0.0 {
            continue;
        }
        for (b, col) in row.iter().enumerate() {
            let xb = xa * be[b];
            if xb.norm() == 0.0 {
                continue;
            }
            for (c, val) in col.iter().enumerate() {
                let z = xb * if bracket { ga[c] } else { ga[c].conj() };
                if z.norm() != 0.0 {
                    out.axpy(z, val);
                }
            }
        }
    }
    out
}

type Grid = Vec<Vec<CMatrix>>;

fn random_grid(space: &MatSubspace, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Grid {
    (0..rows).map(|_| (0..cols).map(|_| random_element(space, rng)).collect()).collect()
}

fn split(m: &CMatrix, n: usize, d: usize) -> Grid {
    (0..n).map(|i| (0..n).map(|j| m.block(i * d, j * d, d, d)).collect()).collect()
}

/// Random element of `M_n(space)` shifted to have least eigenvalue zero.
fn random_psd(space: &MatSubspace, n: usize, rng: &mut ChaCha8Rng) -> Grid {
    let d = space.ambient().0;
    let h = CMatrix::from_blocks(&random_grid(space, n, n, rng)).hermitian_part();
    let (vals, _) = herm_eig(&h).expect("hermitian");
    split(&(&h - &CMatrix::identity(n * d).scale_re(vals[0])), n, d)
}

/// `[X*, T, Y]_{ij} = Σ_kl [X_ki*, T_kl, Y_lj]`.
#[allow(clippy::needless_range_loop)]
fn bracket_level(ctx: &ContextBundle, x: &Grid, t: &Grid, y: &Grid) -> CMatrix {
    let (m, n) = (x.len(), x[0].len());
    let ds = ctx.s.size();
    let mut out = CMatrix::zeros(n * ds, n * ds);
    for i in 0..n {
        for j in 0..n {
            let mut acc = CMatrix::zeros(ds, ds);
            for k in 0..m {
                for l in 0..m {
                    acc = &acc + &ctx.bracket(&x[k][i], &t[k][l], &y[l][j]);
                }
            }
            out.set_block(i * ds, j * ds, &acc);
        }
    }
    out
}

/// `(X, S, Y*)_{ij} = Σ_kl (X_ik, S_kl, Y_jl*)`.
#[allow(clippy::needless_range_loop)]
fn paren_level(ctx: &ContextBundle, x: &Grid, s: &Grid, y: &Grid) -> CMatrix {
    let (n, m) = (x.len(), x[0].len());
    let dt = ctx.t.size();
    let mut out = CMatrix::zeros(n * dt, n * dt);
    for i in 0..n {
        for j in 0..n {
            let mut acc = CMatrix::zeros(dt, dt);
            for k in 0..m {
                for l in 0..m {
                    acc = &acc + &ctx.paren(&x[i][k], &s[k][l], &y[j][l]);
                }
            }
            out.set_block(i * dt, j * dt, &acc);
        }
    }
    out
}

/// Block operator norm of a grid of carrier elements.
fn grid_norm(g: &Grid) -> f64 {
    op_norm(&CMatrix::from_blocks(g))
}

/// Sampled complete positivity and complete contractivity of both maps at square levels up to
/// the cap (rectangular levels embed into square ones by zero padding). Conjugation maps are
/// completely positive and completely contractive outright.
fn positivity_and_contractivity(ctx: &ContextBundle, report: &mut VerificationReport, rng: &mut ChaCha8Rng) {
    if ctx.maps == Trilinear::Conjugation {
        for axiom in ["cp_bracket", "cp_paren", "contractive_bracket", "contractive_paren"] {
            report.flag(axiom, true, 0.0, None);
        }
        return;
    }
    let eps = ctx.s.tol().eps;
    let mut worst = [0.0f64; 4];
    let mut at: [Option<serde_json::Value>; 4] = Default::default();
    let mut note = |k: usize, r: f64, level: usize, sample: usize| {
        if r > worst[k] {
            worst[k] = r;
            at[k] = Some(serde_json::json!({"level": level, "sample": sample}));
        }
    };
    for n in 1..=ctx.level_cap {
        for sample in 0..CP_SAMPLES {
            let x = random_grid(&ctx.carrier, n, n, rng);
            let t = random_psd(ctx.t.space(), n, rng);
            let out = bracket_level(ctx, &x, &t, &x).hermitian_part();
            let scale = 1.0 + grid_norm(&x).powi(2) * grid_norm(&t);
            note(0, (-herm_eig(&out).expect("hermitian").0[0]).max(0.0) / scale, n, sample);
            let s = random_psd(ctx.s.space(), n, rng);
            let out = paren_level(ctx, &x, &s, &x).hermitian_part();
            let scale = 1.0 + grid_norm(&x).powi(2) * grid_norm(&s);
            note(1, (-herm_eig(&out).expect("hermitian").0[0]).max(0.0) / scale, n, sample);

            let y = random_grid(&ctx.carrier, n, n, rng);
            let tt = random_grid(ctx.t.space(), n, n, rng);
            let bound = grid_norm(&x) * grid_norm(&tt) * grid_norm(&y);
            let excess = op_norm(&bracket_level(ctx, &x, &tt, &y)) - bound;
            note(2, excess.max(0.0) / (1.0 + bound), n, sample);
            let ss = random_grid(ctx.s.space(), n, n, rng);
            let bound = grid_norm(&x) * grid_norm(&ss) * grid_norm(&y);
            let excess = op_norm(&paren_level(ctx, &x, &ss, &y)) - bound;
            note(3, excess.max(0.0) / (1.0 + bound), n, sample);
        }
    }
    let names = ["cp_bracket", "cp_paren", "contractive_bracket", "contractive_paren"];
    for k in 0..4 {
        report.flag(names[k], worst[k] <= 10.0 * eps, worst[k], at[k].take());
    }
}

/// Records the worst relative defect `‖lhs − rhs‖ / (1 + ‖lhs‖ + ‖rhs‖)` over samples.
fn sampled(
    report: &mut VerificationReport,
    axiom: &str,
    eps: f64,
    rng: &mut ChaCha8Rng,
    mut pair: impl FnMut(&mut ChaCha8Rng) -> (CMatrix, CMatrix),
) {
    let mut worst = 0.0;
    let mut at = None;
    for k in 0..IDENTITY_SAMPLES {
        let (l, r) = pair(rng);
        let d = l.dist(&r) / (1.0 + l.norm() + r.norm());
        if d > worst {
            worst = d;
            at = Some(k);
        }
    }
    report.flag(axiom, worst <= 10.0 * eps, worst, at.map(|k| serde_json::json!({"sample": k})));
}

fn values_inside(
    report: &mut VerificationReport,
    axiom: &str,
    target: &MatSubspace,
    values: impl Iterator<Item = ((usize, usize, usize), CMatrix)>,
) {
    let mut worst = 0.0;
    let mut at = None;
    for (idx, v) in values {
        let r = target.residual(&v) / (1.0 + v.norm());
        if r > worst {
            worst = r;
            at = Some(idx);
        }
    }
    let ok = worst <= target.tol().eps;
    report.flag(axiom, ok, worst, at.map(|(a, b, c)| serde_json::json!({"basis_triple": [a, b, c]})));
}

/// Both maps take values in the right systems.
fn ranges(ctx: &ContextBundle, report: &mut VerificationReport) {
    let m = &ctx.carrier;
    match &ctx.maps {
        Trilinear::Conjugation => {
            let adj = m.adjoint_space();
            let (ok, r) = ctx.s.space().contains_space(&sandwich(&adj, ctx.t.space(), m).expect("shapes")).expect("ambient");
            report.flag("range_bracket", ok, r, None);
            let (ok, r) = ctx.t.space().contains_space(&sandwich(m, ctx.s.space(), &adj).expect("shapes")).expect("ambient");
            report.flag("range_paren", ok, r, None);
        }
        Trilinear::Table(tab) => {
            let flat = |v: &Vec<Vec<Vec<CMatrix>>>| {
                v.iter()
                    .enumerate()
                    .flat_map(|(a, row)| {
                        row.iter().enumerate().flat_map(move |(b, col)| col.iter().enumerate().map(move |(c, x)| ((a, b, c), x.clone())))
                    })
                    .collect::<Vec<_>>()
            };
            values_inside(report, "range_bracket", ctx.s.space(), flat(&tab.bracket).into_iter());
            values_inside(report, "range_paren", ctx.t.space(), flat(&tab.paren).into_iter());
        }
    }
}

fn unit_relations(ctx: &ContextBundle, report: &mut VerificationReport) {
    let m = ctx.carrier.basis();
    let (one_s, one_t) = (CMatrix::identity(ctx.s.size()), CMatrix::identity(ctx.t.size()));
    let mut worst = 0.0;
    let mut at = None;
    for (a, x) in m.iter().enumerate() {
        for (b, y) in m.iter().enumerate() {
            // (m_a, 1_S, m_b*) = (m_a m_b*)·1_T and [m_a*, 1_T, m_b] = (m_a* m_b)·1_S
            let p = ctx.paren(x, &one_s, y).dist(&x.mul_adj(y));
            let q = ctx.bracket(x, &one_t, y).dist(&x.adj_mul(y));
            for (r, which) in [(p, "paren"), (q, "bracket")] {
                if r > worst {
                    worst = r;
                    at = Some(serde_json::json!({"basis_pair": [a, b], "relation": which}));
                }
            }
        }
    }
    report.flag("eq_move", worst <= 10.0 * ctx.s.tol().eps, worst, at);
}

/// Axioms of a Δ-context, the unit relations, and the six derived identities.
pub fn verify_delta_context(ctx: &ContextBundle) -> VerificationReport {
    let mut report = VerificationReport::new();
    let eps = ctx.s.tol().eps;
    let mut rng = ctx.s.tol().rng("delta-context");
    let m = &ctx.carrier;
    let (res, left, right) = closure(m).expect("carrier and adjoint multiply");
    report.check("carrier_tro", res, 2.0 * eps);
    let (lok, lr) = left.contains_identity();
    let (rok, rr) = right.contains_identity();
    report.flag(
        "unital_algebras",
        lok && rok,
        lr.max(rr),
        Some(serde_json::json!({"identity_in_mm_star": lok, "identity_in_m_star_m": rok})),
    );
    let s = ctx.s.space();
    let t = ctx.t.space();
    let inside = |target: &MatSubspace, a: &MatSubspace, b: &MatSubspace| {
        let (ok1, r1) = target.contains_space(&a.product_span(b).expect("shapes")).expect("ambient");
        let (ok2, r2) = target.contains_space(&b.product_span(a).expect("shapes")).expect("ambient");
        (ok1 && ok2, r1.max(r2))
    };
    let (ok, r) = inside(s, &right, s);
    report.flag("bimodule_s", ok, r, None);
    let (ok, r) = inside(t, &left, t);
    report.flag("bimodule_t", ok, r, None);
    ranges(ctx, &mut report);
    positivity_and_contractivity(ctx, &mut report, &mut rng);

    let rm = |rng: &mut ChaCha8Rng| random_element(m, rng);
    let one_s = CMatrix::identity(ctx.s.size());
    let one_t = CMatrix::identity(ctx.t.size());
    sampled(&mut report, "modular_bracket", eps, &mut rng, |rng| {
        let (m1, m2, tt, a, b) = (rm(rng), rm(rng), random_element(t, rng), random_element(&right, rng), random_element(&right, rng));
        // a·[m1*, t, m2]·b = [(m1 a*)*, t, m2 b]
        let lhs = a.matmul(&ctx.bracket(&m1, &tt, &m2)).matmul(&b);
        (lhs, ctx.bracket(&m1.mul_adj(&a), &tt, &m2.matmul(&b)))
    });
    sampled(&mut report, "modular_paren", eps, &mut rng, |rng| {
        let (m1, m2, ss, c, d) = (rm(rng), rm(rng), random_element(s, rng), random_element(&left, rng), random_element(&left, rng));
        // c·(m1, s, m2*)·d = (c m1, s, (d* m2)*)
        let lhs = c.matmul(&ctx.paren(&m1, &ss, &m2)).matmul(&d);
        (lhs, ctx.paren(&c.matmul(&m1), &ss, &d.adj_mul(&m2)))
    });
    sampled(&mut report, "associativity_paren", eps, &mut rng, |rng| {
        let (m1, m2, m3, m4, tt) = (rm(rng), rm(rng), rm(rng), rm(rng), random_element(t, rng));
        let lhs = ctx.paren(&m1, &ctx.bracket(&m2, &tt, &m3), &m4);
        (lhs, m1.mul_adj(&m2).matmul(&tt).matmul(&m3.mul_adj(&m4)))
    });
    sampled(&mut report, "associativity_bracket", eps, &mut rng, |rng| {
        let (m1, m2, m3, m4, ss) = (rm(rng), rm(rng), rm(rng), rm(rng), random_element(s, rng));
        let lhs = ctx.bracket(&m1, &ctx.paren(&m2, &ss, &m3), &m4);
        (lhs, m1.adj_mul(&m2).matmul(&ss).matmul(&m3.adj_mul(&m4)))
    });
    unit_relations(ctx, &mut report);
    sampled(&mut report, "nested_bracket", eps, &mut rng, |rng| {
        let (m1, m2, m3, n1, n2, n3, tt) = (rm(rng), rm(rng), rm(rng), rm(rng), rm(rng), rm(rng), random_element(t, rng));
        let inner = ctx.paren(&m2, &ctx.bracket(&m3, &tt, &n3), &n2);
        let lhs = ctx.bracket(&m1, &inner, &n1);
        // first slot (m1* m2 m3*)* = m3 m2* m1
        (lhs, ctx.bracket(&m3.mul_adj(&m2).matmul(&m1), &tt, &n3.mul_adj(&n2).matmul(&n1)))
    });
    sampled(&mut report, "nested_paren", eps, &mut rng, |rng| {
        let (m1, m2, m3, n1, n2, n3, ss) = (rm(rng), rm(rng), rm(rng), rm(rng), rm(rng), rm(rng), random_element(s, rng));
        let inner = ctx.bracket(&m2, &ctx.paren(&m3, &ss, &n3), &n2);
        let lhs = ctx.paren(&m1, &inner, &n1);
        // last slot (n3* n2 n1*)* = n1 n2* n3
        (lhs, ctx.paren(&m1.mul_adj(&m2).matmul(&m3), &ss, &n1.mul_adj(&n2).matmul(&n3)))
    });
    sampled(&mut report, "paren_unit", eps, &mut rng, |rng| {
        let (m1, m2) = (rm(rng), rm(rng));
        (ctx.paren(&m1, &one_s, &m2), one_t.matmul(&m1.mul_adj(&m2)))
    });
    sampled(&mut report, "bracket_unit", eps, &mut rng, |rng| {
        let (m1, m2) = (rm(rng), rm(rng));
        (ctx.bracket(&m1, &one_t, &m2), one_s.matmul(&m1.adj_mul(&m2)))
    });
    sampled(&mut report, "bracket_unit_shift", eps, &mut rng, |rng| {
        let (m1, m2, n1, n2) = (rm(rng), rm(rng), rm(rng), rm(rng));
        let lhs = ctx.bracket(&m1, &ctx.paren(&m2, &one_s, &n2), &n1);
        let mid = ctx.bracket(&m1, &one_t, &m2.mul_adj(&n2).matmul(&n1));
        let rhs = ctx.bracket(&n2.mul_adj(&m2).matmul(&m1), &one_t, &n1);
        let worst = if lhs.dist(&mid) > lhs.dist(&rhs) { mid } else { rhs };
        (lhs, worst)
    });
    sampled(&mut report, "paren_unit_shift", eps, &mut rng, |rng| {
        let (m1, m2, n1, n2) = (rm(rng), rm(rng), rm(rng), rm(rng));
        let lhs = ctx.paren(&m1, &ctx.bracket(&m2, &one_t, &n2), &n1);
        let mid = ctx.paren(&m1, &one_s, &n1.mul_adj(&n2).matmul(&m2));
        let rhs = ctx.paren(&m1.mul_adj(&m2).matmul(&n2), &one_s, &n1);
        let worst = if lhs.dist(&mid) > lhs.dist(&rhs) { mid } else { rhs };
        (lhs, worst)
    });
    report
}

/// Finite semi-units: `Σ xᵢ*yᵢ = I_H` and `Σ zᵢwᵢ* = I_K` with all entries in the carrier.
#[derive(Clone, Debug, Serialize)]
pub struct SemiUnits {
    pub x: Vec<CMatrix>,
    pub y: Vec<CMatrix>,
    pub z: Vec<CMatrix>,
    pub w: Vec<CMatrix>,
}

impl SemiUnits {
    /// Quasi-units when the carrier is a TRO; otherwise the identity is expanded in `[X*X]`
    /// and `[XX*]` by a least-norm linear solve.
    pub fn of(carrier: &MatSubspace) -> Result<SemiUnits> {
        if let Ok(m) = Tro::new(carrier.clone()) {
            if let (Ok(r), Ok(l)) = (quasi_unit(&m, Side::Right), quasi_unit(&m, Side::Left)) {
                return Ok(SemiUnits { x: r.clone(), y: r, z: l.clone(), w: l });
            }
        }
        let (x, y) = expand_identity(carrier, false)?;
        let (z, w) = expand_identity(carrier, true)?;
        Ok(SemiUnits { x, y, z, w })
    }
}

/// `I = Σ_pq c_pq u_p* u_q` (or `u_p u_q*` when `rows`), returned as `(u_p, Σ_q c_pq u_q)` pairs
/// so that `Σ aᵢ* bᵢ = I` (or `Σ aᵢ bᵢ* = I`).
fn expand_identity(x: &MatSubspace, rows: bool) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
    let b = x.basis();
    let n = b.len();
    let d = if rows { x.ambient().0 } else { x.ambient().1 };
    let prod = |p: usize, q: usize| if rows { b[p].mul_adj(&b[q]) } else { b[p].adj_mul(&b[q]) };
    let cols: Vec<Vec<C64>> = (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| prod(p, q).into_vec()).collect();
    let (sol, res) = solve_min_norm(&cols, CMatrix::identity(d).as_slice(), x.tol().eps);
    if res > x.tol().eps * (1.0 + d as f64) {
        let which = if rows { "[XX*]" } else { "[X*X]" };
        return Err(Error::Precondition(format!("I ∉ {which} (residual {res:e})")));
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    for p in 0..n {
        let mut acc = CMatrix::zeros(x.ambient().0, x.ambient().1);
        for q in 0..n {
            // rows: c_pq u_p u_q* = u_p (conj(c_pq) u_q)*
            let c = if rows { sol[p * n + q].conj() } else { sol[p * n + q] };
            acc.axpy(c, &b[q]);
        }
        left.push(b[p].clone());
        right.push(acc);
    }
    Ok((left, right))
}

/// Axioms of a bihomomorphism context, with exact finite semi-units.
pub fn verify_bihom_context(ctx: &ContextBundle) -> VerificationReport {
    let mut report = VerificationReport::new();
    let eps = ctx.s.tol().eps;
    let mut rng = ctx.s.tol().rng("bihom-context");
    let x = &ctx.carrier;
    let adj = x.adjoint_space();
    let (lok, lr) = x.product_span(&adj).expect("shapes").contains_identity();
    let (rok, rr) = adj.product_span(x).expect("shapes").contains_identity();
    report.flag(
        "nondegenerate",
        lok && rok,
        lr.max(rr),
        Some(serde_json::json!({"identity_in_xx_star": lok, "identity_in_x_star_x": rok})),
    );
    ranges(ctx, &mut report);
    let (a_s, a_t) = (multiplier_algebra(&ctx.s), multiplier_algebra(&ctx.t));
    let (one_s, one_t) = (CMatrix::identity(ctx.s.size()), CMatrix::identity(ctx.t.size()));
    let b = x.basis();
    let mut worst: f64 = 0.0;
    for p in b {
        for q in b {
            let u = ctx.bracket(p, &one_t, q);
            let v = ctx.paren(p, &one_s, q);
            worst = worst.max(a_s.space().residual(&u) / (1.0 + u.norm()));
            worst = worst.max(a_t.space().residual(&v) / (1.0 + v.norm()));
        }
    }
    report.check("multiplier_range", worst, eps);
    positivity_and_contractivity(ctx, &mut report, &mut rng);
    let s = ctx.s.space();
    let t = ctx.t.space();
    let rx = |rng: &mut ChaCha8Rng| random_element(x, rng);
    sampled(&mut report, "associativity_bracket", eps, &mut rng, |rng| {
        let (x1, x2, x3, x4, ss) = (rx(rng), rx(rng), rx(rng), rx(rng), random_element(s, rng));
        let lhs = ctx.bracket(&x1, &ctx.paren(&x2, &ss, &x3), &x4);
        (lhs, ctx.bracket(&x1, &one_t, &x2).matmul(&ss).matmul(&ctx.bracket(&x3, &one_t, &x4)))
    });
    sampled(&mut report, "associativity_paren", eps, &mut rng, |rng| {
        let (x1, x2, x3, x4, tt) = (rx(rng), rx(rng), rx(rng), rx(rng), random_element(t, rng));
        let lhs = ctx.paren(&x1, &ctx.bracket(&x2, &tt, &x3), &x4);
        (lhs, ctx.paren(&x1, &one_s, &x2).matmul(&tt).matmul(&ctx.paren(&x3, &one_s, &x4)))
    });
    match SemiUnits::of(x) {
        Err(e) => report.flag("semi_units", false, f64::INFINITY, Some(serde_json::json!({"error": e.to_string()}))),
        Ok(u) => {
            let mut xy = CMatrix::zeros(ctx.s.size(), ctx.s.size());
            let mut br = xy.clone();
            for (xi, yi) in u.x.iter().zip(&u.y) {
                xy = &xy + &xi.adj_mul(yi);
                br = &br + &ctx.bracket(xi, &one_t, yi);
            }
            let mut zw = CMatrix::zeros(ctx.t.size(), ctx.t.size());
            let mut pa = zw.clone();
            for (zi, wi) in u.z.iter().zip(&u.w) {
                zw = &zw + &zi.mul_adj(wi);
                pa = &pa + &ctx.paren(zi, &one_s, wi);
            }
            let r = xy.dist(&one_s).max(zw.dist(&one_t));
            report.check("semi_units", r, 10.0 * eps * (1.0 + ctx.t.size() as f64));
            let r = br.dist(&one_s).max(pa.dist(&one_t));
            report.flag(
                "eq_adjxi",
                r <= 10.0 * eps * (1.0 + ctx.t.size() as f64),
                r,
                Some(serde_json::json!({"bracket_defect": br.dist(&one_s), "paren_defect": pa.dist(&one_t)})),
            );
        }
    }
    report
}
