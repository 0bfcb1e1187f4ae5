//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p deltaeq-cli --test acceptance`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use deltaeq_cli::run;
use deltaeq_core::cstar::{amplify, block_decompose, generated_algebra, multiplier_algebra, OperatorSystem};
use deltaeq_core::funcsys::{rigid_stable_structure, theta_iso, toeplitz_system, ThetaMode};
use deltaeq_core::matcore::{CMatrix, MatSubspace, Tolerance, C64};
use deltaeq_core::morita::{atom_sum, bimodule_atoms, random_representation, roundtrip_unitary, transport_bimodule, Representation};
use deltaeq_core::ncgraph::{decide_delta_graphs, graph_system, synthesize_graph_tro, twin_quotient, Graph, PullbackWitness};
use deltaeq_core::tro::{
    factorization_maps, kraus_witness_from_space, verify_bihom_context, verify_delta_context, verify_tro_equivalence,
    ContextBundle, Tro, VerificationReport,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

const SEED: u64 = 0;
const MAX_VERTICES: usize = 5;
const LATTICE_VERTICES: usize = 4;
const TRO_RESIDUAL: f64 = 1e-9;
const SUBSPACE_RESIDUAL: f64 = 1e-9;
const RIGID_RESIDUAL: f64 = 1e-9;
const ROUNDTRIP_RESIDUAL: f64 = 1e-8;
const LATTICE_RESIDUAL: f64 = 1e-9;
const THETA_RESIDUAL: f64 = 1e-9;
const FACTORIZATION_RESIDUAL: f64 = 1e-10;
const RANDOM_REPS: usize = 50;
const DIAGONAL_PAIRS: usize = 20;
const MEET_SAMPLES: usize = 400;
const CONTEXT_LEVEL_CAP: usize = 3;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const RIGIDITY_BUDGET: Duration = Duration::from_secs(5);
const ROUNDTRIP_BUDGET: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;

fn tol() -> Tolerance {
    Tolerance::new(1e-9, SEED).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------- independent graph oracle: bitmask adjacency, brute-force surjections ----------

#[derive(Clone)]
struct Adj {
    n: usize,
    rows: Vec<u32>,
}

impl Adj {
    fn from_bits(n: usize, bits: u64) -> Adj {
        let mut rows = vec![0u32; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bits >> k & 1 == 1 {
                    rows[i] |= 1 << j;
                    rows[j] |= 1 << i;
                }
                k += 1;
            }
        }
        Adj { n, rows }
    }

    fn similar(&self, i: usize, j: usize) -> bool {
        i == j || self.rows[i] >> j & 1 == 1
    }

    fn bits_under(&self, perm: &[usize]) -> u64 {
        let mut out = 0u64;
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.rows[perm[i]] >> perm[j] & 1 == 1 {
                    out |= 1 << k;
                }
                k += 1;
            }
        }
        out
    }

    fn to_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.rows[i] >> j & 1 == 1 {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(self.n, &edges).unwrap()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// One labelled representative per isomorphism class, by minimal relabelled edge mask.
fn isomorphism_classes(n: usize) -> Vec<Adj> {
    let perms = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut reps = Vec::new();
    for bits in 0..1u64 << (n * (n - 1) / 2) {
        let g = Adj::from_bits(n, bits);
        let key = perms.iter().map(|p| g.bits_under(p)).min().unwrap();
        if seen.insert(key) {
            reps.push(g);
        }
    }
    reps
}

fn surjections(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut f = vec![0; n];
    loop {
        let mut hit = vec![false; k];
        f.iter().for_each(|&v| hit[v] = true);
        if hit.iter().all(|&h| h) {
            out.push(f.clone());
        }
        let mut i = 0;
        while i < n {
            f[i] += 1;
            if f[i] < k {
                break;
            }
            f[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

/// Which labelled targets on ≤ `max` vertices `g` is a pullback of.
fn pullback_targets(g: &Adj, max: usize, maps: &BTreeMap<(usize, usize), Vec<Vec<usize>>>) -> Vec<bool> {
    let mut out = Vec::new();
    for k in 1..=max {
        let empty = Vec::new();
        let fs = maps.get(&(g.n, k)).unwrap_or(&empty);
        for bits in 0..1u64 << (k * (k - 1) / 2) {
            let target = Adj::from_bits(k, bits);
            out.push(fs.iter().any(|f| (0..g.n).all(|x| (0..g.n).all(|y| g.similar(x, y) == target.similar(f[x], f[y])))));
        }
    }
    out
}

struct Corpus {
    graphs: Vec<Graph>,
    /// `(i, j, witness)` for every equivalent pair `i ≤ j`.
    witnesses: Vec<(usize, usize, PullbackWitness)>,
}

impl Corpus {
    fn systems(&self, i: usize, j: usize, w: &PullbackWitness) -> (OperatorSystem, OperatorSystem, Tro) {
        let m = synthesize_graph_tro(w, tol()).unwrap();
        (graph_system(&self.graphs[i], tol()), graph_system(&self.graphs[j], tol()), m)
    }
}

fn criterion_1(corpus: &mut Option<Corpus>) -> Outcome {
    let start = Instant::now();
    let reps: Vec<Adj> = (1..=MAX_VERTICES).flat_map(isomorphism_classes).collect();
    let at5 = reps.iter().filter(|g| g.n == 5).count();
    ensure(at5 == 34, || format!("{at5} isomorphism classes on 5 vertices, expected 34"))?;
    let mut maps = BTreeMap::new();
    for n in 1..=MAX_VERTICES {
        for k in 1..=n {
            maps.insert((n, k), surjections(n, k));
        }
    }
    let targets: Vec<Vec<bool>> = reps.iter().map(|g| pullback_targets(g, MAX_VERTICES, &maps)).collect();
    let graphs: Vec<Graph> = reps.iter().map(Adj::to_graph).collect();
    let mut witnesses = Vec::new();
    let mut disagreements = Vec::new();
    let mut pairs = 0;
    for i in 0..graphs.len() {
        for j in 0..graphs.len() {
            let oracle = targets[i].iter().zip(&targets[j]).any(|(a, b)| *a && *b);
            let d = decide_delta_graphs(&graphs[i], &graphs[j]).map_err(|e| e.to_string())?;
            pairs += 1;
            if d.is_equivalent() != oracle {
                disagreements.push((i, j));
            }
            if i <= j {
                if let Some(w) = d.witness() {
                    witnesses.push((i, j, w.clone()));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    *corpus = Some(Corpus { graphs, witnesses });
    ensure(disagreements.is_empty(), || format!("disagreements on {disagreements:?}"))?;
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}, budget {ORACLE_BUDGET:?}"))?;
    let positives = corpus.as_ref().unwrap().witnesses.len();
    Ok(format!("{} classes, {pairs} ordered pairs agree, {positives} equivalent pairs i ≤ j, {elapsed:.2?}", reps.len()))
}

fn criterion_2(corpus: &Corpus) -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, j, w) in &corpus.witnesses {
        let (s, t, m) = corpus.systems(*i, *j, w);
        let r = verify_tro_equivalence(&s, &t, m.space());
        ensure(r.passed(), || format!("pair ({i},{j}) fails {:?}", r.failures()))?;
        let res = r.worst_residual();
        ensure(res <= TRO_RESIDUAL, || format!("pair ({i},{j}) residual {res:e}"))?;
        let (ok_s, rs) = m.right_algebra().equals(multiplier_algebra(&s).space()).unwrap();
        let (ok_t, rt) = m.left_algebra().equals(multiplier_algebra(&t).space()).unwrap();
        ensure(ok_s && ok_t && rs <= SUBSPACE_RESIDUAL && rt <= SUBSPACE_RESIDUAL, || {
            format!("pair ({i},{j}): [M*M] vs A_S {rs:e} ({ok_s}), [MM*] vs A_T {rt:e} ({ok_t})")
        })?;
        worst = worst.max(res).max(rs).max(rt);
    }
    Ok(format!("{} witnesses, worst residual {worst:.1e}", corpus.witnesses.len()))
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    for n in 1..=MAX_VERTICES {
        for bits in 0..1u64 << (n * (n - 1) / 2) {
            let g = Graph::from_pair_bits(n, bits);
            let s = graph_system(&g, tol());
            let mut comps: Vec<usize> = g.components().iter().map(Vec::len).collect();
            let mut blocks = block_decompose(&generated_algebra(&s)).map_err(|e| e.to_string())?.sizes();
            comps.sort_unstable();
            blocks.sort_unstable();
            ensure(comps == blocks, || format!("{g:?}: C*(S) blocks {blocks:?}, components {comps:?}"))?;
            let (_, f) = twin_quotient(&g);
            let mut twins: Vec<usize> = f.fibers().iter().map(Vec::len).collect();
            let mut mult = block_decompose(&multiplier_algebra(&s)).map_err(|e| e.to_string())?.sizes();
            twins.sort_unstable();
            mult.sort_unstable();
            ensure(twins == mult, || format!("{g:?}: A_S blocks {mult:?}, twin classes {twins:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} labelled graphs"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut dims = Vec::new();
    for n in 2..=6 {
        let s = toeplitz_system(n, tol()).map_err(|e| e.to_string())?;
        let d = multiplier_algebra(&s).dim();
        ensure(d == 1, || format!("Toeplitz({n}) has dim A_S = {d}"))?;
        dims.push(d);
    }
    for d in 2..=4 {
        let full = multiplier_algebra(&OperatorSystem::full(d, tol())).dim();
        let diag = multiplier_algebra(&OperatorSystem::diagonal(d, tol())).dim();
        ensure(full == d * d && diag == d, || format!("d = {d}: dim A(M_d) = {full}, dim A(D_d) = {diag}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < RIGIDITY_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("Toeplitz n=2..6 rigid, M_d and D_d (d=2..4) not, {elapsed:.2?}"))
}

fn criterion_5() -> Outcome {
    let s = toeplitz_system(3, tol()).map_err(|e| e.to_string())?;
    let t = amplify(&s, 2).map_err(|e| e.to_string())?;
    let i3 = CMatrix::identity(3);
    let gens: Vec<CMatrix> = (0..2).map(|i| CMatrix::unit(2, 1, i, 0).kron(&i3)).collect();
    let m = Tro::new(MatSubspace::new(6, 3, &gens, tol()).unwrap()).map_err(|e| e.to_string())?;
    let r = rigid_stable_structure(&s, &t, &m).map_err(|e| e.to_string())?;
    ensure(r.k == 2, || format!("k = {}", r.k))?;
    ensure(r.residual <= RIGID_RESIDUAL, || format!("residual {:e}", r.residual))?;
    ensure(r.phi_images.len() == t.dim() && t.dim() == 4 * s.dim(), || {
        format!("φ has {} images, dim T = {}, dim M_2(S) = {}", r.phi_images.len(), t.dim(), 4 * s.dim())
    })?;
    // A_T ≅ M_2: a single simple summand of size 2. Its multiplicity on C^6 is 6 / 2 = 3.
    let pairs = block_decompose(&multiplier_algebra(&t)).map_err(|e| e.to_string())?.pairs();
    ensure(pairs.len() == 1 && pairs[0].0 == 2, || format!("block_decompose(A_T) = {pairs:?}"))?;
    ensure(r.multiplier_blocks.len() == 1 && r.multiplier_blocks[0].size == 2, || {
        format!("reported multiplier blocks {:?}", r.multiplier_blocks)
    })?;
    Ok(format!("k = 2, residual {:.1e}, block_decompose(A_T) = {pairs:?} (M_2 with multiplicity 3 on C^6)", r.residual))
}

fn criterion_6(corpus: &Corpus) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (i, j, w) in &corpus.witnesses {
        let (s, t, m) = corpus.systems(*i, *j, w);
        let rt = roundtrip_unitary(&m, &t, &Representation::identity(&s)).map_err(|e| format!("({i},{j}): {e}"))?;
        ensure(rt.residual <= ROUNDTRIP_RESIDUAL, || format!("pair ({i},{j}) residual {:e}", rt.residual))?;
        worst = worst.max(rt.residual);
    }
    let p3_partner = Graph::new(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap();
    let k2k1 = Graph::complete(2).disjoint_union(&Graph::empty(1));
    let mut rng = tol().rng("acceptance-random-reps");
    let mut random_worst: f64 = 0.0;
    for (g, h) in [(Graph::path(3), p3_partner), (k2k1, Graph::empty(2))] {
        let w = decide_delta_graphs(&g, &h).unwrap().witness().cloned().ok_or("expected an equivalence")?;
        let m = synthesize_graph_tro(&w, tol()).map_err(|e| e.to_string())?;
        let (s, t) = (graph_system(&g, tol()), graph_system(&h, tol()));
        for k in 0..RANDOM_REPS {
            let rep = random_representation(&s, &mut rng).map_err(|e| e.to_string())?;
            let rt = roundtrip_unitary(&m, &t, &rep).map_err(|e| e.to_string())?;
            ensure(rt.residual <= ROUNDTRIP_RESIDUAL, || format!("{g:?} rep {k} (dim {}): {:e}", rep.dim(), rt.residual))?;
            random_worst = random_worst.max(rt.residual);
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ROUNDTRIP_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} witnesses worst {worst:.1e}; 2 x {RANDOM_REPS} random reps worst {random_worst:.1e}; {elapsed:.2?}",
        corpus.witnesses.len()
    ))
}

/// `g` with a true twin of vertex 0 appended, then relabelled.
fn blown_up(g: &Graph, rng: &mut impl Rng) -> Graph {
    let n = g.n();
    let mut edges = g.edges();
    edges.push((0, n));
    edges.extend(g.neighbours(0).into_iter().map(|v| (v, n)));
    let mut perm: Vec<usize> = (0..=n).collect();
    perm.shuffle(rng);
    Graph::new(n + 1, &edges).unwrap().permuted(&perm)
}

fn criterion_7() -> Outcome {
    let mut rng = tol().rng("acceptance-lattice");
    let (mut graphs, mut masks_checked, mut meets_checked) = (0, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    for n in 1..=LATTICE_VERTICES {
        for g in isomorphism_classes(n).iter().map(Adj::to_graph) {
            let h = blown_up(&g, &mut rng);
            let w = decide_delta_graphs(&g, &h).unwrap().witness().cloned().ok_or("blow-up not equivalent")?;
            let m = synthesize_graph_tro(&w, tol()).map_err(|e| e.to_string())?;
            let (s, t) = (graph_system(&g, tol()), graph_system(&h, tol()));
            let atoms = bimodule_atoms(&s).map_err(|e| e.to_string())?;
            let full = (1u64 << atoms.len()) - 1;
            let mut image = Vec::with_capacity(full as usize + 1);
            let mut bimodules = Vec::with_capacity(full as usize + 1);
            for mask in 0..=full {
                let j = atom_sum(&atoms, mask, s.size(), tol()).map_err(|e| e.to_string())?;
                let f = transport_bimodule(&m, &s, &j).map_err(|e| e.to_string())?;
                let back = transport_bimodule(&m.adjoint(), &t, &f).map_err(|e| e.to_string())?;
                let (ok, r) = back.equals(&j).unwrap();
                ensure(ok && r <= LATTICE_RESIDUAL, || format!("{g:?} mask {mask:b}: round trip residual {r:e}"))?;
                worst = worst.max(r);
                image.push(f);
                bimodules.push(j);
                masks_checked += 1;
            }
            // every pair when the lattice is small, else seeded pairs plus all pairs of atoms
            let mut pairs: Vec<(u64, u64)> = Vec::new();
            if full < 64 {
                pairs.extend((0..=full).flat_map(|a| (0..=full).map(move |b| (a, b))));
            } else {
                let k = atoms.len() as u64;
                pairs.extend((0..k).flat_map(|a| (0..k).map(move |b| (1 << a, 1 << b))));
                pairs.extend((0..MEET_SAMPLES).map(|_| (rng.gen_range(0..=full), rng.gen_range(0..=full))));
            }
            for (a, b) in pairs {
                let meet = bimodules[a as usize].intersect(&bimodules[b as usize]).unwrap();
                let lhs = transport_bimodule(&m, &s, &meet).map_err(|e| e.to_string())?;
                let rhs = image[a as usize].intersect(&image[b as usize]).unwrap();
                let (ok, r) = lhs.equals(&rhs).unwrap();
                ensure(ok && r <= LATTICE_RESIDUAL, || format!("{g:?} masks {a:b}, {b:b}: meet residual {r:e}"))?;
                worst = worst.max(r);
                meets_checked += 1;
            }
            graphs += 1;
        }
    }
    Ok(format!("{graphs} graphs, {masks_checked} bimodules round-trip, {meets_checked} meets, worst {worst:.1e}"))
}

fn criterion_8(corpus: &Corpus) -> Outcome {
    for (i, j, w) in &corpus.witnesses {
        let (s, t, m) = corpus.systems(*i, *j, w);
        let ctx = ContextBundle::conjugation(s, t, m.into_space(), CONTEXT_LEVEL_CAP).map_err(|e| e.to_string())?;
        let r = verify_delta_context(&ctx);
        ensure(r.passed(), || format!("Δ-context ({i},{j}) fails {:?}", r.failures()))?;
        let move_res = r.entry("eq_move").map_or(f64::INFINITY, |e| e.residual);
        ensure(move_res <= TRO_RESIDUAL, || format!("({i},{j}) eq_move residual {move_res:e}"))?;
        let r = verify_bihom_context(&ctx);
        ensure(r.passed(), || format!("bihomomorphism context ({i},{j}) fails {:?}", r.failures()))?;
        let adj_res = r.entry("eq_adjxi").map_or(f64::INFINITY, |e| e.residual);
        ensure(adj_res <= TRO_RESIDUAL, || format!("({i},{j}) eq_adjxi residual {adj_res:e}"))?;
    }
    let (g, h) = (Graph::complete(2), Graph::complete(3));
    let w = decide_delta_graphs(&g, &h).unwrap().witness().cloned().unwrap();
    let m = synthesize_graph_tro(&w, tol()).unwrap();
    let ctx = ContextBundle::conjugation(graph_system(&g, tol()), graph_system(&h, tol()), m.into_space(), 2).unwrap();
    let offset = verify_delta_context(&ctx.with_unit_offset(&CMatrix::unit(3, 3, 0, 1)).map_err(|e| e.to_string())?);
    let transposed = verify_delta_context(&ctx.with_transposed_bracket());
    let m2 = OperatorSystem::full(2, tol());
    let degenerate = MatSubspace::matrix_units(2, 2, &[(0, 0)], tol()).unwrap();
    let corner = verify_bihom_context(&ContextBundle::conjugation(m2.clone(), m2, degenerate, 2).unwrap());
    let defects: [(&str, &VerificationReport, &str); 3] =
        [("unit offset", &offset, "eq_move"), ("transposed bracket", &transposed, "cp_bracket"), ("corner carrier", &corner, "nondegenerate")];
    let mut named = Vec::new();
    for (what, r, axiom) in defects {
        ensure(!r.passed() && r.failures().contains(&axiom), || format!("{what}: failures {:?}, expected {axiom}", r.failures()))?;
        named.push(format!("{what} -> {axiom}"));
    }
    Ok(format!("{} contexts of each kind pass; defects: {}", corpus.witnesses.len(), named.join(", ")))
}

fn diagonal(vals: &[f64]) -> CMatrix {
    CMatrix::diag(&vals.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
}

/// A diagonal system that is a module over the block projections of a random partition,
/// its image under a permutation, and the TRO of phased permutations times those projections.
fn diagonal_pair(rng: &mut impl Rng) -> (OperatorSystem, OperatorSystem, Tro) {
    let r = rng.gen_range(2..=5);
    let c = rng.gen_range(1..=r);
    let mut labels: Vec<usize> = (0..r).map(|i| if i < c { i } else { rng.gen_range(0..c) }).collect();
    labels.shuffle(rng);
    let mut gens = Vec::new();
    let mut projections = Vec::new();
    for b in 0..c {
        let members: Vec<usize> = (0..r).filter(|&i| labels[i] == b).collect();
        let q: Vec<f64> = (0..r).map(|i| f64::from(u8::from(labels[i] == b))).collect();
        projections.push(diagonal(&q));
        gens.push(diagonal(&q));
        for _ in 0..rng.gen_range(0..members.len()) {
            let x: Vec<f64> = (0..r).map(|i| if labels[i] == b { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
            gens.push(diagonal(&x));
        }
    }
    let mut sigma: Vec<usize> = (0..r).collect();
    sigma.shuffle(rng);
    let mut p = CMatrix::zeros(r, r);
    for (j, &i) in sigma.iter().enumerate() {
        p.set_block(i, j, &CMatrix::diag(&[C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))]));
    }
    let s = OperatorSystem::from_matrices(r, &gens, tol()).unwrap();
    let moved: Vec<CMatrix> = gens.iter().map(|x| p.matmul(x).mul_adj(&p)).collect();
    let t = OperatorSystem::from_matrices(r, &moved, tol()).unwrap();
    let carrier: Vec<CMatrix> = projections.iter().map(|q| p.matmul(q)).collect();
    let m = Tro::new(MatSubspace::new(r, r, &carrier, tol()).unwrap()).unwrap();
    (s, t, m)
}

fn theta_summary(seed_stream: &str) -> Result<Vec<serde_json::Value>, String> {
    let mut rng = tol().rng(seed_stream);
    let mut out = Vec::new();
    for k in 0..DIAGONAL_PAIRS {
        let (s, t, m) = diagonal_pair(&mut rng);
        let eq = verify_tro_equivalence(&s, &t, m.space());
        ensure(eq.passed(), || format!("pair {k}: not an equivalence {:?}", eq.failures()))?;
        let comm = theta_iso(&m, &s, &t, ThetaMode::Commutative).map_err(|e| format!("pair {k}: {e}"))?;
        ensure(comm.report.passed(), || format!("pair {k}: commutative ϑ fails {:?}", comm.report.failures()))?;
        for axiom in ["unitality", "multiplicativity", "inverse_left", "inverse_right", "bijective"] {
            let res = comm.report.entry(axiom).map_or(f64::INFINITY, |e| e.residual);
            ensure(res <= THETA_RESIDUAL, || format!("pair {k}: {axiom} residual {res:e}"))?;
        }
        let centre = theta_iso(&m, &s, &t, ThetaMode::Centre).map_err(|e| format!("pair {k}: {e}"))?;
        ensure(centre.report.passed(), || format!("pair {k}: centre transport fails {:?}", centre.report.failures()))?;
        ensure(centre.domain.dim() == centre.codomain.dim() && centre.domain.dim() == s.dim(), || {
            format!("pair {k}: centres of dims {} and {}", centre.domain.dim(), centre.codomain.dim())
        })?;
        let worst = comm.report.worst_residual().max(centre.report.worst_residual());
        ensure(worst <= THETA_RESIDUAL, || format!("pair {k}: worst residual {worst:e}"))?;
        out.push(json!({"size": s.size(), "dim_s": s.dim(), "dim_algebra": comm.domain.dim(), "dim_centre": centre.domain.dim()}));
    }
    Ok(out)
}

fn criterion_9() -> Outcome {
    let summary = theta_summary("acceptance-diagonal")?;
    let sizes: Vec<u64> = summary.iter().map(|v| v["size"].as_u64().unwrap()).collect();
    Ok(format!("{DIAGONAL_PAIRS} pairs (sizes {sizes:?}): ϑ and the centre transport are bijective, residuals ≤ {THETA_RESIDUAL:e}"))
}

fn criterion_10(corpus: &Corpus) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut elements = 0;
    for (i, j, w) in &corpus.witnesses {
        let (s, t, m) = corpus.systems(*i, *j, w);
        for (tro, space) in [(&m, s.space()), (&m.adjoint(), t.space())] {
            for x in space.basis() {
                let f = factorization_maps(tro, x).map_err(|e| format!("({i},{j}): {e}"))?;
                ensure(f.residual <= FACTORIZATION_RESIDUAL, || format!("({i},{j}): residual {:e}", f.residual))?;
                worst = worst.max(f.residual);
                elements += 1;
            }
        }
    }
    Ok(format!("{} witnesses, {elements} basis elements on both sides, worst {worst:.1e}", corpus.witnesses.len()))
}

// ---------- determinism through the command-line front end ----------

/// Exit code, stdout, and stdout without its timestamp lines.
fn cli(args: &[String]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("deltaeq".to_string()).chain(args.iter().cloned()).collect();
    let out = run(&argv, &mut std::io::empty());
    let stripped = out.stdout.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n");
    (out.code, out.stdout, stripped)
}

fn criterion_11() -> Outcome {
    let dir = std::env::temp_dir().join(format!("deltaeq-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let file = |name: &str, text: &str| -> String {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let p3 = file("p3.txt", "3\n0 1\n1 2\n");
    let partner = file("partner.txt", "4\n0 1\n0 2\n1 2\n2 3\n");
    let c4 = file("c4.txt", "4\n0 1\n1 2\n2 3\n3 0\n");
    let k2k1 = file("k2k1.txt", "3\n0 1\n");
    let (g, h) = (Graph::complete(2), Graph::complete(3));
    let w = decide_delta_graphs(&g, &h).unwrap().witness().cloned().unwrap();
    let m = synthesize_graph_tro(&w, tol()).unwrap();
    let (s, t) = (graph_system(&g, tol()), graph_system(&h, tol()));
    let bundle = ContextBundle::conjugation(s.clone(), t.clone(), m.space().clone(), 2).unwrap();
    let bundle = file("bundle.json", &serde_json::to_string(&bundle).unwrap());
    let kraus = kraus_witness_from_space(m.space(), &t, &s).map_err(|e| e.to_string())?;
    let kraus = file("kraus.json", &serde_json::to_string(&kraus).unwrap());
    let s_file = file("s.json", &serde_json::to_string(&s).unwrap());
    let t_file = file("t.json", &serde_json::to_string(&t).unwrap());
    let (code, witness, _) = cli(&["graph".into(), "tro-witness".into(), p3.clone(), partner.clone()]);
    ensure(code == 0, || format!("tro-witness exited {code}"))?;
    let witness = file("witness.json", &witness);
    let reps: Vec<String> = (0..3u64)
        .map(|k| {
            let rep = random_representation(&graph_system(&Graph::path(3), tol()), &mut tol().rng(&format!("det-{k}"))).unwrap();
            file(&format!("rep{k}.json"), &serde_json::to_string(&rep).unwrap())
        })
        .collect();
    let (wm, ws, wt) = (format!("{witness}#/witness/m"), format!("{witness}#/witness/s"), format!("{witness}#/witness/t"));
    let mut commands: Vec<Vec<String>> = vec![
        vec!["graph".into(), "quotient".into(), c4.clone()],
        vec!["graph".into(), "delta-eq".into(), p3.clone(), partner.clone()],
        vec!["graph".into(), "delta-eq".into(), p3.clone(), c4.clone()],
        vec!["graph".into(), "embed-env".into(), k2k1.clone(), c4.clone()],
        vec!["verify".into(), "tro-eq".into(), witness.clone()],
        vec!["verify".into(), "cohom".into(), kraus, t_file, s_file],
        vec!["verify".into(), "delta-context".into(), bundle.clone()],
        vec!["verify".into(), "bihom-context".into(), bundle],
        vec!["induce".into(), wm.clone(), ws.clone(), wt.clone()],
        vec!["roundtrip".into(), wm.clone(), ws.clone(), wt.clone()],
        vec!["toeplitz".into(), "--n".into(), "4".into()],
    ];
    for sub in ["algebra", "multiplier", "center", "rigid", "irreducible"] {
        for g in [&p3, &c4, &k2k1] {
            commands.push(vec!["sys".into(), sub.into(), g.clone()]);
        }
    }
    for rep in &reps {
        commands.push(vec!["roundtrip".into(), wm.clone(), ws.clone(), wt.clone(), "--rep".into(), rep.clone()]);
    }
    let seeded: Vec<Vec<String>> = commands
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.extend(["--seed".into(), "11".into()]);
            c
        })
        .collect();
    commands.extend(seeded);
    let manifest = file("manifest.json", &serde_json::to_string(&commands[..8]).unwrap());
    commands.push(vec!["--batch".into(), manifest]);

    let first: Vec<(i32, String, String)> = commands.iter().map(|c| cli(c)).collect();
    let second: Vec<(i32, String, String)> = commands.iter().map(|c| cli(c)).collect();
    for ((c, a), b) in commands.iter().zip(&first).zip(&second) {
        ensure(a.0 == 0, || format!("{c:?} exited {}", a.0))?;
        ensure(a.0 == b.0 && a.2 == b.2, || format!("{c:?} differs between runs"))?;
    }
    let a = theta_summary("acceptance-determinism")?;
    let b = theta_summary("acceptance-determinism")?;
    ensure(a == b, || "seeded diagonal pairs differ between runs".into())?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} certificates byte-identical across two runs (timestamp removed)", commands.len()))
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; listing has nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut corpus = None;
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |n: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = f();
        let line = match &out {
            Ok(detail) => format!("PASS  {n:>2}  {name}: {detail}"),
            Err(why) => format!("FAIL  {n:>2}  {name}: {why}"),
        };
        println!("{line}  [{:.2?}]", start.elapsed());
        results.push((n, name, out));
    };
    record(1, "graph decisions agree with the pullback oracle", &mut || criterion_1(&mut corpus));
    let corpus = corpus.expect("criterion 1 builds the corpus");
    record(2, "synthesized TROs are equivalences with [M*M], [MM*] the multiplier algebras", &mut || criterion_2(&corpus));
    record(3, "block sizes are component and twin-class sizes", &mut criterion_3);
    record(4, "Toeplitz systems are rigid, M_d and D_d are not", &mut criterion_4);
    record(5, "rigid stable structure of M_2(Toeplitz(3))", &mut criterion_5);
    record(6, "induced round trips are unitarily equivalent to the identity", &mut || criterion_6(&corpus));
    record(7, "bimodule transport round trips and preserves meets", &mut criterion_7);
    record(8, "contexts of every equivalence verify, injected defects are named", &mut || criterion_8(&corpus));
    record(9, "ϑ on diagonal systems and their centres", &mut criterion_9);
    record(10, "ψ∘φ = id on full bases", &mut || criterion_10(&corpus));
    record(11, "certificates are deterministic", &mut criterion_11);
    let failed: Vec<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
