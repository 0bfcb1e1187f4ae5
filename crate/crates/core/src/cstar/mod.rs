//! Operator systems, the C*-algebras they generate, centres, multiplier algebras and rigidity.

mod blocks;
mod probe;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{kernel, CMatrix, MatSubspace, Tolerance, C64};

pub use blocks::{block_decompose, Block, BlockDecomposition};
pub use probe::{irreducibility_probe, ReductionCertificate, SeparationWitness, Verdict as IrreducibilityVerdict};

/// Unital, adjoint-closed subspace of `M_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSystem {
    space: MatSubspace,
}

impl Serialize for OperatorSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.space.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OperatorSystem::new(MatSubspace::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl OperatorSystem {
    pub fn new(space: MatSubspace) -> Result<Self> {
        let (r, c) = space.ambient();
        if r != c {
            return Err(Error::NotOperatorSystem(format!("ambient {r}x{c} is not square")));
        }
        let (unital, res) = space.contains_identity();
        if !unital {
            return Err(Error::NotOperatorSystem(format!("identity residual {res:e}")));
        }
        let adj = space.adjoint_space();
        let (closed, res) = space.contains_space(&adj)?;
        if !closed {
            return Err(Error::NotOperatorSystem(format!("not adjoint-closed (residual {res:e})")));
        }
        Ok(OperatorSystem { space })
    }

    pub fn from_matrices(d: usize, mats: &[CMatrix], tol: Tolerance) -> Result<Self> {
        Self::new(MatSubspace::new(d, d, mats, tol)?)
    }

    /// `M_d`.
    pub fn full(d: usize, tol: Tolerance) -> Self {
        OperatorSystem { space: MatSubspace::full(d, d, tol) }
    }

    /// Diagonal matrices `D_d`.
    pub fn diagonal(d: usize, tol: Tolerance) -> Self {
        let pattern: Vec<_> = (0..d).map(|i| (i, i)).collect();
        OperatorSystem { space: MatSubspace::matrix_units(d, d, &pattern, tol).expect("diagonal units") }
    }

    /// `ℂ·I_d`.
    pub fn scalars(d: usize, tol: Tolerance) -> Self {
        OperatorSystem { space: MatSubspace::new(d, d, &[CMatrix::identity(d)], tol).expect("identity") }
    }

    pub fn space(&self) -> &MatSubspace {
        &self.space
    }

    pub fn into_space(self) -> MatSubspace {
        self.space
    }

    /// Size `d` of the ambient `M_d`.
    pub fn size(&self) -> usize {
        self.space.ambient().0
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn tol(&self) -> Tolerance {
        self.space.tol()
    }

    pub fn with_tol(self, tol: Tolerance) -> Self {
        OperatorSystem { space: self.space.with_tol(tol) }
    }
}

/// `M_k(S) ⊆ M_{kd}`.
pub fn amplify(s: &OperatorSystem, k: usize) -> Result<OperatorSystem> {
    Ok(OperatorSystem { space: s.space.amplify(k)? })
}

/// Subspace of `M_d` closed under products and adjoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarAlgebra {
    space: MatSubspace,
    unital: bool,
}

impl StarAlgebra {
    /// Validates product and adjoint closure.
    pub fn new(space: MatSubspace) -> Result<Self> {
        let (r, c) = space.ambient();
        if r != c {
            return Err(Error::NotAlgebra(format!("ambient {r}x{c} is not square")));
        }
        let (closed, res) = space.contains_space(&space.adjoint_space())?;
        if !closed {
            return Err(Error::NotAlgebra(format!("not adjoint-closed (residual {res:e})")));
        }
        let (closed, res) = space.contains_space(&space.product_span(&space)?)?;
        if !closed {
            return Err(Error::NotAlgebra(format!("not closed under products (residual {res:e})")));
        }
        let unital = space.contains_identity().0;
        Ok(StarAlgebra { space, unital })
    }

    fn trusted(space: MatSubspace) -> Self {
        let unital = space.contains_identity().0;
        StarAlgebra { space, unital }
    }

    pub fn space(&self) -> &MatSubspace {
        &self.space
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn size(&self) -> usize {
        self.space.ambient().0
    }

    /// Whether all basis elements commute.
    pub fn is_commutative(&self) -> (bool, f64) {
        let b = self.space.basis();
        let mut worst: f64 = 0.0;
        for (i, x) in b.iter().enumerate() {
            for y in &b[i + 1..] {
                worst = worst.max(x.matmul(y).dist(&y.matmul(x)));
            }
        }
        (worst <= self.space.tol().eps, worst)
    }
}

/// Smallest unital *-algebra containing `s`.
///
/// Iterates `A ← span(A·s)`; since `I ∈ s` this also contains `A`, and adjoint closure of `s`
/// means every word in `s` is reached.
pub fn generated_algebra(s: &OperatorSystem) -> StarAlgebra {
    let mut a = s.space.clone();
    loop {
        let next = a.product_span(&s.space).expect("square shapes");
        if next.dim() == a.dim() {
            return StarAlgebra::trusted(a);
        }
        a = next;
    }
}

/// Centre `{z ∈ a : zb = bz for every basis b}`.
pub fn center(a: &StarAlgebra) -> StarAlgebra {
    let basis = a.space.basis();
    let d = a.size();
    let cols: Vec<Vec<C64>> = basis
        .iter()
        .map(|x| basis.iter().flat_map(|b| (&x.matmul(b) - &b.matmul(x)).into_vec()).collect())
        .collect();
    let ker = kernel(&cols, basis.len(), basis.len() * d * d, a.space.tol().eps);
    let mats: Vec<_> = ker.iter().map(|c| a.space.combine(c)).collect();
    StarAlgebra::trusted(MatSubspace::new(d, d, &mats, a.space.tol()).expect("square shapes"))
}

/// Multiplier algebra `{a : a·s ⊆ s, a*·s ⊆ s}`.
///
/// The search runs inside `s` itself, which is the same as searching `C*(s)`: `I ∈ s` forces
/// `a = a·I ∈ s`. The envelope used is the generated algebra, not an injective envelope.
pub fn multiplier_algebra(s: &OperatorSystem) -> StarAlgebra {
    let sp = &s.space;
    let d = s.size();
    let basis = sp.basis();
    // L = {x ∈ s : x·s ⊆ s}
    let cols: Vec<Vec<C64>> = basis
        .iter()
        .map(|x| {
            basis
                .iter()
                .flat_map(|y| {
                    let p = x.matmul(y);
                    (&p - &sp.project(&p)).into_vec()
                })
                .collect()
        })
        .collect();
    let ker = kernel(&cols, basis.len(), basis.len() * d * d, sp.tol().eps);
    let mats: Vec<_> = ker.iter().map(|c| sp.combine(c)).collect();
    let left = MatSubspace::new(d, d, &mats, sp.tol()).expect("square shapes");
    let a = left.intersect(&left.adjoint_space()).expect("same ambient");
    StarAlgebra::trusted(a)
}

/// `A_s = ℂ·I`.
pub fn is_rigid(s: &OperatorSystem) -> bool {
    multiplier_algebra(s).dim() == 1
}
