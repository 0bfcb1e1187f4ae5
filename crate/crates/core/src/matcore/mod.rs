//! Dense complex linear algebra and Hilbert–Schmidt subspace arithmetic.

mod cmatrix;
mod eig;
mod subspace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cmatrix::{CMatrix, C64};
pub use eig::{herm_apply, herm_eig, lambda_min, op_norm};
pub use subspace::{adjoint_space, contains, orthonormal_basis, product_span, MatSubspace};

pub(crate) use cmatrix::{dot, ZERO};
pub(crate) use subspace::{gram_schmidt_tracked, kernel, solve_min_norm};

/// Numerical tolerance and the seed for randomized subroutines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps: f64,
    pub seed: u64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: 1e-9, seed: 0 }
    }
}

impl Tolerance {
    pub fn new(eps: f64, seed: u64) -> crate::Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(crate::Error::InvalidInput(format!("tolerance must be positive, got {eps}")));
        }
        Ok(Tolerance { eps, seed })
    }

    /// Deterministic generator for a named sub-stream of the seed.
    pub fn rng(&self, stream: &str) -> ChaCha8Rng {
        // FNV-1a keeps stream separation independent of the std hasher.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in stream.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }
}

/// Complex number with both parts uniform in [-1, 1].
pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Random element of a subspace with coefficients uniform in the square [-1,1]².
pub fn random_element(space: &MatSubspace, rng: &mut impl Rng) -> CMatrix {
    let coeffs: Vec<C64> = (0..space.dim()).map(|_| random_c64(rng)).collect();
    space.combine(&coeffs)
}

/// Random real combination of a Hermitian basis.
pub fn random_hermitian(herm_basis: &[CMatrix], rows: usize, rng: &mut impl Rng) -> CMatrix {
    let mut out = CMatrix::zeros(rows, rows);
    for h in herm_basis {
        out.axpy(C64::new(rng.gen_range(-1.0..=1.0), 0.0), h);
    }
    out
}

/// Random `rows × cols` matrix with entries in the unit square.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_vec_unchecked(rows, cols, (0..rows * cols).map(|_| random_c64(rng)).collect())
}

/// Haar-like random unitary from Gram–Schmidt of a random matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    loop {
        let m = random_matrix(n, n, rng);
        let cols: Vec<Vec<C64>> = (0..n).map(|j| m.column(j)).collect();
        let mut on = subspace::Orthonormalizer::new(n, 1e-8);
        for c in &cols {
            on.push(c);
        }
        if on.q.len() == n {
            return CMatrix::from_columns(n, &on.q);
        }
    }
}
