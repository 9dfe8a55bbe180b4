//! Seeded random generators with known spectral factors.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::expm::complexify;
use crate::linalg::spectral::condition2;
use crate::linalg::Generator;
use crate::{CMat, CVec, C64};

/// Largest 2-norm condition number accepted for the eigenvector matrix.
pub const MAX_EIGVEC_CONDITION: f64 = 30.0;
pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 16;

/// `A = S D S⁻¹` with `D` diagonal, together with its factors.
#[derive(Debug, Clone)]
pub struct Member {
    pub seed: u64,
    pub gen: Generator,
    pub s: CMat,
    pub s_inv: CMat,
    pub eigenvalues: Vec<C64>,
    pub x: CVec,
}

impl Member {
    /// `S f(D) S⁻¹ x` from the construction factors.
    pub fn exact<F: Fn(C64) -> Option<C64>>(&self, f: F, x: &CVec) -> Option<CVec> {
        let mut y = &self.s_inv * x;
        for (yi, &l) in y.iter_mut().zip(&self.eigenvalues) {
            *yi *= f(l)?;
        }
        Some(&self.s * y)
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)))
}

/// Dimension used for seed `seed` when none is requested.
pub fn dim_for_seed(seed: u64) -> usize {
    MIN_DIM + (seed as usize) % (MAX_DIM - MIN_DIM + 1)
}

/// Diagonalizable stable generator: real spectrum plus conjugate pairs with
/// `Re λ ∈ [-3, -0.1]`, `|Im λ| ≤ 2`, and `cond(S) ≤ 30`.
pub fn stable_member(seed: u64, dim: usize) -> Result<Member> {
    let mut rng = rng_for(seed, 1);
    let mut eig = Vec::with_capacity(dim);
    while eig.len() < dim {
        let re = rng.gen_range(-3.0..-0.1);
        if dim - eig.len() >= 2 && rng.gen_bool(0.3) {
            let im = rng.gen_range(0.2..2.0);
            eig.push(C64::new(re, im));
            eig.push(C64::new(re, -im));
        } else {
            eig.push(C64::new(re, 0.0));
        }
    }
    let s = loop {
        let r = DMatrix::<f64>::from_fn(dim, dim, |i, j| {
            let v: f64 = rng.gen_range(-0.5..0.5);
            if i == j {
                1.0 + v
            } else {
                v / (dim as f64).sqrt()
            }
        });
        let c = complexify(&r);
        if condition2(&c) <= MAX_EIGVEC_CONDITION {
            break c;
        }
    };
    let s_inv = s.clone().try_inverse().expect("well-conditioned by construction");
    let d = CMat::from_diagonal(&CVec::from_vec(eig.clone()));
    let a = &s * d * &s_inv;
    let x = random_vector(&mut rng, dim);
    Ok(Member {
        seed,
        gen: Generator::new(a)?,
        s,
        s_inv,
        eigenvalues: eig,
        x,
    })
}

/// `A = -(B Bᵀ/n + cI)`, symmetric negative definite, so `T` is a contraction.
/// Carries a decay profile with exponent `delta`.
pub fn contraction_member(seed: u64, dim: usize, delta: f64) -> Result<Member> {
    let mut rng = rng_for(seed, 2);
    let b = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let c = rng.gen_range(0.2..1.0);
    let a = -(&b * b.transpose() / dim as f64 + DMatrix::identity(dim, dim) * c);
    let eig = a.clone().symmetric_eigen();
    let s = complexify(&eig.eigenvectors);
    let s_inv = s.adjoint();
    let x = random_vector(&mut rng, dim);
    Ok(Member {
        seed,
        gen: Generator::from_real(&a)?.with_derived_decay(delta)?,
        s,
        s_inv,
        eigenvalues: eig.eigenvalues.iter().map(|&l| C64::new(l, 0.0)).collect(),
        x,
    })
}

/// Stable member with its first `zeros` coordinates replaced by a zero block,
/// so `ω = 0` and `A` is not injective.
pub fn zero_block_member(seed: u64, dim: usize, zeros: usize) -> Result<Member> {
    let zeros = zeros.clamp(1, dim);
    let mut rng = rng_for(seed, 3);
    let mut eig: Vec<C64> = (0..dim)
        .map(|i| {
            if i < zeros {
                C64::new(0.0, 0.0)
            } else {
                C64::new(rng.gen_range(-3.0..-0.1), 0.0)
            }
        })
        .collect();
    eig.truncate(dim);
    let s = CMat::identity(dim, dim);
    let a = CMat::from_diagonal(&CVec::from_vec(eig.clone()));
    let x = random_vector(&mut rng, dim);
    Ok(Member {
        seed,
        gen: Generator::new(a)?,
        s: s.clone(),
        s_inv: s,
        eigenvalues: eig,
        x,
    })
}

/// `count` stable members for consecutive seeds starting at `seed`.
pub fn stable_ensemble(seed: u64, count: usize) -> Result<Vec<Member>> {
    (0..count as u64)
        .map(|k| {
            let s = seed.wrapping_add(k);
            stable_member(s, dim_for_seed(s))
        })
        .collect()
}
