//! Random matrix, state and stream helpers.
//!
//! Every random draw in the crate comes from a ChaCha20 stream keyed by
//! `(master seed, instance index, purpose)`, so results never depend on
//! the order in which instances are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::matrixkit::{c, CMatrix, CVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Hamiltonian = 1,
    State = 2,
    Observable = 3,
    Measurement = 4,
    Times = 5,
    Perturbation = 6,
    Subsystem = 7,
}

pub fn stream(master: u64, index: u64, purpose: Purpose) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(purpose as u64);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Square matrix with i.i.d. standard complex Gaussian entries, scaled by `1/sqrt(2d)`.
pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let scale = 1.0 / ((2 * d) as f64).sqrt();
    CMatrix::from_fn(d, d, |_, _| complex_normal(rng) * scale)
}

/// `(G + G^dagger) / 2` for a Gaussian `G`.
pub fn gue_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| complex_normal(rng));
    (&g + g.adjoint()).scale(0.5)
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| complex_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| complex_normal(rng));
    let n = v.norm();
    v.unscale(n)
}

/// `G G^dagger / tr(G G^dagger)` with `G` a `d x rank` Gaussian matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| complex_normal(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Hermitian part of a [`ginibre`] matrix.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rng);
    (&g + g.adjoint()).scale(0.5)
}
