//! Dense linear algebra, finite differences, Newton, RK4, quadrature and
//! order fitting.

pub mod diff;
pub mod fit;
pub mod linalg;
pub mod newton;
pub mod ode;
pub mod quad;

pub use diff::{fd_directional, fd_gradient, fd_jacobian, DiffConfig, Scheme};
pub use fit::{fit_order, logspace};
pub use linalg::{antisymmetrize, canonical_symplectic, product_symplectic, Lu, Matrix, Vector};
pub use newton::{newton_solve, newton_solve_with, NewtonConfig, NewtonOutcome};
pub use ode::{rk4, rk4_with};
pub use quad::{composite_gauss, gauss_legendre};

/// Deterministic quasi-random points in a box (Halton sequence with prime
/// bases, skipping the first `skip` terms).
pub fn halton_points(lo: &[f64], hi: &[f64], count: usize, skip: usize) -> Vec<Vector> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    assert!(lo.len() == hi.len() && lo.len() <= PRIMES.len(), "unsupported sample dimension");
    (0..count)
        .map(|i| {
            let idx = (i + skip + 1) as u64;
            Vector::from_fn(lo.len(), |d, _| {
                let mut f = 1.0;
                let mut r = 0.0;
                let mut k = idx;
                let b = PRIMES[d];
                while k > 0 {
                    f /= b as f64;
                    r += f * (k % b) as f64;
                    k /= b;
                }
                lo[d] + (hi[d] - lo[d]) * r
            })
        })
        .collect()
}
