//! Entanglement and physicality of two-mode Gaussian states in the
//! vacuum-variance-1/2 convention.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::TwoModeBlock;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticPair {
    pub nu_minus: f64,
    pub nu_plus: f64,
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub zeta: f64,
}

/// Relative slack when a discriminant comes out marginally negative.
const DISCRIMINANT_TOL: f64 = 1e-9;

/// Smaller and larger root of x² − s·x + p with x = ν², returned as ν.
fn symplectic_pair_from_invariants(sum: f64, det: f64) -> Result<(f64, f64)> {
    let disc = sum * sum - 4.0 * det;
    if disc < -DISCRIMINANT_TOL * sum * sum {
        return Err(Error::Domain(format!(
            "non-physical covariance matrix (discriminant {disc:e})"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let lo = ((sum - root) / 2.0).max(0.0).sqrt();
    let hi = ((sum + root) / 2.0).sqrt();
    Ok((lo, hi))
}

fn det2(v: &Matrix4<f64>, r: usize, c: usize) -> f64 {
    v[(r, c)] * v[(r + 1, c + 1)] - v[(r, c + 1)] * v[(r + 1, c)]
}

/// Seralian-type invariants (det A + det B, det C) of `[X_l, Y_l, X_r, Y_r]`.
fn local_invariants(v: &Matrix4<f64>) -> (f64, f64) {
    (det2(v, 0, 0) + det2(v, 2, 2), det2(v, 0, 2))
}

/// Symplectic eigenvalues (ν₋, ν₊) of any two-mode CM.
pub fn symplectic_eigenvalues(v: &Matrix4<f64>) -> Result<(f64, f64)> {
    let (ab, c) = local_invariants(v);
    symplectic_pair_from_invariants(ab + 2.0 * c, v.determinant())
}

/// Symplectic eigenvalues of the partial transpose of any two-mode CM.
pub fn pt_symplectic_eigenvalues(v: &Matrix4<f64>) -> Result<(f64, f64)> {
    let (ab, c) = local_invariants(v);
    symplectic_pair_from_invariants(ab - 2.0 * c, v.determinant())
}

/// ζ = √[(Λ − √(Λ² − 4 det V′))/2], Λ = L² + R² − 2 det C, on the
/// block-form matrix (so c′ enters exactly through det V′).
pub fn pt_symplectic(block: &TwoModeBlock) -> Result<SymplecticPair> {
    const FLOOR: f64 = 0.5 - 1e-6;
    if !(block.big_l >= FLOOR && block.big_r >= FLOOR) {
        return Err(Error::Domain(format!(
            "local variances must be >= 1/2 (L = {}, R = {})",
            block.big_l, block.big_r
        )));
    }
    let v = block.matrix();
    let det_c = -(block.c * block.c + block.c_prime * block.c_prime);
    let det_v = v.determinant();
    let ll_rr = block.big_l * block.big_l + block.big_r * block.big_r;
    let (zeta, _) = symplectic_pair_from_invariants(ll_rr - 2.0 * det_c, det_v)?;
    let (nu_minus, nu_plus) = symplectic_pair_from_invariants(ll_rr + 2.0 * det_c, det_v)?;
    Ok(SymplecticPair {
        nu_minus,
        nu_plus,
        zeta,
    })
}

/// E_N = max[0, −ln 2ζ] (natural logarithm).
pub fn log_negativity(block: &TwoModeBlock) -> Result<f64> {
    Ok(log_negativity_from_zeta(pt_symplectic(block)?.zeta))
}

pub fn log_negativity_from_zeta(zeta: f64) -> f64 {
    (-(2.0 * zeta).ln()).max(0.0)
}

/// ⟨(δX_l + δX_r)²⟩ + ⟨(δY_l − δY_r)²⟩ = 2(L + R − 2c). Below 2 certifies
/// entanglement.
pub fn duan_sum(block: &TwoModeBlock) -> f64 {
    2.0 * (block.big_l + block.big_r - 2.0 * block.c)
}

/// Bound below which [`duan_sum`] certifies entanglement.
pub const DUAN_BOUND: f64 = 2.0;

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv(r: f64) -> TwoModeBlock {
        TwoModeBlock {
            big_l: (2.0 * r).cosh() / 2.0,
            big_r: (2.0 * r).cosh() / 2.0,
            c: (2.0 * r).sinh() / 2.0,
            c_prime: 0.0,
            asymmetry: 0.0,
        }
    }

    #[test]
    fn vacuum() {
        let s = pt_symplectic(&TwoModeBlock::vacuum()).unwrap();
        assert!((s.zeta - 0.5).abs() < 1e-15);
        assert!((s.nu_minus - 0.5).abs() < 1e-15);
        assert_eq!(log_negativity(&TwoModeBlock::vacuum()).unwrap(), 0.0);
        assert_eq!(duan_sum(&TwoModeBlock::vacuum()), 2.0);
    }

    #[test]
    fn tmsv_closed_forms() {
        for r in [0.1, 0.5, 1.0, 2.0] {
            let b = tmsv(r);
            let s = pt_symplectic(&b).unwrap();
            assert!((s.zeta - (-2.0 * r).exp() / 2.0).abs() < 1e-9);
            assert!(
                (s.nu_minus - 0.5).abs() < 1e-6,
                "pure state: {}",
                s.nu_minus
            );
            assert!((log_negativity(&b).unwrap() - 2.0 * r).abs() < 1e-9);
            assert!((duan_sum(&b) - 2.0 * (-2.0 * r).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn thermal_product_state_is_separable() {
        let b = TwoModeBlock {
            big_l: 1.7,
            big_r: 0.9,
            ..TwoModeBlock::vacuum()
        };
        let s = pt_symplectic(&b).unwrap();
        assert!((s.zeta - 0.9).abs() < 1e-12);
        assert_eq!(log_negativity(&b).unwrap(), 0.0);
        assert!(duan_sum(&b) >= 2.0);
    }

    #[test]
    fn tmsv_negativity_increases_with_squeezing() {
        let vals: Vec<f64> = (1..=20)
            .map(|k| log_negativity(&tmsv(0.1 * k as f64)).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_subvacuum_local_variance() {
        let b = TwoModeBlock {
            big_l: 0.3,
            ..TwoModeBlock::vacuum()
        };
        assert!(matches!(pt_symplectic(&b), Err(Error::Domain(_))));
    }

    #[test]
    fn full_matrix_invariants_match_block_route() {
        let b = TwoModeBlock {
            big_l: 1.4,
            big_r: 1.1,
            c: 1.0,
            c_prime: 0.07,
            asymmetry: 0.0,
        };
        let s = pt_symplectic(&b).unwrap();
        let (z, _) = pt_symplectic_eigenvalues(&b.matrix()).unwrap();
        let (nm, np) = symplectic_eigenvalues(&b.matrix()).unwrap();
        assert!((z - s.zeta).abs() < 1e-12);
        assert!((nm - s.nu_minus).abs() < 1e-12 && (np - s.nu_plus).abs() < 1e-12);
    }
}
