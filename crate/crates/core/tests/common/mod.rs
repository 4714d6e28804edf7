//! Shared helpers for the integration tests: a random parameter generator
//! and oracles that do not go through the library's numerics.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix6};
use optomech_cv::dynamics::LinearModel;
use optomech_cv::spectral::OutputFilters;
use optomech_cv::{DetuningMode, PhysicalParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random parameter set around the reference point. Not necessarily stable.
pub fn random_params<R: Rng>(rng: &mut R) -> PhysicalParams {
    let omega_m = 2.0 * std::f64::consts::PI * rng.random_range(2e6..2e7);
    let r = |rng: &mut R, lo: f64, hi: f64| rng.random_range(lo..hi);
    PhysicalParams {
        mass: r(rng, 0.5e-11, 2e-11),
        omega_m,
        quality: 10f64.powf(r(rng, 3.0, 6.0)),
        cav_half_length: r(rng, 0.5e-3, 2e-3),
        kappa_r: r(rng, 0.05, 1.0) * omega_m,
        kappa_l: r(rng, 0.05, 1.0) * omega_m,
        power_r: r(rng, 0.0, 0.03),
        power_l: r(rng, 0.0, 0.05),
        wavelength_r: 1064e-9,
        wavelength_l: 1064e-9,
        detuning_mode: DetuningMode::Effective {
            delta_r: -r(rng, 0.5, 1.5) * omega_m,
            delta_l: r(rng, 0.5, 1.5) * omega_m,
        },
        temperature: 10f64.powf(r(rng, -2.0, 1.0)),
        filter_tau_r: r(rng, 0.2e-6, 5e-6),
        filter_tau_l: r(rng, 0.2e-6, 5e-6),
        filter_omega_r: -r(rng, 0.5, 1.5) * omega_m,
        filter_omega_l: r(rng, 0.5, 1.5) * omega_m,
    }
}

/// Draw until the model is stable.
pub fn random_stable<R: Rng>(rng: &mut R) -> (PhysicalParams, LinearModel) {
    loop {
        let p = random_params(rng);
        let model = optomech_cv::build(&optomech_cv::derive(&p).unwrap());
        if optomech_cv::stability(&model).unwrap().stable {
            return (p, model);
        }
    }
}

/// Solve A X + X Aᵀ + D = 0 by a plain Kronecker system with full pivoting.
pub fn lyapunov_oracle(a: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let s = a.amax();
    let a = a / s;
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(&a) + a.kronecker(&eye);
    let rhs = DMatrix::from_iterator(n * n, 1, d.iter().map(|x| -x / s));
    let x = k
        .full_piv_lu()
        .solve(&rhs)
        .expect("nonsingular Kronecker system");
    let x = DMatrix::from_iterator(n, n, x.iter().copied());
    (&x + x.transpose()) * 0.5
}

/// Exact filtered-output covariance from the stationary state of the
/// system augmented with the two filter modes. Each filter mode obeys
/// Ẋ_f = −X_f/τ + Ω_c Y_f + √(2/τ) X_out,  Ẏ_f = −Y_f/τ − Ω_c X_f + √(2/τ) Y_out,
/// with X_out = √(2κ) X − X_in. Returns the covariance of
/// [q, p, X_fl, Y_fl, X_fr, Y_fr].
pub fn augmented_output_cm(model: &LinearModel, filters: &OutputFilters) -> Matrix6<f64> {
    let p = &model.derived.params;
    let mut a = DMatrix::<f64>::zeros(10, 10);
    a.view_mut((0, 0), (6, 6)).copy_from(&model.drift);
    let mut b = DMatrix::<f64>::zeros(10, 6);
    b[(1, 1)] = 1.0;
    for (i, k) in [
        (2, p.kappa_l),
        (3, p.kappa_l),
        (4, p.kappa_r),
        (5, p.kappa_r),
    ] {
        b[(i, i)] = (2.0 * k).sqrt();
    }
    for (j, (f, kappa, src)) in [(&filters.l, p.kappa_l, 2), (&filters.r, p.kappa_r, 4)]
        .into_iter()
        .enumerate()
    {
        let row = 6 + 2 * j;
        let g = (2.0 / f.tau).sqrt();
        a[(row, row)] = -1.0 / f.tau;
        a[(row, row + 1)] = f.omega_c;
        a[(row + 1, row)] = -f.omega_c;
        a[(row + 1, row + 1)] = -1.0 / f.tau;
        a[(row, src)] += g * (2.0 * kappa).sqrt();
        a[(row + 1, src + 1)] += g * (2.0 * kappa).sqrt();
        b[(row, src)] = -g;
        b[(row + 1, src + 1)] = -g;
    }
    let d = &model.derived;
    let noise = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        0.0,
        d.gamma_m * (2.0 * d.nbar_mech + 1.0),
        0.5,
        0.5,
        0.5,
        0.5,
    ]));
    let diff = &b * noise * b.transpose();
    let v = lyapunov_oracle(&a, &diff);
    let keep = [0usize, 1, 6, 7, 8, 9];
    Matrix6::from_fn(|i, j| v[(keep[i], keep[j])])
}

/// Coefficients c₀..c₆ of det(λI − A) (c₆ = 1) via Faddeev–LeVerrier.
pub fn char_poly(a: &Matrix6<f64>) -> [f64; 7] {
    let mut c = [0.0; 7];
    c[6] = 1.0;
    let mut m = Matrix6::<f64>::zeros();
    for k in 1..=6 {
        m = a * m + Matrix6::identity() * c[7 - k];
        c[6 - k] = -(a * m).trace() / k as f64;
    }
    c
}

/// Routh–Hurwitz: all leading principal minors of the Hurwitz matrix > 0.
pub fn routh_hurwitz_stable(a: &Matrix6<f64>) -> bool {
    // normalize to a monic polynomial in λ/s for conditioning
    let s = a.amax().max(1e-300);
    let c = char_poly(&(a / s));
    // a_k multiplies λ^{6−k}
    let coef = |k: isize| -> f64 {
        if (0..=6).contains(&k) {
            c[(6 - k) as usize]
        } else {
            0.0
        }
    };
    let n = 6usize;
    let h = DMatrix::from_fn(n, n, |i, j| coef(2 * j as isize - i as isize + 1));
    (1..=n).all(|k| h.view((0, 0), (k, k)).into_owned().determinant() > 0.0)
}
