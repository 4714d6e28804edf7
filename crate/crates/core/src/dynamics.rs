//! The linearized fluctuation dynamics u̇ = A u + n: drift matrix, noise
//! diffusion, direct output feedthrough, Hurwitz stability and the
//! intracavity steady state.
//!
//! State ordering is `[δq, δp, δX_l, δY_l, δX_r, δY_r]`.

use std::fmt::Write as _;

use nalgebra::{linalg::Schur, DMatrix, Matrix6, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::conventions::{OPTICAL_DIFFUSION_PER_KAPPA, OUTPUT_COUPLING_SIGN};
use crate::error::{Error, Result};
use crate::params::DerivedParams;

pub const DIM: usize = 6;

/// Index of each quadrature in the state vector.
pub mod idx {
    pub const Q: usize = 0;
    pub const P: usize = 1;
    pub const XL: usize = 2;
    pub const YL: usize = 3;
    pub const XR: usize = 4;
    pub const YR: usize = 5;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// Drift matrix A, rad/s.
    pub drift: Matrix6<f64>,
    /// Symmetrized diffusion D (diagonal), rad/s.
    pub diffusion: Matrix6<f64>,
    /// Direct feedthrough P_out (diagonal), s.
    pub out_coupling: Matrix6<f64>,
    pub derived: DerivedParams,
}

/// Assemble A, D and P_out from derived parameters.
///
/// Row 4 follows δẎ_l = −κ_l δY_l − Δ_l δX_l + G_l δq, i.e. the entry
/// coupling δX_l into δẎ_l is −Δ_l.
pub fn build(derived: &DerivedParams) -> LinearModel {
    use idx::*;
    let p = &derived.params;
    let (om, gm) = (p.omega_m, derived.gamma_m);
    let (kl, kr) = (p.kappa_l, p.kappa_r);
    let (dl, dr) = (derived.delta_l, derived.delta_r);
    let (gl, gr) = (derived.geff_l, derived.geff_r);

    let mut a = Matrix6::zeros();
    a[(Q, P)] = om;
    a[(P, Q)] = -om;
    a[(P, P)] = -gm;
    a[(P, XL)] = gl;
    a[(P, XR)] = gr;
    a[(XL, XL)] = -kl;
    a[(XL, YL)] = dl;
    a[(YL, Q)] = gl;
    a[(YL, XL)] = -dl;
    a[(YL, YL)] = -kl;
    a[(XR, XR)] = -kr;
    a[(XR, YR)] = dr;
    a[(YR, Q)] = gr;
    a[(YR, XR)] = -dr;
    a[(YR, YR)] = -kr;

    let diffusion = Matrix6::from_diagonal(&nalgebra::Vector6::new(
        0.0,
        gm * (2.0 * derived.nbar_mech + 1.0),
        OPTICAL_DIFFUSION_PER_KAPPA * kl,
        OPTICAL_DIFFUSION_PER_KAPPA * kl,
        OPTICAL_DIFFUSION_PER_KAPPA * kr,
        OPTICAL_DIFFUSION_PER_KAPPA * kr,
    ));
    let pl = OUTPUT_COUPLING_SIGN / (2.0 * kl);
    let pr = OUTPUT_COUPLING_SIGN / (2.0 * kr);
    let out_coupling = Matrix6::from_diagonal(&nalgebra::Vector6::new(0.0, 0.0, pl, pl, pr, pr));

    LinearModel {
        drift: a,
        diffusion,
        out_coupling,
        derived: *derived,
    }
}

impl LinearModel {
    /// √(2κ) on optical rows, 1 on mechanical rows: the scaling of the
    /// intracavity quadratures in the output field.
    pub fn output_gain(&self) -> [f64; DIM] {
        let p = &self.derived.params;
        let l = (2.0 * p.kappa_l).sqrt();
        let r = (2.0 * p.kappa_r).sqrt();
        [1.0, 1.0, l, l, r, r]
    }

    /// Row-major text dump of A, D and P_out.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (name, m) in [
            ("drift", &self.drift),
            ("diffusion", &self.diffusion),
            ("out_coupling", &self.out_coupling),
        ] {
            let _ = writeln!(s, "# {name}");
            s.push_str(&format_matrix(m));
        }
        s
    }
}

pub fn format_matrix(m: &Matrix6<f64>) -> String {
    let mut s = String::new();
    for i in 0..DIM {
        let row: Vec<String> = (0..DIM).map(|j| format!("{:.12e}", m[(i, j)])).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Largest real part among the drift eigenvalues, rad/s.
    pub margin: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub eigenvalues: Vec<Complex64>,
}

fn serialize_complex<S: serde::Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Hurwitz test on the drift matrix via its real Schur form.
pub fn stability(model: &LinearModel) -> Result<StabilityReport> {
    let a = model.drift;
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(
            "drift matrix has non-finite entries".into(),
        ));
    }
    let schur = Schur::try_new(a, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    let margin = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !margin.is_finite() {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    Ok(StabilityReport {
        stable: margin < 0.0,
        margin,
        eigenvalues,
    })
}

/// Solve A V + V Aᵀ + D = 0 for square A of any size.
///
/// Dense Kronecker solve after rescaling A by its largest entry, followed by
/// two rounds of iterative refinement. The result is symmetrized.
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || d.nrows() != n || d.ncols() != n {
        return Err(Error::Numerical("lyapunov: dimension mismatch".into()));
    }
    let scale = a.amax();
    if scale == 0.0 {
        return Err(Error::Numerical("lyapunov: zero drift".into()));
    }
    let a_s = a / scale;
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(&a_s) + a_s.kronecker(&eye);
    let lu = k.lu();

    let solve = |rhs: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let b = nalgebra::DVector::from_column_slice(rhs.as_slice());
        let x = lu
            .solve(&(-b))
            .ok_or_else(|| Error::Numerical("lyapunov: singular operator".into()))?;
        Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
    };

    let d_s = d / scale;
    let mut v = solve(&d_s)?;
    for _ in 0..2 {
        let resid = &a_s * &v + &v * a_s.transpose() + &d_s;
        v += solve(&resid)?;
    }
    let v = (&v + v.transpose()) * 0.5;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("lyapunov: non-finite solution".into()));
    }
    Ok(v)
}

/// Stationary intracavity covariance matrix: A V + V Aᵀ + D = 0.
pub fn lyapunov_cm(model: &LinearModel) -> Result<Matrix6<f64>> {
    let report = stability(model)?;
    if !report.stable {
        return Err(Error::Unstable {
            margin: report.margin,
        });
    }
    let a = DMatrix::from_iterator(DIM, DIM, model.drift.iter().copied());
    let d = DMatrix::from_iterator(DIM, DIM, model.diffusion.iter().copied());
    let v = solve_lyapunov(&a, &d)?;
    let v = Matrix6::from_iterator(v.iter().copied());

    let eig = SymmetricEigen::new(v);
    let vmax = v.amax();
    if eig.eigenvalues.iter().any(|&e| e < -1e-10 * vmax) {
        return Err(Error::Numerical(
            "lyapunov solution is not positive semidefinite".into(),
        ));
    }
    Ok(v)
}

/// max |A V + V Aᵀ + D|.
pub fn lyapunov_residual(model: &LinearModel, v: &Matrix6<f64>) -> f64 {
    let a = &model.drift;
    (a * v + v * a.transpose() + model.diffusion).amax()
}
