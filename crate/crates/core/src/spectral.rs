//! Filtered output modes and their stationary covariance matrix.
//!
//! Each subcavity output is projected onto one temporal mode with the causal
//! kernel g(t) = √(2/τ)·θ(t)·e^{−(1/τ + iΩ_c)t}. The stationary covariance
//! of `[δq, δp, δX_l^out, δY_l^out, δX_r^out, δY_r^out]` is
//!
//! V = ∫ dω/2π · Υ(ω)(M(ω) + P)D(M(ω)† + P)Υ(ω)†,  M(ω) = (iω + A)⁻¹,
//!
//! evaluated by adaptive quadrature over the full frequency line.

use nalgebra::{Matrix4, Matrix6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conventions::SPECTRAL_MEASURE;
use crate::dynamics::{stability, LinearModel};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::quadrature::{integrate_real_line, QuadOptions};

type CMatrix6 = Matrix6<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Inverse bandwidth, s.
    pub tau: f64,
    /// Central frequency, rad/s.
    pub omega_c: f64,
}

impl FilterSpec {
    pub fn new(tau: f64, omega_c: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Parameter {
                field: "tau",
                reason: format!("must be finite and > 0, got {tau}"),
            });
        }
        if !omega_c.is_finite() {
            return Err(Error::Parameter {
                field: "omega_c",
                reason: format!("must be finite, got {omega_c}"),
            });
        }
        Ok(Self { tau, omega_c })
    }
}

/// The two output filters (Alice's mode l, Bob's mode r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputFilters {
    pub l: FilterSpec,
    pub r: FilterSpec,
}

impl OutputFilters {
    pub fn from_params(p: &PhysicalParams) -> Result<Self> {
        Ok(Self {
            l: FilterSpec::new(p.filter_tau_l, p.filter_omega_l)?,
            r: FilterSpec::new(p.filter_tau_r, p.filter_omega_r)?,
        })
    }
}

/// g̃(ω) = ∫ g(t) e^{iωt} dt = √(2/τ) / (1/τ − i(ω − Ω_c)).
pub fn filter_ft(spec: &FilterSpec, omega: f64) -> Complex64 {
    let rate = 1.0 / spec.tau;
    Complex64::from((2.0 * rate).sqrt()) / Complex64::new(rate, -(omega - spec.omega_c))
}

/// Transforms of √(2κ)·Re g(t) and √(2κ)·Im g(t). Both are complex in
/// general; their combination R + iI equals √(2κ)·g̃(ω).
fn filter_quadrature_parts(spec: &FilterSpec, kappa: f64, omega: f64) -> (Complex64, Complex64) {
    let gain = (2.0 * kappa).sqrt();
    let plus = filter_ft(spec, omega);
    let minus = filter_ft(spec, -omega).conj();
    let re = (plus + minus) * 0.5 * gain;
    let im = (plus - minus) / Complex64::new(0.0, 2.0) * gain;
    (re, im)
}

/// Υ(ω): identity on the mechanical rows, [[R, −I], [I, R]] on each
/// optical block.
pub fn upsilon(model: &LinearModel, filters: &OutputFilters, omega: f64) -> CMatrix6 {
    let p = &model.derived.params;
    let mut u = CMatrix6::zeros();
    u[(0, 0)] = Complex64::from(1.0);
    u[(1, 1)] = Complex64::from(1.0);
    for (offset, spec, kappa) in [(2, &filters.l, p.kappa_l), (4, &filters.r, p.kappa_r)] {
        let (re, im) = filter_quadrature_parts(spec, kappa, omega);
        u[(offset, offset)] = re;
        u[(offset, offset + 1)] = -im;
        u[(offset + 1, offset)] = im;
        u[(offset + 1, offset + 1)] = re;
    }
    u
}

/// M(ω) = (iω + A)⁻¹.
pub fn susceptibility(model: &LinearModel, omega: f64) -> Result<CMatrix6> {
    let m = model.drift.map(Complex64::from) + CMatrix6::identity() * Complex64::new(0.0, omega);
    m.try_inverse()
        .ok_or_else(|| Error::Numerical(format!("iω + A singular at ω = {omega}")))
}

/// Stationary output covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputCM {
    #[serde(with = "rows6")]
    pub matrix: Matrix6<f64>,
    /// Estimated absolute integration error of each entry.
    #[serde(with = "rows6")]
    pub quad_error: Matrix6<f64>,
}

impl OutputCM {
    /// The 4×4 block of the two optical output modes, ordered
    /// `[X_l, Y_l, X_r, Y_r]`.
    pub fn optical_block(&self) -> Matrix4<f64> {
        self.matrix.fixed_view::<4, 4>(2, 2).into_owned()
    }

    pub fn max_quad_error(&self) -> f64 {
        self.quad_error.max()
    }
}

/// Feature frequencies and widths of the integrand: drift poles and the
/// two images ±Ω_c of each filter.
fn features(model: &LinearModel, filters: Option<&OutputFilters>) -> Result<Vec<(f64, f64)>> {
    let report = stability(model)?;
    let mut out: Vec<(f64, f64)> = report
        .eigenvalues
        .iter()
        .map(|z| (-z.im, z.re.abs()))
        .collect();
    if let Some(f) = filters {
        for spec in [&f.l, &f.r] {
            let w = 1.0 / spec.tau;
            out.push((spec.omega_c, w));
            out.push((-spec.omega_c, w));
        }
    }
    Ok(out)
}

fn breakpoints(features: &[(f64, f64)]) -> Vec<f64> {
    const OFFSETS: [f64; 13] = [
        0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0, 10.0, -10.0, 30.0, -30.0,
    ];
    let mut out = Vec::with_capacity(features.len() * OFFSETS.len());
    for &(center, width) in features {
        if width == 0.0 {
            out.push(center);
            continue;
        }
        out.extend(OFFSETS.iter().map(|k| center + k * width));
    }
    out
}

/// Map scale for the quadrature: the largest characteristic frequency.
pub fn default_scale(model: &LinearModel, filters: Option<&OutputFilters>) -> f64 {
    let p = &model.derived.params;
    let mut s = p.omega_m.max(p.kappa_l).max(p.kappa_r);
    if let Some(f) = filters {
        for spec in [&f.l, &f.r] {
            s = s.max(spec.omega_c.abs() + 1.0 / spec.tau);
        }
    }
    s
}

pub fn default_options(model: &LinearModel, filters: Option<&OutputFilters>) -> QuadOptions {
    QuadOptions::with_scale(default_scale(model, filters))
}

fn require_stable(model: &LinearModel) -> Result<()> {
    let report = stability(model)?;
    if !report.stable {
        return Err(Error::Unstable {
            margin: report.margin,
        });
    }
    Ok(())
}

fn finish(value: CMatrix6, error: Matrix6<f64>) -> Result<OutputCM> {
    let re = value.map(|z| z.re);
    let im_max = value.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let sym = (re + re.transpose()) * 0.5;
    let anti_max = (re - sym).amax();
    let limit = 1e-8_f64.max(1e-10 * sym.amax());
    if im_max > limit || anti_max > limit {
        return Err(Error::Numerical(format!(
            "covariance integral not real-symmetric (imag {im_max:e}, antisym {anti_max:e})"
        )));
    }
    let err = (error + error.transpose()) * 0.5;
    Ok(OutputCM {
        matrix: sym,
        quad_error: err,
    })
}

/// Filtered output covariance matrix with default quadrature settings.
pub fn output_cm(model: &LinearModel, filters: &OutputFilters) -> Result<OutputCM> {
    output_cm_with(model, filters, &default_options(model, Some(filters)))
}

pub fn output_cm_with(
    model: &LinearModel,
    filters: &OutputFilters,
    opts: &QuadOptions,
) -> Result<OutputCM> {
    require_stable(model)?;
    let bps = breakpoints(&features(model, Some(filters))?);
    let d = model.diffusion.map(Complex64::from);
    let p_out = model.out_coupling.map(Complex64::from);
    let measure = Complex64::from(SPECTRAL_MEASURE);
    let integrand = |omega: f64| {
        let m = match susceptibility(model, omega) {
            Ok(m) => m,
            Err(_) => return CMatrix6::from_element(Complex64::new(f64::NAN, 0.0)),
        };
        let u = upsilon(model, filters, omega);
        let left = u * (m + p_out);
        left * d * left.adjoint() * measure
    };
    let r = integrate_real_line(integrand, &bps, opts)?;
    if r.value.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numerical(
            "singular susceptibility on the real axis".into(),
        ));
    }
    finish(r.value, r.error)
}

/// Intracavity covariance from the frequency integral ∫ M D M† dω/2π
/// (no filters, no feedthrough). Must agree with the Lyapunov solution.
pub fn unfiltered_cm(model: &LinearModel) -> Result<OutputCM> {
    unfiltered_cm_with(model, &default_options(model, None))
}

pub fn unfiltered_cm_with(model: &LinearModel, opts: &QuadOptions) -> Result<OutputCM> {
    require_stable(model)?;
    let bps = breakpoints(&features(model, None)?);
    let d = model.diffusion.map(Complex64::from);
    let measure = Complex64::from(SPECTRAL_MEASURE);
    let integrand = |omega: f64| match susceptibility(model, omega) {
        Ok(m) => m * d * m.adjoint() * measure,
        Err(_) => CMatrix6::from_element(Complex64::new(f64::NAN, 0.0)),
    };
    let r = integrate_real_line(integrand, &bps, opts)?;
    if r.value.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numerical(
            "singular susceptibility on the real axis".into(),
        ));
    }
    finish(r.value, r.error)
}

/// Two-mode block-form parameters of the optical output CM:
///
/// ```text
///       ⎡ L·I   C  ⎤        ⎡ −c   c′ ⎤
/// V′ =  ⎣ Cᵀ   R·I ⎦ ,  C = ⎣  c′  c  ⎦
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeBlock {
    pub big_l: f64,
    pub big_r: f64,
    pub c: f64,
    pub c_prime: f64,
    /// max |raw − idealized| over the 4×4 block.
    pub asymmetry: f64,
}

/// Diagnostics raised by [`TwoModeBlock::warnings`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockWarning {
    /// The raw block departs from the block form by more than 5 %.
    Degraded { asymmetry: f64, limit: f64 },
    /// c′ is not small next to c.
    CPrimeNotSmall { c_prime: f64, c: f64 },
}

impl TwoModeBlock {
    pub fn vacuum() -> Self {
        Self {
            big_l: 0.5,
            big_r: 0.5,
            c: 0.0,
            c_prime: 0.0,
            asymmetry: 0.0,
        }
    }

    /// Block-form matrix with these parameters.
    pub fn matrix(&self) -> Matrix4<f64> {
        let (l, r, c, cp) = (self.big_l, self.big_r, self.c, self.c_prime);
        Matrix4::new(
            l, 0.0, -c, cp, //
            0.0, l, cp, c, //
            -c, cp, r, 0.0, //
            cp, c, 0.0, r,
        )
    }

    pub fn warnings(&self) -> Vec<BlockWarning> {
        let mut w = Vec::new();
        let limit = 0.05 * self.big_l.max(self.big_r);
        if self.asymmetry > limit {
            w.push(BlockWarning::Degraded {
                asymmetry: self.asymmetry,
                limit,
            });
        }
        if self.c_prime.abs() > 0.05 * self.c.abs().max(1e-12) && self.c_prime.abs() > 1e-9 {
            w.push(BlockWarning::CPrimeNotSmall {
                c_prime: self.c_prime,
                c: self.c,
            });
        }
        w
    }
}

/// Project a 4×4 optical CM `[X_l, Y_l, X_r, Y_r]` onto the block form.
pub fn reduce_block(v: &Matrix4<f64>) -> TwoModeBlock {
    let big_l = 0.5 * (v[(0, 0)] + v[(1, 1)]);
    let big_r = 0.5 * (v[(2, 2)] + v[(3, 3)]);
    let c = 0.5 * (v[(1, 3)] - v[(0, 2)]);
    let c_prime = 0.5 * (v[(0, 3)] + v[(1, 2)]);
    let mut block = TwoModeBlock {
        big_l,
        big_r,
        c,
        c_prime,
        asymmetry: 0.0,
    };
    block.asymmetry = (v - block.matrix()).amax();
    block
}

pub fn reduce_two_mode(cm: &OutputCM) -> TwoModeBlock {
    reduce_block(&cm.optical_block())
}

/// Row-of-rows serde for 6×6 matrices.
mod rows6 {
    use nalgebra::Matrix6;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix6<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<[f64; 6]> = (0..6).map(|i| std::array::from_fn(|j| m[(i, j)])).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix6<f64>, D::Error> {
        let rows: [[f64; 6]; 6] = Deserialize::deserialize(d)?;
        Ok(Matrix6::from_fn(|i, j| rows[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build;
    use crate::params::derive;
    use std::f64::consts::PI;

    fn model(p: &PhysicalParams) -> LinearModel {
        build(&derive(p).unwrap())
    }

    #[test]
    fn filter_peak_and_half_width() {
        let f = FilterSpec::new(2e-6, 3e7).unwrap();
        let peak = filter_ft(&f, f.omega_c);
        assert!((peak.re - (2.0 * f.tau).sqrt()).abs() < 1e-15);
        assert_eq!(peak.im, 0.0);
        let half = filter_ft(&f, f.omega_c + 1.0 / f.tau).norm_sqr();
        assert!((half - 0.5 * peak.norm_sqr()).abs() < 1e-12 * peak.norm_sqr());
        for dw in [-3e6, -1e5, 1e4, 7e6] {
            assert!(filter_ft(&f, f.omega_c + dw).norm() < peak.norm());
        }
    }

    #[test]
    fn filter_parseval() {
        let f = FilterSpec::new(1e-6, -5e7).unwrap();
        let r = integrate_real_line(
            |w| {
                nalgebra::SMatrix::<Complex64, 1, 1>::new(Complex64::from(
                    filter_ft(&f, w).norm_sqr(),
                ))
            },
            &[f.omega_c],
            &QuadOptions::with_scale(1e7),
        )
        .unwrap();
        assert!((r.value[(0, 0)].re / (2.0 * PI) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn upsilon_structure() {
        let m = model(&PhysicalParams::reference());
        let f = OutputFilters::from_params(&m.derived.params).unwrap();
        for w in [-7e7, -1e3, 0.0, 6.2e7, 1e10] {
            let u = upsilon(&m, &f, w);
            assert_eq!(u[(0, 0)], Complex64::from(1.0));
            assert_eq!(u[(1, 1)], Complex64::from(1.0));
            for o in [2, 4] {
                let b = u.fixed_view::<2, 2>(o, o).into_owned();
                let j = nalgebra::Matrix2::new(0.0, -1.0, 1.0, 0.0).map(Complex64::from);
                assert!((b * j - j * b).camax() < 1e-12 * b.camax().max(1e-300));
            }
        }
        // R + iI = √(2κ) g̃(ω)
        let p = m.derived.params;
        let w = f.l.omega_c;
        let u = upsilon(&m, &f, w);
        let combo = u[(2, 2)] + Complex64::i() * u[(3, 2)];
        let expect = filter_ft(&f.l, w) * (2.0 * p.kappa_l).sqrt();
        assert!((combo - expect).norm() < 1e-12 * expect.norm());
        assert!((expect.re - (4.0 * p.kappa_l * f.l.tau).sqrt()).abs() < 1e-9 * expect.re);
        // far off resonance the optical blocks vanish
        let far = upsilon(&m, &f, 1e13);
        assert!(far.fixed_view::<4, 4>(2, 2).camax() < 1e-3);
    }

    #[test]
    fn vacuum_output_without_drive() {
        let p = PhysicalParams {
            power_r: 0.0,
            power_l: 0.0,
            ..PhysicalParams::reference()
        };
        let m = model(&p);
        let cm = output_cm(&m, &OutputFilters::from_params(&p).unwrap()).unwrap();
        let b = reduce_two_mode(&cm);
        assert!((b.big_l - 0.5).abs() < 1e-6);
        assert!((b.big_r - 0.5).abs() < 1e-6);
        assert!(b.c.abs() < 1e-6 && b.c_prime.abs() < 1e-6);
        for i in 0..2 {
            for j in 2..6 {
                assert!(cm.matrix[(i, j)].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn reduce_vacuum_and_tmsv() {
        let v = Matrix4::identity() * 0.5;
        assert_eq!(reduce_block(&v), TwoModeBlock::vacuum());
        let r: f64 = 0.8;
        let (ch, sh) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        let tmsv = Matrix4::new(
            ch, 0.0, -sh, 0.0, 0.0, ch, 0.0, sh, -sh, 0.0, ch, 0.0, 0.0, sh, 0.0, ch,
        );
        let b = reduce_block(&tmsv);
        assert!((b.c - r.sinh() * r.cosh()).abs() < 1e-14);
        assert_eq!(b.c_prime, 0.0);
        assert_eq!(b.asymmetry, 0.0);
        assert!(b.warnings().is_empty());
    }

    #[test]
    fn asymmetry_bounds_reconstruction() {
        let v = Matrix4::new(
            1.3, 0.1, -0.9, 0.05, 0.1, 1.1, 0.02, 0.8, -0.9, 0.02, 1.2, -0.03, 0.05, 0.8, -0.03,
            1.25,
        );
        let b = reduce_block(&v);
        assert!((v - b.matrix()).amax() <= b.asymmetry);
        assert!(b
            .warnings()
            .iter()
            .any(|w| matches!(w, BlockWarning::Degraded { .. })));
    }

    #[test]
    fn refuses_unstable_model() {
        let p = PhysicalParams {
            power_r: 1.0,
            power_l: 4.8,
            ..PhysicalParams::reference()
        };
        let m = model(&p);
        assert!(matches!(
            output_cm(&m, &OutputFilters::from_params(&p).unwrap()),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn json_field_names() {
        let b = TwoModeBlock::vacuum();
        let s = serde_json::to_string(&b).unwrap();
        for k in ["big_l", "big_r", "c", "c_prime", "asymmetry"] {
            assert!(s.contains(&format!("\"{k}\"")));
        }
        let cm = OutputCM {
            matrix: Matrix6::identity(),
            quad_error: Matrix6::zeros(),
        };
        let s = serde_json::to_string(&cm).unwrap();
        assert!(s.starts_with("{\"matrix\":[[1.0,0.0"));
        let back: OutputCM = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cm);
    }
}
