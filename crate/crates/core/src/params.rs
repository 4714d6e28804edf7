//! Physical parameters of the membrane-in-the-middle cavity and everything
//! derived from them: bare and effective couplings, drive amplitudes, the
//! mechanical thermal occupancy and the semiclassical fixed point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, DEFAULT_WAVELENGTH, HBAR, K_B};
use crate::error::{Error, Result};

/// How the two cavity detunings are specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetuningMode {
    /// Effective detunings Δ_r, Δ_l (rad/s), already including the static
    /// radiation-pressure shift. This is what the figure presets fix.
    Effective { delta_r: f64, delta_l: f64 },
    /// Bare detunings Δ_0r, Δ_0l (rad/s); the effective ones follow from the
    /// self-consistent membrane displacement.
    Bare { delta0_r: f64, delta0_l: f64 },
}

/// Raw experimental knobs, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Membrane mass, kg.
    pub mass: f64,
    /// Mechanical angular frequency Ω_m, rad/s.
    pub omega_m: f64,
    /// Mechanical quality factor Ω_m/γ_m.
    pub quality: f64,
    /// Length of each subcavity, m.
    pub cav_half_length: f64,
    pub kappa_r: f64,
    pub kappa_l: f64,
    /// Drive powers, W.
    pub power_r: f64,
    pub power_l: f64,
    /// Drive wavelengths, m.
    pub wavelength_r: f64,
    pub wavelength_l: f64,
    pub detuning_mode: DetuningMode,
    /// Mechanical bath temperature, K.
    pub temperature: f64,
    /// Output filter inverse bandwidths, s.
    pub filter_tau_r: f64,
    pub filter_tau_l: f64,
    /// Output filter central frequencies, rad/s (may be negative).
    pub filter_omega_r: f64,
    pub filter_omega_l: f64,
}

/// Names accepted by [`PhysicalParams::set_field`] / [`PhysicalParams::get_field`].
pub const FIELD_NAMES: &[&str] = &[
    "mass",
    "omega_m",
    "quality",
    "cav_half_length",
    "kappa_r",
    "kappa_l",
    "power_r",
    "power_l",
    "wavelength_r",
    "wavelength_l",
    "detuning_r",
    "detuning_l",
    "temperature",
    "filter_tau_r",
    "filter_tau_l",
    "filter_omega_r",
    "filter_omega_l",
];

impl PhysicalParams {
    /// Parameter set of the entanglement-vs-filter-frequency figure:
    /// Ω_m/2π = 10 MHz, m = 10 ng, L = 1 mm, κ_r = 0.4Ω_m, κ_l = 0.1Ω_m,
    /// P_r = 10 mW, P_l = 48 mW, Δ_r = −Ω_m, Δ_l = Ω_m, T = 1 K,
    /// Ω_r = −Ω_m, Ω_l = Ω_m, Q = 1.5×10⁵. Wavelength and τ are assumed.
    pub fn reference() -> Self {
        let omega_m = 2.0 * PI * 10e6;
        Self {
            mass: 10e-12,
            omega_m,
            quality: 1.5e5,
            cav_half_length: 1e-3,
            kappa_r: 0.4 * omega_m,
            kappa_l: 0.1 * omega_m,
            power_r: 10e-3,
            power_l: 48e-3,
            wavelength_r: DEFAULT_WAVELENGTH,
            wavelength_l: DEFAULT_WAVELENGTH,
            detuning_mode: DetuningMode::Effective {
                delta_r: -omega_m,
                delta_l: omega_m,
            },
            temperature: 1.0,
            filter_tau_r: 1e-6,
            filter_tau_l: 1e-6,
            filter_omega_r: -omega_m,
            filter_omega_l: omega_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 9] = [
            ("mass", self.mass),
            ("omega_m", self.omega_m),
            ("quality", self.quality),
            ("cav_half_length", self.cav_half_length),
            ("kappa_r", self.kappa_r),
            ("kappa_l", self.kappa_l),
            ("wavelength_r", self.wavelength_r),
            ("wavelength_l", self.wavelength_l),
            ("filter_tau_r", self.filter_tau_r),
        ];
        for (field, v) in positive
            .into_iter()
            .chain([("filter_tau_l", self.filter_tau_l)])
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        for (field, v) in [
            ("power_r", self.power_r),
            ("power_l", self.power_l),
            ("temperature", self.temperature),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parameter {
                    field,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        let (d1, d2) = self.detunings();
        for (field, v) in [
            ("detuning_r", d1),
            ("detuning_l", d2),
            ("filter_omega_r", self.filter_omega_r),
            ("filter_omega_l", self.filter_omega_l),
        ] {
            if !v.is_finite() {
                return Err(Error::Parameter {
                    field,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// (r, l) detunings as stored, whatever the mode.
    pub fn detunings(&self) -> (f64, f64) {
        match self.detuning_mode {
            DetuningMode::Effective { delta_r, delta_l } => (delta_r, delta_l),
            DetuningMode::Bare { delta0_r, delta0_l } => (delta0_r, delta0_l),
        }
    }

    pub fn gamma_m(&self) -> f64 {
        self.omega_m / self.quality
    }

    pub fn get_field(&self, name: &str) -> Result<f64> {
        let (dr, dl) = self.detunings();
        Ok(match name {
            "mass" => self.mass,
            "omega_m" => self.omega_m,
            "quality" => self.quality,
            "cav_half_length" => self.cav_half_length,
            "kappa_r" => self.kappa_r,
            "kappa_l" => self.kappa_l,
            "power_r" => self.power_r,
            "power_l" => self.power_l,
            "wavelength_r" => self.wavelength_r,
            "wavelength_l" => self.wavelength_l,
            "detuning_r" => dr,
            "detuning_l" => dl,
            "temperature" => self.temperature,
            "filter_tau_r" => self.filter_tau_r,
            "filter_tau_l" => self.filter_tau_l,
            "filter_omega_r" => self.filter_omega_r,
            "filter_omega_l" => self.filter_omega_l,
            _ => return Err(unknown_field(name)),
        })
    }

    /// Set a field by name. Detunings are written into whichever mode is active.
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "mass" => self.mass = value,
            "omega_m" => self.omega_m = value,
            "quality" => self.quality = value,
            "cav_half_length" => self.cav_half_length = value,
            "kappa_r" => self.kappa_r = value,
            "kappa_l" => self.kappa_l = value,
            "power_r" => self.power_r = value,
            "power_l" => self.power_l = value,
            "wavelength_r" => self.wavelength_r = value,
            "wavelength_l" => self.wavelength_l = value,
            "detuning_r" => match &mut self.detuning_mode {
                DetuningMode::Effective { delta_r, .. } => *delta_r = value,
                DetuningMode::Bare { delta0_r, .. } => *delta0_r = value,
            },
            "detuning_l" => match &mut self.detuning_mode {
                DetuningMode::Effective { delta_l, .. } => *delta_l = value,
                DetuningMode::Bare { delta0_l, .. } => *delta0_l = value,
            },
            "temperature" => self.temperature = value,
            "filter_tau_r" => self.filter_tau_r = value,
            "filter_tau_l" => self.filter_tau_l = value,
            "filter_omega_r" => self.filter_omega_r = value,
            "filter_omega_l" => self.filter_omega_l = value,
            _ => return Err(unknown_field(name)),
        }
        Ok(())
    }
}

fn unknown_field(name: &str) -> Error {
    Error::Config(format!(
        "unknown parameter `{name}` (expected one of: {})",
        FIELD_NAMES.join(", ")
    ))
}

/// Quantities derived from [`PhysicalParams`] at a given operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Source parameters.
    pub params: PhysicalParams,
    /// Bare optomechanical couplings G_0i = (ω_i/L)√(ħ/mΩ_m), rad/s.
    pub g0_r: f64,
    pub g0_l: f64,
    /// Drive amplitudes ε_i = √(2P_iκ_i/ħω_0i), rad/s (√(photons/s)).
    pub eps_r: f64,
    pub eps_l: f64,
    pub gamma_m: f64,
    /// Thermal phonon occupancy of the mechanical bath.
    pub nbar_mech: f64,
    /// |α| and |β|, intracavity steady-state amplitudes.
    pub alpha_mag: f64,
    pub beta_mag: f64,
    /// Effective couplings G_r, G_l, rad/s.
    pub geff_r: f64,
    pub geff_l: f64,
    /// Effective detunings Δ_r, Δ_l, rad/s.
    pub delta_r: f64,
    pub delta_l: f64,
    /// Static membrane displacement (units of the zero-point spread).
    pub q_s: f64,
}

/// Laser angular frequency 2πc/λ. Drive and resonance frequencies are
/// identified inside prefactors (they differ by a detuning ~10⁻⁸ relative).
pub fn optical_frequency(wavelength: f64) -> f64 {
    2.0 * PI * C_LIGHT / wavelength
}

/// Bose occupancy [exp(ħΩ/k_BT) − 1]⁻¹; zero at T = 0.
pub fn thermal_occupancy(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// Bare coupling ω/L·√(ħ/mΩ_m).
pub fn bare_coupling(wavelength: f64, cav_length: f64, mass: f64, omega_m: f64) -> f64 {
    optical_frequency(wavelength) / cav_length * (HBAR / (mass * omega_m)).sqrt()
}

/// Drive amplitude √(2Pκ/ħω₀).
pub fn drive_amplitude(power: f64, kappa: f64, wavelength: f64) -> f64 {
    (2.0 * power * kappa / (HBAR * optical_frequency(wavelength))).sqrt()
}

/// Closed-form effective coupling
/// G = (2ω/L)√(Pκ / (mΩ_m ω₀ (κ² + Δ²))).
pub fn effective_coupling(
    power: f64,
    kappa: f64,
    delta: f64,
    wavelength: f64,
    cav_length: f64,
    mass: f64,
    omega_m: f64,
) -> f64 {
    let w = optical_frequency(wavelength);
    2.0 * w / cav_length
        * (power * kappa / (mass * omega_m * w * (kappa * kappa + delta * delta))).sqrt()
}

/// Compute all derived quantities. Bare detunings are first resolved
/// through [`fixed_point`].
pub fn derive(params: &PhysicalParams) -> Result<DerivedParams> {
    params.validate()?;
    match params.detuning_mode {
        DetuningMode::Effective { delta_r, delta_l } => Ok(derive_at(params, delta_r, delta_l)),
        DetuningMode::Bare { .. } => Ok(fixed_point(params)?.derived),
    }
}

/// Derived quantities at given effective detunings. `q_s` is evaluated from
/// the radiation-pressure balance at those detunings.
fn derive_at(params: &PhysicalParams, delta_r: f64, delta_l: f64) -> DerivedParams {
    let p = params;
    let g0_r = bare_coupling(p.wavelength_r, p.cav_half_length, p.mass, p.omega_m);
    let g0_l = bare_coupling(p.wavelength_l, p.cav_half_length, p.mass, p.omega_m);
    let eps_r = drive_amplitude(p.power_r, p.kappa_r, p.wavelength_r);
    let eps_l = drive_amplitude(p.power_l, p.kappa_l, p.wavelength_l);
    let alpha_mag = eps_r / (p.kappa_r * p.kappa_r + delta_r * delta_r).sqrt();
    let beta_mag = eps_l / (p.kappa_l * p.kappa_l + delta_l * delta_l).sqrt();
    let q_s = (g0_l * beta_mag * beta_mag - g0_r * alpha_mag * alpha_mag) / p.omega_m;
    DerivedParams {
        params: *p,
        g0_r,
        g0_l,
        eps_r,
        eps_l,
        gamma_m: p.gamma_m(),
        nbar_mech: thermal_occupancy(p.omega_m, p.temperature),
        alpha_mag,
        beta_mag,
        geff_r: effective_coupling(
            p.power_r,
            p.kappa_r,
            delta_r,
            p.wavelength_r,
            p.cav_half_length,
            p.mass,
            p.omega_m,
        ),
        geff_l: effective_coupling(
            p.power_l,
            p.kappa_l,
            delta_l,
            p.wavelength_l,
            p.cav_half_length,
            p.mass,
            p.omega_m,
        ),
        delta_r,
        delta_l,
        q_s,
    }
}

/// One real solution of the static radiation-pressure balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticRoot {
    pub q_s: f64,
    /// The static restoring force is positive (dF/dq > 0).
    pub stable: bool,
}

/// Self-consistent fixed point for bare detunings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    /// Derived parameters at the selected root.
    pub derived: DerivedParams,
    /// All real roots found, in increasing q_s.
    pub roots: Vec<StaticRoot>,
    /// Index into `roots` of the branch connected to q_s = 0 at zero power.
    pub selected: usize,
}

/// Raised alongside a valid [`FixedPoint`] when more than one root is
/// statically stable (optical bistability).
#[derive(Debug, Clone, PartialEq)]
pub struct MultistableWarning {
    pub stable_roots: Vec<f64>,
}

impl FixedPoint {
    pub fn warning(&self) -> Option<MultistableWarning> {
        let stable_roots: Vec<f64> = self
            .roots
            .iter()
            .filter(|r| r.stable)
            .map(|r| r.q_s)
            .collect();
        (stable_roots.len() > 1).then_some(MultistableWarning { stable_roots })
    }
}

/// Convergence target on q_s.
const Q_TOL: f64 = 1e-10;
const MAX_BISECT: usize = 400;
const CONTINUATION_STEPS: usize = 200;

/// Static balance F(q) = q − h(q) at a fraction `scale` of the drive power.
struct Balance {
    g0_r: f64,
    g0_l: f64,
    eps2_r: f64,
    eps2_l: f64,
    kappa_r: f64,
    kappa_l: f64,
    delta0_r: f64,
    delta0_l: f64,
    omega_m: f64,
}

impl Balance {
    fn force(&self, q: f64, scale: f64) -> f64 {
        let dr = self.delta0_r + self.g0_r * q;
        let dl = self.delta0_l - self.g0_l * q;
        let nr = self.eps2_r / (self.kappa_r * self.kappa_r + dr * dr);
        let nl = self.eps2_l / (self.kappa_l * self.kappa_l + dl * dl);
        q - scale * (self.g0_l * nl - self.g0_r * nr) / self.omega_m
    }

    fn slope(&self, q: f64, scale: f64) -> f64 {
        let dr = self.delta0_r + self.g0_r * q;
        let dl = self.delta0_l - self.g0_l * q;
        let den_r = self.kappa_r * self.kappa_r + dr * dr;
        let den_l = self.kappa_l * self.kappa_l + dl * dl;
        let dh = (self.g0_l * self.eps2_l * 2.0 * self.g0_l * dl / (den_l * den_l)
            + self.g0_r * self.eps2_r * 2.0 * self.g0_r * dr / (den_r * den_r))
            / self.omega_m;
        1.0 - scale * dh
    }

    /// |h| is bounded by this, so every root lies in [−bound, bound].
    fn bound(&self) -> f64 {
        (self.g0_l * self.eps2_l / (self.kappa_l * self.kappa_l)
            + self.g0_r * self.eps2_r / (self.kappa_r * self.kappa_r))
            / self.omega_m
    }

    fn all_roots(&self, scale: f64) -> Result<Vec<f64>> {
        let h = scale * self.bound();
        if h == 0.0 {
            return Ok(vec![0.0]);
        }
        let lo = -h - 1.0;
        let hi = h + 1.0;
        let mut grid: Vec<f64> = (0..=4000)
            .map(|i| lo + (hi - lo) * i as f64 / 4000.0)
            .collect();
        // The Lorentzian features can be far narrower than the bracket.
        for (center, width) in [
            (-self.delta0_r / self.g0_r, self.kappa_r / self.g0_r),
            (self.delta0_l / self.g0_l, self.kappa_l / self.g0_l),
        ] {
            for k in [
                0.0, 0.03, 0.1, 0.3, 0.6, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0,
            ] {
                for x in [center - k * width, center + k * width] {
                    if x > lo && x < hi {
                        grid.push(x);
                    }
                }
            }
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let mut roots = Vec::new();
        let mut prev = (grid[0], self.force(grid[0], scale));
        for &x in &grid[1..] {
            let fx = self.force(x, scale);
            if prev.1 == 0.0 {
                roots.push(prev.0);
            } else if prev.1.signum() != fx.signum() && fx != 0.0 {
                roots.push(self.bisect(prev.0, x, scale)?);
            }
            prev = (x, fx);
        }
        if prev.1 == 0.0 {
            roots.push(prev.0);
        }
        Ok(roots)
    }

    fn bisect(&self, mut a: f64, mut b: f64, scale: f64) -> Result<f64> {
        let mut fa = self.force(a, scale);
        for _ in 0..MAX_BISECT {
            let m = 0.5 * (a + b);
            if (b - a).abs() < Q_TOL || m == a || m == b {
                return Ok(m);
            }
            let fm = self.force(m, scale);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        Err(Error::NonConvergence {
            iterations: MAX_BISECT,
            residual: self.force(0.5 * (a + b), scale).abs(),
        })
    }

    /// Newton from `start`; `None` if it does not settle.
    fn newton(&self, start: f64, scale: f64) -> Option<f64> {
        let mut q = start;
        for _ in 0..100 {
            let f = self.force(q, scale);
            let d = self.slope(q, scale);
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            let step = f / d;
            q -= step;
            if !q.is_finite() {
                return None;
            }
            if step.abs() < Q_TOL {
                return Some(q);
            }
        }
        None
    }
}

/// Solve the static balance q_s = (G_0l|β|² − G_0r|α|²)/Ω_m for bare
/// detunings. All real roots are reported; the one reached by ramping the
/// drive power from zero (natural-parameter continuation) is selected.
pub fn fixed_point(params: &PhysicalParams) -> Result<FixedPoint> {
    params.validate()?;
    let (delta0_r, delta0_l) = match params.detuning_mode {
        DetuningMode::Bare { delta0_r, delta0_l } => (delta0_r, delta0_l),
        DetuningMode::Effective { .. } => {
            return Err(Error::Domain(
                "fixed_point requires bare detunings".to_string(),
            ))
        }
    };
    let p = params;
    let g0_r = bare_coupling(p.wavelength_r, p.cav_half_length, p.mass, p.omega_m);
    let g0_l = bare_coupling(p.wavelength_l, p.cav_half_length, p.mass, p.omega_m);
    let eps_r = drive_amplitude(p.power_r, p.kappa_r, p.wavelength_r);
    let eps_l = drive_amplitude(p.power_l, p.kappa_l, p.wavelength_l);
    let balance = Balance {
        g0_r,
        g0_l,
        eps2_r: eps_r * eps_r,
        eps2_l: eps_l * eps_l,
        kappa_r: p.kappa_r,
        kappa_l: p.kappa_l,
        delta0_r,
        delta0_l,
        omega_m: p.omega_m,
    };

    let roots = balance.all_roots(1.0)?;

    // Follow the branch starting at q = 0 for zero drive.
    let mut q = 0.0;
    for k in 1..=CONTINUATION_STEPS {
        let scale = k as f64 / CONTINUATION_STEPS as f64;
        q = match balance.newton(q, scale) {
            Some(next) => next,
            None => nearest(&balance.all_roots(scale)?, q),
        };
    }
    let selected = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - q).abs().total_cmp(&(b.1 - q).abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NonConvergence {
            iterations: CONTINUATION_STEPS,
            residual: balance.force(q, 1.0).abs(),
        })?;
    let q_s = roots[selected];

    let residual = balance.force(q_s, 1.0).abs();
    if !residual.is_finite() {
        return Err(Error::NonConvergence {
            iterations: MAX_BISECT,
            residual,
        });
    }

    let static_roots = roots
        .iter()
        .map(|&q_s| StaticRoot {
            q_s,
            stable: balance.slope(q_s, 1.0) > 0.0,
        })
        .collect();

    let delta_r = delta0_r + g0_r * q_s;
    let delta_l = delta0_l - g0_l * q_s;
    let mut derived = derive_at(params, delta_r, delta_l);
    derived.q_s = q_s;
    Ok(FixedPoint {
        derived,
        roots: static_roots,
        selected,
    })
}

fn nearest(candidates: &[f64], q: f64) -> f64 {
    candidates
        .iter()
        .copied()
        .min_by(|a, b| (a - q).abs().total_cmp(&(b - q).abs()))
        .unwrap_or(q)
}
