//! Flat key/value parameter files (TOML syntax, SI units).
//!
//! Keys are the [`PhysicalParams`] field names with the detuning written as
//! `detuning_mode = "effective" | "bare"` plus `detuning_r`, `detuning_l`.
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::DEFAULT_WAVELENGTH;
use crate::error::{Error, Result};
use crate::params::{DetuningMode, PhysicalParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeKind {
    #[default]
    Effective,
    Bare,
}

fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatParams {
    mass: f64,
    omega_m: f64,
    quality: f64,
    cav_half_length: f64,
    kappa_r: f64,
    kappa_l: f64,
    power_r: f64,
    power_l: f64,
    #[serde(default = "default_wavelength")]
    wavelength_r: f64,
    #[serde(default = "default_wavelength")]
    wavelength_l: f64,
    #[serde(default)]
    detuning_mode: ModeKind,
    detuning_r: f64,
    detuning_l: f64,
    temperature: f64,
    filter_tau_r: f64,
    filter_tau_l: f64,
    filter_omega_r: f64,
    filter_omega_l: f64,
}

impl From<FlatParams> for PhysicalParams {
    fn from(f: FlatParams) -> Self {
        let detuning_mode = match f.detuning_mode {
            ModeKind::Effective => DetuningMode::Effective {
                delta_r: f.detuning_r,
                delta_l: f.detuning_l,
            },
            ModeKind::Bare => DetuningMode::Bare {
                delta0_r: f.detuning_r,
                delta0_l: f.detuning_l,
            },
        };
        PhysicalParams {
            mass: f.mass,
            omega_m: f.omega_m,
            quality: f.quality,
            cav_half_length: f.cav_half_length,
            kappa_r: f.kappa_r,
            kappa_l: f.kappa_l,
            power_r: f.power_r,
            power_l: f.power_l,
            wavelength_r: f.wavelength_r,
            wavelength_l: f.wavelength_l,
            detuning_mode,
            temperature: f.temperature,
            filter_tau_r: f.filter_tau_r,
            filter_tau_l: f.filter_tau_l,
            filter_omega_r: f.filter_omega_r,
            filter_omega_l: f.filter_omega_l,
        }
    }
}

impl From<&PhysicalParams> for FlatParams {
    fn from(p: &PhysicalParams) -> Self {
        let (mode, dr, dl) = match p.detuning_mode {
            DetuningMode::Effective { delta_r, delta_l } => (ModeKind::Effective, delta_r, delta_l),
            DetuningMode::Bare { delta0_r, delta0_l } => (ModeKind::Bare, delta0_r, delta0_l),
        };
        FlatParams {
            mass: p.mass,
            omega_m: p.omega_m,
            quality: p.quality,
            cav_half_length: p.cav_half_length,
            kappa_r: p.kappa_r,
            kappa_l: p.kappa_l,
            power_r: p.power_r,
            power_l: p.power_l,
            wavelength_r: p.wavelength_r,
            wavelength_l: p.wavelength_l,
            detuning_mode: mode,
            detuning_r: dr,
            detuning_l: dl,
            temperature: p.temperature,
            filter_tau_r: p.filter_tau_r,
            filter_tau_l: p.filter_tau_l,
            filter_omega_r: p.filter_omega_r,
            filter_omega_l: p.filter_omega_l,
        }
    }
}

/// Parse a parameter file's contents and validate the result.
pub fn parse_params(text: &str) -> Result<PhysicalParams> {
    let flat: FlatParams = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let params = PhysicalParams::from(flat);
    params.validate()?;
    Ok(params)
}

pub fn load_params(path: &Path) -> Result<PhysicalParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_params(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Render parameters in the same flat format.
pub fn to_toml(params: &PhysicalParams) -> String {
    toml::to_string(&FlatParams::from(params)).expect("flat params always serialize")
}

/// Flat JSON object with the config keys, for manifests.
pub fn to_json_value(params: &PhysicalParams) -> serde_json::Value {
    serde_json::to_value(FlatParams::from(params)).expect("flat params always serialize")
}
