//! Figure presets: the shipped parameter files and the sweeps run on them.
//!
//! Every preset writes one CSV per curve plus `manifest.json`. Grid ranges,
//! point counts and the parameters the source figures leave open are listed
//! in the manifest under `assumed`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_params, to_json_value};
use crate::conventions;
use crate::densecoding::{rate_om, rate_point, RatePoint};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::pipeline::evaluate;
use crate::spectral::TwoModeBlock;
use crate::sweep::{run_sweep, Axis, Observable, SweepResult, SweepSpec};

pub const PRESET_IDS: [&str; 8] = [
    "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig6", "fig7",
];

/// Photon number used by the rate maps and the temperature curves.
pub const RATE_MAP_NBAR: f64 = 5.0;

// odd so that Ω_l = Ω_m lies on the grid
const FIG2_POINTS: usize = 61;
const MAP_POINTS: usize = 20;
const NBAR_POINTS: usize = 101;
const NBAR_MAX: f64 = 10.0;
const TEMPERATURE_POINTS: usize = 40;

pub fn preset_text(id: &str) -> Result<&'static str> {
    Ok(match id {
        "fig2" => include_str!("../../../presets/fig2.toml"),
        "fig3a" => include_str!("../../../presets/fig3a.toml"),
        "fig3b" => include_str!("../../../presets/fig3b.toml"),
        "fig4a" => include_str!("../../../presets/fig4a.toml"),
        "fig4b" => include_str!("../../../presets/fig4b.toml"),
        "fig5" => include_str!("../../../presets/fig5.toml"),
        "fig6" => include_str!("../../../presets/fig6.toml"),
        "fig7" => include_str!("../../../presets/fig7.toml"),
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}` (expected one of: {})",
                PRESET_IDS.join(", ")
            )))
        }
    })
}

pub fn preset_params(id: &str) -> Result<PhysicalParams> {
    parse_params(preset_text(id)?)
}

/// One CSV file of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub file: String,
    pub label: String,
    pub csv: String,
    pub rows: usize,
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub id: String,
    pub curves: Vec<Curve>,
    pub manifest: Value,
    /// Sweeps behind the curves, in curve order (empty for rate curves).
    pub sweeps: Vec<SweepResult>,
    /// Rate tables behind the curves (empty for sweeps).
    pub rates: Vec<Vec<RatePoint>>,
}

/// Fig. 7 diagnostics stored in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateChecks {
    /// Grid n̄ values where I_OM > I_F.
    pub beats_fock: Vec<f64>,
    /// Largest I_OM − I_D^opt over the grid; ≤ 0 means the bound holds.
    pub max_excess_over_capacity: f64,
    /// I_OM > I_S > I_C^het at the check photon number.
    pub ordering_at_check: bool,
    pub check_nbar: f64,
    /// I_OM > rate of the vacuum block at every grid point where defined.
    pub beats_vacuum_everywhere: bool,
    /// Present when no n̄ window beats I_F.
    pub shortfall: Option<String>,
}

fn nbar_grid() -> Vec<f64> {
    Axis::new("nbar", 0.0, NBAR_MAX, NBAR_POINTS).values()
}

fn rate_table(block: &TwoModeBlock) -> Result<Vec<RatePoint>> {
    nbar_grid()
        .into_iter()
        .map(|n| rate_point(block, n))
        .collect()
}

fn rate_csv(points: &[RatePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RatePoint::CSV_HEADER)?;
    for p in points {
        w.write_record(p.csv_record())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn rate_checks(points: &[RatePoint], check_nbar: f64) -> Result<RateChecks> {
    let vacuum = TwoModeBlock::vacuum();
    let mut beats_fock = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    let mut beats_vacuum = true;
    let mut ordering = false;
    for p in points {
        let Some(i) = p.i_om else { continue };
        if i > p.i_f {
            beats_fock.push(p.nbar);
        }
        max_excess = max_excess.max(i - p.i_d_opt);
        if let Ok(v) = rate_om(&vacuum, p.nbar) {
            beats_vacuum &= i > v;
        }
        if p.nbar == check_nbar {
            ordering = i > p.i_s && p.i_s > p.i_c_het;
        }
    }
    if !points.iter().any(|p| p.nbar == check_nbar) {
        return Err(Error::Config(format!(
            "n̄ = {check_nbar} is not on the rate grid"
        )));
    }
    let shortfall = beats_fock.is_empty().then(|| {
        let best = points
            .iter()
            .filter_map(|p| p.i_om.map(|i| i - p.i_f))
            .fold(f64::NEG_INFINITY, f64::max);
        format!(
            "I_OM never exceeds I_F on n̄ ∈ [0, {NBAR_MAX}]; closest approach I_OM − I_F = {best}"
        )
    });
    Ok(RateChecks {
        beats_fock,
        max_excess_over_capacity: max_excess,
        ordering_at_check: ordering,
        check_nbar,
        beats_vacuum_everywhere: beats_vacuum,
        shortfall,
    })
}

fn sweep_curve(file: String, label: String, result: &SweepResult) -> Result<Curve> {
    Ok(Curve {
        file,
        label,
        csv: result.to_csv_string()?,
        rows: result.points.len(),
    })
}

fn fmt_q(q: f64) -> String {
    format!("{q:.0}")
}

fn fmt_us(tau: f64) -> String {
    format!("{}us", tau * 1e6)
}

/// Run preset `id` around `base` (normally [`preset_params`]).
pub fn figure_with(id: &str, base: &PhysicalParams, workers: usize) -> Result<FigureOutput> {
    base.validate()?;
    let mut curves = Vec::new();
    let mut sweeps = Vec::new();
    let mut rates = Vec::new();
    let mut assumed = serde_json::Map::new();
    assumed.insert("wavelength".into(), json!(true));
    assumed.insert("filter_tau".into(), json!(true));
    assumed.insert("grid".into(), json!(true));
    let mut extra = serde_json::Map::new();

    let mut sweep =
        |spec: SweepSpec, params: &PhysicalParams, file: String, label: String| -> Result<()> {
            let mut spec = spec;
            spec.preset = Some(id.to_string());
            let r = run_sweep(&spec, params, workers)?;
            curves.push(sweep_curve(file, label, &r)?);
            sweeps.push(r);
            Ok(())
        };

    match id {
        "fig2" => {
            for q in [1e4, 1.5e5] {
                let p = PhysicalParams {
                    quality: q,
                    ..*base
                };
                let axis = Axis::new("filter_omega_l", 0.5, 1.5, FIG2_POINTS).in_omega_m();
                sweep(
                    SweepSpec::one_d(axis, Observable::LogNegativity),
                    &p,
                    format!("fig2_Q{}.csv", fmt_q(q)),
                    format!("E_N vs filter_omega_l/omega_m, Q = {}", fmt_q(q)),
                )?;
            }
        }
        "fig3a" | "fig5" => {
            let a = Axis::new("kappa_l", 0.05, 1.0, MAP_POINTS).in_omega_m();
            let b = Axis::new("kappa_r", 0.05, 1.0, MAP_POINTS).in_omega_m();
            let obs = if id == "fig3a" {
                Observable::LogNegativity
            } else {
                assumed.insert("nbar".into(), json!(RATE_MAP_NBAR));
                Observable::DenseCodingRate {
                    nbar: RATE_MAP_NBAR,
                }
            };
            sweep(
                SweepSpec::two_d(a, b, obs),
                base,
                format!("{id}_kappa.csv"),
                format!("{} vs kappa_l/omega_m, kappa_r/omega_m", obs.label()),
            )?;
        }
        "fig3b" | "fig6" => {
            let a = Axis::new("power_l", 1e-3, 0.06, MAP_POINTS);
            let b = Axis::new("power_r", 1e-3, 0.03, MAP_POINTS);
            let obs = if id == "fig3b" {
                Observable::LogNegativity
            } else {
                assumed.insert("nbar".into(), json!(RATE_MAP_NBAR));
                Observable::DenseCodingRate {
                    nbar: RATE_MAP_NBAR,
                }
            };
            sweep(
                SweepSpec::two_d(a, b, obs),
                base,
                format!("{id}_power.csv"),
                format!("{} vs power_l, power_r (W)", obs.label()),
            )?;
        }
        "fig4b" => {
            assumed.insert("nbar".into(), json!(RATE_MAP_NBAR));
            assumed.insert("middle_quality".into(), json!(5e4));
            for q in [1e4, 5e4, 1.5e5] {
                let p = PhysicalParams {
                    quality: q,
                    ..*base
                };
                let axis = Axis::new("temperature", 0.1, 10.0, TEMPERATURE_POINTS);
                sweep(
                    SweepSpec::one_d(
                        axis,
                        Observable::DenseCodingRate {
                            nbar: RATE_MAP_NBAR,
                        },
                    ),
                    &p,
                    format!("fig4b_Q{}.csv", fmt_q(q)),
                    format!(
                        "i_om at nbar = {RATE_MAP_NBAR} vs temperature (K), Q = {}",
                        fmt_q(q)
                    ),
                )?;
            }
        }
        "fig4a" | "fig7" => {
            let taus: Vec<f64> = if id == "fig4a" {
                vec![0.5e-6, 2e-6]
            } else {
                vec![base.filter_tau_l]
            };
            for tau in taus {
                let p = PhysicalParams {
                    filter_tau_l: tau,
                    filter_tau_r: tau,
                    ..*base
                };
                let eval = evaluate(&p)?;
                let block = eval.block.ok_or(Error::Unstable {
                    margin: eval.stability.margin,
                })?;
                let table = rate_table(&block)?;
                if id == "fig7" {
                    let checks = rate_checks(&table, RATE_MAP_NBAR)?;
                    extra.insert("checks".into(), serde_json::to_value(&checks)?);
                    extra.insert("block".into(), serde_json::to_value(block)?);
                }
                curves.push(Curve {
                    file: format!("{id}_tau{}.csv", fmt_us(tau)),
                    label: format!("rates vs nbar, tau = {tau:e} s"),
                    csv: rate_csv(&table)?,
                    rows: table.len(),
                });
                rates.push(table);
            }
        }
        other => {
            preset_text(other)?;
            unreachable!("preset ids are matched exhaustively")
        }
    }

    let manifest = json!({
        "preset": id,
        "version": crate::VERSION,
        "params": to_json_value(base),
        "assumed": Value::Object(assumed),
        "conventions": conventions::current(),
        "curves": curves.iter().map(|c| json!({
            "file": c.file,
            "label": c.label,
            "rows": c.rows,
        })).collect::<Vec<_>>(),
        "sweeps": sweeps.iter().map(|s| &s.spec).collect::<Vec<_>>(),
        "extra": Value::Object(extra),
    });
    Ok(FigureOutput {
        id: id.to_string(),
        curves,
        manifest,
        sweeps,
        rates,
    })
}

pub fn figure(id: &str, workers: usize) -> Result<FigureOutput> {
    figure_with(id, &preset_params(id)?, workers)
}

impl FigureOutput {
    /// Write the CSV files and `manifest.json` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for c in &self.curves {
            let path = dir.join(&c.file);
            fs::write(&path, &c.csv)?;
            written.push(path);
        }
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_and_validate() {
        for id in PRESET_IDS {
            let p = preset_params(id).unwrap();
            p.validate().unwrap();
            assert_eq!(p.quality, 1.5e5, "{id}");
        }
        assert_eq!(preset_params("fig2").unwrap(), PhysicalParams::reference());
        assert!(matches!(preset_params("fig9"), Err(Error::Config(_))));
    }

    #[test]
    fn rate_checks_on_vacuum() {
        let t = rate_table(&TwoModeBlock::vacuum()).unwrap();
        assert_eq!(t.len(), NBAR_POINTS);
        let c = rate_checks(&t, 5.0).unwrap();
        assert!(!c.beats_vacuum_everywhere);
        assert!(c.shortfall.is_none() == !c.beats_fock.is_empty());
        assert!(rate_checks(&t, 5.05).is_err());
    }

    #[test]
    fn file_names() {
        assert_eq!(fmt_q(1.5e5), "150000");
        assert_eq!(fmt_us(5e-6), "5us");
        assert_eq!(fmt_us(0.5e-6), "0.5us");
    }
}
