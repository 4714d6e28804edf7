//! One- and two-dimensional parameter sweeps with stability masking.
//!
//! Grid points are evaluated on a dedicated thread pool and gathered back in
//! grid order, so the output does not depend on the worker count.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::densecoding::rate_om;
use crate::dynamics::{build, stability};
use crate::error::{Error, Result};
use crate::gaussian::{duan_sum, log_negativity};
use crate::params::{derive, PhysicalParams, FIELD_NAMES};
use crate::spectral::{output_cm, reduce_two_mode, OutputFilters};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "OPTOMECH_CV_WORKERS";

/// Units of an axis' lo/hi values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisUnit {
    Si,
    /// Multiples of the base mechanical frequency Ω_m.
    OmegaM,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub unit: AxisUnit,
}

impl Axis {
    pub fn new(param: &str, lo: f64, hi: f64, points: usize) -> Self {
        Self {
            param: param.to_string(),
            lo,
            hi,
            points,
            unit: AxisUnit::Si,
        }
    }

    pub fn in_omega_m(mut self) -> Self {
        self.unit = AxisUnit::OmegaM;
        self
    }

    /// Grid coordinates in axis units.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn label(&self) -> String {
        match self.unit {
            AxisUnit::Si => self.param.clone(),
            AxisUnit::OmegaM => format!("{}_over_omega_m", self.param),
        }
    }

    fn validate(&self) -> Result<()> {
        if !FIELD_NAMES.contains(&self.param.as_str()) {
            return Err(Error::Config(format!(
                "unknown sweep parameter `{}` (expected one of: {})",
                self.param,
                FIELD_NAMES.join(", ")
            )));
        }
        if self.unit == AxisUnit::OmegaM && self.param == "omega_m" {
            return Err(Error::Config(
                "omega_m cannot be swept in units of itself".into(),
            ));
        }
        if self.points < 2 {
            return Err(Error::Config(format!(
                "axis `{}` needs at least 2 points, got {}",
                self.param, self.points
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::Config(format!(
                "axis `{}` needs finite lo <= hi, got [{}, {}]",
                self.param, self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// `param:lo:hi:points[:omega_m]`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(parts.len() == 4 || parts.len() == 5) {
            return Err(Error::Config(format!(
                "axis `{s}` must look like param:lo:hi:points[:omega_m]"
            )));
        }
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("axis `{s}`: {e}")))
        };
        let points = parts[3]
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Config(format!("axis `{s}`: {e}")))?;
        let mut axis = Axis::new(parts[0].trim(), num(parts[1])?, num(parts[2])?, points);
        match parts.get(4).map(|u| u.trim()) {
            None | Some("si") => {}
            Some("omega_m") => axis.unit = AxisUnit::OmegaM,
            Some(u) => return Err(Error::Config(format!("axis `{s}`: unknown unit `{u}`"))),
        }
        Ok(axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    LogNegativity,
    DenseCodingRate { nbar: f64 },
    DuanSum,
    StabilityMargin,
}

impl Observable {
    pub fn label(&self) -> &'static str {
        match self {
            Observable::LogNegativity => "log_negativity",
            Observable::DenseCodingRate { .. } => "i_om",
            Observable::DuanSum => "duan_sum",
            Observable::StabilityMargin => "stability_margin",
        }
    }
}

/// `log_negativity`, `duan`, `margin`, or `rate:<nbar>`.
impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "log_negativity" | "en" => Ok(Observable::LogNegativity),
            "duan" | "duan_sum" => Ok(Observable::DuanSum),
            "margin" | "stability_margin" => Ok(Observable::StabilityMargin),
            other => {
                if let Some(n) = other.strip_prefix("rate:") {
                    let nbar = n
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("observable `{s}`: {e}")))?;
                    if !(nbar >= 0.0) {
                        return Err(Error::Config(format!("observable `{s}`: n̄ must be >= 0")));
                    }
                    Ok(Observable::DenseCodingRate { nbar })
                } else {
                    Err(Error::Config(format!(
                        "unknown observable `{s}` (log_negativity, duan, margin, rate:<nbar>)"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub observable: Observable,
    pub preset: Option<String>,
}

impl SweepSpec {
    pub fn one_d(axis: Axis, observable: Observable) -> Self {
        Self {
            axis1: axis,
            axis2: None,
            observable,
            preset: None,
        }
    }

    pub fn two_d(axis1: Axis, axis2: Axis, observable: Observable) -> Self {
        Self {
            axis1,
            axis2: Some(axis2),
            observable,
            preset: None,
        }
    }

    fn axes(&self) -> impl Iterator<Item = &Axis> {
        std::iter::once(&self.axis1).chain(self.axis2.as_ref())
    }

    pub fn grid_size(&self) -> usize {
        self.axes().map(|a| a.points).product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Axis coordinates in axis units.
    pub coords: Vec<f64>,
    /// Observable value; `None` where masked or outside its domain.
    pub value: Option<f64>,
    /// Drift matrix is Hurwitz.
    pub stable: bool,
    pub margin: f64,
    /// Largest entry of the quadrature error estimate, when computed.
    pub quad_error: Option<f64>,
    /// Why `value` is missing at a stable point, if it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
}

/// Worker count: `OPTOMECH_CV_WORKERS` if set, else `requested`, else the
/// available parallelism.
pub fn resolve_workers(requested: Option<usize>) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .or(requested.filter(|&n| n > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn point_params(base: &PhysicalParams, spec: &SweepSpec, coords: &[f64]) -> Result<PhysicalParams> {
    let mut p = *base;
    for (axis, &x) in spec.axes().zip(coords) {
        let v = match axis.unit {
            AxisUnit::Si => x,
            AxisUnit::OmegaM => x * base.omega_m,
        };
        p.set_field(&axis.param, v)?;
    }
    Ok(p)
}

fn grid(spec: &SweepSpec) -> Vec<Vec<f64>> {
    let xs = spec.axis1.values();
    match &spec.axis2 {
        None => xs.into_iter().map(|x| vec![x]).collect(),
        Some(a2) => {
            let ys = a2.values();
            xs.iter()
                .flat_map(|&x| ys.iter().map(move |&y| vec![x, y]))
                .collect()
        }
    }
}

fn evaluate_point(
    params: &PhysicalParams,
    observable: Observable,
    coords: Vec<f64>,
) -> Result<SweepPoint> {
    let derived = derive(params)?;
    let model = build(&derived);
    let report = stability(&model)?;
    let mut point = SweepPoint {
        coords,
        value: None,
        stable: report.stable,
        margin: report.margin,
        quad_error: None,
        note: None,
    };
    if let Observable::StabilityMargin = observable {
        point.value = Some(report.margin);
        return Ok(point);
    }
    if !report.stable {
        return Ok(point);
    }
    let cm = match output_cm(&model, &OutputFilters::from_params(params)?) {
        Ok(cm) => cm,
        Err(e) => {
            log::warn!("sweep point {:?}: {e}", point.coords);
            point.note = Some(e.to_string());
            return Ok(point);
        }
    };
    point.quad_error = Some(cm.max_quad_error());
    let block = reduce_two_mode(&cm);
    let value = match observable {
        Observable::LogNegativity => log_negativity(&block),
        Observable::DenseCodingRate { nbar } => rate_om(&block, nbar),
        Observable::DuanSum => Ok(duan_sum(&block)),
        Observable::StabilityMargin => unreachable!(),
    };
    match value {
        Ok(v) => point.value = Some(v),
        Err(e) => point.note = Some(e.to_string()),
    }
    Ok(point)
}

/// Evaluate `spec` around `base` on `workers` threads.
pub fn run_sweep(spec: &SweepSpec, base: &PhysicalParams, workers: usize) -> Result<SweepResult> {
    for axis in spec.axes() {
        axis.validate()?;
    }
    if spec
        .axis2
        .as_ref()
        .is_some_and(|a| a.param == spec.axis1.param)
    {
        return Err(Error::Config("both axes sweep the same parameter".into()));
    }
    base.validate()?;

    let cells = grid(spec);
    // reject bad ranges before any evaluation
    let params: Vec<PhysicalParams> = cells
        .iter()
        .map(|c| {
            let p = point_params(base, spec, c)?;
            p.validate()
                .map_err(|e| Error::Config(format!("sweep point {c:?}: {e}")))?;
            Ok(p)
        })
        .collect::<Result<_>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let observable = spec.observable;
    let points = pool.install(|| {
        params
            .par_iter()
            .zip(cells.into_par_iter())
            .map(|(p, c)| evaluate_point(p, observable, c))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        spec: spec.clone(),
        points,
    })
}

impl SweepResult {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.spec.axes().map(Axis::label).collect();
        h.push(self.spec.observable.label().to_string());
        h.extend(["stable", "margin", "quad_error"].map(String::from));
        h
    }

    /// RFC-4180 CSV with a one-line header. Missing values are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for p in &self.points {
            let mut rec: Vec<String> = p.coords.iter().map(|x| x.to_string()).collect();
            rec.push(p.value.map(|v| v.to_string()).unwrap_or_default());
            rec.push(p.stable.to_string());
            rec.push(p.margin.to_string());
            rec.push(p.quad_error.map(|v| v.to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    /// Point with the largest observable value.
    pub fn argmax(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.value.is_some())
            .max_by(|a, b| a.value.unwrap().total_cmp(&b.value.unwrap()))
    }
}
