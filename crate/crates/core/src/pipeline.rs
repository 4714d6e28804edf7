//! The full chain from raw parameters to the two-mode output block.

use serde::Serialize;

use crate::dynamics::{build, stability, LinearModel, StabilityReport};
use crate::error::Result;
use crate::gaussian::{duan_sum, log_negativity_from_zeta, pt_symplectic, SymplecticPair};
use crate::params::{derive, DerivedParams, PhysicalParams};
use crate::spectral::{
    output_cm, reduce_two_mode, BlockWarning, OutputCM, OutputFilters, TwoModeBlock,
};

/// Result of [`evaluate`]. The covariance fields are `None` when the drift
/// matrix is not Hurwitz.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub model: LinearModel,
    pub stability: StabilityReport,
    pub output: Option<OutputCM>,
    pub block: Option<TwoModeBlock>,
}

impl Evaluation {
    pub fn derived(&self) -> &DerivedParams {
        &self.model.derived
    }
}

pub fn evaluate(params: &PhysicalParams) -> Result<Evaluation> {
    let derived = derive(params)?;
    let filters = OutputFilters::from_params(params)?;
    let model = build(&derived);
    let report = stability(&model)?;
    if !report.stable {
        return Ok(Evaluation {
            model,
            stability: report,
            output: None,
            block: None,
        });
    }
    let cm = output_cm(&model, &filters)?;
    let block = reduce_two_mode(&cm);
    Ok(Evaluation {
        model,
        stability: report,
        output: Some(cm),
        block: Some(block),
    })
}

/// Entanglement summary of a two-mode block.
#[derive(Debug, Clone, Serialize)]
pub struct EntanglementReport {
    pub block: TwoModeBlock,
    pub symplectic: SymplecticPair,
    pub log_negativity: f64,
    pub duan_sum: f64,
    pub warnings: Vec<BlockWarning>,
}

pub fn entanglement(block: &TwoModeBlock) -> Result<EntanglementReport> {
    let symplectic = pt_symplectic(block)?;
    Ok(EntanglementReport {
        block: *block,
        symplectic,
        log_negativity: log_negativity_from_zeta(symplectic.zeta),
        duan_sum: duan_sum(block),
        warnings: block.warnings(),
    })
}
