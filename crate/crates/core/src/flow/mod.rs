//! Discrete curve-shortening flow of piecewise geodesic flowers.

mod audit;
mod config;
mod field;
mod run;

pub use audit::{
    audit_flow, check_absorbing_escape, check_fixed_point, check_flow_properties, PropertyCheck,
    PropertyReport,
};
pub use config::FlowConfig;
pub use field::{short_weight, vector_field, FieldSample};
pub use run::{
    advance, effective_dt, run_cage_flow, run_flow, run_flow_observed, step, ConvexBall, FlowError,
    FlowOutcome, FlowState, OutcomeKind, RunOptions, StepView, TraceRecord,
};

use crate::error::Result;
use crate::manifold::Manifold;
use crate::nets::PiecewiseGeodesicFlower;

/// First variation of the length along the field at a flower (after it has
/// been resampled to the configured number of points).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstVariation {
    /// `dL/dt`.
    pub rate: f64,
    /// `Σ |V|²`; equals `-rate` unless some petal is short.
    pub energy: f64,
    /// Some petal blends the short and the long regime.
    pub blending: bool,
}

pub fn first_variation(
    m: &Manifold,
    flower: &PiecewiseGeodesicFlower,
    config: &FlowConfig,
) -> Result<FirstVariation> {
    let state = FlowState::new(m, flower, config)?;
    let f = state.field(m, config)?;
    Ok(FirstVariation {
        rate: f.length_rate,
        energy: f.energy,
        blending: f.blending,
    })
}

#[cfg(test)]
mod tests;
