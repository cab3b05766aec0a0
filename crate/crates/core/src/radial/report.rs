use serde::{Deserialize, Serialize};

use super::grid::{FrameKind, GridMeta};
use crate::error::{Error, Result};

/// Parameters a quotient was evaluated with; absent entries do not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientParams {
    pub n: u32,
    pub k: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl QuotientParams {
    pub fn dimension(n: u32) -> Self {
        Self { n, k: None, a: None, b: None }
    }

    pub fn chain(n: u32, k: usize, a: f64) -> Self {
        Self { n, k: Some(k), a: Some(a), b: None }
    }
}

/// A Rayleigh quotient together with its parts and provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    pub frame: FrameKind,
    pub params: QuotientParams,
    pub grid: GridMeta,
    /// `∫_T^∞ τ^{-2(n-1)/(n-2)} dτ` beyond a free half-line end.
    pub tail_weight: Option<f64>,
}

impl QuotientReport {
    pub(crate) fn new(
        numerator: f64,
        denominator: f64,
        frame: FrameKind,
        params: QuotientParams,
        grid: GridMeta,
        tail_weight: Option<f64>,
    ) -> Result<Self> {
        if !numerator.is_finite() || !denominator.is_finite() {
            return Err(Error::Numeric(format!(
                "quotient parts not finite: {numerator} / {denominator}"
            )));
        }
        if denominator <= 0.0 {
            return Err(Error::Degenerate(format!(
                "denominator {denominator:e} vanishes on the {frame} frame; the profile is zero"
            )));
        }
        Ok(Self {
            numerator,
            denominator,
            quotient: numerator / denominator,
            frame,
            params,
            grid,
            tail_weight,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
