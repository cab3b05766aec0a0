//! Radial integrals over balls and exterior domains.
//!
//! On the exterior frame `ρ > 1` the weights are evaluated at `s = 1/ρ`, and
//! a free outer end is closed by the harmonic extension `u(R)(R/ρ)^{n-2}`,
//! whose Dirichlet and Hardy contributions are added in closed form.

use super::grid::{Frame, RadialGrid};
use super::profile::{Boundary, RadialProfile};
use super::report::{QuotientParams, QuotientReport};
use crate::error::{Error, Result};
use crate::special_fn::{chain_from_ln, product_weight, series_weight, sphere_area, Dimension, XChainParams};

fn require_radial(u: &RadialProfile) -> Result<Frame> {
    let frame = u.frame();
    if frame.is_radial() {
        Ok(frame)
    } else {
        Err(Error::FrameMismatch { expected: "r_ball or rho_exterior".into(), found: frame.kind().to_string() })
    }
}

/// `ln s` at which the weights are evaluated for the node `r`.
fn weight_ln_arg(frame: &Frame, r: f64) -> f64 {
    match frame {
        Frame::RhoExterior { .. } => -r.ln(),
        _ => r.ln(),
    }
}

/// `R^{n-2} u(R)^2` at a free exterior end, zero otherwise. The harmonic
/// extension contributes `(n-2)` times this to the Dirichlet integral and
/// `(n-2)/4` times this to the Hardy integral.
fn exterior_tail(n: Dimension, u: &RadialProfile) -> f64 {
    match u.frame() {
        Frame::RhoExterior { end } if u.upper() == Boundary::Free => {
            end.powf(n.as_f64() - 2.0) * u.last_value().powi(2)
        }
        _ => 0.0,
    }
}

/// `ω_{n-1} Σ w_i f_i r_i^{n-1}`, the integral of a radial function.
pub fn integrate_radial(n: Dimension, grid: &RadialGrid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::Grid(format!("{} samples for {} nodes", samples.len(), grid.len())));
    }
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite integrand sample {bad}")));
    }
    let m = n.as_f64() - 1.0;
    let sum = grid.integrate_with(|i, r| samples[i] * r.powf(m));
    Ok(sphere_area(n.get())? * sum)
}

/// `∫ |∇u|^2`.
pub fn dirichlet_energy(n: Dimension, u: &RadialProfile) -> Result<f64> {
    require_radial(u)?;
    let du = u.derivative();
    let sq: Vec<f64> = du.iter().map(|d| d * d).collect();
    let interior = integrate_radial(n, u.grid(), &sq)?;
    let tail = (n.as_f64() - 2.0) * exterior_tail(n, u);
    Ok(interior + sphere_area(n.get())? * tail)
}

/// `((n-2)/2)^2 ∫ u^2 / |x|^2`.
pub fn hardy_term(n: Dimension, u: &RadialProfile) -> Result<f64> {
    require_radial(u)?;
    let samples: Vec<f64> = u.values().iter().zip(u.nodes()).map(|(v, r)| v * v / (r * r)).collect();
    let interior = integrate_radial(n, u.grid(), &samples)?;
    let tail = sphere_area(n.get())? * (n.as_f64() - 2.0) / 4.0 * exterior_tail(n, u);
    Ok(n.hardy_constant() * interior + tail)
}

/// `(1/4) Σ_{i≤k} ∫ (X_1 ··· X_i)^2 u^2 / |x|^2`.
pub fn series_term(p: &XChainParams, u: &RadialProfile) -> Result<f64> {
    let frame = require_radial(u)?;
    if p.k == 0 {
        return Ok(0.0);
    }
    let mut samples = Vec::with_capacity(u.values().len());
    for (v, r) in u.values().iter().zip(u.nodes()) {
        let chain = chain_from_ln(p.a, p.levels(), weight_ln_arg(&frame, *r))?;
        samples.push(series_weight(p.k, &chain) * v * v / (r * r));
    }
    let interior = integrate_radial(p.n, u.grid(), &samples)?;
    let tail = match frame {
        Frame::RhoExterior { end } if u.upper() == Boundary::Free => {
            let chain = chain_from_ln(p.a, p.levels(), -end.ln())?;
            series_weight(p.k, &chain) * exterior_tail(p.n, u) / (p.n.as_f64() - 2.0)
        }
        _ => 0.0,
    };
    Ok(interior + sphere_area(p.n.get())? * tail)
}

/// Left side of the improved Hardy-Sobolev inequality: Dirichlet energy
/// minus the Hardy term minus the logarithmic series.
pub fn hs_lhs(p: &XChainParams, u: &RadialProfile) -> Result<f64> {
    Ok(dirichlet_energy(p.n, u)? - hardy_term(p.n, u)? - series_term(p, u)?)
}

/// `∫ (X_1 ··· X_{k+1})^{2(n-1)/(n-2)} |u|^{2n/(n-2)}`.
pub fn hs_rhs_integral(p: &XChainParams, u: &RadialProfile) -> Result<f64> {
    let frame = require_radial(u)?;
    let q = p.n.critical_exponent();
    let mut samples = Vec::with_capacity(u.values().len());
    for (v, r) in u.values().iter().zip(u.nodes()) {
        if *v == 0.0 {
            samples.push(0.0);
            continue;
        }
        let chain = chain_from_ln(p.a, p.levels(), weight_ln_arg(&frame, *r))?;
        samples.push(product_weight(p.n, &chain) * v.abs().powf(q));
    }
    integrate_radial(p.n, u.grid(), &samples)
}

/// The weighted norm on the right side, raised to `(n-2)/n`.
pub fn hs_rhs_norm(p: &XChainParams, u: &RadialProfile) -> Result<f64> {
    Ok(hs_rhs_integral(p, u)?.powf(p.n.norm_exponent()))
}

/// `hs_lhs / hs_rhs_norm`.
pub fn hs_quotient(p: &XChainParams, u: &RadialProfile) -> Result<QuotientReport> {
    let numerator = hs_lhs(p, u)?;
    let denominator = hs_rhs_norm(p, u)?;
    QuotientReport::new(
        numerator,
        denominator,
        u.frame().kind(),
        QuotientParams::chain(p.n.get(), p.k, p.a),
        u.grid().meta(),
        None,
    )
}
